//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bids::BidList;
use crate::bridge::{demand_from_valuation, ValuationOracle};
use crate::error::Error;
use crate::gadgets::{adversarial_instance, lower_bound_experiment};
use crate::learn_general::{learn_general, verify_learned, Limits};
use crate::learn_positive::learn_positive_bids;
use crate::oracle::{
    demand_set, is_marginal, DemandOracle, DemandQuery, QueryCategory, QueryLedger,
};
use crate::point::RationalPoint;
use crate::validity::{is_valid, Validity};

#[derive(Parser, Debug)]
#[command(
    name = "bidlearn",
    version,
    about = "Learn strong-substitutes bid lists from demand queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Demand of a bid list at one price.
    Demand {
        #[arg(long)]
        bids: PathBuf,
        /// Comma-separated exact rationals, e.g. "3,5/2".
        #[arg(long)]
        price: String,
        /// Also print the full demand set (brute force, small instances).
        #[arg(long)]
        set: bool,
    },
    /// Learn a positive bid list through its demand oracle.
    LearnPositive {
        #[arg(long)]
        bids: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the recovered list here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn a list with positive and negative bids.
    LearnGeneral {
        #[arg(long)]
        bids: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        max_vertices: usize,
        #[arg(long)]
        max_hyperplanes: Option<usize>,
        /// Seed for the random verification prices.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Check validity; prints a witness and exits 1 on a violation.
    Validate {
        #[arg(long)]
        bids: PathBuf,
    },
    /// Emit an adversarial gadget instance.
    Gadget {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: i64,
        /// Gadget cell, e.g. "0,4"; drawn from the seed when absent.
        #[arg(long)]
        cell: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Query counts of the positive learner over random instances.
    Bench {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        instances: usize,
        #[arg(long, default_value_t = 10)]
        max_bids: usize,
        #[arg(long, default_value_t = 32)]
        max_m: i64,
        #[arg(long, default_value_t = 3)]
        max_w: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Hide a gadget, learn it back and compare with the k^n - 1 floor.
    BenchLowerBound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Demand computed from valuation queries alone, next to the direct oracle.
    BridgeDemo {
        #[arg(long)]
        bids: PathBuf,
        #[arg(long)]
        price: String,
    },
}

/// Process outcome: 0 success, 1 learner or validator failure, 2 bad usage.
pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

enum Failure {
    Usage(String),
    Failed(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Failed(e.to_string())
    }
}

type Outcome = std::result::Result<i32, Failure>;

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Failed(msg)) => {
            let _ = writeln!(err, "failed: {msg}");
            EXIT_FAILURE
        }
    }
}

fn read_bids(path: &Path) -> std::result::Result<BidList, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    BidList::from_file_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn parse_price(s: &str, n: usize) -> std::result::Result<RationalPoint, Failure> {
    let p = RationalPoint::parse(s).map_err(|e| Failure::Usage(e.to_string()))?;
    if p.dim() != n {
        return Err(Failure::Usage(format!(
            "price has {} coordinates, expected {n}",
            p.dim()
        )));
    }
    Ok(p)
}

fn write_file(path: &Path, text: &str) -> std::result::Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> std::result::Result<(), Failure> {
    match path {
        Some(p) => write_file(p, text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Failed(e.to_string())),
    }
}

fn header(bids: &BidList) -> String {
    format!(
        "n={} B={} M={} W={}\n",
        bids.n(),
        bids.len(),
        bids.magnitude(),
        bids.max_weight()
    )
}

fn ledger_rows(ledger: &QueryLedger) -> String {
    let mut s = format!("queries_total={}\n", ledger.total());
    for c in QueryCategory::ALL {
        s += &format!("queries_{}={}\n", c.label(), ledger.count(c));
    }
    s
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    match command {
        Command::Demand { bids, price, set } => {
            let list = read_bids(&bids)?;
            let p = parse_price(&price, list.n())?;
            let mut oracle = DemandOracle::new(list.clone());
            let bundle = oracle.query(&p, QueryCategory::Other);
            let mut text = format!("bundle={bundle}\nmarginal={}\n", is_marginal(&list, &p));
            if set {
                text += &format!("demand_set={}\n", demand_set(&list, &p).iter().join(" "));
            }
            emit(out, None, &text)?;
            Ok(EXIT_OK)
        }
        Command::LearnPositive {
            bids,
            report,
            out: dest,
        } => {
            let hidden = read_bids(&bids)?;
            if !hidden.is_positive() {
                return Err(Failure::Usage(
                    "learn-positive needs a list of positive bids".into(),
                ));
            }
            let mut oracle = DemandOracle::new(hidden.clone());
            let learnt = learn_positive_bids(&mut oracle)?;
            let recovered = learnt == hidden;
            if let Some(path) = report {
                let text = format!(
                    "{}{}recovered={recovered}\n",
                    header(&hidden),
                    ledger_rows(oracle.ledger())
                );
                write_file(&path, &text)?;
            }
            emit(out, dest.as_deref(), &learnt.to_file_string())?;
            Ok(if recovered { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::LearnGeneral {
            bids,
            report,
            out: dest,
            max_vertices,
            max_hyperplanes,
            seed,
            trials,
        } => {
            let hidden = read_bids(&bids)?;
            let mut oracle = DemandOracle::new(hidden.clone());
            let run = learn_general(
                &mut oracle,
                Limits {
                    max_hyperplanes,
                    max_vertices,
                },
            )?;
            let ledger = oracle.ledger().clone();
            let verified = verify_learned(&mut oracle, &run.bids, trials, seed);
            let recovered = run.bids == hidden;
            if let Some(path) = report {
                let text = format!(
                    "{}{}hyperplanes={}\nvertices={}\nsuper_query_centers={}\nverified={verified}\nrecovered={recovered}\n",
                    header(&hidden),
                    ledger_rows(&ledger),
                    run.hyperplanes.len(),
                    run.vertex_count,
                    run.super_queries,
                );
                write_file(&path, &text)?;
            }
            emit(out, dest.as_deref(), &run.bids.to_file_string())?;
            Ok(if recovered && verified {
                EXIT_OK
            } else {
                EXIT_FAILURE
            })
        }
        Command::Validate { bids } => {
            let list = read_bids(&bids)?;
            match is_valid(&list) {
                Validity::Valid => {
                    emit(out, None, "valid\n")?;
                    Ok(EXIT_OK)
                }
                Validity::Violation(w) => {
                    emit(out, None, &format!("invalid {w}\n"))?;
                    Ok(EXIT_FAILURE)
                }
            }
        }
        Command::Gadget {
            n,
            k,
            cell,
            seed,
            out: dest,
        } => {
            let cell: Vec<i64> = match cell {
                Some(s) => s
                    .split(',')
                    .map(|c| {
                        c.trim()
                            .parse::<i64>()
                            .map_err(|e| Failure::Usage(format!("cell {s:?}: {e}")))
                    })
                    .collect::<std::result::Result<_, _>>()?,
                None => {
                    use rand::Rng;
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    (0..n).map(|_| 4 * rng.gen_range(0..k.max(1))).collect()
                }
            };
            let instance =
                adversarial_instance(n, k, &cell).map_err(|e| Failure::Usage(e.to_string()))?;
            emit(out, dest.as_deref(), &instance.to_file_string())?;
            Ok(EXIT_OK)
        }
        Command::Bench {
            n,
            instances,
            max_bids,
            max_m,
            max_w,
            seed,
            report,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cols = QueryCategory::ALL.iter().map(|c| c.label()).join(" ");
            let mut text = format!("instance n B M W total {cols} recovered\n");
            let mut all_ok = true;
            for idx in 0..instances {
                let hidden = BidList::random_positive(&mut rng, n, max_bids, max_m, max_w);
                let mut oracle = DemandOracle::new(hidden.clone());
                let learnt = learn_positive_bids(&mut oracle)?;
                let ok = learnt == hidden;
                all_ok &= ok;
                let l = oracle.ledger();
                let counts = QueryCategory::ALL.iter().map(|&c| l.count(c)).join(" ");
                text += &format!(
                    "{idx} {} {} {} {} {} {counts} {ok}\n",
                    hidden.n(),
                    hidden.len(),
                    hidden.magnitude(),
                    hidden.max_weight(),
                    l.total()
                );
            }
            emit(out, report.as_deref(), &text)?;
            Ok(if all_ok { EXIT_OK } else { EXIT_FAILURE })
        }
        Command::BenchLowerBound { n, k, seed, report } => {
            if n == 0 || k < 1 {
                return Err(Failure::Usage("need --n >= 1 and --k >= 1".into()));
            }
            let r = lower_bound_experiment(n, k, seed)?;
            emit(out, report.as_deref(), &r.to_string())?;
            Ok(if r.recovered && r.queries_used >= r.floor() {
                EXIT_OK
            } else {
                EXIT_FAILURE
            })
        }
        Command::BridgeDemo { bids, price } => {
            let list = read_bids(&bids)?;
            let p = parse_price(&price, list.n())?;
            let mut vo = ValuationOracle::from_positive_bids(&list)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let bundle = demand_from_valuation(&mut vo, &p)?;
            let direct = DemandOracle::new(list.clone()).query(&p, QueryCategory::Other);
            let agrees = demand_set(&list, &p).contains(&bundle);
            let text = format!(
                "bundle={bundle}\noracle_bundle={direct}\nvaluation_queries={}\nin_demand_set={agrees}\n",
                vo.queries()
            );
            emit(out, None, &text)?;
            Ok(if agrees { EXIT_OK } else { EXIT_FAILURE })
        }
    }
}
