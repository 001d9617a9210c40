//! Acceptance suite: one PASS/FAIL line per criterion. Runs with its own
//! harness so every line prints; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use bidlearn::bridge::{demand_from_valuation, ValuationOracle};
use bidlearn::gadgets::{
    adversarial_instance, axis_instance, covered_adversarial_instance, gadget_cells,
    gadget_leak_check, lower_bound_experiment,
};
use bidlearn::learn_general::{learn_general, random_generic_point, verify_learned, Limits};
use bidlearn::learn_positive::{find_one_positive_bid, learn_positive_bids};
use bidlearn::oracle::{demand_nonmarginal, demand_set, is_marginal, valuation_positive};
use bidlearn::queries::{delta_query, existence_query, super_query};
use bidlearn::validity::{is_valid, Validity};
use bidlearn::{Bid, BidList, Bundle, DemandOracle, ExtRational, Rational, RationalPoint};
use itertools::Itertools;
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smallest `k` with `2^k >= x`.
fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as u64
    }
}

fn floor_log2(x: u64) -> u64 {
    63 - x.max(1).leading_zeros() as u64
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn binomial(m: u64, k: u64) -> u128 {
    if k > m {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (m - i) as u128 / (i + 1) as u128)
}

fn list(n: usize, raw: &[(&[i64], i64)]) -> BidList {
    BidList::normalize(n, raw.iter().map(|(v, w)| Bid::new(v.to_vec(), *w))).unwrap()
}

fn random_signed(rng: &mut ChaCha8Rng, n: usize, max_bids: usize, max_coord: i64) -> BidList {
    let count = rng.gen_range(0..=max_bids);
    let bids = (0..count).map(|_| {
        let v = (0..n).map(|_| rng.gen_range(0..=max_coord)).collect();
        let w = rng.gen_range(1..=3) * if rng.gen_bool(0.35) { -1 } else { 1 };
        Bid::new(v, w)
    });
    BidList::normalize(n, bids).unwrap()
}

/// A valid list with a negative bid, for `n >= 2`: a negative bid at `c`,
/// positive bids at `c - a e^i` and `c + a 1`, plus random positive bids.
/// Every candidate is still run through the validity check.
fn random_valid_mixed(rng: &mut ChaCha8Rng, n: usize, max_coord: i64) -> BidList {
    assert!(
        n >= 2,
        "one good admits no valid list with a net negative bid"
    );
    loop {
        let a = rng.gen_range(1..=2);
        let c: Vec<i64> = (0..n).map(|_| rng.gen_range(a..=max_coord)).collect();
        let mut core = vec![
            Bid::new(c.clone(), -1),
            Bid::unit(c.iter().map(|x| x + a).collect()),
        ];
        for i in 0..n {
            let mut v = c.clone();
            v[i] -= a;
            core.push(Bid::unit(v));
        }
        let extra = BidList::random_positive(rng, n, 3, max_coord + a, 2);
        let candidate = BidList::normalize(n, core).unwrap().union(&extra).unwrap();
        if !candidate.is_positive() && is_valid(&candidate).is_valid() {
            return candidate;
        }
    }
}

/// A point `center + d` with `|d_i| < 1` and small denominators, so that
/// marginal prices come up often.
fn near_point(rng: &mut ChaCha8Rng, center: &[i64]) -> RationalPoint {
    let den = *[2i64, 3, 4, 6, 12, 1009].choose(rng).unwrap();
    RationalPoint::new(
        center
            .iter()
            .map(|&c| {
                Rational::new(
                    BigInt::from(c * den + rng.gen_range(1 - den..den)),
                    BigInt::from(den),
                )
            })
            .collect(),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for idx in 0..200 {
        let n = rng.gen_range(1..=5);
        let (b, m, w) = (
            rng.gen_range(1..=20),
            rng.gen_range(1..=64),
            rng.gen_range(1..=5),
        );
        let hidden = BidList::random_positive(&mut rng, n, b, m, w);
        let mut oracle = DemandOracle::new(hidden.clone());
        let learnt = match learn_positive_bids(&mut oracle) {
            Ok(l) => l,
            Err(e) => return outcome(false, format!("instance {idx}: {e}")),
        };
        if learnt != hidden {
            return outcome(false, format!("instance {idx}: learnt list differs"));
        }
        let (b, m) = (hidden.len() as u64, hidden.magnitude() as u64);
        let bound = 4 * n as u64 * b * (ceil_log2(m + 1) + 2) + 2 * ceil_log2(m + 2);
        let used = oracle.ledger().total();
        if used > bound {
            return outcome(
                false,
                format!("instance {idx}: {used} queries > bound {bound}"),
            );
        }
        worst = worst.max(used as f64 / bound as f64);
    }
    outcome(
        true,
        format!("200 instances recovered, max queries/bound = {worst:.3}"),
    )
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases = 0;
    for n in 1..=8usize {
        for m in [1i64, 2, 7, 64, 1000, 1024] {
            for _ in 0..4 {
                let mut v: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=m)).collect();
                v[rng.gen_range(0..n)] = m;
                let w = rng.gen_range(1..=5);
                let hidden = list(n, &[(&v, w)]);
                let mut oracle = DemandOracle::new(hidden);
                match find_one_positive_bid(&mut oracle, m) {
                    Ok(found) if found == (v.clone(), w) => {}
                    other => return outcome(false, format!("bid {v:?} w{w}: got {other:?}")),
                }
                let bound = 4 * n as u64 * (ceil_log2(m as u64 + 1) + 1);
                let used = oracle.ledger().total();
                if used > bound {
                    return outcome(false, format!("n={n} M={m}: {used} queries > {bound}"));
                }
                cases += 1;
            }
        }
    }
    outcome(
        true,
        format!("{cases} singleton instances within 4n(ceil(log2(M+1))+1)"),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut negative_lists = 0;
    for idx in 0..500 {
        let n = rng.gen_range(1..=4);
        let hidden = random_signed(&mut rng, n, 8, 6);
        negative_lists += usize::from(!hidden.is_positive());
        let q: Vec<i64> = match hidden.bids().choose(&mut rng) {
            Some(b) if rng.gen_bool(0.5) => {
                b.vector.iter().map(|&c| c + rng.gen_range(0..=1)).collect()
            }
            _ => (0..n).map(|_| rng.gen_range(0..=7)).collect(),
        };
        let expected: i64 = hidden
            .bids()
            .iter()
            .filter(|b| b.vector[0] == q[0] && b.vector.iter().zip(&q).all(|(x, y)| x <= y))
            .map(|b| b.weight)
            .sum();
        let mut oracle = DemandOracle::new(hidden);
        let got = delta_query(&mut oracle, &q).unwrap();
        if got != expected || oracle.ledger().total() != 2 {
            return outcome(
                false,
                format!("pair {idx}, q={q:?}: delta {got}, brute force {expected}"),
            );
        }
    }
    outcome(
        true,
        format!("500 pairs exact ({negative_lists} lists with negative bids)"),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for idx in 0..300 {
        let n = rng.gen_range(1..=4);
        let hidden = random_signed(&mut rng, n, 8, 5);
        let p: Vec<i64> = match hidden.bids().choose(&mut rng) {
            Some(b) if rng.gen_bool(0.5) => b.vector.clone(),
            _ => (0..n).map(|_| rng.gen_range(0..=5)).collect(),
        };
        let expected = hidden.weight_at(&p);
        let mut oracle = DemandOracle::new(hidden);
        let got = existence_query(&mut oracle, &p).unwrap();
        let cost = oracle.ledger().total();
        if got != expected || cost != 1 << n {
            return outcome(
                false,
                format!("case {idx}, p={p:?}: got {got} expected {expected}, cost {cost}"),
            );
        }
    }
    for m in 1..=20u64 {
        let s: i128 = (1..=m)
            .map(|i| if i % 2 == 1 { 1 } else { -1 } * binomial(m, i) as i128)
            .sum();
        if s != 1 {
            return outcome(false, format!("alternating binomial sum for m={m} is {s}"));
        }
    }
    outcome(
        true,
        "300 lookups exact at 2^n queries each; alternating binomial sums are 1 for m=1..20",
    )
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut marginal = 0;
    for idx in 0..50 {
        let n = if idx % 2 == 0 {
            rng.gen_range(1..=3)
        } else {
            rng.gen_range(2..=3)
        };
        let hidden = if idx % 2 == 0 {
            BidList::random_positive(&mut rng, n, 6, 4, 3)
        } else {
            random_valid_mixed(&mut rng, n, 4)
        };
        let center: Vec<i64> = match hidden.bids().choose(&mut rng) {
            Some(b) if rng.gen_bool(0.6) => b.vector.clone(),
            _ => (0..n).map(|_| rng.gen_range(-1..=5)).collect(),
        };
        let mut oracle = DemandOracle::new(hidden.clone());
        let rec = super_query(&mut oracle, &center).unwrap();
        for _ in 0..1000 {
            let p = near_point(&mut rng, &center);
            marginal += usize::from(is_marginal(&hidden, &p));
            if rec.local_demand(&p).ok() != Some(demand_set(&hidden, &p)) {
                return outcome(false, format!("list {idx}: local demand differs at {p}"));
            }
        }
        let before = oracle.ledger().total();
        let from_record = rec.existence_from_record();
        if oracle.ledger().total() != before {
            return outcome(false, "reading existence from a record spent queries");
        }
        let direct = existence_query(&mut oracle, &center).unwrap();
        if from_record != direct {
            return outcome(
                false,
                format!("list {idx}: existence {from_record} from record, {direct} direct"),
            );
        }
    }
    outcome(
        true,
        format!("50 records x 1000 prices exact ({marginal} marginal prices)"),
    )
}

struct GeneralCase {
    label: String,
    hidden: BidList,
}

fn general_cases() -> Vec<GeneralCase> {
    let mut cases = Vec::new();
    for x in 0..=8 {
        for y in 0..=8 {
            for w in [1, 2] {
                cases.push(GeneralCase {
                    label: format!("single ({x},{y}) w{w}"),
                    hidden: list(2, &[(&[x, y], w)]),
                });
            }
        }
    }
    let snapshot = [([3i64, 3], -1i64), ([1, 3], 1), ([3, 1], 1), ([5, 5], 1)];
    for (dx, dy) in (0..3).cartesian_product(0..3) {
        let bids = snapshot
            .iter()
            .map(|(v, w)| Bid::new(vec![v[0] + dx, v[1] + dy], *w));
        cases.push(GeneralCase {
            label: format!("snapshot shifted by ({dx},{dy})"),
            hidden: BidList::normalize(2, bids).unwrap(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for idx in 0..10 {
        let n = if idx < 7 { 2 } else { 3 };
        cases.push(GeneralCase {
            label: format!("random mixed #{idx}"),
            hidden: random_valid_mixed(&mut rng, n, 5),
        });
    }
    for (n, k) in [(2usize, 2i64), (2, 3), (3, 2)] {
        let cells = gadget_cells(n, k);
        let cell = cells.choose(&mut rng).unwrap().clone();
        cases.push(GeneralCase {
            label: format!("adversarial n={n} k={k} cell {cell:?}"),
            hidden: adversarial_instance(n, k, &cell).unwrap(),
        });
    }
    cases
}

fn criterion_6() -> Outcome {
    let mut slowest = (0.0f64, String::new());
    let mut worst_ratio = 0.0f64;
    let cases = general_cases();
    for (idx, case) in cases.iter().enumerate() {
        let start = Instant::now();
        let n = case.hidden.n() as u64;
        let mut oracle = DemandOracle::new(case.hidden.clone());
        let run = match learn_general(&mut oracle, Limits::default()) {
            Ok(r) => r,
            Err(e) => return outcome(false, format!("{}: {e}", case.label)),
        };
        let used = oracle.ledger().total();
        if run.bids != case.hidden {
            return outcome(false, format!("{}: learnt list differs", case.label));
        }
        if !verify_learned(&mut oracle, &run.bids, 1000, idx as u64) {
            return outcome(false, format!("{}: verification failed", case.label));
        }
        let h = run.hyperplanes.len() as u64;
        let cells = (1u128 << n) * factorial(n) as u128;
        let m = run.magnitude as u64;
        let bound = cells * binomial(h, n)
            + h as u128 * (2 * ceil_log2(4 * (m + 1)) as u128 + (n * n) as u128 * cells);
        if used as u128 > bound {
            return outcome(
                false,
                format!("{}: {used} queries > bound {bound}", case.label),
            );
        }
        worst_ratio = worst_ratio.max(used as f64 / bound as f64);
        let secs = start.elapsed().as_secs_f64();
        if secs > slowest.0 {
            slowest = (secs, case.label.clone());
        }
    }
    if slowest.0 > 60.0 {
        return outcome(false, format!("{} took {:.1}s", slowest.1, slowest.0));
    }
    outcome(
        true,
        format!(
            "{} instances recovered and verified, max queries/bound = {worst_ratio:.3}, slowest {:.2}s ({})",
            cases.len(),
            slowest.0,
            slowest.1
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut checked = 0;
    for (n, m) in [(1usize, 8i64), (2, 12), (3, 8)] {
        let positions: Vec<i64> = (0..).map(|c| 4 * c).take_while(|&x| x + 3 <= m).collect();
        for x in (0..n)
            .map(|_| positions.iter().copied())
            .multi_cartesian_product()
        {
            if !gadget_leak_check(&x, &BidList::empty(n), m) {
                return outcome(false, format!("gadget at {x:?} leaks (n={n}, M={m})"));
            }
            checked += 1;
        }
    }
    outcome(true, format!("{checked} placements leak-free"))
}

/// Every cell when there are at most 9, else the two extreme cells and one
/// seeded random cell. A full validity scan at n=3, k=3 is slow.
fn checked_cells(n: usize, k: i64) -> Vec<Vec<i64>> {
    let all = gadget_cells(n, k);
    if all.len() <= 9 {
        return all;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let middle = all[rng.gen_range(1..all.len() - 1)].clone();
    vec![all[0].clone(), middle, all[all.len() - 1].clone()]
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    for (n, k) in [(2usize, 2i64), (2, 3), (3, 2), (3, 3)] {
        let mut bad = 0;
        let mut first = None;
        let cells = checked_cells(n, k);
        for cell in &cells {
            if let Validity::Violation(w) = is_valid(&adversarial_instance(n, k, cell).unwrap()) {
                bad += 1;
                first.get_or_insert((cell.clone(), w));
            }
        }
        if let Some((cell, w)) = first {
            failures.push(format!(
                "n={n} k={k}: {bad}/{} checked cells invalid, e.g. cell {cell:?} at {w}",
                cells.len()
            ));
        }
    }
    let negative_rejected = !is_valid(&list(2, &[(&[1, 1], -1)])).is_valid();
    if !negative_rejected {
        failures.push("singleton negative bid accepted".into());
    }
    let covered: Vec<String> = [(2usize, 2i64), (3, 2), (3, 3)]
        .iter()
        .map(|&(n, k)| {
            let cells = checked_cells(n, k);
            let ok = cells
                .iter()
                .filter(|c| is_valid(&covered_adversarial_instance(n, k, c).unwrap()).is_valid())
                .count();
            format!("n={n} k={k} {ok}/{}", cells.len())
        })
        .collect();
    let note = format!(
        "with corner bids M(e^i+e^j) added, valid cells: {}",
        covered.join(", ")
    );
    if failures.is_empty() {
        outcome(
            true,
            format!("all adversarial instances valid, negative singleton rejected; {note}"),
        )
    } else {
        outcome(
            false,
            format!(
                "{}; negative singleton rejected: {negative_rejected}; the construction has no bid at M(e^i+e^j), \
                 so nothing offsets the gadget's diagonal bids; {note}",
                failures.join("; ")
            ),
        )
    }
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut nonmarginal = 0;
    for idx in 0..100 {
        let n = rng.gen_range(1..=3);
        let hidden = loop {
            let l = BidList::random_positive(&mut rng, n, 4, 6, 3);
            if l.unit_count() <= 8 && !l.is_empty() {
                break l;
            }
        };
        let l = hidden.unit_count();
        let domain: Vec<Bundle> = (0..n)
            .map(|_| 0..=l)
            .multi_cartesian_product()
            .map(Bundle)
            .filter(|x| x.l1_norm() <= l)
            .collect();
        let mut vo = ValuationOracle::from_positive_bids(&hidden).unwrap();
        let m = hidden.magnitude();
        for _ in 0..50 {
            let p = if rng.gen_bool(0.5) {
                random_generic_point(&mut rng, n, -1, m + 1)
            } else {
                RationalPoint::new(
                    (0..n)
                        .map(|_| Rational::new(rng.gen_range(-2..=2 * m + 2).into(), 2.into()))
                        .collect(),
                )
            };
            let before = vo.queries();
            let x = demand_from_valuation(&mut vo, &p).unwrap();
            let spent = vo.queries() - before;
            let cap = ((n as u64 + 1).pow(2)) * (l as u64 + 1);
            if spent > cap {
                return outcome(
                    false,
                    format!("instance {idx}: {spent} valuation queries > {cap}"),
                );
            }
            let value = |y: &Bundle| {
                valuation_positive(&hidden, y)
                    .unwrap()
                    .minus_finite(&y.dot(&p))
            };
            let best = domain.iter().map(value).max().unwrap();
            if value(&x) != best || !matches!(best, ExtRational::Finite(_)) {
                return outcome(
                    false,
                    format!("instance {idx}: bundle {x} is not a maximizer at {p}"),
                );
            }
            if !is_marginal(&hidden, &p) {
                nonmarginal += 1;
                if demand_nonmarginal(&hidden, &p).ok() != Some(x.clone()) {
                    return outcome(
                        false,
                        format!("instance {idx}: {x} differs from direct demand at {p}"),
                    );
                }
            } else if !demand_set(&hidden, &p).contains(&x) {
                return outcome(
                    false,
                    format!("instance {idx}: {x} outside the demand set at {p}"),
                );
            }
        }
    }
    outcome(
        true,
        format!("100 instances x 50 prices optimal ({nonmarginal} non-marginal)"),
    )
}

fn criterion_10() -> Outcome {
    let mut runs = Vec::new();
    for (n, k) in [(1usize, 2i64), (1, 4), (1, 6), (2, 2), (2, 3), (3, 2)] {
        for seed in 0..2 {
            let r = match lower_bound_experiment(n, k, seed) {
                Ok(r) => r,
                Err(e) => return outcome(false, format!("n={n} k={k}: {e}")),
            };
            if !r.recovered || r.queries_used < r.floor() {
                return outcome(
                    false,
                    format!(
                        "n={n} k={k} seed={seed}: recovered={} queries={} floor={}",
                        r.recovered,
                        r.queries_used,
                        r.floor()
                    ),
                );
            }
            if seed == 0 {
                runs.push(format!("n={n},k={k}:{}>={}", r.queries_used, r.floor()));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut axis_cases = 0;
    for n in 1..=3usize {
        for m in [8i64, 32, 128, 512] {
            for b in [1usize, 2, 4, 8] {
                if b as i64 > m {
                    continue;
                }
                let mut positions: Vec<i64> = (0..m)
                    .collect::<Vec<_>>()
                    .choose_multiple(&mut rng, b - 1)
                    .copied()
                    .collect();
                positions.push(m);
                let hidden = axis_instance(n, &positions).unwrap();
                let mut oracle = DemandOracle::new(hidden.clone());
                let learnt = learn_positive_bids(&mut oracle).unwrap();
                let floor = b as u64 * floor_log2((m as u64) / b as u64);
                let used = oracle.ledger().total();
                if learnt != hidden || used < floor {
                    return outcome(
                        false,
                        format!("axis n={n} M={m} B={b}: {used} queries, floor {floor}"),
                    );
                }
                axis_cases += 1;
            }
        }
    }
    outcome(
        true,
        format!(
            "{}; {axis_cases} axis instances above B*floor(log2(M/B))",
            runs.join(" ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("positive-bid round trip", criterion_1),
        ("single-bid cost", criterion_2),
        ("delta query semantics", criterion_3),
        ("existence query semantics", criterion_4),
        ("super query reconstruction", criterion_5),
        ("general learner round trip", criterion_6),
        ("gadget no-leak", criterion_7),
        ("adversarial validity", criterion_8),
        ("bridge equivalence", criterion_9),
        ("lower-bound floor", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} [{tag}] {name} ({:.2}s): {}",
            i + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
