//! Island gadgets, boundary bids and the adversarial instances built from
//! them, plus the lower-bound experiment harness.

use std::fmt;

use itertools::Itertools;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bids::{Bid, BidList};
use crate::error::{Error, Result};
use crate::learn_general::{learn_general, Limits};
use crate::oracle::{demand_nonmarginal, DemandOracle};
use crate::point::Rational;
use crate::queries::super_query_points;

/// `+1` if `v` has an even number of odd entries, `-1` otherwise.
pub fn rho(v: &[i64]) -> i64 {
    if v.iter().filter(|c| c.rem_euclid(2) == 1).count() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Unit bids on `x + {0,1}^n` with weight `rho` and on `x + {2,3}^n` with
/// weight `-rho`.
pub fn island_gadget(x: &[i64]) -> BidList {
    let n = x.len();
    let mut bids = Vec::with_capacity(2 << n);
    for (cube, sign) in [(0i64, 1i64), (2, -1)] {
        for corner in (0..n).map(|_| [cube, cube + 1]).multi_cartesian_product() {
            let vector: Vec<i64> = corner.iter().zip(x).map(|(c, o)| c + o).collect();
            bids.push(Bid::new(vector, sign * rho(&corner)));
        }
    }
    BidList::normalize(n, bids).expect("gadget bids are well formed")
}

/// Unit bids at `m e^i` and at `m e^i + M e^j` (ordered `i != j`) for
/// `m = 0..M-1`.
pub fn boundary_bids(n: usize, magnitude: i64) -> Result<BidList> {
    if magnitude < 1 {
        return Err(Error::PreconditionUnmet(format!(
            "boundary bids need M >= 1, got {magnitude}"
        )));
    }
    let mut bids = Vec::new();
    for i in 0..n {
        for m in 0..magnitude {
            let mut v = vec![0; n];
            v[i] = m;
            bids.push(Bid::unit(v.clone()));
            for j in (0..n).filter(|&j| j != i) {
                let mut w = v.clone();
                w[j] = magnitude;
                bids.push(Bid::unit(w));
            }
        }
    }
    BidList::normalize(n, bids)
}

/// Gadget cells available to the adversary: `4 [k-1]_0^n`.
pub fn gadget_cells(n: usize, k: i64) -> Vec<Vec<i64>> {
    (0..n)
        .map(|_| (0..k).map(|c| 4 * c))
        .multi_cartesian_product()
        .collect()
}

/// Island gadget at `cell` together with the boundary bids for `M = 4k`.
pub fn adversarial_instance(n: usize, k: i64, cell: &[i64]) -> Result<BidList> {
    if cell.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: cell.len(),
        });
    }
    if k < 1 || cell.iter().any(|&c| c < 0 || c % 4 != 0 || c > 4 * (k - 1)) {
        return Err(Error::CellOutOfRange(cell.to_vec()));
    }
    island_gadget(cell).union(&boundary_bids(n, 4 * k)?)
}

/// Unit bids at `M (e^i + e^j)` for every pair of goods `i < j`.
pub fn corner_bids(n: usize, magnitude: i64) -> BidList {
    let bids = (0..n).tuple_combinations().map(|(i, j)| {
        let mut v = vec![0; n];
        v[i] = magnitude;
        v[j] = magnitude;
        Bid::unit(v)
    });
    BidList::normalize(n, bids).expect("corner bids are well formed")
}

/// The adversarial instance plus [`corner_bids`]: the boundary bid
/// `M e^i + M e^j` covers pair indifference on the diagonal `p_i = p_j`.
pub fn covered_adversarial_instance(n: usize, k: i64, cell: &[i64]) -> Result<BidList> {
    adversarial_instance(n, k, cell)?.union(&corner_bids(n, 4 * k))
}

/// Positive unit bids on the first axis at the given positions.
pub fn axis_instance(n: usize, positions: &[i64]) -> Result<BidList> {
    BidList::normalize(
        n,
        positions.iter().map(|&x| {
            let mut v = vec![0; n];
            v[0] = x;
            Bid::unit(v)
        }),
    )
}

/// Adding the gadget at `x` to `base` must leave demand unchanged at every
/// super-query representative around every integral point of
/// `[-1, M + 1]^n` outside `x + {0..3}^n`.
pub fn gadget_leak_check(x: &[i64], base: &BidList, magnitude: i64) -> bool {
    let n = x.len();
    let with = base.union(&island_gadget(x)).expect("same dimension");
    (0..n)
        .map(|_| -1..=magnitude + 1)
        .multi_cartesian_product()
        .filter(|q| q.iter().zip(x).any(|(c, o)| c - o < 0 || c - o > 3))
        .all(|q| {
            super_query_points(&q)
                .iter()
                .all(|(_, p)| demand_nonmarginal(&with, p).ok() == demand_nonmarginal(base, p).ok())
        })
}

/// Among `{x in {0,1}^n : x <= c}`, are there as many vectors with an even
/// number of ones as with an odd number?
pub fn parity_count_check(c: &[Rational]) -> Result<bool> {
    if !c.iter().any(|ci| ci >= &Rational::one()) {
        return Err(Error::PreconditionUnmet(
            "some coordinate must be at least 1".into(),
        ));
    }
    let mut balance = 0i64;
    for x in (0..c.len()).map(|_| [0i64, 1]).multi_cartesian_product() {
        if x.iter()
            .zip(c)
            .all(|(&xi, ci)| &Rational::from_integer(xi.into()) <= ci)
        {
            balance += rho(&x);
        }
    }
    Ok(balance == 0)
}

/// Outcome of one lower-bound run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowerBoundReport {
    pub n: usize,
    pub k: i64,
    pub hidden_cell: Vec<i64>,
    pub located_cell: Option<Vec<i64>>,
    pub queries_used: u64,
    pub k_power_n: u64,
    pub recovered: bool,
    pub bid_count: usize,
    pub unit_bids: i64,
    pub formula_bid_count: i64,
    pub hyperplanes: usize,
}

impl LowerBoundReport {
    /// Queries any correct learner needs to tell the `k^n` cells apart.
    pub fn floor(&self) -> u64 {
        self.k_power_n - 1
    }
}

impl fmt::Display for LowerBoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cell = |c: &[i64]| c.iter().map(|v| v.to_string()).join(",");
        writeln!(f, "n={} k={} M={}", self.n, self.k, 4 * self.k)?;
        writeln!(f, "hidden_cell={}", cell(&self.hidden_cell))?;
        match &self.located_cell {
            Some(c) => writeln!(f, "located_cell={}", cell(c))?,
            None => writeln!(f, "located_cell=none")?,
        }
        writeln!(f, "queries_used={}", self.queries_used)?;
        writeln!(f, "k_power_n={}", self.k_power_n)?;
        writeln!(f, "floor={}", self.floor())?;
        writeln!(f, "bids={}", self.bid_count)?;
        writeln!(f, "unit_bids={}", self.unit_bids)?;
        writeln!(f, "formula_bids={}", self.formula_bid_count)?;
        writeln!(f, "hyperplanes={}", self.hyperplanes)?;
        writeln!(f, "recovered={}", self.recovered)
    }
}

/// Hide a gadget in a random cell, learn the instance with the general
/// learner and report the cost next to the `k^n - 1` floor.
pub fn lower_bound_experiment(n: usize, k: i64, seed: u64) -> Result<LowerBoundReport> {
    if n == 0 || k < 1 {
        return Err(Error::PreconditionUnmet("need n >= 1 and k >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cell: Vec<i64> = (0..n).map(|_| 4 * rng.gen_range(0..k)).collect();
    let instance = adversarial_instance(n, k, &cell)?;
    let boundary = boundary_bids(n, 4 * k)?;
    let mut oracle = DemandOracle::new(instance.clone());
    let run = learn_general(&mut oracle, Limits::default())?;
    let located_cell = run
        .bids
        .difference(&boundary)?
        .bids()
        .first()
        .map(|b| b.vector.clone());
    let pairs = (n * n.saturating_sub(1) / 2) as i64;
    Ok(LowerBoundReport {
        n,
        k,
        hidden_cell: cell,
        located_cell,
        queries_used: oracle.ledger().total(),
        k_power_n: (k as u64).pow(n as u32),
        recovered: run.bids == instance,
        bid_count: instance.len(),
        unit_bids: instance.unit_count(),
        formula_bid_count: (1i64 << (n + 1)) + 4 * k * (n as i64 + pairs),
        hyperplanes: run.hyperplanes.len(),
    })
}
