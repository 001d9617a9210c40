//! The demand correspondence of a bid list and an instrumented demand oracle.
//!
//! Goods are numbered `0..=n`, with good 0 the reject good whose price and
//! bid value are both fixed at zero.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_traits::{Signed, Zero};

use crate::bids::{Bid, BidList};
use crate::error::{Error, Result};
use crate::hull::discrete_hull;
use crate::point::{int, ratio, Bundle, ExtRational, Rational, RationalPoint, ScaledPoint};

/// Goods in `[n]_0` that `bid` demands at `p`. Never empty.
pub fn bid_demanded_goods(bid: &Bid, p: &RationalPoint) -> BTreeSet<usize> {
    mask_to_goods(ScaledPoint::new(p).demanded_mask(&bid.vector))
}

pub(crate) fn mask_to_goods(mask: u64) -> BTreeSet<usize> {
    (0..64).filter(|g| mask & (1 << g) != 0).collect()
}

/// True iff some bid is indifferent between two goods at `p`.
pub fn is_marginal(bids: &BidList, p: &RationalPoint) -> bool {
    let scaled = ScaledPoint::new(p);
    bids.bids()
        .iter()
        .any(|b| scaled.demanded_mask(&b.vector).count_ones() > 1)
}

/// The unique bundle demanded at a non-marginal price.
pub fn demand_nonmarginal(bids: &BidList, p: &RationalPoint) -> Result<Bundle> {
    check_dim(bids.n(), p)?;
    let scaled = ScaledPoint::new(p);
    let mut bundle = Bundle::zero(bids.n());
    for bid in bids.bids() {
        let mask = scaled.demanded_mask(&bid.vector);
        if mask.count_ones() > 1 {
            return Err(Error::MarginalPrice);
        }
        bundle.add_good(mask.trailing_zeros() as usize, bid.weight);
    }
    Ok(bundle)
}

/// Demand where each bid's tie is resolved toward the tied good of lowest
/// `rank`. Equals demand at `p + eps * d` for a direction `d` ordered by rank.
pub(crate) fn demand_with_priority(bids: &BidList, p: &RationalPoint, rank: &[usize]) -> Bundle {
    let scaled = ScaledPoint::new(p);
    let mut bundle = Bundle::zero(bids.n());
    for bid in bids.bids() {
        let mask = scaled.demanded_mask(&bid.vector);
        let good = if mask.count_ones() == 1 {
            mask.trailing_zeros() as usize
        } else {
            (0..rank.len())
                .filter(|&g| mask & (1 << g) != 0)
                .min_by_key(|&g| rank[g])
                .expect("demanded set is never empty")
        };
        bundle.add_good(good, bid.weight);
    }
    bundle
}

fn check_dim(n: usize, p: &RationalPoint) -> Result<()> {
    if p.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.dim(),
        });
    }
    Ok(())
}

/// Points arbitrarily close to `p`, one in each cell of the orthant/ordering
/// triangulation of a small ball around `p`. The radius stays below half the
/// distance to every integral SS hyperplane not through `p`, so every point
/// is non-marginal for every integral bid list.
pub(crate) fn perturbation_points(p: &RationalPoint) -> Vec<RationalPoint> {
    let n = p.dim();
    let mut gaps: Vec<Rational> = Vec::new();
    let mut push_gap = |v: Rational| {
        let frac = &v - v.floor();
        if !frac.is_zero() {
            let other = Rational::from_integer(1.into()) - &frac;
            gaps.push(frac.min(other));
        }
    };
    for i in 0..n {
        push_gap(p[i].clone());
        for j in (i + 1)..n {
            push_gap(&p[i] - &p[j]);
        }
    }
    let gap = gaps.into_iter().min().unwrap_or_else(|| int(1));
    let radius = gap * ratio(1, 4);
    let step = ratio(1, n as i64 + 1);

    let mut out = Vec::new();
    for orthant in (0..n).map(|_| [-1i64, 1]).multi_cartesian_product() {
        for perm in (0..n).permutations(n) {
            let mut coords = p.coords().to_vec();
            for (k, &i) in perm.iter().enumerate() {
                let mag = &step * int(k as i64 + 1);
                coords[i] += &radius * mag * int(orthant[i]);
            }
            out.push(RationalPoint::new(coords));
        }
    }
    out
}

/// The demand correspondence `D_B(p)`: the discrete convex hull of the
/// bundles demanded at non-marginal prices arbitrarily close to `p`.
/// Brute force; meant for small instances.
pub fn demand_set(bids: &BidList, p: &RationalPoint) -> BTreeSet<Bundle> {
    if !is_marginal(bids, p) {
        let x = demand_nonmarginal(bids, p).expect("non-marginal");
        return BTreeSet::from([x]);
    }
    let near: BTreeSet<Bundle> = perturbation_points(p)
        .iter()
        .map(|q| demand_nonmarginal(bids, q).expect("perturbed point is non-marginal"))
        .collect();
    discrete_hull(&near)
}

/// Ledger categories for demand queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryCategory {
    Delta,
    Existence,
    Super,
    Search,
    Other,
}

impl QueryCategory {
    pub const ALL: [QueryCategory; 5] = [
        QueryCategory::Delta,
        QueryCategory::Existence,
        QueryCategory::Super,
        QueryCategory::Search,
        QueryCategory::Other,
    ];

    pub fn label(self) -> &'static str {
        match self {
            QueryCategory::Delta => "delta",
            QueryCategory::Existence => "existence",
            QueryCategory::Super => "super",
            QueryCategory::Search => "search",
            QueryCategory::Other => "other",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Counts of demand-oracle invocations.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryLedger {
    counts: [u64; 5],
}

impl QueryLedger {
    pub fn record(&mut self, category: QueryCategory) {
        self.counts[category.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn count(&self, category: QueryCategory) -> u64 {
        self.counts[category.index()]
    }

    pub fn reset(&mut self) {
        self.counts = [0; 5];
    }
}

impl fmt::Display for QueryLedger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "total={}", self.total())?;
        for c in QueryCategory::ALL {
            write!(f, " {}={}", c.label(), self.count(c))?;
        }
        Ok(())
    }
}

/// Anything that answers demand queries: the hidden-list oracle, or a
/// residual view over one.
pub trait DemandQuery {
    fn n(&self) -> usize;
    fn query(&mut self, p: &RationalPoint, category: QueryCategory) -> Bundle;
}

/// Adversarial demand oracle over a hidden bid list. At marginal prices it
/// resolves every bid's tie by a fixed priority over goods.
#[derive(Clone, Debug)]
pub struct DemandOracle {
    hidden: BidList,
    rank: Vec<usize>,
    ledger: QueryLedger,
}

impl DemandOracle {
    /// Default priority: reject first, then goods in ascending order.
    pub fn new(hidden: BidList) -> Self {
        let rank = (0..=hidden.n()).collect();
        DemandOracle {
            hidden,
            rank,
            ledger: QueryLedger::default(),
        }
    }

    /// `priority` lists all goods `0..=n`, most preferred first.
    pub fn with_priority(hidden: BidList, priority: &[usize]) -> Result<Self> {
        let n = hidden.n();
        let mut sorted = priority.to_vec();
        sorted.sort_unstable();
        if sorted != (0..=n).collect::<Vec<_>>() {
            return Err(Error::PreconditionUnmet(format!(
                "priority {priority:?} is not a permutation of 0..={n}"
            )));
        }
        let mut rank = vec![0; n + 1];
        for (pos, &g) in priority.iter().enumerate() {
            rank[g] = pos;
        }
        Ok(DemandOracle {
            hidden,
            rank,
            ledger: QueryLedger::default(),
        })
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn reset_ledger(&mut self) {
        self.ledger.reset();
    }

    /// The hidden list, for test harnesses and verification only.
    pub fn hidden(&self) -> &BidList {
        &self.hidden
    }
}

impl DemandQuery for DemandOracle {
    fn n(&self) -> usize {
        self.hidden.n()
    }

    fn query(&mut self, p: &RationalPoint, category: QueryCategory) -> Bundle {
        assert_eq!(p.dim(), self.hidden.n(), "query dimension");
        self.ledger.record(category);
        demand_with_priority(&self.hidden, p, &self.rank)
    }
}

impl<T: DemandQuery + ?Sized> DemandQuery for &mut T {
    fn n(&self) -> usize {
        (**self).n()
    }

    fn query(&mut self, p: &RationalPoint, category: QueryCategory) -> Bundle {
        (**self).query(p, category)
    }
}

fn diagonal_probe(n: usize, m: i64) -> RationalPoint {
    RationalPoint::new(vec![int(m) + ratio(1, 2); n])
}

/// Smallest `m` in `[0, upper]` with empty demand at `(m + 1/2) e^[n]`.
pub fn find_magnitude<O: DemandQuery + ?Sized>(oracle: &mut O, upper: i64) -> Result<i64> {
    let n = oracle.n();
    if !oracle
        .query(&diagonal_probe(n, upper), QueryCategory::Search)
        .is_zero()
    {
        return Err(Error::UpperBoundTooSmall(upper));
    }
    // Demand is nonempty at lo - 1 (or lo = 0) and empty at hi.
    let (mut lo, mut hi) = (0i64, upper);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if oracle
            .query(&diagonal_probe(n, mid), QueryCategory::Search)
            .is_zero()
        {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Magnitude without a known upper bound: probe `m = 0, 1, 3, 7, ...` until
/// demand vanishes, then binary search the last doubling interval.
/// Uses at most `2 * ceil(log2(M + 1))` queries (one when `M = 0`).
pub fn discover_magnitude<O: DemandQuery + ?Sized>(oracle: &mut O) -> i64 {
    let n = oracle.n();
    let empty_at = |m: i64, o: &mut O| {
        o.query(&diagonal_probe(n, m), QueryCategory::Search)
            .is_zero()
    };
    if empty_at(0, oracle) {
        return 0;
    }
    let mut last_nonempty = 0i64;
    let mut probe = 1i64;
    while !empty_at(probe, oracle) {
        last_nonempty = probe;
        probe = 2 * probe + 1;
    }
    let (mut lo, mut hi) = (last_nonempty + 1, probe);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if empty_at(mid, oracle) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Valuation of a positive bid list: each unit bid is a unit-demand bidder,
/// and `v(x)` is the best total value over assignments of unit bids to goods
/// that hand out exactly `x`. Brute force over assignments.
pub fn valuation_positive(bids: &BidList, x: &Bundle) -> Result<ExtRational> {
    if !bids.is_positive() {
        return Err(Error::NegativeWeight);
    }
    if x.dim() != bids.n() {
        return Err(Error::DimensionMismatch {
            expected: bids.n(),
            found: x.dim(),
        });
    }
    let units: Vec<&[i64]> = bids
        .bids()
        .iter()
        .flat_map(|b| std::iter::repeat_n(b.vector.as_slice(), b.weight as usize))
        .collect();
    let demanded: i64 = x.counts().iter().sum();
    if x.counts().iter().any(|&c| c < 0) || demanded > units.len() as i64 {
        return Ok(ExtRational::MinusInfinity);
    }
    // remaining[0] is the number of unit bids left unassigned (rejected).
    let mut remaining = Vec::with_capacity(x.dim() + 1);
    remaining.push(units.len() as i64 - demanded);
    remaining.extend_from_slice(x.counts());
    let best = best_assignment(&units, &mut remaining);
    Ok(best.map_or(ExtRational::MinusInfinity, |v| ExtRational::Finite(int(v))))
}

fn best_assignment(units: &[&[i64]], remaining: &mut [i64]) -> Option<i64> {
    let Some((first, rest)) = units.split_first() else {
        return Some(0);
    };
    let mut best: Option<i64> = None;
    for good in 0..remaining.len() {
        if remaining[good] == 0 {
            continue;
        }
        remaining[good] -= 1;
        if let Some(v) = best_assignment(rest, remaining) {
            let value = if good == 0 { 0 } else { first[good - 1] } + v;
            best = Some(best.map_or(value, |b| b.max(value)));
        }
        remaining[good] += 1;
    }
    best
}

/// True iff `p` is strictly above every bid vector, so every bid is rejected.
pub fn all_rejected(bids: &BidList, p: &RationalPoint) -> bool {
    bids.bids().iter().all(|b| {
        b.vector
            .iter()
            .zip(p.coords())
            .all(|(&v, c)| (c - int(v)).is_positive())
    })
}
