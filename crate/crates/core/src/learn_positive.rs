//! Learning lists of positive bids one bid at a time by binary search.

use std::collections::HashMap;

use crate::bids::{Bid, BidList};
use crate::error::{Error, Result};
use crate::oracle::{demand_with_priority, discover_magnitude, DemandQuery, QueryCategory};
use crate::point::{Bundle, RationalPoint};
use crate::queries::delta_points;

/// The hidden oracle minus the demand of the bids learnt so far.
pub struct ResidualOracle<'a, O: DemandQuery + ?Sized> {
    base: &'a mut O,
    learnt: BidList,
    rank: Vec<usize>,
}

impl<'a, O: DemandQuery + ?Sized> ResidualOracle<'a, O> {
    pub fn new(base: &'a mut O) -> Self {
        let n = base.n();
        ResidualOracle {
            base,
            learnt: BidList::empty(n),
            rank: (0..=n).collect(),
        }
    }

    pub fn learnt(&self) -> &BidList {
        &self.learnt
    }

    pub fn push(&mut self, bid: Bid) -> Result<()> {
        self.learnt = self
            .learnt
            .union(&BidList::normalize(self.learnt.n(), [bid])?)?;
        Ok(())
    }

    pub fn into_learnt(self) -> BidList {
        self.learnt
    }
}

impl<O: DemandQuery + ?Sized> DemandQuery for ResidualOracle<'_, O> {
    fn n(&self) -> usize {
        self.base.n()
    }

    fn query(&mut self, p: &RationalPoint, category: QueryCategory) -> Bundle {
        let total = self.base.query(p, category);
        total.sub(&demand_with_priority(&self.learnt, p, &self.rank))
    }
}

/// Caches delta values so that repeated probes of a point cost nothing.
struct DeltaCache<'o, O: DemandQuery + ?Sized> {
    oracle: &'o mut O,
    values: HashMap<Vec<i64>, i64>,
}

impl<O: DemandQuery + ?Sized> DeltaCache<'_, O> {
    fn delta(&mut self, q: &[i64]) -> i64 {
        if let Some(&v) = self.values.get(q) {
            return v;
        }
        let (minus, plus) = delta_points(q);
        let v = self.oracle.query(&minus, QueryCategory::Delta)[0]
            - self.oracle.query(&plus, QueryCategory::Delta)[0];
        self.values.insert(q.to_vec(), v);
        v
    }

    fn good_one_below(&mut self, q: &[i64]) -> i64 {
        let (minus, _) = delta_points(q);
        self.oracle.query(&minus, QueryCategory::Delta)[0]
    }
}

/// Locate one bid of a nonempty positive list with magnitude at most `m`.
/// Returns its vector and weight.
pub fn find_one_positive_bid<O: DemandQuery + ?Sized>(
    oracle: &mut O,
    m: i64,
) -> Result<(Vec<i64>, i64)> {
    find_one_traced(oracle, m, None, &mut |_, _| {})
}

/// As [`find_one_positive_bid`], calling `observe(i, p)` after the `i`-th
/// coordinate (1-based, `i >= 2`) is fixed at the point `p`.
pub fn find_one_positive_bid_traced<O, F>(
    oracle: &mut O,
    m: i64,
    observe: &mut F,
) -> Result<(Vec<i64>, i64)>
where
    O: DemandQuery + ?Sized,
    F: FnMut(usize, &[i64]),
{
    find_one_traced(oracle, m, None, observe)
}

/// `known_first` is the already observed demand for good 1 at the lower
/// delta point of `(0, m, ..., m)`, when the caller has it.
fn find_one_traced<O, F>(
    oracle: &mut O,
    m: i64,
    known_first: Option<i64>,
    observe: &mut F,
) -> Result<(Vec<i64>, i64)>
where
    O: DemandQuery + ?Sized,
    F: FnMut(usize, &[i64]),
{
    let n = oracle.n();
    if n == 0 {
        return Err(Error::PreconditionUnmet("no goods".into()));
    }
    if m < 0 {
        return Err(Error::PreconditionUnmet(format!("negative magnitude {m}")));
    }
    let mut cache = DeltaCache {
        oracle,
        values: HashMap::new(),
    };
    let mut p = vec![m; n];

    // Good-1 demand along (k, m, ..., m) is non-increasing in k; find the
    // last k where it is positive.
    p[0] = 0;
    let first = match known_first {
        Some(v) => v,
        None => cache.good_one_below(&p),
    };
    if first <= 0 {
        return Err(Error::InvariantViolation(
            "no demand for good 1 at the bottom of the first line".into(),
        ));
    }
    let (mut lo, mut hi) = (0i64, m);
    while lo < hi {
        let mid = lo + (hi - lo + 1) / 2;
        p[0] = mid;
        if cache.good_one_below(&p) > 0 {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    p[0] = lo;
    if cache.delta(&p) <= 0 {
        return Err(Error::InvariantViolation(format!(
            "delta not positive at {p:?}"
        )));
    }

    // Along each later line, delta is non-decreasing; find the first k
    // where it turns positive. The top of the line is the previous point.
    for i in 1..n {
        p[i] = m;
        if cache.delta(&p) <= 0 {
            return Err(Error::InvariantViolation(format!(
                "delta not positive at {p:?}"
            )));
        }
        let (mut lo, mut hi) = (0i64, m);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            p[i] = mid;
            if cache.delta(&p) > 0 {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        p[i] = lo;
        observe(i + 1, &p);
    }
    let weight = cache.delta(&p);
    Ok((p, weight))
}

/// Recover a hidden list of positive bids exactly.
pub fn learn_positive_bids<O: DemandQuery + ?Sized>(oracle: &mut O) -> Result<BidList> {
    let m = discover_magnitude(oracle);
    let n = oracle.n();
    let mut residual = ResidualOracle::new(oracle);
    let mut bottom = vec![m; n];
    if n > 0 {
        bottom[0] = 0;
    }
    loop {
        // Every remaining bid demands good 1 at the bottom of the first line.
        let (minus, _) = delta_points(&bottom);
        let remaining = residual.query(&minus, QueryCategory::Delta)[0];
        if remaining == 0 {
            break;
        }
        if remaining < 0 {
            return Err(Error::InvariantViolation(format!(
                "residual demand {remaining} for good 1"
            )));
        }
        let (vector, weight) = find_one_traced(&mut residual, m, Some(remaining), &mut |_, _| {})?;
        residual.push(Bid::new(vector, weight))?;
    }
    Ok(residual.into_learnt())
}
