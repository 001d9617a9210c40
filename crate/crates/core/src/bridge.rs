//! Answering demand queries with only a valuation oracle, by steepest
//! ascent on the quasi-linear utility over the exchange neighbourhood.

use crate::bids::BidList;
use crate::error::{Error, Result};
use crate::oracle::valuation_positive;
use crate::point::{Bundle, ExtRational, RationalPoint};

type Evaluator = Box<dyn Fn(&Bundle) -> ExtRational>;

/// A valuation `v` whose effective domain is non-negative and contained in
/// `{x : |x|_1 <= bound}`. Counts every evaluation.
pub struct ValuationOracle {
    n: usize,
    bound: i64,
    evaluator: Evaluator,
    queries: u64,
}

impl ValuationOracle {
    pub fn new<F>(n: usize, bound: i64, evaluator: F) -> Self
    where
        F: Fn(&Bundle) -> ExtRational + 'static,
    {
        ValuationOracle {
            n,
            bound,
            evaluator: Box::new(evaluator),
            queries: 0,
        }
    }

    /// The valuation of a positive bid list; the bound is its total weight.
    pub fn from_positive_bids(bids: &BidList) -> Result<Self> {
        if !bids.is_positive() {
            return Err(Error::NegativeWeight);
        }
        let owned = bids.clone();
        Ok(ValuationOracle::new(
            bids.n(),
            bids.unit_count(),
            move |x| valuation_positive(&owned, x).expect("positive list of matching dimension"),
        ))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn value(&mut self, x: &Bundle) -> ExtRational {
        self.queries += 1;
        (self.evaluator)(x)
    }

    fn in_domain_box(&self, x: &Bundle) -> bool {
        x.is_nonnegative() && x.l1_norm() <= self.bound
    }
}

/// `v(x) - p . x`. One valuation query.
pub fn utility(vo: &mut ValuationOracle, x: &Bundle, p: &RationalPoint) -> ExtRational {
    vo.value(x).minus_finite(&x.dot(p))
}

/// The lift `f(x_0, x) = v(x)` when `x_0 = -sum(x)`, minus infinity otherwise.
pub fn lifted_value(vo: &mut ValuationOracle, x0: i64, x: &Bundle) -> ExtRational {
    if x0 != -x.counts().iter().sum::<i64>() {
        return ExtRational::MinusInfinity;
    }
    vo.value(x)
}

/// A utility-maximizing bundle at `p`. Starts from the empty bundle and
/// takes the best strictly improving move `x - e^i + e^j` (`i, j` in
/// `[n]_0`, `e^0 = 0`) until none exists. Ties go to the smallest `(i, j)`.
pub fn demand_from_valuation(vo: &mut ValuationOracle, p: &RationalPoint) -> Result<Bundle> {
    let n = vo.n();
    if p.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.dim(),
        });
    }
    let mut x = Bundle::zero(n);
    let mut current = utility(vo, &x, p);
    if !current.is_finite() {
        return Err(Error::DomainError);
    }
    loop {
        let mut best: Option<(ExtRational, Bundle)> = None;
        for i in 0..=n {
            for j in 0..=n {
                if i == j {
                    continue;
                }
                let y = x.exchanged(i, j);
                if !vo.in_domain_box(&y) {
                    continue;
                }
                let u = utility(vo, &y, p);
                let beats_best = best.as_ref().is_none_or(|(b, _)| &u > b);
                if u > current && beats_best {
                    best = Some((u, y));
                }
            }
        }
        match best {
            Some((u, y)) => {
                current = u;
                x = y;
            }
            None => return Ok(x),
        }
    }
}
