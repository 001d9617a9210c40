//! Validity of signed bid lists: at every price, the bids indifferent
//! between any two goods must have a non-negative total weight.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;

use crate::arrangement::Hyperplane;
use crate::bids::{Bid, BidList};
use crate::point::{ratio, RationalPoint, ScaledPoint};

/// Bids indifferent between goods `i` and `j` (in `[n]_0`) at `p`, and the
/// sum of their weights.
pub fn indifference_support(
    bids: &BidList,
    p: &RationalPoint,
    i: usize,
    j: usize,
) -> (BidList, i64) {
    let scaled = ScaledPoint::new(p);
    let both = (1u64 << i) | (1u64 << j);
    let support: Vec<Bid> = bids
        .bids()
        .iter()
        .filter(|b| i != j && scaled.demanded_mask(&b.vector) & both == both)
        .cloned()
        .collect();
    let sum = support.iter().map(|b| b.weight).sum();
    let list = BidList::normalize(bids.n(), support).expect("sub-list of a normalized list");
    (list, sum)
}

/// A price and pair of goods whose indifference support has negative weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViolationWitness {
    pub p: RationalPoint,
    pub i: usize,
    pub j: usize,
    pub sum: i64,
}

impl fmt::Display for ViolationWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "p={} goods=({}, {}) support_weight={}",
            self.p, self.i, self.j, self.sum
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validity {
    Valid,
    Violation(ViolationWitness),
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// Scan every point of the lattice `(1/(n+1)) Z^n` in `[-1, M + 1]^n` and
/// every ordered pair of goods; report the first negative support.
///
/// Supports are constant on the relative interiors of the faces of the
/// integral arrangement, and the lattice meets every face that touches the
/// box. Faces are unbounded, so a violation far outside the box would also
/// show up near it for the lists used here; that is not proved in general.
pub fn is_valid(bids: &BidList) -> Validity {
    let n = bids.n();
    let den = n as i64 + 1;
    let m = bids.magnitude();
    let (lo, hi) = (-den, (m + 1) * den);
    let goods = n + 1;
    let mut sums = vec![0i64; goods * goods];
    for nums in (0..n).map(|_| lo..=hi).multi_cartesian_product() {
        let scaled = ScaledPoint::Small {
            den: den as i128,
            nums: nums.iter().map(|&c| c as i128).collect(),
        };
        sums.iter_mut().for_each(|s| *s = 0);
        let mut any = false;
        for b in bids.bids() {
            let mask = scaled.demanded_mask(&b.vector);
            if mask.count_ones() < 2 {
                continue;
            }
            any = true;
            let set: Vec<usize> = (0..goods).filter(|g| mask & (1 << g) != 0).collect();
            for (&a, &c) in set.iter().tuple_combinations() {
                sums[a * goods + c] += b.weight;
            }
        }
        if !any {
            continue;
        }
        for i in 0..goods {
            for j in 0..goods {
                if i == j {
                    continue;
                }
                let sum = sums[i.min(j) * goods + i.max(j)];
                if sum < 0 {
                    let p = RationalPoint::new(nums.iter().map(|&c| ratio(c, den)).collect());
                    return Validity::Violation(ViolationWitness { p, i, j, sum });
                }
            }
        }
    }
    Validity::Valid
}

/// Every hyperplane that can carry a facet of the indifference locus:
/// `p_i = b_i` and `p_i - p_j = b_i - b_j` for each bid.
pub fn candidate_hyperplanes(bids: &BidList) -> BTreeSet<Hyperplane> {
    let n = bids.n();
    let mut out = BTreeSet::new();
    for b in bids.bids() {
        for i in 1..=n {
            out.insert(Hyperplane::axis(i, b.vector[i - 1]));
            for j in (i + 1)..=n {
                out.insert(Hyperplane::diff(i, j, b.vector[i - 1] - b.vector[j - 1]));
            }
        }
    }
    out
}
