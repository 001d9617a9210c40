//! Bids, normalized bid lists and the bid-list file format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An integral bid vector with a signed weight.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bid {
    pub vector: Vec<i64>,
    pub weight: i64,
}

impl Bid {
    pub fn new(vector: Vec<i64>, weight: i64) -> Self {
        Bid { vector, weight }
    }

    pub fn unit(vector: Vec<i64>) -> Self {
        Bid { vector, weight: 1 }
    }

    pub fn magnitude(&self) -> i64 {
        self.vector.iter().copied().max().unwrap_or(0)
    }

    /// `self <= q` componentwise.
    pub fn dominated_by(&self, q: &[i64]) -> bool {
        self.vector.iter().zip(q).all(|(b, q)| b <= q)
    }
}

impl fmt::Display for Bid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.vector.iter().map(|c| c.to_string()).collect();
        write!(f, "({}) w={:+}", parts.join(","), self.weight)
    }
}

/// A normalized bid list: vectors are unique, weights nonzero, and bids are
/// sorted lexicographically by vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BidList {
    n: usize,
    bids: Vec<Bid>,
}

impl BidList {
    pub fn empty(n: usize) -> Self {
        BidList {
            n,
            bids: Vec::new(),
        }
    }

    /// Merge weights of equal vectors, drop zero totals, sort by vector.
    pub fn normalize<I>(n: usize, bids: I) -> Result<Self>
    where
        I: IntoIterator<Item = Bid>,
    {
        let mut merged: BTreeMap<Vec<i64>, i64> = BTreeMap::new();
        for bid in bids {
            if bid.vector.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: bid.vector.len(),
                });
            }
            if bid.vector.iter().any(|&c| c < 0) {
                return Err(Error::NegativeCoordinate(bid.vector));
            }
            *merged.entry(bid.vector).or_insert(0) += bid.weight;
        }
        let bids = merged
            .into_iter()
            .filter(|(_, w)| *w != 0)
            .map(|(vector, weight)| Bid { vector, weight })
            .collect();
        Ok(BidList { n, bids })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bids(&self) -> &[Bid] {
        &self.bids
    }

    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    /// `M`: the largest coordinate over all bids (0 for an empty list).
    pub fn magnitude(&self) -> i64 {
        self.bids.iter().map(Bid::magnitude).max().unwrap_or(0)
    }

    /// `W`: the largest weight (0 for an empty list).
    pub fn max_weight(&self) -> i64 {
        self.bids.iter().map(|b| b.weight).max().unwrap_or(0)
    }

    /// Sum of absolute weights, i.e. the number of unit bids.
    pub fn unit_count(&self) -> i64 {
        self.bids.iter().map(|b| b.weight.abs()).sum()
    }

    pub fn is_positive(&self) -> bool {
        self.bids.iter().all(|b| b.weight > 0)
    }

    pub fn weight_at(&self, vector: &[i64]) -> i64 {
        self.bids
            .binary_search_by(|b| b.vector.as_slice().cmp(vector))
            .map(|i| self.bids[i].weight)
            .unwrap_or(0)
    }

    pub fn union(&self, other: &BidList) -> Result<BidList> {
        BidList::normalize(self.n, self.bids.iter().chain(other.bids.iter()).cloned())
    }

    /// `self - other` as signed weights.
    pub fn difference(&self, other: &BidList) -> Result<BidList> {
        let negated = other
            .bids
            .iter()
            .map(|b| Bid::new(b.vector.clone(), -b.weight));
        BidList::normalize(self.n, self.bids.iter().cloned().chain(negated))
    }

    pub fn instance(&self) -> Instance {
        Instance {
            bids: self.clone(),
            magnitude: self.magnitude(),
            max_weight: self.max_weight(),
        }
    }

    /// Between 1 and `max_bids` random bids at distinct vectors with entries
    /// in `[0, max_coord]` and weights in `[1, max_weight]`.
    pub fn random_positive<R: Rng>(
        rng: &mut R,
        n: usize,
        max_bids: usize,
        max_coord: i64,
        max_weight: i64,
    ) -> BidList {
        let space = (max_coord.max(0) as u128 + 1).saturating_pow(n as u32);
        let count = rng
            .gen_range(1..=max_bids.max(1))
            .min(space.min(usize::MAX as u128) as usize);
        let mut vectors = BTreeSet::new();
        while vectors.len() < count {
            vectors.insert(
                (0..n)
                    .map(|_| rng.gen_range(0..=max_coord))
                    .collect::<Vec<i64>>(),
            );
        }
        let bids: Vec<Bid> = vectors
            .into_iter()
            .map(|vector| Bid::new(vector, rng.gen_range(1..=max_weight.max(1))))
            .collect();
        BidList::normalize(n, bids).expect("generated bids are well formed")
    }

    /// Canonical text form: pretty JSON of the normalized list plus a newline.
    pub fn to_file_string(&self) -> String {
        let file = BidFile {
            n: self.n,
            bids: self.bids.clone(),
        };
        let mut s = serde_json::to_string_pretty(&file).expect("bid list serializes");
        s.push('\n');
        s
    }

    pub fn from_file_str(s: &str) -> Result<BidList> {
        let file: BidFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        if file.bids.iter().any(|b| b.weight == 0) {
            return Err(Error::ZeroWeight);
        }
        BidList::normalize(file.n, file.bids)
    }
}

impl fmt::Display for BidList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.bids.iter().map(|b| b.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Serialize, Deserialize)]
struct BidFile {
    n: usize,
    bids: Vec<Bid>,
}

/// True iff the two normalized lists hold the same `(vector, weight)` pairs.
pub fn bidlists_equal(a: &BidList, b: &BidList) -> bool {
    a.n == b.n && a.bids == b.bids
}

/// A hidden bid list together with its magnitude `M` and maximum weight `W`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub bids: BidList,
    pub magnitude: i64,
    pub max_weight: i64,
}
