//! Composite queries built from demand queries: delta and generalized delta
//! queries, bid-existence queries and super queries.

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;
use num_traits::Signed;

use crate::arrangement::{Hyperplane, Normal};
use crate::error::{Error, Result};
use crate::hull::discrete_hull;
use crate::oracle::{DemandQuery, QueryCategory};
use crate::point::{int, ratio, Bundle, Rational, RationalPoint};

/// `1 / (2 (n - i + 1))` for the 1-based good `i >= 2`.
fn offset(n: usize, good: usize) -> Rational {
    ratio(1, 2 * (n - good + 1) as i64)
}

/// The pair `(q^-(S), q^+(S))` around the integral point `q`. `subset`
/// lists goods from `2..=n` whose offset is subtracted instead of added.
pub fn generalized_delta_points(q: &[i64], subset: &[usize]) -> (RationalPoint, RationalPoint) {
    let n = q.len();
    assert!(n >= 1, "delta points need at least one good");
    let mut base: Vec<Rational> = q.iter().map(|&c| int(c)).collect();
    for good in 2..=n {
        if subset.contains(&good) {
            base[good - 1] -= offset(n, good);
        } else {
            base[good - 1] += offset(n, good);
        }
    }
    let eps = ratio(1, 2 * n as i64);
    let mut minus = base.clone();
    minus[0] -= &eps;
    let mut plus = base;
    plus[0] += eps;
    (RationalPoint::new(minus), RationalPoint::new(plus))
}

pub fn delta_points(q: &[i64]) -> (RationalPoint, RationalPoint) {
    generalized_delta_points(q, &[])
}

fn check_subset(n: usize, subset: &[usize]) -> Result<()> {
    if let Some(&g) = subset.iter().find(|&&g| g < 2 || g > n) {
        return Err(Error::PreconditionUnmet(format!(
            "good {g} is not in 2..={n}"
        )));
    }
    Ok(())
}

fn delta_with<O: DemandQuery + ?Sized>(
    oracle: &mut O,
    q: &[i64],
    subset: &[usize],
    category: QueryCategory,
) -> i64 {
    let (minus, plus) = generalized_delta_points(q, subset);
    let x_minus = oracle.query(&minus, category);
    let x_plus = oracle.query(&plus, category);
    x_minus[0] - x_plus[0]
}

/// Weight of the bids `b` with `b_1 = q_1` and `b <= q`. Two demand queries.
pub fn delta_query<O: DemandQuery + ?Sized>(oracle: &mut O, q: &[i64]) -> Result<i64> {
    check_dim(oracle.n(), q)?;
    Ok(delta_with(oracle, q, &[], QueryCategory::Delta))
}

/// Weight of the bids `b` with `b_1 = q_1`, `b <= q` and `b_i < q_i` for
/// every good `i` in `subset`. Two demand queries.
pub fn generalized_delta_query<O: DemandQuery + ?Sized>(
    oracle: &mut O,
    q: &[i64],
    subset: &[usize],
) -> Result<i64> {
    check_dim(oracle.n(), q)?;
    check_subset(q.len(), subset)?;
    Ok(delta_with(oracle, q, subset, QueryCategory::Delta))
}

fn check_dim(n: usize, q: &[i64]) -> Result<()> {
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: q.len(),
        });
    }
    if n == 0 {
        return Err(Error::PreconditionUnmet("no goods".into()));
    }
    Ok(())
}

/// All subsets of `2..=n`, smallest first.
fn tail_subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (2..=n).powerset()
}

/// Weight of the bid at `p`, or 0 when there is none. Uses `2^n` demand
/// queries: an alternating sum of generalized delta queries over all
/// subsets of `2..=n`.
pub fn existence_query<O: DemandQuery + ?Sized>(oracle: &mut O, p: &[i64]) -> Result<i64> {
    check_dim(oracle.n(), p)?;
    Ok(tail_subsets(p.len())
        .map(|s| sign(s.len()) * delta_with(oracle, p, &s, QueryCategory::Existence))
        .sum())
}

fn sign(size: usize) -> i64 {
    if size.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// One simplex of the triangulation of the unit cube around an integral
/// point: the orthant `a` and an ordering `perm` of coordinates (0-based).
///
/// With `x = p' - center`, let `v_i = x_i` when `a_i = +1` and
/// `v_i = 1 + x_i` when `a_i = -1`. The closed cell is the set where
/// `a_i x_i >= 0` for all `i` and `v` is non-decreasing along `perm`.
/// These cells are exactly the regions cut out of the cube by the
/// integral hyperplanes `p_i = c` and `p_i - p_j = c`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CellKey {
    pub orthant: Vec<i8>,
    pub perm: Vec<usize>,
}

impl CellKey {
    /// Offset of the representative point from the center.
    pub fn representative(&self) -> Vec<Rational> {
        let n = self.perm.len();
        let mut x = vec![int(0); n];
        for (k, &i) in self.perm.iter().enumerate() {
            let v = ratio(k as i64 + 1, n as i64 + 1);
            x[i] = if self.orthant[i] > 0 { v } else { v - int(1) };
        }
        x
    }

    fn closure_contains(&self, x: &[Rational]) -> bool {
        let sign_ok = x.iter().zip(&self.orthant).all(|(xi, &a)| {
            if a > 0 {
                !xi.is_negative()
            } else {
                !xi.is_positive()
            }
        });
        if !sign_ok {
            return false;
        }
        let v = |i: usize| {
            if self.orthant[i] > 0 {
                x[i].clone()
            } else {
                &x[i] + int(1)
            }
        };
        self.perm.windows(2).all(|w| v(w[0]) <= v(w[1]))
    }
}

/// Every cell around a point in `n` dimensions, `2^n n!` of them.
pub fn cell_keys(n: usize) -> Vec<CellKey> {
    let mut out = Vec::new();
    for orthant in (0..n).map(|_| [-1i8, 1]).multi_cartesian_product() {
        for perm in (0..n).permutations(n) {
            out.push(CellKey {
                orthant: orthant.clone(),
                perm,
            });
        }
    }
    out
}

/// The representative price of every cell around the integral point `p`.
pub fn super_query_points(p: &[i64]) -> Vec<(CellKey, RationalPoint)> {
    cell_keys(p.len())
        .into_iter()
        .map(|key| {
            let x = key.representative();
            let coords = p.iter().zip(x).map(|(&c, o)| int(c) + o).collect();
            (key, RationalPoint::new(coords))
        })
        .collect()
}

/// Bundles demanded in every cell of the unit cube around an integral point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperQueryRecord {
    center: Vec<i64>,
    cells: Vec<(CellKey, RationalPoint, Bundle)>,
    index: HashMap<CellKey, usize>,
}

/// Query the representative of every cell around `p`: `2^n n!` queries.
pub fn super_query<O: DemandQuery + ?Sized>(oracle: &mut O, p: &[i64]) -> Result<SuperQueryRecord> {
    check_dim(oracle.n(), p)?;
    let cells: Vec<_> = super_query_points(p)
        .into_iter()
        .map(|(key, point)| {
            let bundle = oracle.query(&point, QueryCategory::Super);
            (key, point, bundle)
        })
        .collect();
    let index = cells
        .iter()
        .enumerate()
        .map(|(k, (key, _, _))| (key.clone(), k))
        .collect();
    Ok(SuperQueryRecord {
        center: p.to_vec(),
        cells,
        index,
    })
}

impl SuperQueryRecord {
    pub fn center(&self) -> &[i64] {
        &self.center
    }

    pub fn n(&self) -> usize {
        self.center.len()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `(cell, representative point, bundle)` in enumeration order.
    pub fn cells(&self) -> impl Iterator<Item = (&CellKey, &RationalPoint, &Bundle)> {
        self.cells.iter().map(|(k, p, b)| (k, p, b))
    }

    pub fn bundle(&self, key: &CellKey) -> Option<&Bundle> {
        self.index.get(key).map(|&k| &self.cells[k].2)
    }

    /// The demand set at any `p'` strictly within distance 1 of the center.
    pub fn local_demand(&self, p: &RationalPoint) -> Result<BTreeSet<Bundle>> {
        if p.dim() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: p.dim(),
            });
        }
        let x = p.offset_from(&self.center);
        if x.iter().any(|c| c.abs() >= int(1)) {
            return Err(Error::OutOfRange);
        }
        let near: BTreeSet<Bundle> = self
            .cells
            .iter()
            .filter(|(key, _, _)| key.closure_contains(&x))
            .map(|(_, _, b)| b.clone())
            .collect();
        Ok(discrete_hull(&near))
    }

    /// Hyperplanes through the center across which two adjacent cells hold
    /// different bundles.
    pub fn local_facets(&self) -> BTreeSet<Hyperplane> {
        let n = self.n();
        let mut out = BTreeSet::new();
        for (key, _, bundle) in &self.cells {
            // Crossing p_i = center_i: v_i jumps from the bottom to the top of the order.
            let i = key.perm[0];
            if key.orthant[i] > 0 {
                let mut orthant = key.orthant.clone();
                orthant[i] = -1;
                let mut perm = key.perm[1..].to_vec();
                perm.push(i);
                if self.bundle(&CellKey { orthant, perm }) != Some(bundle) {
                    out.insert(Hyperplane::through(Normal::Axis(i + 1), &self.center));
                }
            }
            // Crossing p_i - p_j = center_i - center_j: neighbours swap in the order.
            for k in 0..n.saturating_sub(1) {
                let (i, j) = (key.perm[k], key.perm[k + 1]);
                if key.orthant[i] != key.orthant[j] || i > j {
                    continue;
                }
                let mut perm = key.perm.clone();
                perm.swap(k, k + 1);
                let other = CellKey {
                    orthant: key.orthant.clone(),
                    perm,
                };
                if self.bundle(&other) != Some(bundle) {
                    out.insert(Hyperplane::through(
                        Normal::Diff(i + 1, j + 1),
                        &self.center,
                    ));
                }
            }
        }
        out
    }

    /// The existence query at the center, answered from the record alone.
    pub fn existence_from_record(&self) -> i64 {
        let n = self.n();
        if n == 0 {
            return 0;
        }
        tail_subsets(n)
            .map(|s| {
                let (minus, plus) = generalized_delta_points(&self.center, &s);
                let read = |p: &RationalPoint| {
                    let set = self
                        .local_demand(p)
                        .expect("delta points lie in the unit cube");
                    debug_assert_eq!(set.len(), 1);
                    set.into_iter().next().expect("nonempty demand")
                };
                sign(s.len()) * (read(&minus)[0] - read(&plus)[0])
            })
            .sum()
    }
}
