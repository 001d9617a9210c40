//! Discrete convex hulls of small sets of bundles.
//!
//! Brute force: every integer point of the bounding box is tested for
//! membership in the convex hull by searching for a convex combination of
//! an affinely independent subset (Caratheodory), solved exactly. Points
//! outside the bounds on `x(S)` over subsets `S` of goods are rejected
//! first; for M-natural-convex sets those bounds already cut out the hull.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::{One, Signed, Zero};

use crate::point::{int, Bundle, Rational};

/// Integer points of `conv(points)`.
pub fn discrete_hull(points: &BTreeSet<Bundle>) -> BTreeSet<Bundle> {
    if points.len() <= 1 {
        return points.clone();
    }
    let pts: Vec<&Bundle> = points.iter().collect();
    let n = pts[0].dim();
    let lo: Vec<i64> = (0..n)
        .map(|k| pts.iter().map(|p| p[k]).min().unwrap())
        .collect();
    let hi: Vec<i64> = (0..n)
        .map(|k| pts.iter().map(|p| p[k]).max().unwrap())
        .collect();
    let dim = affine_dimension(&pts);
    let bounds = SubsetBounds::new(&pts);

    let mut out = BTreeSet::new();
    for coords in (0..n).map(|k| lo[k]..=hi[k]).multi_cartesian_product() {
        let candidate = Bundle(coords);
        if !bounds.admits(&candidate) {
            continue;
        }
        if points.contains(&candidate) || in_hull(&candidate, &pts, dim) {
            out.insert(candidate);
        }
    }
    // n = 0 yields one empty product; keep the input in that degenerate case.
    out.extend(points.iter().cloned());
    out
}

/// Minimum and maximum of `x(S)` over the points, for every nonempty `S`.
/// Valid inequalities for the hull, so failing one proves non-membership.
struct SubsetBounds {
    masks: Vec<u32>,
    range: Vec<(i64, i64)>,
}

impl SubsetBounds {
    const MAX_GOODS: usize = 12;

    fn new(pts: &[&Bundle]) -> Self {
        let n = pts[0].dim();
        let masks: Vec<u32> = if n <= Self::MAX_GOODS {
            (1..1u32 << n).collect()
        } else {
            Vec::new()
        };
        let range = masks
            .iter()
            .map(|&m| {
                let sums = pts.iter().map(|p| subset_sum(p, m));
                sums.fold((i64::MAX, i64::MIN), |(lo, hi), s| (lo.min(s), hi.max(s)))
            })
            .collect();
        SubsetBounds { masks, range }
    }

    fn admits(&self, x: &Bundle) -> bool {
        self.masks.iter().zip(&self.range).all(|(&m, &(lo, hi))| {
            let s = subset_sum(x, m);
            lo <= s && s <= hi
        })
    }
}

fn subset_sum(x: &Bundle, mask: u32) -> i64 {
    x.counts()
        .iter()
        .enumerate()
        .filter(|(k, _)| mask & (1 << k) != 0)
        .map(|(_, v)| v)
        .sum()
}

fn affine_dimension(pts: &[&Bundle]) -> usize {
    let base = pts[0];
    let rows: Vec<Vec<Rational>> = pts[1..]
        .iter()
        .map(|p| {
            p.counts()
                .iter()
                .zip(base.counts())
                .map(|(a, b)| int(a - b))
                .collect()
        })
        .collect();
    rank(rows)
}

fn in_hull(x: &Bundle, pts: &[&Bundle], dim: usize) -> bool {
    (1..=(dim + 1).min(pts.len())).any(|size| {
        pts.iter()
            .combinations(size)
            .any(|subset| convex_coefficients(x, &subset).is_some())
    })
}

/// Unique convex coefficients expressing `x` over an affinely independent
/// `subset`, or `None`.
fn convex_coefficients(x: &Bundle, subset: &[&&Bundle]) -> Option<Vec<Rational>> {
    let m = subset.len();
    let n = x.dim();
    // Rows: one per coordinate plus the affine row; columns: coefficients, rhs.
    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(n + 1);
    for k in 0..n {
        let mut row: Vec<Rational> = subset.iter().map(|p| int(p[k])).collect();
        row.push(int(x[k]));
        rows.push(row);
    }
    let mut affine = vec![Rational::one(); m];
    affine.push(Rational::one());
    rows.push(affine);

    let lambda = solve_unique(rows, m)?;
    lambda.iter().all(|l| !l.is_negative()).then_some(lambda)
}

/// Gauss-Jordan elimination on an augmented matrix with `m` unknowns.
/// Returns the solution when it exists and is unique.
fn solve_unique(mut rows: Vec<Vec<Rational>>, m: usize) -> Option<Vec<Rational>> {
    let mut pivot_row = 0;
    for col in 0..m {
        let found = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(pivot_row, found);
        let inv = Rational::one() / rows[pivot_row][col].clone();
        for v in rows[pivot_row].iter_mut() {
            *v *= &inv;
        }
        for r in 0..rows.len() {
            if r != pivot_row && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone();
                for c in 0..=m {
                    let delta = &rows[pivot_row][c] * &factor;
                    rows[r][c] -= delta;
                }
            }
        }
        pivot_row += 1;
    }
    if rows[pivot_row..].iter().any(|r| !r[m].is_zero()) {
        return None;
    }
    Some((0..m).map(|c| rows[c][m].clone()).collect())
}

fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..cols {
        let Some(found) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, found);
        for i in (r + 1)..rows.len() {
            if !rows[i][col].is_zero() {
                let factor = &rows[i][col] / &rows[r][col];
                for c in col..cols {
                    let delta = &rows[r][c] * &factor;
                    rows[i][c] -= delta;
                }
            }
        }
        r += 1;
    }
    r
}
