//! Hyperplanes with strong-substitutes normals and the arrangement state
//! used by the general learner.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use itertools::Itertools;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::point::{int, Bundle, Rational, RationalPoint, ScaledPoint};

/// Normal direction of a hyperplane. Goods are numbered from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Normal {
    /// `e^i`: the hyperplane `p_i = c`.
    Axis(usize),
    /// `e^i - e^j` with `i < j`: the hyperplane `p_i - p_j = c`.
    Diff(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hyperplane {
    pub normal: Normal,
    pub offset: i64,
}

impl Hyperplane {
    pub fn axis(good: usize, offset: i64) -> Self {
        assert!(good >= 1, "goods are numbered from 1");
        Hyperplane {
            normal: Normal::Axis(good),
            offset,
        }
    }

    /// `p_i - p_j = offset`, stored with the smaller good first.
    pub fn diff(i: usize, j: usize, offset: i64) -> Self {
        assert!(i >= 1 && j >= 1 && i != j, "diff needs two distinct goods");
        if i < j {
            Hyperplane {
                normal: Normal::Diff(i, j),
                offset,
            }
        } else {
            Hyperplane {
                normal: Normal::Diff(j, i),
                offset: -offset,
            }
        }
    }

    /// `p_i - p_j = c` for goods in `[n]_0`, where `p_0 = 0`.
    pub fn from_goods(i: usize, j: usize, c: i64) -> Option<Self> {
        match (i, j) {
            _ if i == j => None,
            (_, 0) => Some(Hyperplane::axis(i, c)),
            (0, _) => Some(Hyperplane::axis(j, -c)),
            _ => Some(Hyperplane::diff(i, j, c)),
        }
    }

    /// The hyperplane with `normal` through the integral point `v`.
    pub fn through(normal: Normal, v: &[i64]) -> Self {
        match normal {
            Normal::Axis(i) => Hyperplane::axis(i, v[i - 1]),
            Normal::Diff(i, j) => Hyperplane::diff(i, j, v[i - 1] - v[j - 1]),
        }
    }

    /// `n . p - offset`.
    pub fn eval(&self, p: &RationalPoint) -> Rational {
        let lhs = match self.normal {
            Normal::Axis(i) => p[i - 1].clone(),
            Normal::Diff(i, j) => &p[i - 1] - &p[j - 1],
        };
        lhs - int(self.offset)
    }

    pub fn side(&self, p: &RationalPoint) -> Ordering {
        self.eval(p).cmp(&Rational::zero())
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.eval_int(v) == 0
    }

    fn eval_int(&self, v: &[i64]) -> i64 {
        match self.normal {
            Normal::Axis(i) => v[i - 1] - self.offset,
            Normal::Diff(i, j) => v[i - 1] - v[j - 1] - self.offset,
        }
    }

    /// True iff the closed segment `[a, b]` touches the hyperplane.
    pub fn meets_segment(&self, a: &RationalPoint, b: &RationalPoint) -> bool {
        let (ea, eb) = (self.eval(a), self.eval(b));
        !(ea.is_positive() && eb.is_positive() || ea.is_negative() && eb.is_negative())
    }

    fn side_scaled(&self, den: i128, nums: &[i128]) -> Ordering {
        let lhs = match self.normal {
            Normal::Axis(i) => nums[i - 1],
            Normal::Diff(i, j) => nums[i - 1] - nums[j - 1],
        };
        lhs.cmp(&(self.offset as i128 * den))
    }
}

impl fmt::Display for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.normal {
            Normal::Axis(i) => write!(f, "p{i} = {}", self.offset),
            Normal::Diff(i, j) => write!(f, "p{i} - p{j} = {}", self.offset),
        }
    }
}

/// The unique common point of `n` hyperplanes, or `None` when the normals
/// are dependent (including inconsistent systems).
///
/// Each hyperplane is an edge of a constraint graph on nodes `0..=n`
/// (`Axis(i)` joins `i` to the reject node 0). The system has a unique
/// solution exactly when those `n` edges form a spanning tree; values then
/// propagate outward from node 0.
pub fn solve_intersection(n: usize, hs: &[Hyperplane]) -> Option<Vec<i64>> {
    if hs.len() != n {
        return None;
    }
    let mut parent: Vec<usize> = (0..=n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // adjacency: (neighbour, value[neighbour] - value[self])
    let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n + 1];
    for h in hs {
        let (a, b, c) = match h.normal {
            Normal::Axis(i) => (i, 0, h.offset),
            Normal::Diff(i, j) => (i, j, h.offset),
        };
        if a > n || b > n {
            return None;
        }
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return None;
        }
        parent[ra] = rb;
        // value[a] - value[b] = c
        adj[a].push((b, -c));
        adj[b].push((a, c));
    }
    let mut value = vec![None; n + 1];
    value[0] = Some(0i64);
    let mut queue = VecDeque::from([0usize]);
    while let Some(u) = queue.pop_front() {
        let vu = value[u].unwrap();
        for &(w, d) in &adj[u] {
            if value[w].is_none() {
                value[w] = Some(vu + d);
                queue.push_back(w);
            }
        }
    }
    value[1..].iter().copied().collect()
}

#[derive(Clone, Debug)]
struct StoredPoint {
    price: RationalPoint,
    scaled: Option<(i128, Vec<i128>)>,
    bundle: Bundle,
    signature: Vec<u64>,
}

impl StoredPoint {
    fn side(&self, h: &Hyperplane) -> Ordering {
        match &self.scaled {
            Some((den, nums)) => h.side_scaled(*den, nums),
            None => h.side(&self.price),
        }
    }
}

fn push_bit(sig: &mut Vec<u64>, index: usize, positive: bool) {
    if index.is_multiple_of(64) {
        sig.push(0);
    }
    if positive {
        *sig.last_mut().unwrap() |= 1 << (index % 64);
    }
}

/// Hyperplanes `H`, the in-box vertices they generate, and the query
/// points whose cells are identified by strict sign vectors over `H`.
#[derive(Clone, Debug)]
pub struct Arrangement {
    n: usize,
    magnitude: i64,
    hyperplanes: Vec<Hyperplane>,
    known: HashSet<Hyperplane>,
    vertices: BTreeSet<Vec<i64>>,
    points: Vec<StoredPoint>,
}

impl Arrangement {
    /// An arrangement with no hyperplanes; vertices are kept in `[0, M]^n`.
    pub fn new(n: usize, magnitude: i64) -> Self {
        Arrangement {
            n,
            magnitude,
            hyperplanes: Vec::new(),
            known: HashSet::new(),
            vertices: BTreeSet::new(),
            points: Vec::new(),
        }
    }

    /// Start from the box hyperplanes `p_i = 0` and `p_i = M`.
    pub fn with_box(n: usize, magnitude: i64) -> Self {
        let mut arr = Arrangement::new(n, magnitude);
        for i in 1..=n {
            for c in [0, magnitude] {
                let h = Hyperplane::axis(i, c);
                if !arr.contains(&h) {
                    arr.add_hyperplane(h).expect("fresh box hyperplane");
                }
            }
        }
        arr
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn magnitude(&self) -> i64 {
        self.magnitude
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn known(&self) -> &HashSet<Hyperplane> {
        &self.known
    }

    pub fn contains(&self, h: &Hyperplane) -> bool {
        self.known.contains(h)
    }

    pub fn vertices(&self) -> &BTreeSet<Vec<i64>> {
        &self.vertices
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    fn in_box(&self, v: &[i64]) -> bool {
        v.iter().all(|&c| (0..=self.magnitude).contains(&c))
    }

    /// Add `h`, returning the in-box vertices it creates together with
    /// `n - 1` existing hyperplanes.
    pub fn add_hyperplane(&mut self, h: Hyperplane) -> Result<Vec<Vec<i64>>> {
        if self.known.contains(&h) {
            return Err(Error::DuplicateHyperplane(h.to_string()));
        }
        let mut fresh = Vec::new();
        if self.n >= 1 {
            for subset in self.hyperplanes.iter().copied().combinations(self.n - 1) {
                let mut system = subset;
                system.push(h);
                if let Some(v) = solve_intersection(self.n, &system) {
                    if self.in_box(&v) && !self.vertices.contains(&v) {
                        self.vertices.insert(v.clone());
                        fresh.push(v);
                    }
                }
            }
        }
        let index = self.hyperplanes.len();
        for p in &mut self.points {
            let side = p.side(&h);
            debug_assert!(side != Ordering::Equal, "query point on a hyperplane");
            push_bit(&mut p.signature, index, side == Ordering::Greater);
        }
        self.hyperplanes.push(h);
        self.known.insert(h);
        Ok(fresh)
    }

    /// Strict side of `p` for every hyperplane, in insertion order.
    pub fn signature(&self, p: &RationalPoint) -> Result<Vec<i8>> {
        self.hyperplanes
            .iter()
            .map(|h| match h.side(p) {
                Ordering::Greater => Ok(1),
                Ordering::Less => Ok(-1),
                Ordering::Equal => Err(Error::OnHyperplane(format!("{p} lies on {h}"))),
            })
            .collect()
    }

    /// Record a query point and the bundle the oracle returned there.
    pub fn add_point(&mut self, price: RationalPoint, bundle: Bundle) -> Result<()> {
        let scaled = match ScaledPoint::new(&price) {
            ScaledPoint::Small { den, nums } => Some((den, nums)),
            ScaledPoint::Big { .. } => None,
        };
        let mut point = StoredPoint {
            price,
            scaled,
            bundle,
            signature: Vec::new(),
        };
        for (index, h) in self.hyperplanes.iter().enumerate() {
            match point.side(h) {
                Ordering::Equal => {
                    return Err(Error::OnHyperplane(format!("{} lies on {h}", point.price)))
                }
                side => push_bit(&mut point.signature, index, side == Ordering::Greater),
            }
        }
        self.points.push(point);
        Ok(())
    }

    /// Two stored points in the same cell with different bundles.
    pub fn find_witnesses(&self) -> Option<((RationalPoint, Bundle), (RationalPoint, Bundle))> {
        let mut first: HashMap<&[u64], usize> = HashMap::new();
        for (idx, p) in self.points.iter().enumerate() {
            match first.get(p.signature.as_slice()) {
                Some(&k) if self.points[k].bundle != p.bundle => {
                    let a = &self.points[k];
                    return Some((
                        (a.price.clone(), a.bundle.clone()),
                        (p.price.clone(), p.bundle.clone()),
                    ));
                }
                Some(_) => {}
                None => {
                    first.insert(&p.signature, idx);
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(s: &str) -> RationalPoint {
        RationalPoint::parse(s).unwrap()
    }

    #[test]
    fn hyperplane_normalization() {
        assert_eq!(Hyperplane::diff(2, 1, 3), Hyperplane::diff(1, 2, -3));
        assert_eq!(
            Hyperplane::from_goods(1, 0, 3),
            Some(Hyperplane::axis(1, 3))
        );
        assert_eq!(
            Hyperplane::from_goods(0, 2, -4),
            Some(Hyperplane::axis(2, 4))
        );
        assert_eq!(Hyperplane::from_goods(1, 1, 0), None);
        assert_eq!(
            Hyperplane::through(Normal::Diff(1, 2), &[3, 2]),
            Hyperplane::diff(1, 2, 1)
        );
        assert_eq!(Hyperplane::diff(1, 2, 1).to_string(), "p1 - p2 = 1");
    }

    #[test]
    fn intersection_examples() {
        let a3 = Hyperplane::axis(1, 3);
        assert_eq!(
            solve_intersection(2, &[a3, Hyperplane::axis(2, 2)]),
            Some(vec![3, 2])
        );
        assert_eq!(
            solve_intersection(2, &[a3, Hyperplane::diff(1, 2, 1)]),
            Some(vec![3, 2])
        );
        assert_eq!(solve_intersection(2, &[a3, Hyperplane::axis(1, 5)]), None);
        // Diff constraints alone never anchor the point.
        assert_eq!(
            solve_intersection(2, &[Hyperplane::diff(1, 2, 1), Hyperplane::diff(1, 2, 2)]),
            None
        );
        let h3 = [
            Hyperplane::diff(1, 2, 1),
            Hyperplane::diff(2, 3, -2),
            Hyperplane::axis(3, 4),
        ];
        assert_eq!(solve_intersection(3, &h3), Some(vec![3, 2, 4]));
    }

    #[test]
    fn box_vertices_and_new_plane() {
        let mut arr = Arrangement::with_box(2, 4);
        assert_eq!(arr.vertices().len(), 4);
        let fresh = arr.add_hyperplane(Hyperplane::axis(2, 3)).unwrap();
        assert_eq!(fresh, vec![vec![0, 3], vec![4, 3]]);
        assert_eq!(
            arr.add_hyperplane(Hyperplane::axis(2, 3)).unwrap_err(),
            Error::DuplicateHyperplane("p2 = 3".into())
        );
        // Parallel diagonal far outside the box adds nothing.
        assert!(arr
            .add_hyperplane(Hyperplane::diff(1, 2, 9))
            .unwrap()
            .is_empty());
        let diag = arr.add_hyperplane(Hyperplane::diff(1, 2, 0)).unwrap();
        assert_eq!(diag, vec![vec![3, 3]]);
    }

    #[test]
    fn box_with_zero_magnitude() {
        let arr = Arrangement::with_box(3, 0);
        assert_eq!(arr.hyperplanes().len(), 3);
        assert_eq!(
            arr.vertices().iter().collect::<Vec<_>>(),
            vec![&vec![0, 0, 0]]
        );
    }

    #[test]
    fn signatures_and_witnesses() {
        let mut arr = Arrangement::with_box(2, 4);
        let sig = arr.signature(&pt("3/5,7/12")).unwrap();
        assert_eq!(sig[0], 1);
        assert!(arr.signature(&pt("0,1/2")).is_err());

        arr.add_point(pt("1/2,1/2"), Bundle(vec![0, 0])).unwrap();
        arr.add_point(pt("7/2,1/2"), Bundle(vec![1, 0])).unwrap();
        assert!(arr.find_witnesses().is_some());
        arr.add_hyperplane(Hyperplane::axis(1, 3)).unwrap();
        assert!(arr.find_witnesses().is_none());
        let a = arr.signature(&pt("5/2,1/2")).unwrap();
        let b = arr.signature(&pt("7/2,1/2")).unwrap();
        let differing: Vec<usize> = (0..a.len()).filter(|&k| a[k] != b[k]).collect();
        assert_eq!(differing, vec![arr.hyperplanes().len() - 1]);
    }

    fn arb_hyperplane(n: usize) -> impl Strategy<Value = Hyperplane> {
        (1..=n, 0..=n, -4i64..=4).prop_filter_map("distinct goods", move |(i, j, c)| {
            Hyperplane::from_goods(i, j, c)
        })
    }

    proptest! {
        #[test]
        fn solutions_satisfy_every_constraint(hs in prop::collection::vec(arb_hyperplane(3), 3)) {
            if let Some(v) = solve_intersection(3, &hs) {
                for h in &hs {
                    prop_assert!(h.contains(&v), "{h} misses {v:?}");
                }
            }
        }

        #[test]
        fn vertex_count_bounded(hs in prop::collection::btree_set(arb_hyperplane(2), 0..12)) {
            let mut arr = Arrangement::new(2, 4);
            for h in hs {
                arr.add_hyperplane(h).unwrap();
            }
            let h = arr.hyperplanes().len() as u64;
            prop_assert!(arr.vertices().len() as u64 <= h * h.saturating_sub(1) / 2);
            for v in arr.vertices() {
                let through = arr.hyperplanes().iter().filter(|h| h.contains(v)).count();
                prop_assert!(through >= 2);
            }
        }
    }
}
