//! Learning lists with positive and negative bids: discover every facet
//! hyperplane of the demand's indifference locus, then probe every vertex of
//! the resulting arrangement with a super query.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arrangement::{Arrangement, Hyperplane};
use crate::bids::{Bid, BidList};
use crate::error::{Error, Result};
use crate::oracle::{demand_nonmarginal, discover_magnitude, DemandQuery, QueryCategory};
use crate::point::{int, ratio, to_i64, Bundle, Rational, RationalPoint};
use crate::queries::{super_query, SuperQueryRecord};

/// A queried price and the bundle the oracle returned there.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Probe {
    pub point: RationalPoint,
    pub bundle: Bundle,
}

impl Probe {
    pub fn new(point: RationalPoint, bundle: Bundle) -> Self {
        Probe { point, bundle }
    }
}

/// Halve the segment between two probes with different bundles until the
/// endpoints are closer than 1/4 in the max norm, keeping distinct bundles.
pub fn binary_search_refine<O: DemandQuery + ?Sized>(
    oracle: &mut O,
    a: Probe,
    b: Probe,
) -> Result<(Probe, Probe)> {
    if a.bundle == b.bundle {
        return Err(Error::PreconditionUnmet(
            "refinement needs different bundles".into(),
        ));
    }
    let quarter = ratio(1, 4);
    let (mut s, mut t) = (a, b);
    while s.point.linf_distance(&t.point) >= quarter {
        let mid = s.point.midpoint(&t.point);
        let bundle = oracle.query(&mid, QueryCategory::Search);
        let probe = Probe::new(mid, bundle);
        if probe.bundle != s.bundle {
            t = probe;
        } else {
            s = probe;
        }
    }
    Ok((s, t))
}

/// The point of the segment `[s, t]` where `p_i - p_j` is an integer, with
/// goods in `[n]_0` and `p_0 = 0`. Assumes the segment is short enough that
/// at most one integer value is crossed; otherwise the smallest is used.
pub fn intersection_lambda(
    s: &RationalPoint,
    t: &RationalPoint,
    i: usize,
    j: usize,
) -> Option<RationalPoint> {
    if i == j {
        return None;
    }
    let f = |p: &RationalPoint| p.price(i) - p.price(j);
    let (fs, ft) = (f(s), f(t));
    if fs == ft {
        return fs.is_integer().then(|| s.clone());
    }
    let (lo, hi) = if fs < ft { (&fs, &ft) } else { (&ft, &fs) };
    let k = lo.ceil();
    if &k > hi {
        return None;
    }
    let lambda = (&k - &fs) / (&ft - &fs);
    Some(s.lerp(t, &lambda))
}

/// Super-query records by center, so no point is probed twice.
#[derive(Default)]
pub struct SuperQueryCache {
    records: HashMap<Vec<i64>, SuperQueryRecord>,
}

impl SuperQueryCache {
    pub fn get_or_query<O: DemandQuery + ?Sized>(
        &mut self,
        oracle: &mut O,
        center: &[i64],
    ) -> Result<&SuperQueryRecord> {
        if !self.records.contains_key(center) {
            let rec = super_query(oracle, center)?;
            self.records.insert(center.to_vec(), rec);
        }
        Ok(&self.records[center])
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Candidate goods pairs, axis pairs first.
fn goods_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (1..=n).map(|j| (j, 0)).collect();
    for i in 1..=n {
        for j in (i + 1)..=n {
            pairs.push((i, j));
        }
    }
    pairs
}

fn separating_hyperplane<O: DemandQuery + ?Sized>(
    oracle: &mut O,
    s: &Probe,
    t: &Probe,
    known: &HashSet<Hyperplane>,
    cache: &mut SuperQueryCache,
) -> Result<Hyperplane> {
    let fresh = |h: &Hyperplane| !known.contains(h) && h.meets_segment(&s.point, &t.point);
    let mut probed: Vec<Vec<i64>> = Vec::new();
    for (i, j) in goods_pairs(s.point.dim()) {
        let Some(p) = intersection_lambda(&s.point, &t.point, i, j) else {
            continue;
        };
        let center = p.ceil();
        let c = p.price(i).ceil() - p.price(j).ceil();
        let h = Hyperplane::from_goods(i, j, to_i64(&c.to_integer())).expect("distinct goods");
        let rec = cache.get_or_query(oracle, &center)?;
        if fresh(&h) && rec.local_facets().contains(&h) {
            return Ok(h);
        }
        probed.push(center);
    }
    for center in &probed {
        let rec = cache.get_or_query(oracle, center)?;
        if let Some(h) = rec.local_facets().into_iter().find(|h| fresh(h)) {
            return Ok(h);
        }
    }
    Err(Error::NoFacetFound)
}

/// A facet hyperplane crossed between two witness probes.
pub fn find_separating_hyperplane<O: DemandQuery + ?Sized>(
    oracle: &mut O,
    q: &Probe,
    q2: &Probe,
) -> Result<Hyperplane> {
    let (s, t) = binary_search_refine(oracle, q.clone(), q2.clone())?;
    separating_hyperplane(
        oracle,
        &s,
        &t,
        &HashSet::new(),
        &mut SuperQueryCache::default(),
    )
}

/// Safety limits for the general learner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// `None`: the number of in-box hyperplanes with integral offsets,
    /// `n (M + 1) + C(n, 2) (2M + 1)`, which no run can exceed.
    pub max_hyperplanes: Option<usize>,
    pub max_vertices: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_hyperplanes: None,
            max_vertices: 1_000_000,
        }
    }
}

impl Limits {
    /// Limits sized for a list of at most `bids` bids: `2n + B n^2`.
    pub fn for_bid_count(n: usize, bids: usize) -> Self {
        Limits {
            max_hyperplanes: Some(2 * n + bids * n * n),
            ..Limits::default()
        }
    }

    fn hyperplane_cap(&self, n: usize, m: i64) -> usize {
        self.max_hyperplanes.unwrap_or_else(|| {
            let m = m as usize;
            n * (m + 1) + n * n.saturating_sub(1) / 2 * (2 * m + 1)
        })
    }
}

/// Outcome of a general learning run.
#[derive(Clone, Debug)]
pub struct GeneralRun {
    pub bids: BidList,
    pub magnitude: i64,
    pub hyperplanes: Vec<Hyperplane>,
    pub vertex_count: usize,
    pub super_queries: usize,
}

/// Recover a hidden valid list of positive and negative bids.
pub fn learn_general<O: DemandQuery + ?Sized>(
    oracle: &mut O,
    limits: Limits,
) -> Result<GeneralRun> {
    let n = oracle.n();
    let m = discover_magnitude(oracle);
    let max_hyperplanes = limits.hyperplane_cap(n, m);
    let mut arr = Arrangement::with_box(n, m);
    let mut cache = SuperQueryCache::default();
    let mut records: BTreeMap<Vec<i64>, i64> = BTreeMap::new();

    let mut pending: Vec<Vec<i64>> = arr.vertices().iter().cloned().collect();
    loop {
        if arr.vertices().len() > limits.max_vertices {
            return Err(Error::LimitExceeded(format!(
                "{} vertices exceed the limit of {}",
                arr.vertices().len(),
                limits.max_vertices
            )));
        }
        for v in pending.drain(..) {
            let rec = cache.get_or_query(oracle, &v)?;
            records.insert(v, rec.existence_from_record());
            for (_, point, bundle) in rec.cells() {
                arr.add_point(point.clone(), bundle.clone())?;
            }
        }
        let Some(((q, x), (q2, x2))) = arr.find_witnesses() else {
            break;
        };
        let (s, t) = binary_search_refine(oracle, Probe::new(q, x), Probe::new(q2, x2))?;
        let h = separating_hyperplane(oracle, &s, &t, arr.known(), &mut cache)?;
        if arr.hyperplanes().len() >= max_hyperplanes {
            return Err(Error::LimitExceeded(format!(
                "more than {max_hyperplanes} hyperplanes"
            )));
        }
        pending = arr.add_hyperplane(h)?;
    }

    let bids = BidList::normalize(
        n,
        records
            .into_iter()
            .filter(|&(_, w)| w != 0)
            .map(|(v, w)| Bid::new(v, w)),
    )?;
    Ok(GeneralRun {
        bids,
        magnitude: m,
        hyperplanes: arr.hyperplanes().to_vec(),
        vertex_count: arr.vertices().len(),
        super_queries: cache.len(),
    })
}

pub fn learn_general_bids<O: DemandQuery + ?Sized>(
    oracle: &mut O,
    limits: Limits,
) -> Result<BidList> {
    learn_general(oracle, limits).map(|run| run.bids)
}

/// A uniformly drawn price in `[lo, hi]^n` that lies on no integral
/// hyperplane, with denominators up to `2^20`.
pub fn random_generic_point<R: Rng>(rng: &mut R, n: usize, lo: i64, hi: i64) -> RationalPoint {
    const DEN: i64 = 1 << 20;
    loop {
        let coords: Vec<Rational> = (0..n)
            .map(|_| {
                let whole = rng.gen_range(lo..hi);
                int(whole) + ratio(rng.gen_range(1..DEN), DEN)
            })
            .collect();
        let p = RationalPoint::new(coords);
        if p.is_generic() {
            return p;
        }
    }
}

/// Compare the learnt list against the oracle at `trials` random generic
/// prices in `[-1, M + 1]^n`.
pub fn verify_learned<O: DemandQuery + ?Sized>(
    oracle: &mut O,
    learnt: &BidList,
    trials: usize,
    seed: u64,
) -> bool {
    if trials == 0 {
        return true;
    }
    let n = oracle.n();
    let m = discover_magnitude(oracle).max(learnt.magnitude());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).all(|_| {
        let p = random_generic_point(&mut rng, n, -1, m + 1);
        let expected = oracle.query(&p, QueryCategory::Other);
        demand_nonmarginal(learnt, &p).is_ok_and(|x| x == expected)
    })
}
