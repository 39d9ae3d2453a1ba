//! Finite exploration of the Cayley graph: balls and spheres, avoidant
//! distances, divergence profiles for specified geodesics, and empirical
//! degree fitting.
//!
//! Avoidant distance is the length of a shortest path between two vertices
//! through the annulus `r <= |v| <= r + cap`.  Adjacent vertices differ in
//! length by exactly one, so a vertex path through the annulus never dips
//! below radius `r`.  The search is a uniform-cost A* whose heuristic is the
//! exact unconstrained word metric to the target; that metric never exceeds
//! the constrained one, so results are exact shortest annulus paths.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::hash::{BuildHasherDefault, Hasher};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{DefiningGraph, Gen};
use crate::words::{
    canonicalize, insert_left, insert_right, is_geodesic, multiply, reduce, NormalForm, RaySpec,
    WordError,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ExplorerError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{what} budget exceeded (limit {limit})")]
    BudgetExceeded { what: &'static str, limit: u64 },
    #[error("bi-infinite spec is not geodesic through the basepoint")]
    NonGeodesicConcatenation,
    #[error("need at least {needed} samples with positive values, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error(transparent)]
    Ray(#[from] WordError),
}

/// Budgets for the exhaustive parts of exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Node expansions allowed per annulus search.
    pub max_expansions: u64,
    /// Elements allowed in a ball enumeration.
    pub max_ball_elements: u64,
    /// Pair evaluations allowed in a sphere supremum.
    pub max_pair_evals: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            max_expansions: 2_000_000,
            max_ball_elements: 4_000_000,
            max_pair_evals: 2_000_000,
        }
    }
}

/// Default exploration cap for radius `r`: the annulus reaches out to `2r+4`.
pub fn default_cap(r: u32) -> u32 {
    r + 4
}

/// The ball of a given radius about the identity, stored as per-length
/// sphere lists.  Spheres are sorted, so iteration order is deterministic.
#[derive(Debug, Clone)]
pub struct BallIndex {
    pub radius: u32,
    pub spheres: Vec<Vec<NormalForm>>,
}

impl BallIndex {
    pub fn sphere(&self, r: u32) -> &[NormalForm] {
        &self.spheres[r as usize]
    }

    pub fn element_count(&self) -> usize {
        self.spheres.iter().map(|s| s.len()).sum()
    }
}

/// Exhaustive breadth-first enumeration of the ball of radius `r`,
/// deduplicating by canonical form.
pub fn build_ball(
    g: &DefiningGraph,
    r: u32,
    budget: &SearchBudget,
) -> Result<BallIndex, ExplorerError> {
    let n = g.vertex_count() as Gen;
    let mut spheres: Vec<Vec<NormalForm>> = vec![vec![NormalForm::identity()]];
    let mut seen: HashSet<NormalForm> = HashSet::new();
    seen.insert(NormalForm::identity());
    let mut total: u64 = 1;
    for k in 0..r {
        let mut next = Vec::new();
        for x in &spheres[k as usize] {
            for s in 0..n {
                let y = multiply(g, x, &[s]);
                if y.len() == k as usize + 1 && !seen.contains(&y) {
                    total += 1;
                    if total > budget.max_ball_elements {
                        return Err(ExplorerError::BudgetExceeded {
                            what: "ball enumeration",
                            limit: budget.max_ball_elements,
                        });
                    }
                    seen.insert(y.clone());
                    next.push(y);
                }
            }
        }
        next.sort();
        spheres.push(next);
    }
    Ok(BallIndex { radius: r, spheres })
}

/// Outcome of one avoidant-distance computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AvoidantResult {
    /// Length of a shortest annulus path, or absent when none exists within
    /// the annulus (the cap is then a lower-bound witness).
    pub value: Option<u32>,
    pub radius: u32,
    pub cap: u32,
    /// Value unchanged when recomputed with cap + 2.
    pub stable: bool,
    /// Some search hit the expansion budget; the result is then only a bound.
    pub budget_exhausted: bool,
    /// Nodes expanded by the primary search.
    pub expansions: u64,
}

enum SearchOutcome {
    Found(u32, u64),
    NoPath(u64),
    /// Expansion budget hit; carries the best connection found so far, which
    /// is the length of an actual avoidant path but not certified shortest.
    Exhausted(Option<u32>, u64),
}

/// The word-hashing hot path wants something much faster than SipHash; this
/// is the multiply-rotate-xor scheme rustc uses internally.
#[derive(Default)]
struct WordHasher {
    hash: u64,
}

impl Hasher for WordHasher {
    fn write(&mut self, bytes: &[u8]) {
        const SEED: u64 = 0x51_7c_c1_b7_27_22_0a_95;
        let mut chunks = bytes.chunks_exact(8);
        for c in &mut chunks {
            let v = u64::from_le_bytes(c.try_into().unwrap());
            self.hash = (self.hash.rotate_left(5) ^ v).wrapping_mul(SEED);
        }
        let mut tail: u64 = 0;
        for (i, &b) in chunks.remainder().iter().enumerate() {
            tail |= (b as u64) << (8 * i);
        }
        self.hash = (self.hash.rotate_left(5) ^ tail ^ (bytes.len() as u64)).wrapping_mul(SEED);
    }

    fn finish(&self) -> u64 {
        self.hash
    }
}

type WordMap<V> = HashMap<Box<[Gen]>, V, BuildHasherDefault<WordHasher>>;

#[derive(PartialEq, Eq)]
struct Entry {
    f: u32,
    form: Box<[Gen]>,
    g_cost: u32,
    togo: Box<[Gen]>,
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.f, &self.form, self.g_cost).cmp(&(other.f, &other.form, other.g_cost))
    }
}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

struct NodeState {
    g: u32,
    closed: bool,
}

/// One direction of the bidirectional search.  `togo` holds a reduced word
/// for `v^-1 * target`, so its length is the exact unconstrained distance to
/// this side's target; that never exceeds the annulus-constrained distance.
struct Frontier {
    open: BinaryHeap<Reverse<Entry>>,
    nodes: WordMap<NodeState>,
}

impl Frontier {
    fn start(g: &DefiningGraph, from: &NormalForm, to: &NormalForm) -> Frontier {
        let mut word: Vec<Gen> = from.inverse_word().0;
        word.extend_from_slice(to.letters());
        let togo: Box<[Gen]> = reduce(g, &word).letters().into();
        let mut open = BinaryHeap::new();
        let mut nodes: WordMap<NodeState> = WordMap::default();
        nodes.insert(from.letters().into(), NodeState { g: 0, closed: false });
        open.push(Reverse(Entry {
            f: togo.len() as u32,
            form: from.letters().into(),
            g_cost: 0,
            togo,
        }));
        Frontier { open, nodes }
    }

    /// Least f over live open entries; drops stale ones on the way.
    fn min_f(&mut self) -> Option<u32> {
        while let Some(Reverse(e)) = self.open.peek() {
            match self.nodes.get(&e.form) {
                Some(st) if st.closed || st.g < e.g_cost => {
                    self.open.pop();
                }
                _ => return Some(e.f),
            }
        }
        None
    }
}

/// Shortest path length from `x` to `y` through `r <= |v| <= r + cap`.
///
/// Bidirectional A*: two frontiers grow from the endpoints, each guided by
/// the word metric to the opposite endpoint, meeting in the middle.  A found
/// connection of length `mu` is optimal once `mu <= max(fmin_x, fmin_y)`;
/// if either frontier exhausts its reachable region first, its distance map
/// is complete and answers directly.
fn annulus_search(
    g: &DefiningGraph,
    x: &NormalForm,
    y: &NormalForm,
    r: u32,
    cap: u32,
    max_expansions: u64,
) -> SearchOutcome {
    if x == y {
        return SearchOutcome::Found(0, 0);
    }
    let lo = r as usize;
    let hi = (r + cap) as usize;
    if x.len() > hi || y.len() > hi || x.len() < lo || y.len() < lo {
        return SearchOutcome::NoPath(0);
    }
    let n = g.vertex_count() as Gen;

    let mut sides = [Frontier::start(g, x, y), Frontier::start(g, y, x)];
    let mut mu: Option<u32> = None;
    let mut expansions: u64 = 0;

    loop {
        let fx = sides[0].min_f();
        let fy = sides[1].min_f();
        let (this, that) = match (fx, fy) {
            (None, _) => {
                // The x-side explored everything it can reach; its map is
                // final.
                return match sides[0].nodes.get(x_key(y)) {
                    Some(st) => SearchOutcome::Found(st.g, expansions),
                    None => SearchOutcome::NoPath(expansions),
                };
            }
            (_, None) => {
                return match sides[1].nodes.get(x_key(x)) {
                    Some(st) => SearchOutcome::Found(st.g, expansions),
                    None => SearchOutcome::NoPath(expansions),
                };
            }
            (Some(a), Some(b)) => {
                if let Some(m) = mu {
                    if m <= a.max(b) {
                        return SearchOutcome::Found(m, expansions);
                    }
                }
                if a <= b {
                    (0, 1)
                } else {
                    (1, 0)
                }
            }
        };

        let entry = match sides[this].open.pop() {
            Some(Reverse(e)) => e,
            None => continue,
        };
        match sides[this].nodes.get_mut(&entry.form) {
            Some(st) if st.closed || st.g < entry.g_cost => continue,
            Some(st) => st.closed = true,
            None => continue,
        }
        if let Some(st) = sides[that].nodes.get(&entry.form) {
            let cand = entry.g_cost + st.g;
            if mu.map_or(true, |m| cand < m) {
                mu = Some(cand);
            }
        }
        expansions += 1;
        if expansions > max_expansions {
            return SearchOutcome::Exhausted(mu, expansions);
        }

        let mut child_buf: Vec<Gen> = Vec::with_capacity(entry.form.len() + 1);
        for s in 0..n {
            child_buf.clear();
            child_buf.extend_from_slice(&entry.form);
            insert_right(g, &mut child_buf, s);
            let len = child_buf.len();
            if len < lo || len > hi {
                continue;
            }
            canonicalize(g, &mut child_buf);
            let child_g = entry.g_cost + 1;
            match sides[this].nodes.get(child_buf.as_slice()) {
                Some(st) if st.closed || st.g <= child_g => continue,
                _ => {}
            }
            if let Some(st) = sides[that].nodes.get(child_buf.as_slice()) {
                let cand = child_g + st.g;
                if mu.map_or(true, |m| cand < m) {
                    mu = Some(cand);
                }
            }
            let mut child_togo: Vec<Gen> = Vec::with_capacity(entry.togo.len() + 1);
            child_togo.extend_from_slice(&entry.togo);
            insert_left(g, &mut child_togo, s);
            let f = child_g + child_togo.len() as u32;
            let child: Box<[Gen]> = child_buf.as_slice().into();
            sides[this].nodes.insert(
                child.clone(),
                NodeState {
                    g: child_g,
                    closed: false,
                },
            );
            sides[this].open.push(Reverse(Entry {
                f,
                form: child,
                g_cost: child_g,
                togo: child_togo.into(),
            }));
        }
    }
}

fn x_key(nf: &NormalForm) -> &[Gen] {
    nf.letters()
}

/// Single-source annulus BFS reporting the distances to a set of targets.
/// Exact within the annulus; exits early once every target is reached.
fn annulus_sweep(
    g: &DefiningGraph,
    source: &NormalForm,
    targets: &[&NormalForm],
    r: u32,
    cap: u32,
    max_expansions: u64,
) -> (Vec<Option<u32>>, bool) {
    let lo = r as usize;
    let hi = (r + cap) as usize;
    let mut out: Vec<Option<u32>> = vec![None; targets.len()];
    if source.len() < lo || source.len() > hi {
        return (out, false);
    }
    let mut wanted: WordMap<Vec<usize>> = WordMap::default();
    for (i, t) in targets.iter().enumerate() {
        if t.len() < lo || t.len() > hi {
            continue;
        }
        wanted.entry(t.letters().into()).or_default().push(i);
    }
    let mut remaining: usize = wanted.values().map(|v| v.len()).sum();
    let mut dist: WordMap<u32> = WordMap::default();
    dist.insert(source.letters().into(), 0);
    if let Some(ids) = wanted.get(source.letters()) {
        for &i in ids {
            out[i] = Some(0);
            remaining -= 1;
        }
    }
    if remaining == 0 {
        return (out, false);
    }
    let n = g.vertex_count() as Gen;
    let mut queue: std::collections::VecDeque<Box<[Gen]>> = Default::default();
    queue.push_back(source.letters().into());
    let mut expansions: u64 = 0;
    let mut child_buf: Vec<Gen> = Vec::new();
    while let Some(form) = queue.pop_front() {
        let d = dist[&form];
        expansions += 1;
        if expansions > max_expansions {
            return (out, true);
        }
        for s in 0..n {
            child_buf.clear();
            child_buf.extend_from_slice(&form);
            insert_right(g, &mut child_buf, s);
            let len = child_buf.len();
            if len < lo || len > hi {
                continue;
            }
            canonicalize(g, &mut child_buf);
            if dist.contains_key(child_buf.as_slice()) {
                continue;
            }
            let key: Box<[Gen]> = child_buf.as_slice().into();
            dist.insert(key.clone(), d + 1);
            if let Some(ids) = wanted.get(child_buf.as_slice()) {
                for &i in ids {
                    if out[i].is_none() {
                        out[i] = Some(d + 1);
                        remaining -= 1;
                    }
                }
                if remaining == 0 {
                    return (out, false);
                }
            }
            queue.push_back(key);
        }
    }
    (out, false)
}

/// Avoidant distance with cap-stability certification: the search is run at
/// `cap` and again at `cap + 2`, and the result is flagged stable when the
/// values agree.  When the annulus value already equals the unconstrained
/// word-metric distance it cannot improve at any cap, so that recheck is
/// skipped and the value is certified directly.
pub fn avoidant_distance(
    g: &DefiningGraph,
    x: &NormalForm,
    y: &NormalForm,
    r: u32,
    cap: u32,
    budget: &SearchBudget,
) -> Result<AvoidantResult, ExplorerError> {
    if x.len() < r as usize || y.len() < r as usize {
        return Err(ExplorerError::Precondition(format!(
            "endpoints must lie outside the open ball: |x| = {}, |y| = {}, r = {r}",
            x.len(),
            y.len()
        )));
    }
    let free_distance = {
        let mut w: Vec<Gen> = x.inverse_word().0;
        w.extend_from_slice(y.letters());
        reduce(g, &w).len() as u32
    };
    let primary = annulus_search(g, x, y, r, cap, budget.max_expansions);
    match primary {
        // A value equal to the unconstrained distance cannot improve at any
        // cap, so it is certified without the recheck.
        SearchOutcome::Found(v, e) if v == free_distance => Ok(AvoidantResult {
            value: Some(v),
            radius: r,
            cap,
            stable: true,
            budget_exhausted: false,
            expansions: e,
        }),
        // The recheck would hit the same budget on a larger annulus; report
        // the best path found instead.
        SearchOutcome::Exhausted(incumbent, e) => Ok(AvoidantResult {
            value: incumbent,
            radius: r,
            cap,
            stable: false,
            budget_exhausted: true,
            expansions: e,
        }),
        SearchOutcome::Found(v, e) => {
            let recheck = annulus_search(g, x, y, r, cap + 2, budget.max_expansions);
            let (recheck_value, exhausted_recheck) = match recheck {
                SearchOutcome::Found(rv, _) => (Some(rv), false),
                SearchOutcome::NoPath(_) => (None, false),
                SearchOutcome::Exhausted(rv, _) => (rv, true),
            };
            Ok(AvoidantResult {
                value: Some(v),
                radius: r,
                cap,
                stable: !exhausted_recheck && recheck_value == Some(v),
                budget_exhausted: exhausted_recheck,
                expansions: e,
            })
        }
        SearchOutcome::NoPath(e) => {
            let recheck = annulus_search(g, x, y, r, cap + 2, budget.max_expansions);
            let exhausted_recheck = matches!(recheck, SearchOutcome::Exhausted(..));
            Ok(AvoidantResult {
                value: None,
                radius: r,
                cap,
                stable: false,
                budget_exhausted: exhausted_recheck,
                expansions: e,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    PairGeodesic,
    BiInfinite,
    SphereSupSampled,
}

impl SampleKind {
    pub fn label(&self) -> &'static str {
        match self {
            SampleKind::PairGeodesic => "pair-geodesic",
            SampleKind::BiInfinite => "bi-infinite",
            SampleKind::SphereSupSampled => "sphere-sup-sampled",
        }
    }

    pub fn from_label(s: &str) -> Option<SampleKind> {
        match s {
            "pair-geodesic" => Some(SampleKind::PairGeodesic),
            "bi-infinite" => Some(SampleKind::BiInfinite),
            "sphere-sup-sampled" => Some(SampleKind::SphereSupSampled),
            _ => None,
        }
    }
}

/// One measured divergence value.  A sphere-supremum sample is only a lower
/// bound for the true supremum unless the pair set was exhaustive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DivergenceSample {
    pub kind: SampleKind,
    pub r: u32,
    pub value: Option<u64>,
    pub exact: bool,
    pub cap: u32,
    pub stable: bool,
}

/// Avoidant distance between the time-`r` points of two rays based at the
/// identity, at radius `r`.
pub fn pair_divergence(
    g: &DefiningGraph,
    alpha: &RaySpec,
    beta: &RaySpec,
    r: u32,
    cap: u32,
    budget: &SearchBudget,
) -> Result<DivergenceSample, ExplorerError> {
    if !alpha.base().is_empty() || !beta.base().is_empty() {
        return Err(ExplorerError::Precondition(
            "rays must be based at the identity".into(),
        ));
    }
    let x = alpha.point(g, r as usize)?;
    let y = beta.point(g, r as usize)?;
    let res = avoidant_distance(g, &x, &y, r, cap, budget)?;
    Ok(DivergenceSample {
        kind: SampleKind::PairGeodesic,
        r,
        value: res.value.map(u64::from),
        exact: res.stable,
        cap: res.cap,
        stable: res.stable,
    })
}

/// A bi-infinite geodesic through the identity, given by its two halves.
#[derive(Debug, Clone)]
pub struct BiInfiniteSpec {
    pub positive: RaySpec,
    pub negative: RaySpec,
}

impl BiInfiniteSpec {
    pub fn new(positive: RaySpec, negative: RaySpec) -> Result<Self, ExplorerError> {
        if !positive.base().is_empty() || !negative.base().is_empty() {
            return Err(ExplorerError::Precondition(
                "both halves must be based at the identity".into(),
            ));
        }
        Ok(BiInfiniteSpec { positive, negative })
    }

    /// Periodic geodesic labelled `... w w w ...` with the identity at a
    /// period boundary.
    pub fn periodic(w: &crate::words::Word) -> Result<Self, ExplorerError> {
        let positive = RaySpec::periodic(w.clone())?;
        let reversed = crate::words::Word(w.letters().iter().rev().copied().collect());
        let negative = RaySpec::periodic(reversed)?;
        BiInfiniteSpec::new(positive, negative)
    }

    /// The concatenation through the basepoint must be geodesic out to the
    /// given depth on both sides.
    pub fn check_geodesic(&self, g: &DefiningGraph, depth: usize) -> Result<(), ExplorerError> {
        let mut window: Vec<Gen> = self
            .negative
            .label_prefix(depth)
            .into_iter()
            .rev()
            .collect();
        window.extend(self.positive.label_prefix(depth));
        if is_geodesic(g, &window) {
            Ok(())
        } else {
            Err(ExplorerError::NonGeodesicConcatenation)
        }
    }
}

/// One divergence sample per radius: the avoidant distance between the two
/// time-`r` points of the bi-infinite geodesic, avoiding the ball about its
/// midpoint.
pub fn divergence_profile(
    g: &DefiningGraph,
    spec: &BiInfiniteSpec,
    radii: &[u32],
    cap: Option<u32>,
    budget: &SearchBudget,
) -> Result<Vec<DivergenceSample>, ExplorerError> {
    let depth = radii.iter().copied().max().unwrap_or(0) as usize;
    spec.check_geodesic(g, depth)?;
    let mut out = Vec::with_capacity(radii.len());
    for &r in radii {
        let x = spec.negative.point(g, r as usize)?;
        let y = spec.positive.point(g, r as usize)?;
        let cap_r = cap.unwrap_or_else(|| default_cap(r));
        let res = avoidant_distance(g, &x, &y, r, cap_r, budget)?;
        out.push(DivergenceSample {
            kind: SampleKind::BiInfinite,
            r,
            value: res.value.map(u64::from),
            exact: res.stable,
            cap: cap_r,
            stable: res.stable,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaStrategy {
    Exhaustive,
    Sampled { pairs: usize, seed: u64 },
}

/// Supremum of avoidant distance over pairs on the sphere of radius `r`.
/// Exhaustive under the pair budget; otherwise a seeded deterministic sample
/// that always includes the lexicographic extremes of the sphere.
pub fn delta_estimate(
    g: &DefiningGraph,
    r: u32,
    strategy: DeltaStrategy,
    cap: u32,
    budget: &SearchBudget,
) -> Result<DivergenceSample, ExplorerError> {
    let ball = build_ball(g, r, budget)?;
    let sphere = ball.sphere(r);
    if sphere.len() < 2 {
        return Ok(DivergenceSample {
            kind: SampleKind::SphereSupSampled,
            r,
            value: Some(0),
            exact: true,
            cap,
            stable: true,
        });
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let exhaustive = matches!(strategy, DeltaStrategy::Exhaustive);
    match strategy {
        DeltaStrategy::Exhaustive => {
            let total = sphere.len() as u64 * (sphere.len() as u64 - 1) / 2;
            if total > budget.max_pair_evals {
                return Err(ExplorerError::BudgetExceeded {
                    what: "sphere pair evaluation",
                    limit: budget.max_pair_evals,
                });
            }
            for i in 0..sphere.len() {
                for j in (i + 1)..sphere.len() {
                    pairs.push((i, j));
                }
            }
        }
        DeltaStrategy::Sampled { pairs: k, seed } => {
            // Spheres are sorted, so the extremes are well-defined.
            pairs.push((0, sphere.len() - 1));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let all: Vec<usize> = (0..sphere.len()).collect();
            for _ in 0..k {
                let mut pick: Vec<usize> = all
                    .choose_multiple(&mut rng, 2.min(all.len()))
                    .copied()
                    .collect();
                pick.sort_unstable();
                if pick.len() == 2 {
                    pairs.push((pick[0], pick[1]));
                }
            }
            pairs.sort_unstable();
            pairs.dedup();
            if pairs.len() as u64 > budget.max_pair_evals {
                return Err(ExplorerError::BudgetExceeded {
                    what: "sphere pair evaluation",
                    limit: budget.max_pair_evals,
                });
            }
        }
    }
    // Group pairs by source and answer each group with one annulus sweep
    // (two when certification needs the larger annulus).
    let mut by_source: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, j) in pairs {
        by_source.entry(i).or_default().push(j);
    }
    let mut max_value: u64 = 0;
    let mut all_stable = true;
    let mut any_missing = false;
    for (i, js) in by_source {
        let source = &sphere[i];
        let targets: Vec<&NormalForm> = js.iter().map(|&j| &sphere[j]).collect();
        let free: Vec<u32> = targets
            .iter()
            .map(|t| {
                let mut w = source.inverse_word().0;
                w.extend_from_slice(t.letters());
                reduce(g, &w).len() as u32
            })
            .collect();
        let (values, exhausted) =
            annulus_sweep(g, source, &targets, r, cap, budget.max_expansions);
        // A value matching the unconstrained distance is certified; the rest
        // need the larger annulus for a stability check.
        let needs_recheck = exhausted
            || values
                .iter()
                .zip(&free)
                .any(|(v, &f)| v.map_or(true, |v| v != f));
        let recheck = if needs_recheck {
            let (rv, rex) = annulus_sweep(g, source, &targets, r, cap + 2, budget.max_expansions);
            Some((rv, rex))
        } else {
            None
        };
        for (k, v) in values.iter().enumerate() {
            match v {
                Some(v) => {
                    max_value = max_value.max(u64::from(*v));
                    if *v != free[k] {
                        let certified = recheck
                            .as_ref()
                            .map_or(false, |(rv, rex)| !rex && rv[k] == Some(*v));
                        all_stable &= certified;
                    }
                }
                None => any_missing = true,
            }
        }
        if exhausted {
            all_stable = false;
        }
    }
    let trustworthy = all_stable && !any_missing;
    Ok(DivergenceSample {
        kind: SampleKind::SphereSupSampled,
        r,
        value: Some(max_value),
        exact: exhaustive && trustworthy,
        cap,
        stable: trustworthy,
    })
}

/// Least-squares slope of log value against log radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub points: usize,
}

/// Fits a power law to the samples, discarding radii below 3 and absent or
/// zero values.
pub fn fit_degree(samples: &[DivergenceSample]) -> Result<DegreeEstimate, ExplorerError> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.r >= 3)
        .filter_map(|s| {
            s.value
                .filter(|&v| v > 0)
                .map(|v| ((s.r as f64).ln(), (v as f64).ln()))
        })
        .collect();
    if pts.len() < 3 {
        return Err(ExplorerError::InsufficientSamples {
            needed: 3,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let rms_residual = (pts
        .iter()
        .map(|&(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DegreeEstimate {
        slope,
        intercept,
        rms_residual,
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gamma_d, parse_graph};
    use crate::words::Word;

    fn c5() -> DefiningGraph {
        parse_graph(
            "vertices: v1 v2 v3 v4 v5\nedge v1 v2\nedge v2 v3\nedge v3 v4\nedge v4 v5\nedge v5 v1\n",
        )
        .unwrap()
    }

    fn nf(g: &DefiningGraph, s: &str) -> NormalForm {
        reduce(g, Word::parse(g, s).unwrap().letters())
    }

    /// Coordinates of an element of the product of two infinite dihedral
    /// groups, walking the two projections along the letters.
    fn grid_coords(g: &DefiningGraph, x: &NormalForm) -> (i64, i64) {
        let step = |p: i64, first: bool| {
            let even = p.rem_euclid(2) == 0;
            if first == even {
                p + 1
            } else {
                p - 1
            }
        };
        let a0 = g.vertex_index("a0").unwrap();
        let a1 = g.vertex_index("a1").unwrap();
        let b0 = g.vertex_index("b0").unwrap();
        let b1 = g.vertex_index("b1").unwrap();
        let mut p = (0i64, 0i64);
        for &l in x.letters() {
            if l == a0 {
                p.0 = step(p.0, true);
            } else if l == b0 {
                p.0 = step(p.0, false);
            } else if l == a1 {
                p.1 = step(p.1, true);
            } else if l == b1 {
                p.1 = step(p.1, false);
            } else {
                panic!("unexpected letter");
            }
        }
        p
    }

    #[test]
    fn ball_trivial_and_small_spheres() {
        let b = SearchBudget::default();
        let g = c5();
        let ball = build_ball(&g, 2, &b).unwrap();
        assert_eq!(ball.sphere(0).len(), 1);
        assert_eq!(ball.sphere(1).len(), 5);
        assert_eq!(ball.sphere(2).len(), 15);
    }

    #[test]
    fn ball_of_grid_grows_linearly() {
        let b = SearchBudget::default();
        let g = gamma_d(1).unwrap();
        let ball = build_ball(&g, 6, &b).unwrap();
        for r in 1..=6 {
            assert_eq!(ball.sphere(r).len(), 4 * r as usize, "sphere {r}");
        }
    }

    #[test]
    fn ball_closure_property() {
        let b = SearchBudget::default();
        let g = c5();
        let ball = build_ball(&g, 4, &b).unwrap();
        for k in 1..=4u32 {
            for x in ball.sphere(k) {
                let shrinks = (0..g.vertex_count() as Gen).any(|s| {
                    let y = multiply(&g, x, &[s]);
                    y.len() + 1 == x.len() && ball.sphere(k - 1).binary_search(&y).is_ok()
                });
                assert!(
                    shrinks,
                    "element of sphere {k} must step down to sphere {}",
                    k - 1
                );
            }
        }
    }

    #[test]
    fn ball_budget_is_enforced() {
        let budget = SearchBudget {
            max_ball_elements: 10,
            ..SearchBudget::default()
        };
        assert!(matches!(
            build_ball(&c5(), 3, &budget),
            Err(ExplorerError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn avoidant_at_radius_zero_is_graph_distance() {
        let b = SearchBudget::default();
        let g = c5();
        let xs = ["", "v1", "v1 v3", "v2 v4 v1", "v1 v2 v1 v3"];
        let ys = ["", "v3", "v5 v2", "v4 v4 v2"];
        for sx in xs {
            for sy in ys {
                let x = nf(&g, sx);
                let y = nf(&g, sy);
                let cap = (x.len() + y.len()) as u32 + 2;
                let res = avoidant_distance(&g, &x, &y, 0, cap, &b).unwrap();
                let mut w = x.inverse_word().0;
                w.extend_from_slice(y.letters());
                let expect = reduce(&g, &w).len() as u32;
                assert_eq!(res.value, Some(expect), "{sx} -> {sy}");
                let sym = avoidant_distance(&g, &y, &x, 0, cap, &b).unwrap();
                assert_eq!(sym.value, res.value);
            }
        }
    }

    #[test]
    fn avoidant_grid_examples() {
        let b = SearchBudget::default();
        let g = gamma_d(1).unwrap();
        // From (2,0) to (0,2) around the ball of radius 2.
        let x = nf(&g, "a0 b0");
        let y = nf(&g, "a1 b1");
        assert_eq!(grid_coords(&g, &x), (2, 0));
        assert_eq!(grid_coords(&g, &y), (0, 2));
        let res = avoidant_distance(&g, &x, &y, 2, 4, &b).unwrap();
        assert_eq!(res.value, Some(4));
        assert!(res.stable);

        // Antipodal detour costs 4r.
        for r in [2u32, 4] {
            let xw: Vec<&str> = std::iter::repeat(["a0", "b0"])
                .take(r as usize / 2)
                .flatten()
                .collect();
            let x = nf(&g, &xw.join(" "));
            let yw: Vec<&str> = std::iter::repeat(["b0", "a0"])
                .take(r as usize / 2)
                .flatten()
                .collect();
            let y = nf(&g, &yw.join(" "));
            assert_eq!(grid_coords(&g, &x), (r as i64, 0));
            assert_eq!(grid_coords(&g, &y), (-(r as i64), 0));
            let res = avoidant_distance(&g, &x, &y, r, default_cap(r), &b).unwrap();
            assert_eq!(res.value, Some(4 * r));
        }
    }

    #[test]
    fn avoidant_matches_grid_oracle() {
        let b = SearchBudget::default();
        let g = gamma_d(1).unwrap();
        let ball = build_ball(&g, 4, &b).unwrap();
        let r = 3u32;
        let cap = 5u32;
        let sphere3 = ball.sphere(3);
        let sphere4 = ball.sphere(4);
        for x in sphere3.iter().chain(sphere4.iter()).step_by(2) {
            for y in sphere3.iter().step_by(3) {
                let res = avoidant_distance(&g, x, y, r, cap, &b).unwrap();
                let oracle = racg_testkit::grid_avoidant_distance(
                    grid_coords(&g, x),
                    grid_coords(&g, y),
                    r as i64,
                    cap as i64,
                );
                assert_eq!(res.value.map(u64::from), oracle);
            }
        }
    }

    #[test]
    fn avoidant_monotone_in_cap() {
        let b = SearchBudget::default();
        let g = c5();
        let x = nf(&g, "v1 v3 v5");
        let y = nf(&g, "v2 v4 v2");
        let mut last = u32::MAX;
        for cap in [1u32, 3, 5, 9] {
            if let Some(v) = avoidant_distance(&g, &x, &y, 3, cap, &b).unwrap().value {
                assert!(v <= last);
                last = v;
            }
        }
        assert_ne!(last, u32::MAX, "some cap must admit a path");
    }

    #[test]
    fn avoidant_precondition() {
        let b = SearchBudget::default();
        let g = c5();
        let x = nf(&g, "v1");
        assert!(matches!(
            avoidant_distance(&g, &x, &x, 2, 4, &b),
            Err(ExplorerError::Precondition(_))
        ));
    }

    #[test]
    fn pair_divergence_trivial_and_grid() {
        let b = SearchBudget::default();
        let g = gamma_d(1).unwrap();
        let alpha = RaySpec::periodic(Word::parse(&g, "a0 b0").unwrap()).unwrap();
        let same = pair_divergence(&g, &alpha, &alpha, 5, default_cap(5), &b).unwrap();
        assert_eq!(same.value, Some(0));

        let beta = RaySpec::periodic(Word::parse(&g, "a1 b1").unwrap()).unwrap();
        let s = pair_divergence(&g, &alpha, &beta, 4, default_cap(4), &b).unwrap();
        assert_eq!(s.value, Some(8));
        assert!(s.stable);
    }

    #[test]
    fn profile_on_grid_axis_is_4r() {
        let b = SearchBudget::default();
        let g = gamma_d(1).unwrap();
        let spec = BiInfiniteSpec::periodic(&Word::parse(&g, "a0 b0").unwrap()).unwrap();
        let radii: Vec<u32> = (1..=6).collect();
        let samples = divergence_profile(&g, &spec, &radii, None, &b).unwrap();
        for s in &samples {
            assert_eq!(s.value, Some(4 * s.r as u64), "r = {}", s.r);
            assert!(s.stable);
        }
    }

    #[test]
    fn profile_rejects_non_geodesic_concatenation() {
        let b = SearchBudget::default();
        let g = gamma_d(1).unwrap();
        // Two copies of the same ray do not concatenate to a geodesic.
        let ray = RaySpec::periodic(Word::parse(&g, "a0 b0").unwrap()).unwrap();
        let spec = BiInfiniteSpec::new(ray.clone(), ray).unwrap();
        assert_eq!(
            divergence_profile(&g, &spec, &[3], None, &b).unwrap_err(),
            ExplorerError::NonGeodesicConcatenation
        );
    }

    #[test]
    fn delta_on_grid() {
        let b = SearchBudget::default();
        let g = gamma_d(1).unwrap();
        let s = delta_estimate(&g, 3, DeltaStrategy::Exhaustive, default_cap(3), &b).unwrap();
        assert_eq!(s.value, Some(12));
        assert!(s.exact);
    }

    #[test]
    fn delta_at_radius_one_is_small() {
        let b = SearchBudget::default();
        for g in [c5(), gamma_d(2).unwrap()] {
            let s = delta_estimate(&g, 1, DeltaStrategy::Exhaustive, default_cap(1), &b).unwrap();
            assert!(s.value.unwrap() <= 2 * g.vertex_count() as u64);
        }
    }

    #[test]
    fn delta_sampled_is_deterministic_and_bounded_by_exhaustive() {
        let b = SearchBudget::default();
        let g = c5();
        let full = delta_estimate(&g, 3, DeltaStrategy::Exhaustive, default_cap(3), &b).unwrap();
        let s1 = delta_estimate(
            &g,
            3,
            DeltaStrategy::Sampled { pairs: 20, seed: 7 },
            default_cap(3),
            &b,
        )
        .unwrap();
        let s2 = delta_estimate(
            &g,
            3,
            DeltaStrategy::Sampled { pairs: 20, seed: 7 },
            default_cap(3),
            &b,
        )
        .unwrap();
        assert_eq!(s1, s2);
        assert!(s1.value.unwrap() <= full.value.unwrap());
        assert!(!s1.exact);
    }

    #[test]
    fn fit_recovers_exact_power_laws() {
        let mk = |f: &dyn Fn(u32) -> u64| -> Vec<DivergenceSample> {
            (3..=10)
                .map(|r| DivergenceSample {
                    kind: SampleKind::BiInfinite,
                    r,
                    value: Some(f(r)),
                    exact: true,
                    cap: 0,
                    stable: true,
                })
                .collect()
        };
        let lin = fit_degree(&mk(&|r| 2 * r as u64)).unwrap();
        assert!((lin.slope - 1.0).abs() < 0.05, "slope {}", lin.slope);
        let quad = fit_degree(&mk(&|r| (r as u64) * (r as u64))).unwrap();
        assert!((quad.slope - 2.0).abs() < 0.05, "slope {}", quad.slope);
    }

    #[test]
    fn fit_requires_enough_points() {
        assert!(matches!(
            fit_degree(&[]),
            Err(ExplorerError::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn fit_on_measured_grid_profile() {
        let b = SearchBudget::default();
        let g = gamma_d(1).unwrap();
        let spec = BiInfiniteSpec::periodic(&Word::parse(&g, "a0 b0").unwrap()).unwrap();
        let radii: Vec<u32> = (3..=8).collect();
        let samples = divergence_profile(&g, &spec, &radii, None, &b).unwrap();
        let est = fit_degree(&samples).unwrap();
        assert!(est.slope > 0.8 && est.slope < 1.3, "slope {}", est.slope);
    }
}
