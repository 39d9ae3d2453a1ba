//! Words and elements of the right-angled Coxeter group of a defining graph.
//!
//! Elements are represented by canonical reduced words: ShortLex-least in
//! their commutation class under the generator order given by the graph's
//! vertex order.  Reduction uses the two rewriting moves (delete an adjacent
//! equal pair, swap an adjacent commuting pair); a right multiplication by a
//! generator cancels exactly when some occurrence of that generator commutes
//! past every later letter.

use std::fmt;

use thiserror::Error;

use crate::graph::{enumerate_four_cycles, is_join, DefiningGraph, Gen};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("unknown vertex name `{name}` in word")]
    UnknownVertexName { name: String },
    #[error("graph is a join; its complement is disconnected")]
    GraphIsJoin,
    #[error("graph has fewer than two vertices")]
    DegenerateGraph,
    #[error("word is not geodesic")]
    NotGeodesic,
    #[error("unpieceable at index {index}: letter lies in no four-cycle")]
    Unpieceable { index: usize },
    #[error("ray period must be nonempty")]
    EmptyPeriod,
    #[error("ray label is not reduced at depth {depth}")]
    InvalidRay { depth: usize },
}

/// A plain word: a finite sequence of generator indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Gen>);

impl Word {
    pub fn letters(&self) -> &[Gen] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses whitespace-separated vertex names; the empty string is the
    /// identity.
    pub fn parse(g: &DefiningGraph, text: &str) -> Result<Word, WordError> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            let v = g
                .vertex_index(tok)
                .ok_or_else(|| WordError::UnknownVertexName {
                    name: tok.to_string(),
                })?;
            letters.push(v);
        }
        Ok(Word(letters))
    }

    pub fn render(&self, g: &DefiningGraph) -> String {
        self.0
            .iter()
            .map(|&v| g.vertex_name(v))
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Distinct letters as a bitmask.
    pub fn support_mask(&self) -> u128 {
        self.0.iter().fold(0, |m, &v| m | (1 << v))
    }
}

impl From<Vec<Gen>> for Word {
    fn from(v: Vec<Gen>) -> Self {
        Word(v)
    }
}

/// Canonical reduced word for a group element.  The empty sequence is the
/// identity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct NormalForm {
    letters: Vec<Gen>,
}

impl NormalForm {
    pub fn identity() -> NormalForm {
        NormalForm::default()
    }

    pub fn letters(&self) -> &[Gen] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn to_word(&self) -> Word {
        Word(self.letters.clone())
    }

    /// A word for the inverse: generators are involutions, so reversal works.
    pub fn inverse_word(&self) -> Word {
        Word(self.letters.iter().rev().copied().collect())
    }

    pub fn render(&self, g: &DefiningGraph) -> String {
        self.to_word().render(g)
    }
}

fn check_letters(g: &DefiningGraph, w: &[Gen]) {
    for &s in w {
        assert!(
            (s as usize) < g.vertex_count(),
            "letter {s} out of range for graph with {} vertices",
            g.vertex_count()
        );
    }
}

/// Right-multiplies the reduced word in `letters` by `s`, keeping it reduced.
/// Cancels the occurrence of `s` that commutes past every later letter, if
/// one exists; otherwise appends.
pub(crate) fn insert_right(g: &DefiningGraph, letters: &mut Vec<Gen>, s: Gen) {
    let mut i = letters.len();
    while i > 0 {
        i -= 1;
        let t = letters[i];
        if t == s {
            letters.remove(i);
            return;
        }
        if !g.commutes(t, s) {
            break;
        }
    }
    letters.push(s);
}

/// Left counterpart of [`insert_right`].
pub(crate) fn insert_left(g: &DefiningGraph, letters: &mut Vec<Gen>, s: Gen) {
    let mut i = 0;
    while i < letters.len() {
        let t = letters[i];
        if t == s {
            letters.remove(i);
            return;
        }
        if !g.commutes(t, s) {
            break;
        }
        i += 1;
    }
    letters.insert(0, s);
}

/// ShortLex-least representative of the commutation class of a reduced word:
/// repeatedly emit the least letter whose preceding letters all commute with
/// it.
pub(crate) fn canonicalize(g: &DefiningGraph, letters: &mut Vec<Gen>) {
    let mut out = Vec::with_capacity(letters.len());
    while !letters.is_empty() {
        let mut prefix_mask: u128 = 0;
        let mut best: Option<(Gen, usize)> = None;
        for (i, &c) in letters.iter().enumerate() {
            if prefix_mask & !g.adjacency_mask(c) == 0 && best.map_or(true, |(bc, _)| c < bc) {
                best = Some((c, i));
            }
            prefix_mask |= 1 << c;
        }
        let (_, idx) = best.expect("nonempty reduced word has a front-movable letter");
        out.push(letters.remove(idx));
    }
    *letters = out;
}

/// Canonical form of the element represented by `w`.
pub fn reduce(g: &DefiningGraph, w: &[Gen]) -> NormalForm {
    check_letters(g, w);
    let mut letters = Vec::with_capacity(w.len());
    for &s in w {
        insert_right(g, &mut letters, s);
    }
    canonicalize(g, &mut letters);
    NormalForm { letters }
}

/// Canonical form of `x * y`.
pub fn multiply(g: &DefiningGraph, x: &NormalForm, y: &[Gen]) -> NormalForm {
    check_letters(g, y);
    let mut letters = x.letters.clone();
    for &s in y {
        insert_right(g, &mut letters, s);
    }
    canonicalize(g, &mut letters);
    NormalForm { letters }
}

/// A wall: the reflection that fixes it, together with its type (the unique
/// generator conjugate to the reflection).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Wall {
    reflection: NormalForm,
    wall_type: Gen,
}

impl Wall {
    /// The wall crossed by the edge from `prefix` to `prefix * s`: its
    /// reflection is `prefix * s * prefix^-1`.
    pub fn from_conjugator(g: &DefiningGraph, prefix: &[Gen], s: Gen) -> Wall {
        let mut word: Vec<Gen> = prefix.to_vec();
        word.push(s);
        word.extend(prefix.iter().rev());
        Wall {
            reflection: reduce(g, &word),
            wall_type: s,
        }
    }

    /// The wall of type `s` at the identity chamber.
    pub fn base(g: &DefiningGraph, s: Gen) -> Wall {
        Wall::from_conjugator(g, &[], s)
    }

    pub fn reflection(&self) -> &NormalForm {
        &self.reflection
    }

    pub fn wall_type(&self) -> Gen {
        self.wall_type
    }
}

/// The walls crossed by the edges of the path labelled `w` from the identity,
/// in crossing order.  Wall `i` is the reflection `p * w[i] * p^-1` where `p`
/// is the length-`i` prefix.
pub fn wall_sequence(g: &DefiningGraph, w: &[Gen]) -> Vec<Wall> {
    check_letters(g, w);
    (0..w.len())
        .map(|i| Wall::from_conjugator(g, &w[..i], w[i]))
        .collect()
}

/// A path is geodesic exactly when it crosses no wall twice.
pub fn is_geodesic(g: &DefiningGraph, w: &[Gen]) -> bool {
    let walls = wall_sequence(g, w);
    let mut seen = std::collections::HashSet::with_capacity(walls.len());
    walls.iter().all(|wall| seen.insert(wall.reflection.clone()))
}

/// A word visiting every vertex of the complement graph along a closed walk:
/// its support is the whole vertex set, consecutive letters are non-adjacent
/// in the graph (so no power of it can be shortened), and the last letter is
/// non-adjacent to the first.  Built as a depth-first closed walk in the
/// complement, each tree edge traversed twice.
pub fn complement_loop_word(g: &DefiningGraph) -> Result<Word, WordError> {
    if g.vertex_count() < 2 {
        return Err(WordError::DegenerateGraph);
    }
    if is_join(g).is_some() {
        return Err(WordError::GraphIsJoin);
    }
    let n = g.vertex_count();
    let full: u128 = if n == 128 { !0 } else { (1 << n) - 1 };
    let comp_nbrs = |v: Gen| -> Vec<Gen> {
        let mask = !g.adjacency_mask(v) & full & !(1u128 << v);
        (0..n as Gen).filter(|&u| mask & (1 << u) != 0).collect()
    };
    fn dfs(
        comp_nbrs: &dyn Fn(Gen) -> Vec<Gen>,
        u: Gen,
        visited: &mut Vec<bool>,
        walk: &mut Vec<Gen>,
    ) {
        visited[u as usize] = true;
        for v in comp_nbrs(u) {
            if !visited[v as usize] {
                walk.push(v);
                dfs(comp_nbrs, v, visited, walk);
                walk.push(u);
            }
        }
    }
    let mut visited = vec![false; n];
    let mut walk = vec![0 as Gen];
    dfs(&comp_nbrs, 0, &mut visited, &mut walk);
    // The walk closes at the start vertex; drop the final return so the word
    // wraps around instead.
    walk.pop();
    Ok(Word(walk))
}

/// Greedy left-to-right split of a geodesic word into maximal pieces, each
/// supported inside a single four-cycle of the graph.
pub fn piece_decomposition(g: &DefiningGraph, w: &[Gen]) -> Result<Vec<Word>, WordError> {
    check_letters(g, w);
    if !is_geodesic(g, w) {
        return Err(WordError::NotGeodesic);
    }
    let cycle_masks: Vec<u128> = enumerate_four_cycles(g)
        .iter()
        .map(|c| c.vertex_mask())
        .collect();
    let fits = |mask: u128| cycle_masks.iter().any(|&cm| mask & !cm == 0);
    let mut pieces = Vec::new();
    let mut i = 0;
    while i < w.len() {
        let mut mask = 1u128 << w[i];
        if !fits(mask) {
            return Err(WordError::Unpieceable { index: i });
        }
        let mut j = i + 1;
        while j < w.len() && fits(mask | (1 << w[j])) {
            mask |= 1 << w[j];
            j += 1;
        }
        pieces.push(Word(w[i..j].to_vec()));
        i = j;
    }
    Ok(pieces)
}

/// An eventually periodic geodesic ray label: `base * prefix * period^inf`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaySpec {
    base: NormalForm,
    prefix: Word,
    period: Word,
}

impl RaySpec {
    pub fn new(base: NormalForm, prefix: Word, period: Word) -> Result<RaySpec, WordError> {
        if period.is_empty() {
            return Err(WordError::EmptyPeriod);
        }
        Ok(RaySpec {
            base,
            prefix,
            period,
        })
    }

    /// Ray from the identity labelled by powers of `period`.
    pub fn periodic(period: Word) -> Result<RaySpec, WordError> {
        RaySpec::new(NormalForm::identity(), Word::default(), period)
    }

    pub fn base(&self) -> &NormalForm {
        &self.base
    }

    pub fn prefix(&self) -> &Word {
        &self.prefix
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    /// The `i`-th letter (0-based) of `prefix * period^inf`.
    pub fn letter(&self, i: usize) -> Gen {
        if i < self.prefix.len() {
            self.prefix.0[i]
        } else {
            self.period.0[(i - self.prefix.len()) % self.period.len()]
        }
    }

    pub fn label_prefix(&self, len: usize) -> Vec<Gen> {
        (0..len).map(|i| self.letter(i)).collect()
    }

    /// Distinct letters appearing in the label.
    pub fn support_mask(&self) -> u128 {
        self.prefix.support_mask() | self.period.support_mask()
    }

    /// The point at distance `i` along the ray, as a canonical form.  When
    /// the ray is based at the identity, a label that fails to stay reduced
    /// at this depth is reported.
    pub fn point(&self, g: &DefiningGraph, i: usize) -> Result<NormalForm, WordError> {
        let label = self.label_prefix(i);
        let nf = multiply(g, &self.base, &label);
        if self.base.is_empty() && nf.len() != i {
            return Err(WordError::InvalidRay { depth: i });
        }
        Ok(nf)
    }
}

/// Whether the ray runs along the wall: every letter of its label is adjacent
/// in the graph to the wall's type.
pub fn runs_along(g: &DefiningGraph, ray: &RaySpec, wall: &Wall) -> bool {
    let t = wall.wall_type();
    let link = g.adjacency_mask(t);
    ray.support_mask() & !link == 0
}

impl fmt::Display for NormalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}]",
            self.letters
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gamma_d, parse_graph};
    use proptest::prelude::*;

    fn c5() -> DefiningGraph {
        parse_graph(
            "vertices: v1 v2 v3 v4 v5\nedge v1 v2\nedge v2 v3\nedge v3 v4\nedge v4 v5\nedge v5 v1\n",
        )
        .unwrap()
    }

    fn word(g: &DefiningGraph, s: &str) -> Word {
        Word::parse(g, s).unwrap()
    }

    #[test]
    fn reduce_deletes_doubles() {
        let g = c5();
        assert!(reduce(&g, &[0, 0]).is_empty());
    }

    #[test]
    fn reduce_commutes_then_cancels() {
        // In gamma_d(1) with order a0 < a1 < b0 < b1: a1 a0 a1 -> a0.
        let g = gamma_d(1).unwrap();
        let w = word(&g, "a1 a0 a1");
        let nf = reduce(&g, w.letters());
        assert_eq!(nf.render(&g), "a0");
    }

    #[test]
    fn reduce_keeps_irreducible_alternation() {
        let g = c5();
        let w = word(&g, "v1 v3 v1");
        let nf = reduce(&g, w.letters());
        assert_eq!(nf.letters(), w.letters());
    }

    #[test]
    fn multiply_trivials() {
        let g = gamma_d(1).unwrap();
        let id = NormalForm::identity();
        assert_eq!(multiply(&g, &id, &[2]).letters(), &[2]);

        // a0 a1 * a0 = a1 since a0 commutes past a1 and cancels.
        let x = reduce(&g, word(&g, "a0 a1").letters());
        let y = multiply(&g, &x, word(&g, "a0").letters());
        assert_eq!(y.render(&g), "a1");
    }

    #[test]
    fn wall_sequence_of_c5_word() {
        let g = c5();
        let w = word(&g, "v1 v3 v1");
        let walls = wall_sequence(&g, w.letters());
        assert_eq!(walls.len(), 3);
        assert_eq!(walls[0].reflection().render(&g), "v1");
        assert_eq!(walls[1].reflection().render(&g), "v1 v3 v1");
        assert_eq!(walls[2].reflection().render(&g), "v1 v3 v1 v3 v1");
        assert_eq!(walls[0].wall_type(), 0);
        assert_eq!(walls[1].wall_type(), 2);
        assert_eq!(walls[2].wall_type(), 0);
        assert_ne!(walls[0], walls[1]);
        assert_ne!(walls[1], walls[2]);
        assert_ne!(walls[0], walls[2]);
    }

    #[test]
    fn reflections_are_involutions() {
        let g = gamma_d(2).unwrap();
        let w = word(&g, "a0 b0 a2 b1 a1");
        for wall in wall_sequence(&g, w.letters()) {
            let r = wall.reflection();
            let square = multiply(&g, r, &r.to_word().0);
            assert!(square.is_empty(), "reflection squared must be identity");
        }
    }

    #[test]
    fn non_reduced_word_repeats_a_wall() {
        let g = c5();
        let w = word(&g, "v1 v2 v2 v3");
        let walls = wall_sequence(&g, w.letters());
        let mut seen = std::collections::HashSet::new();
        assert!(!walls.iter().all(|x| seen.insert(x.reflection().clone())));
        assert!(!is_geodesic(&g, w.letters()));
    }

    #[test]
    fn geodesic_trivials() {
        let g = c5();
        assert!(!is_geodesic(&g, &[3, 3]));
        assert!(is_geodesic(&g, &[0, 1]));
        assert!(is_geodesic(&g, &[]));
    }

    #[test]
    fn complement_loop_word_properties() {
        for g in [c5(), gamma_d(2).unwrap(), gamma_d(3).unwrap()] {
            let w = complement_loop_word(&g).unwrap();
            let n = g.vertex_count();
            let full: u128 = (1 << n) - 1;
            assert_eq!(w.support_mask(), full, "support must be all vertices");
            for k in 0..w.len() {
                let a = w.0[k];
                let b = w.0[(k + 1) % w.len()];
                assert_ne!(a, b, "stationary step");
                assert!(!g.has_edge(a, b), "consecutive letters must not commute");
            }
            // Powers stay geodesic.
            for p in 1..=4 {
                let mut pw = Vec::new();
                for _ in 0..p {
                    pw.extend_from_slice(w.letters());
                }
                assert!(is_geodesic(&g, &pw), "w^{p} must be geodesic");
            }
        }
    }

    #[test]
    fn complement_loop_word_rejects_joins() {
        assert_eq!(
            complement_loop_word(&gamma_d(1).unwrap()),
            Err(WordError::GraphIsJoin)
        );
    }

    #[test]
    fn pieces_in_gamma2() {
        let g = gamma_d(2).unwrap();
        let one = piece_decomposition(&g, word(&g, "a0 a1").letters()).unwrap();
        assert_eq!(one.len(), 1);

        let two = piece_decomposition(&g, word(&g, "a2 b2").letters()).unwrap();
        assert_eq!(two.len(), 2);
    }

    #[test]
    fn pieces_unavailable_without_four_cycles() {
        let g = c5();
        assert_eq!(
            piece_decomposition(&g, &[0, 2]),
            Err(WordError::Unpieceable { index: 0 })
        );
    }

    #[test]
    fn pieces_require_geodesic_input() {
        let g = gamma_d(2).unwrap();
        assert_eq!(
            piece_decomposition(&g, &[0, 0]),
            Err(WordError::NotGeodesic)
        );
    }

    #[test]
    fn ray_points() {
        let g = gamma_d(1).unwrap();
        let ray = RaySpec::periodic(word(&g, "a0 b0")).unwrap();
        assert!(ray.point(&g, 0).unwrap().is_empty());
        assert_eq!(ray.point(&g, 3).unwrap().len(), 3);

        let bad = RaySpec::periodic(word(&g, "a0 a0")).unwrap();
        assert_eq!(bad.point(&g, 2), Err(WordError::InvalidRay { depth: 2 }));

        assert_eq!(
            RaySpec::periodic(Word::default()),
            Err(WordError::EmptyPeriod)
        );
    }

    #[test]
    fn complement_tour_ray_stays_reduced_on_c5() {
        let g = c5();
        let w = complement_loop_word(&g).unwrap();
        let ray = RaySpec::periodic(w).unwrap();
        for i in 0..=20 {
            assert_eq!(ray.point(&g, i).unwrap().len(), i);
        }
    }

    #[test]
    fn runs_along_examples() {
        // In gamma_d(1): the ray a1 b1 a1 ... runs along the wall of type a0.
        let g1 = gamma_d(1).unwrap();
        let ray = RaySpec::periodic(word(&g1, "a1 b1")).unwrap();
        let wall = Wall::base(&g1, g1.vertex_index("a0").unwrap());
        assert!(runs_along(&g1, &ray, &wall));

        // A ray containing the wall's own type does not run along it.
        let ray2 = RaySpec::periodic(word(&g1, "a0 b0")).unwrap();
        assert!(!runs_along(&g1, &ray2, &wall));

        // In gamma_d(d+2), the ray (b_d a_d)^inf runs along the wall of type
        // b_{d+1}.
        for d in 1..=3u32 {
            let g = gamma_d(d + 2).unwrap();
            let ray = RaySpec::periodic(word(&g, &format!("b{d} a{d}"))).unwrap();
            let wall = Wall::base(&g, g.vertex_index(&format!("b{}", d + 1)).unwrap());
            assert!(runs_along(&g, &ray, &wall), "d = {d}");
        }
    }

    fn commutes_fn(g: &DefiningGraph) -> impl Fn(u8, u8) -> bool + '_ {
        move |a, b| g.commutes(a, b)
    }

    proptest! {
        #[test]
        fn reduce_matches_closure_oracle(letters in proptest::collection::vec(0u8..6, 0..8)) {
            let g = gamma_d(2).unwrap();
            let nf = reduce(&g, &letters);
            let oracle = racg_testkit::canonical_form(&letters, &commutes_fn(&g));
            prop_assert_eq!(nf.letters(), &oracle[..]);
        }

        #[test]
        fn reduce_is_idempotent_and_parity_preserving(letters in proptest::collection::vec(0u8..5, 0..10)) {
            let g = c5();
            let nf = reduce(&g, &letters);
            let again = reduce(&g, nf.letters());
            prop_assert_eq!(&again, &nf);
            prop_assert_eq!(nf.len() % 2, letters.len() % 2);
        }

        #[test]
        fn multiply_agrees_with_reduce_of_concatenation(
            a in proptest::collection::vec(0u8..5, 0..6),
            b in proptest::collection::vec(0u8..5, 0..6),
        ) {
            let g = c5();
            let via_multiply = multiply(&g, &reduce(&g, &a), &b);
            let mut cat = a.clone();
            cat.extend_from_slice(&b);
            prop_assert_eq!(via_multiply, reduce(&g, &cat));
        }

        #[test]
        fn geodesic_iff_reduced_length(letters in proptest::collection::vec(0u8..6, 0..8)) {
            let g = gamma_d(2).unwrap();
            let nf = reduce(&g, &letters);
            prop_assert_eq!(is_geodesic(&g, &letters), nf.len() == letters.len());
        }
    }
}
