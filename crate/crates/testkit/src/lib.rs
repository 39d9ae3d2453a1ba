//! Brute-force oracles for the test suites.
//!
//! Everything in this crate is deliberately independent of the main library:
//! the oracles work on raw letter sequences and adjacency predicates so that
//! the implementations they check cannot leak in.

use std::collections::{BTreeSet, HashSet, VecDeque};

/// Enumerates the commutation class of `word` (closure under swapping
/// adjacent commuting letters).
pub fn commutation_class(word: &[u8], commutes: &dyn Fn(u8, u8) -> bool) -> Vec<Vec<u8>> {
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut queue: VecDeque<Vec<u8>> = VecDeque::new();
    seen.insert(word.to_vec());
    queue.push_back(word.to_vec());
    while let Some(w) = queue.pop_front() {
        for i in 0..w.len().saturating_sub(1) {
            if w[i] != w[i + 1] && commutes(w[i], w[i + 1]) {
                let mut v = w.clone();
                v.swap(i, i + 1);
                if seen.insert(v.clone()) {
                    queue.push_back(v);
                }
            }
        }
    }
    let mut out: Vec<Vec<u8>> = seen.into_iter().collect();
    out.sort();
    out
}

/// Canonical form of the group element represented by `word`, computed purely
/// by closure under the two rewriting moves: delete an adjacent equal pair,
/// swap an adjacent commuting pair.  Returns the lexicographically least word
/// of minimal length reachable this way.
pub fn canonical_form(word: &[u8], commutes: &dyn Fn(u8, u8) -> bool) -> Vec<u8> {
    let mut current = word.to_vec();
    loop {
        let class = commutation_class(&current, commutes);
        let mut shortened = None;
        'outer: for w in &class {
            for i in 0..w.len().saturating_sub(1) {
                if w[i] == w[i + 1] {
                    let mut v = w.clone();
                    v.drain(i..i + 2);
                    shortened = Some(v);
                    break 'outer;
                }
            }
        }
        match shortened {
            Some(v) => current = v,
            // No deletion applies anywhere in the class: every member is
            // reduced, and the class is the full set of reduced words.
            None => return class.into_iter().next().unwrap_or_default(),
        }
    }
}

/// Word length of the element represented by `word`, via `canonical_form`.
pub fn reduced_length(word: &[u8], commutes: &dyn Fn(u8, u8) -> bool) -> usize {
    canonical_form(word, commutes).len()
}

/// Shortest path between lattice points that stays in the closed annulus
/// `r <= |v| <= r + cap` of the taxicab plane.  Plain BFS; the model for the
/// Cayley graph of the product of two infinite dihedral groups.
pub fn grid_avoidant_distance(
    x: (i64, i64),
    y: (i64, i64),
    r: i64,
    cap: i64,
) -> Option<u64> {
    let norm = |p: (i64, i64)| p.0.abs() + p.1.abs();
    let inside = |p: (i64, i64)| norm(p) >= r && norm(p) <= r + cap;
    if !inside(x) || !inside(y) {
        return None;
    }
    if x == y {
        return Some(0);
    }
    let mut dist: std::collections::HashMap<(i64, i64), u64> = std::collections::HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(x, 0);
    queue.push_back(x);
    while let Some(p) = queue.pop_front() {
        let d = dist[&p];
        for q in [
            (p.0 + 1, p.1),
            (p.0 - 1, p.1),
            (p.0, p.1 + 1),
            (p.0, p.1 - 1),
        ] {
            if inside(q) && !dist.contains_key(&q) {
                if q == y {
                    return Some(d + 1);
                }
                dist.insert(q, d + 1);
                queue.push_back(q);
            }
        }
    }
    None
}

/// All embedded four-cycles of a graph, found by scanning ordered 4-tuples of
/// vertices and keeping the canonical representative of each cycle.
pub fn four_cycles_by_tuples(n: u8, is_edge: &dyn Fn(u8, u8) -> bool) -> BTreeSet<[u8; 4]> {
    let mut out = BTreeSet::new();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let quad = [a, b, c, d];
                    let distinct = quad
                        .iter()
                        .collect::<std::collections::HashSet<_>>()
                        .len()
                        == 4;
                    if !distinct {
                        continue;
                    }
                    if is_edge(a, b)
                        && is_edge(b, c)
                        && is_edge(c, d)
                        && is_edge(d, a)
                        && !is_edge(a, c)
                        && !is_edge(b, d)
                    {
                        out.insert(canonical_cycle(quad));
                    }
                }
            }
        }
    }
    out
}

/// Least rotation/reflection of a 4-cycle written as a vertex sequence.
pub fn canonical_cycle(c: [u8; 4]) -> [u8; 4] {
    let mut best = None;
    for start in 0..4 {
        for dir in [1i32, -1] {
            let mut cand = [0u8; 4];
            for k in 0..4 {
                let idx = (start as i32 + dir * k as i32).rem_euclid(4) as usize;
                cand[k] = c[idx];
            }
            if best.map_or(true, |b| cand < b) {
                best = Some(cand);
            }
        }
    }
    best.unwrap()
}

fn component_count(n: usize, edges: &[(usize, usize)], skip_vertex: Option<usize>) -> usize {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        if Some(u) == skip_vertex || Some(v) == skip_vertex {
            continue;
        }
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut seen = vec![false; n];
    if let Some(s) = skip_vertex {
        seen[s] = true;
    }
    let mut comps = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        comps += 1;
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    comps
}

/// Separating vertices found by deleting each vertex in turn and recounting
/// components.
pub fn separating_vertices_by_deletion(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
    if n == 0 {
        return Vec::new();
    }
    let base = component_count(n, edges, None);
    (0..n)
        .filter(|&v| component_count(n, edges, Some(v)) > base)
        .collect()
}

/// Separating edges found by deleting each edge in turn.
pub fn separating_edges_by_deletion(n: usize, edges: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let base = component_count(n, edges, None);
    edges
        .iter()
        .enumerate()
        .filter(|&(i, _)| {
            let rest: Vec<_> = edges
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &e)| e)
                .collect();
            component_count(n, &rest, None) > base
        })
        .map(|(_, &e)| e)
        .collect()
}
