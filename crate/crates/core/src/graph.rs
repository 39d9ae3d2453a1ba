//! Defining graphs: parsing, validation of the standing hypotheses
//! (connected, triangle-free, no separating vertices or edges), join and CFS
//! detection via the four-cycle graph, and the `gamma_d` family generator.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Generator index into the vertex order of a [`DefiningGraph`].
pub type Gen = u8;

/// Hard cap on the number of generators; adjacency is kept in `u128` masks.
pub const MAX_VERTICES: usize = 128;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: unknown vertex `{name}`")]
    UnknownVertex { line: usize, name: String },
    #[error("line {line}: self-loop at `{name}`")]
    SelfLoop { line: usize, name: String },
    #[error("line {line}: duplicate vertex `{name}`")]
    DuplicateVertex { line: usize, name: String },
    #[error("missing `vertices:` line")]
    MissingVertices,
    #[error("line {line}: second `vertices:` line")]
    DuplicateVerticesLine { line: usize },
    #[error("line {line}: invalid vertex name `{name}` (allowed: [A-Za-z0-9_]+)")]
    InvalidName { line: usize, name: String },
    #[error("too many vertices ({got}; limit {MAX_VERTICES})")]
    TooManyVertices { got: usize },
    #[error("degree parameter must be >= {min}, got {got}")]
    DegreeOutOfRange { got: u32, min: u32 },
}

/// A finite simplicial graph with named vertices in a fixed total order.
///
/// The vertex order doubles as the generator order for ShortLex normal forms
/// downstream, so it is part of the graph's identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefiningGraph {
    names: Vec<String>,
    edges: BTreeSet<(Gen, Gen)>,
    adj: Vec<u128>,
    family_degree: Option<u32>,
}

impl DefiningGraph {
    /// Builds a graph from vertex names and index pairs.  Edges are
    /// deduplicated; self-loops are rejected.
    pub fn new(names: Vec<String>, edge_list: &[(Gen, Gen)]) -> Result<Self, GraphError> {
        if names.len() > MAX_VERTICES {
            return Err(GraphError::TooManyVertices { got: names.len() });
        }
        let mut g = DefiningGraph {
            adj: vec![0; names.len()],
            names,
            edges: BTreeSet::new(),
            family_degree: None,
        };
        for &(u, v) in edge_list {
            if u == v {
                return Err(GraphError::SelfLoop {
                    line: 0,
                    name: g.names[u as usize].clone(),
                });
            }
            g.insert_edge(u, v);
        }
        Ok(g)
    }

    fn insert_edge(&mut self, u: Gen, v: Gen) {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        self.edges.insert((a, b));
        self.adj[a as usize] |= 1 << b;
        self.adj[b as usize] |= 1 << a;
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_name(&self, v: Gen) -> &str {
        &self.names[v as usize]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_index(&self, name: &str) -> Option<Gen> {
        self.names.iter().position(|n| n == name).map(|i| i as Gen)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Gen, Gen)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: Gen, v: Gen) -> bool {
        u != v && self.adj[u as usize] & (1 << v) != 0
    }

    /// Generators commute exactly when their vertices are adjacent.
    pub fn commutes(&self, u: Gen, v: Gen) -> bool {
        self.has_edge(u, v)
    }

    /// Adjacency of `v` as a bitmask over vertex indices.
    pub fn adjacency_mask(&self, v: Gen) -> u128 {
        self.adj[v as usize]
    }

    pub fn degree(&self, v: Gen) -> usize {
        self.adj[v as usize].count_ones() as usize
    }

    pub fn neighbors(&self, v: Gen) -> impl Iterator<Item = Gen> + '_ {
        let mask = self.adj[v as usize];
        (0..self.names.len() as Gen).filter(move |&u| mask & (1 << u) != 0)
    }

    /// Degree of the generating family this graph was produced for, when it
    /// came from [`gamma_d`].  Parsed graphs never carry this.
    pub fn family_degree(&self) -> Option<u32> {
        self.family_degree
    }

    /// Renders the graph in the input file format, deterministically.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        out.push_str("vertices:");
        for n in &self.names {
            out.push(' ');
            out.push_str(n);
        }
        out.push('\n');
        for &(u, v) in &self.edges {
            out.push_str(&format!(
                "edge {} {}\n",
                self.names[u as usize], self.names[v as usize]
            ));
        }
        out
    }

    fn name_list(&self, vs: &[Gen]) -> String {
        vs.iter()
            .map(|&v| self.names[v as usize].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses the graph file format: optional `#` comment lines, exactly one
/// `vertices:` line, then `edge <u> <v>` lines.
pub fn parse_graph(text: &str) -> Result<DefiningGraph, GraphError> {
    let mut graph: Option<DefiningGraph> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("vertices:") {
            if graph.is_some() {
                return Err(GraphError::DuplicateVerticesLine { line: line_no });
            }
            let mut names = Vec::new();
            for tok in rest.split_whitespace() {
                if !valid_name(tok) {
                    return Err(GraphError::InvalidName {
                        line: line_no,
                        name: tok.to_string(),
                    });
                }
                if names.iter().any(|n| n == tok) {
                    return Err(GraphError::DuplicateVertex {
                        line: line_no,
                        name: tok.to_string(),
                    });
                }
                names.push(tok.to_string());
            }
            if names.len() > MAX_VERTICES {
                return Err(GraphError::TooManyVertices { got: names.len() });
            }
            graph = Some(DefiningGraph {
                adj: vec![0; names.len()],
                names,
                edges: BTreeSet::new(),
                family_degree: None,
            });
        } else if let Some(rest) = line.strip_prefix("edge ") {
            let g = graph.as_mut().ok_or(GraphError::MissingVertices)?;
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 2 {
                return Err(GraphError::Syntax {
                    line: line_no,
                    msg: format!("expected `edge <u> <v>`, got `{line}`"),
                });
            }
            let u = g
                .vertex_index(toks[0])
                .ok_or_else(|| GraphError::UnknownVertex {
                    line: line_no,
                    name: toks[0].to_string(),
                })?;
            let v = g
                .vertex_index(toks[1])
                .ok_or_else(|| GraphError::UnknownVertex {
                    line: line_no,
                    name: toks[1].to_string(),
                })?;
            if u == v {
                return Err(GraphError::SelfLoop {
                    line: line_no,
                    name: toks[0].to_string(),
                });
            }
            g.insert_edge(u, v);
        } else {
            return Err(GraphError::Syntax {
                line: line_no,
                msg: format!("unrecognised line `{line}`"),
            });
        }
    }
    graph.ok_or(GraphError::MissingVertices)
}

/// Result of checking the standing hypotheses on a defining graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub triangle_free: bool,
    pub connected: bool,
    pub separating_vertices: Vec<Gen>,
    pub separating_edges: Vec<(Gen, Gen)>,
    pub is_valid: bool,
}

impl ValidationReport {
    pub fn render(&self, g: &DefiningGraph) -> String {
        let verts = if self.separating_vertices.is_empty() {
            "(none)".to_string()
        } else {
            g.name_list(&self.separating_vertices)
        };
        let edges = if self.separating_edges.is_empty() {
            "(none)".to_string()
        } else {
            self.separating_edges
                .iter()
                .map(|&(u, v)| format!("{}-{}", g.vertex_name(u), g.vertex_name(v)))
                .collect::<Vec<_>>()
                .join(" ")
        };
        format!(
            "triangle-free: {}\nconnected: {}\nseparating-vertices: {}\nseparating-edges: {}\nvalid: {}\n",
            self.triangle_free, self.connected, verts, edges, self.is_valid
        )
    }
}

/// Checks the hypotheses: triangle-free, connected, and 2-edge/2-vertex
/// connectivity via articulation-point and bridge search.  Graphs on fewer
/// than four vertices are reported invalid (the smallest graph meeting all
/// hypotheses is the four-cycle).
pub fn validate(g: &DefiningGraph) -> ValidationReport {
    let n = g.vertex_count();
    let triangle_free = g
        .edges()
        .all(|(u, v)| g.adjacency_mask(u) & g.adjacency_mask(v) == 0);
    let connected = is_connected(g);
    let (separating_vertices, separating_edges) = cut_search(g);
    let is_valid = triangle_free
        && connected
        && separating_vertices.is_empty()
        && separating_edges.is_empty()
        && n >= 4;
    ValidationReport {
        triangle_free,
        connected,
        separating_vertices,
        separating_edges,
        is_valid,
    }
}

fn is_connected(g: &DefiningGraph) -> bool {
    let n = g.vertex_count();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0 as Gen];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for v in g.neighbors(u) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

/// Articulation points and bridges in one DFS (low-link).
fn cut_search(g: &DefiningGraph) -> (Vec<Gen>, Vec<(Gen, Gen)>) {
    struct State<'a> {
        g: &'a DefiningGraph,
        disc: Vec<Option<u32>>,
        low: Vec<u32>,
        time: u32,
        cut_vertices: BTreeSet<Gen>,
        bridges: BTreeSet<(Gen, Gen)>,
    }
    fn dfs(st: &mut State, u: Gen, parent: Option<Gen>) {
        st.time += 1;
        st.disc[u as usize] = Some(st.time);
        st.low[u as usize] = st.time;
        let mut children = 0;
        let mut skipped_parent_edge = false;
        for v in st.g.neighbors(u).collect::<Vec<_>>() {
            if Some(v) == parent && !skipped_parent_edge {
                // A simplicial graph has at most one edge to the parent.
                skipped_parent_edge = true;
                continue;
            }
            match st.disc[v as usize] {
                None => {
                    children += 1;
                    dfs(st, v, Some(u));
                    st.low[u as usize] = st.low[u as usize].min(st.low[v as usize]);
                    if st.low[v as usize] > st.disc[u as usize].unwrap() {
                        st.bridges.insert(if u < v { (u, v) } else { (v, u) });
                    }
                    if parent.is_some() && st.low[v as usize] >= st.disc[u as usize].unwrap() {
                        st.cut_vertices.insert(u);
                    }
                }
                Some(dv) => {
                    st.low[u as usize] = st.low[u as usize].min(dv);
                }
            }
        }
        if parent.is_none() && children > 1 {
            st.cut_vertices.insert(u);
        }
    }

    let n = g.vertex_count();
    let mut st = State {
        g,
        disc: vec![None; n],
        low: vec![0; n],
        time: 0,
        cut_vertices: BTreeSet::new(),
        bridges: BTreeSet::new(),
    };
    for s in 0..n as Gen {
        if st.disc[s as usize].is_none() {
            dfs(&mut st, s, None);
        }
    }
    (
        st.cut_vertices.into_iter().collect(),
        st.bridges.into_iter().collect(),
    )
}

/// The two sides of a join decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JoinParts {
    pub left: Vec<Gen>,
    pub right: Vec<Gen>,
}

/// A graph is a join exactly when its complement is disconnected; the parts
/// are then the complement's component groups (first component vs. the rest),
/// and every cross pair is an edge.
pub fn is_join(g: &DefiningGraph) -> Option<JoinParts> {
    let n = g.vertex_count();
    if n < 2 {
        return None;
    }
    let full: u128 = if n == 128 { !0 } else { (1 << n) - 1 };
    let mut seen: u128 = 1;
    let mut stack = vec![0 as Gen];
    while let Some(u) = stack.pop() {
        let comp_nbrs = !g.adjacency_mask(u) & full & !(1 << u);
        let fresh = comp_nbrs & !seen;
        seen |= fresh;
        for v in 0..n as Gen {
            if fresh & (1 << v) != 0 {
                stack.push(v);
            }
        }
    }
    if seen == full {
        return None;
    }
    let left: Vec<Gen> = (0..n as Gen).filter(|&v| seen & (1 << v) != 0).collect();
    let right: Vec<Gen> = (0..n as Gen).filter(|&v| seen & (1 << v) == 0).collect();
    Some(JoinParts { left, right })
}

/// An embedded four-cycle in canonical form: the lexicographically least
/// rotation/reflection of its cyclic vertex sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FourCycle {
    pub vertices: [Gen; 4],
}

impl FourCycle {
    fn canonical(seq: [Gen; 4]) -> FourCycle {
        let mut best: Option<[Gen; 4]> = None;
        for start in 0..4usize {
            for dir in [1i32, -1] {
                let mut cand = [0; 4];
                for (k, slot) in cand.iter_mut().enumerate() {
                    let idx = (start as i32 + dir * k as i32).rem_euclid(4) as usize;
                    *slot = seq[idx];
                }
                if best.map_or(true, |b| cand < b) {
                    best = Some(cand);
                }
            }
        }
        FourCycle {
            vertices: best.unwrap(),
        }
    }

    /// The four edges of the cycle, endpoints sorted.
    pub fn edge_set(&self) -> [(Gen, Gen); 4] {
        let v = self.vertices;
        let mk = |a: Gen, b: Gen| if a < b { (a, b) } else { (b, a) };
        [
            mk(v[0], v[1]),
            mk(v[1], v[2]),
            mk(v[2], v[3]),
            mk(v[3], v[0]),
        ]
    }

    /// The three-vertex corner paths (x, y, z) with y the middle vertex,
    /// normalised so x < z.
    pub fn corners(&self) -> [(Gen, Gen, Gen); 4] {
        let v = self.vertices;
        let mk = |x: Gen, y: Gen, z: Gen| if x < z { (x, y, z) } else { (z, y, x) };
        [
            mk(v[3], v[0], v[1]),
            mk(v[0], v[1], v[2]),
            mk(v[1], v[2], v[3]),
            mk(v[2], v[3], v[0]),
        ]
    }

    pub fn vertex_mask(&self) -> u128 {
        self.vertices.iter().fold(0, |m, &v| m | (1 << v))
    }

    pub fn render(&self, g: &DefiningGraph) -> String {
        self.vertices
            .iter()
            .map(|&v| g.vertex_name(v))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Every embedded four-cycle exactly once, in canonical form, sorted.
/// Purely combinatorial: accepts any graph.
pub fn enumerate_four_cycles(g: &DefiningGraph) -> Vec<FourCycle> {
    let n = g.vertex_count() as Gen;
    let mut out = BTreeSet::new();
    // For each 4-subset a<b<c<d there are three pairings into opposite
    // vertices; check each as an embedded cycle.
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                for d in (c + 1)..n {
                    for (p, q, r, s) in [(a, b, c, d), (a, c, b, d), (a, b, d, c)] {
                        // Cycle p-q-r-s with diagonals (p,r), (q,s).
                        if g.has_edge(p, q)
                            && g.has_edge(q, r)
                            && g.has_edge(r, s)
                            && g.has_edge(s, p)
                            && !g.has_edge(p, r)
                            && !g.has_edge(q, s)
                        {
                            out.insert(FourCycle::canonical([p, q, r, s]));
                        }
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

/// The four-cycle graph: nodes are embedded four-cycles, two nodes linked
/// when the cycles share a pair of adjacent edges, components by union-find,
/// supports as vertex sets per component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourCycleGraph {
    pub nodes: Vec<FourCycle>,
    pub links: BTreeSet<(usize, usize)>,
    /// Node indices per component, each sorted; components ordered by their
    /// least node.
    pub components: Vec<Vec<usize>>,
    /// Union of member vertex sets, parallel to `components`, sorted.
    pub supports: Vec<Vec<Gen>>,
}

pub fn four_cycle_graph(g: &DefiningGraph) -> FourCycleGraph {
    let nodes = enumerate_four_cycles(g);
    let mut links = BTreeSet::new();
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            if share_adjacent_edge_pair(&nodes[i], &nodes[j]) {
                links.insert((i, j));
            }
        }
    }
    let mut parent: Vec<usize> = (0..nodes.len()).collect();
    fn find(parent: &mut Vec<usize>, x: usize) -> usize {
        if parent[x] != x {
            let root = find(parent, parent[x]);
            parent[x] = root;
        }
        parent[x]
    }
    for &(i, j) in &links {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[rj.max(ri)] = rj.min(ri);
        }
    }
    let mut comp_map: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..nodes.len() {
        let root = find(&mut parent, i);
        comp_map.entry(root).or_default().push(i);
    }
    let components: Vec<Vec<usize>> = comp_map.into_values().collect();
    let supports = components
        .iter()
        .map(|comp| {
            let mask = comp
                .iter()
                .fold(0u128, |m, &i| m | nodes[i].vertex_mask());
            (0..g.vertex_count() as Gen)
                .filter(|&v| mask & (1 << v) != 0)
                .collect()
        })
        .collect();
    FourCycleGraph {
        nodes,
        links,
        components,
        supports,
    }
}

/// Two four-cycles are linked when they share two edges meeting at a common
/// vertex, i.e. a common corner path.
fn share_adjacent_edge_pair(a: &FourCycle, b: &FourCycle) -> bool {
    if a == b {
        return false;
    }
    let bc = b.corners();
    a.corners().iter().any(|c| bc.contains(c))
}

/// A component of the four-cycle graph whose support is the whole vertex set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CfsWitness {
    pub component: Vec<FourCycle>,
    pub support: Vec<Gen>,
}

/// CFS detection: returns the first full-support component of the four-cycle
/// graph, if any.
pub fn is_cfs(g: &DefiningGraph) -> Option<CfsWitness> {
    let fcg = four_cycle_graph(g);
    let n = g.vertex_count();
    for (comp, support) in fcg.components.iter().zip(&fcg.supports) {
        if support.len() == n && n > 0 {
            return Some(CfsWitness {
                component: comp.iter().map(|&i| fcg.nodes[i]).collect(),
                support: support.clone(),
            });
        }
    }
    None
}

/// The family of graphs with divergence polynomial of degree `d`: vertices
/// `a0..ad, b0..bd`; the base four-cycle `a0-a1-b0-b1` plus, for each
/// `2 <= i <= d`, the edges `{a0,ai}, {b0,ai}, {b(i-1),bi}, {a(i-1),bi}`.
pub fn gamma_d(d: u32) -> Result<DefiningGraph, GraphError> {
    if d < 1 {
        return Err(GraphError::DegreeOutOfRange { got: d, min: 1 });
    }
    let names: Vec<String> = (0..=d)
        .map(|i| format!("a{i}"))
        .chain((0..=d).map(|i| format!("b{i}")))
        .collect();
    let a = |i: u32| i as Gen;
    let b = |i: u32| (d + 1 + i) as Gen;
    let mut edges = vec![(a(0), a(1)), (a(1), b(0)), (b(0), b(1)), (b(1), a(0))];
    for i in 2..=d {
        edges.push((a(0), a(i)));
        edges.push((b(0), a(i)));
        edges.push((b(i - 1), b(i)));
        edges.push((a(i - 1), b(i)));
    }
    let mut g = DefiningGraph::new(names, &edges)?;
    g.family_degree = Some(d);
    Ok(g)
}

impl fmt::Display for DefiningGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_file_string())
    }
}
