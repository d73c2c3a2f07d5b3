//! Fractional multigraphs: undirected, loopless, parallel edges allowed,
//! edge weights positive rationals.
//!
//! Graphs with all weights equal to one play the role of ordinary
//! multigraphs; operations that need integrality (`expand`, `contract`,
//! `line_graph`, edge coloring) state so and reject other inputs. Edge
//! identity is positional: edge ids are stable indices `0..m`, so sums and
//! generators are deterministic and reproducible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num::{BigInt, One, Signed, Zero};

use crate::util::{fmt_rat_slash, lcm_big, parse_rat, Rat};
use crate::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

/// One weighted edge; `id` equals its position in the edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub u: VertexId,
    pub v: VertexId,
    pub weight: Rat,
}

impl Edge {
    pub fn endpoints(&self) -> (VertexId, VertexId) {
        (self.u, self.v)
    }

    pub fn touches(&self, w: VertexId) -> bool {
        self.u == w || self.v == w
    }

    pub fn other(&self, w: VertexId) -> VertexId {
        if self.u == w {
            self.v
        } else {
            self.u
        }
    }
}

/// Multigraph with positive rational edge weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalGraph {
    vertices: Vec<VertexId>,
    edges: Vec<Edge>,
}

impl FractionalGraph {
    /// Builds a graph, checking the invariants: no self-loops, strictly
    /// positive weights, endpoints drawn from the vertex list.
    pub fn new(
        vertices: Vec<VertexId>,
        edges: Vec<(VertexId, VertexId, Rat)>,
    ) -> Result<FractionalGraph> {
        let vset: BTreeSet<VertexId> = vertices.iter().copied().collect();
        if vset.len() != vertices.len() {
            return Err(Error::InvalidArgument("duplicate vertex identifiers".into()));
        }
        let mut out = Vec::with_capacity(edges.len());
        for (id, (u, v, w)) in edges.into_iter().enumerate() {
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at vertex {u}")));
            }
            if !vset.contains(&u) || !vset.contains(&v) {
                return Err(Error::InvalidArgument(format!(
                    "edge {u}-{v} references a missing vertex"
                )));
            }
            if !w.is_positive() {
                return Err(Error::InvalidArgument(format!(
                    "edge {u}-{v} has non-positive weight"
                )));
            }
            out.push(Edge { id, u, v, weight: w });
        }
        Ok(FractionalGraph { vertices, edges: out })
    }

    /// Graph with all edge weights one.
    pub fn unweighted(vertices: Vec<VertexId>, edges: Vec<(VertexId, VertexId)>) -> Result<Self> {
        FractionalGraph::new(
            vertices,
            edges.into_iter().map(|(u, v)| (u, v, Rat::one())).collect(),
        )
    }

    pub fn empty(vertices: Vec<VertexId>) -> Result<Self> {
        FractionalGraph::new(vertices, Vec::new())
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Incident edge ids of `v` in ascending order.
    pub fn incident(&self, v: VertexId) -> Vec<EdgeId> {
        self.edges.iter().filter(|e| e.touches(v)).map(|e| e.id).collect()
    }

    /// Degree counting parallel edges (not weights).
    pub fn degree(&self, v: VertexId) -> usize {
        self.edges.iter().filter(|e| e.touches(v)).count()
    }

    pub fn max_degree(&self) -> usize {
        self.vertices.iter().map(|&v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn has_integer_weights(&self) -> bool {
        self.edges.iter().all(|e| e.weight.denom().is_one())
    }

    pub fn is_expanded(&self) -> bool {
        self.edges.iter().all(|e| e.weight.is_one())
    }

    /// Total weight between an unordered vertex pair.
    pub fn pair_weight(&self, u: VertexId, v: VertexId) -> Rat {
        self.edges
            .iter()
            .filter(|e| (e.u == u && e.v == v) || (e.u == v && e.v == u))
            .map(|e| e.weight.clone())
            .fold(Rat::zero(), |a, b| a + b)
    }

    /// Disjoint-copy sum: vertex union, edge multiset union. Edge ids of
    /// `other` are re-labeled after ours.
    pub fn sum(&self, other: &FractionalGraph) -> FractionalGraph {
        let mut vertices = self.vertices.clone();
        for &v in &other.vertices {
            if !vertices.contains(&v) {
                vertices.push(v);
            }
        }
        let mut edges = self.edges.clone();
        for e in &other.edges {
            let id = edges.len();
            edges.push(Edge { id, u: e.u, v: e.v, weight: e.weight.clone() });
        }
        FractionalGraph { vertices, edges }
    }

    /// `k`-fold sum of disjoint copies of `self`.
    pub fn repeat(&self, k: usize) -> FractionalGraph {
        let mut g = self.clone();
        for _ in 1..k {
            g = g.sum(self);
        }
        g
    }

    /// Multiplies every edge weight by a positive rational.
    pub fn scale(&self, a: &Rat) -> Result<FractionalGraph> {
        if !a.is_positive() {
            return Err(Error::InvalidArgument("scale factor must be positive".into()));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge { id: e.id, u: e.u, v: e.v, weight: &e.weight * a })
            .collect();
        Ok(FractionalGraph { vertices: self.vertices.clone(), edges })
    }

    /// Least positive integer `d` such that all weights of `d·G` are integers.
    pub fn common_denominator(&self) -> BigInt {
        self.edges
            .iter()
            .fold(BigInt::one(), |acc, e| lcm_big(&acc, e.weight.denom()))
    }

    /// Replaces every integer-weight edge by that many parallel unit edges.
    /// Expanded edges keep the source order: edge `i` expands before edge
    /// `i+1`.
    pub fn expand(&self) -> Result<FractionalGraph> {
        if !self.has_integer_weights() {
            return Err(Error::InvalidArgument(
                "expand requires integer edge weights; scale by the common denominator first"
                    .into(),
            ));
        }
        let mut edges = Vec::new();
        for e in &self.edges {
            let copies = e.weight.to_integer();
            let mut c = BigInt::zero();
            while c < copies {
                let id = edges.len();
                edges.push(Edge { id, u: e.u, v: e.v, weight: Rat::one() });
                c += 1;
            }
        }
        Ok(FractionalGraph { vertices: self.vertices.clone(), edges })
    }

    /// Scales by the common denominator and expands to unit parallel edges.
    pub fn integerized(&self) -> FractionalGraph {
        let d = Rat::from_integer(self.common_denominator());
        self.scale(&d).expect("denominator is positive").expand().expect("weights integral")
    }

    /// Contracts the vertex set `u_set` to a single fresh vertex, keeping all
    /// edges leaving the set. Also returns `a(U)`, the number of edges
    /// incident with the set (internal edges counted once), which governs the
    /// circuit cost of the contraction. The fresh vertex id is
    /// `max(vertices)+1`.
    pub fn contract(&self, u_set: &BTreeSet<VertexId>) -> Result<(FractionalGraph, usize)> {
        if u_set.is_empty() {
            return Err(Error::InvalidArgument("cannot contract an empty vertex set".into()));
        }
        if !self.is_expanded() {
            return Err(Error::InvalidArgument(
                "contract requires unit edge weights (use expand first)".into(),
            ));
        }
        for &u in u_set {
            if !self.vertices.contains(&u) {
                return Err(Error::InvalidArgument(format!("vertex {u} not in graph")));
            }
        }
        let fresh = self.vertices.iter().copied().max().unwrap_or(0) + 1;
        let a_cost = self.edges.iter().filter(|e| u_set.contains(&e.u) || u_set.contains(&e.v)).count();
        let mut vertices: Vec<VertexId> =
            self.vertices.iter().copied().filter(|v| !u_set.contains(v)).collect();
        vertices.push(fresh);
        let mut edges = Vec::new();
        for e in &self.edges {
            let iu = u_set.contains(&e.u);
            let iv = u_set.contains(&e.v);
            if iu && iv {
                continue; // internal edge disappears
            }
            let (u, v) = if iu { (fresh, e.v) } else if iv { (e.u, fresh) } else { (e.u, e.v) };
            let id = edges.len();
            edges.push(Edge { id, u, v, weight: Rat::one() });
        }
        Ok((FractionalGraph { vertices, edges }, a_cost))
    }

    /// Simple graph on the edge ids of `self`; two ids are adjacent iff the
    /// edges share an endpoint. Parallel edges become adjacent vertices.
    pub fn line_graph(&self) -> Result<FractionalGraph> {
        if !self.is_expanded() {
            return Err(Error::InvalidArgument(
                "line_graph requires unit edge weights (use expand first)".into(),
            ));
        }
        let vertices: Vec<VertexId> = self.edges.iter().map(|e| e.id).collect();
        let mut edges = Vec::new();
        for i in 0..self.edges.len() {
            for j in i + 1..self.edges.len() {
                let (a, b) = (&self.edges[i], &self.edges[j]);
                if a.touches(b.u) || a.touches(b.v) {
                    edges.push((i, j));
                }
            }
        }
        FractionalGraph::unweighted(vertices, edges)
    }

    /// Simple-graph adjacency sets keyed by vertex (parallel edges collapsed).
    pub fn adjacency(&self) -> BTreeMap<VertexId, BTreeSet<VertexId>> {
        let mut adj: BTreeMap<VertexId, BTreeSet<VertexId>> =
            self.vertices.iter().map(|&v| (v, BTreeSet::new())).collect();
        for e in &self.edges {
            adj.get_mut(&e.u).unwrap().insert(e.v);
            adj.get_mut(&e.v).unwrap().insert(e.u);
        }
        adj
    }
}

/// Witness bijections for a graph isomorphism.
#[derive(Debug, Clone)]
pub struct GraphIsomorphism {
    pub vertex_map: BTreeMap<VertexId, VertexId>,
    pub edge_map: BTreeMap<EdgeId, EdgeId>,
}

impl GraphIsomorphism {
    /// Exhaustively checks that the edge bijection carries `I_G(v)` onto
    /// `I_H(φ(v))` for every vertex.
    pub fn check(&self, g: &FractionalGraph, h: &FractionalGraph) -> bool {
        if self.vertex_map.len() != g.num_vertices() || self.edge_map.len() != g.num_edges() {
            return false;
        }
        for &v in g.vertices() {
            let Some(&fv) = self.vertex_map.get(&v) else { return false };
            let image: BTreeSet<EdgeId> = g
                .incident(v)
                .iter()
                .filter_map(|e| self.edge_map.get(e).copied())
                .collect();
            let target: BTreeSet<EdgeId> = h.incident(fv).into_iter().collect();
            if image != target {
                return false;
            }
        }
        for e in g.edges() {
            let Some(&fe) = self.edge_map.get(&e.id) else { return false };
            let f = &h.edges()[fe];
            if f.weight != e.weight {
                return false;
            }
        }
        true
    }
}

/// Maximum vertex count accepted by the exact isomorphism search.
pub const ISOMORPHISM_VERTEX_LIMIT: usize = 10;

/// Exact isomorphism search by backtracking over vertex maps with
/// degree-sequence pruning. Intended for small graphs; inputs above
/// [`ISOMORPHISM_VERTEX_LIMIT`] vertices are rejected rather than
/// approximated.
pub fn find_isomorphism(
    g: &FractionalGraph,
    h: &FractionalGraph,
) -> Result<Option<GraphIsomorphism>> {
    let n = g.num_vertices();
    if n > ISOMORPHISM_VERTEX_LIMIT || h.num_vertices() > ISOMORPHISM_VERTEX_LIMIT {
        return Err(Error::SizeLimit(format!(
            "isomorphism search limited to {ISOMORPHISM_VERTEX_LIMIT} vertices, got {} and {}",
            n,
            h.num_vertices()
        )));
    }
    if n != h.num_vertices() || g.num_edges() != h.num_edges() {
        return Ok(None);
    }

    // Weighted degree signature per vertex: sorted multiset of (other-end
    // unused, weight) collapsed to a sortable key.
    let signature = |gr: &FractionalGraph, v: VertexId| -> Vec<Rat> {
        let mut ws: Vec<Rat> =
            gr.edges().iter().filter(|e| e.touches(v)).map(|e| e.weight.clone()).collect();
        ws.sort();
        ws
    };
    let gsig: Vec<(VertexId, Vec<Rat>)> =
        g.vertices().iter().map(|&v| (v, signature(g, v))).collect();
    let hsig: BTreeMap<VertexId, Vec<Rat>> =
        h.vertices().iter().map(|&v| (v, signature(h, v))).collect();

    {
        let mut a: Vec<&Vec<Rat>> = gsig.iter().map(|(_, s)| s).collect();
        let mut b: Vec<&Vec<Rat>> = hsig.values().collect();
        a.sort();
        b.sort();
        if a != b {
            return Ok(None);
        }
    }

    // Pair-weight tables for O(1) compatibility checks.
    let pair_table = |gr: &FractionalGraph| -> BTreeMap<(VertexId, VertexId), Vec<Rat>> {
        let mut t: BTreeMap<(VertexId, VertexId), Vec<Rat>> = BTreeMap::new();
        for e in gr.edges() {
            let key = (e.u.min(e.v), e.u.max(e.v));
            t.entry(key).or_default().push(e.weight.clone());
        }
        for v in t.values_mut() {
            v.sort();
        }
        t
    };
    let gpairs = pair_table(g);
    let hpairs = pair_table(h);

    fn backtrack(
        i: usize,
        gsig: &[(VertexId, Vec<Rat>)],
        hsig: &BTreeMap<VertexId, Vec<Rat>>,
        gpairs: &BTreeMap<(VertexId, VertexId), Vec<Rat>>,
        hpairs: &BTreeMap<(VertexId, VertexId), Vec<Rat>>,
        map: &mut BTreeMap<VertexId, VertexId>,
        used: &mut BTreeSet<VertexId>,
    ) -> bool {
        if i == gsig.len() {
            return true;
        }
        let (v, sig) = &gsig[i];
        let candidates: Vec<VertexId> = hsig
            .iter()
            .filter(|(w, s)| !used.contains(w) && *s == sig)
            .map(|(&w, _)| w)
            .collect();
        for w in candidates {
            let ok = map.iter().all(|(&gv, &hv)| {
                let gkey = (gv.min(*v), gv.max(*v));
                let hkey = (hv.min(w), hv.max(w));
                gpairs.get(&gkey).unwrap_or(&Vec::new()) == hpairs.get(&hkey).unwrap_or(&Vec::new())
            });
            if !ok {
                continue;
            }
            map.insert(*v, w);
            used.insert(w);
            if backtrack(i + 1, gsig, hsig, gpairs, hpairs, map, used) {
                return true;
            }
            map.remove(v);
            used.remove(&w);
        }
        false
    }

    let mut vertex_map = BTreeMap::new();
    let mut used = BTreeSet::new();
    if !backtrack(0, &gsig, &hsig, &gpairs, &hpairs, &mut vertex_map, &mut used) {
        return Ok(None);
    }

    // Pair up edges between corresponding endpoint pairs in id order,
    // matching weights.
    let mut edge_map = BTreeMap::new();
    let mut taken: BTreeSet<EdgeId> = BTreeSet::new();
    for e in g.edges() {
        let (hu, hv) = (vertex_map[&e.u], vertex_map[&e.v]);
        let target = h.edges().iter().find(|f| {
            !taken.contains(&f.id)
                && f.weight == e.weight
                && ((f.u == hu && f.v == hv) || (f.u == hv && f.v == hu))
        });
        match target {
            Some(f) => {
                taken.insert(f.id);
                edge_map.insert(e.id, f.id);
            }
            None => return Ok(None),
        }
    }
    let iso = GraphIsomorphism { vertex_map, edge_map };
    debug_assert!(iso.check(g, h));
    Ok(Some(iso))
}

// ---------------------------------------------------------------------------
// Named graph families. Canonical vertex labels are 1-based.
// ---------------------------------------------------------------------------

/// Complete graph `K_d` on vertices `1..=d`, edges in lexicographic order.
pub fn clique(d: usize) -> Result<FractionalGraph> {
    if d == 0 {
        return Err(Error::InvalidArgument("clique needs d >= 1".into()));
    }
    let mut edges = Vec::new();
    for i in 1..=d {
        for j in i + 1..=d {
            edges.push((i, j));
        }
    }
    FractionalGraph::unweighted((1..=d).collect(), edges)
}

/// Star on vertices `1..=d` with the given center joined to every other
/// vertex.
pub fn star(d: usize, center: usize) -> Result<FractionalGraph> {
    if d == 0 || center == 0 || center > d {
        return Err(Error::InvalidArgument(format!("star needs 1 <= center <= d, got ({d},{center})")));
    }
    let edges = (1..=d).filter(|&v| v != center).map(|v| (center, v)).collect();
    FractionalGraph::unweighted((1..=d).collect(), edges)
}

/// Perfect matching with `k` edges: `2i-1 — 2i` for `i = 1..=k`.
pub fn matching(k: usize) -> Result<FractionalGraph> {
    if k == 0 {
        return Err(Error::InvalidArgument("matching needs k >= 1".into()));
    }
    let edges = (1..=k).map(|i| (2 * i - 1, 2 * i)).collect();
    FractionalGraph::unweighted((1..=2 * k).collect(), edges)
}

/// Cycle `C_d`; `d = 2` yields a double edge.
pub fn cycle(d: usize) -> Result<FractionalGraph> {
    if d < 2 {
        return Err(Error::InvalidArgument("cycle needs d >= 2".into()));
    }
    let mut edges: Vec<(usize, usize)> = (1..d).map(|i| (i, i + 1)).collect();
    edges.push((d, 1));
    FractionalGraph::unweighted((1..=d).collect(), edges)
}

/// Path with `k` edges on vertices `1..=k+1`.
pub fn path(k: usize) -> Result<FractionalGraph> {
    if k == 0 {
        return Err(Error::InvalidArgument("path needs k >= 1".into()));
    }
    FractionalGraph::unweighted((1..=k + 1).collect(), (1..=k).map(|i| (i, i + 1)).collect())
}

/// Grid with `rows × cols` vertices. Vertex `(i,j)` (1-based) has id
/// `(i-1)*cols + j`; edges are emitted row-major, right edge before down
/// edge, so edge ids sweep the grid one vertex at a time.
pub fn grid(rows: usize, cols: usize) -> Result<FractionalGraph> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("grid needs positive dimensions".into()));
    }
    let vid = |i: usize, j: usize| (i - 1) * cols + j;
    let mut edges = Vec::new();
    for i in 1..=rows {
        for j in 1..=cols {
            if j < cols {
                edges.push((vid(i, j), vid(i, j + 1)));
            }
            if i < rows {
                edges.push((vid(i, j), vid(i + 1, j)));
            }
        }
    }
    FractionalGraph::unweighted((1..=rows * cols).collect(), edges)
}

/// Sum of `k` stars on `d` vertices with centers `1..=k`: a `k`-clique with
/// doubled edges plus `d-k` outer vertices joined to every center.
pub fn cat(k: usize, d: usize) -> Result<FractionalGraph> {
    if k == 0 || k > d {
        return Err(Error::InvalidArgument(format!("cat needs 1 <= k <= d, got ({k},{d})")));
    }
    let mut g = star(d, 1)?;
    for u in 2..=k {
        g = g.sum(&star(d, u)?);
    }
    Ok(g)
}

/// Bipartite incidence graph of the complete `h`-uniform hypergraph on `k`
/// vertices: left side `1..=k`, right side one vertex per `h`-subset in
/// lexicographic order, edges `(v, S)` for `v ∈ S` grouped by subset. For
/// `(h,k) = (3,4)` this is `K_{4,4}` minus a perfect matching, 12 edges.
pub fn hyperclique_incidence(h: usize, k: usize) -> Result<FractionalGraph> {
    if h == 0 || h >= k {
        return Err(Error::InvalidArgument(format!(
            "hyperclique incidence needs 1 <= h < k, got ({h},{k})"
        )));
    }
    let subsets = subsets_lex(k, h);
    let mut vertices: Vec<VertexId> = (1..=k).collect();
    let mut edges = Vec::new();
    for (si, s) in subsets.iter().enumerate() {
        let sv = k + 1 + si;
        vertices.push(sv);
        for &v in s {
            edges.push((v, sv));
        }
    }
    FractionalGraph::unweighted(vertices, edges)
}

/// All `h`-subsets of `1..=k` in lexicographic order.
pub fn subsets_lex(k: usize, h: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, k: usize, h: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == h {
            out.push(cur.clone());
            return;
        }
        for v in start..=k {
            cur.push(v);
            rec(v + 1, k, h, cur, out);
            cur.pop();
        }
    }
    rec(1, k, h, &mut cur, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Edge coloring / matching partitions.
// ---------------------------------------------------------------------------

/// Partitions the edges of an expanded multigraph into matchings, each on the
/// full vertex set; the parts are pairwise edge-disjoint and sum to `g`.
///
/// Bipartite inputs get an exact `Δ(G)`-coloring via alternating-path
/// recoloring; this covers grids (4 matchings) and the hyperclique incidence
/// graph (3 perfect matchings). Other inputs fall back to first-fit greedy
/// followed by merge passes.
pub fn edge_partition_into_matchings(g: &FractionalGraph) -> Result<Vec<FractionalGraph>> {
    if !self_expanded_check(g) {
        return Err(Error::InvalidArgument(
            "edge partition requires unit edge weights (use expand first)".into(),
        ));
    }
    if g.num_edges() == 0 {
        return Ok(Vec::new());
    }
    let colors = if bipartition(g).is_some() {
        konig_edge_coloring(g)
    } else {
        greedy_edge_coloring(g)
    };
    let num_colors = colors.iter().copied().max().unwrap() + 1;
    let mut classes: Vec<Vec<(VertexId, VertexId)>> = vec![Vec::new(); num_colors];
    for e in g.edges() {
        classes[colors[e.id]].push((e.u, e.v));
    }
    // Merge passes: fold a class into an earlier one when no vertex clashes.
    let mut merged: Vec<Vec<(VertexId, VertexId)>> = Vec::new();
    for class in classes {
        let mut placed = false;
        for m in merged.iter_mut() {
            let occupied: BTreeSet<VertexId> =
                m.iter().flat_map(|&(u, v)| [u, v]).collect();
            if class.iter().all(|&(u, v)| !occupied.contains(&u) && !occupied.contains(&v)) {
                m.extend(class.iter().copied());
                placed = true;
                break;
            }
        }
        if !placed {
            merged.push(class);
        }
    }
    merged
        .into_iter()
        .map(|es| FractionalGraph::unweighted(g.vertices().to_vec(), es))
        .collect()
}

fn self_expanded_check(g: &FractionalGraph) -> bool {
    g.is_expanded()
}

/// Two-coloring of the vertices if the graph is bipartite.
fn bipartition(g: &FractionalGraph) -> Option<BTreeMap<VertexId, bool>> {
    let adj = g.adjacency();
    let mut color: BTreeMap<VertexId, bool> = BTreeMap::new();
    for &start in g.vertices() {
        if color.contains_key(&start) {
            continue;
        }
        color.insert(start, false);
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            let cv = color[&v];
            for &w in &adj[&v] {
                match color.get(&w) {
                    None => {
                        color.insert(w, !cv);
                        stack.push(w);
                    }
                    Some(&cw) if cw == cv => return None,
                    _ => {}
                }
            }
        }
    }
    Some(color)
}

/// Exact Δ-edge-coloring of a bipartite multigraph by alternating-path
/// recoloring.
fn konig_edge_coloring(g: &FractionalGraph) -> Vec<usize> {
    let delta = g.max_degree();
    let mut colors: Vec<Option<usize>> = vec![None; g.num_edges()];
    // at[v][c] = edge currently colored c at v, if any
    let mut at: BTreeMap<VertexId, Vec<Option<EdgeId>>> =
        g.vertices().iter().map(|&v| (v, vec![None; delta])).collect();

    for e in g.edges() {
        let a = (0..delta).find(|&c| at[&e.u][c].is_none()).expect("degree bound");
        if at[&e.v][a].is_none() {
            colors[e.id] = Some(a);
            at.get_mut(&e.u).unwrap()[a] = Some(e.id);
            at.get_mut(&e.v).unwrap()[a] = Some(e.id);
            continue;
        }
        let b = (0..delta).find(|&c| at[&e.v][c].is_none()).expect("degree bound");
        // Color a is taken at v and b is taken at u. Flip the a/b alternating
        // path starting at v; bipartiteness keeps it away from u, so a
        // becomes free at v while staying free at u.
        let mut path = Vec::new();
        let mut x = e.v;
        let mut want = a;
        while let Some(f) = at[&x][want] {
            path.push(f);
            x = g.edges()[f].other(x);
            want = if want == a { b } else { a };
        }
        for &f in &path {
            let old = colors[f].unwrap();
            colors[f] = Some(if old == a { b } else { a });
        }
        for &f in &path {
            for w in [g.edges()[f].u, g.edges()[f].v] {
                let slots = at.get_mut(&w).unwrap();
                slots[a] = None;
                slots[b] = None;
            }
        }
        for &f in &path {
            let c = colors[f].unwrap();
            at.get_mut(&g.edges()[f].u).unwrap()[c] = Some(f);
            at.get_mut(&g.edges()[f].v).unwrap()[c] = Some(f);
        }
        debug_assert!(at[&e.u][a].is_none() && at[&e.v][a].is_none());
        colors[e.id] = Some(a);
        at.get_mut(&e.u).unwrap()[a] = Some(e.id);
        at.get_mut(&e.v).unwrap()[a] = Some(e.id);
        debug_assert!(coloring_consistent(g, &colors));
    }
    colors.into_iter().map(|c| c.unwrap()).collect()
}

fn coloring_consistent(g: &FractionalGraph, colors: &[Option<usize>]) -> bool {
    for &v in g.vertices() {
        let mut seen = BTreeSet::new();
        for e in g.edges().iter().filter(|e| e.touches(v)) {
            if let Some(c) = colors[e.id] {
                if !seen.insert(c) {
                    return false;
                }
            }
        }
    }
    true
}

/// First-fit greedy edge coloring; may use more than Δ+1 colors on
/// pathological orders but is always a valid partition.
fn greedy_edge_coloring(g: &FractionalGraph) -> Vec<usize> {
    let mut colors = vec![0usize; g.num_edges()];
    for e in g.edges() {
        let mut used = BTreeSet::new();
        for f in g.edges().iter().filter(|f| f.id < e.id) {
            if f.touches(e.u) || f.touches(e.v) {
                used.insert(colors[f.id]);
            }
        }
        colors[e.id] = (0..).find(|c| !used.contains(c)).unwrap();
    }
    colors
}

// ---------------------------------------------------------------------------
// Text format: `d <numVertices>` header, one `e <u> <v> <num>/<den>` line per
// edge. Vertices are `1..=numVertices`.
// ---------------------------------------------------------------------------

pub fn write_graph(g: &FractionalGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "d {}", g.num_vertices());
    // The format addresses vertices by position in the vertex list.
    let index: BTreeMap<VertexId, usize> =
        g.vertices().iter().enumerate().map(|(i, &v)| (v, i + 1)).collect();
    for e in g.edges() {
        let _ = writeln!(out, "e {} {} {}", index[&e.u], index[&e.v], fmt_rat_slash(&e.weight));
    }
    out
}

pub fn parse_graph(text: &str) -> Result<FractionalGraph> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "d" => {
                if fields.len() != 2 {
                    return Err(Error::Parse(format!("line {}: bad header", lineno + 1)));
                }
                n = Some(
                    fields[1]
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad vertex count", lineno + 1)))?,
                );
            }
            "e" => {
                if fields.len() != 4 {
                    return Err(Error::Parse(format!("line {}: bad edge line", lineno + 1)));
                }
                let u: usize = fields[1]
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad endpoint", lineno + 1)))?;
                let v: usize = fields[2]
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad endpoint", lineno + 1)))?;
                edges.push((u, v, parse_rat(fields[3])?));
            }
            other => {
                return Err(Error::Parse(format!("line {}: unknown record {other:?}", lineno + 1)))
            }
        }
    }
    let n = n.ok_or_else(|| Error::Parse("missing `d <numVertices>` header".into()))?;
    FractionalGraph::new((1..=n).collect(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::rat;

    #[test]
    fn sum_of_two_k4_is_doubled_clique() {
        let k4 = clique(4).unwrap();
        let s = k4.sum(&k4);
        assert_eq!(s.num_vertices(), 4);
        assert_eq!(s.num_edges(), 12);
        for i in 1..=4 {
            for j in i + 1..=4 {
                assert_eq!(s.pair_weight(i, j), rat(2, 1));
            }
        }
    }

    #[test]
    fn star_sum_is_isomorphic_to_doubled_clique() {
        // S_4(1)+S_4(2)+S_4(3)+S_4(4) has two parallel edges on every pair.
        let mut g = star(4, 1).unwrap();
        for u in 2..=4 {
            g = g.sum(&star(4, u).unwrap());
        }
        let twice_k4 = clique(4).unwrap().repeat(2);
        let iso = find_isomorphism(&g, &twice_k4).unwrap();
        assert!(iso.is_some());
        assert!(iso.unwrap().check(&g, &twice_k4));
    }

    #[test]
    fn sum_with_empty_graph_is_identity() {
        let g = cycle(4).unwrap();
        let e = FractionalGraph::empty(g.vertices().to_vec()).unwrap();
        assert_eq!(g.sum(&e), g);
    }

    #[test]
    fn scale_round_trip_and_common_denominator() {
        let g = clique(3).unwrap();
        let half = g.scale(&rat(1, 2)).unwrap();
        assert_eq!(half.scale(&rat(2, 1)).unwrap(), g);
        assert_eq!(g.common_denominator(), BigInt::from(1));
        assert_eq!(half.common_denominator(), BigInt::from(2));
        assert_eq!(clique(4).unwrap().scale(&rat(2, 1)).unwrap().common_denominator(), BigInt::from(1));

        let mixed = FractionalGraph::new(
            vec![1, 2, 3],
            vec![(1, 2, rat(2, 3)), (2, 3, rat(1, 2))],
        )
        .unwrap();
        // lcm(3,2) by hand
        assert_eq!(mixed.common_denominator(), BigInt::from(6));
    }

    #[test]
    fn contract_triangle_pair() {
        // Three edges touch {v1,v2} in K_3.
        let g = clique(3).unwrap();
        let (c, a) = g.contract(&BTreeSet::from([1, 2])).unwrap();
        assert_eq!(a, 3);
        assert_eq!(c.num_vertices(), 2);
        assert_eq!(c.num_edges(), 2); // double edge to the fresh vertex
        assert_eq!(c.pair_weight(3, 4), rat(2, 1));
    }

    #[test]
    fn contract_isolated_vertex() {
        let mut vs = clique(3).unwrap().vertices().to_vec();
        vs.push(9);
        let g = FractionalGraph::unweighted(
            vs,
            clique(3).unwrap().edges().iter().map(|e| (e.u, e.v)).collect(),
        )
        .unwrap();
        let (c, a) = g.contract(&BTreeSet::from([9])).unwrap();
        assert_eq!(a, 0);
        assert_eq!(c.num_edges(), 3);
    }

    #[test]
    fn contract_grid_row() {
        // 2x2 grid, contract one row: path of 2 vertices with 2 parallel
        // edges; 3 edges touch the row.
        let g = grid(2, 2).unwrap();
        let (c, a) = g.contract(&BTreeSet::from([1, 2])).unwrap();
        assert_eq!(a, 3);
        assert_eq!(c.num_vertices(), 3);
        // remaining: two vertical edges to the fresh vertex + bottom edge
        assert_eq!(c.num_edges(), 3);
        assert_eq!(c.pair_weight(3, 5), rat(1, 1));
        assert_eq!(c.pair_weight(4, 5), rat(1, 1));
        assert!(g.contract(&BTreeSet::new()).is_err());
    }

    #[test]
    fn line_graphs_of_small_families() {
        let p2 = path(2).unwrap();
        let l = p2.line_graph().unwrap();
        assert_eq!(l.num_vertices(), 2);
        assert_eq!(l.num_edges(), 1);

        let k3 = clique(3).unwrap();
        let lk3 = k3.line_graph().unwrap();
        assert!(find_isomorphism(&lk3, &k3).unwrap().is_some());

        // L(K_4) is the octahedron: 6 vertices, 4-regular, 12 edges.
        let lk4 = clique(4).unwrap().line_graph().unwrap();
        assert_eq!(lk4.num_vertices(), 6);
        assert_eq!(lk4.num_edges(), 12);
        assert!(lk4.vertices().iter().all(|&v| lk4.degree(v) == 4));
    }

    #[test]
    fn line_graph_vertex_count_is_expanded_edge_count() {
        let g = clique(4).unwrap().repeat(2);
        assert_eq!(g.line_graph().unwrap().num_vertices(), g.num_edges());
    }

    #[test]
    fn isomorphism_negative_and_guard() {
        let p3 = path(3).unwrap();
        let s4 = star(4, 1).unwrap();
        assert!(find_isomorphism(&p3, &s4).unwrap().is_none());
        let big = clique(11).unwrap();
        assert!(matches!(find_isomorphism(&big, &big), Err(Error::SizeLimit(_))));
    }

    #[test]
    fn generator_shapes() {
        let c = cat(2, 4).unwrap();
        assert_eq!(c.pair_weight(1, 2), rat(2, 1));
        for outer in [3, 4] {
            assert_eq!(c.pair_weight(1, outer), rat(1, 1));
            assert_eq!(c.pair_weight(2, outer), rat(1, 1));
        }
        assert_eq!(c.pair_weight(3, 4), rat(0, 1));
        assert!(cat(5, 4).is_err());

        let i34 = hyperclique_incidence(3, 4).unwrap();
        assert_eq!(i34.num_vertices(), 8);
        assert_eq!(i34.num_edges(), 12);
        // K_{4,4} minus a perfect matching: every vertex has degree 3.
        assert!(i34.vertices().iter().all(|&v| i34.degree(v) == 3));

        let g22 = grid(2, 2).unwrap();
        assert!(find_isomorphism(&g22, &cycle(4).unwrap()).unwrap().is_some());
    }

    #[test]
    fn matchings_partition_grid_and_incidence() {
        let g = grid(6, 6).unwrap();
        let parts = edge_partition_into_matchings(&g).unwrap();
        assert_eq!(parts.len(), 4);
        check_partition(&g, &parts);

        let i34 = hyperclique_incidence(3, 4).unwrap();
        let parts = edge_partition_into_matchings(&i34).unwrap();
        assert_eq!(parts.len(), 3);
        assert!(parts.iter().all(|m| m.num_edges() == 4));
        check_partition(&i34, &parts);

        let m3 = matching(3).unwrap();
        assert_eq!(edge_partition_into_matchings(&m3).unwrap().len(), 1);
    }

    fn check_partition(g: &FractionalGraph, parts: &[FractionalGraph]) {
        let mut all: Vec<(VertexId, VertexId)> = Vec::new();
        for m in parts {
            for &v in m.vertices() {
                assert!(m.degree(v) <= 1, "part is not a matching");
            }
            all.extend(m.edges().iter().map(|e| (e.u.min(e.v), e.u.max(e.v))));
        }
        let mut expect: Vec<(VertexId, VertexId)> =
            g.edges().iter().map(|e| (e.u.min(e.v), e.u.max(e.v))).collect();
        all.sort();
        expect.sort();
        assert_eq!(all, expect, "edge multiset union must equal E(g)");
    }

    #[test]
    fn file_format_round_trip() {
        let g = FractionalGraph::new(
            vec![1, 2, 3],
            vec![(1, 2, rat(1, 2)), (2, 3, rat(1, 1)), (1, 2, rat(3, 1))],
        )
        .unwrap();
        let text = write_graph(&g);
        let back = parse_graph(&text).unwrap();
        assert_eq!(g, back);
        assert!(parse_graph("e 1 2 1/1").is_err());
    }

    #[test]
    fn rejects_invalid_graphs() {
        assert!(FractionalGraph::unweighted(vec![1], vec![(1, 1)]).is_err());
        assert!(FractionalGraph::unweighted(vec![1, 2], vec![(1, 3)]).is_err());
        assert!(FractionalGraph::new(vec![1, 2], vec![(1, 2, rat(0, 1))]).is_err());
        assert!(FractionalGraph::new(vec![1, 1], vec![]).is_err());
    }

    #[test]
    fn expansion_requires_integrality() {
        let g = clique(3).unwrap().scale(&rat(1, 2)).unwrap();
        assert!(g.expand().is_err());
        let gi = g.integerized();
        assert!(gi.is_expanded());
        assert_eq!(gi.num_edges(), 3);
        let doubled = clique(3).unwrap().scale(&rat(2, 1)).unwrap();
        assert_eq!(doubled.expand().unwrap().num_edges(), 6);
    }
}
