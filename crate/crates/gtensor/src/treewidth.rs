//! Exact treewidth for small graphs, elimination-order bounds for larger
//! ones, and line-treewidth.
//!
//! The exact solver is a dynamic program over vertex subsets: the treewidth
//! equals the minimum over elimination orderings of the maximum forward
//! degree, and the DP state is the set of already-eliminated vertices. Ties
//! break toward the lexicographically least subset so results are
//! deterministic. Widths use the max-bag-minus-one convention, so the graph
//! with no vertices has width -1.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::graphs::{FractionalGraph, VertexId};
use crate::{Error, Result};

/// Largest vertex count accepted by [`exact_treewidth`] (the DP keeps a byte
/// per subset). Covers line graphs of cliques up to `K_7` (21 vertices).
pub const EXACT_TW_VERTEX_LIMIT: usize = 22;

/// Tree plus bag map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    pub bags: Vec<BTreeSet<VertexId>>,
    /// Undirected edges between bag indices; a tree, so `bags.len() - 1` of
    /// them (0 for a single bag).
    pub tree_edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// Single bag holding all vertices.
    pub fn trivial(vertices: &[VertexId]) -> TreeDecomposition {
        TreeDecomposition { bags: vec![vertices.iter().copied().collect()], tree_edges: vec![] }
    }

    /// Max bag size minus one; -1 for a decomposition of the empty graph.
    pub fn width(&self) -> i64 {
        self.bags.iter().map(|b| b.len() as i64 - 1).max().unwrap_or(-1)
    }

    /// Checks the three validity conditions against `g` (parallel edges
    /// collapse; only the simple adjacency matters) plus treeness.
    pub fn validate(&self, g: &FractionalGraph) -> Result<()> {
        if self.bags.is_empty() {
            return Err(Error::InvalidArgument("a decomposition needs at least one bag".into()));
        }
        if self.tree_edges.len() + 1 != self.bags.len() {
            return Err(Error::InvalidArgument("bag tree has the wrong edge count".into()));
        }
        // treeness: connected with |bags|-1 edges
        let mut reach = vec![false; self.bags.len()];
        let mut stack = vec![0usize];
        reach[0] = true;
        while let Some(b) = stack.pop() {
            for &(x, y) in &self.tree_edges {
                let o = if x == b {
                    y
                } else if y == b {
                    x
                } else {
                    continue;
                };
                if !reach[o] {
                    reach[o] = true;
                    stack.push(o);
                }
            }
        }
        if !reach.iter().all(|&r| r) {
            return Err(Error::InvalidArgument("bag tree is disconnected".into()));
        }
        // (i) vertex coverage
        let covered: BTreeSet<VertexId> = self.bags.iter().flatten().copied().collect();
        let all: BTreeSet<VertexId> = g.vertices().iter().copied().collect();
        if covered != all {
            return Err(Error::InvalidArgument("bags do not cover the vertex set".into()));
        }
        // (ii) edge coverage
        for e in g.edges() {
            if !self.bags.iter().any(|b| b.contains(&e.u) && b.contains(&e.v)) {
                return Err(Error::InvalidArgument(format!("edge {}-{} lies in no bag", e.u, e.v)));
            }
        }
        // (iii) connectivity of each vertex's bag set
        for &v in g.vertices() {
            let holding: Vec<usize> = self
                .bags
                .iter()
                .enumerate()
                .filter(|(_, b)| b.contains(&v))
                .map(|(i, _)| i)
                .collect();
            if holding.is_empty() {
                continue;
            }
            let hold_set: BTreeSet<usize> = holding.iter().copied().collect();
            let mut seen = BTreeSet::from([holding[0]]);
            let mut stack = vec![holding[0]];
            while let Some(b) = stack.pop() {
                for &(x, y) in &self.tree_edges {
                    let o = if x == b {
                        y
                    } else if y == b {
                        x
                    } else {
                        continue;
                    };
                    if hold_set.contains(&o) && seen.insert(o) {
                        stack.push(o);
                    }
                }
            }
            if seen.len() != holding.len() {
                return Err(Error::InvalidArgument(format!(
                    "bags containing vertex {v} are not connected"
                )));
            }
        }
        Ok(())
    }
}

/// Adjacency bitmasks of the simple graph underlying `g`, with vertices
/// renumbered to positions `0..n`.
fn bitmask_adjacency(g: &FractionalGraph) -> (Vec<VertexId>, Vec<u32>) {
    let order: Vec<VertexId> = g.vertices().to_vec();
    let pos: BTreeMap<VertexId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj = vec![0u32; order.len()];
    for e in g.edges() {
        let (a, b) = (pos[&e.u], pos[&e.v]);
        adj[a] |= 1 << b;
        adj[b] |= 1 << a;
    }
    (order, adj)
}

/// Forward degree of `v` once the set `a` (bitmask) is eliminated: the number
/// of vertices outside `a ∪ {v}` reachable from `v` through `a`.
fn forward_degree(adj: &[u32], a: u32, v: usize) -> u32 {
    let mut seen = adj[v];
    loop {
        let mut grow = seen;
        let mut inside = seen & a;
        while inside != 0 {
            let u = inside.trailing_zeros() as usize;
            inside &= inside - 1;
            grow |= adj[u];
        }
        if grow == seen {
            break;
        }
        seen = grow;
    }
    (seen & !a & !(1u32 << v)).count_ones()
}

/// Exact treewidth with a witness decomposition. Rejects graphs above
/// [`EXACT_TW_VERTEX_LIMIT`] vertices; use [`bounds_treewidth`] there.
pub fn exact_treewidth(g: &FractionalGraph) -> Result<(i64, TreeDecomposition)> {
    let n = g.num_vertices();
    if n > EXACT_TW_VERTEX_LIMIT {
        return Err(Error::SizeLimit(format!(
            "exact treewidth is limited to {EXACT_TW_VERTEX_LIMIT} vertices, got {n}; \
             use bounds_treewidth instead"
        )));
    }
    if n == 0 {
        return Ok((-1, TreeDecomposition { bags: vec![BTreeSet::new()], tree_edges: vec![] }));
    }
    let (order, adj) = bitmask_adjacency(g);
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };

    // dp[s] = minimum over orders eliminating exactly the set s first of the
    // largest forward degree seen; iterate in increasing s since s\{v} < s.
    let mut dp = vec![u8::MAX; (full as usize) + 1];
    dp[0] = 0;
    for s in 1..=full {
        let mut best = u8::MAX;
        let mut vs = s;
        while vs != 0 {
            let v = vs.trailing_zeros() as usize;
            vs &= vs - 1;
            let prev = s & !(1 << v);
            let sub = dp[prev as usize];
            if sub == u8::MAX {
                continue;
            }
            let q = forward_degree(&adj, prev, v) as u8;
            let val = sub.max(q);
            if val < best {
                best = val;
            }
        }
        dp[s as usize] = best;
    }
    let width = dp[full as usize] as i64;

    // Reconstruct an optimal elimination order back to front, breaking ties
    // toward the smallest vertex position.
    let mut elim = vec![0usize; n];
    let mut s = full;
    for slot in (0..n).rev() {
        let mut chosen = None;
        let mut vs = s;
        while vs != 0 {
            let v = vs.trailing_zeros() as usize;
            vs &= vs - 1;
            let prev = s & !(1 << v);
            if dp[prev as usize] == u8::MAX {
                continue;
            }
            let val = dp[prev as usize].max(forward_degree(&adj, prev, v) as u8);
            if val == dp[s as usize] {
                chosen = Some(v);
                break;
            }
        }
        let v = chosen.expect("dp reconstruction");
        elim[slot] = v;
        s &= !(1 << v);
    }

    let td = decomposition_from_elimination(&order, &adj, &elim);
    debug_assert_eq!(td.width(), width);
    td.validate(g).expect("constructed decomposition must validate");
    Ok((width, td))
}

/// Standard fill-in bag construction from an elimination order (positions
/// into `order`).
fn decomposition_from_elimination(
    order: &[VertexId],
    adj: &[u32],
    elim: &[usize],
) -> TreeDecomposition {
    let n = order.len();
    let mut work = adj.to_vec();
    let mut position = vec![0usize; n];
    for (i, &v) in elim.iter().enumerate() {
        position[v] = i;
    }
    let mut bags: Vec<BTreeSet<VertexId>> = Vec::with_capacity(n);
    let mut neighbors_at_elim: Vec<u32> = Vec::with_capacity(n);
    let mut eliminated = 0u32;
    for &v in elim {
        let later = work[v] & !eliminated & !(1 << v);
        neighbors_at_elim.push(later);
        let mut bag: BTreeSet<VertexId> = BTreeSet::from([order[v]]);
        let mut it = later;
        while it != 0 {
            let u = it.trailing_zeros() as usize;
            it &= it - 1;
            bag.insert(order[u]);
        }
        bags.push(bag);
        // make the later neighborhood a clique
        let mut a = later;
        while a != 0 {
            let x = a.trailing_zeros() as usize;
            a &= a - 1;
            work[x] |= later & !(1 << x);
        }
        eliminated |= 1 << v;
    }
    let mut tree_edges = Vec::new();
    for (i, &later) in neighbors_at_elim.iter().enumerate() {
        if later != 0 {
            // parent: the earliest-eliminated later neighbor
            let mut best = usize::MAX;
            let mut it = later;
            while it != 0 {
                let u = it.trailing_zeros() as usize;
                it &= it - 1;
                best = best.min(position[u]);
            }
            tree_edges.push((i, best));
        } else if i + 1 < n {
            tree_edges.push((i, i + 1));
        }
    }
    TreeDecomposition { bags, tree_edges }
}

/// Lower and upper treewidth bounds with a witness decomposition for the
/// upper bound: degeneracy below, greedy minimum-fill elimination above.
pub fn bounds_treewidth(g: &FractionalGraph) -> (i64, i64, TreeDecomposition) {
    let n = g.num_vertices();
    if n == 0 {
        return (-1, -1, TreeDecomposition { bags: vec![BTreeSet::new()], tree_edges: vec![] });
    }
    let adj = g.adjacency();
    // degeneracy: repeatedly remove a minimum-degree vertex
    let mut degen = 0usize;
    {
        let mut live: BTreeMap<VertexId, BTreeSet<VertexId>> = adj.clone();
        while !live.is_empty() {
            let (&v, _) = live.iter().min_by_key(|(_, nb)| nb.len()).unwrap();
            degen = degen.max(live[&v].len());
            let nbs: Vec<VertexId> = live[&v].iter().copied().collect();
            for u in nbs {
                if let Some(s) = live.get_mut(&u) {
                    s.remove(&v);
                }
            }
            live.remove(&v);
        }
    }
    let td = min_fill_decomposition(g);
    (degen as i64, td.width(), td)
}

/// Greedy minimum-fill elimination and its fill-in decomposition.
pub fn min_fill_decomposition(g: &FractionalGraph) -> TreeDecomposition {
    let order_elim = min_fill_order(g);
    let (order, adj) = adjacency_positions(g);
    decomposition_from_elimination_large(&order, &adj, &order_elim)
}

/// Minimum-fill elimination order as positions into the vertex list.
pub fn min_fill_order(g: &FractionalGraph) -> Vec<usize> {
    let (order, mut adj) = adjacency_positions(g);
    let n = order.len();
    let mut alive: Vec<bool> = vec![true; n];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        // pick the live vertex whose elimination adds the fewest fill edges,
        // ties toward smaller degree then smaller position
        let mut best: Option<(usize, usize, usize)> = None;
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            let nbs: Vec<usize> = adj[v].iter().copied().filter(|&u| alive[u]).collect();
            let mut fill = 0usize;
            for i in 0..nbs.len() {
                for j in i + 1..nbs.len() {
                    if !adj[nbs[i]].contains(&nbs[j]) {
                        fill += 1;
                    }
                }
            }
            let key = (fill, nbs.len(), v);
            if best.map(|b| key < b).unwrap_or(true) {
                best = Some(key);
            }
        }
        let (_, _, v) = best.unwrap();
        let nbs: Vec<usize> = adj[v].iter().copied().filter(|&u| alive[u]).collect();
        for i in 0..nbs.len() {
            for j in i + 1..nbs.len() {
                adj[nbs[i]].insert(nbs[j]);
                adj[nbs[j]].insert(nbs[i]);
            }
        }
        alive[v] = false;
        out.push(v);
    }
    out
}

/// Adjacency as position sets, no 32-vertex cap.
fn adjacency_positions(g: &FractionalGraph) -> (Vec<VertexId>, Vec<BTreeSet<usize>>) {
    let order: Vec<VertexId> = g.vertices().to_vec();
    let pos: BTreeMap<VertexId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj = vec![BTreeSet::new(); order.len()];
    for e in g.edges() {
        let (a, b) = (pos[&e.u], pos[&e.v]);
        if a != b {
            adj[a].insert(b);
            adj[b].insert(a);
        }
    }
    (order, adj)
}

fn decomposition_from_elimination_large(
    order: &[VertexId],
    adj: &[BTreeSet<usize>],
    elim: &[usize],
) -> TreeDecomposition {
    let n = order.len();
    let mut work: Vec<BTreeSet<usize>> = adj.to_vec();
    let mut position = vec![0usize; n];
    for (i, &v) in elim.iter().enumerate() {
        position[v] = i;
    }
    let mut eliminated = vec![false; n];
    let mut bags = Vec::with_capacity(n);
    let mut laters: Vec<Vec<usize>> = Vec::with_capacity(n);
    for &v in elim {
        let later: Vec<usize> = work[v].iter().copied().filter(|&u| !eliminated[u]).collect();
        let mut bag: BTreeSet<VertexId> = BTreeSet::from([order[v]]);
        bag.extend(later.iter().map(|&u| order[u]));
        bags.push(bag);
        for i in 0..later.len() {
            for j in i + 1..later.len() {
                work[later[i]].insert(later[j]);
                work[later[j]].insert(later[i]);
            }
        }
        eliminated[v] = true;
        laters.push(later);
    }
    let mut tree_edges = Vec::new();
    for (i, later) in laters.iter().enumerate() {
        if let Some(p) = later.iter().map(|&u| position[u]).min() {
            tree_edges.push((i, p));
        } else if i + 1 < n {
            tree_edges.push((i, i + 1));
        }
    }
    TreeDecomposition { bags, tree_edges }
}

/// Builds a fill-in decomposition from a caller-supplied elimination order
/// over vertex ids.
pub fn decomposition_from_vertex_order(
    g: &FractionalGraph,
    vertex_order: &[VertexId],
) -> Result<TreeDecomposition> {
    let (order, adj) = adjacency_positions(g);
    let pos: BTreeMap<VertexId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    if vertex_order.len() != order.len() {
        return Err(Error::InvalidArgument("elimination order must list every vertex once".into()));
    }
    let elim: Vec<usize> = vertex_order
        .iter()
        .map(|v| {
            pos.get(v)
                .copied()
                .ok_or_else(|| Error::InvalidArgument(format!("unknown vertex {v}")))
        })
        .collect::<Result<_>>()?;
    let td = decomposition_from_elimination_large(&order, &adj, &elim);
    td.validate(g)?;
    Ok(td)
}

/// Exact or interval line-treewidth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum LtwBound {
    Exact(i64),
    Interval(i64, i64),
}

impl LtwBound {
    pub fn upper(&self) -> i64 {
        match *self {
            LtwBound::Exact(w) => w,
            LtwBound::Interval(_, u) => u,
        }
    }

    pub fn contains(&self, w: i64) -> bool {
        match *self {
            LtwBound::Exact(x) => x == w,
            LtwBound::Interval(l, u) => l <= w && w <= u,
        }
    }
}

/// Line-treewidth of a fractional graph: the treewidth of the line graph of
/// its integerized expansion. Exact when the line graph is small enough,
/// interval otherwise. The decomposition is of the line graph and feeds the
/// contraction circuit generator.
pub fn ltw(g: &FractionalGraph) -> Result<(LtwBound, TreeDecomposition)> {
    let line = g.integerized().line_graph()?;
    if line.num_vertices() <= EXACT_TW_VERTEX_LIMIT {
        let (w, td) = exact_treewidth(&line)?;
        Ok((LtwBound::Exact(w), td))
    } else {
        let (lo, hi, td) = bounds_treewidth(&line);
        Ok((LtwBound::Interval(lo, hi), td))
    }
}

/// Closed form for the line-treewidth of the complete graph `K_d`. The
/// formula is asserted against the exact solver for `d >= 3`; `d = 1` maps
/// to 0 by the empty-line-graph convention, and `d = 2` (a single line-graph
/// vertex) also gives 0.
pub fn ltw_clique_closed_form(d: usize) -> i64 {
    if d <= 1 {
        return 0;
    }
    let d = d as i64;
    if d % 2 == 1 {
        ((d - 1) / 2) * ((d - 1) / 2) + d - 2
    } else {
        ((d - 2) / 2) * (d / 2) + d - 2
    }
}

/// Report of the sandwich inequality between treewidth and line-treewidth.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SandwichReport {
    pub tw: i64,
    pub ltw: i64,
    pub max_degree: usize,
    pub pass: bool,
}

/// Checks `tw(H) - 1 <= ltw(H) <= (tw(H)+1)·Δ(H) - 1` with both sides
/// computed exactly.
pub fn sandwich_check(g: &FractionalGraph) -> Result<SandwichReport> {
    let (tw, _) = exact_treewidth(g)?;
    let (bound, _) = ltw(g)?;
    let lw = match bound {
        LtwBound::Exact(w) => w,
        LtwBound::Interval(..) => {
            return Err(Error::SizeLimit("line graph too large for the exact check".into()))
        }
    };
    let delta = g.max_degree() as i64;
    let pass = tw - 1 <= lw && lw < (tw + 1) * delta;
    Ok(SandwichReport { tw, ltw: lw, max_degree: delta as usize, pass })
}

// ---------------------------------------------------------------------------
// PACE-style text format. Vertices are canonicalized to 1..n by sorted id.
// ---------------------------------------------------------------------------

pub fn write_tree_decomposition(td: &TreeDecomposition) -> String {
    let vertices: BTreeSet<VertexId> = td.bags.iter().flatten().copied().collect();
    let index: BTreeMap<VertexId, usize> =
        vertices.iter().enumerate().map(|(i, &v)| (v, i + 1)).collect();
    let max_bag = td.bags.iter().map(|b| b.len()).max().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "s td {} {} {}", td.bags.len(), max_bag, vertices.len());
    for (i, bag) in td.bags.iter().enumerate() {
        let ids: Vec<String> = bag.iter().map(|v| index[v].to_string()).collect();
        let _ = writeln!(out, "b {} {}", i + 1, ids.join(" "));
    }
    for &(a, b) in &td.tree_edges {
        let _ = writeln!(out, "{} {}", a + 1, b + 1);
    }
    out
}

pub fn parse_tree_decomposition(text: &str) -> Result<TreeDecomposition> {
    let mut bags: Vec<BTreeSet<VertexId>> = Vec::new();
    let mut tree_edges = Vec::new();
    let mut declared = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "s" => {
                if fields.len() != 5 || fields[1] != "td" {
                    return Err(Error::Parse(format!("line {}: bad solution line", lineno + 1)));
                }
                let nb: usize = fields[2]
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad bag count", lineno + 1)))?;
                bags = vec![BTreeSet::new(); nb];
                declared = Some(nb);
            }
            "b" => {
                let id: usize = fields
                    .get(1)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse(format!("line {}: bad bag id", lineno + 1)))?;
                if id == 0 || id > bags.len() {
                    return Err(Error::Parse(format!("line {}: bag id out of range", lineno + 1)));
                }
                for f in &fields[2..] {
                    let v: usize = f
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad vertex", lineno + 1)))?;
                    bags[id - 1].insert(v);
                }
            }
            _ => {
                if fields.len() != 2 {
                    return Err(Error::Parse(format!("line {}: bad tree edge", lineno + 1)));
                }
                let a: usize = fields[0]
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad tree edge", lineno + 1)))?;
                let b: usize = fields[1]
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad tree edge", lineno + 1)))?;
                if a == 0 || b == 0 || a > bags.len() || b > bags.len() {
                    return Err(Error::Parse(format!("line {}: edge out of range", lineno + 1)));
                }
                tree_edges.push((a - 1, b - 1));
            }
        }
    }
    if declared.is_none() {
        return Err(Error::Parse("missing `s td …` header".into()));
    }
    Ok(TreeDecomposition { bags, tree_edges })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs;

    #[test]
    fn trees_have_width_one() {
        let p = graphs::path(5).unwrap();
        let (w, td) = exact_treewidth(&p).unwrap();
        assert_eq!(w, 1);
        td.validate(&p).unwrap();
        let s = graphs::star(6, 1).unwrap();
        assert_eq!(exact_treewidth(&s).unwrap().0, 1);
    }

    #[test]
    fn cliques_and_cycles() {
        assert_eq!(exact_treewidth(&graphs::clique(5).unwrap()).unwrap().0, 4);
        assert_eq!(exact_treewidth(&graphs::cycle(5).unwrap()).unwrap().0, 2);
        let empty = FractionalGraph::empty(vec![]).unwrap();
        assert_eq!(exact_treewidth(&empty).unwrap().0, -1);
        let edgeless = FractionalGraph::empty(vec![1, 2, 3]).unwrap();
        assert_eq!(exact_treewidth(&edgeless).unwrap().0, 0);
    }

    #[test]
    fn line_clique_treewidth_matches_closed_form() {
        // d in 3..=6 here; the acceptance suite extends to d = 7.
        for d in 3..=6usize {
            let line = graphs::clique(d).unwrap().line_graph().unwrap();
            let (w, td) = exact_treewidth(&line).unwrap();
            assert_eq!(w, ltw_clique_closed_form(d), "d = {d}");
            td.validate(&line).unwrap();
        }
        assert_eq!(ltw_clique_closed_form(5), 7);
        assert_eq!(ltw_clique_closed_form(10), 28);
        assert_eq!(ltw_clique_closed_form(1), 0);
        assert_eq!(ltw_clique_closed_form(2), 0);
    }

    #[test]
    fn dp_matches_bruteforce_on_small_graphs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..30 {
            let n = rng.gen_range(2..=7usize);
            let mut edges = Vec::new();
            for i in 1..=n {
                for j in i + 1..=n {
                    if rng.gen_bool(0.45) {
                        edges.push((i, j));
                    }
                }
            }
            let g = FractionalGraph::unweighted((1..=n).collect(), edges).unwrap();
            let (w, td) = exact_treewidth(&g).unwrap();
            td.validate(&g).unwrap();
            assert_eq!(w, bruteforce_treewidth(&g), "trial {trial}: {g:?}");
        }
    }

    /// Minimum over all elimination orderings of the maximum forward degree.
    fn bruteforce_treewidth(g: &FractionalGraph) -> i64 {
        fn go(adj: &mut Vec<BTreeSet<usize>>, alive: &mut Vec<bool>, remaining: usize) -> i64 {
            if remaining == 0 {
                return -1;
            }
            let n = adj.len();
            let mut best = i64::MAX;
            for v in 0..n {
                if !alive[v] {
                    continue;
                }
                let nbs: Vec<usize> =
                    adj[v].iter().copied().filter(|&u| alive[u]).collect();
                let mut added = Vec::new();
                for i in 0..nbs.len() {
                    for j in i + 1..nbs.len() {
                        if adj[nbs[i]].insert(nbs[j]) {
                            adj[nbs[j]].insert(nbs[i]);
                            added.push((nbs[i], nbs[j]));
                        }
                    }
                }
                alive[v] = false;
                let sub = go(adj, alive, remaining - 1);
                alive[v] = true;
                for (a, b) in added {
                    adj[a].remove(&b);
                    adj[b].remove(&a);
                }
                best = best.min(sub.max(nbs.len() as i64));
            }
            best
        }
        let (_, adj) = super::adjacency_positions(g);
        let mut adj: Vec<BTreeSet<usize>> = adj;
        let mut alive = vec![true; g.num_vertices()];
        let n = g.num_vertices();
        if n == 0 {
            return -1;
        }
        go(&mut adj, &mut alive, n)
    }

    #[test]
    fn bounds_bracket_the_truth() {
        let k5 = graphs::clique(5).unwrap();
        let (lo, hi, td) = bounds_treewidth(&k5);
        assert_eq!((lo, hi), (4, 4));
        td.validate(&k5).unwrap();

        let edgeless = FractionalGraph::empty(vec![1, 2]).unwrap();
        assert_eq!(bounds_treewidth(&edgeless).0, 0);
        assert_eq!(bounds_treewidth(&edgeless).1, 0);

        // interval for L(K_8) must contain the closed-form value 18
        let lk8 = graphs::clique(8).unwrap().line_graph().unwrap();
        let (lo, hi, td) = bounds_treewidth(&lk8);
        assert!(lo <= 18 && 18 <= hi, "bounds ({lo},{hi}) must contain 18");
        td.validate(&lk8).unwrap();
    }

    #[test]
    fn ltw_of_named_graphs() {
        let (b, td) = ltw(&graphs::path(4).unwrap()).unwrap();
        assert_eq!(b, LtwBound::Exact(1));
        td.validate(&graphs::path(4).unwrap().line_graph().unwrap()).unwrap();
        assert_eq!(ltw(&graphs::clique(3).unwrap()).unwrap().0, LtwBound::Exact(2));
        assert_eq!(ltw(&graphs::matching(4).unwrap()).unwrap().0, LtwBound::Exact(0));
        // fractional weights integerize first: ltw(1/2 · K_3) = ltw(K_3)
        let half = graphs::clique(3).unwrap().scale(&crate::util::rat(1, 2)).unwrap();
        assert_eq!(ltw(&half).unwrap().0, LtwBound::Exact(2));
    }

    #[test]
    fn sandwich_on_small_graphs() {
        for g in
            [graphs::clique(4).unwrap(), graphs::cycle(5).unwrap(), graphs::star(5, 1).unwrap()]
        {
            let report = sandwich_check(&g).unwrap();
            assert!(report.pass, "{report:?}");
        }
        let k4 = sandwich_check(&graphs::clique(4).unwrap()).unwrap();
        assert_eq!((k4.tw, k4.ltw), (3, 4));
    }

    #[test]
    fn vertex_limit_guard() {
        let big = FractionalGraph::empty((1..=23).collect()).unwrap();
        assert!(matches!(exact_treewidth(&big), Err(crate::Error::SizeLimit(_))));
    }

    #[test]
    fn pace_format_round_trip() {
        let g = graphs::cycle(5).unwrap();
        let (_, td) = exact_treewidth(&g).unwrap();
        let text = write_tree_decomposition(&td);
        let back = parse_tree_decomposition(&text).unwrap();
        assert_eq!(back.width(), td.width());
        back.validate(&g).unwrap();
        assert!(parse_tree_decomposition("b 1 2").is_err());
    }

    #[test]
    fn custom_elimination_order_decomposition() {
        let g = graphs::grid(3, 3).unwrap();
        let order: Vec<usize> = (1..=9).collect();
        let td = decomposition_from_vertex_order(&g, &order).unwrap();
        td.validate(&g).unwrap();
        assert!(td.width() >= 2);
    }
}
