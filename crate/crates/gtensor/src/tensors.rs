//! Sparse set-multilinear tensors with exact rational coefficients.
//!
//! A tensor is a map from index tuples (one 0-based index per mode) to
//! nonzero rationals; everything absent is zero. Graph tensors enumerate the
//! edge assignments of a graph, so they have `n^|E|` nonzero entries while
//! their ambient space is much larger — the sparse representation is the
//! point. No floating point appears in this module.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num::{BigInt, One, Zero};

use crate::graphs::{EdgeId, FractionalGraph, VertexId};
use crate::util::{digits, fmt_rat_slash, parse_rat, Rat};
use crate::{Error, Result};

/// Default ceiling on the number of nonzero entries a constructed tensor may
/// have (2^24).
pub const DEFAULT_NONZERO_LIMIT: usize = 1 << 24;

/// Default ceiling on each side of a flattening passed to rank elimination.
pub const DEFAULT_FLATTENING_LIMIT: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseTensor {
    mode_dims: Vec<usize>,
    coeffs: BTreeMap<Vec<u32>, Rat>,
}

impl SparseTensor {
    pub fn new(mode_dims: Vec<usize>) -> SparseTensor {
        assert!(mode_dims.iter().all(|&d| d >= 1), "mode dimensions must be positive");
        SparseTensor { mode_dims, coeffs: BTreeMap::new() }
    }

    pub fn mode_dims(&self) -> &[usize] {
        &self.mode_dims
    }

    pub fn num_modes(&self) -> usize {
        self.mode_dims.len()
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.coeffs.iter()
    }

    pub fn get(&self, key: &[u32]) -> Rat {
        self.coeffs.get(key).cloned().unwrap_or_else(Rat::zero)
    }

    fn check_key(&self, key: &[u32]) {
        assert_eq!(key.len(), self.mode_dims.len(), "key arity mismatch");
        for (i, &k) in key.iter().enumerate() {
            assert!((k as usize) < self.mode_dims[i], "index out of range in mode {i}");
        }
    }

    /// Adds `c` to the coefficient at `key`, dropping entries that cancel.
    pub fn add_to(&mut self, key: Vec<u32>, c: Rat) {
        if c.is_zero() {
            return;
        }
        self.check_key(&key);
        match self.coeffs.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let v = e.get().clone() + c;
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn scale(&self, c: &Rat) -> SparseTensor {
        if c.is_zero() {
            return SparseTensor::new(self.mode_dims.clone());
        }
        let coeffs = self.coeffs.iter().map(|(k, v)| (k.clone(), v * c)).collect();
        SparseTensor { mode_dims: self.mode_dims.clone(), coeffs }
    }

    pub fn add(&self, other: &SparseTensor) -> SparseTensor {
        assert_eq!(self.mode_dims, other.mode_dims, "mode dims mismatch in add");
        let mut out = self.clone();
        for (k, v) in other.entries() {
            out.add_to(k.clone(), v.clone());
        }
        out
    }

    /// Evaluates the multilinear form on one scalar vector per mode.
    pub fn evaluate(&self, inputs: &[Vec<Rat>]) -> Result<Rat> {
        if inputs.len() != self.num_modes() {
            return Err(Error::InvalidArgument(format!(
                "expected {} input vectors, got {}",
                self.num_modes(),
                inputs.len()
            )));
        }
        for (i, v) in inputs.iter().enumerate() {
            if v.len() != self.mode_dims[i] {
                return Err(Error::InvalidArgument(format!(
                    "mode {i} expects dimension {}, got {}",
                    self.mode_dims[i],
                    v.len()
                )));
            }
        }
        let mut total = Rat::zero();
        for (key, c) in &self.coeffs {
            let mut term = c.clone();
            for (mode, &idx) in key.iter().enumerate() {
                term *= &inputs[mode][idx as usize];
            }
            total += term;
        }
        Ok(total)
    }
}

/// Kronecker product; mode `i` of the result has dimension
/// `dim_s(i) * dim_t(i)` and combined index `i_s + i_t * dim_s(i)`.
pub fn kronecker(s: &SparseTensor, t: &SparseTensor) -> Result<SparseTensor> {
    if s.num_modes() != t.num_modes() {
        return Err(Error::InvalidArgument(format!(
            "kronecker needs equal mode counts, got {} and {}",
            s.num_modes(),
            t.num_modes()
        )));
    }
    let dims: Vec<usize> =
        s.mode_dims.iter().zip(&t.mode_dims).map(|(a, b)| a * b).collect();
    let mut out = SparseTensor::new(dims);
    for (ks, cs) in s.entries() {
        for (kt, ct) in t.entries() {
            let key: Vec<u32> = ks
                .iter()
                .zip(kt)
                .zip(&s.mode_dims)
                .map(|((&is, &it), &ds)| is + it * ds as u32)
                .collect();
            out.add_to(key, cs * ct);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Graph tensors.
// ---------------------------------------------------------------------------

/// Per-vertex bookkeeping between local edge assignments and mode indices.
///
/// Incident edges are sorted ascending by edge id, and an assignment
/// `f: I(v) -> {0..n-1}` encodes as `sum_j f(e_j) * n^j`. This pins the mode
/// bases and makes every re-indexing bijection computable.
#[derive(Debug, Clone)]
pub struct GraphTensorIndexing {
    pub n: usize,
    /// Sorted incident edge ids, one list per vertex in vertex order.
    pub incident: Vec<Vec<EdgeId>>,
    pub vertices: Vec<VertexId>,
}

impl GraphTensorIndexing {
    pub fn new(g: &FractionalGraph, n: usize) -> GraphTensorIndexing {
        let incident = g.vertices().iter().map(|&v| g.incident(v)).collect();
        GraphTensorIndexing { n, incident, vertices: g.vertices().to_vec() }
    }

    pub fn mode_dims(&self) -> Vec<usize> {
        self.incident.iter().map(|i| self.n.pow(i.len() as u32)).collect()
    }

    /// Mode index of vertex position `vpos` under a global edge assignment.
    pub fn encode(&self, vpos: usize, assignment: &[u32]) -> u32 {
        let mut idx = 0u32;
        for &e in self.incident[vpos].iter().rev() {
            idx = idx * self.n as u32 + assignment[e];
        }
        idx
    }

    /// Local assignment digits (in incident-edge order) of a mode index.
    pub fn decode(&self, vpos: usize, index: u32) -> Vec<u32> {
        digits(index as usize, self.n, self.incident[vpos].len())
            .into_iter()
            .map(|d| d as u32)
            .collect()
    }
}

/// Graph tensor of an expanded multigraph: one mode per vertex of dimension
/// `n^deg`, one coefficient-1 monomial per edge assignment.
pub fn graph_tensor(g: &FractionalGraph, n: usize) -> Result<SparseTensor> {
    graph_tensor_with_limit(g, n, DEFAULT_NONZERO_LIMIT)
}

pub fn graph_tensor_with_limit(
    g: &FractionalGraph,
    n: usize,
    limit: usize,
) -> Result<SparseTensor> {
    if n == 0 {
        return Err(Error::InvalidArgument("length parameter n must be >= 1".into()));
    }
    if !g.is_expanded() {
        return Err(Error::InvalidArgument(
            "graph_tensor requires unit edge weights (use integerized() first)".into(),
        ));
    }
    let m = g.num_edges();
    let needed = (n as f64).powi(m as i32);
    if needed > limit as f64 {
        return Err(Error::SizeLimit(format!(
            "graph tensor needs {n}^{m} = {needed:.0} nonzeros, limit is {limit}"
        )));
    }
    let indexing = GraphTensorIndexing::new(g, n);
    let mut t = SparseTensor::new(indexing.mode_dims());
    let total = n.pow(m as u32);
    let mut assignment = vec![0u32; m];
    for f in 0..total {
        for (e, d) in digits(f, n, m).into_iter().enumerate() {
            assignment[e] = d as u32;
        }
        let key: Vec<u32> =
            (0..g.num_vertices()).map(|vp| indexing.encode(vp, &assignment)).collect();
        t.add_to(key, Rat::one());
    }
    Ok(t)
}

// ---------------------------------------------------------------------------
// Canonical re-indexing bijections.
// ---------------------------------------------------------------------------

/// Per-mode index bijections, as lookup tables `table[mode][old] = new`.
pub type Reindexing = Vec<Vec<u32>>;

pub fn apply_reindexing(t: &SparseTensor, tables: &Reindexing, new_dims: Vec<usize>) -> SparseTensor {
    assert_eq!(tables.len(), t.num_modes());
    let mut out = SparseTensor::new(new_dims);
    for (k, c) in t.entries() {
        let key: Vec<u32> =
            k.iter().enumerate().map(|(m, &i)| tables[m][i as usize]).collect();
        out.add_to(key, c.clone());
    }
    out
}

/// The mode-wise bijection pairing a `g`-local with an `h`-local assignment
/// into a `(g+h)`-local assignment, for graphs over the same vertex list.
/// Applying it to `kronecker(T_{g,n}, T_{h,n})` yields `T_{g+h,n}`.
pub fn canonical_reindex_product(
    g: &FractionalGraph,
    h: &FractionalGraph,
    n: usize,
) -> Result<Reindexing> {
    if g.vertices() != h.vertices() {
        return Err(Error::InvalidArgument(
            "product re-indexing expects graphs on the same vertex list".into(),
        ));
    }
    let s = g.sum(h);
    let gi = GraphTensorIndexing::new(g, n);
    let hi = GraphTensorIndexing::new(h, n);
    let si = GraphTensorIndexing::new(&s, n);
    let mut tables = Vec::new();
    for vp in 0..g.num_vertices() {
        let (dg, dh) = (gi.incident[vp].len(), hi.incident[vp].len());
        let (mg, mh) = (n.pow(dg as u32), n.pow(dh as u32));
        let mut table = vec![0u32; mg * mh];
        for b in 0..mh {
            let bd = hi.decode(vp, b as u32);
            for a in 0..mg {
                let ad = gi.decode(vp, a as u32);
                // Sum-graph incident list = g's edges then h's, re-labeled
                // after g's; assemble the combined assignment in that order.
                let mut assignment = vec![0u32; s.num_edges()];
                for (j, &e) in gi.incident[vp].iter().enumerate() {
                    assignment[e] = ad[j];
                }
                for (j, &e) in hi.incident[vp].iter().enumerate() {
                    assignment[e + g.num_edges()] = bd[j];
                }
                table[a + b * mg] = si.encode(vp, &assignment);
            }
        }
        tables.push(table);
    }
    Ok(tables)
}

/// The mode-wise bijection for the length rule: pairs of assignments
/// `(f1: E->[n1], f2: E->[n2])` correspond to `f: E->[n1*n2]` edge-wise.
/// Applying it to `kronecker(T_{g,n1}, T_{g,n2})` yields `T_{g,n1*n2}`.
pub fn canonical_reindex_length(g: &FractionalGraph, n1: usize, n2: usize) -> Reindexing {
    let mut tables = Vec::new();
    for &v in g.vertices() {
        let deg = g.degree(v);
        let (m1, m2) = (n1.pow(deg as u32), n2.pow(deg as u32));
        let mut table = vec![0u32; m1 * m2];
        for b in 0..m2 {
            let bd = digits(b, n2, deg);
            for a in 0..m1 {
                let ad = digits(a, n1, deg);
                let combined: Vec<usize> =
                    ad.iter().zip(&bd).map(|(&x, &y)| x + n1 * y).collect();
                table[a + b * m1] = crate::util::undigits(&combined, n1 * n2) as u32;
            }
        }
        tables.push(table);
    }
    tables
}

/// The mode-wise bijection of the sum rule `T_{k·g,n} ≡ T_{g,n^k}`: the `k`
/// copies of an edge hold the base-`n` digits of its value in `[n^k]`.
pub fn canonical_reindex_power(g: &FractionalGraph, k: usize, n: usize) -> Reindexing {
    let kg = g.repeat(k);
    let kgi = GraphTensorIndexing::new(&kg, n);
    let nk = n.pow(k as u32);
    let m = g.num_edges();
    let mut tables = Vec::new();
    for (vp, &v) in g.vertices().iter().enumerate() {
        let deg = g.degree(v);
        let src_dim = n.pow((deg * k) as u32);
        let mut table = vec![0u32; src_dim];
        let base_incident = g.incident(v);
        for idx in 0..src_dim {
            let local = kgi.decode(vp, idx as u32);
            // kg's incident list of v: copy 0 edges (ids e), copy 1 (e+m), …
            // all sorted, so digits group by copy then by base edge.
            let mut per_edge = vec![0usize; deg];
            for (pos, &eid) in kgi.incident[vp].iter().enumerate() {
                let copy = eid / m;
                let base = eid % m;
                let j = base_incident.iter().position(|&b| b == base).unwrap();
                per_edge[j] += (local[pos] as usize) * n.pow(copy as u32);
            }
            table[idx] = crate::util::undigits(&per_edge, nk) as u32;
        }
        tables.push(table);
    }
    tables
}

// ---------------------------------------------------------------------------
// Flattening rank.
// ---------------------------------------------------------------------------

/// Exact matrix rank of the flattening with `row_modes` forming the rows,
/// computed by fraction-free (Bareiss) elimination over big integers.
pub fn flattening_rank(t: &SparseTensor, row_modes: &BTreeSet<usize>) -> Result<usize> {
    flattening_rank_with_limit(t, row_modes, DEFAULT_FLATTENING_LIMIT)
}

pub fn flattening_rank_with_limit(
    t: &SparseTensor,
    row_modes: &BTreeSet<usize>,
    limit: usize,
) -> Result<usize> {
    for &m in row_modes {
        if m >= t.num_modes() {
            return Err(Error::InvalidArgument(format!("row mode {m} out of range")));
        }
    }
    let col_modes: Vec<usize> =
        (0..t.num_modes()).filter(|m| !row_modes.contains(m)).collect();
    let row_list: Vec<usize> = row_modes.iter().copied().collect();
    let rows: usize = row_list.iter().map(|&m| t.mode_dims[m]).product();
    let cols: usize = col_modes.iter().map(|&m| t.mode_dims[m]).product();
    if rows > limit || cols > limit {
        return Err(Error::SizeLimit(format!(
            "flattening is {rows} x {cols}, limit is {limit} per side"
        )));
    }

    let pack = |key: &[u32], modes: &[usize]| -> usize {
        let mut idx = 0usize;
        for &m in modes.iter().rev() {
            idx = idx * t.mode_dims[m] + key[m] as usize;
        }
        idx
    };
    let mut matrix: Vec<BTreeMap<usize, Rat>> = vec![BTreeMap::new(); rows];
    for (key, c) in t.entries() {
        let r = pack(key, &row_list);
        let ccol = pack(key, &col_modes);
        matrix[r].insert(ccol, c.clone());
    }
    // clear denominators row-wise, then run Bareiss on integer rows
    let mut int_rows: Vec<BTreeMap<usize, BigInt>> = matrix
        .into_iter()
        .filter(|r| !r.is_empty())
        .map(|r| {
            let denom_lcm = r
                .values()
                .fold(BigInt::one(), |acc, v| crate::util::lcm_big(&acc, v.denom()));
            r.into_iter()
                .map(|(j, v)| {
                    let scaled = v * Rat::from_integer(denom_lcm.clone());
                    (j, scaled.to_integer())
                })
                .collect()
        })
        .collect();

    let mut rank = 0usize;
    let mut prev_pivot = BigInt::one();
    while !int_rows.is_empty() {
        // pick the pivot row with the smallest leading column
        let (pos, _) = int_rows
            .iter()
            .enumerate()
            .min_by_key(|(_, r)| *r.keys().next().unwrap())
            .unwrap();
        let pivot_row = int_rows.swap_remove(pos);
        let (&pc, pv) = pivot_row.iter().next().unwrap();
        let pv = pv.clone();
        rank += 1;
        let mut next_rows = Vec::with_capacity(int_rows.len());
        for row in int_rows {
            let reduced: BTreeMap<usize, BigInt> = if let Some(lead) = row.get(&pc).cloned() {
                let mut out = BTreeMap::new();
                let keys: BTreeSet<usize> =
                    row.keys().chain(pivot_row.keys()).copied().collect();
                for j in keys {
                    if j == pc {
                        continue;
                    }
                    let a = row.get(&j).cloned().unwrap_or_else(BigInt::zero);
                    let b = pivot_row.get(&j).cloned().unwrap_or_else(BigInt::zero);
                    // Bareiss update: entries stay minors of the original
                    // matrix, so the division by the previous pivot is exact
                    let num = &pv * a - &lead * b;
                    debug_assert!((&num % &prev_pivot).is_zero(), "inexact Bareiss division");
                    let val = num / &prev_pivot;
                    if !val.is_zero() {
                        out.insert(j, val);
                    }
                }
                out
            } else {
                row.into_iter()
                    .map(|(j, v)| {
                        let num = &pv * v;
                        debug_assert!((&num % &prev_pivot).is_zero(), "inexact Bareiss division");
                        (j, num / &prev_pivot)
                    })
                    .collect()
            };
            if !reduced.is_empty() {
                next_rows.push(reduced);
            }
        }
        int_rows = next_rows;
        prev_pivot = pv;
    }
    Ok(rank)
}

// ---------------------------------------------------------------------------
// Substitutions and projections.
// ---------------------------------------------------------------------------

/// How one mode transforms under a substitution.
#[derive(Debug, Clone)]
pub enum ModeSubst {
    /// Every indeterminate of the mode becomes a scalar; the mode disappears.
    Drop(Vec<Rat>),
    /// Index-to-index map with a scalar factor; `None` sends to zero.
    Map { new_dim: usize, table: Vec<Option<(u32, Rat)>> },
    /// Index to a linear form in the fresh indeterminates of the mode.
    Linear { new_dim: usize, forms: Vec<Vec<(u32, Rat)>> },
}

/// A simple or linear substitution, one entry per mode of the source tensor.
#[derive(Debug, Clone)]
pub struct Substitution {
    pub modes: Vec<ModeSubst>,
}

impl Substitution {
    pub fn output_dims(&self) -> Vec<usize> {
        self.modes
            .iter()
            .filter_map(|m| match m {
                ModeSubst::Drop(_) => None,
                ModeSubst::Map { new_dim, .. } | ModeSubst::Linear { new_dim, .. } => Some(*new_dim),
            })
            .collect()
    }

    /// Applies the substitution, summing collisions.
    pub fn apply(&self, t: &SparseTensor) -> SparseTensor {
        assert_eq!(self.modes.len(), t.num_modes(), "substitution arity mismatch");
        let mut out = SparseTensor::new(self.output_dims());
        for (key, c) in t.entries() {
            // expansion of this monomial: list of (new key so far, coeff)
            let mut partial: Vec<(Vec<u32>, Rat)> = vec![(Vec::new(), c.clone())];
            for (mode, &idx) in key.iter().enumerate() {
                match &self.modes[mode] {
                    ModeSubst::Drop(scalars) => {
                        let s = &scalars[idx as usize];
                        if s.is_zero() {
                            partial.clear();
                        } else if !s.is_one() {
                            for p in partial.iter_mut() {
                                p.1 *= s;
                            }
                        }
                    }
                    ModeSubst::Map { table, .. } => match &table[idx as usize] {
                        None => partial.clear(),
                        Some((j, s)) => {
                            for p in partial.iter_mut() {
                                p.0.push(*j);
                                if !s.is_one() {
                                    p.1 *= s;
                                }
                            }
                        }
                    },
                    ModeSubst::Linear { forms, .. } => {
                        let form = &forms[idx as usize];
                        let mut next = Vec::with_capacity(partial.len() * form.len());
                        for (k, pc) in &partial {
                            for (j, s) in form {
                                let mut nk = k.clone();
                                nk.push(*j);
                                next.push((nk, pc * s));
                            }
                        }
                        partial = next;
                    }
                }
                if partial.is_empty() {
                    break;
                }
            }
            for (k, v) in partial {
                out.add_to(k, v);
            }
        }
        out
    }
}

/// Subgraph selection inside `g`: a subset of vertices and of edge ids whose
/// endpoints stay inside the subset.
pub fn subgraph(
    g: &FractionalGraph,
    keep_vertices: &BTreeSet<VertexId>,
    keep_edges: &BTreeSet<EdgeId>,
) -> Result<FractionalGraph> {
    for &e in keep_edges {
        if e >= g.num_edges() {
            return Err(Error::InvalidArgument(format!("edge id {e} out of range")));
        }
        let edge = &g.edges()[e];
        if !keep_vertices.contains(&edge.u) || !keep_vertices.contains(&edge.v) {
            return Err(Error::InvalidArgument(format!(
                "edge {e} leaves the kept vertex set"
            )));
        }
    }
    let vertices: Vec<VertexId> =
        g.vertices().iter().copied().filter(|v| keep_vertices.contains(v)).collect();
    let edges: Vec<(VertexId, VertexId, Rat)> = g
        .edges()
        .iter()
        .filter(|e| keep_edges.contains(&e.id))
        .map(|e| (e.u, e.v, e.weight.clone()))
        .collect();
    FractionalGraph::new(vertices, edges)
}

/// Substitution projecting `T_{g,n}` onto `T_{h,n}` for the subgraph `h`
/// selected by vertex and edge subsets: deleted edges are pinned to the first
/// index value and deleted vertices become indicator scalars, so the result
/// equals the subgraph's tensor coefficient-exactly.
pub fn project_subgraph(
    g: &FractionalGraph,
    keep_vertices: &BTreeSet<VertexId>,
    keep_edges: &BTreeSet<EdgeId>,
    n: usize,
) -> Result<(Substitution, FractionalGraph)> {
    let h = subgraph(g, keep_vertices, keep_edges)?;
    let gi = GraphTensorIndexing::new(g, n);
    let hi = GraphTensorIndexing::new(&h, n);
    // map surviving edge ids to h edge positions
    let edge_pos: BTreeMap<EdgeId, usize> =
        keep_edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let mut modes = Vec::new();
    for (vp, &v) in g.vertices().iter().enumerate() {
        let inc = &gi.incident[vp];
        let dim = n.pow(inc.len() as u32);
        if !keep_vertices.contains(&v) {
            let scalars = (0..dim)
                .map(|idx| {
                    let d = gi.decode(vp, idx as u32);
                    if d.iter().all(|&x| x == 0) {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
                .collect();
            modes.push(ModeSubst::Drop(scalars));
            continue;
        }
        let hvp = h.vertices().iter().position(|&w| w == v).unwrap();
        let new_dim = n.pow(hi.incident[hvp].len() as u32);
        let table = (0..dim)
            .map(|idx| {
                let d = gi.decode(vp, idx as u32);
                let mut assignment = vec![0u32; h.num_edges()];
                for (j, &e) in inc.iter().enumerate() {
                    match edge_pos.get(&e) {
                        Some(&pos) => assignment[pos] = d[j],
                        None => {
                            if d[j] != 0 {
                                return None; // deleted edge pinned to value 0
                            }
                        }
                    }
                }
                Some((hi.encode(hvp, &assignment), Rat::one()))
            })
            .collect();
        modes.push(ModeSubst::Map { new_dim, table });
    }
    Ok((Substitution { modes }, h))
}

/// Substitution projecting `T_{g,n}` onto `T_{g,m}` for `m <= n` by zeroing
/// all indeterminates that use an edge value above `m`.
pub fn project_length(g: &FractionalGraph, n: usize, m: usize) -> Result<Substitution> {
    if m > n || m == 0 {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= n, got m={m}, n={n}")));
    }
    let gi = GraphTensorIndexing::new(g, n);
    let hi = GraphTensorIndexing::new(g, m);
    let mut modes = Vec::new();
    for (vp, _) in g.vertices().iter().enumerate() {
        let deg = gi.incident[vp].len();
        let dim = n.pow(deg as u32);
        let new_dim = m.pow(deg as u32);
        let table = (0..dim)
            .map(|idx| {
                let d = gi.decode(vp, idx as u32);
                if d.iter().any(|&x| (x as usize) >= m) {
                    None
                } else {
                    let mut assignment = vec![0u32; g.num_edges()];
                    for (j, &e) in gi.incident[vp].iter().enumerate() {
                        assignment[e] = d[j];
                    }
                    Some((hi.encode(vp, &assignment), Rat::one()))
                }
            })
            .collect();
        modes.push(ModeSubst::Map { new_dim, table });
    }
    Ok(Substitution { modes })
}

/// Witness that `g` arises from a smaller graph by subdividing one edge:
/// `w` is the degree-2 subdivision vertex and `e_uw`, `e_vw` its two edges.
#[derive(Debug, Clone, Copy)]
pub struct SubdivisionWitness {
    pub w: VertexId,
    pub e_uw: EdgeId,
    pub e_vw: EdgeId,
}

/// Substitution contracting a subdivision: the subdivision vertex becomes a
/// Kronecker delta on its two edge values. Returns the un-subdivided graph
/// `h` (surviving edges keep their order, the restored edge `u-v` goes last)
/// and the substitution whose application equals `T_{h,n}`.
pub fn project_subdivision(
    g: &FractionalGraph,
    witness: SubdivisionWitness,
    n: usize,
) -> Result<(Substitution, FractionalGraph)> {
    let SubdivisionWitness { w, e_uw, e_vw } = witness;
    if e_uw >= g.num_edges() || e_vw >= g.num_edges() || e_uw == e_vw {
        return Err(Error::InvalidArgument("invalid subdivision edge ids".into()));
    }
    if g.degree(w) != 2 || !g.edges()[e_uw].touches(w) || !g.edges()[e_vw].touches(w) {
        return Err(Error::InvalidArgument(format!(
            "vertex {w} is not a degree-2 subdivision vertex of the given edges"
        )));
    }
    let u = g.edges()[e_uw].other(w);
    let v = g.edges()[e_vw].other(w);
    if u == v {
        return Err(Error::InvalidArgument("un-subdividing would create a self-loop".into()));
    }

    let vertices: Vec<VertexId> = g.vertices().iter().copied().filter(|&x| x != w).collect();
    let mut edges: Vec<(VertexId, VertexId, Rat)> = g
        .edges()
        .iter()
        .filter(|e| e.id != e_uw && e.id != e_vw)
        .map(|e| (e.u, e.v, e.weight.clone()))
        .collect();
    edges.push((u, v, Rat::one()));
    let h = FractionalGraph::new(vertices, edges)?;

    // surviving g-edge id -> h edge position; the restored edge goes last
    let mut edge_pos: BTreeMap<EdgeId, usize> = BTreeMap::new();
    for (pos, e) in g.edges().iter().filter(|e| e.id != e_uw && e.id != e_vw).enumerate() {
        edge_pos.insert(e.id, pos);
    }
    let restored = h.num_edges() - 1;

    let gi = GraphTensorIndexing::new(g, n);
    let hi = GraphTensorIndexing::new(&h, n);
    let mut modes = Vec::new();
    for (vp, &x) in g.vertices().iter().enumerate() {
        let inc = &gi.incident[vp];
        let dim = n.pow(inc.len() as u32);
        if x == w {
            // x^{(w)}_{(i,j)} := δ_ij
            let scalars = (0..dim)
                .map(|idx| {
                    let d = gi.decode(vp, idx as u32);
                    if d[0] == d[1] {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
                .collect();
            modes.push(ModeSubst::Drop(scalars));
            continue;
        }
        let hvp = h.vertices().iter().position(|&y| y == x).unwrap();
        let new_dim = n.pow(hi.incident[hvp].len() as u32);
        let table = (0..dim)
            .map(|idx| {
                let d = gi.decode(vp, idx as u32);
                let mut assignment = vec![0u32; h.num_edges()];
                for (j, &e) in inc.iter().enumerate() {
                    if e == e_uw || e == e_vw {
                        assignment[restored] = d[j];
                    } else {
                        assignment[edge_pos[&e]] = d[j];
                    }
                }
                Some((hi.encode(hvp, &assignment), Rat::one()))
            })
            .collect();
        modes.push(ModeSubst::Map { new_dim, table });
    }
    Ok((Substitution { modes }, h))
}

/// Linear substitution witnessing `t <= T_{S_d(u),n}` for the star with the
/// given center: the center-mode indeterminate indexed by the leaf values
/// becomes the linear form over `t`'s center-mode slice. Applying the result
/// to `graph_tensor(star(d, u), n)` reproduces `t` exactly.
pub fn star_restriction(t: &SparseTensor, center: usize) -> Result<Substitution> {
    let d = t.num_modes();
    if d < 2 {
        return Err(Error::InvalidArgument("star restriction needs at least 2 modes".into()));
    }
    if center == 0 || center > d {
        return Err(Error::InvalidArgument(format!("center must be in 1..={d}")));
    }
    let n = t.mode_dims[0];
    if t.mode_dims.iter().any(|&m| m != n) {
        return Err(Error::InvalidArgument("star restriction needs equal mode dims".into()));
    }
    let star = crate::graphs::star(d, center)?;
    let gi = GraphTensorIndexing::new(&star, n);

    // leaf vertices in vertex order, skipping the center
    let leaves: Vec<usize> = (0..d).filter(|&vp| vp + 1 != center).collect();
    let center_deg = d - 1;
    let center_dim = n.pow(center_deg as u32);

    // forms[a] = sum over c of t[leaf digits of a interleaved with c] * y_c
    let mut forms: Vec<Vec<(u32, Rat)>> = vec![Vec::new(); center_dim];
    for a in 0..center_dim {
        let digs = digits(a, n, center_deg);
        // star edges are (center, v) in increasing v; digit j belongs to the
        // j-th leaf in vertex order
        let mut key = vec![0u32; d];
        for (j, &leaf_vp) in leaves.iter().enumerate() {
            key[leaf_vp] = digs[j] as u32;
        }
        for c in 0..n {
            key[center - 1] = c as u32;
            let coeff = t.get(&key);
            if !coeff.is_zero() {
                forms[a].push((c as u32, coeff));
            }
        }
    }

    let mut modes = Vec::new();
    for vp in 0..d {
        if vp + 1 == center {
            modes.push(ModeSubst::Linear { new_dim: n, forms: forms.clone() });
        } else {
            // leaf mode: identity (its single incident edge carries the value)
            let deg = gi.incident[vp].len();
            debug_assert_eq!(deg, 1);
            let table = (0..n).map(|i| Some((i as u32, Rat::one()))).collect();
            modes.push(ModeSubst::Map { new_dim: n, table });
        }
    }
    Ok(Substitution { modes })
}

/// Contracts each mode of `u` against a linear form: mode `i` of the result
/// has dimension `m_i * n_i` with index `j + m_i * k`, and the output equals
/// `kronecker(u, rank-one tensor of the h vectors)`.
pub fn contract_modes(u: &SparseTensor, h_vectors: &[Vec<Rat>]) -> Result<SparseTensor> {
    if h_vectors.len() != u.num_modes() {
        return Err(Error::InvalidArgument(format!(
            "expected {} contraction vectors, got {}",
            u.num_modes(),
            h_vectors.len()
        )));
    }
    let mut modes = Vec::new();
    for (i, h) in h_vectors.iter().enumerate() {
        if h.is_empty() {
            return Err(Error::InvalidArgument(format!("empty contraction vector in mode {i}")));
        }
        let m = u.mode_dims[i];
        let new_dim = m * h.len();
        let forms: Vec<Vec<(u32, Rat)>> = (0..m)
            .map(|j| {
                h.iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(k, c)| ((j + m * k) as u32, c.clone()))
                    .collect()
            })
            .collect();
        modes.push(ModeSubst::Linear { new_dim, forms });
    }
    Ok(Substitution { modes }.apply(u))
}

/// Rank-one tensor with entries `prod_i h_i[k_i]`.
pub fn rank_one(h_vectors: &[Vec<Rat>]) -> SparseTensor {
    let dims: Vec<usize> = h_vectors.iter().map(|h| h.len()).collect();
    let mut out = SparseTensor::new(dims);
    let mut stack: Vec<(Vec<u32>, Rat)> = vec![(Vec::new(), Rat::one())];
    for h in h_vectors {
        let mut next = Vec::new();
        for (k, c) in &stack {
            for (i, v) in h.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                let mut nk = k.clone();
                nk.push(i as u32);
                next.push((nk, c * v));
            }
        }
        stack = next;
    }
    for (k, c) in stack {
        out.add_to(k, c);
    }
    out
}

// ---------------------------------------------------------------------------
// Coppersmith–Winograd tensors and the border-rank degeneration.
// ---------------------------------------------------------------------------

/// The `k`-mode CW tensor over dimension `q+2` per mode. Basis layout per
/// mode: index 0 is the corner variable `x_0`, indices `1..=q` the middle
/// block, index `q+1` the top corner (only used by the big variant).
pub fn cw_tensor(q: usize, k: usize, big: bool) -> Result<SparseTensor> {
    if q < 2 || k < 2 {
        return Err(Error::InvalidArgument("cw tensor needs q >= 2 and k >= 2".into()));
    }
    let dim = q + 2;
    if (dim as f64).powi(k as i32) > DEFAULT_NONZERO_LIMIT as f64 {
        return Err(Error::SizeLimit(format!("(q+2)^k = {dim}^{k} exceeds the size limit")));
    }
    let mut t = SparseTensor::new(vec![dim; k]);
    for u in 0..k {
        for v in u + 1..k {
            for i in 1..=q {
                let mut key = vec![0u32; k];
                key[u] = i as u32;
                key[v] = i as u32;
                t.add_to(key, Rat::one());
            }
        }
    }
    if big {
        for u in 0..k {
            let mut key = vec![0u32; k];
            key[u] = (q + 1) as u32;
            t.add_to(key, Rat::one());
        }
    }
    Ok(t)
}

/// Univariate polynomial in the degeneration parameter, truncated above
/// [`EpsPoly::MAX_DEGREE`] with the truncation recorded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsPoly {
    /// Coefficient of degree `i` at position `i`.
    pub coeffs: Vec<Rat>,
    /// True when terms above the cap were dropped.
    pub truncated: bool,
}

impl EpsPoly {
    /// Only coefficients up to degree 5 are ever asserted; everything above
    /// is tail.
    pub const MAX_DEGREE: usize = 5;

    pub fn zero() -> EpsPoly {
        EpsPoly { coeffs: Vec::new(), truncated: false }
    }

    pub fn monomial(degree: usize, c: Rat) -> EpsPoly {
        if c.is_zero() {
            return EpsPoly::zero();
        }
        if degree > Self::MAX_DEGREE {
            return EpsPoly { coeffs: Vec::new(), truncated: true };
        }
        let mut coeffs = vec![Rat::zero(); degree + 1];
        coeffs[degree] = c;
        EpsPoly { coeffs, truncated: false }
    }

    pub fn is_zero(&self) -> bool {
        !self.truncated && self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn coeff(&self, degree: usize) -> Rat {
        self.coeffs.get(degree).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add(&self, other: &EpsPoly) -> EpsPoly {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len).map(|i| self.coeff(i) + other.coeff(i)).collect();
        EpsPoly { coeffs, truncated: self.truncated || other.truncated }
            .normalized()
    }

    pub fn mul(&self, other: &EpsPoly) -> EpsPoly {
        let mut truncated = false;
        let mut coeffs = vec![Rat::zero(); Self::MAX_DEGREE + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                if i + j > Self::MAX_DEGREE {
                    truncated = true;
                } else {
                    coeffs[i + j] += a * b;
                }
            }
        }
        // a dropped tail times anything nonzero stays dropped tail
        if (self.truncated && !other.is_zero()) || (other.truncated && !self.is_zero()) {
            truncated = true;
        }
        EpsPoly { coeffs, truncated }.normalized()
    }

    fn normalized(mut self) -> EpsPoly {
        while self.coeffs.last().map(|c| c.is_zero()).unwrap_or(false) {
            self.coeffs.pop();
        }
        self
    }
}

/// Sparse tensor with polynomial coefficients in the degeneration parameter.
#[derive(Debug, Clone)]
pub struct EpsilonPolyTensor {
    pub mode_dims: Vec<usize>,
    pub coeffs: BTreeMap<Vec<u32>, EpsPoly>,
}

impl EpsilonPolyTensor {
    pub fn new(mode_dims: Vec<usize>) -> EpsilonPolyTensor {
        EpsilonPolyTensor { mode_dims, coeffs: BTreeMap::new() }
    }

    pub fn add_to(&mut self, key: Vec<u32>, p: EpsPoly) {
        if p.is_zero() {
            return;
        }
        match self.coeffs.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(p);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&p);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Rank-one term from per-mode sparse vectors of polynomials.
    pub fn rank_one(mode_dims: &[usize], vectors: &[Vec<(u32, EpsPoly)>]) -> EpsilonPolyTensor {
        let mut stack: Vec<(Vec<u32>, EpsPoly)> =
            vec![(Vec::new(), EpsPoly::monomial(0, Rat::one()))];
        for vector in vectors {
            let mut next = Vec::new();
            for (k, c) in &stack {
                for (i, p) in vector {
                    let prod = c.mul(p);
                    if prod.is_zero() {
                        continue;
                    }
                    let mut nk = k.clone();
                    nk.push(*i);
                    next.push((nk, prod));
                }
            }
            stack = next;
        }
        let mut out = EpsilonPolyTensor::new(mode_dims.to_vec());
        for (k, p) in stack {
            out.add_to(k, p);
        }
        out
    }

    pub fn add(&mut self, other: &EpsilonPolyTensor) {
        for (k, p) in &other.coeffs {
            self.add_to(k.clone(), p.clone());
        }
    }

    /// Extracts the tensor of coefficients at one degree.
    pub fn degree_slice(&self, degree: usize) -> SparseTensor {
        let mut out = SparseTensor::new(self.mode_dims.clone());
        for (k, p) in &self.coeffs {
            out.add_to(k.clone(), p.coeff(degree));
        }
        out
    }

    pub fn any_truncated(&self) -> bool {
        self.coeffs.values().any(|p| p.truncated)
    }
}

/// Result of checking the rank-(q+2) border-rank degeneration of the big CW
/// tensor.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CwDegenerationReport {
    pub q: usize,
    pub k: usize,
    /// Whether the coefficient of each degree 0..=4 vanishes identically.
    pub low_orders_vanish: [bool; 5],
    /// Whether the degree-5 coefficient equals the big CW tensor exactly.
    pub eps5_matches: bool,
    /// True when terms of degree 6 and above were present (reported, not
    /// constrained).
    pub has_tail: bool,
    pub pass: bool,
}

/// Builds the (q+2)-term rank-one sum whose degree-5 coefficient is the big
/// CW tensor and checks it exactly.
pub fn cw_degeneration_check(q: usize, k: usize) -> Result<CwDegenerationReport> {
    let target = cw_tensor(q, k, true)?;
    let dims = vec![q + 2; k];
    let one = || EpsPoly::monomial(0, Rat::one());

    let mut total = EpsilonPolyTensor::new(dims.clone());
    // sum_i eps * prod_u (x_0 + eps^2 x_i)
    for i in 1..=q {
        let vector: Vec<(u32, EpsPoly)> =
            vec![(0, one()), (i as u32, EpsPoly::monomial(2, Rat::one()))];
        let mut term =
            EpsilonPolyTensor::rank_one(&dims, &vec![vector; k]);
        let scale = EpsPoly::monomial(1, Rat::one());
        for p in term.coeffs.values_mut() {
            *p = p.mul(&scale);
        }
        total.add(&term);
    }
    // - prod_u (x_0 + eps^3 sum_i x_i)
    {
        let mut vector: Vec<(u32, EpsPoly)> = vec![(0, one())];
        for i in 1..=q {
            vector.push((i as u32, EpsPoly::monomial(3, Rat::one())));
        }
        let mut term = EpsilonPolyTensor::rank_one(&dims, &vec![vector; k]);
        for p in term.coeffs.values_mut() {
            *p = p.mul(&EpsPoly::monomial(0, -Rat::one()));
        }
        total.add(&term);
    }
    // (1 - q eps) * prod_u (x_0 + eps^5 x_{q+1})
    {
        let vector: Vec<(u32, EpsPoly)> =
            vec![(0, one()), ((q + 1) as u32, EpsPoly::monomial(5, Rat::one()))];
        let mut term = EpsilonPolyTensor::rank_one(&dims, &vec![vector; k]);
        let factor = EpsPoly {
            coeffs: vec![Rat::one(), -Rat::from_integer(BigInt::from(q as i64))],
            truncated: false,
        };
        for p in term.coeffs.values_mut() {
            *p = p.mul(&factor);
        }
        total.add(&term);
    }

    let mut low_orders_vanish = [false; 5];
    for (d, flag) in low_orders_vanish.iter_mut().enumerate() {
        *flag = total.degree_slice(d).nnz() == 0;
    }
    let eps5_matches = total.degree_slice(5) == target;
    let has_tail = total.any_truncated();
    let pass = low_orders_vanish.iter().all(|&b| b) && eps5_matches;
    Ok(CwDegenerationReport { q, k, low_orders_vanish, eps5_matches, has_tail, pass })
}

// ---------------------------------------------------------------------------
// Text format: header `t <numModes>` and `m <dims…>`, then
// `<i_1> … <i_d> <num>/<den>` per entry (indices 1-based).
// ---------------------------------------------------------------------------

pub fn write_tensor(t: &SparseTensor) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "t {}", t.num_modes());
    let dims: Vec<String> = t.mode_dims.iter().map(|d| d.to_string()).collect();
    let _ = writeln!(out, "m {}", dims.join(" "));
    for (k, c) in t.entries() {
        let idx: Vec<String> = k.iter().map(|i| (i + 1).to_string()).collect();
        let _ = writeln!(out, "{} {}", idx.join(" "), fmt_rat_slash(c));
    }
    out
}

pub fn parse_tensor(text: &str) -> Result<SparseTensor> {
    let mut dims: Option<Vec<usize>> = None;
    let mut modes: Option<usize> = None;
    let mut tensor: Option<SparseTensor> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[0] {
            "t" => {
                modes = Some(fields.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| {
                    Error::Parse(format!("line {}: bad mode count", lineno + 1))
                })?);
            }
            "m" => {
                let d: std::result::Result<Vec<usize>, _> =
                    fields[1..].iter().map(|s| s.parse()).collect();
                let d = d.map_err(|_| Error::Parse(format!("line {}: bad dims", lineno + 1)))?;
                if Some(d.len()) != modes {
                    return Err(Error::Parse(format!(
                        "line {}: dim count does not match mode count",
                        lineno + 1
                    )));
                }
                tensor = Some(SparseTensor::new(d.clone()));
                dims = Some(d);
            }
            _ => {
                let d = dims
                    .as_ref()
                    .ok_or_else(|| Error::Parse("entry before header".into()))?;
                if fields.len() != d.len() + 1 {
                    return Err(Error::Parse(format!("line {}: bad entry arity", lineno + 1)));
                }
                let mut key = Vec::with_capacity(d.len());
                for (i, f) in fields[..d.len()].iter().enumerate() {
                    let idx: usize = f
                        .parse()
                        .map_err(|_| Error::Parse(format!("line {}: bad index", lineno + 1)))?;
                    if idx == 0 || idx > d[i] {
                        return Err(Error::Parse(format!(
                            "line {}: index {} out of range for mode {}",
                            lineno + 1,
                            idx,
                            i
                        )));
                    }
                    key.push((idx - 1) as u32);
                }
                let c = parse_rat(fields[d.len()])?;
                tensor.as_mut().unwrap().add_to(key, c);
            }
        }
    }
    tensor.ok_or_else(|| Error::Parse("missing tensor header".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs;
    use crate::util::{rat, rat_int};

    #[test]
    fn graph_tensor_single_edge_is_identity_matrix() {
        let g = graphs::path(1).unwrap();
        for n in [2usize, 3, 5] {
            let t = graph_tensor(&g, n).unwrap();
            assert_eq!(t.mode_dims(), &[n, n]);
            assert_eq!(t.nnz(), n);
            for i in 0..n as u32 {
                assert_eq!(t.get(&[i, i]), rat_int(1));
            }
        }
    }

    #[test]
    fn graph_tensor_counts_and_limit() {
        let k3 = graphs::clique(3).unwrap();
        let t = graph_tensor(&k3, 2).unwrap();
        assert_eq!(t.nnz(), 8); // n^|E|
        assert!(t.entries().all(|(_, c)| c.is_one()));
        let err = graph_tensor_with_limit(&k3, 2, 4).unwrap_err();
        assert!(err.to_string().contains("limit is 4"), "{err}");
    }

    #[test]
    fn triangle_tensor_evaluates_to_matrix_product_trace() {
        // T_{K_3,2} with matrix-encoded inputs equals trace(A·B·C).
        let k3 = graphs::clique(3).unwrap();
        let t = graph_tensor(&k3, 2).unwrap();
        let a = [[rat(1, 1), rat(2, 1)], [rat(-1, 2), rat(3, 1)]];
        let b = [[rat(2, 1), rat(0, 1)], [rat(1, 3), rat(1, 1)]];
        let c = [[rat(1, 1), rat(-1, 1)], [rat(4, 1), rat(1, 2)]];
        // mode 1 sees edges (e12,e13) = (a,b); mode 2 sees (e12,e23) = (a,c);
        // mode 3 sees (e13,e23) = (b,c). Pick X1=A, X2[a,c]=C[c][a], X3[b,c]=B[b][c].
        // encoding: idx = d0 + 2*d1 over (first incident edge, second)
        let pack = |f: &dyn Fn(usize, usize) -> Rat| -> Vec<Rat> {
            (0..4).map(|idx| f(idx % 2, idx / 2)).collect()
        };
        let x1 = pack(&|i, j| a[i][j].clone());
        let x2 = pack(&|i, j| c[j][i].clone());
        let x3 = pack(&|i, j| b[i][j].clone());
        let got = t.evaluate(&[x1, x2, x3]).unwrap();

        let mut trace = Rat::zero();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    trace += &a[i][j] * &b[j][k] * &c[k][i];
                }
            }
        }
        assert_eq!(got, trace);
    }

    #[test]
    fn all_ones_evaluation_counts_assignments() {
        let g = graphs::grid(2, 2).unwrap();
        let t = graph_tensor(&g, 3).unwrap();
        let inputs: Vec<Vec<Rat>> =
            t.mode_dims().iter().map(|&d| vec![rat_int(1); d]).collect();
        assert_eq!(t.evaluate(&inputs).unwrap(), rat_int(81)); // 3^4
        // standard basis inputs pick a single coefficient
        let mut basis: Vec<Vec<Rat>> =
            t.mode_dims().iter().map(|&d| vec![rat_int(0); d]).collect();
        let (key, _) = t.entries().next().unwrap();
        let key = key.clone();
        for (m, &i) in key.iter().enumerate() {
            basis[m][i as usize] = rat_int(1);
        }
        assert_eq!(t.evaluate(&basis).unwrap(), rat_int(1));
    }

    #[test]
    fn kronecker_unit_and_mismatch() {
        let g = graphs::clique(3).unwrap();
        let t = graph_tensor(&g, 2).unwrap();
        let mut unit = SparseTensor::new(vec![1, 1, 1]);
        unit.add_to(vec![0, 0, 0], rat_int(1));
        let re = kronecker(&t, &unit).unwrap();
        assert_eq!(re.nnz(), t.nnz());
        assert_eq!(re.mode_dims(), t.mode_dims());
        let two_modes = SparseTensor::new(vec![1, 1]);
        assert!(kronecker(&t, &two_modes).is_err());
    }

    #[test]
    fn product_reindexing_matches_sum_graph() {
        // product-rule check for G = H = K_3 at n = 2, coefficient-exact
        let g = graphs::clique(3).unwrap();
        let tg = graph_tensor(&g, 2).unwrap();
        let kron = kronecker(&tg, &tg).unwrap();
        let tables = canonical_reindex_product(&g, &g, 2).unwrap();
        let sum = g.sum(&g);
        let target = graph_tensor(&sum, 2).unwrap();
        let re = apply_reindexing(&kron, &tables, target.mode_dims().to_vec());
        assert_eq!(re, target);
    }

    #[test]
    fn length_reindexing_matches_larger_alphabet() {
        let g = graphs::cycle(4).unwrap();
        let t2 = graph_tensor(&g, 2).unwrap();
        let kron = kronecker(&t2, &t2).unwrap();
        let tables = canonical_reindex_length(&g, 2, 2);
        let target = graph_tensor(&g, 4).unwrap();
        let re = apply_reindexing(&kron, &tables, target.mode_dims().to_vec());
        assert_eq!(re, target);
    }

    #[test]
    fn power_reindexing_matches_sum_rule() {
        for (g, k, n) in [
            (graphs::path(1).unwrap(), 2usize, 2usize),
            (graphs::clique(3).unwrap(), 2, 2),
            (graphs::path(2).unwrap(), 3, 2),
        ] {
            let kg = g.repeat(k);
            let t = graph_tensor(&kg, n).unwrap();
            let tables = canonical_reindex_power(&g, k, n);
            let target = graph_tensor(&g, n.pow(k as u32)).unwrap();
            let re = apply_reindexing(&t, &tables, target.mode_dims().to_vec());
            assert_eq!(re, target);
        }
    }

    #[test]
    fn flattening_ranks() {
        // matching flattening rank is n^k on the one-side modes
        for (k, n) in [(1usize, 2usize), (1, 3), (2, 2), (2, 3)] {
            let g = graphs::matching(k).unwrap();
            let t = graph_tensor(&g, n).unwrap();
            let rows: BTreeSet<usize> = (0..2 * k).filter(|m| m % 2 == 0).collect();
            assert_eq!(flattening_rank(&t, &rows).unwrap(), n.pow(k as u32));
        }
        // rank-one tensor flattens to rank 1
        let r1 = rank_one(&[
            vec![rat_int(1), rat_int(2)],
            vec![rat_int(3), rat_int(5)],
            vec![rat_int(1), rat_int(-1)],
        ]);
        assert_eq!(flattening_rank(&r1, &BTreeSet::from([0])).unwrap(), 1);
        assert_eq!(flattening_rank(&r1, &BTreeSet::from([0, 2])).unwrap(), 1);
        // conciseness of T_{K_3,2}: the 4x16 flattening has full rank 4
        let t = graph_tensor(&graphs::clique(3).unwrap(), 2).unwrap();
        assert_eq!(flattening_rank(&t, &BTreeSet::from([0])).unwrap(), 4);
    }

    #[test]
    fn bareiss_rank_matches_rational_elimination_oracle() {
        use rand::{Rng, SeedableRng};
        // independent oracle: plain rational Gaussian elimination
        fn rational_rank(t: &SparseTensor, rows: &BTreeSet<usize>) -> usize {
            let row_list: Vec<usize> = rows.iter().copied().collect();
            let col_modes: Vec<usize> =
                (0..t.num_modes()).filter(|m| !rows.contains(m)).collect();
            let pack = |key: &[u32], modes: &[usize]| -> usize {
                let mut idx = 0usize;
                for &m in modes.iter().rev() {
                    idx = idx * t.mode_dims()[m] + key[m] as usize;
                }
                idx
            };
            let nrows: usize = row_list.iter().map(|&m| t.mode_dims()[m]).product();
            let ncols: usize = col_modes.iter().map(|&m| t.mode_dims()[m]).product();
            let mut mat = vec![vec![Rat::zero(); ncols]; nrows];
            for (key, c) in t.entries() {
                mat[pack(key, &row_list)][pack(key, &col_modes)] = c.clone();
            }
            let mut rank = 0;
            for col in 0..ncols {
                let Some(p) = (rank..nrows).find(|&r| !mat[r][col].is_zero()) else { continue };
                mat.swap(rank, p);
                let pivot = mat[rank][col].clone();
                for r in 0..nrows {
                    if r == rank || mat[r][col].is_zero() {
                        continue;
                    }
                    let f = &mat[r][col] / &pivot;
                    for cc in col..ncols {
                        let delta = &mat[rank][cc] * &f;
                        mat[r][cc] -= delta;
                    }
                }
                rank += 1;
                if rank == nrows {
                    break;
                }
            }
            rank
        }

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let d = rng.gen_range(2..=4usize);
            let dims: Vec<usize> = (0..d).map(|_| rng.gen_range(2..=3usize)).collect();
            let mut t = SparseTensor::new(dims.clone());
            let total: usize = dims.iter().product();
            for _ in 0..rng.gen_range(1..=total) {
                let key: Vec<u32> =
                    dims.iter().map(|&m| rng.gen_range(0..m) as u32).collect();
                t.add_to(key, rat(rng.gen_range(-3i64..=3), rng.gen_range(1i64..=2)));
            }
            let rows: BTreeSet<usize> =
                (0..d).filter(|_| rng.gen_bool(0.5)).collect();
            let rows = if rows.is_empty() || rows.len() == d {
                BTreeSet::from([0])
            } else {
                rows
            };
            assert_eq!(
                flattening_rank(&t, &rows).unwrap(),
                rational_rank(&t, &rows),
                "tensor {t:?} rows {rows:?}"
            );
        }
    }

    #[test]
    fn graph_tensors_are_concise() {
        for g in [
            graphs::clique(3).unwrap(),
            graphs::clique(4).unwrap(),
            graphs::grid(2, 2).unwrap(),
            graphs::star(4, 2).unwrap(),
        ] {
            for n in [2usize, 3] {
                if n.pow(g.num_edges() as u32) > 1 << 16 {
                    continue;
                }
                let t = graph_tensor(&g, n).unwrap();
                for mode in 0..t.num_modes() {
                    let rank =
                        flattening_rank_with_limit(&t, &BTreeSet::from([mode]), 1 << 16).unwrap();
                    assert_eq!(rank, t.mode_dims()[mode], "mode {mode} of {g:?} not concise");
                }
            }
        }
    }

    #[test]
    fn subgraph_projection_is_exact() {
        // K_4 -> K_3 at n = 2
        let k4 = graphs::clique(4).unwrap();
        let keep_v: BTreeSet<usize> = [1, 2, 3].into();
        let keep_e: BTreeSet<usize> = k4
            .edges()
            .iter()
            .filter(|e| e.u <= 3 && e.v <= 3)
            .map(|e| e.id)
            .collect();
        let (subst, h) = project_subgraph(&k4, &keep_v, &keep_e, 2).unwrap();
        let projected = subst.apply(&graph_tensor(&k4, 2).unwrap());
        assert_eq!(projected, graph_tensor(&h, 2).unwrap());
        // invalid: edge leaving the kept set
        assert!(project_subgraph(&k4, &[1, 2].into(), &[2].into(), 2).is_err());
    }

    #[test]
    fn length_projection() {
        let g = graphs::clique(3).unwrap();
        let t3 = graph_tensor(&g, 3).unwrap();
        let subst = project_length(&g, 3, 2).unwrap();
        assert_eq!(subst.apply(&t3), graph_tensor(&g, 2).unwrap());
        // identity case
        let id = project_length(&g, 3, 3).unwrap();
        assert_eq!(id.apply(&t3), t3);
        assert!(project_length(&g, 2, 3).is_err());
    }

    #[test]
    fn subdivision_projection_c4_to_c3() {
        let c4 = graphs::cycle(4).unwrap();
        // vertex 4 subdivides the edge 3–1; its edges are (3,4) and (4,1)
        let e34 = c4.edges().iter().find(|e| e.u == 3 && e.v == 4).unwrap().id;
        let e41 = c4.edges().iter().find(|e| e.u == 4 && e.v == 1).unwrap().id;
        let (subst, h) =
            project_subdivision(&c4, SubdivisionWitness { w: 4, e_uw: e34, e_vw: e41 }, 2)
                .unwrap();
        let projected = subst.apply(&graph_tensor(&c4, 2).unwrap());
        assert_eq!(projected, graph_tensor(&h, 2).unwrap());
        assert!(graphs::find_isomorphism(&h, &graphs::clique(3).unwrap()).unwrap().is_some());
    }

    #[test]
    fn star_restriction_round_trips() {
        // GHZ / unit tensor, center 3
        let mut ghz = SparseTensor::new(vec![2, 2, 2]);
        ghz.add_to(vec![0, 0, 0], rat_int(1));
        ghz.add_to(vec![1, 1, 1], rat_int(1));
        check_star_round_trip(&ghz, 3);

        // random 3-mode tensor over dims 2
        let mut t = SparseTensor::new(vec![2, 2, 2]);
        let mut seed = 11u64;
        for i in 0..2u32 {
            for j in 0..2u32 {
                for k in 0..2u32 {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    t.add_to(vec![i, j, k], rat_int((seed >> 33) as i64 % 7 - 3));
                }
            }
        }
        for center in 1..=3 {
            check_star_round_trip(&t, center);
        }

        // T_{K_3,2} viewed as a generic 3-mode tensor over dims 4
        let k3 = graph_tensor(&graphs::clique(3).unwrap(), 2).unwrap();
        check_star_round_trip(&k3, 1);
    }

    fn check_star_round_trip(t: &SparseTensor, center: usize) {
        let d = t.num_modes();
        let n = t.mode_dims()[0];
        let subst = star_restriction(t, center).unwrap();
        let star = graphs::star(d, center).unwrap();
        let st = graph_tensor(&star, n).unwrap();
        assert_eq!(&subst.apply(&st), t, "round trip failed for center {center}");
    }

    #[test]
    fn contract_modes_agrees_with_kronecker() {
        // u random 3-mode dim 2, h random dim 2: both routes must agree.
        let mut u = SparseTensor::new(vec![2, 2, 2]);
        let vals = [3, -1, 2, 5, 0, 4, -2, 1];
        for (i, v) in vals.iter().enumerate() {
            u.add_to(
                vec![(i & 1) as u32, ((i >> 1) & 1) as u32, ((i >> 2) & 1) as u32],
                rat_int(*v),
            );
        }
        let h = vec![
            vec![rat(1, 2), rat(3, 1)],
            vec![rat(-1, 1), rat(2, 1)],
            vec![rat(1, 1), rat(1, 3)],
        ];
        let via_subst = contract_modes(&u, &h).unwrap();
        let via_kron = kronecker(&u, &rank_one(&h)).unwrap();
        assert_eq!(via_subst, via_kron);

        // standard basis vectors pick the (.,0,.) slice structure
        let basis = vec![
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(1), rat_int(0)],
            vec![rat_int(1), rat_int(0)],
        ];
        let picked = contract_modes(&u, &basis).unwrap();
        assert_eq!(picked.nnz(), u.nnz());

        // all-ones against the matrix multiplication tensor sums slices
        let mm = graph_tensor(&graphs::clique(3).unwrap(), 2).unwrap();
        let ones = vec![vec![rat_int(1)]; 3];
        let summed = contract_modes(&mm, &ones).unwrap();
        assert_eq!(summed, mm);
    }

    #[test]
    fn cw_support_sizes() {
        assert_eq!(cw_tensor(2, 3, false).unwrap().nnz(), 6);
        assert_eq!(cw_tensor(2, 3, true).unwrap().nnz(), 9);
        assert_eq!(cw_tensor(3, 4, false).unwrap().nnz(), 18);
        assert_eq!(cw_tensor(3, 4, true).unwrap().nnz(), 22);
        assert!(cw_tensor(1, 3, false).is_err());
    }

    #[test]
    fn cw_degeneration_small_cases() {
        for (q, k) in [(2usize, 3usize), (2, 4), (3, 3), (3, 4)] {
            let report = cw_degeneration_check(q, k).unwrap();
            assert!(report.pass, "degeneration failed for q={q}, k={k}: {report:?}");
            assert!(report.has_tail, "tail of higher-order terms expected");
        }
    }

    #[test]
    fn tensor_format_round_trip() {
        let t = graph_tensor(&graphs::clique(3).unwrap(), 2).unwrap();
        let text = write_tensor(&t);
        assert_eq!(parse_tensor(&text).unwrap(), t);
        assert!(parse_tensor("1 2 3").is_err());
    }
}
