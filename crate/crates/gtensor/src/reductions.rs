//! Executable hardness reductions: the permanent as a projection of a grid
//! graph tensor, and the hyperclique tensor as a projection of its
//! incidence-graph tensor. Both come with independent oracles.
//!
//! The permanent reduction instantiates per-vertex signatures on the
//! `(n+2)×(n+2)` grid at length 2. Interior vertices read their four edges
//! clockwise from the top as `(t, r, b, l)` and evaluate to 1 on a straight
//! pass-through (`t = b` and `l = r`), to the matrix entry on a flip
//! (`t = l = 0`, `r = b = 1`) and to 0 otherwise; borders pin the first edge
//! of every path to 0 and the last to 1, and corners are all-ones. Each
//! nonzero assignment then flips exactly once per row and column, the flip
//! positions form a permutation matrix, and the weighted count is the
//! permanent.


use num::{BigInt, One, Zero};

use crate::circuits::{treedec_circuit, Circuit, TreedecReport};
use crate::graphs::{self, FractionalGraph, VertexId};
use crate::tensors::{graph_tensor, ModeSubst, SparseTensor, Substitution};
use crate::treewidth;
use crate::util::{digits, Rat};
use crate::{Error, Result};

/// Size guard for the grid-based permanent evaluation.
pub const PERMANENT_MAX_N: usize = 6;

/// Positions of a vertex's incident edges by direction, as offsets into its
/// sorted incident edge list.
#[derive(Debug, Clone, Copy, Default)]
struct Slots {
    top: Option<usize>,
    right: Option<usize>,
    bottom: Option<usize>,
    left: Option<usize>,
}

/// Reusable evaluator: the circuit depends only on `n`, so one construction
/// serves any number of matrices.
pub struct PermanentEvaluator {
    n: usize,
    grid: FractionalGraph,
    circuit: Circuit,
    report: TreedecReport,
    slots: Vec<Slots>,
    side: usize,
}

/// Summary of the constructed evaluation plan.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PermanentPlan {
    pub n: usize,
    pub grid_side: usize,
    pub line_treewidth_used: i64,
    pub circuit_wires: usize,
}

impl PermanentEvaluator {
    pub fn new(n: usize) -> Result<PermanentEvaluator> {
        if n == 0 || n > PERMANENT_MAX_N {
            return Err(Error::SizeLimit(format!(
                "permanent reduction supports 1 <= n <= {PERMANENT_MAX_N}, got {n}"
            )));
        }
        let side = n + 2;
        let grid = graphs::grid(side, side)?;
        let line = grid.line_graph()?;
        // Decomposition of the line graph: take the better of greedy
        // minimum-fill and the row-sweep edge order (edge ids are generated
        // in a row-major interleaved sweep, which keeps the frontier small).
        let td_fill = treewidth::min_fill_decomposition(&line);
        let td_sweep =
            treewidth::decomposition_from_vertex_order(&line, line.vertices())?;
        let td = if td_fill.width() <= td_sweep.width() { td_fill } else { td_sweep };
        let (circuit, report) = treedec_circuit(&grid, 2, &td)?;

        // direction slots per vertex
        let mut slots = vec![Slots::default(); grid.num_vertices()];
        let coord = |v: VertexId| -> (usize, usize) { ((v - 1) / side + 1, (v - 1) % side + 1) };
        for (vp, &v) in grid.vertices().iter().enumerate() {
            let (i, j) = coord(v);
            for (pos, &e) in grid.incident(v).iter().enumerate() {
                let other = grid.edges()[e].other(v);
                let (oi, oj) = coord(other);
                let slot = &mut slots[vp];
                if oi + 1 == i {
                    slot.top = Some(pos);
                } else if oi == i + 1 {
                    slot.bottom = Some(pos);
                } else if oj + 1 == j {
                    slot.left = Some(pos);
                } else {
                    slot.right = Some(pos);
                }
            }
        }
        Ok(PermanentEvaluator { n, grid, circuit, report, slots, side })
    }

    pub fn plan(&self) -> PermanentPlan {
        PermanentPlan {
            n: self.n,
            grid_side: self.side,
            line_treewidth_used: self.report.width,
            circuit_wires: self.report.total_wires,
        }
    }

    /// Signature value of vertex position `vp` under the given local edge
    /// assignment (digits in incident-edge order), with matrix entries from
    /// `a` (indexed by matrix coordinates 1..n).
    fn signature(&self, vp: usize, local: &[usize], a: &[Vec<BigInt>]) -> BigInt {
        let side = self.side;
        let v = self.grid.vertices()[vp];
        let (i, j) = ((v - 1) / side + 1, (v - 1) % side + 1);
        let s = &self.slots[vp];
        let get = |slot: Option<usize>| slot.map(|p| local[p]);
        let (t, r, b, l) = (get(s.top), get(s.right), get(s.bottom), get(s.left));
        let interior = (2..=side - 1).contains(&i) && (2..=side - 1).contains(&j);
        let corner = (i == 1 || i == side) && (j == 1 || j == side);
        if corner {
            return BigInt::one();
        }
        if interior {
            let (t, r, b, l) = (t.unwrap(), r.unwrap(), b.unwrap(), l.unwrap());
            if t == b && l == r {
                return BigInt::one();
            }
            if t == 0 && l == 0 && r == 1 && b == 1 {
                // flip at matrix position (i-1, j-1)
                return a[i - 2][j - 2].clone();
            }
            return BigInt::zero();
        }
        // borders: top row pins everything to 0, bottom row to 1, left
        // column to 0, right column to 1
        let (want, values) = if i == 1 {
            (0, [r, b, l])
        } else if i == side {
            (1, [t, r, l])
        } else if j == 1 {
            (0, [t, r, b])
        } else {
            (1, [t, b, l])
        };
        if values.iter().all(|x| x == &Some(want)) {
            BigInt::one()
        } else {
            BigInt::zero()
        }
    }

    /// Input vectors for the multilinear form from a matrix.
    fn inputs(&self, a: &[Vec<BigInt>]) -> Vec<Vec<Rat>> {
        let mut out = Vec::with_capacity(self.grid.num_vertices());
        for (vp, &v) in self.grid.vertices().iter().enumerate() {
            let deg = self.grid.degree(v);
            let dim = 1usize << deg;
            let mut vector = Vec::with_capacity(dim);
            for idx in 0..dim {
                let local = digits(idx, 2, deg);
                vector.push(Rat::from_integer(self.signature(vp, &local, a)));
            }
            out.push(vector);
        }
        out
    }

    /// Evaluates the Holant through the generated circuit; the result is the
    /// permanent of `a`.
    pub fn permanent(&self, a: &[Vec<BigInt>]) -> Result<BigInt> {
        if a.len() != self.n || a.iter().any(|row| row.len() != self.n) {
            return Err(Error::InvalidArgument(format!(
                "matrix must be {0}x{0}",
                self.n
            )));
        }
        let value = self.circuit.evaluate_scalar(&self.inputs(a))?;
        if !value.denom().is_one() {
            return Err(Error::InvalidArgument("non-integral Holant value".into()));
        }
        Ok(value.to_integer())
    }
}

/// Builds the grid evaluation plan for `a` and returns it with the permanent
/// value.
pub fn permanent_reduction(a: &[Vec<BigInt>]) -> Result<(PermanentPlan, BigInt)> {
    let ev = PermanentEvaluator::new(a.len())?;
    let value = ev.permanent(a)?;
    Ok((ev.plan(), value))
}

/// Inclusion–exclusion permanent, the independent oracle.
pub fn permanent_ryser(a: &[Vec<BigInt>]) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut total = BigInt::zero();
    for mask in 1u32..(1 << n) {
        let mut prod = BigInt::one();
        for row in a {
            let mut s = BigInt::zero();
            for (j, v) in row.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    s += v;
                }
            }
            prod *= s;
        }
        if (n as u32 - mask.count_ones()) % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    total
}

/// Report of the exhaustive 2^24-assignment Holant sum on the 4×4 grid.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BruteforceReport {
    pub holant: String,
    /// Every nonzero assignment had exactly `n` flip vertices forming a
    /// permutation matrix.
    pub flip_invariant_ok: bool,
    pub nonzero_assignments: u64,
    pub matches_circuit: bool,
    pub matches_ryser: bool,
}

/// Confirms the `n = 2` reduction by summing over all `2^24` edge
/// assignments directly, checking the flip-vertex invariant along the way.
pub fn permanent_bruteforce_check(a: &[Vec<BigInt>]) -> Result<BruteforceReport> {
    let n = a.len();
    if n != 2 {
        return Err(Error::SizeLimit("the exhaustive check is fixed to n = 2".into()));
    }
    let ev = PermanentEvaluator::new(n)?;
    let m = ev.grid.num_edges();
    debug_assert_eq!(m, 24);

    // small-integer signature tables per vertex
    let mut tables: Vec<Vec<i64>> = Vec::new();
    let mut incidents: Vec<Vec<usize>> = Vec::new();
    for (vp, &v) in ev.grid.vertices().iter().enumerate() {
        let inc = ev.grid.incident(v);
        let deg = inc.len();
        let table: Vec<i64> = (0..1usize << deg)
            .map(|idx| {
                let local = digits(idx, 2, deg);
                let s = ev.signature(vp, &local, a);
                i64::try_from(&s).expect("entries fit i64")
            })
            .collect();
        tables.push(table);
        incidents.push(inc);
    }
    // interior flip detection: vertex is in flip state iff its signature
    // slot pattern is (t,l)=(0,0),(r,b)=(1,1)
    let side = ev.side;
    let coord = |v: VertexId| ((v - 1) / side + 1, (v - 1) % side + 1);
    let interior: Vec<usize> = ev
        .grid
        .vertices()
        .iter()
        .enumerate()
        .filter(|(_, &v)| {
            let (i, j) = coord(v);
            (2..=side - 1).contains(&i) && (2..=side - 1).contains(&j)
        })
        .map(|(vp, _)| vp)
        .collect();

    let mut total: i128 = 0;
    let mut nonzero = 0u64;
    let mut flip_ok = true;
    'outer: for f in 0u32..(1 << m) {
        let mut weight: i128 = 1;
        for (vp, inc) in incidents.iter().enumerate() {
            let mut idx = 0usize;
            for (pos, &e) in inc.iter().enumerate() {
                idx |= (((f >> e) & 1) as usize) << pos;
            }
            let s = tables[vp][idx];
            if s == 0 {
                continue 'outer;
            }
            weight *= s as i128;
        }
        nonzero += 1;
        total += weight;
        // flip invariant: exactly n interior flips forming a permutation
        let mut rows = [false; 2];
        let mut cols = [false; 2];
        let mut flips = 0usize;
        for &vp in &interior {
            let s = &ev.slots[vp];
            let inc = &incidents[vp];
            let bit = |slot: Option<usize>| (f >> inc[slot.unwrap()]) & 1;
            if bit(s.top) == 0 && bit(s.left) == 0 && bit(s.right) == 1 && bit(s.bottom) == 1 {
                flips += 1;
                let v = ev.grid.vertices()[vp];
                let (i, j) = coord(v);
                rows[i - 2] = true;
                cols[j - 2] = true;
            }
        }
        if flips != n || !rows.iter().all(|&r| r) || !cols.iter().all(|&c| c) {
            flip_ok = false;
        }
    }

    let circuit_value = ev.permanent(a)?;
    let ryser = permanent_ryser(a);
    Ok(BruteforceReport {
        holant: total.to_string(),
        flip_invariant_ok: flip_ok,
        nonzero_assignments: nonzero,
        matches_circuit: BigInt::from(total) == circuit_value,
        matches_ryser: BigInt::from(total) == ryser,
    })
}

// ---------------------------------------------------------------------------
// Hyperclique tensors.
// ---------------------------------------------------------------------------

/// The hyperclique tensor on `C(k,h)` modes of dimension `N^h`: one monomial
/// per map `f: [k] → [N]`, each mode indexed by the restriction of `f` to
/// its `h`-subset (subsets in lexicographic order, elements ascending).
pub fn hyperclique_tensor(h: usize, k: usize, n_dim: usize) -> Result<SparseTensor> {
    if h == 0 || h >= k {
        return Err(Error::InvalidArgument("need 1 <= h < k".into()));
    }
    if n_dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let subsets = graphs::subsets_lex(k, h);
    let dim = n_dim.pow(h as u32);
    if (dim as f64).powi(subsets.len() as i32) > crate::tensors::DEFAULT_NONZERO_LIMIT as f64 {
        return Err(Error::SizeLimit("hyperclique tensor too large".into()));
    }
    let mut t = SparseTensor::new(vec![dim; subsets.len()]);
    for f in 0..n_dim.pow(k as u32) {
        let values = digits(f, n_dim, k);
        let key: Vec<u32> = subsets
            .iter()
            .map(|s| {
                let mut idx = 0u32;
                for &v in s.iter().rev() {
                    idx = idx * n_dim as u32 + values[v - 1] as u32;
                }
                idx
            })
            .collect();
        t.add_to(key, Rat::one());
    }
    Ok(t)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct HypercliqueProjectionReport {
    pub n_dim: usize,
    pub incidence_nonzeros: usize,
    pub target_nonzeros: usize,
    pub pass: bool,
}

/// Checks that the `(3,4)` hyperclique tensor is the stated linear
/// projection of the incidence-graph tensor: vertex-side modes collapse to
/// diagonal indicators, hyperedge-side modes relabel their incident-edge
/// digits into subset-element order.
pub fn hyperclique_projection_check(n_dim: usize) -> Result<HypercliqueProjectionReport> {
    if n_dim == 0 || n_dim > 2 {
        return Err(Error::SizeLimit(
            "the projection check is sized for N in {1, 2} (2^12 nonzeros at N = 2)".into(),
        ));
    }
    let (h, k) = (3usize, 4usize);
    let incidence = graphs::hyperclique_incidence(h, k)?;
    let t_i = graph_tensor(&incidence, n_dim)?;
    let subsets = graphs::subsets_lex(k, h);

    let mut modes = Vec::new();
    for &v in incidence.vertices().iter() {
        let inc = incidence.incident(v);
        let dim = n_dim.pow(inc.len() as u32);
        if v <= k {
            // vertex side: indicator of a constant local assignment
            let scalars = (0..dim)
                .map(|idx| {
                    let d = digits(idx, n_dim, inc.len());
                    if d.iter().all(|&x| x == d[0]) {
                        Rat::one()
                    } else {
                        Rat::zero()
                    }
                })
                .collect();
            modes.push(ModeSubst::Drop(scalars));
            continue;
        }
        // hyperedge side: digits arrive in edge-id order; re-emit them in
        // subset-element order
        let s = &subsets[v - k - 1];
        let element_of_edge: Vec<usize> = inc
            .iter()
            .map(|&e| {
                let other = incidence.edges()[e].other(v);
                s.iter().position(|&x| x == other).expect("edge endpoint lies in the subset")
            })
            .collect();
        let table = (0..dim)
            .map(|idx| {
                let d = digits(idx, n_dim, inc.len());
                let mut by_element = vec![0usize; h];
                for (pos, &el) in element_of_edge.iter().enumerate() {
                    by_element[el] = d[pos];
                }
                Some((crate::util::undigits(&by_element, n_dim) as u32, Rat::one()))
            })
            .collect();
        modes.push(ModeSubst::Map { new_dim: dim, table });
    }
    let projected = Substitution { modes }.apply(&t_i);
    let target = hyperclique_tensor(h, k, n_dim)?;
    Ok(HypercliqueProjectionReport {
        n_dim,
        incidence_nonzeros: t_i.nnz(),
        target_nonzeros: target.nnz(),
        pass: projected == target,
    })
}

/// Number of ordered 4-tuples of distinct vertices forming a 4-hyperclique,
/// via evaluation of the tensor at 0/1 indicator inputs.
pub fn count_hypercliques_34(
    n_vertices: usize,
    hyperedges: &[Vec<usize>],
) -> Result<(BigInt, BigInt)> {
    let t = hyperclique_tensor(3, 4, n_vertices)?;
    let edge_set: std::collections::BTreeSet<Vec<usize>> = hyperedges
        .iter()
        .map(|e| {
            let mut s = e.clone();
            s.sort_unstable();
            s
        })
        .collect();
    let dim = n_vertices.pow(3);
    let indicator: Vec<Rat> = (0..dim)
        .map(|idx| {
            let d = digits(idx, n_vertices, 3);
            let mut s: Vec<usize> = d.iter().map(|&x| x + 1).collect();
            s.sort_unstable();
            if s[0] != s[1] && s[1] != s[2] && edge_set.contains(&s) {
                Rat::one()
            } else {
                Rat::zero()
            }
        })
        .collect();
    let inputs = vec![indicator; 4];
    let via_tensor = t.evaluate(&inputs)?.to_integer();

    // brute-force oracle over injective tuples
    let mut count = BigInt::zero();
    let mut tuple = vec![0usize; 4];
    fn rec(
        pos: usize,
        n: usize,
        tuple: &mut Vec<usize>,
        edges: &std::collections::BTreeSet<Vec<usize>>,
        count: &mut BigInt,
    ) {
        if pos == 4 {
            let all = graphs::subsets_lex(4, 3).into_iter().all(|s| {
                let mut tri: Vec<usize> = s.iter().map(|&i| tuple[i - 1]).collect();
                tri.sort_unstable();
                edges.contains(&tri)
            });
            if all {
                *count += BigInt::one();
            }
            return;
        }
        for v in 1..=n {
            if tuple[..pos].contains(&v) {
                continue;
            }
            tuple[pos] = v;
            rec(pos + 1, n, tuple, edges, count);
        }
    }
    rec(0, n_vertices, &mut tuple, &edge_set, &mut count);
    Ok((via_tensor, count))
}

// ---------------------------------------------------------------------------
// Matrix file helpers for the CLI.
// ---------------------------------------------------------------------------

/// Parses a square integer matrix from whitespace-separated rows.
pub fn parse_matrix(text: &str) -> Result<Vec<Vec<BigInt>>> {
    let rows: Vec<Vec<BigInt>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_whitespace()
                .map(|f| {
                    f.parse::<BigInt>()
                        .map_err(|_| Error::Parse(format!("bad matrix entry {f:?}")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
        return Err(Error::Parse("matrix must be square and nonempty".into()));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_matrix(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<Vec<BigInt>> {
        (0..n)
            .map(|_| (0..n).map(|_| BigInt::from(rng.gen_range(-3i64..=3))).collect())
            .collect()
    }

    #[test]
    fn ryser_small_cases() {
        let a = vec![vec![BigInt::from(5)]];
        assert_eq!(permanent_ryser(&a), BigInt::from(5));
        let j2 = vec![vec![BigInt::one(), BigInt::one()], vec![BigInt::one(), BigInt::one()]];
        assert_eq!(permanent_ryser(&j2), BigInt::from(2));
        let id3: Vec<Vec<BigInt>> = (0..3)
            .map(|i| (0..3).map(|j| BigInt::from((i == j) as i64)).collect())
            .collect();
        assert_eq!(permanent_ryser(&id3), BigInt::one());
        // per [[a,b],[c,d]] = ad + bc
        let m = vec![
            vec![BigInt::from(2), BigInt::from(3)],
            vec![BigInt::from(-1), BigInt::from(4)],
        ];
        assert_eq!(permanent_ryser(&m), BigInt::from(2 * 4 + 3 * (-1)));
    }

    #[test]
    fn reduction_matches_ryser_small_n() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        for n in 1..=3usize {
            let ev = PermanentEvaluator::new(n).unwrap();
            for _ in 0..8 {
                let a = random_matrix(n, &mut rng);
                assert_eq!(ev.permanent(&a).unwrap(), permanent_ryser(&a), "n = {n}, a = {a:?}");
            }
        }
        // single entry: the one-permutation case
        let (plan, value) = permanent_reduction(&[vec![BigInt::from(7)]]).unwrap();
        assert_eq!(value, BigInt::from(7));
        assert_eq!(plan.grid_side, 3);
    }

    #[test]
    fn bruteforce_confirms_n2() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        let id: Vec<Vec<BigInt>> =
            vec![vec![BigInt::one(), BigInt::zero()], vec![BigInt::zero(), BigInt::one()]];
        let r = permanent_bruteforce_check(&id).unwrap();
        assert!(r.flip_invariant_ok && r.matches_circuit && r.matches_ryser, "{r:?}");
        assert_eq!(r.holant, "1");

        let ones: Vec<Vec<BigInt>> =
            vec![vec![BigInt::one(), BigInt::one()], vec![BigInt::one(), BigInt::one()]];
        let r = permanent_bruteforce_check(&ones).unwrap();
        assert_eq!(r.holant, "2");

        let a = random_matrix(2, &mut rng);
        let r = permanent_bruteforce_check(&a).unwrap();
        assert!(r.flip_invariant_ok && r.matches_circuit && r.matches_ryser, "{r:?}");
        assert!(permanent_bruteforce_check(&random_matrix(3, &mut rng)).is_err());
    }

    #[test]
    fn hyperclique_tensor_shape() {
        let t = hyperclique_tensor(3, 4, 2).unwrap();
        assert_eq!(t.num_modes(), 4);
        assert_eq!(t.mode_dims(), &[8, 8, 8, 8]);
        assert_eq!(t.nnz(), 16); // one monomial per f: [4] → [2]
        let t1 = hyperclique_tensor(3, 4, 1).unwrap();
        assert_eq!(t1.nnz(), 1);
    }

    #[test]
    fn projection_check_small() {
        for n in [1usize, 2] {
            let r = hyperclique_projection_check(n).unwrap();
            assert!(r.pass, "{r:?}");
        }
        assert!(hyperclique_projection_check(3).is_err());
    }

    #[test]
    fn hyperclique_counting_matches_bruteforce() {
        // complete 3-uniform hypergraph on 4 vertices: one 4-clique, 4! tuples
        let edges = graphs::subsets_lex(4, 3);
        let (via_tensor, brute) = count_hypercliques_34(4, &edges).unwrap();
        assert_eq!(via_tensor, brute);
        assert_eq!(brute, BigInt::from(24));
        // 2 vertices cannot host a 4-clique
        let (via_tensor, brute) = count_hypercliques_34(2, &[]).unwrap();
        assert_eq!(via_tensor, BigInt::zero());
        assert_eq!(brute, BigInt::zero());
        // missing one triple kills the clique
        let edges = graphs::subsets_lex(4, 3)[1..].to_vec();
        let (via_tensor, brute) = count_hypercliques_34(4, &edges).unwrap();
        assert_eq!(via_tensor, brute);
        assert_eq!(brute, BigInt::zero());
    }

    #[test]
    fn matrix_parsing() {
        let a = parse_matrix("1 2\n-3 4\n").unwrap();
        assert_eq!(a[1][0], BigInt::from(-3));
        assert!(parse_matrix("1 2\n3\n").is_err());
        assert!(parse_matrix("").is_err());
    }
}
