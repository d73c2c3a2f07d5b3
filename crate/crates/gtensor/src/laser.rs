//! Entropy analysis of the 4-mode CW outer structure and the improved
//! 4-clique exponent-per-edge bound.
//!
//! The support is the set of words over `{0,1,2}` of length 4 with
//! coordinate sum 2. Maximum-entropy distributions on it (closed-form for
//! symmetric marginals, iterative proportional fitting in general), the
//! three relation representatives with their tightness ranks, and the
//! resulting `τ(K_4)` bound are all computed here. Entropies are base-2
//! 64-bit floats with explicit tolerances; ranks and counting identities are
//! exact.

use num::{One, Signed, Zero};

use crate::util::Rat;
use crate::{Error, Result};

/// Number of modes of the analyzed tensor.
pub const K: usize = 4;

/// One support word over the block alphabet `{0,1,2}`.
pub type SupportPoint = [u8; K];

/// The full outer support: all words with coordinate sum 2, in
/// lexicographic order. Ten points: four of type `2·e_u`, six with two 1s.
pub fn support_set() -> Vec<SupportPoint> {
    let mut out = Vec::new();
    for a in 0..3u8 {
        for b in 0..3u8 {
            for c in 0..3u8 {
                for d in 0..3u8 {
                    if a + b + c + d == 2 {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

/// Base-2 entropy term with the `0·lg 0 = 0` convention.
fn hterm(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// Shannon entropy (bits) of a probability vector.
pub fn entropy(ps: &[f64]) -> f64 {
    ps.iter().map(|&p| hterm(p)).sum()
}

/// Symmetric marginal `(α, β, γ) = (1/2+γ, 1/2−2γ, γ)` for `γ ∈ [0, 1/4]`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MarginalSpec {
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl MarginalSpec {
    pub fn new(gamma: f64) -> Result<MarginalSpec> {
        if !(0.0..=0.25).contains(&gamma) {
            return Err(Error::InvalidArgument(format!("gamma {gamma} outside [0, 1/4]")));
        }
        Ok(MarginalSpec { gamma, alpha: 0.5 + gamma, beta: 0.5 - 2.0 * gamma })
    }

    pub fn distribution(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    /// `H(α, β, γ)`.
    pub fn entropy(&self) -> f64 {
        entropy(&self.distribution())
    }
}

/// Maximum-entropy distribution on the support under symmetric marginals:
/// the four `2`-type points get `γ` each, the six `1+1`-type points `β/3`
/// each. Returns the point probabilities (support-set order) and the
/// entropy, which matches the closed form `−4γ·lg γ − 2β·lg(β/3)` to 1e-12.
pub fn max_entropy_symmetric(gamma: f64) -> Result<(Vec<f64>, f64)> {
    let spec = MarginalSpec::new(gamma)?;
    let beta = spec.beta;
    let probs: Vec<f64> = support_set()
        .iter()
        .map(|p| if p.contains(&2) { gamma } else { beta / 3.0 })
        .collect();
    let h = entropy(&probs);
    let closed = h_p_star(gamma);
    debug_assert!((h - closed).abs() <= 1e-12, "entropy {h} vs closed form {closed}");
    Ok((probs, h))
}

/// Closed form `H(P*) = −4γ·lg γ − 2β·lg(β/3)`.
pub fn h_p_star(gamma: f64) -> f64 {
    let beta = 0.5 - 2.0 * gamma;
    let mut h = 4.0 * hterm(gamma);
    if beta > 0.0 {
        h += -2.0 * beta * (beta / 3.0).log2();
    }
    h
}

// ---------------------------------------------------------------------------
// Iterative proportional fitting.
// ---------------------------------------------------------------------------

pub const IPF_TOLERANCE: f64 = 1e-12;
pub const IPF_MAX_SWEEPS: usize = 100_000;

/// Maximum-entropy distribution on an arbitrary finite support subject to
/// per-coordinate marginal constraints, by iterative proportional fitting
/// from the uniform start. `marginals[u][s]` is the target probability of
/// symbol `s` at coordinate `u`. Converged when the largest marginal
/// violation drops to [`IPF_TOLERANCE`]; a plateau above it is reported as
/// infeasible.
pub fn max_entropy_ipf(
    support: &[Vec<u8>],
    marginals: &[Vec<f64>],
) -> Result<(Vec<f64>, f64)> {
    if support.is_empty() {
        return Err(Error::InvalidArgument("empty support".into()));
    }
    let coords = support[0].len();
    if marginals.len() != coords {
        return Err(Error::InvalidArgument("one marginal distribution per coordinate".into()));
    }
    let mut probs = vec![1.0 / support.len() as f64; support.len()];
    let violation = |probs: &[f64]| -> f64 {
        let mut worst: f64 = 0.0;
        for (u, m) in marginals.iter().enumerate() {
            for (s, &target) in m.iter().enumerate() {
                let cur: f64 = support
                    .iter()
                    .zip(probs)
                    .filter(|(x, _)| x[u] as usize == s)
                    .map(|(_, &p)| p)
                    .sum();
                worst = worst.max((cur - target).abs());
            }
        }
        worst
    };
    let mut last = f64::INFINITY;
    for sweep in 0..IPF_MAX_SWEEPS {
        for (u, m) in marginals.iter().enumerate() {
            for (s, &target) in m.iter().enumerate() {
                let cur: f64 = support
                    .iter()
                    .zip(&probs)
                    .filter(|(x, _)| x[u] as usize == s)
                    .map(|(_, &p)| p)
                    .sum();
                if cur == 0.0 {
                    if target.abs() > IPF_TOLERANCE {
                        return Err(Error::Infeasible(format!(
                            "marginal ({u},{s}) wants {target} but the class has no mass"
                        )));
                    }
                    continue;
                }
                let factor = target / cur;
                for (x, p) in support.iter().zip(probs.iter_mut()) {
                    if x[u] as usize == s {
                        *p *= factor;
                    }
                }
            }
        }
        let v = violation(&probs);
        if v <= IPF_TOLERANCE {
            return Ok((probs.clone(), entropy(&probs)));
        }
        // plateau: no progress over a long stretch means infeasible targets
        if sweep % 256 == 255 {
            if v >= last * 0.999_999 {
                return Err(Error::Infeasible(format!(
                    "IPF plateau at violation {v:.3e} after {sweep} sweeps"
                )));
            }
            last = v;
        }
    }
    Err(Error::Infeasible(format!(
        "IPF did not reach tolerance {IPF_TOLERANCE} within {IPF_MAX_SWEEPS} sweeps"
    )))
}

// ---------------------------------------------------------------------------
// Relation representatives and tightness ranks.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum RelationId {
    R1,
    R2,
    R3,
}

/// A relation on the support: the diagonal plus its nontrivial classes,
/// stored as index pairs into [`support_set`].
#[derive(Debug, Clone)]
pub struct RRelation {
    pub id: RelationId,
    pub pairs: Vec<(usize, usize)>,
}

fn point_index(p: SupportPoint) -> usize {
    support_set().iter().position(|&q| q == p).expect("point lies in the support")
}

/// All pairs sharing the first coordinate.
pub fn relation_r1() -> RRelation {
    let phi = support_set();
    let mut pairs = Vec::new();
    for (i, x) in phi.iter().enumerate() {
        for (j, y) in phi.iter().enumerate() {
            if x[0] == y[0] {
                pairs.push((i, j));
            }
        }
    }
    RRelation { id: RelationId::R1, pairs }
}

/// Diagonal plus the class `(0,1,1,0) ~ (0,0,0,2)`.
pub fn relation_r2() -> RRelation {
    let mut pairs: Vec<(usize, usize)> = (0..support_set().len()).map(|i| (i, i)).collect();
    let a = point_index([0, 1, 1, 0]);
    let b = point_index([0, 0, 0, 2]);
    pairs.push((a, b));
    pairs.push((b, a));
    RRelation { id: RelationId::R2, pairs }
}

/// Diagonal plus the classes `(0,0,1,1)~(0,1,0,1)`, `(1,1,0,0)~(1,0,1,0)`,
/// `(0,2,0,0)~(0,0,2,0)`.
pub fn relation_r3() -> RRelation {
    let mut pairs: Vec<(usize, usize)> = (0..support_set().len()).map(|i| (i, i)).collect();
    for (x, y) in [
        ([0, 0, 1, 1], [0, 1, 0, 1]),
        ([1, 1, 0, 0], [1, 0, 1, 0]),
        ([0, 2, 0, 0], [0, 0, 2, 0]),
    ] {
        let (a, b) = (point_index(x), point_index(y));
        pairs.push((a, b));
        pairs.push((b, a));
    }
    RRelation { id: RelationId::R3, pairs }
}

/// Per-mode integer relabelings `α_u: {0,1,2} → Z`; the default identity
/// maps make the coordinate sum constant (= 2) on the support.
#[derive(Debug, Clone)]
pub struct TightnessMaps {
    pub maps: [[i64; 3]; K],
}

impl Default for TightnessMaps {
    fn default() -> Self {
        TightnessMaps { maps: [[0, 1, 2]; K] }
    }
}

impl TightnessMaps {
    /// Checks that `Σ_u α_u(x_u)` is constant across the support.
    pub fn is_tight(&self) -> bool {
        let phi = support_set();
        let total = |p: &SupportPoint| -> i64 {
            (0..K).map(|u| self.maps[u][p[u] as usize]).sum()
        };
        let first = total(&phi[0]);
        phi.iter().all(|p| total(p) == first)
    }
}

/// Exact rank over the rationals of the matrix with rows
/// `α(x) − α(y)` for `(x, y)` in the relation.
pub fn r_alpha_rank(rel: &RRelation, maps: &TightnessMaps) -> usize {
    let phi = support_set();
    let rows: Vec<[i64; K]> = rel
        .pairs
        .iter()
        .map(|&(i, j)| {
            let mut row = [0i64; K];
            for u in 0..K {
                row[u] = maps.maps[u][phi[i][u] as usize] - maps.maps[u][phi[j][u] as usize];
            }
            row
        })
        .collect();
    // small exact Gaussian elimination
    let mut mat: Vec<Vec<Rat>> = rows
        .iter()
        .filter(|r| r.iter().any(|&v| v != 0))
        .map(|r| r.iter().map(|&v| Rat::from_integer(v.into())).collect())
        .collect();
    let mut rank = 0;
    for col in 0..K {
        let Some(pivot) = (rank..mat.len()).find(|&r| !mat[r][col].is_zero()) else { continue };
        mat.swap(rank, pivot);
        let p = mat[rank][col].clone();
        for r in 0..mat.len() {
            if r == rank || mat[r][col].is_zero() {
                continue;
            }
            let f = &mat[r][col] / &p;
            for c in 0..K {
                let delta = &mat[rank][c] * &f;
                mat[r][c] -= delta;
            }
        }
        rank += 1;
    }
    rank
}

// ---------------------------------------------------------------------------
// The F_R values and μ.
// ---------------------------------------------------------------------------

/// Closed-form upper bound for the relaxed `R3` entropy maximization:
/// `U(γ) = −4γ·lg γ − (8β/5)·lg(2β/5) − (2β/5)·lg(β/5) + 2γ + 8β/5`.
pub fn u_of_gamma(gamma: f64) -> f64 {
    let beta = 0.5 - 2.0 * gamma;
    let mut u = 4.0 * hterm(gamma) + 2.0 * gamma + 8.0 * beta / 5.0;
    if beta > 0.0 {
        u += -(8.0 * beta / 5.0) * (2.0 * beta / 5.0).log2();
        u += -(2.0 * beta / 5.0) * (beta / 5.0).log2();
    }
    u
}

/// Slack of the `R3` analysis: `D(γ) = 3H(P*) − 2U(γ) − H(α,β,γ)`;
/// nonnegative on `[0, 1/4]`.
pub fn d_of_gamma(gamma: f64) -> f64 {
    3.0 * h_p_star(gamma) - 2.0 * u_of_gamma(gamma) - MarginalSpec::new(gamma).unwrap().entropy()
}

/// Closed form of the second derivative of `D` on the open interval:
/// `3 / (γ(2γ+1)(4γ−1) ln 2)`, negative there (so `D` is concave).
pub fn d_second_derivative(gamma: f64) -> f64 {
    3.0 / (gamma * (2.0 * gamma + 1.0) * (4.0 * gamma - 1.0) * std::f64::consts::LN_2)
}

/// `F` value of a relation representative: the exact marginal entropy for
/// `R1`, the certified lower bounds for `R2`, `R3`. `numeric_f` cross-checks
/// through the actual entropy maximization over the relation's coupling
/// space (computed by IPF); it is `>=` the certified bound up to tolerance.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FRValue {
    pub id: RelationId,
    pub certified: f64,
    pub numeric_q_entropy: f64,
    pub numeric_f: f64,
}

/// Entropy maximization over couplings supported on the relation with both
/// coordinate blocks carrying the symmetric marginals.
pub fn relation_max_entropy(rel: &RRelation, gamma: f64) -> Result<f64> {
    let spec = MarginalSpec::new(gamma)?;
    let phi = support_set();
    let support: Vec<Vec<u8>> = rel
        .pairs
        .iter()
        .map(|&(i, j)| {
            let mut w = Vec::with_capacity(2 * K);
            w.extend_from_slice(&phi[i]);
            w.extend_from_slice(&phi[j]);
            w
        })
        .collect();
    let marginals = vec![spec.distribution().to_vec(); 2 * K];
    let (_, h) = max_entropy_ipf(&support, &marginals)?;
    Ok(h)
}

/// `F_R(γ)` for one of the three representatives (with `k − 2 = 2`).
pub fn f_r(gamma: f64, id: RelationId) -> Result<FRValue> {
    let spec = MarginalSpec::new(gamma)?;
    let hstar = h_p_star(gamma);
    let (rel, rank, certified) = match id {
        RelationId::R1 => (relation_r1(), 2.0, spec.entropy()),
        RelationId::R2 => (relation_r2(), 1.0, hstar - 1.0 + 2.0 * gamma),
        RelationId::R3 => (relation_r3(), 1.0, 3.0 * hstar - 2.0 * u_of_gamma(gamma)),
    };
    let hq = relation_max_entropy(&rel, gamma)?;
    let numeric_f = hstar - 2.0 * (hq - hstar) / rank;
    Ok(FRValue { id, certified, numeric_q_entropy: hq, numeric_f })
}

/// `μ(γ) = H(α, β, γ)`: the relation analyses show no representative drops
/// below the marginal entropy.
pub fn mu(gamma: f64) -> Result<f64> {
    Ok(MarginalSpec::new(gamma)?.entropy())
}

/// `μ(γ)` together with the minimum of the three certified `F` values; the
/// two agree within 1e-9 on the whole range.
pub fn mu_with_consistency(gamma: f64) -> Result<(f64, f64)> {
    let spec = MarginalSpec::new(gamma)?;
    let hstar = h_p_star(gamma);
    let f1 = spec.entropy();
    let f2 = hstar - 1.0 + 2.0 * gamma;
    let f3 = 3.0 * hstar - 2.0 * u_of_gamma(gamma);
    Ok((spec.entropy(), f1.min(f2).min(f3)))
}

// ---------------------------------------------------------------------------
// The τ(K_4) bound.
// ---------------------------------------------------------------------------

/// `τ(K_4) ≤ (1/(1−4γ)) · log_q((q+2) / 2^μ(γ))`.
pub fn tau_k4_bound(q: u64, gamma: f64) -> Result<f64> {
    if q < 2 {
        return Err(Error::InvalidArgument("q must be at least 2".into()));
    }
    if !(0.0..0.25).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma {gamma} outside [0, 1/4)")));
    }
    let m = mu(gamma)?;
    let value = ((q as f64 + 2.0) / 2f64.powf(m)).log(q as f64) / (1.0 - 4.0 * gamma);
    // algebraic rearrangement must agree to 1e-12
    let alt = ((q as f64 + 2.0).log2() - m) / ((1.0 - 4.0 * gamma) * (q as f64).log2());
    debug_assert!((value - alt).abs() <= 1e-12, "evaluation paths disagree: {value} vs {alt}");
    Ok(value)
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TauOptimum {
    pub q: u64,
    pub gamma: f64,
    pub bound: f64,
}

/// Minimizes the bound over `γ ∈ [0, 0.24]` for each `q` (coarse grid, then
/// golden-section refinement to 1e-10) and returns the best point found.
pub fn optimize_tau_k4(q_range: &[u64]) -> Result<TauOptimum> {
    if q_range.is_empty() {
        return Err(Error::InvalidArgument("empty q range".into()));
    }
    let mut best: Option<TauOptimum> = None;
    for &q in q_range {
        let f = |g: f64| tau_k4_bound(q, g).unwrap_or(f64::INFINITY);
        // coarse scan to bracket the minimum
        let grid = 480usize;
        let hi = 0.24;
        let mut gi = 0usize;
        let mut gv = f64::INFINITY;
        for i in 0..=grid {
            let g = hi * i as f64 / grid as f64;
            let v = f(g);
            if v < gv {
                gv = v;
                gi = i;
            }
        }
        let mut lo = hi * gi.saturating_sub(1) as f64 / grid as f64;
        let mut up = hi * (gi + 1).min(grid) as f64 / grid as f64;
        // golden-section refinement
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut x1, mut x2) = (up - phi * (up - lo), lo + phi * (up - lo));
        let (mut f1, mut f2) = (f(x1), f(x2));
        while up - lo > 1e-10 {
            if f1 <= f2 {
                up = x2;
                x2 = x1;
                f2 = f1;
                x1 = up - phi * (up - lo);
                f1 = f(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + phi * (up - lo);
                f2 = f(x2);
            }
        }
        let g = 0.5 * (lo + up);
        let v = f(g);
        let candidate = TauOptimum { q, gamma: g, bound: v };
        if best.map(|b| v < b.bound).unwrap_or(true) {
            best = Some(candidate);
        }
    }
    Ok(best.unwrap())
}

// ---------------------------------------------------------------------------
// Sweep verification.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepReport {
    pub grid_size: usize,
    /// `H(P*) − 1 + 2γ ≥ H(α,β,γ)` via `(1−γ)·lg 3 ≥ 1 − 2γ` on the grid.
    pub r2_chain_ok: bool,
    /// `D(γ) ≥ 0` everywhere, with the endpoint identities checked at 1e-9.
    pub d_nonnegative: bool,
    pub d_endpoints_ok: bool,
    /// Central finite differences of `D` match the closed-form second
    /// derivative to relative 1e-5 at interior grid points.
    pub d_second_derivative_ok: bool,
    pub max_d2_relative_error: f64,
    /// Numeric coupling entropies stay below the closed-form bounds
    /// (`+1e-9` slack), sampled on a subgrid.
    pub relation_bounds_ok: bool,
    /// Tightness ranks of (R1, R2, R3).
    pub ranks: (usize, usize, usize),
    pub ranks_ok: bool,
    pub pass: bool,
}

/// Sweeps the γ-grid and checks every inequality the relation analysis
/// relies on.
pub fn verify_relation_sweep(grid_size: usize) -> Result<SweepReport> {
    if grid_size < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 points".into()));
    }
    let lg3 = 3f64.log2();
    let mut r2_chain_ok = true;
    let mut d_nonnegative = true;
    let mut max_rel = 0.0f64;
    for i in 0..grid_size {
        let gamma = 0.25 * i as f64 / (grid_size - 1) as f64;
        let h1 = MarginalSpec::new(gamma)?.entropy();
        // engine inequality and the chained bound
        if (1.0 - gamma) * lg3 < 1.0 - 2.0 * gamma - 1e-12 {
            r2_chain_ok = false;
        }
        if h_p_star(gamma) - 1.0 + 2.0 * gamma < h1 - 1e-12 {
            r2_chain_ok = false;
        }
        let d = d_of_gamma(gamma);
        if d < -1e-12 {
            d_nonnegative = false;
        }
        // interior second derivative via central differences, step scaled to
        // the distance from the endpoints to keep the truncation error small
        if i > 0 && i + 1 < grid_size {
            let margin = gamma.min(0.25 - gamma);
            let h = (margin * 4e-3).max(1e-9);
            let fd = (d_of_gamma(gamma + h) - 2.0 * d + d_of_gamma(gamma - h)) / (h * h);
            let exact = d_second_derivative(gamma);
            let rel = ((fd - exact) / exact).abs();
            max_rel = max_rel.max(rel);
        }
    }
    let d_second_derivative_ok = max_rel <= 1e-5;
    let d0 = d_of_gamma(0.0);
    let d14 = d_of_gamma(0.25);
    let d_endpoints_ok = (d0 - (27f64 / 25.0).log2()).abs() <= 1e-9
        && (d14 - (-1.0 + 0.75 * lg3)).abs() <= 1e-9;

    // coupling entropies against the closed-form caps on a subgrid
    let mut relation_bounds_ok = true;
    let samples = 25usize;
    for i in 0..=samples {
        let gamma = 0.25 * i as f64 / samples as f64;
        let hstar = h_p_star(gamma);
        let h2 = relation_max_entropy(&relation_r2(), gamma)?;
        if h2 > hstar + 0.5 - gamma + 1e-9 {
            relation_bounds_ok = false;
        }
        let h3 = relation_max_entropy(&relation_r3(), gamma)?;
        if h3 > u_of_gamma(gamma) + 1e-9 {
            relation_bounds_ok = false;
        }
    }

    let maps = TightnessMaps::default();
    let ranks = (
        r_alpha_rank(&relation_r1(), &maps),
        r_alpha_rank(&relation_r2(), &maps),
        r_alpha_rank(&relation_r3(), &maps),
    );
    let ranks_ok = ranks == (2, 1, 1);
    let pass = r2_chain_ok
        && d_nonnegative
        && d_endpoints_ok
        && d_second_derivative_ok
        && relation_bounds_ok
        && ranks_ok;
    Ok(SweepReport {
        grid_size,
        r2_chain_ok,
        d_nonnegative,
        d_endpoints_ok,
        d_second_derivative_ok,
        max_d2_relative_error: max_rel,
        relation_bounds_ok,
        ranks,
        ranks_ok,
        pass,
    })
}

// ---------------------------------------------------------------------------
// Type-class symbol counting.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct TypeClassReport {
    pub n: u64,
    /// Number of one-edge positions, `m = (1 − 4γ)·n`.
    pub m: u64,
    /// `2m = 4·βn` (two 1-symbols per edge factor).
    pub edge_symbols_ok: bool,
    /// `n − m = 4·γn` (one 2-symbol per empty factor).
    pub empty_symbols_ok: bool,
}

/// Counts the block symbols of a type-class word exactly. Requires the
/// scaled marginals `αn, βn, γn` to be integers.
pub fn type_class_counting(gamma: &Rat, n: u64) -> Result<TypeClassReport> {
    let quarter = crate::util::rat(1, 4);
    if gamma.is_negative() || gamma > &quarter {
        return Err(Error::InvalidArgument("gamma outside [0, 1/4]".into()));
    }
    let nn = Rat::from_integer(n.into());
    let alpha = crate::util::rat(1, 2) + gamma;
    let beta = crate::util::rat(1, 2) - gamma * Rat::from_integer(2.into());
    for (name, v) in [("alpha", &alpha), ("beta", &beta), ("gamma", gamma)] {
        if !(v * &nn).denom().is_one() {
            return Err(Error::InvalidArgument(format!("{name}·n is not an integer")));
        }
    }
    let gamma_n = (gamma * &nn).to_integer();
    let beta_n = (&beta * &nn).to_integer();
    let m_rat = &nn - Rat::from_integer(gamma_n.clone()) * Rat::from_integer(4.into());
    let m: u64 = m_rat
        .to_integer()
        .try_into()
        .map_err(|_| Error::InvalidArgument("negative edge count".into()))?;
    let edge_symbols_ok = num::BigInt::from(2 * m) == num::BigInt::from(4) * &beta_n;
    let empty_symbols_ok = num::BigInt::from(n - m) == num::BigInt::from(4) * &gamma_n;
    Ok(TypeClassReport { n, m, edge_symbols_ok, empty_symbols_ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_has_ten_points() {
        let phi = support_set();
        assert_eq!(phi.len(), 10);
        assert_eq!(phi.iter().filter(|p| p.contains(&2)).count(), 4);
        assert!(phi.iter().all(|p| p.iter().map(|&x| x as u32).sum::<u32>() == 2));
    }

    #[test]
    fn symmetric_entropy_endpoints() {
        let (_, h0) = max_entropy_symmetric(0.0).unwrap();
        assert!((h0 - 6f64.log2()).abs() < 1e-12);
        let (_, h14) = max_entropy_symmetric(0.25).unwrap();
        assert!((h14 - 2.0).abs() < 1e-12);
        // γ = 1/8 against a hand-expanded formula
        let (_, h18) = max_entropy_symmetric(0.125).unwrap();
        let expect = -4.0 * 0.125 * 0.125f64.log2() - 2.0 * 0.25 * (1.0 / 12.0f64).log2();
        assert!((h18 - expect).abs() < 1e-12);
        assert!(max_entropy_symmetric(0.3).is_err());
    }

    #[test]
    fn ipf_matches_symmetric_closed_form() {
        let phi: Vec<Vec<u8>> = support_set().iter().map(|p| p.to_vec()).collect();
        for i in 0..=50 {
            let gamma = 0.25 * i as f64 / 50.0;
            let spec = MarginalSpec::new(gamma).unwrap();
            let (_, h) = max_entropy_ipf(&phi, &vec![spec.distribution().to_vec(); 4]).unwrap();
            let (_, closed) = max_entropy_symmetric(gamma).unwrap();
            assert!((h - closed).abs() <= 1e-10, "gamma {gamma}: {h} vs {closed}");
        }
    }

    #[test]
    fn ipf_single_point_and_infeasible() {
        let (p, h) = max_entropy_ipf(&[vec![0, 1]], &[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(p, vec![1.0]);
        assert_eq!(h, 0.0);
        // no point has symbol 1 at coordinate 0
        let err = max_entropy_ipf(&[vec![0], vec![0]], &[vec![0.25, 0.75]]);
        assert!(err.is_err());
    }

    #[test]
    fn r1_coupling_entropy_identity() {
        // H(Q*_{R1}) = 2·H(P*) − H(P_1)
        for gamma in [0.0, 0.05, 0.1, 0.2] {
            let h = relation_max_entropy(&relation_r1(), gamma).unwrap();
            let expect = 2.0 * h_p_star(gamma) - MarginalSpec::new(gamma).unwrap().entropy();
            assert!((h - expect).abs() <= 1e-8, "gamma {gamma}: {h} vs {expect}");
        }
    }

    #[test]
    fn tightness_ranks() {
        let maps = TightnessMaps::default();
        assert!(maps.is_tight());
        assert_eq!(r_alpha_rank(&relation_r1(), &maps), 2);
        assert_eq!(r_alpha_rank(&relation_r2(), &maps), 1);
        assert_eq!(r_alpha_rank(&relation_r3(), &maps), 1);
        // diagonal-only relation has rank 0
        let diag = RRelation {
            id: RelationId::R1,
            pairs: (0..support_set().len()).map(|i| (i, i)).collect(),
        };
        assert_eq!(r_alpha_rank(&diag, &maps), 0);
    }

    #[test]
    fn f_values_and_mu() {
        for gamma in [0.0, 0.01, 0.1, 0.2] {
            let f1 = f_r(gamma, RelationId::R1).unwrap();
            let h1 = MarginalSpec::new(gamma).unwrap().entropy();
            assert!((f1.certified - h1).abs() < 1e-12);
            assert!((f1.numeric_f - h1).abs() < 1e-7, "{:?}", f1);
            for id in [RelationId::R2, RelationId::R3] {
                let f = f_r(gamma, id).unwrap();
                assert!(
                    f.numeric_f >= f.certified - 1e-7,
                    "numeric F must dominate the certified bound: {f:?}"
                );
                assert!(f.certified >= h1 - 1e-12, "{f:?} below the marginal entropy");
            }
            let (m, consistency) = mu_with_consistency(gamma).unwrap();
            assert!((m - consistency).abs() <= 1e-9);
        }
        assert!((mu(0.0).unwrap() - 1.0).abs() < 1e-12);
        let m14 = mu(0.25).unwrap();
        assert!((m14 - (2.0 - 0.75 * 3f64.log2())).abs() < 1e-12);
    }

    #[test]
    fn tau_values() {
        // γ = 0 recovers log_q((q+2)/2)
        let t = tau_k4_bound(7, 0.0).unwrap();
        assert!((t - 4.5f64.log(7.0)).abs() < 1e-12);
        assert!((t - 0.772943).abs() < 1e-6);
        let t = tau_k4_bound(7, 0.0012105179).unwrap();
        assert!((t - 0.77231702).abs() < 5e-6);
        // q = 2, γ = 0: log_2 2 = 1
        assert!((tau_k4_bound(2, 0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(tau_k4_bound(1, 0.0).is_err());
        assert!(tau_k4_bound(7, 0.25).is_err());
    }

    #[test]
    fn optimizer_finds_the_seven_improvement() {
        let best = optimize_tau_k4(&[7]).unwrap();
        assert!(best.bound < 0.772318, "{best:?}");
        assert!(best.bound > 0.7723, "{best:?}");
        assert!((best.gamma - 0.0012105179).abs() < 1e-5, "{best:?}");

        let global = optimize_tau_k4(&(2..=16).collect::<Vec<_>>()).unwrap();
        assert_eq!(global.q, 7);
        assert!(global.bound < 0.772318);

        // degenerate range: q = 2 stays at or above 1
        let q2 = optimize_tau_k4(&[2]).unwrap();
        assert!(q2.bound >= 0.95, "{q2:?}");
    }

    #[test]
    fn sweep_passes() {
        let report = verify_relation_sweep(200).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn type_class_counts() {
        use crate::util::rat;
        let r = type_class_counting(&rat(0, 1), 4).unwrap();
        assert_eq!(r.m, 4);
        assert!(r.edge_symbols_ok && r.empty_symbols_ok);
        let r = type_class_counting(&rat(1, 8), 8).unwrap();
        assert_eq!(r.m, 4);
        assert!(r.edge_symbols_ok && r.empty_symbols_ok);
        let r = type_class_counting(&rat(1, 4), 4).unwrap();
        assert_eq!(r.m, 0);
        assert!(type_class_counting(&rat(1, 8), 9).is_err());
    }
}
