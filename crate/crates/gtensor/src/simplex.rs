//! Dense exact-rational two-phase simplex with Bland's anti-cycling rule.
//!
//! Problems here are small (at most a few hundred variables), so a dense
//! tableau over `BigRational` is the right tool: no tolerances, and the
//! returned optimum carries a dual certificate that is checked exactly.

use num::{One, Signed, Zero};

use crate::util::Rat;
use crate::{Error, Result};

/// Minimize `objective · x` subject to `A x = rhs`, `x >= 0`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<Rat>,
    /// One `(row, rhs)` pair per equality constraint.
    pub constraints: Vec<(Vec<Rat>, Rat)>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: Rat,
    pub x: Vec<Rat>,
    /// One multiplier per constraint; `dual · rhs = objective` and
    /// `dual · A_j <= c_j` hold exactly (checked before returning).
    pub dual: Vec<Rat>,
}

#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// `rows × (cols + 1)`; the last column is the right-hand side.
    rows: Vec<Vec<Rat>>,
    basis: Vec<usize>,
    cost: Vec<Rat>,
    /// Reduced-cost row (length cols + 1; last entry is -objective).
    zrow: Vec<Rat>,
    /// Columns at or beyond this index never enter the basis.
    enter_limit: usize,
}

impl Tableau {
    fn cols(&self) -> usize {
        self.zrow.len() - 1
    }

    fn recompute_zrow(&mut self) {
        let cols = self.cols();
        for j in 0..=cols {
            let mut z = if j < cols { self.cost[j].clone() } else { Rat::zero() };
            for (i, &b) in self.basis.iter().enumerate() {
                z -= &self.cost[b] * &self.rows[i][j];
            }
            self.zrow[j] = z;
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let p = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v /= &p;
        }
        for i in 0..self.rows.len() {
            if i == row {
                continue;
            }
            let f = self.rows[i][col].clone();
            if f.is_zero() {
                continue;
            }
            for j in 0..self.rows[i].len() {
                let delta = &self.rows[row][j] * &f;
                self.rows[i][j] -= delta;
            }
        }
        let f = self.zrow[col].clone();
        if !f.is_zero() {
            for j in 0..self.zrow.len() {
                let delta = &self.rows[row][j] * &f;
                self.zrow[j] -= delta;
            }
        }
        self.basis[row] = col;
    }

    /// Bland's rule: entering = least index with negative reduced cost,
    /// leaving = least basis index among the minimum ratios.
    fn run(&mut self) -> bool {
        let cols = self.cols();
        loop {
            let Some(col) = (0..self.enter_limit).find(|&j| self.zrow[j].is_negative()) else {
                return true; // optimal
            };
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][col];
                if !a.is_positive() {
                    continue;
                }
                let ratio = self.rows[i][cols].clone() / a;
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((row, _)) = leave else {
                return false; // unbounded
            };
            self.pivot(row, col);
        }
    }
}

/// Solves the program; `Optimal` results carry an exactly verified dual
/// certificate.
pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.objective.len();
    let m = lp.constraints.len();
    for (row, _) in &lp.constraints {
        if row.len() != n {
            return Err(Error::InvalidArgument("constraint arity mismatch".into()));
        }
    }

    // Phase 1: artificials n..n+m, rhs made nonnegative.
    let cols = n + m;
    let mut rows = Vec::with_capacity(m);
    for (i, (row, rhs)) in lp.constraints.iter().enumerate() {
        let flip = rhs.is_negative();
        let mut r: Vec<Rat> = row.iter().map(|v| if flip { -v } else { v.clone() }).collect();
        r.resize(cols, Rat::zero());
        r[n + i] = Rat::one();
        r.push(if flip { -rhs } else { rhs.clone() });
        rows.push(r);
    }
    let mut cost = vec![Rat::zero(); cols];
    for c in cost.iter_mut().skip(n) {
        *c = Rat::one();
    }
    let mut tab = Tableau {
        rows,
        basis: (n..n + m).collect(),
        cost,
        zrow: vec![Rat::zero(); cols + 1],
        enter_limit: cols,
    };
    tab.recompute_zrow();
    if !tab.run() {
        return Err(Error::InvalidArgument("phase-1 objective is bounded by construction".into()));
    }
    // phase-1 optimum is -zrow[last]
    if !tab.zrow[cols].is_zero() {
        return Ok(LpOutcome::Infeasible);
    }
    // Drive remaining artificials out of the basis; rows that cannot pivot
    // are redundant and dropped.
    let mut drop_rows = Vec::new();
    for i in 0..tab.basis.len() {
        if tab.basis[i] < n {
            continue;
        }
        match (0..n).find(|&j| !tab.rows[i][j].is_zero()) {
            Some(j) => tab.pivot(i, j),
            None => drop_rows.push(i),
        }
    }
    for &i in drop_rows.iter().rev() {
        tab.rows.remove(i);
        tab.basis.remove(i);
    }

    // Phase 2 on the original objective. Artificial columns stay in the
    // tableau (they passively track the basis inverse for dual extraction)
    // but are barred from entering; after the drive-out none is basic, so
    // their costs never matter.
    tab.cost = lp.objective.clone();
    tab.cost.resize(cols, Rat::zero());
    tab.enter_limit = n;
    tab.recompute_zrow();
    if !tab.run() {
        return Ok(LpOutcome::Unbounded);
    }

    let colsn = tab.cols();
    let mut x = vec![Rat::zero(); n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            x[b] = tab.rows[i][colsn].clone();
        }
    }
    let objective: Rat =
        lp.objective.iter().zip(&x).map(|(c, v)| c * v).fold(Rat::zero(), |a, b| a + b);

    // Dual from the artificial columns: column n+i of the final tableau is
    // B^{-1} e_i (for the flipped system), so y_i = c_B · (B^{-1} e_i).
    let dropped: Vec<usize> = {
        let mut d = drop_rows;
        d.sort_unstable();
        d
    };
    let mut dual = vec![Rat::zero(); m];
    for (i, d) in dual.iter_mut().enumerate() {
        if dropped.binary_search(&i).is_ok() {
            continue; // redundant constraint: multiplier 0
        }
        let mut y = Rat::zero();
        for (r, &b) in tab.basis.iter().enumerate() {
            if b < n {
                y += &lp.objective[b] * &tab.rows[r][n + i];
            }
        }
        // rhs was flipped for negative entries; flip the multiplier back
        if lp.constraints[i].1.is_negative() {
            y = -y;
        }
        *d = y;
    }

    // exact certificate: feasibility, dual feasibility, strong duality
    if !verify_certificate(lp, &x, &dual, &objective) {
        return Err(Error::InvalidArgument(
            "internal error: optimality certificate failed exact verification".into(),
        ));
    }
    Ok(LpOutcome::Optimal(LpSolution { objective, x, dual }))
}

fn verify_certificate(lp: &LinearProgram, x: &[Rat], dual: &[Rat], objective: &Rat) -> bool {
    let n = lp.objective.len();
    if x.iter().any(|v| v.is_negative()) {
        return false;
    }
    for (row, rhs) in &lp.constraints {
        let lhs: Rat = row.iter().zip(x).map(|(a, v)| a * v).fold(Rat::zero(), |a, b| a + b);
        if &lhs != rhs {
            return false;
        }
    }
    for j in 0..n {
        let mut reduced = lp.objective[j].clone();
        for (i, (row, _)) in lp.constraints.iter().enumerate() {
            reduced -= &dual[i] * &row[j];
        }
        if reduced.is_negative() {
            return false;
        }
    }
    let ydotb: Rat = lp
        .constraints
        .iter()
        .enumerate()
        .map(|(i, (_, rhs))| &dual[i] * rhs)
        .fold(Rat::zero(), |a, b| a + b);
    &ydotb == objective
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::{rat, rat_int};

    fn solve_ok(lp: &LinearProgram) -> LpSolution {
        match solve(lp).unwrap() {
            LpOutcome::Optimal(s) => s,
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn tiny_equality_program() {
        // min x + 2y  s.t. x + y = 3
        let lp = LinearProgram {
            objective: vec![rat_int(1), rat_int(2)],
            constraints: vec![(vec![rat_int(1), rat_int(1)], rat_int(3))],
        };
        let s = solve_ok(&lp);
        assert_eq!(s.objective, rat_int(3));
        assert_eq!(s.x, vec![rat_int(3), rat_int(0)]);
    }

    #[test]
    fn fractional_optimum_is_exact() {
        // min 3x + 5y  s.t. 2x + y = 1, x + 3y = 1 → x = 2/5, y = 1/5
        let lp = LinearProgram {
            objective: vec![rat_int(3), rat_int(5)],
            constraints: vec![
                (vec![rat_int(2), rat_int(1)], rat_int(1)),
                (vec![rat_int(1), rat_int(3)], rat_int(1)),
            ],
        };
        let s = solve_ok(&lp);
        assert_eq!(s.x, vec![rat(2, 5), rat(1, 5)]);
        assert_eq!(s.objective, rat(11, 5));
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let lp = LinearProgram {
            objective: vec![rat_int(1)],
            constraints: vec![(vec![rat_int(1)], rat_int(-2))],
        };
        assert!(matches!(solve(&lp).unwrap(), LpOutcome::Infeasible));

        // min -x - y  s.t. x - y = 0: the ray x = y is unbounded below
        let lp = LinearProgram {
            objective: vec![rat_int(-1), rat_int(-1)],
            constraints: vec![(vec![rat_int(1), rat_int(-1)], rat_int(0))],
        };
        assert!(matches!(solve(&lp).unwrap(), LpOutcome::Unbounded));
    }

    #[test]
    fn redundant_constraints_are_tolerated() {
        let lp = LinearProgram {
            objective: vec![rat_int(1), rat_int(1)],
            constraints: vec![
                (vec![rat_int(1), rat_int(1)], rat_int(2)),
                (vec![rat_int(2), rat_int(2)], rat_int(4)),
            ],
        };
        let s = solve_ok(&lp);
        assert_eq!(s.objective, rat_int(2));
    }

    #[test]
    fn negative_rhs_duals_verify() {
        // min x + y  s.t. x - y = -1  → x = 0, y = 1
        let lp = LinearProgram {
            objective: vec![rat_int(1), rat_int(1)],
            constraints: vec![(vec![rat_int(1), rat_int(-1)], rat_int(-1))],
        };
        let s = solve_ok(&lp);
        assert_eq!(s.objective, rat_int(1));
        assert_eq!(s.x[1], rat_int(1));
    }

    #[test]
    fn random_programs_certify() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let n = rng.gen_range(2..6);
            let m = rng.gen_range(1..4);
            let lp = LinearProgram {
                objective: (0..n).map(|_| rat_int(rng.gen_range(0i64..6))).collect(),
                constraints: (0..m)
                    .map(|_| {
                        (
                            (0..n).map(|_| rat_int(rng.gen_range(-2i64..4))).collect(),
                            rat_int(rng.gen_range(0i64..5)),
                        )
                    })
                    .collect(),
            };
            // any outcome is fine; Optimal results self-verify inside solve
            let _ = solve(&lp).unwrap();
        }
    }
}
