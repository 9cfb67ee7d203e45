//! Exact linear programming over halfspace systems.
//!
//! A problem `max c.x s.t. A x <= b` (x free) is solved through its dual
//! `min b.y s.t. A^T y = c, y >= 0`, whose tableau has one row per primal
//! variable. Norm computations produce systems with few variables and many
//! constraints, so this keeps the tableau small. The primal point is read
//! off the simplex multipliers of the final basis.

use num_traits::{Signed, Zero};

use super::HalfspaceSystem;
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    fn sign(self) -> Rational {
        match self {
            Sense::Maximize => Rational::from_integer(1.into()),
            Sense::Minimize => Rational::from_integer((-1).into()),
        }
    }
}

/// Optimal value with a primal point attaining it and a dual certificate.
///
/// With `s = +1` for maximization and `s = -1` for minimization the dual
/// vector satisfies `y >= 0`, `A^T y = s * objective` and
/// `b . y = s * value`, which proves optimality by weak duality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub value: Rational,
    pub point: Vec<Rational>,
    pub dual: Vec<Rational>,
}

impl LpSolution {
    /// Re-checks primal feasibility, the objective value and the dual
    /// certificate from scratch.
    pub fn verify(&self, objective: &[Rational], system: &HalfspaceSystem, sense: Sense) -> bool {
        let n = system.dimension;
        if self.point.len() != n || self.dual.len() != system.rows.len() {
            return false;
        }
        if !system.contains(&self.point) || dot(objective, &self.point) != self.value {
            return false;
        }
        if self.dual.iter().any(Signed::is_negative) {
            return false;
        }
        let s = sense.sign();
        for (k, c) in objective.iter().enumerate().take(n) {
            let col: Rational = system
                .rows
                .iter()
                .zip(&self.dual)
                .fold(Rational::zero(), |acc, (h, y)| acc + &h.normal[k] * y);
            if col != &s * c {
                return false;
            }
        }
        let by = system
            .rows
            .iter()
            .zip(&self.dual)
            .fold(Rational::zero(), |acc, (h, y)| acc + &h.offset * y);
        by == s * &self.value
    }
}

pub fn lp_solve(objective: &[Rational], system: &HalfspaceSystem, sense: Sense) -> Result<LpSolution> {
    let n = system.dimension;
    if objective.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: objective.len(),
        });
    }
    let s = sense.sign();
    let c: Vec<Rational> = objective.iter().map(|v| v * &s).collect();
    match solve_dual(system, &c)? {
        DualOutcome::Optimal { x, y } => {
            let value = dot(objective, &x);
            Ok(LpSolution {
                value,
                point: x,
                dual: y,
            })
        }
        DualOutcome::Unbounded => Err(Error::Infeasible),
        DualOutcome::Infeasible => {
            // Dual infeasible: primal is unbounded if it is feasible at all.
            let zero = vec![Rational::zero(); n];
            match solve_dual(system, &zero)? {
                DualOutcome::Optimal { .. } => Err(Error::Unbounded),
                _ => Err(Error::Infeasible),
            }
        }
    }
}

enum DualOutcome {
    Optimal { x: Vec<Rational>, y: Vec<Rational> },
    Unbounded,
    Infeasible,
}

/// max -b.y  s.t.  A^T y = c, y >= 0.
fn solve_dual(system: &HalfspaceSystem, c: &[Rational]) -> Result<DualOutcome> {
    let n = system.dimension;
    let m = system.rows.len();
    let width = m + n;
    let flip: Vec<bool> = c.iter().map(Signed::is_negative).collect();
    let mut tab = Tableau {
        rows: (0..n)
            .map(|k| {
                let mut row = vec![Rational::zero(); width + 1];
                for (i, h) in system.rows.iter().enumerate() {
                    row[i] = if flip[k] { -&h.normal[k] } else { h.normal[k].clone() };
                }
                row[m + k] = Rational::from_integer(1.into());
                row[width] = c[k].abs();
                row
            })
            .collect(),
        basis: (m..m + n).collect(),
        width,
    };

    let mut phase1 = vec![Rational::zero(); width];
    for v in phase1.iter_mut().skip(m) {
        *v = Rational::from_integer((-1).into());
    }
    tab.optimize(&phase1, |j| j < width)
        .expect("phase one objective is bounded above by zero");
    if tab.objective(&phase1).is_negative() {
        return Ok(DualOutcome::Infeasible);
    }
    tab.drive_out_artificials(m);

    let mut phase2 = vec![Rational::zero(); width];
    for (i, h) in system.rows.iter().enumerate() {
        phase2[i] = -&h.offset;
    }
    if tab.optimize(&phase2, |j| j < m).is_err() {
        return Ok(DualOutcome::Unbounded);
    }

    let mut y = vec![Rational::zero(); m];
    for (r, &b) in tab.basis.iter().enumerate() {
        if b < m {
            y[b] = tab.rows[r][width].clone();
        }
    }
    // Simplex multipliers pi = c_B B^{-1}; B^{-1} sits in the artificial columns.
    let x = (0..n)
        .map(|k| {
            let pi = tab
                .basis
                .iter()
                .enumerate()
                .fold(Rational::zero(), |acc, (r, &b)| acc + &phase2[b] * &tab.rows[r][m + k]);
            if flip[k] {
                pi
            } else {
                -pi
            }
        })
        .collect();
    Ok(DualOutcome::Optimal { x, y })
}

#[derive(Debug)]
struct Unbounded;

struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn objective(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .enumerate()
            .fold(Rational::zero(), |acc, (r, &b)| acc + &cost[b] * &self.rows[r][self.width])
    }

    fn reduced_cost(&self, cost: &[Rational], j: usize) -> Rational {
        self.basis
            .iter()
            .enumerate()
            .fold(cost[j].clone(), |acc, (r, &b)| acc - &cost[b] * &self.rows[r][j])
    }

    /// Maximizes with the largest-coefficient rule, falling back to Bland's
    /// rule while pivots are degenerate so that no basis repeats.
    fn optimize(&mut self, cost: &[Rational], allowed: impl Fn(usize) -> bool) -> Result<(), Unbounded> {
        let mut bland = false;
        loop {
            let candidates = (0..self.width).filter(|&j| allowed(j) && !self.basis.contains(&j));
            let mut entering: Option<(usize, Rational)> = None;
            for j in candidates {
                let rc = self.reduced_cost(cost, j);
                if !rc.is_positive() {
                    continue;
                }
                if bland {
                    entering = Some((j, rc));
                    break;
                }
                if entering.as_ref().is_none_or(|(_, best)| rc > *best) {
                    entering = Some((j, rc));
                }
            }
            let Some((j, _)) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, Rational)> = None;
            for r in 0..self.rows.len() {
                let a = &self.rows[r][j];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rows[r][self.width] / a;
                let better = match &leave {
                    None => true,
                    Some((lr, best)) => {
                        ratio < *best || (ratio == *best && self.basis[r] < self.basis[*lr])
                    }
                };
                if better {
                    leave = Some((r, ratio));
                }
            }
            let Some((r, step)) = leave else {
                return Err(Unbounded);
            };
            bland = step.is_zero();
            self.pivot(r, j);
        }
    }

    fn drive_out_artificials(&mut self, first_artificial: usize) {
        for r in 0..self.rows.len() {
            if self.basis[r] < first_artificial {
                continue;
            }
            if let Some(j) = (0..first_artificial)
                .find(|&j| !self.basis.contains(&j) && !self.rows[r][j].is_zero())
            {
                self.pivot(r, j);
            }
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let inv = self.rows[r][j].recip();
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[j].is_zero() {
                continue;
            }
            let factor = row[j].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        self.basis[r] = j;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::Halfspace;
    use crate::rational::{int, rat};

    fn sys(rows: &[(&[i64], Rational)]) -> HalfspaceSystem {
        let dim = rows[0].0.len();
        HalfspaceSystem::new(
            dim,
            rows.iter()
                .map(|(n, b)| Halfspace::new(n.iter().map(|&v| int(v)).collect(), b.clone()))
                .collect(),
        )
    }

    fn square() -> HalfspaceSystem {
        sys(&[
            (&[1, 0], int(1)),
            (&[-1, 0], int(1)),
            (&[0, 1], int(1)),
            (&[0, -1], int(1)),
        ])
    }

    #[test]
    fn square_corner() {
        let obj = vec![int(1), int(1)];
        let sol = lp_solve(&obj, &square(), Sense::Maximize).unwrap();
        assert_eq!(sol.value, int(2));
        assert_eq!(sol.point, vec![int(1), int(1)]);
        assert!(sol.verify(&obj, &square(), Sense::Maximize));
    }

    #[test]
    fn single_binding_row() {
        let s = sys(&[(&[1], rat(3, 7)), (&[-1], int(1))]);
        let sol = lp_solve(&[int(1)], &s, Sense::Maximize).unwrap();
        assert_eq!(sol.value, rat(3, 7));
        let sol = lp_solve(&[int(1)], &s, Sense::Minimize).unwrap();
        assert_eq!(sol.value, int(-1));
        assert!(sol.verify(&[int(1)], &s, Sense::Minimize));
    }

    #[test]
    fn cross_polytope_against_vertex_enumeration() {
        let cross = sys(&[
            (&[1, 1], int(1)),
            (&[1, -1], int(1)),
            (&[-1, 1], int(1)),
            (&[-1, -1], int(1)),
        ]);
        let obj = vec![int(2), int(3)];
        // Brute force over the four vertices.
        let verts = [[1, 0], [-1, 0], [0, 1], [0, -1]];
        let best = verts.iter().map(|v| 2 * v[0] + 3 * v[1]).max().unwrap();
        let sol = lp_solve(&obj, &cross, Sense::Maximize).unwrap();
        assert_eq!(sol.value, int(best));
        assert_eq!(sol.point, vec![int(0), int(1)]);
        assert!(sol.verify(&obj, &cross, Sense::Maximize));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let infeasible = sys(&[(&[1], int(-1)), (&[-1], int(-1))]);
        assert_eq!(lp_solve(&[int(1)], &infeasible, Sense::Maximize), Err(Error::Infeasible));
        let halfline = sys(&[(&[-1], int(1))]);
        assert_eq!(lp_solve(&[int(1)], &halfline, Sense::Maximize), Err(Error::Unbounded));
        assert_eq!(lp_solve(&[int(1)], &halfline, Sense::Minimize).unwrap().value, int(-1));
    }

    #[test]
    fn degenerate_vertex() {
        // Many rows tight at the optimum (1, 1).
        let s = sys(&[
            (&[1, 0], int(1)),
            (&[0, 1], int(1)),
            (&[1, 1], int(2)),
            (&[2, 1], int(3)),
            (&[1, 2], int(3)),
            (&[-1, 0], int(1)),
            (&[0, -1], int(1)),
        ]);
        let obj = vec![int(1), int(1)];
        let sol = lp_solve(&obj, &s, Sense::Maximize).unwrap();
        assert_eq!(sol.value, int(2));
        assert!(sol.verify(&obj, &s, Sense::Maximize));
    }
}
