//! Linear programs over the box-equality set `{ξ : A ξ = b, -1 ≤ ξ ≤ 1}`.
//!
//! Solved with a dense bounded-variable primal simplex. Phase 1 drives
//! one artificial variable per equality row to zero; phase 2 optimizes the
//! requested cost from the feasible basis. A [`BoxLpSolver`] keeps its
//! feasible basis between solves, so the `2n` interval-hull programs on the
//! same constraint set share one phase 1.
//!
//! Every solution carries the equality multipliers `y` and the bound
//! `bᵀy − ‖c − Aᵀy‖₁`, which is a valid lower bound on the optimum for any
//! `y` and is what set-enclosure code should use.

use nalgebra::DMatrix;

use crate::error::{shape_err, Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const HARRIS_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-10;
const DEGENERATE_RUN: usize = 50;
const REFACTOR_EVERY: usize = 64;
const CONFIRM_AFTER: usize = 16;

/// `min costᵀ ξ` subject to `A ξ = b`, `‖ξ‖∞ ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxEqualityLp {
    pub cost: Vec<f64>,
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Multipliers of the equality rows.
    pub dual: Vec<f64>,
    /// `bᵀy − ‖c − Aᵀy‖₁ ≤ value`.
    pub dual_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
}

impl LpOutcome {
    pub fn optimal(self) -> Option<LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            LpOutcome::Infeasible => None,
        }
    }
}

pub fn lp_solve(p: &BoxEqualityLp) -> Result<LpOutcome> {
    match BoxLpSolver::new(&p.a, &p.b)? {
        Some(mut s) => s.minimize(&p.cost).map(LpOutcome::Optimal),
        None => Ok(LpOutcome::Infeasible),
    }
}

/// Whether `{ξ : A ξ = b, ‖ξ‖∞ ≤ 1}` is nonempty to tolerance. Malformed
/// input (NaN) reports `false`.
pub fn lp_feasible(a: &DMatrix<f64>, b: &[f64]) -> bool {
    matches!(BoxLpSolver::new(a, b), Ok(Some(_)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Basic,
    Lower,
    Upper,
}

/// Simplex workspace holding a feasible basis for one constraint set.
#[derive(Debug, Clone)]
pub struct BoxLpSolver {
    n: usize,
    m: usize,
    /// Original constraint data, for duals.
    a_orig: DMatrix<f64>,
    b_orig: Vec<f64>,
    /// Row scale applied to the kept rows (including the sign flip).
    row_scale: Vec<f64>,
    /// Index of the original row for each kept row.
    rows: Vec<usize>,
    /// Scaled constraint matrix with artificial identity, row-major m × (n+m).
    a_full: Vec<f64>,
    b_full: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    status: Vec<Status>,
    basis: Vec<usize>,
    tab: Vec<f64>,
    /// Pivots applied to `tab` since the last refactorization.
    stale: usize,
    bland: bool,
}

impl BoxLpSolver {
    /// Runs phase 1. `Ok(None)` means the set is empty.
    pub fn new(a: &DMatrix<f64>, b: &[f64]) -> Result<Option<Self>> {
        if a.nrows() != b.len() {
            return shape_err(format!("A has {} rows but b has {}", a.nrows(), b.len()));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite entry in LP data".into()));
        }
        let n = a.ncols();
        let bnorm = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = FEAS_TOL * (1.0 + bnorm);

        // Equilibrate rows; drop rows that are identically zero.
        let mut rows = Vec::new();
        let mut row_scale = Vec::new();
        for i in 0..a.nrows() {
            let s = (0..n).fold(0.0f64, |m, j| m.max(a[(i, j)].abs()));
            if s == 0.0 {
                if b[i].abs() > tol {
                    return Ok(None);
                }
                continue;
            }
            rows.push(i);
            row_scale.push(1.0 / s);
        }
        let m = rows.len();
        let nt = n + m;
        let mut lo = vec![-1.0; nt];
        let mut hi = vec![1.0; nt];
        let mut x = vec![-1.0; nt];
        let mut status = vec![Status::Lower; nt];
        for j in n..nt {
            lo[j] = 0.0;
            hi[j] = f64::INFINITY;
        }
        let mut a_full = vec![0.0; m * nt];
        let mut b_full = vec![0.0; m];
        for (r, &i) in rows.iter().enumerate() {
            let mut resid = b[i];
            for j in 0..n {
                resid -= a[(i, j)] * x[j];
            }
            if resid < 0.0 {
                row_scale[r] = -row_scale[r];
            }
            let s = row_scale[r];
            for j in 0..n {
                a_full[r * nt + j] = a[(i, j)] * s;
            }
            a_full[r * nt + n + r] = 1.0;
            b_full[r] = b[i] * s;
            x[n + r] = resid * s;
            status[n + r] = Status::Basic;
        }
        let basis: Vec<usize> = (n..nt).collect();
        let mut solver = BoxLpSolver {
            n,
            m,
            a_orig: a.clone(),
            b_orig: b.to_vec(),
            row_scale,
            rows,
            tab: a_full.clone(),
            a_full,
            b_full,
            lo,
            hi,
            x,
            status,
            basis,
            stale: 0,
            bland: false,
        };
        let mut cost = vec![0.0; nt];
        for c in cost.iter_mut().skip(n) {
            *c = 1.0;
        }
        solver.iterate(&cost, 1)?;
        solver.refresh();
        let infeas: f64 = (n..nt).map(|j| solver.x[j].abs()).sum();
        if infeas > tol {
            return Ok(None);
        }
        for j in n..nt {
            solver.hi[j] = 0.0;
            solver.x[j] = solver.x[j].clamp(0.0, 0.0);
            if solver.status[j] == Status::Upper {
                solver.status[j] = Status::Lower;
            }
        }
        // Basic artificials hold tiny residuals; recompute so they sit at zero
        // up to roundoff.
        solver.recompute_x();
        Ok(Some(solver))
    }

    pub fn n_vars(&self) -> usize {
        self.n
    }

    /// Current (feasible) point.
    pub fn point(&self) -> Vec<f64> {
        self.x[..self.n]
            .iter()
            .map(|v| v.clamp(-1.0, 1.0))
            .collect()
    }

    /// Phase 2 for `cost`, starting from the stored basis.
    pub fn minimize(&mut self, cost: &[f64]) -> Result<LpSolution> {
        if cost.len() != self.n {
            return shape_err(format!(
                "cost has {} entries, expected {}",
                cost.len(),
                self.n
            ));
        }
        if cost.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite cost".into()));
        }
        let mut full = cost.to_vec();
        full.resize(self.n + self.m, 0.0);
        self.bland = false;
        self.iterate(&full, CONFIRM_AFTER)?;
        let argmin = self.point();
        let value: f64 = cost.iter().zip(&argmin).map(|(c, x)| c * x).sum();
        let dual = self.duals(cost);
        let dual_bound = self.dual_bound(cost, &dual);
        Ok(LpSolution {
            value,
            argmin,
            dual,
            dual_bound,
        })
    }

    /// Multipliers `y` in original row units. The artificial block of the
    /// tableau holds `B⁻¹`, so `y_sᵀ = c_Bᵀ B⁻¹` needs no extra solve.
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.a_orig.nrows()];
        let (n, nt) = (self.n, self.n + self.m);
        let mut ys = vec![0.0; self.m];
        for (r, &jb) in self.basis.iter().enumerate() {
            let cb = if jb < n { cost[jb] } else { 0.0 };
            if cb != 0.0 {
                for (yi, t) in ys.iter_mut().zip(&self.tab[r * nt + n..(r + 1) * nt]) {
                    *yi += cb * t;
                }
            }
        }
        for (r, &i) in self.rows.iter().enumerate() {
            y[i] = ys[r] * self.row_scale[r];
        }
        y
    }

    fn dual_bound(&self, cost: &[f64], y: &[f64]) -> f64 {
        let mut q: f64 = self.b_orig.iter().zip(y).map(|(b, y)| b * y).sum();
        for (j, &c) in cost.iter().enumerate().take(self.n) {
            let mut red = c;
            for (i, yi) in y.iter().enumerate() {
                red -= self.a_orig[(i, j)] * yi;
            }
            q -= red.abs();
        }
        q
    }

    fn refresh(&mut self) {
        if self.stale > 0 {
            self.refactor();
        } else {
            self.recompute_x();
        }
    }

    /// Recomputes basic values with the `B⁻¹` block of a fresh tableau.
    fn recompute_x(&mut self) {
        let (n, m, nt) = (self.n, self.m, self.n + self.m);
        let mut rhs = self.b_full.clone();
        for j in 0..nt {
            if self.status[j] != Status::Basic && self.x[j] != 0.0 {
                for (i, ri) in rhs.iter_mut().enumerate() {
                    *ri -= self.a_full[i * nt + j] * self.x[j];
                }
            }
        }
        for r in 0..m {
            let row = &self.tab[r * nt + n..(r + 1) * nt];
            let v: f64 = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
            self.x[self.basis[r]] = v;
        }
    }

    /// Rebuilds the tableau and basic values from the basis columns.
    ///
    /// A numerically singular basis keeps the updated tableau; `stale` is
    /// reset either way so callers do not retry on every iteration.
    fn refactor(&mut self) {
        let (m, nt) = (self.m, self.n + self.m);
        self.stale = 0;
        if m == 0 {
            return;
        }
        let n = self.n;
        let bmat = DMatrix::from_fn(m, m, |i, r| self.a_full[i * nt + self.basis[r]]);
        let Some(binv) = bmat.lu().try_inverse() else {
            return;
        };
        // The artificial block of the scaled matrix is the identity, so the
        // tableau is [B⁻¹A | B⁻¹].
        let a_s = DMatrix::from_fn(m, n, |i, j| self.a_full[i * nt + j]);
        let t = &binv * &a_s;
        let mut rhs = nalgebra::DVector::from_vec(self.b_full.clone());
        for j in 0..nt {
            if self.status[j] != Status::Basic && self.x[j] != 0.0 {
                for i in 0..m {
                    rhs[i] -= self.a_full[i * nt + j] * self.x[j];
                }
            }
        }
        let xb = &binv * rhs;
        for i in 0..m {
            let row = &mut self.tab[i * nt..(i + 1) * nt];
            for j in 0..n {
                row[j] = t[(i, j)];
            }
            for k in 0..m {
                row[n + k] = binv[(i, k)];
            }
        }
        for (r, &j) in self.basis.iter().enumerate() {
            self.x[j] = xb[r];
        }
    }

    fn iterate(&mut self, cost: &[f64], confirm_after: usize) -> Result<()> {
        let (m, nt) = (self.m, self.n + self.m);
        let cscale = cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
        let dtol = OPT_TOL * cscale;
        let mut d = self.reduced_costs(cost);
        let mut degenerate = 0usize;
        let max_iter = 100 * (nt + m) + 1000;
        for _ in 0..max_iter {
            // Pricing.
            let mut enter = None;
            let mut best = 0.0;
            for (j, &dj) in d.iter().enumerate() {
                let dir = match self.status[j] {
                    Status::Basic => continue,
                    _ if self.hi[j] == self.lo[j] => continue,
                    Status::Lower if dj < -dtol => 1.0,
                    Status::Upper if dj > dtol => -1.0,
                    _ => continue,
                };
                if self.bland {
                    enter = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    enter = Some((j, dir));
                }
            }
            let Some((q, dir)) = enter else {
                // Confirm optimality on a fresh factorization once enough
                // pivots have accumulated (always in phase 1).
                if self.stale < confirm_after {
                    return Ok(());
                }
                self.refactor();
                d = self.reduced_costs(cost);
                continue;
            };

            // Harris ratio test: bound the step with slightly relaxed bounds,
            // then take the largest pivot among rows that block within it.
            let range = self.hi[q] - self.lo[q];
            let room = |s: &Self, r: usize, alpha: f64| -> Option<f64> {
                let jb = s.basis[r];
                if alpha > 0.0 {
                    Some((s.x[jb] - s.lo[jb]).max(0.0))
                } else if s.hi[jb].is_finite() {
                    Some((s.hi[jb] - s.x[jb]).max(0.0))
                } else {
                    None
                }
            };
            // Anti-cycling mode uses the textbook minimum ratio.
            let harris = if self.bland { 0.0 } else { HARRIS_TOL };
            let mut t_harris = f64::INFINITY;
            for r in 0..m {
                let alpha = dir * self.tab[r * nt + q];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                if let Some(rm) = room(self, r, alpha) {
                    t_harris = t_harris.min((rm + harris) / alpha.abs());
                }
            }
            let mut t_max = range;
            let mut leave: Option<(usize, f64)> = None;
            if range > t_harris {
                let mut best: Option<(usize, f64, f64)> = None;
                for r in 0..m {
                    let alpha = dir * self.tab[r * nt + q];
                    if alpha.abs() <= PIVOT_TOL {
                        continue;
                    }
                    let Some(rm) = room(self, r, alpha) else {
                        continue;
                    };
                    let t = rm / alpha.abs();
                    if t > t_harris {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((br, bt, _)) if self.bland => {
                            t < bt || (t == bt && self.basis[r] < self.basis[br])
                        }
                        Some((_, _, ba)) => alpha.abs() > ba,
                    };
                    if better {
                        best = Some((r, t, alpha.abs()));
                    }
                }
                if let Some((r, t, _)) = best {
                    let jb = self.basis[r];
                    let bound = if dir * self.tab[r * nt + q] > 0.0 {
                        self.lo[jb]
                    } else {
                        self.hi[jb]
                    };
                    t_max = t;
                    leave = Some((r, bound));
                }
            }
            if !t_max.is_finite() {
                return Err(Error::Input("unbounded LP direction".into()));
            }

            if t_max <= 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_RUN {
                    self.bland = true;
                }
            } else {
                degenerate = 0;
            }

            // Move along the edge.
            for r in 0..m {
                let jb = self.basis[r];
                self.x[jb] -= dir * t_max * self.tab[r * nt + q];
            }
            self.x[q] += dir * t_max;

            match leave {
                None => {
                    // Bound flip.
                    if dir > 0.0 {
                        self.x[q] = self.hi[q];
                        self.status[q] = Status::Upper;
                    } else {
                        self.x[q] = self.lo[q];
                        self.status[q] = Status::Lower;
                    }
                }
                Some((r, bound)) => {
                    let jl = self.basis[r];
                    self.x[jl] = bound;
                    self.status[jl] = if bound == self.lo[jl] {
                        Status::Lower
                    } else {
                        Status::Upper
                    };
                    self.status[q] = Status::Basic;
                    self.basis[r] = q;
                    self.pivot(r, q, &mut d);
                    self.stale += 1;
                    if self.stale >= REFACTOR_EVERY {
                        self.refactor();
                        d = self.reduced_costs(cost);
                    }
                }
            }
        }
        Err(Error::Input("simplex iteration limit reached".into()))
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let nt = self.n + self.m;
        let mut d = cost.to_vec();
        for (r, &jb) in self.basis.iter().enumerate() {
            let cb = cost[jb];
            if cb != 0.0 {
                let row = &self.tab[r * nt..(r + 1) * nt];
                for (dj, t) in d.iter_mut().zip(row) {
                    *dj -= cb * t;
                }
            }
        }
        for &jb in &self.basis {
            d[jb] = 0.0;
        }
        d
    }

    fn pivot(&mut self, r: usize, q: usize, d: &mut [f64]) {
        let (m, nt) = (self.m, self.n + self.m);
        let p = self.tab[r * nt + q];
        for v in &mut self.tab[r * nt..(r + 1) * nt] {
            *v /= p;
        }
        let (before, rest) = self.tab.split_at_mut(r * nt);
        let (prow, after) = rest.split_at_mut(nt);
        for row in before.chunks_mut(nt).chain(after.chunks_mut(nt)) {
            let f = row[q];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[q] = 0.0;
            }
        }
        let f = d[q];
        if f != 0.0 {
            for (dj, pv) in d.iter_mut().zip(prow.iter()) {
                *dj -= f * pv;
            }
        }
        d[q] = 0.0;
        debug_assert_eq!(self.tab.len(), m * nt);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Minimum of `cᵀξ` over vertices of `{Aξ = b, |ξ| ≤ 1}` by enumerating
    /// every choice of `n − rank` variables pinned at ±1 and solving for the rest.
    pub(crate) fn brute_force_min(c: &[f64], a: &DMatrix<f64>, b: &[f64]) -> Option<f64> {
        let n = c.len();
        let m = a.nrows();
        let mut best: Option<f64> = None;
        for mask in 0u32..(1 << n) {
            let free: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
            if free.len() > m {
                continue;
            }
            let fixed: Vec<usize> = (0..n).filter(|j| mask & (1 << j) == 0).collect();
            for signs in 0u32..(1 << fixed.len()) {
                let mut xi = vec![0.0; n];
                for (k, &j) in fixed.iter().enumerate() {
                    xi[j] = if signs & (1 << k) != 0 { 1.0 } else { -1.0 };
                }
                let mut rhs = nalgebra::DVector::from_fn(m, |i, _| b[i]);
                for &j in &fixed {
                    for i in 0..m {
                        rhs[i] -= a[(i, j)] * xi[j];
                    }
                }
                let af = DMatrix::from_fn(m, free.len(), |i, k| a[(i, free[k])]);
                let sol = if free.is_empty() {
                    Some(nalgebra::DVector::zeros(0))
                } else {
                    af.clone().svd(true, true).solve(&rhs, 1e-12).ok()
                };
                let Some(sol) = sol else { continue };
                for (k, &j) in free.iter().enumerate() {
                    xi[j] = sol[k];
                }
                let resid = (0..m)
                    .map(|i| {
                        let s: f64 = (0..n).map(|j| a[(i, j)] * xi[j]).sum();
                        (s - b[i]).abs()
                    })
                    .fold(0.0, f64::max);
                if resid > 1e-9 || xi.iter().any(|v| v.abs() > 1.0 + 1e-9) {
                    continue;
                }
                let v: f64 = c.iter().zip(&xi).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(v, |bv: f64| bv.min(v)));
            }
        }
        best
    }

    #[test]
    fn small_examples() {
        let p = BoxEqualityLp {
            cost: vec![1.0, 0.0],
            a: DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            b: vec![1.0],
        };
        let s = lp_solve(&p).unwrap().optimal().unwrap();
        assert!(s.value.abs() < 1e-12);
        assert!((s.argmin[0]).abs() < 1e-12 && (s.argmin[1] - 1.0).abs() < 1e-12);
        assert!(s.dual_bound <= s.value + 1e-12 && s.value - s.dual_bound < 1e-9);

        let p = BoxEqualityLp {
            cost: vec![0.0, 0.0],
            a: DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            b: vec![5.0],
        };
        assert_eq!(lp_solve(&p).unwrap(), LpOutcome::Infeasible);

        let p = BoxEqualityLp {
            cost: vec![0.0; 3],
            a: DMatrix::zeros(0, 3),
            b: vec![],
        };
        let s = lp_solve(&p).unwrap().optimal().unwrap();
        assert_eq!(s.value, 0.0);
        assert!(s.argmin.iter().all(|v| v.abs() <= 1.0));
    }

    #[test]
    fn feasibility_examples() {
        assert!(lp_feasible(
            &DMatrix::from_row_slice(1, 2, &[1.0, 1.0]),
            &[2.0]
        ));
        assert!(!lp_feasible(
            &DMatrix::from_row_slice(1, 2, &[1.0, -1.0]),
            &[3.0]
        ));
        assert!(!lp_feasible(
            &DMatrix::from_row_slice(1, 2, &[0.0, 0.0]),
            &[1.0]
        ));
        assert!(lp_feasible(
            &DMatrix::from_row_slice(1, 2, &[0.0, 0.0]),
            &[0.0]
        ));
        assert!(!lp_feasible(
            &DMatrix::from_row_slice(1, 1, &[f64::NAN]),
            &[0.0]
        ));
        let p = BoxEqualityLp {
            cost: vec![f64::NAN],
            a: DMatrix::zeros(0, 1),
            b: vec![],
        };
        assert!(matches!(lp_solve(&p), Err(Error::Input(_))));
    }

    #[test]
    fn redundant_rows() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 2.0, 2.0, 0.0, 0.0, 1.0, -1.0]);
        let b = [0.5, 1.0, 0.0];
        let p = BoxEqualityLp {
            cost: vec![0.0, 0.0, -1.0],
            a: a.clone(),
            b: b.to_vec(),
        };
        let s = lp_solve(&p).unwrap().optimal().unwrap();
        // ξ2 = ξ3, ξ1 = 0.5 − ξ2, maximize ξ3 → ξ3 = 1 with ξ1 = −0.5
        assert!((s.value + 1.0).abs() < 1e-12);
        assert!(s.value - s.dual_bound < 1e-9);
    }

    #[test]
    fn agrees_with_vertex_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        for _ in 0..300 {
            let n = rng.gen_range(1..=6);
            let m = rng.gen_range(0..=n.min(3));
            let a = DMatrix::from_fn(m, n, |_, _| rng.gen_range(-2.0..2.0));
            let xi0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut b: Vec<f64> = (0..m)
                .map(|i| (0..n).map(|j| a[(i, j)] * xi0[j]).sum())
                .collect();
            if rng.gen_bool(0.2) && m > 0 {
                b[0] += 3.0 * n as f64;
            }
            let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let bf = brute_force_min(&c, &a, &b);
            let out = lp_solve(&BoxEqualityLp {
                cost: c.clone(),
                a: a.clone(),
                b: b.clone(),
            })
            .unwrap();
            match (bf, out) {
                (None, LpOutcome::Infeasible) => {}
                (Some(v), LpOutcome::Optimal(s)) => {
                    assert!((v - s.value).abs() < 1e-9, "{v} vs {}", s.value);
                    assert!(s.value - s.dual_bound <= 1e-8);
                    assert!(s.dual_bound <= s.value + 1e-12);
                    for i in 0..m {
                        let r: f64 = (0..n).map(|j| a[(i, j)] * s.argmin[j]).sum();
                        assert!((r - b[i]).abs() < 1e-9);
                    }
                    checked += 1;
                }
                (bf, out) => panic!("mismatch: brute force {bf:?}, simplex {out:?}"),
            }
        }
        assert!(checked > 150);
    }

    #[test]
    fn larger_instances_have_small_gap() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..30 {
            let n = rng.gen_range(20..80);
            let m = rng.gen_range(1..n / 2);
            let a = DMatrix::from_fn(m, n, |_, _| {
                if rng.gen_bool(0.3) {
                    rng.gen_range(-1.0..1.0)
                } else {
                    0.0
                }
            });
            let xi0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..m)
                .map(|i| (0..n).map(|j| a[(i, j)] * xi0[j]).sum())
                .collect();
            let mut solver = BoxLpSolver::new(&a, &b).unwrap().unwrap();
            for _ in 0..4 {
                let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let s = solver.minimize(&c).unwrap();
                assert!(
                    s.value - s.dual_bound <= 1e-8,
                    "gap {}",
                    s.value - s.dual_bound
                );
                let v0: f64 = c.iter().zip(&xi0).map(|(c, x)| c * x).sum();
                assert!(s.value <= v0 + 1e-9);
            }
        }
    }

    #[test]
    fn singular_refactor_does_not_spin() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.5, 1.0, -1.0, 0.25]);
        let mut lp = BoxLpSolver::new(&a, &[0.3, 0.1]).unwrap().unwrap();
        let tab = lp.tab.clone();
        // Two copies of one column make the basis exactly singular.
        let saved = lp.basis.clone();
        lp.basis = vec![saved[0], saved[0]];
        lp.stale = REFACTOR_EVERY;
        lp.refactor();
        assert_eq!(lp.stale, 0);
        assert_eq!(lp.tab, tab);
        lp.basis = saved;
        let s = lp.minimize(&[1.0, 0.0, 0.0]).unwrap();
        assert!(s.dual_bound <= s.value + 1e-9);
    }
}
