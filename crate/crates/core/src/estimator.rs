//! Set-based state estimation with constrained zonotopes and lifted
//! polyhedral relaxations.
//!
//! For `x_k = f(x_{k−1}, w_{k−1}; u_{k−1})` and `y_k = g(x_k, v_k; u_k)` each
//! step builds the relaxation of the composite `ℓ = g(f(x, w), v)` over the
//! box of the previous enclosure, intersects it with the measurement, and
//! projects onto the outputs of `f`. Linear factors are eliminated before
//! the set is assembled, which yields the same set with fewer generators
//! and constraints.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::conzono::ConstrainedZonotope;
use crate::error::{shape_err, Error, Result};
use crate::factorgraph::{record_composite, CompositeGraph, FactorGraph};
use crate::interval::IntervalVector;
use crate::polytope::HPolytope;
use crate::relax::build_lifted;

/// Dynamics and measurement tapes with their composite.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub n_x: usize,
    pub n_w: usize,
    pub n_v: usize,
    pub n_y: usize,
    /// Inputs `(x, w)`; parameters are the known inputs of the dynamics.
    pub f_graph: FactorGraph,
    /// Inputs `(x, v)`.
    pub g_graph: FactorGraph,
    /// Inputs `(x, w, v)`; parameters are those of `f` followed by those of `g`.
    pub ell: CompositeGraph,
    /// `(C, D_v, d)` with `g(x, v) = C x + D_v v + d` when `g` is affine.
    pub g_linear: Option<(DMatrix<f64>, DMatrix<f64>, DVector<f64>)>,
}

impl SystemModel {
    pub fn new(f_graph: FactorGraph, g_graph: FactorGraph, n_x: usize) -> Result<Self> {
        if f_graph.n_outputs() != n_x || f_graph.n_inputs() < n_x {
            return shape_err(format!(
                "dynamics must map {n_x} states (plus disturbances) to {n_x} states"
            ));
        }
        if g_graph.n_inputs() < n_x {
            return shape_err("measurement tape must take the state as its leading inputs");
        }
        let n_w = f_graph.n_inputs() - n_x;
        let n_v = g_graph.n_inputs() - n_x;
        let ell = record_composite(&f_graph, &g_graph)?;
        let g_linear = if g_graph.n_params() == 0 {
            g_graph.affine_form().map(|(c, d)| {
                let cx = c.columns(0, n_x).clone_owned();
                let dv = c.columns(n_x, n_v).clone_owned();
                (cx, dv, DVector::from_vec(d))
            })
        } else {
            None
        };
        Ok(SystemModel {
            n_x,
            n_w,
            n_v,
            n_y: g_graph.n_outputs(),
            f_graph,
            g_graph,
            ell,
            g_linear,
        })
    }

    pub fn g_is_linear(&self) -> bool {
        self.g_linear.is_some()
    }
}

/// Generator and constraint limits for order reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_gens: usize,
    pub max_cons: usize,
}

impl Limits {
    pub const UNLIMITED: Limits = Limits {
        max_gens: usize::MAX,
        max_cons: usize::MAX,
    };
}

/// Sizes of the lifted system behind one enclosure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LiftCounts {
    pub n_s: usize,
    pub n_z: usize,
    /// Inequality rows of the relaxation.
    pub n_h: usize,
    /// Equality rows of the relaxation, measurement rows included.
    pub n_eq: usize,
    /// Eliminated linear factors (0 on the full path).
    pub n_e: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    pub n_g_pre: usize,
    pub n_c_pre: usize,
    pub n_g: usize,
    pub n_c: usize,
    pub lift: LiftCounts,
    pub step_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorState {
    pub k: usize,
    pub xhat: ConstrainedZonotope,
    pub hull: IntervalVector,
    pub diagnostics: StepDiagnostics,
}

/// Reduced form of a lifted system after eliminating linear factors.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationPlan {
    /// Eliminated factor indices, ascending.
    pub eliminate: Vec<usize>,
    /// Retained factor indices, ascending (inputs first).
    pub retain: Vec<usize>,
    /// `z_e = m0 − M z_r`.
    pub m: DMatrix<f64>,
    pub m0: DVector<f64>,
    /// Polytope on the retained factors.
    pub reduced: HPolytope,
    /// Output map `E z = G_f z_r + c_f`.
    pub g_f: DMatrix<f64>,
    pub c_f: DVector<f64>,
}

impl EliminationPlan {
    /// Recovers the eliminated factors from the retained ones.
    pub fn back_substitute(&self, z_r: &DVector<f64>) -> DVector<f64> {
        &self.m0 - &self.m * z_r
    }
}

/// Splits the lifted polytope `p` of `graph` into eliminated and retained
/// factors. Each linear factor is defined by the first equality row whose
/// last nonzero coefficient is a unit entry in its own column; taken in
/// ascending order these rows form a unit lower-triangular block.
pub fn build_elimination(
    graph: &FactorGraph,
    p: &HPolytope,
    out_rows: &[usize],
) -> Result<EliminationPlan> {
    let n_z = graph.n_z();
    if p.dim() != n_z {
        return shape_err(format!("polytope dimension {} vs {} factors", p.dim(), n_z));
    }
    let candidates = graph.linear_factors();
    let last_nonzero: Vec<Option<usize>> = (0..p.n_eq())
        .map(|i| (0..n_z).rev().find(|&k| p.a[(i, k)] != 0.0))
        .collect();
    let mut used = vec![false; p.n_eq()];
    let mut eliminate = Vec::new();
    let mut def_rows = Vec::new();
    for &j in &candidates {
        let row =
            (0..p.n_eq()).find(|&i| !used[i] && last_nonzero[i] == Some(j) && p.a[(i, j)] == 1.0);
        if let Some(i) = row {
            used[i] = true;
            eliminate.push(j);
            def_rows.push(i);
        }
    }
    let is_e = {
        let mut v = vec![false; n_z];
        for &j in &eliminate {
            v[j] = true;
        }
        v
    };
    let retain: Vec<usize> = (0..n_z).filter(|&j| !is_e[j]).collect();
    let other_rows: Vec<usize> = (0..p.n_eq()).filter(|&i| !used[i]).collect();

    let a_ee = p.a.select_rows(&def_rows).select_columns(&eliminate);
    let a_er = p.a.select_rows(&def_rows).select_columns(&retain);
    let b_e = p.b.select_rows(&def_rows);
    let (m, m0) = if eliminate.is_empty() {
        (DMatrix::zeros(0, retain.len()), DVector::zeros(0))
    } else {
        let m = a_ee
            .solve_lower_triangular(&a_er)
            .ok_or_else(|| Error::Shape("singular elimination block".into()))?;
        let m0 = a_ee
            .solve_lower_triangular(&b_e)
            .ok_or_else(|| Error::Shape("singular elimination block".into()))?;
        (m, m0)
    };

    let h_e = p.h.select_columns(&eliminate);
    let h_r = p.h.select_columns(&retain);
    let a_o = p.a.select_rows(&other_rows);
    let a_re = a_o.select_columns(&eliminate);
    let a_rr = a_o.select_columns(&retain);
    let b_r = p.b.select_rows(&other_rows);
    let reduced = HPolytope::new(
        &h_r - &h_e * &m,
        &p.k - &h_e * &m0,
        &a_rr - &a_re * &m,
        &b_r - &a_re * &m0,
    )?;
    let e = FactorGraph::selector(out_rows, n_z);
    let e_e = e.select_columns(&eliminate);
    let e_r = e.select_columns(&retain);
    Ok(EliminationPlan {
        g_f: &e_r - &e_e * &m,
        c_f: &e_e * &m0,
        eliminate,
        retain,
        m,
        m0,
        reduced,
    })
}

/// Measurement rows `E z = y` on the lifted variables.
fn measurement_polytope(rows: &[usize], y: &[f64], n_z: usize) -> Result<HPolytope> {
    if rows.len() != y.len() {
        return shape_err(format!(
            "expected {} measurements, got {}",
            rows.len(),
            y.len()
        ));
    }
    HPolytope::equalities(
        FactorGraph::selector(rows, n_z),
        DVector::from_column_slice(y),
    )
}

/// `out((inputs × Z) ∩ P)` for the tape `graph`, optionally with the
/// measurement rows and the linear-factor elimination.
#[allow(clippy::too_many_arguments)]
fn lifted_enclosure(
    graph: &FactorGraph,
    inputs: &ConstrainedZonotope,
    input_box: &IntervalVector,
    params: &[f64],
    measured: Option<(&[usize], &[f64])>,
    out_rows: &[usize],
    reduced: bool,
) -> Result<(ConstrainedZonotope, LiftCounts)> {
    let n_s = graph.n_inputs();
    let n_z = graph.n_z();
    if inputs.dim() != n_s || input_box.len() != n_s {
        return shape_err(format!(
            "tape takes {n_s} inputs, input set has {}",
            inputs.dim()
        ));
    }
    let lifted = build_lifted(graph, input_box, params)?;
    let mut p = lifted.polytope;
    if let Some((rows, y)) = measured {
        p = p.intersect(&measurement_polytope(rows, y, n_z)?)?;
    }
    let mut counts = LiftCounts {
        n_s,
        n_z,
        n_h: p.n_ineq(),
        n_eq: p.n_eq(),
        n_e: 0,
    };
    if !reduced {
        let ztilde = IntervalVector(lifted.z.0[n_s..].to_vec());
        let prod = inputs.cartesian(&ConstrainedZonotope::from_interval(&ztilde));
        let x = prod.intersect_hpoly(&p)?;
        let e = FactorGraph::selector(out_rows, n_z);
        return Ok((x.linear_image(&e)?, counts));
    }
    let plan = build_elimination(graph, &p, out_rows)?;
    counts.n_e = plan.eliminate.len();
    let zring: IntervalVector = plan.retain[n_s..].iter().map(|&j| lifted.z[j]).collect();
    let prod = inputs.cartesian(&ConstrainedZonotope::from_interval(&zring));
    let x = prod.intersect_hpoly(&plan.reduced)?;
    let x = x.linear_image(&plan.g_f)?.translate(&plan.c_f)?;
    Ok((x, counts))
}

fn check_dim(z: &ConstrainedZonotope, n: usize, what: &str) -> Result<()> {
    if z.dim() != n {
        return shape_err(format!("{what} has dimension {}, expected {n}", z.dim()));
    }
    Ok(())
}

/// Initial enclosure from the measurement `y0` using the tape of `g`.
pub fn update_initial(
    model: &SystemModel,
    x0: &ConstrainedZonotope,
    v: &ConstrainedZonotope,
    u0: &[f64],
    y0: &[f64],
) -> Result<ConstrainedZonotope> {
    check_dim(x0, model.n_x, "initial set")?;
    check_dim(v, model.n_v, "measurement noise set")?;
    if let Some((c, dv, d)) = &model.g_linear {
        return linear_update(x0, c, dv, d, v, y0);
    }
    let inputs = x0.cartesian(v);
    let sbox = x0.hull()?.concat(&v.hull()?);
    let out: Vec<usize> = (0..model.n_x).collect();
    let g = &model.g_graph;
    let (x, _) = lifted_enclosure(g, &inputs, &sbox, u0, Some((g.outputs(), y0)), &out, false)?;
    Ok(x)
}

/// `X ∩_C ((y − d) ⊕ (−D_v V))`.
fn linear_update(
    x: &ConstrainedZonotope,
    c: &DMatrix<f64>,
    dv: &DMatrix<f64>,
    d: &DVector<f64>,
    v: &ConstrainedZonotope,
    y: &[f64],
) -> Result<ConstrainedZonotope> {
    if y.len() != c.nrows() {
        return shape_err(format!(
            "expected {} measurements, got {}",
            c.nrows(),
            y.len()
        ));
    }
    let ymd = DVector::from_column_slice(y) - d;
    let yset = v.linear_image(&(-dv))?.translate(&ymd)?;
    x.generalized_intersection(c, &yset)
}

fn predict_impl(
    model: &SystemModel,
    xprev: &ConstrainedZonotope,
    xprev_hull: &IntervalVector,
    w: &ConstrainedZonotope,
    w_hull: &IntervalVector,
    u: &[f64],
    reduced: bool,
) -> Result<(ConstrainedZonotope, LiftCounts)> {
    check_dim(xprev, model.n_x, "previous enclosure")?;
    check_dim(w, model.n_w, "disturbance set")?;
    let f = &model.f_graph;
    let inputs = xprev.cartesian(w);
    let sbox = xprev_hull.concat(w_hull);
    lifted_enclosure(f, &inputs, &sbox, u, None, f.outputs(), reduced)
}

/// Predicted set using the tape of `f` alone.
pub fn predict(
    model: &SystemModel,
    xprev: &ConstrainedZonotope,
    w: &ConstrainedZonotope,
    u: &[f64],
) -> Result<ConstrainedZonotope> {
    predict_impl(model, xprev, &xprev.hull()?, w, &w.hull()?, u, false).map(|r| r.0)
}

/// [`predict`] with linear factors eliminated.
pub fn predict_reduced(
    model: &SystemModel,
    xprev: &ConstrainedZonotope,
    w: &ConstrainedZonotope,
    u: &[f64],
) -> Result<ConstrainedZonotope> {
    predict_impl(model, xprev, &xprev.hull()?, w, &w.hull()?, u, true).map(|r| r.0)
}

/// Combined prediction and measurement update on the composite tape.
#[allow(clippy::too_many_arguments)]
fn predict_update_impl(
    model: &SystemModel,
    xprev: &ConstrainedZonotope,
    sbox: &IntervalVector,
    w: &ConstrainedZonotope,
    v: &ConstrainedZonotope,
    params: &[f64],
    y: &[f64],
    reduced: bool,
) -> Result<(ConstrainedZonotope, LiftCounts)> {
    check_dim(xprev, model.n_x, "previous enclosure")?;
    check_dim(w, model.n_w, "disturbance set")?;
    check_dim(v, model.n_v, "measurement noise set")?;
    let inputs = xprev.cartesian(w).cartesian(v);
    let ell = &model.ell;
    lifted_enclosure(
        &ell.graph,
        &inputs,
        sbox,
        params,
        Some((&ell.ell_rows, y)),
        &ell.f_rows,
        reduced,
    )
}

fn ell_params(u_prev: &[f64], u_now: &[f64]) -> Vec<f64> {
    u_prev.iter().chain(u_now).copied().collect()
}

fn ell_box(
    xprev: &ConstrainedZonotope,
    w: &ConstrainedZonotope,
    v: &ConstrainedZonotope,
) -> Result<IntervalVector> {
    Ok(xprev.hull()?.concat(&w.hull()?).concat(&v.hull()?))
}

/// Full-form combined step.
pub fn predict_update_full(
    model: &SystemModel,
    xprev: &ConstrainedZonotope,
    w: &ConstrainedZonotope,
    v: &ConstrainedZonotope,
    u_prev: &[f64],
    u_now: &[f64],
    y: &[f64],
) -> Result<ConstrainedZonotope> {
    let sbox = ell_box(xprev, w, v)?;
    predict_update_impl(
        model,
        xprev,
        &sbox,
        w,
        v,
        &ell_params(u_prev, u_now),
        y,
        false,
    )
    .map(|r| r.0)
}

/// Combined step with linear factors eliminated.
pub fn predict_update_reduced(
    model: &SystemModel,
    xprev: &ConstrainedZonotope,
    w: &ConstrainedZonotope,
    v: &ConstrainedZonotope,
    u_prev: &[f64],
    u_now: &[f64],
    y: &[f64],
) -> Result<ConstrainedZonotope> {
    let sbox = ell_box(xprev, w, v)?;
    predict_update_impl(
        model,
        xprev,
        &sbox,
        w,
        v,
        &ell_params(u_prev, u_now),
        y,
        true,
    )
    .map(|r| r.0)
}

/// Full and reduced combined steps with their lift sizes, for audits.
#[allow(clippy::too_many_arguments)]
pub fn predict_update_both(
    model: &SystemModel,
    xprev: &ConstrainedZonotope,
    w: &ConstrainedZonotope,
    v: &ConstrainedZonotope,
    u_prev: &[f64],
    u_now: &[f64],
    y: &[f64],
) -> Result<(
    (ConstrainedZonotope, LiftCounts),
    (ConstrainedZonotope, LiftCounts),
)> {
    let sbox = ell_box(xprev, w, v)?;
    let p = ell_params(u_prev, u_now);
    let full = predict_update_impl(model, xprev, &sbox, w, v, &p, y, false)?;
    let red = predict_update_impl(model, xprev, &sbox, w, v, &p, y, true)?;
    Ok((full, red))
}

/// Runs the recursion for one system with fixed uncertainty sets.
#[derive(Debug, Clone)]
pub struct Estimator {
    pub model: SystemModel,
    pub w: ConstrainedZonotope,
    pub v: ConstrainedZonotope,
    pub limits: Limits,
    w_hull: IntervalVector,
    v_hull: IntervalVector,
}

impl Estimator {
    pub fn new(
        model: SystemModel,
        w: ConstrainedZonotope,
        v: ConstrainedZonotope,
        limits: Limits,
    ) -> Result<Self> {
        check_dim(&w, model.n_w, "disturbance set")?;
        check_dim(&v, model.n_v, "measurement noise set")?;
        let w_hull = w.hull()?;
        let v_hull = v.hull()?;
        Ok(Estimator {
            model,
            w,
            v,
            limits,
            w_hull,
            v_hull,
        })
    }

    fn finish(
        &self,
        k: usize,
        x: ConstrainedZonotope,
        lift: LiftCounts,
        start: Instant,
    ) -> Result<EstimatorState> {
        let (n_g_pre, n_c_pre) = (x.n_g(), x.n_c());
        let xhat = x.reduce(self.limits.max_gens, self.limits.max_cons);
        let hull = xhat.hull()?;
        Ok(EstimatorState {
            k,
            diagnostics: StepDiagnostics {
                n_g_pre,
                n_c_pre,
                n_g: xhat.n_g(),
                n_c: xhat.n_c(),
                lift,
                step_seconds: start.elapsed().as_secs_f64(),
            },
            xhat,
            hull,
        })
    }

    /// Enclosure at `k = 0` from the initial set and first measurement.
    pub fn initialize(
        &self,
        x0: &ConstrainedZonotope,
        u0: &[f64],
        y0: &[f64],
    ) -> Result<EstimatorState> {
        let start = Instant::now();
        let x = update_initial(&self.model, x0, &self.v, u0, y0)?;
        self.finish(0, x, LiftCounts::default(), start)
    }

    /// One step of the recursion from `state` to `state.k + 1`.
    pub fn step(
        &self,
        state: &EstimatorState,
        u_prev: &[f64],
        u_now: &[f64],
        y: &[f64],
    ) -> Result<EstimatorState> {
        let start = Instant::now();
        let k = state.k + 1;
        let (x, lift) = match &self.model.g_linear {
            Some((c, dv, d)) => {
                let (xbar, lift) = predict_impl(
                    &self.model,
                    &state.xhat,
                    &state.hull,
                    &self.w,
                    &self.w_hull,
                    u_prev,
                    true,
                )?;
                (linear_update(&xbar, c, dv, d, &self.v, y)?, lift)
            }
            None => {
                let sbox = state.hull.concat(&self.w_hull).concat(&self.v_hull);
                predict_update_impl(
                    &self.model,
                    &state.xhat,
                    &sbox,
                    &self.w,
                    &self.v,
                    &ell_params(u_prev, u_now),
                    y,
                    true,
                )?
            }
        };
        self.finish(k, x, lift, start)
    }
}

/// Free-function form of [`Estimator::step`].
#[allow(clippy::too_many_arguments)]
pub fn estimate_step(
    state: &EstimatorState,
    model: &SystemModel,
    w: &ConstrainedZonotope,
    v: &ConstrainedZonotope,
    u_prev: &[f64],
    u_now: &[f64],
    y: &[f64],
    limits: Limits,
) -> Result<EstimatorState> {
    Estimator::new(model.clone(), w.clone(), v.clone(), limits)?.step(state, u_prev, u_now, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorgraph::{record, Real};
    use crate::interval::Interval;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn boxset(lo: &[f64], hi: &[f64]) -> ConstrainedZonotope {
        ConstrainedZonotope::from_interval(&IntervalVector::from_bounds(lo, hi).unwrap())
    }

    fn ex1_f<T: Real>(x: &[T], w: &[T]) -> Vec<T> {
        let (x1, x2) = (x[0], x[1]);
        let d = x1 + 4.0;
        vec![
            x1 * 3.0 - x1.powi(2) / 7.0 - x1 * x2 * 4.0 / d + w[0],
            x2 * -2.0 + x1 * x2 * 3.0 / d + w[1],
        ]
    }

    fn ex1_g<T: Real>(x: &[T], v: &[T]) -> Vec<T> {
        vec![x[0] - (x[1] / 2.0).sin() + v[0], -x[0] * x[1] + x[1] + v[1]]
    }

    fn ex1_model() -> SystemModel {
        let f = record(4, 0, |s, _| ex1_f(&s[..2], &s[2..])).unwrap();
        let g = record(4, 0, |s, _| ex1_g(&s[..2], &s[2..])).unwrap();
        SystemModel::new(f, g, 2).unwrap()
    }

    #[test]
    fn identity_prediction_keeps_set() {
        let f = record(2, 0, |s, _| vec![s[0] + s[1]]).unwrap();
        let g = record(1, 0, |s, _| vec![s[0]]).unwrap();
        let m = SystemModel::new(f, g, 1).unwrap();
        let x = boxset(&[0.0], &[1.0]);
        let w = ConstrainedZonotope::point(&[0.0]);
        let xbar = predict(&m, &x, &w, &[]).unwrap();
        assert!(xbar.contains(&[0.5]).unwrap());
        let h = xbar.hull().unwrap();
        assert!((h[0].lo).abs() < 1e-9 && (h[0].hi - 1.0).abs() < 1e-9);
    }

    #[test]
    fn square_prediction_bounds() {
        let f = record(2, 0, |s, _| vec![s[0].powi(2) + s[1]]).unwrap();
        let g = record(1, 0, |s, _| vec![s[0]]).unwrap();
        let m = SystemModel::new(f, g, 1).unwrap();
        let x = boxset(&[0.0], &[1.0]);
        let w = ConstrainedZonotope::point(&[0.0]);
        for xbar in [
            predict(&m, &x, &w, &[]).unwrap(),
            predict_reduced(&m, &x, &w, &[]).unwrap(),
        ] {
            let h = xbar.hull().unwrap();
            assert!(h[0].lo >= -0.25 - 1e-9 && h[0].hi <= 1.0 + 1e-9);
            for k in 0..=20 {
                let s = k as f64 / 20.0;
                assert!(xbar.contains(&[s * s]).unwrap());
            }
        }
    }

    #[test]
    fn linear_exact_measurement_collapses() {
        let f = record(1, 0, |s, _| vec![s[0]]).unwrap();
        let g = record(2, 0, |s, _| vec![s[0] + s[1]]).unwrap();
        let m = SystemModel::new(f, g, 1).unwrap();
        assert!(m.g_is_linear());
        let x0 = boxset(&[0.0], &[2.0]);
        let v = ConstrainedZonotope::point(&[0.0]);
        let x = update_initial(&m, &x0, &v, &[], &[1.5]).unwrap();
        let h = x.hull().unwrap();
        assert!((h[0].lo - 1.5).abs() < 1e-9 && (h[0].hi - 1.5).abs() < 1e-9);
    }

    #[test]
    fn vacuous_measurement_keeps_initial_set() {
        let f = record(1, 0, |s, _| vec![s[0]]).unwrap();
        let g = record(2, 0, |s, _| vec![s[0] * 0.0 + s[1] * 0.0]).unwrap();
        let m = SystemModel::new(f, g, 1).unwrap();
        let x0 = boxset(&[0.0], &[2.0]);
        let v = boxset(&[-100.0], &[100.0]);
        let x = update_initial(&m, &x0, &v, &[], &[0.0]).unwrap();
        let h = x.hull().unwrap();
        assert!(h[0].lo <= 1e-9 && h[0].hi >= 2.0 - 1e-9);
    }

    #[test]
    fn initial_update_contains_consistent_states() {
        let m = ex1_model();
        assert!(!m.g_is_linear());
        let x0 = ConstrainedZonotope::zonotope(
            DMatrix::from_row_slice(2, 3, &[0.5, 1.0, -0.5, 0.5, 0.5, 0.0]),
            DVector::from_vec(vec![5.0, 0.5]),
        )
        .unwrap();
        let v = boxset(&[-0.4, -0.4], &[0.4, 0.4]);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..30 {
            let xi: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x = &x0.g * DVector::from_vec(xi) + &x0.c;
            let vv = [rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)];
            let y = ex1_g(x.as_slice(), &vv);
            let xh = update_initial(&m, &x0, &v, &[], &y).unwrap();
            assert!(xh.contains(x.as_slice()).unwrap());
        }
    }

    #[test]
    fn elimination_blocks_round_trip() {
        let m = ex1_model();
        let g = &m.ell.graph;
        let sbox = IntervalVector::from_bounds(
            &[4.0, 0.0, -0.8, -0.8, -0.4, -0.4],
            &[6.0, 1.0, 0.8, 0.8, 0.4, 0.4],
        )
        .unwrap();
        let lifted = build_lifted(g, &sbox, &[]).unwrap();
        let plan = build_elimination(g, &lifted.polytope, &m.ell.f_rows).unwrap();
        assert_eq!(plan.eliminate, g.linear_factors());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let s: Vec<f64> = (0..6)
                .map(|i| rng.gen_range(sbox[i].lo..=sbox[i].hi))
                .collect();
            let (z, _) = g.eval_real(&s, &[]).unwrap();
            let zr = DVector::from_fn(plan.retain.len(), |i, _| z[plan.retain[i]]);
            let ze = plan.back_substitute(&zr);
            for (k, &j) in plan.eliminate.iter().enumerate() {
                assert!((ze[k] - z[j]).abs() <= 1e-12 * (1.0 + z[j].abs()));
            }
        }
        // no linear factors: plan is the identity
        let prod = record(2, 0, |s, _| vec![s[0] * s[1]]).unwrap();
        let l = build_lifted(
            &prod,
            &IntervalVector(vec![Interval::new(0.0, 1.0); 2]),
            &[],
        )
        .unwrap();
        let plan = build_elimination(&prod, &l.polytope, prod.outputs()).unwrap();
        assert!(plan.eliminate.is_empty());
        assert_eq!(plan.reduced, l.polytope);
        assert_eq!(plan.g_f, prod.output_selector());
    }

    #[test]
    fn full_and_reduced_agree_and_contain_truth() {
        let m = ex1_model();
        let x0 = ConstrainedZonotope::zonotope(
            DMatrix::from_row_slice(2, 3, &[0.5, 1.0, -0.5, 0.5, 0.5, 0.0]),
            DVector::from_vec(vec![5.0, 0.5]),
        )
        .unwrap();
        let w = boxset(&[-0.8, -0.8], &[0.8, 0.8]);
        let v = boxset(&[-0.4, -0.4], &[0.4, 0.4]);
        let x = [5.2, 0.65];
        let x1 = ex1_f(&x, &[0.3, -0.2]);
        let y1 = ex1_g(&x1, &[0.1, 0.05]);
        let ((full, cf), (red, cr)) = predict_update_both(&m, &x0, &w, &v, &[], &[], &y1).unwrap();
        assert!(full.contains(&x1).unwrap());
        assert!(red.contains(&x1).unwrap());
        assert_eq!(full.n_g() - red.n_g(), cr.n_e);
        assert_eq!(full.n_c() - red.n_c(), cr.n_e);
        assert_eq!(full.n_g(), 3 + 2 + 2 + (cf.n_z - cf.n_s) + cf.n_h);
        assert_eq!(full.n_c(), cf.n_h + cf.n_eq);
        let (hf, hr) = (full.hull().unwrap(), red.hull().unwrap());
        for (a, b) in hf.iter().zip(hr.iter()) {
            let tol = 1e-6 * (1.0 + a.width());
            assert!(
                (a.lo - b.lo).abs() <= tol && (a.hi - b.hi).abs() <= tol,
                "{a} vs {b}"
            );
        }
    }
}
