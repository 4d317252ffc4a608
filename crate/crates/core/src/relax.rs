//! Halfspace enclosures of elementary operations and the lifted polytope
//! of a whole tape.
//!
//! Every non-input factor `j` contributes rows linking `z_j` to its
//! arguments: one equality for linear factors, McCormick inequalities for
//! products and quotients, and tangent/secant cuts for univariate
//! functions. Intersecting them gives a polytope in factor space that
//! contains every tape trajectory started in the input box.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::factorgraph::{FactorGraph, OpKind};
use crate::interval::{ElemFn, Interval, IntervalVector};
use crate::polytope::HPolytope;

const BISECT_TOL: f64 = 1e-12;
const BISECT_MAX_ITER: usize = 200;
const MIN_SECANT_WIDTH: f64 = 1e-12;

/// Sparse linear row `Σ coeffs · z ≤ rhs` (or `= rhs`).
#[derive(Debug, Clone, PartialEq)]
pub struct LinRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
    /// Argument values at which a univariate cut touches the graph.
    pub touch: Vec<f64>,
}

impl LinRow {
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(i, c)| c * z[i]).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Rows {
    pub ineq: Vec<LinRow>,
    pub eq: Vec<LinRow>,
}

impl Rows {
    /// Largest violation of any row at `z` (0 if all hold).
    pub fn violation(&self, z: &[f64]) -> f64 {
        let vi = self.ineq.iter().map(|r| r.eval(z) - r.rhs);
        let ve = self.eq.iter().map(|r| (r.eval(z) - r.rhs).abs());
        vi.chain(ve).fold(0.0, f64::max)
    }

    /// Scale-aware check: each row may be off by `tol · (1 + Σ|c z| + |rhs|)`.
    pub fn satisfied(&self, z: &[f64], tol: f64) -> bool {
        let scale = |r: &LinRow| {
            1.0 + r.rhs.abs() + r.coeffs.iter().map(|&(i, c)| (c * z[i]).abs()).sum::<f64>()
        };
        self.ineq
            .iter()
            .all(|r| r.eval(z) - r.rhs <= tol * scale(r))
            && self
                .eq
                .iter()
                .all(|r| (r.eval(z) - r.rhs).abs() <= tol * scale(r))
    }

    fn extend(&mut self, other: Rows) {
        self.ineq.extend(other.ineq);
        self.eq.extend(other.eq);
    }

    /// `z_j ≥ slope · z_a + icpt`.
    fn lower(&mut self, j: usize, a: usize, line: Line) {
        self.ineq.push(LinRow {
            coeffs: vec![(a, line.slope), (j, -1.0)],
            rhs: -line.icpt,
            touch: line.touch,
        });
    }

    /// `z_j ≤ slope · z_a + icpt`.
    fn upper(&mut self, j: usize, a: usize, line: Line) {
        self.ineq.push(LinRow {
            coeffs: vec![(a, -line.slope), (j, 1.0)],
            rhs: line.icpt,
            touch: line.touch,
        });
    }

    fn equality(&mut self, coeffs: Vec<(usize, f64)>, rhs: f64) {
        self.eq.push(LinRow {
            coeffs,
            rhs,
            touch: vec![],
        });
    }
}

/// `y = slope · x + icpt`, with the points where it touches the curve.
#[derive(Debug, Clone, PartialEq)]
struct Line {
    slope: f64,
    icpt: f64,
    touch: Vec<f64>,
}

impl Line {
    fn tangent(f: &dyn Fn(f64) -> f64, df: &dyn Fn(f64) -> f64, p: f64) -> Line {
        let s = df(p);
        Line {
            slope: s,
            icpt: f(p) - s * p,
            touch: vec![p],
        }
    }

    /// Chord between `p` and `q`; a midpoint tangent when they nearly coincide.
    fn secant(f: &dyn Fn(f64) -> f64, df: &dyn Fn(f64) -> f64, p: f64, q: f64) -> Line {
        if q - p < MIN_SECANT_WIDTH {
            return Line::tangent(f, df, 0.5 * (p + q));
        }
        let (fp, fq) = (f(p), f(q));
        let s = (fq - fp) / (q - p);
        Line {
            slope: s,
            icpt: fp - s * p,
            touch: vec![p, q],
        }
    }

    /// Reflection `x ↦ -x`, `y ↦ -y`.
    fn reflect(self) -> Line {
        Line {
            slope: self.slope,
            icpt: -self.icpt,
            touch: self.touch.into_iter().map(|t| -t).collect(),
        }
    }
}

/// Kinds handled by [`relax_arith`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArithKind {
    Add,
    Sub,
    Mul,
    Div,
    /// `z_j = q z_a + r`.
    Affine {
        q: f64,
        r: f64,
    },
}

/// McCormick rows for `z_j = z_a z_b` over `Z_a × Z_b`.
fn mccormick(rows: &mut Rows, j: usize, a: usize, b: usize, za: Interval, zb: Interval) {
    let (al, au, bl, bu) = (za.lo, za.hi, zb.lo, zb.hi);
    // z_j ≥ al z_b + bl z_a − al bl
    rows.ineq.push(LinRow {
        coeffs: vec![(b, al), (a, bl), (j, -1.0)],
        rhs: al * bl,
        touch: vec![],
    });
    // z_j ≥ au z_b + bu z_a − au bu
    rows.ineq.push(LinRow {
        coeffs: vec![(b, au), (a, bu), (j, -1.0)],
        rhs: au * bu,
        touch: vec![],
    });
    // z_j ≤ au z_b + bl z_a − au bl
    rows.ineq.push(LinRow {
        coeffs: vec![(j, 1.0), (b, -au), (a, -bl)],
        rhs: -au * bl,
        touch: vec![],
    });
    // z_j ≤ al z_b + bu z_a − al bu
    rows.ineq.push(LinRow {
        coeffs: vec![(j, 1.0), (b, -al), (a, -bu)],
        rhs: -al * bu,
        touch: vec![],
    });
}

/// Rows for arithmetic factors. `b` is ignored for affine factors.
pub fn relax_arith(
    j: usize,
    kind: ArithKind,
    a: usize,
    b: usize,
    z: &IntervalVector,
) -> Result<Rows> {
    let mut rows = Rows::default();
    match kind {
        ArithKind::Add => rows.equality(vec![(j, 1.0), (a, -1.0), (b, -1.0)], 0.0),
        ArithKind::Sub => rows.equality(vec![(j, 1.0), (a, -1.0), (b, 1.0)], 0.0),
        ArithKind::Affine { q, r } => rows.equality(vec![(j, 1.0), (a, -q)], r),
        ArithKind::Mul => mccormick(&mut rows, j, a, b, z[a], z[b]),
        ArithKind::Div => {
            if z[b].contains_zero() {
                return Err(Error::Domain(format!(
                    "quotient factor {j}: denominator interval {} contains zero",
                    z[b]
                )));
            }
            // z_a = z_b z_j
            mccormick(&mut rows, a, b, j, z[b], z[j]);
        }
    }
    Ok(rows)
}

fn degenerate_rows(j: usize, a: usize, c: f64, fc: f64) -> Rows {
    let mut rows = Rows::default();
    rows.equality(vec![(a, 1.0)], c);
    rows.equality(vec![(j, 1.0)], fc);
    rows
}

/// Tangents at the endpoints and midpoint on one side, secant on the other.
fn three_tangents_and_secant(
    rows: &mut Rows,
    j: usize,
    a: usize,
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
    x: Interval,
    convex: bool,
) {
    for p in [x.lo, x.mid(), x.hi] {
        let t = Line::tangent(f, df, p);
        if convex {
            rows.lower(j, a, t);
        } else {
            rows.upper(j, a, t);
        }
    }
    let s = Line::secant(f, df, x.lo, x.hi);
    if convex {
        rows.upper(j, a, s);
    } else {
        rows.lower(j, a, s);
    }
}

/// Root of `(q−1)κ^q + qκ^{q−1} − 1` on `[0, 1]`. The tangent to `t^q` at
/// `κ·L` passes through `(−L, −L^q)` for every `L > 0`.
pub fn odd_power_tangency_ratio(q: i32) -> f64 {
    let h = |k: f64| (q - 1) as f64 * k.powi(q) + q as f64 * k.powi(q - 1) - 1.0;
    bisect(h, 0.0, 1.0)
}

/// Under-side lines for an odd power on `[l, u]` with `l < 0 < u`.
fn odd_power_under(q: i32, l: f64, u: f64) -> Vec<Line> {
    let f = move |t: f64| t.powi(q);
    let df = move |t: f64| q as f64 * t.powi(q - 1);
    let t = odd_power_tangency_ratio(q) * -l;
    if t >= u {
        return vec![Line::secant(&f, &df, l, u)];
    }
    let mut through = Line::tangent(&f, &df, t);
    through.touch.push(l);
    vec![
        through,
        Line::tangent(&f, &df, 0.5 * (t + u)),
        Line::tangent(&f, &df, u),
    ]
}

/// Rows for `z_j = β(z_a)` with β among exp, ln and integer powers.
pub fn relax_univariate(j: usize, func: ElemFn, a: usize, z: &IntervalVector) -> Result<Rows> {
    let x = z[a];
    let mut rows = Rows::default();
    match func {
        ElemFn::Exp => {
            if x.is_degenerate() {
                return Ok(degenerate_rows(j, a, x.lo, x.lo.exp()));
            }
            three_tangents_and_secant(&mut rows, j, a, &f64::exp, &f64::exp, x, true);
        }
        ElemFn::Ln => {
            if x.lo <= 0.0 {
                return Err(Error::Domain(format!("logarithm factor {j} over {x}")));
            }
            if x.is_degenerate() {
                return Ok(degenerate_rows(j, a, x.lo, x.lo.ln()));
            }
            three_tangents_and_secant(&mut rows, j, a, &f64::ln, &|t| 1.0 / t, x, false);
        }
        ElemFn::Pow(q) => {
            if q < 2 {
                return Err(Error::UnsupportedOp(format!("power {q} in a relaxation")));
            }
            let f = move |t: f64| t.powi(q);
            let df = move |t: f64| q as f64 * t.powi(q - 1);
            if x.is_degenerate() {
                return Ok(degenerate_rows(j, a, x.lo, f(x.lo)));
            }
            if q % 2 == 0 || x.lo >= 0.0 {
                three_tangents_and_secant(&mut rows, j, a, &f, &df, x, true);
            } else if x.hi <= 0.0 {
                three_tangents_and_secant(&mut rows, j, a, &f, &df, x, false);
            } else {
                for line in odd_power_under(q, x.lo, x.hi) {
                    rows.lower(j, a, line);
                }
                for line in odd_power_under(q, -x.hi, -x.lo) {
                    rows.upper(j, a, line.reflect());
                }
            }
        }
        ElemFn::Sin => return Ok(relax_sin(j, a, z)),
        ElemFn::Cos => {
            return Err(Error::UnsupportedOp(
                "cosine factors are relaxed through their shifted argument".into(),
            ))
        }
    }
    Ok(rows)
}

fn bisect(h: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let hlo = h(lo);
    for _ in 0..BISECT_MAX_ITER {
        if hi - lo <= BISECT_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let hm = h(mid);
        if hm == 0.0 {
            return mid;
        }
        if (hm > 0.0) == (hlo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Point in `[3π/2, 2π]` where the tangent to sine passes through `(u, sin u)`;
/// requires `u ≥ 2π`.
pub fn sine_tangency_right(u: f64) -> f64 {
    bisect(|t| u.sin() - t.sin() - (u - t) * t.cos(), 1.5 * PI, TAU)
}

/// Point in `[3π, 7π/2]` where the tangent to sine passes through `(l, sin l)`;
/// requires `l ≤ 3π`.
pub fn sine_tangency_left(l: f64) -> f64 {
    bisect(
        |t| t.sin() - l.sin() - (t - l) * t.cos(),
        3.0 * PI,
        3.5 * PI,
    )
}

fn median3(a: f64, b: f64, c: f64) -> f64 {
    a.max(b).min(a.min(b).max(c))
}

/// Convex underestimating lines of sine on `[gl, gh] ⊂ [3π/2, 7π/2]`,
/// written in the shifted variable `γ = z − shift`.
fn sine_window_lines(gl: f64, gh: f64, shift: f64, out: &mut Vec<Line>) {
    let sin = |t: f64| t.sin();
    let cos = |t: f64| t.cos();
    let v1 = if gh <= TAU {
        TAU
    } else {
        sine_tangency_right(gh)
    };
    let v2 = if gl >= 3.0 * PI {
        3.0 * PI
    } else {
        sine_tangency_left(gl)
    };
    let rho_lo = median3(gl, gh, v1);
    let rho_hi = median3(gl, gh, v2);
    let mut lines = Vec::new();
    if rho_lo > gl {
        for p in [gl, 0.5 * (gl + rho_lo), rho_lo] {
            lines.push(Line::tangent(&sin, &cos, p));
        }
    }
    if rho_lo < rho_hi {
        lines.push(Line::secant(&sin, &cos, rho_lo, rho_hi));
    }
    if gh > rho_hi {
        for p in [rho_hi, 0.5 * (rho_hi + gh), gh] {
            lines.push(Line::tangent(&sin, &cos, p));
        }
    }
    if lines.is_empty() {
        lines.push(Line::tangent(&sin, &cos, gl));
    }
    // Back to the original variable: y = s (z − shift) + t.
    out.extend(lines.into_iter().map(|l| Line {
        slope: l.slope,
        icpt: l.icpt - l.slope * shift,
        touch: l.touch.into_iter().map(|p| p + shift).collect(),
    }));
}

/// Shift `2(m−1)π` placing `x` in `[3π/2, 7π/2)`.
fn window_shift_lo(x: f64) -> f64 {
    let mut m = (x / TAU + 0.25).floor();
    let shift = |m: f64| 2.0 * (m - 1.0) * PI;
    while x - shift(m) >= 3.5 * PI {
        m += 1.0;
    }
    while x - shift(m) < 1.5 * PI {
        m -= 1.0;
    }
    shift(m)
}

/// Shift `2(m−1)π` placing `x` in `(3π/2, 7π/2]`.
fn window_shift_hi(x: f64) -> f64 {
    let w = x / TAU + 0.25;
    let mut m = if w == w.floor() { w - 1.0 } else { w.floor() };
    let shift = |m: f64| 2.0 * (m - 1.0) * PI;
    while x - shift(m) > 3.5 * PI {
        m += 1.0;
    }
    while x - shift(m) <= 1.5 * PI {
        m -= 1.0;
    }
    shift(m)
}

/// Lines `ℓ` with `sin z ≥ ℓ(z)` for all `z ∈ [l, u]`.
fn sine_under_lines(l: f64, u: f64) -> Vec<Line> {
    let mut out = Vec::new();
    let s1 = window_shift_lo(l);
    let s2 = window_shift_hi(u);
    let gl = l - s1;
    let gh = (u - s1).min(3.5 * PI);
    sine_window_lines(gl, gh, s1, &mut out);
    if s2 != s1 {
        sine_window_lines(1.5 * PI, u - s2, s2, &mut out);
        out.push(Line {
            slope: 0.0,
            icpt: -1.0,
            touch: vec![],
        });
    }
    out
}

/// Rows enclosing `z_j = sin(z_a)` over `Z_a`.
pub fn relax_sin(j: usize, a: usize, z: &IntervalVector) -> Rows {
    let x = z[a];
    if x.is_degenerate() {
        return degenerate_rows(j, a, x.lo, x.lo.sin());
    }
    let mut rows = Rows::default();
    for line in sine_under_lines(x.lo, x.hi) {
        rows.lower(j, a, line);
    }
    for line in sine_under_lines(-x.hi, -x.lo) {
        rows.upper(j, a, line.reflect());
    }
    rows
}

/// Rows for `z_j = cos(z_a)` through the shifted factor `z_b = z_a + π/2`:
/// one equality for the shift and the sine rows on `z_b`.
pub fn relax_cos(j: usize, a: usize, b: usize, z: &IntervalVector) -> Rows {
    let mut rows = Rows::default();
    rows.equality(vec![(b, 1.0), (a, -1.0)], std::f64::consts::FRAC_PI_2);
    rows.extend(relax_sin(j, b, z));
    rows
}

/// Rows contributed by factor `j` of `graph` (none for inputs). For cosine
/// factors the shift equality belongs to the shift factor itself.
pub fn relax_factor(
    graph: &FactorGraph,
    j: usize,
    z: &IntervalVector,
    params: &[f64],
) -> Result<Rows> {
    let op = graph.node(j);
    let b = op.b.unwrap_or(op.a);
    match op.kind {
        OpKind::Input => Ok(Rows::default()),
        OpKind::Add => relax_arith(j, ArithKind::Add, op.a, b, z),
        OpKind::Sub => relax_arith(j, ArithKind::Sub, op.a, b, z),
        OpKind::Mul => relax_arith(j, ArithKind::Mul, op.a, b, z),
        OpKind::Div => relax_arith(j, ArithKind::Div, op.a, b, z),
        OpKind::Affine { .. } => {
            let (q, r) = op.affine_coefficients(params).expect("affine factor");
            relax_arith(j, ArithKind::Affine { q, r }, op.a, b, z)
        }
        OpKind::Exp => relax_univariate(j, ElemFn::Exp, op.a, z),
        OpKind::Ln => relax_univariate(j, ElemFn::Ln, op.a, z),
        OpKind::Pow(q) => relax_univariate(j, ElemFn::Pow(q), op.a, z),
        OpKind::Sin => Ok(relax_sin(j, op.a, z)),
        OpKind::Cos => Ok(relax_sin(j, b, z)),
    }
}

/// Lifted polytope of a tape over an input box, with the factor intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedRelaxation {
    pub polytope: HPolytope,
    pub z: IntervalVector,
}

fn assemble(rows: &[LinRow], n: usize) -> (DMatrix<f64>, DVector<f64>) {
    let mut m = DMatrix::zeros(rows.len(), n);
    let mut v = DVector::zeros(rows.len());
    for (i, r) in rows.iter().enumerate() {
        for &(k, c) in &r.coeffs {
            m[(i, k)] += c;
        }
        v[i] = r.rhs;
    }
    (m, v)
}

pub fn build_lifted(
    graph: &FactorGraph,
    s: &IntervalVector,
    params: &[f64],
) -> Result<LiftedRelaxation> {
    let z = graph.eval_interval(s, params)?;
    let mut rows = Rows::default();
    for j in graph.n_inputs()..graph.n_z() {
        rows.extend(relax_factor(graph, j, &z, params)?);
    }
    let (h, k) = assemble(&rows.ineq, graph.n_z());
    let (a, b) = assemble(&rows.eq, graph.n_z());
    Ok(LiftedRelaxation {
        polytope: HPolytope::new(h, k, a, b)?,
        z,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factorgraph::{record, Real};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn iv1(lo: f64, hi: f64) -> IntervalVector {
        IntervalVector(vec![Interval::new(lo, hi), Interval::new(-1e9, 1e9)])
    }

    #[test]
    fn add_row_layout() {
        let z = IntervalVector(vec![Interval::new(0.0, 1.0); 3]);
        let r = relax_arith(2, ArithKind::Add, 0, 1, &z).unwrap();
        assert!(r.ineq.is_empty());
        assert_eq!(r.eq[0].coeffs, vec![(2, 1.0), (0, -1.0), (1, -1.0)]);
        assert_eq!(r.eq[0].rhs, 0.0);
    }

    #[test]
    fn mccormick_example() {
        let z = IntervalVector(vec![
            Interval::new(0.0, 1.0),
            Interval::new(0.0, 1.0),
            Interval::new(0.0, 1.0),
        ]);
        let r = relax_arith(2, ArithKind::Mul, 0, 1, &z).unwrap();
        assert_eq!(r.ineq.len(), 4);
        assert!(r.satisfied(&[0.5, 0.5, 0.25], 0.0));
        assert!(!r.satisfied(&[0.5, 0.5, 0.6], 1e-9));
        let bad = IntervalVector(vec![
            Interval::new(1.0, 2.0),
            Interval::new(-1.0, 1.0),
            Interval::new(0.0, 1.0),
        ]);
        assert!(matches!(
            relax_arith(2, ArithKind::Div, 0, 1, &bad),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn affine_is_exact() {
        let z = IntervalVector(vec![Interval::new(-2.0, 2.0), Interval::new(-5.0, 7.0)]);
        let r = relax_arith(1, ArithKind::Affine { q: 3.0, r: 1.0 }, 0, 0, &z).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let x = rng.gen_range(-2.0..2.0);
            assert!(r.satisfied(&[x, 3.0 * x + 1.0], 1e-12));
            assert!(!r.satisfied(&[x, 3.0 * x + 1.1], 1e-9));
        }
    }

    #[test]
    fn exp_secant_example() {
        let r = relax_univariate(1, ElemFn::Exp, 0, &iv1(0.0, 1.0)).unwrap();
        let secant = r.ineq.iter().find(|row| row.touch.len() == 2).unwrap();
        // z_j ≤ (e−1) z_a + 1
        assert!((secant.coeffs[0].1 + (std::f64::consts::E - 1.0)).abs() < 1e-12);
        assert!((secant.rhs - 1.0).abs() < 1e-12);
        let x = 0.5f64;
        assert!(r.satisfied(&[x, x.exp()], 1e-12));
    }

    #[test]
    fn square_rows_example() {
        let r = relax_univariate(1, ElemFn::Pow(2), 0, &iv1(-1.0, 2.0)).unwrap();
        assert_eq!(r.ineq.len(), 4);
        // secant z_j ≤ z_a + 2, midpoint tangent z_j ≥ z_a − 0.25
        assert!(r.satisfied(&[0.0, 0.0], 0.0));
        assert!(!r.satisfied(&[0.0, 2.01], 1e-9));
        assert!(!r.satisfied(&[0.5, 0.24], 1e-9));
        assert!(r.satisfied(&[0.5, 0.25], 1e-12));
    }

    #[test]
    fn ln_touches_at_upper_end() {
        let e = std::f64::consts::E;
        let r = relax_univariate(1, ElemFn::Ln, 0, &iv1(1.0, e)).unwrap();
        let row = r.ineq.iter().find(|row| row.touch == vec![e]).unwrap();
        assert!((row.eval(&[e, 1.0]) - row.rhs).abs() < 1e-12);
        assert!(matches!(
            relax_univariate(1, ElemFn::Ln, 0, &iv1(0.0, 1.0)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn odd_power_ratio() {
        assert!((odd_power_tangency_ratio(3) - 0.5).abs() < 1e-12);
        for q in [3, 5, 7, 9] {
            let k = odd_power_tangency_ratio(q);
            let h = (q - 1) as f64 * k.powi(q) + q as f64 * k.powi(q - 1) - 1.0;
            assert!(h.abs() < 1e-10);
            // tangent at k through (−1, −1)
            let line = -1.0 + q as f64 * k.powi(q - 1) * (k + 1.0);
            assert!((line - k.powi(q)).abs() < 1e-10);
        }
    }

    #[test]
    fn sine_tangency_residuals() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..1000 {
            let u = rng.gen_range(TAU..3.5 * PI);
            let t = sine_tangency_right(u);
            assert!((u.sin() - t.sin() - (u - t) * t.cos()).abs() <= 1e-10);
            let l = rng.gen_range(1.5 * PI..3.0 * PI);
            let t = sine_tangency_left(l);
            assert!((t.sin() - l.sin() - (t - l) * t.cos()).abs() <= 1e-10);
        }
    }

    fn sine_samples_ok(lo: f64, hi: f64, n: usize) {
        let z = iv1(lo, hi);
        let r = relax_sin(1, 0, &z);
        for k in 0..=n {
            let x = lo + (hi - lo) * k as f64 / n as f64;
            assert!(
                r.satisfied(&[x, x.sin()], 1e-9),
                "sin rows violated at {x} on [{lo}, {hi}]"
            );
        }
    }

    #[test]
    fn sine_examples() {
        sine_samples_ok(-0.75 * PI, PI, 1000);
        sine_samples_ok(0.0, TAU, 1000);
        let r = relax_sin(1, 0, &iv1(-0.75 * PI, PI));
        for p in [[0.0, 0.0], [PI / 2.0, 1.0], [-PI / 2.0, -1.0]] {
            assert!(r.satisfied(&p, 1e-9));
        }
        // convex on [π, 2π]: secant z_j ≤ 0 above, z_j ≥ −1 reachable below
        let r = relax_sin(1, 0, &iv1(PI, TAU));
        assert!(!r.satisfied(&[1.5 * PI, 0.01], 1e-9));
        assert!(r.satisfied(&[1.5 * PI, -1.0], 1e-9));
        assert!(!r.satisfied(&[1.5 * PI, -1.01], 1e-9));
    }

    #[test]
    fn sine_random_intervals() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..300 {
            let c = rng.gen_range(-20.0..20.0);
            let w = rng.gen_range(1e-6f64..15.0).min(rng.gen_range(1e-6..15.0));
            sine_samples_ok(c, c + w, 200);
        }
    }

    #[test]
    fn cos_rows() {
        let z = IntervalVector(vec![
            Interval::new(0.0, PI / 2.0),
            Interval::new(PI / 2.0, PI),
            Interval::new(0.0, 1.0),
        ]);
        let r = relax_cos(2, 0, 1, &z);
        for k in 0..=100 {
            let x = PI / 2.0 * k as f64 / 100.0;
            assert!(r.satisfied(&[x, x + PI / 2.0, x.cos()], 1e-9));
        }
    }

    #[test]
    fn lifted_square_has_four_rows() {
        let g = record(1, 0, |s, _| vec![s[0].powi(2)]).unwrap();
        let lifted = build_lifted(&g, &IntervalVector(vec![Interval::new(0.0, 1.0)]), &[]).unwrap();
        assert_eq!(lifted.polytope.n_ineq(), 4);
        assert_eq!(lifted.polytope.n_eq(), 0);
        for k in 0..=100 {
            let s = k as f64 / 100.0;
            assert!(lifted.polytope.contains(&[s, s * s], 1e-12).unwrap());
        }
        let id = record(2, 0, |s, _| s.to_vec()).unwrap();
        let lifted =
            build_lifted(&id, &IntervalVector(vec![Interval::new(0.0, 1.0); 2]), &[]).unwrap();
        assert_eq!(lifted.polytope.n_ineq() + lifted.polytope.n_eq(), 0);
    }

    #[test]
    fn lifted_soundness_mixed_graph() {
        fn f<T: Real>(s: &[T]) -> Vec<T> {
            let q = s[0] * s[1] / (s[2] + 3.0);
            vec![
                q.exp() - s[1].cos() * s[0].powi(3),
                (s[2].powi(2) + 1.0).ln() + (q - s[0]).sin(),
            ]
        }
        let g = record(3, 0, |s, _| f(s)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let lo: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..1.0)).collect();
            let hi: Vec<f64> = lo.iter().map(|l| l + rng.gen_range(0.0..2.0)).collect();
            let sbox = IntervalVector::from_bounds(&lo, &hi).unwrap();
            let lifted = build_lifted(&g, &sbox, &[]).unwrap();
            for _ in 0..200 {
                let s: Vec<f64> = (0..3).map(|i| rng.gen_range(lo[i]..=hi[i])).collect();
                let (z, _) = g.eval_real(&s, &[]).unwrap();
                assert!(lifted.z.contains_tol(&z, 1e-9));
                let mut rows = Rows::default();
                for j in g.n_inputs()..g.n_z() {
                    rows.extend(relax_factor(&g, j, &lifted.z, &[]).unwrap());
                }
                assert!(rows.satisfied(&z, 1e-9));
            }
        }
    }
}
