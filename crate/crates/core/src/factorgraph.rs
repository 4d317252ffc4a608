//! Factorable functions recorded as tapes of elementary operations.
//!
//! A function is written once, generically over [`Real`], and can then be
//! evaluated on `f64` directly or traced through [`record`] into a
//! [`FactorGraph`]. Each tape entry (a *factor*) applies one library
//! operation to one or two earlier factors; the first `n_inputs` factors
//! are the inputs themselves.
//!
//! Known inputs that change between evaluations (for instance a control
//! signal) are declared as parameter slots. They may only enter the tape
//! through affine operations with a variable (`x + u`, `x * u`, `x / u`),
//! so the tape structure never depends on their values.

use std::cell::RefCell;
use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{shape_err, Error, Result};
use crate::interval::{Interval, IntervalVector};

/// Numeric types a factorable function can be written against.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn powi(self, q: i32) -> Self;
    /// Cube root. Available on `f64`; has no relaxation, so tracing it fails.
    fn cbrt(self) -> Self;
}

impl Real for f64 {
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn powi(self, q: i32) -> Self {
        f64::powi(self, q)
    }
    fn cbrt(self) -> Self {
        f64::cbrt(self)
    }
}

/// A scalar that is affine in at most one parameter slot:
/// `value + weight * params[slot]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coef {
    pub value: f64,
    pub slot: Option<(usize, f64)>,
}

impl Coef {
    pub const fn lit(value: f64) -> Self {
        Coef { value, slot: None }
    }

    pub fn eval(&self, params: &[f64]) -> f64 {
        match self.slot {
            None => self.value,
            Some((i, w)) => w * params[i] + self.value,
        }
    }

    pub fn is_literal(&self) -> bool {
        self.slot.is_none()
    }

    fn neg(self) -> Coef {
        Coef {
            value: -self.value,
            slot: self.slot.map(|(i, w)| (i, -w)),
        }
    }

    fn add(self, other: Coef) -> Option<Coef> {
        let slot = match (self.slot, other.slot) {
            (None, s) | (s, None) => s,
            (Some((i, a)), Some((j, b))) if i == j => Some((i, a + b)),
            _ => return None,
        };
        Some(Coef {
            value: self.value + other.value,
            slot,
        })
    }

    fn scale(self, q: f64) -> Coef {
        Coef {
            value: self.value * q,
            slot: self.slot.map(|(i, w)| (i, w * q)),
        }
    }
}

/// Elementary operation kinds (the library of the tape).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpKind {
    Input,
    Add,
    Sub,
    Mul,
    Div,
    /// `z_a * coef + offset`, or `z_a / coef + offset` when `divide` is set.
    Affine {
        coef: Coef,
        offset: Coef,
        divide: bool,
    },
    Exp,
    Ln,
    Sin,
    /// `cos(z_a)`; `b` holds the shifted factor `z_a + π/2` so the
    /// relaxation can treat it as a sine of `z_b`.
    Cos,
    Pow(i32),
}

/// One tape entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElemOp {
    pub kind: OpKind,
    pub a: usize,
    pub b: Option<usize>,
}

impl ElemOp {
    /// Add, subtract and affine-with-constant factors are defined by an
    /// exact linear equality and can be eliminated from lifted systems.
    pub fn is_linear(&self) -> bool {
        matches!(self.kind, OpKind::Add | OpKind::Sub | OpKind::Affine { .. })
    }

    /// `(q, r)` with `z_j = q z_a + r` for affine factors at the given parameters.
    pub fn affine_coefficients(&self, params: &[f64]) -> Option<(f64, f64)> {
        match self.kind {
            OpKind::Affine {
                coef,
                offset,
                divide,
            } => {
                let c = coef.eval(params);
                let q = if divide { 1.0 / c } else { c };
                Some((q, offset.eval(params)))
            }
            _ => None,
        }
    }
}

/// A recorded factorable function.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorGraph {
    n_inputs: usize,
    n_params: usize,
    nodes: Vec<ElemOp>,
    outputs: Vec<usize>,
}

impl FactorGraph {
    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    /// Total number of factors, inputs included.
    pub fn n_z(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[ElemOp] {
        &self.nodes
    }

    pub fn node(&self, j: usize) -> &ElemOp {
        &self.nodes[j]
    }

    /// Factor index selected by each output row.
    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn n_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Indices of the linear (eliminable) non-input factors, ascending.
    pub fn linear_factors(&self) -> Vec<usize> {
        (self.n_inputs..self.n_z())
            .filter(|&j| self.nodes[j].is_linear())
            .collect()
    }

    /// 0/1 matrix selecting `rows` out of the factor vector.
    pub fn selector(rows: &[usize], n_z: usize) -> DMatrix<f64> {
        let mut e = DMatrix::zeros(rows.len(), n_z);
        for (i, &j) in rows.iter().enumerate() {
            e[(i, j)] = 1.0;
        }
        e
    }

    /// The output selector `E`.
    pub fn output_selector(&self) -> DMatrix<f64> {
        Self::selector(&self.outputs, self.n_z())
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params {
            return shape_err(format!(
                "expected {} parameters, got {}",
                self.n_params,
                params.len()
            ));
        }
        Ok(())
    }

    /// Replays the tape in real arithmetic. Returns all factor values and
    /// the outputs `E z`.
    pub fn eval_real(&self, s: &[f64], params: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        if s.len() != self.n_inputs {
            return shape_err(format!(
                "expected {} inputs, got {}",
                self.n_inputs,
                s.len()
            ));
        }
        self.check_params(params)?;
        let mut z = Vec::with_capacity(self.n_z());
        z.extend_from_slice(s);
        for op in &self.nodes[self.n_inputs..] {
            let za = z[op.a];
            let zb = op.b.map(|b| z[b]);
            let v = match op.kind {
                OpKind::Input => unreachable!("input factor after the input block"),
                OpKind::Add => za + zb.unwrap(),
                OpKind::Sub => za - zb.unwrap(),
                OpKind::Mul => za * zb.unwrap(),
                OpKind::Div => {
                    let d = zb.unwrap();
                    if d == 0.0 {
                        return Err(Error::Domain("division by zero".into()));
                    }
                    za / d
                }
                OpKind::Affine {
                    coef,
                    offset,
                    divide,
                } => {
                    let c = coef.eval(params);
                    if divide {
                        if c == 0.0 {
                            return Err(Error::Domain("division by zero parameter".into()));
                        }
                        za / c + offset.eval(params)
                    } else {
                        za * c + offset.eval(params)
                    }
                }
                OpKind::Exp => za.exp(),
                OpKind::Ln => {
                    if za <= 0.0 {
                        return Err(Error::Domain(format!("logarithm of {za}")));
                    }
                    za.ln()
                }
                OpKind::Sin => za.sin(),
                OpKind::Cos => za.cos(),
                OpKind::Pow(q) => za.powi(q),
            };
            z.push(v);
        }
        let out = self.outputs.iter().map(|&j| z[j]).collect();
        Ok((z, out))
    }

    /// Natural interval extension of every factor over the input box.
    pub fn eval_interval(&self, s: &IntervalVector, params: &[f64]) -> Result<IntervalVector> {
        if s.len() != self.n_inputs {
            return shape_err(format!(
                "expected {} inputs, got {}",
                self.n_inputs,
                s.len()
            ));
        }
        self.check_params(params)?;
        let mut z: Vec<Interval> = Vec::with_capacity(self.n_z());
        z.extend_from_slice(&s.0);
        for op in &self.nodes[self.n_inputs..] {
            let za = z[op.a];
            let zb = op.b.map(|b| z[b]);
            let v = match op.kind {
                OpKind::Input => unreachable!("input factor after the input block"),
                OpKind::Add => za + zb.unwrap(),
                OpKind::Sub => za - zb.unwrap(),
                OpKind::Mul => za * zb.unwrap(),
                OpKind::Div => za.div(&zb.unwrap())?,
                OpKind::Affine {
                    coef,
                    offset,
                    divide,
                } => {
                    let c = coef.eval(params);
                    let r = offset.eval(params);
                    if divide {
                        za.div_scalar(c)?.shift(r)
                    } else {
                        za.scale(c).shift(r)
                    }
                }
                OpKind::Exp => za.exp(),
                OpKind::Ln => za.ln()?,
                OpKind::Sin => za.sin(),
                OpKind::Cos => za.cos(),
                OpKind::Pow(q) => za.powi(q)?,
            };
            z.push(v);
        }
        Ok(IntervalVector(z))
    }

    /// If every output is an affine function of the inputs (reached only
    /// through add, subtract and literal affine factors), returns `(C, d)`
    /// with `outputs = C s + d`.
    pub fn affine_form(&self) -> Option<(DMatrix<f64>, Vec<f64>)> {
        let n = self.n_inputs;
        let mut forms: Vec<Option<(Vec<f64>, f64)>> = Vec::with_capacity(self.n_z());
        for j in 0..n {
            let mut c = vec![0.0; n];
            c[j] = 1.0;
            forms.push(Some((c, 0.0)));
        }
        for op in &self.nodes[n..] {
            let fa = forms[op.a].clone();
            let fb = op.b.and_then(|b| forms[b].clone());
            let form = match op.kind {
                OpKind::Add | OpKind::Sub => match (fa, fb) {
                    (Some((ca, da)), Some((cb, db))) => {
                        let sgn = if op.kind == OpKind::Add { 1.0 } else { -1.0 };
                        let c = ca.iter().zip(&cb).map(|(x, y)| x + sgn * y).collect();
                        Some((c, da + sgn * db))
                    }
                    _ => None,
                },
                OpKind::Affine {
                    coef,
                    offset,
                    divide,
                } if coef.is_literal() && offset.is_literal() => fa.map(|(ca, da)| {
                    let q = if divide { 1.0 / coef.value } else { coef.value };
                    (ca.iter().map(|x| x * q).collect(), da * q + offset.value)
                }),
                _ => None,
            };
            forms.push(form);
        }
        let mut c = DMatrix::zeros(self.outputs.len(), n);
        let mut d = Vec::with_capacity(self.outputs.len());
        for (i, &j) in self.outputs.iter().enumerate() {
            let (cj, dj) = forms[j].clone()?;
            for (k, v) in cj.into_iter().enumerate() {
                c[(i, k)] = v;
            }
            d.push(dj);
        }
        Some((c, d))
    }
}

/// Tape under construction. Handles ([`Var`]) borrow it.
pub struct Recorder {
    n_inputs: usize,
    nodes: RefCell<Vec<ElemOp>>,
    error: RefCell<Option<Error>>,
}

#[derive(Debug, Clone, Copy)]
enum Repr {
    Node(usize),
    Const(Coef),
}

/// Tracing handle: either a tape factor or a constant (possibly a
/// parameter slot).
#[derive(Clone, Copy)]
pub struct Var<'r> {
    rec: &'r Recorder,
    repr: Repr,
}

impl std::fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Var({:?})", self.repr)
    }
}

impl Recorder {
    fn new(n_inputs: usize) -> Self {
        let nodes = (0..n_inputs)
            .map(|j| ElemOp {
                kind: OpKind::Input,
                a: j,
                b: None,
            })
            .collect();
        Recorder {
            n_inputs,
            nodes: RefCell::new(nodes),
            error: RefCell::new(None),
        }
    }

    fn push(&self, kind: OpKind, a: usize, b: Option<usize>) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        nodes.push(ElemOp { kind, a, b });
        Var {
            rec: self,
            repr: Repr::Node(nodes.len() - 1),
        }
    }

    fn fail(&self, msg: impl Into<String>) -> Var<'_> {
        let mut err = self.error.borrow_mut();
        if err.is_none() {
            *err = Some(Error::UnsupportedOp(msg.into()));
        }
        Var {
            rec: self,
            repr: Repr::Const(Coef::lit(f64::NAN)),
        }
    }

    fn constant(&self, c: Coef) -> Var<'_> {
        Var {
            rec: self,
            repr: Repr::Const(c),
        }
    }

    /// Materializes a constant as a factor `0 * z_0 + c`.
    fn const_node(&self, c: Coef) -> Option<usize> {
        if self.n_inputs == 0 {
            return None;
        }
        match self
            .push(
                OpKind::Affine {
                    coef: Coef::lit(0.0),
                    offset: c,
                    divide: false,
                },
                0,
                None,
            )
            .repr
        {
            Repr::Node(j) => Some(j),
            Repr::Const(_) => None,
        }
    }

    fn affine(&self, a: usize, coef: Coef, offset: Coef, divide: bool) -> Var<'_> {
        self.push(
            OpKind::Affine {
                coef,
                offset,
                divide,
            },
            a,
            None,
        )
    }
}

/// Records `f` as a factor graph with `n_inputs` inputs and `n_params`
/// parameter slots.
pub fn record<F>(n_inputs: usize, n_params: usize, f: F) -> Result<FactorGraph>
where
    F: for<'r> FnOnce(&[Var<'r>], &[Var<'r>]) -> Vec<Var<'r>>,
{
    let rec = Recorder::new(n_inputs);
    let outputs = {
        let inputs: Vec<Var<'_>> = (0..n_inputs)
            .map(|j| Var {
                rec: &rec,
                repr: Repr::Node(j),
            })
            .collect();
        let params: Vec<Var<'_>> = (0..n_params)
            .map(|i| Var {
                rec: &rec,
                repr: Repr::Const(Coef {
                    value: 0.0,
                    slot: Some((i, 1.0)),
                }),
            })
            .collect();
        let outs = f(&inputs, &params);
        let mut rows = Vec::with_capacity(outs.len());
        for v in outs {
            match v.repr {
                Repr::Node(j) => rows.push(j),
                Repr::Const(c) => match rec.const_node(c) {
                    Some(j) => rows.push(j),
                    None => {
                        rec.fail("constant output of a function without inputs");
                    }
                },
            }
        }
        rows
    };
    if let Some(e) = rec.error.into_inner() {
        return Err(e);
    }
    Ok(FactorGraph {
        n_inputs,
        n_params,
        nodes: rec.nodes.into_inner(),
        outputs,
    })
}

impl<'r> Var<'r> {
    fn binary(self, rhs: Var<'r>, kind: OpKind) -> Var<'r> {
        let rec = self.rec;
        match (self.repr, rhs.repr) {
            (Repr::Node(a), Repr::Node(b)) => rec.push(kind, a, Some(b)),
            (Repr::Node(a), Repr::Const(c)) => match kind {
                OpKind::Add => rec.affine(a, Coef::lit(1.0), c, false),
                OpKind::Sub => rec.affine(a, Coef::lit(1.0), c.neg(), false),
                OpKind::Mul => rec.affine(a, c, Coef::lit(0.0), false),
                OpKind::Div => rec.affine(a, c, Coef::lit(0.0), true),
                _ => unreachable!(),
            },
            (Repr::Const(c), Repr::Node(b)) => match kind {
                OpKind::Add => rec.affine(b, Coef::lit(1.0), c, false),
                OpKind::Sub => rec.affine(b, Coef::lit(-1.0), c, false),
                OpKind::Mul => rec.affine(b, c, Coef::lit(0.0), false),
                OpKind::Div => match rec.const_node(c) {
                    Some(a) => rec.push(OpKind::Div, a, Some(b)),
                    None => rec.fail("constant numerator without inputs"),
                },
                _ => unreachable!(),
            },
            (Repr::Const(x), Repr::Const(y)) => {
                let r = match kind {
                    OpKind::Add => x.add(y),
                    OpKind::Sub => x.add(y.neg()),
                    OpKind::Mul if y.is_literal() => Some(x.scale(y.value)),
                    OpKind::Mul if x.is_literal() => Some(y.scale(x.value)),
                    OpKind::Div if y.is_literal() && y.value != 0.0 => {
                        if x.is_literal() {
                            Some(Coef::lit(x.value / y.value))
                        } else {
                            Some(x.scale(1.0 / y.value))
                        }
                    }
                    _ => None,
                };
                match r {
                    Some(c) => rec.constant(c),
                    None => rec.fail(format!("{kind:?} of two parameter expressions")),
                }
            }
        }
    }

    fn unary(self, kind: OpKind, name: &str, real: fn(f64) -> f64) -> Var<'r> {
        match self.repr {
            Repr::Node(a) => self.rec.push(kind, a, None),
            Repr::Const(c) if c.is_literal() => self.rec.constant(Coef::lit(real(c.value))),
            Repr::Const(_) => self.rec.fail(format!("{name} of a parameter")),
        }
    }

    /// Factor index, if this handle refers to a tape entry.
    pub fn index(&self) -> Option<usize> {
        match self.repr {
            Repr::Node(j) => Some(j),
            Repr::Const(_) => None,
        }
    }
}

macro_rules! var_binop {
    ($tr:ident, $method:ident, $kind:expr) => {
        impl<'r> $tr for Var<'r> {
            type Output = Var<'r>;
            fn $method(self, rhs: Var<'r>) -> Var<'r> {
                self.binary(rhs, $kind)
            }
        }
        impl<'r> $tr<f64> for Var<'r> {
            type Output = Var<'r>;
            fn $method(self, rhs: f64) -> Var<'r> {
                let c = self.rec.constant(Coef::lit(rhs));
                self.binary(c, $kind)
            }
        }
    };
}

var_binop!(Add, add, OpKind::Add);
var_binop!(Sub, sub, OpKind::Sub);
var_binop!(Mul, mul, OpKind::Mul);
var_binop!(Div, div, OpKind::Div);

impl<'r> Neg for Var<'r> {
    type Output = Var<'r>;
    fn neg(self) -> Var<'r> {
        match self.repr {
            Repr::Node(a) => self.rec.affine(a, Coef::lit(-1.0), Coef::lit(0.0), false),
            Repr::Const(c) => self.rec.constant(c.neg()),
        }
    }
}

impl Real for Var<'_> {
    fn exp(self) -> Self {
        self.unary(OpKind::Exp, "exp", f64::exp)
    }
    fn ln(self) -> Self {
        self.unary(OpKind::Ln, "ln", f64::ln)
    }
    fn sin(self) -> Self {
        self.unary(OpKind::Sin, "sin", f64::sin)
    }
    fn cos(self) -> Self {
        match self.repr {
            Repr::Node(a) => {
                let shifted = self
                    .rec
                    .affine(a, Coef::lit(1.0), Coef::lit(FRAC_PI_2), false);
                self.rec.push(OpKind::Cos, a, shifted.index())
            }
            Repr::Const(c) if c.is_literal() => self.rec.constant(Coef::lit(c.value.cos())),
            Repr::Const(_) => self.rec.fail("cos of a parameter"),
        }
    }
    fn powi(self, q: i32) -> Self {
        match (self.repr, q) {
            (Repr::Const(c), _) if c.is_literal() => self.rec.constant(Coef::lit(c.value.powi(q))),
            (Repr::Const(_), _) => self.rec.fail("power of a parameter"),
            (Repr::Node(_), 1) => self,
            (Repr::Node(_), 0) => self.rec.constant(Coef::lit(1.0)),
            (Repr::Node(a), q) if q >= 2 => self.rec.push(OpKind::Pow(q), a, None),
            (Repr::Node(_), q) => self.rec.fail(format!("negative integer power {q}")),
        }
    }
    fn cbrt(self) -> Self {
        self.rec.fail("cube root")
    }
}

/// Composite `ℓ(s) = g(f(x, w), v)` recorded on a single tape.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeGraph {
    /// Tape of `ℓ`; inputs ordered `(x, w, v)`, outputs are the `g` rows.
    pub graph: FactorGraph,
    /// Factors holding the outputs of `f`.
    pub f_rows: Vec<usize>,
    /// Factors holding the outputs of `g` (equal to `graph.outputs()`).
    pub ell_rows: Vec<usize>,
}

/// Splices `g` after `f`: the first `f.n_outputs()` inputs of `g` are fed by
/// the outputs of `f`, its remaining inputs become new trailing inputs of
/// the composite. Parameters of `g` follow those of `f`.
pub fn record_composite(f: &FactorGraph, g: &FactorGraph) -> Result<CompositeGraph> {
    let n_state = f.n_outputs();
    if g.n_inputs() < n_state {
        return shape_err(format!(
            "g takes {} inputs but f produces {} outputs",
            g.n_inputs(),
            n_state
        ));
    }
    let n_extra = g.n_inputs() - n_state;
    let n_f_in = f.n_inputs();
    let n_s = n_f_in + n_extra;
    let f_len = f.n_z() - n_f_in;

    // f indices: inputs keep their slot, the rest shift past the new inputs.
    let map_f = |j: usize| if j < n_f_in { j } else { j + n_extra };
    let mut nodes: Vec<ElemOp> = (0..n_s)
        .map(|j| ElemOp {
            kind: OpKind::Input,
            a: j,
            b: None,
        })
        .collect();
    for op in &f.nodes[n_f_in..] {
        nodes.push(ElemOp {
            kind: op.kind,
            a: map_f(op.a),
            b: op.b.map(map_f),
        });
    }
    let f_rows: Vec<usize> = f.outputs.iter().map(|&j| map_f(j)).collect();

    let g_base = n_s + f_len;
    let map_g = |j: usize| {
        if j < n_state {
            f_rows[j]
        } else if j < g.n_inputs() {
            n_f_in + (j - n_state)
        } else {
            g_base + (j - g.n_inputs())
        }
    };
    let shift_slot = |c: Coef| Coef {
        value: c.value,
        slot: c.slot.map(|(i, w)| (i + f.n_params, w)),
    };
    for op in &g.nodes[g.n_inputs()..] {
        let kind = match op.kind {
            OpKind::Affine {
                coef,
                offset,
                divide,
            } => OpKind::Affine {
                coef: shift_slot(coef),
                offset: shift_slot(offset),
                divide,
            },
            k => k,
        };
        nodes.push(ElemOp {
            kind,
            a: map_g(op.a),
            b: op.b.map(map_g),
        });
    }
    let ell_rows: Vec<usize> = g.outputs.iter().map(|&j| map_g(j)).collect();
    Ok(CompositeGraph {
        graph: FactorGraph {
            n_inputs: n_s,
            n_params: f.n_params + g.n_params,
            nodes,
            outputs: ell_rows.clone(),
        },
        f_rows,
        ell_rows,
    })
}
