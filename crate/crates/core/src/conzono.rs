//! Constrained zonotopes `{c + G ξ : ‖ξ‖∞ ≤ 1, A ξ = b}`.

use nalgebra::{DMatrix, DVector};

use crate::error::{shape_err, Error, Result};
use crate::interval::{Interval, IntervalVector};
use crate::lp::BoxLpSolver;
use crate::polytope::{vcat, vstack, HPolytope};

/// Smallest pivot, relative to its row, accepted for constraint elimination.
const PIVOT_REL: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct ConstrainedZonotope {
    pub g: DMatrix<f64>,
    pub c: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

fn blockdiag(x: &DMatrix<f64>, y: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(x.nrows() + y.nrows(), x.ncols() + y.ncols());
    m.view_mut((0, 0), x.shape()).copy_from(x);
    m.view_mut(x.shape(), y.shape()).copy_from(y);
    m
}

fn hstack(l: &DMatrix<f64>, r: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(l.nrows().max(r.nrows()), l.ncols() + r.ncols());
    m.view_mut((0, 0), l.shape()).copy_from(l);
    m.view_mut((0, l.ncols()), r.shape()).copy_from(r);
    m
}

impl ConstrainedZonotope {
    pub fn new(g: DMatrix<f64>, c: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if g.nrows() != c.len() {
            return shape_err(format!("G has {} rows but c has {}", g.nrows(), c.len()));
        }
        if a.nrows() != b.len() {
            return shape_err(format!("A has {} rows but b has {}", a.nrows(), b.len()));
        }
        if a.nrows() > 0 && a.ncols() != g.ncols() {
            return shape_err(format!(
                "A has {} columns but G has {}",
                a.ncols(),
                g.ncols()
            ));
        }
        let a = if a.nrows() == 0 {
            DMatrix::zeros(0, g.ncols())
        } else {
            a
        };
        Ok(ConstrainedZonotope { g, c, a, b })
    }

    pub fn zonotope(g: DMatrix<f64>, c: DVector<f64>) -> Result<Self> {
        let ng = g.ncols();
        Self::new(g, c, DMatrix::zeros(0, ng), DVector::zeros(0))
    }

    /// Box `(diag(rad X), mid X)`. Degenerate components keep a zero column.
    pub fn from_interval(x: &IntervalVector) -> Self {
        let n = x.len();
        ConstrainedZonotope {
            g: DMatrix::from_diagonal(&DVector::from_vec(x.rad())),
            c: DVector::from_vec(x.mid()),
            a: DMatrix::zeros(0, n),
            b: DVector::zeros(0),
        }
    }

    pub fn point(x: &[f64]) -> Self {
        ConstrainedZonotope {
            g: DMatrix::zeros(x.len(), 0),
            c: DVector::from_column_slice(x),
            a: DMatrix::zeros(0, 0),
            b: DVector::zeros(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn n_g(&self) -> usize {
        self.g.ncols()
    }

    pub fn n_c(&self) -> usize {
        self.a.nrows()
    }

    /// Cartesian product `Z × W`.
    pub fn cartesian(&self, w: &ConstrainedZonotope) -> ConstrainedZonotope {
        ConstrainedZonotope {
            g: blockdiag(&self.g, &w.g),
            c: vcat(&self.c, &w.c),
            a: blockdiag(&self.a, &w.a),
            b: vcat(&self.b, &w.b),
        }
    }

    /// `R Z`.
    pub fn linear_image(&self, r: &DMatrix<f64>) -> Result<ConstrainedZonotope> {
        if r.ncols() != self.dim() {
            return shape_err(format!(
                "map has {} columns, set dimension {}",
                r.ncols(),
                self.dim()
            ));
        }
        Ok(ConstrainedZonotope {
            g: r * &self.g,
            c: r * &self.c,
            a: self.a.clone(),
            b: self.b.clone(),
        })
    }

    /// `Z ⊕ {t}`.
    pub fn translate(&self, t: &DVector<f64>) -> Result<ConstrainedZonotope> {
        if t.len() != self.dim() {
            return shape_err("translation dimension mismatch");
        }
        let mut z = self.clone();
        z.c += t;
        Ok(z)
    }

    /// `Z ⊕ W`.
    pub fn minkowski_sum(&self, w: &ConstrainedZonotope) -> Result<ConstrainedZonotope> {
        if w.dim() != self.dim() {
            return shape_err(format!("dimensions {} and {} differ", self.dim(), w.dim()));
        }
        Ok(ConstrainedZonotope {
            g: hstack(&self.g, &w.g),
            c: &self.c + &w.c,
            a: blockdiag(&self.a, &w.a),
            b: vcat(&self.b, &w.b),
        })
    }

    /// `Z ∩_R Y = {z ∈ Z : R z ∈ Y}`.
    pub fn generalized_intersection(
        &self,
        r: &DMatrix<f64>,
        y: &ConstrainedZonotope,
    ) -> Result<ConstrainedZonotope> {
        if r.ncols() != self.dim() || r.nrows() != y.dim() {
            return shape_err(format!(
                "map is {}x{}, expected {}x{}",
                r.nrows(),
                r.ncols(),
                y.dim(),
                self.dim()
            ));
        }
        let rg = r * &self.g;
        let link = hstack(&rg, &(-&y.g));
        let a = vstack(&blockdiag(&self.a, &y.a), &link);
        let b = vcat(&vcat(&self.b, &y.b), &(&y.c - r * &self.c));
        Ok(ConstrainedZonotope {
            g: hstack(&self.g, &DMatrix::zeros(self.dim(), y.n_g())),
            c: self.c.clone(),
            a,
            b,
        })
    }

    /// Exact `Z ∩ P`. Each inequality gets a slack generator ranging over
    /// `[σ, k]`, where `σ` lower-bounds `H z` over the unconstrained
    /// zonotope.
    pub fn intersect_hpoly(&self, p: &HPolytope) -> Result<ConstrainedZonotope> {
        if p.dim() != self.dim() {
            return shape_err(format!(
                "polytope dimension {} vs set dimension {}",
                p.dim(),
                self.dim()
            ));
        }
        let nh = p.n_ineq();
        let hg = &p.h * &self.g;
        let hc = &p.h * &self.c;
        let mut slack = DMatrix::zeros(nh, nh);
        let mut rhs_h = DVector::zeros(nh);
        for i in 0..nh {
            let sigma = (hc[i] - hg.row(i).abs().sum()).min(p.k[i]);
            slack[(i, i)] = -(p.k[i] - sigma) / 2.0;
            rhs_h[i] = (p.k[i] + sigma) / 2.0 - hc[i];
        }
        let ng = self.n_g();
        let a_rows = vstack(
            &vstack(
                &hstack(&self.a, &DMatrix::zeros(self.n_c(), nh)),
                &hstack(&hg, &slack),
            ),
            &hstack(&(&p.a * &self.g), &DMatrix::zeros(p.n_eq(), nh)),
        );
        let b_rows = vcat(&vcat(&self.b, &rhs_h), &(&p.b - &p.a * &self.c));
        Ok(ConstrainedZonotope {
            g: hstack(&self.g, &DMatrix::zeros(self.dim(), nh)),
            c: self.c.clone(),
            a: if a_rows.nrows() == 0 {
                DMatrix::zeros(0, ng + nh)
            } else {
                a_rows
            },
            b: b_rows,
        })
    }

    pub fn is_empty(&self) -> bool {
        if self.n_c() == 0 {
            return false;
        }
        !matches!(BoxLpSolver::new(&self.a, self.b.as_slice()), Ok(Some(_)))
    }

    /// Box `c ± Σ|G|` ignoring the constraints.
    pub fn zonotope_hull(&self) -> IntervalVector {
        (0..self.dim())
            .map(|i| {
                let r = self.g.row(i).abs().sum();
                Interval::new(self.c[i] - r, self.c[i] + r)
            })
            .collect()
    }

    /// Interval hull by `2n` linear programs. Endpoints come from the LP
    /// dual bounds, so they are outer bounds up to roundoff.
    pub fn hull(&self) -> Result<IntervalVector> {
        let zbox = self.zonotope_hull();
        if self.n_c() == 0 {
            return Ok(zbox);
        }
        let Some(mut lp) = BoxLpSolver::new(&self.a, self.b.as_slice())? else {
            return Err(Error::EmptySet);
        };
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let row: Vec<f64> = self.g.row(i).iter().copied().collect();
            let neg: Vec<f64> = row.iter().map(|v| -v).collect();
            let lo = lp.minimize(&row)?;
            let hi = lp.minimize(&neg)?;
            let l = self.c[i] + lo.dual_bound.min(lo.value);
            let h = self.c[i] - hi.dual_bound.min(hi.value);
            let l = l.max(zbox[i].lo);
            let h = h.min(zbox[i].hi);
            out.push(Interval::new(l.min(h), h.max(l)));
        }
        Ok(IntervalVector(out))
    }

    /// Point membership by a feasibility program on `[G; A] ξ = [x − c; b]`.
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        if x.len() != self.dim() {
            return shape_err(format!(
                "point has {} entries, expected {}",
                x.len(),
                self.dim()
            ));
        }
        let a = vstack(&self.g, &self.a);
        let rhs = vcat(&(DVector::from_column_slice(x) - &self.c), &self.b);
        Ok(BoxLpSolver::new(&a, rhs.as_slice())?.is_some())
    }

    /// Order reduction to at most `max_gens` generators and `max_cons`
    /// constraints. The result always encloses `self`.
    pub fn reduce(&self, max_gens: usize, max_cons: usize) -> ConstrainedZonotope {
        let n = self.dim();
        let max_gens = max_gens.max(n);
        if self.n_g() <= max_gens && self.n_c() <= max_cons {
            return self.clone();
        }
        let Ok(hull) = self.hull() else {
            return self.clone();
        };
        let hull_box = ConstrainedZonotope::from_interval(&hull);
        if max_gens < 2 * n || max_cons < n {
            if max_cons == 0 || max_gens < 2 * n {
                return hull_box;
            }
            return self
                .reduce_structure(max_gens, max_cons)
                .unwrap_or(hull_box);
        }
        // Leave room for intersecting with the hull box, so the result is
        // never looser than the box itself.
        let core = self
            .reduce_structure(max_gens - n, max_cons - n)
            .unwrap_or_else(|| hull_box.clone());
        core.generalized_intersection(&DMatrix::identity(n, n), &hull_box)
            .map(|z| z.drop_zeros())
            .unwrap_or(hull_box)
    }

    /// Constraint elimination followed by generator merging. `None` when
    /// no exact-substitution pivot is left.
    fn reduce_structure(&self, max_gens: usize, max_cons: usize) -> Option<ConstrainedZonotope> {
        let n = self.dim();
        if self.n_g() <= max_gens && self.n_c() <= max_cons {
            return Some(self.clone());
        }
        let mut z = self.rescale_exact().drop_zeros();
        let con_target = max_cons.min(max_gens - n);
        while z.n_c() > con_target {
            match z.eliminate_one() {
                Some(next) => z = next,
                None => break,
            }
            z = z.drop_zeros();
        }
        if z.n_c() > con_target {
            return None;
        }
        if z.n_g() > max_gens {
            z = z.merge_generators(max_gens);
        }
        Some(z)
    }

    /// Shrinks every `ξ_j` to an outer bound of its range over the feasible
    /// set, found by linear programming. The set is unchanged; generators
    /// that the constraints cancel become small.
    fn rescale_exact(&self) -> ConstrainedZonotope {
        let ng = self.n_g();
        if self.n_c() == 0 {
            return self.clone();
        }
        let Ok(Some(mut lp)) = BoxLpSolver::new(&self.a, self.b.as_slice()) else {
            return self.clone();
        };
        let mut z = self.clone();
        let mut e = vec![0.0; ng];
        for j in 0..ng {
            if z.a.column(j).iter().all(|v| *v == 0.0) {
                continue;
            }
            e[j] = 1.0;
            let lo = lp.minimize(&e);
            e[j] = -1.0;
            let hi = lp.minimize(&e);
            e[j] = 0.0;
            let (Ok(lo), Ok(hi)) = (lo, hi) else { continue };
            let l = (lo.dual_bound.min(lo.value) - 1e-9).max(-1.0);
            let h = (-hi.dual_bound.min(hi.value) + 1e-9).min(1.0);
            if l > h {
                continue;
            }
            let (m, r) = ((l + h) / 2.0, (h - l) / 2.0);
            let gj = z.g.column(j).clone_owned();
            z.c += &gj * m;
            let aj = z.a.column(j).clone_owned();
            z.b -= &aj * m;
            z.g.column_mut(j).scale_mut(r);
            z.a.column_mut(j).scale_mut(r);
        }
        z.normalize_rows();
        z
    }

    /// Scales each constraint row to unit max norm.
    fn normalize_rows(&mut self) {
        for r in 0..self.n_c() {
            let s = self.a.row(r).abs().max();
            if s > 0.0 {
                self.a.row_mut(r).scale_mut(1.0 / s);
                self.b[r] /= s;
            }
        }
    }

    /// Removes all-zero generator columns and trivially satisfied zero rows.
    fn drop_zeros(&self) -> ConstrainedZonotope {
        let keep_cols: Vec<usize> = (0..self.n_g())
            .filter(|&j| {
                self.g
                    .column(j)
                    .iter()
                    .chain(self.a.column(j).iter())
                    .any(|v| *v != 0.0)
            })
            .collect();
        let keep_rows: Vec<usize> = (0..self.n_c())
            .filter(|&i| keep_cols.iter().any(|&j| self.a[(i, j)] != 0.0) || self.b[i] != 0.0)
            .collect();
        if keep_cols.len() == self.n_g() && keep_rows.len() == self.n_c() {
            return self.clone();
        }
        ConstrainedZonotope {
            g: self.g.select_columns(&keep_cols),
            c: self.c.clone(),
            a: self.a.select_rows(&keep_rows).select_columns(&keep_cols),
            b: self.b.select_rows(&keep_rows),
        }
    }

    /// Bounds on ξ implied by the constraints, by repeated row propagation
    /// from `[-1, 1]`. `None` if propagation proves the set empty.
    fn propagate_bounds(&self) -> Option<Vec<Interval>> {
        let (nc, ng) = (self.n_c(), self.n_g());
        let mut e = vec![Interval::new(-1.0, 1.0); ng];
        for _ in 0..10 {
            let mut changed = false;
            for i in 0..nc {
                let row = self.a.row(i);
                let mut total = Interval::point(0.0);
                for j in 0..ng {
                    if row[j] != 0.0 {
                        total = total + e[j].scale(row[j]);
                    }
                }
                for j in 0..ng {
                    let aij = row[j];
                    if aij == 0.0 {
                        continue;
                    }
                    // Sum of the other terms: remove j's contribution by endpoint arithmetic.
                    let own = e[j].scale(aij);
                    let rest = Interval::new(total.lo - own.lo, total.hi - own.hi);
                    let rest = if rest.lo <= rest.hi {
                        rest
                    } else {
                        total - own
                    };
                    let cand = Interval::new(
                        ((self.b[i] - rest.hi) / aij).min((self.b[i] - rest.lo) / aij),
                        ((self.b[i] - rest.hi) / aij).max((self.b[i] - rest.lo) / aij),
                    );
                    let pad = 1e-10 * (1.0 + cand.lo.abs().max(cand.hi.abs()));
                    let cand = Interval::new(cand.lo - pad, cand.hi + pad);
                    let old = e[j];
                    let new = old.intersect(&cand)?;
                    if new.width() < old.width() * (1.0 - 1e-9) {
                        changed = true;
                        e[j] = new;
                        let upd = new.scale(aij);
                        total =
                            Interval::new(total.lo - own.lo + upd.lo, total.hi - own.hi + upd.hi);
                    }
                }
            }
            if !changed {
                break;
            }
        }
        Some(e)
    }

    /// Rescales ξ to the propagated bounds `E` (exact: the feasible ξ all
    /// lie in `E`) and eliminates the (row, variable) pair that adds the
    /// least conservatism.
    fn eliminate_one(&self) -> Option<ConstrainedZonotope> {
        let (nc, ng) = (self.n_c(), self.n_g());
        let mut z = self.clone();
        if let Some(e) = self.propagate_bounds() {
            for (j, ej) in e.iter().enumerate() {
                let (m, r) = ej.mid_rad();
                if m == 0.0 && r == 1.0 {
                    continue;
                }
                let gj = z.g.column(j).clone_owned();
                z.c += &gj * m;
                let aj = z.a.column(j).clone_owned();
                z.b -= &aj * m;
                z.g.column_mut(j).scale_mut(r);
                z.a.column_mut(j).scale_mut(r);
            }
        }
        // Columns that only enter the constraints still cost something when
        // their bound is dropped, so they get a small floor weight.
        let floor = 1e-3 * (0..ng).map(|j| z.g.column(j).norm()).fold(0.0, f64::max);
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..nc {
            let row = z.a.row(i);
            let s: f64 = row.abs().sum();
            let rmax = row.abs().max();
            if rmax == 0.0 {
                continue;
            }
            for j in 0..ng {
                let aij = row[j];
                if aij.abs() < PIVOT_REL * rmax || aij.abs() < 1e-12 {
                    continue;
                }
                let rest = s - aij.abs();
                let r1 = (z.b[i] - rest) / aij;
                let r2 = (z.b[i] + rest) / aij;
                let (rlo, rhi) = (r1.min(r2), r1.max(r2));
                let excess = 0.0f64.max(rhi - 1.0).max(-1.0 - rlo);
                let score = (z.g.column(j).norm() + floor) * excess;
                if best.is_none_or(|(bs, _, _)| score < bs) {
                    best = Some((score, i, j));
                }
            }
        }
        let (_, i, j) = best?;
        let aij = z.a[(i, j)];
        let arow = z.a.row(i).clone_owned() / aij;
        let bi = z.b[i] / aij;
        let gcol = z.g.column(j).clone_owned();
        let acol = z.a.column(j).clone_owned();
        let g = &z.g - &gcol * &arow;
        let c = &z.c + &gcol * bi;
        let a = &z.a - &acol * &arow;
        let b = &z.b - &acol * bi;
        let cols: Vec<usize> = (0..ng).filter(|&k| k != j).collect();
        let rows: Vec<usize> = (0..nc).filter(|&k| k != i).collect();
        let mut out = ConstrainedZonotope {
            g: g.select_columns(&cols),
            c,
            a: a.select_rows(&rows).select_columns(&cols),
            b: b.select_rows(&rows),
        };
        out.normalize_rows();
        Some(out)
    }

    /// Keeps the largest columns of the lifted generator matrix `[G; A]`
    /// and boxes the rest. The box does not depend on row weights; only the
    /// choice of kept columns does.
    fn merge_generators(&self, max_gens: usize) -> ConstrainedZonotope {
        let (n, nc, ng) = (self.dim(), self.n_c(), self.n_g());
        let lifted = vstack(&self.g, &self.a);
        let dim = n + nc;
        let keep = max_gens.saturating_sub(dim);
        let mut order: Vec<usize> = (0..ng).collect();
        // Constraint rows have unit max norm; weight them to the generator
        // scale so the ranking is not decided by A alone.
        let alpha = (0..ng).map(|j| self.g.column(j).norm()).fold(0.0, f64::max);
        let norms: Vec<f64> = (0..ng)
            .map(|j| {
                (self.g.column(j).norm_squared() + alpha * alpha * self.a.column(j).norm_squared())
                    .sqrt()
            })
            .collect();
        order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));
        let mut kept: Vec<usize> = order[..keep.min(ng)].to_vec();
        kept.sort_unstable();
        let merged = &order[keep.min(ng)..];
        let mut boxd = vec![0.0; dim];
        for &j in merged {
            for (i, bi) in boxd.iter_mut().enumerate() {
                *bi += lifted[(i, j)].abs();
            }
        }
        let box_cols: Vec<usize> = (0..dim).filter(|&i| boxd[i] != 0.0).collect();
        let mut out = DMatrix::zeros(dim, kept.len() + box_cols.len());
        for (k, &j) in kept.iter().enumerate() {
            out.set_column(k, &lifted.column(j));
        }
        for (k, &i) in box_cols.iter().enumerate() {
            out[(i, kept.len() + k)] = boxd[i];
        }
        ConstrainedZonotope {
            g: out.rows(0, n).clone_owned(),
            c: self.c.clone(),
            a: out.rows(n, nc).clone_owned(),
            b: self.b.clone(),
        }
    }
}

pub fn cz_cartesian(z: &ConstrainedZonotope, w: &ConstrainedZonotope) -> ConstrainedZonotope {
    z.cartesian(w)
}

pub fn cz_linimg(r: &DMatrix<f64>, z: &ConstrainedZonotope) -> Result<ConstrainedZonotope> {
    z.linear_image(r)
}

pub fn cz_minksum(z: &ConstrainedZonotope, w: &ConstrainedZonotope) -> Result<ConstrainedZonotope> {
    z.minkowski_sum(w)
}

pub fn cz_genintersect(
    z: &ConstrainedZonotope,
    r: &DMatrix<f64>,
    y: &ConstrainedZonotope,
) -> Result<ConstrainedZonotope> {
    z.generalized_intersection(r, y)
}

pub fn cz_intersect_hpoly(z: &ConstrainedZonotope, p: &HPolytope) -> Result<ConstrainedZonotope> {
    z.intersect_hpoly(p)
}

pub fn cz_hull(z: &ConstrainedZonotope) -> Result<IntervalVector> {
    z.hull()
}

pub fn cz_contains(z: &ConstrainedZonotope, x: &[f64]) -> Result<bool> {
    z.contains(x)
}

pub fn cz_reduce(z: &ConstrainedZonotope, max_gens: usize, max_cons: usize) -> ConstrainedZonotope {
    z.reduce(max_gens, max_cons)
}
