//! Convex polytopes `{x : H x ≤ k, A x = b}` with inequalities and
//! equalities stored separately.

use nalgebra::{DMatrix, DVector};

use crate::error::{shape_err, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope {
    pub h: DMatrix<f64>,
    pub k: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl HPolytope {
    pub fn new(h: DMatrix<f64>, k: DVector<f64>, a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if h.nrows() != k.len() || a.nrows() != b.len() {
            return shape_err("row counts of H/k or A/b differ");
        }
        if h.ncols() != a.ncols() {
            return shape_err(format!(
                "H has {} columns but A has {}",
                h.ncols(),
                a.ncols()
            ));
        }
        Ok(HPolytope { h, k, a, b })
    }

    /// `R^n` (no rows).
    pub fn whole_space(n: usize) -> Self {
        HPolytope {
            h: DMatrix::zeros(0, n),
            k: DVector::zeros(0),
            a: DMatrix::zeros(0, n),
            b: DVector::zeros(0),
        }
    }

    pub fn inequalities(h: DMatrix<f64>, k: DVector<f64>) -> Result<Self> {
        let n = h.ncols();
        Self::new(h, k, DMatrix::zeros(0, n), DVector::zeros(0))
    }

    pub fn equalities(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = a.ncols();
        Self::new(DMatrix::zeros(0, n), DVector::zeros(0), a, b)
    }

    pub fn dim(&self) -> usize {
        self.h.ncols()
    }

    pub fn n_ineq(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_eq(&self) -> usize {
        self.a.nrows()
    }

    /// Row stacking of both blocks.
    pub fn intersect(&self, other: &HPolytope) -> Result<HPolytope> {
        if self.dim() != other.dim() {
            return shape_err(format!(
                "polytope dimensions {} and {} differ",
                self.dim(),
                other.dim()
            ));
        }
        Ok(HPolytope {
            h: vstack(&self.h, &other.h),
            k: vcat(&self.k, &other.k),
            a: vstack(&self.a, &other.a),
            b: vcat(&self.b, &other.b),
        })
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        if x.len() != self.dim() {
            return shape_err(format!(
                "point has {} entries, expected {}",
                x.len(),
                self.dim()
            ));
        }
        let xv = DVector::from_column_slice(x);
        let hx = &self.h * &xv;
        let ax = &self.a * &xv;
        Ok(hx.iter().zip(self.k.iter()).all(|(l, r)| *l <= r + tol)
            && ax
                .iter()
                .zip(self.b.iter())
                .all(|(l, r)| (l - r).abs() <= tol))
    }
}

pub fn poly_intersect(p: &HPolytope, q: &HPolytope) -> Result<HPolytope> {
    p.intersect(q)
}

pub fn poly_contains(p: &HPolytope, x: &[f64], tol: f64) -> Result<bool> {
    p.contains(x, tol)
}

pub(crate) fn vstack(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let cols = top.ncols().max(bottom.ncols());
    let mut m = DMatrix::zeros(top.nrows() + bottom.nrows(), cols);
    m.view_mut((0, 0), top.shape()).copy_from(top);
    m.view_mut((top.nrows(), 0), bottom.shape())
        .copy_from(bottom);
    m
}

pub(crate) fn vcat(top: &DVector<f64>, bottom: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        top.len() + bottom.len(),
        top.iter().chain(bottom.iter()).copied(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(rng: &mut ChaCha8Rng, n: usize, nh: usize, ne: usize) -> HPolytope {
        HPolytope::new(
            DMatrix::from_fn(nh, n, |_, _| rng.gen_range(-1.0..1.0)),
            DVector::from_fn(nh, |_, _| rng.gen_range(0.0..1.0)),
            DMatrix::from_fn(ne, n, |_, _| rng.gen_range(-1.0..1.0)),
            DVector::from_fn(ne, |_, _| rng.gen_range(-0.1..0.1)),
        )
        .unwrap()
    }

    #[test]
    fn halfline_intersection() {
        let p = HPolytope::inequalities(
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
        )
        .unwrap();
        let q = HPolytope::inequalities(
            DMatrix::from_element(1, 1, -1.0),
            DVector::from_element(1, 0.0),
        )
        .unwrap();
        let r = poly_intersect(&p, &q).unwrap();
        assert_eq!(r.h.as_slice(), &[1.0, -1.0]);
        assert_eq!(r.k.as_slice(), &[1.0, 0.0]);
        assert_eq!(p.intersect(&HPolytope::whole_space(1)).unwrap(), p);
        assert!(p.intersect(&HPolytope::whole_space(2)).is_err());
    }

    #[test]
    fn containment_semantics() {
        let mut h = DMatrix::zeros(4, 2);
        h[(0, 0)] = 1.0;
        h[(1, 0)] = -1.0;
        h[(2, 1)] = 1.0;
        h[(3, 1)] = -1.0;
        let bx = HPolytope::inequalities(h, DVector::from_element(4, 1.0)).unwrap();
        assert!(bx.contains(&[0.0, 0.0], 0.0).unwrap());
        assert!(!bx.contains(&[1.5, 0.0], 1e-9).unwrap());
        let eq = HPolytope::equalities(
            DMatrix::from_row_slice(1, 2, &[1.0, 0.0]),
            DVector::from_element(1, 1.0),
        )
        .unwrap();
        assert!(eq.contains(&[1.0000000001, 7.0], 1e-9).unwrap());
        assert!(!eq.contains(&[1.00001, 7.0], 1e-9).unwrap());
        assert!(eq.contains(&[1.0], 1e-9).is_err());
    }

    #[test]
    fn intersection_membership_is_conjunction() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let p = random_poly(&mut rng, 3, 4, 0);
            let q = random_poly(&mut rng, 3, 3, 0);
            let pq = p.intersect(&q).unwrap();
            let qp = q.intersect(&p).unwrap();
            for _ in 0..1000 {
                let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let both = p.contains(&x, 0.0).unwrap() && q.contains(&x, 0.0).unwrap();
                assert_eq!(pq.contains(&x, 0.0).unwrap(), both);
                assert_eq!(qp.contains(&x, 0.0).unwrap(), both);
            }
        }
    }
}
