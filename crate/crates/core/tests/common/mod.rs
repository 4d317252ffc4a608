//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the LP solver: sets are described by their vertices and facets.
#![allow(dead_code)]

use czpr::conzono::ConstrainedZonotope;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Index subsets of size `k` from `0..n`.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Vertices of `{ξ : |ξ|∞ ≤ 1, Aξ = b}` for full-row-rank `A`: every vertex
/// has at most `n_c` coordinates strictly inside the box.
pub fn factor_vertices(a: &DMatrix<f64>, b: &DVector<f64>) -> Vec<DVector<f64>> {
    let (nc, ng) = (a.nrows(), a.ncols());
    let mut out: Vec<DVector<f64>> = Vec::new();
    for free in subsets(ng, nc) {
        let fixed: Vec<usize> = (0..ng).filter(|j| !free.contains(j)).collect();
        let af = DMatrix::from_fn(nc, nc, |i, k| a[(i, free[k])]);
        let Some(inv) = af.clone().try_inverse() else {
            continue;
        };
        if af.determinant().abs() < 1e-10 {
            continue;
        }
        for signs in 0..(1u32 << fixed.len()) {
            let mut xi = DVector::zeros(ng);
            for (t, &j) in fixed.iter().enumerate() {
                xi[j] = if signs >> t & 1 == 1 { 1.0 } else { -1.0 };
            }
            let rhs = b - a * &xi;
            let sol = &inv * rhs;
            if sol.iter().all(|v| v.abs() <= 1.0 + 1e-12) {
                for (k, &j) in free.iter().enumerate() {
                    xi[j] = sol[k].clamp(-1.0, 1.0);
                }
                if !out.iter().any(|p| (p - &xi).amax() < 1e-12) {
                    out.push(xi);
                }
            }
        }
    }
    out
}

/// Points whose convex hull is the constrained zonotope.
pub fn cz_points(z: &ConstrainedZonotope) -> Vec<DVector<f64>> {
    factor_vertices(&z.a, &z.b)
        .into_iter()
        .map(|xi| &z.g * xi + &z.c)
        .collect()
}

pub fn dedup(points: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for p in points {
        if !out.iter().any(|q| (q - &p).amax() < 1e-12) {
            out.push(p);
        }
    }
    out
}

/// Half-spaces `nᵀx ≤ d` (unit `n`) of a full-dimensional hull in ℝ¹..ℝ³,
/// found by trying every hyperplane through `dim` points.
#[derive(Debug, Clone)]
pub struct Facets {
    pub normals: Vec<DVector<f64>>,
    pub offsets: Vec<f64>,
    pub scale: f64,
}

fn hyperplane(pts: &[&DVector<f64>]) -> Option<DVector<f64>> {
    let dim = pts[0].len();
    let nrm = match dim {
        1 => DVector::from_vec(vec![1.0]),
        2 => {
            let d = pts[1] - pts[0];
            DVector::from_vec(vec![-d[1], d[0]])
        }
        3 => {
            let u = pts[1] - pts[0];
            let v = pts[2] - pts[0];
            DVector::from_vec(vec![
                u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0],
            ])
        }
        _ => panic!("facet oracle supports dimensions 1 to 3"),
    };
    let len = nrm.norm();
    (len > 1e-9).then(|| nrm / len)
}

pub fn facets(points: &[DVector<f64>]) -> Facets {
    let dim = points[0].len();
    let scale = points.iter().map(|p| p.amax()).fold(1.0, f64::max);
    let tol = 1e-10 * scale;
    let mut normals: Vec<DVector<f64>> = Vec::new();
    let mut offsets: Vec<f64> = Vec::new();
    let combos = if dim == 1 {
        vec![vec![0]]
    } else {
        subsets(points.len(), dim)
    };
    for idx in combos {
        let pts: Vec<&DVector<f64>> = idx.iter().map(|&i| &points[i]).collect();
        let Some(nrm) = hyperplane(&pts) else {
            continue;
        };
        let vals: Vec<f64> = points.iter().map(|p| nrm.dot(p)).collect();
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let d0 = nrm.dot(pts[0]);
        for (s, d) in [(1.0, hi), (-1.0, -lo)] {
            if dim == 1 || (s * d0 - d).abs() <= tol {
                let n = &nrm * s;
                if !normals
                    .iter()
                    .zip(&offsets)
                    .any(|(m, o)| (m - &n).amax() < 1e-9 && (o - d).abs() < tol)
                {
                    normals.push(n);
                    offsets.push(d);
                }
            }
        }
    }
    Facets {
        normals,
        offsets,
        scale,
    }
}

impl Facets {
    /// Largest signed distance outside the hull (negative inside).
    pub fn margin(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(n, d)| n.dot(&x) - d)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Random constrained zonotope with `n_c` consistent constraints. The
/// factor point `ξ₀` with `|ξ₀| ≤ 0.5` is feasible by construction.
pub fn random_cz(rng: &mut ChaCha8Rng, n: usize, ng: usize, nc: usize) -> ConstrainedZonotope {
    let g = DMatrix::from_fn(n, ng, |_, _| rng.gen_range(-1.0..1.0));
    let c = DVector::from_fn(n, |_, _| rng.gen_range(-2.0..2.0));
    let a = DMatrix::from_fn(nc, ng, |_, _| rng.gen_range(-1.0..1.0));
    let xi0 = DVector::from_fn(ng, |_, _| rng.gen_range(-0.5..0.5));
    let b = &a * xi0;
    ConstrainedZonotope::new(g, c, a, b).unwrap()
}

/// Uniform point in the box `lo..hi` widened by 10% on each side.
pub fn sample_box(rng: &mut ChaCha8Rng, lo: &[f64], hi: &[f64]) -> Vec<f64> {
    lo.iter()
        .zip(hi)
        .map(|(&l, &h)| {
            let pad = 0.1 * (h - l) + 1e-3;
            rng.gen_range(l - pad..=h + pad)
        })
        .collect()
}
