//! Dual side: diagonal phases `E = diag(e^{i phi})` and the spectrum of `UE`.
//!
//! The eigenvalues of the unitary `UE` lie on the unit circle. If the
//! shortest arc containing all of them has length `S < pi`, the hull of the
//! spectrum misses the origin by `cos(S/2)`; otherwise it contains 0. With
//! `v` a unit eigenvector, `d arg(lambda) / d phi_c = |v_c|^2`, so the arc
//! length has gradient `|v_hi,c|^2 - |v_lo,c|^2` where `lo` and `hi` are the
//! arc end points. Minimizing the arc length maximizes the dual bound, and
//! at a smooth stationary point the two end-point eigenvectors have equal
//! moduli, which makes their even mixture a primal state with the same value.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::linalg::{self, ComplexMatrix};

/// Spectrum of `UE` together with its enclosing arc.
#[derive(Clone, Debug)]
pub struct ArcEval {
    /// Length of the shortest arc holding the spectrum.
    pub spread: f64,
    pub gradient: Vec<f64>,
    pub angles: Vec<f64>,
    pub vectors: ComplexMatrix,
    /// The arc runs counterclockwise from `lo` to `hi`.
    pub lo: usize,
    pub hi: usize,
}

impl ArcEval {
    /// `dist(0, hull)` implied by the arc.
    pub fn distance(&self) -> f64 {
        if self.spread < PI {
            (0.5 * self.spread).cos()
        } else {
            0.0
        }
    }

    /// Eigen-indices whose angle is within `tol` of the end point `k`.
    pub fn cluster(&self, k: usize, tol: f64) -> Vec<usize> {
        let a = self.angles[k];
        (0..self.angles.len())
            .filter(|&j| {
                let diff = (self.angles[j] - a).rem_euclid(TAU);
                diff.min(TAU - diff) <= tol
            })
            .collect()
    }
}

pub fn scaled_columns(u: &ComplexMatrix, phases: &[f64]) -> ComplexMatrix {
    let e = linalg::phase_diag(phases);
    u * &e
}

pub fn arc_of(u: &ComplexMatrix, phases: &[f64]) -> ArcEval {
    let w = scaled_columns(u, phases);
    let (values, vectors) = linalg::normal_eig(&w).expect("square input");
    let n = values.len();
    let angles: Vec<f64> = values.iter().map(|z| z.arg()).collect();
    if n <= 1 {
        return ArcEval { spread: 0.0, gradient: vec![0.0; n], angles, vectors, lo: 0, hi: 0 };
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| angles[a].total_cmp(&angles[b]));
    // the largest gap between consecutive angles (cyclically) is the complement of the arc
    let (mut best_gap, mut before, mut after) = (f64::NEG_INFINITY, 0, 0);
    for k in 0..n {
        let a = order[k];
        let b = order[(k + 1) % n];
        let gap = (angles[b] - angles[a]).rem_euclid(TAU);
        let gap = if k + 1 == n && gap == 0.0 { TAU } else { gap };
        if gap > best_gap {
            best_gap = gap;
            before = a;
            after = b;
        }
    }
    let spread = (TAU - best_gap).max(0.0);
    let (lo, hi) = (after, before);
    let gradient = (0..n).map(|c| vectors[(c, hi)].norm_sqr() - vectors[(c, lo)].norm_sqr()).collect();
    ArcEval { spread, gradient, angles, vectors, lo, hi }
}

/// BFGS with backtracking on the arc length.
pub fn minimize_spread(u: &ComplexMatrix, start: &[f64], max_iter: usize) -> (Vec<f64>, ArcEval) {
    let n = start.len();
    let mut x = start.to_vec();
    let mut e = arc_of(u, &x);
    if n <= 1 {
        return (x, e);
    }
    let mut h = identity(n);
    let mut fresh = true;
    for _ in 0..max_iter {
        let g = e.gradient.clone();
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1e-15 {
            break;
        }
        let mut p: Vec<f64> = (0..n).map(|i| -(0..n).map(|j| h[i][j] * g[j]).sum::<f64>()).collect();
        let mut slope = dot(&g, &p);
        if slope >= 0.0 {
            h = identity(n);
            fresh = true;
            p = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }
        let pmax = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if pmax > 1.0 {
            p.iter_mut().for_each(|v| *v /= pmax);
            slope /= pmax;
        }
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + t * b).collect();
            let en = arc_of(u, &xn);
            if en.spread <= e.spread + 1e-4 * t * slope {
                accepted = Some((xn, en));
                break;
            }
            t *= 0.5;
        }
        let Some((xn, en)) = accepted else {
            if fresh {
                break;
            }
            h = identity(n);
            fresh = true;
            continue;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = en.gradient.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-20 {
            bfgs_update(&mut h, &s, &y, sy);
            fresh = false;
        }
        let improved = e.spread - en.spread;
        x = xn;
        e = en;
        if improved <= 1e-16 && fresh {
            break;
        }
    }
    (x, e)
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Inverse-Hessian update `H <- (I - r s y^T) H (I - r y s^T) + r s s^T`.
fn bfgs_update(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let r = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -r * (s[i] * hy[j] + hy[i] * s[j]) + (r * r * yhy + r) * s[i] * s[j];
        }
    }
}

/// Phases maximizing `|Tr(rho U E)|` for a fixed state: `phi_i = arg z_i`
/// with `z_i = <i|U^dagger rho|i>`.
pub fn aligned_phases(z: &[Complex64]) -> Vec<f64> {
    z.iter().map(|x| if x.norm() > 0.0 { x.arg() } else { 0.0 }).collect()
}

/// Even mixture of the two arc end-point eigenvectors.
pub fn endpoint_state(arc: &ArcEval) -> ComplexMatrix {
    let a = arc.vectors.column_vec(arc.lo);
    let b = arc.vectors.column_vec(arc.hi);
    (ComplexMatrix::outer(&a, &a) + ComplexMatrix::outer(&b, &b)).scale(0.5)
}
