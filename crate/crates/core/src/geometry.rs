//! Numerical-range geometry.
//!
//! For a normal matrix the numerical range is the convex hull of its
//! spectrum, so distances from the origin reduce to plane geometry on at
//! most `d` points. General (non-normal) matrices are handled by sweeping
//! the smallest eigenvalue of the Hermitian part of `e^{i theta} A`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::tolerance::{NUMERICAL_RANGE, STATE};

const POINT_EPS: f64 = 1e-12;

fn cross(o: Complex64, a: Complex64, b: Complex64) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

/// Spectrum of a normal matrix together with its convex hull.
#[derive(Clone, Debug)]
pub struct SpectrumHull {
    pub eigenvalues: Vec<Complex64>,
    /// Indices into `eigenvalues`, counterclockwise.
    pub hull_indices: Vec<usize>,
}

impl SpectrumHull {
    pub fn from_points(eigenvalues: Vec<Complex64>) -> Self {
        let hull_indices = convex_hull(&eigenvalues);
        Self { eigenvalues, hull_indices }
    }

    pub fn hull_vertices(&self) -> Vec<Complex64> {
        self.hull_indices.iter().map(|&k| self.eigenvalues[k]).collect()
    }

    /// Every consecutive triple turns left (within round-off).
    pub fn is_convex(&self) -> bool {
        let v = self.hull_vertices();
        let n = v.len();
        n < 3 || (0..n).all(|k| cross(v[k], v[(k + 1) % n], v[(k + 2) % n]) > -POINT_EPS)
    }

    /// Closest point of the hull to the origin, as convex weights over the
    /// eigenvalues.
    pub fn closest_to_origin(&self) -> HullDistance {
        let v = self.hull_vertices();
        let idx = &self.hull_indices;
        let mut weights = vec![0.0; self.eigenvalues.len()];
        match v.len() {
            0 => HullDistance { nu: 0.0, weights },
            1 => {
                weights[idx[0]] = 1.0;
                HullDistance { nu: v[0].norm(), weights }
            }
            2 => {
                let (t, nu) = closest_on_segment(v[0], v[1]);
                weights[idx[0]] = 1.0 - t;
                weights[idx[1]] += t;
                HullDistance { nu, weights }
            }
            n => {
                let origin = Complex64::new(0.0, 0.0);
                let inside = (0..n).all(|k| cross(v[k], v[(k + 1) % n], origin) >= -POINT_EPS);
                if inside {
                    for k in 1..n - 1 {
                        if let Some(b) = barycentric(v[0], v[k], v[k + 1]) {
                            weights[idx[0]] += b[0];
                            weights[idx[k]] += b[1];
                            weights[idx[k + 1]] += b[2];
                            return HullDistance { nu: 0.0, weights };
                        }
                    }
                }
                let mut best = (f64::INFINITY, 0, 0.0);
                for k in 0..n {
                    let (t, d) = closest_on_segment(v[k], v[(k + 1) % n]);
                    if d < best.0 {
                        best = (d, k, t);
                    }
                }
                let (nu, k, t) = best;
                weights[idx[k]] += 1.0 - t;
                weights[idx[(k + 1) % n]] += t;
                HullDistance { nu: if inside { 0.0 } else { nu }, weights }
            }
        }
    }
}

/// Distance from the origin to the hull with its witness weights.
#[derive(Clone, Debug)]
pub struct HullDistance {
    pub nu: f64,
    /// Convex weights over the eigenvalues; `|sum w_k lambda_k| = nu`.
    pub weights: Vec<f64>,
}

fn closest_on_segment(a: Complex64, b: Complex64) -> (f64, f64) {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 <= POINT_EPS * POINT_EPS {
        return (0.0, a.norm());
    }
    let t = (-(a.re * ab.re + a.im * ab.im) / len2).clamp(0.0, 1.0);
    (t, (a + ab * t).norm())
}

fn barycentric(a: Complex64, b: Complex64, c: Complex64) -> Option<[f64; 3]> {
    let area = cross(a, b, c);
    if area.abs() <= POINT_EPS {
        return None;
    }
    let o = Complex64::new(0.0, 0.0);
    let wa = cross(o, b, c) / area;
    let wb = cross(a, o, c) / area;
    let wc = 1.0 - wa - wb;
    let tol = 1e-12;
    (wa >= -tol && wb >= -tol && wc >= -tol).then(|| [wa.max(0.0), wb.max(0.0), wc.max(0.0)])
}

/// Andrew's monotone chain; collinear points are dropped so only extreme
/// points remain.
fn convex_hull(points: &[Complex64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].re.total_cmp(&points[j].re).then(points[i].im.total_cmp(&points[j].im)));
    let mut unique: Vec<usize> = Vec::new();
    for k in order {
        if unique.last().is_none_or(|&l| (points[l] - points[k]).norm() > POINT_EPS) {
            unique.push(k);
        }
    }
    if unique.len() <= 2 {
        return unique;
    }
    let mut lower: Vec<usize> = Vec::new();
    for &k in &unique {
        while lower.len() >= 2
            && cross(points[lower[lower.len() - 2]], points[lower[lower.len() - 1]], points[k]) <= POINT_EPS
        {
            lower.pop();
        }
        lower.push(k);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &k in unique.iter().rev() {
        while upper.len() >= 2
            && cross(points[upper[upper.len() - 2]], points[upper[upper.len() - 1]], points[k]) <= POINT_EPS
        {
            upper.pop();
        }
        upper.push(k);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Result of [`dist_zero_to_hull`].
#[derive(Clone, Debug)]
pub struct NumericalRangeDistance {
    pub nu: f64,
    pub hull: SpectrumHull,
    pub weights: Vec<f64>,
    /// Eigenvectors matching `hull.eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl NumericalRangeDistance {
    /// Density matrix diagonal in the eigenbasis whose expectation value of
    /// the input is the closest point of the numerical range.
    pub fn witness_state(&self) -> ComplexMatrix {
        let w: Vec<Complex64> = self.weights.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let v = &self.eigenvectors;
        &(v * &linalg::diag_embed(&w)) * &v.adjoint()
    }
}

/// `nu = min{|x| : x in W(A)}` for a normal matrix `A`.
pub fn dist_zero_to_hull(a: &ComplexMatrix) -> Result<NumericalRangeDistance> {
    if !a.is_square() {
        return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let defect = a.normality_defect();
    if defect > STATE * a.frobenius_norm().powi(2).max(1.0) {
        return Err(Error::NotNormal(defect));
    }
    let (values, vectors) = linalg::normal_eig(a)?;
    let hull = SpectrumHull::from_points(values);
    let HullDistance { nu, weights } = hull.closest_to_origin();
    Ok(NumericalRangeDistance { nu, hull, weights, eigenvectors: vectors })
}

/// `||Phi_U - Phi_1||_diamond = 2 sqrt(1 - nu^2)` with `nu` the distance
/// from the origin to `W(U^dagger)`.
pub fn unitary_channel_distance(u: &ComplexMatrix) -> Result<f64> {
    let defect = u.unitarity_defect();
    if defect > STATE {
        return Err(Error::NotUnitary(defect));
    }
    let nu = dist_zero_to_hull(&u.adjoint())?.nu.min(1.0);
    Ok(2.0 * (1.0 - nu * nu).max(0.0).sqrt())
}

/// Verdict of [`zero_in_numerical_range`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RangeMembership {
    Inside,
    /// `lambda_min(Re(e^{i theta} A)) = margin > 0` separates `W(A)` from 0.
    Outside {
        theta: f64,
        margin: f64,
    },
    /// The best separating margin lies within the tolerance band.
    Boundary {
        margin: f64,
    },
}

impl RangeMembership {
    pub fn contains_zero(&self) -> bool {
        !matches!(self, RangeMembership::Outside { .. })
    }

    pub fn is_outside(&self) -> bool {
        matches!(self, RangeMembership::Outside { .. })
    }
}

const SWEEP_POINTS: usize = 721;
const SWEEP_RESOLUTION: f64 = 1e-6;

fn rotated_min_eig(a: &ComplexMatrix, theta: f64) -> f64 {
    let r = a.scale_c(Complex64::from_polar(1.0, theta)).hermitian_part();
    linalg::hermitian_eig_unchecked(&r).min()
}

/// Whether `0 ∈ W(A)`. Hermitian inputs use the interval test; otherwise
/// the best separating direction is located on a 721-point grid and refined
/// by golden-section search.
pub fn zero_in_numerical_range(a: &ComplexMatrix) -> RangeMembership {
    let tol = NUMERICAL_RANGE;
    if a.is_hermitian(1e-12) {
        let sys = linalg::hermitian_eig_unchecked(&a.hermitian_part());
        if sys.min() > tol {
            return RangeMembership::Outside { theta: 0.0, margin: sys.min() };
        }
        if sys.max() < -tol {
            return RangeMembership::Outside { theta: std::f64::consts::PI, margin: -sys.max() };
        }
        return RangeMembership::Inside;
    }
    let step = std::f64::consts::TAU / (SWEEP_POINTS - 1) as f64;
    let (mut best_theta, mut best) = (0.0, f64::NEG_INFINITY);
    for k in 0..SWEEP_POINTS {
        let theta = k as f64 * step;
        let f = rotated_min_eig(a, theta);
        if f > best {
            best = f;
            best_theta = theta;
        }
    }
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best_theta - step, best_theta + step);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (rotated_min_eig(a, x1), rotated_min_eig(a, x2));
    while hi - lo > SWEEP_RESOLUTION {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = rotated_min_eig(a, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = rotated_min_eig(a, x1);
        }
    }
    for (theta, f) in [(x1, f1), (x2, f2)] {
        if f > best {
            best = f;
            best_theta = theta;
        }
    }
    if best > tol {
        RangeMembership::Outside { theta: best_theta.rem_euclid(std::f64::consts::TAU), margin: best }
    } else if best < -tol {
        RangeMembership::Inside
    } else {
        RangeMembership::Boundary { margin: best }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::diag_embed;
    use crate::random::{haar_unitary, random_matrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn cis(t: f64) -> Complex64 {
        Complex64::from_polar(1.0, t)
    }

    #[test]
    fn hull_distance_examples() {
        let r = dist_zero_to_hull(&diag_embed(&[cis(0.0), cis(PI)])).unwrap();
        assert!(r.nu.abs() < 1e-12);
        let r = dist_zero_to_hull(&diag_embed(&[cis(FRAC_PI_4), cis(-FRAC_PI_4)])).unwrap();
        assert!((r.nu - 2f64.sqrt() / 2.0).abs() < 1e-12);
        let r = dist_zero_to_hull(&ComplexMatrix::identity(3)).unwrap();
        assert!((r.nu - 1.0).abs() < 1e-12);
        assert!(matches!(
            dist_zero_to_hull(&ComplexMatrix::from_real(2, 2, &[0., 1., 0., 0.]).unwrap()),
            Err(Error::NotNormal(_))
        ));
    }

    #[test]
    fn channel_distance_examples() {
        assert!(unitary_channel_distance(&ComplexMatrix::identity(2)).unwrap().abs() < 1e-12);
        assert!((unitary_channel_distance(&ComplexMatrix::diag_real(&[1.0, -1.0])).unwrap() - 2.0).abs() < 1e-12);
        let u = diag_embed(&[cis(0.0), cis(FRAC_PI_2)]);
        assert!((unitary_channel_distance(&u).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!(unitary_channel_distance(&ComplexMatrix::diag_real(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn witness_reproduces_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for t in 0..200 {
            let d = 1 + t % 6;
            let mut u = haar_unitary(d, &mut rng);
            if t % 3 == 0 {
                // squeeze the spectrum into an arc so the origin is outside
                let (vals, vecs) = linalg::normal_eig(&u).unwrap();
                let squeezed: Vec<Complex64> = vals.iter().map(|l| cis(l.arg() * 0.4 + rng.random::<f64>())).collect();
                u = &(&vecs * &diag_embed(&squeezed)) * &vecs.adjoint();
            }
            let r = dist_zero_to_hull(&u).unwrap();
            assert!(r.hull.is_convex());
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-9);
            assert!(r.weights.iter().all(|&w| w >= 0.0));
            let x: Complex64 = r.weights.iter().zip(&r.hull.eigenvalues).map(|(w, l)| l * *w).sum();
            assert!((x.norm() - r.nu).abs() < 1e-9, "{} vs {}", x.norm(), r.nu);
            assert!(r.nu <= 1.0 + 1e-12);
            let rho = r.witness_state();
            assert!(((&rho * &u).trace().norm() - r.nu).abs() < 1e-9);
        }
    }

    #[test]
    fn global_phase_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for d in 1..6 {
            let u = haar_unitary(d, &mut rng);
            let a = unitary_channel_distance(&u).unwrap();
            for _ in 0..5 {
                let phi = rng.random::<f64>() * std::f64::consts::TAU;
                let b = unitary_channel_distance(&u.scale_c(cis(phi))).unwrap();
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn nu_is_one_only_for_scalar_unitaries() {
        let u = ComplexMatrix::identity(3).scale_c(cis(1.2));
        assert!((dist_zero_to_hull(&u).unwrap().nu - 1.0).abs() < 1e-12);
        let u = diag_embed(&[cis(0.0), cis(0.1), cis(0.1)]);
        assert!(dist_zero_to_hull(&u).unwrap().nu < 1.0 - 1e-4);
    }

    #[test]
    fn membership_examples() {
        let nil = ComplexMatrix::from_real(2, 2, &[0., 1., 0., 0.]).unwrap();
        assert!(zero_in_numerical_range(&nil).contains_zero());
        assert!(zero_in_numerical_range(&ComplexMatrix::identity(3)).is_outside());
        assert_eq!(zero_in_numerical_range(&ComplexMatrix::diag_real(&[1.0, -2.0])), RangeMembership::Inside);
        assert!(zero_in_numerical_range(&ComplexMatrix::diag_real(&[-1.0, -2.0])).is_outside());
    }

    #[test]
    fn membership_non_normal_outside() {
        // W = disk of radius 1/2 around 1 (shifted nilpotent) misses the origin
        let a = ComplexMatrix::from_real(2, 2, &[1., 1., 0., 1.]).unwrap().scale_c(cis(2.0));
        match zero_in_numerical_range(&a) {
            RangeMembership::Outside { margin, .. } => assert!((margin - 0.5).abs() < 1e-8),
            other => panic!("{other:?}"),
        }
        // radius 1 around 1: origin on the boundary
        let b = ComplexMatrix::from_real(2, 2, &[1., 2., 0., 1.]).unwrap();
        assert!(matches!(zero_in_numerical_range(&b), RangeMembership::Boundary { .. }));
    }

    #[test]
    fn membership_agrees_with_hull_for_normal() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        for t in 0..60 {
            let d = 2 + t % 4;
            let q = haar_unitary(d, &mut rng);
            let spread = if t % 2 == 0 { 0.3 } else { 1.0 };
            let vals: Vec<Complex64> = (0..d)
                .map(|_| cis(rng.random::<f64>() * spread * std::f64::consts::TAU) * (0.5 + rng.random::<f64>()))
                .collect();
            let a = &(&q * &diag_embed(&vals)) * &q.adjoint();
            let nu = dist_zero_to_hull(&a).unwrap().nu;
            let m = zero_in_numerical_range(&a);
            if nu > 1e-6 {
                assert!(m.is_outside(), "nu {nu} {m:?}");
            } else {
                assert!(m.contains_zero());
            }
        }
        let _ = random_matrix(2, &mut rng);
    }
}
