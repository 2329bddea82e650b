//! Closed forms: Fourier matrices and reflections `1 - 2|x><x|`.
//!
//! Discriminator states in this module are given in the form `rho` with
//! `diag(U^dagger rho) = 0`; the input state of the Choi-sandwich formula is
//! `rho^T`. The Fourier states are real symmetric, so the two coincide.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, ONE, ZERO};
use crate::quantum::{DensityMatrix, VonNeumannMeasurement};
use crate::tolerance::SUBSET_CAP;

/// `F_d` with entries `omega^{jk} / sqrt(d)`, `omega = e^{2 pi i / d}`.
pub fn fourier_matrix(d: usize) -> Result<VonNeumannMeasurement> {
    if d == 0 {
        return Err(Error::InvalidArgument("Fourier dimension must be at least 1".into()));
    }
    let s = 1.0 / (d as f64).sqrt();
    let u = ComplexMatrix::from_fn(d, d, |j, k| Complex64::from_polar(s, TAU * ((j * k) % d) as f64 / d as f64));
    VonNeumannMeasurement::new(u)
}

/// Normalized rank-two state `X` with `diag(F_d^dagger X) = 0`, for `d >= 4`.
pub fn fourier_discriminator(d: usize) -> Result<DensityMatrix> {
    if d < 4 {
        return Err(Error::InvalidArgument(format!("Fourier discriminator needs d >= 4, got {d}")));
    }
    let c = (TAU / d as f64).cos();
    let mut x = ComplexMatrix::zeros(d, d);
    let l = d - 1;
    let set = |x: &mut ComplexMatrix, i: usize, j: usize, v: f64| x.set(i, j, Complex64::new(v, 0.0));
    set(&mut x, 0, 0, 4.0 * c);
    for &(i, j) in &[(0, 1), (1, 0), (0, l), (l, 0)] {
        set(&mut x, i, j, -2.0 * c);
    }
    for &(i, j) in &[(1, 1), (1, l), (l, 1), (l, l)] {
        set(&mut x, i, j, 1.0);
    }
    DensityMatrix::normalized(x)
}

/// Largest `m > 1` with `m^2 | d`, as `(m, d / m^2)`.
pub fn rank1_factorization(d: usize) -> Option<(usize, usize)> {
    (2..=d).take_while(|m| m * m <= d).filter(|m| d.is_multiple_of(m * m)).last().map(|m| (m, d / (m * m)))
}

/// `(|0> - |mn>)(<0| - <mn|) / 2` for `d = m^2 n`, `m > 1`.
pub fn fourier_rank1_discriminator(d: usize, m: usize, n: usize) -> Result<DensityMatrix> {
    if m < 2 || n == 0 || m * m * n != d {
        return Err(Error::InvalidArgument(format!("{d} != m^2 n with m = {m} > 1, n = {n}")));
    }
    let mut psi = vec![ZERO; d];
    psi[0] = ONE;
    psi[m * n] = -ONE;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    psi.iter_mut().for_each(|z| *z *= s);
    DensityMatrix::pure(&psi)
}

/// Reflection axis `x` with `omega = max_i |x_i|^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReflectionSpec {
    pub axis: Vec<Complex64>,
    pub omega: f64,
}

impl ReflectionSpec {
    pub fn new(axis: Vec<Complex64>) -> Result<Self> {
        if axis.is_empty() {
            return Err(Error::InvalidArgument("empty reflection axis".into()));
        }
        if axis.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("non-finite reflection axis".into()));
        }
        let norm = axis.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("reflection axis has norm {norm}, expected 1")));
        }
        let omega = axis.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
        Ok(Self { axis, omega })
    }

    /// `x_i = 1/sqrt(d)`.
    pub fn uniform(d: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(1.0 / (d.max(1) as f64).sqrt(), 0.0); d])
    }

    /// `x = (sqrt(omega), c, ..., c)` with the remaining weight spread evenly.
    pub fn with_omega(d: usize, omega: f64) -> Result<Self> {
        if d < 2 || !(1.0 / d as f64 - 1e-12..=1.0).contains(&omega) {
            return Err(Error::InvalidArgument(format!("omega = {omega} not attainable in d = {d}")));
        }
        let rest = ((1.0 - omega) / (d - 1) as f64).max(0.0).sqrt();
        let mut axis = vec![Complex64::new(rest, 0.0); d];
        axis[0] = Complex64::new(omega.sqrt(), 0.0);
        Self::new(axis)
    }

    pub fn dim(&self) -> usize {
        self.axis.len()
    }
}

/// `U = 1 - 2|x><x|`.
pub fn reflection_matrix(spec: &ReflectionSpec) -> VonNeumannMeasurement {
    let d = spec.dim();
    let u = ComplexMatrix::identity(d) - ComplexMatrix::outer(&spec.axis, &spec.axis).scale(2.0);
    VonNeumannMeasurement::new(u).expect("reflection of a unit axis is unitary")
}

#[derive(Clone, Debug)]
pub struct ReflectionDiamond {
    pub diamond: f64,
    pub perfect: bool,
    /// Some subset of the weights `|x_i|^2` sums to 1/2.
    pub rank1_possible: bool,
    pub rank1_subset: Option<Vec<usize>>,
    /// State of the `sum_i |<i|U^dagger rho|i>|` program: `diag(U^dagger rho) = 0` when
    /// `perfect`, otherwise it attains the distance. Its transpose is the input marginal.
    pub discriminator: DensityMatrix,
}

/// Closed-form distance `||P_U - P_1||` for `U = 1 - 2|x><x|`.
pub fn reflection_diamond(spec: &ReflectionSpec) -> Result<ReflectionDiamond> {
    let d = spec.dim();
    if d > SUBSET_CAP {
        return Err(Error::SubsetCapExceeded { n: d, cap: SUBSET_CAP });
    }
    let weights: Vec<f64> = spec.axis.iter().map(|z| z.norm_sqr()).collect();
    let rank1_subset = half_weight_subset(&weights, 1e-9);
    let rank1_possible = rank1_subset.is_some();
    if spec.omega <= 0.5 + 1e-12 {
        let beta = close_polygon_phases(&weights)?;
        let y: Vec<Complex64> =
            spec.axis.iter().zip(&beta).map(|(x, b)| Complex64::from_polar(x.norm(), x.arg() - b)).collect();
        let rho = (ComplexMatrix::outer(&spec.axis, &spec.axis) + ComplexMatrix::outer(&y, &y)).scale(0.5);
        return Ok(ReflectionDiamond {
            diamond: 2.0,
            perfect: true,
            rank1_possible,
            rank1_subset,
            discriminator: DensityMatrix::normalized(rho)?,
        });
    }
    let t = 2.0 * (spec.omega - 0.5);
    let diamond = 2.0 * (1.0 - t * t).max(0.0).sqrt();
    Ok(ReflectionDiamond {
        diamond,
        perfect: false,
        rank1_possible,
        rank1_subset,
        discriminator: heavy_axis_discriminator(spec)?,
    })
}

/// For `omega > 1/2`: with `k` the heavy coordinate and `E` flipping its
/// sign, `UE` acts on `span{|k>, x}` as a rotation and trivially elsewhere.
/// The even mixture of the two rotation eigenvectors is optimal.
fn heavy_axis_discriminator(spec: &ReflectionSpec) -> Result<DensityMatrix> {
    let d = spec.dim();
    let k = (0..d).max_by(|&a, &b| spec.axis[a].norm_sqr().total_cmp(&spec.axis[b].norm_sqr())).unwrap();
    let mut r: Vec<Complex64> = spec.axis.clone();
    r[k] = ZERO;
    let rn = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut ek = vec![ZERO; d];
    ek[k] = ONE;
    if rn <= 1e-15 {
        return DensityMatrix::pure(&ek);
    }
    r.iter_mut().for_each(|z| *z /= rn);
    // the plane spanned by |k> and the normalized remainder of x
    DensityMatrix::normalized(ComplexMatrix::outer(&ek, &ek) + ComplexMatrix::outer(&r, &r))
}

/// A subset of indices whose weights sum to 1/2 within `tol`, first in
/// (cardinality, lexicographic) order.
pub fn half_weight_subset(weights: &[f64], tol: f64) -> Option<Vec<usize>> {
    let n = weights.len();
    let total: f64 = weights.iter().sum();
    let mut masks: Vec<u32> = (1..(1u32 << n)).collect();
    masks.sort_by_key(|&m| (m.count_ones(), (0..n).map(|i| if m >> i & 1 == 1 { 0 } else { 1 }).collect::<Vec<_>>()));
    masks
        .into_iter()
        .find(|&m| {
            let s: f64 = (0..n).filter(|i| m >> i & 1 == 1).map(|i| weights[i]).sum();
            (s - 0.5 * total).abs() <= tol
        })
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
}

/// Angles `beta_i in [0, 2 pi)` with `sum_i w_i e^{i beta_i} = 0`.
///
/// Weights are split into three groups (largest first, each to the
/// currently lightest group), which keeps every group at most half the
/// total, and the group sums are closed into a triangle.
pub fn close_polygon_phases(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidArgument("weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    let max = weights.iter().copied().fold(0.0, f64::max);
    if max > 0.5 * total + 1e-12 {
        return Err(Error::PolygonInequality { max, total });
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    let mut sums = [0.0f64; 3];
    let mut group = vec![0usize; weights.len()];
    for &i in &order {
        let g = (0..3).min_by(|&a, &b| sums[a].total_cmp(&sums[b]).then(a.cmp(&b))).unwrap();
        group[i] = g;
        sums[g] += weights[i];
    }
    let [g1, g2, g3] = sums;
    let theta = if g1 > 0.0 && g2 > 0.0 {
        ((g3 * g3 - g1 * g1 - g2 * g2) / (2.0 * g1 * g2)).clamp(-1.0, 1.0).acos()
    } else {
        PI
    };
    let v12 = Complex64::new(g1, 0.0) + Complex64::from_polar(g2, theta);
    let third = if v12.norm() > 0.0 { (-v12).arg() } else { 0.0 };
    let dirs = [0.0, theta, third];
    Ok(group.iter().map(|&g| dirs[g].rem_euclid(TAU)).collect())
}
