//! Smoothed Frank-Wolfe over the spectrahedron.
//!
//! Minimizes `f_mu(S) = sum_i sqrt(|z_i|^2 + mu^2)` with `z_i = b_i^dagger S a_i`
//! over `{S >= 0, Tr S = 1}`. For the full problem `a_i = |i>` and
//! `b_i = U|i>`, so `z_i = <i|U^dagger rho|i>`. The linear minimization
//! oracle over the spectrahedron is the projector onto a minimum
//! eigenvector of the gradient, and the step length comes from an exact
//! line search on the (convex, one-dimensional) smoothed objective.
//!
//! `mu` is held fixed within an epoch of `anneal_period` iterations and
//! decays as `mu_0 / (1 + epoch)` between epochs, so the smoothed value is
//! non-increasing inside each epoch.

use num_complex::Complex64;

use crate::linalg::{self, ComplexMatrix, ZERO};

#[derive(Clone, Copy, Debug)]
pub struct Smoothing {
    pub mu0: f64,
    pub anneal_period: usize,
}

impl Smoothing {
    pub fn mu_at(&self, iteration: usize) -> f64 {
        self.mu0 / (1.0 + (iteration / self.anneal_period.max(1)) as f64)
    }
}

/// One smoothed-objective sample.
#[derive(Clone, Copy, Debug)]
pub struct FwSample {
    pub iteration: usize,
    pub epoch: usize,
    pub smoothed: f64,
    pub primal: f64,
}

pub struct FrankWolfe {
    /// Columns `a_i` (k x d).
    a: ComplexMatrix,
    /// Columns `b_i` (k x d).
    b: ComplexMatrix,
    state: ComplexMatrix,
    z: Vec<Complex64>,
    smoothing: Smoothing,
    iteration: usize,
    best_state: ComplexMatrix,
    best_primal: f64,
    pub trace: Vec<FwSample>,
}

fn smoothed(z: &[Complex64], mu: f64) -> f64 {
    z.iter().map(|x| (x.norm_sqr() + mu * mu).sqrt()).sum()
}

pub(crate) fn l1(z: &[Complex64]) -> f64 {
    z.iter().map(|x| x.norm()).sum()
}

impl FrankWolfe {
    /// Full problem for `U`, started at the maximally mixed state.
    pub fn new(u: &ComplexMatrix, smoothing: Smoothing) -> Self {
        let d = u.rows();
        Self::restricted(ComplexMatrix::identity(d), u.clone(), smoothing)
    }

    /// Problem restricted to `rho = V S V^dagger` with `a = V^dagger`, `b = V^dagger U`.
    pub fn on_subspace(u: &ComplexMatrix, basis: &ComplexMatrix, smoothing: Smoothing) -> Self {
        let vh = basis.adjoint();
        let b = &vh * u;
        Self::restricted(vh, b, smoothing)
    }

    fn restricted(a: ComplexMatrix, b: ComplexMatrix, smoothing: Smoothing) -> Self {
        let k = a.rows();
        let state = ComplexMatrix::identity(k).scale(1.0 / k as f64);
        let mut fw = Self {
            a,
            b,
            z: vec![],
            best_state: state.clone(),
            state,
            smoothing,
            iteration: 0,
            best_primal: f64::INFINITY,
            trace: vec![],
        };
        fw.z = fw.coefficients(&fw.state);
        fw.best_primal = l1(&fw.z);
        fw
    }

    /// `z_i = b_i^dagger S a_i`.
    fn coefficients(&self, s: &ComplexMatrix) -> Vec<Complex64> {
        let m = &(&self.b.adjoint() * s) * &self.a;
        linalg::diag_extract(&m)
    }

    fn gradient(&self, mu: f64) -> ComplexMatrix {
        let k: Vec<Complex64> = self.z.iter().map(|z| z.conj() / (2.0 * (z.norm_sqr() + mu * mu).sqrt())).collect();
        let half = &(&self.a * &linalg::diag_embed(&k)) * &self.b.adjoint();
        (&half + &half.adjoint()).hermitian_part()
    }

    /// `z` of the rank-one state `|v><v|`.
    fn atom(&self, v: &[Complex64]) -> Vec<Complex64> {
        let bv = self.b.adjoint().apply(v);
        let av = self.a.adjoint().apply(v);
        bv.iter().zip(&av).map(|(x, y)| x * y.conj()).collect()
    }

    pub fn iterations(&self) -> usize {
        self.iteration
    }

    pub fn state(&self) -> &ComplexMatrix {
        &self.state
    }

    pub fn coefficients_now(&self) -> &[Complex64] {
        &self.z
    }

    /// Best iterate by the unsmoothed objective `sum_i |z_i|`.
    pub fn best(&self) -> (&ComplexMatrix, f64) {
        (&self.best_state, self.best_primal)
    }

    /// Runs `steps` iterations.
    pub fn run(&mut self, steps: usize) {
        for _ in 0..steps {
            self.step();
        }
    }

    fn step(&mut self) {
        let mu = self.smoothing.mu_at(self.iteration);
        let epoch = self.iteration / self.smoothing.anneal_period.max(1);
        let g = self.gradient(mu);
        let (_, v) = linalg::min_eigenpair(&g);
        let w = self.atom(&v);
        let z0 = self.z.clone();
        let h = |gamma: f64| -> f64 {
            z0.iter()
                .zip(&w)
                .map(|(a, b)| {
                    let x = a * (1.0 - gamma) + b * gamma;
                    (x.norm_sqr() + mu * mu).sqrt()
                })
                .sum()
        };
        let gamma = golden_section(&h, 0.0, 1.0, 1e-12);
        let gamma = if h(gamma) <= h(0.0) { gamma } else { 0.0 };
        if gamma > 0.0 {
            let atom = ComplexMatrix::outer(&v, &v);
            self.state = self.state.scale(1.0 - gamma) + atom.scale(gamma);
            self.z = z0.iter().zip(&w).map(|(a, b)| a * (1.0 - gamma) + b * gamma).collect();
        }
        self.iteration += 1;
        if self.iteration.is_multiple_of(100) {
            self.state = self.state.hermitian_part();
            self.z = self.coefficients(&self.state);
        }
        let primal = l1(&self.z);
        if primal < self.best_primal {
            self.best_primal = primal;
            self.best_state = self.state.clone();
        }
        self.trace.push(FwSample { iteration: self.iteration, epoch, smoothed: smoothed(&self.z, mu), primal });
    }
}

/// Minimizer of a unimodal function on `[lo, hi]`.
pub(crate) fn golden_section(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    // the end points are candidates too
    [mid, 0.0_f64.max(lo), hi]
        .into_iter()
        .fold((mid, f(mid)), |(bx, bf), x| {
            let fx = f(x);
            if fx < bf {
                (x, fx)
            } else {
                (bx, bf)
            }
        })
        .0
}

/// `sum_i |<i|U^dagger rho|i>|`.
pub fn program_objective(u: &ComplexMatrix, rho: &ComplexMatrix) -> f64 {
    l1(&diag_coefficients(u, rho))
}

/// `<i|U^dagger rho|i>` for all `i`.
pub fn diag_coefficients(u: &ComplexMatrix, rho: &ComplexMatrix) -> Vec<Complex64> {
    let d = u.rows();
    (0..d).map(|i| (0..d).fold(ZERO, |acc, j| acc + u[(j, i)].conj() * rho[(j, i)])).collect()
}
