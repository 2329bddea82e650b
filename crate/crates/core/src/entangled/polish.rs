//! Dykstra alternating projections between a product of scaled
//! spectrahedra `{S_b >= 0, Tr S_b = t_b}` (block diagonal) and an affine
//! set `{X : Re Tr(A_k X) = c_k}` of Hermitian matrices.

use nalgebra::DMatrix;

use crate::linalg::{self, ComplexMatrix};

pub struct Feasibility {
    blocks: Vec<(usize, f64)>,
    constraints: Vec<ComplexMatrix>,
    rhs: Vec<f64>,
    gram_pinv: DMatrix<f64>,
}

impl Feasibility {
    pub fn new(blocks: Vec<(usize, f64)>, constraints: Vec<ComplexMatrix>, rhs: Vec<f64>) -> Self {
        let m = constraints.len();
        let gram = DMatrix::from_fn(m, m, |k, l| constraints[k].hs_inner(&constraints[l]).re);
        let gram_pinv = gram.pseudo_inverse(1e-12).unwrap_or_else(|_| DMatrix::zeros(m, m));
        Self { blocks, constraints, rhs, gram_pinv }
    }

    fn size(&self) -> usize {
        self.blocks.iter().map(|b| b.0).sum()
    }

    /// `Re Tr(A_k X) - c_k`.
    pub fn violations(&self, x: &ComplexMatrix) -> Vec<f64> {
        self.constraints.iter().zip(&self.rhs).map(|(a, c)| a.hs_inner(x).re - c).collect()
    }

    fn project_affine(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let r = nalgebra::DVector::from_vec(self.violations(x));
        let c = &self.gram_pinv * r;
        let mut out = x.clone();
        for (a, ck) in self.constraints.iter().zip(c.iter()) {
            out = out - a.scale(*ck);
        }
        out.hermitian_part()
    }

    fn project_blocks(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let n = self.size();
        let mut out = ComplexMatrix::zeros(n, n);
        let mut offset = 0;
        for &(size, t) in &self.blocks {
            let idx: Vec<usize> = (offset..offset + size).collect();
            let block = x.principal_submatrix(&idx).hermitian_part();
            let sys = linalg::hermitian_eig_unchecked(&block);
            let lam = simplex_projection(&sys.eigenvalues, t);
            let mut scaled = sys.eigenvectors.clone();
            for (k, l) in lam.iter().enumerate() {
                for r in 0..size {
                    let v = scaled[(r, k)] * *l;
                    scaled.set(r, k, v);
                }
            }
            let p = &scaled * &sys.eigenvectors.adjoint();
            for r in 0..size {
                for c in 0..size {
                    out.set(offset + r, offset + c, p[(r, c)]);
                }
            }
            offset += size;
        }
        out.hermitian_part()
    }

    /// Runs until `residual(state) <= tol`, stagnation, or `max_sweeps`, and
    /// returns the best iterate on the spectrahedron side with its residual.
    pub fn dykstra(
        &self,
        start: &ComplexMatrix,
        max_sweeps: usize,
        tol: f64,
        residual: impl Fn(&ComplexMatrix) -> f64,
    ) -> (ComplexMatrix, f64) {
        let mut x = start.hermitian_part();
        let n = self.size();
        let mut p = ComplexMatrix::zeros(n, n);
        let mut best = self.project_blocks(&x);
        let mut best_res = residual(&best);
        for _ in 0..max_sweeps {
            if best_res <= tol {
                break;
            }
            let y = self.project_blocks(&(&x + &p));
            p = &(&x + &p) - &y;
            let xn = self.project_affine(&y);
            let res = residual(&y);
            if res < best_res {
                best_res = res;
                best = y;
            }
            let moved = (&xn - &x).frobenius_norm();
            x = xn;
            if moved < 1e-16 {
                break;
            }
        }
        (best, best_res)
    }
}

/// Euclidean projection onto `{l >= 0, sum l = t}`.
pub fn simplex_projection(v: &[f64], t: f64) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cum += uj;
        let cand = (cum - t) / (j + 1) as f64;
        if uj - cand > 0.0 {
            tau = cand;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}
