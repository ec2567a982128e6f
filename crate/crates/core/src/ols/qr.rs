//! Householder QR that visits columns in declaration order and skips any
//! column whose remaining norm is negligible, so dependent columns are
//! detected (and reported) in the order they were declared.

use nalgebra::{DMatrix, DVector};

/// Relative pivot threshold below which a column counts as dependent.
pub const COLLINEARITY_TOL: f64 = 1e-10;

struct Reflector {
    /// Householder vector for rows `start..n`.
    v: DVector<f64>,
    beta: f64,
    start: usize,
}

impl Reflector {
    fn apply(&self, col: &mut [f64]) {
        let tail = &mut col[self.start..];
        let dot: f64 = self.v.iter().zip(tail.iter()).map(|(a, b)| a * b).sum();
        let s = self.beta * dot;
        for (c, v) in tail.iter_mut().zip(self.v.iter()) {
            *c -= s * v;
        }
    }
}

pub(crate) struct GreedyQr {
    reflectors: Vec<Reflector>,
    /// Upper-triangular factor for the kept columns.
    r: DMatrix<f64>,
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
}

impl GreedyQr {
    /// Factors `x`. A column is dropped when its pivot is at most `tol` times
    /// the larger of the largest pivot so far and the largest column norm of
    /// `x`.
    pub fn factor(x: &DMatrix<f64>, tol: f64) -> Self {
        let (n, p) = x.shape();
        let scale = (0..p).map(|j| x.column(j).norm()).fold(0.0, f64::max);
        let mut reflectors: Vec<Reflector> = Vec::new();
        let mut r_cols: Vec<Vec<f64>> = Vec::new();
        let mut kept = Vec::new();
        let mut dropped = Vec::new();
        let mut largest_pivot = 0.0_f64;

        for j in 0..p {
            let mut col: Vec<f64> = x.column(j).iter().copied().collect();
            for h in &reflectors {
                h.apply(&mut col);
            }
            let r = reflectors.len();
            if r >= n {
                dropped.push(j);
                continue;
            }
            let norm = col[r..].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 || norm <= tol * largest_pivot.max(scale) {
                dropped.push(j);
                continue;
            }
            let alpha = if col[r] >= 0.0 { -norm } else { norm };
            let mut v = DVector::from_column_slice(&col[r..]);
            v[0] -= alpha;
            let vnorm2 = v.norm_squared();
            let beta = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };
            let h = Reflector { v, beta, start: r };
            h.apply(&mut col);
            col[r] = alpha;
            largest_pivot = largest_pivot.max(alpha.abs());
            r_cols.push(col[..=r].to_vec());
            reflectors.push(h);
            kept.push(j);
        }

        let k = kept.len();
        let mut rmat = DMatrix::zeros(k, k);
        for (j, c) in r_cols.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                rmat[(i, j)] = *v;
            }
        }
        Self { reflectors, r: rmat, kept, dropped }
    }

    pub fn rank(&self) -> usize {
        self.kept.len()
    }

    /// Least-squares coefficients for the kept columns.
    pub fn solve(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut qty: Vec<f64> = y.iter().copied().collect();
        for h in &self.reflectors {
            h.apply(&mut qty);
        }
        let k = self.rank();
        let mut beta = DVector::zeros(k);
        for i in (0..k).rev() {
            let s: f64 = ((i + 1)..k).map(|j| self.r[(i, j)] * beta[j]).sum();
            beta[i] = (qty[i] - s) / self.r[(i, i)];
        }
        beta
    }

    /// `(X'X)^{-1} = R^{-1} R^{-T}` over the kept columns.
    pub fn xtx_inverse(&self) -> DMatrix<f64> {
        let k = self.rank();
        let mut rinv = DMatrix::zeros(k, k);
        for c in 0..k {
            for i in (0..=c).rev() {
                let rhs = if i == c { 1.0 } else { 0.0 };
                let s: f64 = ((i + 1)..=c).map(|j| self.r[(i, j)] * rinv[(j, c)]).sum();
                rinv[(i, c)] = (rhs - s) / self.r[(i, i)];
            }
        }
        let m = &rinv * rinv.transpose();
        (&m + m.transpose()) * 0.5
    }
}
