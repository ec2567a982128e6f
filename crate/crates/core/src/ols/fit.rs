use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::design::Design;
use super::qr::{GreedyQr, COLLINEARITY_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VcovKind {
    Classical,
    /// HC1 heteroskedasticity-robust sandwich.
    White,
    /// Liang-Zeger cluster-robust sandwich.
    Cluster,
}

impl VcovKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VcovKind::Classical => "classical",
            VcovKind::White => "white",
            VcovKind::Cluster => "cluster",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vcov {
    pub matrix: DMatrix<f64>,
    pub kind: VcovKind,
    /// Number of clusters `G` for cluster-robust matrices.
    pub clusters: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub names: Vec<String>,
    pub coefficients: DVector<f64>,
    pub residuals: DVector<f64>,
    /// Retained design columns.
    pub x: DMatrix<f64>,
    /// `(X'X)^{-1}`.
    pub bread: DMatrix<f64>,
    pub n: usize,
    pub k: usize,
    /// Parameters swept out before fitting (within fixed effects).
    pub absorbed_dof: usize,
    pub dropped: Vec<String>,
    pub vcov: Vcov,
}

impl FitResult {
    /// Residual degrees of freedom `N - K - absorbed`.
    pub fn df_resid(&self) -> usize {
        self.n - self.k - self.absorbed_dof
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coef(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.coefficients[i])
    }

    pub fn se(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.vcov.matrix[(i, i)].max(0.0).sqrt())
    }

    pub fn fitted(&self) -> DVector<f64> {
        &self.x * &self.coefficients
    }

    pub fn with_vcov(mut self, vcov: Vcov) -> Self {
        self.vcov = vcov;
        self
    }
}

/// Least squares through a Householder QR; never forms the normal
/// equations. The returned fit carries the classical covariance
/// `sigma^2 (X'X)^{-1}`.
pub fn fit_ols(x: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<FitResult> {
    fit_with_absorbed(x, y, names, 0)
}

pub(crate) fn fit_with_absorbed(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    names: &[String],
    absorbed_dof: usize,
) -> Result<FitResult> {
    let (n, k) = x.shape();
    if y.len() != n || names.len() != k {
        return Err(Error::Argument(format!("X is {n}x{k} but y has {} rows and {} names", y.len(), names.len())));
    }
    if k == 0 {
        return Err(Error::Specification("no regressors".into()));
    }
    if n < k + absorbed_dof {
        return Err(Error::Specification(format!("{n} observations for {} parameters", k + absorbed_dof)));
    }
    let qr = GreedyQr::factor(x, COLLINEARITY_TOL);
    if !qr.dropped.is_empty() {
        return Err(Error::RankDeficient { columns: qr.dropped.iter().map(|&j| names[j].clone()).collect() });
    }
    if n == k + absorbed_dof {
        return Err(Error::Specification("no residual degrees of freedom".into()));
    }
    let coefficients = qr.solve(y);
    let residuals = y - x * &coefficients;
    let bread = qr.xtx_inverse();
    let df = (n - k - absorbed_dof) as f64;
    let sigma2 = residuals.norm_squared() / df;
    let vcov = Vcov { matrix: &bread * sigma2, kind: VcovKind::Classical, clusters: None };
    Ok(FitResult {
        names: names.to_vec(),
        coefficients,
        residuals,
        x: x.clone(),
        bread,
        n,
        k,
        absorbed_dof,
        dropped: Vec::new(),
        vcov,
    })
}

/// Fits a [`Design`], keeping its collinearity report.
pub fn fit_design(design: &Design) -> Result<FitResult> {
    let mut fit = fit_with_absorbed(&design.x, &design.y, &design.names, design.absorbed_dof)?;
    fit.dropped = design.dropped.clone();
    Ok(fit)
}

fn sandwich(bread: &DMatrix<f64>, meat: &DMatrix<f64>, scale: f64) -> DMatrix<f64> {
    let v = bread * meat * bread * scale;
    (&v + v.transpose()) * 0.5
}

/// `sum_i e_i^2 x_i x_i'`.
pub fn white_meat(x: &DMatrix<f64>, e: &DVector<f64>) -> DMatrix<f64> {
    let k = x.ncols();
    let mut meat = DMatrix::zeros(k, k);
    for i in 0..x.nrows() {
        let e2 = e[i] * e[i];
        for a in 0..k {
            let xa = x[(i, a)] * e2;
            if xa == 0.0 {
                continue;
            }
            for b in 0..k {
                meat[(a, b)] += xa * x[(i, b)];
            }
        }
    }
    meat
}

/// `sum_g (X_g' e_g)(X_g' e_g)'`, plus the number of clusters.
pub fn cluster_meat(x: &DMatrix<f64>, e: &DVector<f64>, clusters: &[u32]) -> (DMatrix<f64>, usize) {
    let k = x.ncols();
    let mut scores: BTreeMap<u32, DVector<f64>> = BTreeMap::new();
    for (i, &g) in clusters.iter().enumerate() {
        let s = scores.entry(g).or_insert_with(|| DVector::zeros(k));
        for a in 0..k {
            s[a] += x[(i, a)] * e[i];
        }
    }
    let mut meat = DMatrix::zeros(k, k);
    for s in scores.values() {
        meat += s * s.transpose();
    }
    (meat, scores.len())
}

/// HC1 sandwich, scaled by `N / (N - K)`.
pub fn vcov_white(fit: &FitResult) -> Vcov {
    let meat = white_meat(&fit.x, &fit.residuals);
    let scale = fit.n as f64 / fit.df_resid() as f64;
    Vcov { matrix: sandwich(&fit.bread, &meat, scale), kind: VcovKind::White, clusters: None }
}

/// Cluster-robust sandwich with `c = G/(G-1) * (N-1)/(N-K)`.
pub fn vcov_cluster(fit: &FitResult, clusters: &[u32]) -> Result<Vcov> {
    if clusters.len() != fit.n {
        return Err(Error::Argument(format!("{} cluster ids for {} rows", clusters.len(), fit.n)));
    }
    let (meat, g) = cluster_meat(&fit.x, &fit.residuals, clusters);
    if g < 2 {
        return Err(Error::Argument(
            "cluster-robust covariance needs at least two clusters; use White standard errors".into(),
        ));
    }
    let gf = g as f64;
    let scale = gf / (gf - 1.0) * (fit.n as f64 - 1.0) / fit.df_resid() as f64;
    Ok(Vcov { matrix: sandwich(&fit.bread, &meat, scale), kind: VcovKind::Cluster, clusters: Some(g) })
}

/// `sigma^2 (X'X)^{-1}` with `sigma^2 = e'e / (N - K - absorbed)`.
pub fn vcov_classical(fit: &FitResult) -> Vcov {
    let sigma2 = fit.residuals.norm_squared() / fit.df_resid() as f64;
    Vcov { matrix: &fit.bread * sigma2, kind: VcovKind::Classical, clusters: None }
}
