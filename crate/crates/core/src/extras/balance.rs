use std::collections::BTreeMap;
use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::{mean, sample_variance, t_two_sided_p};

/// |SMD| above which a covariate is flagged as imbalanced.
pub const SMD_THRESHOLD: f64 = 0.1;

/// Municipality-by-covariate table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CovariateTable {
    pub covariates: Vec<String>,
    /// Municipality name to one value per covariate.
    pub rows: BTreeMap<String, Vec<f64>>,
}

/// Reads `municipality,<covariate>...` records.
pub fn load_covariates<R: Read>(source: R) -> Result<CovariateTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = rdr.headers()?.clone();
    if headers.get(0) != Some("municipality") {
        return Err(Error::Parse { row: 1, message: "first column must be municipality".into() });
    }
    let covariates: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut rows = BTreeMap::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec?;
        let name = rec.get(0).unwrap_or_default().to_string();
        let vals = rec
            .iter()
            .skip(1)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Parse { row, message: format!("non-numeric covariate value {v:?}") })
            })
            .collect::<Result<Vec<_>>>()?;
        if rows.insert(name.clone(), vals).is_some() {
            return Err(Error::Parse { row, message: format!("duplicate municipality {name:?}") });
        }
    }
    Ok(CovariateTable { covariates, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceRow {
    pub covariate: String,
    pub mean_t: f64,
    pub mean_c: f64,
    pub smd: f64,
    /// Pooled-variance two-sample t test.
    pub p: f64,
    pub imbalanced: bool,
    /// Pooled SD was zero; SMD reported as 0.
    pub degenerate: bool,
}

/// Compares one covariate between treated and control values.
pub fn balance_row(covariate: &str, t: &[f64], c: &[f64]) -> Result<BalanceRow> {
    if t.len() < 2 || c.len() < 2 {
        return Err(Error::Argument(format!("balance on {covariate:?} needs at least 2 units per group")));
    }
    let (nt, nc) = (t.len() as f64, c.len() as f64);
    let (mt, mc) = (mean(t), mean(c));
    let pooled = (((nt - 1.0) * sample_variance(t) + (nc - 1.0) * sample_variance(c)) / (nt + nc - 2.0)).sqrt();
    let diff = mt - mc;
    let degenerate = pooled <= f64::EPSILON * mt.abs().max(mc.abs()).max(1.0);
    let (smd, p) = if degenerate {
        (0.0, if diff == 0.0 { 1.0 } else { 0.0 })
    } else {
        let se = pooled * (1.0 / nt + 1.0 / nc).sqrt();
        (diff / pooled, t_two_sided_p(diff / se, nt + nc - 2.0))
    };
    Ok(BalanceRow {
        covariate: covariate.to_string(),
        mean_t: mt,
        mean_c: mc,
        smd,
        p,
        imbalanced: !degenerate && smd.abs() > SMD_THRESHOLD,
        degenerate,
    })
}

/// Balance of every covariate between `treated` and `control`
/// municipalities (names missing from the table are an error).
pub fn balance_check(table: &CovariateTable, treated: &[String], control: &[String]) -> Result<Vec<BalanceRow>> {
    let pick = |names: &[String], j: usize| -> Result<Vec<f64>> {
        names
            .iter()
            .map(|n| {
                table
                    .rows
                    .get(n)
                    .map(|r| r[j])
                    .ok_or_else(|| Error::Validation(format!("municipality {n:?} has no covariates")))
            })
            .collect()
    };
    table
        .covariates
        .iter()
        .enumerate()
        .map(|(j, name)| balance_row(name, &pick(treated, j)?, &pick(control, j)?))
        .collect()
}
