use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
pub fn bh_adjust(p: &[f64]) -> Result<Vec<f64>> {
    if p.is_empty() {
        return Err(Error::Argument("empty p-value family".into()));
    }
    if let Some(bad) = p.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Domain(format!("p-value {bad} outside [0,1]")));
    }
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]));
    let mut adj = vec![0.0; m];
    let mut running = 1.0_f64;
    for rank in (0..m).rev() {
        let i = order[rank];
        running = running.min(m as f64 / (rank + 1) as f64 * p[i]);
        adj[i] = running;
    }
    Ok(adj)
}

/// Labelled p-values adjusted together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PValueFamily {
    pub labels: Vec<String>,
    pub p: Vec<f64>,
}

impl PValueFamily {
    pub fn new(labels: Vec<String>, p: Vec<f64>) -> Result<Self> {
        if labels.len() != p.len() {
            return Err(Error::Argument(format!("{} labels for {} p-values", labels.len(), p.len())));
        }
        Ok(Self { labels, p })
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn adjust(&self) -> Result<Vec<f64>> {
        bh_adjust(&self.p)
    }
}

/// How a coefficient-by-outcome table of p-values is split into families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyRule {
    /// One family per coefficient row and emotion (the part of the outcome
    /// name before `:`).
    #[default]
    Emotion,
    /// One family per coefficient row across all outcomes.
    Row,
    /// The whole table is one family.
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PCell {
    pub term: String,
    pub outcome: String,
    pub p: f64,
}

/// Adjusts every cell within its family; output is in input order.
pub fn adjust_table(cells: &[PCell], rule: FamilyRule) -> Result<Vec<f64>> {
    let key = |c: &PCell| -> (String, String) {
        match rule {
            FamilyRule::Emotion => {
                (c.term.clone(), c.outcome.split(':').next().unwrap_or_default().to_string())
            }
            FamilyRule::Row => (c.term.clone(), String::new()),
            FamilyRule::Table => (String::new(), String::new()),
        }
    };
    let mut families: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (i, c) in cells.iter().enumerate() {
        families.entry(key(c)).or_default().push(i);
    }
    let mut out = vec![0.0; cells.len()];
    for idx in families.values() {
        let p: Vec<f64> = idx.iter().map(|&i| cells[i].p).collect();
        for (&i, a) in idx.iter().zip(bh_adjust(&p)?) {
            out[i] = a;
        }
    }
    Ok(out)
}
