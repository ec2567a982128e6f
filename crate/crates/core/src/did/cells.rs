use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::{Cohort, Panel};

/// Unit over which group-period means are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanMode {
    /// Every tweet counts once.
    #[default]
    Tweet,
    /// Tweets are first averaged per user (and municipality) within the cell.
    User,
}

/// Units falling in one group-period cell with their municipality.
#[derive(Debug, Clone, Default)]
pub(crate) struct Cell {
    pub values: Vec<f64>,
    pub clusters: Vec<u32>,
}

impl Cell {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

fn collect_cell(panel: &Panel, y: &[f64], mode: MeanMode, keep: impl Fn(usize) -> bool) -> Cell {
    let rows = (0..panel.len()).filter(|&i| keep(i));
    match mode {
        MeanMode::Tweet => {
            let mut cell = Cell::default();
            for i in rows {
                cell.values.push(y[i]);
                cell.clusters.push(panel.municipality(i));
            }
            cell
        }
        MeanMode::User => {
            let mut acc: BTreeMap<(u32, u32), (f64, usize)> = BTreeMap::new();
            for i in rows {
                let e = acc.entry((panel.municipality(i), panel.user(i))).or_default();
                e.0 += y[i];
                e.1 += 1;
            }
            let mut cell = Cell::default();
            for ((m, _), (s, c)) in acc {
                cell.values.push(s / c as f64);
                cell.clusters.push(m);
            }
            cell
        }
    }
}

/// The four cells behind `ATT(g,t)`: cohort `g` and the units not yet
/// treated at `t`, each observed at `t` and at `g - 1`.
#[derive(Debug, Clone)]
pub(crate) struct GtCells {
    pub treated_post: Cell,
    pub treated_pre: Cell,
    pub control_post: Cell,
    pub control_pre: Cell,
}

impl GtCells {
    pub fn gather(panel: &Panel, y: &[f64], mode: MeanMode, g: u32, t: u32) -> Result<Self> {
        if y.len() != panel.len() {
            return Err(Error::Argument(format!("response has {} values for {} rows", y.len(), panel.len())));
        }
        if g == 0 {
            return Err(Error::NotIdentified(format!("ATT({g},{t}): cohort {g} has no pre-treatment period")));
        }
        if t < g {
            return Err(Error::NotIdentified(format!("ATT({g},{t}): period precedes treatment onset")));
        }
        if t as usize >= panel.scheme().n_periods() {
            return Err(Error::NotIdentified(format!("ATT({g},{t}): period {t} outside the scheme")));
        }
        let cohorts = panel.cohorts();
        if !cohorts.iter().any(|c| !c.treated_at(t)) {
            return Err(Error::NotIdentified(format!(
                "ATT({g},{t}): every unit is treated by period {t}, no counterfactual remains"
            )));
        }
        let base = g - 1;
        let periods = panel.periods();
        let is_g = |i: usize| cohorts[i] == Cohort::FirstTreated(g);
        let is_c = |i: usize| !cohorts[i].treated_at(t);
        let cells = Self {
            treated_post: collect_cell(panel, y, mode, |i| is_g(i) && periods[i] == t),
            treated_pre: collect_cell(panel, y, mode, |i| is_g(i) && periods[i] == base),
            control_post: collect_cell(panel, y, mode, |i| is_c(i) && periods[i] == t),
            control_pre: collect_cell(panel, y, mode, |i| is_c(i) && periods[i] == base),
        };
        let label = |p: u32| panel.scheme().label(p).map(str::to_string).unwrap_or_else(|| p.to_string());
        for (cell, who, p) in [
            (&cells.treated_post, format!("cohort {g}"), t),
            (&cells.treated_pre, format!("cohort {g}"), base),
            (&cells.control_post, "not-yet-treated".to_string(), t),
            (&cells.control_pre, "not-yet-treated".to_string(), base),
        ] {
            if cell.len() == 0 {
                return Err(Error::EmptyCell { cell: format!("{who}, period={}", label(p)) });
            }
        }
        Ok(cells)
    }

    pub fn estimate(&self) -> f64 {
        (self.treated_post.mean() - self.treated_pre.mean()) - (self.control_post.mean() - self.control_pre.mean())
    }

    pub fn n_treated(&self) -> usize {
        self.treated_post.len() + self.treated_pre.len()
    }

    pub fn n_control(&self) -> usize {
        self.control_post.len() + self.control_pre.len()
    }

    fn cells(&self) -> [&Cell; 4] {
        [&self.treated_post, &self.treated_pre, &self.control_post, &self.control_pre]
    }

    /// Per-municipality `(sum, count)` for each cell, indexed by position in
    /// the returned cluster list.
    pub fn cluster_totals(&self) -> (Vec<u32>, Vec<[(f64, usize); 4]>) {
        let mut ids: Vec<u32> = self.cells().iter().flat_map(|c| c.clusters.iter().copied()).collect();
        ids.sort_unstable();
        ids.dedup();
        let mut totals = vec![[(0.0, 0usize); 4]; ids.len()];
        for (k, cell) in self.cells().iter().enumerate() {
            for (v, m) in cell.values.iter().zip(&cell.clusters) {
                let j = ids.binary_search(m).expect("cluster collected above");
                totals[j][k].0 += v;
                totals[j][k].1 += 1;
            }
        }
        (ids, totals)
    }
}
