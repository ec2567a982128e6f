use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::Result;
use crate::panel::{Panel, Zone};
use crate::stats::z_critical;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProportionCi {
    /// `p +/- z sqrt(p(1-p)/n)`, clipped to [0, 1].
    #[default]
    Normal,
    /// Exact binomial interval.
    ClopperPearson,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareRow {
    pub outcome: String,
    pub zone: Zone,
    pub period: String,
    pub n: usize,
    pub share: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupShares {
    pub rows: Vec<ShareRow>,
    /// Empty zone-period cells that were left out.
    pub notes: Vec<String>,
}

/// 95% interval for `x` successes out of `n` (`n > 0`).
pub fn proportion_ci(x: usize, n: usize, method: ProportionCi) -> (f64, f64) {
    let p = x as f64 / n as f64;
    match method {
        ProportionCi::Normal => {
            let half = z_critical(0.95) * (p * (1.0 - p) / n as f64).sqrt();
            ((p - half).max(0.0), (p + half).min(1.0))
        }
        ProportionCi::ClopperPearson => {
            let (xf, nf) = (x as f64, n as f64);
            let lo = if x == 0 { 0.0 } else { Beta::new(xf, nf - xf + 1.0).unwrap().inverse_cdf(0.025) };
            let hi = if x == n { 1.0 } else { Beta::new(xf + 1.0, nf - xf).unwrap().inverse_cdf(0.975) };
            (lo, hi)
        }
    }
}

/// Mean share of the (binary) response in every zone-by-period cell.
pub fn group_shares(panel: &Panel, outcome: &str, method: ProportionCi) -> Result<GroupShares> {
    let y = panel.response(outcome)?;
    let n_periods = panel.scheme().n_periods();
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for zone in [Zone::Red, Zone::Orange, Zone::Other] {
        if !(0..panel.len()).any(|i| panel.zone(i) == zone) {
            continue;
        }
        for t in 0..n_periods as u32 {
            let label = panel.scheme().label(t).unwrap_or_default().to_string();
            let cell: Vec<f64> =
                (0..panel.len()).filter(|&i| panel.zone(i) == zone && panel.period(i) == t).map(|i| y[i]).collect();
            if cell.is_empty() {
                notes.push(format!("{zone}/{label}: no tweets"));
                continue;
            }
            let x = cell.iter().filter(|v| **v > 0.5).count();
            let (lo, hi) = proportion_ci(x, cell.len(), method);
            rows.push(ShareRow {
                outcome: outcome.to_string(),
                zone,
                period: label,
                n: cell.len(),
                share: x as f64 / cell.len() as f64,
                lo,
                hi,
            });
        }
    }
    Ok(GroupShares { rows, notes })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::testutil::{panel_from_rows, Row};

    #[test]
    fn normal_examples() {
        assert_eq!(proportion_ci(7, 7, ProportionCi::Normal), (1.0, 1.0));
        let (lo, hi) = proportion_ci(50, 100, ProportionCi::Normal);
        assert_abs_diff_eq!(lo, 0.402, epsilon = 5e-4);
        assert_abs_diff_eq!(hi, 0.598, epsilon = 5e-4);
    }

    #[test]
    fn exact_interval() {
        // scipy.stats.beta.ppf(0.025, 3, 8), beta.ppf(0.975, 4, 7)
        let (lo, hi) = proportion_ci(3, 10, ProportionCi::ClopperPearson);
        assert_abs_diff_eq!(lo, 0.06673951117773447, epsilon = 1e-9);
        assert_abs_diff_eq!(hi, 0.6524528500599972, epsilon = 1e-9);
        assert_eq!(proportion_ci(0, 5, ProportionCi::ClopperPearson).0, 0.0);
        assert_eq!(proportion_ci(5, 5, ProportionCi::ClopperPearson).1, 1.0);
    }

    #[test]
    fn cells_and_empty_notes() {
        let mut rows = Vec::new();
        for zone in [Zone::Red, Zone::Orange] {
            for t in 0..2 {
                for k in 0..4u8 {
                    rows.push(Row { user: "u", muni: "m", zone, period: t, y: u8::from(k < 2) });
                }
            }
        }
        let p = panel_from_rows(&rows);
        let s = group_shares(&p, "y", ProportionCi::Normal).unwrap();
        assert_eq!(s.rows.len(), 4);
        assert_eq!(s.notes.len(), 2);
        assert!(s.rows.iter().all(|r| r.share == 0.5 && r.n == 4));
        assert_eq!((s.rows[0].lo, s.rows[0].hi), (s.rows[2].lo, s.rows[2].hi));
    }
}
