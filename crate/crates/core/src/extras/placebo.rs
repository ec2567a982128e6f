use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::Serialize;

use crate::error::{Error, Result};

/// Monthly excess mortality for one municipality, months ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MortalityProfile {
    pub municipality: String,
    pub values: Vec<f64>,
}

const MONTHS: [&str; 12] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september", "october", "november",
    "december",
];

/// Month key from `3`, `mar`, `March` or `2020-03`; years order before
/// months.
fn parse_month(s: &str) -> Option<(i32, u32)> {
    let s = s.trim().to_lowercase();
    if let Ok(m) = s.parse::<u32>() {
        return (1..=12).contains(&m).then_some((0, m));
    }
    if let Some((y, m)) = s.split_once('-') {
        let (y, m) = (y.parse::<i32>().ok()?, m.parse::<u32>().ok()?);
        return (1..=12).contains(&m).then_some((y, m));
    }
    MONTHS
        .iter()
        .position(|name| s.len() >= 3 && name.starts_with(&s))
        .map(|i| (0, i as u32 + 1))
}

/// Reads `municipality,month,excess_mortality` records into profiles; every
/// municipality must report the same months.
pub fn load_mortality<R: Read>(source: R) -> Result<Vec<MortalityProfile>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Parse { row: 1, message: format!("missing column {name:?}") })
    };
    let (cm, cmo, cv) = (col("municipality")?, col("month")?, col("excess_mortality")?);
    let mut data: BTreeMap<String, BTreeMap<(i32, u32), f64>> = BTreeMap::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec?;
        let month = parse_month(&rec[cmo])
            .ok_or_else(|| Error::Parse { row, message: format!("unrecognised month {:?}", &rec[cmo]) })?;
        let v: f64 = rec[cv]
            .parse()
            .ok()
            .filter(|x: &f64| x.is_finite())
            .ok_or_else(|| Error::Parse { row, message: format!("non-numeric excess mortality {:?}", &rec[cv]) })?;
        if data.entry(rec[cm].to_string()).or_default().insert(month, v).is_some() {
            return Err(Error::Parse { row, message: format!("duplicate month for {:?}", &rec[cm]) });
        }
    }
    let months: Option<BTreeSet<(i32, u32)>> = data.values().next().map(|m| m.keys().copied().collect());
    let mut out = Vec::with_capacity(data.len());
    for (municipality, series) in data {
        if Some(series.keys().copied().collect::<BTreeSet<_>>()) != months {
            return Err(Error::Validation(format!("{municipality:?} reports a different set of months")));
        }
        out.push(MortalityProfile { municipality, values: series.into_values().collect() });
    }
    Ok(out)
}

/// Component-wise mean profile of the named municipalities.
pub fn reference_profile(profiles: &[MortalityProfile], names: &[String]) -> Result<Vec<f64>> {
    let chosen: Vec<&MortalityProfile> = profiles.iter().filter(|p| names.contains(&p.municipality)).collect();
    let Some(first) = chosen.first() else {
        return Err(Error::Validation("no mortality profile for the reference group".into()));
    };
    let mut acc = vec![0.0; first.values.len()];
    for p in &chosen {
        for (a, v) in acc.iter_mut().zip(&p.values) {
            *a += v;
        }
    }
    Ok(acc.into_iter().map(|a| a / chosen.len() as f64).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaceboGroups {
    /// The `k` profiles closest to the reference, nearest first.
    pub treated: Vec<String>,
    /// The `k` most distant profiles, farthest first.
    pub control: Vec<String>,
    /// Every municipality with its distance, ascending.
    pub distances: Vec<(String, f64)>,
}

/// Splits municipalities by Euclidean distance to `reference`; ties go to
/// the alphabetically first name.
pub fn placebo_groups(profiles: &[MortalityProfile], reference: &[f64], k: usize) -> Result<PlaceboGroups> {
    if k == 0 || 2 * k > profiles.len() {
        return Err(Error::Argument(format!("cannot draw two groups of {k} from {} profiles", profiles.len())));
    }
    let mut distances = profiles
        .iter()
        .map(|p| {
            if p.values.len() != reference.len() {
                return Err(Error::Argument(format!(
                    "{:?} has {} months, reference has {}",
                    p.municipality,
                    p.values.len(),
                    reference.len()
                )));
            }
            let d = p.values.iter().zip(reference).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            Ok((p.municipality.clone(), d))
        })
        .collect::<Result<Vec<_>>>()?;
    distances.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    let treated = distances[..k].iter().map(|(n, _)| n.clone()).collect();
    let control = distances[distances.len() - k..].iter().rev().map(|(n, _)| n.clone()).collect();
    Ok(PlaceboGroups { treated, control, distances })
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn prof(name: &str, v: &[f64]) -> MortalityProfile {
        MortalityProfile { municipality: name.into(), values: v.to_vec() }
    }

    #[test]
    fn extremes() {
        let ps: Vec<_> = (0..4).map(|d| prof(&format!("m{d}"), &[d as f64])).collect();
        let g = placebo_groups(&ps, &[0.0], 1).unwrap();
        assert_eq!((g.treated, g.control), (vec!["m0".to_string()], vec!["m3".to_string()]));
    }

    #[test]
    fn hand_distances() {
        let ps = vec![prof("a", &[1.0, 1.0]), prof("b", &[4.0, 5.0]), prof("c", &[1.0, 2.0]), prof("d", &[7.0, 1.0])];
        let g = placebo_groups(&ps, &[1.0, 1.0], 2).unwrap();
        let d: Vec<f64> = g.distances.iter().map(|x| x.1).collect();
        assert_eq!(d, vec![0.0, 1.0, 5.0, 6.0]);
        assert_eq!(g.treated, vec!["a", "c"]);
        assert_eq!(g.control, vec!["d", "b"]);
        assert!(placebo_groups(&ps, &[1.0, 1.0], 3).is_err());
        assert!(placebo_groups(&ps, &[1.0], 1).is_err());
    }

    #[test]
    fn ties_break_by_name() {
        let ps = vec![prof("z", &[1.0]), prof("y", &[-1.0]), prof("x", &[1.0]), prof("w", &[-1.0])];
        let g = placebo_groups(&ps, &[0.0], 1).unwrap();
        assert_eq!((g.treated[0].as_str(), g.control[0].as_str()), ("w", "z"));
    }

    #[test]
    fn loads_mixed_month_formats() {
        let csv = "municipality,month,excess_mortality\na,January,0.5\na,2,1.5\nb,jan,2\nb,feb,-1\n";
        let ps = load_mortality(csv.as_bytes()).unwrap();
        assert_eq!(ps, vec![prof("a", &[0.5, 1.5]), prof("b", &[2.0, -1.0])]);
        let r = reference_profile(&ps, &["a".into(), "b".into()]).unwrap();
        assert_eq!(r, vec![1.25, 0.25]);
        let csv = "municipality,month,excess_mortality\na,2020-01,1\na,2020-02,2\n";
        assert_eq!(load_mortality(csv.as_bytes()).unwrap()[0].values, vec![1.0, 2.0]);
        let bad = "municipality,month,excess_mortality\na,smarch,1\n";
        assert!(matches!(load_mortality(bad.as_bytes()), Err(Error::Parse { row: 2, .. })));
        let ragged = "municipality,month,excess_mortality\na,1,1\na,2,1\nb,1,1\n";
        assert!(load_mortality(ragged.as_bytes()).is_err());
    }

    proptest! {
        #[test]
        fn order_invariant_and_disjoint(vals in prop::collection::vec(-5.0..5.0f64, 4..20), rot in 0usize..20) {
            let ps: Vec<_> = vals.iter().enumerate().map(|(i, v)| prof(&format!("m{i:02}"), &[*v])).collect();
            let k = ps.len() / 2;
            let g = placebo_groups(&ps, &[0.3], k).unwrap();
            let mut shuffled = ps.clone();
            shuffled.rotate_left(rot % ps.len());
            shuffled.reverse();
            prop_assert_eq!(&g, &placebo_groups(&shuffled, &[0.3], k).unwrap());
            prop_assert!(g.treated.iter().all(|t| !g.control.contains(t)));
        }
    }
}
