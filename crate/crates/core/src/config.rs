//! Run configuration for the command-line pipeline.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::did::MeanMode;
use crate::error::{Error, Result};
use crate::extras::{FamilyRule, ProportionCi};
use crate::ols::{FeMode, RingBand};
use crate::panel::{PeriodScheme, TreatmentSchedule};
use crate::sensitivity::{ViolationMode, DEFAULT_GRID};
use crate::sim::{DgpConfig, Estimator};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Tweet-level records (raw input of `ingest`).
    pub panel: Option<PathBuf>,
    /// `tweet_id,emotion,label,confidence` records.
    pub labels: Option<PathBuf>,
    /// One term list per topic; the topic is the file stem.
    pub dictionaries: Vec<PathBuf>,
    /// `municipality,month,excess_mortality` records.
    pub mortality: Option<PathBuf>,
    /// `municipality,<covariate>...` records.
    pub covariates: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VcovChoice {
    #[default]
    Cluster,
    White,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterKey {
    #[default]
    Municipality,
    User,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOptions {
    pub fe: FeMode,
    pub vcov: VcovChoice,
    pub cluster: ClusterKey,
    pub mean_mode: MeanMode,
    pub bootstrap_draws: usize,
    /// Distance bands for the spillover regression (estimate writes it when
    /// non-empty and the panel has distances).
    pub rings: Vec<RingBand>,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            fe: FeMode::Within,
            vcov: VcovChoice::Cluster,
            cluster: ClusterKey::Municipality,
            mean_mode: MeanMode::Tweet,
            bootstrap_draws: 999,
            rings: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EventStudyOptions {
    pub scheme: PeriodScheme,
    pub schedule: TreatmentSchedule,
    pub baseline: String,
    pub leads: u32,
    pub lags: u32,
}

impl Default for EventStudyOptions {
    fn default() -> Self {
        Self {
            scheme: PeriodScheme::lockdown_event_study(),
            schedule: TreatmentSchedule::lockdown_event_study(),
            baseline: "baseline".into(),
            leads: 1,
            lags: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivityOptions {
    pub grid: Vec<f64>,
    pub mode: ViolationMode,
}

impl Default for SensitivityOptions {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID.to_vec(), mode: ViolationMode::Consecutive }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyOptions {
    pub mark_hashtags: bool,
    /// Tweets kept per emotion-topic pair in the entropy ranking.
    pub top_k: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { mark_hashtags: false, top_k: 50 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlaceboOptions {
    /// Municipalities per placebo group.
    pub k: usize,
}

impl Default for PlaceboOptions {
    fn default() -> Self {
        Self { k: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateOptions {
    /// The DGP seed is replaced by the run seed.
    pub dgp: DgpConfig,
    pub estimators: Vec<Estimator>,
    pub reps: usize,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self { dgp: DgpConfig::default(), estimators: vec![Estimator::Delta1 { fe: FeMode::None }], reps: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub paths: Paths,
    pub scheme: PeriodScheme,
    pub schedule: TreatmentSchedule,
    /// Outcome columns to analyse; empty means every outcome in the panel.
    pub outcomes: Vec<String>,
    /// Topic groupings besides the aggregate; empty means every topic.
    pub topics: Vec<String>,
    pub model: ModelOptions,
    pub event_study: EventStudyOptions,
    pub sensitivity: SensitivityOptions,
    pub bh_family: FamilyRule,
    pub share_ci: ProportionCi,
    pub classify: ClassifyOptions,
    pub placebo: PlaceboOptions,
    pub simulate: SimulateOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            threads: None,
            paths: Paths::default(),
            scheme: PeriodScheme::lockdown_default(),
            schedule: TreatmentSchedule::lockdown_default(),
            outcomes: Vec::new(),
            topics: Vec::new(),
            model: ModelOptions::default(),
            event_study: EventStudyOptions::default(),
            sensitivity: SensitivityOptions::default(),
            bh_family: FamilyRule::default(),
            share_ci: ProportionCi::default(),
            classify: ClassifyOptions::default(),
            placebo: PlaceboOptions::default(),
            simulate: SimulateOptions::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads `path`; relative input paths and `out` resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingInput { path: path.to_path_buf() });
        }
        let mut cfg = Self::from_toml(&fs::read_to_string(path)?)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base);
        Ok(cfg)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let paths = &mut self.paths;
        for p in [&mut paths.panel, &mut paths.labels, &mut paths.mortality, &mut paths.covariates]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        paths.dictionaries.iter_mut().for_each(fix);
        fix(&mut self.out);
    }

    /// SHA-256 of the effective configuration with the output directory and
    /// thread count left out, so relocating results does not change it.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.threads = None;
        let bytes = serde_json::to_vec(&c).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Fails with [`Error::MissingInput`] for the first configured path that does
/// not exist, or [`Error::Config`] when a required one is absent.
pub fn require<'a>(path: Option<&'a PathBuf>, what: &str) -> Result<&'a PathBuf> {
    let p = path.ok_or_else(|| Error::Config(format!("no {what} path configured")))?;
    if !p.exists() {
        return Err(Error::MissingInput { path: p.clone() });
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = RunConfig::from_toml(
            r#"
seed = 5
outcomes = ["uncertainty"]
bh_family = "row"
[paths]
panel = "tweets.csv"
dictionaries = ["dict/health.txt"]
[model]
fe = "none"
vcov = "white"
[simulate]
reps = 10
[[simulate.estimators]]
kind = "two-period-att"
"#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.model.fe, FeMode::None);
        assert_eq!(cfg.bh_family, FamilyRule::Row);
        assert_eq!(cfg.simulate.estimators, vec![Estimator::TwoPeriodAtt]);
        assert_eq!(cfg.sensitivity.grid, DEFAULT_GRID.to_vec());
        assert!(RunConfig::from_toml("unknown = 1").is_err());
    }

    #[test]
    fn hash_ignores_output_location() {
        let mut a = RunConfig::default();
        let h = a.hash();
        assert_eq!(h.len(), 16);
        a.out = PathBuf::from("/elsewhere");
        a.threads = Some(4);
        assert_eq!(a.hash(), h);
        a.seed = 1;
        assert_ne!(a.hash(), h);
    }

    #[test]
    fn load_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "[paths]\npanel = \"t.csv\"\n").unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.paths.panel.unwrap(), dir.path().join("t.csv"));
        assert_eq!(cfg.out, dir.path().join("out"));
        assert!(matches!(RunConfig::load(&dir.path().join("nope.toml")), Err(Error::MissingInput { .. })));
    }
}
