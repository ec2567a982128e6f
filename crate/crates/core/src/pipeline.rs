//! Subcommands of the command-line tool. Each `cmd_*` computes its outputs
//! in memory; [`run`] writes them only when every one succeeded.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{require, ClusterKey, RunConfig, VcovChoice};
use crate::did::{
    att_gt_y, att_two_period_y, did_regression_y, event_study_y, spillover_rings_y, AttEstimate, BootstrapOptions, Estimand,
    EventStudyResult, EventStudySpec,
};
use crate::error::{Error, Result};
use crate::extras::{
    adjust_table, balance_check, group_shares, load_covariates, load_mortality, placebo_groups, reference_profile,
    PCell,
};
use crate::ols::{inference_table, vcov_classical, vcov_cluster, vcov_white, CoefRow, FitResult};
use crate::output::{strip_header, write_outputs, Metadata, OutputFile};
use crate::panel::{load_panel, write_panel, Panel, Zone};
use crate::sensitivity::scan;
use crate::sim::{generate_panel, monte_carlo, RNG_ALGORITHM};
use crate::text::{load_labels, rank_by_entropy, tag_topics, EmotionClassifier, Normalizer, TopicDictionary};

pub const PANEL_FILE: &str = "panel.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Ingest,
    Classify,
    Estimate,
    EventStudy,
    Sensitivity,
    Placebo,
    Simulate,
    Balance,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Classify => "classify",
            Command::Estimate => "estimate",
            Command::EventStudy => "event-study",
            Command::Sensitivity => "sensitivity",
            Command::Placebo => "placebo",
            Command::Simulate => "simulate",
            Command::Balance => "balance",
        }
    }
}

/// Runs `cmd` and writes its files under `cfg.out`.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let files = match cmd {
        Command::Ingest => cmd_ingest(cfg)?,
        Command::Classify => cmd_classify(cfg)?,
        Command::Estimate => cmd_estimate(cfg)?,
        Command::EventStudy => cmd_event_study(cfg)?,
        Command::Sensitivity => cmd_sensitivity(cfg)?,
        Command::Placebo => cmd_placebo(cfg)?,
        Command::Simulate => cmd_simulate(cfg)?,
        Command::Balance => cmd_balance(cfg)?,
    };
    let meta = Metadata::new(cfg.seed, cfg.hash()).with("command", cmd.name());
    write_outputs(&cfg.out, &meta, &files)
}

fn read_panel(path: &Path, cfg: &RunConfig) -> Result<(Panel, crate::panel::LoadReport)> {
    let text = fs::read_to_string(path)?;
    load_panel(strip_header(&text).as_bytes(), &cfg.scheme, &cfg.schedule)
}

/// The panel artifact in the output directory when present, otherwise the
/// configured input.
pub fn working_panel(cfg: &RunConfig) -> Result<Panel> {
    let artifact = cfg.out.join(PANEL_FILE);
    let path = if artifact.exists() { artifact } else { require(cfg.paths.panel.as_ref(), "panel")?.clone() };
    Ok(read_panel(&path, cfg)?.0)
}

fn panel_file(panel: &Panel) -> Result<OutputFile> {
    let mut body = Vec::new();
    write_panel(panel, &mut body)?;
    Ok(OutputFile::new(PANEL_FILE, body))
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    let path = require(cfg.paths.panel.as_ref(), "panel")?;
    let (panel, report) = read_panel(path, cfg)?;
    Ok(vec![panel_file(&panel)?, OutputFile::json("ingest_report.json", &report)?])
}

#[derive(Serialize)]
struct RankedRow<'a> {
    emotion: &'a str,
    topic: &'a str,
    rank: usize,
    tweet_id: &'a str,
    confidence: f64,
    entropy: f64,
}

pub fn cmd_classify(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    let mut dicts = Vec::new();
    for p in &cfg.paths.dictionaries {
        require(Some(p), "dictionary")?;
    }
    let label_path = cfg.paths.labels.as_ref().map(|p| require(Some(p), "labels")).transpose()?;
    let mut panel = working_panel(cfg)?;
    if !panel.has_text() {
        return Err(Error::Config("classify needs a text column in the panel".into()));
    }
    if cfg.paths.dictionaries.is_empty() {
        return Err(Error::Config("no dictionaries configured".into()));
    }
    for p in &cfg.paths.dictionaries {
        let topic = p.file_stem().and_then(|s| s.to_str()).unwrap_or("topic").to_string();
        dicts.push(TopicDictionary::from_reader(topic, fs::File::open(p)?)?);
    }
    let normalizer = Normalizer { mark_hashtags: cfg.classify.mark_hashtags };
    let tags: Vec<BTreeMap<String, u8>> =
        (0..panel.len()).map(|i| tag_topics(&normalizer.normalize(panel.text(i).unwrap_or("")), &dicts)).collect();
    let mut flags_csv = csv::Writer::from_writer(Vec::new());
    let topics: Vec<String> = dicts.iter().map(|d| d.topic().to_string()).collect();
    flags_csv.write_record(std::iter::once("tweet_id".to_string()).chain(topics.iter().map(|t| format!("topic_{t}"))))?;
    for (i, t) in tags.iter().enumerate() {
        flags_csv.write_record(std::iter::once(panel.tweet_id(i).to_string()).chain(t.values().map(u8::to_string)))?;
    }
    for topic in &topics {
        panel = panel.with_topic(topic, tags.iter().map(|t| t[topic]).collect())?;
    }
    let mut files = Vec::new();
    if let Some(path) = label_path {
        let labels = load_labels(fs::File::open(path)?)?;
        let mut classified = Vec::new();
        for emotion in labels.emotions() {
            let mut col = Vec::with_capacity(panel.len());
            for i in 0..panel.len() {
                let c = labels.classify(panel.tweet_id(i), panel.text(i), &emotion).ok_or_else(|| {
                    Error::Validation(format!("tweet {} has no {emotion} label", panel.tweet_id(i)))
                })?;
                col.push(c.label);
                classified.push(c);
            }
            panel = panel.with_outcome(&emotion, col)?;
        }
        let mut topics_of: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (i, t) in tags.iter().enumerate() {
            let mut list = vec!["all".to_string()];
            list.extend(t.iter().filter(|(_, v)| **v == 1).map(|(k, _)| k.clone()));
            topics_of.insert(panel.tweet_id(i).to_string(), list);
        }
        let ranked = rank_by_entropy(&classified, &topics_of, cfg.classify.top_k)?;
        let rows: Vec<RankedRow> = ranked
            .iter()
            .flat_map(|((emotion, topic), list)| {
                list.iter().enumerate().map(move |(r, t)| RankedRow {
                    emotion,
                    topic,
                    rank: r + 1,
                    tweet_id: &t.tweet_id,
                    confidence: t.confidence,
                    entropy: t.entropy,
                })
            })
            .collect();
        files.push(OutputFile::csv("top_tweets.csv", &rows)?);
    }
    let flags = flags_csv.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    files.insert(0, OutputFile::new("topic_flags.csv", flags));
    files.insert(0, panel_file(&panel)?);
    Ok(files)
}

/// `(outcome, grouping, response expression)` for every analysed column.
fn columns(panel: &Panel, cfg: &RunConfig) -> Result<Vec<(String, String, String)>> {
    let outcomes: Vec<String> =
        if cfg.outcomes.is_empty() { panel.outcome_names().map(str::to_string).collect() } else { cfg.outcomes.clone() };
    if outcomes.is_empty() {
        return Err(Error::Config("the panel has no outcome columns".into()));
    }
    let topics: Vec<String> =
        if cfg.topics.is_empty() { panel.topic_names().map(str::to_string).collect() } else { cfg.topics.clone() };
    let mut out = Vec::new();
    for o in &outcomes {
        out.push((o.clone(), "all".to_string(), o.clone()));
        for t in &topics {
            out.push((o.clone(), t.clone(), format!("{o}:{t}")));
        }
    }
    for (_, _, expr) in &out {
        panel.response(expr)?;
    }
    Ok(out)
}

fn apply_vcov(fit: FitResult, panel: &Panel, cfg: &RunConfig) -> Result<FitResult> {
    let v = match (cfg.model.vcov, cfg.model.cluster) {
        (VcovChoice::Cluster, ClusterKey::Municipality) => return Ok(fit),
        (VcovChoice::Cluster, ClusterKey::User) => vcov_cluster(&fit, panel.users())?,
        (VcovChoice::White, _) => vcov_white(&fit),
        (VcovChoice::Classical, _) => vcov_classical(&fit),
    };
    Ok(fit.with_vcov(v))
}

#[derive(Serialize)]
struct CoefLine<'a> {
    outcome: &'a str,
    grouping: &'a str,
    term: &'a str,
    estimate: f64,
    se: f64,
    t: f64,
    p: f64,
    ci_lo: f64,
    ci_hi: f64,
    df: usize,
    vcov: &'static str,
    descriptive: bool,
}

#[derive(Serialize)]
struct EstimateLine<'a> {
    outcome: &'a str,
    grouping: &'a str,
    estimand: String,
    label: &'a str,
    estimate: f64,
    se: f64,
    ci_lo: f64,
    ci_hi: f64,
    p: f64,
    n_treated: usize,
    n_control: usize,
    descriptive: bool,
    note: &'a str,
}

impl<'a> EstimateLine<'a> {
    fn new(outcome: &'a str, grouping: &'a str, e: &'a AttEstimate) -> Self {
        Self {
            outcome,
            grouping,
            estimand: estimand_key(&e.estimand),
            label: &e.label,
            estimate: e.estimate,
            se: e.se,
            ci_lo: e.ci_lo,
            ci_hi: e.ci_hi,
            p: e.p,
            n_treated: e.n_treated,
            n_control: e.n_control,
            descriptive: e.descriptive,
            note: e.note.as_deref().unwrap_or(""),
        }
    }
}

fn estimand_key(e: &Estimand) -> String {
    match e {
        Estimand::Att1 => "att1".into(),
        Estimand::AttGt { g, t } => format!("att_gt({g},{t})"),
        Estimand::Delta { t } => format!("delta{t}"),
        Estimand::Lambda { t } => format!("lambda{t}"),
        Estimand::Constant => "constant".into(),
        Estimand::Eta { ring } => format!("eta{ring}"),
    }
}

#[derive(Serialize)]
struct BhLine<'a> {
    outcome: &'a str,
    grouping: &'a str,
    term: &'a str,
    p: f64,
    p_adjusted: f64,
    family: crate::extras::FamilyRule,
}

fn is_interaction(term: &str) -> bool {
    term.starts_with("treated x ")
}

pub fn cmd_estimate(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    let panel = working_panel(cfg)?;
    let cols = columns(&panel, cfg)?;
    let mut tables: Vec<(usize, Vec<CoefRow>, &'static str)> = Vec::new();
    let mut atts = Vec::new();
    let mut spill = Vec::new();
    let mut shares = Vec::new();
    let boot = BootstrapOptions { draws: cfg.model.bootstrap_draws, seed: cfg.seed, level: 0.95 };
    for (c, (outcome, grouping, expr)) in cols.iter().enumerate() {
        let y = panel.response(expr)?;
        let reg = did_regression_y(&panel, y.clone(), cfg.model.fe)?;
        let fit = apply_vcov(reg.fit, &panel, cfg)?;
        tables.push((c, inference_table(&fit), fit.vcov.kind.as_str()));

        atts.push((c, att_two_period_y(&panel, &y, cfg.model.mean_mode)?));
        let cohorts: BTreeSet<u32> = panel.cohorts().iter().filter_map(|g| g.period()).collect();
        for &g in &cohorts {
            for t in g..panel.scheme().n_periods() as u32 {
                match att_gt_y(&panel, &y, cfg.model.mean_mode, g, t, boot) {
                    Ok(e) => atts.push((c, e)),
                    Err(Error::NotIdentified(_) | Error::EmptyCell { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
        }
        if !cfg.model.rings.is_empty() && panel.has_distance() {
            let s = spillover_rings_y(&panel, y, &cfg.model.rings, cfg.model.fe)?;
            spill.push((c, s));
        }
        if grouping == "all" {
            for r in group_shares(&panel, outcome, cfg.share_ci)?.rows {
                shares.push(r);
            }
        }
    }

    let mut long = Vec::new();
    let mut pcells = Vec::new();
    let mut pkeys = Vec::new();
    for (c, table, kind) in &tables {
        let (outcome, grouping, _) = &cols[*c];
        for r in table {
            long.push(CoefLine {
                outcome,
                grouping,
                term: &r.term,
                estimate: r.estimate,
                se: r.se,
                t: r.t,
                p: r.p,
                ci_lo: r.ci_lo,
                ci_hi: r.ci_hi,
                df: r.df,
                vcov: kind,
                descriptive: r.term.ends_with(&format!("={}", panel.scheme().label(2).unwrap_or("2")))
                    && is_interaction(&r.term),
            });
            if is_interaction(&r.term) {
                pcells.push(PCell { term: r.term.clone(), outcome: format!("{outcome}:{grouping}"), p: r.p });
                pkeys.push((outcome.as_str(), grouping.as_str(), r.term.as_str()));
            }
        }
    }
    let adjusted = adjust_table(&pcells, cfg.bh_family)?;
    let bh: Vec<BhLine> = pkeys
        .iter()
        .zip(&pcells)
        .zip(&adjusted)
        .map(|(((o, g, t), cell), a)| BhLine { outcome: o, grouping: g, term: t, p: cell.p, p_adjusted: *a, family: cfg.bh_family })
        .collect();

    let mut files = vec![
        OutputFile::csv("estimates.csv", &long)?,
        OutputFile::new("estimates_table.csv", wide_table(&cols, &tables)?),
        OutputFile::csv("bh_adjusted.csv", &bh)?,
        OutputFile::csv(
            "att.csv",
            &atts.iter().map(|(c, e)| EstimateLine::new(&cols[*c].0, &cols[*c].1, e)).collect::<Vec<_>>(),
        )?,
        OutputFile::csv("shares.csv", &shares)?,
    ];
    if !spill.is_empty() {
        let cols = &cols;
        let lines: Vec<EstimateLine> = spill
            .iter()
            .flat_map(|(c, s)| s.estimates.iter().map(move |e| EstimateLine::new(&cols[*c].0, &cols[*c].1, e)))
            .collect();
        files.push(OutputFile::csv("spillover.csv", &lines)?);
        #[derive(Serialize)]
        struct Decomp<'a> {
            outcome: &'a str,
            grouping: &'a str,
            naive_delta1: f64,
            delta1: f64,
            spill_treated: f64,
            spill_control: f64,
            total: f64,
            dropped: String,
        }
        let rows: Vec<Decomp> = spill
            .iter()
            .map(|(c, s)| {
                let d = &s.decomposition;
                Decomp {
                    outcome: &cols[*c].0,
                    grouping: &cols[*c].1,
                    naive_delta1: d.naive_delta1,
                    delta1: d.delta1,
                    spill_treated: d.spill_treated,
                    spill_control: d.spill_control,
                    total: d.total,
                    dropped: s.dropped.join(";"),
                }
            })
            .collect();
        files.push(OutputFile::csv("spillover_decomposition.csv", &rows)?);
    }
    Ok(files)
}

/// Terms as rows (estimate, se, t, p under each), one column per
/// outcome-grouping pair.
fn wide_table(cols: &[(String, String, String)], tables: &[(usize, Vec<CoefRow>, &str)]) -> Result<Vec<u8>> {
    let mut terms: Vec<String> = Vec::new();
    for (_, t, _) in tables {
        for r in t {
            if !terms.contains(&r.term) {
                terms.push(r.term.clone());
            }
        }
    }
    let order = |t: &String| match t.as_str() {
        "constant" => 3,
        "treated" => 2,
        s if is_interaction(s) => 1,
        _ => 0,
    };
    terms.sort_by_key(order);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["term".to_string(), "stat".to_string()];
    header.extend(cols.iter().map(|(o, g, _)| format!("{o}/{g}")));
    w.write_record(&header)?;
    for term in &terms {
        for stat in ["estimate", "se", "t", "p"] {
            let mut rec = vec![term.clone(), stat.to_string()];
            for (_, t, _) in tables {
                rec.push(match t.iter().find(|r| &r.term == term) {
                    Some(r) => match stat {
                        "estimate" => r.estimate,
                        "se" => r.se,
                        "t" => r.t,
                        _ => r.p,
                    }
                    .to_string(),
                    None => String::new(),
                });
            }
            w.write_record(&rec)?;
        }
    }
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()).into())
}

fn event_studies(cfg: &RunConfig) -> Result<Vec<(String, String, EventStudyResult)>> {
    let es = &cfg.event_study;
    let (panel, _) = working_panel(cfg)?.with_design(es.scheme.clone(), es.schedule.clone())?;
    let spec = EventStudySpec::new(es.baseline.clone(), es.leads, es.lags).with_fe(cfg.model.fe);
    columns(&panel, cfg)?
        .into_iter()
        .map(|(o, g, expr)| Ok((o, g, event_study_y(&panel, &panel.response(&expr)?, &spec)?)))
        .collect()
}

#[derive(Serialize)]
struct EventLine<'a> {
    outcome: &'a str,
    grouping: &'a str,
    relative_period: String,
    period_label: &'a str,
    estimate: f64,
    se: f64,
    lo95: f64,
    hi95: f64,
    p: f64,
}

#[derive(Serialize)]
struct PretrendLine<'a> {
    outcome: &'a str,
    grouping: &'a str,
    statistic: Option<f64>,
    df: Option<usize>,
    p: Option<f64>,
}

pub fn cmd_event_study(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    let studies = event_studies(cfg)?;
    let mut lines = Vec::new();
    let mut tests = Vec::new();
    for (o, g, es) in &studies {
        for c in &es.coefficients {
            lines.push(EventLine {
                outcome: o,
                grouping: g,
                relative_period: c.relative.to_string(),
                period_label: &c.label,
                estimate: c.estimate,
                se: c.se,
                lo95: c.ci_lo,
                hi95: c.ci_hi,
                p: c.p,
            });
        }
        tests.push(PretrendLine {
            outcome: o,
            grouping: g,
            statistic: es.pre_test.map(|w| w.statistic),
            df: es.pre_test.map(|w| w.df),
            p: es.pre_test.map(|w| w.p),
        });
    }
    Ok(vec![OutputFile::csv("event_study.csv", &lines)?, OutputFile::csv("pretrend_tests.csv", &tests)?])
}

pub fn cmd_sensitivity(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    #[derive(Serialize)]
    struct GridLine<'a> {
        outcome: &'a str,
        grouping: &'a str,
        mbar: f64,
        lo: f64,
        hi: f64,
        excludes_zero: bool,
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        outcome: &'a str,
        grouping: &'a str,
        method: &'static str,
        delta0: f64,
        se: f64,
        max_pre_violation: f64,
        breakdown_mbar: Option<f64>,
        not_robust: bool,
    }
    let studies = event_studies(cfg)?;
    let mut grid = Vec::new();
    let mut summary = Vec::new();
    for (o, g, es) in &studies {
        let d0 = es
            .get(crate::did::RelativePeriod::Lag(0))
            .ok_or_else(|| Error::Specification("event study has no onset coefficient".into()))?;
        let b = crate::sensitivity::max_pre_violation(es, cfg.sensitivity.mode)?;
        let s = scan(d0.estimate, d0.se, b, &cfg.sensitivity.grid)?;
        for pt in &s.grid {
            grid.push(GridLine { outcome: o, grouping: g, mbar: pt.mbar, lo: pt.lo, hi: pt.hi, excludes_zero: pt.excludes_zero });
        }
        summary.push(Summary {
            outcome: o,
            grouping: g,
            method: s.method,
            delta0: s.delta0,
            se: s.se,
            max_pre_violation: s.max_pre_violation,
            breakdown_mbar: s.breakdown_mbar,
            not_robust: s.not_robust,
        });
    }
    Ok(vec![OutputFile::csv("sensitivity.csv", &grid)?, OutputFile::csv("sensitivity_summary.csv", &summary)?])
}

fn zone_members(panel: &Panel, zone: Zone) -> Vec<String> {
    let set: BTreeSet<&str> = (0..panel.len())
        .filter(|&i| panel.zone(i) == zone)
        .map(|i| panel.municipality_name(panel.municipality(i)))
        .collect();
    set.into_iter().map(str::to_string).collect()
}

pub fn cmd_placebo(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    #[derive(Serialize)]
    struct Member<'a> {
        municipality: &'a str,
        distance: f64,
        role: &'static str,
    }
    #[derive(Serialize)]
    struct Line<'a> {
        outcome: &'a str,
        grouping: &'a str,
        term: &'a str,
        estimate: f64,
        se: f64,
        p: f64,
        ci_lo: f64,
        ci_hi: f64,
        expected: &'static str,
        covers_zero: bool,
    }
    let profiles = load_mortality(fs::File::open(require(cfg.paths.mortality.as_ref(), "mortality")?)?)?;
    let panel = working_panel(cfg)?;
    let red = zone_members(&panel, Zone::Red);
    let reference = reference_profile(&profiles, &red)?;
    let candidates: Vec<_> = profiles.into_iter().filter(|p| !red.contains(&p.municipality)).collect();
    let groups = placebo_groups(&candidates, &reference, cfg.placebo.k)?;
    let members: Vec<Member> = groups
        .distances
        .iter()
        .filter_map(|(m, d)| {
            let role = if groups.treated.contains(m) {
                "placebo-treated"
            } else if groups.control.contains(m) {
                "placebo-control"
            } else {
                return None;
            };
            Some(Member { municipality: m, distance: *d, role })
        })
        .collect();
    let zones: BTreeMap<String, Zone> = groups
        .treated
        .iter()
        .map(|m| (m.clone(), Zone::Red))
        .chain(groups.control.iter().map(|m| (m.clone(), Zone::Orange)))
        .collect();
    let placebo = panel.with_zones(&zones)?;
    let cols = columns(&placebo, cfg)?;
    let mut tables = Vec::new();
    for (o, g, expr) in &cols {
        let reg = did_regression_y(&placebo, placebo.response(expr)?, cfg.model.fe)?;
        let fit = apply_vcov(reg.fit, &placebo, cfg)?;
        tables.push((o, g, inference_table(&fit)));
    }
    let lines: Vec<Line> = tables
        .iter()
        .flat_map(|(o, g, t)| {
            t.iter().filter(|r| is_interaction(&r.term)).map(move |r| Line {
                outcome: o,
                grouping: g,
                term: &r.term,
                estimate: r.estimate,
                se: r.se,
                p: r.p,
                ci_lo: r.ci_lo,
                ci_hi: r.ci_hi,
                expected: "null",
                covers_zero: r.ci_lo <= 0.0 && 0.0 <= r.ci_hi,
            })
        })
        .collect();
    Ok(vec![OutputFile::csv("placebo_groups.csv", &members)?, OutputFile::csv("placebo.csv", &lines)?])
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    #[derive(Serialize)]
    struct Line {
        estimator: String,
        truth: Option<f64>,
        reps: usize,
        completed: usize,
        failures: usize,
        mean: f64,
        bias: Option<f64>,
        sd: f64,
        mc_se: f64,
        bias_within_3_mc_se: Option<bool>,
        coverage: Option<f64>,
        rejection_rate: f64,
    }
    #[derive(Serialize)]
    struct Rep {
        estimator: usize,
        replicate: u64,
        estimate: f64,
        se: f64,
        ci_lo: f64,
        ci_hi: f64,
        p: f64,
    }
    let mut dgp = cfg.simulate.dgp.clone();
    dgp.seed = cfg.seed;
    let (_, truth) = generate_panel(&dgp)?;
    let mut lines = Vec::new();
    let mut summaries = Vec::new();
    for est in &cfg.simulate.estimators {
        summaries.push(monte_carlo(&dgp, est, cfg.simulate.reps)?);
    }
    for s in &summaries {
        lines.push(Line {
            estimator: serde_json::to_string(&s.estimator)?,
            truth: s.truth,
            reps: s.reps,
            completed: s.completed,
            failures: s.failures.len(),
            mean: s.mean,
            bias: s.bias,
            sd: s.sd,
            mc_se: s.mc_se,
            bias_within_3_mc_se: s.bias.map(|b| b.abs() < 3.0 * s.mc_se),
            coverage: s.coverage,
            rejection_rate: s.rejection_rate,
        });
    }
    let reps: Vec<Rep> =
        summaries.iter().enumerate().flat_map(|(k, s)| s.replicates.iter().map(move |r| Rep {
            estimator: k,
            replicate: r.replicate,
            estimate: r.estimate,
            se: r.se,
            ci_lo: r.ci_lo,
            ci_hi: r.ci_hi,
            p: r.p,
        })).collect();
    let rng = vec![("rng".to_string(), RNG_ALGORITHM.to_string())];
    let mut files =
        vec![OutputFile::csv("simulation.csv", &lines)?, OutputFile::csv("replicates.csv", &reps)?, OutputFile::json("ground_truth.json", &truth)?];
    for f in &mut files {
        f.extra = rng.clone();
    }
    Ok(files)
}

pub fn cmd_balance(cfg: &RunConfig) -> Result<Vec<OutputFile>> {
    #[derive(Serialize)]
    struct Line<'a> {
        covariate: &'a str,
        mean_t: f64,
        mean_c: f64,
        smd: f64,
        p: f64,
        flag: bool,
        degenerate: bool,
    }
    let table = load_covariates(fs::File::open(require(cfg.paths.covariates.as_ref(), "covariates")?)?)?;
    let panel = working_panel(cfg)?;
    let rows = balance_check(&table, &zone_members(&panel, Zone::Red), &zone_members(&panel, Zone::Orange))?;
    let lines: Vec<Line> = rows
        .iter()
        .map(|r| Line {
            covariate: &r.covariate,
            mean_t: r.mean_t,
            mean_c: r.mean_c,
            smd: r.smd,
            p: r.p,
            flag: r.imbalanced,
            degenerate: r.degenerate,
        })
        .collect();
    Ok(vec![OutputFile::csv("balance.csv", &lines)?])
}
