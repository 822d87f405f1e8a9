//! Reconstruction experiments and their result tables.
//!
//! Every task draws its randomness from streams keyed by the root seed and
//! the task coordinates (trial, initial infections, fraction index), and
//! results are collected in a fixed order, so outputs do not depend on the
//! number of threads.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisContext, BasisKind};
use crate::dag::erdos_renyi_dag;
use crate::dynnet::{self, MobilityParams, SirConfig};
use crate::error::{Error, Result};
use crate::learn::{self, SampleSet, SolverOptions};
use crate::rng::{self, tag};
use crate::sem::{generate_sem_signal, SemSignalConfig, SignPolicy};
use crate::semiring::Semiring;

const TAG_SEM: u64 = 100;
const TAG_NETWORK: u64 = 101;
const TAG_FRACTION: u64 = 102;
/// Series name of the all-negative classifier.
pub const TRIVIAL_SERIES: &str = "trivial";
/// Lasso penalty of the synthetic experiment, the same for every basis.
pub const DEFAULT_SYNTHETIC_LAMBDA: f64 = 0.3;
/// False-positive-rate grid on which ROC curves are averaged.
pub const ROC_GRID_POINTS: usize = 51;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemParams {
    pub density: f64,
    pub range: (f64, f64),
    pub sigma_c: f64,
    pub sigma_x: f64,
    #[serde(default)]
    pub sign: SignPolicy,
}

impl Default for SemParams {
    fn default() -> Self {
        Self { density: 0.1, range: (1.0, 10.0), sigma_c: 0.1, sigma_x: 0.1, sign: SignPolicy::Positive }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticConfig {
    pub nodes: usize,
    pub edge_probability: f64,
    pub weight_range: (f64, f64),
    pub sem: SemParams,
    pub bases: Vec<BasisKind>,
    pub fractions: Vec<f64>,
    pub trials: usize,
    /// Lasso penalty shared by all bases; when absent, each fit uses
    /// `lambda_fraction · ||B_Sᵀ s||_inf`.
    pub lambda: Option<f64>,
    pub lambda_fraction: f64,
    pub solver: SolverOptions,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            nodes: 100,
            edge_probability: 0.05,
            weight_range: (-1.0, 1.0),
            sem: SemParams::default(),
            bases: BasisKind::ALL.to_vec(),
            fractions: vec![0.2, 0.4, 0.6, 0.8, 1.0],
            trials: 10,
            lambda: Some(DEFAULT_SYNTHETIC_LAMBDA),
            lambda_fraction: learn::DEFAULT_LASSO_LAMBDA_FRACTION,
            solver: SolverOptions::default(),
            seed: 0,
        }
    }
}

impl SyntheticConfig {
    /// 500 nodes and 100 DAGs.
    pub fn full_scale() -> Self {
        Self { nodes: 500, trials: 100, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        check_common(&self.fractions, self.trials, &self.bases)?;
        if self.nodes == 0 {
            return Err(Error::Config("nodes must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.edge_probability) {
            return Err(Error::Config(format!("edge probability {} is outside [0, 1]", self.edge_probability)));
        }
        if self.lambda.is_some_and(|l| !(l >= 0.0)) || !(self.lambda_fraction >= 0.0) {
            return Err(Error::Config("lambda must be non-negative".into()));
        }
        self.sem_config(0).validate()
    }

    fn sem_config(&self, seed: u64) -> SemSignalConfig {
        SemSignalConfig {
            cause_density: self.sem.density,
            cause_range: self.sem.range,
            sigma_c: self.sem.sigma_c,
            sigma_x: self.sem.sigma_x,
            sign: self.sem.sign,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContactSource {
    pub path: PathBuf,
    #[serde(default = "one")]
    pub stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SirExperimentConfig {
    pub individuals: usize,
    pub time_points: usize,
    pub mobility: MobilityParams,
    /// Contact CSV to use instead of a synthetic walk.
    pub contacts: Option<ContactSource>,
    pub rho: f64,
    pub eps: f64,
    pub recovery_delay: usize,
    pub initial_infected: Vec<usize>,
    pub bases: Vec<BasisKind>,
    pub fractions: Vec<f64>,
    pub trials: usize,
    pub lambda: f64,
    pub tau: f64,
    pub solver: SolverOptions,
    pub seed: u64,
}

impl Default for SirExperimentConfig {
    fn default() -> Self {
        Self {
            individuals: 60,
            time_points: 24,
            mobility: MobilityParams::default(),
            contacts: None,
            rho: 10.0,
            eps: 20.0,
            recovery_delay: 5,
            initial_infected: vec![3, 5],
            bases: BasisKind::ALL.to_vec(),
            fractions: vec![0.2],
            trials: 5,
            lambda: learn::DEFAULT_LOGISTIC_LAMBDA,
            tau: 0.5,
            solver: SolverOptions::default(),
            seed: 0,
        }
    }
}

impl SirExperimentConfig {
    /// 5, 9 and 11 initial infections, 10 signals each, fractions 5% to 50%,
    /// on a 469-person walk over 37 time points.
    pub fn full_scale() -> Self {
        Self {
            individuals: 469,
            time_points: 37,
            initial_infected: vec![5, 9, 11],
            trials: 10,
            fractions: vec![0.05, 0.1, 0.2, 0.3, 0.4, 0.5],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_common(&self.fractions, self.trials, &self.bases)?;
        if !(self.lambda >= 0.0) {
            return Err(Error::Config("lambda must be non-negative".into()));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::Config(format!("threshold {} is outside (0, 1)", self.tau)));
        }
        if self.contacts.is_none() && (self.individuals == 0 || self.time_points == 0) {
            return Err(Error::Config("the contact network needs individuals and time points".into()));
        }
        if self.initial_infected.is_empty() {
            return Err(Error::Config("no initial infection counts given".into()));
        }
        self.sir_config(0, 0).validate()?;
        Ok(())
    }

    fn sir_config(&self, initial: usize, seed: u64) -> SirConfig {
        SirConfig { rho: self.rho, eps: self.eps, recovery_delay: self.recovery_delay, initial_infected: initial, seed }
    }
}

fn check_common(fractions: &[f64], trials: usize, bases: &[BasisKind]) -> Result<()> {
    if fractions.is_empty() {
        return Err(Error::Config("no sample fractions given".into()));
    }
    if let Some(f) = fractions.iter().find(|&&f| !(f > 0.0 && f <= 1.0)) {
        return Err(Error::Config(format!("sample fraction {f} is outside (0, 1]")));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if bases.is_empty() {
        return Err(Error::Config("no bases given".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentConfig {
    SyntheticSem(SyntheticConfig),
    DynamicSir(SirExperimentConfig),
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SyntheticSem,
    DynamicSir,
}

/// One fit: a basis (or the trivial classifier) on one signal and sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub series: String,
    pub initial: Option<usize>,
    pub fraction: f64,
    pub trial: usize,
    pub rel_error: Option<f64>,
    pub accuracy: Option<f64>,
    pub auc: Option<f64>,
    pub roc: Option<Vec<(f64, f64)>>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResults {
    pub kind: ExperimentKind,
    pub records: Vec<TrialRecord>,
}

/// Mean and normal-approximation 95% interval over trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub count: usize,
}

/// `mean ± 1.96 · s / √n` with the sample standard deviation `s`.
pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary { mean: f64::NAN, ci_low: f64::NAN, ci_high: f64::NAN, count: 0 };
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let half = if n > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        1.96 * var.sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    Summary { mean, ci_low: mean - half, ci_high: mean + half, count: n }
}

impl ExperimentResults {
    /// Summary of `metric` over all records of `series` at `fraction`.
    pub fn summary(&self, series: &str, fraction: f64, metric: impl Fn(&TrialRecord) -> Option<f64>) -> Summary {
        let values: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.series == series && r.fraction == fraction)
            .filter_map(&metric)
            .collect();
        summarize(&values)
    }

    /// Distinct series in first-appearance order.
    pub fn series(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.records {
            if !out.contains(&r.series) {
                out.push(r.series.clone());
            }
        }
        out
    }

    /// Distinct fractions, ascending.
    pub fn fractions(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.records.iter().map(|r| r.fraction).collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

fn fraction_seed(seed: u64, trial: u64, fraction_index: usize) -> u64 {
    rng::derive(seed, &[TAG_FRACTION, trial, fraction_index as u64])
}

pub fn run_synthetic_experiment(cfg: &SyntheticConfig) -> Result<ExperimentResults> {
    cfg.validate()?;
    let per_trial: Vec<Result<Vec<TrialRecord>>> =
        (0..cfg.trials).into_par_iter().map(|trial| synthetic_trial(cfg, trial)).collect();
    let mut records = Vec::new();
    for r in per_trial {
        records.extend(r?);
    }
    records.sort_by(|a, b| {
        let ka = cfg.bases.iter().position(|k| k.as_str() == a.series);
        let kb = cfg.bases.iter().position(|k| k.as_str() == b.series);
        (ka, a.fraction.total_cmp(&b.fraction), a.trial).cmp(&(kb, std::cmp::Ordering::Equal, b.trial))
    });
    Ok(ExperimentResults { kind: ExperimentKind::SyntheticSem, records })
}

fn synthetic_trial(cfg: &SyntheticConfig, trial: usize) -> Result<Vec<TrialRecord>> {
    let t = trial as u64;
    let dag = erdos_renyi_dag(cfg.nodes, cfg.edge_probability, cfg.weight_range, rng::derive(cfg.seed, &[tag::DAG, t]))?;
    let mut ctx = BasisContext::new(&dag, &Semiring::pollution())?;
    let (signal, _) = generate_sem_signal(&ctx.weighted, &cfg.sem_config(rng::derive(cfg.seed, &[TAG_SEM, t])))?;
    let samples: Vec<SampleSet> = cfg
        .fractions
        .iter()
        .enumerate()
        .map(|(fi, &f)| {
            let idx = learn::sample_nodes(cfg.nodes, f, fraction_seed(cfg.seed, t, fi), t)?;
            Ok(SampleSet::from_signal(&signal, idx)?)
        })
        .collect::<Result<_>>()?;

    let mut records = Vec::new();
    for &kind in &cfg.bases {
        let basis = ctx.build(kind)?;
        for (sample, &fraction) in samples.iter().zip(&cfg.fractions) {
            let lambda = match cfg.lambda {
                Some(l) => l,
                None => cfg.lambda_fraction * learn::max_correlation(&basis, sample)?,
            };
            let fit = learn::lasso_reconstruct(&basis, sample, lambda, cfg.solver)?;
            records.push(TrialRecord {
                series: kind.as_str().into(),
                initial: None,
                fraction,
                trial,
                rel_error: Some(learn::relative_error(&fit.signal, &signal)?),
                accuracy: None,
                auc: None,
                roc: None,
                converged: fit.converged,
            });
        }
    }
    Ok(records)
}

struct SirTask {
    initial: usize,
    trial: usize,
}

pub fn run_sir_experiment(cfg: &SirExperimentConfig) -> Result<ExperimentResults> {
    cfg.validate()?;
    let net = match &cfg.contacts {
        Some(src) => dynnet::ingest_contacts(&src.path, src.stride, Some(cfg.eps))?,
        None => dynnet::synth_contacts(
            cfg.individuals,
            cfg.time_points,
            &cfg.mobility,
            rng::derive(cfg.seed, &[TAG_NETWORK]),
        )
        .with_cutoff(cfg.eps),
    };
    if let Some(&i) = cfg.initial_infected.iter().find(|&&i| i > net.individuals()) {
        return Err(dynnet::DynNetError::InitialExceedsPopulation { initial: i, population: net.individuals() }.into());
    }
    let dag = dynnet::influence_dag(&net);
    let n = dag.n();
    let mut ctx = BasisContext::new(&dag, &Semiring::influence())?;
    let bases: Vec<(BasisKind, nalgebra::DMatrix<f64>)> =
        cfg.bases.iter().map(|&k| Ok((k, ctx.build(k)?))).collect::<Result<_>>()?;

    let tasks: Vec<SirTask> = cfg
        .initial_infected
        .iter()
        .flat_map(|&initial| (0..cfg.trials).map(move |trial| SirTask { initial, trial }))
        .collect();
    let per_task: Vec<Result<Vec<TrialRecord>>> = tasks
        .par_iter()
        .map(|task| {
            let seed = rng::derive(cfg.seed, &[tag::SIR, task.initial as u64, task.trial as u64]);
            let trace = dynnet::sir_simulate(&net, &cfg.sir_config(task.initial, seed))?;
            let signal = trace.signal();
            let labels: Vec<bool> = signal.iter().map(|&v| v == 1.0).collect();
            let mut out = Vec::new();
            for (fi, &fraction) in cfg.fractions.iter().enumerate() {
                let idx = learn::sample_nodes(n, fraction, fraction_seed(seed, task.trial as u64, fi), task.trial as u64)?;
                let sample = SampleSet::from_signal(&signal, idx)?;
                for (kind, basis) in &bases {
                    let fit = learn::logistic_sparse_fit(basis, &sample, cfg.lambda, cfg.solver)?;
                    let scores: Vec<f64> = fit.signal.iter().map(|&r| learn::sigmoid(r)).collect();
                    let prediction = learn::predict_binary(&fit.signal, cfg.tau);
                    out.push(classification_record(kind.as_str(), task, fraction, &scores, &prediction, &labels, fit.converged)?);
                }
                let zeros = vec![0.0; n];
                out.push(classification_record(TRIVIAL_SERIES, task, fraction, &zeros, &zeros, &labels, true)?);
            }
            Ok(out)
        })
        .collect();
    let mut records = Vec::new();
    for r in per_task {
        records.extend(r?);
    }
    let order = |s: &str| cfg.bases.iter().position(|k| k.as_str() == s).unwrap_or(cfg.bases.len());
    records.sort_by(|a, b| {
        (order(&a.series), a.fraction.total_cmp(&b.fraction), a.initial, a.trial).cmp(&(
            order(&b.series),
            std::cmp::Ordering::Equal,
            b.initial,
            b.trial,
        ))
    });
    Ok(ExperimentResults { kind: ExperimentKind::DynamicSir, records })
}

fn classification_record(
    series: &str,
    task: &SirTask,
    fraction: f64,
    scores: &[f64],
    prediction: &[f64],
    labels: &[bool],
    converged: bool,
) -> Result<TrialRecord> {
    let correct = prediction.iter().zip(labels).filter(|(&p, &l)| (p == 1.0) == l).count();
    let roc = learn::roc_auc(scores, labels)?;
    Ok(TrialRecord {
        series: series.into(),
        initial: Some(task.initial),
        fraction,
        trial: task.trial,
        rel_error: None,
        accuracy: Some(correct as f64 / labels.len() as f64),
        auc: Some(roc.auc),
        roc: Some(roc.points),
        converged,
    })
}

/// TPR of a ROC polyline at false-positive rate `x` (upper value on
/// vertical segments).
pub fn roc_at(points: &[(f64, f64)], x: f64) -> f64 {
    let mut best = 0.0f64;
    for w in points.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x0 <= x && x <= x1 {
            let y = if x1 > x0 { y0 + (y1 - y0) * (x - x0) / (x1 - x0) } else { y0.max(y1) };
            best = best.max(y);
        }
    }
    best
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-fit table: `series,initial,fraction,trial,rel_error,accuracy,auc,converged`.
pub fn write_trials(results: &ExperimentResults, writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["series", "initial", "fraction", "trial", "rel_error", "accuracy", "auc", "converged"])?;
    for r in &results.records {
        wtr.write_record([
            r.series.clone(),
            r.initial.map(|i| i.to_string()).unwrap_or_default(),
            r.fraction.to_string(),
            r.trial.to_string(),
            fmt_opt(r.rel_error),
            fmt_opt(r.accuracy),
            fmt_opt(r.auc),
            r.converged.to_string(),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a table written by [`write_trials`]; ROC points are not part of it.
pub fn read_trials(reader: impl Read) -> Result<ExperimentResults> {
    #[derive(Deserialize)]
    struct Row {
        series: String,
        initial: Option<usize>,
        fraction: f64,
        trial: usize,
        rel_error: Option<f64>,
        accuracy: Option<f64>,
        auc: Option<f64>,
        converged: bool,
    }
    let mut rdr = csv::Reader::from_reader(reader);
    let mut records = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let r = row?;
        records.push(TrialRecord {
            series: r.series,
            initial: r.initial,
            fraction: r.fraction,
            trial: r.trial,
            rel_error: r.rel_error,
            accuracy: r.accuracy,
            auc: r.auc,
            roc: None,
            converged: r.converged,
        });
    }
    let kind = if records.iter().any(|r| r.rel_error.is_some()) {
        ExperimentKind::SyntheticSem
    } else {
        ExperimentKind::DynamicSir
    };
    Ok(ExperimentResults { kind, records })
}

/// ROC polylines: `series,initial,fraction,trial,fpr,tpr`, one row per point.
pub fn write_roc_points(results: &ExperimentResults, writer: impl Write) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["series", "initial", "fraction", "trial", "fpr", "tpr"])?;
    for r in &results.records {
        for &(x, y) in r.roc.iter().flatten() {
            wtr.write_record([
                r.series.clone(),
                r.initial.map(|i| i.to_string()).unwrap_or_default(),
                r.fraction.to_string(),
                r.trial.to_string(),
                x.to_string(),
                y.to_string(),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Attaches points read from a [`write_roc_points`] table to matching records.
pub fn read_roc_points(results: &mut ExperimentResults, reader: impl Read) -> Result<()> {
    #[derive(Deserialize)]
    struct Row {
        series: String,
        initial: Option<usize>,
        fraction: f64,
        trial: usize,
        fpr: f64,
        tpr: f64,
    }
    let mut rdr = csv::Reader::from_reader(reader);
    for row in rdr.deserialize::<Row>() {
        let p = row?;
        let record = results
            .records
            .iter_mut()
            .find(|r| r.series == p.series && r.initial == p.initial && r.fraction == p.fraction && r.trial == p.trial)
            .ok_or_else(|| Error::Config(format!("ROC point for unknown fit {}@{} trial {}", p.series, p.fraction, p.trial)))?;
        record.roc.get_or_insert_with(Vec::new).push((p.fpr, p.tpr));
    }
    Ok(())
}

fn write_plot(path: &Path, rows: &[(f64, String, Summary)]) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["x", "series", "mean", "ci_low", "ci_high"])?;
    for (x, series, s) in rows {
        wtr.write_record([x.to_string(), series.clone(), s.mean.to_string(), s.ci_low.to_string(), s.ci_high.to_string()])?;
    }
    wtr.flush()?;
    Ok(())
}

fn metric_rows(results: &ExperimentResults, metric: impl Fn(&TrialRecord) -> Option<f64> + Copy) -> Vec<(f64, String, Summary)> {
    let mut rows = Vec::new();
    for series in results.series() {
        for fraction in results.fractions() {
            let s = results.summary(&series, fraction, metric);
            if s.count > 0 {
                rows.push((fraction, series.clone(), s));
            }
        }
    }
    rows
}

/// Writes the plot tables for `results` into `dir` and returns their paths.
///
/// Synthetic runs give `relative_error.csv`; SIR runs give `accuracy.csv`,
/// `auc.csv` and `roc.csv` (mean ROC per `series@fraction`).
pub fn emit_plot_data(results: &ExperimentResults, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut emit = |name: &str, rows: Vec<(f64, String, Summary)>| -> Result<()> {
        let path = dir.join(name);
        write_plot(&path, &rows)?;
        written.push(path);
        Ok(())
    };
    match results.kind {
        ExperimentKind::SyntheticSem => emit("relative_error.csv", metric_rows(results, |r| r.rel_error))?,
        ExperimentKind::DynamicSir => {
            emit("accuracy.csv", metric_rows(results, |r| r.accuracy))?;
            emit("auc.csv", metric_rows(results, |r| r.auc))?;
            let mut rows = Vec::new();
            for series in results.series() {
                for fraction in results.fractions() {
                    let curves: Vec<&Vec<(f64, f64)>> = results
                        .records
                        .iter()
                        .filter(|r| r.series == series && r.fraction == fraction)
                        .filter_map(|r| r.roc.as_ref())
                        .collect();
                    if curves.is_empty() {
                        continue;
                    }
                    for g in 0..ROC_GRID_POINTS {
                        let x = g as f64 / (ROC_GRID_POINTS - 1) as f64;
                        let ys: Vec<f64> = curves.iter().map(|c| roc_at(c, x)).collect();
                        rows.push((x, format!("{series}@{fraction}"), summarize(&ys)));
                    }
                }
            }
            emit("roc.csv", rows)?;
        }
    }
    Ok(written)
}
