//! Monte Carlo sweeps and result tables.
//!
//! A trial draws `K` user channels and, per sweep point, a combiner and the
//! uplink noise. Each random quantity comes from its own stream keyed by
//! `(seed, purpose, trial, sweep indices)`, so every trial is a pure function
//! of the configuration and its index. Trials run in parallel and are reduced
//! in index order, which keeps the emitted tables byte-identical for any
//! thread count.
//!
//! Channels are shared across all sweep points of a trial, and all
//! estimators of a trial see the same measurements.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::beam_selection::{ia_beam_select, reduced_channel, sum_rate, zf_precoder, IaOptions};
use crate::channel::{build_beamspace_transform, generate_spatial_channel, to_beamspace};
use crate::channel::{BeamspaceChannel, BeamspaceTransform, ChannelGenConfig, DirectionModel};
use crate::estimators::{nmse, omp_estimate, sd_estimate, smd_estimate};
use crate::measurement::{generate_combiner, simulate_uplink, Combiner, NoiseMode};
use crate::rng::substream;
use crate::{CVector, Error, Result};

const STREAM_CHANNEL: u64 = 1;
const STREAM_COMBINER: u64 = 2;
const STREAM_UPLINK: u64 = 3;
const STREAM_SMD: u64 = 4;

/// Which study to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    NmseVsSnr,
    NmseVsQ,
    SumRateVsDlSnr,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::NmseVsSnr => "nmse_vs_snr",
            ExperimentKind::NmseVsQ => "nmse_vs_q",
            ExperimentKind::SumRateVsDlSnr => "sum_rate_vs_dl_snr",
        }
    }
}

/// Channel estimation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    Sd,
    Omp,
    Smd,
    /// Genie reference using the true beamspace channels.
    PerfectCsi,
}

impl Estimator {
    pub fn as_str(&self) -> &'static str {
        match self {
            Estimator::Sd => "sd",
            Estimator::Omp => "omp",
            Estimator::Smd => "smd",
            Estimator::PerfectCsi => "perfect_csi",
        }
    }
}

/// A single measurement count or a list of them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QSetting {
    Single(usize),
    Sweep(Vec<usize>),
}

impl QSetting {
    pub fn values(&self) -> Vec<usize> {
        match self {
            QSetting::Single(q) => vec![*q],
            QSetting::Sweep(v) => v.clone(),
        }
    }
}

fn default_rho() -> f64 {
    1.0
}

fn default_los_variance() -> f64 {
    1.0
}

fn default_nlos_variance() -> f64 {
    10f64.powf(-0.5)
}

fn default_ia_candidates() -> usize {
    16
}

/// Full parameterization of a sweep. Serialized as a single JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N_RF")]
    pub n_rf: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "V")]
    pub v: usize,
    #[serde(rename = "Q")]
    pub q: QSetting,
    pub snr_ul_db: Vec<f64>,
    #[serde(default)]
    pub snr_dl_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
    #[serde(default)]
    pub noise_mode: NoiseMode,
    /// OMP iteration count; defaults to `V(L+1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omp_sparsity: Option<usize>,
    /// Beams kept by SMD; defaults to `V(L+1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smd_keep: Option<usize>,
    /// Downlink transmit power `ρ`; downlink SNR is `ρ/σ²_DL`.
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_los_variance")]
    pub los_variance: f64,
    #[serde(default = "default_nlos_variance")]
    pub nlos_variance: f64,
    #[serde(default)]
    pub directions: DirectionModel,
    /// Strongest free beams of an interference user tried per greedy step.
    #[serde(default = "default_ia_candidates")]
    pub ia_candidates: usize,
}

impl ExperimentConfig {
    /// Paper-scale defaults: `N = 256`, `K = N_RF = 16`, `L = 2`, `V = 8`,
    /// `Q = 96`, 500 trials, SD/OMP/SMD.
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            n: 256,
            k: 16,
            n_rf: 16,
            l: 2,
            v: 8,
            q: QSetting::Single(96),
            snr_ul_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            snr_dl_db: vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
            trials: 500,
            seed: 1,
            estimators: vec![Estimator::Sd, Estimator::Omp, Estimator::Smd],
            noise_mode: NoiseMode::Faithful,
            omp_sparsity: None,
            smd_keep: None,
            rho: default_rho(),
            los_variance: default_los_variance(),
            nlos_variance: default_nlos_variance(),
            directions: DirectionModel::Uniform,
            ia_candidates: default_ia_candidates(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn omp_sparsity(&self) -> usize {
        self.omp_sparsity.unwrap_or(self.v * (self.l + 1))
    }

    pub fn smd_keep(&self) -> usize {
        self.smd_keep.unwrap_or(self.v * (self.l + 1))
    }

    fn channel_config(&self) -> ChannelGenConfig {
        ChannelGenConfig {
            num_antennas: self.n,
            num_nlos: self.l,
            los_variance: self.los_variance,
            nlos_variance: self.nlos_variance,
            directions: self.directions,
        }
    }

    /// Hex SHA-256 prefix of the canonical JSON encoding.
    pub fn config_hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&canonical);
        digest[..8].iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.n == 0 || self.k == 0 {
            return fail("N and K must be positive".into());
        }
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.v == 0 || self.v * (self.l + 1) > self.n {
            return fail(format!("V(L+1) = {} must lie in 1..=N", self.v * (self.l + 1)));
        }
        if self.estimators.is_empty() {
            return fail("no estimators configured".into());
        }
        if self.snr_ul_db.is_empty() {
            return fail("snr_ul_db grid is empty".into());
        }
        if self.snr_ul_db.iter().chain(&self.snr_dl_db).any(|s| !s.is_finite()) {
            return fail("SNR grids must be finite".into());
        }
        let qs = self.q.values();
        if qs.is_empty() {
            return fail("Q grid is empty".into());
        }
        let compressive = self
            .estimators
            .iter()
            .any(|e| matches!(e, Estimator::Sd | Estimator::Omp));
        for &q in &qs {
            if q == 0 {
                return fail("Q must be positive".into());
            }
            if compressive && self.noise_mode == NoiseMode::Faithful && q % self.k != 0 {
                return fail(format!("Q = {q} is not a multiple of K = {}", self.k));
            }
            if self.estimators.contains(&Estimator::Omp) && self.omp_sparsity() > q.min(self.n) {
                return fail(format!("OMP sparsity {} exceeds Q = {q}", self.omp_sparsity()));
            }
        }
        if self.smd_keep() > self.n {
            return fail(format!("SMD keep {} exceeds N", self.smd_keep()));
        }
        if !(self.rho > 0.0) || !(self.los_variance >= 0.0) || !(self.nlos_variance >= 0.0) {
            return fail("rho must be positive and gain variances non-negative".into());
        }
        if self.ia_candidates == 0 {
            return fail("ia_candidates must be positive".into());
        }
        if self.experiment == ExperimentKind::SumRateVsDlSnr {
            if self.snr_dl_db.is_empty() {
                return fail("snr_dl_db grid is empty".into());
            }
            if self.n_rf != self.k {
                return fail(format!("N_RF = {} must equal K = {}", self.n_rf, self.k));
            }
        }
        Ok(())
    }
}

/// One aggregated cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub estimator: String,
    pub sweep_param: String,
    pub sweep_value: f64,
    pub metric: String,
    #[serde(with = "nan_as_null")]
    pub mean: f64,
    #[serde(with = "nan_as_null")]
    pub stderr: f64,
    pub trials: usize,
    pub failures: usize,
    pub seed: u64,
    pub config_hash: String,
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

/// CSV header of [`ResultTable`].
pub const CSV_HEADER: &str =
    "experiment,estimator,sweep_param,sweep_value,metric,mean,stderr,trials,failures,seed,config_hash";

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows of one experiment id and estimator, in sweep order.
    pub fn series<'a>(&'a self, experiment: &'a str, estimator: Estimator) -> impl Iterator<Item = &'a ResultRow> {
        self.rows
            .iter()
            .filter(move |r| r.experiment == experiment && r.estimator == estimator.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.experiment,
                r.estimator,
                r.sweep_param,
                r.sweep_value,
                r.metric,
                r.mean,
                r.stderr,
                r.trials,
                r.failures,
                r.seed,
                r.config_hash
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Writes `table` to `path`.
pub fn emit_results(table: &ResultTable, path: &Path, format: OutputFormat) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json()?,
    };
    fs::write(path, text)?;
    Ok(())
}

/// Running mean and standard error over successful trials.
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    count: usize,
    failures: usize,
    sum: f64,
    sum_sq: f64,
}

impl Accumulator {
    fn push(&mut self, v: Option<f64>) {
        match v {
            Some(x) => {
                self.count += 1;
                self.sum += x;
                self.sum_sq += x * x;
            }
            None => self.failures += 1,
        }
    }

    fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.sum / self.count as f64
        }
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let n = self.count as f64;
        let mean = self.sum / n;
        let var = ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

fn snr_db_to_noise(snr_db: f64, power: f64) -> f64 {
    power / 10f64.powf(snr_db / 10.0)
}

struct TrialContext<'a> {
    cfg: &'a ExperimentConfig,
    transform: BeamspaceTransform,
    qs: Vec<usize>,
}

impl TrialContext<'_> {
    fn channels(&self, trial: u64) -> Result<Vec<BeamspaceChannel>> {
        let mut rng = substream(self.cfg.seed, &[STREAM_CHANNEL, trial]);
        let gen = self.cfg.channel_config();
        (0..self.cfg.k)
            .map(|_| to_beamspace(&generate_spatial_channel(&gen, &mut rng)?, &self.transform))
            .collect()
    }

    fn combiner(&self, trial: u64, qi: usize) -> Result<Combiner> {
        let mut rng = substream(self.cfg.seed, &[STREAM_COMBINER, trial, qi as u64]);
        generate_combiner(self.qs[qi], self.cfg.n, &mut rng)
    }

    /// Per-user estimates for one estimator, or `None` if any user fails.
    #[allow(clippy::too_many_arguments)]
    fn estimate_all(
        &self,
        estimator: Estimator,
        hb: &[BeamspaceChannel],
        w: &Combiner,
        z: &[CVector],
        sigma2: f64,
        trial: u64,
        si: usize,
    ) -> Option<Vec<CVector>> {
        let cfg = self.cfg;
        match estimator {
            Estimator::Sd => z
                .iter()
                .map(|zk| sd_estimate(zk, w, cfg.l, cfg.v).map(|e| e.vector).ok())
                .collect(),
            Estimator::Omp => z
                .iter()
                .map(|zk| omp_estimate(zk, w, cfg.omp_sparsity()).map(|e| e.vector).ok())
                .collect(),
            Estimator::Smd => {
                let mut rng = substream(cfg.seed, &[STREAM_SMD, trial, si as u64]);
                hb.iter()
                    .map(|h| smd_estimate(h, sigma2, cfg.smd_keep(), &mut rng).map(|e| e.vector).ok())
                    .collect()
            }
            Estimator::PerfectCsi => Some(hb.iter().map(|h| h.vector().clone()).collect()),
        }
    }

    /// NMSE cells laid out as `[qi][si][estimator]`.
    fn nmse_trial(&self, trial: u64) -> Result<Vec<Option<f64>>> {
        let cfg = self.cfg;
        let hb = self.channels(trial)?;
        let mut cells = Vec::new();
        for qi in 0..self.qs.len() {
            let w = self.combiner(trial, qi)?;
            for (si, &snr) in cfg.snr_ul_db.iter().enumerate() {
                let sigma2 = snr_db_to_noise(snr, 1.0);
                let mut rng = substream(cfg.seed, &[STREAM_UPLINK, trial, qi as u64, si as u64]);
                let meas = simulate_uplink(&hb, &w, sigma2, cfg.noise_mode, &mut rng)?;
                for &est in &cfg.estimators {
                    let value = self
                        .estimate_all(est, &hb, &w, &meas.per_user, sigma2, trial, si)
                        .and_then(|e| {
                            let per_user: Option<Vec<f64>> = e
                                .iter()
                                .zip(&hb)
                                .map(|(x, h)| nmse(x, h.vector()).ok())
                                .collect();
                            per_user.map(|v| v.iter().sum::<f64>() / v.len() as f64)
                        });
                    cells.push(value);
                }
            }
        }
        Ok(cells)
    }

    /// Sum-rate cells laid out as `[qi][si][estimator][di]`.
    fn sum_rate_trial(&self, trial: u64) -> Result<Vec<Option<f64>>> {
        let cfg = self.cfg;
        let hb = self.channels(trial)?;
        let truth: Vec<CVector> = hb.iter().map(|h| h.vector().clone()).collect();
        let mut cells = Vec::new();
        for qi in 0..self.qs.len() {
            let w = self.combiner(trial, qi)?;
            for (si, &snr) in cfg.snr_ul_db.iter().enumerate() {
                let sigma2 = snr_db_to_noise(snr, 1.0);
                let mut rng = substream(cfg.seed, &[STREAM_UPLINK, trial, qi as u64, si as u64]);
                let meas = simulate_uplink(&hb, &w, sigma2, cfg.noise_mode, &mut rng)?;
                for &est in &cfg.estimators {
                    let estimates = self.estimate_all(est, &hb, &w, &meas.per_user, sigma2, trial, si);
                    for &dl in &cfg.snr_dl_db {
                        let sigma2_dl = snr_db_to_noise(dl, cfg.rho);
                        let rate = estimates.as_ref().and_then(|e| {
                            downlink_sum_rate(e, &truth, cfg.n_rf, cfg.rho, sigma2_dl, cfg.ia_candidates).ok()
                        });
                        cells.push(rate);
                    }
                }
            }
        }
        Ok(cells)
    }
}

/// IA beam selection and ZF on `estimates`, evaluated on the true channels.
pub fn downlink_sum_rate(
    estimates: &[CVector],
    truth: &[CVector],
    n_rf: usize,
    rho: f64,
    sigma2_dl: f64,
    ia_candidates: usize,
) -> Result<f64> {
    let opts = IaOptions {
        rho,
        sigma2_dl,
        max_candidates: ia_candidates,
    };
    let selection = ia_beam_select(estimates, n_rf, &opts)?;
    let h_est = reduced_channel(estimates, &selection.beams)?;
    let precoder = zf_precoder(&h_est, rho)?;
    let h_true = reduced_channel(truth, &selection.beams)?;
    sum_rate(&h_true, &precoder, sigma2_dl)
}

fn run_trials<F>(cfg: &ExperimentConfig, threads: Option<usize>, trial: F) -> Result<Vec<Vec<Option<f64>>>>
where
    F: Fn(u64) -> Result<Vec<Option<f64>>> + Sync,
{
    let work = || {
        (0..cfg.trials as u64)
            .into_par_iter()
            .map(&trial)
            .collect::<Result<Vec<_>>>()
    };
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

fn reduce(per_trial: &[Vec<Option<f64>>], cells: usize) -> Vec<Accumulator> {
    let mut acc = vec![Accumulator::default(); cells];
    for t in per_trial {
        for (a, &v) in acc.iter_mut().zip(t) {
            a.push(v);
        }
    }
    acc
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

/// Runs an NMSE sweep (`NmseVsSnr` or `NmseVsQ`).
///
/// The perfect-CSI reference is skipped here since its NMSE is zero.
pub fn run_nmse_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    run_nmse_sweep_with_threads(cfg, None)
}

pub fn run_nmse_sweep_with_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ResultTable> {
    cfg.validate()?;
    if cfg.experiment == ExperimentKind::SumRateVsDlSnr {
        return Err(Error::Config("run_nmse_sweep needs an NMSE experiment".into()));
    }
    let mut nmse_cfg = cfg.clone();
    nmse_cfg.estimators.retain(|e| *e != Estimator::PerfectCsi);
    if nmse_cfg.estimators.is_empty() {
        return Err(Error::Config("no NMSE-capable estimator configured".into()));
    }
    let ctx = TrialContext {
        cfg: &nmse_cfg,
        transform: build_beamspace_transform(cfg.n)?,
        qs: cfg.q.values(),
    };
    let (nq, ns, ne) = (ctx.qs.len(), cfg.snr_ul_db.len(), nmse_cfg.estimators.len());
    let per_trial = run_trials(cfg, threads, |t| ctx.nmse_trial(t))?;
    let acc = reduce(&per_trial, nq * ns * ne);
    let cell = |qi: usize, si: usize, ei: usize| &acc[(qi * ns + si) * ne + ei];

    let hash = cfg.config_hash();
    let row = |experiment: String, ei: usize, param: &str, value: f64, a: &Accumulator| ResultRow {
        experiment,
        estimator: nmse_cfg.estimators[ei].as_str().to_string(),
        sweep_param: param.to_string(),
        sweep_value: value,
        metric: "nmse".to_string(),
        mean: a.mean(),
        stderr: a.stderr(),
        trials: a.count,
        failures: a.failures,
        seed: cfg.seed,
        config_hash: hash.clone(),
    };
    let mut rows = Vec::new();
    match cfg.experiment {
        ExperimentKind::NmseVsSnr => {
            for (qi, &q) in ctx.qs.iter().enumerate() {
                let id = format!("nmse_vs_snr/Q={q}");
                for ei in 0..ne {
                    for (si, &snr) in cfg.snr_ul_db.iter().enumerate() {
                        rows.push(row(id.clone(), ei, "snr_ul_db", snr, cell(qi, si, ei)));
                    }
                }
            }
        }
        ExperimentKind::NmseVsQ => {
            for (si, &snr) in cfg.snr_ul_db.iter().enumerate() {
                let id = format!("nmse_vs_q/snr_ul_db={}", fmt_num(snr));
                for ei in 0..ne {
                    for (qi, &q) in ctx.qs.iter().enumerate() {
                        rows.push(row(id.clone(), ei, "Q", q as f64, cell(qi, si, ei)));
                    }
                }
            }
        }
        ExperimentKind::SumRateVsDlSnr => unreachable!(),
    }
    Ok(ResultTable { rows })
}

/// Runs a downlink sum-rate sweep.
pub fn run_sumrate_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    run_sumrate_sweep_with_threads(cfg, None)
}

pub fn run_sumrate_sweep_with_threads(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ResultTable> {
    cfg.validate()?;
    if cfg.experiment != ExperimentKind::SumRateVsDlSnr {
        return Err(Error::Config("run_sumrate_sweep needs a sum-rate experiment".into()));
    }
    let ctx = TrialContext {
        cfg,
        transform: build_beamspace_transform(cfg.n)?,
        qs: cfg.q.values(),
    };
    let (nq, ns, ne, nd) = (
        ctx.qs.len(),
        cfg.snr_ul_db.len(),
        cfg.estimators.len(),
        cfg.snr_dl_db.len(),
    );
    let per_trial = run_trials(cfg, threads, |t| ctx.sum_rate_trial(t))?;
    let acc = reduce(&per_trial, nq * ns * ne * nd);
    let hash = cfg.config_hash();
    let mut rows = Vec::new();
    for (qi, &q) in ctx.qs.iter().enumerate() {
        for (si, &snr) in cfg.snr_ul_db.iter().enumerate() {
            let id = format!("sum_rate_vs_dl_snr/Q={q}/snr_ul_db={}", fmt_num(snr));
            for (ei, est) in cfg.estimators.iter().enumerate() {
                for (di, &dl) in cfg.snr_dl_db.iter().enumerate() {
                    let a = &acc[((qi * ns + si) * ne + ei) * nd + di];
                    rows.push(ResultRow {
                        experiment: id.clone(),
                        estimator: est.as_str().to_string(),
                        sweep_param: "snr_dl_db".to_string(),
                        sweep_value: dl,
                        metric: "sum_rate_bps_hz".to_string(),
                        mean: a.mean(),
                        stderr: a.stderr(),
                        trials: a.count,
                        failures: a.failures,
                        seed: cfg.seed,
                        config_hash: hash.clone(),
                    });
                }
            }
        }
    }
    Ok(ResultTable { rows })
}

/// A curve counts as saturated when its last-segment slope is below this
/// fraction of its first-segment slope.
pub const SATURATION_SLOPE_RATIO: f64 = 0.1;

/// Slope of the last segment of `points` divided by the slope of the first.
///
/// `None` with fewer than three points or a flat first segment.
pub fn tail_slope_ratio(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let slope = |a: (f64, f64), b: (f64, f64)| (b.1 - a.1) / (b.0 - a.0);
    let head = slope(points[0], points[1]);
    let tail = slope(points[points.len() - 2], points[points.len() - 1]);
    if head == 0.0 || !head.is_finite() {
        return None;
    }
    Some(tail / head)
}

/// Dispatches on `cfg.experiment`.
pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<ResultTable> {
    match cfg.experiment {
        ExperimentKind::NmseVsSnr | ExperimentKind::NmseVsQ => run_nmse_sweep_with_threads(cfg, threads),
        ExperimentKind::SumRateVsDlSnr => run_sumrate_sweep_with_threads(cfg, threads),
    }
}
