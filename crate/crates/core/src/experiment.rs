//! Reproducible Monte Carlo harness: parameter sweeps for recovery
//! probability, the square-length counterexample demo, certificate audits,
//! and tail-bound audits, all serialized to CSV with provenance headers.
//!
//! Determinism contract: per-trial seeds are derived from (seed, cell, trial)
//! by a stable mixing function, results are sorted by (cell, trial) before
//! writing, and float columns are printed at 17 significant digits, so two
//! runs with the same config and seed produce byte-identical files apart from
//! the wall_time column.

use std::fs;
use std::io::Write as IoWrite;
use std::path::Path;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cert::{self, CertifyOptions};
use crate::concentration::{
    audit_golfing_bounds, audit_operator_deviation, audit_rademacher_tail, audit_steinhaus_tail,
    GolfingAuditParams, GolfingRunStats, TailAuditRecord,
};
use crate::cvec;
use crate::error::{Error, Result};
use crate::instance::{derive_seed, make_instance, InstanceParams};
use crate::solver::{self, SolverOptions};
use crate::spectral;

// ---------------------------------------------------------------------------
// CSV primitives
// ---------------------------------------------------------------------------

/// 17 significant digits: enough to round-trip any f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        "NaN" => Ok(f64::NAN),
        _ => s
            .parse::<f64>()
            .map_err(|e| Error::Csv { path: String::new(), message: format!("bad float {s:?}: {e}") }),
    }
}

fn opt_to_field<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

fn opt_f64_field(v: &Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn parse_opt_f64(s: &str) -> Result<Option<f64>> {
    if s.is_empty() { Ok(None) } else { parse_f64(s).map(Some) }
}

fn parse_opt_bool(s: &str) -> Result<Option<bool>> {
    match s {
        "" => Ok(None),
        "true" => Ok(Some(true)),
        "false" => Ok(Some(false)),
        other => Err(Error::Csv { path: String::new(), message: format!("bad bool {other:?}") }),
    }
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|e| Error::Csv { path: String::new(), message: format!("bad integer {s:?}: {e}") })
}

fn parse_u64(s: &str) -> Result<u64> {
    s.parse()
        .map_err(|e| Error::Csv { path: String::new(), message: format!("bad integer {s:?}: {e}") })
}

fn parse_bool(s: &str) -> Result<bool> {
    parse_opt_bool(s)?.ok_or_else(|| Error::Csv { path: String::new(), message: "empty bool".into() })
}

/// A typed record that knows its column order.
pub trait CsvRecord: Sized {
    const SCHEMA: &'static str;
    fn columns() -> Vec<&'static str>;
    fn to_row(&self) -> Vec<String>;
    fn from_row(row: &[String]) -> Result<Self>;
}

/// Writes pure RFC-4180 CSV: one header row plus one row per record.
pub fn emit_csv<R: CsvRecord>(records: &[R], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut writer = csv::Writer::from_writer(file);
    writer
        .write_record(R::columns())
        .map_err(|e| Error::Csv { path: path.display().to_string(), message: e.to_string() })?;
    for rec in records {
        writer
            .write_record(rec.to_row())
            .map_err(|e| Error::Csv { path: path.display().to_string(), message: e.to_string() })?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

/// Writes CSV with a provenance header block: schema version, config echo,
/// and seed as `#`-comment lines, then the header row and records.
pub fn emit_csv_with_provenance<R: CsvRecord>(
    records: &[R],
    path: &Path,
    provenance: &[(String, String)],
) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    writeln!(file, "# schema: {}", R::SCHEMA).map_err(|e| Error::io(path.display().to_string(), e))?;
    for (key, value) in provenance {
        writeln!(file, "# {key}: {value}").map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    let mut writer = csv::Writer::from_writer(file);
    writer
        .write_record(R::columns())
        .map_err(|e| Error::Csv { path: path.display().to_string(), message: e.to_string() })?;
    for rec in records {
        writer
            .write_record(rec.to_row())
            .map_err(|e| Error::Csv { path: path.display().to_string(), message: e.to_string() })?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ok(())
}

/// Reads records back, skipping `#`-comment lines.
pub fn read_csv<R: CsvRecord>(path: &Path) -> Result<Vec<R>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Csv { path: path.display().to_string(), message: e.to_string() })?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Csv { path: path.display().to_string(), message: e.to_string() })?;
        let fields: Vec<String> = row.iter().map(|s| s.to_string()).collect();
        out.push(R::from_row(&fields)?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Phase,
    Counterexample,
    Certify,
    Audit,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase" => Ok(Mode::Phase),
            "counterexample" => Ok(Mode::Counterexample),
            "certify" => Ok(Mode::Certify),
            "audit" => Ok(Mode::Audit),
            other => Err(Error::Config(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaPolicy {
    /// "recipe" (c / sqrt(ln(2n/eps)) with eps = 1/n), "fixed", or "sweep".
    pub policy: String,
    #[serde(default)]
    pub values: Vec<f64>,
    #[serde(default = "default_c_lambda")]
    pub c_lambda: f64,
}

fn default_c_lambda() -> f64 {
    solver::C_LAMBDA_DEFAULT
}

impl Default for LambdaPolicy {
    fn default() -> Self {
        Self { policy: "recipe".into(), values: Vec::new(), c_lambda: default_c_lambda() }
    }
}

impl LambdaPolicy {
    pub fn validate(&self) -> Result<()> {
        match self.policy.as_str() {
            "recipe" => Ok(()),
            "fixed" => {
                if self.values.len() == 1 && self.values[0] > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config("lambda.policy = \"fixed\" needs exactly one positive value".into()))
                }
            }
            "sweep" => {
                if !self.values.is_empty() && self.values.iter().all(|&v| v > 0.0) {
                    Ok(())
                } else {
                    Err(Error::Config("lambda.policy = \"sweep\" needs a nonempty list of positive values".into()))
                }
            }
            other => Err(Error::Config(format!(
                "lambda.policy must be recipe|fixed|sweep, got {other:?}"
            ))),
        }
    }

    pub fn values_for(&self, n: usize) -> Vec<f64> {
        match self.policy.as_str() {
            "recipe" => vec![solver::recipe_lambda(n, self.c_lambda, 1.0 / n as f64)],
            _ => self.values.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditConfig {
    #[serde(default = "default_weights_len")]
    pub weights_len: usize,
    #[serde(default = "default_u_grid")]
    pub u: Vec<f64>,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_tail_trials")]
    pub tail_trials: usize,
    #[serde(default = "default_dev_n")]
    pub deviation_n: usize,
    #[serde(default = "default_dev_m")]
    pub deviation_m: usize,
    #[serde(default = "default_dev_s")]
    pub deviation_s: usize,
    #[serde(default = "default_dev_delta")]
    pub deviation_delta: Vec<f64>,
    #[serde(default = "default_dev_trials")]
    pub deviation_trials: usize,
    #[serde(default = "default_golfing_runs")]
    pub golfing_runs: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
}

fn default_weights_len() -> usize { 64 }
fn default_u_grid() -> Vec<f64> { vec![1.0, 2.0, 3.0] }
fn default_gamma() -> f64 { 0.5 }
fn default_tail_trials() -> usize { 100_000 }
fn default_dev_n() -> usize { 64 }
fn default_dev_m() -> usize { 32 }
fn default_dev_s() -> usize { 4 }
fn default_dev_delta() -> Vec<f64> { vec![0.5] }
fn default_dev_trials() -> usize { 2000 }
fn default_golfing_runs() -> usize { 50 }
fn default_alpha() -> f64 { 5.0 }

impl Default for AuditConfig {
    fn default() -> Self {
        toml::from_str("").expect("all audit fields have defaults")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default = "default_n_grid")]
    pub n: Vec<usize>,
    #[serde(default = "default_m_grid")]
    pub m: Vec<usize>,
    #[serde(default = "default_k_grid")]
    pub k: Vec<usize>,
    #[serde(default = "default_gamma_grid")]
    pub gamma_c: Vec<f64>,
    #[serde(default)]
    pub lambda: LambdaPolicy,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub theory_mode: bool,
    /// Use the small desk block-size multiplier in certificate construction.
    #[serde(default = "default_true")]
    pub desk_constants: bool,
    /// Also build certificates during phase sweeps.
    #[serde(default)]
    pub certify: bool,
    #[serde(default)]
    pub jobs: usize,
    /// Counterexample lengths (perfect squares).
    #[serde(default = "default_ce_n")]
    pub counterexample_n: Vec<usize>,
    #[serde(default = "default_ce_lambda")]
    pub counterexample_lambda: Vec<f64>,
    #[serde(default)]
    pub audit: AuditConfig,
    #[serde(default = "default_solver_max_iter")]
    pub solver_max_iter: usize,
}

fn default_n_grid() -> Vec<usize> { vec![31] }
fn default_m_grid() -> Vec<usize> { vec![20] }
fn default_k_grid() -> Vec<usize> { vec![2] }
fn default_gamma_grid() -> Vec<f64> { vec![0.2] }
fn default_trials() -> usize { 20 }
fn default_true() -> bool { true }
fn default_ce_n() -> Vec<usize> { vec![9] }
fn default_ce_lambda() -> Vec<f64> { vec![0.5, 1.0, 2.0] }
fn default_solver_max_iter() -> usize { 50_000 }

impl ExperimentConfig {
    pub fn default_for(mode: Mode) -> Self {
        let mut config: ExperimentConfig =
            toml::from_str("mode = \"phase\"").expect("defaults are total");
        config.mode = mode;
        config
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        self.lambda.validate()?;
        match self.mode {
            Mode::Counterexample => {
                for &n in &self.counterexample_n {
                    let root = (n as f64).sqrt().round() as usize;
                    if root * root != n {
                        return Err(Error::Config(format!(
                            "counterexample length {n} is not a perfect square"
                        )));
                    }
                }
            }
            Mode::Phase | Mode::Certify => {
                if self.n.is_empty() || self.m.is_empty() || self.k.is_empty() || self.gamma_c.is_empty()
                {
                    return Err(Error::Config("grids must be nonempty".into()));
                }
                if self.theory_mode {
                    for &n in &self.n {
                        if !spectral::is_prime(n) {
                            return Err(Error::Config(format!(
                                "theory mode requires prime n, got {n} (next prime: {})",
                                spectral::next_prime(n)
                            )));
                        }
                    }
                }
                for &g in &self.gamma_c {
                    if !(0.0..1.0).contains(&g) {
                        return Err(Error::Config(format!("gamma_c {g} outside [0, 1)")));
                    }
                }
            }
            Mode::Audit => {
                if self.audit.deviation_m > self.audit.deviation_n
                    || self.audit.deviation_s > self.audit.deviation_n
                {
                    return Err(Error::Config(format!(
                        "audit deviation sizes (m={}, s={}) must not exceed n={}",
                        self.audit.deviation_m, self.audit.deviation_s, self.audit.deviation_n
                    )));
                }
            }
        }
        Ok(())
    }

    /// Deterministic one-line echo for provenance headers.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serialization cannot fail")
    }

    pub fn provenance(&self) -> Vec<(String, String)> {
        vec![
            ("config".to_string(), self.echo()),
            ("seed".to_string(), self.seed.to_string()),
        ]
    }

    fn thread_pool(&self) -> Result<rayon::ThreadPool> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if self.jobs > 0 {
            builder = builder.num_threads(self.jobs);
        }
        builder
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))
    }
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// One solver trial in a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub gamma_c: f64,
    pub lambda: f64,
    pub trial: usize,
    pub seed: u64,
    pub exact: Option<bool>,
    pub rel_err_x: Option<f64>,
    pub rel_err_f: Option<f64>,
    pub objective: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub certificate_pass: Option<bool>,
    pub error: Option<String>,
    pub wall_time: f64,
}

impl CsvRecord for TrialRecord {
    const SCHEMA: &'static str = "corrsense-phase-v1";

    fn columns() -> Vec<&'static str> {
        vec![
            "n", "m", "k", "gamma_c", "lambda", "trial", "seed", "exact", "rel_err_x",
            "rel_err_f", "objective", "iterations", "converged", "certificate_pass", "error",
            "wall_time",
        ]
    }

    fn to_row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.m.to_string(),
            self.k.to_string(),
            fmt_f64(self.gamma_c),
            fmt_f64(self.lambda),
            self.trial.to_string(),
            self.seed.to_string(),
            opt_to_field(&self.exact),
            opt_f64_field(&self.rel_err_x),
            opt_f64_field(&self.rel_err_f),
            opt_f64_field(&self.objective),
            opt_to_field(&self.iterations),
            opt_to_field(&self.converged),
            opt_to_field(&self.certificate_pass),
            self.error.clone().unwrap_or_default(),
            fmt_f64(self.wall_time),
        ]
    }

    fn from_row(row: &[String]) -> Result<Self> {
        if row.len() != 16 {
            return Err(Error::Csv { path: String::new(), message: format!("expected 16 fields, got {}", row.len()) });
        }
        Ok(TrialRecord {
            n: parse_usize(&row[0])?,
            m: parse_usize(&row[1])?,
            k: parse_usize(&row[2])?,
            gamma_c: parse_f64(&row[3])?,
            lambda: parse_f64(&row[4])?,
            trial: parse_usize(&row[5])?,
            seed: parse_u64(&row[6])?,
            exact: parse_opt_bool(&row[7])?,
            rel_err_x: parse_opt_f64(&row[8])?,
            rel_err_f: parse_opt_f64(&row[9])?,
            objective: parse_opt_f64(&row[10])?,
            iterations: if row[11].is_empty() { None } else { Some(parse_usize(&row[11])?) },
            converged: parse_opt_bool(&row[12])?,
            certificate_pass: parse_opt_bool(&row[13])?,
            error: if row[14].is_empty() { None } else { Some(row[14].clone()) },
            wall_time: parse_f64(&row[15])?,
        })
    }
}

/// One certificate-construction trial with per-condition margins.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifyRecord {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub gamma_c: f64,
    pub lambda: f64,
    pub trial: usize,
    pub seed: u64,
    pub cert_pass: Option<bool>,
    pub stationarity_residual: Option<f64>,
    pub sup_norm: Option<f64>,
    pub support_gradient: Option<f64>,
    pub offsupport_gradient: Option<f64>,
    pub offcorruption_bound: Option<f64>,
    pub full_rank_sigma_min: Option<f64>,
    pub schur_min_eig: Option<f64>,
    pub schur_floor: Option<f64>,
    pub golfing_residual: Option<f64>,
    pub residual_after_pinv: Option<f64>,
    pub gram_condition: Option<f64>,
    pub contraction_monotone: Option<bool>,
    pub solver_exact: Option<bool>,
    pub rel_err_x: Option<f64>,
    /// False exactly when a passing certificate failed to recover.
    pub sound: Option<bool>,
    pub error: Option<String>,
    pub wall_time: f64,
}

impl CsvRecord for CertifyRecord {
    const SCHEMA: &'static str = "corrsense-certify-v1";

    fn columns() -> Vec<&'static str> {
        vec![
            "n", "m", "k", "gamma_c", "lambda", "trial", "seed", "cert_pass",
            "stationarity_residual", "sup_norm", "support_gradient", "offsupport_gradient",
            "offcorruption_bound", "full_rank_sigma_min", "schur_min_eig", "schur_floor",
            "golfing_residual", "residual_after_pinv", "gram_condition", "contraction_monotone",
            "solver_exact", "rel_err_x", "sound", "error", "wall_time",
        ]
    }

    fn to_row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            self.m.to_string(),
            self.k.to_string(),
            fmt_f64(self.gamma_c),
            fmt_f64(self.lambda),
            self.trial.to_string(),
            self.seed.to_string(),
            opt_to_field(&self.cert_pass),
            opt_f64_field(&self.stationarity_residual),
            opt_f64_field(&self.sup_norm),
            opt_f64_field(&self.support_gradient),
            opt_f64_field(&self.offsupport_gradient),
            opt_f64_field(&self.offcorruption_bound),
            opt_f64_field(&self.full_rank_sigma_min),
            opt_f64_field(&self.schur_min_eig),
            opt_f64_field(&self.schur_floor),
            opt_f64_field(&self.golfing_residual),
            opt_f64_field(&self.residual_after_pinv),
            opt_f64_field(&self.gram_condition),
            opt_to_field(&self.contraction_monotone),
            opt_to_field(&self.solver_exact),
            opt_f64_field(&self.rel_err_x),
            opt_to_field(&self.sound),
            self.error.clone().unwrap_or_default(),
            fmt_f64(self.wall_time),
        ]
    }

    fn from_row(row: &[String]) -> Result<Self> {
        if row.len() != 25 {
            return Err(Error::Csv { path: String::new(), message: format!("expected 25 fields, got {}", row.len()) });
        }
        Ok(CertifyRecord {
            n: parse_usize(&row[0])?,
            m: parse_usize(&row[1])?,
            k: parse_usize(&row[2])?,
            gamma_c: parse_f64(&row[3])?,
            lambda: parse_f64(&row[4])?,
            trial: parse_usize(&row[5])?,
            seed: parse_u64(&row[6])?,
            cert_pass: parse_opt_bool(&row[7])?,
            stationarity_residual: parse_opt_f64(&row[8])?,
            sup_norm: parse_opt_f64(&row[9])?,
            support_gradient: parse_opt_f64(&row[10])?,
            offsupport_gradient: parse_opt_f64(&row[11])?,
            offcorruption_bound: parse_opt_f64(&row[12])?,
            full_rank_sigma_min: parse_opt_f64(&row[13])?,
            schur_min_eig: parse_opt_f64(&row[14])?,
            schur_floor: parse_opt_f64(&row[15])?,
            golfing_residual: parse_opt_f64(&row[16])?,
            residual_after_pinv: parse_opt_f64(&row[17])?,
            gram_condition: parse_opt_f64(&row[18])?,
            contraction_monotone: parse_opt_bool(&row[19])?,
            solver_exact: parse_opt_bool(&row[20])?,
            rel_err_x: parse_opt_f64(&row[21])?,
            sound: parse_opt_bool(&row[22])?,
            error: if row[23].is_empty() { None } else { Some(row[23].clone()) },
            wall_time: parse_f64(&row[24])?,
        })
    }
}

/// One row of the square-length counterexample demo.
#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleRecord {
    pub n: usize,
    pub lambda: f64,
    pub solver_objective: f64,
    pub comb_objective: f64,
    pub swap_objective: f64,
    pub exact: bool,
    /// True for the weights where non-recovery is asserted (lambda <= 1);
    /// larger weights are recorded without assertion.
    pub asserted: bool,
    pub wall_time: f64,
}

impl CsvRecord for CounterexampleRecord {
    const SCHEMA: &'static str = "corrsense-counterexample-v1";

    fn columns() -> Vec<&'static str> {
        vec![
            "n", "lambda", "solver_objective", "comb_objective", "swap_objective", "exact",
            "asserted", "wall_time",
        ]
    }

    fn to_row(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            fmt_f64(self.lambda),
            fmt_f64(self.solver_objective),
            fmt_f64(self.comb_objective),
            fmt_f64(self.swap_objective),
            self.exact.to_string(),
            self.asserted.to_string(),
            fmt_f64(self.wall_time),
        ]
    }

    fn from_row(row: &[String]) -> Result<Self> {
        if row.len() != 8 {
            return Err(Error::Csv { path: String::new(), message: format!("expected 8 fields, got {}", row.len()) });
        }
        Ok(CounterexampleRecord {
            n: parse_usize(&row[0])?,
            lambda: parse_f64(&row[1])?,
            solver_objective: parse_f64(&row[2])?,
            comb_objective: parse_f64(&row[3])?,
            swap_objective: parse_f64(&row[4])?,
            exact: parse_bool(&row[5])?,
            asserted: parse_bool(&row[6])?,
            wall_time: parse_f64(&row[7])?,
        })
    }
}

impl CsvRecord for TailAuditRecord {
    const SCHEMA: &'static str = "corrsense-audit-v1";

    fn columns() -> Vec<&'static str> {
        vec![
            "audit", "n", "m", "s_size", "delta", "u", "gamma", "trials", "empirical", "bound",
            "slack", "vacuous", "pass",
        ]
    }

    fn to_row(&self) -> Vec<String> {
        vec![
            self.audit.clone(),
            opt_to_field(&self.n),
            opt_to_field(&self.m),
            opt_to_field(&self.s_size),
            opt_f64_field(&self.delta),
            opt_f64_field(&self.u),
            opt_f64_field(&self.gamma),
            self.trials.to_string(),
            fmt_f64(self.empirical),
            fmt_f64(self.bound),
            fmt_f64(self.slack),
            self.vacuous.to_string(),
            self.pass.to_string(),
        ]
    }

    fn from_row(row: &[String]) -> Result<Self> {
        if row.len() != 13 {
            return Err(Error::Csv { path: String::new(), message: format!("expected 13 fields, got {}", row.len()) });
        }
        Ok(TailAuditRecord {
            audit: row[0].clone(),
            n: if row[1].is_empty() { None } else { Some(parse_usize(&row[1])?) },
            m: if row[2].is_empty() { None } else { Some(parse_usize(&row[2])?) },
            s_size: if row[3].is_empty() { None } else { Some(parse_usize(&row[3])?) },
            delta: parse_opt_f64(&row[4])?,
            u: parse_opt_f64(&row[5])?,
            gamma: parse_opt_f64(&row[6])?,
            trials: parse_usize(&row[7])?,
            empirical: parse_f64(&row[8])?,
            bound: parse_f64(&row[9])?,
            slack: parse_f64(&row[10])?,
            vacuous: parse_bool(&row[11])?,
            pass: parse_bool(&row[12])?,
        })
    }
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Cell {
    index: usize,
    n: usize,
    m: usize,
    k: usize,
    gamma_c: f64,
    lambda: f64,
}

fn expand_cells(config: &ExperimentConfig) -> Vec<Cell> {
    let mut cells = Vec::new();
    let mut index = 0;
    for &n in &config.n {
        for lambda in config.lambda.values_for(n) {
            for &m in &config.m {
                for &k in &config.k {
                    for &gamma_c in &config.gamma_c {
                        cells.push(Cell { index, n, m, k, gamma_c, lambda });
                        index += 1;
                    }
                }
            }
        }
    }
    cells
}

fn run_one_phase_trial(config: &ExperimentConfig, cell: Cell, trial: usize) -> TrialRecord {
    let start = Instant::now();
    let seed = derive_seed(config.seed, &[cell.index as u64, trial as u64]);
    let mut record = TrialRecord {
        n: cell.n,
        m: cell.m,
        k: cell.k,
        gamma_c: cell.gamma_c,
        lambda: cell.lambda,
        trial,
        seed,
        exact: None,
        rel_err_x: None,
        rel_err_f: None,
        objective: None,
        iterations: None,
        converged: None,
        certificate_pass: None,
        error: None,
        wall_time: 0.0,
    };
    let outcome = (|| -> Result<()> {
        let mut params = InstanceParams::new(cell.n, cell.m, cell.k, cell.gamma_c);
        params.theory_mode = config.theory_mode;
        let inst = make_instance(&params, seed)?;
        let mut opts = SolverOptions::new(cell.lambda);
        opts.max_iter = config.solver_max_iter;
        let mut result = solver::solve(&inst.operator, &inst.b, &opts)?;
        let verdict = result.judge(&inst.x0, &inst.f0);
        record.exact = Some(verdict.exact);
        record.rel_err_x = Some(verdict.rel_err_x);
        record.rel_err_f = Some(verdict.rel_err_f);
        record.objective = Some(result.objective);
        record.iterations = Some(result.iterations);
        record.converged = Some(result.converged);
        if config.certify {
            let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, &[0xCE47]));
            let cert = cert::build_certificate(
                &inst,
                cell.lambda,
                &CertifyOptions::default(),
                &mut rng,
            )?;
            record.certificate_pass = Some(cert.report.pass);
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        record.error = Some(e.to_string());
    }
    record.wall_time = start.elapsed().as_secs_f64();
    record
}

/// Sweeps the parameter grid; one row per (cell, trial), errors recorded
/// in-row, output order independent of the execution schedule.
pub fn run_phase_transition(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let cells = expand_cells(config);
    let work: Vec<(Cell, usize)> = cells
        .iter()
        .flat_map(|&cell| (0..config.trials).map(move |t| (cell, t)))
        .collect();
    let pool = config.thread_pool()?;
    let mut indexed: Vec<(usize, TrialRecord)> = pool.install(|| {
        work.par_iter()
            .map(|&(cell, trial)| {
                (
                    cell.index * config.trials + trial,
                    run_one_phase_trial(config, cell, trial),
                )
            })
            .collect()
    });
    indexed.sort_by_key(|(i, _)| *i);
    Ok(indexed.into_iter().map(|(_, r)| r).collect())
}

/// Recovery frequency per cell from trial rows; key is (n, m, k, gamma_c
/// bits, lambda bits) in deterministic order.
pub fn recovery_frequencies(
    records: &[TrialRecord],
) -> Vec<((usize, usize, usize, u64, u64), f64, usize)> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(usize, usize, usize, u64, u64), (usize, usize)> = BTreeMap::new();
    for r in records {
        let key = (r.n, r.m, r.k, r.gamma_c.to_bits(), r.lambda.to_bits());
        let entry = groups.entry(key).or_insert((0, 0));
        entry.1 += 1;
        if r.exact == Some(true) {
            entry.0 += 1;
        }
    }
    groups
        .into_iter()
        .map(|(key, (hits, total))| (key, hits as f64 / total as f64, total))
        .collect()
}

/// Runs the square-length demo: full sampling, comb signal, zero corruption.
/// For weights at or below one the comb ties or loses against routing its
/// mass into the corruption block, so recovery must fail; larger weights are
/// recorded without assertion.
pub fn run_counterexample(
    n: usize,
    lambdas: &[f64],
    solver_max_iter: usize,
) -> Result<Vec<CounterexampleRecord>> {
    let comb = spectral::dirac_comb(n)?;
    let op = spectral::PartialFourierOperator::full(n);
    let b = op.apply(&comb)?;
    let root = (n as f64).sqrt();
    let mut out = Vec::new();
    for &lambda in lambdas {
        let start = Instant::now();
        let mut opts = SolverOptions::new(lambda);
        opts.max_iter = solver_max_iter;
        let mut result = solver::solve(&op, &b, &opts)?;
        let verdict = result.judge(&comb, &cvec::zeros(n));
        out.push(CounterexampleRecord {
            n,
            lambda,
            solver_objective: result.objective,
            comb_objective: root,
            swap_objective: lambda * root,
            exact: verdict.exact,
            asserted: lambda <= 1.0,
            wall_time: start.elapsed().as_secs_f64(),
        });
    }
    Ok(out)
}

fn run_one_certify_trial(config: &ExperimentConfig, cell: Cell, trial: usize) -> CertifyRecord {
    let start = Instant::now();
    let seed = derive_seed(config.seed, &[cell.index as u64, trial as u64]);
    let mut record = CertifyRecord {
        n: cell.n,
        m: cell.m,
        k: cell.k,
        gamma_c: cell.gamma_c,
        lambda: cell.lambda,
        trial,
        seed,
        cert_pass: None,
        stationarity_residual: None,
        sup_norm: None,
        support_gradient: None,
        offsupport_gradient: None,
        offcorruption_bound: None,
        full_rank_sigma_min: None,
        schur_min_eig: None,
        schur_floor: None,
        golfing_residual: None,
        residual_after_pinv: None,
        gram_condition: None,
        contraction_monotone: None,
        solver_exact: None,
        rel_err_x: None,
        sound: None,
        error: None,
        wall_time: 0.0,
    };
    let outcome = (|| -> Result<()> {
        let mut params = InstanceParams::new(cell.n, cell.m, cell.k, cell.gamma_c);
        params.theory_mode = config.theory_mode;
        let inst = make_instance(&params, seed)?;

        let mut opts = SolverOptions::new(cell.lambda);
        opts.max_iter = config.solver_max_iter;
        let mut result = solver::solve(&inst.operator, &inst.b, &opts)?;
        let verdict = result.judge(&inst.x0, &inst.f0);
        record.solver_exact = Some(verdict.exact);
        record.rel_err_x = Some(verdict.rel_err_x);

        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, &[0xCE47]));
        let certify_opts = if config.desk_constants {
            CertifyOptions::default()
        } else {
            CertifyOptions { c_g: cert::C_G_THEORY, ..CertifyOptions::default() }
        };
        let cert = cert::build_certificate(&inst, cell.lambda, &certify_opts, &mut rng)?;
        record.cert_pass = Some(cert.report.pass);
        for cond in &cert.report.conditions {
            let value = Some(cond.value);
            match cond.name.as_str() {
                "stationarity-residual" => record.stationarity_residual = value,
                "sup-norm" => record.sup_norm = value,
                "support-gradient" => record.support_gradient = value,
                "offsupport-gradient" => record.offsupport_gradient = value,
                "offcorruption-bound" => record.offcorruption_bound = value,
                "full-rank" => record.full_rank_sigma_min = value,
                _ => {}
            }
        }
        record.schur_min_eig = Some(cert.report.schur_min_eig);
        record.schur_floor = Some(cert.report.schur_floor);
        record.golfing_residual = Some(cert.trace.phi_residual);
        record.residual_after_pinv = Some(cert.trace.w_after_pinv);
        record.gram_condition = Some(cert.trace.gram_condition);
        record.contraction_monotone = Some(is_strictly_contracting(&cert.trace.w_norms));
        record.sound = Some(!(cert.report.pass && !verdict.exact));
        Ok(())
    })();
    if let Err(e) = outcome {
        record.error = Some(e.to_string());
    }
    record.wall_time = start.elapsed().as_secs_f64();
    record
}

/// Strictly decreasing while the previous residual is nonzero.
pub fn is_strictly_contracting(w_norms: &[f64]) -> bool {
    w_norms.windows(2).all(|w| w[0] <= 1e-14 || w[1] < w[0])
}

/// Certificate sweep: golfing, correction, verification, solver cross-check.
pub fn run_certificate_audit(config: &ExperimentConfig) -> Result<Vec<CertifyRecord>> {
    config.validate()?;
    let cells = expand_cells(config);
    let work: Vec<(Cell, usize)> = cells
        .iter()
        .flat_map(|&cell| (0..config.trials).map(move |t| (cell, t)))
        .collect();
    let pool = config.thread_pool()?;
    let mut indexed: Vec<(usize, CertifyRecord)> = pool.install(|| {
        work.par_iter()
            .map(|&(cell, trial)| {
                (
                    cell.index * config.trials + trial,
                    run_one_certify_trial(config, cell, trial),
                )
            })
            .collect()
    });
    indexed.sort_by_key(|(i, _)| *i);
    Ok(indexed.into_iter().map(|(_, r)| r).collect())
}

/// All tail audits configured for audit mode, keyed by output file stem.
pub fn run_concentration_audits(
    config: &ExperimentConfig,
) -> Result<Vec<(String, Vec<TailAuditRecord>)>> {
    config.validate()?;
    let audit = &config.audit;
    let mut out = Vec::new();

    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(config.seed, &[1]));
    let mut steinhaus = Vec::new();
    for &u in &audit.u {
        steinhaus.push(audit_steinhaus_tail(
            audit.weights_len,
            u,
            audit.gamma,
            audit.tail_trials,
            &mut rng,
        )?);
    }
    out.push(("steinhaus".to_string(), steinhaus));

    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(config.seed, &[2]));
    let mut rademacher = Vec::new();
    for &u in &audit.u {
        rademacher.push(audit_rademacher_tail(
            audit.weights_len,
            u,
            audit.tail_trials,
            &mut rng,
        )?);
    }
    out.push(("rademacher".to_string(), rademacher));

    let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(config.seed, &[3]));
    let mut deviation = Vec::new();
    for &delta in &audit.deviation_delta {
        deviation.push(audit_operator_deviation(
            audit.deviation_n,
            audit.deviation_m,
            audit.deviation_s,
            delta,
            audit.deviation_trials,
            &mut rng,
        )?);
    }
    out.push(("operator_deviation".to_string(), deviation));

    // golfing ensemble on the first grid cell
    let n = config.n[0];
    let m = config.m[0];
    let k = config.k[0];
    let gamma_c = config.gamma_c[0];
    let lambda = config.lambda.values_for(n)[0];
    let mut runs = Vec::new();
    let mut desk_mode = false;
    for t in 0..audit.golfing_runs {
        let seed = derive_seed(config.seed, &[4, t as u64]);
        let params = InstanceParams::new(n, m, k, gamma_c);
        let inst = make_instance(&params, seed)?;
        let mut rng = ChaCha12Rng::seed_from_u64(derive_seed(seed, &[0xCE47]));
        let cert = cert::build_certificate(&inst, lambda, &CertifyOptions::default(), &mut rng)?;
        desk_mode |= cert.plan.desk_mode || cert.plan.clipped;
        runs.push(GolfingRunStats {
            trace: cert.trace,
            correction_norm: Some(cvec::norm_l2(&cert.correction_y)),
        });
    }
    let params = GolfingAuditParams {
        n,
        k,
        gamma_c,
        lambda,
        c_lambda: config.lambda.c_lambda,
        alpha: audit.alpha,
        epsilon: None,
        desk_mode,
    };
    out.push(("golfing".to_string(), audit_golfing_bounds(&runs, &params)?));

    Ok(out)
}
