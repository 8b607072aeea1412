//! The `avn` command-line front end.
//!
//! Configuration comes from an optional JSON document (`--config`), with
//! every field optional; flags override file values. Human-readable tables go
//! to standard output and the machine-readable document (JSON, or CSV for
//! `scan-delay`) goes to `--out` when given.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::apparatus::{
    coincidence_curve, extract_visibility, resonance_symmetry, write_curve_csv, DelayScanConfig,
};
use crate::error::Error;
use crate::harness::{
    aggregate, exact_term_values, fig3_dataset, fit_per_dof_visibilities, reference_dataset,
    run_avn, AvnReport, CompositeMode, DEFAULT_EVENTS_PER_SETTING,
};
use crate::lhv::{
    classical_bound, extended_bound, violation_margin, BoundReport, ExtendedBoundReport,
};
use crate::linalg::expectation;
use crate::observables::{cabello_operator, terms};
use crate::states::{apply_noise, hyper_state, HyperState, NoiseModel, PiFlavor};

/// Exit status for usage and validation errors.
pub const EXIT_USAGE: i32 = 2;
/// Exit status for runtime failures.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StateConfig {
    pub pi_flavor: PiFlavor,
    pub theta: f64,
    pub phi: f64,
}

impl Default for StateConfig {
    fn default() -> Self {
        StateConfig {
            pi_flavor: PiFlavor::Psi,
            theta: PI,
            phi: PI,
        }
    }
}

/// Everything a command needs; each field has a documented default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Defaults to `|Ψ⁻⟩ ⊗ |ψ⁻⟩`.
    pub state: StateConfig,
    /// Defaults to per-DOF Werner noise fitted to the published single-DOF terms.
    pub noise: NoiseModel,
    pub n_per_setting: u64,
    pub seed: u64,
    pub composite_mode: CompositeMode,
    /// Read from config files but never echoed into output documents.
    #[serde(skip_serializing)]
    pub output_path: Option<PathBuf>,
    pub scan: DelayScanConfig,
}

/// Werner visibilities fitted to the published single-DOF terms.
pub fn fitted_noise() -> NoiseModel {
    let (v_pi, v_k) = fit_per_dof_visibilities(&fig3_dataset()).expect("complete dataset");
    NoiseModel::WernerPerDof { v_pi, v_k }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            state: StateConfig::default(),
            noise: fitted_noise(),
            n_per_setting: DEFAULT_EVENTS_PER_SETTING,
            seed: 1,
            composite_mode: CompositeMode::Factorized,
            output_path: None,
            scan: DelayScanConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), Error> {
        self.noise.validate()?;
        self.scan.validate()?;
        if self.n_per_setting == 0 {
            return Err(Error::InvalidArgument(
                "n_per_setting must be positive".into(),
            ));
        }
        if !self.state.theta.is_finite() || !self.state.phi.is_finite() {
            return Err(Error::InvalidArgument("phases must be finite".into()));
        }
        Ok(())
    }

    pub fn hyper_state(&self) -> HyperState {
        hyper_state(self.state.pi_flavor, self.state.theta, self.state.phi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NoiseKind {
    Uniform,
    Werner,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Factorized,
    Joint,
}

#[derive(Debug, Parser)]
#[command(
    name = "avn",
    version,
    about = "All-versus-nothing test on hyperentangled photon pairs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// JSON configuration document.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_name = "N")]
    pub n_per_setting: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub noise_kind: Option<NoiseKind>,
    /// Uniform visibility (also sets both per-DOF visibilities with `--noise-kind werner`).
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub v: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub v_pi: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub v_k: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub composite_mode: Option<ModeArg>,
    /// Where to write the machine-readable output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the configured state's amplitudes and density-matrix diagnostics.
    State,
    /// Exact expectation of each term and of the full operator.
    Expect,
    /// Enumerate local hidden-variable assignments.
    LhvBound,
    /// Coincidence rate versus path delay.
    ScanDelay,
    /// Simulate the counting experiment for all nine terms.
    RunAvn,
    /// Aggregate a built-in reference dataset (`fig3` or `note-in-proof`).
    Report { dataset: String },
}

/// Merges the config file (if any) with flag overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Error::InvalidArgument(format!("cannot read config {}: {e}", path.display()))
            })?;
            serde_json::from_str(&text).map_err(|e| {
                Error::InvalidArgument(format!("malformed config {}: {e}", path.display()))
            })?
        }
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.n_per_setting {
        cfg.n_per_setting = n;
    }
    if let Some(t) = cli.theta {
        cfg.state.theta = t;
    }
    if let Some(p) = cli.phi {
        cfg.state.phi = p;
    }
    if let Some(m) = cli.composite_mode {
        cfg.composite_mode = match m {
            ModeArg::Factorized => CompositeMode::Factorized,
            ModeArg::Joint => CompositeMode::Joint,
        };
    }
    if let Some(path) = &cli.out {
        cfg.output_path = Some(path.clone());
    }

    let kind = cli.noise_kind.or_else(|| {
        if cli.v_pi.is_some() || cli.v_k.is_some() {
            Some(NoiseKind::Werner)
        } else if cli.v.is_some() {
            Some(NoiseKind::Uniform)
        } else {
            None
        }
    });
    match kind {
        Some(NoiseKind::Uniform) => {
            let v = cli.v.unwrap_or(match cfg.noise {
                NoiseModel::UniformVisibility { v } => v,
                NoiseModel::WernerPerDof { .. } => 1.0,
            });
            cfg.noise = NoiseModel::UniformVisibility { v };
        }
        Some(NoiseKind::Werner) => {
            let (base_pi, base_k) = match cfg.noise {
                NoiseModel::WernerPerDof { v_pi, v_k } => (v_pi, v_k),
                NoiseModel::UniformVisibility { .. } => match fitted_noise() {
                    NoiseModel::WernerPerDof { v_pi, v_k } => (v_pi, v_k),
                    NoiseModel::UniformVisibility { v } => (v, v),
                },
            };
            cfg.noise = NoiseModel::WernerPerDof {
                v_pi: cli.v_pi.or(cli.v).unwrap_or(base_pi),
                v_k: cli.v_k.or(cli.v).unwrap_or(base_k),
            };
        }
        None => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Serialize)]
struct StateDocument {
    label: String,
    amplitudes: Vec<[f64; 2]>,
    noise: NoiseModel,
    trace: f64,
    purity: f64,
    min_eigenvalue: f64,
}

#[derive(Serialize)]
struct TermValue {
    id: u8,
    label: String,
    sign: i8,
    value: f64,
}

#[derive(Serialize)]
struct ExpectDocument {
    state: String,
    noise: NoiseModel,
    terms: Vec<TermValue>,
    o_value: f64,
    violation_margin: f64,
}

#[derive(Serialize)]
struct LhvDocument {
    factorized: BoundReport,
    independent_composites: ExtendedBoundReport,
}

#[derive(Serialize)]
struct TermRow {
    id: u8,
    label: String,
    value: f64,
    stderr: f64,
    n: Option<u64>,
}

/// Serialized form of an [`AvnReport`].
#[derive(Serialize)]
pub struct AvnDocument {
    terms: Vec<TermRow>,
    o_value: f64,
    o_sigma: f64,
    /// `null` when the combined error is zero.
    n_sigma: Option<f64>,
    violated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<RunConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dataset: Option<String>,
}

impl AvnDocument {
    pub fn new(report: &AvnReport, config: Option<&RunConfig>, dataset: Option<&str>) -> Self {
        let specs = terms();
        AvnDocument {
            terms: report
                .estimates
                .iter()
                .map(|e| TermRow {
                    id: e.term_id,
                    label: specs[usize::from(e.term_id) - 1].label(),
                    value: e.value,
                    stderr: e.stderr,
                    n: e.n,
                })
                .collect(),
            o_value: report.o_value,
            o_sigma: report.o_sigma,
            n_sigma: report.n_sigma.is_finite().then_some(report.n_sigma),
            violated: report.violated,
            config: config.cloned(),
            seed: config.map(|c| c.seed),
            dataset: dataset.map(str::to_owned),
        }
    }
}

fn write_output(cfg: &RunConfig, bytes: &[u8]) -> Result<(), Error> {
    if let Some(path) = &cfg.output_path {
        fs::write(path, bytes)
            .map_err(|e| Error::Numerical(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn to_json<T: Serialize>(doc: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(doc).expect("serializable");
    s.push(b'\n');
    s
}

fn print_report(out: &mut dyn Write, report: &AvnReport) -> std::io::Result<()> {
    let specs = terms();
    writeln!(
        out,
        "{:>3}  {:<26} {:>9}  {:>8}  {:>9}",
        "id", "term", "value", "stderr", "n"
    )?;
    for e in &report.estimates {
        let n = e.n.map_or_else(|| "-".to_string(), |n| n.to_string());
        writeln!(
            out,
            "{:>3}  {:<26} {:>+9.4}  {:>8.4}  {:>9}",
            e.term_id,
            specs[usize::from(e.term_id) - 1].label(),
            e.value,
            e.stderr,
            n
        )?;
    }
    writeln!(out, "O = {:.4} ± {:.4}", report.o_value, report.o_sigma)?;
    writeln!(
        out,
        "excess over bound 7: {:+.4} ({:.1} sigma); violated: {}",
        violation_margin(report.o_value),
        report.n_sigma,
        report.violated
    )
}

fn cmd_state(cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<u8>, Error> {
    let st = cfg.hyper_state();
    let rho = apply_noise(&st, &cfg.noise)?;
    let eig = rho.eigenvalues();
    let doc = StateDocument {
        label: st.label(),
        amplitudes: st.ket().amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        noise: cfg.noise,
        trace: rho.trace(),
        purity: rho.purity(),
        min_eigenvalue: eig.first().copied().unwrap_or(0.0),
    };
    let io = |e: std::io::Error| Error::Numerical(e.to_string());
    writeln!(out, "state {}", doc.label).map_err(io)?;
    writeln!(out, "index  π₁k₁π₂k₂  amplitude").map_err(io)?;
    for (i, a) in st.ket().amplitudes().iter().enumerate() {
        if a.norm() > 1e-12 {
            writeln!(out, "{i:>5}  {i:04b}      {:+.6}{:+.6}i", a.re, a.im).map_err(io)?;
        }
    }
    writeln!(out, "noise {:?}", cfg.noise).map_err(io)?;
    writeln!(
        out,
        "trace {:.12}  purity {:.12}  min eigenvalue {:.3e}",
        doc.trace, doc.purity, doc.min_eigenvalue
    )
    .map_err(io)?;
    Ok(to_json(&doc))
}

fn cmd_expect(cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<u8>, Error> {
    let st = cfg.hyper_state();
    let rho = apply_noise(&st, &cfg.noise)?;
    let values = exact_term_values(&rho)?;
    let o_value = expectation(&cabello_operator().matrix, &rho)?;
    let doc = ExpectDocument {
        state: st.label(),
        noise: cfg.noise,
        terms: terms()
            .iter()
            .zip(&values)
            .map(|(t, &value)| TermValue {
                id: t.id,
                label: t.label(),
                sign: t.sign,
                value,
            })
            .collect(),
        o_value,
        violation_margin: violation_margin(o_value),
    };
    let io = |e: std::io::Error| Error::Numerical(e.to_string());
    writeln!(
        out,
        "{:>3}  {:>4}  {:<26} {:>10}",
        "id", "sign", "term", "<term>"
    )
    .map_err(io)?;
    for t in &doc.terms {
        writeln!(
            out,
            "{:>3}  {:>+4}  {:<26} {:>+10.6}",
            t.id, t.sign, t.label, t.value
        )
        .map_err(io)?;
    }
    writeln!(
        out,
        "<O> = {:.6}  (bound 7, margin {:+.6})",
        o_value, doc.violation_margin
    )
    .map_err(io)?;
    Ok(to_json(&doc))
}

fn cmd_lhv(out: &mut dyn Write) -> Result<Vec<u8>, Error> {
    let doc = LhvDocument {
        factorized: classical_bound(),
        independent_composites: extended_bound(),
    };
    let io = |e: std::io::Error| Error::Numerical(e.to_string());
    let f = &doc.factorized;
    writeln!(out, "deterministic assignments: {}", f.assignments).map_err(io)?;
    writeln!(out, "max O = {}  min O = {}", f.max_value, f.min_value).map_err(io)?;
    writeln!(out, "value  count").map_err(io)?;
    for (v, c) in &f.histogram {
        writeln!(out, "{v:>5}  {c:>5}").map_err(io)?;
    }
    writeln!(out, "maximizers: {}", f.maximizers.len()).map_err(io)?;
    let x = &doc.independent_composites;
    writeln!(
        out,
        "independent composites {}: {} assignments, max O = {}, min O = {}",
        x.composites.join(","),
        x.assignments,
        x.max_value,
        x.min_value
    )
    .map_err(io)?;
    Ok(to_json(&doc))
}

fn cmd_scan(cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<u8>, Error> {
    let st = cfg.hyper_state();
    let symmetry = resonance_symmetry(&st);
    let curve = coincidence_curve(symmetry, &cfg.scan)?;
    let io = |e: std::io::Error| Error::Numerical(e.to_string());
    let kind = if symmetry > 0.0 {
        "peak"
    } else if symmetry < 0.0 {
        "dip"
    } else {
        "flat"
    };
    writeln!(
        out,
        "state {}  resonance {kind} (symmetry {symmetry:+.6})",
        st.label()
    )
    .map_err(io)?;
    writeln!(
        out,
        "coherence length {:.3} um, baseline {} Hz, {} points",
        cfg.scan.coherence_length_um,
        cfg.scan.baseline_rate,
        curve.len()
    )
    .map_err(io)?;
    match extract_visibility(&curve) {
        Ok(v) => writeln!(out, "extracted visibility {v:.6}").map_err(io)?,
        Err(e) => writeln!(out, "extracted visibility unavailable: {e}").map_err(io)?,
    }
    let mut csv = Vec::new();
    write_curve_csv(&mut csv, &curve).map_err(io)?;
    Ok(csv)
}

fn cmd_run_avn(cfg: &RunConfig, out: &mut dyn Write) -> Result<Vec<u8>, Error> {
    let report = run_avn(
        &cfg.hyper_state(),
        &cfg.noise,
        cfg.n_per_setting,
        cfg.seed,
        cfg.composite_mode,
    )?;
    print_report(out, &report).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(to_json(&AvnDocument::new(&report, Some(cfg), None)))
}

fn cmd_report(dataset: &str, out: &mut dyn Write) -> Result<Vec<u8>, Error> {
    let data = reference_dataset(dataset)?;
    let report = aggregate(&data).map_err(|e| match e {
        Error::IncompleteTerms(msg) => Error::IncompleteTerms(format!(
            "dataset '{dataset}' has {} of 9 terms, so O cannot be formed ({msg})",
            data.len()
        )),
        other => other,
    })?;
    print_report(out, &report).map_err(|e| Error::Numerical(e.to_string()))?;
    Ok(to_json(&AvnDocument::new(&report, None, Some(dataset))))
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) => EXIT_USAGE,
        _ => EXIT_FAILURE,
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let cfg = match resolve_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let result = match &cli.command {
        Command::State => cmd_state(&cfg, out),
        Command::Expect => cmd_expect(&cfg, out),
        Command::LhvBound => cmd_lhv(out),
        Command::ScanDelay => cmd_scan(&cfg, out),
        Command::RunAvn => cmd_run_avn(&cfg, out),
        Command::Report { dataset } => cmd_report(dataset, out),
    };
    match result.and_then(|bytes| write_output(&cfg, &bytes)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
