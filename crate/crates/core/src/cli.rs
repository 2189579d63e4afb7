//! Command-line front end.
//!
//! Each command resolves a [`RunConfig`] (JSON file, then flag overrides),
//! writes its data file plus a `<name>.provenance.json` sidecar into the
//! output directory, and echoes the provenance block on stdout.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ctcr::stability_table;
use crate::dde::{growth_rate, simulate, History, DEFAULT_STEP};
use crate::error::Error;
use crate::optimize::{optimal_delay, optimal_delay_auto, optimize_joint, sweep_gain_surface, Range};
use crate::quasipoly::extract_pq;
use crate::rootfinder::{find_roots, zero_curves, Curve, Region, RightmostScan};
use crate::rotor::{boundary_chart, build_delay_system, classify_uncontrolled, ControlGains, RotorParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CERTIFICATION: i32 = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Everything a command needs. Unknown keys are rejected; missing keys take
/// the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub rotor: RotorParams,
    pub gains: ControlGains,
    pub tau: f64,
    /// Upper end of the delay range scanned by `crossings` / `intervals`.
    pub tau_max: f64,
    pub region: Region,
    pub grid_step: f64,
    /// Also dump the `Re = 0` / `Im = 0` level-curve points for `roots`.
    pub zero_curves: bool,
    pub x0: [f64; 4],
    pub psi_end: f64,
    pub step: f64,
    pub history: History,
    /// Window for a growth-rate fit reported by `simulate`.
    pub growth_window: Option<(f64, f64)>,
    pub sweep_a: Range,
    pub sweep_b: Range,
    /// Delay interval for `optimize-delay`; the first stable interval when absent.
    pub delay_interval: Option<(f64, f64)>,
    pub budget: usize,
    pub sigma_range: (f64, f64),
    pub omega_f_range: (f64, f64),
    pub n_points: usize,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rotor: RotorParams::default(),
            gains: ControlGains::new(6.75e-4, 0.6e-4),
            tau: 0.2296,
            tau_max: 10.0,
            region: Region::rotor_default(),
            grid_step: 0.01,
            zero_curves: false,
            x0: [0.0, 0.01, 0.0, 0.0],
            psi_end: 80.0,
            step: DEFAULT_STEP,
            history: History::Constant,
            growth_window: None,
            sweep_a: Range::new(5e-4, 9e-4, 41),
            sweep_b: Range::new(0.0, 2e-4, 41),
            delay_interval: None,
            budget: 200,
            sigma_range: (0.0, 0.2),
            omega_f_range: (0.0, 3.0),
            n_points: 101,
            format: Format::Csv,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn scan(&self) -> RightmostScan {
        RightmostScan {
            region: self.region,
            grid_step: self.grid_step,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pitchflap",
    version,
    about = "Delayed-feedback stability analysis of rotor pitch-flap dynamics"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Divergence and flutter boundary curves of the uncontrolled rotor.
    Boundaries,
    /// Stability label of the uncontrolled rotor at (sigma, nu1_sq).
    Classify,
    /// Imaginary-axis crossings and their delays.
    Crossings,
    /// Delay intervals with their unstable-root counts.
    Intervals,
    /// Characteristic roots in a rectangle of the s-plane.
    Roots,
    /// Time response of the delayed closed loop.
    Simulate,
    /// Spectral abscissa over a grid of gains at fixed delay.
    SweepGains,
    /// Delay minimizing the spectral abscissa.
    OptimizeDelay,
    /// Local descent over gains and delay together.
    Optimize,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Boundaries => "boundaries",
            Self::Classify => "classify",
            Self::Crossings => "crossings",
            Self::Intervals => "intervals",
            Self::Roots => "roots",
            Self::Simulate => "simulate",
            Self::SweepGains => "sweep-gains",
            Self::OptimizeDelay => "optimize-delay",
            Self::Optimize => "optimize",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub sigma: Option<f64>,
    #[arg(long = "nu1-sq", global = true)]
    pub nu1_sq: Option<f64>,
    /// Displacement gain.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Rate gain.
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long = "tau-max", global = true)]
    pub tau_max: Option<f64>,
    /// re_min,re_max,im_min,im_max
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub region: Option<Vec<f64>>,
    #[arg(long = "grid-step", global = true)]
    pub grid_step: Option<f64>,
    #[arg(long = "zero-curves", global = true)]
    pub zero_curves: bool,
    /// theta,beta,theta_dot,beta_dot
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    #[arg(long = "psi-end", global = true)]
    pub psi_end: Option<f64>,
    #[arg(long, global = true)]
    pub step: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub history: Option<HistoryArg>,
    /// lo,hi of the growth-rate fit
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
    /// lo,hi,n
    #[arg(long = "a-range", global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub a_range: Option<Vec<f64>>,
    /// lo,hi,n
    #[arg(long = "b-range", global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub b_range: Option<Vec<f64>>,
    /// lo,hi
    #[arg(long = "interval", global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub interval: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub budget: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HistoryArg {
    Constant,
    Zero,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Numeric(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => EXIT_CONFIG,
            Self::Io(_) => EXIT_FAILURE,
            Self::Numeric(e) => match e {
                Error::InvalidParameter { .. } => EXIT_CONFIG,
                Error::Certification(_) | Error::BoundaryRoot | Error::NonSimpleRoot { .. } => EXIT_CERTIFICATION,
                _ => EXIT_FAILURE,
            },
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::Io(_) => "io",
            Self::Numeric(e) => match e {
                Error::InvalidParameter { .. } => "config",
                Error::Certification(_) | Error::BoundaryRoot | Error::NonSimpleRoot { .. } => "certification",
                Error::NoStableInterval(_) => "no-stable-interval",
                Error::Window(_) => "window",
                _ => "numeric",
            },
        }
    }

    pub fn to_json(&self) -> Value {
        let message = match self {
            Self::Config(m) | Self::Io(m) => m.clone(),
            Self::Numeric(e) => e.to_string(),
        };
        json!({ "error": self.category(), "exit_code": self.exit_code(), "message": message })
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Numeric(e)
    }
}

fn arity(v: &[f64], n: usize, flag: &str) -> Result<(), CliError> {
    if v.len() == n {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "--{flag} takes {n} comma-separated numbers, got {}",
            v.len()
        )))
    }
}

fn pair(v: &[f64], flag: &str) -> Result<(f64, f64), CliError> {
    arity(v, 2, flag)?;
    Ok((v[0], v[1]))
}

fn range(v: &[f64], flag: &str) -> Result<Range, CliError> {
    arity(v, 3, flag)?;
    let n = v[2];
    if !(n >= 0.0 && n.fract() == 0.0) {
        return Err(CliError::Config(format!(
            "--{flag}: point count must be a non-negative integer, got {n}"
        )));
    }
    Ok(Range::new(v[0], v[1], n as usize))
}

/// Reads the config file (if any) and applies flag overrides.
pub fn resolve_config(o: &Overrides) -> Result<RunConfig, CliError> {
    let mut c = match &o.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = o.format {
        c.format = v;
    }
    if let Some(v) = o.sigma {
        c.rotor.sigma = v;
    }
    if let Some(v) = o.nu1_sq {
        c.rotor.nu1_sq = v;
    }
    if let Some(v) = o.a {
        c.gains.a = v;
    }
    if let Some(v) = o.b {
        c.gains.b = v;
    }
    if let Some(v) = o.tau {
        c.tau = v;
    }
    if let Some(v) = o.tau_max {
        c.tau_max = v;
    }
    if let Some(v) = &o.region {
        arity(v, 4, "region")?;
        c.region = Region {
            re_min: v[0],
            re_max: v[1],
            im_min: v[2],
            im_max: v[3],
        };
    }
    if let Some(v) = o.grid_step {
        c.grid_step = v;
    }
    c.zero_curves |= o.zero_curves;
    if let Some(v) = &o.x0 {
        arity(v, 4, "x0")?;
        c.x0 = [v[0], v[1], v[2], v[3]];
    }
    if let Some(v) = o.psi_end {
        c.psi_end = v;
    }
    if let Some(v) = o.step {
        c.step = v;
    }
    if let Some(v) = o.history {
        c.history = match v {
            HistoryArg::Constant => History::Constant,
            HistoryArg::Zero => History::Zero,
        };
    }
    if let Some(v) = &o.window {
        c.growth_window = Some(pair(v, "window")?);
    }
    if let Some(v) = &o.a_range {
        c.sweep_a = range(v, "a-range")?;
    }
    if let Some(v) = &o.b_range {
        c.sweep_b = range(v, "b-range")?;
    }
    if let Some(v) = &o.interval {
        c.delay_interval = Some(pair(v, "interval")?);
    }
    if let Some(v) = o.budget {
        c.budget = v;
    }
    c.rotor.validate()?;
    c.region.validate()?;
    Ok(c)
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

type Rows = Vec<Vec<String>>;

fn csv_bytes(header: &[&str], rows: &Rows) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.to_string()))
}

fn f(v: f64) -> String {
    let m = v.abs();
    if m != 0.0 && !(1e-4..1e15).contains(&m) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// One data artifact: CSV table plus the JSON form of the same result.
struct Artifact {
    stem: String,
    header: Vec<String>,
    rows: Rows,
    json: Value,
}

impl Artifact {
    fn new(stem: &str, header: &[&str], rows: Rows, json: Value) -> Self {
        Self {
            stem: stem.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows,
            json,
        }
    }
}

/// Command result: artifacts to write, a summary for the provenance block,
/// and an optional numerical failure that keeps the partial output.
struct Outcome {
    artifacts: Vec<Artifact>,
    summary: Value,
    failure: Option<Error>,
}

fn boundaries(c: &RunConfig) -> Result<Outcome, CliError> {
    let chart = boundary_chart(&c.rotor, c.sigma_range, c.omega_f_range, c.n_points);
    let div = chart.divergence.iter().map(|p| vec![f(p.sigma), f(p.nu1_sq)]).collect();
    let flu = chart
        .flutter
        .iter()
        .map(|p| vec![f(p.omega_f), f(p.nu1_sq), f(p.sigma)])
        .collect();
    Ok(Outcome {
        artifacts: vec![
            Artifact::new(
                "boundaries_divergence",
                &["sigma", "nu1_sq"],
                div,
                json!(chart.divergence),
            ),
            Artifact::new(
                "boundaries_flutter",
                &["omega_f", "nu1_sq", "sigma"],
                flu,
                json!(chart.flutter),
            ),
        ],
        summary: json!({ "divergence_points": chart.divergence.len(), "flutter_points": chart.flutter.len() }),
        failure: None,
    })
}

fn classify(c: &RunConfig) -> Result<Outcome, CliError> {
    let cl = classify_uncontrolled(&c.rotor)?;
    let row = vec![
        cl.label.to_string(),
        cl.divergent_modes.to_string(),
        cl.flutter_pairs.to_string(),
        cl.marginal.to_string(),
    ];
    Ok(Outcome {
        artifacts: vec![Artifact::new(
            "classify",
            &["label", "divergent_modes", "flutter_pairs", "marginal"],
            vec![row],
            json!(cl),
        )],
        summary: json!({ "label": cl.label.to_string() }),
        failure: None,
    })
}

fn table_outcome(c: &RunConfig, intervals: bool) -> Result<Outcome, CliError> {
    let sys = build_delay_system(&c.rotor, c.gains, 0.0)?;
    let table = stability_table(&sys, c.tau_max)?;
    let failure = (!table.certified)
        .then(|| Error::Certification("degenerate crossing or negative root count in the stability table".into()));
    let summary = json!({
        "nu_zero": table.nu_zero,
        "stable_intervals": table.stable_intervals,
        "certified": table.certified,
        "manual_review": table.manual_review,
    });
    let art = if intervals {
        let rows = table
            .intervals
            .iter()
            .map(|iv| vec![f(iv.tau_lo), f(iv.tau_hi), iv.nu.to_string()])
            .collect();
        Artifact::new("intervals", &["tau_lo", "tau_hi", "nu"], rows, json!(table))
    } else {
        let mut rows = Vec::new();
        for cr in &table.crossings {
            for (k, (&tau, &rt)) in cr.delays.iter().zip(&cr.rt_by_k).enumerate() {
                rows.push(vec![f(cr.omega_c), f(tau), k.to_string(), rt.to_string()]);
            }
        }
        Artifact::new(
            "crossings",
            &["omega_c", "tau", "k", "rt"],
            rows,
            json!({ "qp": table.qp, "crossings": table.crossings }),
        )
    };
    Ok(Outcome {
        artifacts: vec![art],
        summary,
        failure,
    })
}

fn roots(c: &RunConfig) -> Result<Outcome, CliError> {
    let sys = build_delay_system(&c.rotor, c.gains, c.tau)?;
    let qp = extract_pq(&sys)?;
    let set = find_roots(&qp, &c.region, c.grid_step)?;
    let rows = set
        .roots
        .iter()
        .map(|r| vec![f(r.s.re), f(r.s.im), f(r.residual)])
        .collect();
    let mut artifacts = vec![Artifact::new(
        "roots",
        &["re", "im", "residual"],
        rows,
        json!({ "qp": qp, "roots": set }),
    )];
    if c.zero_curves {
        let pts = zero_curves(&qp, &c.region, c.grid_step)?;
        let rows = pts
            .iter()
            .map(|p| {
                vec![
                    if p.curve == Curve::Re { "re" } else { "im" }.to_string(),
                    f(p.re),
                    f(p.im),
                ]
            })
            .collect();
        artifacts.push(Artifact::new("zero_curves", &["curve", "re", "im"], rows, json!(pts)));
    }
    let failure = (!set.certified).then(|| {
        Error::Certification(format!(
            "found {} roots, argument principle counts {:?}",
            set.counted(),
            set.certified_count
        ))
    });
    Ok(Outcome {
        artifacts,
        summary: json!({ "count": set.counted(), "certified_count": set.certified_count, "certified": set.certified }),
        failure,
    })
}

fn simulate_cmd(c: &RunConfig) -> Result<Outcome, CliError> {
    let sys = build_delay_system(&c.rotor, c.gains, c.tau)?;
    let ts = simulate(&sys, c.x0, c.psi_end, c.step, c.history)?;
    let growth = c.growth_window.map(|w| growth_rate(&ts, w));
    let (growth_value, failure) = match growth {
        Some(Ok(g)) => (Some(g), None),
        Some(Err(e)) => (None, Some(e)),
        None => (None, None),
    };
    let rows = ts
        .psi
        .iter()
        .zip(&ts.states)
        .map(|(&p, x)| vec![f(p), f(x[0]), f(x[1]), f(x[2]), f(x[3])])
        .collect();
    Ok(Outcome {
        artifacts: vec![Artifact::new(
            "simulate",
            &["psi", "theta", "beta", "theta_dot", "beta_dot"],
            rows,
            json!(ts),
        )],
        summary: json!({
            "samples": ts.psi.len(),
            "step": ts.step,
            "diverged": ts.diverged,
            "growth_rate": growth_value,
        }),
        failure,
    })
}

fn sweep(c: &RunConfig) -> Result<Outcome, CliError> {
    let grid = sweep_gain_surface(&c.rotor, c.tau, c.sweep_a, c.sweep_b, &c.scan())?;
    let mut header = vec!["a\\b".to_string()];
    header.extend(grid.b_values.iter().map(|&b| f(b)));
    let rows = grid
        .a_values
        .iter()
        .zip(&grid.values)
        .map(|(&a, vals)| std::iter::once(f(a)).chain(vals.iter().map(|&v| f(v))).collect())
        .collect();
    let uncertified = grid.certified.iter().flatten().filter(|c| !**c).count();
    let failure = (uncertified > 0)
        .then(|| Error::Certification(format!("{uncertified} grid points without a certified abscissa")));
    let argmin = grid.argmin.map(|(a, b, v)| json!({ "a": a, "b": b, "abscissa": v }));
    let art = Artifact {
        stem: "sweep".into(),
        header,
        rows,
        json: json!(grid),
    };
    Ok(Outcome {
        artifacts: vec![art],
        summary: json!({ "argmin": argmin, "uncertified": uncertified }),
        failure,
    })
}

fn optimize_delay_cmd(c: &RunConfig) -> Result<Outcome, CliError> {
    let od = match c.delay_interval {
        Some(iv) => optimal_delay(&c.rotor, c.gains, iv, &c.scan())?,
        None => optimal_delay_auto(&c.rotor, c.gains, c.tau_max, &c.scan())?,
    };
    let row = vec![
        f(od.tau),
        f(od.abscissa),
        f(od.root.re),
        f(od.root.im),
        f(od.interval.0),
        f(od.interval.1),
    ];
    let failure = (!od.certified).then(|| Error::Certification("an abscissa evaluation was not certified".into()));
    Ok(Outcome {
        artifacts: vec![Artifact::new(
            "optimize_delay",
            &["tau", "abscissa", "root_re", "root_im", "tau_lo", "tau_hi"],
            vec![row],
            json!(od),
        )],
        summary: json!({ "tau": od.tau, "abscissa": od.abscissa }),
        failure,
    })
}

fn optimize_cmd(c: &RunConfig) -> Result<Outcome, CliError> {
    let j = optimize_joint(&c.rotor, (c.gains, c.tau), c.budget, &c.scan())?;
    let row = vec![
        f(j.gains.a),
        f(j.gains.b),
        f(j.tau),
        f(j.abscissa),
        f(j.root.re),
        f(j.root.im),
        f(j.initial_abscissa),
        j.budget_exhausted.to_string(),
    ];
    Ok(Outcome {
        artifacts: vec![Artifact::new(
            "optimize",
            &[
                "a",
                "b",
                "tau",
                "abscissa",
                "root_re",
                "root_im",
                "initial_abscissa",
                "budget_exhausted",
            ],
            vec![row],
            json!(j),
        )],
        summary: json!({ "a": j.gains.a, "b": j.gains.b, "tau": j.tau, "abscissa": j.abscissa, "budget_exhausted": j.budget_exhausted }),
        failure: None,
    })
}

fn tolerances() -> Value {
    json!({
        "unstable_re": crate::rotor::UNSTABLE_TOL,
        "crossing_eta_min": crate::ctcr::ETA_MIN,
        "crossing_tie": crate::ctcr::TIE_TOL,
        "delay_search": 1e-4,
        "joint_search_step": 1e-6,
        "divergence_norm": crate::dde::DIVERGENCE_NORM,
    })
}

/// Runs one command and returns the process exit status. Errors are printed
/// to stderr as a JSON object.
pub fn run(command: Command, opts: &Overrides) -> i32 {
    match execute(command, opts) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

fn execute(command: Command, opts: &Overrides) -> Result<i32, CliError> {
    let cfg = resolve_config(opts)?;
    let outcome = match command {
        Command::Boundaries => boundaries(&cfg),
        Command::Classify => classify(&cfg),
        Command::Crossings => table_outcome(&cfg, false),
        Command::Intervals => table_outcome(&cfg, true),
        Command::Roots => roots(&cfg),
        Command::Simulate => simulate_cmd(&cfg),
        Command::SweepGains => sweep(&cfg),
        Command::OptimizeDelay => optimize_delay_cmd(&cfg),
        Command::Optimize => optimize_cmd(&cfg),
    }?;

    fs::create_dir_all(&opts.out).map_err(|e| CliError::Io(format!("{}: {e}", opts.out.display())))?;
    let io = |p: &Path, e: std::io::Error| CliError::Io(format!("{}: {e}", p.display()));
    let mut files = Vec::new();
    for art in &outcome.artifacts {
        let (name, bytes) = match cfg.format {
            Format::Csv => {
                let header: Vec<&str> = art.header.iter().map(String::as_str).collect();
                (format!("{}.csv", art.stem), csv_bytes(&header, &art.rows)?)
            }
            Format::Json => {
                let mut b = serde_json::to_vec_pretty(&art.json).map_err(|e| CliError::Io(e.to_string()))?;
                b.push(b'\n');
                (format!("{}.json", art.stem), b)
            }
        };
        let path = opts.out.join(&name);
        write_atomic(&path, &bytes).map_err(|e| io(&path, e))?;
        files.push(name);
    }

    let status = if outcome.failure.is_some() { "partial" } else { "ok" };
    let provenance = json!({
        "command": command.name(),
        "package": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "seeds": Value::Null,
        "tolerances": tolerances(),
        "outputs": files,
        "status": status,
        "result": outcome.summary,
    });
    let mut text = serde_json::to_string_pretty(&provenance).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    let stem = command.name().replace('-', "_");
    let side = opts.out.join(format!("{stem}.provenance.json"));
    write_atomic(&side, text.as_bytes()).map_err(|e| io(&side, e))?;
    print!("{text}");

    match outcome.failure {
        Some(e) => {
            let e = CliError::Numeric(e);
            eprintln!("{}", e.to_json());
            Ok(EXIT_CERTIFICATION)
        }
        None => Ok(EXIT_OK),
    }
}
