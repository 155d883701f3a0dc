//! Command-line front end. Scenario files in, JSON reports and CSV tables
//! out. Every run ends with one of the exit codes below.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::carrier::CompactSpace;
use crate::convergence::{
    certify, generate_battery, theorem_equivalence_report, Battery, BatterySpec, EquivalenceReport, Status,
    Verdict, DEFAULT_N, DEFAULT_TOL,
};
use crate::error::Error;
use crate::function::VectorFunctionSpec;
use crate::integral::{default_schedule, integrate, IntegralCertificate};
use crate::measure::{bl_distance, scenario, FiniteMeasure, Label, MeasureFamily, MeasureSpec, ScenarioSpec};
use crate::suite::default_targets;
use crate::target::{LpNorm, TargetSpace, TargetSpec};

pub const EXIT_CONVERGENT: i32 = 0;
pub const EXIT_DIVERGENT: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_SCHEMA: i32 = 64;
pub const EXIT_CAPACITY: i32 = 65;
pub const EXIT_INTERNAL: i32 = 70;

/// The only environment variable consulted: a default for `--out`.
pub const OUT_DIR_ENV: &str = "WEAKCONV_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "weakconv", version, about = "Weak-convergence certification and vector-valued integration")]
struct Cli {
    /// Seed for batteries and samplers (overrides the file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance for tail tests (overrides the file).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Prefix length (overrides the file).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Rescale non-probability inputs to mass one before measuring distance.
    #[arg(long, global = true)]
    normalize: bool,
    /// Also write reports into this directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the oracle's witness function.
    #[arg(long, global = true)]
    witness: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bounded-Lipschitz distance between two measures.
    Bl {
        /// Scenario file with `space`, `mu` and `nu`.
        file: Option<PathBuf>,
        /// Inline carrier (JSON); defaults to the unit interval.
        #[arg(long)]
        space: Option<String>,
        /// Inline first measure (JSON).
        #[arg(long)]
        mu: Option<String>,
        /// Inline second measure (JSON).
        #[arg(long)]
        nu: Option<String>,
    },
    /// Certified integral of `function` against `measure`.
    Integrate { file: PathBuf },
    /// Weak-convergence verdict for `sequence`.
    Certify { file: PathBuf },
    /// Batch runs.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Bundled invariant and scenario suites.
    Selftest,
}

#[derive(Debug, Subcommand)]
enum ScenarioAction {
    /// Oracle-versus-battery comparison on every target.
    Run { file: PathBuf },
}

/// Either a named generator or an explicit list of measures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SequenceSpec {
    Generated(ScenarioSpec),
    Explicit(ExplicitSequence),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSequence {
    pub measures: Vec<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<MeasureSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
}

/// Input file. Which keys are required depends on the command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub space: CompactSpace,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<TargetSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battery: Option<BatterySpec>,
    #[serde(default)]
    pub run: RunParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<VectorFunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<MeasureSpec>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
    }

    fn target_specs(&self) -> Vec<TargetSpec> {
        match (&self.targets, &self.target) {
            (Some(list), _) => list.clone(),
            (None, Some(t)) => vec![t.clone()],
            (None, None) => Vec::new(),
        }
    }

    /// Fills every run parameter from flags, then the file, then defaults.
    fn effective(&self, flags: &Cli) -> ScenarioFile {
        let mut out = self.clone();
        out.run = RunParams {
            n: Some(flags.n.or(self.run.n).unwrap_or(DEFAULT_N)),
            tol: Some(flags.tol.or(self.run.tol).unwrap_or(DEFAULT_TOL)),
            seed: Some(flags.seed.or(self.run.seed).unwrap_or(0)),
            schedule: Some(self.run.schedule.clone().unwrap_or_else(default_schedule)),
        };
        if out.battery.is_none() && out.sequence.is_some() {
            out.battery = Some(BatterySpec::default());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledVerdict {
    /// `scalar` or the target label.
    pub battery: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Outcome {
    Certify {
        status: Status,
        verdicts: Vec<LabeledVerdict>,
    },
    Equivalence(Box<EquivalenceReport>),
    Integral(IntegralCertificate),
}

/// Structured output of a file-driven command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub command: String,
    pub config: ScenarioFile,
    pub outcome: Outcome,
    pub wall_clock_ms: f64,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Capacity { .. } => EXIT_CAPACITY,
            Error::Lp(_) => EXIT_INTERNAL,
            _ => EXIT_SCHEMA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: EXIT_SCHEMA,
            message: format!("i/o error: {e}"),
        }
    }
}

fn schema(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_SCHEMA,
        message: format!("schema error: {}", msg.into()),
    }
}

fn read_file(path: &Path) -> Result<ScenarioFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| schema(format!("cannot read {}: {e}", path.display())))?;
    Ok(ScenarioFile::parse(&text)?)
}

fn out_dir(flags: &Cli) -> Option<PathBuf> {
    flags
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
}

fn write_outputs(flags: &Cli, files: &[(&str, &str)]) -> Result<(), Failure> {
    if let Some(dir) = out_dir(flags) {
        fs::create_dir_all(&dir)?;
        for (name, body) in files {
            fs::write(dir.join(name), body)?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_SCHEMA } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match dispatch(&cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "weakconv: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match &cli.command {
        Command::Bl { file, space, mu, nu } => cmd_bl(cli, file.as_deref(), space, mu, nu, out),
        Command::Integrate { file } => cmd_integrate(cli, file, out, err),
        Command::Certify { file } => cmd_certify(cli, file, out),
        Command::Scenario {
            action: ScenarioAction::Run { file },
        } => cmd_scenario_run(cli, file, out),
        Command::Selftest => cmd_selftest(cli, out),
    }
}

fn cmd_bl(
    cli: &Cli,
    file: Option<&Path>,
    space: &Option<String>,
    mu: &Option<String>,
    nu: &Option<String>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let parse_measure = |s: &str| serde_json::from_str::<MeasureSpec>(s).map_err(|e| schema(e.to_string()));
    let (space, mu, nu) = match file {
        Some(path) => {
            let f = read_file(path)?;
            let mu = f.mu.ok_or_else(|| schema("bl needs \"mu\""))?;
            let nu = f.nu.ok_or_else(|| schema("bl needs \"nu\""))?;
            (f.space, mu, nu)
        }
        None => {
            let space = match space {
                Some(s) => serde_json::from_str(s).map_err(|e| schema(e.to_string()))?,
                None => CompactSpace::unit_cube(1)?,
            };
            let mu = parse_measure(mu.as_deref().ok_or_else(|| schema("bl needs a file or --mu and --nu"))?)?;
            let nu = parse_measure(nu.as_deref().ok_or_else(|| schema("bl needs a file or --mu and --nu"))?)?;
            (space, mu, nu)
        }
    };
    let space = Arc::new(space);
    let mut mu = mu.build(&space)?;
    let mut nu = nu.build(&space)?;
    if cli.normalize {
        mu = mu.normalize()?;
        nu = nu.normalize()?;
    }
    let result = bl_distance(&mu, &nu)?;
    writeln!(out, "{:.9}", result.value)?;
    if cli.witness {
        for (p, f) in &result.witness {
            writeln!(out, "{p}\t{f:.9}")?;
        }
    }
    write_outputs(cli, &[("bl.json", &to_json(&result))])?;
    Ok(0)
}

fn integration_target(file: &ScenarioFile, dim: usize) -> Result<TargetSpace, Failure> {
    match file.target_specs().as_slice() {
        [] => Ok(TargetSpace::banach(dim, LpNorm::L2)?),
        [one] => Ok(one.build()?),
        _ => Err(schema("integrate takes a single target")),
    }
}

fn cmd_integrate(cli: &Cli, path: &Path, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let start = Instant::now();
    let file = read_file(path)?;
    let config = file.effective(cli);
    let space = Arc::new(file.space.clone());
    let g = file
        .function
        .as_ref()
        .ok_or_else(|| schema("integrate needs \"function\""))?
        .build(&space)?;
    let mu = file
        .measure
        .as_ref()
        .ok_or_else(|| schema("integrate needs \"measure\""))?
        .build(&space)?;
    let target = integration_target(&file, g.dim())?;
    let schedule = config.run.schedule.clone().unwrap_or_else(default_schedule);
    let cert = integrate(&space, &g, &mu, &target, &schedule)?;
    let csv = cert.to_csv();
    write!(out, "{csv}")?;
    let values: Vec<String> = cert.value.0.iter().map(|v| format!("{v:.12}")).collect();
    writeln!(
        err,
        "{} value=[{}]",
        if cert.certified { "certified" } else { "failed" },
        values.join(", ")
    )?;
    let certified = cert.certified;
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").into(),
        command: "integrate".into(),
        config,
        outcome: Outcome::Integral(cert),
        wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    write_outputs(cli, &[("certificate.csv", &csv), ("report.json", &to_json(&report))])?;
    Ok(if certified { 0 } else { 1 })
}

struct Prepared {
    space: Arc<CompactSpace>,
    family: MeasureFamily,
    targets: Vec<TargetSpace>,
    n: usize,
    tol: f64,
    seed: u64,
    battery: BatterySpec,
}

fn prepare(config: &ScenarioFile) -> Result<Prepared, Failure> {
    let space = Arc::new(config.space.clone());
    let seed = config.run.seed.unwrap_or(0);
    let n = config.run.n.unwrap_or(DEFAULT_N);
    let tol = config.run.tol.unwrap_or(DEFAULT_TOL);
    let family = match config.sequence.as_ref().ok_or_else(|| schema("missing \"sequence\""))? {
        SequenceSpec::Generated(spec) => scenario(&space, spec.clone(), seed)?,
        SequenceSpec::Explicit(list) => {
            let measures = list
                .measures
                .iter()
                .map(|m| m.build(&space))
                .collect::<Result<Vec<FiniteMeasure>, Error>>()?;
            let label = match &list.limit {
                Some(m) => Label::ConvergesTo(m.build(&space)?),
                None => Label::Unknown,
            };
            MeasureFamily::explicit(&space, measures, label)?
        }
    };
    let targets = config
        .target_specs()
        .iter()
        .map(TargetSpec::build)
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Prepared {
        space,
        family,
        targets,
        n,
        tol,
        seed,
        battery: config.battery.clone().unwrap_or_default(),
    })
}

fn cmd_certify(cli: &Cli, path: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let start = Instant::now();
    let config = read_file(path)?.effective(cli);
    let p = prepare(&config)?;
    let limit = match p.family.label() {
        Label::ConvergesTo(m) => m.clone(),
        _ => p.family.measure(p.n)?,
    };
    let mut batteries: Vec<(String, Battery)> = vec![(
        "scalar".into(),
        generate_battery(&p.space, None, &BatterySpec { vector: false, ..p.battery.clone() }, p.seed)?,
    )];
    if p.battery.vector {
        for t in &p.targets {
            let spec = BatterySpec {
                scalar: false,
                ..p.battery.clone()
            };
            batteries.push((t.label(), generate_battery(&p.space, Some(t), &spec, p.seed)?));
        }
    }
    let mut verdicts = Vec::with_capacity(batteries.len());
    for (name, battery) in &batteries {
        verdicts.push(LabeledVerdict {
            battery: name.clone(),
            verdict: certify(&p.family, &limit, battery, p.n, p.tol)?,
        });
    }
    let status = if verdicts.iter().any(|v| v.verdict.status == Status::Divergent) {
        Status::Divergent
    } else if verdicts.iter().all(|v| v.verdict.status == Status::ConvergentEvidence) {
        Status::ConvergentEvidence
    } else {
        Status::Inconclusive
    };
    let name = p.family.spec().map_or("explicit", ScenarioSpec::kind);
    let mut csv = String::new();
    for (i, v) in verdicts.iter().enumerate() {
        let table = v.verdict.to_csv(name);
        // keep a single header
        csv.push_str(if i == 0 { &table } else { table.split_once('\n').map_or("", |(_, rest)| rest) });
    }
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").into(),
        command: "certify".into(),
        config,
        outcome: Outcome::Certify { status, verdicts },
        wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let json = to_json(&report);
    writeln!(out, "{json}")?;
    writeln!(out)?;
    write!(out, "{csv}")?;
    write_outputs(cli, &[("report.json", &json), ("diagnostics.csv", &csv)])?;
    Ok(status.exit_code())
}

fn cmd_scenario_run(cli: &Cli, path: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let start = Instant::now();
    let config = read_file(path)?.effective(cli);
    let p = prepare(&config)?;
    let targets = if p.targets.is_empty() { default_targets() } else { p.targets.clone() };
    let report = theorem_equivalence_report(&p.family, &targets, &p.battery, p.n, p.tol, p.seed)?;
    let agree = report.agree;
    let mut csv = report.scalar.to_csv(&report.scenario);
    for t in &report.targets {
        let table = t.verdict.to_csv(&format!("{}@{}", report.scenario, t.target));
        csv.push_str(table.split_once('\n').map_or("", |(_, rest)| rest));
    }
    let run = RunReport {
        version: env!("CARGO_PKG_VERSION").into(),
        command: "scenario run".into(),
        config,
        outcome: Outcome::Equivalence(Box::new(report)),
        wall_clock_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    let json = to_json(&run);
    writeln!(out, "{json}")?;
    writeln!(out)?;
    write!(out, "{csv}")?;
    write_outputs(cli, &[("report.json", &json), ("diagnostics.csv", &csv)])?;
    Ok(if agree { 0 } else { 1 })
}

fn cmd_selftest(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let report = crate::selftest::run(cli.seed.unwrap_or(0))?;
    let text = report.render();
    write!(out, "{text}")?;
    writeln!(out, "wall_clock_ms {:.1}", report.elapsed.as_secs_f64() * 1e3)?;
    write_outputs(cli, &[("selftest.txt", &text)])?;
    Ok(if report.pass() { 0 } else { 1 })
}
