//! Batch front-end: flags and `key=value` config files in, `trace.csv` and
//! `summary.txt` out.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::convergence::{ConvergenceVerdict, DetectParams, Status};
use crate::criteria::{criterion_linf_a, section_test, zeta_image_criterion, CriteriaParams, CriterionReport, Outcome};
use crate::harness::run_suite;
use crate::matrices::CatalogMatrix;
use crate::means::deferred_mean;
use crate::parse::{list, no_args, one, split_call};
use crate::scalar::format_g;
use crate::schedule::DefermentSchedule;
use crate::seq::Seq;
use crate::spaces::{member_sigma_pq_s, sigma_pq_k_test, SpaceId};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FAILS: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, ValueEnum)]
pub enum Command {
    /// Deferred means of a sequence.
    Mean,
    /// Membership in sigma_p^q[s]; with --space, the sigma_p^q[K] test.
    TestSum,
    /// Deferred conullity criterion for a matrix domain.
    CheckConull,
    /// Section test of a sequence in a matrix domain.
    SectionTest,
    /// Run a verification suite.
    Verify,
    /// Print a previous run's summary and exit with its status.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Mean => "mean",
            Command::TestSum => "test-sum",
            Command::CheckConull => "check-conull",
            Command::SectionTest => "section-test",
            Command::Verify => "verify",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "defsum", version, about = "Deferred Cesaro means and conullity checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true)]
    sequence: Option<String>,
    #[arg(long, global = true)]
    schedule: Option<String>,
    #[arg(long, global = true)]
    matrix: Option<String>,
    #[arg(long, global = true)]
    space: Option<String>,
    #[arg(long, global = true)]
    suite: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true)]
    window: Option<String>,
    #[arg(long, global = true)]
    horizon: Option<String>,
    #[arg(long, global = true)]
    trunc: Option<String>,
    #[arg(long = "i-horizon", global = true)]
    i_horizon: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    trials: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    /// File of `key = value` lines; flags take precedence.
    #[arg(long, global = true)]
    config: Option<String>,
}

const KEYS: [&str; 13] = [
    "sequence", "schedule", "matrix", "space", "suite", "tol", "window", "horizon", "trunc", "i-horizon", "seed",
    "trials", "out",
];

/// A one-line diagnostic naming the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: String,
    pub msg: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}: {}", self.field, self.msg)
    }
}

fn cfg_err(field: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError { field: field.to_string(), msg: msg.into() }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| cfg_err("config", format!("line {}: expected key = value", lineno + 1)))?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(cfg_err(&key, format!("unknown key on config line {}", lineno + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

/// Parses `constant(c)`, `alternating`, `harmonic-power(s)`, `impulse(j)`,
/// `random(seed,decay)`, `table(v1,v2,...)` and `ones`.
pub fn parse_sequence(spec: &str) -> Result<Seq<f64>, String> {
    let (name, args) = split_call(spec)?;
    let args = args.as_deref();
    match name.as_str() {
        "constant" => Ok(Seq::constant(one::<f64>(&name, args)?)),
        "ones" => no_args(&name, args).map(|_| Seq::ones()),
        "alternating" => no_args(&name, args).map(|_| Seq::alternating()),
        "harmonic-power" => Ok(Seq::harmonic_power(one::<f64>(&name, args)?)),
        "impulse" => match one::<usize>(&name, args)? {
            0 => Err("impulse index starts at 1".into()),
            j => Ok(Seq::impulse(j)),
        },
        "random" => {
            let args = args.ok_or("random needs seed and decay")?;
            let (seed, decay) = args.split_once(',').ok_or("random takes exactly two arguments")?;
            let seed = seed.trim().parse::<u64>().map_err(|_| format!("cannot parse seed '{}'", seed.trim()))?;
            let decay = decay.trim().parse::<f64>().map_err(|_| format!("cannot parse decay '{}'", decay.trim()))?;
            Ok(Seq::random(seed, decay))
        }
        "table" => Ok(Seq::finite(list::<f64>(args.ok_or("table needs values")?, ',')?)),
        other => Err(format!("unknown sequence '{other}'")),
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub schedule: DefermentSchedule,
    pub matrix: Option<CatalogMatrix>,
    pub sequence: Option<Seq<f64>>,
    pub space: Option<SpaceId>,
    pub suite: Option<String>,
    pub tol: f64,
    pub window: usize,
    pub horizon: usize,
    pub trunc: usize,
    pub i_horizon: Option<usize>,
    pub seed: u64,
    pub trials: usize,
    pub out: PathBuf,
    /// Effective settings, minus output location, for the summary.
    pub echo: BTreeMap<String, String>,
}

fn positive<T>(field: &str, raw: &str) -> Result<T, ConfigError>
where
    T: std::str::FromStr + PartialOrd + Default,
{
    match raw.trim().parse::<T>() {
        Ok(v) if v > T::default() => Ok(v),
        _ => Err(cfg_err(field, format!("expected a positive number, got '{raw}'"))),
    }
}

impl RunConfig {
    /// Builds the run from merged settings; missing keys take per-command
    /// defaults.
    pub fn from_settings(command: Command, mut s: BTreeMap<String, String>) -> Result<Self, ConfigError> {
        let default_horizon = match command {
            Command::CheckConull | Command::SectionTest => "200",
            _ => "1000",
        };
        for (k, v) in [
            ("schedule", "cesaro"),
            ("tol", "1e-3"),
            ("window", "16"),
            ("horizon", default_horizon),
            ("trunc", "10000"),
            ("seed", "0"),
            ("trials", "100"),
            ("out", "defsum-out"),
        ] {
            s.entry(k.to_string()).or_insert_with(|| v.to_string());
        }
        if matches!(command, Command::CheckConull | Command::SectionTest) {
            s.entry("space".into()).or_insert_with(|| "c".into());
        }
        if command == Command::SectionTest {
            s.entry("sequence".into()).or_insert_with(|| "ones".into());
        }

        let tol: f64 = positive("tol", &s["tol"])?;
        if !tol.is_finite() {
            return Err(cfg_err("tol", "must be finite"));
        }
        let window: usize = positive("window", &s["window"])?;
        let horizon: usize = positive("horizon", &s["horizon"])?;
        if window < 2 || window > horizon {
            return Err(cfg_err("window", format!("must lie in [2, horizon = {horizon}]")));
        }
        let trunc: usize = positive("trunc", &s["trunc"])?;
        let trials: usize = positive("trials", &s["trials"])?;
        let seed = s["seed"]
            .trim()
            .parse::<u64>()
            .map_err(|_| cfg_err("seed", format!("expected an unsigned integer, got '{}'", s["seed"])))?;
        let i_horizon = s.get("i-horizon").map(|v| positive::<usize>("i-horizon", v)).transpose()?;

        let schedule = DefermentSchedule::parse(&s["schedule"]).map_err(|e| cfg_err("schedule", e.to_string()))?;
        schedule.validate(horizon).map_err(|e| cfg_err("schedule", e.to_string()))?;
        let matrix = s
            .get("matrix")
            .map(|m| CatalogMatrix::parse(m).map_err(|e| cfg_err("matrix", e.to_string())))
            .transpose()?;
        let sequence = s
            .get("sequence")
            .map(|q| parse_sequence(q).map_err(|e| cfg_err("sequence", e)))
            .transpose()?;
        let space = s
            .get("space")
            .map(|y| match y.trim().to_ascii_lowercase().as_str() {
                "sigma" => Ok(SpaceId::SigmaPqS(schedule.clone())),
                _ => y.parse::<SpaceId>().map_err(|e| cfg_err("space", e.to_string())),
            })
            .transpose()?;
        let suite = s.get("suite").cloned();

        let required = |key: &str, present: bool| {
            if present {
                Ok(())
            } else {
                Err(cfg_err(key, format!("required by {}", command.name())))
            }
        };
        match command {
            Command::Mean | Command::TestSum => required("sequence", sequence.is_some())?,
            Command::CheckConull | Command::SectionTest => required("matrix", matrix.is_some())?,
            Command::Verify => required("suite", suite.is_some())?,
            Command::Report => {}
        }
        if command == Command::CheckConull && matches!(space, Some(SpaceId::SigmaPqS(_))) {
            return Err(cfg_err("space", "check-conull supports c, c0, l1, bv, bv0 and linf"));
        }

        let out = PathBuf::from(&s["out"]);
        let mut echo = s;
        echo.remove("out");
        echo.insert("command".into(), command.name().into());
        Ok(RunConfig {
            command,
            schedule,
            matrix,
            sequence,
            space,
            suite,
            tol,
            window,
            horizon,
            trunc,
            i_horizon,
            seed,
            trials,
            out,
            echo,
        })
    }

    fn detect(&self) -> DetectParams {
        DetectParams::new(self.tol, self.window, self.horizon)
    }

    fn criteria(&self) -> CriteriaParams {
        CriteriaParams {
            detect: self.detect(),
            i_horizon: self.i_horizon,
            seed: self.seed,
            ..CriteriaParams::default()
        }
    }
}

/// Rendered artifacts and the exit status they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trace: String,
    pub summary: String,
    pub exit: i32,
}

fn g(v: f64) -> String {
    format_g(v, 12)
}

fn trace_csv(header: &str, rows: &[(usize, f64)]) -> String {
    let mut s = format!("n,{header}\n");
    for &(n, v) in rows {
        s.push_str(&format!("{n},{}\n", g(v)));
    }
    s
}

fn summary_text(mut lines: Vec<(String, String)>, echo: &BTreeMap<String, String>) -> String {
    lines.extend(echo.iter().map(|(k, v)| (format!("config.{k}"), v.clone())));
    lines
        .into_iter()
        .map(|(k, v)| format!("{k} = {}\n", v.replace('\n', " ")))
        .collect()
}

fn status_exit(s: Status) -> i32 {
    match s {
        Status::Converged => EXIT_OK,
        Status::Diverged => EXIT_FAILS,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn outcome_exit(o: Outcome) -> i32 {
    match o {
        Outcome::Holds => EXIT_OK,
        Outcome::Fails => EXIT_FAILS,
        Outcome::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn verdict_lines(v: &ConvergenceVerdict<f64>) -> Vec<(String, String)> {
    let mut out = vec![
        ("status".to_string(), v.status.as_str().to_string()),
        ("limit".to_string(), v.limit.map_or("none".to_string(), g)),
        ("residual".to_string(), g(v.residual)),
    ];
    for (k, d) in v.diagnostics.iter().enumerate() {
        out.push((format!("diagnostic.{k}"), d.clone()));
    }
    out
}

fn sequence_run(cfg: &RunConfig, v: ConvergenceVerdict<f64>) -> RunOutput {
    let mut lines = vec![("verdict".to_string(), v.status.as_str().to_string())];
    lines.extend(verdict_lines(&v));
    RunOutput {
        trace: trace_csv("value", &v.trace),
        summary: summary_text(lines, &cfg.echo),
        exit: status_exit(v.status),
    }
}

fn criterion_lines(prefix: &str, r: &CriterionReport) -> Vec<(String, String)> {
    let mut out = vec![
        (format!("{prefix}criterion"), r.id.to_string()),
        (format!("{prefix}outcome"), r.outcome.as_str().to_string()),
        (format!("{prefix}matrix"), r.matrix.clone()),
        (format!("{prefix}schedule"), r.schedule.clone()),
        (format!("{prefix}regime"), r.regime.to_string()),
    ];
    out.extend(verdict_lines(&r.verdict).into_iter().map(|(k, v)| (format!("{prefix}{k}"), v)));
    for (k, n) in r.notes.iter().enumerate() {
        out.push((format!("{prefix}note.{k}"), n.clone()));
    }
    out
}

fn criterion_run(cfg: &RunConfig, r: &CriterionReport) -> RunOutput {
    let mut lines = vec![("verdict".to_string(), r.outcome.as_str().to_string())];
    lines.extend(criterion_lines("", r));
    RunOutput {
        trace: trace_csv("T_n", &r.trace),
        summary: summary_text(lines, &cfg.echo),
        exit: outcome_exit(r.outcome),
    }
}

/// Executes a non-`report` command and renders its artifacts.
pub fn execute(cfg: &RunConfig) -> crate::error::Result<RunOutput> {
    let d = cfg.schedule.clone().with_horizon(cfg.horizon);
    Ok(match cfg.command {
        Command::Mean => {
            let x = cfg.sequence.as_ref().expect("validated");
            let means = deferred_mean(x, &d)?;
            let v = crate::convergence::detect_limit(|n| means.at(n), &cfg.detect())?;
            sequence_run(cfg, v)
        }
        Command::TestSum => {
            let x = cfg.sequence.as_ref().expect("validated");
            let v = match &cfg.space {
                Some(y) => sigma_pq_k_test(y, x, &d, cfg.trunc, &cfg.detect())?,
                None => member_sigma_pq_s(x, &d, &cfg.detect())?,
            };
            sequence_run(cfg, v)
        }
        Command::CheckConull => {
            let a = cfg.matrix.as_ref().expect("validated");
            let y = cfg.space.as_ref().expect("defaulted");
            let params = cfg.criteria();
            if matches!(y, SpaceId::LInf) {
                let r = criterion_linf_a(a, &d, &params)?;
                let outcome = match (r.bound.outcome, r.min.outcome) {
                    (Outcome::Fails, _) | (_, Outcome::Fails) => Outcome::Fails,
                    (Outcome::Holds, Outcome::Holds) => Outcome::Holds,
                    _ => Outcome::Inconclusive,
                };
                let mut lines = vec![("verdict".to_string(), outcome.as_str().to_string())];
                lines.extend(criterion_lines("bound.", &r.bound));
                lines.extend(criterion_lines("min.", &r.min));
                for (eps, per) in &r.witnesses {
                    let shown: Vec<String> = per.iter().map(|w| w.map_or("none".into(), |l| l.to_string())).collect();
                    lines.push((format!("min.witness.{}", g(*eps)), shown.join(",")));
                }
                RunOutput {
                    trace: trace_csv("T_n", &r.bound.trace),
                    summary: summary_text(lines, &cfg.echo),
                    exit: outcome_exit(outcome),
                }
            } else {
                criterion_run(cfg, &zeta_image_criterion(y, a, &d, &params)?)
            }
        }
        Command::SectionTest => {
            let a = cfg.matrix.as_ref().expect("validated");
            let y = cfg.space.as_ref().expect("defaulted");
            let z = cfg.sequence.as_ref().expect("defaulted");
            criterion_run(cfg, &section_test(y, a, z, &d, &cfg.criteria())?)
        }
        Command::Verify => {
            let suite = cfg.suite.as_deref().expect("validated");
            let r = run_suite(suite, cfg.seed, cfg.trials, &d, cfg.tol, cfg.horizon)?;
            let rows: Vec<(usize, f64)> = r
                .cases
                .iter()
                .enumerate()
                .map(|(k, c)| (k + 1, if c.pass { 1.0 } else { 0.0 }))
                .collect();
            let exit = if r.failed > 0 {
                EXIT_FAILS
            } else if r.passed == 0 {
                EXIT_INCONCLUSIVE
            } else {
                EXIT_OK
            };
            RunOutput {
                trace: trace_csv("pass", &rows),
                summary: summary_text(r.summary_lines(), &cfg.echo),
                exit,
            }
        }
        Command::Report => unreachable!("report reads existing artifacts"),
    })
}

/// Writes `contents` next to `path` and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Exit status recorded by a summary's `verdict` line.
pub fn verdict_exit(summary: &str) -> Option<i32> {
    let v = summary
        .lines()
        .find_map(|l| l.strip_prefix("verdict = "))?
        .trim();
    Some(match v {
        "holds" | "converged" | "pass" => EXIT_OK,
        "fails" | "diverged" | "fail" => EXIT_FAILS,
        "inconclusive" => EXIT_INCONCLUSIVE,
        _ => return None,
    })
}

fn init_threads() -> Result<(), ConfigError> {
    let Ok(raw) = std::env::var("DEFSUM_THREADS") else {
        return Ok(());
    };
    let n: usize = positive("DEFSUM_THREADS", &raw)?;
    // A pool may already exist when called in-process more than once.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

/// Full process entry: returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return EXIT_OK;
            }
            let first = e.to_string().lines().next().unwrap_or("invalid arguments").to_string();
            eprintln!("defsum: {first}");
            return EXIT_CONFIG;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(RunError::Config(e)) => {
            eprintln!("defsum: {e}");
            EXIT_CONFIG
        }
        Err(RunError::Io(e)) => {
            eprintln!("defsum: i/o error: {e}");
            EXIT_CONFIG
        }
    }
}

enum RunError {
    Config(ConfigError),
    Io(std::io::Error),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

fn run(cli: Cli) -> Result<i32, RunError> {
    init_threads()?;
    let mut settings = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| cfg_err("config", format!("{path}: {e}")))?;
            parse_config_file(&text)?
        }
        None => BTreeMap::new(),
    };
    let flags = [
        ("sequence", &cli.sequence),
        ("schedule", &cli.schedule),
        ("matrix", &cli.matrix),
        ("space", &cli.space),
        ("suite", &cli.suite),
        ("tol", &cli.tol),
        ("window", &cli.window),
        ("horizon", &cli.horizon),
        ("trunc", &cli.trunc),
        ("i-horizon", &cli.i_horizon),
        ("seed", &cli.seed),
        ("trials", &cli.trials),
        ("out", &cli.out),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            settings.insert(k.to_string(), v.clone());
        }
    }
    let cfg = RunConfig::from_settings(cli.command, settings)?;

    if cfg.command == Command::Report {
        let path = cfg.out.join("summary.txt");
        let text = fs::read_to_string(&path).map_err(|e| cfg_err("out", format!("{}: {e}", path.display())))?;
        print!("{text}");
        return verdict_exit(&text).ok_or_else(|| cfg_err("out", "summary has no recognised verdict line").into());
    }

    let output = execute(&cfg).map_err(|e| match e {
        crate::error::Error::Invalid(m) if m.starts_with("unknown suite") => cfg_err("suite", m),
        other => cfg_err(cfg.command.name(), other.to_string()),
    })?;
    fs::create_dir_all(&cfg.out)?;
    write_atomic(&cfg.out.join("trace.csv"), &output.trace)?;
    write_atomic(&cfg.out.join("summary.txt"), &output.summary)?;
    if let Some(line) = output.summary.lines().next() {
        println!("{line}");
    }
    Ok(output.exit)
}
