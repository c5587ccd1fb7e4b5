//! Argument parsing and the four subcommands.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use collider_lab::mc::{self, MIN_SAMPLES};
use collider_lab::{report, run_sweep, Estimand, EstimandReport, Execution, ScmModel};

use crate::config::{Command, Format, ParamKey, RunConfig};
use crate::error::{CliError, CliResult};
use crate::svg;
use crate::table::{self, Row};

#[derive(Parser, Debug)]
#[command(
    name = "collider-lab",
    version,
    args_override_self = true,
    about = "Exact and simulated estimands for a binary exposure, unmeasured confounder, mediator and outcome"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Subcommand, Debug)]
pub enum Sub {
    /// Exact estimands for one parameter vector.
    #[command(allow_negative_numbers = true)]
    Compute {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        /// text or csv.
        #[arg(long)]
        format: Option<String>,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact estimands over a grid of one coefficient, as CSV.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        /// Coefficient to vary (alpha_A, beta_AUM, ...).
        #[arg(long)]
        vary: Option<String>,
        #[arg(long)]
        from: Option<f64>,
        #[arg(long)]
        to: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Chart scale: or, additive or both.
        #[arg(long)]
        scale: Option<String>,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a chart here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Compare the exact estimands with a Monte Carlo run.
    #[command(name = "mc-check", allow_negative_numbers = true)]
    McCheck {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: ModelArgs,
        /// Number of simulated units (at least 10000).
        #[arg(long)]
        n: Option<u64>,
        /// RNG seed; falls back to COLLIDER_LAB_SEED, then 42.
        #[arg(long)]
        seed: Option<u64>,
        /// Largest accepted |z| in standard errors.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Chart a CSV written by `sweep`.
    Plot {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
        /// SVG destination; stdout when absent.
        #[arg(long, visible_alias = "out")]
        svg: Option<PathBuf>,
        #[arg(long)]
        scale: Option<String>,
    },
}

#[derive(Args, Debug, Default)]
pub struct Common {
    /// Read `key = value` settings from this file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the effective settings to this file.
    #[arg(long)]
    pub save_config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct ModelArgs {
    /// fig2-top, fig2-bottom or fig3 (alias fig3-base).
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub p_a: Option<f64>,
    #[arg(long)]
    pub p_u: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Explicit mediator intercept; needs --beta-0.
    #[arg(long)]
    pub alpha_0: Option<f64>,
    /// Explicit outcome intercept; needs --alpha-0.
    #[arg(long)]
    pub beta_0: Option<f64>,
    #[arg(long)]
    pub alpha_a: Option<f64>,
    #[arg(long)]
    pub alpha_u: Option<f64>,
    #[arg(long)]
    pub alpha_au: Option<f64>,
    #[arg(long)]
    pub beta_a: Option<f64>,
    #[arg(long)]
    pub beta_u: Option<f64>,
    #[arg(long)]
    pub beta_m: Option<f64>,
    #[arg(long)]
    pub beta_au: Option<f64>,
    #[arg(long)]
    pub beta_am: Option<f64>,
    #[arg(long)]
    pub beta_um: Option<f64>,
    #[arg(long)]
    pub beta_aum: Option<f64>,
}

type Pairs = Vec<(String, String)>;

fn push<T: ToString>(pairs: &mut Pairs, key: &str, value: &Option<T>) {
    if let Some(v) = value {
        pairs.push((key.to_string(), v.to_string()));
    }
}

fn push_path(pairs: &mut Pairs, key: &str, value: &Option<PathBuf>) {
    if let Some(p) = value {
        pairs.push((key.to_string(), p.display().to_string()));
    }
}

impl ModelArgs {
    fn pairs(&self, out: &mut Pairs) {
        push(out, "preset", &self.preset);
        let values = [
            self.p_a,
            self.p_u,
            self.nu,
            self.alpha_0,
            self.beta_0,
            self.alpha_a,
            self.alpha_u,
            self.alpha_au,
            self.beta_a,
            self.beta_u,
            self.beta_m,
            self.beta_au,
            self.beta_am,
            self.beta_um,
            self.beta_aum,
        ];
        // Same order as ParamKey::all.
        for (key, v) in ParamKey::all().zip(values) {
            push(out, &key.key(), &v);
        }
    }
}

impl Sub {
    fn command(&self) -> Command {
        match self {
            Sub::Compute { .. } => Command::Compute,
            Sub::Sweep { .. } => Command::Sweep,
            Sub::McCheck { .. } => Command::McCheck,
            Sub::Plot { .. } => Command::Plot,
        }
    }

    fn common(&self) -> &Common {
        match self {
            Sub::Compute { common, .. }
            | Sub::Sweep { common, .. }
            | Sub::McCheck { common, .. }
            | Sub::Plot { common, .. } => common,
        }
    }

    /// Flag values as config `key = value` pairs.
    fn pairs(&self) -> Pairs {
        let mut p = Pairs::new();
        match self {
            Sub::Compute {
                model, format, out, ..
            } => {
                model.pairs(&mut p);
                push(&mut p, "format", format);
                push_path(&mut p, "out", out);
            }
            Sub::Sweep {
                model,
                vary,
                from,
                to,
                steps,
                scale,
                out,
                svg,
                ..
            } => {
                model.pairs(&mut p);
                push(&mut p, "vary", vary);
                push(&mut p, "from", from);
                push(&mut p, "to", to);
                push(&mut p, "steps", steps);
                push(&mut p, "scale", scale);
                push_path(&mut p, "out", out);
                push_path(&mut p, "svg", svg);
            }
            Sub::McCheck {
                model,
                n,
                seed,
                tolerance,
                ..
            } => {
                model.pairs(&mut p);
                push(&mut p, "n", n);
                push(&mut p, "seed", seed);
                push(&mut p, "tolerance", tolerance);
            }
            Sub::Plot {
                input, svg, scale, ..
            } => {
                push_path(&mut p, "input", input);
                push_path(&mut p, "svg", svg);
                push(&mut p, "scale", scale);
            }
        }
        p
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, contents: &[u8]) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn emit(path: Option<&Path>, contents: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(contents)
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

/// The effective configuration for parsed arguments: config file first, then flags.
pub fn resolve(cli: &Cli) -> CliResult<RunConfig> {
    let command = cli.command.command();
    let mut cfg = RunConfig::new(command);
    if let Some(path) = &cli.command.common().config {
        cfg.apply_file(&read_file(path)?)
            .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    }
    cfg.command = command;
    for (k, v) in cli.command.pairs() {
        cfg.set(&k, &v)
            .map_err(|e| CliError::usage(format!("--{}: {e}", k.replace('_', "-"))))?;
    }
    Ok(cfg)
}

/// Parses `args` (program name first) and runs; returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> CliResult<()> {
    let cfg = resolve(cli)?;
    if let Some(path) = &cli.command.common().save_config {
        write_file(path, cfg.to_config_string().as_bytes())?;
    }
    match cfg.command {
        Command::Compute => compute(&cfg),
        Command::Sweep => sweep(&cfg),
        Command::McCheck => mc_check(&cfg),
        Command::Plot => plot(&cfg),
    }
}

fn exact_report(cfg: &RunConfig) -> CliResult<(ScmModel, EstimandReport)> {
    let model = ScmModel::new(&cfg.model_params()?)?;
    let rep = report(&model)?;
    Ok((model, rep))
}

fn or_text(x: Option<f64>) -> String {
    x.map_or_else(|| table::NA.to_string(), |v| format!("{v:.6}"))
}

pub fn report_text(model: &ScmModel, rep: &EstimandReport) -> String {
    let mut s = String::new();
    let t = &model.tables;
    let _ = writeln!(s, "alpha_0  {}", t.alpha_0);
    let _ = writeln!(s, "beta_0   {}", t.beta_0);
    let _ = writeln!(s, "P(A=1)   {}", model.p_a);
    let _ = writeln!(s, "P(U=1)   {}", model.p_u);
    let _ = writeln!(s, "P(M=1)   {:.6}", rep.p_m1);
    let _ = writeln!(s, "P(Y=1)   {:.6}", rep.p_y1);
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<10}{:>12}{:>12}{:>12}{:>12}",
        "estimand", "risk A=1", "risk A=0", "difference", "odds ratio"
    );
    for e in Estimand::ALL {
        let r = rep.risk(e);
        let _ = writeln!(
            s,
            "{:<10}{:>12.6}{:>12.6}{:>12.6}{:>12}",
            e.key(),
            r.risk1,
            r.risk0,
            rep.delta(e),
            or_text(rep.odds_ratio(e))
        );
    }
    s
}

fn compute(cfg: &RunConfig) -> CliResult<()> {
    let (model, rep) = exact_report(cfg)?;
    let bytes = match cfg.format {
        Format::Text => report_text(&model, &rep).into_bytes(),
        Format::Csv => csv_bytes(&[Row::new("none", None, Some(&rep))])?,
    };
    emit(cfg.out.as_deref(), &bytes)
}

fn csv_bytes(rows: &[Row]) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    table::write_rows(&mut buf, rows).map_err(|e| CliError::usage(e.to_string()))?;
    Ok(buf)
}

fn sweep(cfg: &RunConfig) -> CliResult<()> {
    let spec = cfg.sweep_spec()?;
    let param = spec.vary.name();
    let rows: Vec<Row> = run_sweep(&spec)?
        .iter()
        .map(|r| match &r.outcome {
            Ok(rep) => Row::new(param, Some(r.param_value), Some(rep)),
            Err(e) => {
                eprintln!("warning: {param} = {}: {e}", r.param_value);
                Row::new(param, Some(r.param_value), None)
            }
        })
        .collect();
    emit(cfg.out.as_deref(), &csv_bytes(&rows)?)?;
    if let Some(path) = &cfg.svg {
        write_file(path, svg::render(&rows, cfg.scale).as_bytes())?;
    }
    Ok(())
}

fn mc_check(cfg: &RunConfig) -> CliResult<()> {
    if cfg.n < MIN_SAMPLES {
        return Err(CliError::usage(format!(
            "n must be at least {MIN_SAMPLES}, got {}",
            cfg.n
        )));
    }
    let seed = cfg.resolve_seed()?;
    let (model, exact) = exact_report(cfg)?;
    let run = mc::run(&model, cfg.n, seed, Execution::default())?;

    let target = |name: &str| match name {
        "p_m1" => exact.p_m1,
        "p_y1" => exact.p_y1,
        _ => Estimand::ALL
            .into_iter()
            .find(|e| e.delta_name() == name)
            .map(|e| exact.delta(e))
            .expect("every additive estimate names an estimand"),
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        "n = {}, seed = {seed}, tolerance = {} SE",
        cfg.n, cfg.tolerance
    );
    let _ = writeln!(
        s,
        "{:<16}{:>14}{:>14}{:>12}{:>8}",
        "quantity", "exact", "monte carlo", "se", "|z|"
    );
    let mut worst: (f64, &str) = (0.0, "");
    for (name, est) in run.additive_estimates() {
        let exact = target(name);
        let z = est.z_score(exact);
        if z > worst.0 || worst.1.is_empty() {
            worst = (z, name);
        }
        let _ = writeln!(
            s,
            "{name:<16}{exact:>14.8}{:>14.8}{:>12.3e}{z:>8.2}",
            est.value, est.se
        );
    }
    let pass = worst.0 <= cfg.tolerance;
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(s, "{verdict} max |z| = {:.2} ({})", worst.0, worst.1);
    emit(None, s.as_bytes())?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Tolerance(format!(
            "{} differs from its exact value by {:.2} standard errors (tolerance {})",
            worst.1, worst.0, cfg.tolerance
        )))
    }
}

fn plot(cfg: &RunConfig) -> CliResult<()> {
    let input = cfg
        .input
        .as_deref()
        .ok_or_else(|| CliError::usage("plot needs a CSV to read (--input)"))?;
    let text = read_file(input)?;
    let rows = table::read_rows(text.as_bytes()).map_err(|message| CliError::Csv {
        path: input.to_path_buf(),
        message,
    })?;
    emit(
        cfg.svg.as_deref().or(cfg.out.as_deref()),
        svg::render(&rows, cfg.scale).as_bytes(),
    )
}
