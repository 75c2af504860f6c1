use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use teichlab::experiments::{run, Experiment, ExperimentConfig};
use teichlab::Error;

/// Closed-geodesic counting experiments on the moduli space of the
/// once-punctured torus.
///
/// Every run prints a structured-text report: params, a CSV block of rows,
/// derived constants, optional named tables and the list of checks. Floats
/// carry 9 significant digits. CSV fields are separated by `;`.
#[derive(Parser, Debug)]
#[command(name = "teichlab", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// `key = value` parameter file
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads (default: all cores)
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Exit with status 3 if any check fails
    #[arg(long)]
    check: bool,
    /// Override one parameter, e.g. `--set r_grid=3,4`
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Exact count of closed geodesics by length.
    ///
    /// Rows: R;N;ratio;N_primitive;ratio_primitive with ratio = N hR / e^{hR}.
    Count(Common),
    /// Closed geodesics that stay in or enter the thin part.
    ///
    /// Rows: delta;R;N1;N_enter. N1 counts classes thin along the whole axis,
    /// N_enter those whose axis reaches systole below delta.
    Thin(Common),
    /// Contraction of the bias functions and the system of inequalities.
    ///
    /// Rows: j;tau;ratio;se;bound. Table `system`: x;y;stratum;violation;se;b.
    BiasVerify(Common),
    /// Separated nets and random-walk trajectories from a thin base point.
    ///
    /// Rows: steps;R;all;thin_filtered;almost_closed. Tables `net_growth`
    /// (tau;count) and `q_recursion` (steps;q;ratio;bound).
    Walk(Common),
    /// Mixing of the geodesic flow on a box of frames.
    ///
    /// Rows: R;estimate;se;mu;mu_squared;z_mu_squared. Negative R rows come
    /// from the reversed flow.
    Mix(Common),
    /// Closed orbits and component census for recurrences of a box.
    ///
    /// Rows: R;events;hyperbolic_events;closed_ok;eps_box;c1_box;
    /// worst_length_error;worst_axis_distance;components;regular;expected;
    /// ratio;within_factor3. Tables `census_r_<R>`:
    /// word;trace;length;count_of_events;est_component_measure.
    Close(Common),
    /// Mapping class group orbit points in Teichmüller balls.
    ///
    /// Rows: systole;tau;count;ratio_raw;ratio_corrected. Tables `spread`,
    /// `chain` and `net_image`.
    Lattice(Common),
    /// Minimal systole along closed geodesics against their length.
    ///
    /// Rows: R;classes;min_systole;bound. Table `classes`:
    /// word;trace;length;min_systole.
    Veech(Common),
    /// Time spent outside the thick part by orbits and closed geodesics.
    ///
    /// Rows: source;R;value;se with source `orbits` (sampled fraction) or
    /// `classes` (count of closed geodesics).
    Recurrence(Common),
    /// Assemble the total count from length bands.
    ///
    /// Rows: lo;hi;count.
    Assemble(Common),
}

impl Cmd {
    fn split(self) -> (Experiment, Common) {
        match self {
            Cmd::Count(c) => (Experiment::Count, c),
            Cmd::Thin(c) => (Experiment::Thin, c),
            Cmd::BiasVerify(c) => (Experiment::BiasVerify, c),
            Cmd::Walk(c) => (Experiment::Walk, c),
            Cmd::Mix(c) => (Experiment::Mix, c),
            Cmd::Close(c) => (Experiment::Close, c),
            Cmd::Lattice(c) => (Experiment::Lattice, c),
            Cmd::Veech(c) => (Experiment::Veech, c),
            Cmd::Recurrence(c) => (Experiment::Recurrence, c),
            Cmd::Assemble(c) => (Experiment::Assemble, c),
        }
    }
}

const EXIT_USAGE: u8 = 2;
const EXIT_CHECK: u8 = 3;

fn configure(exp: Experiment, c: &Common) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &c.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::Config {
                field: "--config".into(),
                msg: format!("{}: {e}", p.display()),
            })?;
            ExperimentConfig::parse(&text, Some(exp))?
        }
        None => ExperimentConfig::defaults(exp),
    };
    for kv in &c.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config {
            field: "--set".into(),
            msg: format!("expected KEY=VALUE, got `{kv}`"),
        })?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(w) = c.workers {
        cfg.set("workers", &w.to_string())?;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (exp, common) = cli.cmd.split();
    let cfg = match configure(exp, &common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("teichlab: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e @ (Error::Config { .. } | Error::UnknownExperiment(_))) => {
            eprintln!("teichlab: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => {
            eprintln!("teichlab: {exp}: {e}");
            return ExitCode::FAILURE;
        }
    };
    let text = report.render();
    match &common.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("teichlab: cannot write {}: {e}", p.display());
                return ExitCode::FAILURE;
            }
        }
        None => print!("{text}"),
    }
    if common.check && !report.passed() {
        for c in report.checks.iter().filter(|c| !c.pass) {
            eprintln!(
                "teichlab: check `{}` failed: {} (required {})",
                c.name, c.value, c.requirement
            );
        }
        return ExitCode::from(EXIT_CHECK);
    }
    ExitCode::SUCCESS
}
