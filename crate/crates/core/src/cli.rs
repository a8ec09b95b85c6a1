//! The `leglab` command line: argument parsing, validation, the three
//! commands and report output.

use std::f64::consts::PI;
use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::convergence::OrderFit;
use crate::error::{Error, Result};
use crate::flow::{run_flow, write_history_csv, FlowOptions, FlowStatus};
use crate::grid::{check_grid_size, Scheme};
use crate::grid_ops::{chart_integral_report, integral_report, DerivedGeometry};
use crate::immersions::{catalog, resample_to_grid, CatalogParams, Immersion, SurfaceKind};
use crate::report::{Report, Value};
use crate::verification::{
    expected_values, pointwise_suite, sasakian_suite, RefinementStudy, GRID_RESIDUALS,
};

/// Random points per pointwise suite.
pub const POINTWISE_SAMPLES: usize = 1000;
/// Tolerance for pointwise curvature values against known constants.
pub const VALUE_TOL: f64 = 1e-9;
/// Tolerance for exact integral values on the catalog tori.
pub const INTEGRAL_TOL: f64 = 1e-8;
/// `|Σ_Simons|` accepted on perturbed Legendrian tori.
pub const SIMONS_TOL: f64 = 1e-3;
/// Residuals at or below this level count as converged in refinement fits.
pub const FIT_FLOOR: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(name = "leglab", version, about = "Legendrian surfaces in the contact 5-sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Verify,
    Integrals,
    Flow,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Pointwise and grid identity checks with convergence fits.
    Verify(RunArgs),
    /// Integral report with the applicable identities asserted.
    Integrals(RunArgs),
    /// Legendrian area descent; writes flow.csv.
    Flow(RunArgs),
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// legendrian-torus, equatorial-sphere, clifford-s3 or veronese-s4.
    #[arg(long, default_value = "legendrian-torus")]
    pub surface: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Perturbation size for legendrian-torus.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Grid size N (even, 8..=512).
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    /// fd2, fd4 or spectral.
    #[arg(long, default_value = "spectral")]
    pub scheme: String,
    /// Flow stops once ‖div JH‖₂ falls below tol times its initial value.
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 0.05)]
    pub tau0: f64,
    #[arg(long, default_value_t = 5000)]
    pub max_steps: usize,
    /// Output directory for report.json, report.txt and flow.csv.
    #[arg(long, default_value = "leglab-out")]
    pub out: PathBuf,
}

/// A validated run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: CommandKind,
    pub surface_name: String,
    pub params: CatalogParams,
    pub n: usize,
    pub scheme: Scheme,
    pub flow: FlowOptions,
    pub out: PathBuf,
}

pub const MAX_GRID: usize = 512;

impl RunConfig {
    pub fn from_args(command: CommandKind, a: &RunArgs) -> Result<Self> {
        check_grid_size(a.grid)?;
        if a.grid > MAX_GRID {
            return Err(Error::InvalidGridSize(a.grid));
        }
        if !(a.tol > 0.0 && a.tol.is_finite()) {
            return Err(Error::Config(format!("--tol must be positive, got {}", a.tol)));
        }
        if !(a.tau0 > 0.0 && a.tau0.is_finite()) {
            return Err(Error::Config(format!("--tau0 must be positive, got {}", a.tau0)));
        }
        if !a.theta.is_finite() || !a.epsilon.is_finite() {
            return Err(Error::Config("--theta and --epsilon must be finite".into()));
        }
        let params = CatalogParams { theta: a.theta, epsilon: a.epsilon, seed: a.seed };
        catalog(&a.surface, params)?;
        let flow = FlowOptions { tau0: a.tau0, tol: a.tol, max_steps: a.max_steps, ..FlowOptions::default() };
        Ok(RunConfig {
            command,
            surface_name: a.surface.clone(),
            params,
            n: a.grid,
            scheme: a.scheme.parse()?,
            flow,
            out: a.out.clone(),
        })
    }

    pub fn surface(&self) -> Result<Immersion> {
        catalog(&self.surface_name, self.params)
    }

    fn echo(&self, r: &mut Report) {
        r.text("config.command", format!("{:?}", self.command).to_lowercase());
        r.text("config.surface", self.surface_name.clone());
        r.number("config.theta", self.params.theta);
        r.number("config.epsilon", self.params.epsilon);
        r.number("config.seed", self.params.seed as f64);
        r.number("config.grid", self.n as f64);
        r.text("config.scheme", self.scheme.to_string());
        if self.command == CommandKind::Flow {
            r.number("config.tol", self.flow.tol);
            r.number("config.tau0", self.flow.tau0);
            r.number("config.max_steps", self.flow.max_steps as f64);
        }
    }
}

/// Result of one command: the report, the exit code and the flow history
/// (flow command only).
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub exit_code: i32,
    pub csv: Option<Vec<u8>>,
}

/// Collects named assertions and records them in the report.
#[derive(Default)]
struct Checks {
    failed: Vec<String>,
}

impl Checks {
    fn check(&mut self, r: &mut Report, name: &str, ok: bool) {
        r.flag(format!("assert.{name}"), ok);
        if !ok {
            self.failed.push(name.to_string());
        }
    }

    fn within(&mut self, r: &mut Report, name: &str, value: f64, target: f64, tol: f64) {
        self.check(r, name, (value - target).abs() <= tol);
    }

    fn finish(self, r: &mut Report) -> i32 {
        r.flag("passed", self.failed.is_empty());
        r.text("failures", self.failed.join(","));
        i32::from(!self.failed.is_empty())
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let surface = cfg.surface()?;
    let mut r = Report::new();
    cfg.echo(&mut r);
    let mut checks = Checks::default();
    let expected = expected_values(&surface);

    let p = pointwise_suite(&surface, POINTWISE_SAMPLES, cfg.params.seed)?;
    r.number("pointwise.points", p.points as f64);
    r.number("S_min", p.s_min);
    r.number("S_max", p.s_max);
    r.number("H_max", p.h_max);
    r.number("legendrian_residual_max", p.legendrian_residual_max);
    r.number("frame_defect_max", p.frame_defect_max);
    r.number("gauss_residual_max", p.gauss_max);
    r.number("pair_symmetry_max", p.pair_symmetry_max);
    let legendrian = surface.is_legendrian();
    r.flag("legendrian", legendrian);
    if let Some(x) = p.s_max_dev {
        r.number("S_max_dev", x);
        checks.check(&mut r, "S_value", x <= VALUE_TOL);
    }
    if let Some(x) = p.k_max_dev {
        r.number("K_max_dev", x);
        checks.check(&mut r, "K_value", x <= VALUE_TOL);
    }
    if let Some(x) = p.alpha_u_max_dev {
        r.number("alpha_u_max_dev", x);
        checks.check(&mut r, "alpha_u_value", x <= 1e-12);
    }
    if expected.minimal {
        checks.check(&mut r, "minimal", p.h_max <= VALUE_TOL);
    }
    if legendrian {
        checks.check(&mut r, "legendrian_residual", p.legendrian_residual_max <= 1e-12);
    } else {
        checks.check(&mut r, "certified_non_legendrian", p.legendrian_residual_max > 1e-3);
    }
    checks.check(&mut r, "frame_orthonormal", p.frame_defect_max <= 1e-10);
    checks.check(&mut r, "gauss_equation", p.gauss_max <= VALUE_TOL);
    checks.check(&mut r, "h_pair_symmetry", p.pair_symmetry_max <= VALUE_TOL);
    if let (Some(h3), Some(sym)) = (p.h3_max, p.symmetry_max) {
        r.number("h3_max", h3);
        r.number("h_symmetry_max", sym);
        checks.check(&mut r, "h3_vanishes", h3 <= 1e-7);
        checks.check(&mut r, "h_three_index_symmetry", sym <= 1e-7);
    }
    let (sr, sp) = sasakian_suite(POINTWISE_SAMPLES, cfg.params.seed)?;
    r.number("sasakian.reeb_residual_max", sr);
    r.number("sasakian.phi_residual_max", sp);
    checks.check(&mut r, "sasakian", sr.max(sp) <= 1e-10);

    if surface.is_doubly_periodic() && legendrian {
        let study = RefinementStudy::run(&surface, &[cfg.n, 2 * cfg.n], cfg.scheme)?;
        r.merge_prefixed("", &study.to_report());
        let required = cfg.scheme.required_fit_order();
        for name in GRID_RESIDUALS {
            let fit = study.fit(name).expect("fit per residual");
            checks.check(&mut r, &format!("converges.{name}"), fit.passes(required, FIT_FLOOR));
        }
        let sizes: Vec<usize> = study.runs.iter().map(|x| x.n).collect();
        let simons: Vec<f64> = study.runs.iter().map(|x| x.sigma_simons.abs()).collect();
        let fit = OrderFit::new(&sizes, &simons);
        r.number("order.Sigma_Simons", fit.order);
        checks.check(&mut r, "converges.Sigma_Simons", fit.passes(required, FIT_FLOOR));
        let li = study.runs.iter().map(|x| x.li_margin_min).fold(f64::INFINITY, f64::min);
        checks.check(&mut r, "li_margin", li >= -INTEGRAL_TOL);
        r.text("grid_suite", "run");
    } else {
        r.text("grid_suite", if legendrian { "skipped: chart is not doubly periodic" } else { "skipped: not Legendrian" });
    }
    let exit_code = checks.finish(&mut r);
    Ok(Outcome { report: r, exit_code, csv: None })
}

pub fn cmd_integrals(cfg: &RunConfig) -> Result<Outcome> {
    let surface = cfg.surface()?;
    let mut r = Report::new();
    cfg.echo(&mut r);
    let mut checks = Checks::default();
    let ir = if surface.is_doubly_periodic() {
        let grid = resample_to_grid(&surface, cfg.n, cfg.scheme)?;
        integral_report(&DerivedGeometry::new(&grid)?)?
    } else {
        chart_integral_report(&surface, cfg.n)?
    };
    let rep = ir.to_report();
    r.merge_prefixed("", &rep);
    let num = |k: &str| rep.get_number(k).unwrap_or(f64::NAN);
    let torus_area = 4.0 * PI * PI / 3f64.sqrt();
    match surface.kind() {
        SurfaceKind::LegendrianTorus { .. } => {
            checks.within(&mut r, "area", ir.area, torus_area, INTEGRAL_TOL);
            checks.within(&mut r, "W", ir.willmore, 2.0 * torus_area, INTEGRAL_TOL);
            checks.within(&mut r, "I1", ir.pinching[0], 0.0, INTEGRAL_TOL);
            checks.within(&mut r, "I2", ir.pinching[1], 0.0, INTEGRAL_TOL);
            checks.within(&mut r, "Sigma_Simons", num("Sigma_Simons"), 0.0, INTEGRAL_TOL);
        }
        SurfaceKind::PerturbedLegendrianTorus { .. } => {
            checks.within(&mut r, "Sigma_Simons", num("Sigma_Simons"), 0.0, SIMONS_TOL);
        }
        SurfaceKind::CliffordS3 => {
            checks.within(&mut r, "area", ir.area, 2.0 * PI * PI, INTEGRAL_TOL);
            checks.within(&mut r, "I3", ir.pinching[2], 0.0, INTEGRAL_TOL);
        }
        SurfaceKind::VeroneseS4 => {
            checks.check(&mut r, "I4_pointwise_zero", ir.pinching_sup[3] <= INTEGRAL_TOL);
        }
        SurfaceKind::EquatorialLegendrianSphere => {
            checks.check(&mut r, "I3_pointwise_zero", ir.pinching_sup[2] <= INTEGRAL_TOL);
        }
    }
    if ir.legendrian && surface.is_doubly_periodic() {
        checks.check(&mut r, "li_margin", num("li_margin_min") >= -INTEGRAL_TOL);
    }
    let exit_code = checks.finish(&mut r);
    Ok(Outcome { report: r, exit_code, csv: None })
}

pub fn cmd_flow(cfg: &RunConfig) -> Result<Outcome> {
    let surface = cfg.surface()?;
    if !surface.is_doubly_periodic() {
        return Err(Error::NotPeriodic(surface.name().into()));
    }
    let grid = resample_to_grid(&surface, cfg.n, cfg.scheme)?;
    let outcome = run_flow(grid, &cfg.flow)?;
    let mut r = Report::new();
    cfg.echo(&mut r);
    r.merge_prefixed("", &outcome.report);
    let converged = outcome.status == FlowStatus::Converged;
    r.flag("passed", converged);
    let mut csv = Vec::new();
    write_history_csv(&outcome.state.records, &mut csv)?;
    Ok(Outcome { report: r, exit_code: i32::from(!converged), csv: Some(csv) })
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command {
        CommandKind::Verify => cmd_verify(cfg),
        CommandKind::Integrals => cmd_integrals(cfg),
        CommandKind::Flow => cmd_flow(cfg),
    }
}

/// Writes report.json, report.txt and, when present, flow.csv.
pub fn write_outputs(cfg: &RunConfig, outcome: &Outcome) -> Result<()> {
    fs::create_dir_all(&cfg.out)?;
    fs::write(cfg.out.join("report.json"), outcome.report.to_json())?;
    fs::write(cfg.out.join("report.txt"), outcome.report.to_text())?;
    if let Some(csv) = &outcome.csv {
        let file = fs::File::create(cfg.out.join("flow.csv"))?;
        std::io::Write::write_all(&mut BufWriter::new(file), csv)?;
    }
    Ok(())
}

/// Errors caused by the invocation rather than by the computation.
pub fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_) | Error::UnknownSurface(_) | Error::InvalidGridSize(_) | Error::NotPeriodic(_)
    )
}

impl Command {
    pub fn split(&self) -> (CommandKind, &RunArgs) {
        match self {
            Command::Verify(a) => (CommandKind::Verify, a),
            Command::Integrals(a) => (CommandKind::Integrals, a),
            Command::Flow(a) => (CommandKind::Flow, a),
        }
    }
}

/// Runs a parsed command line end to end and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let (kind, args) = cli.command.split();
    let cfg = match RunConfig::from_args(kind, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("leglab: {e}");
            return 2;
        }
    };
    let outcome = match execute(&cfg) {
        Ok(o) => o,
        Err(e) if is_usage_error(&e) => {
            eprintln!("leglab: {e}");
            return 2;
        }
        Err(e) => {
            let mut r = Report::new();
            cfg.echo(&mut r);
            r.flag("passed", false);
            r.text("error", e.to_string());
            eprintln!("leglab: {e}");
            Outcome { report: r, exit_code: 1, csv: None }
        }
    };
    if let Err(e) = write_outputs(&cfg, &outcome) {
        eprintln!("leglab: cannot write outputs: {e}");
        return 1;
    }
    if outcome.exit_code != 0 {
        if let Some(Value::Text(f)) = outcome.report.get("failures") {
            if !f.is_empty() {
                eprintln!("leglab: failed assertions: {f}");
            }
        }
    }
    outcome.exit_code
}

/// Caps the rayon pool from `LEGLAB_THREADS`.
pub fn configure_threads(value: Option<&str>) -> Result<()> {
    let Some(v) = value else { return Ok(()) };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|t| *t > 0)
        .ok_or_else(|| Error::Config(format!("LEGLAB_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(grid: usize) -> RunArgs {
        let cli = Cli::parse_from(["leglab", "verify", "--grid", &grid.to_string()]);
        match cli.command {
            Command::Verify(a) => a,
            _ => unreachable!(),
        }
    }

    #[test]
    fn grid_bounds() {
        assert!(RunConfig::from_args(CommandKind::Verify, &args(7)).is_err());
        assert!(RunConfig::from_args(CommandKind::Verify, &args(6)).is_err());
        assert!(RunConfig::from_args(CommandKind::Verify, &args(514)).is_err());
        assert!(RunConfig::from_args(CommandKind::Verify, &args(8)).is_ok());
        assert!(RunConfig::from_args(CommandKind::Verify, &args(512)).is_ok());
    }

    #[test]
    fn tolerances_must_be_positive() {
        let mut a = args(16);
        a.tol = 0.0;
        let e = RunConfig::from_args(CommandKind::Flow, &a).unwrap_err();
        assert!(is_usage_error(&e));
    }

    #[test]
    fn unknown_surface_is_usage_error() {
        let mut a = args(16);
        a.surface = "klein-bottle".into();
        assert!(is_usage_error(&RunConfig::from_args(CommandKind::Verify, &a).unwrap_err()));
    }

    #[test]
    fn thread_env_rejects_garbage() {
        assert!(configure_threads(Some("zero")).is_err());
        assert!(configure_threads(Some("0")).is_err());
        assert!(configure_threads(None).is_ok());
    }
}
