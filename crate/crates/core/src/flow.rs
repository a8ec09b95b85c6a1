//! Area descent within Legendrian deformations.
//!
//! A function `f` on the surface generates the Legendrian variation field
//! `V_f = f R + ½ J ∇f`; along it the first variation of area is
//! `-∫ f div_g(J H) dμ`, so `f = div_g(J H)` (optionally smoothed by an
//! SPD Fourier multiplier) is a descent direction.

use std::io::Write;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::contact::j_apply;
use crate::error::{Error, Result};
use crate::grid::{Axis, Grid, GridScalar, GridSurface};
use crate::grid_ops::{
    area, div_jh, el_residual, el_residual_contact, field_sup, gradient, integral_report, l2_norm,
    pairwise_sum, quadrature, DerivedGeometry,
};
use crate::report::Report;
use crate::vec6::Vec6;

/// `V_f = f R + ½ J grad_g f` at every node.
///
/// With `α = <·, J p>` this is the field whose flow keeps `α(∂_i)` at zero
/// to first order: `d/dt α(∂_i) = ∂_i α(V) - 2<V, J ∂_i> = ∂_i f - ∂_i f`.
pub fn variation_field(geo: &DerivedGeometry, f: &GridScalar) -> Grid<Vec6> {
    let grad = gradient(f, geo);
    Grid::from_fn(geo.n(), |a, b| {
        let i = a * geo.n() + b;
        let p = geo.positions[i];
        j_apply(p) * f[i] + j_apply(geo.tangent_vector(i, grad[i])) * 0.5
    })
}

/// Moves every node by `t V` and projects back onto the sphere.
pub fn displace(surface: &GridSurface, field: &Grid<Vec6>, t: f64) -> Result<GridSurface> {
    let moved = surface.positions().zip_map(field, |p, v| *p + *v * t);
    GridSurface::from_unnormalized(moved, surface.scheme())
}

/// Pulls a nearly Legendrian surface back towards `α|_S = 0`.
///
/// Moving by `J X` with `X` tangent changes `β_i = α(∂_i)` at rate
/// `-2 X_i`, so `X = ½ β^♯` cancels the residual to first order. Each pass
/// squares the residual; iteration stops at `target` or after `passes`.
pub fn restore_legendrian(surface: &GridSurface, passes: usize, target: f64) -> Result<GridSurface> {
    let (mut best, mut shift, mut worst) = restoring_shift(surface.clone());
    for _ in 0..passes {
        if worst <= target {
            break;
        }
        let (next, next_shift, next_worst) = restoring_shift(displace(&best, &shift, 1.0)?);
        // On fine grids the correction stops contracting once aliasing
        // dominates; keep the best iterate rather than amplifying noise.
        if next_worst > 0.5 * worst {
            if next_worst < worst {
                best = next;
            }
            break;
        }
        (best, shift, worst) = (next, next_shift, next_worst);
    }
    Ok(best)
}

fn legendrian_sup(surface: &GridSurface) -> f64 {
    restoring_shift(surface.clone()).2
}

fn restoring_shift(surface: GridSurface) -> (GridSurface, Grid<Vec6>, f64) {
    let diff = surface.differentiator();
    let x = surface.positions();
    let xu = diff.d(x, Axis::U);
    let xv = diff.d(x, Axis::V);
    let n = surface.n();
    let per_node: Vec<(Vec6, f64)> = (0..n * n)
        .map(|i| {
            let p = x[i];
            let jp = j_apply(p);
            let t = [xu[i].reject(&p), xv[i].reject(&p)];
            let beta = [t[0].dot(&jp), t[1].dot(&jp)];
            let (e, f, g) = (t[0].dot(&t[0]), t[0].dot(&t[1]), t[1].dot(&t[1]));
            let det = e * g - f * f;
            let up = [(g * beta[0] - f * beta[1]) / det, (e * beta[1] - f * beta[0]) / det];
            (j_apply(t[0] * up[0] + t[1] * up[1]) * 0.5, beta[0].abs().max(beta[1].abs()))
        })
        .collect();
    let worst = per_node.iter().map(|r| r.1).fold(0.0, f64::max);
    let raw = Grid::new(n, per_node.into_iter().map(|r| r.0).collect()).expect("node count");
    // Unfiltered, the near-Nyquist part of the shift aliases against the
    // positions and the correction overshoots.
    let shift = low_pass(&raw);
    (surface, shift, worst)
}

/// Area of a grid surface from first derivatives only.
pub fn surface_area(surface: &GridSurface) -> f64 {
    let diff = surface.differentiator();
    let x = surface.positions();
    let xu = diff.d(x, Axis::U);
    let xv = diff.d(x, Axis::V);
    let dens: Vec<f64> = (0..x.len())
        .map(|i| {
            let p = x[i];
            let a = xu[i].reject(&p);
            let b = xv[i].reject(&p);
            let (e, f, g) = (a.dot(&a), a.dot(&b), b.dot(&b));
            (e * g - f * f).max(0.0).sqrt()
        })
        .collect();
    let h = diff.spacing();
    pairwise_sum(&dens) * h * h
}

/// Three evaluations of the first variation of area along `V_f`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FirstVariation {
    /// `-2 ∫ <H, V_f> dμ` (`H` is half the trace of `B`).
    pub geometric: f64,
    /// `-∫ f div_g(J H) dμ`.
    pub divergence: f64,
    /// `[A(L_ε) - A(L_{-ε})] / 2ε` along `p ↦ (p ± ε V_f)/|p ± ε V_f|`.
    pub finite_difference: f64,
}

impl FirstVariation {
    /// Largest pairwise difference relative to the largest magnitude.
    pub fn relative_spread(&self) -> f64 {
        let v = [self.geometric, self.divergence, self.finite_difference];
        let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let spread = v.iter().fold(f64::NEG_INFINITY, |m, x| m.max(*x))
            - v.iter().fold(f64::INFINITY, |m, x| m.min(*x));
        if scale == 0.0 { 0.0 } else { spread / scale }
    }
}

pub fn first_variation_check(
    surface: &GridSurface,
    geo: &DerivedGeometry,
    f: &GridScalar,
    eps: f64,
) -> Result<FirstVariation> {
    if !(eps > 0.0 && eps <= 1e-2) {
        return Err(Error::Config(format!("finite-difference step {eps} outside (0, 1e-2]")));
    }
    let field = variation_field(geo, f);
    let h = geo.mean_curvature();
    let pairing = h.zip_map(&field, |a, b| a.dot(b));
    let geometric = -2.0 * quadrature(&pairing, geo);
    let div = div_jh(geo)?;
    let divergence = -quadrature(&f.zip_map(&div.field, |a, b| a * b), geo);
    let plus = surface_area(&displace(surface, &field, eps)?);
    let minus = surface_area(&displace(surface, &field, -eps)?);
    Ok(FirstVariation { geometric, divergence, finite_difference: (plus - minus) / (2.0 * eps) })
}

/// Smoothing applied to `div_g(J H)` before it drives the flow.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Preconditioner {
    /// `f = div_g(J H)` as is.
    None,
    /// `f = P[√g div_g(J H)]` with the Fourier multiplier
    /// `1/(1 + κ ḡ^{ij} k_i k_j)^2`, `ḡ` the grid-averaged inverse metric.
    Sobolev { kappa: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowOptions {
    pub tau0: f64,
    pub max_steps: usize,
    /// Stop once `‖div JH‖₂ ≤ tol · initial`.
    pub tol: f64,
    /// Absolute `‖div JH‖₂` treated as already stationary.
    pub stationary_floor: f64,
    pub preconditioner: Preconditioner,
    /// Legendrian residual at which the flow aborts.
    pub abort_threshold: f64,
    pub max_halvings: usize,
    pub min_tau: f64,
    /// Largest Legendrian residual a step may leave after restoration.
    pub step_legendrian_tol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            tau0: 0.05,
            max_steps: 5000,
            tol: 1e-4,
            stationary_floor: 1e-10,
            preconditioner: Preconditioner::Sobolev { kappa: 0.25 },
            abort_threshold: 1e-3,
            max_halvings: 20,
            min_tau: 1e-12,
            step_legendrian_tol: 1e-6,
        }
    }
}

/// One row of the flow history.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FlowRecord {
    pub step: usize,
    pub tau: f64,
    pub area: f64,
    #[serde(rename = "div_JH_l2")]
    pub div_jh_l2: f64,
    pub legendrian_residual: f64,
    pub el_residual_sup: f64,
}

#[derive(Clone, Debug)]
pub struct FlowState {
    pub surface: GridSurface,
    pub step_index: usize,
    /// Step size tried first on the next step.
    pub tau: f64,
    /// Step size of the step that produced this state; zero initially.
    pub accepted_tau: f64,
    pub area_history: Vec<f64>,
    /// `(‖div JH‖₂, Legendrian residual, E-L residual sup)` per accepted state.
    pub residual_history: Vec<(f64, f64, f64)>,
    pub records: Vec<FlowRecord>,
}

impl FlowState {
    pub fn new(surface: GridSurface, tau0: f64) -> Self {
        FlowState {
            surface,
            step_index: 0,
            tau: tau0,
            accepted_tau: 0.0,
            area_history: Vec::new(),
            residual_history: Vec::new(),
            records: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FlowStatus {
    Converged,
    MaxSteps,
    Stalled,
    Aborted,
}

impl FlowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            FlowStatus::Converged => "converged",
            FlowStatus::MaxSteps => "max_steps",
            FlowStatus::Stalled => "stalled",
            FlowStatus::Aborted => "aborted",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FlowOutcome {
    pub state: FlowState,
    pub status: FlowStatus,
    pub report: Report,
    pub message: Option<String>,
}

/// 2-D periodic Fourier transform on N×N grids.
struct Fourier2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fourier2 {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fourier2 { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        let n = self.n;
        let plan = if forward { &self.fwd } else { &self.inv };
        for row in data.chunks_mut(n) {
            plan.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for b in 0..n {
            for a in 0..n {
                col[a] = data[a * n + b];
            }
            plan.process(&mut col);
            for a in 0..n {
                data[a * n + b] = col[a];
            }
        }
    }

    fn apply_multiplier(&self, f: &GridScalar, m: impl Fn(f64, f64) -> f64) -> GridScalar {
        let n = self.n;
        let mut buf: Vec<Complex64> = f.values().iter().map(|x| Complex64::new(*x, 0.0)).collect();
        self.transform(&mut buf, true);
        let wave = |j: usize| if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        for (i, z) in buf.iter_mut().enumerate() {
            *z *= m(wave(i / n), wave(i % n));
        }
        self.transform(&mut buf, false);
        let scale = 1.0 / (n * n) as f64;
        Grid::new(n, buf.iter().map(|z| z.re * scale).collect()).expect("node count")
    }
}

/// Exponential low-pass filter `exp(-36 (|k|_∞ / k_max)^16)` on every
/// coordinate of a Vec6 field.
fn low_pass(field: &Grid<Vec6>) -> Grid<Vec6> {
    let n = field.n();
    let fourier = Fourier2::new(n);
    let kmax = (n / 2) as f64;
    let comps: Vec<GridScalar> = (0..6)
        .map(|c| {
            fourier.apply_multiplier(&field.map(|p| p[c]), |ku, kv| {
                let r = ku.abs().max(kv.abs()) / kmax;
                (-36.0 * r.powi(16)).exp()
            })
        })
        .collect();
    Grid::from_fn(n, |a, b| {
        let i = a * n + b;
        Vec6(std::array::from_fn(|c| comps[c][i]))
    })
}

/// The function driving one flow step.
pub fn descent_function(geo: &DerivedGeometry, div: &GridScalar, pre: Preconditioner) -> GridScalar {
    match pre {
        Preconditioner::None => div.clone(),
        Preconditioner::Sobolev { kappa } => {
            let n = geo.n();
            let w = div.zip_map(&geo.sqrt_det_g, |a, b| a * b);
            let mut gbar = [[0.0; 2]; 2];
            for d in &geo.data {
                for i in 0..2 {
                    for j in 0..2 {
                        gbar[i][j] += d.ginv[i][j] / (n * n) as f64;
                    }
                }
            }
            Fourier2::new(n).apply_multiplier(&w, |ku, kv| {
                let mu = gbar[0][0] * ku * ku + 2.0 * gbar[0][1] * ku * kv + gbar[1][1] * kv * kv;
                1.0 / (1.0 + kappa * mu).powi(2)
            })
        }
    }
}

fn step_with(
    state: &FlowState,
    geo: &DerivedGeometry,
    div: &GridScalar,
    current_area: f64,
    options: &FlowOptions,
) -> Result<FlowState> {
    let f = descent_function(geo, div, options.preconditioner);
    let field = variation_field(geo, &f);
    let mut tau = state.tau;
    for halvings in 0..=options.max_halvings {
        if tau < options.min_tau {
            return Err(Error::StepUnderflow { tau, halvings });
        }
        let candidate = restore_legendrian(&displace(&state.surface, &field, tau)?, 4, 1e-14)?;
        let new_area = surface_area(&candidate);
        if new_area < current_area && legendrian_sup(&candidate) <= options.step_legendrian_tol {
            let mut next = state.clone();
            next.surface = candidate;
            next.step_index += 1;
            next.tau = (2.0 * tau).min(options.tau0);
            next.accepted_tau = tau;
            return Ok(next);
        }
        tau *= 0.5;
    }
    Err(Error::StepUnderflow { tau, halvings: options.max_halvings })
}

/// One accepted descent step with monotone line search.
pub fn flow_step(state: &FlowState, geo: &DerivedGeometry, options: &FlowOptions) -> Result<FlowState> {
    let div = div_jh(geo)?;
    step_with(state, geo, &div.field, surface_area(&state.surface), options)
}

/// Measures the current state and appends it to the histories.
fn observe(state: &mut FlowState, geo: &DerivedGeometry, div_l2: f64) -> Result<FlowRecord> {
    let area_now = area(geo);
    let legendrian = geo.legendrian_residual();
    let el = field_sup(&el_residual(geo)?);
    let record = FlowRecord {
        step: state.step_index,
        tau: state.accepted_tau,
        area: area_now,
        div_jh_l2: div_l2,
        legendrian_residual: legendrian,
        el_residual_sup: el,
    };
    state.area_history.push(area_now);
    state.residual_history.push((div_l2, legendrian, el));
    state.records.push(record);
    Ok(record)
}

/// Runs the descent until `‖div JH‖₂` falls below `tol` times its initial
/// value, the step budget is spent, the line search stalls or the
/// Legendrian residual trips the abort threshold.
pub fn run_flow(surface: GridSurface, options: &FlowOptions) -> Result<FlowOutcome> {
    if !(options.tau0 > 0.0 && options.tol > 0.0) {
        return Err(Error::Config("tau0 and tol must be positive".into()));
    }
    let mut state = FlowState::new(surface, options.tau0);
    let mut initial = None;
    let (status, message, geo) = loop {
        let geo = DerivedGeometry::new(&state.surface)?;
        let div = div_jh(&geo)?;
        let l2 = l2_norm(&div.field, &geo);
        let record = observe(&mut state, &geo, l2)?;
        let initial_l2 = *initial.get_or_insert(l2);
        if record.legendrian_residual > options.abort_threshold {
            let err = Error::LegendrianDrift {
                residual: record.legendrian_residual,
                threshold: options.abort_threshold,
            };
            break (FlowStatus::Aborted, Some(err.to_string()), geo);
        }
        if l2 <= options.tol * initial_l2 || l2 <= options.stationary_floor {
            break (FlowStatus::Converged, None, geo);
        }
        if state.step_index >= options.max_steps {
            break (FlowStatus::MaxSteps, None, geo);
        }
        match step_with(&state, &geo, &div.field, record.area, options) {
            Ok(next) => state = next,
            Err(e @ Error::StepUnderflow { .. }) => break (FlowStatus::Stalled, Some(e.to_string()), geo),
            Err(e) => return Err(e),
        }
    };
    let mut report = Report::new();
    report.text("flow.status", status.as_str());
    report.number("flow.steps", state.step_index as f64);
    report.number("flow.div_JH_l2_initial", initial.unwrap_or(0.0));
    let last = *state.records.last().expect("at least one observation");
    report.number("flow.div_JH_l2_final", last.div_jh_l2);
    report.number("flow.div_JH_l2_ratio", ratio(last.div_jh_l2, initial.unwrap_or(0.0)));
    let max_drift = state.residual_history.iter().map(|r| r.1).fold(0.0, f64::max);
    report.number("flow.legendrian_residual_max", max_drift);
    report.flag("flow.area_strictly_decreasing", state.area_history.windows(2).all(|w| w[1] < w[0]));
    report.series("flow.area_history", state.area_history.clone());
    report.series("flow.div_JH_l2_history", state.residual_history.iter().map(|r| r.0).collect());
    report.series("flow.legendrian_residual_history", state.residual_history.iter().map(|r| r.1).collect());
    report.series("flow.el_residual_history", state.residual_history.iter().map(|r| r.2).collect());
    if let Some(m) = &message {
        report.text("flow.message", m.clone());
    }
    if status != FlowStatus::Aborted {
        report.merge_prefixed("", &integral_report(&geo)?.to_report());
        report.number("el_residual_xi_sup", field_sup(&el_residual_contact(&geo)?));
    }
    Ok(FlowOutcome { state, status, report, message })
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 { 0.0 } else { a / b }
}

pub const CSV_COLUMNS: [&str; 6] =
    ["step", "tau", "area", "div_JH_l2", "legendrian_residual", "el_residual_sup"];

/// Writes the flow history as CSV with a header row.
pub fn write_history_csv<W: Write>(records: &[FlowRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::{contact_form, SpherePoint};
    use crate::grid::Scheme;
    use crate::immersions::{grid_legendrian_residual, resample_to_grid, Immersion};
    use std::f64::consts::TAU;

    fn torus(n: usize) -> GridSurface {
        resample_to_grid(&Immersion::legendrian_torus(0.0), n, Scheme::Spectral).unwrap()
    }

    fn scalar(n: usize, f: impl Fn(f64, f64) -> f64) -> GridScalar {
        let h = TAU / n as f64;
        Grid::from_fn(n, |a, b| f(a as f64 * h, b as f64 * h))
    }

    #[test]
    fn constant_function_gives_reeb_drift() {
        let s = torus(16);
        let geo = DerivedGeometry::new(&s).unwrap();
        let v = variation_field(&geo, &scalar(16, |_, _| 0.7));
        for i in 0..256 {
            assert!((v[i] - j_apply(geo.positions[i]) * 0.7).norm() < 1e-12);
        }
    }

    #[test]
    fn contact_value_of_field_is_f() {
        let s = torus(16);
        let geo = DerivedGeometry::new(&s).unwrap();
        let f = scalar(16, |u, v| (u + 2.0 * v).sin() + 0.3);
        let v = variation_field(&geo, &f);
        for i in 0..256 {
            let p = SpherePoint::normalize(geo.positions[i]);
            assert!((contact_form(&p, &v[i]) - f[i]).abs() <= 1e-10);
        }
    }

    #[test]
    fn euler_step_drift_is_quadratic() {
        let s = torus(32);
        let geo = DerivedGeometry::new(&s).unwrap();
        let field = variation_field(&geo, &scalar(32, |u, _| u.cos()));
        let drift: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
            .iter()
            .map(|&t| grid_legendrian_residual(&displace(&s, &field, t).unwrap()))
            .collect();
        for w in drift.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((order - 2.0).abs() < 0.1, "{drift:?}");
        }
    }

    #[test]
    fn stationary_torus_stops_at_step_zero() {
        let out = run_flow(torus(16), &FlowOptions::default()).unwrap();
        assert_eq!(out.status, FlowStatus::Converged);
        assert_eq!(out.state.step_index, 0);
        assert_eq!(out.state.records.len(), 1);
    }

    #[test]
    fn torus_first_variation_vanishes() {
        let s = torus(16);
        let geo = DerivedGeometry::new(&s).unwrap();
        let fv = first_variation_check(&s, &geo, &scalar(16, |u, v| (u - v).cos()), 1e-3).unwrap();
        assert!(fv.geometric.abs() < 1e-10 && fv.divergence.abs() < 1e-10);
        assert!(fv.finite_difference.abs() < 1e-8);
        assert!(first_variation_check(&s, &geo, &scalar(16, |_, _| 1.0), 0.1).is_err());
    }

    #[test]
    fn csv_has_header() {
        let rec = FlowRecord {
            step: 0,
            tau: 0.0,
            area: 1.0,
            div_jh_l2: 2.0,
            legendrian_residual: 0.0,
            el_residual_sup: 0.0,
        };
        let mut buf = Vec::new();
        write_history_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("step,tau,area,div_JH_l2,legendrian_residual,el_residual_sup\n"));
        assert_eq!(text.lines().count(), 2);
    }
}
