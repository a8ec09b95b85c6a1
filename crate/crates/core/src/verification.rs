//! Verification suites shared by the `verify` command and the test targets.
//!
//! The pointwise suite samples a catalog surface at seeded random parameter
//! points and compares curvature invariants against known values. The grid
//! suite evaluates the identity residuals of grid_ops on one grid; a
//! refinement study runs it on several grids and fits convergence orders.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contact::{sasakian_identity_residuals, SpherePoint};
use crate::convergence::OrderFit;
use crate::error::Result;
use crate::extrinsic::{analyze, legendrian_residual, pointwise_identity_residuals};
use crate::grid::{sup_norm, Grid, Scheme};
use crate::grid_ops::{
    gradient_norm_decomposition, integral_report, mean_curvature_form_closedness,
    omega_commutation_residual, oneform_laplacians, oneform_sup, reeb_pairing_residual,
    DerivedGeometry, GridOneForm, NormalPart,
};
use crate::immersions::{resample_to_grid, Immersion, ParamPoint, SurfaceKind};
use crate::report::Report;
use crate::vec6::Vec6;

/// Known pointwise values of a catalog surface.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Expected {
    pub s: Option<f64>,
    pub minimal: bool,
    pub k: Option<f64>,
    /// `α(∂u)` for surfaces that are certified non-Legendrian.
    pub alpha_u: Option<f64>,
}

pub fn expected_values(surface: &Immersion) -> Expected {
    match surface.kind() {
        SurfaceKind::LegendrianTorus { .. } => {
            Expected { s: Some(2.0), minimal: true, k: Some(0.0), alpha_u: None }
        }
        SurfaceKind::EquatorialLegendrianSphere => {
            Expected { s: Some(0.0), minimal: true, k: Some(1.0), alpha_u: None }
        }
        SurfaceKind::VeroneseS4 => {
            Expected { s: Some(4.0 / 3.0), minimal: true, k: Some(1.0 / 3.0), alpha_u: None }
        }
        SurfaceKind::CliffordS3 => {
            Expected { s: Some(2.0), minimal: true, k: Some(0.0), alpha_u: Some(0.5) }
        }
        SurfaceKind::PerturbedLegendrianTorus { .. } => Expected::default(),
    }
}

/// Worst-case deviations over the sampled points. `None` marks quantities
/// without a known value for the surface.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PointwiseSummary {
    pub points: usize,
    pub s_max_dev: Option<f64>,
    pub h_max: f64,
    pub k_max_dev: Option<f64>,
    pub legendrian_residual_max: f64,
    pub alpha_u_max_dev: Option<f64>,
    pub frame_defect_max: f64,
    pub gauss_max: f64,
    pub pair_symmetry_max: f64,
    pub h3_max: Option<f64>,
    pub symmetry_max: Option<f64>,
    pub s_min: f64,
    pub s_max: f64,
}

/// Uniform random points in the surface's parameter chart.
pub fn sample_points(surface: &Immersion, count: usize, seed: u64) -> Vec<ParamPoint> {
    let ([u0, u1], [v0, v1]) = surface.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| ParamPoint::new(rng.random_range(u0..u1), rng.random_range(v0..v1)))
        .collect()
}

pub fn pointwise_suite(surface: &Immersion, count: usize, seed: u64) -> Result<PointwiseSummary> {
    let expected = expected_values(surface);
    let mut sum = PointwiseSummary {
        points: count,
        s_max_dev: expected.s.map(|_| 0.0),
        k_max_dev: expected.k.map(|_| 0.0),
        alpha_u_max_dev: expected.alpha_u.map(|_| 0.0),
        s_min: f64::INFINITY,
        s_max: f64::NEG_INFINITY,
        ..Default::default()
    };
    let worse = |slot: &mut Option<f64>, x: f64| {
        if let Some(m) = slot {
            *m = m.max(x);
        }
    };
    for q in sample_points(surface, count, seed) {
        let jet = surface.eval_jet2(q)?;
        let (frame, d) = analyze(&jet)?;
        let (au, av) = legendrian_residual(&jet);
        sum.s_min = sum.s_min.min(d.s);
        sum.s_max = sum.s_max.max(d.s);
        if let Some(s) = expected.s {
            worse(&mut sum.s_max_dev, (d.s - s).abs());
        }
        if let Some(k) = expected.k {
            worse(&mut sum.k_max_dev, (d.k - k).abs());
        }
        if let Some(a) = expected.alpha_u {
            worse(&mut sum.alpha_u_max_dev, (au - a).abs());
        }
        sum.h_max = sum.h_max.max(d.mean_curvature.norm());
        sum.legendrian_residual_max = sum.legendrian_residual_max.max(au.abs().max(av.abs()));
        sum.frame_defect_max = sum.frame_defect_max.max(frame.orthonormality_defect(&jet.value));
        let ids = pointwise_identity_residuals(&jet, &frame, &d);
        sum.gauss_max = sum.gauss_max.max(ids.gauss);
        sum.pair_symmetry_max = sum.pair_symmetry_max.max(ids.pair_symmetry_max);
        if let Some(x) = ids.h3_max {
            sum.h3_max = Some(sum.h3_max.unwrap_or(0.0).max(x));
        }
        if let Some(x) = ids.symmetry_max {
            sum.symmetry_max = Some(sum.symmetry_max.unwrap_or(0.0).max(x));
        }
    }
    Ok(sum)
}

/// Largest Sasakian identity residuals over `count` random `(p, x, y)`.
pub fn sasakian_suite(count: usize, seed: u64) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| Vec6(std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
    let mut worst = (0.0_f64, 0.0_f64);
    for _ in 0..count {
        let p = SpherePoint::normalize(draw(&mut rng));
        let x = draw(&mut rng).reject(&p.vec());
        let y = draw(&mut rng).reject(&p.vec());
        let (a, b) = sasakian_identity_residuals(&p, &x, &y)?;
        worst = (worst.0.max(a), worst.1.max(b));
    }
    Ok(worst)
}

/// Test normal field for the commutation check: the first adapted normal,
/// modulated in `v` and projected onto the contact part of the normal bundle.
pub fn commutation_test_field(geo: &DerivedGeometry) -> Grid<Vec6> {
    let n = geo.n();
    let h = TAU / n as f64;
    Grid::from_fn(n, |a, b| {
        let i = a * n + b;
        let w = geo.frames[i].normal[0] * (b as f64 * h).cos();
        geo.project(i, &w, NormalPart::Contact)
    })
}

/// Test 1-form for the Weitzenböck check.
pub fn weitzenbock_test_form(n: usize) -> GridOneForm {
    let h = TAU / n as f64;
    Grid::from_fn(n, |a, b| {
        let (u, v) = (a as f64 * h, b as f64 * h);
        [0.3 * (u + v).sin() + (2.0 * v).cos(), (u - 2.0 * v).cos()]
    })
}

/// Names of the residuals measured by [`grid_residuals`], in report order.
pub const GRID_RESIDUALS: [&str; 6] = [
    "reeb_pairing",
    "omega_commutation",
    "weitzenbock",
    "closedness",
    "decomposition_h",
    "decomposition_mean",
];

/// Sup-norm residuals of the grid identities plus the integrated Simons
/// identity, for one Legendrian grid surface.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridResiduals {
    pub n: usize,
    /// Values in the order of [`GRID_RESIDUALS`].
    pub sup: [f64; 6],
    pub sigma_simons: f64,
    pub li_margin_min: f64,
}

pub fn grid_residuals(geo: &DerivedGeometry) -> Result<GridResiduals> {
    let reeb = sup_norm(&reeb_pairing_residual(geo)?);
    let omega = omega_commutation_residual(&commutation_test_field(geo), geo)?;
    let weitz = oneform_laplacians(&weitzenbock_test_form(geo.n()), geo);
    let closed = sup_norm(&mean_curvature_form_closedness(geo)?);
    let dec = gradient_norm_decomposition(geo)?;
    let ir = integral_report(geo)?;
    Ok(GridResiduals {
        n: geo.n(),
        sup: [
            reeb,
            oneform_sup(&omega.residual, geo),
            sup_norm(&weitz.weitzenbock_residual),
            closed,
            sup_norm(&dec.residual_h),
            sup_norm(&dec.residual_mean),
        ],
        sigma_simons: ir.sigma_simons.unwrap_or(f64::NAN),
        li_margin_min: dec.li_margin.values().iter().copied().fold(f64::INFINITY, f64::min),
    })
}

/// Grid residuals on every size in `sizes`, with one order fit per residual.
#[derive(Clone, Debug, PartialEq)]
pub struct RefinementStudy {
    pub scheme: Scheme,
    pub runs: Vec<GridResiduals>,
    pub fits: Vec<(&'static str, OrderFit)>,
}

impl RefinementStudy {
    pub fn run(surface: &Immersion, sizes: &[usize], scheme: Scheme) -> Result<Self> {
        let runs = sizes
            .iter()
            .map(|&n| {
                let grid = resample_to_grid(surface, n, scheme)?;
                grid_residuals(&DerivedGeometry::new(&grid)?)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_runs(scheme, runs))
    }

    pub fn from_runs(scheme: Scheme, runs: Vec<GridResiduals>) -> Self {
        let sizes: Vec<usize> = runs.iter().map(|r| r.n).collect();
        let fits = GRID_RESIDUALS
            .iter()
            .enumerate()
            .map(|(k, name)| {
                let errs: Vec<f64> = runs.iter().map(|r| r.sup[k]).collect();
                (*name, OrderFit::new(&sizes, &errs))
            })
            .collect();
        RefinementStudy { scheme, runs, fits }
    }

    pub fn fit(&self, name: &str) -> Option<&OrderFit> {
        self.fits.iter().find(|(k, _)| *k == name).map(|(_, f)| f)
    }

    /// Writes `grid.<N>.<name>` values and `order.<name>` fits.
    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        for run in &self.runs {
            for (name, v) in GRID_RESIDUALS.iter().zip(run.sup) {
                r.number(format!("grid.{}.{name}", run.n), v);
            }
            r.number(format!("grid.{}.Sigma_Simons", run.n), run.sigma_simons);
            r.number(format!("grid.{}.li_margin_min", run.n), run.li_margin_min);
        }
        for (name, fit) in &self.fits {
            r.number(format!("order.{name}"), fit.order);
            r.flag(format!("order.{name}.monotone"), fit.monotone);
        }
        r
    }
}
