use std::f64::consts::TAU;

use legendrian_lab::grid::{Grid, GridSurface, Scheme};
use legendrian_lab::grid_ops::{
    divergence, integral_report, intrinsic_gauss_curvature, quadrature, DerivedGeometry,
};
use legendrian_lab::immersions::{perturbation_modes, resample_to_grid, Immersion, TorusMode};
use legendrian_lab::verification::{grid_residuals, RefinementStudy, GRID_RESIDUALS};
use proptest::prelude::*;

fn geometry(s: &Immersion, n: usize, scheme: Scheme) -> DerivedGeometry {
    DerivedGeometry::new(&resample_to_grid(s, n, scheme).unwrap()).unwrap()
}

fn cos_u_torus(eps: f64) -> Immersion {
    Immersion::perturbed_torus(0.0, eps, vec![TorusMode::new(1, 0, 3.0, 0.0)])
}

#[test]
fn second_order_scheme_converges_at_second_order() {
    let study = RefinementStudy::run(&cos_u_torus(0.02), &[16, 32, 64], Scheme::Fd2).unwrap();
    for name in GRID_RESIDUALS {
        let fit = study.fit(name).unwrap();
        assert!(fit.monotone && fit.order >= 1.8, "{name}: {fit:?}");
    }
}

#[test]
fn spectral_residuals_sit_at_roundoff() {
    let r = grid_residuals(&geometry(&Immersion::perturbed_torus(0.0, 0.02, perturbation_modes(0)), 48, Scheme::Spectral))
        .unwrap();
    for (name, v) in GRID_RESIDUALS.iter().zip(r.sup) {
        assert!(v < 1e-8, "{name} = {v:e}");
    }
}

#[test]
fn report_keys_cover_every_size() {
    let study = RefinementStudy::run(&Immersion::legendrian_torus(0.0), &[16, 32], Scheme::Fd4).unwrap();
    let report = study.to_report();
    for n in [16, 32] {
        assert!(report.get_number(&format!("grid.{n}.Sigma_Simons")).is_some());
    }
    assert!(report.get_bool("order.reeb_pairing.monotone").is_some());
}

#[test]
fn grid_text_round_trip() {
    let grid = resample_to_grid(&cos_u_torus(0.01), 16, Scheme::Fd4).unwrap();
    let back = GridSurface::from_text(&grid.to_text()).unwrap();
    assert_eq!(back.n(), 16);
    for (a, b) in grid.positions().values().iter().zip(back.positions().values()) {
        assert!((*a - *b).norm() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simons_integral_vanishes_for_random_perturbations(seed in 0u64..1000, eps in 0.0..0.03f64) {
        let s = Immersion::perturbed_torus(0.0, eps, perturbation_modes(seed));
        let ir = integral_report(&geometry(&s, 32, Scheme::Spectral)).unwrap();
        prop_assert!(ir.sigma_simons.unwrap().abs() < 1e-8);
    }

    #[test]
    fn divergence_integrates_to_zero(seed in 0u64..1000, a in -1.0..1.0f64, b in -1.0..1.0f64) {
        let s = Immersion::perturbed_torus(0.0, 0.02, perturbation_modes(seed));
        let geo = geometry(&s, 32, Scheme::Spectral);
        let h = TAU / 32.0;
        let field = Grid::from_fn(32, |i, j| {
            let (u, v) = (i as f64 * h, j as f64 * h);
            [a * (u + 2.0 * v).sin(), b * (2.0 * u).cos() + v.sin()]
        });
        prop_assert!(quadrature(&divergence(&field, &geo), &geo).abs() < 1e-10);
    }

    #[test]
    fn intrinsic_and_extrinsic_gauss_curvature_agree(seed in 0u64..1000, eps in 0.0..0.03f64) {
        let s = Immersion::perturbed_torus(0.0, eps, perturbation_modes(seed));
        let geo = geometry(&s, 32, Scheme::Spectral);
        let k = intrinsic_gauss_curvature(&geo);
        let dev = (0..32 * 32).map(|i| (k[i] - geo.data[i].k).abs()).fold(0.0, f64::max);
        // second derivatives of the metric: spectral truncation near 1e-8 at N = 32
        prop_assert!(dev < 1e-6, "dev {dev:e}");
    }
}
