//! Parametrized surfaces in S^5: closed-form catalog immersions with exact
//! 2-jets, grid resampling, and Legendrian perturbation of grid surfaces.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::contact::{contact_form, SpherePoint};
use crate::dual::Dual2;
use crate::error::{Error, Result};
use crate::grid::{check_grid_size, Grid, GridScalar, GridSurface, Scheme};
use crate::grid_ops::DerivedGeometry;
use crate::vec6::Vec6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamPoint {
    pub u: f64,
    pub v: f64,
}

impl ParamPoint {
    pub fn new(u: f64, v: f64) -> Self {
        ParamPoint { u, v }
    }
}

/// Position and first and second parameter derivatives at one point.
///
/// `d1 = [∂u, ∂v]`, `d2 = [∂uu, ∂uv, ∂vv]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2 {
    pub value: Vec6,
    pub d1: [Vec6; 2],
    pub d2: [Vec6; 3],
}

impl Jet2 {
    pub fn point(&self) -> SpherePoint {
        SpherePoint::normalize(self.value)
    }

    /// Second derivative `∂_i ∂_j` for `i, j ∈ {0, 1}`.
    pub fn second(&self, i: usize, j: usize) -> Vec6 {
        self.d2[i + j]
    }

    /// Largest `|<∂_i, p>|`; zero for exactly sphere-valued maps.
    pub fn tangency_defect(&self) -> f64 {
        self.d1.iter().map(|d| d.dot(&self.value).abs()).fold(0.0, f64::max)
    }

    /// Copy with tangent vectors projected onto `T_p S^5`.
    pub fn projected_to_sphere(&self) -> Jet2 {
        let p = self.value;
        Jet2 { d1: self.d1.map(|d| d - p * d.dot(&p)), ..*self }
    }

    fn from_duals(x: &[Dual2; 6]) -> Jet2 {
        let pick = |f: fn(&Dual2) -> f64| Vec6(std::array::from_fn(|k| f(&x[k])));
        Jet2 {
            value: pick(|d| d.v),
            d1: [pick(|d| d.du), pick(|d| d.dv)],
            d2: [pick(|d| d.duu), pick(|d| d.duv), pick(|d| d.dvv)],
        }
    }
}

/// One Fourier mode `amplitude · cos(m u + n v + phase)` of a generating function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusMode {
    pub m: i32,
    pub n: i32,
    pub amplitude: f64,
    pub phase: f64,
}

impl TorusMode {
    pub fn new(m: i32, n: i32, amplitude: f64, phase: f64) -> Self {
        TorusMode { m, n, amplitude, phase }
    }

    fn arg(&self, u: Dual2, v: Dual2) -> Dual2 {
        u * f64::from(self.m) + v * f64::from(self.n) + self.phase
    }
}

/// Modes of the generating function used for perturbed tori.
///
/// Every mode has even `m` and `n`. Such perturbations commute with the
/// half-period shifts `u -> u + π` and `v -> v + π` (realized on S^5 by
/// `diag(-1, 1, -1)` and `diag(1, -1, -1)`), which excludes the
/// `(1,0), (0,1), (1,1)` modes along which the Clifford-type torus loses area.
pub fn perturbation_modes(seed: u64) -> Vec<TorusMode> {
    if seed == 0 {
        return vec![TorusMode::new(2, 0, 1.0, 0.0), TorusMode::new(2, 2, 0.5, -FRAC_PI_2)];
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    [(2, 0), (0, 2), (2, 2), (2, -2)]
        .into_iter()
        .map(|(m, n)| TorusMode::new(m, n, rng.random_range(-1.0..1.0), rng.random_range(0.0..TAU)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceKind {
    /// Generalized Clifford torus `T_θ = (e^{iu}, e^{iv}, e^{i(θ-u-v)})/√3`.
    LegendrianTorus { theta: f64 },
    /// Exactly Legendrian deformation of `T_θ` with generating function `εΨ`.
    PerturbedLegendrianTorus { theta: f64, epsilon: f64, modes: Vec<TorusMode> },
    /// The real unit 2-sphere in R^3 ⊂ C^3, in a chart avoiding its poles.
    EquatorialLegendrianSphere,
    /// Clifford torus `(e^{iu}, e^{iv}, 0)/√2` in the totally geodesic S^3.
    CliffordS3,
    /// Veronese surface in the totally geodesic S^4 = S^5 ∩ {y3 = 0}.
    VeroneseS4,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CatalogParams {
    pub theta: f64,
    pub epsilon: f64,
    pub seed: u64,
}

/// Margin that keeps the sphere charts away from their coordinate poles.
const CHART_MARGIN: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub struct Immersion {
    kind: SurfaceKind,
}

/// Looks up a catalog surface. Names accept `-` or `_` as separator.
///
/// `legendrian-torus` with a nonzero `epsilon` yields the perturbed torus
/// whose modes come from [`perturbation_modes`] with the given seed.
pub fn catalog(name: &str, params: CatalogParams) -> Result<Immersion> {
    let theta = params.theta.rem_euclid(TAU);
    let kind = match name.replace('_', "-").as_str() {
        "legendrian-torus" if params.epsilon == 0.0 => SurfaceKind::LegendrianTorus { theta },
        "legendrian-torus" | "perturbed-legendrian-torus" => SurfaceKind::PerturbedLegendrianTorus {
            theta,
            epsilon: params.epsilon,
            modes: perturbation_modes(params.seed),
        },
        "equatorial-legendrian-sphere" | "equatorial-sphere" => {
            SurfaceKind::EquatorialLegendrianSphere
        }
        "clifford-s3" => SurfaceKind::CliffordS3,
        "veronese-s4" => SurfaceKind::VeroneseS4,
        _ => return Err(Error::UnknownSurface(name.to_string())),
    };
    Ok(Immersion { kind })
}

impl Immersion {
    pub fn from_kind(kind: SurfaceKind) -> Self {
        Immersion { kind }
    }

    pub fn legendrian_torus(theta: f64) -> Self {
        Immersion { kind: SurfaceKind::LegendrianTorus { theta: theta.rem_euclid(TAU) } }
    }

    pub fn perturbed_torus(theta: f64, epsilon: f64, modes: Vec<TorusMode>) -> Self {
        Immersion {
            kind: SurfaceKind::PerturbedLegendrianTorus {
                theta: theta.rem_euclid(TAU),
                epsilon,
                modes,
            },
        }
    }

    pub fn kind(&self) -> &SurfaceKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SurfaceKind::LegendrianTorus { .. } => "legendrian-torus",
            SurfaceKind::PerturbedLegendrianTorus { .. } => "perturbed-legendrian-torus",
            SurfaceKind::EquatorialLegendrianSphere => "equatorial-legendrian-sphere",
            SurfaceKind::CliffordS3 => "clifford-s3",
            SurfaceKind::VeroneseS4 => "veronese-s4",
        }
    }

    /// Periodicity flags for `(u, v)`.
    pub fn periodicity(&self) -> [bool; 2] {
        match self.kind {
            SurfaceKind::EquatorialLegendrianSphere | SurfaceKind::VeroneseS4 => [false, true],
            _ => [true, true],
        }
    }

    pub fn is_doubly_periodic(&self) -> bool {
        self.periodicity() == [true, true]
    }

    /// Parameter rectangle `[u_min, u_max] × [v_min, v_max]`.
    pub fn domain(&self) -> ([f64; 2], [f64; 2]) {
        if self.is_doubly_periodic() {
            ([0.0, TAU], [0.0, TAU])
        } else {
            ([CHART_MARGIN, PI - CHART_MARGIN], [0.0, TAU])
        }
    }

    /// Whether the surface is Legendrian by construction.
    pub fn is_legendrian(&self) -> bool {
        !matches!(self.kind, SurfaceKind::CliffordS3 | SurfaceKind::VeroneseS4)
    }

    fn contains(&self, q: &ParamPoint) -> bool {
        let ([u0, u1], _) = self.domain();
        self.periodicity()[0] || (q.u >= u0 && q.u <= u1)
    }

    /// Exact 2-jet at `q`.
    pub fn eval_jet2(&self, q: ParamPoint) -> Result<Jet2> {
        if !self.contains(&q) || !q.u.is_finite() || !q.v.is_finite() {
            return Err(Error::OutOfDomain { surface: self.name().into(), u: q.u, v: q.v });
        }
        Ok(Jet2::from_duals(&self.position_dual(Dual2::var_u(q.u), Dual2::var_v(q.v))))
    }

    /// Position only, without derivative bookkeeping.
    pub fn position(&self, q: ParamPoint) -> Vec6 {
        let x = self.position_dual(Dual2::constant(q.u), Dual2::constant(q.v));
        Vec6(std::array::from_fn(|k| x[k].v))
    }

    fn position_dual(&self, u: Dual2, v: Dual2) -> [Dual2; 6] {
        match &self.kind {
            SurfaceKind::LegendrianTorus { theta } => {
                let r = Dual2::constant(1.0 / 3.0_f64.sqrt());
                let third = (-u - v) + *theta;
                complex_triple([(r, u), (r, v), (r, third)])
            }
            SurfaceKind::PerturbedLegendrianTorus { theta, epsilon, modes } => {
                perturbed_torus_dual(u, v, *theta, *epsilon, modes)
            }
            SurfaceKind::EquatorialLegendrianSphere => {
                let (cphi, sphi) = u.cis();
                let (clam, slam) = v.cis();
                let z = Dual2::constant(0.0);
                [cphi, z, sphi * clam, z, sphi * slam, z]
            }
            SurfaceKind::CliffordS3 => {
                let r = Dual2::constant(std::f64::consts::FRAC_1_SQRT_2);
                let (cu, su) = u.cis();
                let (cv, sv) = v.cis();
                let z = Dual2::constant(0.0);
                [cu * r.v, su * r.v, cv * r.v, sv * r.v, z, z]
            }
            SurfaceKind::VeroneseS4 => {
                let s3 = 3.0_f64.sqrt();
                let (cphi, sphi) = u.cis();
                let (clam, slam) = v.cis();
                let x = cphi * s3;
                let y = sphi * clam * s3;
                let zc = sphi * slam * s3;
                let u1 = y * zc * (1.0 / s3);
                let u2 = x * zc * (1.0 / s3);
                let u3 = x * y * (1.0 / s3);
                let u4 = (x * x - y * y) * (1.0 / (2.0 * s3));
                let u5 = (x * x + y * y - zc * zc * 2.0) * (1.0 / 6.0);
                [u1, u2, u3, u4, u5, Dual2::constant(0.0)]
            }
        }
    }
}

/// `(r1 e^{iφ1}, r2 e^{iφ2}, r3 e^{iφ3})` as six real duals.
fn complex_triple(z: [(Dual2, Dual2); 3]) -> [Dual2; 6] {
    let mut out = [Dual2::constant(0.0); 6];
    for (j, (r, phi)) in z.into_iter().enumerate() {
        let (c, s) = phi.cis();
        out[2 * j] = r * c;
        out[2 * j + 1] = r * s;
    }
    out
}

/// Legendrian torus built from a generating function `Ψ`.
///
/// With `z_j = √ρ_j e^{iφ_j}` on S^5 the contact form is `Σ ρ_j dφ_j`. Taking
/// `φ = (u, v, θ + εΨ - u - v)` and
/// `ρ3 = 1/(3 - εΨ_u - εΨ_v)`, `ρ1 = (1 - εΨ_u)ρ3`, `ρ2 = (1 - εΨ_v)ρ3`
/// makes `Σ ρ_j = 1` and `Σ ρ_j dφ_j = 0` identically.
fn perturbed_torus_dual(u: Dual2, v: Dual2, theta: f64, eps: f64, modes: &[TorusMode]) -> [Dual2; 6] {
    let mut psi = Dual2::constant(0.0);
    let mut psi_u = Dual2::constant(0.0);
    let mut psi_v = Dual2::constant(0.0);
    for mode in modes {
        let arg = mode.arg(u, v);
        let (c, s) = arg.cis();
        psi = psi + c * mode.amplitude;
        psi_u = psi_u - s * (mode.amplitude * f64::from(mode.m));
        psi_v = psi_v - s * (mode.amplitude * f64::from(mode.n));
    }
    let p = psi_u * eps;
    let q = psi_v * eps;
    let rho3 = (-(p + q) + 3.0).recip();
    let rho1 = (-p + 1.0) * rho3;
    let rho2 = (-q + 1.0) * rho3;
    let third = psi * eps + theta - u - v;
    complex_triple([(rho1.sqrt(), u), (rho2.sqrt(), v), (rho3.sqrt(), third)])
}

/// Max difference between the exact jet and central differences of the
/// position map with step `h`.
pub fn jet_consistency_check(surface: &Immersion, q: ParamPoint, h: f64) -> Result<f64> {
    let jet = surface.eval_jet2(q)?;
    let x = |du: f64, dv: f64| surface.position(ParamPoint::new(q.u + du, q.v + dv));
    let x0 = x(0.0, 0.0);
    let fd = [
        (x(h, 0.0) - x(-h, 0.0)) * (0.5 / h),
        (x(0.0, h) - x(0.0, -h)) * (0.5 / h),
        (x(h, 0.0) - x0 * 2.0 + x(-h, 0.0)) * (1.0 / (h * h)),
        (x(h, h) - x(h, -h) - x(-h, h) + x(-h, -h)) * (0.25 / (h * h)),
        (x(0.0, h) - x0 * 2.0 + x(0.0, -h)) * (1.0 / (h * h)),
    ];
    let exact = [jet.d1[0], jet.d1[1], jet.d2[0], jet.d2[1], jet.d2[2]];
    let value_err = (jet.value - x0).norm();
    Ok(fd.iter().zip(&exact).map(|(a, b)| (*a - *b).norm()).fold(value_err, f64::max))
}

/// Samples a doubly periodic immersion at `u_a = 2πa/N`, `v_b = 2πb/N`.
pub fn resample_to_grid(surface: &Immersion, n: usize, scheme: Scheme) -> Result<GridSurface> {
    if !surface.is_doubly_periodic() {
        return Err(Error::NotPeriodic(surface.name().into()));
    }
    check_grid_size(n)?;
    let h = TAU / n as f64;
    let positions =
        Grid::from_fn(n, |a, b| surface.position(ParamPoint::new(a as f64 * h, b as f64 * h)));
    GridSurface::new(positions, scheme)
}

/// Pointwise Legendrian defect `max |α(∂_i)|` over all nodes of a grid surface.
pub fn grid_legendrian_residual(surface: &GridSurface) -> f64 {
    surface
        .jets()
        .iter()
        .map(|j| {
            let p = j.point();
            j.d1.iter().map(|d| contact_form(&p, d).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Legendrian residual tolerated on the input of [`perturb_legendrian`].
pub const PERTURB_INPUT_TOL: f64 = 1e-6;
/// Legendrian residual at which [`perturb_legendrian`] aborts.
pub const PERTURB_ABORT: f64 = 1e-3;

/// Integrates `dL/dt = V_f` (the Legendrian variation field generated by
/// `f`) with `steps` explicit Euler steps of size `tau`, normalizing back to
/// the sphere after each step. Returns the new surface and its Legendrian
/// residual.
pub fn perturb_legendrian(
    surface: &GridSurface,
    f: &GridScalar,
    steps: usize,
    tau: f64,
) -> Result<(GridSurface, f64)> {
    let start = grid_legendrian_residual(surface);
    if start > PERTURB_INPUT_TOL {
        return Err(Error::NotLegendrian { residual: start, tolerance: PERTURB_INPUT_TOL });
    }
    let mut current = surface.clone();
    for _ in 0..steps {
        let geo = DerivedGeometry::new(&current)?;
        let field = crate::flow::variation_field(&geo, f);
        current = crate::flow::displace(&current, &field, tau)?;
    }
    let residual = grid_legendrian_residual(&current);
    if residual > PERTURB_ABORT {
        return Err(Error::LegendrianDrift { residual, threshold: PERTURB_ABORT });
    }
    Ok((current, residual))
}

#[cfg(test)]
mod tests {
    use super::*;

    const S3: f64 = 1.732_050_807_568_877_2;

    fn all_catalog() -> Vec<Immersion> {
        vec![
            Immersion::legendrian_torus(0.0),
            Immersion::legendrian_torus(1.0),
            Immersion::perturbed_torus(0.3, 0.05, perturbation_modes(0)),
            catalog("equatorial_legendrian_sphere", CatalogParams::default()).unwrap(),
            catalog("clifford_s3", CatalogParams::default()).unwrap(),
            catalog("veronese_s4", CatalogParams::default()).unwrap(),
        ]
    }

    #[test]
    fn torus_value_at_origin() {
        let jet = Immersion::legendrian_torus(0.0).eval_jet2(ParamPoint::new(0.0, 0.0)).unwrap();
        let expected = Vec6([1.0, 0.0, 1.0, 0.0, 1.0, 0.0]) * (1.0 / S3);
        assert!((jet.value - expected).norm() < 1e-15);
        // Hand derivative: ∂u = (i, 0, -i)/√3.
        let du = Vec6([0.0, 1.0, 0.0, 0.0, 0.0, -1.0]) * (1.0 / S3);
        assert!((jet.d1[0] - du).norm() < 1e-15);
    }

    #[test]
    fn torus_derivative_matches_central_difference() {
        let s = Immersion::legendrian_torus(0.0);
        let h = 1e-5;
        let x = |u: f64| s.position(ParamPoint::new(u, 0.0));
        let fd = (x(h) - x(-h)) * (0.5 / h);
        let expected = Vec6([0.0, 1.0 / S3, 0.0, 0.0, 0.0, -1.0 / S3]);
        assert!((fd - expected).norm() < 1e-9);
    }

    #[test]
    fn clifford_value_at_origin() {
        let s = catalog("clifford-s3", CatalogParams::default()).unwrap();
        let v = s.position(ParamPoint::new(0.0, 0.0));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v - Vec6([r, 0.0, r, 0.0, 0.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn veronese_pole_value() {
        // (x, y, z) = (0, 0, √3) maps to u5 = -1.
        let s = catalog("veronese-s4", CatalogParams::default()).unwrap();
        let v = s.position(ParamPoint::new(FRAC_PI_2, FRAC_PI_2));
        assert!((v - Vec6([0.0, 0.0, 0.0, 0.0, -1.0, 0.0])).norm() < 1e-15);
    }

    #[test]
    fn catalog_errors_and_theta_normalization() {
        assert!(matches!(
            catalog("klein-bottle", CatalogParams::default()),
            Err(Error::UnknownSurface(_))
        ));
        let s = catalog("legendrian_torus", CatalogParams { theta: TAU + 1.0, ..Default::default() })
            .unwrap();
        match s.kind() {
            SurfaceKind::LegendrianTorus { theta } => assert!((theta - 1.0).abs() < 1e-12),
            other => panic!("unexpected {other:?}"),
        }
        let sphere = catalog("equatorial-legendrian-sphere", CatalogParams::default()).unwrap();
        assert!(matches!(
            sphere.eval_jet2(ParamPoint::new(0.0, 1.0)),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(resample_to_grid(&sphere, 16, Scheme::Fd4), Err(Error::NotPeriodic(_))));
    }

    #[test]
    fn catalog_jets_are_sphere_valued_and_consistent() {
        for s in all_catalog() {
            let ([u0, u1], _) = s.domain();
            for k in 0..25 {
                let q = ParamPoint::new(u0 + (u1 - u0) * (k as f64 + 0.5) / 25.0, 0.37 * k as f64);
                let jet = s.eval_jet2(q).unwrap();
                assert!((jet.value.norm() - 1.0).abs() < 1e-12, "{}", s.name());
                assert!(jet.tangency_defect() < 1e-10, "{}", s.name());
                let res = jet_consistency_check(&s, q, 1e-4).unwrap();
                assert!(res <= 1e-6, "{}: {res}", s.name());
            }
        }
    }

    #[test]
    fn consistency_check_is_second_order() {
        let s = catalog("clifford-s3", CatalogParams::default()).unwrap();
        let q = ParamPoint::new(0.4, 1.1);
        let r1 = jet_consistency_check(&s, q, 1e-2).unwrap();
        let r2 = jet_consistency_check(&s, q, 5e-3).unwrap();
        let ratio = r1 / r2;
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
        let t = Immersion::legendrian_torus(0.0);
        assert!(jet_consistency_check(&t, q, 1e-4).unwrap() <= 1e-7);
        assert!(jet_consistency_check(&s, q, 1e-4).unwrap() <= 1e-7);
    }

    #[test]
    fn legendrian_catalog_surfaces_annihilate_contact_form() {
        for s in all_catalog().into_iter().filter(|s| s.is_legendrian()) {
            let ([u0, u1], _) = s.domain();
            for k in 0..50 {
                let q = ParamPoint::new(u0 + (u1 - u0) * k as f64 / 50.0, 0.91 * k as f64);
                let jet = s.eval_jet2(q).unwrap();
                let p = jet.point();
                for d in jet.d1 {
                    assert!(contact_form(&p, &d).abs() <= 1e-12, "{}", s.name());
                }
            }
        }
        let c = catalog("clifford-s3", CatalogParams::default()).unwrap();
        let jet = c.eval_jet2(ParamPoint::new(0.3, 2.0)).unwrap();
        assert!((contact_form(&jet.point(), &jet.d1[0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn equatorial_sphere_stays_real() {
        let s = catalog("equatorial-sphere", CatalogParams::default()).unwrap();
        let jet = s.eval_jet2(ParamPoint::new(1.0, 2.0)).unwrap();
        for w in jet.d2.iter().chain(jet.d1.iter()) {
            assert_eq!([w[1], w[3], w[5]], [0.0; 3]);
        }
    }

    #[test]
    fn seeded_modes_are_even_and_deterministic() {
        let a = perturbation_modes(7);
        assert_eq!(a, perturbation_modes(7));
        assert_ne!(a, perturbation_modes(8));
        assert!(a.iter().all(|m| m.m % 2 == 0 && m.n % 2 == 0));
    }
}
