//! The standard contact metric structure of the unit 5-sphere.
//!
//! Points of S^5 ⊂ C^3 = R^6 carry the complex structure `J0`, the contact
//! form `α = Σ (x_j dy_j - y_j dx_j)`, the Reeb field `R(p) = J0 p` and the
//! round metric. The Sasakian structure tensor used by the structure
//! identities is [`structure_tensor`], which is the tangential part of `J0`
//! taken with the sign that makes `∇̄_X R = -φX` hold.

use crate::dual::Dual2;
use crate::error::{Error, Result};
use crate::vec6::Vec6;

/// Tolerance on `| |p| - 1 |` for caller-supplied points.
pub const SPHERE_INPUT_TOL: f64 = 1e-9;
/// Tolerance on `| |p| - 1 |` for points this crate produces.
pub const SPHERE_OUTPUT_TOL: f64 = 1e-12;
/// Tolerance on `<x, p>` for tangent vectors handed to the structure checks.
pub const TANGENT_TOL: f64 = 1e-10;

/// A point of the unit sphere S^5.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint(Vec6);

impl SpherePoint {
    pub fn new(p: Vec6) -> Result<Self> {
        let deviation = p.norm() - 1.0;
        if !p.is_finite() || deviation.abs() > SPHERE_INPUT_TOL {
            return Err(Error::OffSphere { deviation });
        }
        Ok(SpherePoint(p))
    }

    /// Radially projects a nonzero vector onto the sphere.
    pub fn normalize(p: Vec6) -> Self {
        SpherePoint(p.normalized())
    }

    pub fn vec(&self) -> Vec6 {
        self.0
    }
}

/// The standard complex structure: `(x, y) -> (-y, x)` on each coordinate pair.
pub fn j_apply(v: Vec6) -> Vec6 {
    let c = v.0;
    Vec6([-c[1], c[0], -c[3], c[2], -c[5], c[4]])
}

pub fn reeb(p: &SpherePoint) -> Vec6 {
    j_apply(p.0)
}

/// `α_p(v) = Σ_j (x_j v_{y_j} - y_j v_{x_j})`.
pub fn contact_form(p: &SpherePoint, v: &Vec6) -> f64 {
    let x = p.0 .0;
    let w = v.0;
    (0..3).map(|j| x[2 * j] * w[2 * j + 1] - x[2 * j + 1] * w[2 * j]).sum()
}

/// Orthogonal projection onto the contact hyperplane `ker α ∩ T_p S^5`.
pub fn project_contact_hyperplane(p: &SpherePoint, v: &Vec6) -> Vec6 {
    let pv = p.0;
    let r = reeb(p);
    let w = *v - pv * v.dot(&pv);
    w - r * contact_form(p, &w)
}

/// The Sasakian (1,1)-tensor `φ(v) = -(J0 v)^T`, minus the tangential part of `J0 v`.
///
/// With `R = J0 p` and `α = <·, J0 p>` this is the sign for which
/// `∇̄_X R = -φX` and `(∇̄_X φ)Y = g(X,Y) R - α(Y) X` hold on the round sphere.
pub fn structure_tensor(p: &SpherePoint, v: &Vec6) -> Vec6 {
    let jv = j_apply(*v);
    -(jv - p.0 * jv.dot(&p.0))
}

fn dual_dot(a: &[Dual2; 6], b: &[Dual2; 6]) -> Dual2 {
    a.iter().zip(b).fold(Dual2::constant(0.0), |s, (x, y)| s + *x * *y)
}

fn dual_j(v: &[Dual2; 6]) -> [Dual2; 6] {
    [-v[1], v[0], -v[3], v[2], -v[5], v[4]]
}

fn d_dt(v: &[Dual2; 6]) -> Vec6 {
    Vec6(std::array::from_fn(|k| v[k].du))
}

/// Residual norms of the two Sasakian structure identities at `p`:
/// `|∇̄_x R + φx|` and `|(∇̄_x φ)y - <x,y> R + α(y) x|`.
///
/// Fields are differentiated exactly along the great circle through `p`
/// with initial velocity `x`; `y` is extended as the tangential part of a
/// constant ambient vector. The Levi-Civita connection of the sphere is the
/// ambient derivative plus the radial correction `<X, W> p`.
pub fn sasakian_identity_residuals(p: &SpherePoint, x: &Vec6, y: &Vec6) -> Result<(f64, f64)> {
    let pv = p.0;
    for w in [x, y] {
        let inner = w.dot(&pv);
        if inner.abs() > TANGENT_TOL {
            return Err(Error::NotTangent { inner });
        }
    }
    let speed = x.norm();
    if speed == 0.0 {
        return Ok((0.0, 0.0));
    }
    let dir = *x * (1.0 / speed);

    // gamma(t) = cos(s t) p + sin(s t) dir, differentiated in t (the `u` slot).
    let t = Dual2::var_u(0.0) * speed;
    let (c, s) = t.cis();
    let gamma: [Dual2; 6] = std::array::from_fn(|k| c * pv[k] + s * dir[k]);

    // Reeb field along the curve.
    let r_curve = dual_j(&gamma);
    let r_p = reeb(p);
    let nabla_r = d_dt(&r_curve) + pv * x.dot(&r_p);
    let phi_x = structure_tensor(p, x);
    let res1 = (nabla_r + phi_x).norm();

    // Y(q) = y - <y,q> q and φ(Y)(q) = -(J0 Y - <J0 Y, q> q) along the curve.
    let yc: [Dual2; 6] = std::array::from_fn(|k| Dual2::constant(y[k]));
    let y_dot_q = dual_dot(&yc, &gamma);
    let y_field: [Dual2; 6] = std::array::from_fn(|k| yc[k] - y_dot_q * gamma[k]);
    let jy = dual_j(&y_field);
    let jy_dot_q = dual_dot(&jy, &gamma);
    let phi_y: [Dual2; 6] = std::array::from_fn(|k| -(jy[k] - jy_dot_q * gamma[k]));

    let phi_y_p = Vec6(std::array::from_fn(|k| phi_y[k].v));
    let nabla_phi_y = d_dt(&phi_y) + pv * x.dot(&phi_y_p);
    let y_p = Vec6(std::array::from_fn(|k| y_field[k].v));
    let nabla_y = d_dt(&y_field) + pv * x.dot(&y_p);
    let nabla_phi_applied = nabla_phi_y - structure_tensor(p, &nabla_y);

    let expected = r_p * x.dot(y) - *x * contact_form(p, y);
    let res2 = (nabla_phi_applied - expected).norm();
    Ok((res1, res2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn e(k: usize) -> Vec6 {
        Vec6::axis(k)
    }

    fn sphere_point(c: [f64; 6]) -> SpherePoint {
        SpherePoint::normalize(Vec6(c))
    }

    #[test]
    fn j_examples() {
        assert_eq!(j_apply(e(0)), e(1));
        assert_eq!(j_apply(e(1)), -e(0));
        assert_eq!(
            j_apply(Vec6([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])),
            Vec6([-2.0, 1.0, -4.0, 3.0, -6.0, 5.0])
        );
    }

    #[test]
    fn reeb_examples() {
        let p = SpherePoint::new(e(0)).unwrap();
        assert_eq!(reeb(&p), e(1));
        let q = SpherePoint::new(e(2)).unwrap();
        assert_eq!(reeb(&q), e(3));
        assert!(matches!(SpherePoint::new(e(0) * 1.01), Err(Error::OffSphere { .. })));
    }

    #[test]
    fn contact_form_examples() {
        let p = SpherePoint::new(e(0)).unwrap();
        assert_eq!(contact_form(&p, &e(1)), 1.0);
        assert_eq!(contact_form(&p, &e(2)), 0.0);
        assert!((contact_form(&p, &(e(1) * 0.3)) - 0.3).abs() < 1e-16);
    }

    #[test]
    fn projection_examples() {
        let p = sphere_point([0.3, -0.2, 0.5, 0.1, -0.6, 0.4]);
        assert!(project_contact_hyperplane(&p, &p.vec()).norm() < 1e-15);
        assert!(project_contact_hyperplane(&p, &reeb(&p)).norm() < 1e-15);
        let w = project_contact_hyperplane(&p, &Vec6([1.0, 2.0, -1.0, 0.5, 0.0, 3.0]));
        let ww = project_contact_hyperplane(&p, &w);
        assert!((ww - w).norm() < 1e-15);
    }

    #[test]
    fn sasakian_derived_example() {
        // Hand check: along cos t e1 + sin t e3 the Reeb field is cos t e2 + sin t e4,
        // so D_x R = e4 = J0 x, and φx = -e4.
        let p = SpherePoint::new(e(0)).unwrap();
        let (r1, r2) = sasakian_identity_residuals(&p, &e(2), &e(4)).unwrap();
        assert!(r1 <= 1e-10 && r2 <= 1e-10, "{r1} {r2}");
        assert_eq!(sasakian_identity_residuals(&p, &Vec6::ZERO, &e(4)).unwrap(), (0.0, 0.0));
        assert!(matches!(
            sasakian_identity_residuals(&p, &e(0), &e(4)),
            Err(Error::NotTangent { .. })
        ));
    }

    fn vec6_strategy() -> impl Strategy<Value = Vec6> {
        proptest::array::uniform6(-1.0f64..1.0).prop_map(Vec6)
    }

    fn sphere_strategy() -> impl Strategy<Value = SpherePoint> {
        vec6_strategy()
            .prop_filter("nonzero", |v| v.norm() > 1e-3)
            .prop_map(SpherePoint::normalize)
    }

    proptest! {
        #[test]
        fn j_squares_to_minus_identity(v in vec6_strategy()) {
            prop_assert_eq!(j_apply(j_apply(v)), -v);
        }

        #[test]
        fn j_is_orthogonal(v in vec6_strategy(), w in vec6_strategy()) {
            prop_assert!((j_apply(v).dot(&j_apply(w)) - v.dot(&w)).abs() < 1e-15);
        }

        #[test]
        fn contact_form_matches_inner_product(p in sphere_strategy(), v in vec6_strategy()) {
            prop_assert!((contact_form(&p, &v) - v.dot(&j_apply(p.vec()))).abs() < 1e-15);
        }

        #[test]
        fn reeb_has_unit_contact_value(p in sphere_strategy()) {
            prop_assert!((contact_form(&p, &reeb(&p)) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn projection_lands_in_contact_plane(p in sphere_strategy(), v in vec6_strategy()) {
            let w = project_contact_hyperplane(&p, &v);
            prop_assert!(w.dot(&p.vec()).abs() < 1e-12);
            prop_assert!(contact_form(&p, &w).abs() < 1e-12);
            prop_assert!((project_contact_hyperplane(&p, &w) - w).norm() < 1e-12);
        }

        #[test]
        fn sasakian_identities_hold(p in sphere_strategy(), a in vec6_strategy(), b in vec6_strategy()) {
            let pv = p.vec();
            let x = a - pv * a.dot(&pv);
            let y = b - pv * b.dot(&pv);
            let (r1, r2) = sasakian_identity_residuals(&p, &x, &y).unwrap();
            prop_assert!(r1 <= 1e-10 && r2 <= 1e-10);
        }
    }
}
