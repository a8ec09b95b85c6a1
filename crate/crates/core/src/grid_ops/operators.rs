use rayon::prelude::*;

use super::{require_legendrian, DerivedGeometry, GridNormalField, GridOneForm, NormalPart};
use crate::contact::j_apply;
use crate::error::{Error, Result};
use crate::grid::{Axis, Grid, GridScalar, GridValue};
use crate::vec6::Vec6;

const AXES: [Axis; 2] = [Axis::U, Axis::V];

/// Evaluates `f` at every node in parallel.
pub(crate) fn node_map<T: GridValue>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Grid<T> {
    Grid::new(n, (0..n * n).into_par_iter().map(&f).collect()).expect("node count")
}

/// Contravariant gradient `g^{ij} ∂_j f`.
pub fn gradient(f: &GridScalar, geo: &DerivedGeometry) -> Grid<[f64; 2]> {
    let [fu, fv] = geo.diff().grad(f);
    node_map(geo.n(), |i| geo.raise(i, [fu[i], fv[i]]))
}

/// Metric divergence `(1/√g) ∂_i(√g X^i)` of a contravariant field.
pub fn divergence(x: &Grid<[f64; 2]>, geo: &DerivedGeometry) -> GridScalar {
    let sg = &geo.sqrt_det_g;
    let flux = x.zip_map(sg, |x, s| [x[0] * s, x[1] * s]);
    let d = geo.diff();
    let du = d.d(&flux, Axis::U);
    let dv = d.d(&flux, Axis::V);
    node_map(geo.n(), |i| (du[i][0] + dv[i][1]) / sg[i])
}

/// Laplace–Beltrami operator in conservative form; `Δ cos = -λ cos`.
pub fn laplace_beltrami(f: &GridScalar, geo: &DerivedGeometry) -> GridScalar {
    divergence(&gradient(f, geo), geo)
}

/// Gauss curvature from the metric alone (Brioschi formula).
pub fn intrinsic_gauss_curvature(geo: &DerivedGeometry) -> GridScalar {
    let d = geo.diff();
    let e = geo.scalar(|x| x.g[0][0]);
    let f = geo.scalar(|x| x.g[0][1]);
    let g = geo.scalar(|x| x.g[1][1]);
    let [eu, ev] = d.grad(&e);
    let [fu, fv] = d.grad(&f);
    let [gu, gv] = d.grad(&g);
    let evv = d.d2(&e, Axis::V);
    let guu = d.d2(&g, Axis::U);
    let fuv = d.duv(&f);
    node_map(geo.n(), |i| {
        let (e, f, g) = (e[i], f[i], g[i]);
        let a = [
            [-0.5 * evv[i] + fuv[i] - 0.5 * guu[i], 0.5 * eu[i], fu[i] - 0.5 * ev[i]],
            [fv[i] - 0.5 * gu[i], e, f],
            [0.5 * gv[i], f, g],
        ];
        let b = [[0.0, 0.5 * ev[i], 0.5 * gu[i]], [0.5 * ev[i], e, f], [0.5 * gu[i], f, g]];
        (det3(&a) - det3(&b)) / (e * g - f * f).powi(2)
    })
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Connection Laplacian `g^{ij}(∇_i ∇_j V - Γ^k_ij ∇_k V)` of the normal
/// connection `∇_X V = P(∂_X V)`, with `P` the projection selected by `part`.
/// No precondition check; see [`normal_laplacian`].
pub fn connection_laplacian(v: &GridNormalField, geo: &DerivedGeometry, part: NormalPart) -> GridNormalField {
    let d = geo.diff();
    let n = geo.n();
    let w: [GridNormalField; 2] = AXES.map(|ax| {
        let dv = d.d(v, ax);
        node_map(n, |i| geo.project(i, &dv[i], part))
    });
    // dw[i][j] = ∂_i W_j
    let dw: [[GridNormalField; 2]; 2] = AXES.map(|ax| [d.d(&w[0], ax), d.d(&w[1], ax)]);
    node_map(n, |node| {
        let gi = geo.ginv(node);
        let gamma = &geo.christoffel[node];
        let mut acc = Vec6::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                let mut term = dw[i][j][node];
                for (k, wk) in w.iter().enumerate() {
                    term -= wk[node] * gamma[k][i][j];
                }
                acc += term * gi[i][j];
            }
        }
        geo.project(node, &acc, part)
    })
}

/// Normal Laplacian `Δ^ν V`; `V` must be normal.
pub fn normal_laplacian(v: &GridNormalField, geo: &DerivedGeometry) -> Result<GridNormalField> {
    geo.check_normal(v, NormalPart::Full)?;
    Ok(connection_laplacian(v, geo, NormalPart::Full))
}

/// Tangency tolerance for `J H`.
pub const JH_TANGENCY_TOL: f64 = 1e-3;

/// `div_g(J H)` together with the tangent field and the discarded normal part.
#[derive(Clone, Debug)]
pub struct DivJH {
    pub field: GridScalar,
    /// Contravariant components of the tangential part of `J H`.
    pub vector: Grid<[f64; 2]>,
    pub tangency_defect: f64,
}

pub fn div_jh(geo: &DerivedGeometry) -> Result<DivJH> {
    let n = geo.n();
    let mut defect = 0.0_f64;
    let mut comps = Vec::with_capacity(n * n);
    for node in 0..n * n {
        let jh = j_apply(geo.data[node].mean_curvature);
        let low = [jh.dot(&geo.tangents[0][node]), jh.dot(&geo.tangents[1][node])];
        let x = geo.raise(node, low);
        defect = defect.max((jh - geo.tangent_vector(node, x)).norm());
        comps.push(x);
    }
    if defect > JH_TANGENCY_TOL {
        return Err(Error::JHNotTangent { defect, tolerance: JH_TANGENCY_TOL });
    }
    let vector = Grid::new(n, comps)?;
    Ok(DivJH { field: divergence(&vector, geo), vector, tangency_defect: defect })
}

/// `-Δ^ν H + K H` per node.
pub fn el_residual(geo: &DerivedGeometry) -> Result<GridNormalField> {
    let h = geo.mean_curvature();
    let lap = normal_laplacian(&h, geo)?;
    Ok(node_map(geo.n(), |i| h[i] * geo.data[i].k - lap[i]))
}

/// `-Δ^ν H + (K - 1) H` per node, the form of the stationarity equation
/// that follows from the full normal connection (see `omega_commutation_residual`).
pub fn el_residual_contact(geo: &DerivedGeometry) -> Result<GridNormalField> {
    let h = geo.mean_curvature();
    let lap = normal_laplacian(&h, geo)?;
    Ok(node_map(geo.n(), |i| h[i] * (geo.data[i].k - 1.0) - lap[i]))
}

/// `Δ^ν H + Σ_ab Å_ab <Å_ab, H>` with `Å` the trace-free second fundamental form.
pub fn willmore_residual(geo: &DerivedGeometry) -> Result<GridNormalField> {
    let h = geo.mean_curvature();
    let lap = normal_laplacian(&h, geo)?;
    Ok(node_map(geo.n(), |i| {
        let d = &geo.data[i];
        let hv = d.mean_curvature;
        let mut q = Vec6::ZERO;
        for a in 0..2 {
            for b in 0..2 {
                let mut tf = d.b_ab(a, b);
                if a == b {
                    tf -= hv;
                }
                q += tf * tf.dot(&hv);
            }
        }
        lap[i] + q
    }))
}

/// Rough Laplacian `g^{ij} ∇_i ∇_j θ` of a 1-form.
pub fn rough_laplacian(theta: &GridOneForm, geo: &DerivedGeometry) -> GridOneForm {
    let d = geo.diff();
    let n = geo.n();
    let dtheta = [d.d(theta, Axis::U), d.d(theta, Axis::V)];
    // t[i][j] = ∇_i θ_j
    let t: [GridOneForm; 2] = [0, 1].map(|i| {
        node_map(n, |node| {
            let gamma = &geo.christoffel[node];
            let th = theta[node];
            [0, 1].map(|j| dtheta[i][node][j] - gamma[0][i][j] * th[0] - gamma[1][i][j] * th[1])
        })
    });
    // dt[k][i] = ∂_k t[i]
    let dt: [[GridOneForm; 2]; 2] = AXES.map(|ax| [d.d(&t[0], ax), d.d(&t[1], ax)]);
    node_map(n, |node| {
        let gi = geo.ginv(node);
        let gamma = &geo.christoffel[node];
        let tt = |i: usize, j: usize| t[i][node][j];
        let mut out = [0.0; 2];
        for (j, o) in out.iter_mut().enumerate() {
            for k in 0..2 {
                for i in 0..2 {
                    let mut cov = dt[k][i][node][j];
                    for m in 0..2 {
                        cov -= gamma[m][k][i] * tt(m, j) + gamma[m][k][j] * tt(i, m);
                    }
                    *o += gi[k][i] * cov;
                }
            }
        }
        out
    })
}

/// Codifferential of a 1-form, `δθ = -(1/√g) ∂_i(√g g^{ij} θ_j)`.
pub fn codifferential(theta: &GridOneForm, geo: &DerivedGeometry) -> GridScalar {
    let raised = node_map(geo.n(), |i| geo.raise(i, theta[i]));
    divergence(&raised, geo).map(|x| -x)
}

/// Hodge Laplacian `(dδ + δd) θ`; positive spectrum.
pub fn hodge_laplacian(theta: &GridOneForm, geo: &DerivedGeometry) -> GridOneForm {
    let d = geo.diff();
    let n = geo.n();
    let [ddu, ddv] = d.grad(&codifferential(theta, geo));
    let du = d.d(theta, Axis::U);
    let dv = d.d(theta, Axis::V);
    // dθ = b du∧dv; δ(b du∧dv) has components (∂_v s, -∂_u s)/√g with s = b/√g.
    let s = node_map(n, |i| (du[i][1] - dv[i][0]) / geo.sqrt_det_g[i]);
    let [su, sv] = d.grad(&s);
    node_map(n, |i| {
        let sg = geo.sqrt_det_g[i];
        let dd = geo.lower(i, [sv[i] / sg, -su[i] / sg]);
        [ddu[i] + dd[0], ddv[i] + dd[1]]
    })
}

/// Pointwise `g`-norm of a covector.
pub fn covector_norm(geo: &DerivedGeometry, node: usize, w: [f64; 2]) -> f64 {
    let r = geo.raise(node, w);
    (r[0] * w[0] + r[1] * w[1]).max(0.0).sqrt()
}

#[derive(Clone, Debug)]
pub struct OneFormLaplacians {
    pub rough: GridOneForm,
    pub hodge: GridOneForm,
    /// Pointwise norm of `Δ_h θ + Δθ - Kθ`.
    pub weitzenbock_residual: GridScalar,
}

pub fn oneform_laplacians(theta: &GridOneForm, geo: &DerivedGeometry) -> OneFormLaplacians {
    let rough = rough_laplacian(theta, geo);
    let hodge = hodge_laplacian(theta, geo);
    let weitzenbock_residual = node_map(geo.n(), |i| {
        let k = geo.data[i].k;
        let r = [0, 1].map(|j| hodge[i][j] + rough[i][j] - k * theta[i][j]);
        covector_norm(geo, i, r)
    });
    OneFormLaplacians { rough, hodge, weitzenbock_residual }
}

/// The 1-form `X ↦ <V, J X>` on tangent vectors.
pub fn omega_form(v: &GridNormalField, geo: &DerivedGeometry) -> GridOneForm {
    node_map(geo.n(), |i| {
        [0, 1].map(|k| v[i].dot(&j_apply(geo.tangents[k][i])))
    })
}

#[derive(Clone, Debug)]
pub struct OmegaCommutation {
    /// `Δ θ - ω̃(Δ^ξ V)` with `θ = ω̃(V)` and `Δ^ξ` the Laplacian of the
    /// contact-normal connection.
    pub residual: GridOneForm,
    /// `Δ θ - ω̃(Δ^ν V) - θ`: the same commutation taken with the full normal
    /// connection, where the extra `+θ` is the Reeb curvature term.
    pub full_connection_residual: GridOneForm,
    /// Largest Reeb-direction component of `Δ^ν V`, discarded before applying `ω̃`.
    pub projection_discrepancy: f64,
}

/// Commutation of `ω̃` with the normal and rough Laplacians for `V` in the
/// contact part of the normal bundle.
pub fn omega_commutation_residual(v: &GridNormalField, geo: &DerivedGeometry) -> Result<OmegaCommutation> {
    require_legendrian(geo)?;
    geo.check_normal(v, NormalPart::Contact)?;
    let theta = omega_form(v, geo);
    let rough = rough_laplacian(&theta, geo);
    let lap_xi = connection_laplacian(v, geo, NormalPart::Contact);
    let lap_nu = connection_laplacian(v, geo, NormalPart::Full);
    let w_xi = omega_form(&lap_xi, geo);
    let w_nu = omega_form(&lap_nu, geo);
    let n = geo.n();
    let residual = node_map(n, |i| [0, 1].map(|j| rough[i][j] - w_xi[i][j]));
    let full_connection_residual =
        node_map(n, |i| [0, 1].map(|j| rough[i][j] - w_nu[i][j] - theta[i][j]));
    let projection_discrepancy = (0..n * n)
        .map(|i| lap_nu[i].dot(&geo.reeb_normal[i]).abs())
        .fold(0.0, f64::max);
    Ok(OmegaCommutation { residual, full_connection_residual, projection_discrepancy })
}

/// Sup over nodes of the `g`-norm of a 1-form.
pub fn oneform_sup(theta: &GridOneForm, geo: &DerivedGeometry) -> f64 {
    (0..theta.len()).map(|i| covector_norm(geo, i, theta[i])).fold(0.0, f64::max)
}

/// Sup over nodes of the Euclidean norm of a vector field.
pub fn field_sup(v: &Grid<Vec6>) -> f64 {
    v.values().iter().map(Vec6::norm).fold(0.0, f64::max)
}

/// `<Δ^ν H, R> - 2 div_g(J H)`, which vanishes on every Legendrian surface.
pub fn reeb_pairing_residual(geo: &DerivedGeometry) -> Result<GridScalar> {
    require_legendrian(geo)?;
    let div = div_jh(geo)?;
    let lap = normal_laplacian(&geo.mean_curvature(), geo)?;
    Ok(node_map(geo.n(), |i| lap[i].dot(&j_apply(geo.positions[i])) - 2.0 * div.field[i]))
}

/// `∂_u θ_v - ∂_v θ_u` for the mean curvature form `θ_H = <H, J ·>`.
pub fn mean_curvature_form_closedness(geo: &DerivedGeometry) -> Result<GridScalar> {
    require_legendrian(geo)?;
    let theta = omega_form(&geo.mean_curvature(), geo);
    let d = geo.diff();
    let du = d.d(&theta, Axis::U);
    let dv = d.d(&theta, Axis::V);
    Ok(node_map(geo.n(), |i| du[i][1] - dv[i][0]))
}

/// Pointwise norms of covariant derivatives of the second fundamental form
/// and the mean curvature, split into contact and Reeb parts.
#[derive(Clone, Debug)]
pub struct GradientDecomposition {
    /// `|∇h|^2`, full normal connection.
    pub grad_h: GridScalar,
    /// `|∇^T h|^2`, contact-normal part only.
    pub grad_t_h: GridScalar,
    /// `|∇^ν H|^2`.
    pub grad_nu_mean: GridScalar,
    /// `|∇^T H|^2`.
    pub grad_t_mean: GridScalar,
    /// `|∇h|^2 - |∇^T h|^2 - S`.
    pub residual_h: GridScalar,
    /// `|∇^ν H|^2 - |∇^T H|^2 - H^2`.
    pub residual_mean: GridScalar,
    /// `|∇^T h|^2 - 3 |∇^T H|^2`.
    pub li_margin: GridScalar,
}

pub fn gradient_norm_decomposition(geo: &DerivedGeometry) -> Result<GradientDecomposition> {
    require_legendrian(geo)?;
    let d = geo.diff();
    let n = geo.n();
    let b: [GridNormalField; 3] = [0, 1, 2].map(|c| node_map(n, |i| geo.data[i].b[c]));
    // db[k][c] = ∂_k B_c, c indexing (uu, uv, vv)
    let db: [[GridNormalField; 3]; 2] = AXES.map(|ax| [d.d(&b[0], ax), d.d(&b[1], ax), d.d(&b[2], ax)]);
    let h = geo.mean_curvature();
    let dh = [d.d(&h, Axis::U), d.d(&h, Axis::V)];

    let per_node: Vec<[f64; 4]> = (0..n * n)
        .into_par_iter()
        .map(|node| {
            let gi = geo.ginv(node);
            let gamma = &geo.christoffel[node];
            let bij = |i: usize, j: usize| b[i + j][node];
            let mut cov = [[[Vec6::ZERO; 2]; 2]; 2];
            for (k, ck) in cov.iter_mut().enumerate() {
                for i in 0..2 {
                    for j in 0..2 {
                        let mut t = geo.project(node, &db[k][i + j][node], NormalPart::Full);
                        for m in 0..2 {
                            t -= bij(m, j) * gamma[m][k][i] + bij(i, m) * gamma[m][k][j];
                        }
                        ck[i][j] = t;
                    }
                }
            }
            let reeb = geo.reeb_normal[node];
            let contract3 = |f: &dyn Fn(&Vec6, &Vec6) -> f64| {
                let mut s = 0.0;
                for k in 0..2 {
                    for kk in 0..2 {
                        for i in 0..2 {
                            for ii in 0..2 {
                                for j in 0..2 {
                                    for jj in 0..2 {
                                        s += gi[k][kk] * gi[i][ii] * gi[j][jj]
                                            * f(&cov[k][i][j], &cov[kk][ii][jj]);
                                    }
                                }
                            }
                        }
                    }
                }
                s
            };
            let full = contract3(&|a, b| a.dot(b));
            let contact = contract3(&|a, b| a.reject(&reeb).dot(&b.reject(&reeb)));
            let dhn = [0, 1].map(|k| geo.project(node, &dh[k][node], NormalPart::Full));
            let contract1 = |f: &dyn Fn(&Vec6, &Vec6) -> f64| {
                let mut s = 0.0;
                for k in 0..2 {
                    for l in 0..2 {
                        s += gi[k][l] * f(&dhn[k], &dhn[l]);
                    }
                }
                s
            };
            let mean_full = contract1(&|a, b| a.dot(b));
            let mean_contact = contract1(&|a, b| a.reject(&reeb).dot(&b.reject(&reeb)));
            [full, contact, mean_full, mean_contact]
        })
        .collect();
    let pick = |c: usize| Grid::new(n, per_node.iter().map(|x| x[c]).collect()).expect("node count");
    let grad_h = pick(0);
    let grad_t_h = pick(1);
    let grad_nu_mean = pick(2);
    let grad_t_mean = pick(3);
    let residual_h = node_map(n, |i| grad_h[i] - grad_t_h[i] - geo.data[i].s);
    let residual_mean = node_map(n, |i| grad_nu_mean[i] - grad_t_mean[i] - geo.data[i].h2);
    let li_margin = node_map(n, |i| grad_t_h[i] - 3.0 * grad_t_mean[i]);
    Ok(GradientDecomposition {
        grad_h,
        grad_t_h,
        grad_nu_mean,
        grad_t_mean,
        residual_h,
        residual_mean,
        li_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sup_norm, Scheme};
    use crate::immersions::{catalog, perturbation_modes, resample_to_grid, CatalogParams, Immersion};
    use std::f64::consts::TAU;

    fn torus_geo(n: usize, scheme: Scheme) -> DerivedGeometry {
        DerivedGeometry::new(&resample_to_grid(&Immersion::legendrian_torus(0.0), n, scheme).unwrap())
            .unwrap()
    }

    fn perturbed_geo(n: usize, scheme: Scheme, eps: f64) -> DerivedGeometry {
        let s = Immersion::perturbed_torus(0.0, eps, perturbation_modes(0));
        DerivedGeometry::new(&resample_to_grid(&s, n, scheme).unwrap()).unwrap()
    }

    fn scalar(n: usize, f: impl Fn(f64, f64) -> f64) -> GridScalar {
        let h = TAU / n as f64;
        Grid::from_fn(n, |a, b| f(a as f64 * h, b as f64 * h))
    }

    #[test]
    fn torus_metric_and_christoffels() {
        let geo = torus_geo(16, Scheme::Spectral);
        for i in 0..geo.n() * geo.n() {
            let g = geo.data[i].g;
            assert!((g[0][0] - 2.0 / 3.0).abs() < 1e-12 && (g[0][1] - 1.0 / 3.0).abs() < 1e-12);
            assert!((geo.sqrt_det_g[i] - 1.0 / 3.0_f64.sqrt()).abs() < 1e-12);
            for gk in &geo.christoffel[i] {
                for row in gk {
                    for x in row {
                        assert!(x.abs() < 1e-12);
                    }
                }
                assert_eq!(gk[0][1], gk[1][0]);
            }
        }
    }

    #[test]
    fn laplace_beltrami_on_flat_torus() {
        let geo = torus_geo(16, Scheme::Spectral);
        let one = scalar(16, |_, _| 1.0);
        assert!(sup_norm(&laplace_beltrami(&one, &geo)) < 1e-12);
        let f = scalar(16, |u, _| u.cos());
        let lap = laplace_beltrami(&f, &geo);
        let expected = scalar(16, |u, _| -2.0 * u.cos());
        assert!(sup_norm(&lap.zip_map(&expected, |a, b| a - b)) < 1e-12);
    }

    #[test]
    fn laplacian_integrates_to_zero() {
        let geo = perturbed_geo(32, Scheme::Fd4, 0.05);
        let f = scalar(32, |u, v| (u + 2.0 * v).sin() * (v.cos() + 2.0).ln());
        let lap = laplace_beltrami(&f, &geo);
        assert!(crate::grid_ops::quadrature(&lap, &geo).abs() < 1e-6);
    }

    #[test]
    fn brioschi_vanishes_on_flat_tori() {
        let geo = torus_geo(16, Scheme::Fd4);
        assert!(sup_norm(&intrinsic_gauss_curvature(&geo)) < 1e-8);
        let clif = catalog("clifford-s3", CatalogParams::default()).unwrap();
        let geo = DerivedGeometry::new(&resample_to_grid(&clif, 16, Scheme::Fd4).unwrap()).unwrap();
        assert!(sup_norm(&intrinsic_gauss_curvature(&geo)) < 1e-8);
    }

    #[test]
    fn brioschi_matches_gauss_equation() {
        let errs: Vec<f64> = [16, 32]
            .iter()
            .map(|&n| {
                let geo = perturbed_geo(n, Scheme::Fd2, 0.05);
                let ki = intrinsic_gauss_curvature(&geo);
                (0..n * n).map(|i| (ki[i] - geo.data[i].k).abs()).fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
    }

    #[test]
    fn torus_residuals_vanish() {
        let geo = torus_geo(16, Scheme::Spectral);
        assert!(sup_norm(&div_jh(&geo).unwrap().field) < 1e-10);
        assert!(field_sup(&el_residual(&geo).unwrap()) < 1e-9);
        assert!(field_sup(&willmore_residual(&geo).unwrap()) < 1e-9);
        assert!(sup_norm(&reeb_pairing_residual(&geo).unwrap()) < 1e-9);
        assert!(sup_norm(&mean_curvature_form_closedness(&geo).unwrap()) < 1e-10);
        let zero = Grid::<Vec6>::zeros(16);
        assert!(field_sup(&normal_laplacian(&zero, &geo).unwrap()) == 0.0);
        let dec = gradient_norm_decomposition(&geo).unwrap();
        for i in 0..256 {
            assert!((dec.grad_h[i] - 2.0).abs() < 1e-8);
            assert!(dec.grad_t_h[i].abs() < 1e-8);
        }
    }

    #[test]
    fn clifford_is_willmore() {
        let clif = catalog("clifford-s3", CatalogParams::default()).unwrap();
        let geo = DerivedGeometry::new(&resample_to_grid(&clif, 16, Scheme::Fd4).unwrap()).unwrap();
        assert!(field_sup(&willmore_residual(&geo).unwrap()) < 1e-9);
        assert!(matches!(reeb_pairing_residual(&geo), Err(Error::NotLegendrian { .. })));
    }

    #[test]
    fn perturbed_torus_is_not_stationary() {
        let geo = perturbed_geo(32, Scheme::Spectral, 0.05);
        assert!(field_sup(&el_residual(&geo).unwrap()) >= 1e-3);
        let div = div_jh(&geo).unwrap();
        assert!(sup_norm(&div.field) > 1e-3);
        assert!(crate::grid_ops::quadrature(&div.field, &geo).abs() < 1e-10);
        assert!(field_sup(&willmore_residual(&geo).unwrap()) > 1e-3);
    }

    #[test]
    fn normality_is_enforced() {
        let geo = torus_geo(16, Scheme::Fd4);
        let tangent = geo.tangents[0].clone();
        assert!(matches!(normal_laplacian(&tangent, &geo), Err(Error::NotNormal { .. })));
        let reeb = node_map(16, |i| j_apply(geo.positions[i]));
        assert!(matches!(
            omega_commutation_residual(&reeb, &geo),
            Err(Error::NotInContactKernel { .. })
        ));
    }

    #[test]
    fn hodge_of_exact_form_on_flat_torus() {
        // θ = d cos u; on the flat torus Δ_h θ = d(δ d f) = -Δθ.
        let geo = torus_geo(32, Scheme::Spectral);
        let theta: GridOneForm = Grid::from_fn(32, |a, _| [-(a as f64 * TAU / 32.0).sin(), 0.0]);
        let res = oneform_laplacians(&theta, &geo);
        assert!(sup_norm(&res.weitzenbock_residual) < 1e-10);
        let ddf = geo.diff().grad(&codifferential(&theta, &geo));
        for i in 0..theta.len() {
            assert!((res.hodge[i][0] - ddf[0][i]).abs() < 1e-10);
            assert!((res.hodge[i][1] - ddf[1][i]).abs() < 1e-10);
        }
        let zero = oneform_laplacians(&GridOneForm::zeros(32), &geo);
        assert_eq!(sup_norm(&zero.weitzenbock_residual), 0.0);
    }

    #[test]
    fn omega_commutation_zero_and_frame_fields() {
        let geo = torus_geo(16, Scheme::Spectral);
        let zero = Grid::<Vec6>::zeros(16);
        let r = omega_commutation_residual(&zero, &geo).unwrap();
        assert_eq!(oneform_sup(&r.residual, &geo), 0.0);
        let je2 = node_map(16, |i| geo.frames[i].normal[1]);
        let r = omega_commutation_residual(&je2, &geo).unwrap();
        assert!(oneform_sup(&r.residual, &geo) < 1e-10);
        assert!(oneform_sup(&r.full_connection_residual, &geo) < 1e-10);
    }
}
