use std::f64::consts::TAU;

use super::operators::*;
use super::{DerivedGeometry, NormalPart};
use crate::error::Result;
use crate::extrinsic::{analyze, det_sum, ExtrinsicData};
use crate::grid::{sup_norm, GridScalar};
use crate::immersions::{Immersion, ParamPoint};
use crate::report::Report;

/// Pairwise (cascade) summation; deterministic and accurate for long sums.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 16 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// `∫ f dμ` by the periodic trapezoidal rule.
pub fn quadrature(f: &GridScalar, geo: &DerivedGeometry) -> f64 {
    let h = TAU / geo.n() as f64;
    let weighted: Vec<f64> =
        f.values().iter().zip(geo.sqrt_det_g.values()).map(|(x, s)| x * s).collect();
    pairwise_sum(&weighted) * h * h
}

pub fn area(geo: &DerivedGeometry) -> f64 {
    let h = TAU / geo.n() as f64;
    pairwise_sum(geo.sqrt_det_g.values()) * h * h
}

/// `(∫ f^2 dμ)^{1/2}`.
pub fn l2_norm(f: &GridScalar, geo: &DerivedGeometry) -> f64 {
    quadrature(&f.map(|x| x * x), geo).sqrt()
}

/// The six pinching integrands evaluated pointwise.
pub fn pinching_integrands(d: &ExtrinsicData) -> [f64; 6] {
    let (s, h2, rho2) = (d.s, d.h2, d.rho2);
    [
        1.5 * rho2 * (2.0 - s) + 2.0 * h2 * rho2 + 2.0 * h2,
        (rho2 + 0.5 * s) * (2.0 - s),
        s * (2.0 - s),
        s * (2.0 - 1.5 * s),
        rho2 * (2.0 - rho2),
        rho2 * (2.0 - 1.5 * rho2),
    ]
}

/// Integrals and residual summaries of one surface.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralReport {
    pub legendrian: bool,
    pub area: f64,
    /// `∫ ρ^2`.
    pub willmore: f64,
    /// `I1 … I6`.
    pub pinching: [f64; 6],
    /// Pointwise sup of each pinching integrand.
    pub pinching_sup: [f64; 6],
    /// `∫|∇^ν H|^2 + ∫ K H^2`.
    pub e: Option<f64>,
    /// `∫|∇^ν H|^2 + ∫ (K - 1) H^2`.
    pub e_contact: Option<f64>,
    /// `∫ |∇h|^2 - 4|∇^ν H|^2 + 2Kρ^2 - 2(det h^1 + det h^2)^2`.
    pub sigma_simons: Option<f64>,
    /// Extra residual sup-norms, keyed by report name.
    pub residuals: Vec<(&'static str, f64)>,
}

impl IntegralReport {
    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        r.flag("legendrian", self.legendrian);
        r.number("area", self.area);
        r.number("W", self.willmore);
        for (k, (v, s)) in self.pinching.iter().zip(&self.pinching_sup).enumerate() {
            r.number(format!("I{}", k + 1), *v);
            r.number(format!("I{}_integrand_sup", k + 1), *s);
        }
        for (key, val) in [("E", self.e), ("E_contact", self.e_contact), ("Sigma_Simons", self.sigma_simons)] {
            r.flag(format!("applicable.{key}"), val.is_some());
            if let Some(x) = val {
                r.number(key, x);
            }
        }
        for (k, v) in &self.residuals {
            r.number(*k, *v);
        }
        r
    }
}

fn integrand_sup(values: impl Iterator<Item = [f64; 6]>) -> [f64; 6] {
    values.fold([0.0; 6], |mut acc, x| {
        for (a, b) in acc.iter_mut().zip(x) {
            *a = a.max(b.abs());
        }
        acc
    })
}

/// Integral report of a doubly periodic grid surface.
///
/// Legendrian-only entries (`E`, `Sigma_Simons`, the identity residuals) are
/// filled when the surface passes the grid Legendrian tolerance.
pub fn integral_report(geo: &DerivedGeometry) -> Result<IntegralReport> {
    let n = geo.n();
    let integrands: Vec<[f64; 6]> = geo.data.iter().map(pinching_integrands).collect();
    let component = |c: usize| GridScalar::new(n, integrands.iter().map(|x| x[c]).collect());
    let mut pinching = [0.0; 6];
    for (c, p) in pinching.iter_mut().enumerate() {
        *p = quadrature(&component(c)?, geo);
    }
    let legendrian = geo.legendrian_residual() <= super::GRID_LEGENDRIAN_TOL;
    let mut residuals = vec![("legendrian_residual", geo.legendrian_residual())];
    residuals.push(("willmore_residual_sup", field_sup(&willmore_residual(geo)?)));
    let k_int = intrinsic_gauss_curvature(geo);
    let k_dev = (0..n * n).map(|i| (k_int[i] - geo.data[i].k).abs()).fold(0.0, f64::max);
    residuals.push(("K_intrinsic_dev_sup", k_dev));

    let (mut e, mut e_contact, mut sigma_simons) = (None, None, None);
    if legendrian {
        let dec = gradient_norm_decomposition(geo)?;
        let h2 = geo.scalar(|d| d.h2);
        let grad_nu = quadrature(&dec.grad_nu_mean, geo);
        let kh2 = quadrature(&geo.scalar(|d| d.k * d.h2), geo);
        e = Some(grad_nu + kh2);
        e_contact = Some(grad_nu + kh2 - quadrature(&h2, geo));
        let simons = GridScalar::new(
            n,
            (0..n * n)
                .map(|i| {
                    let d = &geo.data[i];
                    let det_sum = det_sum(d);
                    dec.grad_h[i] - 4.0 * dec.grad_nu_mean[i] + 2.0 * d.k * d.rho2
                        - 2.0 * det_sum * det_sum
                })
                .collect(),
        )?;
        sigma_simons = Some(quadrature(&simons, geo));
        let div = div_jh(geo)?;
        residuals.push(("div_JH_l2", l2_norm(&div.field, geo)));
        residuals.push(("JH_tangency_defect", div.tangency_defect));
        residuals.push(("el_residual_sup", field_sup(&el_residual(geo)?)));
        residuals.push(("el_residual_xi_sup", field_sup(&el_residual_contact(geo)?)));
        residuals.push(("reeb_pairing_sup", sup_norm(&reeb_pairing_residual(geo)?)));
        residuals.push(("closedness_sup", sup_norm(&mean_curvature_form_closedness(geo)?)));
        residuals.push(("decomposition_h_sup", sup_norm(&dec.residual_h)));
        residuals.push(("decomposition_mean_sup", sup_norm(&dec.residual_mean)));
        let li_min = dec.li_margin.values().iter().copied().fold(f64::INFINITY, f64::min);
        residuals.push(("li_margin_min", li_min));
        let h = geo.mean_curvature();
        let reeb_part = (0..n * n)
            .map(|i| (h[i] - geo.project(i, &h[i], NormalPart::Contact)).norm())
            .fold(0.0, f64::max);
        residuals.push(("mean_curvature_reeb_sup", reeb_part));
    }
    residuals.sort_by(|a, b| a.0.cmp(b.0));
    Ok(IntegralReport {
        legendrian,
        area: area(geo),
        willmore: quadrature(&geo.scalar(|d| d.rho2), geo),
        pinching,
        pinching_sup: integrand_sup(integrands.into_iter()),
        e,
        e_contact,
        sigma_simons,
        residuals,
    })
}

/// Pointwise integrals over the parameter chart of a catalog surface, with
/// the trapezoidal rule in both directions (closed in `u` when the chart is
/// not periodic). Entries that need derivatives of curvature are omitted.
pub fn chart_integral_report(surface: &Immersion, n: usize) -> Result<IntegralReport> {
    let ([u0, u1], [v0, v1]) = surface.domain();
    let [per_u, per_v] = surface.periodicity();
    let axis = |lo: f64, hi: f64, periodic: bool| -> Vec<(f64, f64)> {
        if periodic {
            let h = (hi - lo) / n as f64;
            (0..n).map(|k| (lo + k as f64 * h, h)).collect()
        } else {
            let h = (hi - lo) / n as f64;
            (0..=n).map(|k| (lo + k as f64 * h, if k == 0 || k == n { 0.5 * h } else { h })).collect()
        }
    };
    let us = axis(u0, u1, per_u);
    let vs = axis(v0, v1, per_v);
    let mut weighted: Vec<[f64; 8]> = Vec::with_capacity(us.len() * vs.len());
    let mut sup_src = Vec::with_capacity(us.len() * vs.len());
    let mut legendrian = surface.is_legendrian();
    for (u, wu) in &us {
        for (v, wv) in &vs {
            let (frame, d) = analyze(&surface.eval_jet2(ParamPoint::new(*u, *v))?)?;
            legendrian &= frame.legendrian;
            let w = wu * wv * d.sqrt_det_g;
            let p = pinching_integrands(&d);
            weighted.push([w, w * d.rho2, w * p[0], w * p[1], w * p[2], w * p[3], w * p[4], w * p[5]]);
            sup_src.push(p);
        }
    }
    let col = |c: usize| pairwise_sum(&weighted.iter().map(|x| x[c]).collect::<Vec<_>>());
    Ok(IntegralReport {
        legendrian,
        area: col(0),
        willmore: col(1),
        pinching: [col(2), col(3), col(4), col(5), col(6), col(7)],
        pinching_sup: integrand_sup(sup_src.into_iter()),
        e: None,
        e_contact: None,
        sigma_simons: None,
        residuals: Vec::new(),
    })
}
