//! Pointwise extrinsic geometry of a surface in S^5: adapted frames, the
//! induced metric, the second fundamental form and its invariants.
//!
//! Contracted quantities (`S`, `H`, frame components `h^β_ab`) are taken in
//! the orthonormal tangent frame, so tangent indices are flat.

use crate::contact::{contact_form, j_apply};
use crate::error::{Error, Result};
use crate::immersions::Jet2;
use crate::vec6::Vec6;

/// Gram determinant below which the induced metric counts as degenerate.
pub const MIN_GRAM_DET: f64 = 1e-12;
/// Contact residual under which the Legendrian frame is used.
pub const LEGENDRIAN_FRAME_TOL: f64 = 1e-8;

/// Orthonormal frame `(E1, E2; N1, N2, N3)` of `T_p S^5` along a surface.
///
/// For Legendrian points the normal frame is `(J E1, J E2, R)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptedFrame {
    pub tangent: [Vec6; 2],
    pub normal: [Vec6; 3],
    pub legendrian: bool,
}

impl AdaptedFrame {
    /// The same frame with `(E1, E2)` rotated by `angle`; the normal part is kept.
    pub fn rotate_tangent(&self, angle: f64) -> AdaptedFrame {
        let (s, c) = angle.sin_cos();
        let [e1, e2] = self.tangent;
        AdaptedFrame { tangent: [e1 * c + e2 * s, e2 * c - e1 * s], ..*self }
    }

    /// Largest deviation of the five frame vectors from orthonormality,
    /// including orthogonality to the position `p`.
    pub fn orthonormality_defect(&self, p: &Vec6) -> f64 {
        let all = [self.tangent[0], self.tangent[1], self.normal[0], self.normal[1], self.normal[2]];
        let mut worst = 0.0_f64;
        for (i, a) in all.iter().enumerate() {
            worst = worst.max(a.dot(p).abs());
            for (j, b) in all.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }

    /// Orthogonal projection onto the normal space of the surface inside `T_p S^5`.
    pub fn normal_part(&self, w: &Vec6) -> Vec6 {
        self.normal.iter().fold(Vec6::ZERO, |acc, n| acc + *n * w.dot(n))
    }

    /// Normal part with the third (Reeb-adapted) direction removed.
    pub fn contact_normal_part(&self, w: &Vec6) -> Vec6 {
        self.normal[..2].iter().fold(Vec6::ZERO, |acc, n| acc + *n * w.dot(n))
    }
}

pub type Mat2 = [[f64; 2]; 2];

fn inverse2(m: &Mat2) -> (Mat2, f64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    (inv, det)
}

/// Induced metric `g_ij = <∂_i, ∂_j>` from a jet (tangents projected onto the sphere).
pub fn induced_metric(jet: &Jet2) -> Mat2 {
    let d = jet.projected_to_sphere().d1;
    [[d[0].dot(&d[0]), d[0].dot(&d[1])], [d[1].dot(&d[0]), d[1].dot(&d[1])]]
}

/// Pointwise extrinsic quantities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtrinsicData {
    pub g: Mat2,
    pub ginv: Mat2,
    pub sqrt_det_g: f64,
    /// Coordinate second fundamental form `B(∂_i, ∂_j)` as `[B_uu, B_uv, B_vv]`.
    pub b: [Vec6; 3],
    /// Frame second fundamental form `B(E_a, E_b)` as `[B_11, B_12, B_22]`.
    pub b_frame: [Vec6; 3],
    /// `h[β][a][b] = <B(E_a, E_b), N_β>`.
    pub h: [Mat2; 3],
    /// Coefficients `c[a][i]` with `E_a = c[a][i] ∂_i`.
    pub frame_coeffs: Mat2,
    pub mean_curvature: Vec6,
    pub h_comp: [f64; 3],
    pub h2: f64,
    pub s: f64,
    pub rho2: f64,
    pub k: f64,
    pub legendrian_residual: f64,
}

impl ExtrinsicData {
    /// Frame index pairs `(a, b)` matching the storage order of `b_frame`.
    pub const PAIRS: [(usize, usize); 3] = [(0, 0), (0, 1), (1, 1)];

    /// `B(E_a, E_b)` for any `a, b ∈ {0, 1}`.
    pub fn b_ab(&self, a: usize, b: usize) -> Vec6 {
        self.b_frame[a + b]
    }

    /// `B(∂_i, ∂_j)` for any `i, j ∈ {0, 1}`.
    pub fn b_ij(&self, i: usize, j: usize) -> Vec6 {
        self.b[i + j]
    }
}

/// `(α(∂u), α(∂v))` at the jet's point.
pub fn legendrian_residual(jet: &Jet2) -> (f64, f64) {
    let p = jet.point();
    (contact_form(&p, &jet.d1[0]), contact_form(&p, &jet.d1[1]))
}

fn max_alpha(jet: &Jet2) -> f64 {
    let (a, b) = legendrian_residual(jet);
    a.abs().max(b.abs())
}

/// Builds the adapted frame.
///
/// `E1, E2` come from Gram–Schmidt on `(∂u, ∂v)`. The normal frame is
/// Gram–Schmidt on the normal parts of `J E1, J E2, R` followed by the
/// coordinate axes, skipping seeds that are (numerically) dependent; at
/// Legendrian points the first three seeds already give `(J E1, J E2, R)`.
pub fn adapted_frame(jet: &Jet2) -> Result<AdaptedFrame> {
    let jet = jet.projected_to_sphere();
    let p = jet.point().vec();
    let [du, dv] = jet.d1;
    let g = induced_metric(&jet);
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    if !(det >= MIN_GRAM_DET) {
        return Err(Error::DegenerateMetric { det });
    }
    let e1 = du.normalized();
    let e2 = dv.reject(&e1).normalized();

    let r = j_apply(p);
    let seeds = [j_apply(e1), j_apply(e2), r]
        .into_iter()
        .chain((0..6).map(Vec6::axis));
    let mut basis: Vec<Vec6> = vec![p, e1, e2];
    let mut normal = Vec::with_capacity(3);
    for seed in seeds {
        if normal.len() == 3 {
            break;
        }
        let mut w = seed;
        // Two passes of modified Gram–Schmidt for stability.
        for _ in 0..2 {
            for b in &basis {
                w = w.reject(b);
            }
        }
        let len = w.norm();
        if len > 1e-6 {
            let n = w * (1.0 / len);
            basis.push(n);
            normal.push(n);
        }
    }
    let normal: [Vec6; 3] = normal.try_into().expect("S^5 has a three-dimensional normal space");
    Ok(AdaptedFrame { tangent: [e1, e2], normal, legendrian: max_alpha(&jet) <= LEGENDRIAN_FRAME_TOL })
}

/// Computes the second fundamental form and its invariants in `frame`.
pub fn extrinsic_data(jet: &Jet2, frame: &AdaptedFrame) -> Result<ExtrinsicData> {
    let legendrian_residual = max_alpha(jet);
    let jet = jet.projected_to_sphere();
    let p = jet.value.normalized();
    let g = induced_metric(&jet);
    let (ginv, det) = inverse2(&g);
    if !(det >= MIN_GRAM_DET) {
        return Err(Error::DegenerateMetric { det });
    }

    // Normal part of the ambient Hessian, corrected by g_ij p for the sphere.
    let normal_of = |w: Vec6| frame.normal_part(&w);
    let b = [
        normal_of(jet.d2[0] + p * g[0][0]),
        normal_of(jet.d2[1] + p * g[0][1]),
        normal_of(jet.d2[2] + p * g[1][1]),
    ];
    let b_at = |i: usize, j: usize| b[i + j];

    let mut c = [[0.0; 2]; 2];
    for (a, e) in frame.tangent.iter().enumerate() {
        let low = [e.dot(&jet.d1[0]), e.dot(&jet.d1[1])];
        for i in 0..2 {
            c[a][i] = ginv[i][0] * low[0] + ginv[i][1] * low[1];
        }
    }
    let frame_b = |a: usize, bb: usize| {
        let mut acc = Vec6::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                acc += b_at(i, j) * (c[a][i] * c[bb][j]);
            }
        }
        acc
    };
    let b_frame = [frame_b(0, 0), frame_b(0, 1), frame_b(1, 1)];

    let mut h = [[[0.0; 2]; 2]; 3];
    for (beta, n) in frame.normal.iter().enumerate() {
        for a in 0..2 {
            for bb in 0..2 {
                h[beta][a][bb] = b_frame[a + bb].dot(n);
            }
        }
    }
    let mean_curvature = (b_frame[0] + b_frame[2]) * 0.5;
    let h_comp = frame.normal.map(|n| mean_curvature.dot(&n));
    let h2 = mean_curvature.norm_sq();
    let s = b_frame[0].norm_sq() + 2.0 * b_frame[1].norm_sq() + b_frame[2].norm_sq();
    Ok(ExtrinsicData {
        g,
        ginv,
        sqrt_det_g: det.sqrt(),
        b,
        b_frame,
        h,
        frame_coeffs: c,
        mean_curvature,
        h_comp,
        h2,
        s,
        rho2: s - 2.0 * h2,
        k: 1.0 + 2.0 * h2 - 0.5 * s,
        legendrian_residual,
    })
}

/// Frame plus extrinsic data in one call.
pub fn analyze(jet: &Jet2) -> Result<(AdaptedFrame, ExtrinsicData)> {
    let frame = adapted_frame(jet)?;
    let data = extrinsic_data(jet, &frame)?;
    Ok((frame, data))
}

/// Residuals of the pointwise structure equations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct IdentityResiduals {
    /// `max |h^3_ab|`; `None` when the frame is not Legendrian.
    pub h3_max: Option<f64>,
    /// `max |h^k_ij - h^i_kj|` over all index triples; `None` off Legendrian frames.
    pub symmetry_max: Option<f64>,
    /// `max |h^β_ab - h^β_ba|`.
    pub pair_symmetry_max: f64,
    /// `|2K - 2 - 4H^2 + S|`.
    pub gauss: f64,
    /// `det h^1 + det h^2`.
    pub det_sum: f64,
    /// Trace-free part `max |h^β_ab - H^β δ_ab|`.
    pub trace_free_max: f64,
}

/// `det h^1 + det h^2`, the normal curvature term of a Legendrian surface.
pub fn det_sum(data: &ExtrinsicData) -> f64 {
    let det = |m: &Mat2| m[0][0] * m[1][1] - m[0][1] * m[1][0];
    det(&data.h[0]) + det(&data.h[1])
}

pub fn pointwise_identity_residuals(
    _jet: &Jet2,
    frame: &AdaptedFrame,
    data: &ExtrinsicData,
) -> IdentityResiduals {
    let h = &data.h;
    let pair_symmetry_max =
        h.iter().map(|m| (m[0][1] - m[1][0]).abs()).fold(0.0, f64::max);
    let mut trace_free_max = 0.0_f64;
    for (beta, m) in h.iter().enumerate() {
        for a in 0..2 {
            for b in 0..2 {
                let delta = if a == b { data.h_comp[beta] } else { 0.0 };
                trace_free_max = trace_free_max.max((m[a][b] - delta).abs());
            }
        }
    }
    let (h3_max, symmetry_max) = if frame.legendrian {
        let h3 = h[2].iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()));
        let mut sym = 0.0_f64;
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    sym = sym.max((h[k][i][j] - h[i][k][j]).abs());
                    sym = sym.max((h[k][i][j] - h[j][i][k]).abs());
                }
            }
        }
        (Some(h3), Some(sym))
    } else {
        (None, None)
    };
    IdentityResiduals {
        h3_max,
        symmetry_max,
        pair_symmetry_max,
        gauss: (2.0 * data.k - 2.0 - 4.0 * data.h2 + data.s).abs(),
        det_sum: det_sum(data),
        trace_free_max,
    }
}
