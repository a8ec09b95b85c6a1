//! Global operators on doubly periodic grid surfaces.
//!
//! Everything here is assembled from the scheme derivatives of
//! [`Differentiator`] and the per-node data of [`crate::extrinsic`].
//! Sign conventions: the Laplace–Beltrami and rough Laplacians have
//! negative spectrum, the Hodge Laplacian `dδ + δd` positive spectrum.

mod integrals;
mod operators;

pub use integrals::*;
pub use operators::*;

use rayon::prelude::*;

use crate::contact::j_apply;
use crate::error::{Error, Result};
use crate::extrinsic::{analyze, AdaptedFrame, ExtrinsicData, Mat2};
use crate::grid::{Axis, Differentiator, Grid, GridScalar, GridSurface, Scheme};
use crate::vec6::Vec6;

/// A grid of Vec6 values meant to be normal to the surface.
pub type GridNormalField = Grid<Vec6>;
/// Covector components `(θ_u, θ_v)` in the coordinate coframe.
pub type GridOneForm = Grid<[f64; 2]>;
/// Christoffel symbols `gamma[k][i][j] = Γ^k_ij`.
pub type Christoffel = [[[f64; 2]; 2]; 2];

/// Which normal projection a connection uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalPart {
    /// The full normal bundle inside `TS^5`.
    Full,
    /// The part of the normal bundle inside `ker α`, i.e. with the Reeb-like
    /// normal direction removed.
    Contact,
}

/// Per-node geometry of a grid surface together with metric derivatives.
#[derive(Clone, Debug)]
pub struct DerivedGeometry {
    diff: Differentiator,
    pub positions: Grid<Vec6>,
    /// Coordinate tangents projected onto `T_p S^5`.
    pub tangents: [Grid<Vec6>; 2],
    pub frames: Vec<AdaptedFrame>,
    pub data: Vec<ExtrinsicData>,
    /// Unit normal part of the Reeb field, the direction removed by [`NormalPart::Contact`].
    pub reeb_normal: Vec<Vec6>,
    pub christoffel: Vec<Christoffel>,
    pub sqrt_det_g: GridScalar,
}

impl DerivedGeometry {
    pub fn new(surface: &GridSurface) -> Result<Self> {
        let diff = surface.differentiator();
        let jets = surface.jets_with(&diff);
        let analyzed: Vec<Result<(AdaptedFrame, ExtrinsicData)>> =
            jets.par_iter().map(analyze).collect();
        let mut frames = Vec::with_capacity(jets.len());
        let mut data = Vec::with_capacity(jets.len());
        for item in analyzed {
            let (f, d) = item?;
            frames.push(f);
            data.push(d);
        }
        let n = surface.n();
        let positions = surface.positions().clone();
        let tangent = |i: usize| {
            Grid::from_fn(n, |a, b| {
                let jet = jets[a * n + b].projected_to_sphere();
                jet.d1[i]
            })
        };
        let tangents = [tangent(0), tangent(1)];
        let reeb_normal = frames
            .iter()
            .zip(positions.values())
            .map(|(fr, p)| fr.normal_part(&j_apply(*p)).normalized())
            .collect();

        let metric = |i: usize, j: usize| Grid::from_fn(n, |a, b| data[a * n + b].g[i][j]);
        let gs = [metric(0, 0), metric(0, 1), metric(1, 1)];
        // dg[k][c]: derivative along axis k of metric component c (uu, uv, vv).
        let dg: [[GridScalar; 3]; 2] = [Axis::U, Axis::V].map(|ax| {
            [diff.d(&gs[0], ax), diff.d(&gs[1], ax), diff.d(&gs[2], ax)]
        });
        let christoffel = (0..n * n)
            .map(|node| {
                let dgm = |k: usize, i: usize, j: usize| dg[k][i + j][node];
                let ginv = data[node].ginv;
                let mut gamma = [[[0.0; 2]; 2]; 2];
                for (k, gk) in gamma.iter_mut().enumerate() {
                    for i in 0..2 {
                        for j in 0..2 {
                            gk[i][j] = (0..2)
                                .map(|l| {
                                    0.5 * ginv[k][l]
                                        * (dgm(i, j, l) + dgm(j, i, l) - dgm(l, i, j))
                                })
                                .sum();
                        }
                    }
                }
                gamma
            })
            .collect();
        let sqrt_det_g = Grid::from_fn(n, |a, b| data[a * n + b].sqrt_det_g);
        Ok(DerivedGeometry {
            diff,
            positions,
            tangents,
            frames,
            data,
            reeb_normal,
            christoffel,
            sqrt_det_g,
        })
    }

    pub fn n(&self) -> usize {
        self.diff.n()
    }

    pub fn scheme(&self) -> Scheme {
        self.diff.scheme()
    }

    pub fn diff(&self) -> &Differentiator {
        &self.diff
    }

    pub fn ginv(&self, node: usize) -> &Mat2 {
        &self.data[node].ginv
    }

    /// A scalar field read off the per-node data.
    pub fn scalar(&self, f: impl Fn(&ExtrinsicData) -> f64) -> GridScalar {
        let n = self.n();
        Grid::new(n, self.data.iter().map(f).collect()).expect("node count")
    }

    pub fn mean_curvature(&self) -> GridNormalField {
        let n = self.n();
        Grid::new(n, self.data.iter().map(|d| d.mean_curvature).collect()).expect("node count")
    }

    /// Largest `|α(∂_i)|` over the grid.
    pub fn legendrian_residual(&self) -> f64 {
        self.data.iter().map(|d| d.legendrian_residual).fold(0.0, f64::max)
    }

    /// Projects `w` at `node` onto the chosen normal bundle.
    pub fn project(&self, node: usize, w: &Vec6, part: NormalPart) -> Vec6 {
        let full = self.frames[node].normal_part(w);
        match part {
            NormalPart::Full => full,
            NormalPart::Contact => full.reject(&self.reeb_normal[node]),
        }
    }

    /// Tangent vector `X^i ∂_i` at `node`.
    pub fn tangent_vector(&self, node: usize, x: [f64; 2]) -> Vec6 {
        self.tangents[0][node] * x[0] + self.tangents[1][node] * x[1]
    }

    /// Raises the index of a covector at `node`.
    pub fn raise(&self, node: usize, w: [f64; 2]) -> [f64; 2] {
        let gi = self.ginv(node);
        [gi[0][0] * w[0] + gi[0][1] * w[1], gi[1][0] * w[0] + gi[1][1] * w[1]]
    }

    /// Lowers the index of a vector at `node`.
    pub fn lower(&self, node: usize, x: [f64; 2]) -> [f64; 2] {
        let g = &self.data[node].g;
        [g[0][0] * x[0] + g[0][1] * x[1], g[1][0] * x[0] + g[1][1] * x[1]]
    }

    /// Checks that `v` is normal (and, for the contact part, in `ker α`).
    pub fn check_normal(&self, v: &GridNormalField, part: NormalPart) -> Result<()> {
        if v.n() != self.n() {
            return Err(Error::SizeMismatch { expected: self.n(), found: v.n() });
        }
        let scale = 1.0 + v.values().iter().map(Vec6::norm).fold(0.0, f64::max);
        for (node, w) in v.values().iter().enumerate() {
            let defect = (*w - self.frames[node].normal_part(w)).norm();
            if defect > NORMAL_TOL * scale {
                return Err(Error::NotNormal { defect, node });
            }
            if part == NormalPart::Contact {
                let alpha = w.dot(&j_apply(self.positions[node]));
                if alpha.abs() > NORMAL_TOL * scale {
                    return Err(Error::NotInContactKernel { alpha, node });
                }
            }
        }
        Ok(())
    }
}

/// Tolerance for normality and contact-kernel preconditions on input fields.
pub const NORMAL_TOL: f64 = 1e-8;
/// Legendrian residual required by the Legendrian-only grid operations.
pub const GRID_LEGENDRIAN_TOL: f64 = 1e-3;

pub(crate) fn require_legendrian(geo: &DerivedGeometry) -> Result<()> {
    let residual = geo.legendrian_residual();
    if residual > GRID_LEGENDRIAN_TOL {
        return Err(Error::NotLegendrian { residual, tolerance: GRID_LEGENDRIAN_TOL });
    }
    Ok(())
}
