//! Doubly periodic N×N grids and their differentiation schemes.
//!
//! Node `(a, b)` sits at `(u_a, v_b) = (2πa/N, 2πb/N)` and is stored at
//! index `a * N + b` (u-major).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::contact::SpherePoint;
use crate::error::{Error, Result};
use crate::immersions::Jet2;
use crate::vec6::Vec6;

/// Values that can live on grid nodes and be differentiated componentwise.
pub trait GridValue: Copy + Send + Sync {
    const DIM: usize;
    fn zero() -> Self;
    fn component(&self, c: usize) -> f64;
    fn set_component(&mut self, c: usize, x: f64);
}

impl GridValue for f64 {
    const DIM: usize = 1;
    fn zero() -> Self {
        0.0
    }
    fn component(&self, _c: usize) -> f64 {
        *self
    }
    fn set_component(&mut self, _c: usize, x: f64) {
        *self = x;
    }
}

impl GridValue for [f64; 2] {
    const DIM: usize = 2;
    fn zero() -> Self {
        [0.0; 2]
    }
    fn component(&self, c: usize) -> f64 {
        self[c]
    }
    fn set_component(&mut self, c: usize, x: f64) {
        self[c] = x;
    }
}

impl GridValue for Vec6 {
    const DIM: usize = 6;
    fn zero() -> Self {
        Vec6::ZERO
    }
    fn component(&self, c: usize) -> f64 {
        self.0[c]
    }
    fn set_component(&mut self, c: usize, x: f64) {
        self.0[c] = x;
    }
}

/// Values on the nodes of an N×N periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: GridValue> Grid<T> {
    pub fn new(n: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::SizeMismatch { expected: n * n, found: data.len() });
        }
        Ok(Grid { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        Grid { n, data: vec![T::zero(); n * n] }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let data = (0..n * n).map(|i| f(i / n, i % n)).collect();
        Grid { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<T> {
        self.data
    }

    pub fn map<U: GridValue>(&self, f: impl Fn(&T) -> U) -> Grid<U> {
        Grid { n: self.n, data: self.data.iter().map(f).collect() }
    }

    pub fn zip_map<S: GridValue, U: GridValue>(
        &self,
        other: &Grid<S>,
        f: impl Fn(&T, &S) -> U,
    ) -> Grid<U> {
        assert_eq!(self.n, other.n, "grid size mismatch");
        Grid { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect() }
    }
}

impl<T> std::ops::Index<usize> for Grid<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.data[i]
    }
}

pub type GridScalar = Grid<f64>;

/// Largest absolute value of a scalar grid.
pub fn sup_norm(f: &GridScalar) -> f64 {
    f.values().iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Second-order central differences.
    Fd2,
    /// Fourth-order central differences.
    Fd4,
    /// Fourier collocation.
    Spectral,
}

impl Scheme {
    /// Nominal convergence order; `None` for the spectral scheme.
    pub fn order(&self) -> Option<f64> {
        match self {
            Scheme::Fd2 => Some(2.0),
            Scheme::Fd4 => Some(4.0),
            Scheme::Spectral => None,
        }
    }

    /// Minimum fitted order accepted when a refinement study certifies this scheme.
    pub fn required_fit_order(&self) -> f64 {
        match self {
            Scheme::Fd2 => 1.8,
            Scheme::Fd4 => 3.5,
            Scheme::Spectral => 3.5,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Fd2 => "fd2",
            Scheme::Fd4 => "fd4",
            Scheme::Spectral => "spectral",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fd2" => Ok(Scheme::Fd2),
            "fd4" => Ok(Scheme::Fd4),
            "spectral" => Ok(Scheme::Spectral),
            other => Err(Error::Config(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    U,
    V,
}

pub fn check_grid_size(n: usize) -> Result<()> {
    if n < 8 || n % 2 != 0 {
        return Err(Error::InvalidGridSize(n));
    }
    Ok(())
}

/// Periodic differentiation on an N×N grid with a fixed scheme.
#[derive(Clone)]
pub struct Differentiator {
    n: usize,
    scheme: Scheme,
    h: f64,
    fft: Option<(Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>)>,
}

impl fmt::Debug for Differentiator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Differentiator").field("n", &self.n).field("scheme", &self.scheme).finish()
    }
}

impl Differentiator {
    pub fn new(n: usize, scheme: Scheme) -> Self {
        let fft = (scheme == Scheme::Spectral).then(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        });
        Differentiator { n, scheme, h: 2.0 * PI / n as f64, fft }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    /// Grid spacing `2π/N`.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// First derivative along `axis`.
    pub fn d<T: GridValue>(&self, f: &Grid<T>, axis: Axis) -> Grid<T> {
        self.apply(f, axis, 1)
    }

    /// Pure second derivative along `axis`.
    pub fn d2<T: GridValue>(&self, f: &Grid<T>, axis: Axis) -> Grid<T> {
        self.apply(f, axis, 2)
    }

    /// Mixed derivative `∂_u ∂_v`.
    pub fn duv<T: GridValue>(&self, f: &Grid<T>) -> Grid<T> {
        self.d(&self.d(f, Axis::U), Axis::V)
    }

    /// Gradient `(∂_u f, ∂_v f)`.
    pub fn grad<T: GridValue>(&self, f: &Grid<T>) -> [Grid<T>; 2] {
        [self.d(f, Axis::U), self.d(f, Axis::V)]
    }

    fn apply<T: GridValue>(&self, f: &Grid<T>, axis: Axis, order: usize) -> Grid<T> {
        assert_eq!(f.n, self.n, "grid size mismatch");
        let n = self.n;
        let mut out = Grid::<T>::zeros(n);
        let mut line = vec![0.0; n];
        let mut result = vec![0.0; n];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for fixed in 0..n {
            for c in 0..T::DIM {
                for (k, x) in line.iter_mut().enumerate() {
                    *x = f.data[index(axis, fixed, k, n)].component(c);
                }
                match self.scheme {
                    Scheme::Fd2 | Scheme::Fd4 => self.stencil(&line, &mut result, order),
                    Scheme::Spectral => self.spectral(&line, &mut result, &mut buf, order),
                }
                for (k, x) in result.iter().enumerate() {
                    out.data[index(axis, fixed, k, n)].set_component(c, *x);
                }
            }
        }
        out
    }

    fn stencil(&self, f: &[f64], out: &mut [f64], order: usize) {
        let n = self.n;
        let h = self.h;
        let at = |i: usize, off: isize| f[(i as isize + off).rem_euclid(n as isize) as usize];
        for (i, o) in out.iter_mut().enumerate() {
            *o = match (self.scheme, order) {
                (Scheme::Fd2, 1) => (at(i, 1) - at(i, -1)) / (2.0 * h),
                (Scheme::Fd2, _) => (at(i, 1) - 2.0 * at(i, 0) + at(i, -1)) / (h * h),
                (_, 1) => (-at(i, 2) + 8.0 * at(i, 1) - 8.0 * at(i, -1) + at(i, -2)) / (12.0 * h),
                _ => {
                    (-at(i, 2) + 16.0 * at(i, 1) - 30.0 * at(i, 0) + 16.0 * at(i, -1)
                        - at(i, -2))
                        / (12.0 * h * h)
                }
            };
        }
    }

    fn spectral(&self, f: &[f64], out: &mut [f64], buf: &mut [Complex64], order: usize) {
        let n = self.n;
        let (fwd, inv) = self.fft.as_ref().expect("spectral plans");
        for (b, x) in buf.iter_mut().zip(f) {
            *b = Complex64::new(*x, 0.0);
        }
        fwd.process(buf);
        for (j, b) in buf.iter_mut().enumerate() {
            let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
            *b *= match order {
                1 if j == n / 2 => Complex64::new(0.0, 0.0),
                1 => Complex64::new(0.0, k),
                _ => Complex64::new(-k * k, 0.0),
            };
        }
        inv.process(buf);
        let scale = 1.0 / n as f64;
        for (o, b) in out.iter_mut().zip(buf.iter()) {
            *o = b.re * scale;
        }
    }
}

fn index(axis: Axis, fixed: usize, k: usize, n: usize) -> usize {
    match axis {
        Axis::U => k * n + fixed,
        Axis::V => fixed * n + k,
    }
}

/// An N×N doubly periodic sampling of an immersed torus in S^5.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSurface {
    scheme: Scheme,
    positions: Grid<Vec6>,
}

impl GridSurface {
    pub fn new(positions: Grid<Vec6>, scheme: Scheme) -> Result<Self> {
        check_grid_size(positions.n())?;
        for p in positions.values() {
            SpherePoint::new(*p)?;
        }
        Ok(GridSurface { scheme, positions })
    }

    /// Builds a surface from unnormalized samples, projecting each onto the sphere.
    pub fn from_unnormalized(positions: Grid<Vec6>, scheme: Scheme) -> Result<Self> {
        Self::new(positions.map(|p| p.normalized()), scheme)
    }

    pub fn n(&self) -> usize {
        self.positions.n()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn with_scheme(&self, scheme: Scheme) -> Self {
        GridSurface { scheme, positions: self.positions.clone() }
    }

    pub fn positions(&self) -> &Grid<Vec6> {
        &self.positions
    }

    pub fn differentiator(&self) -> Differentiator {
        Differentiator::new(self.n(), self.scheme)
    }

    /// Parameter coordinates of node `(a, b)`.
    pub fn node_param(&self, a: usize, b: usize) -> (f64, f64) {
        let h = 2.0 * PI / self.n() as f64;
        (a as f64 * h, b as f64 * h)
    }

    /// 2-jets at every node from the configured scheme.
    pub fn jets_with(&self, diff: &Differentiator) -> Vec<Jet2> {
        let x = &self.positions;
        let xu = diff.d(x, Axis::U);
        let xv = diff.d(x, Axis::V);
        let xuu = diff.d2(x, Axis::U);
        let xuv = diff.duv(x);
        let xvv = diff.d2(x, Axis::V);
        (0..x.len())
            .map(|i| Jet2 { value: x[i], d1: [xu[i], xv[i]], d2: [xuu[i], xuv[i], xvv[i]] })
            .collect()
    }

    pub fn jets(&self) -> Vec<Jet2> {
        self.jets_with(&self.differentiator())
    }

    /// The jet at node `(a, b)`.
    pub fn eval_jet2(&self, a: usize, b: usize) -> Jet2 {
        self.jets()[a * self.n() + b]
    }

    /// Text serialization: a header line followed by N² lines of six floats.
    pub fn to_text(&self) -> String {
        let mut s = format!("legendrian-lab grid v1 N={} scheme={}\n", self.n(), self.scheme);
        for p in self.positions.values() {
            let line: Vec<String> = p.0.iter().map(|x| format!("{x:.16e}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let rest = header
            .strip_prefix("legendrian-lab grid v1 ")
            .ok_or_else(|| Error::Parse(format!("bad header `{header}`")))?;
        let mut n = None;
        let mut scheme = None;
        for field in rest.split_whitespace() {
            if let Some(v) = field.strip_prefix("N=") {
                n = Some(v.parse::<usize>().map_err(|e| Error::Parse(e.to_string()))?);
            } else if let Some(v) = field.strip_prefix("scheme=") {
                scheme = Some(v.parse::<Scheme>()?);
            }
        }
        let n = n.ok_or_else(|| Error::Parse("missing N".into()))?;
        let scheme = scheme.ok_or_else(|| Error::Parse("missing scheme".into()))?;
        let mut data = Vec::with_capacity(n * n);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let vals: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse::<f64>).collect();
            let vals = vals.map_err(|e| Error::Parse(e.to_string()))?;
            let arr: [f64; 6] = vals
                .try_into()
                .map_err(|_| Error::Parse(format!("expected six values in `{line}`")))?;
            data.push(Vec6(arr));
        }
        GridSurface::new(Grid::new(n, data)?, scheme)
    }
}
