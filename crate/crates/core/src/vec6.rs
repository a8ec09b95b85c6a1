//! Vectors of R^6 identified with C^3 through the pairing (x1,y1,x2,y2,x3,y3).

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec6(pub [f64; 6]);

impl Vec6 {
    pub const ZERO: Vec6 = Vec6([0.0; 6]);

    pub const fn new(c: [f64; 6]) -> Self {
        Vec6(c)
    }

    /// The `k`-th coordinate axis.
    pub fn axis(k: usize) -> Self {
        let mut c = [0.0; 6];
        c[k] = 1.0;
        Vec6(c)
    }

    /// Builds a vector from three complex numbers given as (re, im) pairs.
    pub fn from_complex(z: [(f64, f64); 3]) -> Self {
        Vec6([z[0].0, z[0].1, z[1].0, z[1].1, z[2].0, z[2].1])
    }

    pub fn dot(&self, other: &Vec6) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// Returns `self / |self|`; the zero vector is returned unchanged.
    pub fn normalized(&self) -> Vec6 {
        let n = self.norm();
        if n == 0.0 {
            *self
        } else {
            *self * (1.0 / n)
        }
    }

    /// Removes the component along the unit vector `e`.
    pub fn reject(&self, e: &Vec6) -> Vec6 {
        *self - *e * self.dot(e)
    }
}

impl Add for Vec6 {
    type Output = Vec6;
    fn add(self, rhs: Vec6) -> Vec6 {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(rhs.0) {
            *a += b;
        }
        Vec6(c)
    }
}

impl Sub for Vec6 {
    type Output = Vec6;
    fn sub(self, rhs: Vec6) -> Vec6 {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        Vec6(c)
    }
}

impl Neg for Vec6 {
    type Output = Vec6;
    fn neg(self) -> Vec6 {
        self * -1.0
    }
}

impl Mul<f64> for Vec6 {
    type Output = Vec6;
    fn mul(self, s: f64) -> Vec6 {
        Vec6(self.0.map(|x| x * s))
    }
}

impl Mul<Vec6> for f64 {
    type Output = Vec6;
    fn mul(self, v: Vec6) -> Vec6 {
        v * self
    }
}

impl AddAssign for Vec6 {
    fn add_assign(&mut self, rhs: Vec6) {
        *self = *self + rhs;
    }
}

impl SubAssign for Vec6 {
    fn sub_assign(&mut self, rhs: Vec6) {
        *self = *self - rhs;
    }
}

impl Index<usize> for Vec6 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for Vec6 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl std::iter::Sum for Vec6 {
    fn sum<I: Iterator<Item = Vec6>>(iter: I) -> Vec6 {
        iter.fold(Vec6::ZERO, |a, b| a + b)
    }
}
