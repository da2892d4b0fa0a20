//! Univariate truncated power series, used for the axis expansion of
//! rotational profiles and for per-step dense output.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const SERIES_CAP: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Series {
    deg: usize,
    c: [f64; SERIES_CAP],
}

impl Series {
    pub fn constant(v: f64, deg: usize) -> Series {
        assert!(deg < SERIES_CAP, "series degree {deg} exceeds capacity");
        let mut c = [0.0; SERIES_CAP];
        c[0] = v;
        Series { deg, c }
    }

    /// `x0 + τ`.
    pub fn variable(x0: f64, deg: usize) -> Series {
        let mut s = Series::constant(x0, deg);
        if deg >= 1 {
            s.c[1] = 1.0;
        }
        s
    }

    pub fn from_coeffs(c: &[f64]) -> Series {
        let mut s = Series::constant(0.0, c.len() - 1);
        s.c[..c.len()].copy_from_slice(c);
        s
    }

    pub fn deg(&self) -> usize {
        self.deg
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c[..=self.deg]
    }

    pub fn coeff(&self, k: usize) -> f64 {
        if k <= self.deg {
            self.c[k]
        } else {
            0.0
        }
    }

    pub fn set_coeff(&mut self, k: usize, v: f64) {
        self.c[k] = v;
    }

    /// Polynomial value at `τ`.
    pub fn eval(&self, tau: f64) -> f64 {
        self.coeffs().iter().rev().fold(0.0, |acc, &c| acc * tau + c)
    }

    /// Term-wise derivative; degree drops by one.
    pub fn derivative(&self) -> Series {
        let mut out = Series::constant(0.0, self.deg.saturating_sub(1));
        for k in 1..=self.deg {
            out.c[k - 1] = k as f64 * self.c[k];
        }
        out
    }

    /// Antiderivative vanishing at 0, truncated to the same degree.
    pub fn integral(&self) -> Series {
        let mut out = Series::constant(0.0, self.deg);
        for k in 1..=self.deg {
            out.c[k] = self.c[k - 1] / k as f64;
        }
        out
    }

    /// Re-expansion of the polynomial about `τ0`.
    pub fn shift(&self, tau0: f64) -> Series {
        let mut c = self.c;
        // repeated synthetic division
        for i in 0..self.deg {
            for k in (i..self.deg).rev() {
                c[k] += tau0 * c[k + 1];
            }
        }
        Series { deg: self.deg, c }
    }

    /// `p(−τ)`.
    pub fn flip(&self) -> Series {
        let mut out = *self;
        for k in (1..=self.deg).step_by(2) {
            out.c[k] = -out.c[k];
        }
        out
    }

    pub fn truncated(&self, deg: usize) -> Series {
        let mut out = *self;
        out.deg = deg.min(self.deg);
        out.c[out.deg + 1..].iter_mut().for_each(|c| *c = 0.0);
        out
    }

    fn zeroed(&self) -> Series {
        Series::constant(0.0, self.deg)
    }

    fn check(&self, other: &Series) {
        assert_eq!(self.deg, other.deg, "series degree mismatch");
    }

    /// `sin` and `cos` together from `s' = c a'`, `c' = −s a'`.
    pub fn sin_cos(&self) -> (Series, Series) {
        let (s0, c0) = self.c[0].sin_cos();
        let mut s = Series::constant(s0, self.deg);
        let mut c = Series::constant(c0, self.deg);
        for k in 1..=self.deg {
            let mut sk = 0.0;
            let mut ck = 0.0;
            for j in 1..=k {
                let ja = j as f64 * self.c[j];
                sk += ja * c.c[k - j];
                ck -= ja * s.c[k - j];
            }
            s.c[k] = sk / k as f64;
            c.c[k] = ck / k as f64;
        }
        (s, c)
    }
}

impl Add for Series {
    type Output = Series;
    fn add(mut self, rhs: Series) -> Series {
        self.check(&rhs);
        for k in 0..=self.deg {
            self.c[k] += rhs.c[k];
        }
        self
    }
}

impl Sub for Series {
    type Output = Series;
    fn sub(mut self, rhs: Series) -> Series {
        self.check(&rhs);
        for k in 0..=self.deg {
            self.c[k] -= rhs.c[k];
        }
        self
    }
}

impl Mul for Series {
    type Output = Series;
    fn mul(self, rhs: Series) -> Series {
        self.check(&rhs);
        let mut out = self.zeroed();
        for i in 0..=self.deg {
            if self.c[i] == 0.0 {
                continue;
            }
            for j in 0..=self.deg - i {
                out.c[i + j] += self.c[i] * rhs.c[j];
            }
        }
        out
    }
}

impl Div for Series {
    type Output = Series;
    /// Panics on a zero constant term; use [`Scalar::checked_div`].
    fn div(self, rhs: Series) -> Series {
        match self.checked_div(&rhs) {
            Ok(s) => s,
            Err(e) => panic!("{e}"),
        }
    }
}

impl Neg for Series {
    type Output = Series;
    fn neg(mut self) -> Series {
        self.c.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

impl Add<f64> for Series {
    type Output = Series;
    fn add(mut self, rhs: f64) -> Series {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Series {
    type Output = Series;
    fn sub(mut self, rhs: f64) -> Series {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Series {
    type Output = Series;
    fn mul(mut self, rhs: f64) -> Series {
        self.c.iter_mut().for_each(|c| *c *= rhs);
        self
    }
}

impl Div<f64> for Series {
    type Output = Series;
    fn div(self, rhs: f64) -> Series {
        self * (1.0 / rhs)
    }
}

impl Scalar for Series {
    fn value(&self) -> f64 {
        self.c[0]
    }
    fn lift(&self, c: f64) -> Self {
        Series::constant(c, self.deg)
    }
    fn sin(&self) -> Self {
        self.sin_cos().0
    }
    fn cos(&self) -> Self {
        self.sin_cos().1
    }
    fn exp(&self) -> Self {
        let mut e = Series::constant(self.c[0].exp(), self.deg);
        for k in 1..=self.deg {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * e.c[k - j]).sum();
            e.c[k] = s / k as f64;
        }
        e
    }
    fn ln(&self) -> Result<Self> {
        if self.c[0] <= 0.0 {
            return Err(Error::Singularity(format!("log of series with value {}", self.c[0])));
        }
        // l' = a'/a
        let d = self.derivative();
        let q = d.checked_div(&self.truncated(self.deg.saturating_sub(1)))?;
        let mut l = if self.deg == 0 { self.zeroed() } else { q.integral_up() };
        l.c[0] = self.c[0].ln();
        Ok(l)
    }
    fn sqrt(&self) -> Result<Self> {
        self.powf(0.5)
    }
    fn powf(&self, r: f64) -> Result<Self> {
        let a0 = self.c[0];
        if a0 <= 0.0 {
            if r.fract() == 0.0 && r >= 0.0 {
                let mut acc = self.lift(1.0);
                for _ in 0..r as u32 {
                    acc = acc * *self;
                }
                return Ok(acc);
            }
            return Err(Error::Singularity(format!("pow({a0}, {r}) on a series")));
        }
        // a p' = r a' p, solved coefficient by coefficient
        let mut p = Series::constant(a0.powf(r), self.deg);
        for k in 1..=self.deg {
            let mut s = 0.0;
            for j in 1..=k {
                s += (r * j as f64 - (k - j) as f64) * self.c[j] * p.c[k - j];
            }
            p.c[k] = s / (k as f64 * a0);
        }
        Ok(p)
    }
    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        self.check(rhs);
        let b0 = rhs.c[0];
        if b0.abs() <= crate::jet::ZERO_THRESHOLD {
            return Err(Error::Singularity("series division by zero constant term".into()));
        }
        let mut q = self.zeroed();
        for k in 0..=self.deg {
            let s: f64 = (1..=k).map(|j| rhs.c[j] * q.c[k - j]).sum();
            q.c[k] = (self.c[k] - s) / b0;
        }
        Ok(q)
    }
}

impl Series {
    /// Antiderivative with the degree raised by one.
    fn integral_up(&self) -> Series {
        let mut out = Series::constant(0.0, self.deg + 1);
        for k in 0..=self.deg {
            out.c[k + 1] = self.c[k] / (k + 1) as f64;
        }
        out
    }
}
