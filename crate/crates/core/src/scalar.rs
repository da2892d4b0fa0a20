//! Arithmetic abstraction shared by plain floats, multivariate jets and
//! univariate series, so that formulas (the profile ODE, expression trees)
//! are written once and evaluated in any of them.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// Constant term.
    fn value(&self) -> f64;
    /// A constant with the same shape as `self`.
    fn lift(&self, c: f64) -> Self;

    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Result<Self>;
    fn sqrt(&self) -> Result<Self>;
    fn powf(&self, r: f64) -> Result<Self>;

    fn checked_div(&self, rhs: &Self) -> Result<Self>;

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Result<Self> {
        if *self > 0.0 {
            Ok(f64::ln(*self))
        } else {
            Err(Error::Singularity(format!("log of non-positive value {self}")))
        }
    }
    fn sqrt(&self) -> Result<Self> {
        if *self >= 0.0 {
            Ok(f64::sqrt(*self))
        } else {
            Err(Error::Singularity(format!("sqrt of negative value {self}")))
        }
    }
    fn powf(&self, r: f64) -> Result<Self> {
        if *self > 0.0 || (r.fract() == 0.0 && r >= 0.0) {
            Ok(f64::powf(*self, r))
        } else {
            Err(Error::Singularity(format!("pow({self}, {r}) outside domain")))
        }
    }
    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        if *rhs == 0.0 {
            Err(Error::Singularity("division by zero".into()))
        } else {
            Ok(self / rhs)
        }
    }
}

/// Dot product of two equally sized slices.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = a[0].clone() * b[0].clone();
    for (x, y) in a.iter().zip(b).skip(1) {
        acc = acc + x.clone() * y.clone();
    }
    acc
}
