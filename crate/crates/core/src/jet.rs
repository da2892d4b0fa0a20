//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] stores the Taylor coefficients `∂^β f / β!` of a scalar function
//! of up to [`MAX_VARS`] chart variables, for all multi-indices of total
//! degree at most `order ≤ MAX_ORDER`. Coefficients are laid out in
//! graded-lexicographic order, so a jet of lower order with the same number
//! of variables is a prefix of a higher-order one and truncation is a copy.
//!
//! Every partial derivative used by the geometry pipeline comes out of this
//! module; nothing downstream differentiates numerically.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const MAX_VARS: usize = 4;
pub const MAX_ORDER: usize = 4;
/// Number of multi-indices of degree ≤ 4 in 4 variables.
pub const MAX_COEFFS: usize = 70;

/// Constant terms with absolute value at or below this are treated as zero
/// by division, log and fractional powers.
pub const ZERO_THRESHOLD: f64 = 1e-300;

struct VarTable {
    monos: Vec<[u8; MAX_VARS]>,
    /// `count_upto[o]` = number of monomials of degree ≤ o.
    count_upto: [usize; MAX_ORDER + 1],
    /// Product triples `(i, j, k)` with `mono[i] + mono[j] = mono[k]`,
    /// sorted by the degree of `k`.
    mul: Vec<(u8, u8, u8)>,
    /// `mul_block[d]..mul_block[d + 1]` are the triples whose target has degree d.
    mul_block: [usize; MAX_ORDER + 2],
    /// Dense index from base-5 exponent code to monomial position.
    lookup: [u8; 625],
}

fn code(e: &[u8; MAX_VARS]) -> usize {
    e.iter().fold(0usize, |acc, &x| acc * 5 + x as usize)
}

impl VarTable {
    fn build(n_vars: usize) -> Self {
        let mut monos = Vec::new();
        let mut count_upto = [0; MAX_ORDER + 1];
        for d in 0..=MAX_ORDER {
            // graded lexicographic: within a degree, larger leading exponents first
            let mut block = Vec::new();
            enumerate_degree(n_vars, d, &mut [0u8; MAX_VARS], 0, &mut block);
            monos.extend(block);
            count_upto[d] = monos.len();
        }
        let mut lookup = [u8::MAX; 625];
        for (idx, m) in monos.iter().enumerate() {
            lookup[code(m)] = idx as u8;
        }
        let mut mul = Vec::new();
        let mut mul_block = [0; MAX_ORDER + 2];
        for d in 0..=MAX_ORDER {
            mul_block[d] = mul.len();
            let lo = if d == 0 { 0 } else { count_upto[d - 1] };
            for k in lo..count_upto[d] {
                for i in 0..count_upto[d] {
                    let mi = monos[i];
                    let mk = monos[k];
                    if (0..MAX_VARS).all(|v| mi[v] <= mk[v]) {
                        let mut mj = [0u8; MAX_VARS];
                        for v in 0..MAX_VARS {
                            mj[v] = mk[v] - mi[v];
                        }
                        let j = lookup[code(&mj)];
                        mul.push((i as u8, j, k as u8));
                    }
                }
            }
        }
        mul_block[MAX_ORDER + 1] = mul.len();
        VarTable {
            monos,
            count_upto,
            mul,
            mul_block,
            lookup,
        }
    }

    fn index(&self, e: &[u8; MAX_VARS]) -> usize {
        self.lookup[code(e)] as usize
    }
}

fn enumerate_degree(
    n_vars: usize,
    remaining: usize,
    cur: &mut [u8; MAX_VARS],
    pos: usize,
    out: &mut Vec<[u8; MAX_VARS]>,
) {
    if pos + 1 == n_vars {
        cur[pos] = remaining as u8;
        out.push(*cur);
        cur[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e as u8;
        enumerate_degree(n_vars, remaining - e, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

fn table(n_vars: usize) -> &'static VarTable {
    static TABLES: OnceLock<Vec<VarTable>> = OnceLock::new();
    &TABLES.get_or_init(|| (1..=MAX_VARS).map(VarTable::build).collect())[n_vars - 1]
}

/// Number of multi-indices of total degree ≤ `order` in `n_vars` variables.
pub fn coeff_count(n_vars: usize, order: usize) -> usize {
    table(n_vars).count_upto[order]
}

/// Binary operations accepted by [`Jet::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Univariate functions accepted by [`Jet::elementary`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Pow(f64),
}

#[derive(Clone, Copy)]
pub struct Jet {
    n_vars: u8,
    order: u8,
    coeffs: [f64; MAX_COEFFS],
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.n_vars == other.n_vars && self.order == other.order && self.coeffs() == other.coeffs()
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("n_vars", &self.n_vars)
            .field("order", &self.order)
            .field("coeffs", &self.coeffs())
            .finish()
    }
}

fn check_shape(n_vars: usize, order: usize) -> Result<()> {
    if !(1..=MAX_VARS).contains(&n_vars) {
        return Err(Error::Argument(format!("n_vars {n_vars} outside 1..={MAX_VARS}")));
    }
    if order > MAX_ORDER {
        return Err(Error::Argument(format!("order {order} exceeds {MAX_ORDER}")));
    }
    Ok(())
}

impl Jet {
    /// Constant jet.
    pub fn constant(value: f64, n_vars: usize, order: usize) -> Result<Jet> {
        check_shape(n_vars, order)?;
        let mut coeffs = [0.0; MAX_COEFFS];
        coeffs[0] = value;
        Ok(Jet {
            n_vars: n_vars as u8,
            order: order as u8,
            coeffs,
        })
    }

    /// The coordinate function `u ↦ u[var_index]` expanded at `value`.
    pub fn variable(value: f64, var_index: usize, n_vars: usize, order: usize) -> Result<Jet> {
        check_shape(n_vars, order)?;
        if var_index >= n_vars {
            return Err(Error::Argument(format!(
                "variable index {var_index} out of range for {n_vars} variables"
            )));
        }
        let mut j = Jet::constant(value, n_vars, order)?;
        if order >= 1 {
            j.coeffs[1 + var_index] = 1.0;
        }
        Ok(j)
    }

    /// Builds a jet from its raw coefficient list (graded-lex order).
    pub fn from_coeffs(n_vars: usize, order: usize, values: &[f64]) -> Result<Jet> {
        check_shape(n_vars, order)?;
        let len = coeff_count(n_vars, order);
        if values.len() != len {
            return Err(Error::Argument(format!(
                "expected {len} coefficients, got {}",
                values.len()
            )));
        }
        let mut j = Jet::constant(0.0, n_vars, order)?;
        j.coeffs[..len].copy_from_slice(values);
        Ok(j)
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars as usize
    }

    pub fn order(&self) -> usize {
        self.order as usize
    }

    pub fn len(&self) -> usize {
        coeff_count(self.n_vars(), self.order())
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..self.len()]
    }

    /// Multi-indices matching [`Jet::coeffs`] position by position.
    pub fn multi_indices(&self) -> Vec<Vec<usize>> {
        let t = table(self.n_vars());
        t.monos[..self.len()]
            .iter()
            .map(|m| m[..self.n_vars()].iter().map(|&e| e as usize).collect())
            .collect()
    }

    fn same_shape(&self, other: &Jet) -> Result<()> {
        if self.n_vars != other.n_vars || self.order != other.order {
            Err(Error::Argument(format!(
                "jet shape mismatch: ({}, {}) vs ({}, {})",
                self.n_vars, self.order, other.n_vars, other.order
            )))
        } else {
            Ok(())
        }
    }

    fn zeroed(&self) -> Jet {
        Jet {
            n_vars: self.n_vars,
            order: self.order,
            coeffs: [0.0; MAX_COEFFS],
        }
    }

    /// Coefficient at a multi-index (not scaled by β!).
    pub fn coeff(&self, beta: &[usize]) -> Result<f64> {
        let e = self.exponents(beta)?;
        Ok(self.coeffs[table(self.n_vars()).index(&e)])
    }

    fn exponents(&self, beta: &[usize]) -> Result<[u8; MAX_VARS]> {
        if beta.len() != self.n_vars() {
            return Err(Error::Argument(format!(
                "multi-index of length {} for a jet in {} variables",
                beta.len(),
                self.n_vars
            )));
        }
        let deg: usize = beta.iter().sum();
        if deg > self.order() {
            return Err(Error::Argument(format!(
                "multi-index degree {deg} exceeds jet order {}",
                self.order
            )));
        }
        let mut e = [0u8; MAX_VARS];
        for (slot, &b) in e.iter_mut().zip(beta) {
            *slot = b as u8;
        }
        Ok(e)
    }

    /// The true partial derivative `∂^β f` at the expansion point.
    pub fn extract_partial(&self, beta: &[usize]) -> Result<f64> {
        let c = self.coeff(beta)?;
        let fact: f64 = beta.iter().map(|&b| factorial(b)).product();
        Ok(c * fact)
    }

    /// First partial derivative along `var`.
    pub fn d1(&self, var: usize) -> f64 {
        debug_assert!(self.order >= 1);
        self.coeffs[1 + var]
    }

    /// Second partial derivative `∂_a ∂_b`.
    pub fn d2(&self, a: usize, b: usize) -> f64 {
        debug_assert!(self.order >= 2);
        let mut e = [0u8; MAX_VARS];
        e[a] += 1;
        e[b] += 1;
        let c = self.coeffs[table(self.n_vars()).index(&e)];
        if a == b {
            2.0 * c
        } else {
            c
        }
    }

    pub fn gradient(&self) -> Vec<f64> {
        (0..self.n_vars()).map(|v| self.d1(v)).collect()
    }

    /// Drops all terms above `order`.
    pub fn truncate(&self, order: usize) -> Jet {
        assert!(order <= self.order(), "cannot raise jet order by truncation");
        let mut out = *self;
        out.order = order as u8;
        let len = coeff_count(self.n_vars(), order);
        out.coeffs[len..].iter_mut().for_each(|c| *c = 0.0);
        out
    }

    /// Partial derivative jet `∂_var f`, one order lower.
    pub fn derivative(&self, var: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        assert!(var < self.n_vars(), "derivative variable out of range");
        let t = table(self.n_vars());
        let new_order = self.order() - 1;
        let mut out = Jet {
            n_vars: self.n_vars,
            order: new_order as u8,
            coeffs: [0.0; MAX_COEFFS],
        };
        for (idx, m) in t.monos[..t.count_upto[new_order]].iter().enumerate() {
            let mut up = *m;
            up[var] += 1;
            out.coeffs[idx] = (up[var] as f64) * self.coeffs[t.index(&up)];
        }
        out
    }

    /// Checked binary arithmetic.
    pub fn arith(op: ArithOp, a: &Jet, b: &Jet) -> Result<Jet> {
        a.same_shape(b)?;
        match op {
            ArithOp::Add => Ok(a.add_unchecked(b, 1.0)),
            ArithOp::Sub => Ok(a.add_unchecked(b, -1.0)),
            ArithOp::Mul => Ok(a.mul_unchecked(b)),
            ArithOp::Div => a.div_unchecked(b),
        }
    }

    fn add_unchecked(&self, b: &Jet, sign: f64) -> Jet {
        let mut out = *self;
        for i in 0..self.len() {
            out.coeffs[i] += sign * b.coeffs[i];
        }
        out
    }

    fn mul_unchecked(&self, b: &Jet) -> Jet {
        let t = table(self.n_vars());
        let mut out = self.zeroed();
        for &(i, j, k) in &t.mul[..t.mul_block[self.order() + 1]] {
            out.coeffs[k as usize] += self.coeffs[i as usize] * b.coeffs[j as usize];
        }
        out
    }

    fn div_unchecked(&self, b: &Jet) -> Result<Jet> {
        let b0 = b.coeffs[0];
        if b0.abs() <= ZERO_THRESHOLD {
            return Err(Error::Singularity(
                "division by a jet with zero constant term".into(),
            ));
        }
        let t = table(self.n_vars());
        let mut out = self.zeroed();
        let mut acc = [0.0; MAX_COEFFS];
        for d in 0..=self.order() {
            for &(i, j, k) in &t.mul[t.mul_block[d]..t.mul_block[d + 1]] {
                if j != 0 {
                    acc[k as usize] += out.coeffs[i as usize] * b.coeffs[j as usize];
                }
            }
            let lo = if d == 0 { 0 } else { t.count_upto[d - 1] };
            for k in lo..t.count_upto[d] {
                out.coeffs[k] = (self.coeffs[k] - acc[k]) / b0;
            }
        }
        Ok(out)
    }

    /// Composition with a univariate function: `f(a0 + h) = Σ f⁽ᵏ⁾(a0)/k! hᵏ`
    /// with `h` nilpotent, evaluated by Horner's rule.
    pub fn elementary(f: Elementary, a: &Jet) -> Result<Jet> {
        let a0 = a.coeffs[0];
        let order = a.order();
        let mut taylor = [0.0; MAX_ORDER + 1];
        match f {
            Elementary::Sin | Elementary::Cos => {
                let (s, c) = a0.sin_cos();
                // derivatives cycle sin, cos, -sin, -cos
                let cycle = match f {
                    Elementary::Sin => [s, c, -s, -c],
                    _ => [c, -s, -c, s],
                };
                for (k, slot) in taylor.iter_mut().enumerate().take(order + 1) {
                    *slot = cycle[k % 4] / factorial(k);
                }
            }
            Elementary::Exp => {
                let e = a0.exp();
                for (k, slot) in taylor.iter_mut().enumerate().take(order + 1) {
                    *slot = e / factorial(k);
                }
            }
            Elementary::Log => {
                if a0 <= ZERO_THRESHOLD {
                    return Err(Error::Singularity(format!("log at non-positive value {a0}")));
                }
                taylor[0] = a0.ln();
                for (k, slot) in taylor.iter_mut().enumerate().take(order + 1).skip(1) {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    *slot = sign / (k as f64 * a0.powi(k as i32));
                }
            }
            Elementary::Sqrt | Elementary::Pow(_) => {
                let r = match f {
                    Elementary::Pow(r) => r,
                    _ => 0.5,
                };
                let integral = r.fract() == 0.0 && r >= 0.0;
                if !integral && a0 <= ZERO_THRESHOLD {
                    if matches!(f, Elementary::Sqrt) && a0 == 0.0 && order == 0 {
                        taylor[0] = 0.0;
                    } else {
                        return Err(Error::Singularity(format!(
                            "power {r} at non-positive value {a0}"
                        )));
                    }
                } else {
                    // binomial series: C(r, k) a0^(r-k)
                    let mut binom = 1.0;
                    for (k, slot) in taylor.iter_mut().enumerate().take(order + 1) {
                        if k > 0 {
                            binom *= (r - (k as f64 - 1.0)) / k as f64;
                        }
                        *slot = if binom == 0.0 {
                            0.0
                        } else {
                            binom * a0.powf(r - k as f64)
                        };
                    }
                }
            }
        }
        Ok(Jet::taylor_compose(&taylor[..=order], a))
    }

    /// Evaluates `Σ c_k (a − a0)^k`, i.e. composes the univariate Taylor
    /// polynomial `c` (expanded at `a0`) with the jet `a`. Coefficients
    /// beyond the jet order are ignored.
    pub fn taylor_compose(c: &[f64], a: &Jet) -> Jet {
        let order = a.order().min(c.len().saturating_sub(1));
        let mut h = *a;
        h.coeffs[0] = 0.0;
        let mut out = a.zeroed();
        out.coeffs[0] = c[order];
        for k in (0..order).rev() {
            out = out.mul_unchecked(&h);
            out.coeffs[0] += c[k];
        }
        out
    }
}

pub(crate) fn factorial(k: usize) -> f64 {
    (1..=k).map(|x| x as f64).product()
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $op:expr) => {
        impl $trait for Jet {
            type Output = Jet;
            /// Panics on shape mismatch; use [`Jet::arith`] for a checked variant.
            fn $method(self, rhs: Jet) -> Jet {
                match Jet::arith($op, &self, &rhs) {
                    Ok(j) => j,
                    Err(e) => panic!("{e}"),
                }
            }
        }
    };
}

jet_binop!(Add, add, ArithOp::Add);
jet_binop!(Sub, sub, ArithOp::Sub);
jet_binop!(Mul, mul, ArithOp::Mul);
jet_binop!(Div, div, ArithOp::Div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        let len = self.len();
        self.coeffs[..len].iter_mut().for_each(|c| *c = -*c);
        self
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        let len = self.len();
        self.coeffs[..len].iter_mut().for_each(|c| *c *= rhs);
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self * (1.0 / rhs)
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        self.coeffs[0]
    }
    fn lift(&self, c: f64) -> Self {
        let mut out = self.zeroed();
        out.coeffs[0] = c;
        out
    }
    fn sin(&self) -> Self {
        Jet::elementary(Elementary::Sin, self).expect("sin is entire")
    }
    fn cos(&self) -> Self {
        Jet::elementary(Elementary::Cos, self).expect("cos is entire")
    }
    fn exp(&self) -> Self {
        Jet::elementary(Elementary::Exp, self).expect("exp is entire")
    }
    fn ln(&self) -> Result<Self> {
        Jet::elementary(Elementary::Log, self)
    }
    fn sqrt(&self) -> Result<Self> {
        Jet::elementary(Elementary::Sqrt, self)
    }
    fn powf(&self, r: f64) -> Result<Self> {
        Jet::elementary(Elementary::Pow(r), self)
    }
    fn checked_div(&self, rhs: &Self) -> Result<Self> {
        Jet::arith(ArithOp::Div, self, rhs)
    }
}
