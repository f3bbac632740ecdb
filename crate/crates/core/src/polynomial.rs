//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Axes are 0-based throughout the crate: `axis = 0` is `ξ₁`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exponent vector `α` of a monomial `ξ^α`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        assert!(!exponents.is_empty(), "multi-index must have dimension >= 1");
        MultiIndex(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex::new(vec![0; dim])
    }

    /// `α = order · e_axis`.
    pub fn unit(dim: usize, axis: usize, order: u32) -> Self {
        let mut e = vec![0; dim];
        e[axis] = order;
        MultiIndex::new(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// `|α|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, axis: usize) -> u32 {
        self.0[axis]
    }

    /// Largest single exponent.
    pub fn max_exponent(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// `|α|! / α!`, the number of ordered index tuples that collapse to `α`.
    pub fn multinomial(&self) -> u64 {
        let fact = |k: u32| (1..=k as u64).product::<u64>();
        fact(self.order()) / self.0.iter().map(|&a| fact(a)).product::<u64>()
    }

    fn combine(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All multi-indices of dimension `dim` with `|α| = order`, in
    /// lexicographically descending order of the first exponent.
    pub fn all_of_order(dim: usize, order: u32) -> Vec<MultiIndex> {
        fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == dim {
                prefix.push(left);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for a in (0..=left).rev() {
                prefix.push(a);
                rec(dim, left - a, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(dim, order, &mut Vec::with_capacity(dim), &mut out);
        out
    }

    /// All multi-indices with `|α| <= order`, grouped by increasing order.
    pub fn all_up_to_order(dim: usize, order: u32) -> Vec<MultiIndex> {
        (0..=order).flat_map(|m| MultiIndex::all_of_order(dim, m)).collect()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Sparse polynomial `Σ c_α ξ^α` with `c_α ∈ ℚ`. Zero coefficients are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, BigRational>,
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1, "polynomial dimension must be >= 1");
        Polynomial { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: BigRational) -> Self {
        Polynomial::monomial(MultiIndex::zero(dim), c)
    }

    pub fn one(dim: usize) -> Self {
        Polynomial::constant(dim, BigRational::one())
    }

    pub fn monomial(alpha: MultiIndex, c: BigRational) -> Self {
        let mut p = Polynomial::zero(alpha.dim());
        p.add_term(alpha, c);
        p
    }

    /// The coordinate function `ξ_axis`.
    pub fn variable(dim: usize, axis: usize) -> Self {
        Polynomial::monomial(MultiIndex::unit(dim, axis, 1), BigRational::one())
    }

    /// Builds from `(exponents, coefficient)` pairs; duplicates are summed.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, BigRational)>,
    {
        let mut p = Polynomial::zero(dim);
        for (alpha, c) in terms {
            if alpha.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: alpha.dim() });
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    fn add_term(&mut self, alpha: MultiIndex, c: BigRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(alpha) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> BigRational {
        self.terms.get(alpha).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::order).max()
    }

    /// Largest exponent of any single variable.
    pub fn max_partial_degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::max_exponent).max().unwrap_or(0)
    }

    fn check_dim(&self, other: &Polynomial) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_dim(other)?;
        let mut out = Polynomial::zero(self.dim);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.combine(b), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &BigRational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(a, v)| (a.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Polynomial {
        (0..k).fold(Polynomial::one(self.dim), |acc, _| &acc * self)
    }

    /// `∂^order / ∂ξ_axis^order`. Orders past the degree give the zero polynomial.
    pub fn differentiate(&self, axis: usize, order: u32) -> Polynomial {
        assert!(axis < self.dim, "axis {axis} out of range for dimension {}", self.dim);
        let mut out = Polynomial::zero(self.dim);
        for (alpha, c) in &self.terms {
            let e = alpha.get(axis);
            if e < order {
                continue;
            }
            let falling: i64 = (0..order).map(|k| (e - k) as i64).product();
            let mut exps = alpha.exponents().to_vec();
            exps[axis] -= order;
            out.add_term(MultiIndex(exps), c * int(falling));
        }
        out
    }

    /// Applies `∂^α` for a full multi-index.
    pub fn derivative(&self, alpha: &MultiIndex) -> Polynomial {
        assert_eq!(alpha.dim(), self.dim);
        let mut p = self.clone();
        for axis in 0..self.dim {
            if alpha.get(axis) > 0 {
                p = p.differentiate(axis, alpha.get(axis));
            }
        }
        p
    }

    pub fn evaluate(&self, point: &[BigRational]) -> Result<BigRational> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: point.len() });
        }
        let mut acc = BigRational::zero();
        for (alpha, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(alpha.exponents()) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Evaluation at an integer-valued point, the common case for reference DoFs.
    pub fn evaluate_int(&self, point: &[i64]) -> Result<BigRational> {
        let pt: Vec<BigRational> = point.iter().map(|&v| int(v)).collect();
        self.evaluate(&pt)
    }

    pub fn evaluate_f64(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: point.len() });
        }
        Ok(self
            .terms
            .iter()
            .map(|(alpha, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (x, &e) in point.iter().zip(alpha.exponents()) {
                    t *= x.powi(e as i32);
                }
                t
            })
            .sum())
    }

    /// Exact `∫_{lo}^{hi} p dξ` over the axis-aligned box.
    pub fn integrate_box(&self, lo: &[BigRational], hi: &[BigRational]) -> Result<BigRational> {
        if lo.len() != self.dim || hi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: lo.len().min(hi.len()),
            });
        }
        if lo.iter().zip(hi).any(|(a, b)| a >= b) {
            return Err(Error::DegenerateBox);
        }
        let mut acc = BigRational::zero();
        for (alpha, c) in &self.terms {
            let mut t = c.clone();
            for ((a, b), &e) in lo.iter().zip(hi).zip(alpha.exponents()) {
                let k = e as usize + 1;
                t *= (num_traits::pow(b.clone(), k) - num_traits::pow(a.clone(), k)) / int(k as i64);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Exact integral over the reference cube `[-1,1]^n`.
    pub fn integrate_reference(&self) -> BigRational {
        let lo = vec![int(-1); self.dim];
        let hi = vec![int(1); self.dim];
        self.integrate_box(&lo, &hi).expect("reference cube is a valid box")
    }

    /// Substitutes `ξ_axis = value` and drops that variable, giving a
    /// polynomial in `n - 1` variables. For `n = 1` the result is a
    /// constant kept in one (dummy) variable.
    pub fn restrict_to_face(&self, axis: usize, value: i64) -> Polynomial {
        assert!(axis < self.dim);
        let out_dim = (self.dim - 1).max(1);
        let mut out = Polynomial::zero(out_dim);
        for (alpha, c) in &self.terms {
            let e = alpha.get(axis);
            let factor = num_traits::pow(int(value), e as usize);
            let mut exps: Vec<u32> = alpha
                .exponents()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != axis)
                .map(|(_, &a)| a)
                .collect();
            if exps.is_empty() {
                exps.push(0);
            }
            out.add_term(MultiIndex(exps), c * factor);
        }
        out
    }

    /// Substitutes `ξ_axis = value` but keeps the variable slot, so the
    /// result still lives in `n` variables (constant along `axis`).
    pub fn substitute(&self, axis: usize, value: &BigRational) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (alpha, c) in &self.terms {
            let mut exps = alpha.exponents().to_vec();
            let e = exps[axis];
            exps[axis] = 0;
            out.add_term(MultiIndex(exps), c * num_traits::pow(value.clone(), e as usize));
        }
        out
    }

    /// Largest absolute coefficient, as `f64`.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
    }

    /// Lowers to a floating representation for fast repeated evaluation.
    pub fn to_f64(&self) -> PolynomialF64 {
        PolynomialF64 {
            dim: self.dim,
            exponents: self.terms.keys().map(|a| a.exponents().to_vec()).collect(),
            coefficients: self.terms.values().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect(),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (alpha, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (axis, &e) in alpha.exponents().iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*x{}", axis + 1)?,
                    _ => write!(f, "*x{}^{e}", axis + 1)?,
                }
            }
        }
        Ok(())
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Polynomial> for &Polynomial {
            type Output = Polynomial;
            /// Panics on dimension mismatch; use the `checked_*` form to recover.
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                self.$checked(rhs).expect("polynomial dimension mismatch")
            }
        }
        impl $trait<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $method(self, rhs: &Polynomial) -> Polynomial {
                (&self).$method(rhs)
            }
        }
    };
}

forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);
forward_binop!(Mul, mul, checked_mul);

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-BigRational::one())
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

/// Floating copy of a [`Polynomial`] for hot evaluation paths.
#[derive(Clone, Debug)]
pub struct PolynomialF64 {
    dim: usize,
    exponents: Vec<Vec<u32>>,
    coefficients: Vec<f64>,
}

impl PolynomialF64 {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut acc = 0.0;
        for (e, &c) in self.exponents.iter().zip(&self.coefficients) {
            let mut t = c;
            for (xi, &k) in x.iter().zip(e) {
                if k > 0 {
                    t *= xi.powi(k as i32);
                }
            }
            acc += t;
        }
        acc
    }
}
