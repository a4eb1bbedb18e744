//! Truncated formal series in `q^(1/2)` over an arbitrary coefficient ring.
//!
//! A [`QSeries`] keeps a map from half-integer exponents to coefficients plus
//! an inclusive truncation order: terms with exponent `> order` are unknown
//! and never stored. Binary operations take the minimum of the operands'
//! orders, so precision degrades explicitly rather than silently inventing
//! coefficients. Querying a coefficient beyond the order is an error — the
//! type distinguishes "known to be zero" from "not computed".

use std::collections::BTreeMap;
use std::fmt;

use crate::rational::{HalfInt, Rational};

/// Errors from truncated series arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("coefficient of q^{wanted} requested but series is truncated at q^{order}")]
    BeyondOrder { wanted: HalfInt, order: HalfInt },
    #[error("leading coefficient is not a unit; cannot invert")]
    NonUnitLeading,
    #[error("series has terms below q^0; expected non-negative exponents")]
    NegativeExponent,
}

/// Coefficient ring interface needed by [`QSeries`].
///
/// `zero_like` exists because some coefficient types (graded polynomials)
/// carry a ring configuration that a bare `zero()` could not know.
pub trait Coefficient: Clone + PartialEq + fmt::Debug {
    fn is_zero(&self) -> bool;
    fn zero_like(&self) -> Self;
    fn add_ref(self, rhs: &Self) -> Self;
    fn neg(self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    /// Multiplicative inverse where one exists.
    fn try_inv(&self) -> Option<Self>;
}

impl Coefficient for Rational {
    fn is_zero(&self) -> bool {
        Rational::is_zero(self)
    }

    fn zero_like(&self) -> Self {
        Rational::zero()
    }

    fn add_ref(self, rhs: &Self) -> Self {
        self + rhs
    }

    fn neg(self) -> Self {
        -self
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn try_inv(&self) -> Option<Self> {
        self.checked_inv().ok()
    }
}

/// Truncated series `sum c_k q^k` with `k` on the half-integer lattice.
#[derive(Clone, PartialEq)]
pub struct QSeries<T: Coefficient> {
    order: HalfInt,
    zero: T,
    coeffs: BTreeMap<HalfInt, T>,
}

impl<T: Coefficient> QSeries<T> {
    /// The zero series truncated at `order`. `zero` is the template for
    /// absent coefficients.
    pub fn zero(order: HalfInt, zero: T) -> Self {
        QSeries {
            order,
            zero,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(order: HalfInt, value: T) -> Self {
        let zero = value.zero_like();
        let mut s = QSeries::zero(order, zero);
        s.set(HalfInt::ZERO, value);
        s
    }

    pub fn from_terms(order: HalfInt, zero: T, terms: impl IntoIterator<Item = (HalfInt, T)>) -> Self {
        let mut s = QSeries::zero(order, zero);
        for (k, c) in terms {
            s.set(k, c);
        }
        s
    }

    /// Monomial `c * q^k`.
    pub fn monomial(order: HalfInt, k: HalfInt, value: T) -> Self {
        let zero = value.zero_like();
        let mut s = QSeries::zero(order, zero);
        s.set(k, value);
        s
    }

    pub fn order(&self) -> HalfInt {
        self.order
    }

    pub fn zero_template(&self) -> &T {
        &self.zero
    }

    /// Insert or overwrite one coefficient; terms beyond the order are dropped.
    pub fn set(&mut self, k: HalfInt, value: T) {
        if k > self.order {
            return;
        }
        if value.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, value);
        }
    }

    pub fn add_to(&mut self, k: HalfInt, value: &T) {
        if k > self.order || value.is_zero() {
            return;
        }
        let cur = self.coeffs.remove(&k).unwrap_or_else(|| self.zero.clone());
        let next = cur.add_ref(value);
        if !next.is_zero() {
            self.coeffs.insert(k, next);
        }
    }

    /// Exact coefficient of `q^k`; zero if absent, error past the order.
    pub fn coefficient(&self, k: HalfInt) -> Result<T, SeriesError> {
        if k > self.order {
            return Err(SeriesError::BeyondOrder {
                wanted: k,
                order: self.order,
            });
        }
        Ok(self.coeffs.get(&k).cloned().unwrap_or_else(|| self.zero.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&HalfInt, &T)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn min_exponent(&self) -> Option<HalfInt> {
        self.coeffs.keys().next().copied()
    }

    /// Restrict to a (smaller) truncation order.
    pub fn truncated(&self, order: HalfInt) -> Self {
        let order = order.min(self.order);
        QSeries {
            order,
            zero: self.zero.clone(),
            coeffs: self.coeffs.range(..=order).map(|(k, v)| (*k, v.clone())).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        QSeries {
            order: self.order,
            zero: self.zero.clone(),
            coeffs: self.coeffs.iter().map(|(k, v)| (*k, v.clone().neg())).collect(),
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut out = QSeries::zero(order, self.zero.clone());
        for (k, v) in self.coeffs.range(..=order) {
            out.add_to(*k, v);
        }
        for (k, v) in rhs.coeffs.range(..=order) {
            out.add_to(*k, v);
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let order = self.order.min(rhs.order);
        let mut out = QSeries::zero(order, self.zero.clone());
        for (ka, va) in &self.coeffs {
            if *ka > order {
                break;
            }
            for (kb, vb) in &rhs.coeffs {
                let k = *ka + *kb;
                if k > order {
                    break;
                }
                out.add_to(k, &va.mul_ref(vb));
            }
        }
        out
    }

    /// Scale every coefficient by `c`.
    pub fn scale(&self, c: &T) -> Self {
        if c.is_zero() {
            return QSeries::zero(self.order, self.zero.clone());
        }
        let mut out = QSeries::zero(self.order, self.zero.clone());
        for (k, v) in &self.coeffs {
            out.set(*k, v.mul_ref(c));
        }
        out
    }

    /// Non-negative integer power by repeated squaring.
    pub fn pow(&self, exp: u32, one: T) -> Self {
        let mut result = QSeries::constant(self.order, one);
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Series inverse; requires all exponents `>= 0` and an invertible
    /// constant term.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        if let Some(min) = self.min_exponent() {
            if min.is_negative() {
                return Err(SeriesError::NegativeExponent);
            }
        }
        let lead = self
            .coeffs
            .get(&HalfInt::ZERO)
            .ok_or(SeriesError::NonUnitLeading)?;
        let lead_inv = lead.try_inv().ok_or(SeriesError::NonUnitLeading)?;

        let mut out = QSeries::zero(self.order, self.zero.clone());
        out.set(HalfInt::ZERO, lead_inv.clone());
        // b_k = -a_0^{-1} * sum_{0<j<=k} a_j b_{k-j}
        for t in 1..=self.order.twice() {
            let k = HalfInt::from_twice(t);
            let mut acc = self.zero.clone();
            for (j, aj) in self.coeffs.range(HalfInt::from_twice(1)..=k) {
                let rem = k - *j;
                if let Some(b) = out.coeffs.get(&rem) {
                    acc = acc.add_ref(&aj.mul_ref(b));
                }
            }
            if !acc.is_zero() {
                out.set(k, lead_inv.mul_ref(&acc).neg());
            }
        }
        Ok(out)
    }

    /// Map coefficients into another ring.
    pub fn map<U: Coefficient>(&self, zero: U, mut f: impl FnMut(&T) -> U) -> QSeries<U> {
        let mut out = QSeries::zero(self.order, zero);
        for (k, v) in &self.coeffs {
            out.set(*k, f(v));
        }
        out
    }

    /// The substitution `q^(1/2) -> -q^(1/2)` (negates odd-lattice coefficients).
    pub fn half_power_sign_flip(&self) -> Self {
        let mut out = QSeries::zero(self.order, self.zero.clone());
        for (k, v) in &self.coeffs {
            let c = if k.twice() % 2 == 0 { v.clone() } else { v.clone().neg() };
            out.set(*k, c);
        }
        out
    }

    /// First exponent (up to `thru`) at which the two series differ.
    pub fn first_mismatch(&self, rhs: &Self, thru: HalfInt) -> Option<HalfInt> {
        let thru = thru.min(self.order).min(rhs.order);
        for t in 0..=thru.twice() {
            let k = HalfInt::from_twice(t);
            let a = self.coeffs.get(&k);
            let b = rhs.coeffs.get(&k);
            let same = match (a, b) {
                (None, None) => true,
                (Some(x), Some(y)) => x == y,
                (Some(x), None) => x.is_zero(),
                (None, Some(y)) => y.is_zero(),
            };
            if !same {
                return Some(k);
            }
        }
        None
    }
}

impl QSeries<Rational> {
    pub fn one(order: HalfInt) -> Self {
        QSeries::constant(order, Rational::one())
    }

    /// Horner evaluation at a complex point `y = q^(1/2)`.
    pub fn eval_complex(&self, y_half: num_complex::Complex64) -> num_complex::Complex64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for (k, v) in self.coeffs.iter().rev() {
            // y^twice accumulates exactly on the half-power lattice
            acc += v.to_f64() * y_half.powi(k.twice() as i32);
        }
        acc
    }

    /// All coefficients past `q^0` are integers (the classical integrality of
    /// the level-2 expansions).
    pub fn tail_is_integral(&self) -> bool {
        self.coeffs
            .iter()
            .filter(|(k, _)| k.twice() > 0)
            .all(|(_, v)| v.is_integer())
    }
}

impl<T: Coefficient> fmt::Debug for QSeries<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QSeries[O(q^{})](", self.order)?;
        let mut first = true;
        for (k, v) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:?})q^{}", v, k)?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for QSeries<Rational> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0 + O(q^{})", self.order);
        }
        let mut first = true;
        for (k, v) in &self.coeffs {
            if first {
                first = false;
            } else {
                write!(f, " + ")?;
            }
            if k.twice() == 0 {
                write!(f, "{}", v)?;
            } else {
                write!(f, "{}*q^{}", v, k)?;
            }
        }
        write!(f, " + O(q^{})", self.order)
    }
}

/// Default truncation: eight half-powers, i.e. through `q^4`.
pub const DEFAULT_ORDER_TWICE: i64 = 8;

pub fn default_order() -> HalfInt {
    HalfInt::from_twice(DEFAULT_ORDER_TWICE)
}
