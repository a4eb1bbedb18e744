//! Univariate power series in one formal root variable whose coefficients are
//! rational q-series.
//!
//! All the normalized theta ratios live here before they are substituted into
//! the graded ring: arithmetic in one variable keeps divisions by odd series
//! (which shift the variable exponent) exact, something the degree-truncated
//! multivariate ring cannot express.

use crate::poly::{GradedPoly, RingConfig, RingError, Var};
use crate::qseries::{QSeries, SeriesError};
use crate::rational::{HalfInt, Rational};

/// Errors from root-variable series arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExpansionError {
    #[error("series error: {0}")]
    Series(#[from] SeriesError),
    #[error("ring error: {0}")]
    Ring(#[from] RingError),
    #[error("leading coefficient in the root variable is not a unit")]
    NonUnitLeading,
    #[error("cannot divide: coefficient of z^{0} is nonzero")]
    NotDivisible(usize),
}

/// Power series `sum_k f_k(q) z^k` truncated at `z^var_order` and `q^q_order`.
#[derive(Clone, PartialEq, Debug)]
pub struct RootExpansion {
    coeffs: Vec<QSeries<Rational>>,
    q_order: HalfInt,
}

impl RootExpansion {
    pub fn zero(var_order: usize, q_order: HalfInt) -> Self {
        RootExpansion {
            coeffs: vec![QSeries::zero(q_order, Rational::zero()); var_order + 1],
            q_order,
        }
    }

    pub fn one(var_order: usize, q_order: HalfInt) -> Self {
        let mut e = RootExpansion::zero(var_order, q_order);
        e.coeffs[0] = QSeries::one(q_order);
        e
    }

    /// Lift a pure q-series to the constant-in-z expansion.
    pub fn from_scalar(s: QSeries<Rational>, var_order: usize) -> Self {
        let q_order = s.order();
        let mut e = RootExpansion::zero(var_order, q_order);
        e.coeffs[0] = s;
        e
    }

    /// Build from Taylor coefficients in `z` (q-constant coefficients).
    pub fn from_taylor(taylor: &[Rational], var_order: usize, q_order: HalfInt) -> Self {
        let mut e = RootExpansion::zero(var_order, q_order);
        for (k, c) in taylor.iter().enumerate().take(var_order + 1) {
            e.coeffs[k] = QSeries::constant(q_order, c.clone());
        }
        e
    }

    /// Build from a coefficient rule `k -> f_k` (q-constant coefficients).
    pub fn from_taylor_fn(f: impl Fn(usize) -> Rational, var_order: usize, q_order: HalfInt) -> Self {
        let mut e = RootExpansion::zero(var_order, q_order);
        for k in 0..=var_order {
            e.coeffs[k] = QSeries::constant(q_order, f(k));
        }
        e
    }

    pub fn var_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn q_order(&self) -> HalfInt {
        self.q_order
    }

    pub fn coeff(&self, k: usize) -> &QSeries<Rational> {
        &self.coeffs[k]
    }

    pub fn set_coeff(&mut self, k: usize, s: QSeries<Rational>) {
        self.coeffs[k] = s.truncated(self.q_order);
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// Lowest `z`-power with a nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let n = self.var_order().min(rhs.var_order());
        let q_order = self.q_order.min(rhs.q_order);
        let mut out = RootExpansion::zero(n, q_order);
        for k in 0..=n {
            out.coeffs[k] = self.coeffs[k].truncated(q_order).add(&rhs.coeffs[k]);
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        RootExpansion {
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
            q_order: self.q_order,
        }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.var_order().min(rhs.var_order());
        let q_order = self.q_order.min(rhs.q_order);
        let mut out = RootExpansion::zero(n, q_order);
        for i in 0..=n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=(n - i) {
                if rhs.coeffs[j].is_zero() {
                    continue;
                }
                let prod = self.coeffs[i].mul(&rhs.coeffs[j]);
                out.coeffs[i + j] = out.coeffs[i + j].add(&prod);
            }
        }
        out
    }

    pub fn scale(&self, k: &Rational) -> Self {
        RootExpansion {
            coeffs: self.coeffs.iter().map(|s| s.scale(k)).collect(),
            q_order: self.q_order,
        }
    }

    pub fn scale_series(&self, s: &QSeries<Rational>) -> Self {
        RootExpansion {
            coeffs: self.coeffs.iter().map(|c| c.mul(s)).collect(),
            q_order: self.q_order.min(s.order()),
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut result = RootExpansion::one(self.var_order(), self.q_order);
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

    /// Inverse of an expansion whose `z^0` coefficient is a unit q-series.
    pub fn invert(&self) -> Result<Self, ExpansionError> {
        let lead_inv = self.coeffs[0]
            .invert()
            .map_err(|_| ExpansionError::NonUnitLeading)?;
        let n = self.var_order();
        let mut out = RootExpansion::zero(n, self.q_order);
        out.coeffs[0] = lead_inv.clone();
        for k in 1..=n {
            let mut acc = QSeries::zero(self.q_order, Rational::zero());
            for j in 1..=k {
                if self.coeffs[j].is_zero() {
                    continue;
                }
                acc = acc.add(&self.coeffs[j].mul(&out.coeffs[k - j]));
            }
            out.coeffs[k] = acc.mul(&lead_inv).neg();
        }
        Ok(out)
    }

    /// Formal derivative `d/dz`. The top coefficient of the result is
    /// unknown, so the variable order drops by one.
    pub fn derivative(&self) -> Self {
        let n = self.var_order().saturating_sub(1);
        let mut out = RootExpansion::zero(n, self.q_order);
        for k in 0..=n {
            let factor = QSeries::constant(self.q_order, Rational::from_int((k + 1) as i64));
            out.coeffs[k] = self.coeffs[k + 1].mul(&factor);
        }
        out
    }

    /// Logarithmic derivative `f'/f` for unit-leading `f`.
    pub fn dlog(&self) -> Result<Self, ExpansionError> {
        Ok(self.derivative().mul(&self.invert()?))
    }

    /// Exact division by `z^k`; errors if any lower coefficient is nonzero.
    pub fn div_var_pow(&self, k: usize) -> Result<Self, ExpansionError> {
        for j in 0..k.min(self.coeffs.len()) {
            if !self.coeffs[j].is_zero() {
                return Err(ExpansionError::NotDivisible(j));
            }
        }
        let n = self.var_order().saturating_sub(k);
        let mut out = RootExpansion::zero(n, self.q_order);
        for j in 0..=n {
            out.coeffs[j] = self.coeffs[j + k].clone();
        }
        Ok(out)
    }

    /// Substitute `z -> -z`.
    pub fn negate_var(&self) -> Self {
        RootExpansion {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 0 { c.clone() } else { c.neg() })
                .collect(),
            q_order: self.q_order,
        }
    }

    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|c| c.is_zero())
    }

    pub fn is_odd(&self) -> bool {
        self.coeffs.iter().step_by(2).all(|c| c.is_zero())
    }

    /// `q^(1/2) -> -q^(1/2)` on every coefficient.
    pub fn half_power_sign_flip(&self) -> Self {
        RootExpansion {
            coeffs: self.coeffs.iter().map(|c| c.half_power_sign_flip()).collect(),
            q_order: self.q_order,
        }
    }

    /// Evaluate at a complex point `(z, y)` with `y = q^(1/2)`.
    pub fn eval_complex(&self, z: num_complex::Complex64, y_half: num_complex::Complex64) -> num_complex::Complex64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c.eval_complex(y_half);
        }
        acc
    }

    /// Substitute the ring variable `var` for `z`, producing a q-series of
    /// graded polynomials. Powers beyond the ring cutoff are dropped by the
    /// ring's truncation.
    pub fn substitute(&self, config: RingConfig, var: Var) -> Result<QSeries<GradedPoly>, RingError> {
        let v = GradedPoly::var(config, var)?;
        let mut out = QSeries::zero(self.q_order, GradedPoly::zero(config));
        let mut vpow = GradedPoly::one(config);
        for k in 0..=self.var_order().min(config.cutoff as usize) {
            if k > 0 {
                vpow = vpow.mul(&v);
                if vpow.is_zero() {
                    break;
                }
            }
            for (h, c) in self.coeffs[k].iter() {
                out.add_to(*h, &vpow.scale(c));
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            map.insert(format!("a^{}", k), qseries_to_json(c));
        }
        serde_json::Value::Object(map)
    }
}

/// `{"k/2": "p/q"}` with ascending exponents.
pub fn qseries_to_json(s: &QSeries<Rational>) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (k, v) in s.iter() {
        map.insert(k.to_string(), serde_json::Value::String(v.to_string()));
    }
    map.insert("order".to_string(), serde_json::Value::String(s.order().to_string()));
    serde_json::Value::Object(map)
}

pub fn poly_qseries_to_json(s: &QSeries<GradedPoly>) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (k, v) in s.iter() {
        map.insert(k.to_string(), v.to_json());
    }
    map.insert("order".to_string(), serde_json::Value::String(s.order().to_string()));
    serde_json::Value::Object(map)
}

/// Product `prod_j f(a_j)` over all root variables of the ring.
///
/// Requires a unit leading term so the product is again a unit (and errors
/// early on series that would make the downstream inversions impossible).
pub fn symmetric_product(f: &RootExpansion, config: RingConfig) -> Result<QSeries<GradedPoly>, ExpansionError> {
    if f.coeff(0).coefficient(HalfInt::ZERO)?.is_zero() {
        return Err(ExpansionError::NonUnitLeading);
    }
    let mut acc = QSeries::constant(f.q_order(), GradedPoly::one(config));
    for j in 0..config.roots {
        let factor = f.substitute(config, Var::Root(j))?;
        acc = acc.mul(&factor);
    }
    Ok(acc)
}
