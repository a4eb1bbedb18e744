//! Truncated commutative graded polynomial ring over the normalized roots.
//!
//! The ring is `Q[a_1..a_d, c, c0]` (optionally extended by one odd-slot
//! generator `s`), with every monomial of total degree above the cutoff
//! discarded. Internal degree 1 stands for a cohomological 2-form; the
//! engine works in the normalized variables in which all series coefficients
//! are rational, so equality of polynomials is structural equality of the
//! canonical term maps.

use std::collections::BTreeMap;
use std::fmt;

use crate::qseries::Coefficient;
use crate::rational::Rational;

/// Hard cap on ring variables (roots + c + c0 + s) so monomials pack into a
/// fixed array with lexicographic ordering.
pub const MAX_VARS: usize = 16;

/// Errors from ring construction and arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RingError {
    #[error("ring configurations do not match: {0} vs {1}")]
    ConfigMismatch(RingConfig, RingConfig),
    #[error("variable {0} does not exist in this ring")]
    UnknownVariable(String),
    #[error("series substitution requires a zero constant term")]
    NonzeroConstantTerm,
    #[error("too many variables: {roots} roots needs {needed} slots, limit {limit}")]
    TooManyVariables { roots: u32, needed: usize, limit: usize },
    #[error("constant term is not invertible")]
    NonUnitConstant,
}

/// Ring shape: number of root variables, total-degree cutoff, and whether the
/// odd-slot generator `s` is present.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RingConfig {
    pub roots: u32,
    pub cutoff: u32,
    pub with_s: bool,
}

impl RingConfig {
    /// Standard ring for a `2d`-dimensional setting: `d` roots, cutoff `d`.
    pub fn standard(d: u32) -> Result<Self, RingError> {
        Self::new(d, d, false)
    }

    pub fn new(roots: u32, cutoff: u32, with_s: bool) -> Result<Self, RingError> {
        let needed = roots as usize + 2 + usize::from(with_s);
        if needed > MAX_VARS {
            return Err(RingError::TooManyVariables {
                roots,
                needed,
                limit: MAX_VARS,
            });
        }
        Ok(RingConfig { roots, cutoff, with_s })
    }

    /// Same ring with a different degree cutoff (for raised-precision cross-checks).
    pub fn with_cutoff(self, cutoff: u32) -> Self {
        RingConfig { cutoff, ..self }
    }

    pub fn num_vars(&self) -> usize {
        self.roots as usize + 2 + usize::from(self.with_s)
    }

    fn var_index(&self, var: Var) -> Result<usize, RingError> {
        match var {
            Var::Root(i) if i < self.roots => Ok(i as usize),
            Var::C => Ok(self.roots as usize),
            Var::C0 => Ok(self.roots as usize + 1),
            Var::S if self.with_s => Ok(self.roots as usize + 2),
            v => Err(RingError::UnknownVariable(v.to_string())),
        }
    }

    fn var_name(&self, idx: usize) -> String {
        let d = self.roots as usize;
        if idx < d {
            format!("a{}", idx + 1)
        } else if idx == d {
            "c".to_string()
        } else if idx == d + 1 {
            "c0".to_string()
        } else {
            "s".to_string()
        }
    }
}

impl fmt::Display for RingConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(roots={}, cutoff={}, s={})", self.roots, self.cutoff, self.with_s)
    }
}

/// Ring variable: normalized Chern roots, the two Euler generators, or the
/// odd-slot generator.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Var {
    Root(u32),
    C,
    C0,
    S,
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::Root(i) => write!(f, "a{}", i + 1),
            Var::C => write!(f, "c"),
            Var::C0 => write!(f, "c0"),
            Var::S => write!(f, "s"),
        }
    }
}

/// Packed exponent vector; lexicographic order gives the canonical term order.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
struct Monomial([u8; MAX_VARS]);

impl Monomial {
    const ONE: Monomial = Monomial([0; MAX_VARS]);

    fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    fn mul(&self, rhs: &Monomial) -> Monomial {
        let mut out = [0u8; MAX_VARS];
        for (o, (a, b)) in out.iter_mut().zip(self.0.iter().zip(rhs.0.iter())) {
            *o = a + b;
        }
        Monomial(out)
    }
}

/// Element of the truncated graded ring: canonical map from monomials to
/// nonzero rational coefficients.
#[derive(Clone, PartialEq)]
pub struct GradedPoly {
    config: RingConfig,
    terms: BTreeMap<Monomial, Rational>,
}

impl GradedPoly {
    pub fn zero(config: RingConfig) -> Self {
        GradedPoly {
            config,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(config: RingConfig, value: Rational) -> Self {
        let mut p = GradedPoly::zero(config);
        if !value.is_zero() {
            p.terms.insert(Monomial::ONE, value);
        }
        p
    }

    pub fn one(config: RingConfig) -> Self {
        GradedPoly::constant(config, Rational::one())
    }

    pub fn var(config: RingConfig, var: Var) -> Result<Self, RingError> {
        let idx = config.var_index(var)?;
        let mut p = GradedPoly::zero(config);
        if config.cutoff >= 1 {
            let mut m = [0u8; MAX_VARS];
            m[idx] = 1;
            p.terms.insert(Monomial(m), Rational::one());
        }
        Ok(p)
    }

    pub fn config(&self) -> RingConfig {
        self.config
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&Monomial::ONE).cloned().unwrap_or_else(Rational::zero)
    }

    fn add_term(&mut self, m: Monomial, c: &Rational) {
        if m.degree() > self.config.cutoff || c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(cur) => {
                let next = cur + c;
                if !next.is_zero() {
                    self.terms.insert(m, next);
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn checked_add(&self, rhs: &Self) -> Result<Self, RingError> {
        if self.config != rhs.config {
            return Err(RingError::ConfigMismatch(self.config, rhs.config));
        }
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, rhs: &Self) -> Result<Self, RingError> {
        if self.config != rhs.config {
            return Err(RingError::ConfigMismatch(self.config, rhs.config));
        }
        let mut out = GradedPoly::zero(self.config);
        let cutoff = self.config.cutoff;
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            for (mb, cb) in &rhs.terms {
                if da + mb.degree() > cutoff {
                    continue;
                }
                out.add_term(ma.mul(mb), &(ca * cb));
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.checked_add(rhs).expect("ring config mismatch in add")
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.checked_mul(rhs).expect("ring config mismatch in mul")
    }

    pub fn neg(&self) -> Self {
        GradedPoly {
            config: self.config,
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Self {
        if k.is_zero() {
            return GradedPoly::zero(self.config);
        }
        GradedPoly {
            config: self.config,
            terms: self.terms.iter().map(|(m, c)| (*m, c * k)).collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut result = GradedPoly::one(self.config);
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

    /// Inverse of a polynomial with invertible constant term, via the
    /// geometric series of its augmentation part.
    pub fn inverse(&self) -> Result<Self, RingError> {
        let c = self.constant_term();
        let c_inv = c.checked_inv().map_err(|_| RingError::NonUnitConstant)?;
        // p = c (1 + u) with u of positive degree; p^{-1} = c^{-1} sum (-u)^k
        let mut u = self.scale(&c_inv);
        u.terms.remove(&Monomial::ONE);
        let mut acc = GradedPoly::one(self.config);
        let mut term = GradedPoly::one(self.config);
        for _ in 0..self.config.cutoff {
            term = term.mul(&u).neg();
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        Ok(acc.scale(&c_inv))
    }

    /// The same polynomial in the ring with a lower cutoff (higher-degree
    /// terms dropped).
    pub fn restricted(&self, cutoff: u32) -> Self {
        let config = RingConfig {
            cutoff: cutoff.min(self.config.cutoff),
            ..self.config
        };
        GradedPoly {
            config,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= config.cutoff)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Homogeneous part of internal degree `k`.
    pub fn degree_component(&self, k: u32) -> Self {
        GradedPoly {
            config: self.config,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == k)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    /// Top-degree component: internal degree `d`, i.e. cohomological degree `2d`.
    pub fn top_component(&self) -> Self {
        self.degree_component(self.config.roots)
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// Substitute `var -> 0`.
    pub fn set_var_zero(&self, var: Var) -> Result<Self, RingError> {
        let idx = self.config.var_index(var)?;
        Ok(GradedPoly {
            config: self.config,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.0[idx] == 0)
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        })
    }

    /// Substitute `var -> -var`.
    pub fn negate_var(&self, var: Var) -> Result<Self, RingError> {
        let idx = self.config.var_index(var)?;
        Ok(GradedPoly {
            config: self.config,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let c = if m.0[idx] % 2 == 0 { c.clone() } else { -c };
                    (*m, c)
                })
                .collect(),
        })
    }

    /// Swap two root variables.
    pub fn swap_roots(&self, i: u32, j: u32) -> Result<Self, RingError> {
        let ii = self.config.var_index(Var::Root(i))?;
        let jj = self.config.var_index(Var::Root(j))?;
        Ok(GradedPoly {
            config: self.config,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut e = m.0;
                    e.swap(ii, jj);
                    (Monomial(e), c.clone())
                })
                .collect(),
        })
    }

    /// Every term carries the generator `s` to the first power exactly.
    pub fn is_linear_in_s(&self) -> Result<bool, RingError> {
        let idx = self.config.var_index(Var::S)?;
        Ok(self.terms.keys().all(|m| m.0[idx] == 1))
    }

    /// Exponent-of-`var` lower bound over all terms (None when zero).
    pub fn min_var_exponent(&self, var: Var) -> Result<Option<u8>, RingError> {
        let idx = self.config.var_index(var)?;
        Ok(self.terms.keys().map(|m| m.0[idx]).min())
    }

    fn monomial_string(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        for (idx, &e) in m.0.iter().enumerate().take(self.config.num_vars()) {
            if e == 0 {
                continue;
            }
            if e == 1 {
                parts.push(self.config.var_name(idx));
            } else {
                parts.push(format!("{}^{}", self.config.var_name(idx), e));
            }
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }

    /// Canonical `{monomial: coefficient}` map for JSON reports.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (m, c) in &self.terms {
            map.insert(self.monomial_string(m), serde_json::Value::String(c.to_string()));
        }
        serde_json::Value::Object(map)
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            if first {
                first = false;
            } else {
                write!(f, " + ")?;
            }
            let ms = self.monomial_string(m);
            if ms == "1" {
                write!(f, "{}", c)?;
            } else if c.is_one() {
                write!(f, "{}", ms)?;
            } else {
                write!(f, "{}*{}", c, ms)?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl Coefficient for GradedPoly {
    fn is_zero(&self) -> bool {
        GradedPoly::is_zero(self)
    }

    fn zero_like(&self) -> Self {
        GradedPoly::zero(self.config)
    }

    fn add_ref(self, rhs: &Self) -> Self {
        self.add(rhs)
    }

    fn neg(self) -> Self {
        GradedPoly::neg(&self)
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        self.mul(rhs)
    }

    fn try_inv(&self) -> Option<Self> {
        self.inverse().ok()
    }
}

/// Compose a univariate power series (given by its Taylor coefficients) with
/// a polynomial of zero constant term, by Horner evaluation through the
/// cutoff.
pub fn apply_series(
    coeff: impl Fn(u32) -> Rational,
    p: &GradedPoly,
) -> Result<GradedPoly, RingError> {
    if !p.constant_term().is_zero() {
        return Err(RingError::NonzeroConstantTerm);
    }
    let cutoff = p.config.cutoff;
    let mut acc = GradedPoly::constant(p.config, coeff(cutoff));
    for k in (0..cutoff).rev() {
        acc = acc.mul(p);
        acc.add_term(Monomial::ONE, &coeff(k));
    }
    Ok(acc)
}

/// `1/k!` as an exact rational.
pub fn inv_factorial(k: u32) -> Rational {
    let mut f = Rational::one();
    for i in 1..=k {
        f = f * Rational::from_int(i as i64);
    }
    f.checked_inv().expect("factorial is nonzero")
}

/// `exp(var)` or `exp(-var)` truncated at the cutoff.
pub fn exp_var(config: RingConfig, var: Var, negate: bool) -> Result<GradedPoly, RingError> {
    let v = GradedPoly::var(config, var)?;
    let v = if negate { v.neg() } else { v };
    apply_series(inv_factorial, &v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(d: u32, cutoff: u32) -> RingConfig {
        RingConfig::new(d, cutoff, false).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn truncation_drops_top_degree() {
        let c = cfg(1, 1);
        let a = GradedPoly::var(c, Var::Root(0)).unwrap();
        assert!(a.mul(&a).is_zero());
    }

    #[test]
    fn difference_of_squares() {
        let c = cfg(1, 2);
        let one = GradedPoly::one(c);
        let a = GradedPoly::var(c, Var::Root(0)).unwrap();
        let prod = one.add(&a).mul(&one.sub(&a));
        let expect = one.sub(&a.mul(&a));
        assert_eq!(prod, expect);
    }

    #[test]
    fn scale_example() {
        let c = cfg(2, 4);
        let c0 = GradedPoly::var(c, Var::C0).unwrap();
        let p = c0.mul(&c0).scale(&r(-1, 8));
        assert_eq!(p.to_json()["c0^2"], serde_json::json!("-1/8"));
    }

    #[test]
    fn config_mismatch_is_an_error() {
        let a = GradedPoly::one(cfg(1, 2));
        let b = GradedPoly::one(cfg(2, 2));
        assert!(matches!(a.checked_mul(&b), Err(RingError::ConfigMismatch(..))));
        assert!(matches!(a.checked_add(&b), Err(RingError::ConfigMismatch(..))));
    }

    #[test]
    fn apply_series_exponential() {
        let c = cfg(1, 3);
        let a = GradedPoly::var(c, Var::Root(0)).unwrap();
        let e = exp_var(c, Var::Root(0), false).unwrap();
        let mut expect = GradedPoly::one(c).add(&a);
        expect = expect.add(&a.mul(&a).scale(&r(1, 2)));
        expect = expect.add(&a.mul(&a).mul(&a).scale(&r(1, 6)));
        assert_eq!(e, expect);
    }

    #[test]
    fn apply_series_on_zero_gives_constant_term() {
        let c = cfg(1, 3);
        let z = GradedPoly::zero(c);
        let e = apply_series(|k| if k == 0 { Rational::one() } else { Rational::zero() }, &z).unwrap();
        assert_eq!(e, GradedPoly::one(c));
    }

    #[test]
    fn apply_series_rejects_constant_terms() {
        let c = cfg(1, 3);
        let p = GradedPoly::one(c);
        assert!(matches!(
            apply_series(|_| Rational::one(), &p),
            Err(RingError::NonzeroConstantTerm)
        ));
    }

    #[test]
    fn top_component_picks_degree_d() {
        let c = cfg(3, 3);
        let a1 = GradedPoly::var(c, Var::Root(0)).unwrap();
        let c0 = GradedPoly::var(c, Var::C0).unwrap();
        let p = GradedPoly::one(c).add(&a1).add(&a1.mul(&a1).mul(&c0));
        let top = p.top_component();
        assert_eq!(top, a1.mul(&a1).mul(&c0));
        assert!(GradedPoly::one(c).top_component().is_zero());
    }

    #[test]
    fn inverse_of_unit() {
        let c = cfg(2, 4);
        let a = GradedPoly::var(c, Var::Root(0)).unwrap();
        let p = GradedPoly::constant(c, r(2, 1)).add(&a);
        let inv = p.inverse().unwrap();
        assert_eq!(p.mul(&inv), GradedPoly::one(c));
        assert!(GradedPoly::zero(c).inverse().is_err());
    }

    #[test]
    fn monomial_strings_are_canonical() {
        let c = cfg(2, 4);
        let a1 = GradedPoly::var(c, Var::Root(0)).unwrap();
        let c0 = GradedPoly::var(c, Var::C0).unwrap();
        let p = a1.pow(2).mul(&c0);
        assert_eq!(p.to_json()["a1^2*c0"], serde_json::json!("1"));
    }
}
