//! Formal q-expansions of the four Jacobi theta functions and everything the
//! engine derives from them: normalized theta constants, the six level-2
//! modular forms, the normalized ratio expansions in one root variable, and
//! the logarithmic-derivative kernels of the odd-dimensional forms.
//!
//! # Conventions
//!
//! The labels follow the source identities being verified (they are not the
//! textbook numbering): `theta` is the odd function carrying `sin(pi v)`,
//! `theta1` carries `cos(pi v)`, and `theta2`/`theta3` are the half-shifted
//! products. In the usual notation these are `theta_1, theta_2, theta_4,
//! theta_3` respectively.
//!
//! # Normalization ledger
//!
//! The engine never represents `pi`, `i` or `q^(1/8)`:
//!
//! * `theta` and `theta1` carry a common prefactor `2 q^(1/8)`, and
//!   `theta'(0)` carries `2 pi q^(1/8)`; all exposed objects are ratios or
//!   fourth powers in which these prefactors cancel exactly (the fourth power
//!   of the `theta1` constant keeps its `16 q^(1/2)` on the half-integer
//!   lattice).
//! * the root variable is `a = 2 pi i x`, so `sin(pi x) = sinh(a/2)/i` and
//!   `cos(pi x) = cosh(a/2)`; the stray `pi i` of the Euler-class kernel
//!   cancels against the `1/i`.
//!
//! Each [`ThetaExpansion`] records which cancellation produced it.

pub mod numeric;

use crate::expansion::{ExpansionError, RootExpansion};
use crate::poly::inv_factorial;
use crate::qseries::{QSeries, SeriesError};
use crate::rational::{HalfInt, Rational};
use crate::report::{CheckEntry, Detail};

/// The four theta functions, in the source labeling (see module docs).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ThetaKind {
    /// Odd: `2 q^(1/8) sin(pi v) prod (1-q^j)(1-e q^j)(1-q^j/e)`.
    Theta,
    /// Even: `2 q^(1/8) cos(pi v) prod (1-q^j)(1+e q^j)(1+q^j/e)`.
    Theta1,
    /// Half-shifted with minus signs.
    Theta2,
    /// Half-shifted with plus signs.
    Theta3,
}

impl ThetaKind {
    pub fn label(self) -> &'static str {
        match self {
            ThetaKind::Theta => "theta",
            ThetaKind::Theta1 => "theta1",
            ThetaKind::Theta2 => "theta2",
            ThetaKind::Theta3 => "theta3",
        }
    }
}

/// Errors from the theta layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ThetaError {
    #[error("theta vanishes at v = 0; only its derivative has a constant")]
    VanishesAtZero,
    #[error("role requires one of theta1/theta2/theta3, got {0}")]
    NeedsEvenKind(&'static str),
    #[error("expansion error: {0}")]
    Expansion(#[from] ExpansionError),
    #[error("series error: {0}")]
    Series(#[from] SeriesError),
    #[error("numeric evaluation requires Im(tau) > 0")]
    TauNotInUpperHalfPlane,
    #[error("numeric evaluation requires at least one product term")]
    NoTerms,
}

fn factor(order: HalfInt, exp: HalfInt, coeff: Rational) -> QSeries<Rational> {
    QSeries::from_terms(
        order,
        Rational::zero(),
        [(HalfInt::ZERO, Rational::one()), (exp, coeff)],
    )
}

/// `prod_{j>=1} (1 - q^j)^power`, truncated.
fn euler_product(order: HalfInt, power: u32) -> QSeries<Rational> {
    let mut acc = QSeries::one(order);
    let mut j = 1i64;
    while HalfInt::from_int(j) <= order {
        let f = factor(order, HalfInt::from_int(j), -Rational::one());
        for _ in 0..power {
            acc = acc.mul(&f);
        }
        j += 1;
    }
    acc
}

/// `prod_{j>=1} (1 + sign q^{h_j})^2` with `h_j = j` or `j - 1/2`.
fn tail_product(order: HalfInt, sign: i64, half_shifted: bool) -> QSeries<Rational> {
    let mut acc = QSeries::one(order);
    let mut j = 1i64;
    loop {
        let h = if half_shifted {
            HalfInt::half(2 * j - 1)
        } else {
            HalfInt::from_int(j)
        };
        if h > order {
            break;
        }
        let f = factor(order, h, Rational::from_int(sign));
        acc = acc.mul(&f).mul(&f);
        j += 1;
    }
    acc
}

/// Normalized theta constant (value at `v = 0`):
///
/// * `theta1`: `prod (1-q^j)(1+q^j)^2` — the `2 q^(1/8)` prefactor is
///   stripped and reappears only inside fourth powers;
/// * `theta2`, `theta3`: the plain products (no prefactor to strip);
/// * `theta` itself vanishes at `v = 0`, which is an error — use
///   [`theta_prime_constant`].
pub fn theta_constant(kind: ThetaKind, order: HalfInt) -> Result<QSeries<Rational>, ThetaError> {
    let em = euler_product(order, 1);
    match kind {
        ThetaKind::Theta => Err(ThetaError::VanishesAtZero),
        ThetaKind::Theta1 => Ok(em.mul(&tail_product(order, 1, false))),
        ThetaKind::Theta2 => Ok(em.mul(&tail_product(order, -1, true))),
        ThetaKind::Theta3 => Ok(em.mul(&tail_product(order, 1, true))),
    }
}

/// Normalized `theta'(0)`: `prod (1-q^j)^3` (the `2 pi q^(1/8)` prefactor is
/// stripped).
pub fn theta_prime_constant(order: HalfInt) -> QSeries<Rational> {
    euler_product(order, 3)
}

/// Fourth power of the `theta1` constant with its prefactor folded in:
/// `(2 q^(1/8))^4 = 16 q^(1/2)` lands back on the half-integer lattice.
pub fn theta1_fourth_power(order: HalfInt) -> Result<QSeries<Rational>, ThetaError> {
    let n1 = theta_constant(ThetaKind::Theta1, order)?;
    let shift = QSeries::monomial(order, HalfInt::half(1), Rational::from_int(16));
    Ok(n1.pow(4, Rational::one()).mul(&shift))
}

/// The weight-2 and weight-4 forms of one level.
#[derive(Clone, Debug, PartialEq)]
pub struct ModularPair {
    pub level: u32,
    pub delta: QSeries<Rational>,
    pub epsilon: QSeries<Rational>,
}

/// The six explicit forms built from fourth powers of theta constants:
///
/// * level 1 (`delta_1 = (theta2^4 + theta3^4)/8`, `eps_1 = theta2^4 theta3^4 / 16`);
/// * level 2 (`delta_2 = -(theta1^4 + theta3^4)/8`, `eps_2 = theta1^4 theta3^4 / 16`);
/// * level 3 (`delta_3 = (theta1^4 - theta2^4)/8`, `eps_3 = -theta1^4 theta2^4 / 16`).
pub fn modular_pair(level: u32, order: HalfInt) -> Result<ModularPair, ThetaError> {
    let quarter = |s: QSeries<Rational>| s.scale(&Rational::new(1, 8).unwrap());
    let sixteenth = |s: QSeries<Rational>| s.scale(&Rational::new(1, 16).unwrap());
    let t2 = theta_constant(ThetaKind::Theta2, order)?.pow(4, Rational::one());
    let t3 = theta_constant(ThetaKind::Theta3, order)?.pow(4, Rational::one());
    let t1 = theta1_fourth_power(order)?;
    let (delta, epsilon) = match level {
        1 => (quarter(t2.add(&t3)), sixteenth(t2.mul(&t3))),
        2 => (quarter(t1.add(&t3)).neg(), sixteenth(t1.mul(&t3))),
        3 => (quarter(t1.sub(&t2)), sixteenth(t1.mul(&t2)).neg()),
        _ => return Err(ThetaError::NeedsEvenKind("level must be 1, 2 or 3")),
    };
    Ok(ModularPair { level, delta, epsilon })
}

/// Both sides of the triple-product identity in normalized rational form:
/// stripping the common `2 pi q^(1/8)` turns
/// `theta'(0) = pi theta1(0) theta2(0) theta3(0)` into an identity between
/// integer q-expansions.
pub fn jacobi_sides(order: HalfInt) -> (QSeries<Rational>, QSeries<Rational>) {
    let lhs = theta_prime_constant(order);
    let rhs = theta_constant(ThetaKind::Theta1, order)
        .expect("theta1 constant exists")
        .mul(&theta_constant(ThetaKind::Theta2, order).expect("theta2 constant exists"))
        .mul(&theta_constant(ThetaKind::Theta3, order).expect("theta3 constant exists"));
    (lhs, rhs)
}

/// Report entry comparing two q-expansions coefficient by coefficient.
pub fn series_identity_entry(
    check_id: &str,
    paper_ref: &str,
    lhs: &QSeries<Rational>,
    rhs: &QSeries<Rational>,
) -> CheckEntry {
    let mut entry = CheckEntry::new(check_id, paper_ref);
    let order = lhs.order().min(rhs.order());
    entry = entry.with_param("order", order);
    match lhs.first_mismatch(rhs, order) {
        None => entry.push(Detail::bool_check("residual vanishes", true, "0")),
        Some(k) => {
            let l = lhs.coefficient(k).expect("within order");
            let r = rhs.coefficient(k).expect("within order");
            entry.push(Detail::compared(format!("coefficient of q^{}", k), l, r));
        }
    }
    entry
}

/// The triple-product identity as a machine check.
pub fn jacobi_identity_check(order: HalfInt) -> CheckEntry {
    let (lhs, rhs) = jacobi_sides(order);
    series_identity_entry("jacobi-identity", "Eq. 2.11", &lhs, &rhs)
}

/// Which normalized object a [`ThetaExpansion`] holds.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RatioRole {
    /// `x theta'(0)/theta(x) = (a/2)/sinh(a/2) * prod (1-q^j)^2/((1-e^a q^j)(1-e^-a q^j))`.
    RootKernel,
    /// `theta_k(x)/theta_k(0)`.
    Ratio(ThetaKind),
    /// `theta_k(0)/theta_k(x)`.
    InverseRatio(ThetaKind),
    /// `pi i theta(u')/theta'(0) = sinh(c0/2) * prod (1-e^c0 q^j)(1-e^-c0 q^j)/(1-q^j)^2`.
    EulerKernel,
    /// `1/a - d/da log theta(a) + d/da log theta_k(a)`.
    LogDerivativeKernel(ThetaKind),
}

/// A normalized theta object as a power series in one root variable, plus a
/// record of which prefactor cancellation produced it.
#[derive(Clone, Debug)]
pub struct ThetaExpansion {
    pub role: RatioRole,
    pub normalization: &'static str,
    pub series: RootExpansion,
}

/// `sinh(z/2)/(z/2)` Taylor coefficients.
fn sinh_half_over_z(k: usize) -> Rational {
    if !k.is_multiple_of(2) {
        return Rational::zero();
    }
    Rational::pow2(-(k as i64)) * inv_factorial(k as u32 + 1)
}

/// `cosh(z/2)` Taylor coefficients.
fn cosh_half(k: usize) -> Rational {
    if !k.is_multiple_of(2) {
        return Rational::zero();
    }
    Rational::pow2(-(k as i64)) * inv_factorial(k as u32)
}

/// `sinh(z/2)` Taylor coefficients.
fn sinh_half(k: usize) -> Rational {
    if k.is_multiple_of(2) {
        return Rational::zero();
    }
    Rational::pow2(-(k as i64)) * inv_factorial(k as u32)
}

/// `prod_j (1 + sign e^z q^{h_j})(1 + sign e^{-z} q^{h_j})`.
fn exp_pair_product(var_order: usize, q_order: HalfInt, sign: i64, half_shifted: bool) -> RootExpansion {
    let mut acc = RootExpansion::one(var_order, q_order);
    let sgn = Rational::from_int(sign);
    let mut j = 1i64;
    loop {
        let h = if half_shifted {
            HalfInt::half(2 * j - 1)
        } else {
            HalfInt::from_int(j)
        };
        if h > q_order {
            break;
        }
        for negate in [false, true] {
            let mut f = RootExpansion::one(var_order, q_order);
            for k in 0..=var_order {
                let mut c = &sgn * &inv_factorial(k as u32);
                if negate && k % 2 == 1 {
                    c = -c;
                }
                let mut coeff = f.coeff(k).clone();
                coeff.add_to(h, &c);
                f.set_coeff(k, coeff);
            }
            acc = acc.mul(&f);
        }
        j += 1;
    }
    acc
}

fn lift(scalar: QSeries<Rational>, var_order: usize) -> RootExpansion {
    RootExpansion::from_scalar(scalar, var_order)
}

fn build_root_kernel(var_order: usize, q_order: HalfInt) -> Result<RootExpansion, ThetaError> {
    let numerator = lift(euler_product(q_order, 2), var_order);
    let denominator = RootExpansion::from_taylor_fn(sinh_half_over_z, var_order, q_order)
        .mul(&exp_pair_product(var_order, q_order, -1, false));
    Ok(numerator.mul(&denominator.invert()?))
}

fn build_ratio(kind: ThetaKind, var_order: usize, q_order: HalfInt) -> Result<RootExpansion, ThetaError> {
    match kind {
        ThetaKind::Theta => Err(ThetaError::VanishesAtZero),
        ThetaKind::Theta1 => {
            let tail = lift(tail_product(q_order, 1, false), var_order).invert()?;
            Ok(RootExpansion::from_taylor_fn(cosh_half, var_order, q_order)
                .mul(&exp_pair_product(var_order, q_order, 1, false))
                .mul(&tail))
        }
        ThetaKind::Theta2 => {
            let tail = lift(tail_product(q_order, -1, true), var_order).invert()?;
            Ok(exp_pair_product(var_order, q_order, -1, true).mul(&tail))
        }
        ThetaKind::Theta3 => {
            let tail = lift(tail_product(q_order, 1, true), var_order).invert()?;
            Ok(exp_pair_product(var_order, q_order, 1, true).mul(&tail))
        }
    }
}

fn build_euler_kernel(var_order: usize, q_order: HalfInt) -> Result<RootExpansion, ThetaError> {
    let scalar = lift(euler_product(q_order, 2), var_order).invert()?;
    Ok(RootExpansion::from_taylor_fn(sinh_half, var_order, q_order)
        .mul(&exp_pair_product(var_order, q_order, -1, false))
        .mul(&scalar))
}

/// Normalized theta object in the root variable `a`.
///
/// `var_order` is the highest retained power of `a` and must cover the ring
/// cutoff of any later substitution (plus one when the caller divides by the
/// Euler-class kernel).
pub fn normalized_ratio(role: RatioRole, var_order: usize, q_order: HalfInt) -> Result<ThetaExpansion, ThetaError> {
    let (series, normalization) = match role {
        RatioRole::RootKernel => (
            build_root_kernel(var_order, q_order)?,
            "2 pi q^(1/8) prefactors cancel between theta'(0) and theta; a = 2 pi i x",
        ),
        RatioRole::Ratio(kind) => (
            build_ratio(kind, var_order, q_order)?,
            "2 q^(1/8) prefactors cancel in theta_k(x)/theta_k(0)",
        ),
        RatioRole::InverseRatio(kind) => (
            build_ratio(kind, var_order, q_order)?.invert()?,
            "2 q^(1/8) prefactors cancel in theta_k(0)/theta_k(x)",
        ),
        RatioRole::EulerKernel => (
            build_euler_kernel(var_order, q_order)?,
            "pi i absorbed by sin(pi u') = sinh(c0/2)/i; q^(1/8) prefactors cancel",
        ),
        RatioRole::LogDerivativeKernel(kind) => {
            if kind == ThetaKind::Theta {
                return Err(ThetaError::NeedsEvenKind("log-derivative kernel"));
            }
            // 1/a - dlog theta + dlog theta_k = dlog of the per-root factor
            // (x theta'(0)/theta(x)) * (theta_k(x)/theta_k(0)), since the 1/a
            // cancels the pole of dlog theta and constants drop under dlog.
            let per_root = build_root_kernel(var_order + 1, q_order)?
                .mul(&build_ratio(kind, var_order + 1, q_order)?);
            (
                per_root.dlog()?,
                "logarithmic derivative of the per-root factor; constant prefactors drop",
            )
        }
    };
    Ok(ThetaExpansion {
        role,
        normalization,
        series,
    })
}

/// Per-root factor `x theta'(0)/theta(x) * theta_k(x)/theta_k(0)` appearing in
/// every generating-function product.
pub fn per_root_factor(kind: ThetaKind, var_order: usize, q_order: HalfInt) -> Result<RootExpansion, ThetaError> {
    Ok(build_root_kernel(var_order, q_order)?.mul(&build_ratio(kind, var_order, q_order)?))
}

/// Euler-class factor `pi i theta(u')/theta'(0) * theta_k(0)/theta_k(u')`.
pub fn euler_factor(kind: ThetaKind, var_order: usize, q_order: HalfInt) -> Result<RootExpansion, ThetaError> {
    let inv = build_ratio(kind, var_order, q_order)?.invert()?;
    Ok(build_euler_kernel(var_order, q_order)?.mul(&inv))
}
