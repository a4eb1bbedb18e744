//! Floating-complex evaluation of the theta products and the numeric
//! cross-checks of their transformation laws.
//!
//! The evaluator uses the same truncated product formulas as the formal path
//! (no series acceleration), so a discrepancy between the two is diagnostic
//! of a real defect rather than a numerical artifact. `q^(1/8)` and `q^(1/2)`
//! are computed from `tau` directly, which fixes the branch in the
//! `tau -> tau + 1` laws.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{ModularPair, RatioRole, ThetaError, ThetaKind};
use crate::qseries::QSeries;
use crate::rational::{HalfInt, Rational};
use crate::report::{CheckEntry, Detail};

type C = Complex64;

fn i() -> C {
    C::new(0.0, 1.0)
}

fn two_pi_i() -> C {
    C::new(0.0, 2.0 * PI)
}

fn check_tau(tau: C) -> Result<(), ThetaError> {
    if tau.im <= 0.0 {
        Err(ThetaError::TauNotInUpperHalfPlane)
    } else {
        Ok(())
    }
}

/// Truncated product evaluation of one theta function.
pub fn theta(v: C, tau: C, kind: ThetaKind, terms: u32) -> Result<C, ThetaError> {
    check_tau(tau)?;
    if terms == 0 {
        return Err(ThetaError::NoTerms);
    }
    let q = (two_pi_i() * tau).exp();
    let e = (two_pi_i() * v).exp();
    let q8 = (two_pi_i() * tau / 8.0).exp();
    let qh = (two_pi_i() * tau / 2.0).exp();

    let mut acc = match kind {
        ThetaKind::Theta => 2.0 * q8 * (PI * v).sin(),
        ThetaKind::Theta1 => 2.0 * q8 * (PI * v).cos(),
        ThetaKind::Theta2 | ThetaKind::Theta3 => C::new(1.0, 0.0),
    };
    let mut qj = C::new(1.0, 0.0);
    for _ in 0..terms {
        qj *= q;
        // q^{j - 1/2}
        let qjh = qj / qh;
        acc *= match kind {
            ThetaKind::Theta => (1.0 - qj) * (1.0 - e * qj) * (1.0 - qj / e),
            ThetaKind::Theta1 => (1.0 - qj) * (1.0 + e * qj) * (1.0 + qj / e),
            ThetaKind::Theta2 => (1.0 - qj) * (1.0 - e * qjh) * (1.0 - qjh / e),
            ThetaKind::Theta3 => (1.0 - qj) * (1.0 + e * qjh) * (1.0 + qjh / e),
        };
    }
    Ok(acc)
}

/// `theta'(0, tau) = 2 pi q^(1/8) prod (1-q^j)^3`.
pub fn theta_prime_zero(tau: C, terms: u32) -> Result<C, ThetaError> {
    check_tau(tau)?;
    let q = (two_pi_i() * tau).exp();
    let q8 = (two_pi_i() * tau / 8.0).exp();
    let mut acc = 2.0 * PI * q8;
    let mut qj = C::new(1.0, 0.0);
    for _ in 0..terms {
        qj *= q;
        acc *= (1.0 - qj).powi(3);
    }
    Ok(acc)
}

/// Logarithmic derivative `d/dv log theta_kind(v, tau)` away from zeros.
pub fn theta_dlog(v: C, tau: C, kind: ThetaKind, terms: u32) -> Result<C, ThetaError> {
    check_tau(tau)?;
    let q = (two_pi_i() * tau).exp();
    let e = (two_pi_i() * v).exp();
    let qh = (two_pi_i() * tau / 2.0).exp();
    let mut acc = match kind {
        ThetaKind::Theta => PI * (PI * v).cos() / (PI * v).sin(),
        ThetaKind::Theta1 => -PI * (PI * v).sin() / (PI * v).cos(),
        ThetaKind::Theta2 | ThetaKind::Theta3 => C::new(0.0, 0.0),
    };
    let sign = match kind {
        ThetaKind::Theta | ThetaKind::Theta2 => -1.0,
        ThetaKind::Theta1 | ThetaKind::Theta3 => 1.0,
    };
    let mut qj = C::new(1.0, 0.0);
    for _ in 0..terms {
        qj *= q;
        let h = match kind {
            ThetaKind::Theta | ThetaKind::Theta1 => qj,
            ThetaKind::Theta2 | ThetaKind::Theta3 => qj / qh,
        };
        acc += two_pi_i() * sign * (e * h) / (1.0 + sign * e * h);
        acc -= two_pi_i() * sign * (h / e) / (1.0 + sign * h / e);
    }
    Ok(acc)
}

/// `d/dv theta_kind(v, tau)` via the product and its logarithmic derivative.
pub fn theta_dv(v: C, tau: C, kind: ThetaKind, terms: u32) -> Result<C, ThetaError> {
    Ok(theta(v, tau, kind, terms)? * theta_dlog(v, tau, kind, terms)?)
}

/// Numeric values of the six level forms at `tau`.
pub fn delta_epsilon(level: u32, tau: C, terms: u32) -> Result<(C, C), ThetaError> {
    let z = C::new(0.0, 0.0);
    let t1 = theta(z, tau, ThetaKind::Theta1, terms)?.powi(4);
    let t2 = theta(z, tau, ThetaKind::Theta2, terms)?.powi(4);
    let t3 = theta(z, tau, ThetaKind::Theta3, terms)?.powi(4);
    Ok(match level {
        1 => ((t2 + t3) / 8.0, t2 * t3 / 16.0),
        2 => (-(t1 + t3) / 8.0, t1 * t3 / 16.0),
        3 => ((t1 - t2) / 8.0, -t1 * t2 / 16.0),
        _ => return Err(ThetaError::NeedsEvenKind("level must be 1, 2 or 3")),
    })
}

/// Principal square root of `tau/i`; valid on the upper half plane where the
/// real part of `tau/i` is positive.
fn sqrt_tau_over_i(tau: C) -> C {
    (tau / i()).sqrt()
}

fn gaussian(tau: C, v: C) -> C {
    (i() * PI * tau * v * v).exp()
}

struct LawCheck<'a> {
    entry: &'a mut CheckEntry,
    tol: f64,
}

impl LawCheck<'_> {
    fn assert_close(&mut self, name: String, lhs: C, rhs: C) {
        let err = (lhs - rhs).norm();
        self.entry.push(Detail::bool_check(name, err < self.tol, format!("|err| = {:.3e}", err)));
    }
}

/// All transformation laws checked numerically at the given sample points.
///
/// Covers the `tau -> tau + 1` and `tau -> -1/tau` laws of the four theta
/// functions, their `v`-derivatives, the `theta'(0)` law, and the laws of the
/// level forms.
pub fn transformation_suite(taus: &[C], v: C, terms: u32, tol: f64) -> Result<Vec<CheckEntry>, ThetaError> {
    for &tau in taus {
        check_tau(tau)?;
    }
    let kinds = [ThetaKind::Theta, ThetaKind::Theta1, ThetaKind::Theta2, ThetaKind::Theta3];
    let t_image = |k: ThetaKind| match k {
        ThetaKind::Theta => ThetaKind::Theta,
        ThetaKind::Theta1 => ThetaKind::Theta1,
        ThetaKind::Theta2 => ThetaKind::Theta3,
        ThetaKind::Theta3 => ThetaKind::Theta2,
    };
    let s_image = |k: ThetaKind| match k {
        ThetaKind::Theta => ThetaKind::Theta,
        ThetaKind::Theta1 => ThetaKind::Theta2,
        ThetaKind::Theta2 => ThetaKind::Theta1,
        ThetaKind::Theta3 => ThetaKind::Theta3,
    };
    let eighth_root = (i() * PI / 4.0).exp();

    let mut entries = Vec::new();
    for (eq, kind) in [("Eq. 2.12", kinds[0]), ("Eq. 2.13", kinds[1]), ("Eq. 2.14", kinds[2]), ("Eq. 2.15", kinds[3])] {
        let mut entry = CheckEntry::new(format!("numeric-{}-laws", kind.label()), eq)
            .with_param("v", v)
            .with_param("terms", terms)
            .with_param("tol", tol);
        for &tau in taus {
            let mut law = LawCheck { entry: &mut entry, tol };
            // translation law
            let phase = match kind {
                ThetaKind::Theta | ThetaKind::Theta1 => eighth_root,
                _ => C::new(1.0, 0.0),
            };
            law.assert_close(
                format!("{}(v, tau+1) at tau = {}", kind.label(), tau),
                theta(v, tau + 1.0, kind, terms)?,
                phase * theta(v, tau, t_image(kind), terms)?,
            );
            // inversion law
            let mut factor = sqrt_tau_over_i(tau) * gaussian(tau, v);
            if kind == ThetaKind::Theta {
                factor /= i();
            }
            law.assert_close(
                format!("{}(v, -1/tau) at tau = {}", kind.label(), tau),
                theta(v, -1.0 / tau, kind, terms)?,
                factor * theta(tau * v, tau, s_image(kind), terms)?,
            );
        }
        entries.push(entry);
    }

    // derivative laws
    let mut entry = CheckEntry::new("numeric-derivative-laws", "Eq. 2.16")
        .with_param("v", v)
        .with_param("terms", terms)
        .with_param("tol", tol);
    for &tau in taus {
        let mut law = LawCheck { entry: &mut entry, tol };
        for kind in kinds {
            let phase = match kind {
                ThetaKind::Theta | ThetaKind::Theta1 => eighth_root,
                _ => C::new(1.0, 0.0),
            };
            law.assert_close(
                format!("{}'(v, tau+1) at tau = {}", kind.label(), tau),
                theta_dv(v, tau + 1.0, kind, terms)?,
                phase * theta_dv(v, tau, t_image(kind), terms)?,
            );
            let mut factor = sqrt_tau_over_i(tau) * gaussian(tau, v);
            if kind == ThetaKind::Theta {
                factor /= i();
            }
            let img = s_image(kind);
            law.assert_close(
                format!("{}'(v, -1/tau) at tau = {}", kind.label(), tau),
                theta_dv(v, -1.0 / tau, kind, terms)?,
                factor
                    * (two_pi_i() * tau * v * theta(tau * v, tau, img, terms)?
                        + tau * theta_dv(tau * v, tau, img, terms)?),
            );
        }
    }
    entries.push(entry);

    let mut entry = CheckEntry::new("numeric-theta-prime-law", "Eq. 2.17")
        .with_param("terms", terms)
        .with_param("tol", tol);
    for &tau in taus {
        let mut law = LawCheck { entry: &mut entry, tol };
        law.assert_close(
            format!("theta'(0, -1/tau) at tau = {}", tau),
            theta_prime_zero(-1.0 / tau, terms)?,
            sqrt_tau_over_i(tau) / i() * tau * theta_prime_zero(tau, terms)?,
        );
    }
    entries.push(entry);

    let mut entry = CheckEntry::new("numeric-level-form-inversion", "Eq. 2.19")
        .with_param("terms", terms)
        .with_param("tol", tol);
    for &tau in taus {
        let mut law = LawCheck { entry: &mut entry, tol };
        let (d1, e1) = delta_epsilon(1, tau, terms)?;
        let (d2s, e2s) = delta_epsilon(2, -1.0 / tau, terms)?;
        law.assert_close(format!("delta2(-1/tau) = tau^2 delta1 at tau = {}", tau), d2s, tau * tau * d1);
        law.assert_close(format!("eps2(-1/tau) = tau^4 eps1 at tau = {}", tau), e2s, tau.powi(4) * e1);
    }
    entries.push(entry);

    let mut entry = CheckEntry::new("numeric-level-form-translation", "Eq. 2.20")
        .with_param("terms", terms)
        .with_param("tol", tol);
    for &tau in taus {
        let mut law = LawCheck { entry: &mut entry, tol };
        let (d3, e3) = delta_epsilon(3, tau, terms)?;
        let (d2t, e2t) = delta_epsilon(2, tau + 1.0, terms)?;
        law.assert_close(format!("delta2(tau+1) = delta3 at tau = {}", tau), d2t, d3);
        law.assert_close(format!("eps2(tau+1) = eps3 at tau = {}", tau), e2t, e3);
    }
    entries.push(entry);

    Ok(entries)
}

fn y_half(tau: C) -> C {
    (i() * PI * tau).exp()
}

fn eval_formal(s: &QSeries<Rational>, tau: C) -> C {
    s.eval_complex(y_half(tau))
}

/// Cross-check every formal q-expansion in this module against direct numeric
/// evaluation at a fixed `tau` (default `2i`, where `|q|` is tiny and the
/// truncation error is far below the tolerance).
pub fn formal_numeric_crosscheck(order: HalfInt, tau: C, terms: u32, tol: f64) -> Result<Vec<CheckEntry>, ThetaError> {
    check_tau(tau)?;
    let mut entries = Vec::new();
    let q8 = (two_pi_i() * tau / 8.0).exp();
    let z = C::new(0.0, 0.0);

    let mut entry = CheckEntry::new("formal-numeric-theta-constants", "Eqs. 2.6-2.9 at v = 0")
        .with_param("tau", tau)
        .with_param("order", order)
        .with_param("tol", tol);
    {
        let mut law = LawCheck { entry: &mut entry, tol };
        // theta1 formal constant strips 2 q^{1/8}
        let n1 = super::theta_constant(ThetaKind::Theta1, order)?;
        law.assert_close(
            "theta1 constant".to_string(),
            eval_formal(&n1, tau) * 2.0 * q8,
            theta(z, tau, ThetaKind::Theta1, terms)?,
        );
        for kind in [ThetaKind::Theta2, ThetaKind::Theta3] {
            let n = super::theta_constant(kind, order)?;
            law.assert_close(
                format!("{} constant", kind.label()),
                eval_formal(&n, tau),
                theta(z, tau, kind, terms)?,
            );
        }
        let np = super::theta_prime_constant(order);
        law.assert_close(
            "theta' constant".to_string(),
            eval_formal(&np, tau) * 2.0 * PI * q8,
            theta_prime_zero(tau, terms)?,
        );
    }
    entries.push(entry);

    let mut entry = CheckEntry::new("formal-numeric-level-forms", "level forms of Sec. 2.2")
        .with_param("tau", tau)
        .with_param("order", order)
        .with_param("tol", tol);
    {
        let mut law = LawCheck { entry: &mut entry, tol };
        for level in 1..=3 {
            let pair = super::modular_pair(level, order)?;
            let (dn, en) = delta_epsilon(level, tau, terms)?;
            law.assert_close(format!("delta{}", level), eval_formal(&pair.delta, tau), dn);
            law.assert_close(format!("eps{}", level), eval_formal(&pair.epsilon, tau), en);
        }
        // the two-route epsilon2 agreement is an order of magnitude tighter
        let pair = super::modular_pair(2, order)?;
        let (_, en) = delta_epsilon(2, tau, terms)?;
        let err = (eval_formal(&pair.epsilon, tau) - en).norm();
        law.entry.push(Detail::bool_check(
            "eps2 two-route agreement at 1e-10",
            err < 1e-10,
            format!("|err| = {:.3e}", err),
        ));
    }
    entries.push(entry);

    // root-variable expansions at a small sample point x0
    let x0 = C::new(0.05, 0.0);
    let a0 = two_pi_i() * x0;
    let var_order = 16;
    let mut entry = CheckEntry::new("formal-numeric-ratios", "normalized ratio expansions")
        .with_param("tau", tau)
        .with_param("x0", x0)
        .with_param("tol", tol);
    {
        let mut law = LawCheck { entry: &mut entry, tol };
        let yh = y_half(tau);
        let tp = theta_prime_zero(tau, terms)?;
        let th = theta(x0, tau, ThetaKind::Theta, terms)?;

        let rk = super::normalized_ratio(RatioRole::RootKernel, var_order, order)?;
        law.assert_close("root kernel".to_string(), rk.series.eval_complex(a0, yh), x0 * tp / th);

        for kind in [ThetaKind::Theta1, ThetaKind::Theta2, ThetaKind::Theta3] {
            let ratio = super::normalized_ratio(RatioRole::Ratio(kind), var_order, order)?;
            law.assert_close(
                format!("{} ratio", kind.label()),
                ratio.series.eval_complex(a0, yh),
                theta(x0, tau, kind, terms)? / theta(z, tau, kind, terms)?,
            );
        }

        let ek = super::normalized_ratio(RatioRole::EulerKernel, var_order, order)?;
        law.assert_close(
            "euler kernel".to_string(),
            ek.series.eval_complex(a0, yh),
            i() * PI * th / tp,
        );

        for kind in [ThetaKind::Theta1, ThetaKind::Theta2, ThetaKind::Theta3] {
            let k = super::normalized_ratio(RatioRole::LogDerivativeKernel(kind), var_order, order)?;
            let numeric = 1.0 / x0 - theta_dlog(x0, tau, ThetaKind::Theta, terms)? + theta_dlog(x0, tau, kind, terms)?;
            law.assert_close(
                format!("log-derivative kernel ({})", kind.label()),
                k.series.eval_complex(a0, yh) * two_pi_i(),
                numeric,
            );
        }
    }
    entries.push(entry);

    Ok(entries)
}

/// Formal/numeric agreement for a [`ModularPair`] provided by the caller
/// (used by the verification driver to cross-check cached pairs).
pub fn pair_crosscheck(pair: &ModularPair, tau: C, terms: u32, tol: f64) -> Result<bool, ThetaError> {
    let (dn, en) = delta_epsilon(pair.level, tau, terms)?;
    let dd = (eval_formal(&pair.delta, tau) - dn).norm();
    let ee = (eval_formal(&pair.epsilon, tau) - en).norm();
    Ok(dd < tol && ee < tol)
}

/// Default sample points: `2i`, `1 + i`, `(1 + 3i)/2`.
pub fn default_taus() -> Vec<C> {
    vec![C::new(0.0, 2.0), C::new(1.0, 1.0), C::new(0.5, 1.5)]
}

pub fn default_v() -> C {
    C::new(0.3, 0.1)
}
