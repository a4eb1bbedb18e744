//! Characteristic-form generating functions over the graded ring.
//!
//! Two independent computation paths are deliberately kept apart:
//!
//! * the *direct* path expands the Chern characters of the twist bundles as
//!   K-theory products of exterior/symmetric power factors
//!   ([`ch_theta_bundle`]);
//! * the *closed-form* path assembles the same generating functions from
//!   normalized theta ratios ([`q_form`]).
//!
//! The verifier refuses to report success unless both agree coefficientwise;
//! that agreement is itself a nontrivial identity and the strongest typo
//! detector the engine has.

use crate::expansion::{symmetric_product, ExpansionError, RootExpansion};
use crate::poly::{apply_series, exp_var, GradedPoly, RingConfig, RingError, Var};
use crate::qseries::{QSeries, SeriesError};
use crate::rational::{HalfInt, Rational};
use crate::theta::{euler_factor, per_root_factor, ThetaError, ThetaKind};

/// Errors from the characteristic-form layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CharformError {
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Theta(#[from] ThetaError),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

impl From<ExpansionError> for CharformError {
    fn from(e: ExpansionError) -> Self {
        CharformError::Theta(ThetaError::Expansion(e))
    }
}

// ---------------------------------------------------------------------------
// Taylor helpers (exact coefficient vectors in one variable)
// ---------------------------------------------------------------------------

/// Closed-form Taylor coefficient tables used by the polynomial builders.
pub mod taylor {
    use crate::poly::inv_factorial;
    use crate::rational::Rational;

    /// `sinh(z/s)` coefficients through `z^n`.
    pub fn sinh_scaled(s: i64, n: usize) -> Vec<Rational> {
        (0..=n)
            .map(|k| {
                if k % 2 == 1 {
                    Rational::new(1, s).unwrap().pow(k as u32) * inv_factorial(k as u32)
                } else {
                    Rational::zero()
                }
            })
            .collect()
    }

    /// `cosh(z/s)` coefficients through `z^n`.
    pub fn cosh_scaled(s: i64, n: usize) -> Vec<Rational> {
        (0..=n)
            .map(|k| {
                if k % 2 == 0 {
                    Rational::new(1, s).unwrap().pow(k as u32) * inv_factorial(k as u32)
                } else {
                    Rational::zero()
                }
            })
            .collect()
    }

    pub fn mul(a: &[Rational], b: &[Rational], n: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); n + 1];
        for (i, ai) in a.iter().enumerate().take(n + 1) {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                if i + j > n {
                    break;
                }
                out[i + j] += &(ai * bj);
            }
        }
        out
    }

    /// Inverse of a unit series.
    pub fn invert(a: &[Rational], n: usize) -> Vec<Rational> {
        let lead = a[0].checked_inv().expect("unit leading Taylor coefficient");
        let mut out = vec![Rational::zero(); n + 1];
        out[0] = lead.clone();
        for k in 1..=n {
            let mut acc = Rational::zero();
            for j in 1..=k.min(a.len() - 1) {
                acc += &(&a[j] * &out[k - j]);
            }
            out[k] = -(lead.clone() * acc);
        }
        out
    }

    /// Exact division by `z^v` (panics if lower coefficients are nonzero —
    /// caller guarantees the valuation).
    pub fn shift_down(a: &[Rational], v: usize) -> Vec<Rational> {
        for c in &a[..v] {
            assert!(c.is_zero(), "Taylor division by z^{} with nonzero low term", v);
        }
        a[v..].to_vec()
    }

    /// `(z/2)/sinh(z/2)`.
    pub fn a_hat_root(n: usize) -> Vec<Rational> {
        let s = sinh_scaled(2, n + 1);
        invert(&shift_down(&s, 1).iter().map(|c| c * &Rational::from_int(2)).collect::<Vec<_>>(), n)
    }

    /// `z/tanh(z/2) = 2 cosh(z/2) * (z/2)/sinh(z/2)`.
    pub fn l_hat_root(n: usize) -> Vec<Rational> {
        let two = cosh_scaled(2, n).iter().map(|c| c * &Rational::from_int(2)).collect::<Vec<_>>();
        mul(&two, &a_hat_root(n), n)
    }

    /// `1/cosh(z/2)^2`.
    pub fn inv_cosh_half_sq(n: usize) -> Vec<Rational> {
        let c = cosh_scaled(2, n);
        invert(&mul(&c, &c, n), n)
    }

    /// `tanh(z/2)`.
    pub fn tanh_half(n: usize) -> Vec<Rational> {
        mul(&sinh_scaled(2, n), &invert(&cosh_scaled(2, n), n), n)
    }

    /// `(1 - cosh(z/2)) / (2 sinh(z/2)) = -tanh(z/4)/2`, the regular odd
    /// quotient (one factor of `z` cancels top and bottom).
    pub fn one_minus_cosh_over_two_sinh(n: usize) -> Vec<Rational> {
        let mut num = cosh_scaled(2, n + 1);
        for c in num.iter_mut() {
            *c = -c.clone();
        }
        num[0] += &Rational::one();
        let den = shift_down(&sinh_scaled(2, n + 2), 1)
            .iter()
            .map(|c| c * &Rational::from_int(2))
            .collect::<Vec<_>>();
        mul(&shift_down(&num, 1), &invert(&den, n + 1), n)
    }

    /// `(e^z + e^{-z} - 2)(1 + 2 cosh(z/2)) / (2 sinh(z/2))`, regular.
    pub fn euler_bracket_tail(n: usize) -> Vec<Rational> {
        let mut two_cosh_minus_two = cosh_scaled(1, n + 2)
            .iter()
            .map(|c| c * &Rational::from_int(2))
            .collect::<Vec<_>>();
        two_cosh_minus_two[0] -= &Rational::from_int(2);
        let mut one_plus = cosh_scaled(2, n + 2).iter().map(|c| c * &Rational::from_int(2)).collect::<Vec<_>>();
        one_plus[0] += &Rational::one();
        let num = mul(&two_cosh_minus_two, &one_plus, n + 2);
        let den = shift_down(&sinh_scaled(2, n + 3), 1)
            .iter()
            .map(|c| c * &Rational::from_int(2))
            .collect::<Vec<_>>();
        mul(&shift_down(&num, 1), &invert(&den, n + 1), n)
    }
}

// ---------------------------------------------------------------------------
// Hirzebruch forms
// ---------------------------------------------------------------------------

fn apply_taylor_all_roots(table: &[Rational], config: RingConfig) -> Result<GradedPoly, CharformError> {
    let mut acc = GradedPoly::one(config);
    for j in 0..config.roots {
        let root = GradedPoly::var(config, Var::Root(j))?;
        acc = acc.mul(&apply_series(|k| table[k as usize].clone(), &root)?);
    }
    Ok(acc)
}

/// Multiplicative form with root factor `(a/2)/sinh(a/2)`; constant term 1.
pub fn a_hat(config: RingConfig) -> Result<GradedPoly, CharformError> {
    apply_taylor_all_roots(&taylor::a_hat_root(config.cutoff as usize), config)
}

/// Multiplicative form with root factor `a/tanh(a/2)`; constant term `2^d`.
pub fn l_hat(config: RingConfig) -> Result<GradedPoly, CharformError> {
    apply_taylor_all_roots(&taylor::l_hat_root(config.cutoff as usize), config)
}

/// Apply a Taylor table to one ring variable.
pub fn apply_to_var(table: &[Rational], config: RingConfig, var: Var) -> Result<GradedPoly, CharformError> {
    let v = GradedPoly::var(config, var)?;
    Ok(apply_series(|k| table[k as usize].clone(), &v)?)
}

// ---------------------------------------------------------------------------
// Virtual bundles and their Chern characters
// ---------------------------------------------------------------------------

/// Formal bundle atoms: the tangent root pairs, the two rank-two Euler
/// bundles, and trivial summands.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BundleAtom {
    /// Root pairs `(+a_j, -a_j)` for every ring root; rank `2 * roots`.
    Tangent,
    /// Roots `(+c0, -c0)`.
    Xi0,
    /// Roots `(+c, -c)`.
    Xi,
    /// `r` zero roots.
    Trivial(u32),
}

impl BundleAtom {
    fn rank(self, config: RingConfig) -> i64 {
        match self {
            BundleAtom::Tangent => 2 * config.roots as i64,
            BundleAtom::Xi0 | BundleAtom::Xi => 2,
            BundleAtom::Trivial(r) => r as i64,
        }
    }

    fn roots(self, config: RingConfig) -> Vec<Option<(Var, bool)>> {
        match self {
            BundleAtom::Tangent => (0..config.roots)
                .flat_map(|j| [Some((Var::Root(j), false)), Some((Var::Root(j), true))])
                .collect(),
            BundleAtom::Xi0 => vec![Some((Var::C0, false)), Some((Var::C0, true))],
            BundleAtom::Xi => vec![Some((Var::C, false)), Some((Var::C, true))],
            BundleAtom::Trivial(r) => vec![None; r as usize],
        }
    }
}

/// Formal difference of sums of atoms.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct VirtualBundle {
    pub positive: Vec<BundleAtom>,
    pub negative: Vec<BundleAtom>,
}

impl VirtualBundle {
    pub fn rank(&self, config: RingConfig) -> i64 {
        let pos: i64 = self.positive.iter().map(|a| a.rank(config)).sum();
        let neg: i64 = self.negative.iter().map(|a| a.rank(config)).sum();
        pos - neg
    }

    /// `E - dim E` for a single atom.
    pub fn reduced(atom: BundleAtom, config: RingConfig) -> Self {
        let rank = atom.rank(config) as u32;
        VirtualBundle {
            positive: vec![atom],
            negative: vec![BundleAtom::Trivial(rank)],
        }
    }

    pub fn plus(mut self, other: &VirtualBundle) -> Self {
        self.positive.extend(other.positive.iter().copied());
        self.negative.extend(other.negative.iter().copied());
        self
    }

    pub fn minus(mut self, other: &VirtualBundle) -> Self {
        self.positive.extend(other.negative.iter().copied());
        self.negative.extend(other.positive.iter().copied());
        self
    }

    pub fn scaled(self, times: u32) -> Self {
        let mut out = VirtualBundle::default();
        for _ in 0..times {
            out = out.plus(&self);
        }
        out
    }

    /// Plain Chern character `sum e^{omega}` over the formal roots.
    pub fn ch(&self, config: RingConfig) -> Result<GradedPoly, CharformError> {
        let mut acc = GradedPoly::zero(config);
        for (atoms, negate) in [(&self.positive, false), (&self.negative, true)] {
            for atom in atoms.iter() {
                for root in atom.roots(config) {
                    let e = exp_root(config, root)?;
                    acc = if negate { acc.sub(&e) } else { acc.add(&e) };
                }
            }
        }
        Ok(acc)
    }
}

fn exp_root(config: RingConfig, root: Option<(Var, bool)>) -> Result<GradedPoly, CharformError> {
    match root {
        None => Ok(GradedPoly::one(config)),
        Some((var, negate)) => Ok(exp_var(config, var, negate)?),
    }
}

fn lift_scalar(s: &QSeries<Rational>, config: RingConfig) -> QSeries<GradedPoly> {
    s.map(GradedPoly::zero(config), |c| GradedPoly::constant(config, c.clone()))
}

/// `ch` of the total exterior power at `t = sign * q^h` applied to a virtual
/// bundle: `prod_pos (1 + sign e^w q^h) / prod_neg (...)`.
pub fn ch_lambda(
    bundle: &VirtualBundle,
    sign: i64,
    h: HalfInt,
    config: RingConfig,
    order: HalfInt,
) -> Result<QSeries<GradedPoly>, CharformError> {
    let mut acc = QSeries::constant(order, GradedPoly::one(config));
    if h > order {
        return Ok(acc);
    }
    let sgn = Rational::from_int(sign);
    for (atoms, inverted) in [(&bundle.positive, false), (&bundle.negative, true)] {
        for atom in atoms.iter() {
            for root in atom.roots(config) {
                let e = exp_root(config, root)?.scale(&sgn);
                let factor = QSeries::from_terms(
                    order,
                    GradedPoly::zero(config),
                    [(HalfInt::ZERO, GradedPoly::one(config)), (h, e)],
                );
                let factor = if inverted { factor.invert()? } else { factor };
                acc = acc.mul(&factor);
            }
        }
    }
    Ok(acc)
}

/// `ch` of the total symmetric power at `t = q^h`: `S_t = 1/Lambda_{-t}`.
pub fn ch_symmetric(
    bundle: &VirtualBundle,
    h: HalfInt,
    config: RingConfig,
    order: HalfInt,
) -> Result<QSeries<GradedPoly>, CharformError> {
    Ok(ch_lambda(bundle, -1, h, config, order)?.invert()?)
}

// ---------------------------------------------------------------------------
// Twist bundles
// ---------------------------------------------------------------------------

/// Which multiplicative twist bundle to expand.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ThetaVariant {
    Theta1,
    Theta2,
    Theta3,
    /// `Theta1` with the base augmented by the reduced `xi`.
    Theta1Augmented,
    /// `Theta2` with the base augmented by the reduced `xi`.
    Theta2Augmented,
}

/// Specification of one twist bundle: variant, number of reduced `xi0`
/// summands subtracted from the base, and whether the `xi` slot holds the
/// real bundle or a trivial plane.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ThetaBundleSpec {
    pub variant: ThetaVariant,
    pub m0: u32,
    pub with_xi: bool,
}

impl ThetaBundleSpec {
    fn base(&self, config: RingConfig) -> VirtualBundle {
        let mut base = VirtualBundle::reduced(BundleAtom::Tangent, config)
            .minus(&VirtualBundle::reduced(BundleAtom::Xi0, config).scaled(self.m0));
        if matches!(self.variant, ThetaVariant::Theta1Augmented | ThetaVariant::Theta2Augmented) {
            base = base.plus(&VirtualBundle::reduced(BundleAtom::Xi, config));
        }
        base
    }

    fn xi_term(&self, config: RingConfig) -> VirtualBundle {
        if self.with_xi {
            VirtualBundle::reduced(BundleAtom::Xi, config)
        } else {
            VirtualBundle::default()
        }
    }
}

/// Direct multiplicative expansion of the Chern character of the twist
/// bundle: the brute-force path of the dual-path oracle. Its `q^{j/2}`
/// coefficient is the Chern character of the j-th coefficient bundle.
pub fn ch_theta_bundle(
    spec: ThetaBundleSpec,
    config: RingConfig,
    order: HalfInt,
) -> Result<QSeries<GradedPoly>, CharformError> {
    let base = spec.base(config);
    let xi = spec.xi_term(config);
    let base_minus_two_xi = base.clone().minus(&xi).minus(&xi);

    let mut acc = QSeries::constant(order, GradedPoly::one(config));

    // symmetric factors at integer powers
    let mut k = 1i64;
    while HalfInt::from_int(k) <= order {
        acc = acc.mul(&ch_symmetric(&base, HalfInt::from_int(k), config, order)?);
        k += 1;
    }

    // exterior factors
    match spec.variant {
        ThetaVariant::Theta1 | ThetaVariant::Theta1Augmented => {
            let mut k = 1i64;
            while HalfInt::from_int(k) <= order {
                acc = acc.mul(&ch_lambda(&base_minus_two_xi, 1, HalfInt::from_int(k), config, order)?);
                k += 1;
            }
            let mut k = 1i64;
            while HalfInt::half(2 * k - 1) <= order {
                let h = HalfInt::half(2 * k - 1);
                acc = acc.mul(&ch_lambda(&xi, 1, h, config, order)?);
                acc = acc.mul(&ch_lambda(&xi, -1, h, config, order)?);
                k += 1;
            }
        }
        ThetaVariant::Theta2 | ThetaVariant::Theta2Augmented => {
            let mut k = 1i64;
            while HalfInt::half(2 * k - 1) <= order {
                acc = acc.mul(&ch_lambda(&base_minus_two_xi, -1, HalfInt::half(2 * k - 1), config, order)?);
                k += 1;
            }
            let mut k = 1i64;
            while HalfInt::half(2 * k - 1) <= order {
                acc = acc.mul(&ch_lambda(&xi, 1, HalfInt::half(2 * k - 1), config, order)?);
                k += 1;
            }
            let mut k = 1i64;
            while HalfInt::from_int(k) <= order {
                acc = acc.mul(&ch_lambda(&xi, 1, HalfInt::from_int(k), config, order)?);
                k += 1;
            }
        }
        ThetaVariant::Theta3 => {
            let mut k = 1i64;
            while HalfInt::half(2 * k - 1) <= order {
                acc = acc.mul(&ch_lambda(&base, 1, HalfInt::half(2 * k - 1), config, order)?);
                k += 1;
            }
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Coefficient-bundle patterns
// ---------------------------------------------------------------------------

/// Symbolic shape of a coefficient-bundle Chern character:
/// `constant + ch_t * ch(T_C M) + y0 * (e^{c0}+e^{-c0}-2) + y * (e^c+e^{-c}-2)`.
#[derive(Clone, PartialEq, Debug)]
pub struct BundlePattern {
    pub constant: Rational,
    pub ch_t: Rational,
    pub y0: Rational,
    pub y: Rational,
}

impl BundlePattern {
    pub fn zero() -> Self {
        BundlePattern {
            constant: Rational::zero(),
            ch_t: Rational::zero(),
            y0: Rational::zero(),
            y: Rational::zero(),
        }
    }

    /// Evaluate in the ring. `tangent_rank` is the rank of the unreduced
    /// complexified tangent bundle (`2 * roots` in the even setting,
    /// `2 * roots + 1` when one zero eigenvalue is present).
    pub fn eval(&self, config: RingConfig, tangent_rank: i64) -> Result<GradedPoly, CharformError> {
        let mut acc = GradedPoly::constant(config, self.constant.clone());
        if !self.ch_t.is_zero() {
            let mut ch_t = GradedPoly::constant(config, Rational::from_int(tangent_rank - 2 * config.roots as i64));
            for j in 0..config.roots {
                ch_t = ch_t
                    .add(&exp_var(config, Var::Root(j), false)?)
                    .add(&exp_var(config, Var::Root(j), true)?);
            }
            acc = acc.add(&ch_t.scale(&self.ch_t));
        }
        for (coeff, var) in [(&self.y0, Var::C0), (&self.y, Var::C)] {
            if coeff.is_zero() {
                continue;
            }
            let mut p = exp_var(config, var, false)?.add(&exp_var(config, var, true)?);
            p = p.sub(&GradedPoly::constant(config, Rational::from_int(2)));
            acc = acc.add(&p.scale(coeff));
        }
        Ok(acc)
    }

    pub fn describe(&self) -> String {
        format!(
            "{} + ({}) ch(T) + ({}) (e^c0+e^-c0-2) + ({}) (e^c+e^-c-2)",
            self.constant, self.ch_t, self.y0, self.y
        )
    }
}

/// The `q^(1/2)` coefficient bundle of a twist bundle, derived from the
/// defining product: only the first exterior factor and the first half-power
/// tails contribute.
///
/// `tangent_rank` enters through the reduction `T - dim T`.
pub fn b1_pattern(spec: ThetaBundleSpec, tangent_rank: i64) -> BundlePattern {
    let m0 = Rational::from_int(spec.m0 as i64);
    match spec.variant {
        // the two opposite-sign half-power tails cancel
        ThetaVariant::Theta1 | ThetaVariant::Theta1Augmented => BundlePattern::zero(),
        ThetaVariant::Theta2 => BundlePattern {
            constant: Rational::from_int(tangent_rank),
            ch_t: -Rational::one(),
            y0: m0,
            y: Rational::from_int(if spec.with_xi { 3 } else { 0 }),
        },
        ThetaVariant::Theta2Augmented => BundlePattern {
            constant: Rational::from_int(tangent_rank),
            ch_t: -Rational::one(),
            y0: m0,
            y: Rational::from_int(if spec.with_xi { 2 } else { -1 }),
        },
        ThetaVariant::Theta3 => BundlePattern {
            constant: Rational::from_int(-tangent_rank),
            ch_t: Rational::one(),
            y0: -m0,
            y: Rational::zero(),
        },
    }
}

// ---------------------------------------------------------------------------
// Assembled generating functions (closed-form path)
// ---------------------------------------------------------------------------

/// Which assembled q-form to build.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum QFormKind {
    Q1,
    Q2,
    Q1Primed,
    Q2Primed,
}

/// `2n + (1-(-1)^d)/2`: the twist multiplicity of the unprimed forms.
pub fn twist_multiplicity(d: u32, n: u32) -> u32 {
    2 * n + (d % 2)
}

/// `2n + (1+(-1)^d)/2`: the twist multiplicity of the primed forms.
pub fn twist_multiplicity_primed(d: u32, n: u32) -> u32 {
    2 * n + 1 - (d % 2)
}

/// Modular weight hypothesis of the unprimed forms: `d - m0 > 0`.
pub fn check_hypothesis(d: u32, n: u32) -> Result<u32, CharformError> {
    let m0 = twist_multiplicity(d, n);
    if d as i64 - m0 as i64 > 0 {
        Ok(m0)
    } else {
        Err(CharformError::Hypothesis(format!(
            "d - (2n + (1-(-1)^d)/2) = {} - {} = {} must be > 0",
            d,
            m0,
            d as i64 - m0 as i64
        )))
    }
}

/// Hypothesis of the primed forms: `d - 1 - m0' > 0`.
pub fn check_hypothesis_primed(d: u32, n: u32) -> Result<u32, CharformError> {
    let m0 = twist_multiplicity_primed(d, n);
    if d as i64 - 1 - m0 as i64 > 0 {
        Ok(m0)
    } else {
        Err(CharformError::Hypothesis(format!(
            "d - 1 - (2n + (1+(-1)^d)/2) = {} - 1 - {} = {} must be > 0",
            d,
            m0,
            d as i64 - 1 - m0 as i64
        )))
    }
}

/// Options for [`q_form`].
#[derive(Clone, Copy, Debug)]
#[derive(Default)]
pub struct QFormOptions {
    /// Replace the `xi` bundle by a trivial plane (sets `c = 0`).
    pub xi_trivial: bool,
    /// Degree cutoff override (defaults to `d`).
    pub cutoff: Option<u32>,
}


/// Assemble one generating function entirely from normalized theta ratios.
///
/// All transcendental prefactors have cancelled in the normalization, so the
/// result is an exact q-series of graded polynomials. Errors name the violated
/// hypothesis inequality when `(d, n)` is out of range.
pub fn q_form(
    kind: QFormKind,
    d: u32,
    n: u32,
    order: HalfInt,
    options: QFormOptions,
) -> Result<QSeries<GradedPoly>, CharformError> {
    let config = RingConfig::new(d, options.cutoff.unwrap_or(d), false)?;
    let var_order = config.cutoff as usize + 2;

    match kind {
        QFormKind::Q1 | QFormKind::Q2 => {
            let m0 = check_hypothesis(d, n)?;
            let (root_kind, euler_kind, c_kinds) = match kind {
                // per-root theta1 ratios; c-factors theta1^{-2} theta3 theta2
                QFormKind::Q1 => (ThetaKind::Theta1, ThetaKind::Theta1, (ThetaKind::Theta1, ThetaKind::Theta2)),
                // per-root theta2 ratios; c-factors theta2^{-2} theta3 theta1
                QFormKind::Q2 => (ThetaKind::Theta2, ThetaKind::Theta2, (ThetaKind::Theta2, ThetaKind::Theta1)),
                _ => unreachable!(),
            };
            let mut acc = symmetric_product(&per_root_factor(root_kind, var_order, order)?, config)?;
            if m0 > 0 {
                let euler = euler_factor(euler_kind, var_order, order)?.pow(m0);
                acc = acc.mul(&euler.substitute(config, Var::C0)?);
            }
            if !options.xi_trivial {
                let (inv_kind, other) = c_kinds;
                let c_block = crate::theta::normalized_ratio(
                    crate::theta::RatioRole::InverseRatio(inv_kind),
                    var_order,
                    order,
                )?
                .series
                .pow(2)
                .mul(&crate::theta::normalized_ratio(crate::theta::RatioRole::Ratio(ThetaKind::Theta3), var_order, order)?.series)
                .mul(&crate::theta::normalized_ratio(crate::theta::RatioRole::Ratio(other), var_order, order)?.series);
                acc = acc.mul(&c_block.substitute(config, Var::C)?);
            }
            if kind == QFormKind::Q1 {
                acc = acc.scale(&GradedPoly::constant(config, Rational::pow2(d as i64)));
            }
            Ok(acc)
        }
        QFormKind::Q1Primed | QFormKind::Q2Primed => {
            let m0 = check_hypothesis_primed(d, n)?;
            if options.xi_trivial {
                return Err(CharformError::InvalidSpec(
                    "the primed forms are built around the xi difference; xi cannot be trivial".to_string(),
                ));
            }
            let (root_kind, scale) = match kind {
                QFormKind::Q1Primed => (ThetaKind::Theta1, Rational::pow2(d as i64)),
                QFormKind::Q2Primed => (ThetaKind::Theta2, Rational::new(1, 2).unwrap()),
                _ => unreachable!(),
            };
            let mut acc = symmetric_product(&per_root_factor(root_kind, var_order, order)?, config)?;
            if m0 > 0 {
                let euler = euler_factor(root_kind, var_order, order)?.pow(m0);
                acc = acc.mul(&euler.substitute(config, Var::C0)?);
            }
            acc = acc.mul(&primed_c_block(root_kind, var_order, order)?.substitute(config, Var::C)?);
            Ok(acc.scale(&GradedPoly::constant(config, scale)))
        }
    }
}

/// The c-dependent block of the primed forms:
/// `(ratio_k(c) - inv_k(c) ratio_3(c) ratio_other(c)) / euler_kernel(c)`.
///
/// The bracket vanishes to second order at `c = 0` and the kernel to first,
/// so the quotient is an honest odd power series; the division happens in the
/// univariate layer where it is exact.
fn primed_c_block(kind: ThetaKind, var_order: usize, order: HalfInt) -> Result<RootExpansion, CharformError> {
    use crate::theta::{normalized_ratio, RatioRole};
    let other = match kind {
        ThetaKind::Theta1 => ThetaKind::Theta2,
        ThetaKind::Theta2 => ThetaKind::Theta1,
        _ => return Err(CharformError::InvalidSpec("primed block needs theta1 or theta2".to_string())),
    };
    // one extra variable order: the division below shifts by one power
    let v = var_order + 1;
    let ratio = normalized_ratio(RatioRole::Ratio(kind), v, order)?.series;
    let inv = normalized_ratio(RatioRole::InverseRatio(kind), v, order)?.series;
    let r3 = normalized_ratio(RatioRole::Ratio(ThetaKind::Theta3), v, order)?.series;
    let ro = normalized_ratio(RatioRole::Ratio(other), v, order)?.series;
    let bracket = ratio.sub(&inv.mul(&r3).mul(&ro));
    let euler = normalized_ratio(RatioRole::EulerKernel, v, order)?.series;
    let quotient = bracket.div_var_pow(1)?.mul(&euler.div_var_pow(1)?.invert()?);
    Ok(quotient)
}

/// The measure multiplying every coefficient bundle on the A-hat side:
/// `A-hat * cosh(c/2) * sinh(c0/2)^m0`.
pub fn a_hat_side_measure(config: RingConfig, m0: u32) -> Result<GradedPoly, CharformError> {
    a_hat_side_measure_opts(config, m0, false)
}

/// Same measure with the `xi` factor optionally trivialized (`cosh(c/2) -> 1`).
pub fn a_hat_side_measure_opts(config: RingConfig, m0: u32, xi_trivial: bool) -> Result<GradedPoly, CharformError> {
    let n = config.cutoff as usize;
    let mut acc = a_hat(config)?;
    if !xi_trivial {
        acc = acc.mul(&apply_to_var(&taylor::cosh_scaled(2, n), config, Var::C)?);
    }
    if m0 > 0 {
        let s = apply_to_var(&taylor::sinh_scaled(2, n), config, Var::C0)?;
        acc = acc.mul(&s.pow(m0));
    }
    Ok(acc)
}

/// Left side of the even cancellation identities, built entirely from Taylor
/// tables (independent of the theta-ratio path):
/// `L-hat / cosh(c/2)^2 * tanh(c0/2)^m0`.
pub fn l_hat_side(config: RingConfig, m0: u32, xi_trivial: bool) -> Result<GradedPoly, CharformError> {
    let n = config.cutoff as usize;
    let mut acc = l_hat(config)?;
    if !xi_trivial {
        acc = acc.mul(&apply_to_var(&taylor::inv_cosh_half_sq(n), config, Var::C)?);
    }
    if m0 > 0 {
        let t = apply_to_var(&taylor::tanh_half(n), config, Var::C0)?;
        acc = acc.mul(&t.pow(m0));
    }
    Ok(acc)
}

/// Left side of the primed identities:
/// `L-hat * tanh(c/2) * tanh(c0/2)^m0`.
pub fn l_hat_side_primed(config: RingConfig, m0: u32) -> Result<GradedPoly, CharformError> {
    let n = config.cutoff as usize;
    let mut acc = l_hat(config)?.mul(&apply_to_var(&taylor::tanh_half(n), config, Var::C)?);
    if m0 > 0 {
        let t = apply_to_var(&taylor::tanh_half(n), config, Var::C0)?;
        acc = acc.mul(&t.pow(m0));
    }
    Ok(acc)
}

/// Map every coefficient of a q-series of polynomials to one homogeneous
/// degree component.
pub fn component_series(series: &QSeries<GradedPoly>, degree: u32) -> QSeries<GradedPoly> {
    series.map(series.zero_template().clone(), |p| p.degree_component(degree))
}

/// Top-degree components of every coefficient.
pub fn top_component_series(series: &QSeries<GradedPoly>) -> QSeries<GradedPoly> {
    series.map(series.zero_template().clone(), |p| p.top_component())
}

/// Multiply a polynomial-coefficient series by a rational-coefficient one.
pub fn mul_by_scalar_series(series: &QSeries<GradedPoly>, scalar: &QSeries<Rational>, config: RingConfig) -> QSeries<GradedPoly> {
    series.mul(&lift_scalar(scalar, config))
}

#[cfg(test)]
mod tests {
    use super::*;
    
    use crate::theta::{normalized_ratio, RatioRole};

    fn q(k: i64) -> HalfInt {
        HalfInt::half(k)
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn a_hat_small_cases() {
        let config = RingConfig::new(1, 2, false).unwrap();
        let ahat = a_hat(config).unwrap();
        assert_eq!(ahat.constant_term(), Rational::one());
        let a1sq = GradedPoly::var(config, Var::Root(0)).unwrap().pow(2);
        assert_eq!(ahat, GradedPoly::one(config).add(&a1sq.scale(&r(-1, 24))));
    }

    #[test]
    fn l_hat_constant_is_two_to_the_d() {
        for d in 1..=4u32 {
            let config = RingConfig::standard(d).unwrap();
            assert_eq!(l_hat(config).unwrap().constant_term(), Rational::pow2(d as i64));
        }
        let config = RingConfig::new(1, 2, false).unwrap();
        let lhat = l_hat(config).unwrap();
        let a1sq = GradedPoly::var(config, Var::Root(0)).unwrap().pow(2);
        assert_eq!(
            lhat,
            GradedPoly::constant(config, r(2, 1)).add(&a1sq.scale(&r(1, 6)))
        );
    }

    #[test]
    fn a_hat_matches_symmetric_product_of_root_kernel() {
        let config = RingConfig::standard(3).unwrap();
        let rk = normalized_ratio(RatioRole::RootKernel, 5, q(2)).unwrap().series;
        let via_product = symmetric_product(&rk, config).unwrap();
        assert_eq!(via_product.coefficient(q(0)).unwrap(), a_hat(config).unwrap());
    }

    #[test]
    fn ch_of_trivial_bundle_is_its_rank() {
        let config = RingConfig::standard(2).unwrap();
        let b = VirtualBundle {
            positive: vec![BundleAtom::Trivial(5)],
            negative: vec![],
        };
        assert_eq!(b.ch(config).unwrap(), GradedPoly::constant(config, r(5, 1)));
    }

    #[test]
    fn reduced_bundle_has_rank_zero() {
        let config = RingConfig::standard(3).unwrap();
        let b = VirtualBundle::reduced(BundleAtom::Tangent, config);
        assert_eq!(b.rank(config), 0);
        assert!(b.ch(config).unwrap().constant_term().is_zero());
    }

    #[test]
    fn lambda_of_reduced_xi_at_half_power() {
        // (1+e^c t)(1+e^-c t)/(1+t)^2 at t = q^{1/2}:
        // q^0 coefficient 1, q^{1/2} coefficient e^c + e^{-c} - 2
        let config = RingConfig::new(1, 3, false).unwrap();
        let xi = VirtualBundle::reduced(BundleAtom::Xi, config);
        let s = ch_lambda(&xi, 1, q(1), config, q(2)).unwrap();
        assert_eq!(s.coefficient(q(0)).unwrap(), GradedPoly::one(config));
        let expect = exp_var(config, Var::C, false)
            .unwrap()
            .add(&exp_var(config, Var::C, true).unwrap())
            .sub(&GradedPoly::constant(config, r(2, 1)));
        assert_eq!(s.coefficient(q(1)).unwrap(), expect);
    }

    #[test]
    fn symmetric_times_opposite_lambda_is_one() {
        let config = RingConfig::new(1, 2, false).unwrap();
        let xi = VirtualBundle::reduced(BundleAtom::Xi, config);
        let s = ch_symmetric(&xi, q(2), config, q(6)).unwrap();
        let l = ch_lambda(&xi, -1, q(2), config, q(6)).unwrap();
        let prod = s.mul(&l);
        assert_eq!(prod.coefficient(q(0)).unwrap(), GradedPoly::one(config));
        for t in 1..=6 {
            assert!(prod.coefficient(q(t)).unwrap().is_zero(), "q^{}", t);
        }
    }

    #[test]
    fn theta_bundle_with_all_trivial_inputs_is_one() {
        let config = RingConfig::standard(1).unwrap();
        // rank-zero base: no roots beyond the tangent, m0 = 0, xi trivial
        let spec = ThetaBundleSpec {
            variant: ThetaVariant::Theta2,
            m0: 0,
            with_xi: false,
        };
        // with d = 1 the tangent is a root pair, so only check the constant
        let s = ch_theta_bundle(spec, config, q(2)).unwrap();
        assert_eq!(s.coefficient(q(0)).unwrap(), GradedPoly::one(config));
    }

    #[test]
    fn b1_coefficient_matches_pattern() {
        // d = 6, m0 = 2, xi trivial: the first coefficient bundle of the
        // Theta2 tower is -T-tilde + 2 xi0-tilde
        let d = 6u32;
        let config = RingConfig::new(d, 2, false).unwrap();
        let spec = ThetaBundleSpec {
            variant: ThetaVariant::Theta2,
            m0: 2,
            with_xi: false,
        };
        let s = ch_theta_bundle(spec, config, q(1)).unwrap();
        let pattern = b1_pattern(spec, 2 * d as i64);
        assert_eq!(
            s.coefficient(q(1)).unwrap(),
            pattern.eval(config, 2 * d as i64).unwrap()
        );
        // and with xi present the tails contribute 3 copies of xi-tilde
        let spec_xi = ThetaBundleSpec {
            variant: ThetaVariant::Theta2,
            m0: 2,
            with_xi: true,
        };
        let s_xi = ch_theta_bundle(spec_xi, config, q(1)).unwrap();
        let pattern_xi = b1_pattern(spec_xi, 2 * d as i64);
        assert_eq!(
            s_xi.coefficient(q(1)).unwrap(),
            pattern_xi.eval(config, 2 * d as i64).unwrap()
        );
    }

    #[test]
    fn theta1_tower_has_integer_exponents_only() {
        let config = RingConfig::new(2, 2, false).unwrap();
        let spec = ThetaBundleSpec {
            variant: ThetaVariant::Theta1,
            m0: 1,
            with_xi: true,
        };
        let s = ch_theta_bundle(spec, config, q(4)).unwrap();
        for t in [1i64, 3] {
            assert!(s.coefficient(q(t)).unwrap().is_zero(), "odd half-power q^{}", t);
        }
    }

    #[test]
    fn hypothesis_violations_name_the_inequality() {
        let err = check_hypothesis(4, 2).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("must be > 0"), "{}", msg);
        assert!(msg.contains("4 - 4"), "{}", msg);
        assert!(check_hypothesis(6, 2).is_ok());
        assert!(check_hypothesis_primed(5, 2).is_err());
        assert!(check_hypothesis_primed(6, 1).is_ok());
    }

    #[test]
    fn q2_at_q0_is_the_a_hat_measure() {
        let d = 4u32;
        let n = 1u32;
        let m0 = twist_multiplicity(d, n);
        let series = q_form(QFormKind::Q2, d, n, q(2), QFormOptions::default()).unwrap();
        let config = series.zero_template().config();
        assert_eq!(
            series.coefficient(q(0)).unwrap(),
            a_hat_side_measure(config, m0).unwrap()
        );
    }

    #[test]
    fn q1_at_q0_is_the_l_hat_measure() {
        let d = 3u32;
        let n = 0u32;
        let m0 = twist_multiplicity(d, n);
        let series = q_form(QFormKind::Q1, d, n, q(2), QFormOptions::default()).unwrap();
        let config = series.zero_template().config();
        assert_eq!(
            series.coefficient(q(0)).unwrap(),
            l_hat_side(config, m0, false).unwrap()
        );
    }

    #[test]
    fn q1_with_trivial_twists_reduces_to_l_hat() {
        // even d, n = 0, xi trivial: no twist factors remain and the q^0
        // coefficient is the bare L-hat form
        let d = 4u32;
        let options = QFormOptions {
            xi_trivial: true,
            cutoff: None,
        };
        let series = q_form(QFormKind::Q1, d, 0, q(2), options).unwrap();
        let config = series.zero_template().config();
        assert_eq!(series.coefficient(q(0)).unwrap(), l_hat(config).unwrap());
    }

    #[test]
    fn primed_forms_at_q0() {
        // Q2' at q^0 must equal A-hat sinh^m0(c0/2) (1-cosh(c/2))/(2 sinh(c/2))
        let d = 4u32;
        let n = 0u32;
        let m0 = twist_multiplicity_primed(d, n);
        let series = q_form(QFormKind::Q2Primed, d, n, q(2), QFormOptions::default()).unwrap();
        let config = series.zero_template().config();
        let nmax = config.cutoff as usize;
        let mut expect = a_hat(config).unwrap();
        let s0 = apply_to_var(&taylor::sinh_scaled(2, nmax), config, Var::C0).unwrap();
        expect = expect.mul(&s0.pow(m0));
        expect = expect.mul(&apply_to_var(&taylor::one_minus_cosh_over_two_sinh(nmax), config, Var::C).unwrap());
        assert_eq!(series.coefficient(q(0)).unwrap(), expect);

        // Q1' at q^0 is the L-hat side of the primed identities
        let series1 = q_form(QFormKind::Q1Primed, d, n, q(2), QFormOptions::default()).unwrap();
        assert_eq!(
            series1.coefficient(q(0)).unwrap(),
            l_hat_side_primed(config, m0).unwrap()
        );
    }

    #[test]
    fn q_forms_are_even_and_symmetric() {
        // even in every root and in c; parity in c0 follows the twist
        // multiplicity (the assembled factor is sinh-led)
        for (d, n) in [(3u32, 0u32), (4, 1)] {
            let m0 = twist_multiplicity(d, n);
            let series = q_form(QFormKind::Q2, d, n, q(3), QFormOptions::default()).unwrap();
            for t in 0..=3i64 {
                let p = series.coefficient(q(t)).unwrap();
                for var in (0..d).map(Var::Root).chain([Var::C]) {
                    assert_eq!(p.negate_var(var).unwrap(), p, "even in {} at q^{}", var, t);
                }
                let flipped = p.negate_var(Var::C0).unwrap();
                if m0.is_multiple_of(2) {
                    assert_eq!(flipped, p, "even in c0 at q^{}", t);
                } else {
                    assert_eq!(flipped, p.neg(), "odd in c0 at q^{}", t);
                }
                assert_eq!(p.swap_roots(0, d - 1).unwrap(), p, "root swap at q^{}", t);
            }
        }
    }

    #[test]
    fn dual_path_oracle_small_case() {
        // d = 3, n = 0: Q2 assembled from theta ratios must equal the A-hat
        // measure times the direct bundle expansion, through q^{3/2}
        let d = 3u32;
        let n = 0u32;
        let order = q(3);
        let m0 = twist_multiplicity(d, n);
        let theta_path = q_form(QFormKind::Q2, d, n, order, QFormOptions::default()).unwrap();
        let config = theta_path.zero_template().config();
        let spec = ThetaBundleSpec {
            variant: ThetaVariant::Theta2,
            m0,
            with_xi: true,
        };
        let direct = ch_theta_bundle(spec, config, order).unwrap();
        let measured = direct.scale(&a_hat_side_measure(config, m0).unwrap());
        assert!(theta_path.first_mismatch(&measured, order).is_none());
    }
}
