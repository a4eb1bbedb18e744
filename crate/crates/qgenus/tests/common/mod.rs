//! Randomized property suites, shared between the dedicated property test
//! target and the acceptance suite.

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestError, TestRunner};

use qgenus::charforms::taylor;
use qgenus::expansion::{symmetric_product, RootExpansion};
use qgenus::poly::{GradedPoly, RingConfig, Var};
use qgenus::qseries::QSeries;
use qgenus::rational::{HalfInt, Rational};
use qgenus::theta::{modular_pair, normalized_ratio, RatioRole, ThetaKind};
use qgenus::verify::{basis_element, decompose};

pub struct PropertyOutcome {
    pub name: &'static str,
    pub cases: u32,
    pub failure: Option<String>,
}

impl PropertyOutcome {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=20).prop_map(|(n, d)| Rational::new(n, d).expect("positive denominator"))
}

fn qseries(order_twice: i64) -> impl Strategy<Value = QSeries<Rational>> {
    prop::collection::vec((0..=order_twice, rational()), 0..6).prop_map(move |terms| {
        QSeries::from_terms(
            HalfInt::from_twice(order_twice),
            Rational::zero(),
            terms.into_iter().map(|(t, c)| (HalfInt::from_twice(t), c)),
        )
    })
}

fn unit_qseries(order_twice: i64) -> impl Strategy<Value = QSeries<Rational>> {
    prop::collection::vec((1..=order_twice, rational()), 0..6).prop_map(move |terms| {
        let mut s = QSeries::from_terms(
            HalfInt::from_twice(order_twice),
            Rational::zero(),
            terms.into_iter().map(|(t, c)| (HalfInt::from_twice(t), c)),
        );
        s.set(HalfInt::ZERO, Rational::one());
        s
    })
}

fn graded_poly(config: RingConfig) -> impl Strategy<Value = GradedPoly> {
    let nvars = config.num_vars().min(4) as u32;
    prop::collection::vec(
        (prop::collection::vec(0u32..=2, nvars as usize), rational()),
        0..5,
    )
    .prop_map(move |terms| {
        let mut p = GradedPoly::zero(config);
        for (exps, c) in terms {
            let mut mono = GradedPoly::constant(config, c);
            for (i, e) in exps.iter().enumerate() {
                let var = if (i as u32) < config.roots {
                    Var::Root(i as u32)
                } else if i as u32 == config.roots {
                    Var::C
                } else {
                    Var::C0
                };
                for _ in 0..*e {
                    mono = mono.mul(&GradedPoly::var(config, var).expect("var exists"));
                }
            }
            p = p.add(&mono);
        }
        p
    })
}

fn run_property<S, F>(name: &'static str, cases: u32, strategy: S, test: F) -> PropertyOutcome
where
    S: Strategy,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    let failure = match runner.run(&strategy, test) {
        Ok(()) => None,
        Err(TestError::Fail(reason, _)) => Some(reason.to_string()),
        Err(TestError::Abort(reason)) => Some(format!("aborted: {}", reason)),
    };
    PropertyOutcome { name, cases, failure }
}

/// Run every randomized suite with the given case count; the default count
/// used by the callers is 256.
pub fn run_property_suites(cases: u32) -> Vec<PropertyOutcome> {
    let mut out = Vec::new();

    out.push(run_property(
        "rational field axioms",
        cases,
        (rational(), rational(), rational()),
        |(a, b, c)| {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            if !a.is_zero() {
                prop_assert_eq!(&a * &a.checked_inv().unwrap(), Rational::one());
            }
            Ok(())
        },
    ));

    out.push(run_property(
        "rational normalization idempotence",
        cases,
        (rational(), 1i64..=12),
        |(a, k)| {
            // scaling numerator and denominator by k normalizes to the same value
            let scaled = Rational::new(1, 1).unwrap();
            let _ = scaled;
            let n: Rational = format!("{}", a).parse().unwrap();
            prop_assert_eq!(&n, &a);
            let blown = &(&a * &Rational::from_int(k)) / &Rational::from_int(k);
            prop_assert_eq!(blown, a);
            Ok(())
        },
    ));

    out.push(run_property(
        "q-series ring laws",
        cases,
        (qseries(8), qseries(8), qseries(8)),
        |(a, b, c)| {
            prop_assert_eq!(a.add(&b).add(&c), a.add(&b.add(&c)));
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            Ok(())
        },
    ));

    out.push(run_property(
        "q-series inversion round trip",
        cases,
        unit_qseries(8),
        |u| {
            let inv = u.invert().expect("unit leading");
            let prod = u.mul(&inv);
            prop_assert!(prod.first_mismatch(&QSeries::one(u.order()), u.order()).is_none());
            Ok(())
        },
    ));

    out.push(run_property(
        "q-series truncation coherence",
        cases,
        (qseries(8), qseries(8), 0i64..=8),
        |(a, b, k)| {
            let k = HalfInt::from_twice(k);
            let full = a.mul(&b).truncated(k);
            let cut = a.truncated(k).mul(&b.truncated(k));
            prop_assert!(full.first_mismatch(&cut, k).is_none());
            Ok(())
        },
    ));

    let config = RingConfig::new(2, 3, false).expect("small ring");
    out.push(run_property(
        "graded ring laws",
        cases,
        (graded_poly(config), graded_poly(config), graded_poly(config)),
        |(a, b, c)| {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
            Ok(())
        },
    ));

    let wide = RingConfig::new(2, 5, false).expect("wide ring");
    out.push(run_property(
        "graded ring truncation coherence",
        cases,
        (graded_poly(wide), graded_poly(wide), 0u32..=5),
        |(a, b, k)| {
            let full = a.mul(&b).restricted(k);
            let cut = a.restricted(k).mul(&b.restricted(k));
            prop_assert_eq!(full, cut);
            Ok(())
        },
    ));

    let sym_config = RingConfig::new(3, 3, false).expect("symmetric ring");
    out.push(run_property(
        "symmetric product root-permutation invariance",
        cases,
        (
            prop::collection::vec(rational(), 3),
            prop::collection::vec((1i64..=4, rational()), 0..3),
            0u32..3,
            0u32..3,
        ),
        move |(taylor_tail, q_terms, i, j)| {
            // f = 1 + sum taylor_tail[k] z^(k+1) + q-dependent scalar terms
            let mut f = RootExpansion::one(3, HalfInt::from_twice(4));
            for (k, c) in taylor_tail.iter().enumerate() {
                f.set_coeff(k + 1, QSeries::constant(HalfInt::from_twice(4), c.clone()));
            }
            let mut scalar = f.coeff(0).clone();
            for (t, c) in q_terms {
                scalar.add_to(HalfInt::from_twice(t), &c);
            }
            f.set_coeff(0, scalar);
            let sp = symmetric_product(&f, sym_config).expect("unit leading");
            let swapped = sp.map(GradedPoly::zero(sym_config), |p| p.swap_roots(i, j).expect("roots exist"));
            prop_assert!(sp.first_mismatch(&swapped, sp.order()).is_none());
            Ok(())
        },
    ));

    out.push(run_property(
        "theta expansion parity",
        cases,
        (2usize..=6, 1i64..=4),
        |(var_order, q_twice)| {
            let q_order = HalfInt::from_twice(q_twice);
            let rk = normalized_ratio(RatioRole::RootKernel, var_order, q_order)
                .expect("root kernel builds")
                .series;
            prop_assert!(rk.is_even());
            for kind in [ThetaKind::Theta1, ThetaKind::Theta2, ThetaKind::Theta3] {
                let ratio = normalized_ratio(RatioRole::Ratio(kind), var_order, q_order)
                    .expect("ratio builds")
                    .series;
                prop_assert!(ratio.is_even());
                let kernel = normalized_ratio(RatioRole::LogDerivativeKernel(kind), var_order, q_order)
                    .expect("kernel builds")
                    .series;
                prop_assert!(kernel.is_odd());
            }
            let euler = normalized_ratio(RatioRole::EulerKernel, var_order, q_order)
                .expect("euler kernel builds")
                .series;
            prop_assert!(euler.is_odd());
            Ok(())
        },
    ));

    let dec_config = RingConfig::new(1, 1, false).expect("tiny ring");
    out.push(run_property(
        "decomposition coefficients stable under order increase",
        cases,
        (graded_poly(dec_config), graded_poly(dec_config), 0i64..=4),
        move |(h0, h1, extra)| {
            let low = HalfInt::from_twice(8);
            let high = HalfInt::from_twice(8 + 2 * extra);
            let mut solved = Vec::new();
            for order in [low, high] {
                let basis = modular_pair(2, order).expect("basis builds");
                let g0 = basis_element(&basis, 2, 0, order);
                let g1 = basis_element(&basis, 2, 1, order);
                let p = lift(&g0, dec_config).scale(&h0).add(&lift(&g1, dec_config).scale(&h1));
                let dec = decompose(&p, 2, &basis, "random in-span series").expect("window fits");
                prop_assert!(dec.residual_ok);
                prop_assert_eq!(&dec.h[0], &h0);
                prop_assert_eq!(&dec.h[1], &h1);
                solved.push(dec.h);
            }
            prop_assert_eq!(&solved[0], &solved[1]);
            Ok(())
        },
    ));

    // closed-form Taylor tables stay in lockstep with the series layer
    out.push(run_property(
        "hirzebruch taylor tables match series inversion",
        cases,
        2usize..=8,
        |n| {
            let a_hat = taylor::a_hat_root(n);
            let sinh = taylor::sinh_scaled(2, n + 1);
            let over_z: Vec<Rational> = taylor::shift_down(&sinh, 1)
                .iter()
                .map(|c| c * &Rational::from_int(2))
                .collect();
            let product = taylor::mul(&a_hat, &over_z, n);
            prop_assert!(product[0].is_one());
            for c in &product[1..] {
                prop_assert!(c.is_zero());
            }
            Ok(())
        },
    ));

    out
}

fn lift(s: &QSeries<Rational>, config: RingConfig) -> QSeries<GradedPoly> {
    s.map(GradedPoly::zero(config), |c| GradedPoly::constant(config, c.clone()))
}

/// Draw one random value from a strategy (used for spot checks).
#[allow(dead_code)]
pub fn sample<S: Strategy>(strategy: S) -> S::Value {
    let mut runner = TestRunner::deterministic();
    strategy.new_tree(&mut runner).expect("tree").current()
}
