//! Command-line front end: expansion dumps, verification drivers, and JSON
//! report emission.
//!
//! Exit codes: `0` when no check failed (paper-discrepancy notes do not fail
//! a run), `1` when any check failed, `2` on usage errors such as violated
//! hypothesis inequalities.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::charforms::{self, CharformError, QFormKind, QFormOptions};
use crate::cs::{self, CsKind};
use crate::expansion::{poly_qseries_to_json, qseries_to_json};
use crate::poly::RingConfig;
use crate::qseries::DEFAULT_ORDER_TWICE;
use crate::rational::HalfInt;
use crate::report::{CheckEntry, VerificationReport};
use crate::theta::{self, numeric, RatioRole, ThetaKind};
use crate::verify::{self, VerifyError};

/// Environment variable overriding the default truncation order
/// (in half-powers of q).
pub const ORDER_ENV: &str = "QGENUS_ORDER";

#[derive(Parser, Debug)]
#[command(
    name = "qgenus",
    version,
    about = "Exact verification of twisted anomaly cancellation identities",
    long_about = "Reconstructs theta-function q-expansions and characteristic-form \
generating functions in exact rational arithmetic, decomposes them over the \
level-2 modular basis, and machine-checks the resulting cancellation \
identities. A numeric evaluator cross-checks the theta transformation laws."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Emit the report as JSON instead of human-readable text
    #[arg(long)]
    pub json: bool,
    /// Write the report (JSON) to a file
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the q-expansion of a named object as JSON
    Expand {
        /// Object name; see `expand --object list`
        #[arg(long)]
        object: String,
        /// Root-variable count / dimension parameter, where required
        #[arg(long)]
        d: Option<u32>,
        /// Twist parameter, where required
        #[arg(long)]
        n: Option<u32>,
        /// Truncation order in half-powers of q (default 8, env QGENUS_ORDER)
        #[arg(long)]
        order: Option<i64>,
        /// Highest retained power of the root variable for univariate expansions
        #[arg(long, default_value_t = 8)]
        var_order: usize,
        /// Write the JSON to a file instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify an even-dimensional cancellation identity
    VerifyEven {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        order: Option<i64>,
        /// Verify the primed (difference-bundle) variant instead
        #[arg(long)]
        primed: bool,
        /// Replace the xi bundle by a trivial plane
        #[arg(long)]
        trivial_xi: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Verify an odd-dimensional (transgressed) identity
    VerifyOdd {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        order: Option<i64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Verify a registered corollary by equation id (e.g. 3.23)
    VerifyCorollary {
        #[arg(long)]
        id: String,
        #[arg(long)]
        order: Option<i64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Numeric checks of the transformation laws and formal/numeric agreement
    CheckNumeric {
        /// Sample points in the upper half plane, as "re,im" (repeatable)
        #[arg(long)]
        tau: Vec<String>,
        /// Argument for the function-valued laws, as "re,im"
        #[arg(long)]
        v: Option<String>,
        /// Number of product terms in the numeric evaluator
        #[arg(long, default_value_t = 40)]
        terms: u32,
        /// Absolute tolerance for the transformation laws
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        order: Option<i64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the full check registry
    All {
        #[arg(long)]
        order: Option<i64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 40)]
        terms: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn resolve_order(flag: Option<i64>) -> HalfInt {
    let twice = flag
        .or_else(|| {
            std::env::var(ORDER_ENV)
                .ok()
                .and_then(|s| s.trim().parse::<i64>().ok())
        })
        .unwrap_or(DEFAULT_ORDER_TWICE);
    HalfInt::from_twice(twice.max(0))
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"re,im\", got {:?}", s))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("bad real part {:?}: {}", re, e))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("bad imaginary part {:?}: {}", im, e))?;
    Ok(Complex64::new(re, im))
}

const DEFAULT_TOL: f64 = 1e-9;
const CROSSCHECK_TOL: f64 = 1e-8;

/// Everything `expand` can name.
pub const EXPAND_OBJECTS: &[&str] = &[
    "delta1", "eps1", "delta2", "eps2", "delta3", "eps3", "theta1-const", "theta2-const",
    "theta3-const", "theta-prime-const", "jacobi-lhs", "jacobi-rhs", "root-kernel", "ratio1",
    "ratio2", "ratio3", "inv-ratio1", "inv-ratio2", "inv-ratio3", "euler-kernel", "kernel1",
    "kernel2", "kernel3", "a-hat", "l-hat", "Q1", "Q2", "Q1p", "Q2p", "ch-theta1", "ch-theta2",
    "ch-theta3", "phi-L", "phi-W", "phi-Wp",
];

fn expand_object(
    object: &str,
    d: Option<u32>,
    n: Option<u32>,
    order: HalfInt,
    var_order: usize,
) -> Result<serde_json::Value, String> {
    let need_d = || d.ok_or_else(|| format!("object {:?} needs --d", object));
    let need_n = || n.ok_or_else(|| format!("object {:?} needs --n", object));
    let level_pair = |level: u32| theta::modular_pair(level, order).map_err(|e| e.to_string());
    let ratio = |role: RatioRole| {
        theta::normalized_ratio(role, var_order, order)
            .map(|t| t.series.to_json())
            .map_err(|e| e.to_string())
    };
    let q_form_json = |kind: QFormKind| -> Result<serde_json::Value, String> {
        let d = need_d()?;
        let n = need_n()?;
        charforms::q_form(kind, d, n, order, QFormOptions::default())
            .map(|s| poly_qseries_to_json(&s))
            .map_err(|e| e.to_string())
    };
    let phi_json = |kind: CsKind| -> Result<serde_json::Value, String> {
        let d = need_d()?;
        let n = need_n()?;
        let phi = cs::phi_form(kind, d, n, order).map_err(|e| e.to_string())?;
        Ok(serde_json::json!({
            "sqrt2_power": phi.sqrt2_pow,
            "series": poly_qseries_to_json(&phi.series),
        }))
    };
    let direct_json = |variant: charforms::ThetaVariant| -> Result<serde_json::Value, String> {
        let d = need_d()?;
        let m0 = charforms::twist_multiplicity(d, n.unwrap_or(0));
        let config = RingConfig::standard(d).map_err(|e| e.to_string())?;
        let spec = charforms::ThetaBundleSpec {
            variant,
            m0,
            with_xi: true,
        };
        charforms::ch_theta_bundle(spec, config, order)
            .map(|s| poly_qseries_to_json(&s))
            .map_err(|e| e.to_string())
    };

    match object {
        "delta1" => Ok(qseries_to_json(&level_pair(1)?.delta)),
        "eps1" => Ok(qseries_to_json(&level_pair(1)?.epsilon)),
        "delta2" => Ok(qseries_to_json(&level_pair(2)?.delta)),
        "eps2" => Ok(qseries_to_json(&level_pair(2)?.epsilon)),
        "delta3" => Ok(qseries_to_json(&level_pair(3)?.delta)),
        "eps3" => Ok(qseries_to_json(&level_pair(3)?.epsilon)),
        "theta1-const" => Ok(qseries_to_json(
            &theta::theta_constant(ThetaKind::Theta1, order).map_err(|e| e.to_string())?,
        )),
        "theta2-const" => Ok(qseries_to_json(
            &theta::theta_constant(ThetaKind::Theta2, order).map_err(|e| e.to_string())?,
        )),
        "theta3-const" => Ok(qseries_to_json(
            &theta::theta_constant(ThetaKind::Theta3, order).map_err(|e| e.to_string())?,
        )),
        "theta-prime-const" => Ok(qseries_to_json(&theta::theta_prime_constant(order))),
        "jacobi-lhs" => Ok(qseries_to_json(&theta::jacobi_sides(order).0)),
        "jacobi-rhs" => Ok(qseries_to_json(&theta::jacobi_sides(order).1)),
        "root-kernel" => ratio(RatioRole::RootKernel),
        "ratio1" => ratio(RatioRole::Ratio(ThetaKind::Theta1)),
        "ratio2" => ratio(RatioRole::Ratio(ThetaKind::Theta2)),
        "ratio3" => ratio(RatioRole::Ratio(ThetaKind::Theta3)),
        "inv-ratio1" => ratio(RatioRole::InverseRatio(ThetaKind::Theta1)),
        "inv-ratio2" => ratio(RatioRole::InverseRatio(ThetaKind::Theta2)),
        "inv-ratio3" => ratio(RatioRole::InverseRatio(ThetaKind::Theta3)),
        "euler-kernel" => ratio(RatioRole::EulerKernel),
        "kernel1" => ratio(RatioRole::LogDerivativeKernel(ThetaKind::Theta1)),
        "kernel2" => ratio(RatioRole::LogDerivativeKernel(ThetaKind::Theta2)),
        "kernel3" => ratio(RatioRole::LogDerivativeKernel(ThetaKind::Theta3)),
        "a-hat" => {
            let config = RingConfig::standard(need_d()?).map_err(|e| e.to_string())?;
            charforms::a_hat(config).map(|p| p.to_json()).map_err(|e| e.to_string())
        }
        "l-hat" => {
            let config = RingConfig::standard(need_d()?).map_err(|e| e.to_string())?;
            charforms::l_hat(config).map(|p| p.to_json()).map_err(|e| e.to_string())
        }
        "Q1" => q_form_json(QFormKind::Q1),
        "Q2" => q_form_json(QFormKind::Q2),
        "Q1p" => q_form_json(QFormKind::Q1Primed),
        "Q2p" => q_form_json(QFormKind::Q2Primed),
        "ch-theta1" => direct_json(charforms::ThetaVariant::Theta1),
        "ch-theta2" => direct_json(charforms::ThetaVariant::Theta2),
        "ch-theta3" => direct_json(charforms::ThetaVariant::Theta3),
        "phi-L" => phi_json(CsKind::L),
        "phi-W" => phi_json(CsKind::W),
        "phi-Wp" => phi_json(CsKind::WPrime),
        "list" => Ok(serde_json::json!(EXPAND_OBJECTS)),
        other => Err(format!(
            "unknown object {:?}; use --object list to see the catalog",
            other
        )),
    }
}

/// Convert a verification error into either a skip entry (order too small)
/// or a fatal usage error.
fn entry_or_skip(id: &str, paper_ref: &str, result: Result<CheckEntry, VerifyError>) -> Result<CheckEntry, VerifyError> {
    match result {
        Err(VerifyError::OrderTooSmall { needed, got }) => Ok(CheckEntry::new(id, paper_ref).skip(format!(
            "needs order >= {} half-powers, run has {}",
            needed, got
        ))),
        other => other,
    }
}

/// The full check registry at one truncation order.
pub fn run_all(order: HalfInt, tol: f64, terms: u32) -> Result<VerificationReport, VerifyError> {
    let mut report = VerificationReport::new();
    report.set_config("command", "all");
    report.set_config("order", order);
    report.set_config("tol", tol);
    report.set_config("terms", terms);

    report.add(theta::jacobi_identity_check(order));

    let taus = numeric::default_taus();
    report.extend(numeric::transformation_suite(&taus, numeric::default_v(), terms, tol)?);
    // the crosscheck compares truncated series against exact products, so it
    // needs enough depth for the truncation error to sit below tolerance
    let crosscheck_order = order.max(HalfInt::from_twice(DEFAULT_ORDER_TWICE));
    report.extend(numeric::formal_numeric_crosscheck(
        crosscheck_order,
        Complex64::new(0.0, 2.0),
        terms,
        CROSSCHECK_TOL,
    )?);

    // the dual-path oracle is specified through q^(3/2)
    let dual_order = order.min(HalfInt::half(3));
    for (d, n) in [(3u32, 0u32), (4, 0), (4, 1)] {
        report.add(verify::dual_path_check(d, n, dual_order)?);
    }

    for (d, n) in [(5u32, 0u32), (5, 1), (6, 1), (6, 2)] {
        let id = format!("theorem-even-d{}-n{}", d, n);
        let entry = entry_or_skip(
            &id,
            "Theorem 3.1 / Eq. 3.3",
            verify::run_theorem_even(d, n, order, false).map(|(e, _)| e),
        )?;
        report.add(entry);
    }

    for (d, n) in [(5u32, 1u32), (6, 1)] {
        let id = format!("theorem-primed-d{}-n{}", d, n);
        let entry = entry_or_skip(
            &id,
            "Theorem 3.7 / Eq. 3.33",
            verify::run_theorem_primed(d, n, order).map(|(e, _)| e),
        )?;
        report.add(entry);
    }

    for (d, n) in [(4u32, 1u32), (5, 0), (6, 1)] {
        let id = format!("odd-d{}-n{}", d, n);
        let entry = entry_or_skip(&id, "Theorem 4.1", cs::verify_odd_case(d, n, order))?;
        report.add(entry);
    }

    for (id, paper_ref, _) in verify::corollary_registry() {
        let entry = entry_or_skip(
            &format!("corollary-{}", id),
            paper_ref,
            verify::verify_corollary(id, order),
        )?;
        report.add(entry);
    }

    report.normalize();
    Ok(report)
}

fn emit_report(report: &VerificationReport, output: &OutputArgs) -> Result<(), String> {
    let json = report.to_json_string();
    if let Some(path) = &output.out {
        std::fs::write(path, &json).map_err(|e| format!("cannot write {}: {}", path.display(), e))?;
        if !output.json {
            print!("{}", report.human_readable());
            println!("report written to {}", path.display());
        }
    } else if output.json {
        println!("{}", json);
    } else {
        print!("{}", report.human_readable());
    }
    Ok(())
}

fn usage_error(message: impl std::fmt::Display) -> i32 {
    eprintln!("error: {}", message);
    2
}

fn finish(report: VerificationReport, output: &OutputArgs) -> i32 {
    match emit_report(&report, output) {
        Ok(()) => {
            if report.any_failed() {
                1
            } else {
                0
            }
        }
        Err(e) => usage_error(e),
    }
}

fn is_usage(err: &VerifyError) -> bool {
    matches!(
        err,
        VerifyError::Charform(CharformError::Hypothesis(_)) | VerifyError::Charform(CharformError::InvalidSpec(_))
    )
}

/// Run one parsed command; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Expand {
            object,
            d,
            n,
            order,
            var_order,
            out,
        } => {
            let order = resolve_order(order);
            match expand_object(&object, d, n, order, var_order) {
                Ok(value) => {
                    let text = serde_json::to_string_pretty(&value).expect("json serializes");
                    if let Some(path) = out {
                        if let Err(e) = std::fs::write(&path, text) {
                            return usage_error(format!("cannot write {}: {}", path.display(), e));
                        }
                    } else {
                        println!("{}", text);
                    }
                    0
                }
                Err(e) => usage_error(e),
            }
        }
        Command::VerifyEven {
            d,
            n,
            order,
            primed,
            trivial_xi,
            output,
        } => {
            let order = resolve_order(order);
            let result = if primed {
                verify::run_theorem_primed(d, n, order).map(|(e, _)| e)
            } else {
                verify::run_theorem_even(d, n, order, trivial_xi).map(|(e, _)| e)
            };
            match result {
                Ok(entry) => {
                    let mut report = VerificationReport::new();
                    report.set_config("command", if primed { "verify-even --primed" } else { "verify-even" });
                    report.set_config("order", order);
                    report.add(entry);
                    report.normalize();
                    finish(report, &output)
                }
                Err(e) if is_usage(&e) => usage_error(e),
                Err(e) => usage_error(e),
            }
        }
        Command::VerifyOdd { d, n, order, output } => {
            let order = resolve_order(order);
            match cs::verify_odd_case(d, n, order) {
                Ok(entry) => {
                    let mut report = VerificationReport::new();
                    report.set_config("command", "verify-odd");
                    report.set_config("order", order);
                    report.add(entry);
                    report.normalize();
                    finish(report, &output)
                }
                Err(e) => usage_error(e),
            }
        }
        Command::VerifyCorollary { id, order, output } => {
            let order = resolve_order(order);
            match verify::verify_corollary(&id, order) {
                Ok(entry) => {
                    let mut report = VerificationReport::new();
                    report.set_config("command", "verify-corollary");
                    report.set_config("id", &id);
                    report.set_config("order", order);
                    report.add(entry);
                    report.normalize();
                    finish(report, &output)
                }
                Err(e) => usage_error(e),
            }
        }
        Command::CheckNumeric {
            tau,
            v,
            terms,
            tol,
            order,
            output,
        } => {
            let order = resolve_order(order);
            let tol = tol.unwrap_or(DEFAULT_TOL);
            let taus = if tau.is_empty() {
                numeric::default_taus()
            } else {
                match tau.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>, _>>() {
                    Ok(taus) => taus,
                    Err(e) => return usage_error(e),
                }
            };
            let v = match v {
                None => numeric::default_v(),
                Some(s) => match parse_complex(&s) {
                    Ok(v) => v,
                    Err(e) => return usage_error(e),
                },
            };
            let mut report = VerificationReport::new();
            report.set_config("command", "check-numeric");
            report.set_config("order", order);
            report.set_config("tol", tol);
            report.set_config("terms", terms);
            match numeric::transformation_suite(&taus, v, terms, tol) {
                Ok(entries) => report.extend(entries),
                Err(e) => return usage_error(e),
            }
            let crosscheck_order = order.max(HalfInt::from_twice(DEFAULT_ORDER_TWICE));
            match numeric::formal_numeric_crosscheck(crosscheck_order, Complex64::new(0.0, 2.0), terms, CROSSCHECK_TOL) {
                Ok(entries) => report.extend(entries),
                Err(e) => return usage_error(e),
            }
            report.normalize();
            finish(report, &output)
        }
        Command::All {
            order,
            tol,
            terms,
            output,
        } => {
            let order = resolve_order(order);
            let tol = tol.unwrap_or(DEFAULT_TOL);
            match run_all(order, tol, terms) {
                Ok(report) => finish(report, &output),
                Err(e) => usage_error(e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_resolution_prefers_the_flag() {
        assert_eq!(resolve_order(Some(4)).twice(), 4);
        assert_eq!(resolve_order(None).twice(), DEFAULT_ORDER_TWICE);
    }

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("0,2").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_complex("0.3, 0.1").unwrap(), Complex64::new(0.3, 0.1));
        assert!(parse_complex("chaos").is_err());
    }

    #[test]
    fn expand_knows_its_catalog() {
        for object in EXPAND_OBJECTS {
            let (d, n) = match *object {
                // the primed forms need the stricter hypothesis
                "Q1p" | "Q2p" => (Some(4), Some(0)),
                "Q1" | "Q2" | "a-hat" | "l-hat" | "ch-theta1" | "ch-theta2" | "ch-theta3" | "phi-L"
                | "phi-W" | "phi-Wp" => (Some(4), Some(1)),
                _ => (None, None),
            };
            let out = expand_object(object, d, n, HalfInt::from_twice(2), 4);
            assert!(out.is_ok(), "{}: {:?}", object, out.err());
        }
        assert!(expand_object("nonsense", None, None, HalfInt::from_twice(2), 4).is_err());
    }

    #[test]
    fn run_all_at_tiny_order_skips_large_windows() {
        let report = run_all(HalfInt::from_twice(2), 1e-9, 24).unwrap();
        assert!(!report.any_failed(), "{}", report.human_readable());
        assert!(report.count(crate::report::Status::Skip) > 0);
    }
}
