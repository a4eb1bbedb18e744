//! Exact q-expansion engine for twisted anomaly cancellation identities.
//!
//! The crate reconstructs, in exact rational arithmetic, the characteristic-form
//! generating functions attached to a family of twisted elliptic genera, and
//! machine-checks the cancellation identities they satisfy: theta-function
//! q-expansions, the level-2 modular basis decomposition, and the
//! Chern-Simons-style odd-dimensional analogues. A small floating-complex
//! evaluator cross-checks the theta transformation laws numerically.
//!
//! Everything symbolic is computed twice, through independent routes (direct
//! K-theory expansion of the twist bundles vs. closed-form theta ratios), and
//! the verifier only reports success when both routes agree coefficientwise.
//!
//! See the `book/` guide at the repository root for a narrative tour, and the
//! `qgenus` binary for the command-line verification driver.

pub mod charforms;
pub mod cli;
pub mod cs;
pub mod expansion;
pub mod poly;
pub mod qseries;
pub mod rational;
pub mod report;
pub mod theta;
pub mod verify;

pub use expansion::{symmetric_product, RootExpansion};
pub use poly::{apply_series, GradedPoly, RingConfig, Var};
pub use qseries::{default_order, QSeries};
pub use rational::{HalfInt, Rational};

#[cfg(doctest)]
mod book {
    //! Doc-test bridge: every code snippet in the book is compiled and run by
    //! `cargo test --doc`, keeping the guide in sync with the library.
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(series, "../../../book/src/series.md");
    chapter!(theta_functions, "../../../book/src/theta-functions.md");
    chapter!(characteristic_forms, "../../../book/src/characteristic-forms.md");
    chapter!(decomposition, "../../../book/src/decomposition.md");
    chapter!(verification, "../../../book/src/verification.md");
}
