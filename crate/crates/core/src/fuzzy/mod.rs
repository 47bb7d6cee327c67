//! Linguistic variables, triangular membership and Mamdani machinery.

mod mamdani;
mod membership;
mod variable;

pub use mamdani::{
    clip_and_aggregate, defuzz_centroid, firing_strength, AggregatedOutput, Fuzzified,
    TermActivation, DEFAULT_RESOLUTION,
};
pub use membership::TriangularMf;
pub use variable::{Degrees, LinguisticTerm, LinguisticVariable, VariableKind};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FuzzyError {
    #[error("malformed triangle ({a}, {b}, {c}): vertices must satisfy a <= b <= c with a < c")]
    MalformedMf { a: f64, b: f64, c: f64 },
    #[error("invalid universe [{lo}, {hi}] for `{variable}`")]
    InvalidUniverse { variable: String, lo: f64, hi: f64 },
    #[error(
        "term `{term}` of `{variable}` has support [{a}, {c}] outside the universe [{lo}, {hi}]"
    )]
    TermOutsideUniverse {
        variable: String,
        term: String,
        a: f64,
        c: f64,
        lo: f64,
        hi: f64,
    },
    #[error("duplicate term `{term}` in `{variable}`")]
    DuplicateTerm { variable: String, term: String },
    #[error("`{variable}` declares no terms")]
    NoTerms { variable: String },
    #[error("`{variable}` leaves {x} uncovered: every term has membership 0 there")]
    CoverageGap { variable: String, x: f64 },
    #[error("value {value} is outside the universe [{lo}, {hi}] of `{variable}`")]
    OutOfUniverse {
        variable: String,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("no input was fuzzified for attribute `{attribute}`")]
    MissingInput { attribute: String },
    #[error("`{variable}` has no term named `{term}`")]
    UnknownTerm { variable: String, term: String },
    #[error("aggregate for `{variable}` is identically zero; nothing to defuzzify")]
    NoActivation { variable: String },
    #[error("resolution must be at least 2, got {0}")]
    InvalidResolution(usize),
}
