//! Exact scalars and bivariate rational functions.

mod bipoly;
mod parse;
mod ratfunc;
mod series;
pub mod zpoly;

pub use bipoly::BiPoly;
pub use parse::{parse_expr, Scope};
pub use ratfunc::{RatFunc, Var};
pub use series::Jet;

pub(crate) fn fmt_zpoly_xy(p: &zpoly::ZPoly) -> String {
    ratfunc::fmt_zpoly(p, ["x", "y"])
}

/// Arbitrary-precision rational, always stored in lowest terms.
pub type Rat = rug::Rational;

/// Arbitrary-precision integer.
pub type Int = rug::Integer;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator vanishes at ({x}, {y})")]
    ZeroDenominatorAtPoint { x: String, y: String },
    #[error("parse error at column {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Parse `p/q`, `p`, or `-p/q` into a rational.
pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let q: Rat = s.parse().ok()?;
    Some(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rat_literals() {
        assert_eq!(parse_rat("3/5"), Some(Rat::from((3, 5))));
        assert_eq!(parse_rat(" -4/6 "), Some(Rat::from((-2, 3))));
        assert_eq!(parse_rat("7"), Some(Rat::from(7)));
        assert_eq!(parse_rat("x"), None);
        assert_eq!(parse_rat("1/0"), None);
    }
}
