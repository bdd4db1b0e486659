//! Recursive-descent parser for rational expressions in two variables.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | name | '(' expr ')'
//! ```

use std::collections::HashMap;

use rug::Integer;

use super::{AlgebraError, RatFunc};

/// Names visible to the parser.
#[derive(Clone, Debug)]
pub struct Scope {
    /// Names of the two variables, bound to `x` and `y`.
    pub vars: [String; 2],
    /// Names that are known coordinates but may not occur in expressions.
    pub forbidden: Vec<String>,
    /// Named subexpressions.
    pub defs: HashMap<String, RatFunc>,
}

impl Scope {
    pub fn new(x: &str, y: &str) -> Self {
        Scope { vars: [x.to_string(), y.to_string()], forbidden: Vec::new(), defs: HashMap::new() }
    }

    pub fn xy() -> Self {
        Self::new("x", "y")
    }
}

impl Default for Scope {
    fn default() -> Self {
        Self::xy()
    }
}

pub fn parse_expr(src: &str, scope: &Scope) -> Result<RatFunc, AlgebraError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, i: 0, scope, end: src.len() };
    let v = p.expr()?;
    if p.i < p.toks.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Integer),
    Name(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, AlgebraError> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = bytes[start..i].iter().collect();
            out.push((Tok::Num(s.parse().unwrap()), start + 1));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_alphanumeric() || bytes[i] == '_') {
                i += 1;
            }
            out.push((Tok::Name(bytes[start..i].iter().collect()), start + 1));
        } else if "+-*/^()".contains(c) {
            out.push((Tok::Op(c), i + 1));
            i += 1;
        } else {
            return Err(AlgebraError::Parse { pos: i + 1, msg: format!("unexpected character '{c}'") });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    i: usize,
    scope: &'a Scope,
    end: usize,
}

impl Parser<'_> {
    fn pos(&self) -> usize {
        self.toks.get(self.i).map_or(self.end + 1, |t| t.1)
    }

    fn err(&self, msg: &str) -> AlgebraError {
        AlgebraError::Parse { pos: self.pos(), msg: msg.to_string() }
    }

    fn peek_op(&self) -> Option<char> {
        match self.toks.get(self.i) {
            Some((Tok::Op(c), _)) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<RatFunc, AlgebraError> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.i += 1;
            let rhs = self.term()?;
            acc = if c == '+' { acc.add(&rhs) } else { acc.sub(&rhs) };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<RatFunc, AlgebraError> {
        let mut acc = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.i += 1;
            let pos = self.pos();
            let rhs = self.unary()?;
            acc = if c == '*' {
                acc.mul(&rhs)
            } else {
                acc.checked_div(&rhs)
                    .map_err(|_| AlgebraError::Parse { pos, msg: "division by zero".into() })?
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<RatFunc, AlgebraError> {
        match self.peek_op() {
            Some('-') => {
                self.i += 1;
                Ok(self.unary()?.neg())
            }
            Some('+') => {
                self.i += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RatFunc, AlgebraError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.i += 1;
            match self.toks.get(self.i) {
                Some((Tok::Num(n), _)) => {
                    let e = n.to_u32().ok_or_else(|| self.err("exponent too large"))?;
                    self.i += 1;
                    return Ok(base.pow(e));
                }
                _ => return Err(self.err("expected a nonnegative integer exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<RatFunc, AlgebraError> {
        let Some((tok, _)) = self.toks.get(self.i).cloned() else {
            return Err(self.err("unexpected end of input"));
        };
        match tok {
            Tok::Num(n) => {
                self.i += 1;
                Ok(RatFunc::constant(&n.into()))
            }
            Tok::Name(name) => {
                let out = if name == self.scope.vars[0] {
                    RatFunc::x()
                } else if name == self.scope.vars[1] {
                    RatFunc::y()
                } else if let Some(v) = self.scope.defs.get(&name) {
                    v.clone()
                } else if self.scope.forbidden.contains(&name) {
                    return Err(self.err(&format!("expression depends on ignorable coordinate '{name}'")));
                } else {
                    return Err(self.err(&format!("unknown symbol '{name}'")));
                };
                self.i += 1;
                Ok(out)
            }
            Tok::Op('(') => {
                self.i += 1;
                let v = self.expr()?;
                if self.peek_op() != Some(')') {
                    return Err(self.err("expected ')'"));
                }
                self.i += 1;
                Ok(v)
            }
            Tok::Op(c) => Err(self.err(&format!("unexpected '{c}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Rat;

    #[test]
    fn precedence_and_powers() {
        let s = Scope::xy();
        let f = parse_expr("-x^2 + 3*y/2 - (1/2)", &s).unwrap();
        let v = f.eval(&Rat::from(2), &Rat::from(1)).unwrap();
        assert_eq!(v, Rat::from(-3));
        let g = parse_expr("(x^2-1)/(x-1)", &s).unwrap();
        assert_eq!(g, parse_expr("x+1", &s).unwrap());
    }

    #[test]
    fn roundtrip_display() {
        let s = Scope::xy();
        let f = parse_expr("(3*x^2*y - 7/3)/(x - y^2 + 5)", &s).unwrap();
        let g = parse_expr(&f.to_string(), &s).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn errors_carry_positions() {
        let mut s = Scope::new("r", "chi");
        s.forbidden.push("phi".into());
        match parse_expr("r + phi", &s) {
            Err(AlgebraError::Parse { pos, msg }) => {
                assert_eq!(pos, 5);
                assert!(msg.contains("ignorable"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse_expr("r +", &s).is_err());
        assert!(parse_expr("1/(r-r)", &s).is_err());
        assert!(parse_expr("r^-1", &s).is_err());
        assert!(parse_expr("q", &s).is_err());
    }
}
