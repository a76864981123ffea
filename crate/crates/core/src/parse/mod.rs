//! Text front end for rational maps: `"z^2 - 2"`, `"(z^3+1)/(2z)"`,
//! `"z - (z^3 - 1)/(3z^2)"`.
//!
//! Literals are read exactly (`0.1` is `1/10`), the expression is evaluated
//! as a quotient of polynomials over the Gaussian rationals, and the common
//! factor is cancelled exactly before conversion to floating point. The
//! grammar is documented in `docs/grammar.md`.

mod lexer;
mod parser;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{ExprAst, Node, MAX_DEPTH, MAX_EXPONENT};

use crate::rational::exact::ExactPoly;
use crate::rational::RationalMap;

/// Degree bound on any intermediate numerator or denominator.
pub const MAX_PARSE_DEGREE: usize = 1024;

/// Half-open byte range into the source text.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("unrecognized character at bytes {span}")]
    Lex { span: Span },
    #[error("expected {expected} at bytes {span}")]
    Syntax { span: Span, expected: String },
    #[error("division by the zero polynomial at bytes {span}")]
    NotRational { span: Span },
    #[error("map has degree {degree}; at least 1 is required")]
    DegreeZero { degree: usize },
    #[error("degree {degree} at bytes {span} exceeds the parser limit {cap}")]
    DegreeCap { span: Span, degree: usize, cap: usize },
}

impl ParseError {
    pub fn span(&self) -> Option<Span> {
        match self {
            ParseError::Lex { span }
            | ParseError::Syntax { span, .. }
            | ParseError::NotRational { span }
            | ParseError::DegreeCap { span, .. } => Some(*span),
            ParseError::DegreeZero { .. } => None,
        }
    }

    /// The source line with a caret marker under the offending bytes.
    pub fn caret_diagnostic(&self, src: &str) -> String {
        let Some(span) = self.span() else {
            return format!("{self}\n  {src}");
        };
        let prefix = src.get(..span.start.min(src.len())).unwrap_or(src);
        let marked = src.get(span.start.min(src.len())..span.end.min(src.len())).unwrap_or("");
        let pad = " ".repeat(prefix.chars().count());
        let carets = "^".repeat(marked.chars().count().max(1));
        format!("{self}\n  {src}\n  {pad}{carets}")
    }
}

/// Tokenizes and parses `src` into an expression tree.
pub fn parse_expr(src: &str) -> Result<ExprAst, ParseError> {
    let tokens = tokenize(src)?;
    parser::parse_tokens(&tokens, src.len())
}

/// Parses `src` into a reduced map `P / Q`.
///
/// The exact common factor is divided out as a monic polynomial, so the
/// remaining coefficients keep the scale the user wrote; a constant
/// denominator is folded into the numerator.
pub fn parse_map(src: &str) -> Result<RationalMap, ParseError> {
    let ast = parse_expr(src)?;
    let Fraction { num, den } = evaluate(&ast)?;
    let (num, den) = if num.is_zero() {
        (num, ExactPoly::one())
    } else if den.degree() == 0 {
        let inv = den.leading().inv().expect("denominator is non-zero");
        (num.scale(&inv), ExactPoly::one())
    } else {
        let g = num.gcd(&den);
        if g.degree() == 0 {
            (num, den)
        } else {
            let (n, _) = num.div_rem(&g).expect("gcd is non-zero");
            let (d, _) = den.div_rem(&g).expect("gcd is non-zero");
            if d.degree() == 0 {
                let inv = d.leading().inv().expect("denominator is non-zero");
                (n.scale(&inv), ExactPoly::one())
            } else {
                (n, d)
            }
        }
    };
    let degree = num.degree().max(den.degree());
    if degree < 1 {
        return Err(ParseError::DegreeZero { degree });
    }
    Ok(RationalMap::from_coprime(num.to_polynomial(), den.to_polynomial()))
}

/// Unreduced quotient `num / den` with `den != 0`.
struct Fraction {
    num: ExactPoly,
    den: ExactPoly,
}

fn evaluate(ast: &ExprAst) -> Result<Fraction, ParseError> {
    let cap = |f: Fraction| {
        let degree = f.num.degree().max(f.den.degree());
        if degree > MAX_PARSE_DEGREE {
            Err(ParseError::DegreeCap { span: ast.span, degree, cap: MAX_PARSE_DEGREE })
        } else {
            Ok(f)
        }
    };
    match &ast.node {
        Node::Const(c) => Ok(Fraction { num: ExactPoly::constant(c.clone()), den: ExactPoly::one() }),
        Node::Var => Ok(Fraction { num: ExactPoly::var(), den: ExactPoly::one() }),
        Node::Neg(a) => {
            let a = evaluate(a)?;
            Ok(Fraction { num: a.num.neg(), den: a.den })
        }
        Node::Add(a, b) | Node::Sub(a, b) => {
            let (a, b) = (evaluate(a)?, evaluate(b)?);
            let b_num = if matches!(ast.node, Node::Sub(..)) { b.num.neg() } else { b.num };
            if a.den == b.den {
                return cap(Fraction { num: a.num.add(&b_num), den: a.den });
            }
            cap(Fraction { num: a.num.mul(&b.den).add(&b_num.mul(&a.den)), den: a.den.mul(&b.den) })
        }
        Node::Mul(a, b) => {
            let (a, b) = (evaluate(a)?, evaluate(b)?);
            cap(Fraction { num: a.num.mul(&b.num), den: a.den.mul(&b.den) })
        }
        Node::Div(a, b) => {
            let (a, b) = (evaluate(a)?, evaluate(b)?);
            if b.num.is_zero() {
                return Err(ParseError::NotRational { span: ast.span });
            }
            cap(Fraction { num: a.num.mul(&b.den), den: a.den.mul(&b.num) })
        }
        Node::Pow(a, e) => {
            let a = evaluate(a)?;
            let degree = a.num.degree().max(a.den.degree()).saturating_mul(*e as usize);
            if degree > MAX_PARSE_DEGREE {
                return Err(ParseError::DegreeCap { span: ast.span, degree, cap: MAX_PARSE_DEGREE });
            }
            Ok(Fraction { num: a.num.pow(*e), den: a.den.pow(*e) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Polynomial;
    use num_complex::Complex64;
    use proptest::prelude::*;

    const CORPUS: &str = include_str!("../../tests/data/parser_corpus.txt");

    fn corpus() -> impl Iterator<Item = &'static str> {
        CORPUS.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
    }

    #[test]
    fn reads_example_maps() {
        let m = parse_map("z^2").unwrap();
        assert_eq!(m.numerator(), &Polynomial::from_real(&[0.0, 0.0, 1.0]));
        assert_eq!(m.denominator(), &Polynomial::one());
        let m = parse_map("z^2-2").unwrap();
        assert_eq!(m.numerator(), &Polynomial::from_real(&[-2.0, 0.0, 1.0]));
        let m = parse_map("(z^2+1)/(2z)").unwrap();
        assert_eq!(m.numerator(), &Polynomial::from_real(&[1.0, 0.0, 1.0]));
        assert_eq!(m.denominator(), &Polynomial::from_real(&[0.0, 2.0]));
    }

    #[test]
    fn literals_and_complex_units() {
        let m = parse_map("(2+3i)z + 0.1").unwrap();
        assert_eq!(m.numerator().coeff(1), Complex64::new(2.0, 3.0));
        assert_eq!(m.numerator().coeff(0), Complex64::new(0.1, 0.0));
        let m = parse_map("z^2 / 4").unwrap();
        assert_eq!(m.numerator(), &Polynomial::from_real(&[0.0, 0.0, 0.25]));
    }

    #[test]
    fn common_factors_cancel_exactly() {
        let m = parse_map("(z^2 - 1)/(z - 1)").unwrap();
        assert_eq!(m.numerator(), &Polynomial::from_real(&[1.0, 1.0]));
        assert_eq!(m.denominator(), &Polynomial::one());
        let newton = parse_map("z - (z^3 - 1)/(3z^2)").unwrap();
        assert_eq!(newton.degree(), 3);
    }

    #[test]
    fn error_kinds() {
        assert!(matches!(parse_map("z/(z-z)"), Err(ParseError::NotRational { .. })));
        assert_eq!(parse_map("3"), Err(ParseError::DegreeZero { degree: 0 }));
        assert_eq!(parse_map("z/z"), Err(ParseError::DegreeZero { degree: 0 }));
        assert!(matches!(parse_map("(z+1"), Err(ParseError::Syntax { span, .. }) if span == Span::new(4, 4)));
        assert!(matches!(parse_map("z $ 2"), Err(ParseError::Lex { span }) if span == Span::new(2, 3)));
        assert!(matches!(parse_map("z^1000 * z^100"), Err(ParseError::DegreeCap { .. })));
    }

    #[test]
    fn caret_diagnostic_points_at_span() {
        let err = parse_map("z^2 + x").unwrap_err();
        let text = err.caret_diagnostic("z^2 + x");
        assert!(text.ends_with("\n        ^"), "{text}");
    }

    #[test]
    fn corpus_round_trips() {
        let mut count = 0;
        for src in corpus() {
            let m = parse_map(src).unwrap_or_else(|e| panic!("{src}: {e}"));
            let printed = m.to_string();
            let again = parse_map(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
            assert!(m.approx_eq(&again, 1e-12), "{src} -> {printed}");
            count += 1;
        }
        assert!(count >= 50);
    }

    #[test]
    fn juxtaposition_matches_explicit_product() {
        for (implicit, explicit) in [
            ("2z", "2*z"),
            ("3z^2 - 2z + 1", "3*z^2 - 2*z + 1"),
            ("(z+1)(z-1)", "(z+1)*(z-1)"),
            ("2i z", "2*i*z"),
            ("z(z+i)", "z*(z+i)"),
        ] {
            assert_eq!(parse_map(implicit).unwrap(), parse_map(explicit).unwrap());
        }
    }

    proptest! {
        #[test]
        fn random_bytes_never_panic(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            let src = String::from_utf8_lossy(&bytes);
            let _ = parse_map(&src);
        }

        #[test]
        fn random_grammar_soup_never_panics(src in "[z0-9i+\\-*/^(). ]{0,40}") {
            match parse_map(&src) {
                Ok(m) => prop_assert!(m.degree() >= 1),
                Err(e) => {
                    if let Some(span) = e.span() {
                        prop_assert!(span.start <= span.end && span.end <= src.len());
                    }
                }
            }
        }
    }
}
