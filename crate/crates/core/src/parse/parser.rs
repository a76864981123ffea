use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::lexer::{Token, TokenKind};
use super::{ParseError, Span};
use crate::rational::exact::GaussRat;

/// Largest accepted exponent literal (after folding `a^b^c`).
pub const MAX_EXPONENT: u32 = 1024;
/// Bound on expression-tree depth, which also bounds parser recursion.
pub const MAX_DEPTH: usize = 512;

const BP_SUM: u8 = 10;
const BP_PRODUCT: u8 = 20;
const BP_NEG: u8 = 30;
const BP_POW: u8 = 40;

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(GaussRat),
    Var,
    Add(Box<ExprAst>, Box<ExprAst>),
    Sub(Box<ExprAst>, Box<ExprAst>),
    Mul(Box<ExprAst>, Box<ExprAst>),
    Div(Box<ExprAst>, Box<ExprAst>),
    Pow(Box<ExprAst>, u32),
    Neg(Box<ExprAst>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExprAst {
    pub node: Node,
    pub span: Span,
    depth: usize,
}

impl ExprAst {
    fn leaf(node: Node, span: Span) -> Self {
        ExprAst { node, span, depth: 1 }
    }

    fn unary(make: impl FnOnce(Box<ExprAst>) -> Node, inner: ExprAst, span: Span) -> Result<Self, ParseError> {
        let depth = inner.depth + 1;
        check_depth(depth, span)?;
        Ok(ExprAst { node: make(Box::new(inner)), span, depth })
    }

    fn binary(
        make: impl FnOnce(Box<ExprAst>, Box<ExprAst>) -> Node,
        lhs: ExprAst,
        rhs: ExprAst,
    ) -> Result<Self, ParseError> {
        let span = lhs.span.join(rhs.span);
        let depth = lhs.depth.max(rhs.depth) + 1;
        check_depth(depth, span)?;
        Ok(ExprAst { node: make(Box::new(lhs), Box::new(rhs)), span, depth })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }
}

fn check_depth(depth: usize, span: Span) -> Result<(), ParseError> {
    if depth > MAX_DEPTH {
        Err(ParseError::Syntax { span, expected: format!("expression nested at most {MAX_DEPTH} deep") })
    } else {
        Ok(())
    }
}

/// Pratt parser over a token stream.
///
/// Binding, loosest first: binary `+ -`; `*`, `/` and juxtaposition;
/// unary `-`; `^` (right-associative, integer literal exponents only).
/// Juxtaposition applies when the right operand starts with `z`, `i` or `(`.
pub fn parse_tokens(tokens: &[Token<'_>], src_len: usize) -> Result<ExprAst, ParseError> {
    let mut parser = Parser { tokens, pos: 0, src_len, nesting: 0 };
    let ast = parser.expr(0)?;
    if let Some(tok) = parser.peek() {
        return Err(ParseError::Syntax { span: tok.span, expected: "operator or end of input".into() });
    }
    Ok(ast)
}

struct Parser<'t, 'a> {
    tokens: &'t [Token<'a>],
    pos: usize,
    src_len: usize,
    nesting: usize,
}

impl<'t, 'a> Parser<'t, 'a> {
    fn peek(&self) -> Option<&'t Token<'a>> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> Span {
        self.peek().map(|t| t.span).unwrap_or(Span::new(self.src_len, self.src_len))
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::Syntax { span: self.here(), expected: expected.into() }
    }

    fn expr(&mut self, min_bp: u8) -> Result<ExprAst, ParseError> {
        self.nesting += 1;
        if self.nesting > MAX_DEPTH {
            return Err(ParseError::Syntax {
                span: self.here(),
                expected: format!("expression nested at most {MAX_DEPTH} deep"),
            });
        }
        let mut lhs = self.prefix()?;
        while let Some(tok) = self.peek() {
            let kind = tok.kind;
            let lbp = match kind {
                TokenKind::Plus | TokenKind::Minus => BP_SUM,
                TokenKind::Star | TokenKind::Slash => BP_PRODUCT,
                TokenKind::Variable | TokenKind::ImaginaryUnit | TokenKind::LParen => BP_PRODUCT,
                TokenKind::Caret => BP_POW,
                TokenKind::RParen => break,
                TokenKind::Number => return Err(self.error("operator")),
            };
            if lbp < min_bp {
                break;
            }
            lhs = match kind {
                TokenKind::Caret => {
                    self.pos += 1;
                    let exponent = self.exponent_chain()?;
                    let span = lhs.span.join(self.tokens[self.pos - 1].span);
                    ExprAst::unary(|b| Node::Pow(b, exponent), lhs, span)?
                }
                TokenKind::Variable | TokenKind::ImaginaryUnit | TokenKind::LParen => {
                    let rhs = self.expr(lbp + 1)?;
                    ExprAst::binary(Node::Mul, lhs, rhs)?
                }
                _ => {
                    self.pos += 1;
                    let rhs = self.expr(lbp + 1)?;
                    let make = match kind {
                        TokenKind::Plus => Node::Add,
                        TokenKind::Minus => Node::Sub,
                        TokenKind::Star => Node::Mul,
                        _ => Node::Div,
                    };
                    ExprAst::binary(make, lhs, rhs)?
                }
            };
        }
        self.nesting -= 1;
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<ExprAst, ParseError> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.error("expression"));
        };
        self.pos += 1;
        match tok.kind {
            TokenKind::Number => Ok(ExprAst::leaf(Node::Const(GaussRat::real(decimal(tok.text))), tok.span)),
            TokenKind::ImaginaryUnit => Ok(ExprAst::leaf(Node::Const(GaussRat::i()), tok.span)),
            TokenKind::Variable => Ok(ExprAst::leaf(Node::Var, tok.span)),
            TokenKind::Minus | TokenKind::Plus => {
                let operand = self.expr(BP_NEG)?;
                let span = tok.span.join(operand.span);
                if tok.kind == TokenKind::Plus {
                    Ok(ExprAst { span, ..operand })
                } else {
                    ExprAst::unary(Node::Neg, operand, span)
                }
            }
            TokenKind::LParen => {
                let inner = self.expr(0)?;
                match self.peek() {
                    Some(t) if t.kind == TokenKind::RParen => {
                        let span = tok.span.join(t.span);
                        self.pos += 1;
                        Ok(ExprAst { span, ..inner })
                    }
                    _ => Err(self.error("')'")),
                }
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expression"))
            }
        }
    }

    /// Reads `n1 ^ n2 ^ ... ^ nk` after a caret and folds it right to left.
    fn exponent_chain(&mut self) -> Result<u32, ParseError> {
        let mut literals = vec![self.exponent_literal()?];
        while self.peek().is_some_and(|t| t.kind == TokenKind::Caret) {
            self.pos += 1;
            literals.push(self.exponent_literal()?);
        }
        let span = self.tokens[self.pos - 1].span;
        let too_large = || ParseError::Syntax { span, expected: format!("exponent at most {MAX_EXPONENT}") };
        let mut value = literals.pop().expect("at least one literal");
        while let Some(base) = literals.pop() {
            value = base.checked_pow(value).filter(|&v| v <= MAX_EXPONENT).ok_or_else(too_large)?;
        }
        if value > MAX_EXPONENT {
            return Err(too_large());
        }
        Ok(value)
    }

    fn exponent_literal(&mut self) -> Result<u32, ParseError> {
        let expected = "non-negative integer exponent";
        match self.peek() {
            Some(t) if t.kind == TokenKind::Number && t.text.bytes().all(|b| b.is_ascii_digit()) => {
                let span = t.span;
                let value =
                    t.text.parse::<u32>().ok().filter(|&v| v <= MAX_EXPONENT).ok_or_else(|| ParseError::Syntax {
                        span,
                        expected: format!("exponent at most {MAX_EXPONENT}"),
                    })?;
                self.pos += 1;
                Ok(value)
            }
            _ => Err(self.error(expected)),
        }
    }
}

/// Exact value of a decimal literal such as `12`, `0.1` or `.5`.
fn decimal(text: &str) -> BigRational {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    let digits = format!("{int}{frac}");
    let numer =
        if digits.is_empty() { BigInt::zero() } else { digits.parse::<BigInt>().expect("lexer checked digits") };
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    if denom.is_one() {
        BigRational::from_integer(numer)
    } else {
        BigRational::new(numer, denom)
    }
}

#[cfg(test)]
mod tests {
    use super::super::lexer::tokenize;
    use super::*;

    fn parse(src: &str) -> Result<ExprAst, ParseError> {
        parse_tokens(&tokenize(src).unwrap(), src.len())
    }

    fn shape(ast: &ExprAst) -> String {
        match &ast.node {
            Node::Const(c) => format!("{}", c.to_complex().re),
            Node::Var => "z".into(),
            Node::Add(a, b) => format!("(+ {} {})", shape(a), shape(b)),
            Node::Sub(a, b) => format!("(- {} {})", shape(a), shape(b)),
            Node::Mul(a, b) => format!("(* {} {})", shape(a), shape(b)),
            Node::Div(a, b) => format!("(/ {} {})", shape(a), shape(b)),
            Node::Pow(a, e) => format!("(^ {} {e})", shape(a)),
            Node::Neg(a) => format!("(neg {})", shape(a)),
        }
    }

    #[test]
    fn precedence() {
        assert_eq!(shape(&parse("-z^2").unwrap()), "(neg (^ z 2))");
        assert_eq!(shape(&parse("2z^2 - 1").unwrap()), "(- (* 2 (^ z 2)) 1)");
        assert_eq!(shape(&parse("z^2^3").unwrap()), "(^ z 8)");
        assert_eq!(shape(&parse("1/2z").unwrap()), "(* (/ 1 2) z)");
        assert_eq!(shape(&parse("z-z-z").unwrap()), "(- (- z z) z)");
        assert_eq!(shape(&parse("(z+1)(z-1)").unwrap()), "(* (+ z 1) (- z 1))");
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(decimal("0.1"), BigRational::new(1.into(), 10.into()));
        assert_eq!(decimal(".5"), BigRational::new(1.into(), 2.into()));
        assert_eq!(decimal("3."), BigRational::from_integer(3.into()));
    }

    #[test]
    fn exponent_errors() {
        assert!(matches!(parse("z^z"), Err(ParseError::Syntax { span, .. }) if span == Span::new(2, 3)));
        assert!(matches!(parse("z^-1"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("z^1.5"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("z^99999"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("z^2^20"), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn deep_nesting_is_rejected_not_overflowed() {
        let src = "(".repeat(100_000) + "z" + &")".repeat(100_000);
        assert!(matches!(parse(&src), Err(ParseError::Syntax { .. })));
        let chain = vec!["z"; 5000].join("+");
        assert!(matches!(parse(&chain), Err(ParseError::Syntax { .. })));
    }
}
