use serde::Serialize;

use super::{ParseError, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TokenKind {
    Number,
    ImaginaryUnit,
    Variable,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Token<'a> {
    pub kind: TokenKind,
    pub text: &'a str,
    pub span: Span,
}

/// Splits `src` into tokens, skipping whitespace.
///
/// Numbers are `digits[.digits]` or `.digits`; there is no exponent
/// notation. Adjacent atoms such as `2z` are left for the parser.
pub fn tokenize(src: &str) -> Result<Vec<Token<'_>>, ParseError> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some((start, ch)) = chars.next() {
        if ch.is_whitespace() {
            continue;
        }
        let single = |kind| Token { kind, text: &src[start..start + 1], span: Span::new(start, start + 1) };
        let token = match ch {
            '+' => single(TokenKind::Plus),
            '-' => single(TokenKind::Minus),
            '*' => single(TokenKind::Star),
            '/' => single(TokenKind::Slash),
            '^' => single(TokenKind::Caret),
            '(' => single(TokenKind::LParen),
            ')' => single(TokenKind::RParen),
            'i' => single(TokenKind::ImaginaryUnit),
            'z' => single(TokenKind::Variable),
            '0'..='9' | '.' => {
                let mut end = start + 1;
                let mut seen_dot = ch == '.';
                while end < bytes.len() {
                    match bytes[end] {
                        b'0'..=b'9' => end += 1,
                        b'.' if !seen_dot => {
                            seen_dot = true;
                            end += 1;
                        }
                        _ => break,
                    }
                }
                while chars.peek().is_some_and(|&(i, _)| i < end) {
                    chars.next();
                }
                let text = &src[start..end];
                if !text.bytes().any(|b| b.is_ascii_digit()) {
                    return Err(ParseError::Lex { span: Span::new(start, end) });
                }
                Token { kind: TokenKind::Number, text, span: Span::new(start, end) }
            }
            other => {
                return Err(ParseError::Lex { span: Span::new(start, start + other.len_utf8()) });
            }
        };
        tokens.push(token);
    }
    Ok(tokens)
}
