//! Tokenizer for the formula grammar.
//!
//! Operator-shaped symbols come from the signature, so the lexer is
//! parameterized by the set of declared operator names and applies maximal
//! munch with the grammar's own `->` and `<->` taking precedence.

use super::parser::ParseError;
use super::signature::{is_operator_char, Signature};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TokenKind {
    Ident(String),
    Number(String),
    /// A declared operator-shaped symbol such as `+` or `<`.
    Op(String),
    Bang,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    LParen,
    RParen,
    Dot,
    Comma,
    Forall,
    Exists,
    Eof,
}

impl std::fmt::Display for TokenKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TokenKind::Ident(s) | TokenKind::Number(s) | TokenKind::Op(s) => write!(f, "{s}"),
            TokenKind::Bang => write!(f, "!"),
            TokenKind::Amp => write!(f, "&"),
            TokenKind::Pipe => write!(f, "|"),
            TokenKind::Arrow => write!(f, "->"),
            TokenKind::DoubleArrow => write!(f, "<->"),
            TokenKind::LParen => write!(f, "("),
            TokenKind::RParen => write!(f, ")"),
            TokenKind::Dot => write!(f, "."),
            TokenKind::Comma => write!(f, ","),
            TokenKind::Forall => write!(f, "forall"),
            TokenKind::Exists => write!(f, "exists"),
            TokenKind::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn tokenize(text: &str, sig: &Signature) -> Result<Vec<Token>, ParseError> {
    let mut ops: Vec<String> = sig.operator_names().into_iter().map(String::from).collect();
    ops.push("=".to_string());
    // Longest first for maximal munch.
    ops.sort_by_key(|s| std::cmp::Reverse(s.len()));

    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    while i < chars.len() {
        let c = chars[i];
        let (tline, tcol) = (line, col);
        let advance = |i: &mut usize, line: &mut usize, col: &mut usize, by: usize| {
            for k in 0..by {
                if chars[*i + k] == '\n' {
                    *line += 1;
                    *col = 1;
                } else {
                    *col += 1;
                }
            }
            *i += by;
        };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
            continue;
        }
        let simple = |kind: TokenKind| Token {
            kind,
            line: tline,
            col: tcol,
        };
        match c {
            '(' => {
                tokens.push(simple(TokenKind::LParen));
                advance(&mut i, &mut line, &mut col, 1);
            }
            ')' => {
                tokens.push(simple(TokenKind::RParen));
                advance(&mut i, &mut line, &mut col, 1);
            }
            '.' => {
                tokens.push(simple(TokenKind::Dot));
                advance(&mut i, &mut line, &mut col, 1);
            }
            ',' => {
                tokens.push(simple(TokenKind::Comma));
                advance(&mut i, &mut line, &mut col, 1);
            }
            '!' => {
                tokens.push(simple(TokenKind::Bang));
                advance(&mut i, &mut line, &mut col, 1);
            }
            '&' => {
                tokens.push(simple(TokenKind::Amp));
                advance(&mut i, &mut line, &mut col, 1);
            }
            '|' => {
                tokens.push(simple(TokenKind::Pipe));
                advance(&mut i, &mut line, &mut col, 1);
            }
            _ if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '\'') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                let kind = match word.as_str() {
                    "forall" => TokenKind::Forall,
                    "exists" => TokenKind::Exists,
                    _ => TokenKind::Ident(word),
                };
                tokens.push(simple(kind));
                let len = j - i;
                advance(&mut i, &mut line, &mut col, len);
            }
            _ if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                tokens.push(simple(TokenKind::Number(word)));
                let len = j - i;
                advance(&mut i, &mut line, &mut col, len);
            }
            _ if is_operator_char(c) => {
                // Grammar connectives first, then declared operators, longest
                // match wins.
                let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
                let kind = if rest.starts_with("<->") {
                    Some((TokenKind::DoubleArrow, 3))
                } else if rest.starts_with("->") {
                    Some((TokenKind::Arrow, 2))
                } else {
                    ops.iter()
                        .find(|op| rest.starts_with(op.as_str()))
                        .map(|op| (TokenKind::Op(op.clone()), op.len()))
                };
                match kind {
                    Some((kind, len)) => {
                        tokens.push(simple(kind));
                        advance(&mut i, &mut line, &mut col, len);
                    }
                    None => {
                        return Err(ParseError::UnknownSymbol {
                            symbol: c.to_string(),
                            line: tline,
                            col: tcol,
                        });
                    }
                }
            }
            _ => {
                return Err(ParseError::UnknownSymbol {
                    symbol: c.to_string(),
                    line: tline,
                    col: tcol,
                });
            }
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        line,
        col,
    });
    Ok(tokens)
}
