//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! formula  := iff
//! iff      := implies ('<->' implies)*            left-associative
//! implies  := or ('->' implies)?                  right-associative
//! or       := and ('|' and)*
//! and      := unary ('&' unary)*
//! unary    := '!' unary
//!           | ('forall' | 'exists') VAR '.' formula     maximal scope
//!           | atom
//! atom     := term RELOP term                      declared infix relations, '='
//!           | RELNAME '(' term {',' term} ')'      prefix relations
//!           | '(' formula ')'
//! term     := factor (ADDOP factor)*               declared infix functions
//! factor   := primary (MULOP primary)*             the '*' tier binds tighter
//! primary  := NUMBER | IDENT
//!           | FUNNAME '(' term {',' term} ')'
//!           | '(' term ')'
//! ```
//!
//! Numerals resolve to a declared constant of the same name when present and
//! to element literals otherwise. Identifiers resolve to declared constants
//! or else to variables. A quantifier's scope runs to the end of the
//! enclosing parenthesized group.

use thiserror::Error;

use super::ast::{Formula, Term};
use super::lexer::{tokenize, Token, TokenKind};
use super::signature::{Fixity, Signature};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {col}: unknown symbol `{symbol}`")]
    UnknownSymbol {
        symbol: String,
        line: usize,
        col: usize,
    },
    #[error("line {line}, column {col}: `{symbol}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        got: usize,
        line: usize,
        col: usize,
    },
    #[error("line {line}, column {col}: unbound parenthesis")]
    UnboundParenthesis { line: usize, col: usize },
    #[error("line {line}, column {col}: expected {expected}, found `{found}`")]
    Unexpected {
        expected: String,
        found: String,
        line: usize,
        col: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseWarning {
    /// A quantifier rebinds a variable already bound in an enclosing scope.
    ShadowedVariable { var: String, line: usize, col: usize },
}

impl std::fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseWarning::ShadowedVariable { var, line, col } => {
                write!(f, "line {line}, column {col}: quantifier shadows variable `{var}`")
            }
        }
    }
}

/// Parse a formula; the printed form of the result re-parses to an identical
/// tree.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    parse_formula_verbose(text, sig).map(|(f, _)| f)
}

/// Like [`parse_formula`], also reporting warnings (shadowed variables).
pub fn parse_formula_verbose(
    text: &str,
    sig: &Signature,
) -> Result<(Formula, Vec<ParseWarning>), ParseError> {
    let tokens = tokenize(text, sig)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        sig,
        bound: Vec::new(),
        warnings: Vec::new(),
    };
    let f = p.formula()?;
    p.expect_eof()?;
    Ok((f, p.warnings))
}

/// Parse a single term.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, ParseError> {
    let tokens = tokenize(text, sig)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        sig,
        bound: Vec::new(),
        warnings: Vec::new(),
    };
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    sig: &'a Signature,
    bound: Vec<String>,
    warnings: Vec<ParseWarning>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> Result<T, ParseError> {
        let t = self.peek();
        Err(ParseError::Unexpected {
            expected: expected.to_string(),
            found: t.kind.to_string(),
            line: t.line,
            col: t.col,
        })
    }

    fn expect_eof(&mut self) -> Result<(), ParseError> {
        if self.peek().kind == TokenKind::Eof {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> Result<Token, ParseError> {
        if self.peek().kind == kind {
            Ok(self.bump())
        } else if kind == TokenKind::RParen && self.peek().kind == TokenKind::Eof {
            let t = self.peek();
            Err(ParseError::UnboundParenthesis {
                line: t.line,
                col: t.col,
            })
        } else {
            self.unexpected(what)
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.implies()?;
        while self.peek().kind == TokenKind::DoubleArrow {
            self.bump();
            let rhs = self.implies()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.peek().kind == TokenKind::Arrow {
            self.bump();
            let rhs = self.implies()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.peek().kind == TokenKind::Pipe {
            self.bump();
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.peek().kind == TokenKind::Amp {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().kind.clone() {
            TokenKind::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            TokenKind::Forall | TokenKind::Exists => self.quantified(),
            _ => self.atom(),
        }
    }

    fn quantified(&mut self) -> Result<Formula, ParseError> {
        let q = self.bump();
        let var = match self.peek().kind.clone() {
            TokenKind::Ident(name) => {
                if self.sig.is_constant(&name)
                    || self.sig.relation(&name).is_some()
                    || self.sig.function(&name).is_some()
                {
                    let t = self.peek();
                    return Err(ParseError::Unexpected {
                        expected: "variable".to_string(),
                        found: format!("declared symbol `{name}`"),
                        line: t.line,
                        col: t.col,
                    });
                }
                let t = self.bump();
                if self.bound.contains(&name) {
                    self.warnings.push(ParseWarning::ShadowedVariable {
                        var: name.clone(),
                        line: t.line,
                        col: t.col,
                    });
                }
                name
            }
            _ => return self.unexpected("variable"),
        };
        self.expect(TokenKind::Dot, "`.` after quantified variable")?;
        self.bound.push(var.clone());
        // Maximal scope: the body is a full formula running to the end of
        // the enclosing group.
        let body = self.formula()?;
        self.bound.pop();
        Ok(match q.kind {
            TokenKind::Forall => Formula::forall(&var, body),
            _ => Formula::exists(&var, body),
        })
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        // Try `term RELOP term` first; on failure fall back to a prefix
        // relation application or a parenthesized formula.
        let save = self.pos;
        if let Ok(lhs) = self.term() {
            if let TokenKind::Op(op) = self.peek().kind.clone() {
                if let Some(decl) = self.sig.relation(&op) {
                    if decl.fixity == Fixity::Infix {
                        self.bump();
                        let rhs = self.term()?;
                        return Ok(Formula::Atomic(op, vec![lhs, rhs]));
                    }
                }
            }
        }
        self.pos = save;

        match self.peek().kind.clone() {
            TokenKind::Ident(name) => {
                let t = self.bump();
                if self.tokens[self.pos].kind != TokenKind::LParen {
                    return self.unexpected("an infix relation after a term");
                }
                let decl = match self.sig.relation(&name) {
                    Some(d) => d,
                    None => {
                        return Err(ParseError::UnknownSymbol {
                            symbol: name,
                            line: t.line,
                            col: t.col,
                        })
                    }
                };
                if decl.fixity == Fixity::Infix {
                    return Err(ParseError::Unexpected {
                        expected: "infix use of this relation".to_string(),
                        found: format!("prefix application of `{name}`"),
                        line: t.line,
                        col: t.col,
                    });
                }
                let args = self.argument_list()?;
                if args.len() != decl.arity {
                    return Err(ParseError::ArityMismatch {
                        symbol: name,
                        expected: decl.arity,
                        got: args.len(),
                        line: t.line,
                        col: t.col,
                    });
                }
                Ok(Formula::Atomic(name, args))
            }
            TokenKind::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(f)
            }
            _ => self.unexpected("a formula"),
        }
    }

    fn argument_list(&mut self) -> Result<Vec<Term>, ParseError> {
        self.expect(TokenKind::LParen, "`(`")?;
        let mut args = vec![self.term()?];
        while self.peek().kind == TokenKind::Comma {
            self.bump();
            args.push(self.term()?);
        }
        self.expect(TokenKind::RParen, "`)`")?;
        Ok(args)
    }

    pub(crate) fn term(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek().kind.clone() {
                TokenKind::Op(op) if self.is_infix_function(&op) && !is_mul_tier(&op) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Term::Apply(op, vec![lhs, rhs]);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.primary()?;
        loop {
            match self.peek().kind.clone() {
                TokenKind::Op(op) if self.is_infix_function(&op) && is_mul_tier(&op) => {
                    self.bump();
                    let rhs = self.primary()?;
                    lhs = Term::Apply(op, vec![lhs, rhs]);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn is_infix_function(&self, op: &str) -> bool {
        self.sig
            .function(op)
            .map(|d| d.fixity == Fixity::Infix)
            .unwrap_or(false)
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        match self.peek().kind.clone() {
            TokenKind::Number(num) => {
                let t = self.bump();
                if self.sig.is_constant(&num) {
                    Ok(Term::Const(num))
                } else {
                    num.parse::<usize>().map(Term::Element).map_err(|_| {
                        ParseError::Unexpected {
                            expected: "an element index".to_string(),
                            found: num,
                            line: t.line,
                            col: t.col,
                        }
                    })
                }
            }
            TokenKind::Ident(name) => {
                let t = self.bump();
                if self.tokens[self.pos].kind == TokenKind::LParen {
                    let decl = match self.sig.function(&name) {
                        Some(d) => d,
                        None => {
                            // Could be a prefix relation; let the atom rule
                            // decide. Treated as a term-parse failure.
                            return Err(ParseError::UnknownSymbol {
                                symbol: name,
                                line: t.line,
                                col: t.col,
                            });
                        }
                    };
                    let args = self.argument_list()?;
                    if args.len() != decl.arity {
                        return Err(ParseError::ArityMismatch {
                            symbol: name,
                            expected: decl.arity,
                            got: args.len(),
                            line: t.line,
                            col: t.col,
                        });
                    }
                    Ok(Term::Apply(name, args))
                } else if self.sig.is_constant(&name) {
                    Ok(Term::Const(name))
                } else {
                    Ok(Term::Var(name))
                }
            }
            TokenKind::Op(op) if self.sig.is_constant(&op) => {
                self.bump();
                Ok(Term::Const(op))
            }
            TokenKind::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(TokenKind::RParen, "`)`")?;
                Ok(t)
            }
            _ => self.unexpected("a term"),
        }
    }
}

fn is_mul_tier(op: &str) -> bool {
    op == "*"
}
