//! Signatures: the relation, function, and constant symbols of a language.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// How a binary symbol is written in the concrete syntax.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Fixity {
    Prefix,
    Infix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    Relation,
    Function,
    Constant,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKind::Relation => write!(f, "relation"),
            SymbolKind::Function => write!(f, "function"),
            SymbolKind::Constant => write!(f, "constant"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SymbolDecl {
    pub arity: usize,
    pub fixity: Fixity,
}

/// A finite first-order language. The equality symbol `=` is always present
/// as an infix binary relation and cannot be redeclared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Signature {
    relations: BTreeMap<String, SymbolDecl>,
    functions: BTreeMap<String, SymbolDecl>,
    constants: Vec<String>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("line {line}, column {col}: duplicate symbol name `{name}`")]
    DuplicateName { name: String, line: usize, col: usize },
    #[error("line {line}, column {col}: `{name}` declared infix with arity {arity}; infix requires arity 2")]
    InfixArity {
        name: String,
        arity: usize,
        line: usize,
        col: usize,
    },
    #[error("line {line}, column {col}: arity of `{name}` must be at least 1")]
    ZeroArity { name: String, line: usize, col: usize },
    #[error("line {line}, column {col}: {message}")]
    Malformed {
        message: String,
        line: usize,
        col: usize,
    },
    #[error("line {line}, column {col}: `{name}` is reserved and cannot be declared")]
    ReservedName { name: String, line: usize, col: usize },
}

/// Tokens that belong to the formula grammar itself and can never be symbol
/// names.
const RESERVED: &[&str] = &[
    "=", "->", "<->", "!", "&", "|", "(", ")", ".", ",", ";", "/", "forall", "exists", "rel",
    "fun", "const", "infix",
];

fn name_is_wellformed(name: &str) -> bool {
    if name.is_empty() {
        return false;
    }
    let mut chars = name.chars();
    let first = chars.next().unwrap();
    if first.is_ascii_alphabetic() {
        // Identifier-shaped: also usable as a variable, so the parser
        // disambiguates by declaration.
        name.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '\'')
    } else if first.is_ascii_digit() {
        // Numeral-shaped names are allowed for constants like `0`, `1`.
        name.chars().all(|c| c.is_ascii_digit())
    } else {
        name.len() <= 2 && name.chars().all(is_operator_char)
    }
}

/// Characters that may appear in operator-shaped symbol names.
pub(crate) fn is_operator_char(c: char) -> bool {
    matches!(
        c,
        '+' | '-' | '*' | '<' | '>' | '=' | '~' | '^' | '@' | '%' | '?' | ':' | '$' | '#'
    )
}

impl Default for Signature {
    fn default() -> Self {
        Signature::new()
    }
}

impl Signature {
    /// The signature containing only equality.
    pub fn new() -> Self {
        let mut relations = BTreeMap::new();
        relations.insert(
            "=".to_string(),
            SymbolDecl {
                arity: 2,
                fixity: Fixity::Infix,
            },
        );
        Signature {
            relations,
            functions: BTreeMap::new(),
            constants: Vec::new(),
        }
    }

    /// `{E}`: one binary relation, prefix notation.
    pub fn graph() -> Self {
        let mut sig = Signature::new();
        sig.declare_relation("E", 2, Fixity::Prefix).unwrap();
        sig
    }

    /// `{<}`: one binary relation, infix.
    pub fn linear_order() -> Self {
        let mut sig = Signature::new();
        sig.declare_relation("<", 2, Fixity::Infix).unwrap();
        sig
    }

    /// `{+, *, 0, 1}`: the ring language of the polynomial-map sentences.
    pub fn ring() -> Self {
        let mut sig = Signature::new();
        sig.declare_function("+", 2, Fixity::Infix).unwrap();
        sig.declare_function("*", 2, Fixity::Infix).unwrap();
        sig.declare_constant("0").unwrap();
        sig.declare_constant("1").unwrap();
        sig
    }

    /// `{+, *, -, 0, 1, <}`: the ordered-ring language.
    pub fn ordered_ring() -> Self {
        let mut sig = Signature::ring();
        sig.declare_function("-", 2, Fixity::Infix).unwrap();
        sig.declare_relation("<", 2, Fixity::Infix).unwrap();
        sig
    }

    fn check_new_name(&self, name: &str, line: usize, col: usize) -> Result<(), SignatureError> {
        if RESERVED.contains(&name) {
            return Err(SignatureError::ReservedName {
                name: name.to_string(),
                line,
                col,
            });
        }
        if !name_is_wellformed(name) {
            return Err(SignatureError::Malformed {
                message: format!("`{name}` is not a valid symbol name"),
                line,
                col,
            });
        }
        if self.relations.contains_key(name)
            || self.functions.contains_key(name)
            || self.constants.iter().any(|c| c == name)
        {
            return Err(SignatureError::DuplicateName {
                name: name.to_string(),
                line,
                col,
            });
        }
        Ok(())
    }

    fn check_decl(
        &self,
        name: &str,
        arity: usize,
        fixity: Fixity,
        line: usize,
        col: usize,
    ) -> Result<(), SignatureError> {
        self.check_new_name(name, line, col)?;
        if arity == 0 {
            return Err(SignatureError::ZeroArity {
                name: name.to_string(),
                line,
                col,
            });
        }
        if fixity == Fixity::Infix && arity != 2 {
            return Err(SignatureError::InfixArity {
                name: name.to_string(),
                arity,
                line,
                col,
            });
        }
        Ok(())
    }

    pub fn declare_relation(
        &mut self,
        name: &str,
        arity: usize,
        fixity: Fixity,
    ) -> Result<(), SignatureError> {
        self.check_decl(name, arity, fixity, 0, 0)?;
        self.relations
            .insert(name.to_string(), SymbolDecl { arity, fixity });
        Ok(())
    }

    pub fn declare_function(
        &mut self,
        name: &str,
        arity: usize,
        fixity: Fixity,
    ) -> Result<(), SignatureError> {
        self.check_decl(name, arity, fixity, 0, 0)?;
        self.functions
            .insert(name.to_string(), SymbolDecl { arity, fixity });
        Ok(())
    }

    pub fn declare_constant(&mut self, name: &str) -> Result<(), SignatureError> {
        self.check_new_name(name, 0, 0)?;
        self.constants.push(name.to_string());
        Ok(())
    }

    pub fn relation(&self, name: &str) -> Option<SymbolDecl> {
        self.relations.get(name).copied()
    }

    pub fn function(&self, name: &str) -> Option<SymbolDecl> {
        self.functions.get(name).copied()
    }

    pub fn is_constant(&self, name: &str) -> bool {
        self.constants.iter().any(|c| c == name)
    }

    /// Relation names except `=`, in sorted order.
    pub fn relation_names(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(|s| s.as_str()).filter(|&n| n != "=")
    }

    pub fn function_names(&self) -> impl Iterator<Item = &str> {
        self.functions.keys().map(|s| s.as_str())
    }

    pub fn constant_names(&self) -> impl Iterator<Item = &str> {
        self.constants.iter().map(|s| s.as_str())
    }

    /// All declared operator-shaped names, used by the lexer for maximal-munch
    /// matching.
    pub(crate) fn operator_names(&self) -> Vec<&str> {
        self.relations
            .keys()
            .chain(self.functions.keys())
            .map(|s| s.as_str())
            .filter(|n| !n.chars().next().unwrap().is_ascii_alphanumeric())
            .collect()
    }

    /// True if two signatures declare exactly the same symbols.
    pub fn same_symbols(&self, other: &Signature) -> bool {
        self.relations == other.relations
            && self.functions == other.functions
            && {
                let mut a = self.constants.clone();
                let mut b = other.constants.clone();
                a.sort();
                b.sort();
                a == b
            }
    }
}

/// Parse a signature description.
///
/// Grammar: statements separated by `;`, each one of
///
/// ```text
/// rel NAME /ARITY [infix]
/// fun NAME /ARITY [infix]
/// const NAME
/// ```
///
/// The equality relation is inserted automatically.
pub fn parse_signature(text: &str) -> Result<Signature, SignatureError> {
    let mut sig = Signature::new();
    // Track (line, col) of each statement start for error reporting.
    let mut line = 1usize;
    let mut col = 1usize;
    let mut stmt_start = (1usize, 1usize);
    let mut stmt = String::new();
    let mut stmts: Vec<(String, usize, usize)> = Vec::new();
    for c in text.chars() {
        if c == ';' {
            stmts.push((stmt.clone(), stmt_start.0, stmt_start.1));
            stmt.clear();
            stmt_start = (line, col + 1);
        } else {
            if stmt.trim().is_empty() && !c.is_whitespace() {
                stmt_start = (line, col);
            }
            stmt.push(c);
        }
        if c == '\n' {
            line += 1;
            col = 1;
        } else {
            col += 1;
        }
    }
    stmts.push((stmt, stmt_start.0, stmt_start.1));

    for (stmt, line, col) in stmts {
        let words: Vec<&str> = stmt.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        let malformed = |message: String| SignatureError::Malformed { message, line, col };
        match words[0] {
            "const" => {
                if words.len() != 2 {
                    return Err(malformed(format!(
                        "expected `const NAME`, got `{}`",
                        stmt.trim()
                    )));
                }
                sig.check_new_name(words[1], line, col)?;
                sig.constants.push(words[1].to_string());
            }
            kw @ ("rel" | "fun") => {
                if words.len() < 3 || words.len() > 4 {
                    return Err(malformed(format!(
                        "expected `{kw} NAME /ARITY [infix]`, got `{}`",
                        stmt.trim()
                    )));
                }
                let name = words[1];
                let arity_word = words[2];
                let arity: usize = arity_word
                    .strip_prefix('/')
                    .and_then(|a| a.parse().ok())
                    .ok_or_else(|| malformed(format!("expected `/ARITY`, got `{arity_word}`")))?;
                let fixity = match words.get(3) {
                    None => Fixity::Prefix,
                    Some(&"infix") => Fixity::Infix,
                    Some(w) => return Err(malformed(format!("unexpected word `{w}`"))),
                };
                sig.check_decl(name, arity, fixity, line, col)?;
                let decl = SymbolDecl { arity, fixity };
                if kw == "rel" {
                    sig.relations.insert(name.to_string(), decl);
                } else {
                    sig.functions.insert(name.to_string(), decl);
                }
            }
            other => {
                return Err(malformed(format!(
                    "expected `rel`, `fun`, or `const`, got `{other}`"
                )));
            }
        }
    }
    Ok(sig)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordered_ring_signature_parses() {
        let sig = parse_signature(
            "rel < /2 infix; fun + /2 infix; fun * /2 infix; fun - /2 infix; const 0; const 1",
        )
        .unwrap();
        assert!(sig.same_symbols(&Signature::ordered_ring()));
        assert_eq!(sig.relation("<").unwrap().fixity, Fixity::Infix);
        assert_eq!(sig.function("+").unwrap().arity, 2);
        assert!(sig.is_constant("0") && sig.is_constant("1"));
    }

    #[test]
    fn empty_text_gives_equality_only() {
        let sig = parse_signature("").unwrap();
        assert!(sig.same_symbols(&Signature::new()));
        assert_eq!(sig.relation("=").unwrap().arity, 2);
    }

    #[test]
    fn graph_signature() {
        let sig = parse_signature("rel E /2").unwrap();
        assert!(sig.same_symbols(&Signature::graph()));
        assert_eq!(sig.relation("E").unwrap().fixity, Fixity::Prefix);
    }

    #[test]
    fn equality_cannot_be_redeclared() {
        let err = parse_signature("rel = /2 infix").unwrap_err();
        assert!(matches!(err, SignatureError::ReservedName { .. }));
    }

    #[test]
    fn duplicate_names_rejected() {
        let err = parse_signature("rel E /2; fun E /1").unwrap_err();
        assert!(matches!(err, SignatureError::DuplicateName { name, .. } if name == "E"));
    }

    #[test]
    fn infix_requires_arity_two() {
        let err = parse_signature("rel R /3 infix").unwrap_err();
        assert!(matches!(err, SignatureError::InfixArity { arity: 3, .. }));
    }

    #[test]
    fn zero_arity_rejected() {
        let err = parse_signature("fun f /0").unwrap_err();
        assert!(matches!(err, SignatureError::ZeroArity { .. }));
    }

    #[test]
    fn malformed_statement_reports_position() {
        let err = parse_signature("rel E /2;\n  bogus stuff").unwrap_err();
        match err {
            SignatureError::Malformed { line, col, .. } => {
                assert_eq!(line, 2);
                assert_eq!(col, 3);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
