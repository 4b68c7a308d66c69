//! First-order syntax: signatures, terms, formulas, concrete grammar.

mod ast;
mod ax;
mod lexer;
mod parser;
mod printer;
mod signature;

pub use ast::{Formula, Term};
pub use ax::{build_ax_sentence, build_ax_sentence_capped, AxError, DEFAULT_COEFFICIENT_CAP};
pub use parser::{parse_formula, parse_formula_verbose, parse_term, ParseError, ParseWarning};
pub use printer::{print_formula, print_term};
pub use signature::{parse_signature, Fixity, Signature, SignatureError, SymbolKind};
