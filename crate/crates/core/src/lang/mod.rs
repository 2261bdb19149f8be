//! Syntax of the object language: polymorphic lambda calculus with
//! iso-recursive types, integer arithmetic, general references and a
//! computation type `T`.

pub mod ast;
pub mod parse;
pub mod print;

pub use ast::{name, tm_alpha_eq, BinOp, Name, Span, Tm, TmKind, Ty};
pub use parse::{parse, parse_ty, ParseError};
pub use print::{print, print_ty};
