//! Mathematical expressions: lexing, parsing, canonicalization and the
//! splitting of free-form solution text into an ordered expression list.
//!
//! The canonical key of an expression is a prefix serialization of its
//! normalized tree:
//!
//! ```text
//! key    ::= number | symbol | "(" head " " key (" " key)* ")"
//! head   ::= "+" | "*" | "^" | function-name
//! number ::= ["-"] digits ["/" digits]        (reduced, denominator > 1)
//! ```
//!
//! Operands of `+` and `*` appear in the canonical total order
//! (numbers < symbols < functions < powers < products < sums, ties broken
//! recursively left to right), so two expressions share a key exactly when
//! their normalized trees are identical.

mod canon;
mod lexer;
mod parser;
mod segment;

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

pub use canon::canonicalize;
pub use lexer::{is_function_name, is_known_name};
pub use parser::{parse, ParseError};
pub use segment::{tokenize_solution, BlankSolution};

/// Function name used for the postfix derivative mark `'`.
pub const DERIVATIVE: &str = "diff";

/// Expression tree.
///
/// Variant order is significant: the derived `Ord` is the canonical total
/// order used to sort operands of sums and products.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Num(BigRational),
    Sym(String),
    Func(String, Vec<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Mul(Vec<Expr>),
    Add(Vec<Expr>),
}

/// How aggressively [`canonicalize`] rewrites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimplificationLevel {
    /// Constant folding, ordering, like-term collection and exponent merging.
    #[default]
    ArithmeticOnly,
    /// Everything above plus distribution of products and positive integer
    /// powers over sums.
    Full,
}

impl std::str::FromStr for SimplificationLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "arithmetic_only" | "arithmetic" => Ok(Self::ArithmeticOnly),
            "full" => Ok(Self::Full),
            other => Err(format!("unknown simplification level `{other}`")),
        }
    }
}

/// A normalized expression together with its serialized key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub expr: Expr,
    pub key: String,
    pub level: SimplificationLevel,
}

impl Expr {
    pub fn int(n: i64) -> Self {
        Expr::Num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn sym(name: impl Into<String>) -> Self {
        Expr::Sym(name.into())
    }

    pub fn pow(base: Expr, exp: Expr) -> Self {
        Expr::Pow(Box::new(base), Box::new(exp))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(n) if n.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(n) if n.is_one())
    }

    /// Prefix serialization; see the module docs for the grammar.
    pub fn key(&self) -> String {
        let mut out = String::new();
        self.write_key(&mut out);
        out
    }

    fn write_key(&self, out: &mut String) {
        match self {
            Expr::Num(n) => out.push_str(&format_rational(n)),
            Expr::Sym(s) => out.push_str(s),
            Expr::Func(name, args) => write_list(out, name, args),
            Expr::Pow(b, e) => {
                out.push_str("(^ ");
                b.write_key(out);
                out.push(' ');
                e.write_key(out);
                out.push(')');
            }
            Expr::Mul(fs) => write_list(out, "*", fs),
            Expr::Add(ts) => write_list(out, "+", ts),
        }
    }

    /// True when the tree contains no floating point anywhere (always the
    /// case; kept as a cheap runtime check for tests and debug assertions).
    pub fn is_exact(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Sym(_) => true,
            Expr::Func(_, args) | Expr::Mul(args) | Expr::Add(args) => {
                args.iter().all(Expr::is_exact)
            }
            Expr::Pow(b, e) => b.is_exact() && e.is_exact(),
        }
    }
}

fn write_list(out: &mut String, head: &str, items: &[Expr]) {
    out.push('(');
    out.push_str(head);
    for item in items {
        out.push(' ');
        item.write_key(out);
    }
    out.push(')');
}

fn format_rational(n: &BigRational) -> String {
    if n.is_integer() {
        n.numer().to_string()
    } else {
        format!("{}/{}", n.numer(), n.denom())
    }
}

/// Fully parenthesized infix form that [`parse`] reads back.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(n) => {
                if n.is_integer() && !n.is_negative() {
                    write!(f, "{}", n.numer())
                } else {
                    write!(f, "({})", format_rational(n))
                }
            }
            Expr::Sym(s) => f.write_str(s),
            Expr::Func(name, args) if name == DERIVATIVE && args.len() == 1 => {
                write!(f, "({})'", args[0])
            }
            Expr::Func(name, args) => {
                let (open, close) = if is_function_name(name) { ('(', ')') } else { ('[', ']') };
                write!(f, "{name}{open}")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, "{close}")
            }
            Expr::Pow(b, e) => write!(f, "({b})^({e})"),
            Expr::Mul(fs) => write_joined(f, fs, "*"),
            Expr::Add(ts) => write_joined(f, ts, " + "),
        }
    }
}

fn write_joined(f: &mut fmt::Formatter<'_>, items: &[Expr], sep: &str) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "({item})")?;
    }
    Ok(())
}

/// Parse and canonicalize in one step.
pub fn canonical_key(src: &str, level: SimplificationLevel) -> Result<String, ParseError> {
    Ok(canonicalize(&parse(src)?, level).key)
}

/// Key used for a segment that does not parse: the trimmed source text,
/// quoted so it can never collide with a parsed key.
pub fn opaque_key(src: &str) -> String {
    format!("(raw {:?})", src.trim())
}

/// Canonical key for a segment, falling back to [`opaque_key`].
pub fn feature_key(src: &str, level: SimplificationLevel) -> String {
    canonical_key(src, level).unwrap_or_else(|_| opaque_key(src))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_format() {
        let e = parse("2x-3").unwrap();
        assert_eq!(e.key(), "(+ (* 2 x) (* -1 3))");
        assert_eq!(Expr::Num(BigRational::new(3.into(), (-4).into())).key(), "-3/4");
    }

    #[test]
    fn variant_order_matches_documented_order() {
        let items = vec![
            Expr::Add(vec![Expr::sym("x"), Expr::int(1)]),
            Expr::Mul(vec![Expr::int(2), Expr::sym("x")]),
            Expr::pow(Expr::sym("x"), Expr::int(2)),
            Expr::Func("sin".into(), vec![Expr::sym("x")]),
            Expr::sym("x"),
            Expr::int(7),
        ];
        let mut sorted = items.clone();
        sorted.sort();
        let ranks: Vec<_> = sorted.iter().map(|e| e.key()).collect();
        assert_eq!(ranks, vec!["7", "x", "(sin x)", "(^ x 2)", "(* 2 x)", "(+ x 1)"]);
    }

    #[test]
    fn opaque_keys_are_quoted() {
        assert_eq!(feature_key("  2x +* ", SimplificationLevel::ArithmeticOnly), "(raw \"2x +*\")");
    }
}
