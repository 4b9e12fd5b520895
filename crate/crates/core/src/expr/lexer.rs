use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::parser::ParseError;

const FUNCTIONS: &[&str] = &[
    "arcsin", "arccos", "arctan", "asin", "acos", "atan", "sinh", "cosh", "tanh", "sin", "cos",
    "tan", "sec", "csc", "cot", "exp", "log", "ln", "sqrt",
];

const GREEK: &[(&str, char)] = &[
    ("alpha", 'α'),
    ("beta", 'β'),
    ("gamma", 'γ'),
    ("delta", 'δ'),
    ("epsilon", 'ε'),
    ("zeta", 'ζ'),
    ("theta", 'θ'),
    ("eta", 'η'),
    ("iota", 'ι'),
    ("kappa", 'κ'),
    ("lambda", 'λ'),
    ("mu", 'μ'),
    ("nu", 'ν'),
    ("xi", 'ξ'),
    ("omicron", 'ο'),
    ("pi", 'π'),
    ("rho", 'ρ'),
    ("sigma", 'σ'),
    ("tau", 'τ'),
    ("upsilon", 'υ'),
    ("phi", 'φ'),
    ("chi", 'χ'),
    ("psi", 'ψ'),
    ("omega", 'ω'),
];

pub fn is_function_name(name: &str) -> bool {
    FUNCTIONS.contains(&name)
}

/// Function names and spelled-out Greek letters.
pub fn is_known_name(name: &str) -> bool {
    is_function_name(name) || GREEK.iter().any(|(n, _)| *n == name)
}

fn greek_name(c: char) -> Option<&'static str> {
    GREEK.iter().find(|(_, g)| *g == c).map(|(n, _)| *n)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Num(BigRational),
    Ident(String),
    Open,
    Close,
    OpenBracket,
    CloseBracket,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Prime,
    Comma,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Num(n) => format!("number {n}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Open => "`(`".into(),
            Tok::Close => "`)`".into(),
            Tok::OpenBracket => "`[`".into(),
            Tok::CloseBracket => "`]`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Prime => "`'`".into(),
            Tok::Comma => "`,`".into(),
        }
    }
}

/// Token with the byte offset where it starts.
pub type Spanned = (usize, Tok);

pub fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            c if c.is_whitespace() || c == '$' => i += 1,
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                    i += 1;
                }
                let text: String = chars[start..i].iter().map(|(_, c)| c).collect();
                out.push((pos, Tok::Num(parse_decimal(&text, pos)?)));
            }
            '\\' => i += 1,
            c if c.is_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].1.is_alphabetic() {
                    i += 1;
                }
                split_identifiers(&chars[start..i], &mut out);
            }
            '(' | '{' => {
                out.push((pos, Tok::Open));
                i += 1;
            }
            ')' | '}' => {
                out.push((pos, Tok::Close));
                i += 1;
            }
            '[' => {
                out.push((pos, Tok::OpenBracket));
                i += 1;
            }
            ']' => {
                out.push((pos, Tok::CloseBracket));
                i += 1;
            }
            '+' => {
                out.push((pos, Tok::Plus));
                i += 1;
            }
            '-' | '−' | '–' => {
                out.push((pos, Tok::Minus));
                i += 1;
            }
            '*' | '·' | '×' | '⋅' => {
                // `**` is accepted as exponentiation.
                if c == '*' && chars.get(i + 1).map(|p| p.1) == Some('*') {
                    out.push((pos, Tok::Caret));
                    i += 2;
                } else {
                    out.push((pos, Tok::Star));
                    i += 1;
                }
            }
            '/' | '÷' => {
                out.push((pos, Tok::Slash));
                i += 1;
            }
            '^' | '∧' => {
                out.push((pos, Tok::Caret));
                i += 1;
            }
            '\'' | '′' => {
                out.push((pos, Tok::Prime));
                i += 1;
            }
            ',' => {
                out.push((pos, Tok::Comma));
                i += 1;
            }
            '²' | '³' => {
                out.push((pos, Tok::Caret));
                out.push((pos, Tok::Num(BigRational::from_integer(BigInt::from(if c == '²' { 2 } else { 3 })))));
                i += 1;
            }
            other => {
                return Err(ParseError {
                    offset: pos,
                    expected: vec!["expression".into()],
                    found: format!("character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

fn parse_decimal(text: &str, pos: usize) -> Result<BigRational, ParseError> {
    let bad = || ParseError {
        offset: pos,
        expected: vec!["number".into()],
        found: format!("`{text}`"),
    };
    let (int_part, frac_part) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if frac_part.contains('.') || (int_part.is_empty() && frac_part.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().map_err(|_| bad())?;
    let mut denom = BigInt::one();
    for _ in 0..frac_part.len() {
        denom *= 10;
    }
    if denom.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(numer, denom))
}

/// Split a run of letters into identifiers: the longest known name at each
/// position wins, anything else is a one-letter symbol (`2xy` is `2·x·y`).
fn split_identifiers(run: &[(usize, char)], out: &mut Vec<Spanned>) {
    let mut i = 0;
    while i < run.len() {
        let rest: String = run[i..].iter().map(|(_, c)| c.to_ascii_lowercase()).collect();
        let best = FUNCTIONS
            .iter()
            .copied()
            .chain(GREEK.iter().map(|(n, _)| *n))
            .filter(|name| rest.starts_with(name))
            .max_by_key(|name| name.len());
        let (pos, c) = run[i];
        match best {
            Some(name) if run[i..i + name.len()].iter().all(|(_, c)| c.is_ascii()) => {
                let canonical = if name == "ln" { "log" } else { name };
                out.push((pos, Tok::Ident(canonical.to_string())));
                i += name.len();
            }
            _ => {
                let name = greek_name(c).map(str::to_string).unwrap_or_else(|| c.to_string());
                out.push((pos, Tok::Ident(name)));
                i += 1;
            }
        }
    }
}
