//! Recursive-descent parser.
//!
//! ```text
//! sum      ::= term (("+" | "-") term)*
//! term     ::= signed (("*" | "/") signed)*
//! signed   ::= ("-" | "+") signed | implicit
//! implicit ::= power power*                      juxtaposition
//! power    ::= postfix ("^" exponent)?
//! exponent ::= ("-" | "+") exponent | postfix ("^" exponent)?
//! postfix  ::= primary "'"*
//! primary  ::= number | "(" sum ")" | call | ident ("[" args "]")?
//! call     ::= func ("^" exponent)? ("(" args ")" | argument)
//! argument ::= power power*                      stops before another function name
//! ```
//!
//! Subtraction and division never appear in the tree: `a - b` becomes
//! `a + (-1)·b` and `a / b` becomes `a · b^(-1)`. `exp(x)` is `e^x`,
//! `sqrt(x)` is `x^(1/2)` and `ln` is `log`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::lexer::{is_function_name, lex, Spanned, Tok};
use super::{Expr, DERIVATIVE};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    /// Byte offset into the source string.
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at byte {}: expected {}, found {}",
            self.offset,
            self.expected.join(" or "),
            self.found
        )
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0, end: src.len() };
    if p.tokens.is_empty() {
        return Err(p.error(&["expression"]));
    }
    let e = p.sum()?;
    if p.pos < p.tokens.len() {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let (offset, found) = match self.tokens.get(self.pos) {
            Some((off, t)) => (*off, t.describe()),
            None => (self.end, "end of input".to_string()),
        };
        ParseError {
            offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        }
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.error(&[what]))
        }
    }

    fn starts_primary(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_) | Tok::Ident(_) | Tok::Open))
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![];
        push_flat_add(&mut terms, self.term()?);
        loop {
            if self.eat(&Tok::Plus) {
                push_flat_add(&mut terms, self.term()?);
            } else if self.eat(&Tok::Minus) {
                push_flat_add(&mut terms, negate(self.term()?));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Add(terms) })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut factors = vec![];
        push_flat_mul(&mut factors, self.signed()?);
        loop {
            if self.eat(&Tok::Star) {
                push_flat_mul(&mut factors, self.signed()?);
            } else if self.eat(&Tok::Slash) {
                factors.push(Expr::pow(self.signed()?, Expr::int(-1)));
            } else {
                break;
            }
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Mul(factors) })
    }

    fn signed(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(negate(self.signed()?));
        }
        if self.eat(&Tok::Plus) {
            return self.signed();
        }
        self.implicit(false)
    }

    /// Juxtaposed factors. Inside a parenthesis-free function argument the
    /// run stops before the next function name, so `sin x cos x` is a
    /// product of two calls.
    fn implicit(&mut self, as_argument: bool) -> Result<Expr, ParseError> {
        let mut factors = vec![];
        push_flat_mul(&mut factors, self.power()?);
        while self.starts_primary() {
            if as_argument && matches!(self.peek(), Some(Tok::Ident(n)) if is_function_name(n)) {
                break;
            }
            push_flat_mul(&mut factors, self.power()?);
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Mul(factors) })
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.postfix()?;
        if self.eat(&Tok::Caret) {
            let exp = self.exponent()?;
            return Ok(Expr::pow(base, exp));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Tok::Minus) {
            return Ok(negate(self.exponent()?));
        }
        if self.eat(&Tok::Plus) {
            return self.exponent();
        }
        self.power()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        while self.eat(&Tok::Prime) {
            e = Expr::Func(DERIVATIVE.to_string(), vec![e]);
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Expr::Num(n))
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect(&Tok::Close, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if is_function_name(&name) {
                    self.call(name)
                } else if self.eat(&Tok::OpenBracket) {
                    let args = self.args(&Tok::CloseBracket, "`]`")?;
                    Ok(Expr::Func(name, args))
                } else {
                    Ok(Expr::Sym(name))
                }
            }
            _ => Err(self.error(&["number", "identifier", "`(`"])),
        }
    }

    fn call(&mut self, name: String) -> Result<Expr, ParseError> {
        // `sin^2 x` squares the call, it does not apply sin to x^2.
        let outer_power = if self.eat(&Tok::Caret) { Some(self.exponent()?) } else { None };
        let args = if self.eat(&Tok::Open) {
            self.args(&Tok::Close, "`)`")?
        } else if self.eat(&Tok::OpenBracket) {
            self.args(&Tok::CloseBracket, "`]`")?
        } else if self.starts_primary() {
            vec![self.implicit(true)?]
        } else {
            return Err(self.error(&["function argument"]));
        };
        let call = build_call(name, args);
        Ok(match outer_power {
            Some(p) => Expr::pow(call, p),
            None => call,
        })
    }

    fn args(&mut self, close: &Tok, what: &str) -> Result<Vec<Expr>, ParseError> {
        let mut args = vec![self.sum()?];
        while self.eat(&Tok::Comma) {
            args.push(self.sum()?);
        }
        self.expect(close, what)?;
        Ok(args)
    }
}

fn build_call(name: String, mut args: Vec<Expr>) -> Expr {
    if args.len() == 1 {
        match name.as_str() {
            "exp" => return Expr::pow(Expr::sym("e"), args.pop().unwrap()),
            "sqrt" => {
                let half = Expr::Num(BigRational::new(BigInt::from(1), BigInt::from(2)));
                return Expr::pow(args.pop().unwrap(), half);
            }
            _ => {}
        }
    }
    Expr::Func(name, args)
}

fn negate(e: Expr) -> Expr {
    let mut factors = vec![Expr::int(-1)];
    push_flat_mul(&mut factors, e);
    Expr::Mul(factors)
}

fn push_flat_mul(out: &mut Vec<Expr>, e: Expr) {
    match e {
        Expr::Mul(inner) => out.extend(inner),
        other => out.push(other),
    }
}

fn push_flat_add(out: &mut Vec<Expr>, e: Expr) {
    match e {
        Expr::Add(inner) => out.extend(inner),
        other => out.push(other),
    }
}
