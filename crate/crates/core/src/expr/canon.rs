//! Rewrite system producing the canonical form of an expression.
//!
//! Applied bottom-up and repeated until the tree stops changing:
//! exact constant folding, flattening, sorting of operands under the
//! derived `Ord` of [`Expr`], like-term collection in sums, merging of equal
//! bases in products, and the identities `x^1 = x`, `x^0 = 1`, `0·a = 0`,
//! `1·a = a`, `a + 0 = a`, `0^p = 0` for positive numeric `p`.
//! `0^0` and `0^(negative)` stay symbolic. No trigonometric, logarithmic or
//! exponential identities are applied at either level.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{CanonicalForm, Expr, SimplificationLevel};

/// Upper bound on passes; the rewrite system reaches its fixpoint in one or
/// two passes on everything we have seen.
const MAX_PASSES: usize = 32;
/// Largest result (in bits) an integer power of a constant may produce
/// before it is left unevaluated.
const MAX_POWER_BITS: u64 = 4096;
/// Largest integer power of a sum that `Full` expands.
const MAX_EXPAND_POWER: u32 = 12;

pub fn canonicalize(e: &Expr, level: SimplificationLevel) -> CanonicalForm {
    let rw = Rewriter { level };
    let mut cur = rw.simplify(e);
    for _ in 0..MAX_PASSES {
        let next = rw.simplify(&cur);
        if next == cur {
            break;
        }
        cur = next;
    }
    CanonicalForm { key: cur.key(), expr: cur, level }
}

struct Rewriter {
    level: SimplificationLevel,
}

impl Rewriter {
    fn full(&self) -> bool {
        self.level == SimplificationLevel::Full
    }

    fn simplify(&self, e: &Expr) -> Expr {
        match e {
            Expr::Num(_) | Expr::Sym(_) => e.clone(),
            Expr::Func(name, args) => {
                Expr::Func(name.clone(), args.iter().map(|a| self.simplify(a)).collect())
            }
            Expr::Pow(b, x) => self.pow(self.simplify(b), self.simplify(x)),
            Expr::Mul(fs) => self.mul(fs.iter().map(|f| self.simplify(f)).collect()),
            Expr::Add(ts) => self.add(ts.iter().map(|t| self.simplify(t)).collect()),
        }
    }

    /// `base^exp` for already-canonical operands.
    fn pow(&self, base: Expr, exp: Expr) -> Expr {
        if base.is_one() {
            return Expr::int(1);
        }
        let Expr::Num(n) = &exp else {
            return Expr::pow(base, exp);
        };
        if n.is_zero() {
            return if base.is_zero() { Expr::pow(base, exp) } else { Expr::int(1) };
        }
        if n.is_one() {
            return base;
        }
        match &base {
            Expr::Num(b) if b.is_zero() => {
                if n.is_positive() {
                    Expr::int(0)
                } else {
                    Expr::pow(base, exp)
                }
            }
            Expr::Num(b) if n.is_integer() => match checked_int_pow(b, n.numer()) {
                Some(v) => Expr::Num(v),
                None => Expr::pow(base, exp),
            },
            Expr::Pow(inner, y) if n.is_integer() => {
                let merged = self.mul(vec![(**y).clone(), exp.clone()]);
                self.pow((**inner).clone(), merged)
            }
            Expr::Mul(fs) if n.is_integer() => {
                let parts = fs.iter().map(|f| self.pow(f.clone(), exp.clone())).collect();
                self.mul(parts)
            }
            Expr::Add(_) if self.full() && n.is_integer() && n.is_positive() => {
                match n.numer().to_u32().filter(|&k| k <= MAX_EXPAND_POWER) {
                    Some(k) => self.mul(vec![base.clone(); k as usize]),
                    None => Expr::pow(base, exp),
                }
            }
            _ => Expr::pow(base, exp),
        }
    }

    fn mul(&self, factors: Vec<Expr>) -> Expr {
        let mut coef = BigRational::one();
        let mut others = Vec::with_capacity(factors.len());
        flatten_mul(factors, &mut coef, &mut others);
        if coef.is_zero() {
            return Expr::int(0);
        }

        if self.full() && others.iter().any(|f| matches!(f, Expr::Add(_))) {
            return self.distribute(coef, others);
        }

        // Merge equal bases by adding exponents.
        let mut groups: Vec<(Expr, Vec<Expr>)> = Vec::new();
        for f in others {
            let (base, exp) = match f {
                Expr::Pow(b, x) => (*b, *x),
                other => (other, Expr::int(1)),
            };
            match groups.iter_mut().find(|(b, _)| *b == base) {
                Some((_, exps)) => exps.push(exp),
                None => groups.push((base, vec![exp])),
            }
        }

        let mut rebuilt = Vec::with_capacity(groups.len());
        let mut needs_refold = false;
        for (base, exps) in groups {
            let exp = if exps.len() == 1 { exps.into_iter().next().unwrap() } else { self.add(exps) };
            let f = self.pow(base, exp);
            needs_refold |= matches!(f, Expr::Num(_) | Expr::Mul(_));
            rebuilt.push(f);
        }
        if needs_refold {
            rebuilt.push(Expr::Num(coef));
            return self.mul(rebuilt);
        }

        rebuilt.sort();
        build_product(coef, rebuilt)
    }

    fn distribute(&self, coef: BigRational, factors: Vec<Expr>) -> Expr {
        let mut terms: Vec<Vec<Expr>> = vec![vec![Expr::Num(coef)]];
        for f in factors {
            match f {
                Expr::Add(summands) => {
                    let mut next = Vec::with_capacity(terms.len() * summands.len());
                    for t in &terms {
                        for s in &summands {
                            let mut prod = t.clone();
                            prod.push(s.clone());
                            next.push(prod);
                        }
                    }
                    terms = next;
                }
                other => terms.iter_mut().for_each(|t| t.push(other.clone())),
            }
        }
        self.add(terms.into_iter().map(|t| self.mul(t)).collect())
    }

    fn add(&self, terms: Vec<Expr>) -> Expr {
        let mut flat = Vec::with_capacity(terms.len());
        for t in terms {
            match t {
                Expr::Add(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }

        let mut constant = BigRational::zero();
        let mut groups: Vec<(Expr, BigRational)> = Vec::new();
        for t in flat {
            let (rest, c) = match t {
                Expr::Num(n) => {
                    constant += n;
                    continue;
                }
                Expr::Mul(mut fs) if matches!(fs.first(), Some(Expr::Num(_))) => {
                    let Expr::Num(c) = fs.remove(0) else { unreachable!() };
                    let rest = if fs.len() == 1 { fs.pop().unwrap() } else { Expr::Mul(fs) };
                    (rest, c)
                }
                other => (other, BigRational::one()),
            };
            match groups.iter_mut().find(|(r, _)| *r == rest) {
                Some((_, acc)) => *acc += c,
                None => groups.push((rest, c)),
            }
        }

        let mut out = Vec::with_capacity(groups.len() + 1);
        if !constant.is_zero() {
            out.push(Expr::Num(constant));
        }
        for (rest, c) in groups {
            if c.is_zero() {
                continue;
            }
            let factors = match rest {
                Expr::Mul(fs) => fs,
                other => vec![other],
            };
            out.push(build_product(c, factors));
        }
        out.sort();
        match out.len() {
            0 => Expr::int(0),
            1 => out.pop().unwrap(),
            _ => Expr::Add(out),
        }
    }
}

fn flatten_mul(factors: Vec<Expr>, coef: &mut BigRational, out: &mut Vec<Expr>) {
    for f in factors {
        match f {
            Expr::Num(n) => *coef *= n,
            Expr::Mul(inner) => flatten_mul(inner, coef, out),
            other => out.push(other),
        }
    }
}

/// Product of a coefficient and sorted non-constant factors.
fn build_product(coef: BigRational, mut factors: Vec<Expr>) -> Expr {
    if factors.is_empty() {
        return Expr::Num(coef);
    }
    if coef.is_one() {
        return if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Mul(factors) };
    }
    let mut all = Vec::with_capacity(factors.len() + 1);
    all.push(Expr::Num(coef));
    all.extend(factors);
    Expr::Mul(all)
}

fn checked_int_pow(base: &BigRational, exp: &BigInt) -> Option<BigRational> {
    let e = exp.to_i64()?;
    let bits = base.numer().bits().max(base.denom().bits());
    if bits.saturating_mul(e.unsigned_abs()) > MAX_POWER_BITS {
        return None;
    }
    let mag = i32::try_from(e.unsigned_abs()).ok()?;
    let p = num_traits::pow::pow(base.clone(), mag as usize);
    Some(if e < 0 { p.recip() } else { p })
}
