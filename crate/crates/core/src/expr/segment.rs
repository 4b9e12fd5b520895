//! Splitting a free-form solution into its chain of expressions.
//!
//! Cuts happen at relational delimiters (`= < > ≤ ≥ ∝ ≈ → ≠ ⇒` and their
//! ASCII spellings) anywhere, at `, ; : ? \n` and sentence periods outside
//! brackets, and around runs of prose words. A prose word is an all-letter
//! word of two or more letters that is neither a known name (`sin`, `pi`, …)
//! nor a function name followed by a single variable letter (`sinx`), plus
//! the pronoun `I`.

use super::lexer::{is_function_name, is_known_name};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("solution contains no mathematical expression")]
pub struct BlankSolution;

const RELATIONS: &[&str] = &["<=", ">=", "=>", "->", "!=", "==", ":="];
const RELATION_CHARS: &[char] = &['=', '<', '>', '≤', '≥', '∝', '≈', '→', '≠', '⇒', '⟹', '~', '≡'];
const BREAK_CHARS: &[char] = &[',', ';', ':', '?', '\n', '\r'];

pub fn tokenize_solution(body: &str) -> Result<Vec<String>, BlankSolution> {
    let mut out = Vec::new();
    for segment in split_segments(body) {
        out.extend(strip_prose(&segment));
    }
    if out.is_empty() {
        Err(BlankSolution)
    } else {
        Ok(out)
    }
}

fn split_segments(body: &str) -> Vec<String> {
    let chars: Vec<char> = body.chars().collect();
    let mut segments = Vec::new();
    let mut cur = String::new();
    let mut depth: i32 = 0;
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if let Some(rel) = RELATIONS.iter().find(|r| starts_with_at(&chars, i, r)) {
            segments.push(std::mem::take(&mut cur));
            depth = 0;
            i += rel.chars().count();
            continue;
        }
        if RELATION_CHARS.contains(&c) {
            segments.push(std::mem::take(&mut cur));
            depth = 0;
            i += 1;
            continue;
        }
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            _ => {}
        }
        let at_top = depth <= 0;
        let is_break = BREAK_CHARS.contains(&c)
            || (c == '.' && !chars.get(i + 1).is_some_and(|n| n.is_ascii_digit()));
        if is_break && (at_top || c == '\n') {
            segments.push(std::mem::take(&mut cur));
            if c == '\n' {
                depth = 0;
            }
        } else {
            cur.push(c);
        }
        i += 1;
    }
    segments.push(cur);
    segments
}

fn starts_with_at(chars: &[char], i: usize, pat: &str) -> bool {
    pat.chars().enumerate().all(|(k, p)| chars.get(i + k) == Some(&p))
}

fn is_prose_word(word: &str) -> bool {
    let w = word.trim_matches(|c: char| matches!(c, '"' | '`' | '!' | '“' | '”'));
    if w == "I" {
        return true;
    }
    if w.chars().count() < 2 || !w.chars().all(|c| c.is_ascii_alphabetic()) {
        return false;
    }
    let lower = w.to_ascii_lowercase();
    if is_known_name(&lower) {
        return false;
    }
    // `sinx`, `lnx`: a call glued to its one-letter argument.
    let glued_call = (2..lower.len()).any(|cut| {
        let (head, tail) = lower.split_at(cut);
        is_function_name(head) && tail.len() == 1
    });
    !glued_call
}

/// Prose words separate expressions within a segment.
fn strip_prose(segment: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur: Vec<&str> = Vec::new();
    for word in segment.split_whitespace() {
        if is_prose_word(word) {
            if !cur.is_empty() {
                out.push(cur.join(" "));
                cur.clear();
            }
        } else {
            cur.push(word);
        }
    }
    if !cur.is_empty() {
        out.push(cur.join(" "));
    }
    out.into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| s.chars().any(char::is_alphanumeric))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chained_equalities() {
        let body = "((x^3 + sin x)/e^x)' = ((3x^2 + cos x)e^x - (x^3 + sin x)e^x)/e^(2x) = (2x^2 - x^3 + cos x - sin x)/e^x";
        let parts = tokenize_solution(body).unwrap();
        assert_eq!(parts.len(), 3);
        assert_eq!(parts[0], "((x^3 + sin x)/e^x)'");
        assert_eq!(parts[2], "(2x^2 - x^3 + cos x - sin x)/e^x");
    }

    #[test]
    fn duplicates_are_kept() {
        assert_eq!(tokenize_solution("x = x").unwrap(), ["x", "x"]);
    }

    #[test]
    fn prose_is_dropped() {
        assert_eq!(tokenize_solution("The answer is 2x-3.").unwrap(), ["2x-3"]);
        assert_eq!(
            tokenize_solution("since sin^2 x + cos^2 x = 1 we get x + 1").unwrap(),
            ["sin^2 x + cos^2 x", "1", "x + 1"]
        );
        assert_eq!(tokenize_solution("so sinx equals y").unwrap(), ["sinx", "y"]);
    }

    #[test]
    fn commas_inside_brackets_do_not_split() {
        assert_eq!(tokenize_solution("f(a, b), c").unwrap(), ["f(a, b)", "c"]);
        assert_eq!(tokenize_solution("x = 2.5, y").unwrap(), ["x", "2.5", "y"]);
    }

    #[test]
    fn other_delimiters() {
        assert_eq!(tokenize_solution("a <= b ≈ c -> d ∝ e").unwrap(), ["a", "b", "c", "d", "e"]);
        assert_eq!(tokenize_solution("a\nb").unwrap(), ["a", "b"]);
    }

    #[test]
    fn blank_is_an_error() {
        assert_eq!(tokenize_solution("   "), Err(BlankSolution));
        assert_eq!(tokenize_solution("I do not know."), Err(BlankSolution));
    }
}
