//! Text form of copula expressions.
//!
//! ```text
//! expr  := prim | "t(" expr ")" | "s(" expr ")" | "sym(" expr ")"
//!        | "rad(" expr ")" | "mix(" wlist ")"
//! prim  := "pi" | "m" | "w" | "mo:" num "," num | "pp:" num | "pq:" num
//! wlist := num "*" expr { "+" num "*" expr }
//! ```
//!
//! Whitespace between tokens is ignored. Printing an expression with
//! `Display` yields text in the same grammar; `sym` and `rad` print as the
//! mixtures they build.

use std::fmt;

use thiserror::Error;

use crate::catalog;
use crate::copula::{CopulaExpr, Node, Primitive};
use crate::error::{Error, Result};
use crate::transforms;

/// A syntax error, positioned at a byte offset of the input.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at byte {offset}: expected {}, found {}", expected.join(" | "), found_text(found))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<&'static str>,
    pub found: Option<char>,
}

fn found_text(found: &Option<char>) -> String {
    match found {
        Some(c) => format!("{c:?}"),
        None => "end of input".into(),
    }
}

pub fn parse_copula_spec(text: &str) -> Result<CopulaExpr> {
    let mut p = Parser { src: text, pos: 0 };
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error(&["end of input"]));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

const EXPR_START: &[&str] = &["pi", "m", "w", "mo:", "pp:", "pq:", "t(", "s(", "sym(", "rad(", "mix("];

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn error(&self, expected: &[&'static str]) -> Error {
        ParseError {
            offset: self.pos,
            expected: expected.to_vec(),
            found: self.rest().chars().next(),
        }
        .into()
    }

    fn expect(&mut self, token: &'static str) -> Result<()> {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            Ok(())
        } else {
            Err(self.error(&[token]))
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn keyword(&mut self) -> &'a str {
        self.skip_ws();
        let rest = self.rest();
        let len = rest.bytes().take_while(|b| b.is_ascii_lowercase()).count();
        self.pos += len;
        &rest[..len]
    }

    fn expr(&mut self) -> Result<CopulaExpr> {
        self.skip_ws();
        let start = self.pos;
        let word = self.keyword();
        let parsed = match word {
            "pi" => catalog::independence(),
            "m" => catalog::upper_frechet(),
            "w" => catalog::lower_frechet(),
            "mo" => {
                self.expect(":")?;
                let alpha = self.number()?;
                self.expect(",")?;
                let beta = self.number()?;
                catalog::marshall_olkin(alpha, beta)?
            }
            "pp" => {
                self.expect(":")?;
                catalog::perturbed_p(self.number()?)?
            }
            "pq" => {
                self.expect(":")?;
                catalog::perturbed_q(self.number()?)?
            }
            "t" | "s" | "sym" | "rad" => {
                self.expect("(")?;
                let inner = self.expr()?;
                self.expect(")")?;
                match word {
                    "t" => transforms::transpose(&inner),
                    "s" => transforms::survival(&inner),
                    "sym" => transforms::symmetrize(&inner),
                    _ => transforms::radial_symmetrize(&inner),
                }
            }
            "mix" => {
                self.expect("(")?;
                let (weights, children) = self.weighted_list()?;
                self.expect(")")?;
                transforms::mix(&weights, &children)?
            }
            _ => {
                self.pos = start;
                return Err(self.error(EXPR_START));
            }
        };
        Ok(parsed)
    }

    fn weighted_list(&mut self) -> Result<(Vec<f64>, Vec<CopulaExpr>)> {
        let mut weights = Vec::new();
        let mut children = Vec::new();
        loop {
            weights.push(self.number()?);
            self.expect("*")?;
            children.push(self.expr()?);
            if !self.eat("+") {
                return Ok((weights, children));
            }
        }
    }

    /// `[+-]? digits [. digits] [(e|E) [+-]? digits]`, also accepting `.5`.
    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let bytes = self.rest().as_bytes();
        let mut i = 0;
        if matches!(bytes.first(), Some(b'+' | b'-')) {
            i += 1;
        }
        let int_digits = bytes[i..].iter().take_while(|b| b.is_ascii_digit()).count();
        i += int_digits;
        let mut frac_digits = 0;
        if bytes.get(i) == Some(&b'.') {
            frac_digits = bytes[i + 1..].iter().take_while(|b| b.is_ascii_digit()).count();
            if frac_digits > 0 || int_digits > 0 {
                i += 1 + frac_digits;
            }
        }
        if int_digits + frac_digits == 0 {
            return Err(self.error(&["number"]));
        }
        if matches!(bytes.get(i), Some(b'e' | b'E')) {
            let mut j = i + 1;
            if matches!(bytes.get(j), Some(b'+' | b'-')) {
                j += 1;
            }
            let exp_digits = bytes[j.min(bytes.len())..].iter().take_while(|b| b.is_ascii_digit()).count();
            if exp_digits > 0 {
                i = j + exp_digits;
            }
        }
        let literal = &self.rest()[..i];
        let value: f64 = literal.parse().map_err(|_| self.error(&["number"]))?;
        self.pos += i;
        Ok(value)
    }
}

impl fmt::Display for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Primitive::Independence => f.write_str("pi"),
            Primitive::UpperFrechet => f.write_str("m"),
            Primitive::LowerFrechet => f.write_str("w"),
            Primitive::MarshallOlkin { alpha, beta } => write!(f, "mo:{alpha},{beta}"),
            Primitive::PerturbedP { theta } => write!(f, "pp:{theta}"),
            Primitive::PerturbedQ { theta } => write!(f, "pq:{theta}"),
        }
    }
}

impl fmt::Display for CopulaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Primitive(p) => p.fmt(f),
            Node::Transpose(c) => write!(f, "t({c})"),
            Node::Survival(c) => write!(f, "s({c})"),
            Node::Mix(parts) => {
                f.write_str("mix(")?;
                for (k, (w, c)) in parts.iter().enumerate() {
                    if k > 0 {
                        f.write_str("+")?;
                    }
                    write!(f, "{w}*{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Text form of an expression; the inverse of [`parse_copula_spec`] up to
/// structural equality.
pub fn unparse(c: &CopulaExpr) -> String {
    c.to_string()
}
