//! Text formats for polynomials.
//!
//! Two forms are accepted: comma-separated ascending coefficients
//! (`"0,1,1"` is `x + x^2`) and a small expression grammar over `x` with
//! integer literals, `+`, `-`, `*`, `^` and parentheses (`"x*(x+1)"`).

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::IntPoly;
use crate::error::{Error, Result};

const MAX_EXPONENT: u32 = 64;

pub fn parse_poly(text: &str) -> Result<IntPoly> {
    let t = text.trim();
    if t.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    if t.contains(['x', 'X']) {
        parse_expr(t)
    } else {
        parse_coeff_list(t)
    }
}

fn parse_coeff_list(t: &str) -> Result<IntPoly> {
    let coeffs = t
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<BigInt>()
                .map_err(|e| Error::Parse(format!("bad coefficient {s:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IntPoly::new(coeffs))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    X,
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' => {}
            'x' | 'X' => out.push(Tok::X),
            '+' => out.push(Tok::Plus),
            '-' | '\u{2212}' => out.push(Tok::Minus),
            '*' => out.push(Tok::Star),
            '^' => out.push(Tok::Caret),
            '(' => out.push(Tok::LParen),
            ')' => out.push(Tok::RParen),
            '0'..='9' => {
                let start = i;
                while i + 1 < chars.len() && chars[i + 1].is_ascii_digit() {
                    i += 1;
                }
                let lit: String = chars[start..=i].iter().collect();
                out.push(Tok::Num(lit.parse().expect("digits")));
            }
            other => return Err(Error::Parse(format!("unexpected character {other:?}"))),
        }
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<IntPoly> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t {
                Tok::Plus => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    // term := unary ('*'? unary)*   (juxtaposition such as "2x" multiplies)
    fn term(&mut self) -> Result<IntPoly> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(Tok::X) | Some(Tok::LParen) | Some(Tok::Num(_)) => {
                    acc = &acc * &self.unary()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<IntPoly> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(-&self.unary()?)
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<IntPoly> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let e = match self.next() {
                Some(Tok::Num(n)) => n
                    .to_u32()
                    .filter(|&e| e <= MAX_EXPONENT)
                    .ok_or_else(|| Error::Parse(format!("exponent {n} out of range")))?,
                other => return Err(Error::Parse(format!("expected exponent, got {other:?}"))),
            };
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<IntPoly> {
        match self.next() {
            Some(Tok::Num(n)) => Ok(IntPoly::constant(n)),
            Some(Tok::X) => Ok(IntPoly::x()),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(inner),
                    other => Err(Error::Parse(format!("expected ')', got {other:?}"))),
                }
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

fn parse_expr(s: &str) -> Result<IntPoly> {
    let mut p = Parser {
        toks: tokenize(s)?,
        pos: 0,
    };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!(
            "trailing input after position {}",
            p.pos
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_list() {
        assert_eq!(parse_poly("0,1,1").unwrap(), IntPoly::from_i64s(&[0, 1, 1]));
        assert_eq!(
            parse_poly(" 9, -12, 4 ").unwrap(),
            IntPoly::from_i64s(&[9, -12, 4])
        );
    }

    #[test]
    fn expressions() {
        assert_eq!(
            parse_poly("x*(x+1)").unwrap(),
            IntPoly::from_i64s(&[0, 1, 1])
        );
        assert_eq!(
            parse_poly("x^2*(x+1)").unwrap(),
            IntPoly::from_i64s(&[0, 0, 1, 1])
        );
        assert_eq!(
            parse_poly("(2x-3)^2").unwrap(),
            IntPoly::from_i64s(&[9, -12, 4])
        );
        assert_eq!(
            parse_poly("-x^2 - x").unwrap(),
            IntPoly::from_i64s(&[0, -1, -1])
        );
        assert_eq!(
            parse_poly("2*x^2+x").unwrap(),
            IntPoly::from_i64s(&[0, 1, 2])
        );
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_poly("").is_err());
        assert!(parse_poly("x+").is_err());
        assert!(parse_poly("(x+1").is_err());
        assert!(parse_poly("1,a").is_err());
        assert!(parse_poly("x^999").is_err());
        assert!(parse_poly("y+1").is_err());
    }
}
