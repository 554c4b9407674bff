use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::poly::{Poly, Rational};

/// Parses the polynomial grammar over the named variables:
/// integer and `a/b` rational literals, identifiers, `+ - * ^`, parentheses.
/// `^` binds tightest, then unary minus, then `*`, then `+`/`-`.
/// Whitespace is insignificant; errors carry byte offsets.
pub fn parse_poly(text: &str, vars: &[String]) -> Result<Poly> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens: &tokens, pos: 0, vars, text_len: text.len() };
    let poly = parser.expr()?;
    match parser.peek() {
        None => Ok(poly),
        Some(t) => Err(parser.unexpected(t)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                out.push(Spanned { tok: Tok::Plus, offset: i });
                i += 1;
            }
            b'-' => {
                out.push(Spanned { tok: Tok::Minus, offset: i });
                i += 1;
            }
            b'*' => {
                out.push(Spanned { tok: Tok::Star, offset: i });
                i += 1;
            }
            b'^' => {
                out.push(Spanned { tok: Tok::Caret, offset: i });
                i += 1;
            }
            b'/' => {
                out.push(Spanned { tok: Tok::Slash, offset: i });
                i += 1;
            }
            b'(' => {
                out.push(Spanned { tok: Tok::LParen, offset: i });
                i += 1;
            }
            b')' => {
                out.push(Spanned { tok: Tok::RParen, offset: i });
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let digits = &text[start..i];
                let value: BigInt = digits.parse().expect("digit run parses");
                out.push(Spanned { tok: Tok::Int(value), offset: start });
            }
            b'A'..=b'Z' | b'a'..=b'z' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push(Spanned { tok: Tok::Ident(text[start..i].to_string()), offset: start });
            }
            _ => {
                return Err(Error::Parse {
                    offset: i,
                    message: format!("unexpected character `{}`", &text[i..].chars().next().unwrap()),
                });
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Spanned],
    pos: usize,
    vars: &'a [String],
    text_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Spanned> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&'a Spanned> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, t: &Spanned) -> Error {
        Error::Parse { offset: t.offset, message: format!("unexpected token `{}`", tok_name(&t.tok)) }
    }

    fn eof(&self) -> Error {
        Error::Parse { offset: self.text_len, message: "unexpected end of input".into() }
    }

    fn expr(&mut self) -> Result<Poly> {
        let mut acc = self.term()?;
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = &acc + &rhs;
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = &acc - &rhs;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Poly> {
        let mut acc = self.factor()?;
        while let Some(t) = self.peek() {
            match t.tok {
                Tok::Star => {
                    self.bump();
                    let rhs = self.factor()?;
                    acc = &acc * &rhs;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Poly> {
        match self.peek() {
            Some(t) if t.tok == Tok::Minus => {
                self.bump();
                let inner = self.factor()?;
                Ok(-&inner)
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Poly> {
        let base = self.atom()?;
        match self.peek() {
            Some(t) if t.tok == Tok::Caret => {
                self.bump();
                let e = self.exponent()?;
                Ok(base.pow(e))
            }
            _ => Ok(base),
        }
    }

    fn exponent(&mut self) -> Result<u32> {
        match self.bump() {
            Some(Spanned { tok: Tok::Int(n), offset }) => {
                u32::try_from(n.clone()).map_err(|_| Error::Parse {
                    offset: *offset,
                    message: "exponent out of range".into(),
                })
            }
            Some(t) => Err(self.unexpected(t)),
            None => Err(self.eof()),
        }
    }

    fn atom(&mut self) -> Result<Poly> {
        let t = self.bump().ok_or_else(|| self.eof())?;
        match &t.tok {
            Tok::Int(n) => {
                // A slash after an integer continues a rational literal.
                let mut value = BigRational::from_integer(n.clone());
                if let Some(next) = self.peek() {
                    if next.tok == Tok::Slash {
                        self.bump();
                        let d = self.bump().ok_or_else(|| self.eof())?;
                        match &d.tok {
                            Tok::Int(den) if !num_traits::Zero::is_zero(den) => {
                                value = BigRational::new(n.clone(), den.clone());
                            }
                            Tok::Int(_) => {
                                return Err(Error::Parse {
                                    offset: d.offset,
                                    message: "zero denominator".into(),
                                });
                            }
                            _ => return Err(self.unexpected(d)),
                        }
                    }
                }
                Ok(Poly::constant(self.vars.len(), value))
            }
            Tok::Ident(name) => match self.vars.iter().position(|v| v == name) {
                Some(idx) => Ok(Poly::var(self.vars.len(), idx)),
                None => Err(Error::UnknownVariable { name: name.clone(), offset: t.offset }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Spanned { tok: Tok::RParen, .. }) => Ok(inner),
                    Some(t) => Err(self.unexpected(t)),
                    None => Err(self.eof()),
                }
            }
            _ => Err(self.unexpected(t)),
        }
    }
}

fn tok_name(t: &Tok) -> String {
    match t {
        Tok::Int(n) => n.to_string(),
        Tok::Ident(s) => s.clone(),
        Tok::Plus => "+".into(),
        Tok::Minus => "-".into(),
        Tok::Star => "*".into(),
        Tok::Caret => "^".into(),
        Tok::Slash => "/".into(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
    }
}

/// Parses a standalone rational literal: `a`, `-a`, `a/b`, `-a/b`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let trimmed = text.trim();
    let (neg, body) = match trimmed.strip_prefix('-') {
        Some(rest) => (true, rest.trim()),
        None => (false, trimmed),
    };
    let parts: Vec<&str> = body.split('/').collect();
    let make_err = || Error::Parse { offset: 0, message: format!("invalid rational `{trimmed}`") };
    let value = match parts.as_slice() {
        [n] => {
            let num: BigInt = n.trim().parse().map_err(|_| make_err())?;
            BigRational::from_integer(num)
        }
        [n, d] => {
            let num: BigInt = n.trim().parse().map_err(|_| make_err())?;
            let den: BigInt = d.trim().parse().map_err(|_| make_err())?;
            if num_traits::Zero::is_zero(&den) {
                return Err(make_err());
            }
            BigRational::new(num, den)
        }
        _ => return Err(make_err()),
    };
    Ok(if neg { -value } else { value })
}

/// Convenience wrapper: `1` in a context of `n` variables.
pub fn poly_one(n: usize) -> Poly {
    Poly::constant(n, BigRational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::MonomialOrder;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_binomial_square() {
        let vs = names(&["x", "y"]);
        let f = parse_poly("x^2 + 2*x*y + y^2", &vs).unwrap();
        let g = parse_poly("(x + y)*(x + y)", &vs).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn parses_difference_of_squares() {
        let vs = names(&["x", "y"]);
        let f = parse_poly("(x + y)*(x - y)", &vs).unwrap();
        let g = parse_poly("x^2 - y^2", &vs).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn parses_rational_literals() {
        let vs = names(&["x"]);
        let f = parse_poly("1/2*x - 1/3", &vs).unwrap();
        assert_eq!(f.render(&vs, &MonomialOrder::GrevLex), "1/2*x - 1/3");
    }

    #[test]
    fn unary_minus_binds_below_power() {
        let vs = names(&["x"]);
        let f = parse_poly("-x^2", &vs).unwrap();
        let g = parse_poly("0 - x^2", &vs).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn reports_offset_of_unknown_variable() {
        let vs = names(&["x"]);
        let err = parse_poly("x + zz*x", &vs).unwrap_err();
        assert_eq!(err, Error::UnknownVariable { name: "zz".into(), offset: 4 });
    }

    #[test]
    fn reports_offset_of_syntax_errors() {
        let vs = names(&["x"]);
        match parse_poly("x + ", &vs).unwrap_err() {
            Error::Parse { offset, .. } => assert_eq!(offset, 4),
            other => panic!("unexpected error {other:?}"),
        }
        match parse_poly("2x", &vs).unwrap_err() {
            Error::Parse { offset, .. } => assert_eq!(offset, 1),
            other => panic!("unexpected error {other:?}"),
        }
        match parse_poly("x $ y", &vs).unwrap_err() {
            Error::Parse { offset, .. } => assert_eq!(offset, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn slash_outside_literal_is_rejected() {
        let vs = names(&["x"]);
        assert!(matches!(parse_poly("x/2", &vs), Err(Error::Parse { .. })));
    }

    #[test]
    fn parse_rational_forms() {
        assert_eq!(parse_rational("3").unwrap(), crate::poly::rat_int(3));
        assert_eq!(parse_rational("-3/6").unwrap(), parse_rational("-1/2").unwrap());
        assert!(parse_rational("3/0").is_err());
    }
}
