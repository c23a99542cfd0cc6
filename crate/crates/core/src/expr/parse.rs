use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use thiserror::Error;

use super::node::{Constant, Expr, Func, Kind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    SyntaxError { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::SyntaxError { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => {
                *offset
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if self.pos >= bytes.len() {
            return Ok((Tok::End, start));
        }
        let c = bytes[self.pos] as char;
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            self.pos += 1;
            return Ok((t, start));
        }
        if c.is_ascii_digit() || c == '.' {
            while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_digit() {
                self.pos += 1;
            }
            let int_part = &self.src[start..self.pos];
            let mut frac_part = "";
            if self.pos < bytes.len() && bytes[self.pos] == b'.' {
                self.pos += 1;
                let fs = self.pos;
                while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_digit() {
                    self.pos += 1;
                }
                frac_part = &self.src[fs..self.pos];
            }
            if int_part.is_empty() && frac_part.is_empty() {
                return Err(ParseError::SyntaxError {
                    offset: start,
                    message: "malformed number".into(),
                });
            }
            let digits = format!("{int_part}{frac_part}");
            let n: BigInt = digits.parse().map_err(|_| ParseError::SyntaxError {
                offset: start,
                message: "malformed number".into(),
            })?;
            let d = num_traits::pow(BigInt::from(10), frac_part.len());
            return Ok((Tok::Num(BigRational::new(n, d)), start));
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while self.pos < bytes.len()
                && ((bytes[self.pos] as char).is_ascii_alphanumeric() || bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            return Ok((Tok::Ident(self.src[start..self.pos].to_string()), start));
        }
        let ch = self.src[start..].chars().next().unwrap();
        Err(ParseError::SyntaxError {
            offset: start,
            message: format!("unexpected character `{ch}`"),
        })
    }
}

struct Parser<'a> {
    lex: Lexer<'a>,
    tok: Tok,
    at: usize,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), ParseError> {
        let (t, at) = self.lex.next()?;
        self.tok = t;
        self.at = at;
        Ok(())
    }

    fn fail<T>(&self, message: &str) -> Result<T, ParseError> {
        let message = if self.tok == Tok::End {
            format!("unexpected end of input, {message}")
        } else {
            message.to_string()
        };
        Err(ParseError::SyntaxError {
            offset: self.at,
            message,
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.tok {
                Tok::Plus => {
                    self.bump()?;
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump()?;
                    terms.push(self.term()?.neg());
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::add_many(terms)
        })
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.tok {
                Tok::Star => {
                    self.bump()?;
                    let rhs = self.unary()?;
                    acc = Expr::mul(&acc, &rhs);
                }
                Tok::Slash => {
                    self.bump()?;
                    let at = self.at;
                    let rhs = self.unary()?;
                    if rhs.is_num_zero() {
                        return Err(ParseError::SyntaxError {
                            offset: at,
                            message: "division by zero".into(),
                        });
                    }
                    acc = Expr::div(&acc, &rhs);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.tok == Tok::Minus {
            self.bump()?;
            return Ok(self.unary()?.neg());
        }
        if self.tok == Tok::Plus {
            self.bump()?;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.tok != Tok::Caret {
            return Ok(base);
        }
        self.bump()?;
        let at = self.at;
        // right associative; the exponent may carry its own sign
        let ex = self.unary()?;
        let r = match ex.kind() {
            Kind::Num(r) => r.clone(),
            _ => {
                return Err(ParseError::SyntaxError {
                    offset: at,
                    message: "exponent must be a rational constant".into(),
                })
            }
        };
        if base.is_num_zero() && r < BigRational::zero() {
            return Err(ParseError::SyntaxError {
                offset: at,
                message: "zero raised to a negative power".into(),
            });
        }
        Ok(base.powr(r))
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(r) => {
                self.bump()?;
                Ok(Expr::num(r))
            }
            Tok::LParen => {
                self.bump()?;
                let e = self.expr()?;
                if self.tok != Tok::RParen {
                    return self.fail("expected `)`");
                }
                self.bump()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.at;
                self.bump()?;
                match name.as_str() {
                    "x" => return Ok(Expr::x()),
                    "y" => return Ok(Expr::y()),
                    "pi" => return Ok(Expr::constant(Constant::Pi)),
                    "e" => return Ok(Expr::constant(Constant::E)),
                    _ => {}
                }
                let func = Func::from_name(&name);
                let special = matches!(name.as_str(), "sqrt" | "neg");
                if func.is_none() && !special {
                    return Err(ParseError::UnknownIdentifier { name, offset: at });
                }
                if self.tok != Tok::LParen {
                    return self.fail("expected `(` after function name");
                }
                self.bump()?;
                let arg = self.expr()?;
                if self.tok != Tok::RParen {
                    return self.fail("expected `)`");
                }
                self.bump()?;
                Ok(match (func, name.as_str()) {
                    (Some(f), _) => {
                        if f == Func::Ln && arg.is_num_zero() {
                            return Err(ParseError::SyntaxError {
                                offset: at,
                                message: "logarithm of zero".into(),
                            });
                        }
                        Expr::func(f, &arg)
                    }
                    (None, "sqrt") => arg.sqrt(),
                    _ => arg.neg(),
                })
            }
            _ => self.fail("expected a number, variable, function or `(`"),
        }
    }
}

/// Parses the expression grammar: `+ -` < `* /` < unary `-` < `^`, with
/// function calls `f(expr)`, variables `x`, `y` and constants `pi`, `e`.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        lex: Lexer { src: text, pos: 0 },
        tok: Tok::End,
        at: 0,
    };
    p.bump()?;
    let e = p.expr()?;
    if p.tok != Tok::End {
        return p.fail("unexpected trailing input");
    }
    Ok(e)
}
