//! Recursive-descent parser for the ASCII term syntax.
//!
//! ```text
//! term  := sum
//! sum   := prod ('+' prod)*
//! prod  := comp ('.' comp)*
//! comp  := unary (';' unary)*
//! unary := '-' unary | atom '~'*
//! atom  := '0' | '1' | "1'" | "0'" | var | '(' term ')'
//! var   := 'x' digit+
//! ```
//!
//! All binary operators associate to the left. Whitespace is ignored between
//! tokens. The parser does not know the signature; variable indices are
//! checked later by [`crate::term::Signature::check`].

use thiserror::Error;

use crate::term::Term;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at position {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Zero,
    One,
    Identity,
    Diversity,
    Var(usize),
    LParen,
    RParen,
    Plus,
    Dot,
    Semi,
    Minus,
    Tilde,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Returns the next token and the position where it starts.
    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let Some(&c) = self.src.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        self.pos += 1;
        let tok = match c {
            b'0' | b'1' => {
                if self.src.get(self.pos) == Some(&b'\'') {
                    self.pos += 1;
                    if c == b'1' {
                        Tok::Identity
                    } else {
                        Tok::Diversity
                    }
                } else if c == b'1' {
                    Tok::One
                } else {
                    Tok::Zero
                }
            }
            b'x' => {
                let digits_start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                if digits_start == self.pos {
                    return Err(ParseError { pos: start, message: "expected digits after `x`".into() });
                }
                let text = std::str::from_utf8(&self.src[digits_start..self.pos]).unwrap();
                let index = text.parse().map_err(|_| ParseError {
                    pos: start,
                    message: format!("variable index `{text}` too large"),
                })?;
                Tok::Var(index)
            }
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'+' => Tok::Plus,
            b'.' => Tok::Dot,
            b';' => Tok::Semi,
            b'-' => Tok::Minus,
            b'~' => Tok::Tilde,
            other => {
                return Err(ParseError {
                    pos: start,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        };
        Ok((tok, start))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    tok_pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer { src: text.as_bytes(), pos: 0 };
        let (tok, tok_pos) = lexer.next()?;
        Ok(Parser { lexer, tok, tok_pos })
    }

    fn bump(&mut self) -> Result<(), ParseError> {
        let (tok, pos) = self.lexer.next()?;
        self.tok = tok;
        self.tok_pos = pos;
        Ok(())
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { pos: self.tok_pos, message: message.into() })
    }

    fn sum(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.prod()?;
        while self.tok == Tok::Plus {
            self.bump()?;
            lhs = lhs.sum(self.prod()?);
        }
        Ok(lhs)
    }

    fn prod(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.comp()?;
        while self.tok == Tok::Dot {
            self.bump()?;
            lhs = lhs.meet(self.comp()?);
        }
        Ok(lhs)
    }

    fn comp(&mut self) -> Result<Term, ParseError> {
        let mut lhs = self.unary()?;
        while self.tok == Tok::Semi {
            self.bump()?;
            lhs = lhs.compose(self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Term, ParseError> {
        if self.tok == Tok::Minus {
            self.bump()?;
            return Ok(self.unary()?.not());
        }
        let mut t = self.atom()?;
        while self.tok == Tok::Tilde {
            self.bump()?;
            t = t.converse();
        }
        Ok(t)
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        let t = match self.tok {
            Tok::Zero => Term::Zero,
            Tok::One => Term::One,
            Tok::Identity => Term::Identity,
            Tok::Diversity => Term::diversity(),
            Tok::Var(i) => Term::Var(i),
            Tok::LParen => {
                self.bump()?;
                let inner = self.sum()?;
                if self.tok != Tok::RParen {
                    return self.error("expected `)`");
                }
                inner
            }
            Tok::End => return self.error("unexpected end of input"),
            other => return self.error(format!("unexpected token {other:?}")),
        };
        self.bump()?;
        Ok(t)
    }
}

pub fn parse(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.sum()?;
    if p.tok != Tok::End {
        return p.error("trailing input");
    }
    Ok(t)
}
