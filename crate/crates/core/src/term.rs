//! Structured atoms: the term language shared by event arguments and state terms.
//!
//! An [`Atom`] is a symbol, an integer, or an application of a head symbol to
//! argument atoms. The concrete syntax is `name`, `42`, or `name(arg, …)`,
//! e.g. `move(R1,N)` or `locked(S(1,2),1)`.

use std::fmt;

use crate::error::{Error, Result};

/// A structured term with value semantics and a total order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Int(i64),
    Sym(String),
    App(String, Vec<Atom>),
}

impl Atom {
    pub fn sym(name: impl Into<String>) -> Self {
        Atom::Sym(name.into())
    }

    pub fn app(head: impl Into<String>, args: Vec<Atom>) -> Self {
        Atom::App(head.into(), args)
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Atom::Int(n) => Some(*n),
            _ => None,
        }
    }

    /// Parses an atom from its display syntax.
    pub fn parse(input: &str) -> Result<Atom> {
        let mut p = Parser::new(input);
        let atom = p.atom()?;
        p.skip_ws();
        if !p.at_end() {
            return Err(Error::Parse(format!(
                "trailing input after atom in {input:?}"
            )));
        }
        Ok(atom)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Int(n) => write!(f, "{n}"),
            Atom::Sym(s) => write!(f, "{s}"),
            Atom::App(head, args) => {
                write!(f, "{head}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

pub(crate) struct Parser<'a> {
    input: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(input: &'a str) -> Self {
        Parser { input, pos: 0 }
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.input.len()
    }

    fn rest(&self) -> &'a str {
        &self.input[self.pos..]
    }

    pub(crate) fn skip_ws(&mut self) {
        while self.rest().starts_with(|c: char| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        let start = self.pos;
        while self
            .peek()
            .map(|c| c.is_alphanumeric() || c == '_' || c == '-')
            .unwrap_or(false)
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(Error::Parse(format!(
                "expected identifier at byte {} of {:?}",
                start, self.input
            )));
        }
        Ok(&self.input[start..self.pos])
    }

    pub(crate) fn atom(&mut self) -> Result<Atom> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '-' => {
                let start = self.pos;
                self.eat('-');
                while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                    self.pos += 1;
                }
                let text = &self.input[start..self.pos];
                let n = text
                    .parse::<i64>()
                    .map_err(|_| Error::Parse(format!("bad integer {text:?}")))?;
                Ok(Atom::Int(n))
            }
            Some(c) if c.is_alphanumeric() || c == '_' => {
                let name = self.ident()?;
                self.skip_ws();
                if self.eat('(') {
                    let mut args = Vec::new();
                    self.skip_ws();
                    if !self.eat(')') {
                        loop {
                            args.push(self.atom()?);
                            self.skip_ws();
                            if self.eat(')') {
                                break;
                            }
                            if !self.eat(',') {
                                return Err(Error::Parse(format!(
                                    "expected ',' or ')' in argument list of {:?}",
                                    self.input
                                )));
                            }
                        }
                    }
                    Ok(Atom::App(name.to_owned(), args))
                } else {
                    Ok(Atom::Sym(name.to_owned()))
                }
            }
            other => Err(Error::Parse(format!(
                "unexpected {:?} in atom {:?}",
                other, self.input
            ))),
        }
    }
}
