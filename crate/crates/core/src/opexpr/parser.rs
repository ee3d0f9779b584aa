//! Recursive-descent parser producing [`Expr`] trees.

use super::lexer::{tokenize, Pos, Tok, Token};
use super::ExprError;

const MAX_NESTING: usize = 200;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num { numer: String, denom: Option<String>, imag: bool, pos: Pos },
    Ident { name: String, pos: Pos },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, Pos),
    Pow(Box<Expr>, i32, Pos),
    Comm(Box<Expr>, Box<Expr>),
    AComm(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>, i32, Pos),
    /// `O(eps^k)`: unknown terms from order k on.
    Order(i32),
}

pub fn parse(src: &str) -> Result<Expr, ExprError> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, i: 0, depth: 0 };
    let e = p.sum()?;
    match &p.peek().tok {
        Tok::Eof => Ok(e),
        t => Err(ExprError::at(p.peek().pos, format!("unexpected {}", describe(t)))),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num { numer, .. } => format!("number {numer}"),
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Sym(c) => format!("'{c}'"),
        Tok::Eof => "end of input".into(),
    }
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.i]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn expect(&mut self, c: char) -> Result<Pos, ExprError> {
        if self.is_sym(c) {
            Ok(self.bump().pos)
        } else {
            let t = self.peek();
            Err(ExprError::at(t.pos, format!("expected '{c}', found {}", describe(&t.tok))))
        }
    }

    fn enter(&mut self) -> Result<(), ExprError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(ExprError::at(self.peek().pos, "expression nested too deeply"));
        }
        Ok(())
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        self.enter()?;
        let mut lhs = self.product()?;
        loop {
            if self.is_sym('+') {
                self.bump();
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.is_sym('-') {
                self.bump();
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.is_sym('*') {
                self.bump();
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.is_sym('/') {
                let pos = self.bump().pos;
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), pos);
            } else {
                break;
            }
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        self.enter()?;
        let out = if self.is_sym('-') {
            self.bump();
            Expr::Neg(Box::new(self.unary()?))
        } else if self.is_sym('+') {
            self.bump();
            self.unary()?
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(out)
    }

    fn integer(&mut self) -> Result<i32, ExprError> {
        let neg = if self.is_sym('-') {
            self.bump();
            true
        } else {
            false
        };
        let t = self.bump();
        match t.tok {
            Tok::Num { numer, denom: None, imag: false } => {
                let v: i32 = numer
                    .parse()
                    .ok()
                    .filter(|v: &i32| *v <= 64)
                    .ok_or_else(|| ExprError::at(t.pos, "exponent out of range"))?;
                Ok(if neg { -v } else { v })
            }
            other => Err(ExprError::at(t.pos, format!("expected integer, found {}", describe(&other)))),
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if self.is_sym('^') {
            let pos = self.bump().pos;
            let n = self.integer()?;
            if self.is_sym('^') {
                return Err(ExprError::at(self.peek().pos, "chained powers need parentheses"));
            }
            return Ok(Expr::Pow(Box::new(base), n, pos));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let t = self.bump();
        match t.tok {
            Tok::Num { numer, denom, imag } => Ok(Expr::Num { numer, denom, imag, pos: t.pos }),
            Tok::Ident(name) if name == "sqrt_series" && self.is_sym('(') => {
                self.bump();
                let arg = self.sum()?;
                self.expect(',')?;
                let k = self.integer()?;
                self.expect(')')?;
                Ok(Expr::Sqrt(Box::new(arg), k, t.pos))
            }
            Tok::Ident(name) if name == "O" && self.is_sym('(') => {
                self.bump();
                let e = self.bump();
                if e.tok != Tok::Ident("eps".into()) {
                    return Err(ExprError::at(e.pos, "order marker must read O(eps^k)"));
                }
                self.expect('^')?;
                let k = self.integer()?;
                self.expect(')')?;
                Ok(Expr::Order(k))
            }
            Tok::Ident(name) => Ok(Expr::Ident { name, pos: t.pos }),
            Tok::Sym('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Sym('[') => {
                let a = self.sum()?;
                self.expect(',')?;
                let b = self.sum()?;
                self.expect(']')?;
                Ok(Expr::Comm(Box::new(a), Box::new(b)))
            }
            Tok::Sym('{') => {
                let a = self.sum()?;
                self.expect(',')?;
                let b = self.sum()?;
                self.expect('}')?;
                Ok(Expr::AComm(Box::new(a), Box::new(b)))
            }
            other => Err(ExprError::at(t.pos, format!("unexpected {}", describe(&other)))),
        }
    }
}
