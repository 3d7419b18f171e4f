//! Tiny arithmetic grammar for the `classify` command: literals, `drho`,
//! `drho^a`, `eps`, `log`, `exp`, `sin`, `cos`, `sqrt`, the four operations
//! and parentheses.

use gsf_core::ring::{Ctx, GenNum};

#[derive(Debug, Clone)]
pub enum Ast {
    Lit(f64),
    Drho,
    Eps,
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, f64),
    Fn1(&'static str, Box<Ast>),
}

pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos,
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Ast::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Ast::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Ast::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Ast::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Ast, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Ast::Neg(Box::new(self.factor()?)));
        }
        let atom = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let sign = if self.peek() == Some(b'-') {
                self.pos += 1;
                -1.0
            } else {
                1.0
            };
            let n = self.number()?;
            return Ok(Ast::Pow(Box::new(atom), sign * n));
        }
        Ok(atom)
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit()
                || self.src[self.pos] == b'.'
                || (self.pos > start && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E'))
                || (self.pos > start
                    && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
                    && matches!(self.src[self.pos - 1], b'e' | b'E')))
        {
            self.pos += 1;
        }
        if start == self.pos {
            return self.fail("expected a number");
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ParseError {
                pos: start,
                message: "malformed number".into(),
            })
    }

    fn atom(&mut self) -> Result<Ast, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.fail("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Ast::Lit(self.number()?)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match word {
                    "drho" => Ok(Ast::Drho),
                    "eps" => Ok(Ast::Eps),
                    "log" | "exp" | "sin" | "cos" | "sqrt" => {
                        if self.peek() != Some(b'(') {
                            return self.fail(format!("expected `(` after {word}"));
                        }
                        self.pos += 1;
                        let inner = self.expr()?;
                        if self.peek() != Some(b')') {
                            return self.fail("expected `)`");
                        }
                        self.pos += 1;
                        let name = match word {
                            "log" => "log",
                            "exp" => "exp",
                            "sin" => "sin",
                            "cos" => "cos",
                            _ => "sqrt",
                        };
                        Ok(Ast::Fn1(name, Box::new(inner)))
                    }
                    other => self.fail(format!("unknown symbol `{other}`")),
                }
            }
            Some(c) => self.fail(format!("unexpected character `{}`", c as char)),
            None => self.fail("unexpected end of expression"),
        }
    }
}

pub fn parse(src: &str) -> Result<Ast, ParseError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let ast = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(ParseError {
            pos: p.pos,
            message: "trailing input".into(),
        });
    }
    Ok(ast)
}

fn eval_ast(ast: &Ast, rho: f64, ln_rho: f64, eps: f64) -> f64 {
    match ast {
        Ast::Lit(v) => *v,
        Ast::Drho => rho,
        Ast::Eps => eps,
        Ast::Neg(a) => -eval_ast(a, rho, ln_rho, eps),
        Ast::Add(a, b) => eval_ast(a, rho, ln_rho, eps) + eval_ast(b, rho, ln_rho, eps),
        Ast::Sub(a, b) => eval_ast(a, rho, ln_rho, eps) - eval_ast(b, rho, ln_rho, eps),
        Ast::Mul(a, b) => eval_ast(a, rho, ln_rho, eps) * eval_ast(b, rho, ln_rho, eps),
        Ast::Div(a, b) => eval_ast(a, rho, ln_rho, eps) / eval_ast(b, rho, ln_rho, eps),
        Ast::Pow(a, p) => {
            // drho^a goes through the log domain so steep gauges stay
            // representable.
            if matches!(**a, Ast::Drho) {
                if p.fract() == 0.0 && p.abs() <= 64.0 {
                    rho.powi(*p as i32)
                } else {
                    (p * ln_rho).exp()
                }
            } else {
                eval_ast(a, rho, ln_rho, eps).powf(*p)
            }
        }
        Ast::Fn1(name, a) => {
            let v = eval_ast(a, rho, ln_rho, eps);
            match *name {
                "log" => v.ln(),
                "exp" => v.exp(),
                "sin" => v.sin(),
                "cos" => v.cos(),
                _ => v.sqrt(),
            }
        }
    }
}

pub fn to_gennum(ast: &Ast, ctx: &Ctx) -> GenNum {
    let ast = ast.clone();
    let cc = ctx.clone();
    GenNum::from_indexed(ctx, move |i, e| {
        eval_ast(&ast, cc.rho(i), cc.ln_rho(i), e)
    })
}
