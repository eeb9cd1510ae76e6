use std::fmt;

use thiserror::Error;

use super::lexer::{tokenize, Spanned, Tok};
use super::{BinOp, CmpOp, Condition, Constant, Expr, Func, Var};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    BadNumber(String),
    Unexpected {
        found: String,
        expected: &'static str,
    },
    UnknownIdentifier(String),
    UnknownFunction(String),
    Arity {
        func: &'static str,
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Empty => write!(f, "empty expression"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character `{c}`"),
            ParseErrorKind::BadNumber(s) => write!(f, "malformed number `{s}`"),
            ParseErrorKind::Unexpected { found, expected } => {
                write!(f, "found {found}, expected {expected}")
            }
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier `{s}`"),
            ParseErrorKind::UnknownFunction(s) => write!(f, "unknown function `{s}`"),
            ParseErrorKind::Arity { func, expected, found } => {
                write!(f, "`{func}` takes {expected} argument(s), got {found}")
            }
        }
    }
}

pub(crate) fn parse(source: &str) -> Result<Expr, ParseError> {
    let tokens = tokenize(source)?;
    if tokens.len() == 1 {
        return Err(ParseError {
            offset: 0,
            kind: ParseErrorKind::Empty,
        });
    }
    let mut p = Parser { tokens, pos: 0 };
    let e = p.expr()?;
    p.expect(Tok::End, "operator or end of input")?;
    Ok(e)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Spanned {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind: ParseErrorKind::Unexpected {
                found: self.peek().describe(),
                expected,
            },
        }
    }

    fn expect(&mut self, tok: Tok, expected: &'static str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.factor()?;
            return Ok(binary(BinOp::Pow, base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        if !matches!(self.peek(), Tok::Num(_) | Tok::Ident(_) | Tok::LParen) {
            return Err(self.unexpected("number, identifier or `(`"));
        }
        let (tok, offset) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    self.bump();
                    if name == "piecewise" {
                        return self.piecewise();
                    }
                    let func = Func::from_name(&name).ok_or(ParseError {
                        offset,
                        kind: ParseErrorKind::UnknownFunction(name.clone()),
                    })?;
                    let args = self.args()?;
                    if args.len() != func.arity() {
                        return Err(ParseError {
                            offset,
                            kind: ParseErrorKind::Arity {
                                func: func.name(),
                                expected: func.arity(),
                                found: args.len(),
                            },
                        });
                    }
                    return Ok(Expr::Call { func, args });
                }
                match name.as_str() {
                    "pi" => Ok(Expr::Const(Constant::Pi)),
                    "e" => Ok(Expr::Const(Constant::E)),
                    _ => Var::from_name(&name).map(Expr::Var).ok_or(ParseError {
                        offset,
                        kind: ParseErrorKind::UnknownIdentifier(name),
                    }),
                }
            }
            _ => unreachable!(),
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(args);
                }
                _ => return Err(self.unexpected("`,` or `)`")),
            }
        }
    }

    /// After `piecewise(`: one or more `cond: expr;` then the default and `)`.
    fn piecewise(&mut self) -> Result<Expr, ParseError> {
        let mut branches = Vec::new();
        loop {
            let lhs = self.expr()?;
            let op = match self.peek() {
                Tok::Lt => CmpOp::Lt,
                Tok::Le => CmpOp::Le,
                Tok::Gt => CmpOp::Gt,
                Tok::Ge => CmpOp::Ge,
                _ if !branches.is_empty() => {
                    self.expect(Tok::RParen, "comparison or `)`")?;
                    return Ok(Expr::Piecewise {
                        branches,
                        default: Box::new(lhs),
                    });
                }
                _ => return Err(self.unexpected("comparison operator")),
            };
            self.bump();
            let rhs = self.expr()?;
            self.expect(Tok::Colon, "`:`")?;
            let value = self.expr()?;
            self.expect(Tok::Semi, "`;`")?;
            branches.push((Condition { op, lhs, rhs }, value));
        }
    }
}

fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    Expr::Binary {
        op,
        lhs: Box::new(lhs),
        rhs: Box::new(rhs),
    }
}
