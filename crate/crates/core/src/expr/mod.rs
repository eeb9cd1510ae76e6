//! Arithmetic expressions for user-supplied warping, area and density functions.
//!
//! Grammar, from loosest to tightest binding:
//!
//! ```text
//! expr      := term (("+"|"-") term)* ;
//! term      := factor (("*"|"/") factor)* ;
//! factor    := "-" factor | power ;
//! power     := atom ("^" factor)? ;
//! atom      := number | ident | ident "(" args ")" | "(" expr ")" | piecewise ;
//! piecewise := "piecewise" "(" (cond ":" expr ";")+ expr ")" ;
//! cond      := expr ("<"|"<="|">"|">=") expr ;
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-t^2`
//! is `-(t^2)` and `2^-1` is `0.5`. Evaluation never returns a non-finite
//! value: division by zero, logarithms of non-positive numbers and overflow
//! are reported as [`EvalError`]s naming the offending sub-expression.

mod eval;
mod lexer;
mod parser;
mod print;

use std::fmt;

pub use eval::{Bindings, EvalError, EvalErrorKind};
pub use parser::{ParseError, ParseErrorKind};

/// Variables an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// Radial parameter of warping and area functions.
    T,
    /// Radial coordinate of a polar density.
    R,
    /// Angular coordinate of a polar density.
    Theta,
    /// Ball radius.
    Radius,
    /// Curvature parameter.
    Kappa,
}

impl Var {
    pub const ALL: [Var; 5] = [Var::T, Var::R, Var::Theta, Var::Radius, Var::Kappa];

    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::R => "r",
            Var::Theta => "theta",
            Var::Radius => "R",
            Var::Kappa => "kappa",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == name)
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Constant::Pi => std::f64::consts::PI,
            Constant::E => std::f64::consts::E,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Constant::Pi => "pi",
            Constant::E => "e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
    Abs,
    Pow,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 13] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Abs,
        Func::Pow,
        Func::Min,
        Func::Max,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Pow => "pow",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Pow | Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub op: CmpOp,
    pub lhs: Expr,
    pub rhs: Expr,
}

/// Expression tree. Literals are always non-negative; a leading minus is a
/// [`Expr::Neg`] node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Var(Var),
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        func: Func,
        args: Vec<Expr>,
    },
    Piecewise {
        branches: Vec<(Condition, Expr)>,
        default: Box<Expr>,
    },
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        parser::parse(source)
    }

    pub fn eval(&self, bindings: &Bindings) -> Result<f64, EvalError> {
        eval::evaluate(self, bindings)
    }

    /// Variables referenced anywhere in the tree, sorted and deduplicated.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<Var>) {
        match self {
            Expr::Num(_) | Expr::Const(_) => {}
            Expr::Var(v) => out.push(*v),
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.collect_vars(out);
                rhs.collect_vars(out);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
            Expr::Piecewise { branches, default } => {
                for (c, e) in branches {
                    c.lhs.collect_vars(out);
                    c.rhs.collect_vars(out);
                    e.collect_vars(out);
                }
                default.collect_vars(out);
            }
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(f, self, 0)
    }
}

/// Parse then evaluate in one step.
pub fn evaluate_str(source: &str, bindings: &Bindings) -> Result<f64, Box<dyn std::error::Error>> {
    Ok(Expr::parse(source)?.eval(bindings)?)
}
