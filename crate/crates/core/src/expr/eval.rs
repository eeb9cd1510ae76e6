use std::fmt;

use thiserror::Error;

use super::{BinOp, Expr, Func, Var};

/// Values for the variables an expression may reference.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    values: [Option<f64>; 5],
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: Var, value: f64) -> Self {
        self.set(var, value);
        self
    }

    pub fn set(&mut self, var: Var, value: f64) {
        self.values[var.index()] = Some(value);
    }

    /// Binds by name; `None` if the name is not a known variable.
    pub fn set_named(&mut self, name: &str, value: f64) -> Option<()> {
        self.set(Var::from_name(name)?, value);
        Some(())
    }

    pub fn get(&self, var: Var) -> Option<f64> {
        self.values[var.index()]
    }
}

impl FromIterator<(Var, f64)> for Bindings {
    fn from_iter<I: IntoIterator<Item = (Var, f64)>>(iter: I) -> Self {
        let mut b = Bindings::new();
        for (v, x) in iter {
            b.set(v, x);
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("evaluation of `{expr}` failed: {kind}")]
pub struct EvalError {
    pub kind: EvalErrorKind,
    /// The sub-expression where evaluation failed.
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalErrorKind {
    Unbound(&'static str),
    DivisionByZero,
    Domain { func: &'static str, arg: f64 },
    NonFinite,
}

impl fmt::Display for EvalErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalErrorKind::Unbound(v) => write!(f, "variable `{v}` is not bound"),
            EvalErrorKind::DivisionByZero => write!(f, "division by zero"),
            EvalErrorKind::Domain { func, arg } => write!(f, "`{func}` is undefined at {arg}"),
            EvalErrorKind::NonFinite => write!(f, "result is not finite"),
        }
    }
}

fn fail(kind: EvalErrorKind, e: &Expr) -> EvalError {
    EvalError {
        kind,
        expr: e.to_string(),
    }
}

fn finite(v: f64, e: &Expr) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(fail(EvalErrorKind::NonFinite, e))
    }
}

fn power(base: f64, exponent: f64, e: &Expr) -> Result<f64, EvalError> {
    if base == 0.0 && exponent < 0.0 {
        return Err(fail(EvalErrorKind::DivisionByZero, e));
    }
    if base < 0.0 && exponent.fract() != 0.0 {
        return Err(fail(EvalErrorKind::Domain { func: "pow", arg: base }, e));
    }
    finite(base.powf(exponent), e)
}

pub(crate) fn evaluate(e: &Expr, b: &Bindings) -> Result<f64, EvalError> {
    match e {
        Expr::Num(v) => Ok(*v),
        Expr::Const(c) => Ok(c.value()),
        Expr::Var(v) => b.get(*v).ok_or_else(|| fail(EvalErrorKind::Unbound(v.name()), e)),
        Expr::Neg(inner) => Ok(-evaluate(inner, b)?),
        Expr::Binary { op, lhs, rhs } => {
            let x = evaluate(lhs, b)?;
            let y = evaluate(rhs, b)?;
            match op {
                BinOp::Add => finite(x + y, e),
                BinOp::Sub => finite(x - y, e),
                BinOp::Mul => finite(x * y, e),
                BinOp::Div if y == 0.0 => Err(fail(EvalErrorKind::DivisionByZero, e)),
                BinOp::Div => finite(x / y, e),
                BinOp::Pow => power(x, y, e),
            }
        }
        Expr::Call { func, args } => {
            let x = evaluate(&args[0], b)?;
            let domain = |ok: bool| {
                if ok {
                    Ok(())
                } else {
                    Err(fail(
                        EvalErrorKind::Domain {
                            func: func.name(),
                            arg: x,
                        },
                        e,
                    ))
                }
            };
            let v = match func {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => x.tan(),
                Func::Sinh => x.sinh(),
                Func::Cosh => x.cosh(),
                Func::Tanh => x.tanh(),
                Func::Exp => x.exp(),
                Func::Log => {
                    domain(x > 0.0)?;
                    x.ln()
                }
                Func::Sqrt => {
                    domain(x >= 0.0)?;
                    x.sqrt()
                }
                Func::Abs => x.abs(),
                Func::Pow => return power(x, evaluate(&args[1], b)?, e),
                Func::Min => x.min(evaluate(&args[1], b)?),
                Func::Max => x.max(evaluate(&args[1], b)?),
            };
            finite(v, e)
        }
        Expr::Piecewise { branches, default } => {
            for (cond, value) in branches {
                if cond.op.holds(evaluate(&cond.lhs, b)?, evaluate(&cond.rhs, b)?) {
                    return evaluate(value, b);
                }
            }
            evaluate(default, b)
        }
    }
}
