use std::fmt::{self, Write};

use super::{BinOp, Expr};

// Binding strength of each syntactic level.
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const FACTOR: u8 = 3;
const ATOM: u8 = 5;

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Binary { op, .. } => match op {
            BinOp::Add | BinOp::Sub => SUM,
            BinOp::Mul | BinOp::Div => PRODUCT,
            BinOp::Pow => 4,
        },
        Expr::Neg(_) => FACTOR,
        _ => ATOM,
    }
}

/// Writes `e` with the fewest parentheses that reparse to the same tree in
/// a context requiring at least binding strength `min`.
pub(crate) fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    let wrap = level(e) < min;
    if wrap {
        f.write_char('(')?;
    }
    match e {
        Expr::Num(v) => write!(f, "{v}")?,
        Expr::Const(c) => f.write_str(c.name())?,
        Expr::Var(v) => f.write_str(v.name())?,
        Expr::Neg(inner) => {
            f.write_char('-')?;
            write_expr(f, inner, FACTOR)?;
        }
        Expr::Binary { op, lhs, rhs } => {
            let (l, r) = match op {
                BinOp::Add | BinOp::Sub => (SUM, PRODUCT),
                BinOp::Mul | BinOp::Div => (PRODUCT, FACTOR),
                BinOp::Pow => (ATOM, FACTOR),
            };
            write_expr(f, lhs, l)?;
            match op {
                BinOp::Pow => f.write_str(op.symbol())?,
                _ => write!(f, " {} ", op.symbol())?,
            }
            write_expr(f, rhs, r)?;
        }
        Expr::Call { func, args } => {
            write!(f, "{}(", func.name())?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write_expr(f, a, 0)?;
            }
            f.write_char(')')?;
        }
        Expr::Piecewise { branches, default } => {
            f.write_str("piecewise(")?;
            for (c, value) in branches {
                write_expr(f, &c.lhs, 0)?;
                write!(f, " {} ", c.op.symbol())?;
                write_expr(f, &c.rhs, 0)?;
                f.write_str(": ")?;
                write_expr(f, value, 0)?;
                f.write_str("; ")?;
            }
            write_expr(f, default, 0)?;
            f.write_char(')')?;
        }
    }
    if wrap {
        f.write_char(')')?;
    }
    Ok(())
}
