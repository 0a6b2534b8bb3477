use std::fmt;

use super::{BinOp, FuncExpr};

const ADD: u8 = 1;
const MUL: u8 = 2;
const NEG: u8 = 3;
const ATOM: u8 = 5;

fn level(e: &FuncExpr) -> u8 {
    match e {
        FuncExpr::Num(v) if v.is_sign_negative() => NEG,
        FuncExpr::Num(_) | FuncExpr::Var(_) | FuncExpr::Call(..) => ATOM,
        FuncExpr::Neg(_) => NEG,
        FuncExpr::Bin(BinOp::Add | BinOp::Sub, ..) => ADD,
        FuncExpr::Bin(BinOp::Mul | BinOp::Div, ..) => MUL,
        FuncExpr::Bin(BinOp::Pow, ..) => 4,
    }
}

fn child(f: &mut fmt::Formatter<'_>, e: &FuncExpr, min: u8) -> fmt::Result {
    if level(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Canonical form with the fewest parentheses that re-parses to the same tree.
impl fmt::Display for FuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FuncExpr::Num(v) if v.is_sign_negative() => write!(f, "-{:?}", -v),
            FuncExpr::Num(v) => write!(f, "{v:?}"),
            FuncExpr::Var(name) => f.write_str(name),
            FuncExpr::Neg(e) => {
                f.write_str("-")?;
                child(f, e, NEG)
            }
            FuncExpr::Bin(op, l, r) => {
                let (sym, lmin, rmin) = match op {
                    BinOp::Add => (" + ", ADD, MUL),
                    BinOp::Sub => (" - ", ADD, MUL),
                    BinOp::Mul => (" * ", MUL, NEG),
                    BinOp::Div => (" / ", MUL, NEG),
                    BinOp::Pow => ("^", ATOM, NEG),
                };
                child(f, l, lmin)?;
                f.write_str(sym)?;
                child(f, r, rmin)
            }
            FuncExpr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}
