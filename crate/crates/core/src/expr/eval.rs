use super::{BinOp, Func, FuncExpr};
use crate::error::{Error, Result};

impl FuncExpr {
    /// Evaluates in IEEE double precision. Any non-finite intermediate
    /// result is reported as `FunctionUndefined`.
    pub fn evaluate(&self, bindings: &[(&str, f64)]) -> Result<f64> {
        let v = match self {
            FuncExpr::Num(v) => *v,
            FuncExpr::Var(name) => bindings
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::UnboundVariable(name.clone()))?,
            FuncExpr::Neg(e) => -e.evaluate(bindings)?,
            FuncExpr::Bin(op, l, r) => {
                let a = l.evaluate(bindings)?;
                let b = r.evaluate(bindings)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            FuncExpr::Call(func, args) => {
                let a = args[0].evaluate(bindings)?;
                match func {
                    Func::Exp => a.exp(),
                    Func::Ln => a.ln(),
                    Func::Abs => a.abs(),
                    Func::Sqrt => a.sqrt(),
                    Func::Min => a.min(args[1].evaluate(bindings)?),
                    Func::Max => a.max(args[1].evaluate(bindings)?),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::FunctionUndefined {
                at: format_bindings(bindings),
            })
        }
    }

    /// `f(x, y)`.
    pub fn eval_xy(&self, x: f64, y: f64) -> Result<f64> {
        self.evaluate(&[("x", x), ("y", y)])
    }

    /// `g(x)`.
    pub fn eval_x(&self, x: f64) -> Result<f64> {
        self.evaluate(&[("x", x)])
    }
}

fn format_bindings(bindings: &[(&str, f64)]) -> String {
    let parts: Vec<String> = bindings.iter().map(|(n, v)| format!("{n}={v}")).collect();
    parts.join(", ")
}
