//! Real-valued function expressions in one or two variables.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so
//! `-2^2 = -4` and `2^3^2 = 512`. Functions: `exp`, `ln`, `abs`, `sqrt`
//! (one argument), `min`, `max` (two arguments).

mod eval;
mod lexer;
mod parser;
mod print;

use std::collections::BTreeSet;
use std::fmt;

pub use parser::{parse, MAX_DEPTH};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Abs,
    Sqrt,
    Min,
    Max,
}

impl Func {
    pub const ALL: [Func; 6] = [Func::Exp, Func::Ln, Func::Abs, Func::Sqrt, Func::Min, Func::Max];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FuncExpr {
    Num(f64),
    Var(String),
    Neg(Box<FuncExpr>),
    Bin(BinOp, Box<FuncExpr>, Box<FuncExpr>),
    Call(Func, Vec<FuncExpr>),
}

impl FuncExpr {
    pub fn bin(op: BinOp, l: FuncExpr, r: FuncExpr) -> Self {
        FuncExpr::Bin(op, Box::new(l), Box::new(r))
    }

    pub fn var(name: &str) -> Self {
        FuncExpr::Var(name.to_string())
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            FuncExpr::Num(_) => {}
            FuncExpr::Var(v) => {
                out.insert(v);
            }
            FuncExpr::Neg(e) => e.collect_vars(out),
            FuncExpr::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            FuncExpr::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

/// Token classes reported in syntax errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expected {
    Number,
    Identifier,
    Operator,
    LParen,
    RParen,
    Comma,
    End,
}

impl fmt::Display for Expected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Expected::Number => "number",
            Expected::Identifier => "identifier",
            Expected::Operator => "operator",
            Expected::LParen => "'('",
            Expected::RParen => "')'",
            Expected::Comma => "','",
            Expected::End => "end of input",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: expected {}", list(.expected))]
    Syntax { offset: usize, expected: BTreeSet<Expected> },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("expression nested too deeply at byte {offset}")]
    TooDeep { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. }
            | ParseError::UnknownIdentifier { offset, .. }
            | ParseError::TooDeep { offset } => *offset,
        }
    }
}

fn list(set: &BTreeSet<Expected>) -> String {
    let items: Vec<String> = set.iter().map(|e| e.to_string()).collect();
    items.join(" or ")
}
