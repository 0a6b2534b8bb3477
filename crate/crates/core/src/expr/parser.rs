use super::lexer::{syntax, tokenize, Tok, Token};
use super::{BinOp, Expected, Func, FuncExpr, ParseError};

/// Parses `src`, accepting only the listed variable names.
pub fn parse(src: &str, variables: &[&str]) -> Result<FuncExpr, ParseError> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        depth: 0,
        variables,
    };
    let e = p.expr(0)?;
    match p.peek().tok {
        Tok::End => Ok(e),
        _ => Err(syntax(p.peek().offset, [Expected::Operator, Expected::End])),
    }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
    variables: &'a [&'a str],
}

/// Nesting limit for parentheses, calls and prefix operators.
pub const MAX_DEPTH: usize = 200;

const ADD_BP: u8 = 1;
const MUL_BP: u8 = 2;

fn infix(tok: &Tok) -> Option<(BinOp, u8)> {
    match tok {
        Tok::Plus => Some((BinOp::Add, ADD_BP)),
        Tok::Minus => Some((BinOp::Sub, ADD_BP)),
        Tok::Star => Some((BinOp::Mul, MUL_BP)),
        Tok::Slash => Some((BinOp::Div, MUL_BP)),
        _ => None,
    }
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    /// Left-associative binary levels above `min_bp`.
    fn expr(&mut self, min_bp: u8) -> Result<FuncExpr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some((op, bp)) = infix(&self.peek().tok) {
            if bp <= min_bp {
                break;
            }
            self.next();
            let rhs = self.expr(bp)?;
            lhs = FuncExpr::bin(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<FuncExpr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError::TooDeep {
                offset: self.peek().offset,
            });
        }
        let e = if self.peek().tok == Tok::Minus {
            self.next();
            self.unary().map(|e| FuncExpr::Neg(Box::new(e)))
        } else {
            self.power()
        };
        self.depth -= 1;
        e
    }

    fn power(&mut self) -> Result<FuncExpr, ParseError> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Caret {
            self.next();
            let exp = self.unary()?;
            return Ok(FuncExpr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<FuncExpr, ParseError> {
        let t = self.next();
        match t.tok {
            Tok::Num(v) => Ok(FuncExpr::Num(v)),
            Tok::LParen => {
                let e = self.expr(0)?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LParen {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(ParseError::UnknownIdentifier { offset: t.offset, name });
                    };
                    self.next();
                    let mut args = vec![self.expr(0)?];
                    while args.len() < func.arity() {
                        let c = self.next();
                        if c.tok != Tok::Comma {
                            return Err(syntax(c.offset, [Expected::Comma, Expected::Operator]));
                        }
                        args.push(self.expr(0)?);
                    }
                    self.expect_rparen()?;
                    Ok(FuncExpr::Call(func, args))
                } else if Func::from_name(&name).is_some() {
                    Err(syntax(self.peek().offset, [Expected::LParen]))
                } else if self.variables.contains(&name.as_str()) {
                    Ok(FuncExpr::Var(name))
                } else {
                    Err(ParseError::UnknownIdentifier { offset: t.offset, name })
                }
            }
            _ => Err(syntax(
                t.offset,
                [Expected::Number, Expected::Identifier, Expected::LParen, Expected::Operator],
            )),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == Tok::RParen {
            Ok(())
        } else {
            Err(syntax(t.offset, [Expected::RParen, Expected::Operator]))
        }
    }
}
