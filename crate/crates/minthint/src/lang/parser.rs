//! Recursive-descent parser.
//!
//! The source format is one statement (or declaration) per line; the parser
//! rejects a second statement starting on an already used line so that line
//! numbers are a stable statement identity.

use std::collections::HashSet;

use super::LangError;
use super::ast::*;
use super::lexer::{lex, Tok, Token};

pub fn parse_program(source: &str) -> Result<Program, LangError> {
    let tokens = lex(source)?;
    let mut parser = Parser { tokens, pos: 0, used_lines: HashSet::new() };
    let mut functions = Vec::new();
    while !parser.at_end() {
        functions.push(parser.function()?);
    }
    if functions.is_empty() {
        return Err(LangError::Syntax { line: 1, message: "empty program".into() });
    }
    Ok(Program { functions })
}

/// Parse a standalone expression (used by tooling and bindings, not by
/// program files).
pub fn parse_expr(source: &str) -> Result<Expr, LangError> {
    let tokens = lex(source)?;
    let mut parser = Parser { tokens, pos: 0, used_lines: HashSet::new() };
    let expr = parser.expr()?;
    if !parser.at_end() {
        return Err(LangError::Syntax {
            line: parser.peek_line(),
            message: "trailing input after expression".into(),
        });
    }
    Ok(expr)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    used_lines: HashSet<Line>,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.tokens.get(self.pos + 1).map(|t| &t.tok)
    }

    fn peek_line(&self) -> Line {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| t.line)
            .unwrap_or(1)
    }

    fn advance(&mut self) -> Result<Token, LangError> {
        let tok = self.tokens.get(self.pos).cloned().ok_or(LangError::Syntax {
            line: self.tokens.last().map(|t| t.line).unwrap_or(1),
            message: "unexpected end of input".into(),
        })?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Token, LangError> {
        let tok = self.advance()?;
        if tok.tok != want {
            return Err(LangError::Syntax {
                line: tok.line,
                message: format!("expected {what}, found {:?}", tok.tok),
            });
        }
        Ok(tok)
    }

    fn ident(&mut self, what: &str) -> Result<(String, Line), LangError> {
        let tok = self.advance()?;
        match tok.tok {
            Tok::Ident(name) => Ok((name, tok.line)),
            other => Err(LangError::Syntax {
                line: tok.line,
                message: format!("expected {what}, found {other:?}"),
            }),
        }
    }

    fn claim_line(&mut self, line: Line) -> Result<(), LangError> {
        if !self.used_lines.insert(line) {
            return Err(LangError::Syntax {
                line,
                message: "one statement per line: a statement already starts here".into(),
            });
        }
        Ok(())
    }

    fn scalar_type(&mut self) -> Result<(ScalarType, Line), LangError> {
        let tok = self.advance()?;
        let ty = match tok.tok {
            Tok::KwInt => ScalarType::Int,
            Tok::KwBool => ScalarType::Bool,
            Tok::KwChar => ScalarType::Char,
            other => {
                return Err(LangError::Syntax {
                    line: tok.line,
                    message: format!("expected type, found {other:?}"),
                })
            }
        };
        Ok((ty, tok.line))
    }

    /// `int` | `char[8]` | ... ; arrays only of int/char.
    fn var_type(&mut self) -> Result<(VarType, Line), LangError> {
        let (elem, line) = self.scalar_type()?;
        if self.peek() == Some(&Tok::LBracket) {
            self.advance()?;
            let tok = self.advance()?;
            let len = match tok.tok {
                Tok::Int(n) if n > 0 => n as usize,
                _ => {
                    return Err(LangError::Syntax {
                        line: tok.line,
                        message: "array length must be a positive integer literal".into(),
                    })
                }
            };
            self.expect(Tok::RBracket, "']'")?;
            if elem == ScalarType::Bool {
                return Err(LangError::Syntax {
                    line,
                    message: "arrays of bool are not supported".into(),
                });
            }
            Ok((VarType::Array { elem, len }, line))
        } else {
            Ok((VarType::Scalar(elem), line))
        }
    }

    fn function(&mut self) -> Result<FunctionDef, LangError> {
        let (ret, line) = self.scalar_type()?;
        let (name, _) = self.ident("function name")?;
        self.expect(Tok::LParen, "'('")?;
        let mut params = Vec::new();
        if self.peek() != Some(&Tok::RParen) {
            loop {
                let (ty, _) = self.var_type()?;
                let (pname, _) = self.ident("parameter name")?;
                params.push((pname, ty));
                if self.peek() == Some(&Tok::Comma) {
                    self.advance()?;
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RParen, "')'")?;
        let body = self.block()?;
        Ok(FunctionDef { line, name, ret, params, body })
    }

    fn block(&mut self) -> Result<Block, LangError> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut items = Vec::new();
        while self.peek() != Some(&Tok::RBrace) {
            items.push(self.item()?);
        }
        self.expect(Tok::RBrace, "'}'")?;
        Ok(Block { items })
    }

    fn item(&mut self) -> Result<Item, LangError> {
        match self.peek() {
            Some(Tok::KwInt) | Some(Tok::KwBool) | Some(Tok::KwChar) => {
                let (ty, line) = self.var_type()?;
                let (name, _) = self.ident("variable name")?;
                self.expect(Tok::Semi, "';'")?;
                self.claim_line(line)?;
                Ok(Item::Decl(Decl { line, name, ty }))
            }
            _ => Ok(Item::Stmt(self.stmt()?)),
        }
    }

    fn stmt(&mut self) -> Result<Stmt, LangError> {
        let line = self.peek_line();
        let kind = match self.peek() {
            Some(Tok::KwIf) => {
                self.advance()?;
                self.expect(Tok::LParen, "'('")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                let then_body = self.block()?;
                let else_body = if self.peek() == Some(&Tok::KwElse) {
                    self.advance()?;
                    Some(self.block()?)
                } else {
                    None
                };
                StmtKind::If { cond, then_body, else_body }
            }
            Some(Tok::KwWhile) => {
                self.advance()?;
                self.expect(Tok::LParen, "'('")?;
                let cond = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            Some(Tok::KwFor) => {
                self.advance()?;
                self.expect(Tok::LParen, "'('")?;
                let init = self.for_assign()?;
                self.expect(Tok::Semi, "';'")?;
                let cond = self.expr()?;
                self.expect(Tok::Semi, "';'")?;
                let update = self.for_assign()?;
                self.expect(Tok::RParen, "')'")?;
                let body = self.block()?;
                StmtKind::For { init, cond, update, body }
            }
            Some(Tok::KwReturn) => {
                self.advance()?;
                let e = self.expr()?;
                self.expect(Tok::Semi, "';'")?;
                StmtKind::Return(e)
            }
            Some(Tok::KwPrint) => {
                self.advance()?;
                self.expect(Tok::LParen, "'('")?;
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                self.expect(Tok::Semi, "';'")?;
                StmtKind::Print(e)
            }
            Some(Tok::LBrace) => StmtKind::Block(self.block()?),
            Some(Tok::Ident(_)) => {
                let (name, _) = self.ident("variable name")?;
                self.expect(Tok::Assign, "'='")?;
                let first = self.expr()?;
                let rhs = if self.peek() == Some(&Tok::Question) {
                    self.advance()?;
                    let then_val = self.expr()?;
                    self.expect(Tok::Colon, "':'")?;
                    let else_val = self.expr()?;
                    AssignRhs::Ternary { guard: first, then_val, else_val }
                } else {
                    AssignRhs::Expr(first)
                };
                self.expect(Tok::Semi, "';'")?;
                StmtKind::Assign { name, rhs }
            }
            other => {
                return Err(LangError::Syntax {
                    line,
                    message: format!("expected statement, found {other:?}"),
                })
            }
        };
        self.claim_line(line)?;
        Ok(Stmt { line, kind })
    }

    fn for_assign(&mut self) -> Result<ForAssign, LangError> {
        let (name, _) = self.ident("loop variable")?;
        self.expect(Tok::Assign, "'='")?;
        let value = self.expr()?;
        Ok(ForAssign { name, value })
    }

    fn expr(&mut self) -> Result<Expr, LangError> {
        self.binary_expr(1)
    }

    /// Precedence-climbing over left-associative binary operators.
    fn binary_expr(&mut self, min_prec: u8) -> Result<Expr, LangError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::OrOr) => BinOp::Or,
                Some(Tok::AndAnd) => BinOp::And,
                Some(Tok::EqEq) => BinOp::Eq,
                Some(Tok::NotEq) => BinOp::Ne,
                Some(Tok::Lt) => BinOp::Lt,
                Some(Tok::Le) => BinOp::Le,
                Some(Tok::Gt) => BinOp::Gt,
                Some(Tok::Ge) => BinOp::Ge,
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                Some(Tok::Percent) => BinOp::Mod,
                _ => break,
            };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.advance()?;
            let rhs = self.binary_expr(prec + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr, LangError> {
        match self.peek() {
            Some(Tok::Bang) => {
                self.advance()?;
                Ok(Expr::unary(UnOp::Not, self.unary_expr()?))
            }
            Some(Tok::Minus) => {
                // A minus lexically adjacent to an int literal is a negative
                // constant, so `-1` round-trips as a single node.
                if let Some(Tok::Int(n)) = self.peek2() {
                    let n = *n;
                    self.advance()?;
                    self.advance()?;
                    return Ok(Expr::int(-n));
                }
                self.advance()?;
                Ok(Expr::unary(UnOp::Neg, self.unary_expr()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Expr, LangError> {
        let tok = self.advance()?;
        match tok.tok {
            Tok::Int(n) => Ok(Expr::int(n)),
            Tok::Char(c) => Ok(Expr::ch(c)),
            Tok::KwTrue => Ok(Expr::boolean(true)),
            Tok::KwFalse => Ok(Expr::boolean(false)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek() == Some(&Tok::LBracket) {
                    self.advance()?;
                    let idx = self.expr()?;
                    self.expect(Tok::RBracket, "']'")?;
                    Ok(Expr::index(&name, idx))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            other => Err(LangError::Syntax {
                line: tok.line,
                message: format!("expected expression, found {other:?}"),
            }),
        }
    }
}
