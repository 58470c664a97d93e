//! Recursive-descent parser.
//!
//! ```text
//! compact   := norm+
//! norm      := kind IDENT '(' IDENT '->' IDENT (',' IDENT)* ')' ':' state+
//! state     := IDENT ':' expr
//! expr      := andExpr ('or' andExpr)*
//! andExpr   := exExpr ('and' exExpr)*
//! exExpr    := atom ('except' atom)*
//! atom      := eventExpr | normRef | '(' expr ')'
//! eventExpr := IDENT '.' IDENT '{' IDENT (',' IDENT)* '}' ('@' timeAnnot)?
//! normRef   := IDENT '(' IDENT '->' IDENT (',' IDENT)* ')' ':' IDENT
//! timeAnnot := IDENT | IDENT cmp arith | '[' arith ',' arith ']'
//! arith     := IDENT (('+' | '-') INT)? | INT
//! ```

use std::collections::HashSet;

use super::ast::*;
use super::lexer::{tokenize, Keyword, Pos, Spanned, Token};
use super::DslError;

/// Tokenizes and parses `source`; `name` becomes the compact's name.
pub fn parse_compact(source: &str, name: &str) -> Result<CompactSpec, DslError> {
    parse_tokens(&tokenize(source)?, name)
}

pub fn parse_tokens(tokens: &[Spanned], name: &str) -> Result<CompactSpec, DslError> {
    let mut parser = Parser { tokens, at: 0 };
    let mut norms: Vec<NormSpec> = Vec::new();
    let mut seen = HashSet::new();
    loop {
        let norm = parser.norm()?;
        if !seen.insert(norm.name.clone()) {
            return Err(DslError::DuplicateNormName { name: norm.name });
        }
        norms.push(norm);
        if parser.peek().is_none() {
            break;
        }
    }
    Ok(CompactSpec {
        name: name.to_string(),
        norms,
    })
}

struct Parser<'t> {
    tokens: &'t [Spanned],
    at: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> Option<&'t Token> {
        self.tokens.get(self.at).map(|s| &s.token)
    }

    fn peek2(&self) -> Option<&'t Token> {
        self.tokens.get(self.at + 1).map(|s| &s.token)
    }

    fn pos(&self) -> Pos {
        match self.tokens.get(self.at) {
            Some(s) => s.pos,
            None => self.tokens.last().map_or(Pos { line: 1, col: 1 }, |s| {
                Pos {
                    line: s.pos.line,
                    col: s.pos.col + 1,
                }
            }),
        }
    }

    fn error<T>(&self, expected: &str) -> Result<T, DslError> {
        Err(DslError::Syntax {
            pos: self.pos(),
            expected: expected.to_string(),
            found: self
                .peek()
                .map_or_else(|| "end of input".to_string(), |t| t.to_string()),
        })
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: Token, expected: &str) -> Result<(), DslError> {
        if self.eat(&token) {
            Ok(())
        } else {
            self.error(expected)
        }
    }

    fn ident(&mut self, expected: &str) -> Result<String, DslError> {
        match self.peek() {
            Some(Token::Ident(name)) => {
                self.at += 1;
                Ok(name.clone())
            }
            _ => self.error(expected),
        }
    }

    fn at_state_label(&self) -> bool {
        matches!(self.peek(), Some(Token::Ident(_))) && self.peek2() == Some(&Token::Colon)
    }

    fn norm(&mut self) -> Result<NormSpec, DslError> {
        let kind = match self.peek() {
            Some(Token::Keyword(Keyword::Commitment)) => NormKind::Commitment,
            Some(Token::Keyword(Keyword::Prohibition)) => NormKind::Prohibition,
            Some(Token::Keyword(Keyword::Authorization)) => NormKind::Authorization,
            Some(Token::Ident(word)) => {
                return Err(DslError::UnknownNormType {
                    pos: self.pos(),
                    word: word.clone(),
                })
            }
            _ => return self.error("norm type"),
        };
        self.at += 1;
        let name = self.ident("norm name")?;
        let (expectee, expector, params) = self.role_list()?;
        self.expect(Token::Colon, "`:` after norm header")?;

        let mut states: Vec<State> = Vec::new();
        while self.at_state_label() {
            let state_name = self.ident("state name")?;
            self.at += 1;
            let formula = self.expr()?;
            if states.iter().any(|s| s.name == state_name) {
                return Err(DslError::DuplicateState {
                    norm: name,
                    state: state_name,
                });
            }
            states.push(State {
                name: state_name,
                formula,
            });
        }
        if states.is_empty() {
            return self.error("state label `<name>:`");
        }
        if states[0].name != "created" {
            return Err(DslError::MissingCreatedState { norm: name });
        }
        match self.peek() {
            None | Some(Token::Keyword(Keyword::Commitment))
            | Some(Token::Keyword(Keyword::Prohibition))
            | Some(Token::Keyword(Keyword::Authorization))
            | Some(Token::Ident(_)) => {}
            _ => return self.error("operator, state label or next norm"),
        }
        Ok(NormSpec {
            kind,
            name,
            expectee,
            expector,
            params,
            states,
        })
    }

    /// `'(' IDENT '->' IDENT (',' IDENT)* ')'`
    fn role_list(&mut self) -> Result<(String, String, Vec<String>), DslError> {
        self.expect(Token::LParen, "`(`")?;
        let first = self.ident("role name")?;
        self.expect(Token::Arrow, "`->`")?;
        let second = self.ident("role name")?;
        let mut params = Vec::new();
        while self.eat(&Token::Comma) {
            params.push(self.ident("parameter name")?);
        }
        self.expect(Token::RParen, "`,` or `)`")?;
        Ok((first, second, params))
    }

    fn expr(&mut self) -> Result<Formula, DslError> {
        let mut lhs = self.and_expr()?;
        while self.eat(&Token::Keyword(Keyword::Or)) {
            lhs = Formula::or(lhs, self.and_expr()?);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Formula, DslError> {
        let mut lhs = self.except_expr()?;
        while self.eat(&Token::Keyword(Keyword::And)) {
            lhs = Formula::and(lhs, self.except_expr()?);
        }
        Ok(lhs)
    }

    fn except_expr(&mut self) -> Result<Formula, DslError> {
        let mut lhs = self.atom()?;
        while self.eat(&Token::Keyword(Keyword::Except)) {
            lhs = Formula::except(lhs, self.atom()?);
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Formula, DslError> {
        if self.eat(&Token::LParen) {
            let inner = self.expr()?;
            self.expect(Token::RParen, "`)`")?;
            return Ok(inner);
        }
        let head = self.ident("event expression, norm reference or `(`")?;
        match self.peek() {
            Some(Token::Dot) => {
                self.at += 1;
                self.event_expr(head)
            }
            Some(Token::LParen) => {
                let (r0, r1, params) = self.role_list()?;
                self.expect(Token::Colon, "`:` before referenced state")?;
                let state = self.ident("state name")?;
                Ok(Formula::Ref(NormStateRef {
                    norm: head,
                    roles: [r0, r1],
                    params,
                    state,
                }))
            }
            _ => self.error("`.` or `(`"),
        }
    }

    fn event_expr(&mut self, role: String) -> Result<Formula, DslError> {
        let event = self.ident("event name")?;
        self.expect(Token::LBrace, "`{`")?;
        let mut attrs = vec![self.ident("attribute name")?];
        while self.eat(&Token::Comma) {
            attrs.push(self.ident("attribute name")?);
        }
        self.expect(Token::RBrace, "`,` or `}`")?;
        let time = if self.eat(&Token::At) {
            Some(self.time_annot()?)
        } else {
            None
        };
        Ok(Formula::Event(EventExpr {
            role,
            event,
            attrs,
            time,
        }))
    }

    fn time_annot(&mut self) -> Result<TimeAnnot, DslError> {
        if self.eat(&Token::LBrack) {
            let lo = self.arith()?;
            self.expect(Token::Comma, "`,`")?;
            let hi = self.arith()?;
            self.expect(Token::RBrack, "`]`")?;
            return Ok(TimeAnnot::Interval { lo, hi });
        }
        let var = self.ident("time variable or `[`")?;
        let op = match self.peek() {
            Some(Token::Lt) => CmpOp::Lt,
            Some(Token::Gt) => CmpOp::Gt,
            Some(Token::Le) => CmpOp::Le,
            Some(Token::Ge) => CmpOp::Ge,
            _ => return Ok(TimeAnnot::Label(var)),
        };
        self.at += 1;
        let rhs = self.arith()?;
        Ok(TimeAnnot::Compare { var, op, rhs })
    }

    fn arith(&mut self) -> Result<TimeArith, DslError> {
        match self.peek() {
            Some(Token::Int(n)) => {
                self.at += 1;
                Ok(TimeArith::Lit(*n))
            }
            Some(Token::Ident(name)) => {
                let name = name.clone();
                self.at += 1;
                let sign = match self.peek() {
                    Some(Token::Plus) => 1,
                    Some(Token::Minus) => -1,
                    _ => return Ok(TimeArith::Var { name, offset: 0 }),
                };
                self.at += 1;
                match self.peek() {
                    Some(Token::Int(n)) => {
                        self.at += 1;
                        Ok(TimeArith::Var {
                            name,
                            offset: sign * n,
                        })
                    }
                    _ => self.error("integer offset"),
                }
            }
            _ => self.error("time variable or integer"),
        }
    }
}
