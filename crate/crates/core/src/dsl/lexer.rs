use std::fmt;

use super::DslError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    /// `commitment`, `prohibition`, `authorization`, `and`, `or`, `except`.
    Keyword(Keyword),
    Ident(String),
    Int(i64),
    Colon,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Arrow,
    At,
    Plus,
    Minus,
    Lt,
    Gt,
    Le,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keyword {
    Commitment,
    Prohibition,
    Authorization,
    And,
    Or,
    Except,
}

impl Keyword {
    fn lookup(word: &str) -> Option<Keyword> {
        Some(match word {
            "commitment" => Keyword::Commitment,
            "prohibition" => Keyword::Prohibition,
            "authorization" => Keyword::Authorization,
            "and" => Keyword::And,
            "or" => Keyword::Or,
            "except" => Keyword::Except,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Commitment => "commitment",
            Keyword::Prohibition => "prohibition",
            Keyword::Authorization => "authorization",
            Keyword::And => "and",
            Keyword::Or => "or",
            Keyword::Except => "except",
        }
    }
}

/// Returns true for words the lexer never yields as identifiers.
pub fn is_keyword(word: &str) -> bool {
    Keyword::lookup(word).is_some()
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Token::Keyword(k) => return write!(f, "`{}`", k.as_str()),
            Token::Ident(name) => return write!(f, "identifier `{name}`"),
            Token::Int(n) => return write!(f, "integer {n}"),
            Token::Colon => ":",
            Token::LParen => "(",
            Token::RParen => ")",
            Token::LBrace => "{",
            Token::RBrace => "}",
            Token::LBrack => "[",
            Token::RBrack => "]",
            Token::Comma => ",",
            Token::Dot => ".",
            Token::Arrow => "->",
            Token::At => "@",
            Token::Plus => "+",
            Token::Minus => "-",
            Token::Lt => "<",
            Token::Gt => ">",
            Token::Le => "<=",
            Token::Ge => ">=",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Spanned {
    pub token: Token,
    pub pos: Pos,
}

/// Splits source text into tokens. `#` starts a comment running to the end
/// of the line.
pub fn tokenize(source: &str) -> Result<Vec<Spanned>, DslError> {
    let mut out = Vec::new();
    let mut chars = source.chars().peekable();
    let mut line = 1u32;
    let mut col = 1u32;

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        if c == '#' {
            while chars.peek().is_some_and(|&c| c != '\n') {
                chars.next();
            }
            continue;
        }

        let token = if c.is_ascii_alphabetic() || c == '_' {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    word.push(c);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            match Keyword::lookup(&word) {
                Some(k) => Token::Keyword(k),
                None => Token::Ident(word),
            }
        } else if c.is_ascii_digit() {
            let mut digits = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    digits.push(c);
                    chars.next();
                    col += 1;
                } else {
                    break;
                }
            }
            let value = digits.parse::<i64>().map_err(|_| DslError::Syntax {
                pos,
                expected: "integer literal in range".into(),
                found: digits.clone(),
            })?;
            Token::Int(value)
        } else {
            chars.next();
            col += 1;
            let mut two = |next: char, long: Token, short: Token| {
                if chars.peek() == Some(&next) {
                    chars.next();
                    col += 1;
                    long
                } else {
                    short
                }
            };
            match c {
                ':' => Token::Colon,
                '(' => Token::LParen,
                ')' => Token::RParen,
                '{' => Token::LBrace,
                '}' => Token::RBrace,
                '[' => Token::LBrack,
                ']' => Token::RBrack,
                ',' => Token::Comma,
                '.' => Token::Dot,
                '@' => Token::At,
                '+' => Token::Plus,
                '-' => two('>', Token::Arrow, Token::Minus),
                '<' => two('=', Token::Le, Token::Lt),
                '>' => two('=', Token::Ge, Token::Gt),
                other => return Err(DslError::IllegalCharacter { pos, ch: other }),
            }
        };
        out.push(Spanned { token, pos });
    }
    Ok(out)
}
