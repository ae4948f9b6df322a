//! Hand-rolled lexer. Tracks the source line of every token; statement
//! line numbers come straight from here.

use super::LangError;
use super::ast::Line;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Char(u8),
    KwInt,
    KwBool,
    KwChar,
    KwIf,
    KwElse,
    KwWhile,
    KwFor,
    KwReturn,
    KwPrint,
    KwTrue,
    KwFalse,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Semi,
    Comma,
    Assign,
    Question,
    Colon,
    OrOr,
    AndAnd,
    EqEq,
    NotEq,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Slash,
    Percent,
    Bang,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: Line,
}

pub fn lex(source: &str) -> Result<Vec<Token>, LangError> {
    let mut tokens = Vec::new();
    let bytes: Vec<char> = source.chars().collect();
    let mut i = 0;
    let mut line: Line = 1;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            ' ' | '\t' | '\r' => i += 1,
            '/' if i + 1 < bytes.len() && bytes[i + 1] == '/' => {
                while i < bytes.len() && bytes[i] != '\n' {
                    i += 1;
                }
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                let value = text.parse::<i64>().map_err(|_| LangError::Syntax {
                    line,
                    message: format!("integer literal out of range: {text}"),
                })?;
                tokens.push(Token { tok: Tok::Int(value), line });
            }
            '\'' => {
                let (value, next) = lex_char(&bytes, i, line)?;
                tokens.push(Token { tok: Tok::Char(value), line });
                i = next;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    i += 1;
                }
                let word: String = bytes[start..i].iter().collect();
                let tok = match word.as_str() {
                    "int" => Tok::KwInt,
                    "bool" => Tok::KwBool,
                    "char" => Tok::KwChar,
                    "if" => Tok::KwIf,
                    "else" => Tok::KwElse,
                    "while" => Tok::KwWhile,
                    "for" => Tok::KwFor,
                    "return" => Tok::KwReturn,
                    "print" => Tok::KwPrint,
                    "true" => Tok::KwTrue,
                    "false" => Tok::KwFalse,
                    _ => Tok::Ident(word),
                };
                tokens.push(Token { tok, line });
            }
            _ => {
                let two = if i + 1 < bytes.len() {
                    Some((bytes[i], bytes[i + 1]))
                } else {
                    None
                };
                let (tok, width) = match two {
                    Some(('|', '|')) => (Tok::OrOr, 2),
                    Some(('&', '&')) => (Tok::AndAnd, 2),
                    Some(('=', '=')) => (Tok::EqEq, 2),
                    Some(('!', '=')) => (Tok::NotEq, 2),
                    Some(('<', '=')) => (Tok::Le, 2),
                    Some(('>', '=')) => (Tok::Ge, 2),
                    _ => match c {
                        '(' => (Tok::LParen, 1),
                        ')' => (Tok::RParen, 1),
                        '{' => (Tok::LBrace, 1),
                        '}' => (Tok::RBrace, 1),
                        '[' => (Tok::LBracket, 1),
                        ']' => (Tok::RBracket, 1),
                        ';' => (Tok::Semi, 1),
                        ',' => (Tok::Comma, 1),
                        '=' => (Tok::Assign, 1),
                        '?' => (Tok::Question, 1),
                        ':' => (Tok::Colon, 1),
                        '<' => (Tok::Lt, 1),
                        '>' => (Tok::Gt, 1),
                        '+' => (Tok::Plus, 1),
                        '-' => (Tok::Minus, 1),
                        '*' => (Tok::Star, 1),
                        '/' => (Tok::Slash, 1),
                        '%' => (Tok::Percent, 1),
                        '!' => (Tok::Bang, 1),
                        _ => {
                            return Err(LangError::Syntax {
                                line,
                                message: format!("unexpected character {c:?}"),
                            })
                        }
                    },
                };
                tokens.push(Token { tok, line });
                i += width;
            }
        }
    }
    Ok(tokens)
}

/// Lex a char literal starting at the opening quote; returns (value, index
/// past the closing quote). Accepts `'a'`, escapes `\0 \n \t \r \\ \'`,
/// and `\xNN` hex escapes for other ASCII codes.
fn lex_char(bytes: &[char], start: usize, line: Line) -> Result<(u8, usize), LangError> {
    let err = |message: String| LangError::Syntax { line, message };
    let mut i = start + 1;
    if i >= bytes.len() {
        return Err(err("unterminated char literal".into()));
    }
    let value = if bytes[i] == '\\' {
        i += 1;
        if i >= bytes.len() {
            return Err(err("unterminated char escape".into()));
        }
        let v = match bytes[i] {
            '0' => 0u8,
            'n' => b'\n',
            't' => b'\t',
            'r' => b'\r',
            '\\' => b'\\',
            '\'' => b'\'',
            'x' => {
                if i + 2 >= bytes.len() {
                    return Err(err("truncated \\x escape".into()));
                }
                let hex: String = bytes[i + 1..i + 3].iter().collect();
                i += 2;
                u8::from_str_radix(&hex, 16)
                    .map_err(|_| err(format!("bad hex escape \\x{hex}")))?
            }
            other => return Err(err(format!("unknown escape \\{other}"))),
        };
        i += 1;
        v
    } else {
        let c = bytes[i];
        if !c.is_ascii() {
            return Err(err(format!("non-ASCII char literal {c:?}")));
        }
        i += 1;
        c as u8
    };
    if value > 127 {
        return Err(err(format!("char out of ASCII range: {value}")));
    }
    if i >= bytes.len() || bytes[i] != '\'' {
        return Err(err("expected closing quote in char literal".into()));
    }
    Ok((value, i + 1))
}
