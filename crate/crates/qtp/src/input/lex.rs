use super::ast::Loc;
use super::InputError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    /// Identifier or bare number; numbers double as ids (`vertex 1`).
    Word(String),
    Int(i64),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Colon,
    Eq,
    At,
    Arrow,
    Minus,
    Plus,
    Ge,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Int(k) => format!("`{k}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eq => "`=`".into(),
            Tok::At => "`@`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

/// Integers beyond this are rejected so that later arithmetic cannot
/// overflow.
pub const MAX_INT: i64 = 1_000_000;

pub fn lex(text: &str) -> Result<Vec<(Loc, Tok)>, InputError> {
    let mut out = Vec::new();
    let mut it = text.chars().peekable();
    let (mut line, mut col) = (1u32, 1u32);
    while let Some(&c) = it.peek() {
        let loc = Loc { line, col };
        let mut bump = |it: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = it.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut it);
            continue;
        }
        if c == '#' {
            while it.peek().is_some_and(|&c| c != '\n') {
                bump(&mut it);
            }
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while it.peek().is_some_and(|c| c.is_ascii_digit()) {
                s.push(bump(&mut it).unwrap());
            }
            let v: i64 = s
                .parse()
                .ok()
                .filter(|&v| v <= MAX_INT)
                .ok_or_else(|| InputError::syntax(loc, format!("integer {s} is out of range")))?;
            out.push((loc, Tok::Int(v)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while it.peek().is_some_and(|&c| c.is_ascii_alphanumeric() || c == '_' || c == '\'') {
                s.push(bump(&mut it).unwrap());
            }
            out.push((loc, Tok::Word(s)));
            continue;
        }
        bump(&mut it);
        let tok = match c {
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '=' => Tok::Eq,
            '@' => Tok::At,
            '+' => Tok::Plus,
            '-' if it.peek() == Some(&'>') => {
                bump(&mut it);
                Tok::Arrow
            }
            '-' => Tok::Minus,
            '>' if it.peek() == Some(&'=') => {
                bump(&mut it);
                Tok::Ge
            }
            c => return Err(InputError::syntax(loc, format!("unexpected character {c:?}"))),
        };
        out.push((loc, tok));
    }
    out.push((Loc { line, col }, Tok::Eof));
    Ok(out)
}
