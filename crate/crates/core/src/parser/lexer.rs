use std::fmt;
use std::sync::Arc;

/// A 1-based position in a source text.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SourceSpan {
    pub file: Option<Arc<str>>,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.file {
            Some(file) => write!(f, "{file}:{}:{}", self.line, self.column),
            None => write!(f, "{}:{}", self.line, self.column),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    At,
    Arrow,
    LArrow,
    Lt,
    Le,
    Eq,
    Dot,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::At => f.write_str("`@`"),
            Tok::Arrow => f.write_str("`->`"),
            Tok::LArrow => f.write_str("`<-`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`<=`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Splits `text` into tokens; the final token is always `Eof`.
pub fn tokenize(text: &str, file: Option<&Arc<str>>) -> Result<Vec<Token>, (String, SourceSpan)> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let span = |line, column| SourceSpan { file: file.cloned(), line, column };
    while i < chars.len() {
        let c = chars[i];
        let here = span(line, col);
        let peek = |k: usize| chars.get(i + k).copied();
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (tok, len) = if is_ident_start(c) {
            let len = chars[i..].iter().take_while(|c| is_ident_char(**c)).count();
            (Tok::Ident(chars[i..i + len].iter().collect()), len)
        } else if c.is_ascii_digit() || (c == '-' && peek(1).is_some_and(|d| d.is_ascii_digit())) {
            let mut len = 1 + chars[i + 1..].iter().take_while(|c| c.is_ascii_digit()).count();
            if peek(len) == Some('/') && peek(len + 1).is_some_and(|d| d.is_ascii_digit() || d == '-') {
                len += 1;
                if peek(len) == Some('-') {
                    len += 1;
                }
                len += chars[i + len..].iter().take_while(|c| c.is_ascii_digit()).count();
            }
            (Tok::Number(chars[i..i + len].iter().collect()), len)
        } else {
            match (c, peek(1)) {
                ('-', Some('>')) => (Tok::Arrow, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('<', Some('-')) if !peek(2).is_some_and(|d| d.is_ascii_digit()) => (Tok::LArrow, 2),
                ('<', _) => (Tok::Lt, 1),
                ('=', _) => (Tok::Eq, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                (',', _) => (Tok::Comma, 1),
                ('@', _) => (Tok::At, 1),
                ('.', _) => (Tok::Dot, 1),
                _ => return Err((format!("unexpected character `{c}`"), here)),
            }
        };
        out.push(Token { tok, span: here });
        i += len;
        col += len;
    }
    out.push(Token { tok: Tok::Eof, span: span(line, col) });
    Ok(out)
}
