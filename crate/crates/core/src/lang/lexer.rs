use super::{ErrorKind, ParseError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Tok {
    /// Bare word made of ASCII letters, digits and `_`, not all digits.
    Word(String),
    /// All-digit word; the raw text is kept so `0900` and `900` differ.
    Number(String),
    Str(String),
    Colon,
    Comma,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

pub(crate) fn tokenize(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);

    while let Some(&c) = chars.peek() {
        let (start_line, start_col) = (line, column);
        let bump = |c: char, line: &mut usize, column: &mut usize| {
            if c == '\n' {
                *line += 1;
                *column = 1;
            } else {
                *column += 1;
            }
        };

        if c.is_whitespace() {
            chars.next();
            bump(c, &mut line, &mut column);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                chars.next();
                column += 1;
            }
            continue;
        }

        let tok = match c {
            ':' | ',' | '(' | ')' => {
                chars.next();
                column += 1;
                match c {
                    ':' => Tok::Colon,
                    ',' => Tok::Comma,
                    '(' => Tok::LParen,
                    _ => Tok::RParen,
                }
            }
            '"' => {
                chars.next();
                column += 1;
                let mut s = String::new();
                loop {
                    let Some(c) = chars.next() else {
                        return Err(ParseError::new(
                            ErrorKind::Syntax,
                            start_line,
                            start_col,
                            "unterminated string literal",
                        ));
                    };
                    match c {
                        '"' => {
                            column += 1;
                            break;
                        }
                        '\n' => {
                            return Err(ParseError::new(
                                ErrorKind::Syntax,
                                start_line,
                                start_col,
                                "unterminated string literal",
                            ))
                        }
                        '\\' => {
                            let esc = chars.next();
                            let escaped = match esc {
                                Some('"') => '"',
                                Some('\\') => '\\',
                                Some('n') => '\n',
                                Some('t') => '\t',
                                _ => {
                                    return Err(ParseError::new(
                                        ErrorKind::Syntax,
                                        line,
                                        column,
                                        "invalid escape sequence in string literal",
                                    ))
                                }
                            };
                            column += 2;
                            s.push(escaped);
                        }
                        c => {
                            column += 1;
                            s.push(c);
                        }
                    }
                }
                Tok::Str(s)
            }
            c if c.is_ascii_alphanumeric() || c == '_' => {
                let mut w = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        w.push(c);
                        chars.next();
                        column += 1;
                    } else {
                        break;
                    }
                }
                if w.bytes().all(|b| b.is_ascii_digit()) {
                    Tok::Number(w)
                } else {
                    Tok::Word(w)
                }
            }
            other => {
                return Err(ParseError::new(
                    ErrorKind::Syntax,
                    start_line,
                    start_col,
                    format!("unexpected character `{other}`"),
                ))
            }
        };
        out.push(Token {
            tok,
            line: start_line,
            column: start_col,
        });
    }

    out.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}
