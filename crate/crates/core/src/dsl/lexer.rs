//! Single-line tokenizer. Longest match; `#` starts a comment.

use super::{ParseDiagnostic, SourceSpan};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Unsigned decimal literal, kept as written.
    Number(String),
    /// Number immediately followed by `i`.
    Imag(String),
    /// Contents of `|...>`.
    Ket(String),
    Sym(&'static str),
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Imag(s) => format!("`{s}i`"),
            Tok::Ket(s) => format!("`|{s}>`"),
            Tok::Sym(s) => format!("`{s}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

const SYMBOLS: &[&str] = &["==", "=", ",", "+", "-", "(", ")", "[", "]", ";", ":"];

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_ket_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '.'
}

/// Tokens of one line, or the first lexical error on it.
pub(crate) fn lex_line(line: &str, lineno: usize) -> Result<Vec<Token>, ParseDiagnostic> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let span = |start: usize, end: usize| SourceSpan {
        line: lineno,
        column: start + 1,
        length: (end - start).max(1),
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if is_ident_start(c) {
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                span: span(start, i),
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            if i < chars.len()
                && chars[i] == 'i'
                && !chars.get(i + 1).is_some_and(|&d| is_ident_char(d))
            {
                i += 1;
                out.push(Token {
                    tok: Tok::Imag(text),
                    span: span(start, i),
                });
            } else {
                out.push(Token {
                    tok: Tok::Number(text),
                    span: span(start, i),
                });
            }
            continue;
        }
        if c == '|' {
            i += 1;
            while i < chars.len() && is_ket_char(chars[i]) {
                i += 1;
            }
            if i < chars.len() && (chars[i] == '>' || chars[i] == '\u{27E9}') {
                i += 1;
                out.push(Token {
                    tok: Tok::Ket(chars[start + 1..i - 1].iter().collect()),
                    span: span(start, i),
                });
                continue;
            }
            return Err(
                ParseDiagnostic::error(span(start, i), "unterminated ket").with_hint("`|label>`")
            );
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        if let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            i += sym.chars().count();
            out.push(Token {
                tok: Tok::Sym(sym),
                span: span(start, i),
            });
            continue;
        }
        return Err(ParseDiagnostic::error(
            span(start, start + 1),
            format!("unexpected character `{c}`"),
        ));
    }
    Ok(out)
}
