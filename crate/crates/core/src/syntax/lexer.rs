use std::fmt;

use crate::kernel::name::is_ident_continue;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    /// `?x` in goal patterns.
    PatVar(String),
    Num(u64),
    Str(String),
    Sym(&'static str),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::PatVar(s) => write!(f, "`?{s}`"),
            Tok::Num(n) => write!(f, "`{n}`"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Sym(s) => write!(f, "`{s}`"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    /// Byte offset into the lexed text.
    pub pos: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: usize, message: impl Into<String>) -> Self {
        ParseError { pos, message: message.into() }
    }

    pub fn offset(mut self, by: usize) -> Self {
        self.pos += by;
        self
    }
}

const SYMBOLS: &[&str] = &[
    ":=", "=>", "->", "<-", "|-", "::", "++", "(", ")", "[", "]", ",", ":", "|", "=", ";", "+", "-", "*", ".",
];

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

/// Tokenizes `text`, skipping whitespace and nested `(* *)` comments.
pub fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < text.len() {
        let rest = &text[i..];
        let c = rest.chars().next().expect("nonempty");
        if c.is_whitespace() {
            i += c.len_utf8();
            continue;
        }
        if rest.starts_with("(*") {
            i = skip_comment(text, i)?;
            continue;
        }
        let start = i;
        if c == '"' {
            let end = rest[1..].find('"').ok_or_else(|| ParseError::new(start, "unterminated string"))?;
            out.push(Token { tok: Tok::Str(rest[1..1 + end].to_string()), pos: start });
            i += end + 2;
            continue;
        }
        if c.is_ascii_digit() {
            let len = rest.bytes().take_while(u8::is_ascii_digit).count();
            let n = rest[..len].parse().map_err(|_| ParseError::new(start, "numeral too large"))?;
            out.push(Token { tok: Tok::Num(n), pos: start });
            i += len;
            continue;
        }
        if c == '?' {
            let name = ident_at(&rest[1..]);
            if name.is_empty() {
                return Err(ParseError::new(start, "expected a name after `?`"));
            }
            out.push(Token { tok: Tok::PatVar(name.to_string()), pos: start });
            i += 1 + name.len();
            continue;
        }
        if is_ident_start(c) {
            let name = ident_at(rest);
            let tok = if name == "_" { Tok::Sym("_") } else { Tok::Ident(name.to_string()) };
            out.push(Token { tok, pos: start });
            i += name.len();
            continue;
        }
        let unicode = match c {
            '∀' => Some(Tok::Ident("forall".into())),
            '→' => Some(Tok::Sym("->")),
            '←' => Some(Tok::Sym("<-")),
            '⊢' => Some(Tok::Sym("|-")),
            _ => None,
        };
        if let Some(tok) = unicode {
            out.push(Token { tok, pos: start });
            i += c.len_utf8();
            continue;
        }
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(s) => {
                out.push(Token { tok: Tok::Sym(s), pos: start });
                i += s.len();
            }
            None => return Err(ParseError::new(start, format!("unexpected character `{}`", c))),
        }
    }
    Ok(out)
}

fn ident_at(s: &str) -> &str {
    let mut chars = s.char_indices();
    match chars.next() {
        Some((_, c)) if is_ident_start(c) => {}
        _ => return "",
    }
    let end = chars.find(|(_, c)| !is_ident_continue(*c)).map(|(i, _)| i).unwrap_or(s.len());
    &s[..end]
}

/// Returns the offset just past the comment starting at `start`.
pub(crate) fn skip_comment(text: &str, start: usize) -> Result<usize, ParseError> {
    let mut depth = 0usize;
    let mut i = start;
    while i < text.len() {
        let rest = &text[i..];
        if rest.starts_with("(*") {
            depth += 1;
            i += 2;
        } else if rest.starts_with("*)") {
            depth -= 1;
            i += 2;
            if depth == 0 {
                return Ok(i);
            }
        } else {
            i += rest.chars().next().map(char::len_utf8).unwrap_or(1);
        }
    }
    Err(ParseError::new(start, "unterminated comment"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn unicode_identifiers_and_symbols() {
        assert_eq!(
            toks("∀ ls₁, x::ls₁' ++ [] (* note (* nested *) *)"),
            vec![
                Tok::Ident("forall".into()),
                Tok::Ident("ls₁".into()),
                Tok::Sym(","),
                Tok::Ident("x".into()),
                Tok::Sym("::"),
                Tok::Ident("ls₁'".into()),
                Tok::Sym("++"),
                Tok::Sym("["),
                Tok::Sym("]"),
            ]
        );
    }

    #[test]
    fn patterns_and_numbers() {
        assert_eq!(
            toks("|- ?x = _ 13"),
            vec![Tok::Sym("|-"), Tok::PatVar("x".into()), Tok::Sym("="), Tok::Sym("_"), Tok::Num(13)]
        );
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(lex("ab $").unwrap_err().pos, 3);
        assert_eq!(lex("(* open").unwrap_err().pos, 0);
    }
}
