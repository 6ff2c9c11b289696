use super::TextError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    Sym(&'static str),
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(s) => format!("number `{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: [&str; 18] =
    [":=", "==", "->", "(", ")", "[", "]", "{", "}", ",", ";", ":", "=", "+", "-", "*", "/", "'"];

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, TextError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if src[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(src[start..i].to_string())
        } else if c.is_ascii_digit() {
            i = scan_number(bytes, i);
            Tok::Number(src[start..i].to_string())
        } else if let Some(s) = SYMBOLS.iter().find(|s| src[i..].starts_with(**s)) {
            i += s.len();
            Tok::Sym(s)
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(TextError::parse(line, col, format!("unexpected character `{ch}`")));
        };
        out.push(Token { tok, line, col });
        col += src[start..i].chars().count();
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

fn scan_number(b: &[u8], mut i: usize) -> usize {
    let digits = |mut i: usize| {
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    i = digits(i);
    if i + 1 < b.len() && b[i] == b'.' && b[i + 1].is_ascii_digit() {
        i = digits(i + 1);
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            i = digits(j);
        }
    }
    i
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        lex(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn numbers_and_symbols() {
        assert_eq!(
            toks("X := 1.5e-3 * A'"),
            vec![
                Tok::Ident("X".into()),
                Tok::Sym(":="),
                Tok::Number("1.5e-3".into()),
                Tok::Sym("*"),
                Tok::Ident("A".into()),
                Tok::Sym("'"),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_skip_comments() {
        let t = lex("// c\n  ab").unwrap();
        assert_eq!((t[0].line, t[0].col), (2, 3));
    }

    #[test]
    fn bad_character() {
        assert!(matches!(lex("a $ b"), Err(TextError::Parse { line: 1, col: 3, .. })));
    }
}
