#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Str(String),
    Char(String),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const PUNCT: &[&str] = &[
    "&&", "||", "==", "!=", "<=", ">=", "{", "}", "(", ")", "[", "]", ";", ",", ".", "=", "?", ":",
    "<", ">", "+", "-", "*", "/", "%", "!",
];

#[derive(Debug)]
pub struct LexError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);

    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            let (sl, sc) = (line, col);
            advance(&mut i, &mut line, &mut col, '/');
            advance(&mut i, &mut line, &mut col, '*');
            loop {
                if i + 1 >= chars.len() {
                    return Err(LexError {
                        line: sl,
                        col: sc,
                        message: "unterminated comment".into(),
                    });
                }
                if chars[i] == '*' && chars[i + 1] == '/' {
                    advance(&mut i, &mut line, &mut col, '*');
                    advance(&mut i, &mut line, &mut col, '/');
                    break;
                }
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            continue;
        }

        let (tl, tc) = (line, col);
        let start = i;
        let tok = if c.is_alphabetic() || c == '_' || c == '$' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else if c.is_ascii_digit() {
            let mut seen_dot = false;
            while i < chars.len() {
                let d = chars[i];
                if d.is_ascii_alphanumeric() || d == '_' {
                    advance(&mut i, &mut line, &mut col, d);
                } else if d == '.'
                    && !seen_dot
                    && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit())
                {
                    seen_dot = true;
                    advance(&mut i, &mut line, &mut col, d);
                } else {
                    break;
                }
            }
            Tok::Number(chars[start..i].iter().collect())
        } else if c == '"' || c == '\'' {
            advance(&mut i, &mut line, &mut col, c);
            loop {
                match chars.get(i) {
                    None | Some('\n') => {
                        return Err(LexError {
                            line: tl,
                            col: tc,
                            message: "unterminated literal".into(),
                        })
                    }
                    Some('\\') => {
                        advance(&mut i, &mut line, &mut col, '\\');
                        if let Some(&n) = chars.get(i) {
                            advance(&mut i, &mut line, &mut col, n);
                        }
                    }
                    Some(&q) if q == c => {
                        advance(&mut i, &mut line, &mut col, q);
                        break;
                    }
                    Some(&o) => advance(&mut i, &mut line, &mut col, o),
                }
            }
            let text: String = chars[start..i].iter().collect();
            if c == '"' {
                Tok::Str(text)
            } else {
                Tok::Char(text)
            }
        } else {
            let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let Some(p) = PUNCT.iter().find(|p| rest.starts_with(**p)) else {
                return Err(LexError {
                    line,
                    col,
                    message: format!("unexpected character `{c}`"),
                });
            };
            for ch in p.chars() {
                advance(&mut i, &mut line, &mut col, ch);
            }
            Tok::Punct(p)
        };
        out.push(Token { tok, line: tl, col: tc });
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_and_positions() {
        let toks = tokenize("int a = b >= 10; // x\n/* y */ s = \"q\\\"\";").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(kinds[0], Tok::Ident("int".into()));
        assert_eq!(kinds[4], Tok::Punct(">="));
        assert_eq!(kinds[5], Tok::Number("10".into()));
        assert_eq!(kinds[9], Tok::Str("\"q\\\"\"".into()));
        assert_eq!((toks[7].line, toks[7].col), (2, 9));
    }

    #[test]
    fn bad_character() {
        let err = tokenize("a # b").unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
    }
}
