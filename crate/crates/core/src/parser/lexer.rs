use super::ParseError;

pub const KEYWORDS: &[&str] = &[
    "data", "sized", "codata", "fun", "cofun", "let", "eval", "case", "Size", "Set", "max",
];

// Longest symbols first.
const SYMBOLS: &[&str] = &[
    "->", "++", ":", ";", "{", "}", "(", ")", "[", "]", "=", "\\", ".", "$", "#", "_", ">", "|",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Keyword,
    Ident,
    Symbol,
    Eof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: u32,
    pub column: u32,
}

impl Token {
    pub fn is_sym(&self, s: &str) -> bool {
        self.kind == TokenKind::Symbol && self.text == s
    }

    pub fn is_kw(&self, s: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == s
    }

    pub fn describe(&self) -> String {
        match self.kind {
            TokenKind::Eof => "end of input".to_string(),
            _ => format!("`{}`", self.text),
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Split source text into tokens. `--` starts a comment running to the end
/// of the line.
pub fn tokenize(source: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = source.chars().collect();
    let mut tokens = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    while i < chars.len() {
        let c = chars[i];
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
        if c == '-' && chars.get(i + 1) == Some(&'-') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if is_ident_start(c) {
            let start = i;
            while i < chars.len() && is_ident_char(chars[i]) {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let kind = if KEYWORDS.contains(&text.as_str()) {
                TokenKind::Keyword
            } else {
                TokenKind::Ident
            };
            tokens.push(Token {
                kind,
                text,
                line,
                column: col,
            });
            col += (i - start) as u32;
            continue;
        }
        let sym = SYMBOLS.iter().find(|s| {
            s.chars()
                .enumerate()
                .all(|(k, sc)| chars.get(i + k) == Some(&sc))
        });
        match sym {
            Some(s) => {
                tokens.push(Token {
                    kind: TokenKind::Symbol,
                    text: s.to_string(),
                    line,
                    column: col,
                });
                i += s.len();
                col += s.len() as u32;
            }
            None => {
                return Err(ParseError {
                    message: format!("illegal character `{}`", c),
                    line,
                    column: col,
                    expected: Vec::new(),
                })
            }
        }
    }
    tokens.push(Token {
        kind: TokenKind::Eof,
        text: String::new(),
        line,
        column: col,
    });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(src: &str) -> Vec<String> {
        tokenize(src).unwrap().into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn tokenizes_successor_application() {
        let toks = tokenize("succ ($ i) n").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| (t.kind, t.text.as_str())).collect();
        assert_eq!(
            kinds,
            vec![
                (TokenKind::Ident, "succ"),
                (TokenKind::Symbol, "("),
                (TokenKind::Symbol, "$"),
                (TokenKind::Ident, "i"),
                (TokenKind::Symbol, ")"),
                (TokenKind::Ident, "n"),
                (TokenKind::Eof, ""),
            ]
        );
    }

    #[test]
    fn empty_source_is_just_eof() {
        let toks = tokenize("").unwrap();
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].kind, TokenKind::Eof);
    }

    #[test]
    fn double_dollar_is_two_tokens() {
        assert_eq!(texts("($$ i)"), vec!["(", "$", "$", "i", ")", ""]);
    }

    #[test]
    fn comments_and_positions() {
        let toks = tokenize("-- hello\n  fun f").unwrap();
        assert_eq!(toks[0].text, "fun");
        assert_eq!((toks[0].line, toks[0].column), (2, 3));
        assert_eq!((toks[1].line, toks[1].column), (2, 7));
    }

    #[test]
    fn crlf_and_arrows() {
        assert_eq!(texts("A\r\n-> B"), vec!["A", "->", "B", ""]);
        assert_eq!(texts("++(A : Set)"), vec!["++", "(", "A", ":", "Set", ")", ""]);
    }

    #[test]
    fn illegal_character_is_reported() {
        let err = tokenize("f @ x").unwrap_err();
        assert_eq!((err.line, err.column), (1, 3));
    }
}
