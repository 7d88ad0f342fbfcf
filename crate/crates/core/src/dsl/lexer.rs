use super::ast::Span;
use super::{Diagnostic, ErrorCode};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Word(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Semi,
    Eq,
    Amp,
    Colon,
    Star,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Word(w) => format!("`{w}`"),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Amp => "`&`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Star => "`*`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '+' | '-' | '.' | '%')
}

/// Splits `text` into tokens. Unknown characters are reported and skipped.
pub fn lex(text: &str, diags: &mut Vec<Diagnostic>) -> Vec<Token> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let mut chars = line.char_indices().peekable();
        while let Some(&(i, c)) = chars.peek() {
            let span = Span {
                line: lineno as u32 + 1,
                col: line[..i].chars().count() as u32 + 1,
            };
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                chars.next();
                continue;
            }
            if is_word_char(c) {
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if !is_word_char(d) {
                        break;
                    }
                    end = j + d.len_utf8();
                    chars.next();
                }
                out.push(Token {
                    tok: Tok::Word(line[i..end].to_string()),
                    span,
                });
                continue;
            }
            chars.next();
            let tok = match c {
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                ';' => Tok::Semi,
                '=' => Tok::Eq,
                '&' => Tok::Amp,
                ':' => Tok::Colon,
                '*' => Tok::Star,
                other => {
                    diags.push(Diagnostic::error(
                        ErrorCode::Syntax,
                        span,
                        format!("unexpected character `{other}`"),
                    ));
                    continue;
                }
            };
            out.push(Token { tok, span });
        }
    }
    let lines = text.lines().count() as u32;
    out.push(Token {
        tok: Tok::Eof,
        span: Span {
            line: lines.max(1),
            col: text.lines().last().map_or(1, |l| l.chars().count() as u32 + 1),
        },
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn words_and_punctuation() {
        let mut d = Vec::new();
        let toks = lex("var x in {p30, -5%} # c\n  on *", &mut d);
        assert!(d.is_empty());
        let kinds: Vec<Tok> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Word("var".into()),
                Tok::Word("x".into()),
                Tok::Word("in".into()),
                Tok::LBrace,
                Tok::Word("p30".into()),
                Tok::Comma,
                Tok::Word("-5%".into()),
                Tok::RBrace,
                Tok::Word("on".into()),
                Tok::Star,
                Tok::Eof
            ]
        );
        assert_eq!(toks[8].span, Span { line: 2, col: 3 });
    }

    #[test]
    fn stray_characters_are_located() {
        let mut d = Vec::new();
        lex("var x @", &mut d);
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].line, d[0].col), (1, 7));
    }
}
