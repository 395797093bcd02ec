//! Lossless Java tokenizer.
//!
//! Every byte of the input ends up in exactly one token, whitespace and
//! comments included, so the token stream can be concatenated back into the
//! original source.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Keyword,
    Identifier,
    Literal,
    Operator,
    Punctuation,
    LineComment,
    BlockComment,
    Whitespace,
}

impl TokenKind {
    pub fn is_comment(self) -> bool {
        matches!(self, TokenKind::LineComment | TokenKind::BlockComment)
    }

    /// Whitespace and comments.
    pub fn is_trivia(self) -> bool {
        self.is_comment() || self == TokenKind::Whitespace
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JToken {
    pub kind: TokenKind,
    pub lexeme: String,
    /// 1-based line of the first character.
    pub line: usize,
    /// 1-based character position of the first character within its line.
    pub column: usize,
    /// Byte offset of the first character in the source.
    pub offset: usize,
}

impl JToken {
    pub fn is(&self, kind: TokenKind, text: &str) -> bool {
        self.kind == kind && self.lexeme == text
    }

    pub fn is_keyword(&self, text: &str) -> bool {
        self.is(TokenKind::Keyword, text)
    }

    pub fn is_punct(&self, text: &str) -> bool {
        self.kind == TokenKind::Punctuation && self.lexeme == text
    }

    pub fn end_offset(&self) -> usize {
        self.offset + self.lexeme.len()
    }
}

const KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
];

const WORD_LITERALS: &[&str] = &["true", "false", "null"];

// Longest first so the greedy scan picks `>>>=` over `>>`.
const OPERATORS: &[&str] = &[
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=", "<=", ">=",
    "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<", ">>", "=", ">", "<", "!", "~", "?", ":",
    "+", "-", "*", "/", "&", "|", "^", "%",
];

const PUNCTUATION: &[char] = &['(', ')', '{', '}', '[', ']', ';', ',', '.', '@'];

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Cursor<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn peek_nth(&self, n: usize) -> Option<char> {
        self.rest().chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn bump_str(&mut self, s: &str) {
        for _ in s.chars() {
            self.bump();
        }
    }

    fn error(&self, line: usize, column: usize, message: &str) -> Error {
        Error::Lex {
            line,
            column,
            message: message.to_string(),
        }
    }
}

/// Tokenizes Java source.
///
/// Fails only on an unterminated block comment, string, text block or
/// character literal; everything else (including characters Java does not
/// allow) becomes some token.
pub fn lex_java(source: &str) -> Result<Vec<JToken>> {
    let mut cur = Cursor {
        src: source,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        let (start, line, column) = (cur.pos, cur.line, cur.column);
        let kind = if c.is_whitespace() {
            while cur.peek().is_some_and(char::is_whitespace) {
                cur.bump();
            }
            TokenKind::Whitespace
        } else if cur.rest().starts_with("//") {
            while cur.peek().is_some_and(|c| c != '\n' && c != '\r') {
                cur.bump();
            }
            TokenKind::LineComment
        } else if cur.rest().starts_with("/*") {
            cur.bump_str("/*");
            loop {
                if cur.rest().starts_with("*/") {
                    cur.bump_str("*/");
                    break;
                }
                if cur.bump().is_none() {
                    return Err(cur.error(line, column, "unterminated block comment"));
                }
            }
            TokenKind::BlockComment
        } else if cur.rest().starts_with("\"\"\"") {
            cur.bump_str("\"\"\"");
            loop {
                if cur.rest().starts_with("\"\"\"") {
                    cur.bump_str("\"\"\"");
                    break;
                }
                match cur.bump() {
                    Some('\\') => {
                        cur.bump();
                    }
                    Some(_) => {}
                    None => return Err(cur.error(line, column, "unterminated text block")),
                }
            }
            TokenKind::Literal
        } else if c == '"' || c == '\'' {
            cur.bump();
            loop {
                match cur.bump() {
                    Some('\\') => {
                        if cur.peek().is_some_and(|c| c != '\n') {
                            cur.bump();
                        }
                    }
                    Some(q) if q == c => break,
                    Some('\n') | None => {
                        let what = if c == '"' {
                            "unterminated string literal"
                        } else {
                            "unterminated character literal"
                        };
                        return Err(cur.error(line, column, what));
                    }
                    Some(_) => {}
                }
            }
            TokenKind::Literal
        } else if c.is_ascii_digit()
            || (c == '.' && cur.peek_nth(1).is_some_and(|d| d.is_ascii_digit()))
        {
            lex_number(&mut cur);
            TokenKind::Literal
        } else if c.is_alphabetic() || c == '_' || c == '$' {
            while cur
                .peek()
                .is_some_and(|c| c.is_alphanumeric() || c == '_' || c == '$')
            {
                cur.bump();
            }
            let word = &source[start..cur.pos];
            if KEYWORDS.contains(&word) {
                TokenKind::Keyword
            } else if WORD_LITERALS.contains(&word) {
                TokenKind::Literal
            } else {
                TokenKind::Identifier
            }
        } else if let Some(op) = OPERATORS.iter().find(|op| cur.rest().starts_with(**op)) {
            cur.bump_str(op);
            if *op == "..." || *op == "::" {
                TokenKind::Punctuation
            } else {
                TokenKind::Operator
            }
        } else {
            cur.bump();
            if PUNCTUATION.contains(&c) {
                TokenKind::Punctuation
            } else {
                // Stray characters (`#`, `\`, ...) are kept as one-char tokens.
                TokenKind::Operator
            }
        };
        tokens.push(JToken {
            kind,
            lexeme: source[start..cur.pos].to_string(),
            line,
            column,
            offset: start,
        });
    }
    Ok(tokens)
}

fn lex_number(cur: &mut Cursor<'_>) {
    let hex = cur.rest().starts_with("0x") || cur.rest().starts_with("0X");
    let mut prev = '\0';
    while let Some(c) = cur.peek() {
        let exponent_sign = (c == '+' || c == '-')
            && if hex {
                matches!(prev, 'p' | 'P')
            } else {
                matches!(prev, 'e' | 'E')
            };
        if c.is_ascii_alphanumeric() || c == '_' || c == '.' || exponent_sign {
            // `1.e5` and `1.f` stay numbers, `1.foo` does not.
            if c == '.'
                && cur.peek_nth(1).is_some_and(|n| {
                    n.is_alphabetic() && !matches!(n, 'e' | 'E' | 'f' | 'F' | 'd' | 'D')
                })
            {
                break;
            }
            prev = c;
            cur.bump();
        } else {
            break;
        }
    }
}
