//! Outermost `if`-statement extraction.
//!
//! There is no Java grammar here: statements are recognized by keyword and
//! bracket balance, which is enough to find where an `if`/`else` chain ends.

use serde::{Deserialize, Serialize};

use super::lexer::{JToken, TokenKind};

/// One outermost `if` chain (including every `else if` / `else` branch).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IfFragment {
    /// Byte offsets `[start, end)` into the source file.
    pub span: (usize, usize),
    pub line: usize,
    /// Column of the `if` keyword.
    pub column: usize,
    pub text: String,
    pub project_id: String,
    pub path: String,
    /// Token index range `[first, last]` into the file's token stream.
    pub first_token: usize,
    pub last_token: usize,
}

impl IfFragment {
    pub fn tokens<'a>(&self, tokens: &'a [JToken]) -> &'a [JToken] {
        &tokens[self.first_token..=self.last_token]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct Extraction {
    pub fragments: Vec<IfFragment>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Finds every `if` chain that is not nested in another one.
///
/// An `if` whose brackets do not balance is skipped with a diagnostic; the
/// scan resumes right after its keyword.
pub fn extract_outermost_ifs(tokens: &[JToken]) -> Extraction {
    let significant: Vec<usize> = (0..tokens.len())
        .filter(|&i| !tokens[i].kind.is_trivia())
        .collect();
    let scanner = Scanner::new(tokens, &significant);

    let mut out = Extraction::default();
    let mut pos = 0;
    while pos < significant.len() {
        let tok = scanner.tok(pos);
        if !tok.is_keyword("if") {
            pos += 1;
            continue;
        }
        match scanner.if_statement(pos) {
            Ok(end) => {
                let first = significant[pos];
                let last = significant[end - 1];
                let text: String = tokens[first..=last]
                    .iter()
                    .map(|t| t.lexeme.as_str())
                    .collect();
                out.fragments.push(IfFragment {
                    span: (tokens[first].offset, tokens[last].end_offset()),
                    line: tok.line,
                    column: tok.column,
                    text,
                    project_id: String::new(),
                    path: String::new(),
                    first_token: first,
                    last_token: last,
                });
                pos = end;
            }
            Err(message) => {
                out.diagnostics.push(Diagnostic {
                    line: tok.line,
                    column: tok.column,
                    message,
                });
                pos += 1;
            }
        }
    }
    out
}

type Scan = Result<usize, String>;

/// Statement-extent scanner over the significant (non-trivia) tokens;
/// positions index into `sig`.
pub(crate) struct Scanner<'a> {
    tokens: &'a [JToken],
    sig: &'a [usize],
}

impl<'a> Scanner<'a> {
    pub(crate) fn new(tokens: &'a [JToken], sig: &'a [usize]) -> Self {
        Scanner { tokens, sig }
    }

    fn tok(&self, pos: usize) -> &JToken {
        &self.tokens[self.sig[pos]]
    }

    fn get(&self, pos: usize) -> Option<&JToken> {
        self.sig.get(pos).map(|&i| &self.tokens[i])
    }

    fn expect_punct(&self, pos: usize, p: &str) -> Result<(), String> {
        match self.get(pos) {
            Some(t) if t.is_punct(p) => Ok(()),
            Some(t) => Err(format!(
                "expected `{p}` at {}:{}, found `{}`",
                t.line, t.column, t.lexeme
            )),
            None => Err(format!("expected `{p}`, found end of file")),
        }
    }

    /// `pos` is an opening bracket; returns the position after its partner.
    fn balanced(&self, pos: usize) -> Scan {
        let mut stack: Vec<&str> = Vec::new();
        let mut p = pos;
        while let Some(t) = self.get(p) {
            if t.kind == TokenKind::Punctuation {
                match t.lexeme.as_str() {
                    "(" => stack.push(")"),
                    "[" => stack.push("]"),
                    "{" => stack.push("}"),
                    close @ (")" | "]" | "}") => {
                        if stack.pop() != Some(close) {
                            return Err(format!("unbalanced `{close}` at {}:{}", t.line, t.column));
                        }
                        if stack.is_empty() {
                            return Ok(p + 1);
                        }
                    }
                    _ => {}
                }
            }
            p += 1;
        }
        Err("unbalanced brackets at end of file".to_string())
    }

    fn paren_group(&self, pos: usize) -> Scan {
        self.expect_punct(pos, "(")?;
        self.balanced(pos)
    }

    fn block(&self, pos: usize) -> Scan {
        self.expect_punct(pos, "{")?;
        self.balanced(pos)
    }

    fn if_statement(&self, pos: usize) -> Scan {
        let after_cond = self.paren_group(pos + 1)?;
        let after_then = self.statement(after_cond)?;
        match self.get(after_then) {
            Some(t) if t.is_keyword("else") => self.statement(after_then + 1),
            _ => Ok(after_then),
        }
    }

    pub(crate) fn statement(&self, pos: usize) -> Scan {
        let Some(t) = self.get(pos) else {
            return Err("statement expected, found end of file".to_string());
        };
        if t.is_punct("{") {
            return self.block(pos);
        }
        if t.is_punct(";") {
            return Ok(pos + 1);
        }
        if t.kind == TokenKind::Keyword {
            match t.lexeme.as_str() {
                "if" => return self.if_statement(pos),
                "for" | "while" => {
                    let after = self.paren_group(pos + 1)?;
                    return self.statement(after);
                }
                "switch" if self.get(pos + 1).is_some_and(|n| n.is_punct("(")) => {
                    let after = self.paren_group(pos + 1)?;
                    let end = self.block(after)?;
                    // switch expression used as a statement
                    return Ok(match self.get(end) {
                        Some(n) if n.is_punct(";") => end + 1,
                        _ => end,
                    });
                }
                "synchronized" => {
                    let after = self.paren_group(pos + 1)?;
                    return self.block(after);
                }
                "do" => {
                    let after_body = self.statement(pos + 1)?;
                    match self.get(after_body) {
                        Some(w) if w.is_keyword("while") => {}
                        _ => {
                            return Err(format!("`do` at {}:{} without `while`", t.line, t.column))
                        }
                    }
                    let after_cond = self.paren_group(after_body + 1)?;
                    self.expect_punct(after_cond, ";")?;
                    return Ok(after_cond + 1);
                }
                "try" => return self.try_statement(pos),
                "else" => {
                    return Err(format!("dangling `else` at {}:{}", t.line, t.column));
                }
                _ => {}
            }
        }
        // labeled statement
        if t.kind == TokenKind::Identifier
            && self
                .get(pos + 1)
                .is_some_and(|n| n.is(TokenKind::Operator, ":"))
        {
            return self.statement(pos + 2);
        }
        self.simple_statement(pos)
    }

    fn try_statement(&self, pos: usize) -> Scan {
        let mut p = pos + 1;
        if self.get(p).is_some_and(|t| t.is_punct("(")) {
            p = self.paren_group(p)?;
        }
        p = self.block(p)?;
        while self.get(p).is_some_and(|t| t.is_keyword("catch")) {
            p = self.paren_group(p + 1)?;
            p = self.block(p)?;
        }
        if self.get(p).is_some_and(|t| t.is_keyword("finally")) {
            p = self.block(p + 1)?;
        }
        Ok(p)
    }

    /// Expression, declaration, `return`, `throw`, ... up to the `;` at depth 0.
    fn simple_statement(&self, pos: usize) -> Scan {
        let mut p = pos;
        while let Some(t) = self.get(p) {
            if t.kind == TokenKind::Punctuation {
                match t.lexeme.as_str() {
                    ";" => return Ok(p + 1),
                    "(" | "[" | "{" => {
                        p = self.balanced(p)?;
                        continue;
                    }
                    ")" | "]" | "}" => {
                        return Err(format!(
                            "unbalanced `{}` at {}:{}",
                            t.lexeme, t.line, t.column
                        ))
                    }
                    _ => {}
                }
            }
            p += 1;
        }
        Err("missing `;` before end of file".to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::lexer::lex_java;

    fn extract(src: &str) -> Extraction {
        extract_outermost_ifs(&lex_java(src).unwrap())
    }

    fn texts(src: &str) -> Vec<String> {
        extract(src).fragments.into_iter().map(|f| f.text).collect()
    }

    #[test]
    fn nested_if_yields_only_outer() {
        assert_eq!(texts("if(a){ if(b){} }"), ["if(a){ if(b){} }"]);
    }

    #[test]
    fn else_if_chain_is_one_fragment() {
        let src = "if(a){} else if(b){} else {}";
        let frags = extract(src).fragments;
        assert_eq!(frags.len(), 1);
        assert_eq!(frags[0].span, (0, src.len()));
    }

    #[test]
    fn no_if_no_fragment() {
        assert!(extract("class A { void f() { x = 1; } }")
            .fragments
            .is_empty());
    }

    #[test]
    fn fragments_inside_methods_and_siblings() {
        let src = "class A {\n  void f() {\n    if (x > 0) return y;\n    while (z) { if (q) w(); }\n    if (k) { a(); } else b();\n  }\n}";
        assert_eq!(
            texts(src),
            [
                "if (x > 0) return y;",
                "if (q) w();",
                "if (k) { a(); } else b();"
            ]
        );
        let frags = extract(src).fragments;
        assert_eq!((frags[0].line, frags[0].column), (3, 5));
    }

    #[test]
    fn unbraced_compound_branches() {
        let src = "if (a) for (int i = 0; i < n; i++) { f(i); } else try { g(); } catch (E e) { h(); } finally { k(); }";
        assert_eq!(texts(src), [src]);
        let src = "if (a) do x(); while (b); else label: y();";
        assert_eq!(texts(src), [src]);
    }

    #[test]
    fn lambdas_and_anonymous_classes_in_simple_statements() {
        let src = "if (a) run(() -> { if (b) c(); }); d();";
        assert_eq!(texts(src), ["if (a) run(() -> { if (b) c(); });"]);
        let src = "if (a) x = new Runnable() { public void run() {} };";
        assert_eq!(texts(src), [src]);
    }

    #[test]
    fn switch_statement_branch() {
        let src = "if (a) switch (x) { case 1: if (b) y(); break; } else z();";
        assert_eq!(texts(src), [src]);
    }

    #[test]
    fn comments_inside_are_kept_in_text() {
        let src = "if (a) { // inner\n f(); }";
        assert_eq!(texts(src), [src]);
    }

    #[test]
    fn unbalanced_candidate_is_skipped_with_diagnostic() {
        let ex = extract("void f() { if (a { b(); }\n}\nif (c) d();");
        assert_eq!(ex.diagnostics.len(), 1);
        assert_eq!(ex.diagnostics[0].line, 1);
        let texts: Vec<_> = ex.fragments.iter().map(|f| f.text.as_str()).collect();
        assert_eq!(texts, ["if (c) d();"]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn stmt() -> impl Strategy<Value = String> {
            let leaf = prop_oneof![
                Just("x();".to_string()),
                Just("return y;".to_string()),
                Just("{}".to_string()),
                Just("// c\n".to_string()),
            ];
            leaf.prop_recursive(4, 32, 4, |inner| {
                prop_oneof![
                    inner.clone().prop_map(|s| format!("if (a) {{ {s} }}")),
                    (inner.clone(), inner.clone())
                        .prop_map(|(s, t)| format!("if (b) {{ {s} }} else {{ {t} }}")),
                    proptest::collection::vec(inner.clone(), 1..4)
                        .prop_map(|v| format!("{{ {} }}", v.join(" "))),
                    inner.prop_map(|s| format!("while (c) {{ {s} }}")),
                ]
            })
        }

        proptest! {
            #[test]
            fn spans_never_nest(parts in proptest::collection::vec(stmt(), 0..6)) {
                let src = format!("void f() {{ {} }}", parts.join("\n"));
                let frags = extract(&src).fragments;
                for (i, a) in frags.iter().enumerate() {
                    for b in &frags[i + 1..] {
                        prop_assert!(a.span.1 <= b.span.0 || b.span.1 <= a.span.0);
                    }
                }
                for f in &frags {
                    prop_assert_eq!(&src[f.span.0..f.span.1], f.text.as_str());
                }
            }
        }
    }
}
