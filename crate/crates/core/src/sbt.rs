//! Simplified ASTs for `if` statements and their structure-based traversal.
//!
//! Node labels come from a small fixed set, with identifier and literal
//! payloads fused into the label after a colon:
//!
//! | label | children |
//! |---|---|
//! | `IfStatement` | condition, then-branch, optional else-branch |
//! | `ParExpr` | the parenthesized expression |
//! | `Block` | statements |
//! | `Return` | optional value |
//! | `Assign` / `Assign:<op>` | target, value |
//! | `BinaryOp:<op>` | left, right |
//! | `UnaryOp:<op>` / `PostfixOp:<op>` | operand |
//! | `Ternary` | condition, then, else |
//! | `Call:<name>` | optional receiver, arguments |
//! | `Field:<name>` | receiver |
//! | `Index` | array, index |
//! | `New:<type>` | arguments |
//! | `InstanceOf:<type>` | operand |
//! | `Name:<id>` / `Literal:<lexeme>` | none |
//! | `Stmt` | none (statement not modelled) |
//! | `Expr` | none (expression not modelled) |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::miner::extract::Scanner;
use crate::miner::lexer::{lex_java, JToken, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AstNode {
    pub label: String,
    pub children: Vec<AstNode>,
}

impl AstNode {
    pub fn leaf(label: impl Into<String>) -> Self {
        AstNode {
            label: label.into(),
            children: Vec::new(),
        }
    }

    pub fn new(label: impl Into<String>, children: Vec<AstNode>) -> Self {
        AstNode {
            label: label.into(),
            children,
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(AstNode::node_count).sum::<usize>()
    }
}

/// Serializes a tree as `( label <children...> ) label`.
pub fn sbt_serialize(node: &AstNode) -> Vec<String> {
    let mut out = Vec::with_capacity(4 * node.node_count());
    sbt_into(node, &mut out);
    out
}

fn sbt_into(node: &AstNode, out: &mut Vec<String>) {
    out.push("(".to_string());
    out.push(node.label.clone());
    for child in &node.children {
        sbt_into(child, out);
    }
    out.push(")".to_string());
    out.push(node.label.clone());
}

/// Builds the AST of one `if` chain from its tokens (trivia allowed).
///
/// Statements and expressions the parser does not model become payload-free
/// `Stmt` / `Expr` leaves, so this fails only when the first significant
/// token is not `if`.
pub fn parse_if_statement(tokens: &[JToken]) -> Result<AstNode> {
    let sig: Vec<usize> = (0..tokens.len())
        .filter(|&i| !tokens[i].kind.is_trivia())
        .collect();
    if !sig.first().is_some_and(|&i| tokens[i].is_keyword("if")) {
        return Err(Error::Parse("fragment does not start with `if`".into()));
    }
    let parser = Parser {
        tokens,
        sig: &sig,
        scanner: Scanner::new(tokens, &sig),
    };
    let (node, _) = parser.if_statement(0);
    Ok(node)
}

/// SBT tokens of a standalone `if` statement given as Java source.
pub fn sbt_of_source(source: &str) -> Result<Vec<String>> {
    Ok(sbt_serialize(&parse_if_statement(&lex_java(source)?)?))
}

struct Parser<'a> {
    tokens: &'a [JToken],
    sig: &'a [usize],
    scanner: Scanner<'a>,
}

impl Parser<'_> {
    fn get(&self, pos: usize) -> Option<&JToken> {
        self.sig.get(pos).map(|&i| &self.tokens[i])
    }

    fn is_punct(&self, pos: usize, p: &str) -> bool {
        self.get(pos).is_some_and(|t| t.is_punct(p))
    }

    /// Position after the bracket group opening at `pos`.
    fn group_end(&self, pos: usize) -> usize {
        let mut depth = 0usize;
        let mut p = pos;
        while let Some(t) = self.get(p) {
            if t.kind == TokenKind::Punctuation {
                match t.lexeme.as_str() {
                    "(" | "[" | "{" => depth += 1,
                    ")" | "]" | "}" => {
                        depth = depth.saturating_sub(1);
                        if depth == 0 {
                            return p + 1;
                        }
                    }
                    _ => {}
                }
            }
            p += 1;
        }
        self.sig.len()
    }

    fn statement_end(&self, pos: usize) -> usize {
        self.scanner
            .statement(pos)
            .unwrap_or(self.sig.len())
            .max(pos + 1)
    }

    fn if_statement(&self, pos: usize) -> (AstNode, usize) {
        let mut children = Vec::with_capacity(3);
        let mut p = pos + 1;
        if self.is_punct(p, "(") {
            let end = self.group_end(p);
            let inner = self.expression_or_leaf(p + 1, end - 1);
            children.push(AstNode::new("ParExpr", vec![inner]));
            p = end;
        } else {
            children.push(AstNode::new("ParExpr", vec![AstNode::leaf("Expr")]));
        }
        let (then, after_then) = self.statement(p);
        children.push(then);
        p = after_then;
        if self.get(p).is_some_and(|t| t.is_keyword("else")) {
            let (other, after_else) = self.statement(p + 1);
            children.push(other);
            p = after_else;
        }
        (AstNode::new("IfStatement", children), p)
    }

    fn statement(&self, pos: usize) -> (AstNode, usize) {
        let Some(t) = self.get(pos) else {
            return (AstNode::leaf("Stmt"), pos);
        };
        if t.is_punct("{") {
            let end = self.group_end(pos);
            let mut children = Vec::new();
            let mut p = pos + 1;
            while p < end - 1 {
                let (child, next) = self.statement(p);
                children.push(child);
                p = next.max(p + 1);
            }
            return (AstNode::new("Block", children), end);
        }
        if t.is_keyword("if") {
            return self.if_statement(pos);
        }
        let end = self.statement_end(pos);
        // Everything below ends with `;` at `end - 1`.
        let terminated = self.is_punct(end - 1, ";");
        if t.is_keyword("return") && terminated {
            let value: Vec<AstNode> = if end - 1 > pos + 1 {
                vec![self.expression_or_leaf(pos + 1, end - 1)]
            } else {
                Vec::new()
            };
            return (AstNode::new("Return", value), end);
        }
        if terminated
            && matches!(
                t.kind,
                TokenKind::Identifier
                    | TokenKind::Keyword
                    | TokenKind::Operator
                    | TokenKind::Literal
            )
        {
            if let Some(node) = self.expression(pos, end - 1) {
                if is_expression_statement(&node) {
                    return (node, end);
                }
            }
        }
        (AstNode::leaf("Stmt"), end)
    }

    fn expression_or_leaf(&self, start: usize, end: usize) -> AstNode {
        self.expression(start, end)
            .unwrap_or_else(|| AstNode::leaf("Expr"))
    }

    /// Parses exactly the tokens `[start, end)` as one expression.
    fn expression(&self, start: usize, end: usize) -> Option<AstNode> {
        if start >= end {
            return None;
        }
        let mut ep = ExprParser {
            p: self,
            pos: start,
            end,
        };
        let node = ep.assignment()?;
        (ep.pos == end).then_some(node)
    }
}

fn is_expression_statement(node: &AstNode) -> bool {
    let label = node.label.as_str();
    label == "Assign"
        || label.starts_with("Assign:")
        || label.starts_with("Call:")
        || label.starts_with("New:")
        || label.starts_with("UnaryOp:++")
        || label.starts_with("UnaryOp:--")
        || label.starts_with("PostfixOp:")
}

const BINARY_LEVELS: &[&[&str]] = &[
    &["||"],
    &["&&"],
    &["|"],
    &["^"],
    &["&"],
    &["==", "!="],
    &["<", ">", "<=", ">="],
    &["<<", ">>", ">>>"],
    &["+", "-"],
    &["*", "/", "%"],
];

const ASSIGN_OPS: &[&str] = &[
    "=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>=",
];

struct ExprParser<'p, 'a> {
    p: &'p Parser<'a>,
    pos: usize,
    end: usize,
}

impl ExprParser<'_, '_> {
    fn peek(&self) -> Option<&JToken> {
        if self.pos < self.end {
            self.p.get(self.pos)
        } else {
            None
        }
    }

    fn peek_op(&self) -> Option<&str> {
        self.peek()
            .filter(|t| t.kind == TokenKind::Operator)
            .map(|t| t.lexeme.as_str())
    }

    fn assignment(&mut self) -> Option<AstNode> {
        let target = self.ternary()?;
        if let Some(op) = self.peek_op().filter(|op| ASSIGN_OPS.contains(op)) {
            let label = if op == "=" {
                "Assign".to_string()
            } else {
                format!("Assign:{op}")
            };
            self.pos += 1;
            let value = self.assignment()?;
            return Some(AstNode::new(label, vec![target, value]));
        }
        Some(target)
    }

    fn ternary(&mut self) -> Option<AstNode> {
        let cond = self.binary(0)?;
        if self.peek_op() == Some("?") {
            self.pos += 1;
            let then = self.ternary()?;
            if self.peek_op() != Some(":") {
                return None;
            }
            self.pos += 1;
            let other = self.ternary()?;
            return Some(AstNode::new("Ternary", vec![cond, then, other]));
        }
        Some(cond)
    }

    fn binary(&mut self, level: usize) -> Option<AstNode> {
        if level == BINARY_LEVELS.len() {
            return self.unary();
        }
        let mut left = self.binary(level + 1)?;
        loop {
            // `instanceof` sits with the relational operators.
            if level == 6 && self.peek().is_some_and(|t| t.is_keyword("instanceof")) {
                self.pos += 1;
                let ty = self.type_name()?;
                left = AstNode::new(format!("InstanceOf:{ty}"), vec![left]);
                continue;
            }
            match self.peek_op() {
                Some(op) if BINARY_LEVELS[level].contains(&op) => {
                    let label = format!("BinaryOp:{op}");
                    self.pos += 1;
                    let right = self.binary(level + 1)?;
                    left = AstNode::new(label, vec![left, right]);
                }
                _ => return Some(left),
            }
        }
    }

    fn unary(&mut self) -> Option<AstNode> {
        if let Some(op) = self
            .peek_op()
            .filter(|op| ["!", "-", "+", "~", "++", "--"].contains(op))
        {
            let label = format!("UnaryOp:{op}");
            self.pos += 1;
            let operand = self.unary()?;
            return Some(AstNode::new(label, vec![operand]));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Option<AstNode> {
        let mut node = self.primary()?;
        while let Some(t) = self.peek() {
            if t.is_punct(".") {
                let name_tok = self
                    .p
                    .get(self.pos + 1)
                    .filter(|_| self.pos + 1 < self.end)?;
                if !matches!(name_tok.kind, TokenKind::Identifier | TokenKind::Keyword) {
                    return None;
                }
                let name = name_tok.lexeme.clone();
                self.pos += 2;
                if self.peek().is_some_and(|t| t.is_punct("(")) {
                    let mut children = vec![node];
                    children.extend(self.arguments()?);
                    node = AstNode::new(format!("Call:{name}"), children);
                } else {
                    node = AstNode::new(format!("Field:{name}"), vec![node]);
                }
            } else if t.is_punct("[") {
                let close = self.p.group_end(self.pos);
                if close > self.end {
                    return None;
                }
                let index = self.p.expression(self.pos + 1, close - 1)?;
                node = AstNode::new("Index", vec![node, index]);
                self.pos = close;
            } else if let Some(op @ ("++" | "--")) = self.peek_op() {
                node = AstNode::new(format!("PostfixOp:{op}"), vec![node]);
                self.pos += 1;
            } else {
                break;
            }
        }
        Some(node)
    }

    fn arguments(&mut self) -> Option<Vec<AstNode>> {
        let close = self.p.group_end(self.pos);
        if close > self.end {
            return None;
        }
        let mut args = Vec::new();
        let mut start = self.pos + 1;
        let inner_end = close - 1;
        if start < inner_end {
            let mut p = start;
            while p < inner_end {
                let t = self.p.get(p)?;
                if t.kind == TokenKind::Punctuation && matches!(t.lexeme.as_str(), "(" | "[" | "{")
                {
                    p = self.p.group_end(p);
                    continue;
                }
                if t.is_punct(",") {
                    args.push(self.p.expression(start, p)?);
                    start = p + 1;
                }
                p += 1;
            }
            args.push(self.p.expression(start, inner_end)?);
        }
        self.pos = close;
        Some(args)
    }

    fn type_name(&mut self) -> Option<String> {
        let mut name = String::new();
        while let Some(t) = self.peek() {
            let part =
                matches!(t.kind, TokenKind::Identifier | TokenKind::Keyword) || t.is_punct(".");
            if !part || (t.kind == TokenKind::Keyword && t.lexeme == "instanceof") {
                break;
            }
            name.push_str(&t.lexeme);
            self.pos += 1;
        }
        (!name.is_empty()).then_some(name)
    }

    fn primary(&mut self) -> Option<AstNode> {
        let t = self.peek()?.clone();
        match t.kind {
            TokenKind::Literal => {
                self.pos += 1;
                Some(AstNode::leaf(format!("Literal:{}", t.lexeme)))
            }
            TokenKind::Identifier => {
                self.pos += 1;
                if self.peek().is_some_and(|n| n.is_punct("(")) {
                    let args = self.arguments()?;
                    Some(AstNode::new(format!("Call:{}", t.lexeme), args))
                } else {
                    Some(AstNode::leaf(format!("Name:{}", t.lexeme)))
                }
            }
            TokenKind::Keyword if t.lexeme == "this" || t.lexeme == "super" => {
                self.pos += 1;
                Some(AstNode::leaf(format!("Name:{}", t.lexeme)))
            }
            TokenKind::Keyword if t.lexeme == "new" => {
                self.pos += 1;
                let ty = self.type_name()?;
                if !self.peek().is_some_and(|n| n.is_punct("(")) {
                    return None;
                }
                let args = self.arguments()?;
                // anonymous class bodies are not modelled
                if self.peek().is_some_and(|n| n.is_punct("{")) {
                    return None;
                }
                Some(AstNode::new(format!("New:{ty}"), args))
            }
            TokenKind::Punctuation if t.lexeme == "(" => {
                let close = self.p.group_end(self.pos);
                if close > self.end {
                    return None;
                }
                let inner = self.p.expression(self.pos + 1, close - 1)?;
                self.pos = close;
                Some(AstNode::new("ParExpr", vec![inner]))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::lexer::lex_java;

    fn parse(src: &str) -> AstNode {
        parse_if_statement(&lex_java(src).unwrap()).unwrap()
    }

    fn n(label: &str, children: Vec<AstNode>) -> AstNode {
        AstNode::new(label, children)
    }

    fn l(label: &str) -> AstNode {
        AstNode::leaf(label)
    }

    #[test]
    fn return_in_block() {
        let expected = n(
            "IfStatement",
            vec![
                n(
                    "ParExpr",
                    vec![n("BinaryOp:>", vec![l("Name:x"), l("Literal:0")])],
                ),
                n("Block", vec![n("Return", vec![l("Name:y")])]),
            ],
        );
        assert_eq!(parse("if(x>0){return y;}"), expected);
    }

    #[test]
    fn empty_block() {
        let expected = n(
            "IfStatement",
            vec![n("ParExpr", vec![l("Name:a")]), l("Block")],
        );
        assert_eq!(parse("if(a){}"), expected);
    }

    #[test]
    fn else_branch_is_third_child() {
        let root = parse("if(a){} else {}");
        assert_eq!(root.children.len(), 3);
        assert_eq!(root.children[2], l("Block"));
    }

    #[test]
    fn else_if_nests_as_if_statement() {
        let root = parse("if (a) x(); else if (b) y = 1; else { z.w(); }");
        assert_eq!(root.children[1], l("Call:x"));
        let inner = &root.children[2];
        assert_eq!(inner.label, "IfStatement");
        assert_eq!(
            inner.children[1],
            n("Assign", vec![l("Name:y"), l("Literal:1")])
        );
        assert_eq!(
            inner.children[2],
            n("Block", vec![n("Call:w", vec![l("Name:z")])])
        );
    }

    #[test]
    fn precedence_and_calls() {
        let root = parse("if (a.size() + 1 * b[i] == 0 && !done) {}");
        let cond = &root.children[0].children[0];
        assert_eq!(cond.label, "BinaryOp:&&");
        let eq = &cond.children[0];
        assert_eq!(eq.label, "BinaryOp:==");
        let plus = &eq.children[0];
        assert_eq!(plus.label, "BinaryOp:+");
        assert_eq!(plus.children[0], n("Call:size", vec![l("Name:a")]));
        assert_eq!(
            plus.children[1],
            n(
                "BinaryOp:*",
                vec![l("Literal:1"), n("Index", vec![l("Name:b"), l("Name:i")])]
            )
        );
        assert_eq!(cond.children[1], n("UnaryOp:!", vec![l("Name:done")]));
    }

    #[test]
    fn unmodelled_statements_become_stmt_leaves() {
        let root = parse("if (a) { int x = 1; for (;;) {} throw e; i++; }");
        let block = &root.children[1];
        let labels: Vec<_> = block.children.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, ["Stmt", "Stmt", "Stmt", "PostfixOp:++"]);
        assert!(block.children[..3].iter().all(|c| c.children.is_empty()));
    }

    #[test]
    fn unmodelled_condition_becomes_expr() {
        let root = parse("if (list.stream().anyMatch(x -> x > 0)) {}");
        assert_eq!(root.children[0], n("ParExpr", vec![l("Expr")]));
    }

    #[test]
    fn instanceof_and_new() {
        let root = parse("if (o instanceof Foo) { x = new Bar(1, y); }");
        assert_eq!(
            root.children[0].children[0],
            n("InstanceOf:Foo", vec![l("Name:o")])
        );
        assert_eq!(
            root.children[1].children[0],
            n(
                "Assign",
                vec![l("Name:x"), n("New:Bar", vec![l("Literal:1"), l("Name:y")])]
            )
        );
    }

    #[test]
    fn must_start_with_if() {
        assert!(parse_if_statement(&lex_java("while (a) {}").unwrap()).is_err());
        assert!(parse_if_statement(&[]).is_err());
    }

    #[test]
    fn sbt_of_leaf_and_chain() {
        assert_eq!(sbt_serialize(&l("Name:a")), ["(", "Name:a", ")", "Name:a"]);
        assert_eq!(
            sbt_serialize(&n("R", vec![l("C")])),
            ["(", "R", "(", "C", ")", "C", ")", "R"]
        );
    }

    #[test]
    fn sbt_length_is_four_per_node() {
        let root = parse("if (a.b(c) > 2) { return x ? y : z; } else if (q) { w(); }");
        assert_eq!(sbt_serialize(&root).len(), 4 * root.node_count());
    }
}
