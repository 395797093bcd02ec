use serde::{Deserialize, Serialize};

use super::extract::IfFragment;
use super::label::Label;
use super::lexer::JToken;

/// An outermost `if` chain and the single comment linked to it, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeCommentPair {
    pub fragment: IfFragment,
    pub comment: Option<String>,
    pub label: Label,
    pub project_id: String,
}

/// Attaches comments to fragments.
///
/// A comment qualifies when it sits between the `if` keyword and the
/// previous non-comment token, and starts at the same column as the `if`.
/// Blank lines do not break the link; only a non-comment token does.
/// Fragments with two or more qualifying comments are dropped.
pub fn link_comments(tokens: &[JToken], fragments: &[IfFragment]) -> Vec<CodeCommentPair> {
    fragments
        .iter()
        .filter_map(|fragment| {
            let qualifying: Vec<&JToken> = tokens[..fragment.first_token]
                .iter()
                .rev()
                .take_while(|t| t.kind.is_trivia())
                .filter(|t| t.kind.is_comment() && t.column == fragment.column)
                .collect();
            let comment = match qualifying.as_slice() {
                [] => None,
                [only] => Some(only.lexeme.clone()),
                _ => return None,
            };
            Some(CodeCommentPair {
                fragment: fragment.clone(),
                comment,
                label: Label::Unlabeled,
                project_id: fragment.project_id.clone(),
            })
        })
        .collect()
}
