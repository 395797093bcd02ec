use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Satd,
    NonSatd,
    Excluded,
    Unlabeled,
}

pub const SATD_KEYWORDS: [&str; 14] = [
    "todo",
    "fixme",
    "hack",
    "workaround",
    "yuck",
    "ugly",
    "stupid",
    "nuke",
    "kludge",
    "retarded",
    "barf",
    "crap",
    "silly",
    "kaboom",
];

/// Words frequent in debt-like comments; their presence keeps a comment out
/// of the non-SATD class.
pub const EXCLUSION_KEYWORDS: [&str; 22] = [
    "implement",
    "fix",
    "ineffici",
    "xxx",
    "broken",
    "ill",
    "should",
    "need",
    "here",
    "better",
    "why",
    "method",
    "could",
    "work",
    "probabl",
    "not",
    "move",
    "more",
    "make",
    "code",
    "but",
    "author",
];

/// Lowercased words of a raw comment, with delimiters and surrounding
/// punctuation trimmed from each whitespace-separated piece.
fn comment_words(comment: &str) -> impl Iterator<Item = String> + '_ {
    comment
        .split_whitespace()
        .map(|w| {
            w.trim_matches(|c: char| !c.is_alphanumeric())
                .to_lowercase()
        })
        .filter(|w| !w.is_empty())
}

/// Keyword protocol: any SATD keyword wins; otherwise any of the 36 keywords
/// excludes; otherwise non-SATD. Keywords match as prefixes of words.
pub fn label_comment(comment: &str) -> Label {
    let words: Vec<String> = comment_words(comment).collect();
    if words.is_empty() {
        return Label::Excluded;
    }
    let hits = |list: &[&str]| words.iter().any(|w| list.iter().any(|k| w.starts_with(k)));
    if hits(&SATD_KEYWORDS) {
        Label::Satd
    } else if hits(&EXCLUSION_KEYWORDS) {
        Label::Excluded
    } else {
        Label::NonSatd
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(label_comment("TODO fix this later"), Label::Satd);
        assert_eq!(label_comment("returns the larger value"), Label::NonSatd);
        assert_eq!(label_comment("this should be refactored"), Label::Excluded);
    }

    #[test]
    fn delimiters_and_punctuation_do_not_hide_keywords() {
        assert_eq!(label_comment("//TODO: later"), Label::Satd);
        assert_eq!(label_comment("/* ugly */"), Label::Satd);
        assert_eq!(label_comment("// (Kludge)"), Label::Satd);
        assert_eq!(label_comment("/** HACK"), Label::Satd);
    }

    #[test]
    fn stems_match_by_prefix() {
        assert_eq!(label_comment("// inefficient loop"), Label::Excluded);
        assert_eq!(label_comment("// probably empty"), Label::Excluded);
        assert_eq!(label_comment("// workarounds everywhere"), Label::Satd);
    }

    #[test]
    fn empty_comment_is_excluded() {
        assert_eq!(label_comment("//"), Label::Excluded);
        assert_eq!(label_comment("/* */"), Label::Excluded);
        assert_eq!(label_comment(""), Label::Excluded);
    }

    #[test]
    fn keyword_lists_have_expected_sizes() {
        let mut all: Vec<&str> = SATD_KEYWORDS
            .iter()
            .chain(&EXCLUSION_KEYWORDS)
            .copied()
            .collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 36);
    }
}
