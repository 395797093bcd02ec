//! Mining code/comment pairs from Java sources.

pub mod corpus;
pub mod dataset;
pub mod extract;
pub mod label;
pub mod lexer;
pub mod link;

pub use corpus::{label_records, mine_dir, mine_source, CorpusRecord, DirMining, FileMining};
pub use dataset::{build_dataset, Dataset, Provenance};
pub use extract::{extract_outermost_ifs, Diagnostic, Extraction, IfFragment};
pub use label::{label_comment, Label, EXCLUSION_KEYWORDS, SATD_KEYWORDS};
pub use lexer::{lex_java, JToken, TokenKind};
pub use link::{link_comments, CodeCommentPair};
