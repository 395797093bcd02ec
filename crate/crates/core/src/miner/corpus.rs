use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use super::extract::{extract_outermost_ifs, Diagnostic};
use super::label::{label_comment, Label};
use super::lexer::lex_java;
use super::link::{link_comments, CodeCommentPair};
use crate::error::{Error, Result};
use crate::sbt::{parse_if_statement, sbt_serialize};
use crate::text::normalize_comment;

/// One line of the mined corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub project: String,
    pub path: String,
    pub span: [usize; 2],
    pub column: usize,
    pub code_text: String,
    pub sbt_tokens: Vec<String>,
    pub comment_raw: Option<String>,
    pub comment_words: Vec<String>,
    pub label: Label,
}

impl CorpusRecord {
    pub fn is_satd(&self) -> bool {
        self.label == Label::Satd
    }
}

#[derive(Debug, Default)]
pub struct FileMining {
    pub pairs: Vec<CodeCommentPair>,
    pub records: Vec<CorpusRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Lexes one file and turns its outermost `if` chains into unlabeled records.
pub fn mine_source(source: &str, path: &str, project: &str) -> Result<FileMining> {
    let tokens = lex_java(source)?;
    let mut extraction = extract_outermost_ifs(&tokens);
    for f in &mut extraction.fragments {
        f.project_id = project.to_string();
        f.path = path.to_string();
    }
    let pairs = link_comments(&tokens, &extraction.fragments);
    let records = pairs
        .iter()
        .map(|pair| {
            let frag = &pair.fragment;
            let ast = parse_if_statement(frag.tokens(&tokens))?;
            Ok(CorpusRecord {
                project: project.to_string(),
                path: path.to_string(),
                span: [frag.span.0, frag.span.1],
                column: frag.column,
                code_text: frag.text.clone(),
                sbt_tokens: sbt_serialize(&ast),
                comment_raw: pair.comment.clone(),
                comment_words: pair
                    .comment
                    .as_deref()
                    .map(normalize_comment)
                    .unwrap_or_default(),
                label: Label::Unlabeled,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FileMining {
        pairs,
        records,
        diagnostics: extraction.diagnostics,
    })
}

#[derive(Debug, Default)]
pub struct DirMining {
    pub records: Vec<CorpusRecord>,
    pub files: usize,
    /// `(path, diagnostic)` for skipped `if` candidates.
    pub diagnostics: Vec<(String, Diagnostic)>,
    /// `(path, error)` for files that could not be lexed at all.
    pub failed_files: Vec<(String, String)>,
}

/// Mines every `.java` file below `root`, in path order.
///
/// Files directly inside a subdirectory `root/<name>/...` are tagged with
/// project `<name>`; files at the top level get the name of `root` itself.
pub fn mine_dir(root: &Path) -> Result<DirMining> {
    if !root.is_dir() {
        return Err(Error::invalid(format!(
            "{} is not a directory",
            root.display()
        )));
    }
    let mut files: Vec<PathBuf> = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::Io(e.into()))?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "java") {
            files.push(entry.into_path());
        }
    }
    let root_name = root
        .canonicalize()
        .ok()
        .and_then(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "root".to_string());

    let results: Vec<(String, Result<FileMining>)> = files
        .par_iter()
        .map(|file| {
            let rel = file.strip_prefix(root).unwrap_or(file);
            let rel_str = rel.to_string_lossy().replace('\\', "/");
            let mut parts = rel.components();
            let first = parts.next();
            let project = match (first, parts.next()) {
                (Some(dir), Some(_)) => dir.as_os_str().to_string_lossy().into_owned(),
                _ => root_name.clone(),
            };
            let mined = fs::read(file)
                .map_err(Error::from)
                .map(|bytes| String::from_utf8_lossy(&bytes).into_owned())
                .and_then(|src| mine_source(&src, &rel_str, &project));
            (rel_str, mined)
        })
        .collect();

    let mut out = DirMining {
        files: files.len(),
        ..DirMining::default()
    };
    for (path, mined) in results {
        match mined {
            Ok(m) => {
                out.records.extend(m.records);
                out.diagnostics
                    .extend(m.diagnostics.into_iter().map(|d| (path.clone(), d)));
            }
            Err(e) => {
                log::warn!("skipping {path}: {e}");
                out.failed_files.push((path, e.to_string()));
            }
        }
    }
    Ok(out)
}

/// Applies the keyword protocol to every record that has a comment.
pub fn label_records(records: &mut [CorpusRecord]) {
    for r in records {
        r.label = match &r.comment_raw {
            Some(c) => label_comment(c),
            None => Label::Unlabeled,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mine_source_builds_records() {
        let src = "class A {\n  void f() {\n    x = 1;\n    // TODO: handle zero\n    if (x > 0) { return y; }\n  }\n}\n";
        let mined = mine_source(src, "A.java", "p").unwrap();
        assert_eq!(mined.records.len(), 1);
        let r = &mined.records[0];
        assert_eq!(r.comment_raw.as_deref(), Some("// TODO: handle zero"));
        assert_eq!(r.comment_words, ["todo", "handl", "zero"]);
        assert_eq!(r.column, 5);
        assert_eq!(&src[r.span[0]..r.span[1]], r.code_text);
        assert_eq!(r.sbt_tokens[..2], ["(", "IfStatement"]);
        assert_eq!(r.label, Label::Unlabeled);
    }

    #[test]
    fn labeling_assigns_protocol_labels() {
        let src = "// hack\nif (a) {}\nb();\n// plain words\nif (c) {}\nd();\nif (e) {}";
        let mut records = mine_source(src, "A.java", "p").unwrap().records;
        label_records(&mut records);
        let labels: Vec<_> = records.iter().map(|r| r.label).collect();
        assert_eq!(labels, [Label::Satd, Label::NonSatd, Label::Unlabeled]);
    }

    #[test]
    fn lex_failure_is_an_error() {
        assert!(mine_source("/* open", "A.java", "p").is_err());
    }
}
