//! Corpus loading and request-size windowing.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest window accepted by [`window`].
pub const MIN_WINDOW_CHARS: usize = 512;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input path {0} does not exist")]
    MissingPath(PathBuf),
    #[error("{0} is empty")]
    EmptyFile(PathBuf),
    #[error("{0} is not valid UTF-8")]
    NotUtf8(PathBuf),
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub source: PathBuf,
    pub sector_tag: Option<String>,
}

#[derive(Debug, Default)]
pub struct Corpus {
    pub documents: Vec<Document>,
    /// Files that could not be loaded; the rest of the corpus is still usable.
    pub errors: Vec<IngestError>,
}

/// Document id: the path relative to the corpus root, without extension and
/// with `/` separators (e.g. `data/policy`).
fn document_id(path: &Path, root: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path).with_extension("");
    let parts: Vec<String> = rel.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
    if parts.is_empty() {
        path.display().to_string()
    } else {
        parts.join("/")
    }
}

fn read_document(path: &Path, id: String, sector_tag: Option<String>) -> Result<Document, IngestError> {
    let bytes = fs::read(path).map_err(|source| IngestError::Io { path: path.to_path_buf(), source })?;
    let text = String::from_utf8(bytes).map_err(|_| IngestError::NotUtf8(path.to_path_buf()))?;
    if text.trim().is_empty() {
        return Err(IngestError::EmptyFile(path.to_path_buf()));
    }
    Ok(Document { id, text, source: path.to_path_buf(), sector_tag })
}

fn collect_txt(dir: &Path, out: &mut Vec<PathBuf>) -> Result<(), IngestError> {
    let entries = fs::read_dir(dir).map_err(|source| IngestError::Io { path: dir.to_path_buf(), source })?;
    for entry in entries {
        let entry = entry.map_err(|source| IngestError::Io { path: dir.to_path_buf(), source })?;
        let path = entry.path();
        if path.is_dir() {
            collect_txt(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "txt") {
            out.push(path);
        }
    }
    Ok(())
}

/// Loads one document per `.txt` file under `path` (or the single file at
/// `path`), in lexicographic path order. Files in a subdirectory of the root
/// are tagged with that subdirectory's name as their sector.
pub fn load_corpus(path: &Path) -> Result<Corpus, IngestError> {
    if !path.exists() {
        return Err(IngestError::MissingPath(path.to_path_buf()));
    }
    let mut corpus = Corpus::default();
    if path.is_file() {
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        match read_document(path, id, None) {
            Ok(doc) => corpus.documents.push(doc),
            Err(e) => corpus.errors.push(e),
        }
        return Ok(corpus);
    }

    let mut files = Vec::new();
    collect_txt(path, &mut files)?;
    files.sort();
    for file in files {
        let sector_tag = file
            .parent()
            .filter(|parent| *parent != path)
            .and_then(|parent| parent.file_name())
            .map(|name| name.to_string_lossy().into_owned());
        match read_document(&file, document_id(&file, path), sector_tag) {
            Ok(doc) => corpus.documents.push(doc),
            Err(e) => {
                log::warn!("skipping {}: {e}", file.display());
                corpus.errors.push(e);
            }
        }
    }
    Ok(corpus)
}

/// Splits `doc.text` into segments of at most `max_chars` characters, cutting
/// after the last paragraph break that fits and falling back to a hard cut.
/// The segments concatenate back to the original text.
pub fn window(doc: &Document, max_chars: usize) -> Vec<String> {
    window_text(&doc.text, max_chars)
}

pub fn window_text(text: &str, max_chars: usize) -> Vec<String> {
    let max_chars = max_chars.max(MIN_WINDOW_CHARS);
    let mut segments = Vec::new();
    let mut rest = text;
    while rest.chars().count() > max_chars {
        let limit = rest.char_indices().nth(max_chars).map(|(i, _)| i).unwrap_or(rest.len());
        let head = &rest[..limit];
        let cut = head.rfind("\n\n").map(|i| {
            // keep the whole run of blank lines with the preceding segment
            let mut end = i;
            while head[end..].starts_with('\n') {
                end += 1;
            }
            end
        });
        let cut = match cut {
            Some(end) if end > 0 => end,
            _ => limit,
        };
        segments.push(rest[..cut].to_string());
        rest = &rest[cut..];
    }
    if !rest.is_empty() || segments.is_empty() {
        segments.push(rest.to_string());
    }
    segments
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(text: &str) -> Document {
        Document { id: "d".into(), text: text.into(), source: PathBuf::from("d.txt"), sector_tag: None }
    }

    #[test]
    fn short_text_is_one_segment() {
        let text = "x".repeat(1024);
        assert_eq!(window(&doc(&text), 8192), vec![text]);
    }

    #[test]
    fn long_paragraph_is_hard_split() {
        let text = "y".repeat(10_240);
        let segs = window(&doc(&text), 8192);
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].chars().count(), 8192);
        assert_eq!(segs.concat(), text);
    }

    #[test]
    fn synthetic_paragraphs_split_losslessly() {
        // 40 paragraphs of ~500 chars each, about 20 kB
        let paragraphs: Vec<String> = (0..40).map(|i| format!("{i:03} {}", "word ".repeat(99))).collect();
        let text = paragraphs.join("\n\n");
        assert!(text.len() > 20_000);
        let segs = window(&doc(&text), 8192);
        assert!(segs.len() >= 3, "{}", segs.len());
        assert!(segs.iter().all(|s| s.chars().count() <= 8192));
        // every cut but the last lands right after a paragraph break
        assert!(segs[..segs.len() - 1].iter().all(|s| s.ends_with("\n\n")));
        assert_eq!(segs.concat(), text);
    }

    #[test]
    fn multibyte_text_splits_on_char_boundaries() {
        let text = "é".repeat(2000);
        let segs = window_text(&text, 512);
        assert_eq!(segs.len(), 4);
        assert_eq!(segs.concat(), text);
    }

    #[test]
    fn missing_path_is_an_error() {
        assert!(matches!(load_corpus(Path::new("/definitely/not/here")), Err(IngestError::MissingPath(_))));
    }

    #[test]
    fn flat_directory_is_ordered_and_untagged() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("finance.txt"), "Finance text.").unwrap();
        fs::write(dir.path().join("data.txt"), "Data text.").unwrap();
        fs::write(dir.path().join("notes.md"), "ignored").unwrap();
        let corpus = load_corpus(dir.path()).unwrap();
        let ids: Vec<_> = corpus.documents.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["data", "finance"]);
        assert!(corpus.documents.iter().all(|d| d.sector_tag.is_none()));
    }

    #[test]
    fn empty_and_binary_files_are_reported_not_fatal() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.txt"), "  \n").unwrap();
        fs::write(dir.path().join("b.txt"), [0xff, 0xfe, 0x00]).unwrap();
        fs::write(dir.path().join("c.txt"), "fine").unwrap();
        let corpus = load_corpus(dir.path()).unwrap();
        assert_eq!(corpus.documents.len(), 1);
        assert_eq!(corpus.errors.len(), 2);
        assert!(matches!(corpus.errors[0], IngestError::EmptyFile(_)));
        assert!(matches!(corpus.errors[1], IngestError::NotUtf8(_)));
    }

    #[test]
    fn sector_subdirectories_become_tags() {
        let dir = tempfile::tempdir().unwrap();
        for sector in ["logistics", "data", "finance"] {
            fs::create_dir(dir.path().join(sector)).unwrap();
            fs::write(dir.path().join(sector).join("policy.txt"), format!("{sector} policy")).unwrap();
        }
        let corpus = load_corpus(dir.path()).unwrap();
        let tags: Vec<_> = corpus.documents.iter().map(|d| d.sector_tag.clone().unwrap()).collect();
        assert_eq!(tags, ["data", "finance", "logistics"]);
    }
}
