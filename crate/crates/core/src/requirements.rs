//! Requirement documents: chunking and lexical aspect retrieval.

use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

pub const DEFAULT_MAX_CHUNK_CHARS: usize = 1000;
pub const MIN_CHUNK_CHARS: usize = 64;

/// A line opening with a list marker or a requirement id starts its own
/// paragraph even without a blank line before it.
static ITEM_START: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:[-*+•]\s+|\d+[.)]\s+|[A-Z][A-Za-z]*[-_]?\d+[:.)]\s*)").unwrap()
});

static SENTENCE_END: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"[.!?]+[\s]+").unwrap());

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RequirementChunk {
    pub ordinal: usize,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aspect: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Chunked {
    pub chunks: Vec<RequirementChunk>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RequirementsError {
    #[error("maximum chunk size {0} is below the minimum of {MIN_CHUNK_CHARS} characters")]
    ChunkSizeTooSmall(usize),
}

/// Splits a requirements document into ordered chunks.
///
/// Paragraphs (separated by blank lines, or starting with a list marker)
/// become chunks. A paragraph longer than `max_chunk_chars` is packed
/// sentence by sentence; a single sentence over the limit is kept whole and
/// reported in `warnings`.
pub fn chunk(document: &str, max_chunk_chars: usize) -> Result<Chunked, RequirementsError> {
    if max_chunk_chars < MIN_CHUNK_CHARS {
        return Err(RequirementsError::ChunkSizeTooSmall(max_chunk_chars));
    }
    let mut out = Chunked::default();
    for paragraph in paragraphs(document) {
        if paragraph.chars().count() <= max_chunk_chars {
            push(&mut out.chunks, paragraph);
            continue;
        }
        let mut current = String::new();
        for sentence in sentences(&paragraph) {
            let len = sentence.chars().count();
            if len > max_chunk_chars {
                if !current.is_empty() {
                    push(&mut out.chunks, std::mem::take(&mut current));
                }
                out.warnings.push(format!(
                    "sentence of {len} characters exceeds the chunk limit of {max_chunk_chars} and was kept whole"
                ));
                push(&mut out.chunks, sentence.to_string());
                continue;
            }
            let joined = if current.is_empty() { len } else { current.chars().count() + 1 + len };
            if joined > max_chunk_chars {
                push(&mut out.chunks, std::mem::take(&mut current));
            }
            if !current.is_empty() {
                current.push(' ');
            }
            current.push_str(sentence);
        }
        if !current.is_empty() {
            push(&mut out.chunks, current);
        }
    }
    Ok(out)
}

fn push(chunks: &mut Vec<RequirementChunk>, text: String) {
    chunks.push(RequirementChunk {
        ordinal: chunks.len(),
        text,
        aspect: None,
    });
}

fn paragraphs(document: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in document.lines() {
        let line = line.trim();
        if line.is_empty() || ITEM_START.is_match(line) {
            if !current.is_empty() {
                out.push(current.join("\n"));
                current.clear();
            }
        }
        if !line.is_empty() {
            current.push(line);
        }
    }
    if !current.is_empty() {
        out.push(current.join("\n"));
    }
    out
}

fn sentences(paragraph: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    for m in SENTENCE_END.find_iter(paragraph) {
        let end = m.start() + m.as_str().trim_end().len();
        let s = paragraph[start..end].trim();
        if !s.is_empty() {
            out.push(s);
        }
        start = m.end();
    }
    let tail = paragraph[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

/// Chunks whose text mentions at least one keyword as a whole word,
/// case-insensitively. Order is preserved.
pub fn filter_by_aspect(chunks: &[RequirementChunk], aspect_keywords: &[String]) -> Vec<RequirementChunk> {
    let matcher = KeywordMatcher::new(aspect_keywords);
    chunks.iter().filter(|c| matcher.matches(&c.text)).cloned().collect()
}

struct KeywordMatcher {
    patterns: Vec<Regex>,
}

impl KeywordMatcher {
    fn new(keywords: &[String]) -> Self {
        let unique: BTreeSet<String> = keywords
            .iter()
            .map(|k| k.trim().to_lowercase())
            .filter(|k| !k.is_empty())
            .collect();
        let patterns = unique
            .iter()
            .map(|k| Regex::new(&format!(r"(?i)(?:^|\W){}(?:$|\W)", regex::escape(k))).unwrap())
            .collect();
        KeywordMatcher { patterns }
    }

    fn matches(&self, text: &str) -> bool {
        self.patterns.iter().any(|p| p.is_match(text))
    }
}

/// A named aspect of the system, such as sensors or power management.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Aspect {
    pub name: String,
    pub keywords: Vec<String>,
}

/// Selects the chunks relevant to an aspect.
pub trait RetrievalProvider: Send + Sync {
    fn retrieve(&self, chunks: &[RequirementChunk], aspect: &Aspect) -> Vec<RequirementChunk>;
}

/// Deterministic keyword retrieval; returned chunks are tagged with the
/// aspect name.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalRetriever;

impl RetrievalProvider for LexicalRetriever {
    fn retrieve(&self, chunks: &[RequirementChunk], aspect: &Aspect) -> Vec<RequirementChunk> {
        filter_by_aspect(chunks, &aspect.keywords)
            .into_iter()
            .map(|mut c| {
                c.aspect = Some(aspect.name.clone());
                c
            })
            .collect()
    }
}
