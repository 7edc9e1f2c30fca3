//! Log message tokenization and vocabulary handling.
//!
//! Raw log lines carry high-cardinality noise (timestamps, ids, paths) that
//! would bloat the vocabulary without helping separate normal from anomalous
//! content, so preprocessing is deliberately aggressive: URLs and paths are
//! removed outright and any token still containing a digit is dropped.

use std::collections::HashMap;
use std::sync::LazyLock;

use regex::Regex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::stopwords::is_stopword;

pub const PAD_TOKEN: &str = "[PAD]";
pub const UNK_TOKEN: &str = "[UNK]";
pub const EMBEDDING_TOKEN: &str = "[EMBEDDING]";

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
pub const EMBEDDING_ID: usize = 2;

static URL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)[a-z][a-z0-9+.-]*://\S+").unwrap());

/// Normalizes a raw log line into content tokens, in order:
/// 1. remove URLs (`scheme://...`) and path-like fields (two or more `/`),
/// 2. lowercase,
/// 3. delete non-alphanumeric ASCII characters (`node-77` becomes `node77`),
/// 4. split on whitespace,
/// 5. drop tokens containing any digit,
/// 6. drop English stopwords.
///
/// The output is stable under re-application: surviving tokens are already
/// lowercase, digit-free, punctuation-free and not stopwords.
pub fn preprocess(raw: &str) -> Vec<String> {
    let no_urls = URL_RE.replace_all(raw, " ");
    let no_paths: Vec<&str> = no_urls
        .split_whitespace()
        .filter(|field| field.matches('/').count() < 2)
        .collect();
    let lowered = no_paths.join(" ").to_lowercase();
    // Punctuation is deleted, not replaced by spaces, so characters inside a
    // field merge: node-77 -> node77 (and then dies to the digit rule).
    let mut tokens = Vec::new();
    for field in lowered.split_whitespace() {
        let merged: String = field
            .chars()
            .filter(|c| !c.is_ascii() || c.is_ascii_alphanumeric())
            .collect();
        if merged.is_empty() || merged.chars().any(|c| c.is_ascii_digit()) {
            continue;
        }
        if is_stopword(&merged) {
            continue;
        }
        tokens.push(merged);
    }
    tokens
}

/// Token-to-id mapping with three reserved entries: `[PAD]`=0, `[UNK]`=1,
/// `[EMBEDDING]`=2. Content ids are assigned in first-occurrence order over
/// the training corpus and the mapping is frozen after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    token_to_id: HashMap<String, usize>,
}

impl Vocabulary {
    fn reserved() -> Self {
        let mut v = Vocabulary {
            tokens: Vec::new(),
            token_to_id: HashMap::new(),
        };
        for t in [PAD_TOKEN, UNK_TOKEN, EMBEDDING_TOKEN] {
            v.push(t.to_string());
        }
        v
    }

    fn push(&mut self, token: String) {
        self.token_to_id.insert(token.clone(), self.tokens.len());
        self.tokens.push(token);
    }

    /// Rebuilds a vocabulary from its id-ordered token list (the serialized
    /// form); validates the reserved prefix and uniqueness.
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.len() < 3
            || tokens[PAD_ID] != PAD_TOKEN
            || tokens[UNK_ID] != UNK_TOKEN
            || tokens[EMBEDDING_ID] != EMBEDDING_TOKEN
        {
            return Err(Error::InvalidArgument(format!(
                "vocabulary must start with the reserved tokens {PAD_TOKEN}, {UNK_TOKEN}, {EMBEDDING_TOKEN}"
            )));
        }
        let mut v = Vocabulary {
            tokens: Vec::with_capacity(tokens.len()),
            token_to_id: HashMap::with_capacity(tokens.len()),
        };
        for t in tokens {
            if v.token_to_id.contains_key(&t) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate token {t:?} in vocabulary"
                )));
            }
            v.push(t);
        }
        Ok(v)
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.token_to_id.get(token).copied()
    }

    /// Id for a content token, falling back to `[UNK]`.
    pub fn id_or_unk(&self, token: &str) -> usize {
        self.id(token).unwrap_or(UNK_ID)
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(String::as_str)
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl Serialize for Vocabulary {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.tokens.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Vocabulary {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let tokens = Vec::<String>::deserialize(d)?;
        Vocabulary::from_tokens(tokens).map_err(D::Error::custom)
    }
}

/// Builds the vocabulary from tokenized training messages. Tokens seen fewer
/// than `min_count` times map to `[UNK]` at encode time.
pub fn build_vocab(messages: &[Vec<String>], min_count: usize) -> Vocabulary {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for msg in messages {
        for tok in msg {
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    let mut vocab = Vocabulary::reserved();
    for msg in messages {
        for tok in msg {
            if counts[tok.as_str()] >= min_count.max(1) && vocab.id(tok).is_none() {
                vocab.push(tok.clone());
            }
        }
    }
    vocab
}

/// A message encoded for the model: `ids` has length exactly `max_len`,
/// starting with `[EMBEDDING]` and padded with `[PAD]`; `mask` flags the
/// `real_len` non-pad positions.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    pub ids: Vec<usize>,
    pub mask: Vec<bool>,
    pub real_len: usize,
}

/// Maps tokens to ids and frames them for the encoder. The `[EMBEDDING]`
/// prefix counts toward `max_len`, so at most `max_len - 1` content tokens
/// are kept; out-of-vocabulary tokens become `[UNK]`.
pub fn encode(tokens: &[String], vocab: &Vocabulary, max_len: usize) -> Result<TokenSequence> {
    if max_len < 1 {
        return Err(Error::InvalidArgument(
            "max_len must be at least 1 to hold the [EMBEDDING] token".into(),
        ));
    }
    let keep = tokens.len().min(max_len - 1);
    let real_len = 1 + keep;
    let mut ids = Vec::with_capacity(max_len);
    ids.push(EMBEDDING_ID);
    for tok in &tokens[..keep] {
        ids.push(vocab.id_or_unk(tok));
    }
    ids.resize(max_len, PAD_ID);
    let mut mask = vec![false; max_len];
    mask[..real_len].fill(true);
    Ok(TokenSequence {
        ids,
        mask,
        real_len,
    })
}
