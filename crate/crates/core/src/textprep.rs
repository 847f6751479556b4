//! Text normalisation for classifier input and stop-word filtered
//! tokenisation for n-gram counting.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use crate::error::{Error, Result};

const CONTRACTIONS_TSV: &str = include_str!("../data/contractions.tsv");
const BASE_STOPWORDS: &str = include_str!("../data/english_stopwords.txt");
const EXTRA_STOPWORDS: &str = include_str!("../data/extra_stopwords.txt");

/// Category names of the bundled extra stop-word file.
pub const EXTRA_CATEGORIES: [&str; 6] = [
    "general terms",
    "people and entities",
    "action verbs",
    "time-related",
    "quantifiers and qualifiers",
    "modifiers and auxiliaries",
];

static URL_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\b(?:https?://|www\.)\S*").unwrap());
static MENTION_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"@\w+").unwrap());
static HASHTAG_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"#(\w)").unwrap());
static RETWEET_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(^|\s)RT(?::|\s|$)").unwrap());
static WHITESPACE_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\s+").unwrap());

struct Contractions {
    table: HashMap<String, String>,
    pattern: Regex,
}

static CONTRACTIONS: LazyLock<Contractions> = LazyLock::new(|| {
    let table: HashMap<String, String> = CONTRACTIONS_TSV
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('\t'))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect();
    let mut keys: Vec<&String> = table.keys().collect();
    // leftmost-first alternation: longer keys must win ("can't've" over "can't")
    keys.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let alternation = keys.iter().map(|k| regex::escape(k)).collect::<Vec<_>>().join("|");
    let pattern = Regex::new(&format!(r"\b(?:{alternation})\b")).unwrap();
    Contractions { table, pattern }
});

/// Whitespace-delimited emoticons and their word replacements.
const EMOTICONS: &[(&str, &str)] = &[
    (":)", "smiley"),
    (":-)", "smiley"),
    ("(:", "smiley"),
    ("=)", "smiley"),
    (":]", "smiley"),
    (":D", "laughing"),
    (":-D", "laughing"),
    ("=D", "laughing"),
    ("XD", "laughing"),
    ("xD", "laughing"),
    (":(", "frowning"),
    (":-(", "frowning"),
    ("):", "frowning"),
    (":[", "frowning"),
    (":'(", "crying"),
    (":'-(", "crying"),
    (";)", "winking"),
    (";-)", "winking"),
    (":P", "playful"),
    (":-P", "playful"),
    (":p", "playful"),
    (":O", "surprised"),
    (":-O", "surprised"),
    (":o", "surprised"),
    (":/", "skeptical"),
    (":-/", "skeptical"),
    (":|", "neutral face"),
    (":*", "kiss"),
    ("<3", "heart"),
    ("</3", "broken heart"),
];

/// Number of entries in the bundled contraction table.
pub fn contraction_count() -> usize {
    CONTRACTIONS.table.len()
}

pub fn expand_contractions(text: &str) -> String {
    let c = &*CONTRACTIONS;
    c.pattern
        .replace_all(text, |caps: &regex::Captures| c.table[&caps[0]].clone())
        .into_owned()
}

/// Replaces each emoji grapheme with its lowercase English name.
pub fn translate_emojis(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for g in text.graphemes(true) {
        if g.is_ascii() {
            out.push_str(g);
            continue;
        }
        let emoji = emojis::get(g).or_else(|| emojis::get(&g.replace('\u{FE0F}', "")));
        match emoji {
            Some(e) => {
                out.push(' ');
                out.push_str(&e.name().to_lowercase().replace('_', " "));
                out.push(' ');
            }
            None => out.push_str(g),
        }
    }
    out
}

fn translate_emoticons(text: &str) -> String {
    text.split_whitespace()
        .map(|tok| EMOTICONS.iter().find(|(e, _)| *e == tok).map_or(tok, |(_, word)| *word))
        .collect::<Vec<_>>()
        .join(" ")
}

fn unescape_html(text: &str) -> String {
    text.replace("&amp;", " and ")
        .replace("&lt;", " ")
        .replace("&gt;", " ")
        .replace("&quot;", " ")
        .replace("&#39;", "'")
}

/// Keeps letters, digits, whitespace and word-internal apostrophes.
fn strip_symbols(text: &str) -> String {
    let chars: Vec<char> = text.chars().collect();
    chars
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let inner_apostrophe = c == '\''
                && i > 0
                && chars[i - 1].is_alphanumeric()
                && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
            if c.is_alphanumeric() || c.is_whitespace() || inner_apostrophe {
                c
            } else {
                ' '
            }
        })
        .collect()
}

/// Normalises article or tweet text for the classifier.
///
/// URLs go first, then emoji become words and the text is lowercased.
/// Mentions are dropped and hashtag marks removed (the tag word stays).
/// Everything other than letters, digits and word-internal apostrophes is
/// removed, then contractions are expanded and whitespace collapsed.
pub fn clean_for_model(raw: &str) -> String {
    let text = URL_RE.replace_all(raw, " ");
    let text = translate_emojis(&text).to_lowercase();
    let text = text.replace(['\u{2019}', '\u{2018}', '`'], "'");
    let text = MENTION_RE.replace_all(&text, " ");
    let text = HASHTAG_RE.replace_all(&text, "$1");
    let text = expand_contractions(&strip_symbols(&text));
    WHITESPACE_RE.replace_all(text.trim(), " ").into_owned()
}

/// [`clean_for_model`] preceded by retweet-marker removal, HTML entity
/// decoding and emoticon translation.
pub fn clean_tweet(raw: &str) -> String {
    let text = unescape_html(raw);
    let text = URL_RE.replace_all(&text, " ");
    let text = RETWEET_RE.replace_all(&text, " ");
    let text = translate_emoticons(&text);
    clean_for_model(&text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopwordPolicy {
    pub base_set: BTreeSet<String>,
    pub extra_categories: BTreeMap<String, BTreeSet<String>>,
    pub apply_extras: bool,
}

impl Default for StopwordPolicy {
    fn default() -> Self {
        StopwordPolicy {
            base_set: parse_word_list(BASE_STOPWORDS),
            extra_categories: parse_categorised(EXTRA_STOPWORDS).expect("bundled stop-word file is well formed"),
            apply_extras: true,
        }
    }
}

impl StopwordPolicy {
    pub fn without_extras() -> Self {
        StopwordPolicy {
            apply_extras: false,
            ..Default::default()
        }
    }

    /// Bundled base list plus extra categories read from `path`.
    pub fn from_extras_file(path: &Path, apply_extras: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(StopwordPolicy {
            base_set: parse_word_list(BASE_STOPWORDS),
            extra_categories: parse_categorised(&text)?,
            apply_extras,
        })
    }

    pub fn is_stopword(&self, token: &str) -> bool {
        self.base_set.contains(token)
            || (self.apply_extras && self.extra_categories.values().any(|s| s.contains(token)))
    }
}

fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// Parses `[category]` headed word lists.
pub fn parse_categorised(text: &str) -> Result<BTreeMap<String, BTreeSet<String>>> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_lowercase();
            out.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let Some(cat) = &current else {
            return Err(Error::Config(format!(
                "stop-word line {}: `{line}` appears before any [category] header",
                no + 1
            )));
        };
        if line.split_whitespace().count() != 1 {
            return Err(Error::Config(format!(
                "stop-word line {}: `{line}` is not a single token",
                no + 1
            )));
        }
        out.get_mut(cat).unwrap().insert(line.to_lowercase());
    }
    Ok(out)
}

/// Whitespace tokens of cleaned text with numerals and active stop words
/// removed.
pub fn tokenize_for_ngrams(text: &str, policy: &StopwordPolicy) -> Vec<String> {
    text.split_whitespace()
        .filter(|t| !t.chars().all(|c| c.is_numeric()))
        .filter(|t| !policy.is_stopword(t))
        .map(str::to_string)
        .collect()
}

/// Cleaned forms of one article.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleanedDoc {
    pub article_id: String,
    pub model_text: String,
    pub ngram_tokens: Vec<String>,
}

impl CleanedDoc {
    pub fn from_text(article_id: &str, raw: &str, policy: &StopwordPolicy) -> Self {
        let model_text = clean_for_model(raw);
        let ngram_tokens = tokenize_for_ngrams(&model_text, policy);
        CleanedDoc {
            article_id: article_id.to_string(),
            model_text,
            ngram_tokens,
        }
    }
}
