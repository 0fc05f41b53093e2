//! Word splitting, stop-word removal, stemming and part-of-speech tagging.

use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

use rust_stemmers::{Algorithm, Stemmer};
use serde::{Deserialize, Serialize};

const STOPWORDS: &str = include_str!("stopwords.txt");
const LEXICON: &str = include_str!("lexicon.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Code,
    Comment,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub tokens: Vec<String>,
    pub origin: Origin,
}

impl TokenSequence {
    pub fn new(tokens: Vec<String>, origin: Origin) -> Self {
        TokenSequence { tokens, origin }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn join(&self) -> String {
        self.tokens.join(" ")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Pronoun,
    Preposition,
    Conjunction,
    Determiner,
    Numeral,
    Other,
}

impl Pos {
    pub const ALL: [Pos; 10] = [
        Pos::Noun,
        Pos::Verb,
        Pos::Adjective,
        Pos::Adverb,
        Pos::Pronoun,
        Pos::Preposition,
        Pos::Conjunction,
        Pos::Determiner,
        Pos::Numeral,
        Pos::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adjective => "adjective",
            Pos::Adverb => "adverb",
            Pos::Pronoun => "pronoun",
            Pos::Preposition => "preposition",
            Pos::Conjunction => "conjunction",
            Pos::Determiner => "determiner",
            Pos::Numeral => "numeral",
            Pos::Other => "other",
        }
    }

    pub fn parse(name: &str) -> Option<Pos> {
        Pos::ALL.into_iter().find(|p| p.name() == name)
    }

    fn index(self) -> usize {
        self as usize
    }
}

pub type PosDistribution = [f64; 10];

/// Splits an identifier at underscores and other separators, lower-to-upper
/// case changes, acronym ends (`HTTPServer` -> `HTTP`, `Server`) and
/// letter/digit boundaries.
pub fn split_identifier(token: &str) -> Vec<String> {
    let mut out = Vec::new();
    for run in token.split(|c: char| !c.is_alphanumeric()) {
        let chars: Vec<char> = run.chars().collect();
        let mut start = 0;
        for i in 1..chars.len() {
            let (prev, cur) = (chars[i - 1], chars[i]);
            let next_lower = chars.get(i + 1).is_some_and(|c| c.is_lowercase());
            let boundary = (prev.is_lowercase() && cur.is_uppercase())
                || (prev.is_uppercase() && cur.is_uppercase() && next_lower)
                || (prev.is_numeric() != cur.is_numeric());
            if boundary {
                out.push(chars[start..i].iter().collect());
                start = i;
            }
        }
        if start < chars.len() {
            out.push(chars[start..].iter().collect());
        }
    }
    out
}

fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS.lines().map(str::trim).filter(|l| !l.is_empty()).collect())
}

pub fn is_stopword(word: &str) -> bool {
    stopwords().contains(word)
}

fn stemmer() -> &'static Stemmer {
    static STEMMER: OnceLock<Stemmer> = OnceLock::new();
    STEMMER.get_or_init(|| Stemmer::create(Algorithm::English))
}

/// Stems until the word stops changing.
pub fn stem(word: &str) -> String {
    let mut cur = word.to_string();
    loop {
        let next = stemmer().stem(&cur).into_owned();
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn alnum_runs(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphanumeric()).filter(|s| !s.is_empty())
}

/// Lowercased, stop-word free, stemmed words of `text`. Code is split at
/// identifier boundaries; comments only at whitespace and punctuation.
pub fn normalize(text: &str, origin: Origin) -> TokenSequence {
    let words: Vec<String> = match origin {
        Origin::Code => alnum_runs(text).flat_map(split_identifier).collect(),
        Origin::Comment => alnum_runs(text).map(str::to_string).collect(),
    };
    let mut tokens = Vec::new();
    for w in words {
        let lower = w.to_lowercase();
        // Letters without a lowercase form can leave a new case boundary.
        let parts: Vec<String> = match origin {
            Origin::Code => alnum_runs(&lower).flat_map(split_identifier).collect(),
            Origin::Comment => alnum_runs(&lower).map(str::to_string).collect(),
        };
        for part in parts.iter().map(String::as_str) {
            if is_stopword(part) {
                continue;
            }
            let s = stem(part);
            if !s.is_empty() && !is_stopword(&s) {
                tokens.push(s);
            }
        }
    }
    TokenSequence { tokens, origin }
}

pub trait Tagger: Sync {
    fn tag(&self, word: &str) -> Pos;
}

/// Dictionary tagger with suffix fallback; unknown words are nouns.
#[derive(Debug, Clone)]
pub struct LexiconTagger {
    words: HashMap<String, Pos>,
}

impl LexiconTagger {
    /// Parses `word<TAB>tag` lines. Blank lines and `#` comments are skipped.
    pub fn from_tsv(text: &str) -> crate::Result<Self> {
        let mut words = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, tag) = line
                .split_once('\t')
                .ok_or_else(|| crate::Error::invalid(format!("lexicon line {}: missing tab", n + 1)))?;
            let pos = Pos::parse(tag.trim())
                .ok_or_else(|| crate::Error::invalid(format!("lexicon line {}: unknown tag {tag:?}", n + 1)))?;
            words.insert(word.trim().to_string(), pos);
        }
        Ok(LexiconTagger { words })
    }

    pub fn embedded() -> &'static LexiconTagger {
        static TAGGER: OnceLock<LexiconTagger> = OnceLock::new();
        TAGGER.get_or_init(|| LexiconTagger::from_tsv(LEXICON).expect("embedded lexicon"))
    }
}

const SUFFIXES: &[(&str, Pos)] = &[
    ("ing", Pos::Verb),
    ("ize", Pos::Verb),
    ("iz", Pos::Verb),
    ("ify", Pos::Verb),
    ("ed", Pos::Verb),
    ("li", Pos::Adverb),
    ("ly", Pos::Adverb),
    ("tion", Pos::Noun),
    ("ment", Pos::Noun),
    ("ness", Pos::Noun),
    ("iti", Pos::Noun),
    ("ity", Pos::Noun),
    ("ous", Pos::Adjective),
    ("ive", Pos::Adjective),
    ("abl", Pos::Adjective),
    ("able", Pos::Adjective),
    ("ibl", Pos::Adjective),
    ("ful", Pos::Adjective),
    ("al", Pos::Adjective),
];

impl Tagger for LexiconTagger {
    fn tag(&self, word: &str) -> Pos {
        if let Some(&p) = self.words.get(word) {
            return p;
        }
        if word.chars().all(|c| c.is_numeric()) {
            return Pos::Numeral;
        }
        if word.chars().any(|c| c.is_numeric()) {
            return Pos::Other;
        }
        SUFFIXES
            .iter()
            .find(|(s, _)| word.len() > s.len() + 2 && word.ends_with(s))
            .map_or(Pos::Noun, |&(_, p)| p)
    }
}

pub fn pos_distribution_with(words: &TokenSequence, tagger: &dyn Tagger) -> PosDistribution {
    let mut dist = [0.0; 10];
    if words.is_empty() {
        return dist;
    }
    for w in &words.tokens {
        dist[tagger.tag(w).index()] += 1.0;
    }
    let n = words.len() as f64;
    dist.iter_mut().for_each(|d| *d /= n);
    dist
}

pub fn pos_distribution(words: &TokenSequence) -> PosDistribution {
    pos_distribution_with(words, LexiconTagger::embedded())
}

pub fn pos_distance(old: &PosDistribution, new: &PosDistribution) -> [f64; 10] {
    let mut out = [0.0; 10];
    for i in 0..10 {
        out[i] = (old[i] - new[i]).abs();
    }
    out
}
