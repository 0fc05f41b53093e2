//! Blended training documents: every word of one side is followed by two
//! words drawn from the other side.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::lexicon::{normalize, Origin, TokenSequence};
use crate::linker::CodeCommentPair;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Documents {
    pub comment_doc: TokenSequence,
    pub code_doc: TokenSequence,
    /// One side was empty, so no words could be drawn from it.
    pub degenerate: bool,
}

impl Documents {
    pub fn into_corpus(self) -> [TokenSequence; 2] {
        [self.comment_doc, self.code_doc]
    }
}

/// Mixes a base seed with a stream number.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn distinct(tokens: &[String]) -> Vec<&String> {
    let mut seen = std::collections::HashSet::new();
    tokens.iter().filter(|t| seen.insert(t.as_str())).collect()
}

fn blend(words: &TokenSequence, other: &[&String], rng: &mut impl Rng) -> TokenSequence {
    let mut out = Vec::with_capacity(words.len() * 3);
    for w in &words.tokens {
        out.push(w.clone());
        if other.len() >= 2 {
            out.extend(other.choose_multiple(rng, 2).map(|s| (*s).clone()));
        } else {
            for _ in 0..2 {
                out.push(other[rng.gen_range(0..other.len())].clone());
            }
        }
    }
    TokenSequence::new(out, words.origin)
}

pub fn build_documents(comment: &TokenSequence, code: &TokenSequence, seed: u64) -> Documents {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if comment.is_empty() || code.is_empty() {
        let side = if comment.is_empty() { code } else { comment };
        return Documents {
            comment_doc: TokenSequence::new(side.tokens.clone(), Origin::Comment),
            code_doc: TokenSequence::new(side.tokens.clone(), Origin::Code),
            degenerate: true,
        };
    }
    let (cmt_words, code_words) = (distinct(&comment.tokens), distinct(&code.tokens));
    let comment_doc = blend(comment, &code_words, &mut rng);
    let code_doc = blend(code, &cmt_words, &mut rng);
    Documents {
        comment_doc,
        code_doc,
        degenerate: false,
    }
}

/// Documents for a pair's comment and code.
pub fn pair_documents(pair: &CodeCommentPair, seed: u64) -> Documents {
    let comment = normalize(&pair.comment_body(), Origin::Comment);
    let code = normalize(&pair.code_text(), Origin::Code);
    build_documents(&comment, &code, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(xs: &[&str], origin: Origin) -> TokenSequence {
        TokenSequence::new(xs.iter().map(|s| s.to_string()).collect(), origin)
    }

    #[test]
    fn lengths_and_layout() {
        let c = seq(&["set", "serno", "size"], Origin::Comment);
        let k = seq(&["set", "octet", "size", "4"], Origin::Code);
        let d = build_documents(&c, &k, 7);
        assert_eq!(d.comment_doc.len(), 9);
        assert_eq!(d.code_doc.len(), 12);
        for (i, w) in c.tokens.iter().enumerate() {
            assert_eq!(&d.comment_doc.tokens[3 * i], w);
            let (a, b) = (&d.comment_doc.tokens[3 * i + 1], &d.comment_doc.tokens[3 * i + 2]);
            assert!(k.tokens.contains(a) && k.tokens.contains(b));
            assert_ne!(a, b);
        }
        assert!(!d.degenerate);
        assert_eq!(build_documents(&c, &k, 7), d);
    }

    #[test]
    fn single_word_comment() {
        let c = seq(&["success"], Origin::Comment);
        let k = seq(&["run", "job"], Origin::Code);
        let d = build_documents(&c, &k, 1);
        assert_eq!(d.comment_doc.len(), 3);
        assert_eq!(d.comment_doc.tokens[0], "success");
        let mut flank = d.comment_doc.tokens[1..].to_vec();
        flank.sort();
        assert_eq!(flank, vec!["job".to_string(), "run".to_string()]);
        // One distinct comment word: drawn with replacement.
        assert_eq!(d.code_doc.tokens, vec!["run", "success", "success", "job", "success", "success"]);
    }

    #[test]
    fn empty_side_is_degenerate() {
        let c = seq(&[], Origin::Comment);
        let k = seq(&["run"], Origin::Code);
        let d = build_documents(&c, &k, 1);
        assert!(d.degenerate);
        assert_eq!(d.comment_doc.tokens, vec!["run"]);
    }

    #[test]
    fn seeds_are_mixed() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_eq!(derive_seed(5, 9), derive_seed(5, 9));
    }
}
