//! String similarity helpers shared by the matcher and the linker.

use std::collections::HashMap;

fn dice_counts<T: std::hash::Hash + Eq>(a: &[T], b: &[T]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let mut counts: HashMap<&T, i64> = HashMap::new();
    for x in a {
        *counts.entry(x).or_default() += 1;
    }
    let mut common = 0usize;
    for y in b {
        if let Some(c) = counts.get_mut(y) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    2.0 * common as f64 / (a.len() + b.len()) as f64
}

/// Dice coefficient over the character-bigram multisets of two strings.
///
/// Identical strings score 1. Strings too short to form a bigram score 0
/// unless identical.
pub fn bigram_dice(a: &str, b: &str) -> f64 {
    if a == b {
        return 1.0;
    }
    let bigrams = |s: &str| -> Vec<(char, char)> {
        let chars: Vec<char> = s.chars().collect();
        chars.windows(2).map(|w| (w[0], w[1])).collect()
    };
    let (x, y) = (bigrams(a), bigrams(b));
    if x.is_empty() || y.is_empty() {
        return 0.0;
    }
    dice_counts(&x, &y)
}

/// Dice coefficient over token multisets.
pub fn token_dice<S: AsRef<str>>(a: &[S], b: &[S]) -> f64 {
    let x: Vec<&str> = a.iter().map(AsRef::as_ref).collect();
    let y: Vec<&str> = b.iter().map(AsRef::as_ref).collect();
    dice_counts(&x, &y)
}
