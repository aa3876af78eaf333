use super::{superword, Limits};
use crate::error::{Error, Result};
use crate::rulespec::{Alphabet, Letter, RuleSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalTile {
    pub letter: Letter,
    pub left: f64,
    pub length: f64,
}

/// A patch of abutting labelled intervals on the line.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalPatch {
    pub tiles: Vec<IntervalTile>,
}

impl IntervalPatch {
    /// Lays out a word with the given per-letter lengths, starting at 0.
    pub fn from_word(word: &[Letter], lengths: &[f64]) -> IntervalPatch {
        let mut left = 0.0;
        let tiles = word
            .iter()
            .map(|&a| {
                let t = IntervalTile {
                    letter: a,
                    left,
                    length: lengths[a as usize],
                };
                left += t.length;
                t
            })
            .collect();
        IntervalPatch { tiles }
    }

    pub fn total_length(&self) -> f64 {
        self.tiles.iter().map(|t| t.length).sum()
    }

    /// Do consecutive tiles abut within `1e-9` relative?
    pub fn is_contiguous(&self) -> bool {
        self.tiles.windows(2).all(|w| {
            let end = w[0].left + w[0].length;
            (w[1].left - end).abs() <= 1e-9 * end.abs().max(1.0)
        })
    }

    /// `symbol left length` lines.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        self.tiles
            .iter()
            .map(|t| format!("{} {:?} {:?}\n", alphabet.symbol(t.letter), t.left, t.length))
            .collect()
    }
}

/// The n-supertile of `letter` laid out with the given tile lengths.
pub fn supertile_interval(
    rule: &RuleSpec,
    letter: Letter,
    n: usize,
    lengths: &[f64],
    limits: &Limits,
) -> Result<IntervalPatch> {
    if lengths.len() != rule.alphabet.len() {
        return Err(Error::InvalidArgument(format!(
            "expected {} tile lengths, got {}",
            rule.alphabet.len(),
            lengths.len()
        )));
    }
    if let Some(x) = lengths.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::InvalidArgument(format!("tile length {x} is not positive")));
    }
    let word = superword(rule, letter, n, limits)?;
    Ok(IntervalPatch::from_word(&word, lengths))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulespec::parse_rule_file;

    #[test]
    fn fibonacci_interval() {
        let r = parse_rule_file("rule fib\nkind symbolic\ndim 1\nalphabet a b\nmap a -> a b\nmap b -> a\n").unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let p = supertile_interval(&r, 0, 2, &[phi, 1.0], &Limits::default()).unwrap();
        let letters: Vec<Letter> = p.tiles.iter().map(|t| t.letter).collect();
        assert_eq!(letters, vec![0, 1, 0]);
        // oracle: φ + 1 + φ
        assert!((p.total_length() - (phi + 1.0 + phi)).abs() < 1e-12);
        assert!((p.total_length() - phi * phi * phi).abs() < 1e-12);
        assert!(p.is_contiguous());
        let lefts: Vec<f64> = p.tiles.iter().map(|t| t.left).collect();
        assert_eq!(lefts, vec![0.0, phi, phi + 1.0]);
    }

    #[test]
    fn level_zero_is_single_tile() {
        let r = parse_rule_file("rule fib\nkind symbolic\ndim 1\nalphabet a b\nmap a -> a b\nmap b -> a\n").unwrap();
        let p = supertile_interval(&r, 1, 0, &[1.5, 0.5], &Limits::default()).unwrap();
        assert_eq!(p.tiles, vec![IntervalTile { letter: 1, left: 0.0, length: 0.5 }]);
        assert!(supertile_interval(&r, 1, 0, &[1.5, 0.0], &Limits::default()).is_err());
    }
}
