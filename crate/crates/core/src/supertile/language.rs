use std::collections::BTreeSet;

use super::word::{apply, image_lengths};
use super::{sadic_superword, superword, Limits, Word};
use crate::error::{Error, Result};
use crate::rulespec::{Letter, RuleBody, RuleSpec};
use crate::transition::{is_primitive, Primitivity};

/// Length-ℓ subwords of the level-`horizon` superwords.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Language {
    pub length: usize,
    pub horizon: usize,
    pub words: BTreeSet<Word>,
    /// The next horizon produced the same set.
    pub saturated: bool,
}

fn superwords_at(rule: &RuleSpec, horizon: usize, limits: &Limits) -> Result<Vec<Word>> {
    match &rule.body {
        RuleBody::Symbolic(_) | RuleBody::Inflation(_) => {
            let seeds: Vec<Letter> = match is_primitive(rule, 0)? {
                Primitivity::Primitive(_) => vec![0],
                _ => (0..rule.alphabet.len() as Letter).collect(),
            };
            seeds
                .into_iter()
                .map(|a| superword(rule, a, horizon, limits))
                .collect()
        }
        RuleBody::Sadic(s) => {
            let letters: Vec<Letter> = if horizon == 0 {
                (0..rule.alphabet.len() as Letter).collect()
            } else {
                let sub = s.substitution(horizon - 1).ok_or(Error::LevelOutOfRange {
                    level: horizon,
                    max: s.prefix.len(),
                })?;
                sub.domain().collect()
            };
            letters
                .into_iter()
                .map(|a| sadic_superword(rule, a, horizon, limits))
                .collect()
        }
        _ => Err(rule.wrong_kind("symbolic or sadic")),
    }
}

fn subwords(words: &[Word], len: usize) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    for w in words {
        for win in w.windows(len) {
            out.insert(Word(win.to_vec()));
        }
    }
    out
}

/// All length-`len` words admitted at the given horizon. Primitive rules use
/// the superwords of the first letter; other rules take the union over all
/// letters.
pub fn legal_words(rule: &RuleSpec, len: usize, horizon: usize, limits: &Limits) -> Result<Language> {
    if len == 0 {
        return Err(Error::InvalidArgument("word length must be at least 1".into()));
    }
    let words = subwords(&superwords_at(rule, horizon, limits)?, len);
    let saturated = match superwords_at(rule, horizon + 1, limits) {
        Ok(next) => subwords(&next, len) == words,
        Err(Error::LevelOverflow { .. }) | Err(Error::LevelOutOfRange { .. }) => false,
        Err(e) => return Err(e),
    };
    Ok(Language {
        length: len,
        horizon,
        words,
        saturated,
    })
}

/// Number of admitted words of length `len`.
pub fn complexity(rule: &RuleSpec, len: usize, horizon: usize, limits: &Limits) -> Result<usize> {
    Ok(legal_words(rule, len, horizon, limits)?.words.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Repetitivity {
    pub radius: usize,
    pub horizon: usize,
}

/// Smallest window length `R` such that every length-`R` window of the
/// level-`horizon` superword of the first letter contains the start of an
/// occurrence of `patch`, i.e. the largest return time.
pub fn repetitivity_radius(
    rule: &RuleSpec,
    patch: &[Letter],
    horizon: usize,
    limits: &Limits,
) -> Result<Repetitivity> {
    if patch.is_empty() {
        return Err(Error::InvalidArgument("empty patch".into()));
    }
    let sub = rule.substitution()?;
    limits.check(image_lengths(sub, horizon)[0])?;
    let mut w = vec![0 as Letter];
    for _ in 0..horizon {
        w = apply(sub, &w);
    }
    let len = w.len();
    let p = patch.len();
    if p > len {
        return Err(Error::PatchNotFound);
    }
    // next_occ[s] = first occurrence start ≥ s
    let mut next_occ = vec![usize::MAX; len + 1];
    for s in (0..=len - p).rev() {
        next_occ[s] = if w[s..s + p] == *patch { s } else { next_occ[s + 1] };
    }
    if next_occ[0] == usize::MAX {
        return Err(Error::PatchNotFound);
    }
    // need(s): shortest window starting at s that contains an occurrence start
    let mut prefix_max = Vec::with_capacity(len);
    let mut running = 0usize;
    for s in 0..len {
        let need = match next_occ[s] {
            usize::MAX => usize::MAX,
            o => o - s + 1,
        };
        running = running.max(need);
        prefix_max.push(running);
    }
    for r in 1..=len {
        if prefix_max[len - r] <= r {
            return Ok(Repetitivity { radius: r, horizon });
        }
    }
    Ok(Repetitivity { radius: len, horizon })
}
