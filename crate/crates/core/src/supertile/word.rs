use std::fmt;
use std::ops::Deref;

use super::Limits;
use crate::error::{Error, Result};
use crate::rulespec::{Alphabet, Letter, RuleBody, RuleSpec, Substitution};

/// A finite word over an alphabet, stored as letter indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<Letter>);

impl Deref for Word {
    type Target = [Letter];
    fn deref(&self) -> &[Letter] {
        &self.0
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

impl Word {
    /// Parses a word from symbol tokens. Single-character alphabets also
    /// accept a run of characters without separators.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Word> {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        let single = alphabet.symbols().iter().all(|s| s.chars().count() == 1);
        let mut out = Vec::new();
        if tokens.len() == 1 && single && alphabet.index_of(tokens[0]).is_none() {
            for c in tokens[0].chars() {
                out.push(alphabet.letter(&c.to_string())?);
            }
        } else {
            for t in tokens {
                out.push(alphabet.letter(t)?);
            }
        }
        Ok(Word(out))
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> WordDisplay<'a> {
        WordDisplay {
            word: self,
            alphabet,
        }
    }

    /// Letter counts indexed by alphabet order.
    pub fn counts(&self, m: usize) -> Vec<u64> {
        let mut c = vec![0u64; m];
        for &a in &self.0 {
            c[a as usize] += 1;
        }
        c
    }
}

/// Renders symbols back to back when every symbol is one character,
/// space-separated otherwise.
pub struct WordDisplay<'a> {
    word: &'a Word,
    alphabet: &'a Alphabet,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let single = self.alphabet.symbols().iter().all(|s| s.chars().count() == 1);
        for (i, &a) in self.word.iter().enumerate() {
            if i > 0 && !single {
                f.write_str(" ")?;
            }
            f.write_str(self.alphabet.symbol(a))?;
        }
        Ok(())
    }
}

fn check_letter(rule: &RuleSpec, letter: Letter) -> Result<()> {
    if (letter as usize) < rule.alphabet.len() {
        Ok(())
    } else {
        Err(Error::BadSymbol(letter as usize))
    }
}

/// Lengths `|σ^k(a)|` for every letter, saturating at `u128::MAX`.
pub(crate) fn image_lengths(sub: &Substitution, k: usize) -> Vec<u128> {
    let m = sub.images().len();
    let mut len = vec![1u128; m];
    for _ in 0..k {
        len = sub
            .images()
            .iter()
            .map(|w| {
                w.iter()
                    .fold(0u128, |acc, &b| acc.saturating_add(len[b as usize]))
            })
            .collect();
    }
    len
}

pub(crate) fn apply(sub: &Substitution, word: &[Letter]) -> Vec<Letter> {
    let total: usize = word.iter().map(|&a| sub.image(a).len()).sum();
    let mut out = Vec::with_capacity(total);
    for &a in word {
        out.extend_from_slice(sub.image(a));
    }
    out
}

/// `σ^n(letter)`; `n = 0` gives the letter itself.
pub fn superword(rule: &RuleSpec, letter: Letter, n: usize, limits: &Limits) -> Result<Word> {
    let sub = rule.substitution()?;
    check_letter(rule, letter)?;
    limits.check(image_lengths(sub, n)[letter as usize])?;
    let mut w = vec![letter];
    for _ in 0..n {
        w = apply(sub, &w);
    }
    Ok(Word(w))
}

/// Prefix of length `len` of the one-sided sequence grown from `seed`.
///
/// When `σ(seed)` starts with `seed` this is a prefix of the fixed point;
/// otherwise it is the prefix of the first superword long enough.
pub fn fixed_point_prefix(rule: &RuleSpec, seed: Letter, len: usize, limits: &Limits) -> Result<Word> {
    let sub = rule.substitution()?;
    check_letter(rule, seed)?;
    limits.check(len as u128)?;
    let mut w = vec![seed];
    let mut steps = 0usize;
    while w.len() < len {
        let next_len: usize = w.iter().map(|&a| sub.image(a).len()).sum();
        if next_len <= w.len() && steps > sub.images().len() {
            return Err(Error::InvalidArgument(format!(
                "superwords of `{}` stop growing at length {}",
                rule.alphabet.symbol(seed),
                w.len()
            )));
        }
        // expand only what is needed
        let mut out = Vec::with_capacity(next_len.min(len + 64));
        for &a in &w {
            out.extend_from_slice(sub.image(a));
            if out.len() >= len && sub.image(seed).first() == Some(&seed) {
                break;
            }
        }
        w = out;
        steps += 1;
    }
    w.truncate(len);
    Ok(Word(w))
}

/// `σ_0 σ_1 ⋯ σ_{n−1}(letter)` for an S-adic rule, `letter ∈ 𝒜_n`.
pub fn sadic_superword(rule: &RuleSpec, letter: Letter, n: usize, limits: &Limits) -> Result<Word> {
    let RuleBody::Sadic(sadic) = &rule.body else {
        return Err(rule.wrong_kind("sadic"));
    };
    check_letter(rule, letter)?;
    let subs: Vec<&Substitution> = (0..n)
        .map(|i| {
            sadic.substitution(i).ok_or(Error::LevelOutOfRange {
                level: n,
                max: sadic.prefix.len(),
            })
        })
        .collect::<Result<_>>()?;
    if n > 0 && !subs[n - 1].is_defined(letter) {
        return Err(Error::AlphabetMismatch {
            letter: rule.alphabet.symbol(letter).to_string(),
            level: n,
        });
    }
    let mut w = vec![letter];
    for level in (0..n).rev() {
        let sub = subs[level];
        let mut next_len: u128 = 0;
        for &a in &w {
            if !sub.is_defined(a) {
                return Err(Error::AlphabetMismatch {
                    letter: rule.alphabet.symbol(a).to_string(),
                    level: level + 1,
                });
            }
            next_len += sub.image(a).len() as u128;
        }
        limits.check(next_len)?;
        w = apply(sub, &w);
    }
    Ok(Word(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulespec::parse_rule_file;

    fn rule(text: &str) -> RuleSpec {
        parse_rule_file(text).unwrap()
    }

    fn fib() -> RuleSpec {
        rule("rule fib\nkind symbolic\ndim 1\nalphabet a b\nmap a -> a b\nmap b -> a\n")
    }

    fn abb() -> RuleSpec {
        rule("rule abb\nkind symbolic\ndim 1\nalphabet a b\nmap a -> a b b\nmap b -> a a a\n")
    }

    fn show(r: &RuleSpec, w: &Word) -> String {
        w.display(&r.alphabet).to_string()
    }

    #[test]
    fn fibonacci_superwords() {
        let r = fib();
        let l = Limits::default();
        assert_eq!(show(&r, &superword(&r, 0, 3, &l).unwrap()), "abaab");
        assert_eq!(show(&r, &superword(&r, 1, 0, &l).unwrap()), "b");
        let mut lens = Vec::new();
        for n in 0..=20 {
            lens.push(superword(&r, 0, n, &l).unwrap().len());
        }
        let (mut x, mut y) = (1usize, 2usize);
        for len in lens {
            assert_eq!(len, x);
            (x, y) = (y, x + y);
        }
    }

    #[test]
    fn constant_length_superword() {
        let r = abb();
        let w = superword(&r, 0, 2, &Limits::default()).unwrap();
        assert_eq!(show(&r, &w), "abbaaaaaa");
    }

    #[test]
    fn overflow_is_reported_before_expansion() {
        let r = abb();
        let err = superword(&r, 0, 30, &Limits::default()).unwrap_err();
        assert!(matches!(err, Error::LevelOverflow { .. }));
        let tight = Limits { max_cells: 8 };
        assert!(superword(&r, 0, 2, &tight).is_err());
        assert!(superword(&r, 0, 1, &tight).is_ok());
    }

    #[test]
    fn fixed_point_prefix_is_prefix_of_superword() {
        let r = fib();
        let l = Limits::default();
        let p = fixed_point_prefix(&r, 0, 100, &l).unwrap();
        let w = superword(&r, 0, 12, &l).unwrap();
        assert_eq!(&p[..], &w[..100]);
    }

    #[test]
    fn sadic_composition() {
        let text = "rule s\nkind sadic\ndim 1\nalphabet a b\nsub F:\nmap a -> a b\nmap b -> a\nsub G:\nmap a -> a b b\nmap b -> a a a\n";
        let l = Limits::default();
        let stationary = rule(&format!("{text}directive F F F\n"));
        assert_eq!(show(&stationary, &sadic_superword(&stationary, 0, 3, &l).unwrap()), "abaab");
        assert_eq!(show(&stationary, &sadic_superword(&stationary, 1, 0, &l).unwrap()), "b");
        let mixed = rule(&format!("{text}directive F G\n"));
        assert_eq!(show(&mixed, &sadic_superword(&mixed, 0, 2, &l).unwrap()), "abaa");
        assert!(matches!(
            sadic_superword(&mixed, 0, 3, &l),
            Err(Error::LevelOutOfRange { .. })
        ));
        let cyc = rule(&format!("{text}directive cycle F\n"));
        assert_eq!(sadic_superword(&cyc, 0, 10, &l).unwrap().len(), 144);
    }

    #[test]
    fn sadic_alphabet_mismatch() {
        let text = "rule s\nkind sadic\ndim 1\nalphabet a b c\nsub F:\nmap a -> a b\nmap b -> a\nsub H:\nmap c -> c a\ndirective F H\n";
        let r = rule(text);
        let l = Limits::default();
        assert!(matches!(
            sadic_superword(&r, 0, 2, &l),
            Err(Error::AlphabetMismatch { .. })
        ));
        // σ_1(c) = c a, and σ_0 has no image for c
        assert!(matches!(
            sadic_superword(&r, 2, 2, &l),
            Err(Error::AlphabetMismatch { .. })
        ));
    }

    #[test]
    fn word_parsing() {
        let r = fib();
        assert_eq!(Word::parse("abaab", &r.alphabet).unwrap().0, vec![0, 1, 0, 0, 1]);
        assert_eq!(Word::parse("a b", &r.alphabet).unwrap().0, vec![0, 1]);
        assert!(Word::parse("abc", &r.alphabet).is_err());
    }
}
