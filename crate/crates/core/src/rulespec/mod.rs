//! Rule files: the parsed, immutable description of a supertile construction.
//!
//! A [`RuleSpec`] owns the [`Alphabet`] whose index order every other module
//! uses for matrix rows, frequency vectors and weight tables.

mod parse;
mod serialize;
mod validate;

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};

pub use parse::parse_rule_file;
pub use validate::{validate, Issue, IssueCode, Severity, ValidationReport};

/// Index of a symbol in its [`Alphabet`].
pub type Letter = u32;

/// Ordered set of distinct symbol tokens. Order is fixed at parse time.
#[derive(Debug, Clone)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, Letter>,
}

impl PartialEq for Alphabet {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Alphabet {
    /// Builds an alphabet, returning the first duplicated token on failure.
    pub fn new<I, S>(symbols: I) -> std::result::Result<Self, String>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, s) in symbols.iter().enumerate() {
            if index.insert(s.clone(), i as Letter).is_some() {
                return Err(s.clone());
            }
        }
        Ok(Alphabet { symbols, index })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbol(&self, letter: Letter) -> &str {
        &self.symbols[letter as usize]
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, token: &str) -> Option<Letter> {
        self.index.get(token).copied()
    }

    /// Like [`Alphabet::index_of`] but reports unknown tokens as an error.
    pub fn letter(&self, token: &str) -> Result<Letter> {
        self.index_of(token)
            .ok_or_else(|| Error::UnknownType(token.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    Symbolic,
    Block,
    Inflation,
    Fusion,
    Sadic,
    VectorFusion,
}

impl RuleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleKind::Symbolic => "symbolic",
            RuleKind::Block => "block",
            RuleKind::Inflation => "inflation",
            RuleKind::Fusion => "fusion",
            RuleKind::Sadic => "sadic",
            RuleKind::VectorFusion => "vector-fusion",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "symbolic" => RuleKind::Symbolic,
            "block" => RuleKind::Block,
            "inflation" => RuleKind::Inflation,
            "fusion" => RuleKind::Fusion,
            "sadic" => RuleKind::Sadic,
            "vector-fusion" => RuleKind::VectorFusion,
            _ => return None,
        })
    }
}

impl std::fmt::Display for RuleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Letter-to-word map. An empty image marks a letter without a `map` line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    images: Vec<Vec<Letter>>,
}

impl Substitution {
    pub fn new(images: Vec<Vec<Letter>>) -> Self {
        Substitution { images }
    }

    pub fn image(&self, letter: Letter) -> &[Letter] {
        &self.images[letter as usize]
    }

    pub fn images(&self) -> &[Vec<Letter>] {
        &self.images
    }

    pub fn is_defined(&self, letter: Letter) -> bool {
        !self.images[letter as usize].is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.images.iter().all(|w| !w.is_empty())
    }

    /// Letters with a `map` line.
    pub fn domain(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.images.len() as Letter).filter(|&a| self.is_defined(a))
    }

    /// Letters occurring in some image.
    pub fn codomain(&self) -> Vec<Letter> {
        let mut seen = vec![false; self.images.len()];
        for w in &self.images {
            for &b in w {
                seen[b as usize] = true;
            }
        }
        (0..seen.len() as Letter)
            .filter(|&b| seen[b as usize])
            .collect()
    }

    /// Common image length, if every defined image has the same length.
    pub fn constant_length(&self) -> Option<usize> {
        let mut lens = self.images.iter().filter(|w| !w.is_empty()).map(Vec::len);
        let first = lens.next()?;
        lens.all(|l| l == first).then_some(first)
    }
}

/// Constant-shape substitution on a box of `size[0] × … × size[d-1]` cells.
///
/// Blocks are stored flattened with the first coordinate fastest, so for
/// `d = 2` the cell `(x, y)` lives at `x + size[0] * y` and row `y = 0` is
/// the bottom row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockSubstitution {
    size: Vec<usize>,
    blocks: Vec<Vec<Letter>>,
}

impl BlockSubstitution {
    pub fn new(size: Vec<usize>, blocks: Vec<Vec<Letter>>) -> Self {
        BlockSubstitution { size, blocks }
    }

    pub fn size(&self) -> &[usize] {
        &self.size
    }

    pub fn dim(&self) -> usize {
        self.size.len()
    }

    /// Cells per block, `K = l_1 ⋯ l_d`.
    pub fn volume(&self) -> usize {
        self.size.iter().product()
    }

    pub fn block(&self, letter: Letter) -> &[Letter] {
        &self.blocks[letter as usize]
    }

    pub fn blocks(&self) -> &[Vec<Letter>] {
        &self.blocks
    }

    pub fn is_complete(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == self.volume())
    }

    /// Views a constant-length word substitution as a one-dimensional block rule.
    pub fn from_constant_length(sub: &Substitution) -> Result<Self> {
        let q = sub.constant_length().ok_or(Error::NotConstantLength)?;
        if !sub.is_complete() {
            return Err(Error::Invalid("substitution has undefined letters".into()));
        }
        Ok(BlockSubstitution {
            size: vec![q],
            blocks: sub.images().to_vec(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TileLengths {
    /// Natural lengths from the left Perron eigenvector.
    Auto,
    /// One entry per letter; `None` where the file gave no value.
    Explicit(Vec<Option<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InflationRule {
    pub substitution: Substitution,
    pub lengths: TileLengths,
    pub check_lengths: bool,
}

/// One constituent of a fusion supertile.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Placement {
    pub offset: Vec<i64>,
    /// Index into the previous level's supertile list (the alphabet at level 0).
    pub constituent: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionSupertile {
    pub name: String,
    pub placements: Vec<Placement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionLevel {
    pub supertiles: Vec<FusionSupertile>,
}

/// Level-indexed fusion script. `levels[0]` builds level 1 from the prototiles.
///
/// With `repeat` set, the last entry is reused for every deeper level. In one
/// dimension a repeated composition keeps the constituent order given by the
/// written offsets and lays constituents end to end.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionScript {
    pub levels: Vec<FusionLevel>,
    pub repeat: bool,
}

impl FusionScript {
    /// Number of explicitly written levels.
    pub fn scripted_depth(&self) -> usize {
        self.levels.len()
    }

    /// Composition used to build level `n ≥ 1`, if the script reaches it.
    pub fn level(&self, n: usize) -> Option<&FusionLevel> {
        if n == 0 {
            return None;
        }
        if n <= self.levels.len() {
            Some(&self.levels[n - 1])
        } else if self.repeat {
            self.levels.last()
        } else {
            None
        }
    }

    /// Is level `n` built by the repeated composition with recomputed offsets?
    pub fn is_repeated(&self, n: usize) -> bool {
        self.repeat && n >= self.levels.len()
    }

    pub fn max_level(&self) -> Option<usize> {
        (!self.repeat).then_some(self.levels.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedSubstitution {
    pub name: String,
    pub substitution: Substitution,
}

/// Eventually periodic directive sequence `σ_0 σ_1 …` over named maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SadicRule {
    pub subs: Vec<NamedSubstitution>,
    pub prefix: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl SadicRule {
    /// Index into `subs` of the n-th directive entry, if the sequence has one.
    pub fn directive(&self, n: usize) -> Option<usize> {
        if n < self.prefix.len() {
            Some(self.prefix[n])
        } else if self.cycle.is_empty() {
            None
        } else {
            Some(self.cycle[(n - self.prefix.len()) % self.cycle.len()])
        }
    }

    pub fn substitution(&self, n: usize) -> Option<&Substitution> {
        self.directive(n).map(|i| &self.subs[i].substitution)
    }
}

/// Two-type recursion `A' = A ∪ (B + k) ∪ (B + l)`, `B' = B ∪ (A + k) ∪ (A + l)`
/// with `k' = L k`, `l' = L l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorFusionRule {
    /// Row-major 2×2 matrix.
    pub matrix: [[i64; 2]; 2],
    pub k0: [i64; 2],
    pub l0: [i64; 2],
    pub seeds: [Letter; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum RuleBody {
    Symbolic(Substitution),
    Block(BlockSubstitution),
    Inflation(InflationRule),
    Fusion(FusionScript),
    Sadic(SadicRule),
    VectorFusion(VectorFusionRule),
}

/// A parsed rule file.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSpec {
    pub name: String,
    pub dim: usize,
    pub alphabet: Alphabet,
    pub body: RuleBody,
}

impl RuleSpec {
    pub fn kind(&self) -> RuleKind {
        match self.body {
            RuleBody::Symbolic(_) => RuleKind::Symbolic,
            RuleBody::Block(_) => RuleKind::Block,
            RuleBody::Inflation(_) => RuleKind::Inflation,
            RuleBody::Fusion(_) => RuleKind::Fusion,
            RuleBody::Sadic(_) => RuleKind::Sadic,
            RuleBody::VectorFusion(_) => RuleKind::VectorFusion,
        }
    }

    pub fn wrong_kind(&self, needed: &'static str) -> Error {
        Error::WrongKind {
            rule: self.name.clone(),
            found: self.kind().as_str(),
            needed,
        }
    }

    /// The word substitution behind a symbolic or inflation rule.
    pub fn substitution(&self) -> Result<&Substitution> {
        let sub = match &self.body {
            RuleBody::Symbolic(s) => s,
            RuleBody::Inflation(r) => &r.substitution,
            _ => return Err(self.wrong_kind("symbolic or inflation")),
        };
        if !sub.is_complete() {
            return Err(Error::Invalid(format!(
                "rule `{}` leaves some letters unmapped",
                self.name
            )));
        }
        Ok(sub)
    }

    /// Constant-length view: block rules directly, symbolic rules when all
    /// images share one length.
    pub fn constant_length(&self) -> Result<BlockSubstitution> {
        match &self.body {
            RuleBody::Block(b) => {
                if !b.is_complete() {
                    return Err(Error::Invalid(format!("rule `{}` has missing blocks", self.name)));
                }
                Ok(b.clone())
            }
            RuleBody::Symbolic(_) | RuleBody::Inflation(_) => {
                BlockSubstitution::from_constant_length(self.substitution()?)
            }
            _ => Err(self.wrong_kind("symbolic, inflation or block")),
        }
    }

    /// Canonical text form; parsing it yields an equal `RuleSpec`.
    pub fn to_canonical_string(&self) -> String {
        self.to_string()
    }
}
