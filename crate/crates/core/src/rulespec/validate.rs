use serde::Serialize;

use super::{
    Alphabet, BlockSubstitution, FusionScript, InflationRule, Letter, RuleBody, RuleSpec, SadicRule,
    Substitution, TileLengths, VectorFusionRule,
};
use crate::supertile::LatticePatch;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueCode {
    KindDimension,
    MissingImage,
    MissingLength,
    NonPositiveLength,
    LengthMismatch,
    BlockTooSmall,
    BlockShape,
    EmptySupertile,
    OverlappingPlacement,
    DisconnectedSupport,
    NotADisk,
    OffsetDimension,
    RepeatTypeMismatch,
    RepeatNeedsOneDimension,
    AlphabetChain,
    EmptyDirective,
    SingularMatrix,
    SeedsNotDistinct,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Issue {
    pub severity: Severity,
    /// Where the problem sits, e.g. `map b` or `level 2, super a`.
    pub location: String,
    pub code: IssueCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn has(&self, code: IssueCode) -> bool {
        self.issues.iter().any(|i| i.code == code)
    }
}

#[derive(Default)]
struct Issues(Vec<Issue>);

impl Issues {
    fn error(&mut self, code: IssueCode, location: impl Into<String>, message: impl Into<String>) {
        self.0.push(Issue {
            severity: Severity::Error,
            location: location.into(),
            code,
            message: message.into(),
        });
    }

    fn warn(&mut self, code: IssueCode, location: impl Into<String>, message: impl Into<String>) {
        self.0.push(Issue {
            severity: Severity::Warning,
            location: location.into(),
            code,
            message: message.into(),
        });
    }
}

/// Checks the per-kind invariants. Semantic problems are reported, never raised.
pub fn validate(rule: &RuleSpec) -> ValidationReport {
    let mut out = Issues::default();
    let needs_dim = match rule.kind() {
        super::RuleKind::Symbolic | super::RuleKind::Inflation | super::RuleKind::Sadic => Some(1),
        super::RuleKind::VectorFusion => Some(2),
        _ => None,
    };
    if let Some(d) = needs_dim {
        if rule.dim != d {
            out.error(
                IssueCode::KindDimension,
                "dim",
                format!("kind {} requires dim {d}, found {}", rule.kind(), rule.dim),
            );
        }
    }
    match &rule.body {
        RuleBody::Symbolic(s) => check_complete(s, &rule.alphabet, "", &mut out),
        RuleBody::Inflation(r) => check_inflation(r, &rule.alphabet, &mut out),
        RuleBody::Block(b) => check_block(b, rule.dim, &mut out),
        RuleBody::Fusion(s) => check_fusion(s, rule, &mut out),
        RuleBody::Sadic(s) => check_sadic(s, &rule.alphabet, &mut out),
        RuleBody::VectorFusion(v) => check_vector(v, &mut out),
    }
    let ok = out.0.iter().all(|i| i.severity != Severity::Error);
    ValidationReport { ok, issues: out.0 }
}

fn check_complete(s: &Substitution, alphabet: &Alphabet, prefix: &str, out: &mut Issues) {
    for a in 0..alphabet.len() as Letter {
        if !s.is_defined(a) {
            out.error(
                IssueCode::MissingImage,
                format!("{prefix}map {}", alphabet.symbol(a)),
                format!("symbol `{}` has no image", alphabet.symbol(a)),
            );
        }
    }
}

fn check_inflation(r: &InflationRule, alphabet: &Alphabet, out: &mut Issues) {
    check_complete(&r.substitution, alphabet, "", out);
    let TileLengths::Explicit(lengths) = &r.lengths else {
        return;
    };
    let mut all = Vec::with_capacity(lengths.len());
    for (a, l) in lengths.iter().enumerate() {
        let sym = alphabet.symbol(a as Letter);
        match l {
            None => out.error(IssueCode::MissingLength, "lengths", format!("no length for `{sym}`")),
            Some(x) if !(x.is_finite() && *x > 0.0) => out.error(
                IssueCode::NonPositiveLength,
                "lengths",
                format!("length of `{sym}` must be positive, found {x}"),
            ),
            Some(x) => all.push(*x),
        }
    }
    if !r.check_lengths || all.len() != lengths.len() || !r.substitution.is_complete() {
        return;
    }
    // every image must inflate its tile by one common factor
    let ratios: Vec<f64> = (0..lengths.len())
        .map(|a| {
            let total: f64 = r.substitution.image(a as Letter).iter().map(|&b| all[b as usize]).sum();
            total / all[a]
        })
        .collect();
    let lambda = ratios[0];
    for (a, q) in ratios.iter().enumerate() {
        if (q - lambda).abs() > 1e-9 * lambda.abs() {
            out.error(
                IssueCode::LengthMismatch,
                format!("map {}", alphabet.symbol(a as Letter)),
                format!("image inflates by {q}, expected {lambda}"),
            );
        }
    }
}

fn check_block(b: &BlockSubstitution, dim: usize, out: &mut Issues) {
    if b.dim() != dim {
        out.error(
            IssueCode::BlockShape,
            "size",
            format!("size has {} entries for dim {dim}", b.dim()),
        );
    }
    for (i, &l) in b.size().iter().enumerate() {
        if l < 2 {
            out.error(
                IssueCode::BlockTooSmall,
                "size",
                format!("side {} has length {l}, need at least 2", i + 1),
            );
        }
    }
    for (a, blk) in b.blocks().iter().enumerate() {
        if blk.len() != b.volume() {
            let location = format!("block {a}");
            if blk.is_empty() {
                out.error(IssueCode::MissingImage, location, "symbol has no block");
            } else {
                out.error(
                    IssueCode::BlockShape,
                    location,
                    format!("block has {} cells, expected {}", blk.len(), b.volume()),
                );
            }
        }
    }
}

fn check_fusion(s: &FusionScript, rule: &RuleSpec, out: &mut Issues) {
    let dim = rule.dim;
    let mut prev: Vec<LatticePatch> = (0..rule.alphabet.len() as Letter)
        .map(|a| LatticePatch::single(dim, a))
        .collect();
    for (i, level) in s.levels.iter().enumerate() {
        let n = i + 1;
        let repeated = s.repeat && n == s.levels.len();
        let label = if repeated { "repeat".to_string() } else { format!("level {n}") };
        let mut shape_ok = true;
        for st in &level.supertiles {
            let loc = format!("{label}, super {}", st.name);
            if st.placements.is_empty() {
                out.error(IssueCode::EmptySupertile, &loc, "supertile has no placements");
                shape_ok = false;
            }
            for p in &st.placements {
                if p.offset.len() != dim {
                    out.error(
                        IssueCode::OffsetDimension,
                        &loc,
                        format!("offset {:?} has {} coordinates, expected {dim}", p.offset, p.offset.len()),
                    );
                    shape_ok = false;
                }
                if p.constituent >= prev.len() {
                    out.error(
                        IssueCode::AlphabetChain,
                        &loc,
                        format!("constituent index {} not defined at level {}", p.constituent, n - 1),
                    );
                    shape_ok = false;
                }
            }
        }
        if repeated {
            if dim != 1 {
                out.error(
                    IssueCode::RepeatNeedsOneDimension,
                    &label,
                    "repeated levels are only defined in dimension 1",
                );
                return;
            }
            // the repeated level maps types to types of the same list
            if level.supertiles.len() != prev.len() {
                out.error(
                    IssueCode::RepeatTypeMismatch,
                    &label,
                    format!(
                        "repeat defines {} supertiles but its constituents have {}",
                        level.supertiles.len(),
                        prev.len()
                    ),
                );
                shape_ok = false;
            }
        }
        if !shape_ok {
            return;
        }
        let composed = super::super::supertile::compose_level(level, &prev, dim, false);
        for c in &composed {
            let loc = format!("{label}, super {}", c.name);
            if let Some(cell) = c.collisions.first() {
                out.error(
                    IssueCode::OverlappingPlacement,
                    &loc,
                    format!("two constituents cover cell {cell:?}"),
                );
            } else if !c.patch.is_edge_connected() {
                out.error(IssueCode::DisconnectedSupport, &loc, "support is not edge-connected");
            } else if !c.patch.is_disk() {
                out.warn(IssueCode::NotADisk, &loc, "support is not a topological disk");
            }
        }
        prev = composed.into_iter().map(|c| c.patch).collect();
    }
}

fn check_sadic(s: &SadicRule, alphabet: &Alphabet, out: &mut Issues) {
    if s.prefix.is_empty() && s.cycle.is_empty() {
        out.error(IssueCode::EmptyDirective, "directive", "directive sequence is empty");
        return;
    }
    let name = |i: usize| s.subs[i].name.as_str();
    let sym = |a: &Letter| alphabet.symbol(*a).to_string();
    // σ_i is applied to the output of σ_{i+1}
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let seq: Vec<usize> = s.prefix.iter().chain(&s.cycle).copied().collect();
    for w in seq.windows(2) {
        pairs.push((w[0], w[1]));
    }
    if let (Some(&last), Some(&first)) = (s.cycle.last(), s.cycle.first()) {
        pairs.push((last, first));
    }
    pairs.sort_unstable();
    pairs.dedup();
    for (outer, inner) in pairs {
        let dom: Vec<Letter> = s.subs[outer].substitution.domain().collect();
        let missing: Vec<String> = s.subs[inner]
            .substitution
            .codomain()
            .iter()
            .filter(|b| !dom.contains(b))
            .map(sym)
            .collect();
        if !missing.is_empty() {
            out.error(
                IssueCode::AlphabetChain,
                format!("directive {} {}", name(outer), name(inner)),
                format!(
                    "`{}` produces {} outside the domain of `{}`",
                    name(inner),
                    missing.join(" "),
                    name(outer)
                ),
            );
        }
    }
}

fn check_vector(v: &VectorFusionRule, out: &mut Issues) {
    let m = v.matrix;
    if m[0][0] * m[1][1] - m[0][1] * m[1][0] == 0 {
        out.error(IssueCode::SingularMatrix, "L", "matrix L is singular");
    }
    if v.seeds[0] == v.seeds[1] {
        out.error(IssueCode::SeedsNotDistinct, "seeds", "the two seed types must differ");
    }
    if v.k0 == v.l0 || v.k0 == [0, 0] || v.l0 == [0, 0] {
        out.error(
            IssueCode::OverlappingPlacement,
            "k0 l0",
            "first level places two constituents on one cell",
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulespec::parse_rule_file;

    fn report(text: &str) -> ValidationReport {
        validate(&parse_rule_file(text).unwrap())
    }

    #[test]
    fn fibonacci_is_valid() {
        let r = report("rule fib\nkind symbolic\ndim 1\nalphabet a b\nmap a -> a b\nmap b -> a\n");
        assert!(r.ok, "{:?}", r.issues);
        assert!(r.issues.is_empty());
    }

    #[test]
    fn missing_image() {
        let r = report("rule x\nkind symbolic\ndim 1\nalphabet a b\nmap a -> a b\n");
        assert!(!r.ok);
        assert!(r.has(IssueCode::MissingImage));
    }

    #[test]
    fn overlapping_placement() {
        let r = report("rule c\nkind fusion\ndim 1\nalphabet a\nlevel 1\nsuper a:\nplace a at 0\nplace a at 0\n");
        assert!(!r.ok);
        assert!(r.has(IssueCode::OverlappingPlacement));
    }

    #[test]
    fn disconnected_support() {
        let r = report("rule c\nkind fusion\ndim 2\nalphabet a\nlevel 1\nsuper a:\nplace a at 0 0\nplace a at 2 0\n");
        assert!(r.has(IssueCode::DisconnectedSupport));
        assert!(!r.ok);
    }

    #[test]
    fn ring_is_only_a_warning() {
        let mut text = String::from("rule r\nkind fusion\ndim 2\nalphabet a\nlevel 1\nsuper a:\n");
        for (x, y) in [(0, 0), (1, 0), (2, 0), (0, 1), (2, 1), (0, 2), (1, 2), (2, 2)] {
            text.push_str(&format!("place a at {x} {y}\n"));
        }
        let r = report(&text);
        assert!(r.ok);
        assert!(r.has(IssueCode::NotADisk));
    }

    #[test]
    fn chacon_is_valid() {
        let r = report("rule chacon\nkind fusion\ndim 1\nalphabet a b\nrepeat\nsuper a:\nplace a at 0\nplace a at 1\nplace b at 2\nplace a at 3\nsuper b:\nplace b at 0\n");
        assert!(r.ok, "{:?}", r.issues);
    }

    #[test]
    fn inflation_length_check() {
        let good = "rule k\nkind inflation\ndim 1\nalphabet a b\nmap a -> a b\nmap b -> a\nlengths a=1.618033988749895 b=1\ncheck-lengths\n";
        assert!(report(good).ok);
        let bad = "rule k\nkind inflation\ndim 1\nalphabet a b\nmap a -> a b\nmap b -> a\nlengths a=2 b=1\ncheck-lengths\n";
        assert!(report(bad).has(IssueCode::LengthMismatch));
        let unchecked = "rule k\nkind inflation\ndim 1\nalphabet a b\nmap a -> a b\nmap b -> a\nlengths a=2 b=1\n";
        assert!(report(unchecked).ok);
    }

    #[test]
    fn sadic_chain() {
        let ok = "rule s\nkind sadic\ndim 1\nalphabet a b\nsub F:\nmap a -> a b\nmap b -> a\nsub G:\nmap a -> a b b\nmap b -> a a a\ndirective F G cycle F\n";
        assert!(report(ok).ok);
        let bad = "rule s\nkind sadic\ndim 1\nalphabet a b c\nsub F:\nmap a -> a b\nmap b -> a\nsub G:\nmap a -> c\nmap b -> a\ndirective F G\n";
        let r = report(bad);
        assert!(r.has(IssueCode::AlphabetChain));
    }

    #[test]
    fn vector_fusion_checks() {
        let good = "rule v\nkind vector-fusion\ndim 2\nalphabet A B\nL 2 1 -1 1\nk0 1 0\nl0 0 1\nseeds A B\n";
        assert!(report(good).ok);
        let bad = "rule v\nkind vector-fusion\ndim 2\nalphabet A B\nL 1 1 1 1\nk0 1 0\nl0 0 1\nseeds A A\n";
        let r = report(bad);
        assert!(r.has(IssueCode::SingularMatrix));
        assert!(r.has(IssueCode::SeedsNotDistinct));
    }
}
