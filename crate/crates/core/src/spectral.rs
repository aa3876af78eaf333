//! Spectral diagnostics: Pisot classification, height, coincidences,
//! bijectivity, eigenvalue tests and weak mixing.

use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poly::{char_poly, IntPoly};
use crate::rulespec::{Letter, RuleBody, RuleSpec, Substitution, TileLengths};
use crate::supertile::{superblock_of, Limits};
use crate::transition::{is_irreducible, natural_lengths, perron_data, transition_matrix, TransitionMatrix};

/// The golden mean to 73 decimal places.
pub const PHI_DIGITS: &str =
    "1.6180339887498948482045868343656381177203091798057628621354486227052604628";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Integer,
    Pisot,
    NonPisot,
    SalemBoundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tristate {
    Yes,
    No,
    Undetermined,
}

fn serialize_poly<S: Serializer>(p: &IntPoly, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(p.0.len()))?;
    for c in &p.0 {
        match c.to_i64() {
            Some(v) => seq.serialize_element(&v)?,
            None => seq.serialize_element(&c.to_string())?,
        }
    }
    seq.end()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgebraicVerdict {
    /// Coefficients of `det(xI − M)`, leading term first.
    #[serde(serialize_with = "serialize_poly")]
    pub char_poly: IntPoly,
    pub perron_root: f64,
    /// Moduli of the remaining roots, ascending.
    pub conjugate_moduli: Vec<f64>,
    pub classification: Classification,
    pub irreducible_over_q: Tristate,
}

/// Classifies the Perron root of `m`. Integer roots of the characteristic
/// polynomial other than θ come from rational factors and are not
/// conjugates of θ, so they do not enter the Pisot test.
pub fn algebraic_verdict(m: &TransitionMatrix) -> Result<AlgebraicVerdict> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::InvalidArgument("algebraic verdict needs a square matrix".into()));
    }
    let poly = char_poly(m);
    let roots = poly.roots();
    let mut int_roots = poly.integer_roots();
    let theta = if is_irreducible(m) {
        perron_data(m)?.theta
    } else {
        roots
            .iter()
            .filter(|z| z.im.abs() < 1e-9)
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    };
    // the Newton-polished root is more accurate than power iteration
    let theta = roots
        .iter()
        .filter(|z| z.im.abs() < 1e-9 && (z.re - theta).abs() < 1e-6 * theta.max(1.0))
        .min_by(|a, b| (a.re - theta).abs().total_cmp(&(b.re - theta).abs()))
        .map_or(theta, |z| z.re);
    // drop the root matching θ, once
    let mut others: Vec<Complex64> = roots.clone();
    if let Some(i) = (0..others.len()).min_by(|&a, &b| {
        (others[a] - theta).norm().total_cmp(&(others[b] - theta).norm())
    }) {
        others.swap_remove(i);
    }
    let mut conjugate_moduli: Vec<f64> = others.iter().map(|z| z.norm()).collect();
    conjugate_moduli.sort_by(f64::total_cmp);

    let theta_int = int_roots
        .iter()
        .position(|r| r.to_f64().is_some_and(|x| (x - theta).abs() < 1e-9 * theta.max(1.0)));
    let classification = if theta_int.is_some() {
        Classification::Integer
    } else {
        // moduli of the roots not accounted for by integer factors
        let mut alg = others.clone();
        for r in &int_roots {
            let x = r.to_f64().unwrap_or(f64::INFINITY);
            if let Some(i) = (0..alg.len()).min_by(|&a, &b| {
                (alg[a] - x).norm().total_cmp(&(alg[b] - x).norm())
            }) {
                if (alg[i] - x).norm() < 1e-6 * x.abs().max(1.0) {
                    alg.swap_remove(i);
                }
            }
        }
        if alg.iter().any(|z| (z.norm() - 1.0).abs() <= 1e-9) {
            Classification::SalemBoundary
        } else if alg.iter().all(|z| z.norm() < 1.0 - 1e-9) {
            Classification::Pisot
        } else {
            Classification::NonPisot
        }
    };
    let degree = poly.degree();
    int_roots.retain(|_| degree > 1);
    let irreducible_over_q = if !int_roots.is_empty() {
        Tristate::No
    } else if degree <= 3 {
        Tristate::Yes
    } else {
        Tristate::Undetermined
    };
    Ok(AlgebraicVerdict {
        char_poly: poly,
        perron_root: theta,
        conjugate_moduli,
        classification,
        irreducible_over_q,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeakMixing {
    NotWeaklyMixing,
    WeaklyMixing,
    Undetermined,
}

/// Verdict from the Pisot classification of the expansion factor.
pub fn weak_mixing_verdict(rule: &RuleSpec) -> Result<WeakMixing> {
    if rule.dim != 1 {
        return Err(rule.wrong_kind("one-dimensional symbolic or inflation"));
    }
    let v = algebraic_verdict(&transition_matrix(rule, 1)?)?;
    Ok(match v.classification {
        Classification::Integer | Classification::Pisot => WeakMixing::NotWeaklyMixing,
        Classification::NonPisot => WeakMixing::WeaklyMixing,
        Classification::SalemBoundary => WeakMixing::Undetermined,
    })
}

/// `σ^t` as a word substitution.
fn power(sub: &Substitution, t: usize) -> Substitution {
    let images = (0..sub.images().len() as Letter)
        .map(|a| {
            let mut w = vec![a];
            for _ in 0..t {
                w = w.iter().flat_map(|&b| sub.image(b).iter().copied()).collect();
            }
            w
        })
        .collect();
    Substitution::new(images)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Height {
    pub height: u64,
    /// gcd of the positive positions of the first letter.
    pub gcd: u64,
    pub length: u64,
    /// Power of σ whose image of `letter` starts with `letter`.
    pub power: usize,
    pub letter: Letter,
    /// The gcd agreed on the prefix and its two doublings.
    pub stable: bool,
    /// The sampled fixed point looks periodic.
    pub periodic_warning: bool,
}

fn smallest_period(w: &[Letter], max: usize) -> Option<usize> {
    (1..=max.min(w.len() / 2)).find(|&p| (p..w.len()).all(|i| w[i] == w[i - p]))
}

/// Dekking's height from positions of `u_0` in a one-sided fixed point.
pub fn dekking_height(rule: &RuleSpec, prefix_len: usize) -> Result<Height> {
    if rule.dim != 1 {
        return Err(Error::NotConstantLength);
    }
    let sub = rule.substitution()?;
    let q = sub.constant_length().ok_or(Error::NotConstantLength)? as u64;
    if q < 2 {
        // superwords never grow, so there is no infinite fixed point
        return Err(Error::NoFixedPoint);
    }
    let m = sub.images().len();
    let max_t = (1..=m).product::<usize>().min(64);
    let mut found = None;
    for t in 1..=max_t {
        if (q as f64).powi(t as i32) > 1e6 {
            break;
        }
        let p = power(sub, t);
        if let Some(a) = (0..m as Letter).find(|&a| p.image(a).first() == Some(&a)) {
            found = Some((t, p, a));
            break;
        }
    }
    let (t, p, a) = found.ok_or(Error::NoFixedPoint)?;
    let prefix_len = prefix_len.max(10_000);
    let mut w = vec![a];
    while w.len() < 4 * prefix_len {
        w = w.iter().flat_map(|&b| p.image(b).iter().copied()).collect();
    }
    let gcd_upto = |len: usize| {
        w[1..len]
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == a)
            .fold(0u64, |g, (i, _)| g.gcd(&(i as u64 + 1)))
    };
    let gs = [gcd_upto(prefix_len), gcd_upto(2 * prefix_len), gcd_upto(4 * prefix_len)];
    let g = gs[2];
    let mut h = g;
    loop {
        let d = h.gcd(&q);
        if d <= 1 || h == 0 {
            break;
        }
        h /= d;
    }
    Ok(Height {
        height: h.max(1),
        gcd: g,
        length: q,
        power: t,
        letter: a,
        stable: gs[0] == gs[1] && gs[1] == gs[2],
        periodic_warning: smallest_period(&w[..prefix_len], 1000).is_some(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoincidenceMode {
    Plain,
    Strong,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoincidenceResult {
    pub found: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Position, 0-based; flattened index for blocks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell: Option<Vec<usize>>,
    pub mode: CoincidenceMode,
}

/// First `(k, l)` at which every letter's level-`k` block has the same symbol.
pub fn coincidence(rule: &RuleSpec, max_power: usize) -> Result<CoincidenceResult> {
    let sub = rule.constant_length()?;
    let m = rule.alphabet.len() as Letter;
    let limits = Limits::default();
    let mut blocks: Vec<_> = (0..m)
        .map(|a| superblock_of(&sub, a, 0, &limits))
        .collect::<Result<_>>()?;
    for k in 1..=max_power {
        let total = (blocks[0].volume() as u128) * sub.volume() as u128 * m as u128;
        limits.check(total)?;
        blocks = blocks
            .iter()
            .map(|b| crate::supertile::substitute_block(&sub, b))
            .collect();
        let first = &blocks[0];
        if let Some(l) = (0..first.volume()).find(|&l| blocks.iter().all(|b| b.cells[l] == first.cells[l])) {
            return Ok(CoincidenceResult {
                found: true,
                k: Some(k),
                l: Some(l),
                cell: Some(first.coord(l)),
                mode: CoincidenceMode::Plain,
            });
        }
    }
    Ok(CoincidenceResult {
        found: false,
        k: None,
        l: None,
        cell: None,
        mode: CoincidenceMode::Plain,
    })
}

/// Letters agree at position `l` of `σ^k(a)` for all `a`, and so do the
/// letter counts of the prefixes before `l`.
pub fn strong_coincidence(rule: &RuleSpec, max_power: usize) -> Result<CoincidenceResult> {
    let sub = rule.substitution()?;
    let m = sub.images().len();
    let limits = Limits::default();
    let mut images: Vec<Vec<Letter>> = (0..m as Letter).map(|a| vec![a]).collect();
    for k in 1..=max_power {
        let total: u128 = images
            .iter()
            .flatten()
            .map(|&b| sub.image(b).len() as u128)
            .sum();
        limits.check(total)?;
        images = images
            .iter()
            .map(|w| w.iter().flat_map(|&b| sub.image(b).iter().copied()).collect())
            .collect();
        let shortest = images.iter().map(Vec::len).min().unwrap_or(0);
        let mut counts = vec![vec![0u64; m]; m];
        for l in 0..shortest {
            let c = images[0][l];
            if images.iter().all(|w| w[l] == c) && counts.iter().all(|x| *x == counts[0]) {
                return Ok(CoincidenceResult {
                    found: true,
                    k: Some(k),
                    l: Some(l),
                    cell: None,
                    mode: CoincidenceMode::Strong,
                });
            }
            for (a, w) in images.iter().enumerate() {
                counts[a][w[l] as usize] += 1;
            }
        }
    }
    Ok(CoincidenceResult {
        found: false,
        k: None,
        l: None,
        cell: None,
        mode: CoincidenceMode::Strong,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bijectivity {
    pub bijective: bool,
    /// `table[k][a] = p_k(a)`, positions in block order.
    pub table: Vec<Vec<Letter>>,
}

/// Extracts the position maps `p_k` and checks each is a permutation.
pub fn is_bijective(rule: &RuleSpec) -> Result<Bijectivity> {
    let sub = rule.constant_length()?;
    let m = rule.alphabet.len();
    let table: Vec<Vec<Letter>> = (0..sub.volume())
        .map(|k| (0..m as Letter).map(|a| sub.block(a)[k]).collect())
        .collect();
    let bijective = table.iter().all(|p| {
        let mut seen = vec![false; m];
        p.iter().all(|&b| !std::mem::replace(&mut seen[b as usize], true))
    });
    Ok(Bijectivity { bijective, table })
}

/// Parses `α` as a fraction `p/q`, a decimal, or `phi`.
pub fn parse_alpha(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::InvalidArgument(format!("cannot read `{text}` as a real number"));
    if t == "phi" {
        return parse_alpha(PHI_DIGITS);
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
        let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if int.is_empty() && frac.is_empty() || !(int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit())) {
        return Err(bad());
    }
    let num = BigInt::from_str(format!("{int}{frac}").trim_start_matches('0'))
        .unwrap_or_else(|_| BigInt::zero());
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Distance from `x` to the nearest integer, exactly.
pub fn dist_to_z(x: &BigRational) -> BigRational {
    let f = x - x.floor();
    let g = BigRational::one() - &f;
    if f < g {
        f
    } else {
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    /// `rate` is the fitted geometric decay per step, when measurable.
    Pass {
        #[serde(skip_serializing_if = "Option::is_none")]
        rate: Option<f64>,
    },
    Fail,
    Inconclusive,
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Pass { .. } => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenvalueTestReport {
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    pub n_max: usize,
    pub tol: f64,
    /// `(n, largest distance over letters or sampled vectors)`.
    pub distances: Vec<(usize, f64)>,
    /// Period of the fixed point when it is periodic; the verdict then
    /// asks whether `α·period` is an integer.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    #[serde(flatten)]
    pub verdict: Verdict,
}

/// Pass: the last quarter of the samples is below `tol` and the sequence
/// is nonincreasing in the majority of steps. Fail: the last quarter
/// stays above `sqrt(tol)`.
fn judge(distances: &[(usize, f64)], tol: f64) -> Verdict {
    if distances.is_empty() {
        return Verdict::Inconclusive;
    }
    let d: Vec<f64> = distances.iter().map(|x| x.1).collect();
    let tail = &d[d.len() - (d.len() / 4).max(1)..];
    let tail_max = tail.iter().copied().fold(0.0, f64::max);
    let steps = d.len().saturating_sub(1);
    let down = d.windows(2).filter(|w| w[1] <= w[0]).count();
    if tail_max <= tol && 2 * down >= steps {
        let pos: Vec<(usize, f64)> = distances.iter().copied().filter(|x| x.1 > 0.0).collect();
        let rate = match (pos.first(), pos.last()) {
            (Some(a), Some(b)) if b.0 > a.0 => Some((b.1 / a.1).powf(1.0 / (b.0 - a.0) as f64)),
            _ => None,
        };
        Verdict::Pass { rate }
    } else if tail_max > tol.sqrt() {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    }
}

/// Checks `dist(α·|σ^{pn}(a)|, Z) → 0` for every letter with exact lengths.
pub fn host_test(rule: &RuleSpec, alpha: &BigRational, p: usize, n_max: usize, tol: f64) -> Result<EigenvalueTestReport> {
    if p == 0 {
        return Err(Error::InvalidArgument("p must be positive".into()));
    }
    let m = transition_matrix(rule, 1)?;
    let mp = m.pow(p as u64);
    let k = m.rows();
    // lengths as a row vector: 1ᵀ M^{pn}
    let mut lengths = vec![BigUint::one(); k];
    let mut distances = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            lengths = (0..k)
                .map(|j| (0..k).map(|i| &lengths[i] * mp.get(i, j)).sum())
                .collect();
        }
        let worst = lengths
            .iter()
            .map(|l| dist_to_z(&(alpha * BigRational::from_integer(BigInt::from(l.clone())))))
            .max()
            .unwrap_or_else(BigRational::zero);
        distances.push((n, worst.to_f64().unwrap_or(f64::NAN)));
    }
    let (period, verdict) = periodic_or_judge(rule, alpha, &distances, tol);
    Ok(EigenvalueTestReport {
        alpha: alpha.to_f64().unwrap_or(f64::NAN),
        p: Some(p),
        n_max,
        tol,
        distances,
        period,
        verdict,
    })
}

/// A periodic orbit only has the multiples of 1/period as eigenvalues, so
/// for periodic rules the limit test is replaced by that check.
fn periodic_or_judge(rule: &RuleSpec, alpha: &BigRational, distances: &[(usize, f64)], tol: f64) -> (Option<usize>, Verdict) {
    match fixed_point_period(rule) {
        Some(t) => {
            let d = dist_to_z(&(alpha * BigRational::from_integer(BigInt::from(t))));
            let v = if d.to_f64().unwrap_or(f64::INFINITY) <= tol {
                Verdict::Pass { rate: None }
            } else {
                Verdict::Fail
            };
            (Some(t), v)
        }
        None => (None, judge(distances, tol)),
    }
}

/// Smallest period of a one-dimensional fixed point, judged on a sampled
/// prefix of 8192 letters that must repeat at least 16 times. Inflation
/// rules measure it in tile lengths, which must then be integers.
fn fixed_point_period(rule: &RuleSpec) -> Option<usize> {
    const LEN: usize = 8192;
    if rule.dim != 1 {
        return None;
    }
    let w = crate::diffraction::sample_word(rule, LEN, &crate::supertile::Limits::default()).ok()?;
    let p = smallest_period(&w, LEN / 16)?;
    if !matches!(rule.body, RuleBody::Inflation(_)) {
        return Some(p);
    }
    let lengths = crate::transition::tile_volumes(rule).ok()?;
    let t: f64 = w[..p].iter().map(|&a| lengths[a as usize]).sum();
    (t.fract() == 0.0).then_some(t as usize)
}

/// Letter-count vectors of return words: for each letter, the stretch
/// between consecutive occurrences in a sampled superword.
pub fn return_vectors(rule: &RuleSpec, max: usize) -> Result<Vec<Vec<u64>>> {
    let sub = rule.substitution()?;
    let m = sub.images().len();
    let mut w: Vec<Letter> = vec![0];
    for _ in 0..64 {
        if w.len() >= 2000 {
            break;
        }
        let next: Vec<Letter> = w.iter().flat_map(|&b| sub.image(b).iter().copied()).collect();
        if next.len() == w.len() && w.len() > 1 {
            break;
        }
        w = next;
    }
    let mut out: Vec<Vec<u64>> = Vec::new();
    for a in 0..m as Letter {
        let pos: Vec<usize> = (0..w.len()).filter(|&i| w[i] == a).collect();
        for pair in pos.windows(2) {
            let mut c = vec![0u64; m];
            for &b in &w[pair[0]..pair[1]] {
                c[b as usize] += 1;
            }
            if !out.contains(&c) {
                out.push(c);
            }
            if out.len() >= max {
                return Ok(out);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyReturnSample);
    }
    Ok(out)
}

/// Checks `dist(α·λ^n·x, Z) → 0` over sampled return vectors `x`, using
/// `λ^n x = ℓ · M^n c` for the count vector `c` of each return word.
pub fn selfsimilar_eigen_test(rule: &RuleSpec, alpha: &BigRational, n_max: usize, tol: f64) -> Result<EigenvalueTestReport> {
    let RuleBody::Inflation(inf) = &rule.body else {
        return Err(rule.wrong_kind("inflation"));
    };
    let lengths = match &inf.lengths {
        TileLengths::Auto => natural_lengths(rule)?,
        TileLengths::Explicit(v) => v
            .iter()
            .map(|x| x.ok_or_else(|| Error::Invalid("missing tile length".into())))
            .collect::<Result<_>>()?,
    };
    let sample = return_vectors(rule, 16)?;
    let m = transition_matrix(rule, 1)?;
    let k = m.rows();
    let integral = lengths.iter().all(|l| l.fract() == 0.0);
    let alpha_f = alpha.to_f64().unwrap_or(f64::NAN);
    let mut vs: Vec<Vec<BigUint>> = sample
        .iter()
        .map(|c| c.iter().map(|&x| BigUint::from(x)).collect())
        .collect();
    let mut distances = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            vs = vs
                .iter()
                .map(|v| (0..k).map(|i| (0..k).map(|j| m.get(i, j) * &v[j]).sum()).collect())
                .collect();
        }
        let worst = vs
            .iter()
            .map(|v| {
                if integral {
                    let x: BigInt = v
                        .iter()
                        .zip(&lengths)
                        .map(|(c, l)| BigInt::from(c.clone()) * BigInt::from(*l as i64))
                        .sum();
                    dist_to_z(&(alpha * BigRational::from_integer(x))).to_f64().unwrap_or(f64::NAN)
                } else {
                    let x: f64 = v
                        .iter()
                        .zip(&lengths)
                        .map(|(c, l)| c.to_f64().unwrap_or(f64::INFINITY) * l)
                        .sum();
                    let y = alpha_f * x;
                    (y - y.round()).abs()
                }
            })
            .fold(0.0, f64::max);
        distances.push((n, worst));
    }
    let (period, verdict) = periodic_or_judge(rule, alpha, &distances, tol);
    Ok(EigenvalueTestReport {
        alpha: alpha_f,
        p: None,
        n_max,
        tol,
        distances,
        period,
        verdict,
    })
}

/// Runs the self-similar test over a grid of `α` values in parallel;
/// results keep grid order.
pub fn alpha_scan(rule: &RuleSpec, alphas: &[BigRational], n_max: usize, tol: f64) -> Result<Vec<Verdict>> {
    alphas
        .par_iter()
        .map(|a| selfsimilar_eigen_test(rule, a, n_max, tol).map(|r| r.verdict))
        .collect()
}

/// Value `exp(2πi (j mod qⁿ)/qⁿ)` of the level-`n` eigenfunction at shift `j`.
pub fn eigenfunction_profile(rule: &RuleSpec, n: u32, j: u64) -> Result<Complex64> {
    let q = rule.constant_length()?.volume() as u128;
    let qn = q
        .checked_pow(n)
        .ok_or_else(|| Error::InvalidArgument(format!("q^{n} overflows")))?;
    let r = j as u128 % qn;
    let angle = std::f64::consts::TAU * (r as f64 / qn as f64);
    Ok(Complex64::from_polar(1.0, angle))
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    #[serde(flatten)]
    pub algebraic: AlgebraicVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub height: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coincidence: Option<CoincidenceResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong_coincidence: Option<CoincidenceResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bijective: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub host: Option<EigenvalueTestReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weak_mixing: Option<WeakMixing>,
}

#[derive(Debug, Clone)]
pub struct SpectralOptions {
    pub alpha: Option<BigRational>,
    pub p: usize,
    pub n_max: usize,
    pub tol: f64,
    pub max_power: usize,
    pub prefix_len: usize,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            alpha: None,
            p: 1,
            n_max: 40,
            tol: 1e-6,
            max_power: 8,
            prefix_len: 10_000,
        }
    }
}

/// Collects every diagnostic that applies to the rule's kind.
pub fn spectral_report(rule: &RuleSpec, opts: &SpectralOptions) -> Result<SpectralReport> {
    let m = transition_matrix(rule, 1)?;
    let algebraic = algebraic_verdict(&m)?;
    let constant = rule.constant_length().is_ok();
    let one_dim = rule.dim == 1;
    let symbolic = matches!(rule.body, RuleBody::Symbolic(_) | RuleBody::Inflation(_));
    let height = if constant && one_dim {
        match dekking_height(rule, opts.prefix_len) {
            Ok(h) => Some(h.height),
            Err(Error::NoFixedPoint) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let host = match (&opts.alpha, symbolic) {
        (Some(a), true) => Some(host_test(rule, a, opts.p, opts.n_max, opts.tol)?),
        _ => None,
    };
    Ok(SpectralReport {
        height,
        coincidence: constant.then(|| coincidence(rule, opts.max_power)).transpose()?,
        strong_coincidence: symbolic.then(|| strong_coincidence(rule, opts.max_power)).transpose()?,
        bijective: constant.then(|| is_bijective(rule).map(|b| b.bijective)).transpose()?,
        host,
        weak_mixing: (symbolic && one_dim).then(|| weak_mixing_verdict(rule)).transpose()?,
        algebraic,
    })
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
    fn tm() -> RuleSpec {
        rule("rule tm\nkind symbolic\ndim 1\nalphabet 0 1\nmap 0 -> 0 1\nmap 1 -> 1 0\n")
    }
    fn k3() -> RuleSpec {
        rule("rule k3\nkind inflation\ndim 1\nalphabet a b\nmap a -> a b b b\nmap b -> a\nlengths auto\n")
    }
    fn ints(p: &IntPoly) -> Vec<i64> {
        p.0.iter().map(|c| c.to_i64().unwrap()).collect()
    }

    #[test]
    fn verdicts() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let v = algebraic_verdict(&transition_matrix(&fib(), 1).unwrap()).unwrap();
        assert_eq!(ints(&v.char_poly), vec![1, -1, -1]);
        assert!((v.perron_root - phi).abs() < 1e-12);
        assert!((v.conjugate_moduli[0] - 1.0 / phi).abs() < 1e-12);
        assert_eq!(v.classification, Classification::Pisot);
        assert_eq!(v.irreducible_over_q, Tristate::Yes);

        let v = algebraic_verdict(&transition_matrix(&k3(), 1).unwrap()).unwrap();
        assert_eq!(ints(&v.char_poly), vec![1, -1, -3]);
        assert!((v.perron_root - (1.0 + 13f64.sqrt()) / 2.0).abs() < 1e-9);
        assert!((v.conjugate_moduli[0] - (13f64.sqrt() - 1.0) / 2.0).abs() < 1e-9);
        assert_eq!(v.classification, Classification::NonPisot);

        let v = algebraic_verdict(&transition_matrix(&abb(), 1).unwrap()).unwrap();
        assert_eq!(v.perron_root, 3.0);
        assert_eq!(v.conjugate_moduli, vec![2.0]);
        assert_eq!(v.classification, Classification::Integer);
        assert_eq!(v.irreducible_over_q, Tristate::No);
    }

    #[test]
    fn weak_mixing() {
        assert_eq!(weak_mixing_verdict(&fib()).unwrap(), WeakMixing::NotWeaklyMixing);
        assert_eq!(weak_mixing_verdict(&k3()).unwrap(), WeakMixing::WeaklyMixing);
        let per = rule("rule p\nkind symbolic\ndim 1\nalphabet a\nmap a -> a a\n");
        assert_eq!(weak_mixing_verdict(&per).unwrap(), WeakMixing::NotWeaklyMixing);
    }

    #[test]
    fn heights() {
        assert_eq!(dekking_height(&tm(), 10_000).unwrap().height, 1);
        assert_eq!(dekking_height(&abb(), 10_000).unwrap().height, 1);
        let p2 = rule("rule p2\nkind symbolic\ndim 1\nalphabet a b\nmap a -> a b\nmap b -> a b\n");
        let h = dekking_height(&p2, 10_000).unwrap();
        assert_eq!((h.gcd, h.height), (2, 1));
        assert!(h.periodic_warning);
        assert_eq!(dekking_height(&fib(), 10_000), Err(Error::NotConstantLength));
        let none = rule("rule n\nkind symbolic\ndim 1\nalphabet a b\nmap a -> b b\nmap b -> b a\n");
        // σ(b) starts with b
        assert_eq!(dekking_height(&none, 10_000).unwrap().letter, 1);
    }

    #[test]
    fn height_uses_a_power_when_needed() {
        let r = rule("rule s\nkind symbolic\ndim 1\nalphabet a b\nmap a -> b a\nmap b -> a b\n");
        let h = dekking_height(&r, 10_000).unwrap();
        assert_eq!(h.power, 2);
    }

    #[test]
    fn coincidences() {
        let c = coincidence(&abb(), 8).unwrap();
        assert_eq!((c.found, c.k, c.l), (true, Some(1), Some(0)));
        assert!(!coincidence(&tm(), 8).unwrap().found);
        let one = rule("rule id\nkind symbolic\ndim 1\nalphabet a\nmap a -> a\n");
        assert_eq!(coincidence(&one, 3).unwrap().k, Some(1));
        let s = strong_coincidence(&fib(), 5).unwrap();
        assert_eq!((s.found, s.k, s.l), (true, Some(1), Some(0)));
        assert!(!strong_coincidence(&tm(), 8).unwrap().found);
        assert!(strong_coincidence(&one, 1).unwrap().found);
    }

    #[test]
    fn bijectivity() {
        let tm2d = rule("rule tm2d\nkind block\ndim 2\nalphabet 0 1\nsize 2 2\nblock 0:\n0 1\n1 0\nblock 1:\n1 0\n0 1\n");
        let b = is_bijective(&tm2d).unwrap();
        assert!(b.bijective);
        // p_(0,0) = g_0 (identity), p_(0,1) = g_1 (swap)
        assert_eq!(b.table, vec![vec![0, 1], vec![1, 0], vec![1, 0], vec![0, 1]]);
        assert!(!is_bijective(&abb()).unwrap().bijective);
        let one = rule("rule id\nkind symbolic\ndim 1\nalphabet a\nmap a -> a\n");
        assert!(is_bijective(&one).unwrap().bijective);
    }

    #[test]
    fn alpha_parsing() {
        assert_eq!(parse_alpha("1/3").unwrap(), BigRational::new(1.into(), 3.into()));
        assert_eq!(parse_alpha("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert_eq!(parse_alpha("-2.5e1").unwrap(), BigRational::from_integer((-25).into()));
        assert_eq!(parse_alpha("3").unwrap(), BigRational::from_integer(3.into()));
        assert!(parse_alpha("x").is_err());
        assert!(parse_alpha("1/0").is_err());
        let phi = parse_alpha("phi").unwrap().to_f64().unwrap();
        assert_eq!(phi, (1.0 + 5f64.sqrt()) / 2.0);
    }

    #[test]
    fn host_fibonacci() {
        let phi = parse_alpha("phi").unwrap();
        let r = host_test(&fib(), &phi, 1, 40, 1e-6).unwrap();
        assert!(r.verdict.is_pass(), "{:?}", r.verdict);
        let third = parse_alpha("1/3").unwrap();
        assert_eq!(host_test(&fib(), &third, 1, 40, 1e-6).unwrap().verdict, Verdict::Fail);
        let zero = BigRational::zero();
        assert!(host_test(&abb(), &zero, 1, 10, 1e-6).unwrap().verdict.is_pass());
    }

    #[test]
    fn host_dyadic_for_thue_morse() {
        for n in 0..=10u32 {
            for j in 0..(1u64 << n) {
                let a = BigRational::new(BigInt::from(j), BigInt::from(1u64 << n));
                assert!(host_test(&tm(), &a, 1, 40, 1e-6).unwrap().verdict.is_pass());
            }
        }
    }

    #[test]
    fn selfsimilar() {
        let per = rule("rule p\nkind inflation\ndim 1\nalphabet a\nmap a -> a a\nlengths a=1\n");
        let zero = BigRational::zero();
        assert!(selfsimilar_eigen_test(&per, &zero, 20, 1e-6).unwrap().verdict.is_pass());
        let one = BigRational::one();
        assert!(selfsimilar_eigen_test(&per, &one, 20, 1e-6).unwrap().verdict.is_pass());
        // 2^n · 1/2 is an integer for n ≥ 1, but the orbit has period 1
        let half = parse_alpha("1/2").unwrap();
        let r = selfsimilar_eigen_test(&per, &half, 20, 1e-6).unwrap();
        assert_eq!((r.period, r.verdict), (Some(1), Verdict::Fail));
        assert_eq!(host_test(&per, &half, 1, 20, 1e-6).unwrap().verdict, Verdict::Fail);
        let period2 = rule("rule p2\nkind symbolic\ndim 1\nalphabet a b\nmap a -> a b\nmap b -> a b\n");
        let r = host_test(&period2, &half, 1, 20, 1e-6).unwrap();
        assert_eq!(r.period, Some(2));
        assert!(r.verdict.is_pass());
        assert_eq!(host_test(&tm(), &half, 1, 20, 1e-6).unwrap().period, None);
        let third = parse_alpha("1/3").unwrap();
        assert_eq!(selfsimilar_eigen_test(&per, &third, 20, 1e-6).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn empty_return_sample() {
        let id = rule("rule id\nkind inflation\ndim 1\nalphabet a\nmap a -> a\nlengths a=1\n");
        assert_eq!(
            selfsimilar_eigen_test(&id, &BigRational::zero(), 5, 1e-6),
            Err(Error::EmptyReturnSample)
        );
    }

    #[test]
    fn eigenfunction() {
        let i = eigenfunction_profile(&tm(), 2, 1).unwrap();
        assert!((i - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(eigenfunction_profile(&tm(), 2, 0).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(eigenfunction_profile(&tm(), 2, 4).unwrap(), Complex64::new(1.0, 0.0));
    }
}
