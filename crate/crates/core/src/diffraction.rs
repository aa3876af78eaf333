//! Weighted Dirac combs, correlations, autocorrelation atoms and
//! Bombieri–Taylor intensities.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rulespec::{Alphabet, Letter, RuleBody, RuleSpec};
use crate::supertile::{fixed_point_prefix, superblock, Block, IntervalPatch, LatticePatch, Limits, Word};

/// Parses `sym=re`, `sym=re+imi` or `sym=imi` pairs separated by commas.
/// Symbols not listed get weight 0.
pub fn parse_weights(text: &str, alphabet: &Alphabet) -> Result<Vec<Complex64>> {
    let mut w = vec![Complex64::new(0.0, 0.0); alphabet.len()];
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (sym, val) = item
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("weight `{item}` is not sym=value")))?;
        let a = alphabet
            .index_of(sym.trim())
            .ok_or_else(|| Error::UnknownType(sym.trim().to_string()))?;
        w[a as usize] = parse_complex(val.trim())?;
    }
    Ok(w)
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let bad = || Error::InvalidArgument(format!("cannot read `{s}` as a complex number"));
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    // split at the last sign that is not part of an exponent or the leading sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let imag = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(i) => Ok(Complex64::new(body[..i].parse().map_err(|_| bad())?, imag(&body[i..])?)),
        None => Ok(Complex64::new(0.0, imag(body)?)),
    }
}

/// One scatterer.
#[derive(Debug, Clone, PartialEq)]
pub struct Scatterer {
    pub pos: Vec<f64>,
    pub weight: Complex64,
}

/// Finite comb with an averaging window `[lo, hi)` per axis. Points are
/// kept sorted by position; points outside the window act as a halo for
/// the autocorrelation.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedComb {
    pub dim: usize,
    pub points: Vec<Scatterer>,
    pub window: Vec<(f64, f64)>,
    /// All positions are integers.
    pub lattice: bool,
}

impl WeightedComb {
    pub fn new(dim: usize, mut points: Vec<Scatterer>, window: Vec<(f64, f64)>, lattice: bool) -> Result<Self> {
        if window.len() != dim || window.iter().any(|(a, b)| !(b > a)) {
            return Err(Error::InvalidArgument("window must have positive volume".into()));
        }
        points.sort_by(|a, b| {
            a.pos
                .iter()
                .zip(&b.pos)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        if points.windows(2).any(|w| w[0].pos == w[1].pos) {
            return Err(Error::InvalidArgument("comb positions must be distinct".into()));
        }
        Ok(WeightedComb {
            dim,
            points,
            window,
            lattice,
        })
    }

    pub fn volume(&self) -> f64 {
        self.window.iter().map(|(a, b)| b - a).product()
    }

    /// Same points averaged over a different window.
    pub fn with_window(mut self, window: Vec<(f64, f64)>) -> Result<Self> {
        if window.len() != self.dim || window.iter().any(|(a, b)| !(b > a)) {
            return Err(Error::InvalidArgument("window must have positive volume".into()));
        }
        self.window = window;
        Ok(self)
    }

    fn in_window(&self, pos: &[f64]) -> bool {
        pos.iter().zip(&self.window).all(|(x, (a, b))| x >= a && x < b)
    }

    /// Unit-weight comb on `Z ∩ [0, n)`.
    pub fn lattice_1d(n: usize) -> Self {
        let points = (0..n)
            .map(|i| Scatterer {
                pos: vec![i as f64],
                weight: Complex64::new(1.0, 0.0),
            })
            .collect();
        WeightedComb {
            dim: 1,
            points,
            window: vec![(0.0, n as f64)],
            lattice: true,
        }
    }
}

/// Anything a comb can be read from.
pub enum PatchRef<'a> {
    Word(&'a Word),
    Block(&'a Block),
    Interval(&'a IntervalPatch),
    Lattice(&'a LatticePatch),
}

fn weight(weights: &[Complex64], a: Letter) -> Result<Complex64> {
    weights.get(a as usize).copied().ok_or(Error::BadSymbol(a as usize))
}

/// One scatterer per tile: lattice cells at their coordinate, interval
/// tiles at their left endpoint.
pub fn comb_from_patch(patch: PatchRef<'_>, weights: &[Complex64]) -> Result<WeightedComb> {
    match patch {
        PatchRef::Word(w) => {
            if w.is_empty() {
                return Err(Error::InvalidArgument("empty patch".into()));
            }
            let points = w
                .iter()
                .enumerate()
                .map(|(i, &a)| Ok(Scatterer { pos: vec![i as f64], weight: weight(weights, a)? }))
                .collect::<Result<_>>()?;
            WeightedComb::new(1, points, vec![(0.0, w.len() as f64)], true)
        }
        PatchRef::Block(b) => {
            let points = (0..b.volume())
                .map(|i| {
                    let pos = b.coord(i).into_iter().map(|c| c as f64).collect();
                    Ok(Scatterer { pos, weight: weight(weights, b.cells[i])? })
                })
                .collect::<Result<_>>()?;
            let window = b.extents.iter().map(|&e| (0.0, e as f64)).collect();
            WeightedComb::new(b.dim(), points, window, true)
        }
        PatchRef::Interval(p) => {
            let first = p.tiles.first().ok_or_else(|| Error::InvalidArgument("empty patch".into()))?;
            let points = p
                .tiles
                .iter()
                .map(|t| Ok(Scatterer { pos: vec![t.left], weight: weight(weights, t.letter)? }))
                .collect::<Result<_>>()?;
            let lo = first.left;
            WeightedComb::new(1, points, vec![(lo, lo + p.total_length())], false)
        }
        PatchRef::Lattice(p) => {
            let bounds = p.bounds().ok_or_else(|| Error::InvalidArgument("empty patch".into()))?;
            let points = p
                .cells
                .iter()
                .map(|(c, &a)| {
                    Ok(Scatterer {
                        pos: c.iter().map(|&x| x as f64).collect(),
                        weight: weight(weights, a)?,
                    })
                })
                .collect::<Result<_>>()?;
            let window = bounds.iter().map(|&(a, b)| (a as f64, b as f64 + 1.0)).collect();
            WeightedComb::new(p.dim, points, window, true)
        }
    }
}

/// A letter whose image starts with itself, falling back to the first letter.
fn fixed_point_seed(rule: &RuleSpec) -> Result<Letter> {
    let sub = rule.substitution()?;
    Ok((0..sub.images().len() as Letter)
        .find(|&a| sub.image(a).first() == Some(&a))
        .unwrap_or(0))
}

/// Prefix of the one-sided fixed point used by all 1-D window routines.
pub fn sample_word(rule: &RuleSpec, len: usize, limits: &Limits) -> Result<Word> {
    fixed_point_prefix(rule, fixed_point_seed(rule)?, len, limits)
}

/// `C(k) = (1/N) Σ_{n<N} w(x(n+k)) conj(w(x(n)))`, with `C(−k) = conj(C(k))`.
/// Symbol pairs are counted exactly; weights enter only in the final sum.
pub fn correlation(rule: &RuleSpec, weights: &[Complex64], k: i64, n: usize, limits: &Limits) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidArgument("window must be positive".into()));
    }
    let shift = k.unsigned_abs() as usize;
    let word = sample_word(rule, n + shift, limits)?;
    Ok(correlation_of(&word, weights, k, n))
}

fn correlation_of(word: &[Letter], weights: &[Complex64], k: i64, n: usize) -> Complex64 {
    let m = weights.len();
    let shift = k.unsigned_abs() as usize;
    let mut pairs = vec![0u64; m * m];
    for i in 0..n {
        pairs[word[i + shift] as usize * m + word[i] as usize] += 1;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..m {
        for b in 0..m {
            let c = pairs[a * m + b];
            if c > 0 {
                acc += weights[a] * weights[b].conj() * c as f64;
            }
        }
    }
    let c = acc / n as f64;
    if k < 0 {
        c.conj()
    } else {
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationTable {
    pub window: usize,
    /// `(k, C(k))` for `k = −max_k..=max_k`.
    pub entries: Vec<(i64, Complex64)>,
}

impl CorrelationTable {
    pub fn get(&self, k: i64) -> Option<Complex64> {
        self.entries.iter().find(|e| e.0 == k).map(|e| e.1)
    }
}

pub fn correlation_table(rule: &RuleSpec, weights: &[Complex64], max_k: usize, n: usize, limits: &Limits) -> Result<CorrelationTable> {
    if n == 0 {
        return Err(Error::InvalidArgument("window must be positive".into()));
    }
    let word = sample_word(rule, n + max_k, limits)?;
    let entries = (-(max_k as i64)..=max_k as i64)
        .map(|k| (k, correlation_of(&word, weights, k, n)))
        .collect();
    Ok(CorrelationTable { window: n, entries })
}

/// Correlation at one offset across several windows, with successive gaps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSeries {
    pub k: i64,
    pub values: Vec<(usize, Complex64)>,
    pub gaps: Vec<f64>,
    /// Every gap is at most 1e-3.
    pub converged: bool,
}

pub fn correlation_series(rule: &RuleSpec, weights: &[Complex64], k: i64, windows: &[usize], limits: &Limits) -> Result<CorrelationSeries> {
    let max = windows.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Err(Error::InvalidArgument("need at least one positive window".into()));
    }
    let word = sample_word(rule, max + k.unsigned_abs() as usize, limits)?;
    let values: Vec<(usize, Complex64)> = windows
        .iter()
        .map(|&n| (n, correlation_of(&word, weights, k, n)))
        .collect();
    let gaps: Vec<f64> = values.windows(2).map(|w| (w[1].1 - w[0].1).norm()).collect();
    Ok(CorrelationSeries {
        k,
        converged: gaps.iter().all(|&g| g <= 1e-3),
        values,
        gaps,
    })
}

/// Autocorrelation atoms `z ↦ (1/Vol) Σ_{x ∈ window} w(x+z) conj(w(x))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AutocorrMeasure {
    pub volume: f64,
    /// Sorted by difference vector.
    pub atoms: Vec<(Vec<f64>, Complex64)>,
}

impl AutocorrMeasure {
    pub fn at(&self, z: &[f64]) -> Option<Complex64> {
        self.atoms
            .iter()
            .find(|(k, _)| k.iter().zip(z).all(|(a, b)| (a - b).abs() < 1e-9))
            .map(|a| a.1)
    }
}

fn key(v: &[f64]) -> Vec<i64> {
    v.iter().map(|x| (x * 1e9).round() as i64).collect()
}

/// Anchors are the points inside the comb's window; partners may come
/// from anywhere in the comb. Differences with every `|z_i| ≤ max_offset`.
pub fn autocorrelation(comb: &WeightedComb, max_offset: f64) -> AutocorrMeasure {
    let mut atoms: BTreeMap<Vec<i64>, (Vec<f64>, Complex64)> = BTreeMap::new();
    let mut add = |z: Vec<f64>, v: Complex64| {
        atoms
            .entry(key(&z))
            .and_modify(|e| e.1 += v)
            .or_insert((z, v));
    };
    if comb.lattice {
        let index: HashMap<Vec<i64>, Complex64> = comb
            .points
            .iter()
            .map(|p| (p.pos.iter().map(|&x| x as i64).collect(), p.weight))
            .collect();
        let r = max_offset.floor() as i64;
        let side = (2 * r + 1) as usize;
        let offsets: Vec<Vec<i64>> = (0..side.pow(comb.dim as u32))
            .map(|mut i| {
                (0..comb.dim)
                    .map(|_| {
                        let c = (i % side) as i64 - r;
                        i /= side;
                        c
                    })
                    .collect()
            })
            .collect();
        for z in &offsets {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut hit = false;
            for p in comb.points.iter().filter(|p| comb.in_window(&p.pos)) {
                let q: Vec<i64> = p.pos.iter().zip(z).map(|(&x, &d)| x as i64 + d).collect();
                if let Some(w) = index.get(&q) {
                    acc += w * p.weight.conj();
                    hit = true;
                }
            }
            if hit {
                add(z.iter().map(|&c| c as f64).collect(), acc);
            }
        }
    } else {
        // sorted positions; scan partners within max_offset
        let xs: Vec<f64> = comb.points.iter().map(|p| p.pos[0]).collect();
        for (i, p) in comb.points.iter().enumerate() {
            if !comb.in_window(&p.pos) {
                continue;
            }
            let lo = xs.partition_point(|&x| x < xs[i] - max_offset - 1e-12);
            for (j, q) in comb.points.iter().enumerate().skip(lo) {
                let z = xs[j] - xs[i];
                if z > max_offset + 1e-12 {
                    break;
                }
                add(vec![z], q.weight * p.weight.conj());
            }
        }
    }
    let volume = comb.volume();
    AutocorrMeasure {
        volume,
        atoms: atoms.into_values().map(|(z, v)| (z, v / volume)).collect(),
    }
}

/// `exp(−2πi t)` with `t` reduced mod 1 first.
fn phase(t: f64) -> Complex64 {
    let f = t - t.floor();
    let (s, c) = (std::f64::consts::TAU * f).sin_cos();
    Complex64::new(c, -s)
}

/// `c^ξ = (1/Vol) Σ w(x) exp(−2πi ξ·x)`, summed in position order.
pub fn fourier_coefficient(comb: &WeightedComb, xi: &[f64]) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for p in comb.points.iter().filter(|p| comb.in_window(&p.pos)) {
        let t: f64 = if comb.lattice {
            // reduce each term mod 1 so large integer positions keep their phase
            p.pos.iter().zip(xi).map(|(x, k)| { let v = x * k; v - v.floor() }).sum()
        } else {
            p.pos.iter().zip(xi).map(|(x, k)| x * k).sum()
        };
        acc += p.weight * phase(t);
    }
    acc / comb.volume()
}

pub fn intensity_of(comb: &WeightedComb, xi: &[f64]) -> f64 {
    fourier_coefficient(comb, xi).norm_sqr()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntensityEntry {
    pub xi: Vec<f64>,
    /// `(window volume, intensity)`.
    pub values: Vec<(f64, f64)>,
    pub gaps: Vec<f64>,
    pub converged: bool,
}

/// Intensity at `xi` over a growing family of combs.
pub fn intensity(combs: &[WeightedComb], xi: &[f64]) -> Result<IntensityEntry> {
    if combs.len() < 3 {
        return Err(Error::InvalidArgument("need at least three windows".into()));
    }
    let values: Vec<(f64, f64)> = combs.iter().map(|c| (c.volume(), intensity_of(c, xi))).collect();
    if values.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidArgument("windows must increase".into()));
    }
    let gaps: Vec<f64> = values.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    Ok(IntensityEntry {
        xi: xi.to_vec(),
        converged: gaps.iter().all(|&g| g <= 1e-3),
        values,
        gaps,
    })
}

/// Prefix windows `[0, N)^d` cut from the rule's fixed point (words),
/// a large superblock (blocks), or the tiling by tile lengths (inflation,
/// where `N` counts tiles).
pub fn window_combs(rule: &RuleSpec, weights: &[Complex64], windows: &[usize], limits: &Limits) -> Result<Vec<WeightedComb>> {
    let max = windows.iter().copied().max().unwrap_or(0);
    if max == 0 {
        return Err(Error::InvalidArgument("need at least one positive window".into()));
    }
    match &rule.body {
        RuleBody::Symbolic(_) => {
            let word = sample_word(rule, max, limits)?;
            windows
                .iter()
                .map(|&n| comb_from_patch(PatchRef::Word(&Word(word[..n].to_vec())), weights))
                .collect()
        }
        RuleBody::Inflation(_) => {
            let lengths = crate::transition::tile_volumes(rule)?;
            let word = sample_word(rule, max, limits)?;
            windows
                .iter()
                .map(|&n| {
                    let p = IntervalPatch::from_word(&word[..n], &lengths);
                    comb_from_patch(PatchRef::Interval(&p), weights)
                })
                .collect()
        }
        RuleBody::Block(_) => {
            let sub = rule.constant_length()?;
            let min_side = sub.size().iter().copied().min().unwrap_or(2);
            let mut level = 0;
            let mut side = 1usize;
            while side < max {
                side = side.saturating_mul(min_side);
                level += 1;
            }
            let block = superblock(rule, 0, level, limits)?;
            windows
                .iter()
                .map(|&n| {
                    let cells: Vec<usize> = (0..block.volume())
                        .filter(|&i| block.coord(i).iter().all(|&c| c < n))
                        .collect();
                    let points = cells
                        .iter()
                        .map(|&i| {
                            Ok(Scatterer {
                                pos: block.coord(i).into_iter().map(|c| c as f64).collect(),
                                weight: weight(weights, block.cells[i])?,
                            })
                        })
                        .collect::<Result<_>>()?;
                    WeightedComb::new(block.dim(), points, vec![(0.0, n as f64); block.dim()], true)
                })
                .collect()
        }
        _ => Err(rule.wrong_kind("symbolic, inflation or block")),
    }
}

/// Intensities on the grid `ξ = (u/g, v/g)` over a 2-D superblock.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityImage {
    pub grid: usize,
    /// Row-major, `v` selects the row.
    pub intensities: Vec<f64>,
    pub window: usize,
}

impl IntensityImage {
    pub fn max(&self) -> f64 {
        self.intensities.iter().copied().fold(0.0, f64::max)
    }

    /// Share of the total carried by the `k` brightest pixels.
    pub fn top_share(&self, k: usize) -> f64 {
        let mut v = self.intensities.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        let total: f64 = v.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        v.iter().take(k).sum::<f64>() / total
    }

    /// `round(255 · (I / I_max)^gamma)` per pixel.
    pub fn pixels(&self, gamma: f64) -> Vec<u8> {
        let max = self.max();
        self.intensities
            .iter()
            .map(|&i| {
                if max <= 0.0 {
                    0
                } else {
                    (255.0 * (i / max).powf(gamma)).round().clamp(0.0, 255.0) as u8
                }
            })
            .collect()
    }
}

fn twiddles(g: usize) -> Vec<Complex64> {
    (0..g)
        .map(|k| {
            let (s, c) = (std::f64::consts::TAU * k as f64 / g as f64).sin_cos();
            Complex64::new(c, -s)
        })
        .collect()
}

/// Separable direct DFT of the level-`n` superblock of the first letter.
pub fn diffraction_image(rule: &RuleSpec, weights: &[Complex64], level: usize, grid: usize, limits: &Limits) -> Result<IntensityImage> {
    if rule.dim != 2 || !matches!(rule.body, RuleBody::Block(_)) {
        return Err(rule.wrong_kind("two-dimensional block"));
    }
    if grid == 0 || grid > 2048 {
        return Err(Error::InvalidArgument(format!("grid {grid} outside 1..=2048")));
    }
    let block = superblock(rule, 0, level, limits)?;
    let (w, h) = (block.extents[0], block.extents[1]);
    let vals: Vec<Complex64> = block
        .cells
        .iter()
        .map(|&a| weight(weights, a))
        .collect::<Result<_>>()?;
    let tw = twiddles(grid);
    // rows[y][u] = Σ_x w(x, y) e(−u x / g)
    let rows: Vec<Vec<Complex64>> = (0..h)
        .into_par_iter()
        .map(|y| {
            (0..grid)
                .map(|u| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for x in 0..w {
                        acc += vals[x + w * y] * tw[(u * x) % grid];
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let vol = (w * h) as f64;
    let intensities: Vec<f64> = (0..grid * grid)
        .into_par_iter()
        .map(|idx| {
            let (u, v) = (idx % grid, idx / grid);
            let mut acc = Complex64::new(0.0, 0.0);
            for (y, row) in rows.iter().enumerate() {
                acc += row[u] * tw[(v * y) % grid];
            }
            (acc / vol).norm_sqr()
        })
        .collect();
    Ok(IntensityImage {
        grid,
        intensities,
        window: w.max(h),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Peak {
    pub xi: Vec<f64>,
    /// Numerators `c_i` of `ξ_i = c_i / l_i^k`.
    pub numerators: Vec<u64>,
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakScan {
    pub level: usize,
    pub k: usize,
    pub threshold: f64,
    /// `(mean |w|)²`: the intensity if every phase were aligned.
    pub i_max: f64,
    pub peaks: Vec<Peak>,
}

/// Exponential sums `F_a^{(n)}(ξ)` of the level-`n` supertiles at the
/// candidate with numerators `c` over denominators `l_i^k`, by
/// `F_a^{(n)} = Σ_j e(−ξ·(j ∘ l^{n−1})) F_{σ(a)_j}^{(n−1)}`.
fn supertile_sums(sub: &crate::rulespec::BlockSubstitution, weights: &[Complex64], level: usize, k: usize, c: &[u64]) -> Vec<Complex64> {
    let size = sub.size();
    let d = size.len();
    let local = Block {
        extents: size.to_vec(),
        cells: Vec::new(),
    };
    let coords: Vec<Vec<usize>> = (0..sub.volume()).map(|j| local.coord(j)).collect();
    let dens: Vec<u128> = size.iter().map(|&l| (l as u128).pow(k as u32)).collect();
    let mut f: Vec<Complex64> = weights.to_vec();
    let mut scale: Vec<u128> = vec![1; d]; // l_i^{n-1} mod den_i
    for _ in 0..level {
        let phases: Vec<Complex64> = coords
            .iter()
            .map(|jj| {
                let t: f64 = (0..d)
                    .map(|i| {
                        let num = (c[i] as u128 * jj[i] as u128 % dens[i]) * scale[i] % dens[i];
                        num as f64 / dens[i] as f64
                    })
                    .sum();
                phase(t)
            })
            .collect();
        f = (0..weights.len())
            .map(|a| {
                sub.block(a as Letter)
                    .iter()
                    .zip(&phases)
                    .map(|(&b, p)| f[b as usize] * p)
                    .sum()
            })
            .collect();
        for i in 0..d {
            scale[i] = scale[i] * size[i] as u128 % dens[i];
        }
    }
    f
}

/// Intensities of the level-`level` supertile of the first letter at all
/// candidates `ξ_i = c_i / l_i^k`; returns those above `threshold · I_max`,
/// brightest first.
pub fn peak_scan(rule: &RuleSpec, weights: &[Complex64], level: usize, k: usize, threshold: f64) -> Result<PeakScan> {
    if k > level {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds level {level}")));
    }
    let sub = rule.constant_length()?;
    if weights.len() != rule.alphabet.len() {
        return Err(Error::InvalidArgument("one weight per symbol required".into()));
    }
    let dens: Vec<u64> = sub
        .size()
        .iter()
        .map(|&l| (l as u64).checked_pow(k as u32))
        .collect::<Option<_>>()
        .ok_or_else(|| Error::InvalidArgument("candidate denominator overflows".into()))?;
    let total: u64 = dens.iter().product();
    if total > 1 << 24 {
        return Err(Error::InvalidArgument(format!("{total} candidates is too many")));
    }
    let vol: f64 = sub.size().iter().map(|&l| (l as f64).powi(level as i32)).product();
    // mean |w| over the supertile, from exact letter counts
    let counts = crate::transition::matrix_product(rule, 0, level.max(1))?;
    let counts = if level == 0 { crate::transition::TransitionMatrix::identity(weights.len()) } else { counts };
    let mean_abs: f64 = (0..weights.len())
        .map(|a| num_traits::ToPrimitive::to_f64(counts.get(a, 0)).unwrap_or(0.0) * weights[a].norm())
        .sum::<f64>()
        / vol;
    let i_max = mean_abs * mean_abs;
    let mut peaks: Vec<Peak> = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let mut rest = idx;
            let c: Vec<u64> = dens
                .iter()
                .map(|&q| {
                    let v = rest % q;
                    rest /= q;
                    v
                })
                .collect();
            let f = supertile_sums(&sub, weights, level, k, &c)[0];
            let intensity = (f / vol).norm_sqr();
            (intensity > threshold * i_max).then(|| Peak {
                xi: c.iter().zip(&dens).map(|(&a, &q)| a as f64 / q as f64).collect(),
                numerators: c,
                intensity,
            })
        })
        .collect();
    peaks.sort_by(|a, b| b.intensity.total_cmp(&a.intensity).then(a.numerators.cmp(&b.numerators)));
    Ok(PeakScan {
        level,
        k,
        threshold,
        i_max,
        peaks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulespec::parse_rule_file;

    fn rule(text: &str) -> RuleSpec {
        parse_rule_file(text).unwrap()
    }
    fn tm() -> RuleSpec {
        rule("rule tm\nkind symbolic\ndim 1\nalphabet 0 1\nmap 0 -> 0 1\nmap 1 -> 1 0\n")
    }
    fn period2() -> RuleSpec {
        rule("rule p2\nkind symbolic\ndim 1\nalphabet a b\nmap a -> a b\nmap b -> a b\n")
    }
    fn pm() -> Vec<Complex64> {
        vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]
    }

    #[test]
    fn weights_parse() {
        let r = tm();
        let w = parse_weights("0=1,1=-1", &r.alphabet).unwrap();
        assert_eq!(w, pm());
        let w = parse_weights("0=1+2i, 1=-0.5i", &r.alphabet).unwrap();
        assert_eq!(w, vec![Complex64::new(1.0, 2.0), Complex64::new(0.0, -0.5)]);
        let w = parse_weights("1=1e-3-1e2i", &r.alphabet).unwrap();
        assert_eq!(w[1], Complex64::new(1e-3, -1e2));
        assert_eq!(w[0], Complex64::new(0.0, 0.0));
        assert!(parse_weights("2=1", &r.alphabet).is_err());
        assert!(parse_weights("0=x", &r.alphabet).is_err());
    }

    #[test]
    fn combs() {
        let r = period2();
        let c = comb_from_patch(PatchRef::Word(&Word(vec![0, 1])), &pm()).unwrap();
        assert_eq!(c.points[0].pos, vec![0.0]);
        assert_eq!(c.points[1].weight, Complex64::new(-1.0, 0.0));
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let p = IntervalPatch::from_word(&[0, 1, 0], &[phi, 1.0]);
        let c = comb_from_patch(PatchRef::Interval(&p), &pm()).unwrap();
        let xs: Vec<f64> = c.points.iter().map(|s| s.pos[0]).collect();
        assert_eq!(xs, vec![0.0, phi, phi + 1.0]);
        assert!(comb_from_patch(PatchRef::Word(&Word(vec![])), &pm()).is_err());
        let _ = r;
    }

    #[test]
    fn periodic_correlations() {
        let r = period2();
        let l = Limits::default();
        for n in [2usize, 64, 1000] {
            assert_eq!(correlation(&r, &pm(), 1, n, &l).unwrap(), Complex64::new(-1.0, 0.0));
            assert_eq!(correlation(&r, &pm(), 2, n, &l).unwrap(), Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn correlation_symmetry() {
        let l = Limits::default();
        let w = vec![Complex64::new(1.0, 0.5), Complex64::new(-0.25, 2.0)];
        let t = correlation_table(&tm(), &w, 5, 4096, &l).unwrap();
        for k in 1..=5 {
            assert!((t.get(-k).unwrap() - t.get(k).unwrap().conj()).norm() < 1e-12);
            assert!(t.get(k).unwrap().norm() <= t.get(0).unwrap().norm() + 1e-12);
        }
    }

    #[test]
    fn autocorrelation_matches_correlation() {
        let r = tm();
        let l = Limits::default();
        let n = 4096;
        let word = sample_word(&r, n + 4, &l).unwrap();
        let comb = comb_from_patch(PatchRef::Word(&word), &pm())
            .unwrap()
            .with_window(vec![(0.0, n as f64)])
            .unwrap();
        let a = autocorrelation(&comb, 4.0);
        for k in 0..=4i64 {
            let c = correlation(&r, &pm(), k, n, &l).unwrap();
            assert!((a.at(&[k as f64]).unwrap() - c).norm() < 1e-9, "k = {k}");
        }
        let single = WeightedComb::new(1, vec![Scatterer { pos: vec![3.0], weight: Complex64::new(2.0, 0.0) }], vec![(3.0, 4.0)], true).unwrap();
        let a = autocorrelation(&single, 5.0);
        assert_eq!(a.atoms.len(), 1);
        assert_eq!(a.atoms[0].1, Complex64::new(4.0, 0.0));
    }

    #[test]
    fn lattice_autocorrelation_edge_deficit() {
        let n = 100;
        let a = autocorrelation(&WeightedComb::lattice_1d(n), 5.0);
        for (z, v) in &a.atoms {
            assert!((v.re - 1.0).abs() <= z[0].abs() / n as f64 + 1e-12);
        }
    }

    #[test]
    fn lattice_intensities() {
        for n in [256usize, 512, 1024] {
            let c = WeightedComb::lattice_1d(n);
            assert!((intensity_of(&c, &[0.0]) - 1.0).abs() < 1e-12);
            assert!(intensity_of(&c, &[0.5]) < 1e-12);
            // ξ and ξ + 1 agree exactly on integer positions
            assert!((intensity_of(&c, &[0.3]) - intensity_of(&c, &[1.3])).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_word_peak() {
        let r = period2();
        let combs = window_combs(&r, &pm(), &[256, 512, 1024], &Limits::default()).unwrap();
        let e = intensity(&combs, &[0.5]).unwrap();
        for (_, i) in &e.values {
            assert!((i - 1.0).abs() < 1e-12);
        }
        let s = peak_scan(&r, &pm(), 10, 10, 0.01).unwrap();
        assert_eq!(s.peaks.len(), 1);
        assert_eq!(s.peaks[0].xi, vec![0.5]);
        assert!((s.peaks[0].intensity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wiener_consistency() {
        // |c^ξ|² equals (1/V) Σ_z γ(z) e(−ξz) with γ from all differences
        let r = tm();
        let word = sample_word(&r, 512, &Limits::default()).unwrap();
        let w = vec![Complex64::new(1.0, 0.0), Complex64::new(-0.5, 0.0)];
        let comb = comb_from_patch(PatchRef::Word(&word), &w).unwrap();
        let gamma = autocorrelation(&comb, 512.0);
        for xi in [0.0, 0.1, 1.0 / 3.0, 0.5] {
            let direct = intensity_of(&comb, &[xi]);
            let via: Complex64 = gamma.atoms.iter().map(|(z, v)| v * phase(z[0] * xi)).sum::<Complex64>() / comb.volume();
            assert!((direct - via.re).abs() < 1e-6 && via.im.abs() < 1e-6);
        }
    }

    #[test]
    fn peak_scan_matches_direct_sums() {
        let r = tm();
        let level = 8;
        let word = crate::supertile::superword(&r, 0, level, &Limits::default()).unwrap();
        let comb = comb_from_patch(PatchRef::Word(&word), &pm()).unwrap();
        let s = peak_scan(&r, &pm(), level, 4, 0.0).unwrap();
        for p in &s.peaks {
            assert!((p.intensity - intensity_of(&comb, &p.xi)).abs() < 1e-12);
        }
    }

    #[test]
    fn image_pixels() {
        let tm2d = rule("rule tm2d\nkind block\ndim 2\nalphabet 0 1\nsize 2 2\nblock 0:\n0 1\n1 0\nblock 1:\n1 0\n0 1\n");
        let ones = vec![Complex64::new(1.0, 0.0); 2];
        let img = diffraction_image(&tm2d, &ones, 3, 16, &Limits::default()).unwrap();
        assert!((img.intensities[0] - 1.0).abs() < 1e-12);
        assert_eq!(img.pixels(0.5)[0], 255);
        // the raster agrees with direct sums
        let b = superblock(&tm2d, 0, 3, &Limits::default()).unwrap();
        let comb = comb_from_patch(PatchRef::Block(&b), &pm()).unwrap();
        let img = diffraction_image(&tm2d, &pm(), 3, 16, &Limits::default()).unwrap();
        for (u, v) in [(1usize, 0usize), (3, 5), (8, 8), (15, 2)] {
            let direct = intensity_of(&comb, &[u as f64 / 16.0, v as f64 / 16.0]);
            assert!((img.intensities[v * 16 + u] - direct).abs() < 1e-12);
        }
    }
}
