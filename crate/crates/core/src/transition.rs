//! Transition matrices, primitivity, Perron data and frequencies.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::char_poly;
use crate::rulespec::{Letter, RuleBody, RuleSpec, TileLengths};
use crate::supertile::{
    fusion_supertile, fusion_volumes, level_patches, sadic_superword, superblock, superword,
    LatticePatch, Limits,
};

/// Non-negative integer matrix; entry `(i, j)` counts type-`i` constituents
/// of the type-`j` supertile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigUint>,
}

impl TransitionMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        TransitionMatrix {
            rows,
            cols,
            data: vec![BigUint::zero(); rows * cols],
        }
    }

    pub fn identity(m: usize) -> Self {
        let mut id = Self::zeros(m, m);
        for i in 0..m {
            id.data[i * m + i] = BigUint::one();
        }
        id
    }

    pub fn from_rows(rows: &[Vec<u64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, &x) in row.iter().enumerate() {
                m.data[i * c + j] = BigUint::from(x);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[BigUint] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> &BigUint {
        &self.data[i * self.cols + j]
    }

    fn add_to(&mut self, i: usize, j: usize, by: u64) {
        self.data[i * self.cols + j] += by;
    }

    pub fn column(&self, j: usize) -> Vec<BigUint> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.get(i, j).clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.data[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64) -> Self {
        assert!(self.is_square());
        let mut base = self.clone();
        let mut acc = Self::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn is_positive(&self) -> bool {
        self.data.iter().all(|x| !x.is_zero())
    }

    pub fn column_sums(&self) -> Vec<BigUint> {
        (0..self.cols).map(|j| self.column(j).into_iter().sum()).collect()
    }

    pub fn row_sums(&self) -> Vec<BigUint> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j)).sum())
            .collect()
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j).to_f64().unwrap_or(f64::INFINITY))
                    .collect()
            })
            .collect()
    }

    fn pattern(&self) -> Vec<Vec<bool>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| !self.get(i, j).is_zero()).collect())
            .collect()
    }
}

impl std::fmt::Display for TransitionMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Rows of numbers; entries beyond `u64` are written as decimal strings.
impl Serialize for TransitionMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Row<'a>(&'a [BigUint]);
        impl Serialize for Row<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut seq = s.serialize_seq(Some(self.0.len()))?;
                for x in self.0 {
                    match x.to_u64() {
                        Some(v) => seq.serialize_element(&v)?,
                        None => seq.serialize_element(&x.to_string())?,
                    }
                }
                seq.end()
            }
        }
        let mut seq = s.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            seq.serialize_element(&Row(&self.data[i * self.cols..(i + 1) * self.cols]))?;
        }
        seq.end()
    }
}

fn counts_matrix(images: &[Vec<Letter>], m: usize) -> TransitionMatrix {
    let mut t = TransitionMatrix::zeros(m, images.len());
    for (j, w) in images.iter().enumerate() {
        for &a in w {
            t.add_to(a as usize, j, 1);
        }
    }
    t
}

/// Transition matrix of a rule. `level` selects the composition for fusion
/// rules (`M_{n−1,n}`, `level ≥ 1`) and the directive entry `σ_{level−1}`
/// for S-adic rules; other kinds ignore it.
pub fn transition_matrix(rule: &RuleSpec, level: usize) -> Result<TransitionMatrix> {
    let m = rule.alphabet.len();
    match &rule.body {
        RuleBody::Symbolic(_) | RuleBody::Inflation(_) => {
            Ok(counts_matrix(rule.substitution()?.images(), m))
        }
        RuleBody::Block(_) => Ok(counts_matrix(rule.constant_length()?.blocks(), m)),
        RuleBody::Fusion(s) => {
            let lv = s.level(level).ok_or(Error::LevelOutOfRange {
                level,
                max: s.max_level().unwrap_or(usize::MAX),
            })?;
            let prev = if level == 1 {
                m
            } else {
                s.level(level - 1).unwrap().supertiles.len()
            };
            let mut t = TransitionMatrix::zeros(prev, lv.supertiles.len());
            for (j, st) in lv.supertiles.iter().enumerate() {
                for p in &st.placements {
                    if p.constituent >= prev {
                        return Err(Error::Invalid(format!(
                            "supertile `{}` uses an undefined constituent",
                            st.name
                        )));
                    }
                    t.add_to(p.constituent, j, 1);
                }
            }
            Ok(t)
        }
        RuleBody::Sadic(s) => {
            let sub = level
                .checked_sub(1)
                .and_then(|n| s.substitution(n))
                .ok_or(Error::LevelOutOfRange {
                    level,
                    max: s.prefix.len(),
                })?;
            Ok(counts_matrix(sub.images(), m))
        }
        RuleBody::VectorFusion(v) => {
            // A' = A ∪ (B+k) ∪ (B+l) and symmetrically for B'
            let mut t = TransitionMatrix::zeros(m, m);
            let (a, b) = (v.seeds[0] as usize, v.seeds[1] as usize);
            t.add_to(a, a, 1);
            t.add_to(b, a, 2);
            t.add_to(b, b, 1);
            t.add_to(a, b, 2);
            Ok(t)
        }
    }
}

/// `M_{n,N} = M_{n,n+1} ⋯ M_{N−1,N}`; single-matrix rules give `M^{N−n}`.
pub fn matrix_product(rule: &RuleSpec, n: usize, big_n: usize) -> Result<TransitionMatrix> {
    if n >= big_n {
        return Err(Error::InvalidArgument(format!("need n < N, got n={n}, N={big_n}")));
    }
    match &rule.body {
        RuleBody::Fusion(_) | RuleBody::Sadic(_) => {
            let mut acc = transition_matrix(rule, n + 1)?;
            for k in n + 2..=big_n {
                acc = acc.mul(&transition_matrix(rule, k)?);
            }
            Ok(acc)
        }
        _ => Ok(transition_matrix(rule, 1)?.pow((big_n - n) as u64)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Primitivity {
    /// Some power (or product of this length) is strictly positive.
    Primitive(usize),
    NotPrimitive,
    /// No positive product found within the horizon.
    Undetermined(usize),
}

impl Primitivity {
    pub fn verdict(&self) -> &'static str {
        match self {
            Primitivity::Primitive(_) => "primitive",
            Primitivity::NotPrimitive => "not_primitive",
            Primitivity::Undetermined(_) => "undetermined",
        }
    }
}

impl Serialize for Primitivity {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = s.serialize_map(Some(2))?;
        map.serialize_entry("verdict", self.verdict())?;
        match self {
            Primitivity::Primitive(n) => map.serialize_entry("N", n)?,
            Primitivity::Undetermined(h) => map.serialize_entry("horizon", h)?,
            Primitivity::NotPrimitive => {}
        }
        map.end()
    }
}

fn bool_mul(a: &[Vec<bool>], b: &[Vec<bool>]) -> Vec<Vec<bool>> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().enumerate().any(|(k, &x)| x && b[k][j]))
                .collect()
        })
        .collect()
}

/// Smallest `N ≤ (m−1)²+1` with `M^N > 0`, if any.
pub fn primitive_exponent(m: &TransitionMatrix) -> Option<usize> {
    if !m.is_square() || m.rows() == 0 {
        return None;
    }
    let k = m.rows();
    let bound = (k - 1) * (k - 1) + 1;
    let p = m.pattern();
    let mut acc = p.clone();
    for n in 1..=bound {
        if acc.iter().flatten().all(|&x| x) {
            return Some(n);
        }
        acc = bool_mul(&acc, &p);
    }
    None
}

/// Strong connectivity of the graph `i → j` whenever `M_ij > 0`.
pub fn is_irreducible(m: &TransitionMatrix) -> bool {
    if !m.is_square() || m.rows() == 0 {
        return false;
    }
    let k = m.rows();
    if k == 1 {
        return !m.get(0, 0).is_zero();
    }
    let p = m.pattern();
    let reach = |forward: bool| {
        let mut seen = vec![false; k];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..k {
                let edge = if forward { p[i][j] } else { p[j][i] };
                if edge && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|x| x)
    };
    reach(true) && reach(false)
}

/// Primitivity of a rule. Single-matrix rules are decided by the Wielandt
/// bound. Fusion rules with a repeated level and eventually periodic S-adic
/// rules are decided on one period; other fusion scripts are only searched
/// up to `horizon`.
pub fn is_primitive(rule: &RuleSpec, horizon: usize) -> Result<Primitivity> {
    match &rule.body {
        RuleBody::Fusion(s) => {
            let depth = s.scripted_depth();
            if !s.repeat {
                return Ok(Primitivity::Undetermined(horizon));
            }
            let r = transition_matrix(rule, depth)?;
            let Some(e) = (r.is_square()).then(|| primitive_exponent(&r)).flatten() else {
                return Ok(Primitivity::NotPrimitive);
            };
            // M_{n,depth} R^k is positive for large k iff no row of M_{n,depth} vanishes
            let mut worst = e;
            for n in 0..depth {
                let head = if n + 1 == depth {
                    TransitionMatrix::identity(r.rows())
                } else {
                    matrix_product(rule, n, depth - 1)?
                };
                let mut acc = head.mul(&transition_matrix(rule, depth)?);
                let mut found = None;
                for k in 1..=e + 1 {
                    if acc.is_positive() {
                        found = Some(depth - n - 1 + k);
                        break;
                    }
                    acc = acc.mul(&r);
                }
                match found {
                    Some(len) => worst = worst.max(len),
                    None => return Ok(Primitivity::NotPrimitive),
                }
            }
            Ok(Primitivity::Primitive(worst))
        }
        RuleBody::Sadic(s) => {
            if s.cycle.is_empty() {
                return Ok(Primitivity::Undetermined(horizon));
            }
            let m = rule.alphabet.len();
            let alive = |level: usize| -> Vec<usize> {
                match level.checked_sub(1).and_then(|n| s.substitution(n)) {
                    None => (0..m).collect(),
                    Some(sub) => sub.domain().map(|a| a as usize).collect(),
                }
            };
            let period_end = s.prefix.len() + s.cycle.len();
            let reach = horizon.max(2 * period_end + m * m);
            let mut worst = 0;
            for n in 0..period_end {
                let rows = alive(n);
                let mut acc = transition_matrix(rule, n + 1)?;
                let mut found = None;
                for big_n in n + 1..=n + reach {
                    if big_n > n + 1 {
                        acc = acc.mul(&transition_matrix(rule, big_n)?);
                    }
                    let cols = alive(big_n);
                    if rows.iter().all(|&i| cols.iter().all(|&j| !acc.get(i, j).is_zero())) {
                        found = Some(big_n - n);
                        break;
                    }
                }
                match found {
                    Some(len) => worst = worst.max(len),
                    None => return Ok(Primitivity::Undetermined(reach)),
                }
            }
            Ok(Primitivity::Primitive(worst))
        }
        _ => {
            let m = transition_matrix(rule, 1)?;
            Ok(match primitive_exponent(&m) {
                Some(n) => Primitivity::Primitive(n),
                None => Primitivity::NotPrimitive,
            })
        }
    }
}

/// Perron eigenvalue with positive eigenvectors, `Σ r = 1` and `l·r = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerronData {
    pub theta: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// Larger of the two relative eigen-residuals.
    pub residual: f64,
}

const MAX_ITER: usize = 100_000;

fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

fn rel_residual(a: &[Vec<f64>], x: &[f64], theta: f64) -> f64 {
    let ax = mat_vec(a, x);
    let scale = theta * x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    ax.iter()
        .zip(x)
        .map(|(p, q)| (p - theta * q).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Power iteration on `a + shift·I` from the uniform vector.
fn power_iteration(a: &[Vec<f64>], shift: f64) -> (f64, Vec<f64>, f64) {
    let m = a.len();
    let mut x = vec![1.0 / m as f64; m];
    let mut theta = 0.0;
    let mut best = (f64::INFINITY, x.clone(), 0.0);
    for _ in 0..MAX_ITER {
        let mut y = mat_vec(a, &x);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += shift * xi;
        }
        let s: f64 = y.iter().sum();
        theta = s - shift;
        for v in y.iter_mut() {
            *v /= s;
        }
        x = y;
        let res = rel_residual(a, &x, theta);
        if res < best.0 {
            best = (res, x.clone(), theta);
        }
        if res <= 1e-14 {
            break;
        }
    }
    let _ = theta;
    (best.2, best.1, best.0)
}

/// Normalized positive generator of `ker(M − tI)` when it is one-dimensional.
fn integer_eigenvector(m: &TransitionMatrix, t: &num_bigint::BigInt) -> Option<Vec<f64>> {
    use num_traits::Signed;
    let n = m.rows();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let v = num_bigint::BigInt::from(m.get(i, j).clone()) - if i == j { t.clone() } else { 0.into() };
                    BigRational::from_integer(v)
                })
                .collect()
        })
        .collect();
    // reduced row echelon form
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for v in a[row].iter_mut() {
            *v = &*v * &inv;
        }
        for r in 0..n {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..n {
                    let d = &f * &a[row][c];
                    a[r][c] -= d;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    if pivots.len() + 1 != n {
        return None;
    }
    let free = (0..n).find(|c| !pivots.contains(c))?;
    let mut v = vec![BigRational::zero(); n];
    v[free] = BigRational::one();
    for (r, &c) in pivots.iter().enumerate() {
        v[c] = -a[r][free].clone();
    }
    let sum: BigRational = v.iter().sum();
    if sum.is_zero() {
        return None;
    }
    let v: Vec<BigRational> = v.into_iter().map(|x| x / &sum).collect();
    if v.iter().any(|x| !x.is_positive()) {
        return None;
    }
    v.iter().map(|x| x.to_f64()).collect()
}

pub fn perron_data(m: &TransitionMatrix) -> Result<PerronData> {
    if !is_irreducible(m) {
        return Err(Error::NotIrreducible);
    }
    let a = m.to_f64();
    let at = m.transpose().to_f64();
    // an imprimitive matrix has other eigenvalues of modulus θ; the shift
    // by I leaves θ + 1 strictly dominant
    let shift = if primitive_exponent(m).is_some() { 0.0 } else { 1.0 };
    let (mut theta, mut right, res_r) = power_iteration(&a, shift);
    let (_, mut left, res_l) = power_iteration(&at, shift);
    let residual = res_r.max(res_l);
    if !(residual <= 1e-9) {
        return Err(Error::NoConvergence { residual });
    }
    let near = theta.round();
    if (theta - near).abs() < 1e-6 * theta.max(1.0) && near >= 1.0 {
        let t = num_bigint::BigInt::from(near as u64);
        if char_poly(m).eval(&t).is_zero() {
            theta = near;
            // integer θ: eigenvectors are rational, take them exactly
            if let (Some(r), Some(l)) = (integer_eigenvector(m, &t), integer_eigenvector(&m.transpose(), &t)) {
                right = r;
                left = l;
            }
        }
    }
    let s: f64 = right.iter().sum();
    right.iter_mut().for_each(|v| *v /= s);
    let lr: f64 = left.iter().zip(&right).map(|(p, q)| p * q).sum();
    left.iter_mut().for_each(|v| *v /= lr);
    Ok(PerronData {
        theta,
        left,
        right,
        residual,
    })
}

fn single_matrix(rule: &RuleSpec) -> Result<TransitionMatrix> {
    match rule.body {
        RuleBody::Fusion(_) | RuleBody::Sadic(_) => {
            Err(rule.wrong_kind("symbolic, inflation, block or vector-fusion"))
        }
        _ => transition_matrix(rule, 1),
    }
}

fn primitive_matrix(rule: &RuleSpec) -> Result<TransitionMatrix> {
    let m = single_matrix(rule)?;
    if primitive_exponent(&m).is_none() {
        return Err(Error::NotPrimitive);
    }
    Ok(m)
}

/// Left Perron eigenvector scaled so the shortest tile has length 1.
pub fn natural_lengths(rule: &RuleSpec) -> Result<Vec<f64>> {
    let p = perron_data(&primitive_matrix(rule)?)?;
    let min = p.left.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(p.left.iter().map(|v| v / min).collect())
}

/// Per-letter volumes: explicit or natural lengths for inflation rules,
/// unit cells otherwise.
pub fn tile_volumes(rule: &RuleSpec) -> Result<Vec<f64>> {
    match &rule.body {
        RuleBody::Inflation(r) => match &r.lengths {
            TileLengths::Auto => natural_lengths(rule),
            TileLengths::Explicit(v) => v
                .iter()
                .map(|x| x.ok_or_else(|| Error::Invalid("missing tile length".into())))
                .collect(),
        },
        _ => Ok(vec![1.0; rule.alphabet.len()]),
    }
}

/// Frequencies per unit volume from the right Perron eigenvector, scaled
/// so that `Σ freq_i · vol_i = 1`.
pub fn letter_frequencies(rule: &RuleSpec) -> Result<Vec<f64>> {
    let p = perron_data(&primitive_matrix(rule)?)?;
    let vol = tile_volumes(rule)?;
    let s: f64 = p.right.iter().zip(&vol).map(|(r, v)| r * v).sum();
    Ok(p.right.iter().map(|r| r / s).collect())
}

/// Letter counts of the level-`n` supertile of `seed` divided by its volume.
pub fn empirical_frequencies(rule: &RuleSpec, seed: Letter, n: usize, limits: &Limits) -> Result<Vec<f64>> {
    let m = rule.alphabet.len();
    let counts: Vec<u64> = match &rule.body {
        RuleBody::Symbolic(_) | RuleBody::Inflation(_) => superword(rule, seed, n, limits)?.counts(m),
        RuleBody::Sadic(_) => sadic_superword(rule, seed, n, limits)?.counts(m),
        RuleBody::Block(_) => {
            let b = superblock(rule, seed, n, limits)?;
            let mut c = vec![0u64; m];
            for &a in &b.cells {
                c[a as usize] += 1;
            }
            c
        }
        RuleBody::Fusion(_) | RuleBody::VectorFusion(_) => {
            let name = match &rule.body {
                RuleBody::Fusion(_) => crate::supertile::fusion_type_names(rule, n)?
                    .get(seed as usize)
                    .cloned()
                    .ok_or(Error::BadSymbol(seed as usize))?,
                _ => rule.alphabet.symbol(seed).to_string(),
            };
            fusion_supertile(rule, &name, n, limits)?.counts(m)
        }
    };
    let vol = match rule.body {
        RuleBody::Inflation(_) => tile_volumes(rule)?,
        _ => vec![1.0; m],
    };
    if vol.iter().all(|&v| v == 1.0) {
        let total: u64 = counts.iter().sum();
        return Ok(counts
            .iter()
            .map(|&c| {
                BigRational::new(c.into(), total.into())
                    .to_f64()
                    .unwrap_or(f64::NAN)
            })
            .collect());
    }
    let total: f64 = counts.iter().zip(&vol).map(|(&c, v)| c as f64 * v).sum();
    Ok(counts.iter().map(|&c| c as f64 / total).collect())
}

/// Volume-normalized frequencies of the level-`n` supertiles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelFrequencies {
    pub n: usize,
    pub rho: Vec<f64>,
    /// Largest sup-norm difference between the estimates from different seeds.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencySequence {
    pub depth: usize,
    pub levels: Vec<LevelFrequencies>,
    /// Seed types at the deepest level whose columns entered the spread.
    pub seeds: Vec<usize>,
    /// Spread at level 0 is below 1e-6.
    pub unique_measure_evidence: bool,
}

impl FrequencySequence {
    pub fn rho(&self, n: usize) -> Option<&[f64]> {
        self.levels.get(n).map(|l| l.rho.as_slice())
    }

    pub fn spread_by_level(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.spread).collect()
    }
}

fn ratio(num: &BigUint, den: &BigUint) -> f64 {
    BigRational::new(num.clone().into(), den.clone().into())
        .to_f64()
        .unwrap_or(f64::NAN)
}

fn sequence_at(rule: &RuleSpec, depth: usize) -> Result<FrequencySequence> {
    let vols = fusion_volumes(rule, depth)?;
    let top = &vols[depth];
    let max_vol = top.iter().max().cloned().unwrap_or_default();
    // seeds whose supertiles keep growing; a fixed spacer like Chacon's `b`
    // stays a single cell and carries no limiting information
    let seeds: Vec<usize> = (0..top.len())
        .filter(|&j| &top[j] * &top[j] >= max_vol)
        .collect();
    let main = (0..top.len()).find(|&j| top[j] == max_vol).unwrap_or(0);
    let mut levels = Vec::with_capacity(depth);
    let mut product = TransitionMatrix::identity(top.len());
    let mut rows: Vec<LevelFrequencies> = Vec::new();
    for n in (0..depth).rev() {
        product = transition_matrix(rule, n + 1)?.mul(&product);
        let est = |j: usize| -> Vec<f64> {
            product.column(j).iter().map(|c| ratio(c, &top[j])).collect()
        };
        let cols: Vec<Vec<f64>> = seeds.iter().map(|&j| est(j)).collect();
        let mut spread = 0.0f64;
        for a in 0..cols.len() {
            for b in a + 1..cols.len() {
                for (x, y) in cols[a].iter().zip(&cols[b]) {
                    spread = spread.max((x - y).abs());
                }
            }
        }
        rows.push(LevelFrequencies {
            n,
            rho: est(main),
            spread,
        });
    }
    rows.reverse();
    levels.extend(rows);
    let unique = levels.first().is_none_or(|l| l.spread <= 1e-6);
    Ok(FrequencySequence {
        depth,
        levels,
        seeds,
        unique_measure_evidence: unique,
    })
}

/// Approximates `ρ_n` for `n < depth` by the normalized columns of `M_{n,depth}`.
pub fn frequency_sequence(rule: &RuleSpec, depth: usize) -> Result<FrequencySequence> {
    if !matches!(rule.body, RuleBody::Fusion(_)) {
        return Err(rule.wrong_kind("fusion"));
    }
    if depth < 2 {
        return Err(Error::DepthTooShallow {
            depth,
            spread: f64::NAN,
        });
    }
    let seq = sequence_at(rule, depth)?;
    let prev = sequence_at(rule, depth - 1)?;
    let (s, p) = (seq.levels[0].spread, prev.levels[0].spread);
    if (s - p).abs() > f64::max(1e-6, 0.01 * s) {
        return Err(Error::DepthTooShallow { depth, spread: s });
    }
    Ok(seq)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatchFrequency {
    pub value: f64,
    /// `(n, Σ_i #(P in P_n(i)) ρ_n(i))` for the last three levels.
    pub partial_sums: Vec<(usize, f64)>,
    pub gap: f64,
}

/// Occurrences of `patch` (up to translation) inside `host`.
pub fn occurrences(patch: &LatticePatch, host: &LatticePatch) -> usize {
    let Some((anchor, &label)) = patch.cells.iter().next() else {
        return 0;
    };
    host.cells
        .iter()
        .filter(|(c, &a)| {
            a == label
                && patch.cells.iter().all(|(p, &b)| {
                    let q: Vec<i64> = p
                        .iter()
                        .zip(anchor)
                        .zip(c.iter())
                        .map(|((x, o), y)| x - o + y)
                        .collect();
                    host.cells.get(&q) == Some(&b)
                })
        })
        .count()
}

/// Frequency of `patch` from the partial sums at levels `depth−2..=depth`.
pub fn patch_frequency(
    rule: &RuleSpec,
    patch: &LatticePatch,
    depth: usize,
    tol: f64,
    limits: &Limits,
) -> Result<PatchFrequency> {
    let RuleBody::Fusion(s) = &rule.body else {
        return Err(rule.wrong_kind("fusion"));
    };
    if depth < 2 {
        return Err(Error::InvalidArgument("patch frequency needs depth ≥ 2".into()));
    }
    let horizon = match s.max_level() {
        Some(max) if max <= depth => {
            return Err(Error::LevelOutOfRange { level: depth + 1, max })
        }
        Some(max) => max.min(depth + 16),
        None => depth + 16,
    };
    let seq = frequency_sequence(rule, horizon)?;
    let patches = level_patches(rule, depth, limits)?;
    let mut partial_sums = Vec::with_capacity(3);
    for n in depth - 2..=depth {
        let rho = seq.rho(n).expect("horizon exceeds depth");
        let sum: f64 = patches[n]
            .iter()
            .zip(rho)
            .map(|(host, r)| occurrences(patch, host) as f64 * r)
            .sum();
        partial_sums.push((n, sum));
    }
    let value = partial_sums[2].1;
    let gap = (partial_sums[2].1 - partial_sums[1].1).abs();
    if gap > tol {
        return Err(Error::NotConverged { gap });
    }
    Ok(PatchFrequency {
        value,
        partial_sums,
        gap,
    })
}

/// Summary emitted by `tilespec matrix`/`freq`.
#[derive(Debug, Clone, Serialize)]
pub struct TransitionReport {
    pub matrix: TransitionMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub left: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub right: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub primitive: Primitivity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spread_by_level: Option<Vec<f64>>,
}

/// Gathers whatever applies to the rule's kind; `depth` drives the fusion
/// frequency sequence.
pub fn transition_report(rule: &RuleSpec, level: usize, depth: usize, horizon: usize) -> Result<TransitionReport> {
    let matrix = transition_matrix(rule, level.max(1))?;
    let primitive = is_primitive(rule, horizon)?;
    let mut report = TransitionReport {
        matrix: matrix.clone(),
        theta: None,
        left: None,
        right: None,
        residual: None,
        primitive,
        frequencies: None,
        spread_by_level: None,
    };
    if matrix.is_square() && is_irreducible(&matrix) {
        let p = perron_data(&matrix)?;
        report.theta = Some(p.theta);
        report.left = Some(p.left);
        report.right = Some(p.right);
        report.residual = Some(p.residual);
    }
    match rule.body {
        RuleBody::Fusion(_) => {
            let seq = frequency_sequence(rule, depth)?;
            report.frequencies = Some(seq.levels[0].rho.clone());
            report.spread_by_level = Some(seq.spread_by_level());
        }
        RuleBody::Sadic(_) => {}
        _ => {
            if matches!(primitive, Primitivity::Primitive(_)) {
                report.frequencies = Some(letter_frequencies(rule)?);
            }
        }
    }
    Ok(report)
}
