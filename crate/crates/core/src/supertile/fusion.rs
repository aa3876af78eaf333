use std::collections::{BTreeMap, HashSet, VecDeque};

use super::Limits;
use crate::error::{Error, Result};
use crate::rulespec::{Alphabet, FusionLevel, FusionScript, Letter, RuleBody, RuleSpec, VectorFusionRule};

/// Finite set of labelled unit cells in `Z^d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePatch {
    pub dim: usize,
    pub cells: BTreeMap<Vec<i64>, Letter>,
}

impl LatticePatch {
    pub fn empty(dim: usize) -> Self {
        LatticePatch {
            dim,
            cells: BTreeMap::new(),
        }
    }

    pub fn single(dim: usize, letter: Letter) -> Self {
        let mut cells = BTreeMap::new();
        cells.insert(vec![0; dim], letter);
        LatticePatch { dim, cells }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Per-axis `(min, max)` of occupied cells.
    pub fn bounds(&self) -> Option<Vec<(i64, i64)>> {
        if self.dim == 1 {
            let lo = self.cells.first_key_value()?.0[0];
            let hi = self.cells.last_key_value()?.0[0];
            return Some(vec![(lo, hi)]);
        }
        let mut it = self.cells.keys();
        let first = it.next()?;
        let mut b: Vec<(i64, i64)> = first.iter().map(|&c| (c, c)).collect();
        for k in it {
            for (bb, &c) in b.iter_mut().zip(k) {
                bb.0 = bb.0.min(c);
                bb.1 = bb.1.max(c);
            }
        }
        Some(b)
    }

    pub fn counts(&self, m: usize) -> Vec<u64> {
        let mut c = vec![0u64; m];
        for &a in self.cells.values() {
            c[a as usize] += 1;
        }
        c
    }

    /// Writes `other + offset` into `self`; returns the cells written twice.
    pub fn insert_translated(&mut self, other: &LatticePatch, offset: &[i64]) -> Vec<Vec<i64>> {
        let mut collisions = Vec::new();
        for (k, &a) in &other.cells {
            let key: Vec<i64> = k.iter().zip(offset).map(|(x, o)| x + o).collect();
            if self.cells.insert(key.clone(), a).is_some() {
                collisions.push(key);
            }
        }
        collisions
    }

    /// Union of translated patches; later parts win on overlap and the
    /// overlapping cells are returned.
    pub fn union_translated(dim: usize, parts: &[(&LatticePatch, &[i64])]) -> (LatticePatch, Vec<Vec<i64>>) {
        let total = parts.iter().map(|(p, _)| p.len()).sum();
        let mut cells: Vec<(Vec<i64>, Letter)> = Vec::with_capacity(total);
        for (part, offset) in parts {
            cells.extend(
                part.cells
                    .iter()
                    .map(|(k, &a)| (k.iter().zip(*offset).map(|(x, o)| x + o).collect(), a)),
            );
        }
        cells.sort_by(|x, y| x.0.cmp(&y.0));
        let collisions = cells
            .windows(2)
            .filter(|w| w[0].0 == w[1].0)
            .map(|w| w[1].0.clone())
            .collect();
        cells.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 = later.1;
                true
            } else {
                false
            }
        });
        let patch = LatticePatch {
            dim,
            cells: cells.into_iter().collect(),
        };
        (patch, collisions)
    }

    fn neighbours(cell: &[i64]) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..cell.len()).flat_map(move |axis| {
            [-1i64, 1].into_iter().map(move |step| {
                let mut n = cell.to_vec();
                n[axis] += step;
                n
            })
        })
    }

    /// Connected through shared faces (edges in `Z^2`).
    pub fn is_edge_connected(&self) -> bool {
        let Some(start) = self.cells.keys().next() else {
            return true;
        };
        let mut seen: HashSet<&[i64]> = HashSet::new();
        let mut queue = VecDeque::from([start.as_slice()]);
        seen.insert(start);
        while let Some(c) = queue.pop_front() {
            for n in Self::neighbours(c) {
                if let Some((k, _)) = self.cells.get_key_value(&n) {
                    if seen.insert(k.as_slice()) {
                        queue.push_back(k.as_slice());
                    }
                }
            }
        }
        seen.len() == self.cells.len()
    }

    /// Whether a planar patch is a topological disk: edge-connected, no
    /// holes and no cells touching only at a corner. Other dimensions
    /// report connectivity.
    pub fn is_disk(&self) -> bool {
        if !self.is_edge_connected() {
            return false;
        }
        if self.dim != 2 {
            return true;
        }
        let Some(b) = self.bounds() else { return true };
        let (x0, x1, y0, y1) = (b[0].0 - 1, b[0].1 + 1, b[1].0 - 1, b[1].1 + 1);
        let has = |x: i64, y: i64| self.cells.contains_key(&vec![x, y]);
        for k in self.cells.keys() {
            let (x, y) = (k[0], k[1]);
            if (has(x + 1, y + 1) && !has(x + 1, y) && !has(x, y + 1))
                || (has(x + 1, y - 1) && !has(x + 1, y) && !has(x, y - 1))
            {
                return false;
            }
        }
        // flood the complement from outside the bounding box
        let mut seen = HashSet::new();
        let mut queue = VecDeque::from([(x0, y0)]);
        seen.insert((x0, y0));
        while let Some((x, y)) = queue.pop_front() {
            for (nx, ny) in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
                if nx < x0 || nx > x1 || ny < y0 || ny > y1 || has(nx, ny) {
                    continue;
                }
                if seen.insert((nx, ny)) {
                    queue.push_back((nx, ny));
                }
            }
        }
        let box_cells = ((x1 - x0 + 1) * (y1 - y0 + 1)) as usize;
        seen.len() + self.cells.len() == box_cells
    }

    /// `x y … symbol` lines in lexicographic coordinate order.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for (k, &a) in &self.cells {
            for c in k {
                out.push_str(&c.to_string());
                out.push(' ');
            }
            out.push_str(alphabet.symbol(a));
            out.push('\n');
        }
        out
    }

    /// Letters of a contiguous one-dimensional patch, left to right.
    pub fn to_word(&self) -> Option<Vec<Letter>> {
        if self.dim != 1 {
            return None;
        }
        let b = self.bounds()?;
        if (b[0].1 - b[0].0 + 1) as usize != self.cells.len() {
            return None;
        }
        Some(self.cells.values().copied().collect())
    }
}

/// One composed supertile together with any doubly-written cells.
#[derive(Debug, Clone)]
pub struct ComposedSupertile {
    pub name: String,
    pub patch: LatticePatch,
    pub collisions: Vec<Vec<i64>>,
}

/// Builds one level from the previous level's patches. With `concatenate`
/// (one-dimensional repeated levels) constituents are laid end to end in
/// the order of their written offsets.
pub(crate) fn compose(
    level: &FusionLevel,
    prev: &[LatticePatch],
    dim: usize,
    concatenate: bool,
) -> Vec<ComposedSupertile> {
    level
        .supertiles
        .iter()
        .map(|st| {
            let mut cursor = 0i64;
            let offsets: Vec<Vec<i64>> = st
                .placements
                .iter()
                .map(|p| {
                    if concatenate {
                        let b = prev[p.constituent].bounds().expect("supertiles are non-empty");
                        let off = vec![cursor - b[0].0];
                        cursor += b[0].1 - b[0].0 + 1;
                        off
                    } else {
                        p.offset.clone()
                    }
                })
                .collect();
            let parts: Vec<(&LatticePatch, &[i64])> = st
                .placements
                .iter()
                .zip(&offsets)
                .map(|(p, o)| (&prev[p.constituent], o.as_slice()))
                .collect();
            let (patch, collisions) = LatticePatch::union_translated(dim, &parts);
            ComposedSupertile {
                name: st.name.clone(),
                patch,
                collisions,
            }
        })
        .collect()
}

fn script(rule: &RuleSpec) -> Result<&FusionScript> {
    match &rule.body {
        RuleBody::Fusion(s) => Ok(s),
        _ => Err(rule.wrong_kind("fusion")),
    }
}

/// Names of the level-`n` supertile types (the alphabet at level 0).
pub fn fusion_type_names(rule: &RuleSpec, n: usize) -> Result<Vec<String>> {
    let s = script(rule)?;
    if n == 0 {
        return Ok(rule.alphabet.symbols().to_vec());
    }
    let level = s.level(n).ok_or(Error::LevelOutOfRange {
        level: n,
        max: s.scripted_depth(),
    })?;
    Ok(level.supertiles.iter().map(|t| t.name.clone()).collect())
}

/// All supertile patches for levels `0..=n`.
pub fn level_patches(rule: &RuleSpec, n: usize, limits: &Limits) -> Result<Vec<Vec<LatticePatch>>> {
    let mut levels = Vec::with_capacity(n + 1);
    walk_levels(rule, n, limits, |patches| levels.push(patches.to_vec()))?;
    Ok(levels)
}

/// Supertile patches of level `n` only.
fn final_patches(rule: &RuleSpec, n: usize, limits: &Limits) -> Result<Vec<LatticePatch>> {
    walk_levels(rule, n, limits, |_| ())
}

/// Builds levels `0..=n`, handing each to `visit`; returns level `n`.
fn walk_levels(
    rule: &RuleSpec,
    n: usize,
    limits: &Limits,
    mut visit: impl FnMut(&[LatticePatch]),
) -> Result<Vec<LatticePatch>> {
    let s = script(rule)?;
    if let Some(max) = s.max_level() {
        if n > max {
            return Err(Error::LevelOutOfRange { level: n, max });
        }
    }
    let dim = rule.dim;
    let mut current: Vec<LatticePatch> = (0..rule.alphabet.len() as Letter)
        .map(|a| LatticePatch::single(dim, a))
        .collect();
    visit(&current);
    // cell counts without materializing, to honour the cap
    let mut volumes: Vec<u128> = vec![1; rule.alphabet.len()];
    for k in 1..=n {
        let level = s.level(k).expect("depth checked above");
        volumes = level
            .supertiles
            .iter()
            .map(|st| {
                st.placements
                    .iter()
                    .fold(0u128, |acc, p| acc.saturating_add(volumes[p.constituent]))
            })
            .collect();
        limits.check(volumes.iter().copied().max().unwrap_or(0))?;
        let concatenate = dim == 1 && s.is_repeated(k);
        let composed = compose(level, &current, dim, concatenate);
        let mut patches = Vec::with_capacity(composed.len());
        for c in composed {
            if let Some(cell) = c.collisions.into_iter().next() {
                return Err(Error::PlacementCollision {
                    supertile: c.name,
                    cell,
                });
            }
            patches.push(c.patch);
        }
        visit(&patches);
        current = patches;
    }
    Ok(current)
}

/// State of the two-type vector recursion at some level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VectorFusionState {
    pub level: usize,
    pub a: LatticePatch,
    pub b: LatticePatch,
    pub k: [i64; 2],
    pub l: [i64; 2],
}

fn mat_vec(m: &[[i64; 2]; 2], v: [i64; 2]) -> Option<[i64; 2]> {
    let x = m[0][0].checked_mul(v[0])?.checked_add(m[0][1].checked_mul(v[1])?)?;
    let y = m[1][0].checked_mul(v[0])?.checked_add(m[1][1].checked_mul(v[1])?)?;
    Some([x, y])
}

impl VectorFusionState {
    pub fn initial(rule: &VectorFusionRule) -> Self {
        VectorFusionState {
            level: 0,
            a: LatticePatch::single(2, rule.seeds[0]),
            b: LatticePatch::single(2, rule.seeds[1]),
            k: rule.k0,
            l: rule.l0,
        }
    }

    /// Advances one level, reporting the first collision.
    pub fn step(&self, rule: &VectorFusionRule) -> Result<Self> {
        let grow = |base: &LatticePatch, other: &LatticePatch, name: &str| -> Result<LatticePatch> {
            let origin = [0i64; 2];
            let parts = [(base, &origin[..]), (other, &self.k[..]), (other, &self.l[..])];
            let (p, coll) = LatticePatch::union_translated(2, &parts);
            match coll.into_iter().next() {
                Some(cell) => Err(Error::PlacementCollision {
                    supertile: name.to_string(),
                    cell,
                }),
                None => Ok(p),
            }
        };
        let overflow = || Error::LevelOverflow {
            requested: "translation vector beyond i64".into(),
            limit: i64::MAX as u64,
        };
        Ok(VectorFusionState {
            level: self.level + 1,
            a: grow(&self.a, &self.b, "A")?,
            b: grow(&self.b, &self.a, "B")?,
            k: mat_vec(&rule.matrix, self.k).ok_or_else(overflow)?,
            l: mat_vec(&rule.matrix, self.l).ok_or_else(overflow)?,
        })
    }
}

/// Runs the vector recursion to level `n`.
pub fn vector_fusion_state(rule: &RuleSpec, n: usize, limits: &Limits) -> Result<VectorFusionState> {
    let RuleBody::VectorFusion(v) = &rule.body else {
        return Err(rule.wrong_kind("vector-fusion"));
    };
    let requested = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(3)).unwrap_or(u128::MAX);
    limits.check(requested)?;
    let mut state = VectorFusionState::initial(v);
    for _ in 0..n {
        state = state.step(v)?;
    }
    Ok(state)
}

/// The level-`n` supertile of the named type.
pub fn fusion_supertile(rule: &RuleSpec, type_name: &str, n: usize, limits: &Limits) -> Result<LatticePatch> {
    match &rule.body {
        RuleBody::Fusion(_) => {
            let names = fusion_type_names(rule, n)?;
            let idx = names
                .iter()
                .position(|s| s == type_name)
                .ok_or_else(|| Error::UnknownType(type_name.to_string()))?;
            Ok(final_patches(rule, n, limits)?.swap_remove(idx))
        }
        RuleBody::VectorFusion(v) => {
            let letter = rule.alphabet.letter(type_name)?;
            let state = vector_fusion_state(rule, n, limits)?;
            if letter == v.seeds[0] {
                Ok(state.a)
            } else if letter == v.seeds[1] {
                Ok(state.b)
            } else {
                Err(Error::UnknownType(type_name.to_string()))
            }
        }
        _ => Err(rule.wrong_kind("fusion or vector-fusion")),
    }
}

/// Cell counts of every supertile type at levels `0..=n`, without building
/// the patches.
pub fn fusion_volumes(rule: &RuleSpec, n: usize) -> Result<Vec<Vec<num_bigint::BigUint>>> {
    use num_bigint::BigUint;
    let s = script(rule)?;
    if let Some(max) = s.max_level() {
        if n > max {
            return Err(Error::LevelOutOfRange { level: n, max });
        }
    }
    let mut out = vec![vec![BigUint::from(1u32); rule.alphabet.len()]];
    for k in 1..=n {
        let prev = out.last().unwrap();
        let level = s.level(k).unwrap();
        let v = level
            .supertiles
            .iter()
            .map(|st| st.placements.iter().map(|p| prev[p.constituent].clone()).sum())
            .collect();
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulespec::parse_rule_file;

    const CHACON: &str = "rule chacon\nkind fusion\ndim 1\nalphabet a b\nrepeat\nsuper a:\nplace a at 0\nplace a at 1\nplace b at 2\nplace a at 3\nsuper b:\nplace b at 0\n";
    const VF: &str = "rule v\nkind vector-fusion\ndim 2\nalphabet A B\nL 2 1 -1 1\nk0 1 0\nl0 0 1\nseeds A B\n";

    /// Oracle: expand `a -> aaba` with the `b` spacer fixed.
    fn chacon_word(n: usize) -> String {
        let mut w = String::from("a");
        for _ in 0..n {
            w = format!("{w}{w}b{w}");
        }
        w
    }

    #[test]
    fn chacon_supertiles() {
        let r = parse_rule_file(CHACON).unwrap();
        let l = Limits::default();
        for (n, len) in [1usize, 4, 13, 40].into_iter().enumerate() {
            let p = fusion_supertile(&r, "a", n, &l).unwrap();
            assert_eq!(p.len(), len);
            let w: String = p.to_word().unwrap().iter().map(|&x| r.alphabet.symbol(x)).collect();
            assert_eq!(w, chacon_word(n));
        }
        assert_eq!(
            fusion_supertile(&r, "a", 2, &l).unwrap().to_word().unwrap().len(),
            13
        );
        assert_eq!(fusion_supertile(&r, "b", 5, &l).unwrap().len(), 1);
        let vols = fusion_volumes(&r, 3).unwrap();
        assert_eq!(vols[3][0], 40u32.into());
    }

    #[test]
    fn vector_fusion_first_level() {
        let r = parse_rule_file(VF).unwrap();
        let l = Limits::default();
        let a1 = fusion_supertile(&r, "A", 1, &l).unwrap();
        let cells: Vec<(Vec<i64>, Letter)> = a1.cells.into_iter().collect();
        assert_eq!(cells, vec![(vec![0, 0], 0), (vec![0, 1], 1), (vec![1, 0], 1)]);
        let s1 = vector_fusion_state(&r, 1, &l).unwrap();
        // L·(1,0) and L·(0,1)
        assert_eq!(s1.k, [2, -1]);
        assert_eq!(s1.l, [1, 1]);
    }

    #[test]
    fn vector_fusion_sizes_triple() {
        let r = parse_rule_file(VF).unwrap();
        let l = Limits::default();
        let mut state = vector_fusion_state(&r, 0, &l).unwrap();
        let RuleBody::VectorFusion(v) = &r.body else { unreachable!() };
        for n in 1..=8u32 {
            state = state.step(v).unwrap();
            assert_eq!(state.a.len(), 3usize.pow(n));
            assert_eq!(state.b.len(), 3usize.pow(n));
            assert!(state.a.is_edge_connected());
        }
    }

    #[test]
    fn collisions_are_errors() {
        let text = "rule c\nkind fusion\ndim 1\nalphabet a\nlevel 1\nsuper a:\nplace a at 0\nplace a at 0\n";
        let r = parse_rule_file(text).unwrap();
        assert!(matches!(
            fusion_supertile(&r, "a", 1, &Limits::default()),
            Err(Error::PlacementCollision { .. })
        ));
        assert!(matches!(
            fusion_supertile(&r, "a", 2, &Limits::default()),
            Err(Error::LevelOutOfRange { .. })
        ));
    }

    #[test]
    fn disk_detection() {
        let mut ring = LatticePatch::empty(2);
        for x in 0..3 {
            for y in 0..3 {
                if (x, y) != (1, 1) {
                    ring.cells.insert(vec![x, y], 0);
                }
            }
        }
        assert!(ring.is_edge_connected());
        assert!(!ring.is_disk());
        ring.cells.insert(vec![1, 1], 0);
        assert!(ring.is_disk());
        let mut pinch = LatticePatch::empty(2);
        for c in [[0, 0], [1, 0], [2, 0], [2, 1], [0, 1], [0, 2], [1, 2]] {
            pinch.cells.insert(c.to_vec(), 0);
        }
        // (1,2) and (2,1) meet only at a corner
        assert!(pinch.is_edge_connected());
        assert!(!pinch.is_disk());
    }
}
