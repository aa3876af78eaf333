use super::Limits;
use crate::error::{Error, Result};
use crate::rulespec::{Alphabet, BlockSubstitution, Letter, RuleSpec};

/// A box of letters in `Z^d`, first coordinate fastest (row `y = 0` first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub extents: Vec<usize>,
    pub cells: Vec<Letter>,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.extents.len()
    }

    pub fn volume(&self) -> usize {
        self.cells.len()
    }

    /// Flat index of a coordinate.
    pub fn index(&self, coord: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (c, e) in coord.iter().zip(&self.extents) {
            idx += c * stride;
            stride *= e;
        }
        idx
    }

    /// Coordinate of a flat index.
    pub fn coord(&self, mut idx: usize) -> Vec<usize> {
        self.extents
            .iter()
            .map(|&e| {
                let c = idx % e;
                idx /= e;
                c
            })
            .collect()
    }

    pub fn get(&self, coord: &[usize]) -> Letter {
        self.cells[self.index(coord)]
    }

    /// Rows of the first two coordinates, bottom row first. Higher
    /// coordinates are flattened into further rows.
    pub fn rows(&self) -> impl Iterator<Item = &[Letter]> {
        self.cells.chunks(self.extents[0])
    }

    /// Text dump, one row per line, bottom row first.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        let mut out = String::new();
        for row in self.rows() {
            let line: Vec<&str> = row.iter().map(|&a| alphabet.symbol(a)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Applies the block substitution to every cell of `block`.
pub(crate) fn substitute(sub: &BlockSubstitution, block: &Block) -> Block {
    let size = sub.size();
    let d = size.len();
    let extents: Vec<usize> = block.extents.iter().zip(size).map(|(e, l)| e * l).collect();
    let mut out = Block {
        cells: vec![0; extents.iter().product()],
        extents,
    };
    let local = Block {
        extents: size.to_vec(),
        cells: Vec::new(),
    };
    let mut target = vec![0usize; d];
    for (i, &a) in block.cells.iter().enumerate() {
        let base = block.coord(i);
        for (j, &b) in sub.block(a).iter().enumerate() {
            let off = local.coord(j);
            for k in 0..d {
                target[k] = base[k] * size[k] + off[k];
            }
            let t = out.index(&target);
            out.cells[t] = b;
        }
    }
    out
}

pub(crate) fn superblock_of(
    sub: &BlockSubstitution,
    letter: Letter,
    n: usize,
    limits: &Limits,
) -> Result<Block> {
    let k = sub.volume() as u128;
    let requested = (0..n).try_fold(1u128, |acc, _| acc.checked_mul(k)).unwrap_or(u128::MAX);
    limits.check(requested)?;
    let mut b = Block {
        extents: vec![1; sub.dim()],
        cells: vec![letter],
    };
    for _ in 0..n {
        b = substitute(sub, &b);
    }
    Ok(b)
}

/// The n-superblock `𝒮^n(letter)` with extents `(l_1^n, …, l_d^n)`.
pub fn superblock(rule: &RuleSpec, letter: Letter, n: usize, limits: &Limits) -> Result<Block> {
    let sub = rule.constant_length()?;
    if letter as usize >= rule.alphabet.len() {
        return Err(Error::BadSymbol(letter as usize));
    }
    superblock_of(&sub, letter, n, limits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rulespec::parse_rule_file;

    const TM2D: &str = "rule tm2d\nkind block\ndim 2\nalphabet 0 1\nsize 2 2\nblock 0:\n0 1\n1 0\nblock 1:\n1 0\n0 1\n";

    #[test]
    fn thue_morse_superblocks() {
        let r = parse_rule_file(TM2D).unwrap();
        let l = Limits::default();
        let b1 = superblock(&r, 0, 1, &l).unwrap();
        assert_eq!(b1.render(&r.alphabet), "0 1\n1 0\n");
        let b1 = superblock(&r, 1, 1, &l).unwrap();
        assert_eq!(b1.render(&r.alphabet), "1 0\n0 1\n");
        let b2 = superblock(&r, 0, 2, &l).unwrap();
        assert_eq!(b2.extents, vec![4, 4]);
        assert_eq!(b2.render(&r.alphabet), "0 1 1 0\n1 0 0 1\n1 0 0 1\n0 1 1 0\n");
        let b0 = superblock(&r, 1, 0, &l).unwrap();
        assert_eq!(b0.cells, vec![1]);
    }

    #[test]
    fn level_three_superblock() {
        // the 8×8 superblock, listed top row first
        let top_down = [
            "1 0 0 1 0 1 1 0",
            "0 1 1 0 1 0 0 1",
            "0 1 1 0 1 0 0 1",
            "1 0 0 1 0 1 1 0",
            "0 1 1 0 1 0 0 1",
            "1 0 0 1 0 1 1 0",
            "1 0 0 1 0 1 1 0",
            "0 1 1 0 1 0 0 1",
        ];
        let r = parse_rule_file(TM2D).unwrap();
        let b = superblock(&r, 0, 3, &Limits::default()).unwrap();
        let rendered: Vec<String> = b.render(&r.alphabet).lines().map(String::from).collect();
        let expected: Vec<String> = top_down.iter().rev().map(|s| s.to_string()).collect();
        assert_eq!(rendered, expected);
    }

    #[test]
    fn one_dimensional_view_matches_superword() {
        let r = parse_rule_file("rule abb\nkind symbolic\ndim 1\nalphabet a b\nmap a -> a b b\nmap b -> a a a\n").unwrap();
        let l = Limits::default();
        let b = superblock(&r, 0, 3, &l).unwrap();
        let w = crate::supertile::superword(&r, 0, 3, &l).unwrap();
        assert_eq!(b.cells, w.0);
        assert_eq!(b.extents, vec![27]);
    }

    #[test]
    fn index_roundtrip() {
        let b = Block { extents: vec![3, 4, 2], cells: vec![0; 24] };
        for i in 0..24 {
            assert_eq!(b.index(&b.coord(i)), i);
        }
    }
}
