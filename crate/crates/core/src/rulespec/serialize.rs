use std::fmt::{self, Write};

use super::{Alphabet, Letter, RuleBody, RuleSpec, Substitution, TileLengths};

fn write_word(out: &mut fmt::Formatter<'_>, alphabet: &Alphabet, word: &[Letter]) -> fmt::Result {
    for (i, &a) in word.iter().enumerate() {
        if i > 0 {
            out.write_char(' ')?;
        }
        out.write_str(alphabet.symbol(a))?;
    }
    Ok(())
}

fn write_maps(out: &mut fmt::Formatter<'_>, alphabet: &Alphabet, sub: &Substitution) -> fmt::Result {
    for a in sub.domain() {
        write!(out, "map {} -> ", alphabet.symbol(a))?;
        write_word(out, alphabet, sub.image(a))?;
        out.write_char('\n')?;
    }
    Ok(())
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ab = &self.alphabet;
        writeln!(f, "rule {}", self.name)?;
        writeln!(f, "kind {}", self.kind())?;
        writeln!(f, "dim {}", self.dim)?;
        writeln!(f, "alphabet {}", ab.symbols().join(" "))?;
        match &self.body {
            RuleBody::Symbolic(sub) => write_maps(f, ab, sub)?,
            RuleBody::Inflation(inf) => {
                write_maps(f, ab, &inf.substitution)?;
                match &inf.lengths {
                    TileLengths::Auto => writeln!(f, "lengths auto")?,
                    TileLengths::Explicit(v) => {
                        f.write_str("lengths")?;
                        for (i, x) in v.iter().enumerate() {
                            if let Some(x) = x {
                                write!(f, " {}={x:?}", ab.symbol(i as Letter))?;
                            }
                        }
                        f.write_char('\n')?;
                    }
                }
                if inf.check_lengths {
                    writeln!(f, "check-lengths")?;
                }
            }
            RuleBody::Block(b) => {
                writeln!(f, "size {}", join(b.size()))?;
                let width = b.size()[0];
                for (a, cells) in b.blocks().iter().enumerate() {
                    if cells.is_empty() {
                        continue;
                    }
                    writeln!(f, "block {}:", ab.symbol(a as Letter))?;
                    for row in cells.chunks(width) {
                        write_word(f, ab, row)?;
                        f.write_char('\n')?;
                    }
                }
            }
            RuleBody::Fusion(script) => {
                let mut prev: Vec<String> = ab.symbols().to_vec();
                let last = script.levels.len();
                for (i, level) in script.levels.iter().enumerate() {
                    if script.repeat && i + 1 == last {
                        writeln!(f, "repeat")?;
                    } else {
                        writeln!(f, "level {}", i + 1)?;
                    }
                    for st in &level.supertiles {
                        writeln!(f, "super {}:", st.name)?;
                        for p in &st.placements {
                            writeln!(f, "place {} at {}", prev[p.constituent], join(&p.offset))?;
                        }
                    }
                    prev = level.supertiles.iter().map(|s| s.name.clone()).collect();
                }
            }
            RuleBody::Sadic(s) => {
                for ns in &s.subs {
                    writeln!(f, "sub {}:", ns.name)?;
                    write_maps(f, ab, &ns.substitution)?;
                }
                let names = |idx: &[usize]| {
                    idx.iter()
                        .map(|&i| s.subs[i].name.as_str())
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                f.write_str("directive")?;
                if !s.prefix.is_empty() {
                    write!(f, " {}", names(&s.prefix))?;
                }
                if !s.cycle.is_empty() {
                    write!(f, " cycle {}", names(&s.cycle))?;
                }
                f.write_char('\n')?;
            }
            RuleBody::VectorFusion(v) => {
                let m = v.matrix;
                writeln!(f, "L {} {} {} {}", m[0][0], m[0][1], m[1][0], m[1][1])?;
                writeln!(f, "k0 {} {}", v.k0[0], v.k0[1])?;
                writeln!(f, "l0 {} {}", v.l0[0], v.l0[1])?;
                writeln!(f, "seeds {} {}", ab.symbol(v.seeds[0]), ab.symbol(v.seeds[1]))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use crate::rulespec::parse_rule_file;

    #[test]
    fn canonical_form_is_stable() {
        let messy = "rule k3   # comment\nkind inflation\ndim 1\nalphabet a b\nmap b -> a\nmap a -> a b  b b\nlengths b=1 a=2.302775637731995\n";
        let r1 = parse_rule_file(messy).unwrap();
        let text = r1.to_canonical_string();
        assert_eq!(
            text,
            "rule k3\nkind inflation\ndim 1\nalphabet a b\nmap a -> a b b b\nmap b -> a\nlengths a=2.302775637731995 b=1.0\n"
        );
        let r2 = parse_rule_file(&text).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r2.to_canonical_string(), text);
    }
}
