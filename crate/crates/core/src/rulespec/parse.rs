use std::collections::{HashMap, HashSet};

use super::{
    Alphabet, BlockSubstitution, FusionLevel, FusionScript, FusionSupertile, InflationRule,
    Letter, NamedSubstitution, Placement, RuleBody, RuleKind, RuleSpec, SadicRule, Substitution,
    TileLengths, VectorFusionRule,
};
use crate::error::ParseError;

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    col: usize,
}

#[derive(Debug)]
struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
    end_col: usize,
}

fn lex<'a>(text: &'a str) -> Vec<Line<'a>> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let content = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let mut tokens = Vec::new();
        let mut start: Option<usize> = None;
        let bytes = content.as_bytes();
        let push = |s: usize, e: usize, tokens: &mut Vec<Token<'a>>| {
            if e > s {
                // char column, 1-based
                let col = content[..s].chars().count() + 1;
                tokens.push(Token { text: &content[s..e], col });
            }
        };
        let mut idx = 0;
        while idx < bytes.len() {
            let c = content[idx..].chars().next().unwrap();
            let w = c.len_utf8();
            if c.is_whitespace() {
                if let Some(s) = start.take() {
                    push(s, idx, &mut tokens);
                }
            } else if c == ':' || c == '=' {
                if let Some(s) = start.take() {
                    push(s, idx, &mut tokens);
                }
                push(idx, idx + w, &mut tokens);
            } else if start.is_none() {
                start = Some(idx);
            }
            idx += w;
        }
        if let Some(s) = start {
            push(s, content.len(), &mut tokens);
        }
        if !tokens.is_empty() {
            lines.push(Line {
                number: i + 1,
                end_col: content.chars().count() + 1,
                tokens,
            });
        }
    }
    lines
}

struct Parser<'a> {
    lines: Vec<Line<'a>>,
    pos: usize,
    last_line: usize,
}

fn syntax(line: usize, col: usize, expected: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        col,
        expected: expected.into(),
    }
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Line<'a>> {
        self.lines.get(self.pos)
    }

    fn peek_keyword(&self) -> Option<&'a str> {
        self.peek().map(|l| l.tokens[0].text)
    }

    fn next_line(&mut self, expected: &str) -> Result<&Line<'a>, ParseError> {
        match self.lines.get(self.pos) {
            Some(_) => {
                self.pos += 1;
                Ok(&self.lines[self.pos - 1])
            }
            None => Err(syntax(self.last_line + 1, 1, expected)),
        }
    }

    /// Consumes a line starting with `keyword` and returns its remaining tokens.
    fn keyword_line(&mut self, keyword: &str) -> Result<(usize, Vec<Token<'a>>), ParseError> {
        let line = self.next_line(&format!("`{keyword}`"))?;
        if line.tokens[0].text != keyword {
            return Err(syntax(line.number, line.tokens[0].col, format!("`{keyword}`")));
        }
        Ok((line.number, line.tokens[1..].to_vec()))
    }
}

fn end_col(line: usize, tokens: &[Token<'_>], fallback: usize) -> (usize, usize) {
    (line, tokens.last().map(|t| t.col + t.text.chars().count()).unwrap_or(fallback))
}

fn parse_int<T: std::str::FromStr>(line: usize, tok: &Token<'_>) -> Result<T, ParseError> {
    tok.text
        .parse()
        .map_err(|_| syntax(line, tok.col, "integer"))
}

fn exactly_one<'t, 'a>(
    line: usize,
    tokens: &'t [Token<'a>],
    what: &str,
    eol: usize,
) -> Result<&'t Token<'a>, ParseError> {
    match tokens {
        [t] => Ok(t),
        [] => Err(syntax(line, eol, what)),
        [_, extra, ..] => Err(syntax(line, extra.col, "end of line")),
    }
}

fn lookup(alphabet: &Alphabet, line: usize, tok: &Token<'_>) -> Result<Letter, ParseError> {
    alphabet
        .index_of(tok.text)
        .ok_or_else(|| ParseError::UnknownSymbol {
            line,
            token: tok.text.to_string(),
        })
}

/// Parses a rule file into its canonical [`RuleSpec`].
///
/// Only syntax, unknown symbols and duplicate definitions are reported here;
/// semantic checks live in [`super::validate`].
pub fn parse_rule_file(text: &str) -> Result<RuleSpec, ParseError> {
    let lines = lex(text);
    let last_line = text.lines().count();
    let mut p = Parser {
        lines,
        pos: 0,
        last_line,
    };

    let (ln, rest) = p.keyword_line("rule")?;
    let eol = p.lines[p.pos - 1].end_col;
    let name = exactly_one(ln, &rest, "rule name", eol)?.text.to_string();

    let (ln, rest) = p.keyword_line("kind")?;
    let eol = p.lines[p.pos - 1].end_col;
    let kind_tok = exactly_one(ln, &rest, "rule kind", eol)?;
    let kind = RuleKind::from_keyword(kind_tok.text).ok_or_else(|| {
        syntax(
            ln,
            kind_tok.col,
            "one of symbolic, block, inflation, fusion, sadic, vector-fusion",
        )
    })?;

    let (ln, rest) = p.keyword_line("dim")?;
    let eol = p.lines[p.pos - 1].end_col;
    let dim_tok = exactly_one(ln, &rest, "dimension", eol)?;
    let dim: usize = parse_int(ln, dim_tok)?;
    if dim == 0 {
        return Err(syntax(ln, dim_tok.col, "positive dimension"));
    }

    let (ln, rest) = p.keyword_line("alphabet")?;
    if rest.is_empty() {
        let eol = p.lines[p.pos - 1].end_col;
        return Err(syntax(ln, eol, "at least one symbol"));
    }
    for t in &rest {
        if matches!(t.text, ":" | "=" | "->") {
            return Err(syntax(ln, t.col, "symbol token"));
        }
    }
    let alphabet = Alphabet::new(rest.iter().map(|t| t.text))
        .map_err(|token| ParseError::DuplicateDefinition { line: ln, token })?;

    let body = match kind {
        RuleKind::Symbolic => RuleBody::Symbolic(parse_maps(&mut p, &alphabet, &["map"])?),
        RuleKind::Inflation => RuleBody::Inflation(parse_inflation(&mut p, &alphabet)?),
        RuleKind::Block => RuleBody::Block(parse_block(&mut p, &alphabet, dim)?),
        RuleKind::Fusion => RuleBody::Fusion(parse_fusion(&mut p, &alphabet, dim)?),
        RuleKind::Sadic => RuleBody::Sadic(parse_sadic(&mut p, &alphabet)?),
        RuleKind::VectorFusion => RuleBody::VectorFusion(parse_vector_fusion(&mut p, &alphabet)?),
    };

    if let Some(line) = p.peek() {
        return Err(syntax(line.number, line.tokens[0].col, "end of file"));
    }

    Ok(RuleSpec {
        name,
        dim,
        alphabet,
        body,
    })
}

/// Reads consecutive `map` lines; stops at the first line whose keyword is
/// not `map`.
fn parse_maps(
    p: &mut Parser<'_>,
    alphabet: &Alphabet,
    stop_unless: &[&str],
) -> Result<Substitution, ParseError> {
    let mut images: Vec<Vec<Letter>> = vec![Vec::new(); alphabet.len()];
    while let Some(kw) = p.peek_keyword() {
        if !stop_unless.contains(&kw) {
            break;
        }
        let line = p.next_line("map")?;
        let ln = line.number;
        let toks = &line.tokens;
        if toks.len() < 2 {
            return Err(syntax(ln, line.end_col, "symbol"));
        }
        let src = lookup(alphabet, ln, &toks[1])?;
        match toks.get(2) {
            Some(t) if t.text == "->" => {}
            Some(t) => return Err(syntax(ln, t.col, "`->`")),
            None => return Err(syntax(ln, line.end_col, "`->`")),
        }
        if toks.len() < 4 {
            return Err(syntax(ln, line.end_col, "at least one image symbol"));
        }
        let image = toks[3..]
            .iter()
            .map(|t| lookup(alphabet, ln, t))
            .collect::<Result<Vec<_>, _>>()?;
        if !images[src as usize].is_empty() {
            return Err(ParseError::DuplicateDefinition {
                line: ln,
                token: toks[1].text.to_string(),
            });
        }
        images[src as usize] = image;
    }
    Ok(Substitution::new(images))
}

fn parse_inflation(p: &mut Parser<'_>, alphabet: &Alphabet) -> Result<InflationRule, ParseError> {
    let substitution = parse_maps(p, alphabet, &["map"])?;
    let mut lengths = None;
    let mut check_lengths = false;
    while let Some(kw) = p.peek_keyword() {
        match kw {
            "lengths" => {
                let line = p.next_line("lengths")?;
                let ln = line.number;
                if lengths.is_some() {
                    return Err(ParseError::DuplicateDefinition {
                        line: ln,
                        token: "lengths".into(),
                    });
                }
                let toks = &line.tokens[1..];
                if toks.len() == 1 && toks[0].text == "auto" {
                    lengths = Some(TileLengths::Auto);
                    continue;
                }
                if toks.is_empty() {
                    return Err(syntax(ln, line.end_col, "`auto` or SYMBOL=LENGTH pairs"));
                }
                let mut values = vec![None; alphabet.len()];
                for chunk in toks.chunks(3) {
                    let sym = lookup(alphabet, ln, &chunk[0])?;
                    match chunk.get(1) {
                        Some(t) if t.text == "=" => {}
                        Some(t) => return Err(syntax(ln, t.col, "`=`")),
                        None => return Err(syntax(ln, line.end_col, "`=`")),
                    }
                    let v = chunk
                        .get(2)
                        .ok_or_else(|| syntax(ln, line.end_col, "length value"))?;
                    let x: f64 = v
                        .text
                        .parse()
                        .map_err(|_| syntax(ln, v.col, "floating-point length"))?;
                    if values[sym as usize].is_some() {
                        return Err(ParseError::DuplicateDefinition {
                            line: ln,
                            token: chunk[0].text.to_string(),
                        });
                    }
                    values[sym as usize] = Some(x);
                }
                lengths = Some(TileLengths::Explicit(values));
            }
            "check-lengths" => {
                let line = p.next_line("check-lengths")?;
                if let Some(t) = line.tokens.get(1) {
                    return Err(syntax(line.number, t.col, "end of line"));
                }
                check_lengths = true;
            }
            "map" => {
                let line = p.next_line("map")?;
                return Err(syntax(line.number, line.tokens[0].col, "`lengths` or `check-lengths` (maps come first)"));
            }
            _ => break,
        }
    }
    let lengths = lengths.ok_or_else(|| {
        let (line, col) = p
            .peek()
            .map(|l| (l.number, l.tokens[0].col))
            .unwrap_or((p.last_line + 1, 1));
        syntax(line, col, "`lengths`")
    })?;
    Ok(InflationRule {
        substitution,
        lengths,
        check_lengths,
    })
}

fn parse_block(
    p: &mut Parser<'_>,
    alphabet: &Alphabet,
    dim: usize,
) -> Result<BlockSubstitution, ParseError> {
    let (ln, rest) = p.keyword_line("size")?;
    let eol = p.lines[p.pos - 1].end_col;
    if rest.len() != dim {
        let col = rest.get(dim).map(|t| t.col).unwrap_or(eol);
        return Err(syntax(ln, col, format!("{dim} block lengths")));
    }
    let size = rest
        .iter()
        .map(|t| parse_int::<usize>(ln, t))
        .collect::<Result<Vec<_>, _>>()?;
    if let Some((i, _)) = size.iter().enumerate().find(|(_, &l)| l == 0) {
        return Err(syntax(ln, rest[i].col, "positive block length"));
    }
    let width = size[0];
    let rows: usize = size[1..].iter().product();

    let mut blocks: Vec<Vec<Letter>> = vec![Vec::new(); alphabet.len()];
    while p.peek_keyword() == Some("block") {
        let line = p.next_line("block")?;
        let ln = line.number;
        let toks = line.tokens.clone();
        let eol = line.end_col;
        if toks.len() < 2 {
            return Err(syntax(ln, eol, "symbol"));
        }
        let sym = lookup(alphabet, ln, &toks[1])?;
        match toks.get(2) {
            Some(t) if t.text == ":" => {}
            Some(t) => return Err(syntax(ln, t.col, "`:`")),
            None => return Err(syntax(ln, eol, "`:`")),
        }
        if let Some(t) = toks.get(3) {
            return Err(syntax(ln, t.col, "end of line"));
        }
        if !blocks[sym as usize].is_empty() {
            return Err(ParseError::DuplicateDefinition {
                line: ln,
                token: toks[1].text.to_string(),
            });
        }
        let mut cells = Vec::with_capacity(width * rows);
        for _ in 0..rows {
            let row = p.next_line(&format!("row of {width} symbols"))?;
            let rn = row.number;
            if row.tokens.len() != width {
                let col = row.tokens.get(width).map(|t| t.col).unwrap_or(row.end_col);
                return Err(syntax(rn, col, format!("row of {width} symbols")));
            }
            for t in &row.tokens {
                cells.push(lookup(alphabet, rn, t)?);
            }
        }
        blocks[sym as usize] = cells;
    }
    Ok(BlockSubstitution::new(size, blocks))
}

fn parse_offset(
    ln: usize,
    toks: &[Token<'_>],
    dim: usize,
    eol: usize,
) -> Result<Vec<i64>, ParseError> {
    if toks.len() != dim {
        let col = toks.get(dim).map(|t| t.col).unwrap_or(eol);
        return Err(syntax(ln, col, format!("{dim} integer offsets")));
    }
    toks.iter().map(|t| parse_int::<i64>(ln, t)).collect()
}

fn parse_fusion(
    p: &mut Parser<'_>,
    alphabet: &Alphabet,
    dim: usize,
) -> Result<FusionScript, ParseError> {
    let mut levels: Vec<FusionLevel> = Vec::new();
    let mut repeat = false;
    let mut prev_names: Vec<String> = alphabet.symbols().to_vec();

    while let Some(kw) = p.peek_keyword() {
        let line = p.next_line("`level` or `repeat`")?;
        let ln = line.number;
        let eol = line.end_col;
        let toks = line.tokens.clone();
        if repeat {
            return Err(syntax(ln, toks[0].col, "end of file after `repeat` block"));
        }
        match kw {
            "level" => {
                let t = exactly_one(ln, &toks[1..], "level number", eol)?;
                let n: usize = parse_int(ln, t)?;
                if n != levels.len() + 1 {
                    return Err(syntax(ln, t.col, format!("level {}", levels.len() + 1)));
                }
            }
            "repeat" => {
                if let Some(t) = toks.get(1) {
                    return Err(syntax(ln, t.col, "end of line"));
                }
                repeat = true;
            }
            _ => return Err(syntax(ln, toks[0].col, "`level` or `repeat`")),
        }

        let prev_index: HashMap<&str, usize> = prev_names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut supertiles = Vec::new();
        let mut names = HashSet::new();
        while p.peek_keyword() == Some("super") {
            let line = p.next_line("super")?;
            let ln = line.number;
            let eol = line.end_col;
            let toks = line.tokens.clone();
            if toks.len() < 2 {
                return Err(syntax(ln, eol, "supertile name"));
            }
            match toks.get(2) {
                Some(t) if t.text == ":" => {}
                Some(t) => return Err(syntax(ln, t.col, "`:`")),
                None => return Err(syntax(ln, eol, "`:`")),
            }
            if let Some(t) = toks.get(3) {
                return Err(syntax(ln, t.col, "end of line"));
            }
            let name = toks[1].text.to_string();
            if !names.insert(name.clone()) {
                return Err(ParseError::DuplicateDefinition { line: ln, token: name });
            }
            let mut placements = Vec::new();
            while p.peek_keyword() == Some("place") {
                let line = p.next_line("place")?;
                let ln = line.number;
                let eol = line.end_col;
                let toks = &line.tokens;
                if toks.len() < 2 {
                    return Err(syntax(ln, eol, "constituent name"));
                }
                let constituent = *prev_index.get(toks[1].text).ok_or_else(|| {
                    ParseError::UnknownSymbol {
                        line: ln,
                        token: toks[1].text.to_string(),
                    }
                })?;
                match toks.get(2) {
                    Some(t) if t.text == "at" => {}
                    Some(t) => return Err(syntax(ln, t.col, "`at`")),
                    None => return Err(syntax(ln, eol, "`at`")),
                }
                let offset = parse_offset(ln, &toks[3..], dim, eol)?;
                placements.push(Placement {
                    offset,
                    constituent,
                });
            }
            if placements.is_empty() {
                let (l, c) = p
                    .peek()
                    .map(|l| (l.number, l.tokens[0].col))
                    .unwrap_or(end_col(ln, &toks, eol));
                return Err(syntax(l, c, "`place`"));
            }
            placements.sort();
            supertiles.push(FusionSupertile { name, placements });
        }
        if supertiles.is_empty() {
            let (l, c) = p
                .peek()
                .map(|l| (l.number, l.tokens[0].col))
                .unwrap_or((ln, eol));
            return Err(syntax(l, c, "`super`"));
        }
        prev_names = supertiles.iter().map(|s| s.name.clone()).collect();
        levels.push(FusionLevel { supertiles });
    }
    if levels.is_empty() {
        return Err(syntax(p.last_line + 1, 1, "`level` or `repeat`"));
    }
    Ok(FusionScript { levels, repeat })
}

fn parse_sadic(p: &mut Parser<'_>, alphabet: &Alphabet) -> Result<SadicRule, ParseError> {
    let mut subs: Vec<NamedSubstitution> = Vec::new();
    while p.peek_keyword() == Some("sub") {
        let line = p.next_line("sub")?;
        let ln = line.number;
        let eol = line.end_col;
        let toks = line.tokens.clone();
        if toks.len() < 2 {
            return Err(syntax(ln, eol, "substitution name"));
        }
        match toks.get(2) {
            Some(t) if t.text == ":" => {}
            Some(t) => return Err(syntax(ln, t.col, "`:`")),
            None => return Err(syntax(ln, eol, "`:`")),
        }
        if let Some(t) = toks.get(3) {
            return Err(syntax(ln, t.col, "end of line"));
        }
        let name = toks[1].text.to_string();
        if subs.iter().any(|s| s.name == name) {
            return Err(ParseError::DuplicateDefinition { line: ln, token: name });
        }
        let substitution = parse_maps(p, alphabet, &["map"])?;
        if substitution.domain().next().is_none() {
            let (l, c) = p
                .peek()
                .map(|l| (l.number, l.tokens[0].col))
                .unwrap_or((p.last_line + 1, 1));
            return Err(syntax(l, c, "`map`"));
        }
        subs.push(NamedSubstitution { name, substitution });
    }
    if subs.is_empty() {
        let (l, c) = p
            .peek()
            .map(|l| (l.number, l.tokens[0].col))
            .unwrap_or((p.last_line + 1, 1));
        return Err(syntax(l, c, "`sub`"));
    }
    // canonical order: by name
    subs.sort_by(|a, b| a.name.cmp(&b.name));

    let (ln, rest) = p.keyword_line("directive")?;
    let eol = p.lines[p.pos - 1].end_col;
    let resolve = |t: &Token<'_>| {
        subs.iter()
            .position(|s| s.name == t.text)
            .ok_or_else(|| ParseError::UnknownSymbol {
                line: ln,
                token: t.text.to_string(),
            })
    };
    let split = rest.iter().position(|t| t.text == "cycle");
    let (head, tail) = match split {
        Some(i) => (&rest[..i], Some(&rest[i + 1..])),
        None => (&rest[..], None),
    };
    if head.is_empty() && tail.is_none() {
        return Err(syntax(ln, eol, "directive names"));
    }
    let prefix = head.iter().map(resolve).collect::<Result<Vec<_>, _>>()?;
    let cycle = match tail {
        Some([]) => return Err(syntax(ln, eol, "cycle names")),
        Some(t) => t.iter().map(resolve).collect::<Result<Vec<_>, _>>()?,
        None => Vec::new(),
    };
    Ok(SadicRule {
        subs,
        prefix,
        cycle,
    })
}

fn parse_vector_fusion(
    p: &mut Parser<'_>,
    alphabet: &Alphabet,
) -> Result<VectorFusionRule, ParseError> {
    let mut matrix = None;
    let mut k0 = None;
    let mut l0 = None;
    let mut seeds = None;
    while let Some(kw) = p.peek_keyword() {
        if !matches!(kw, "L" | "k0" | "l0" | "seeds") {
            break;
        }
        let line = p.next_line(kw)?;
        let ln = line.number;
        let eol = line.end_col;
        let toks = &line.tokens[1..];
        let dup = || ParseError::DuplicateDefinition {
            line: ln,
            token: kw.to_string(),
        };
        let ints = |n: usize| -> Result<Vec<i64>, ParseError> {
            if toks.len() != n {
                let col = toks.get(n).map(|t| t.col).unwrap_or(eol);
                return Err(syntax(ln, col, format!("{n} integers")));
            }
            toks.iter().map(|t| parse_int::<i64>(ln, t)).collect()
        };
        match kw {
            "L" => {
                if matrix.is_some() {
                    return Err(dup());
                }
                let v = ints(4)?;
                matrix = Some([[v[0], v[1]], [v[2], v[3]]]);
            }
            "k0" => {
                if k0.is_some() {
                    return Err(dup());
                }
                let v = ints(2)?;
                k0 = Some([v[0], v[1]]);
            }
            "l0" => {
                if l0.is_some() {
                    return Err(dup());
                }
                let v = ints(2)?;
                l0 = Some([v[0], v[1]]);
            }
            _ => {
                if seeds.is_some() {
                    return Err(dup());
                }
                if toks.len() != 2 {
                    let col = toks.get(2).map(|t| t.col).unwrap_or(eol);
                    return Err(syntax(ln, col, "two seed symbols"));
                }
                seeds = Some([lookup(alphabet, ln, &toks[0])?, lookup(alphabet, ln, &toks[1])?]);
            }
        }
    }
    let missing = |what: &str| {
        let (l, c) = p
            .peek()
            .map(|l| (l.number, l.tokens[0].col))
            .unwrap_or((p.last_line + 1, 1));
        syntax(l, c, what)
    };
    Ok(VectorFusionRule {
        matrix: matrix.ok_or_else(|| missing("`L`"))?,
        k0: k0.ok_or_else(|| missing("`k0`"))?,
        l0: l0.ok_or_else(|| missing("`l0`"))?,
        seeds: seeds.ok_or_else(|| missing("`seeds`"))?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIB: &str = "rule fib\nkind symbolic\ndim 1\nalphabet a b\nmap a -> a b\nmap b -> a\n";

    #[test]
    fn fibonacci() {
        let r = parse_rule_file(FIB).unwrap();
        assert_eq!(r.kind(), RuleKind::Symbolic);
        let s = r.substitution().unwrap();
        assert_eq!(s.image(0), &[0, 1]);
        assert_eq!(s.image(1), &[0]);
    }

    #[test]
    fn identity() {
        let r = parse_rule_file("rule id\nkind symbolic\ndim 1\nalphabet a\nmap a -> a\n").unwrap();
        assert_eq!(r.substitution().unwrap().image(0), &[0]);
    }

    #[test]
    fn thue_morse_2d_rows_bottom_up() {
        let text = "rule tm2d\nkind block\ndim 2\nalphabet 0 1\nsize 2 2\n\
                    block 0:\n0 1\n1 0\nblock 1:\n1 0\n0 1\n";
        let r = parse_rule_file(text).unwrap();
        let RuleBody::Block(b) = &r.body else { panic!() };
        // S(0): bottom row 0 1, top row 1 0
        assert_eq!(b.block(0), &[0, 1, 1, 0]);
        assert_eq!(b.block(1), &[1, 0, 0, 1]);
    }

    #[test]
    fn comments_and_spacing() {
        let text = "# header\nrule   fib  # name\nkind symbolic\n\ndim 1\nalphabet a b\nmap a->a b\n";
        // `a->a` is one token, so the arrow is missing
        assert!(matches!(
            parse_rule_file(text),
            Err(ParseError::UnknownSymbol { .. }) | Err(ParseError::Syntax { .. })
        ));
        let ok = "# header\nrule   fib  # name\nkind symbolic\n\ndim 1\nalphabet a b\nmap a -> a b # x\nmap b -> a\n";
        assert!(parse_rule_file(ok).is_ok());
    }

    #[test]
    fn unknown_symbol() {
        let text = "rule x\nkind symbolic\ndim 1\nalphabet a b\nmap a -> a c\n";
        assert_eq!(
            parse_rule_file(text),
            Err(ParseError::UnknownSymbol {
                line: 5,
                token: "c".into()
            })
        );
    }

    #[test]
    fn duplicate_map_and_alphabet() {
        let text = "rule x\nkind symbolic\ndim 1\nalphabet a b\nmap a -> a\nmap a -> b\n";
        assert!(matches!(
            parse_rule_file(text),
            Err(ParseError::DuplicateDefinition { line: 6, .. })
        ));
        let text = "rule x\nkind symbolic\ndim 1\nalphabet a a\n";
        assert!(matches!(
            parse_rule_file(text),
            Err(ParseError::DuplicateDefinition { line: 4, .. })
        ));
    }

    #[test]
    fn syntax_positions() {
        let text = "rule x\nkind spiral\n";
        assert_eq!(
            parse_rule_file(text),
            Err(ParseError::Syntax {
                line: 2,
                col: 6,
                expected: "one of symbolic, block, inflation, fusion, sadic, vector-fusion".into()
            })
        );
        let text = "rule x\nkind block\ndim 2\nalphabet a\nsize 2 2\nblock a:\na a a\na a\n";
        assert!(matches!(
            parse_rule_file(text),
            Err(ParseError::Syntax { line: 7, col: 5, .. })
        ));
        assert!(matches!(
            parse_rule_file(""),
            Err(ParseError::Syntax { line: 1, col: 1, .. })
        ));
    }

    #[test]
    fn inflation_lengths() {
        let text = "rule k3\nkind inflation\ndim 1\nalphabet a b\nmap a -> a b b b\nmap b -> a\nlengths a=2.3 b = 1\ncheck-lengths\n";
        let r = parse_rule_file(text).unwrap();
        let RuleBody::Inflation(inf) = &r.body else { panic!() };
        assert_eq!(inf.lengths, TileLengths::Explicit(vec![Some(2.3), Some(1.0)]));
        assert!(inf.check_lengths);
    }

    #[test]
    fn fusion_levels_and_repeat() {
        let text = "rule chacon\nkind fusion\ndim 1\nalphabet a b\nrepeat\nsuper a:\nplace a at 3\nplace a at 0\nplace b at 2\nplace a at 1\nsuper b:\nplace b at 0\n";
        let r = parse_rule_file(text).unwrap();
        let RuleBody::Fusion(f) = &r.body else { panic!() };
        assert!(f.repeat);
        let offs: Vec<i64> = f.levels[0].supertiles[0].placements.iter().map(|p| p.offset[0]).collect();
        assert_eq!(offs, vec![0, 1, 2, 3]);
        let bad = "rule c\nkind fusion\ndim 1\nalphabet a\nlevel 2\nsuper a:\nplace a at 0\n";
        assert!(matches!(parse_rule_file(bad), Err(ParseError::Syntax { line: 5, .. })));
    }

    #[test]
    fn sadic_directive() {
        let text = "rule s\nkind sadic\ndim 1\nalphabet a b\nsub G:\nmap a -> a b b\nmap b -> a a a\nsub F:\nmap a -> a b\nmap b -> a\ndirective F G cycle F\n";
        let r = parse_rule_file(text).unwrap();
        let RuleBody::Sadic(s) = &r.body else { panic!() };
        assert_eq!(s.subs[0].name, "F");
        assert_eq!(s.prefix, vec![0, 1]);
        assert_eq!(s.cycle, vec![0]);
        assert_eq!(s.directive(7), Some(0));
    }

    #[test]
    fn vector_fusion() {
        let text = "rule v\nkind vector-fusion\ndim 2\nalphabet A B\nL 2 1 -1 1\nk0 1 0\nl0 0 1\nseeds A B\n";
        let r = parse_rule_file(text).unwrap();
        let RuleBody::VectorFusion(v) = &r.body else { panic!() };
        assert_eq!(v.matrix, [[2, 1], [-1, 1]]);
        assert_eq!(v.seeds, [0, 1]);
    }
}
