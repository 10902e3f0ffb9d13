//! Words over a finite alphabet of generators and their inverses.
//!
//! A letter is a nonzero signed integer: `+(i+1)` is generator `i` and
//! `-(i+1)` its inverse. The ShortLex base order places every generator
//! immediately before its inverse, so `a < a^-1 < b < b^-1 < ...`.

use std::cmp::Ordering;
use std::fmt;

pub type Letter = i32;

/// Generator index (0-based) of a letter.
pub fn gen_of(l: Letter) -> usize {
    (l.unsigned_abs() - 1) as usize
}

/// Position of a letter in the base order.
pub fn rank(l: Letter) -> u32 {
    2 * (l.unsigned_abs() - 1) + u32::from(l < 0)
}

pub fn letter_from_rank(r: u32) -> Letter {
    let g = (r / 2 + 1) as Letter;
    if r % 2 == 0 {
        g
    } else {
        -g
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: Letter) -> Self {
        Word(vec![l])
    }

    /// `g^e` for generator index `g`.
    pub fn power(g: usize, e: i64) -> Self {
        let l = (g + 1) as Letter;
        let l = if e < 0 { -l } else { l };
        Word(vec![l; e.unsigned_abs() as usize])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn free_reduce(&self) -> Word {
        let mut out: Vec<Letter> = Vec::with_capacity(self.0.len());
        for &l in &self.0 {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn is_freely_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != -w[1])
    }

    /// Cyclic free reduction.
    pub fn cyclic_reduce(&self) -> Word {
        let mut w = self.free_reduce().0;
        while w.len() >= 2 && w[0] == -w[w.len() - 1] {
            w.pop();
            w.remove(0);
        }
        Word(w)
    }

    /// Exponent sum of every generator, indexed by generator.
    pub fn exponent_sums(&self, ngens: usize) -> Vec<i64> {
        let mut e = vec![0i64; ngens];
        for &l in &self.0 {
            e[gen_of(l)] += if l > 0 { 1 } else { -1 };
        }
        e
    }

    pub fn generators_used(&self) -> Vec<usize> {
        let mut g: Vec<usize> = self.0.iter().map(|&l| gen_of(l)).collect();
        g.sort_unstable();
        g.dedup();
        g
    }

    pub fn display<'a>(&'a self, names: &'a [String]) -> WordDisplay<'a> {
        WordDisplay { word: self, names }
    }
}

/// ShortLex comparison: length first, then lexicographic in the base order.
pub fn shortlex_cmp(a: &[Letter], b: &[Letter]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        for (x, y) in a.iter().zip(b) {
            match rank(*x).cmp(&rank(*y)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    })
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        shortlex_cmp(&self.0, &other.0)
    }
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    names: &'a [String],
}

impl fmt::Display for WordDisplay<'_> {
    /// Groups runs of equal letters into powers: `a^2 b^-1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "1");
        }
        let w = &self.word.0;
        let mut i = 0;
        let mut first = true;
        while i < w.len() {
            let mut j = i;
            while j < w.len() && w[j] == w[i] {
                j += 1;
            }
            let run = (j - i) as i64;
            let e = if w[i] > 0 { run } else { -run };
            if !first {
                write!(f, " ")?;
            }
            first = false;
            let name = &self.names[gen_of(w[i])];
            if e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
            i = j;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("malformed word near `{0}`")]
    Malformed(String),
}

/// Parses words like `a b^-1 a^{-1} (x y)^7`. Tokens are identifiers with an
/// optional integer exponent; parenthesised groups may carry an exponent too.
pub fn parse_word(s: &str, names: &[String]) -> Result<Word, ParseError> {
    let chars: Vec<char> = s.chars().collect();
    let mut pos = 0;
    let w = parse_seq(&chars, &mut pos, names)?;
    skip_ws(&chars, &mut pos);
    if pos != chars.len() {
        return Err(ParseError::Malformed(chars[pos..].iter().collect()));
    }
    Ok(w)
}

fn skip_ws(c: &[char], pos: &mut usize) {
    while *pos < c.len() && (c[*pos].is_whitespace() || c[*pos] == '*' || c[*pos] == '.') {
        *pos += 1;
    }
}

fn parse_seq(c: &[char], pos: &mut usize, names: &[String]) -> Result<Word, ParseError> {
    let mut out = Vec::new();
    loop {
        skip_ws(c, pos);
        if *pos >= c.len() || c[*pos] == ')' {
            return Ok(Word(out));
        }
        let base = if c[*pos] == '(' {
            *pos += 1;
            let inner = parse_seq(c, pos, names)?;
            if *pos >= c.len() || c[*pos] != ')' {
                return Err(ParseError::Malformed(c[(*pos).min(c.len())..].iter().collect()));
            }
            *pos += 1;
            inner
        } else if c[*pos].is_ascii_alphabetic() || c[*pos] == '_' {
            let start = *pos;
            while *pos < c.len() && (c[*pos].is_ascii_alphanumeric() || c[*pos] == '_') {
                *pos += 1;
            }
            let name: String = c[start..*pos].iter().collect();
            let g = names
                .iter()
                .position(|n| *n == name)
                .ok_or(ParseError::UnknownGenerator(name))?;
            Word::letter((g + 1) as Letter)
        } else if c[*pos] == '1' {
            *pos += 1;
            Word::identity()
        } else {
            return Err(ParseError::Malformed(c[*pos..].iter().collect()));
        };
        let e = parse_exponent(c, pos)?;
        let piece = if e >= 0 { base.clone() } else { base.inverse() };
        for _ in 0..e.unsigned_abs() {
            out.extend_from_slice(&piece.0);
        }
    }
}

fn parse_exponent(c: &[char], pos: &mut usize) -> Result<i64, ParseError> {
    if *pos >= c.len() || c[*pos] != '^' {
        return Ok(1);
    }
    *pos += 1;
    let braced = *pos < c.len() && c[*pos] == '{';
    if braced {
        *pos += 1;
    }
    let start = *pos;
    if *pos < c.len() && (c[*pos] == '-' || c[*pos] == '+') {
        *pos += 1;
    }
    while *pos < c.len() && c[*pos].is_ascii_digit() {
        *pos += 1;
    }
    let txt: String = c[start..*pos].iter().collect();
    let e: i64 = txt.parse().map_err(|_| ParseError::Malformed(txt.clone()))?;
    if braced {
        if *pos >= c.len() || c[*pos] != '}' {
            return Err(ParseError::Malformed(txt));
        }
        *pos += 1;
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn free_reduce_examples() {
        let n = names();
        let w = parse_word("a a^{-1} b", &n).unwrap();
        assert_eq!(w.free_reduce(), parse_word("b", &n).unwrap());
        assert_eq!(Word::identity().free_reduce(), Word::identity());
        let w = parse_word("a b b^-1 a", &n).unwrap();
        assert_eq!(w.free_reduce(), parse_word("a a", &n).unwrap());
    }

    #[test]
    fn parse_groups_and_powers() {
        let n = names();
        let w = parse_word("(a b)^2 a^-2", &n).unwrap();
        assert_eq!(w.0, vec![1, 2, 1, 2, -1, -1]);
        assert_eq!(w.display(&n).to_string(), "a b a b a^-2");
        assert!(parse_word("c", &n).is_err());
    }

    #[test]
    fn shortlex_places_inverse_after_generator() {
        assert_eq!(shortlex_cmp(&[1], &[-1]), Ordering::Less);
        assert_eq!(shortlex_cmp(&[-1], &[2]), Ordering::Less);
        assert_eq!(shortlex_cmp(&[2, 2], &[1]), Ordering::Greater);
        for r in 0..8 {
            assert_eq!(rank(letter_from_rank(r)), r);
        }
    }
}
