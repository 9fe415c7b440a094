//! Words over a finite generating set, with free and cyclic reduction.
//!
//! A letter is a nonzero i32: letter `g+1` is generator `g`, letter `-(g+1)`
//! its inverse.  Words are kept freely reduced by every operation here
//! except `from_letters`, which stores raw input for callers that reduce
//! explicitly.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<i32>", into = "Vec<i32>")]
pub struct Word {
    letters: Vec<i32>,
}

impl From<Word> for Vec<i32> {
    fn from(w: Word) -> Vec<i32> {
        w.letters
    }
}

impl TryFrom<Vec<i32>> for Word {
    type Error = String;

    fn try_from(letters: Vec<i32>) -> Result<Word, String> {
        if letters.contains(&0) {
            return Err("word letters must be nonzero".to_string());
        }
        Ok(Word { letters })
    }
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    /// Single generator `gen` (0-based), or its inverse.
    pub fn gen(gen: usize, inverse: bool) -> Self {
        let l = gen as i32 + 1;
        Word {
            letters: vec![if inverse { -l } else { l }],
        }
    }

    /// Raw letters, unreduced.  Panics on zero entries.
    pub fn from_letters(letters: Vec<i32>) -> Self {
        assert!(letters.iter().all(|&l| l != 0));
        Word { letters }
    }

    pub fn letters(&self) -> &[i32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Cancels adjacent inverse pairs until none remain.
    pub fn free_reduce(&self) -> Word {
        let mut out: Vec<i32> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word { letters: out }
    }

    /// Freely reduces, then strips matching conjugating letters from the two
    /// ends, giving the shortest cyclic conjugate class representative.
    pub fn cyclic_reduce(&self) -> Word {
        let mut w = self.free_reduce().letters;
        let mut start = 0;
        let mut end = w.len();
        while end > start + 1 && w[start] == -w[end - 1] {
            start += 1;
            end -= 1;
        }
        w.truncate(end);
        w.drain(..start);
        Word { letters: w }
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|&l| -l).collect(),
        }
    }

    /// Product in the free group (freely reduced).
    pub fn mul(&self, other: &Word) -> Word {
        let mut out = self.letters.clone();
        for &l in &other.letters {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word { letters: out }
    }

    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::empty();
        for _ in 0..n.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// Rotation by `k` letters: `w[k..] w[..k]`, unreduced.
    pub fn rotate(&self, k: usize) -> Word {
        let mut letters = self.letters[k..].to_vec();
        letters.extend_from_slice(&self.letters[..k]);
        Word { letters }
    }

    /// Replaces generator `gen` (0-based) by `rep` everywhere and freely
    /// reduces.
    pub fn substitute(&self, gen: usize, rep: &Word) -> Word {
        let g = gen as i32 + 1;
        let mut out: Vec<i32> = Vec::with_capacity(self.letters.len());
        let push = |l: i32, out: &mut Vec<i32>| {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        };
        for &l in &self.letters {
            if l == g {
                for &r in &rep.letters {
                    push(r, &mut out);
                }
            } else if l == -g {
                for &r in rep.letters.iter().rev() {
                    push(-r, &mut out);
                }
            } else {
                push(l, &mut out);
            }
        }
        Word { letters: out }
    }

    /// Rewrites every letter through `images`: the letter for generator `g`
    /// becomes the word `images[g]` (inverted for negative letters), and the
    /// result is freely reduced.
    pub fn apply_images(&self, images: &[Word]) -> Word {
        let mut out = Word::empty();
        for &l in &self.letters {
            let img = &images[l.unsigned_abs() as usize - 1];
            out = if l > 0 {
                out.mul(img)
            } else {
                out.mul(&img.inverse())
            };
        }
        out
    }

    /// Net exponent of generator `gen` (0-based).
    pub fn exponent_sum(&self, gen: usize) -> i64 {
        let g = gen as i32 + 1;
        self.letters
            .iter()
            .map(|&l| {
                if l == g {
                    1
                } else if l == -g {
                    -1
                } else {
                    0
                }
            })
            .sum()
    }

    /// Occurrences of generator `gen` regardless of sign.
    pub fn occurrences(&self, gen: usize) -> usize {
        let g = gen as i32 + 1;
        self.letters.iter().filter(|&&l| l.abs() == g).count()
    }

    pub fn max_gen(&self) -> Option<usize> {
        self.letters.iter().map(|l| l.unsigned_abs() as usize - 1).max()
    }

    /// Renames generators: letter for generator `g` becomes the letter for
    /// `map[g]`.
    pub fn rename(&self, map: &[usize]) -> Word {
        Word {
            letters: self
                .letters
                .iter()
                .map(|&l| {
                    let g = map[l.unsigned_abs() as usize - 1] as i32 + 1;
                    if l > 0 {
                        g
                    } else {
                        -g
                    }
                })
                .collect(),
        }
    }

    /// Exponent notation with the given generator names, e.g.
    /// `b^-2 a^-1 b^-1 a b a^-1 b a`; the empty word prints as `1`.
    pub fn display(&self, names: &[String]) -> String {
        if self.letters.is_empty() {
            return "1".to_string();
        }
        let mut parts: Vec<(usize, i64)> = Vec::new();
        for &l in &self.letters {
            let g = l.unsigned_abs() as usize - 1;
            let e = if l > 0 { 1 } else { -1 };
            match parts.last_mut() {
                Some((pg, pe)) if *pg == g && (*pe > 0) == (e > 0) => *pe += e,
                _ => parts.push((g, e)),
            }
        }
        let mut out = String::new();
        for (i, (g, e)) in parts.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            if *e == 1 {
                out.push_str(&names[*g]);
            } else {
                write!(out, "{}^{}", names[*g], e).unwrap();
            }
        }
        out
    }

    /// Parses exponent notation produced by `display`.  Unknown names are an
    /// error; `1` denotes the empty word.
    pub fn parse(text: &str, names: &[String]) -> Result<Word, String> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let (name, exp) = match tok.split_once('^') {
                Some((n, e)) => (
                    n,
                    e.parse::<i64>().map_err(|_| format!("bad exponent in `{tok}`"))?,
                ),
                None => (tok, 1),
            };
            let g = names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| format!("unknown generator `{name}`"))? as i32
                + 1;
            let l = if exp < 0 { -g } else { g };
            for _ in 0..exp.unsigned_abs() {
                letters.push(l);
            }
        }
        Ok(Word { letters })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names() -> Vec<String> {
        vec!["a".into(), "b".into()]
    }

    #[test]
    fn free_reduction_cancels_pairs() {
        let w = Word::from_letters(vec![1, 2, -2, -1, 1]);
        assert_eq!(w.free_reduce(), Word::from_letters(vec![1]));
        assert!(Word::from_letters(vec![1, -1]).free_reduce().is_empty());
    }

    #[test]
    fn cyclic_reduction_strips_conjugation() {
        let w = Word::from_letters(vec![1, 2, 2, -1]);
        assert_eq!(w.cyclic_reduce(), Word::from_letters(vec![2, 2]));
        let odd = Word::from_letters(vec![1, -1, 2]);
        assert_eq!(odd.cyclic_reduce(), Word::from_letters(vec![2]));
    }

    #[test]
    fn substitution_reduces() {
        // In a b a^-1 with a := b, the conjugation cancels entirely.
        let w = Word::from_letters(vec![1, 2, -1]);
        let rep = Word::from_letters(vec![2]);
        assert_eq!(w.substitute(0, &rep), Word::from_letters(vec![2]));
    }

    #[test]
    fn display_and_parse_roundtrip() {
        let w = Word::from_letters(vec![-2, -2, -1, -2, 1, 2, -1, 2, 1]);
        let shown = w.display(&names());
        assert_eq!(shown, "b^-2 a^-1 b^-1 a b a^-1 b a");
        assert_eq!(Word::parse(&shown, &names()).unwrap(), w);
        assert_eq!(Word::empty().display(&names()), "1");
        assert!(Word::parse("1", &names()).unwrap().is_empty());
    }

    #[test]
    fn group_identities() {
        use proptest::prelude::*;
        proptest!(|(raw in proptest::collection::vec(
            (0usize..3, proptest::bool::ANY), 0..40))| {
            let letters: Vec<i32> = raw
                .iter()
                .map(|&(g, inv)| if inv { -(g as i32 + 1) } else { g as i32 + 1 })
                .collect();
            let w = Word::from_letters(letters).free_reduce();
            prop_assert!(w.mul(&w.inverse()).is_empty());
            prop_assert_eq!(w.free_reduce(), w.clone());
            let c = w.cyclic_reduce();
            prop_assert!(c.len() <= w.len());
        });
    }
}
