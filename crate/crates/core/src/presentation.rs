//! Finitely presented groups read off from partial Latin squares, and
//! Tietze-style simplification of those presentations.
//!
//! A square with rows 1..=m, columns 1..=n and symbols 1..=k defines the
//! group with generators R2..Rm, C2..Cn and one generator per symbol (R1 and
//! C1 are normalised to the identity), and one relator `R_i C_j s^-1` per
//! filled cell (i, j, s).  Every group a square embeds in is a quotient of
//! this group, so equalities derived here hold in every embedding target.

use crate::pls::Pls;
use crate::word::Word;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Default ceiling on the total relator length during simplification.
pub const TIETZE_BUDGET: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub gens: Vec<String>,
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn num_gens(&self) -> usize {
        self.gens.len()
    }

    pub fn total_length(&self) -> usize {
        self.relators.iter().map(|r| r.len()).sum()
    }

    /// True when there are no relators, i.e. the group is free on `gens`.
    pub fn is_free(&self) -> bool {
        self.relators.is_empty()
    }

    /// Parses the `Display` format `gens | relator, relator, ...`.
    pub fn parse(text: &str) -> Result<Presentation, String> {
        let (gens_part, rel_part) = text
            .split_once('|')
            .ok_or_else(|| "missing `|` separator".to_string())?;
        let gens: Vec<String> = gens_part.split_whitespace().map(str::to_string).collect();
        if gens.is_empty() {
            return Err("no generators".to_string());
        }
        let mut relators = Vec::new();
        for part in rel_part.split(',') {
            if part.trim().is_empty() {
                continue;
            }
            relators.push(Word::parse(part, &gens)?);
        }
        Ok(Presentation { gens, relators })
    }
}

impl fmt::Display for Presentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} |", self.gens.join(" "))?;
        for (i, r) in self.relators.iter().enumerate() {
            let sep = if i == 0 { " " } else { ", " };
            write!(f, "{sep}{}", r.display(&self.gens))?;
        }
        Ok(())
    }
}

/// Row, column, and symbol labels as words in the generators of some
/// presentation.  `rows[0]` and `cols[0]` are the empty word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlsLabels {
    pub rows: Vec<Word>,
    pub cols: Vec<Word>,
    pub syms: Vec<Word>,
}

/// Builds the defining presentation of a square together with the labels of
/// its rows, columns, and symbols in that presentation's generators.
pub fn presentation_of(p: &Pls) -> (Presentation, PlsLabels) {
    let (m, n, k) = (p.nrows() as usize, p.ncols() as usize, p.nsyms() as usize);
    let row_gen = |i: usize| i - 2; // rows 2..=m
    let col_gen = |j: usize| (m - 1) + (j - 2); // cols 2..=n
    let sym_gen = |s: usize| (m - 1) + (n - 1) + (s - 1);
    let mut gens = Vec::with_capacity(m + n + k - 2);
    for i in 2..=m {
        gens.push(format!("r{i}"));
    }
    for j in 2..=n {
        gens.push(format!("c{j}"));
    }
    for s in 1..=k {
        gens.push(p.sym_name(s as u16));
    }
    let relators = p
        .triples()
        .iter()
        .map(|t| {
            let mut w = Word::empty();
            if t.row > 1 {
                w = w.mul(&Word::gen(row_gen(t.row as usize), false));
            }
            if t.col > 1 {
                w = w.mul(&Word::gen(col_gen(t.col as usize), false));
            }
            w.mul(&Word::gen(sym_gen(t.sym as usize), true))
        })
        .collect();
    let labels = PlsLabels {
        rows: (1..=m)
            .map(|i| {
                if i == 1 {
                    Word::empty()
                } else {
                    Word::gen(row_gen(i), false)
                }
            })
            .collect(),
        cols: (1..=n)
            .map(|j| {
                if j == 1 {
                    Word::empty()
                } else {
                    Word::gen(col_gen(j), false)
                }
            })
            .collect(),
        syms: (1..=k).map(|s| Word::gen(sym_gen(s), false)).collect(),
    };
    (Presentation { gens, relators }, labels)
}

/// Result of simplifying a presentation: the smaller presentation, plus each
/// original generator written as a word in the surviving generators.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub pres: Presentation,
    pub images: Vec<Word>,
    pub budget_exhausted: bool,
}

/// Shrinks a presentation by repeatedly eliminating a generator that occurs
/// exactly once in some relator (substituting the rest of that relator for
/// it everywhere) and by replacing relators with shorter products of relator
/// conjugates.
///
/// Different elimination orders can get stuck in different places, so this
/// runs both implemented orders and keeps the outcome with the fewest
/// generators (ties: fewest relators, then smallest total length, then the
/// `MinTotalLength` result, which tends to have shorter generator images).
/// The reduction stops early if no elimination keeps the total relator
/// length within `budget`.
pub fn tietze_reduce(pres: &Presentation, budget: usize) -> Reduced {
    let a = tietze_reduce_ordered(pres, budget, EliminationOrder::MinTotalLength, true);
    let b = tietze_reduce_ordered(pres, budget, EliminationOrder::ShortestRelator, true);
    let rank = |r: &Reduced| {
        (
            r.pres.num_gens(),
            r.pres.relators.len(),
            r.pres.total_length(),
        )
    };
    if rank(&b) < rank(&a) {
        b
    } else {
        a
    }
}

/// How to pick the next generator elimination when several are possible.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EliminationOrder {
    /// Shortest defining relator first, ties by lowest generator id.
    ShortestRelator,
    /// Smallest resulting total relator length first, ties by shortest
    /// defining relator, then lowest generator id.
    MinTotalLength,
}

/// `tietze_reduce` with the elimination order and the relator-shortening
/// pass selectable, for comparing reduction strategies.
pub fn tietze_reduce_ordered(
    pres: &Presentation,
    budget: usize,
    order: EliminationOrder,
    use_shorten: bool,
) -> Reduced {
    let mut names = pres.gens.clone();
    let mut rels = pres.relators.clone();
    let mut images: Vec<Word> = (0..names.len()).map(|g| Word::gen(g, false)).collect();
    let mut budget_exhausted = false;

    loop {
        normalize(&mut rels);
        if use_shorten {
            shorten(&mut rels);
        }

        let Some((gen, rel_idx, rep)) =
            best_elimination(&rels, budget, order, &mut budget_exhausted)
        else {
            break;
        };
        let mut next = Vec::with_capacity(rels.len() - 1);
        for (i, r) in rels.iter().enumerate() {
            if i != rel_idx {
                next.push(r.substitute(gen, &rep).cyclic_reduce());
            }
        }
        rels = next;
        for im in &mut images {
            *im = im.substitute(gen, &rep);
        }
        // Renumber the generators above the eliminated one down by one.
        let map: Vec<usize> = (0..names.len())
            .map(|g| if g > gen { g - 1 } else { g })
            .collect();
        for r in &mut rels {
            *r = r.rename(&map);
        }
        for im in &mut images {
            *im = im.rename(&map);
        }
        names.remove(gen);
    }

    Reduced {
        pres: Presentation {
            gens: names,
            relators: rels,
        },
        images,
        budget_exhausted,
    }
}

/// Freely and cyclically reduces relators, drops empty ones, and dedups.
fn normalize(rels: &mut Vec<Word>) {
    for r in rels.iter_mut() {
        *r = r.cyclic_reduce();
    }
    rels.retain(|r| !r.is_empty());
    rels.sort_by_key(|r| (r.len(), r.letters().to_vec()));
    rels.dedup();
}

/// Replaces a relator by a strictly shorter product of a rotation of itself
/// with a rotation of another relator or its inverse, until no replacement
/// shortens anything.  Rotation-equivalent and inverse duplicates cancel to
/// the empty word and are dropped.
fn shorten(rels: &mut Vec<Word>) {
    loop {
        let mut improved = false;
        'outer: for i in 0..rels.len() {
            for j in 0..rels.len() {
                if i == j {
                    continue;
                }
                for other in [rels[j].clone(), rels[j].inverse()] {
                    for kj in 0..other.len() {
                        let rot_j = other.rotate(kj);
                        for ki in 0..rels[i].len() {
                            let cand = rels[i].rotate(ki).mul(&rot_j).cyclic_reduce();
                            if cand.len() < rels[i].len() {
                                rels[i] = cand;
                                improved = true;
                                continue 'outer;
                            }
                        }
                    }
                }
            }
        }
        normalize(rels);
        if !improved {
            return;
        }
    }
}

/// Finds the generator elimination minimising the total relator length of
/// the result; ties prefer a shorter defining relator, then a lower
/// generator index.  Returns the generator, the index of its defining
/// relator, and its replacement word.
fn best_elimination(
    rels: &[Word],
    budget: usize,
    order: EliminationOrder,
    budget_exhausted: &mut bool,
) -> Option<(usize, usize, Word)> {
    let mut best: Option<((usize, usize, usize), usize, usize, usize, Word)> = None;
    for (gen, idx, rep) in elimination_candidates(rels) {
        let total: usize = rels
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != idx)
            .map(|(_, other)| other.substitute(gen, &rep).cyclic_reduce().len())
            .sum();
        let key = match order {
            EliminationOrder::ShortestRelator => (rels[idx].len(), gen, 0),
            EliminationOrder::MinTotalLength => (total, rels[idx].len(), gen),
        };
        if best.as_ref().map(|(k, ..)| key < *k).unwrap_or(true) {
            best = Some((key, total, gen, idx, rep));
        }
    }
    let (_, total, gen, idx, rep) = best?;
    if total > budget {
        *budget_exhausted = true;
        return None;
    }
    Some((gen, idx, rep))
}

/// All (generator, relator index, replacement word) triples where the
/// generator occurs exactly once in that relator, so the relator can define
/// it.
fn elimination_candidates(rels: &[Word]) -> Vec<(usize, usize, Word)> {
    let mut out = Vec::new();
    for (idx, r) in rels.iter().enumerate() {
        let Some(max_gen) = r.max_gen() else { continue };
        for gen in 0..=max_gen {
            if r.occurrences(gen) != 1 {
                continue;
            }
            let pos = r
                .letters()
                .iter()
                .position(|&l| l.unsigned_abs() as usize - 1 == gen)
                .unwrap();
            let rot = r.rotate(pos);
            let rest = Word::from_letters(rot.letters()[1..].to_vec());
            let rep = if rot.letters()[0] > 0 {
                // g w = 1, so g = w^-1.
                rest.inverse()
            } else {
                // g^-1 w = 1, so g = w.
                rest
            };
            out.push((gen, idx, rep));
        }
    }
    out
}


/// Rewrites labels through the images produced by `tietze_reduce`, yielding
/// labels as words in the reduced presentation's generators.
pub fn reduced_labels(labels: &PlsLabels, images: &[Word]) -> PlsLabels {
    let map = |ws: &[Word]| ws.iter().map(|w| w.apply_images(images)).collect();
    PlsLabels {
        rows: map(&labels.rows),
        cols: map(&labels.cols),
        syms: map(&labels.syms),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Rows,
    Cols,
    Syms,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Rows => write!(f, "rows"),
            Family::Cols => write!(f, "columns"),
            Family::Syms => write!(f, "symbols"),
        }
    }
}

/// Two labels in one family that are equal as group elements.  Positions are
/// 1-based (row index, column index, or symbol id).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collision {
    pub family: Family,
    pub a: usize,
    pub b: usize,
}

/// Looks for two labels in the same family that are literally equal as
/// freely reduced words.  Such labels are equal in the presented group, so
/// they collide in every group the square could embed in.  When the
/// presentation is free this check is complete; otherwise it may miss
/// collisions (see the rewriting-based check for those).
pub fn find_duplicate(labels: &PlsLabels) -> Option<Collision> {
    let families = [
        (Family::Rows, &labels.rows),
        (Family::Cols, &labels.cols),
        (Family::Syms, &labels.syms),
    ];
    for (family, words) in families {
        for a in 0..words.len() {
            for b in a + 1..words.len() {
                if words[a] == words[b] {
                    return Some(Collision {
                        family,
                        a: a + 1,
                        b: b + 1,
                    });
                }
            }
        }
    }
    None
}

/// True when `a` and `b` define the same one-relator presentation up to
/// renaming generators, inverting generators, inverting the relator, and
/// cyclic rotation.
pub fn same_relator_class(a: &Word, b: &Word, ngens: usize) -> bool {
    let a = a.cyclic_reduce();
    let b = b.cyclic_reduce();
    if a.len() != b.len() {
        return false;
    }
    let mut perms = vec![vec![]];
    for _ in 0..ngens {
        let mut next = Vec::new();
        for p in &perms {
            for g in 0..ngens {
                if !p.contains(&g) {
                    let mut q = p.clone();
                    q.push(g);
                    next.push(q);
                }
            }
        }
        perms = next;
    }
    for perm in &perms {
        for signs in 0..(1u32 << ngens) {
            let mut w = a.rename(perm);
            for g in 0..ngens {
                if signs & (1 << g) != 0 {
                    w = w.substitute(g, &Word::gen(g, true));
                }
            }
            for cand in [w.clone(), w.inverse()] {
                for k in 0..cand.len().max(1) {
                    if cand.rotate(k % cand.len().max(1)) == b {
                        return true;
                    }
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    const NINE_CELL: &str = "a d . .\n. a d .\n. b . c\nc . b a\n";
    const TEN_CELL: &str = "a b c .\nb d . c\nc . d .\n. e . a\n";

    #[test]
    fn initial_presentation_from_grid() {
        let p = Pls::parse(NINE_CELL).unwrap();
        let (pres, labels) = presentation_of(&p);
        // Symbol ids follow first appearance in the grid: a, d, b, c.
        assert_eq!(
            pres.gens,
            ["r2", "r3", "r4", "c2", "c3", "c4", "a", "d", "b", "c"]
        );
        let shown: Vec<String> = pres.relators.iter().map(|r| r.display(&pres.gens)).collect();
        assert_eq!(
            shown,
            [
                "a^-1",
                "c2 d^-1",
                "r2 c2 a^-1",
                "r2 c3 d^-1",
                "r3 c2 b^-1",
                "r3 c4 c^-1",
                "r4 c^-1",
                "r4 c3 b^-1",
                "r4 c4 a^-1",
            ]
        );
        assert!(labels.rows[0].is_empty() && labels.cols[0].is_empty());
        assert_eq!(labels.syms[1].display(&pres.gens), "d");
        let roundtrip = Presentation::parse(&pres.to_string()).unwrap();
        assert_eq!(roundtrip, pres);
    }

    #[test]
    fn reduces_nine_cell_square_to_one_free_generator() {
        let p = Pls::parse(NINE_CELL).unwrap();
        let (pres, labels) = presentation_of(&p);
        let red = tietze_reduce(&pres, TIETZE_BUDGET);
        assert!(!red.budget_exhausted);
        assert_eq!(red.pres.num_gens(), 1);
        assert!(red.pres.is_free());
        // The images must kill every original relator: the reduced group is
        // free, so the rewritten relators have to reduce to the empty word.
        for r in &pres.relators {
            assert!(r.apply_images(&red.images).is_empty());
        }
        let labs = reduced_labels(&labels, &red.images);
        // The symbols named c and d coincide (ids 4 and 2 here); the symbol
        // named a is the identity and b is the cube of d.
        let dup = find_duplicate(&labs).unwrap();
        assert_eq!(dup.family, Family::Syms);
        let mut names = [p.sym_name(dup.a as u16), p.sym_name(dup.b as u16)];
        names.sort();
        assert_eq!(names, ["c", "d"]);
        assert!(labs.syms[0].is_empty());
        assert_eq!(labs.syms[2], labs.syms[1].pow(3));
        assert_eq!(labs.rows[1], labs.syms[3].inverse());
    }

    #[test]
    fn reduces_ten_cell_square_to_single_length_four_relator() {
        let p = Pls::parse(TEN_CELL).unwrap();
        let (pres, labels) = presentation_of(&p);
        let red = tietze_reduce(&pres, TIETZE_BUDGET);
        assert!(!red.budget_exhausted);
        assert_eq!(red.pres.num_gens(), 2);
        assert_eq!(red.pres.relators.len(), 1);
        let target = Word::from_letters(vec![2, 2, -1, -1]); // v^2 u^-2
        assert!(same_relator_class(&red.pres.relators[0], &target, 2));
        // No literal duplicates among the labels: the collision here is only
        // visible modulo the relator.
        let labs = reduced_labels(&labels, &red.images);
        assert_eq!(find_duplicate(&labs), None);
        assert_eq!(labs.rows.len(), 4);
        assert_eq!(labs.cols.len(), 4);
        assert_eq!(labs.syms.len(), 5);
    }

    #[test]
    fn eliminates_trivial_generators() {
        // x and y both become trivial: x directly, then y via x y^-1.
        let pres = Presentation {
            gens: vec!["x".into(), "y".into()],
            relators: vec![
                Word::from_letters(vec![1]),
                Word::from_letters(vec![1, -2]),
            ],
        };
        let red = tietze_reduce(&pres, TIETZE_BUDGET);
        assert_eq!(red.pres.num_gens(), 0);
        assert!(red.pres.is_free());
        assert!(red.images.iter().all(|w| w.is_empty()));
    }

    #[test]
    fn relator_class_matching_is_symmetry_invariant() {
        let target = Word::from_letters(vec![2, 2, -1, -1]);
        // u^2 v^-2 after swapping names, inverting, rotating.
        assert!(same_relator_class(
            &Word::from_letters(vec![1, 1, -2, -2]),
            &target,
            2
        ));
        assert!(same_relator_class(
            &Word::from_letters(vec![-1, 2, 2, -1]),
            &target,
            2
        ));
        // The alternating relator is a different class.
        assert!(!same_relator_class(
            &Word::from_letters(vec![1, 2, 1, -2]),
            &target,
            2
        ));
    }
}
