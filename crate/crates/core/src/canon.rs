//! Canonical forms for species equivalence.
//!
//! Two squares belong to the same species when one arises from the other by
//! permuting the three coordinate roles (conjugation) and independently
//! relabeling rows, columns and symbols.  The canonical form of a square is
//! the lexicographically least byte encoding `[m, n, k, r1, c1, s1, r2, ...]`
//! over its full orbit: sorted triple list, dimensions first.
//!
//! The minimum over relabelings is found by a backtracking search that emits
//! the output triple list in sorted order, assigning fresh labels lazily in
//! order of first appearance.  Minimal outputs always use first-appearance
//! labeling: if a label were skipped for a smaller unused one, swapping the
//! two labels everywhere would shrink the output at the first position where
//! they differ.  Each step therefore emits only triples achieving the least
//! tentative label, branching when several distinct triples achieve it.

use crate::pls::{Pls, Triple};
use std::cmp::Ordering;
use std::fmt;

/// Canonical byte encoding of a species: `[m, n, k]` then the sorted triples
/// of the canonically labeled representative, three bytes each.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm(Vec<u8>);

impl CanonicalForm {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.hex())
    }
}

pub fn canonical_form(p: &Pls) -> CanonicalForm {
    canonicalize(p).1
}

/// Returns the canonically labeled representative of `p`'s species together
/// with its canonical form.
pub fn canonicalize(p: &Pls) -> (Pls, CanonicalForm) {
    assert!(p.size() <= 64, "canonical search supports at most 64 triples");
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut best: Option<([u16; 3], Vec<Triple>)> = None;
    for perm in PERMS {
        let q = p.conjugate(perm);
        let dims = [q.nrows(), q.ncols(), q.nsyms()];
        let seed = match &best {
            Some((bd, list)) => match dims.cmp(bd) {
                Ordering::Greater => continue,
                Ordering::Less => None,
                Ordering::Equal => Some(list.clone()),
            },
            None => None,
        };
        let had_seed = seed.is_some();
        if let Some(list) = min_labeled_list(q.triples(), seed) {
            best = Some((dims, list));
        } else if !had_seed {
            unreachable!("unseeded search always produces a list");
        }
    }
    let (dims, list) = best.unwrap();
    let mut bytes = Vec::with_capacity(3 + 3 * list.len());
    bytes.extend_from_slice(&[dims[0] as u8, dims[1] as u8, dims[2] as u8]);
    for t in &list {
        bytes.extend_from_slice(&[t.row as u8, t.col as u8, t.sym as u8]);
    }
    let rep = Pls::new(list).expect("canonical relabeling is valid");
    (rep, CanonicalForm(bytes))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Rel {
    /// No best list known yet on this path.
    NoBest,
    /// Emitted prefix equals the current best prefix.
    Equal,
    /// Emitted prefix is strictly less than the current best.
    Less,
}

struct Search<'a> {
    ts: &'a [Triple],
    row_lab: Vec<u16>,
    col_lab: Vec<u16>,
    sym_lab: Vec<u16>,
    next: [u16; 3],
    trail: Vec<Triple>,
    best: Option<Vec<Triple>>,
    version: u64,
    improved: bool,
}

/// Minimum sorted relabeled triple list, or `None` when a seed was supplied
/// and nothing beats it.
fn min_labeled_list(ts: &[Triple], seed: Option<Vec<Triple>>) -> Option<Vec<Triple>> {
    let maxdim = |f: fn(&Triple) -> u16| ts.iter().map(f).max().unwrap() as usize;
    let rel = if seed.is_some() { Rel::Equal } else { Rel::NoBest };
    let mut s = Search {
        ts,
        row_lab: vec![0; maxdim(|t| t.row) + 1],
        col_lab: vec![0; maxdim(|t| t.col) + 1],
        sym_lab: vec![0; maxdim(|t| t.sym) + 1],
        next: [1, 1, 1],
        trail: Vec::with_capacity(ts.len()),
        best: seed,
        version: 0,
        improved: false,
    };
    let full: u64 = if ts.len() == 64 {
        u64::MAX
    } else {
        (1u64 << ts.len()) - 1
    };
    dfs(&mut s, full, rel);
    if s.improved {
        s.best
    } else {
        None
    }
}

fn dfs(s: &mut Search, remaining: u64, rel: Rel) {
    let pos = s.trail.len();
    if remaining == 0 {
        if rel != Rel::Equal {
            s.best = Some(s.trail.clone());
            s.version += 1;
            s.improved = true;
        }
        return;
    }

    // Least tentative label over remaining triples and the triples achieving
    // it.  Unassigned coordinates take the next fresh label.
    let mut min_lab = Triple::new(u16::MAX, u16::MAX, u16::MAX);
    let mut cands: Vec<usize> = Vec::new();
    let mut bits = remaining;
    while bits != 0 {
        let i = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        let t = s.ts[i];
        let lab = Triple::new(
            label_or(&s.row_lab, t.row, s.next[0]),
            label_or(&s.col_lab, t.col, s.next[1]),
            label_or(&s.sym_lab, t.sym, s.next[2]),
        );
        match lab.cmp(&min_lab) {
            Ordering::Less => {
                min_lab = lab;
                cands.clear();
                cands.push(i);
            }
            Ordering::Equal => cands.push(i),
            Ordering::Greater => {}
        }
    }

    let child_rel = match rel {
        Rel::Equal => match min_lab.cmp(&s.best.as_ref().unwrap()[pos]) {
            Ordering::Greater => return,
            Ordering::Less => Rel::Less,
            Ordering::Equal => Rel::Equal,
        },
        other => other,
    };

    for &i in &cands {
        let t = s.ts[i];
        let saved = (
            s.row_lab[t.row as usize],
            s.col_lab[t.col as usize],
            s.sym_lab[t.sym as usize],
            s.next,
        );
        assign(&mut s.row_lab, t.row, &mut s.next[0]);
        assign(&mut s.col_lab, t.col, &mut s.next[1]);
        assign(&mut s.sym_lab, t.sym, &mut s.next[2]);
        s.trail.push(min_lab);

        let before = s.version;
        dfs(s, remaining & !(1u64 << i), child_rel);
        s.trail.pop();
        s.row_lab[t.row as usize] = saved.0;
        s.col_lab[t.col as usize] = saved.1;
        s.sym_lab[t.sym as usize] = saved.2;
        s.next = saved.3;

        // A replacement inside the child extends our trail, so the prefix of
        // the new best equals our emitted prefix: remaining siblings must
        // compare against it rather than keep a stale Less/NoBest state.
        if s.version != before {
            return dfs_tail(s, remaining, &cands, cands.iter().position(|&x| x == i).unwrap() + 1, min_lab);
        }
    }
}

/// Continues a candidate loop after the best list changed mid-node: the
/// emitted label is now exactly the best list's entry at this position, so
/// the remaining candidates recurse in `Equal` state.
fn dfs_tail(s: &mut Search, remaining: u64, cands: &[usize], from: usize, min_lab: Triple) {
    for &i in &cands[from..] {
        let t = s.ts[i];
        let saved = (
            s.row_lab[t.row as usize],
            s.col_lab[t.col as usize],
            s.sym_lab[t.sym as usize],
            s.next,
        );
        assign(&mut s.row_lab, t.row, &mut s.next[0]);
        assign(&mut s.col_lab, t.col, &mut s.next[1]);
        assign(&mut s.sym_lab, t.sym, &mut s.next[2]);
        s.trail.push(min_lab);
        dfs(s, remaining & !(1u64 << i), Rel::Equal);
        s.trail.pop();
        s.row_lab[t.row as usize] = saved.0;
        s.col_lab[t.col as usize] = saved.1;
        s.sym_lab[t.sym as usize] = saved.2;
        s.next = saved.3;
    }
}

fn label_or(labs: &[u16], v: u16, next: u16) -> u16 {
    let l = labs[v as usize];
    if l == 0 {
        next
    } else {
        l
    }
}

fn assign(labs: &mut [u16], v: u16, next: &mut u16) {
    if labs[v as usize] == 0 {
        labs[v as usize] = *next;
        *next += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{brute_canonical_bytes, random_pls, random_relabel};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn canonical_rep_is_in_the_same_species_and_fixed() {
        let p = Pls::parse("a d . .\n. a d .\n. b . c\nc . b a").unwrap();
        let (rep, form) = canonicalize(&p);
        assert_eq!(canonical_form(&rep), form);
        assert_eq!(rep.size(), p.size());
    }

    #[test]
    fn matches_brute_force_orbit_minimum_on_small_squares() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..400 {
            let size = rng.gen_range(1..=5);
            let p = random_pls(&mut rng, size);
            assert_eq!(
                canonical_form(&p).as_bytes(),
                brute_canonical_bytes(&p),
                "square:\n{p}"
            );
        }
    }

    #[test]
    fn invariant_under_relabeling_and_conjugation() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..300 {
            let size = rng.gen_range(1..=8);
            let p = random_pls(&mut rng, size);
            let form = canonical_form(&p);
            let q = random_relabel(&mut rng, &p);
            assert_eq!(canonical_form(&q), form, "relabel of\n{p}");
            let perm = [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
                [rng.gen_range(0..5)];
            assert_eq!(canonical_form(&p.conjugate(perm)), form, "conjugate of\n{p}");
        }
    }

    #[test]
    fn distinguishes_distinct_species() {
        let row_pair = Pls::parse("a b").unwrap();
        let diagonal = Pls::parse("a .\n. b").unwrap();
        assert_ne!(canonical_form(&row_pair), canonical_form(&diagonal));
        let col_pair = Pls::parse("a\nb").unwrap();
        assert_eq!(canonical_form(&row_pair), canonical_form(&col_pair));
    }
}
