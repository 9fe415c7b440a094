//! Helpers for randomized tests: small random squares, random relabelings,
//! and brute-force oracles (canonical form, group embedding).  Not part of
//! the public API surface.

use crate::groups::FiniteGroup;
use crate::pls::{Pls, Triple};
use rand::Rng;

/// Random partial Latin square with exactly `size` triples, coordinates
/// renumbered contiguously.
pub fn random_pls<R: Rng>(rng: &mut R, size: usize) -> Pls {
    assert!(size >= 1);
    'restart: loop {
        let bound = size as u16;
        let mut triples: Vec<Triple> = Vec::new();
        let mut tries = 0;
        while triples.len() < size {
            tries += 1;
            if tries > 200 {
                continue 'restart;
            }
            let t = Triple::new(
                rng.gen_range(1..=bound),
                rng.gen_range(1..=bound),
                rng.gen_range(1..=bound),
            );
            let clash = triples.iter().any(|u| {
                (u.row == t.row && u.col == t.col)
                    || (u.row == t.row && u.sym == t.sym)
                    || (u.col == t.col && u.sym == t.sym)
            });
            if !clash {
                triples.push(t);
            }
        }
        let p = renumber(triples);
        return p;
    }
}

/// Renumbers rows, columns and symbols of a triple list contiguously and
/// validates the result.
pub fn renumber(triples: Vec<Triple>) -> Pls {
    let mut rows: Vec<u16> = triples.iter().map(|t| t.row).collect();
    let mut cols: Vec<u16> = triples.iter().map(|t| t.col).collect();
    let mut syms: Vec<u16> = triples.iter().map(|t| t.sym).collect();
    for v in [&mut rows, &mut cols, &mut syms] {
        v.sort();
        v.dedup();
    }
    let pos = |v: &[u16], x: u16| v.binary_search(&x).unwrap() as u16 + 1;
    let mapped = triples
        .iter()
        .map(|t| Triple::new(pos(&rows, t.row), pos(&cols, t.col), pos(&syms, t.sym)))
        .collect();
    Pls::new(mapped).unwrap()
}

/// Applies uniformly random row, column and symbol permutations.
pub fn random_relabel<R: Rng>(rng: &mut R, p: &Pls) -> Pls {
    let rp = random_perm(rng, p.nrows());
    let cp = random_perm(rng, p.ncols());
    let sp = random_perm(rng, p.nsyms());
    let triples = p
        .triples()
        .iter()
        .map(|t| {
            Triple::new(
                rp[t.row as usize - 1],
                cp[t.col as usize - 1],
                sp[t.sym as usize - 1],
            )
        })
        .collect();
    Pls::new(triples).unwrap()
}

fn random_perm<R: Rng>(rng: &mut R, n: u16) -> Vec<u16> {
    let mut v: Vec<u16> = (1..=n).collect();
    for i in (1..v.len()).rev() {
        let j = rng.gen_range(0..=i);
        v.swap(i, j);
    }
    v
}

/// All permutations of `1..=n` as old-to-new maps (`perm[old-1] = new`).
pub fn all_perms(n: u16) -> Vec<Vec<u16>> {
    let mut out = Vec::new();
    let mut v: Vec<u16> = (1..=n).collect();
    heap_permute(&mut v, n as usize, &mut out);
    out
}

fn heap_permute(v: &mut Vec<u16>, k: usize, out: &mut Vec<Vec<u16>>) {
    if k <= 1 {
        out.push(v.clone());
        return;
    }
    for i in 0..k {
        heap_permute(v, k - 1, out);
        if k % 2 == 0 {
            v.swap(i, k - 1);
        } else {
            v.swap(0, k - 1);
        }
    }
}

/// Presentations of every isomorphism class of groups of each order up to
/// 16, from the classical classification.  Used as an independent route to
/// the class counts, against the table-backtracking enumeration.
pub fn known_group_presentations(order: usize) -> Vec<(&'static str, &'static str)> {
    match order {
        1 => vec![("C1", "a | a")],
        2 => vec![("C2", "a | a^2")],
        3 => vec![("C3", "a | a^3")],
        4 => vec![
            ("C4", "a | a^4"),
            ("C2 x C2", "a b | a^2, b^2, a^-1 b^-1 a b"),
        ],
        5 => vec![("C5", "a | a^5")],
        6 => vec![
            ("C6", "a | a^6"),
            ("S3", "a b | a^3, b^2, a b a b"),
        ],
        7 => vec![("C7", "a | a^7")],
        8 => vec![
            ("C8", "a | a^8"),
            ("C4 x C2", "a b | a^4, b^2, a^-1 b^-1 a b"),
            ("C2 x C2 x C2", "a b c | a^2, b^2, c^2, a^-1 b^-1 a b, a^-1 c^-1 a c, b^-1 c^-1 b c"),
            ("D4", "a b | a^4, b^2, a b a b"),
            ("Q8", "a b | a^4, b^2 a^-2, b^-1 a b a"),
        ],
        9 => vec![
            ("C9", "a | a^9"),
            ("C3 x C3", "a b | a^3, b^3, a^-1 b^-1 a b"),
        ],
        10 => vec![
            ("C10", "a | a^10"),
            ("D5", "a b | a^5, b^2, a b a b"),
        ],
        11 => vec![("C11", "a | a^11")],
        12 => vec![
            ("C12", "a | a^12"),
            ("C6 x C2", "a b | a^6, b^2, a^-1 b^-1 a b"),
            ("D6", "a b | a^6, b^2, a b a b"),
            ("A4", "a b | a^3, b^2, a b a b a b"),
            ("Dic3", "a b | a^6, b^2 a^-3, b^-1 a b a"),
        ],
        13 => vec![("C13", "a | a^13")],
        14 => vec![
            ("C14", "a | a^14"),
            ("D7", "a b | a^7, b^2, a b a b"),
        ],
        15 => vec![("C15", "a | a^15")],
        16 => vec![
            ("C16", "a | a^16"),
            ("C8 x C2", "a b | a^8, b^2, a^-1 b^-1 a b"),
            ("C4 x C4", "a b | a^4, b^4, a^-1 b^-1 a b"),
            ("C4 x C2 x C2", "a b c | a^4, b^2, c^2, a^-1 b^-1 a b, a^-1 c^-1 a c, b^-1 c^-1 b c"),
            ("C2^4", "a b c d | a^2, b^2, c^2, d^2, a^-1 b^-1 a b, a^-1 c^-1 a c, a^-1 d^-1 a d, b^-1 c^-1 b c, b^-1 d^-1 b d, c^-1 d^-1 c d"),
            ("D8", "a b | a^8, b^2, a b a b"),
            ("Q16", "a b | a^8, b^2 a^-4, b^-1 a b a"),
            ("SD16", "a b | a^8, b^2, b^-1 a b a^-3"),
            ("M4(2)", "a b | a^8, b^2, b^-1 a b a^-5"),
            ("D4 x C2", "a b c | a^4, b^2, a b a b, c^2, a^-1 c^-1 a c, b^-1 c^-1 b c"),
            ("Q8 x C2", "a b c | a^4, b^2 a^-2, b^-1 a b a, c^2, a^-1 c^-1 a c, b^-1 c^-1 b c"),
            ("C4 : C4", "a b | a^4, b^4, b^-1 a b a"),
            ("(C4 x C2) : C2", "a b c | a^4, b^2, c^2, a^-1 b^-1 a b, b^-1 c^-1 b c, c^-1 a c b^-1 a^-1"),
            ("C4 o D4", "a b c | a^4, b^2, a b a b, c^4, c^2 a^-2, a^-1 c^-1 a c, b^-1 c^-1 b c"),
        ],
        _ => vec![],
    }
}

/// Brute-force embedding oracle: tries every assignment of group elements to
/// rows and columns with no normalization at all, forcing symbols from the
/// products.  Exponential; only for cross-checking the real search on tiny
/// inputs.
pub fn naive_embed_exists(p: &Pls, g: &FiniteGroup) -> bool {
    fn feasible(p: &Pls, g: &FiniteGroup, rows: &[usize], cols: &[usize]) -> bool {
        let mut syms = vec![None; p.nsyms() as usize];
        let mut used = vec![false; g.order];
        for t in p.triples() {
            let (Some(&r), Some(&c)) = (
                rows.get(t.row as usize - 1),
                cols.get(t.col as usize - 1),
            ) else {
                continue;
            };
            let v = g.mul(r, c);
            match syms[t.sym as usize - 1] {
                Some(x) if x == v => {}
                Some(_) => return false,
                None => {
                    if used[v] {
                        return false;
                    }
                    syms[t.sym as usize - 1] = Some(v);
                    used[v] = true;
                }
            }
        }
        true
    }

    fn rec(p: &Pls, g: &FiniteGroup, rows: &mut Vec<usize>, cols: &mut Vec<usize>) -> bool {
        if rows.len() < p.nrows() as usize {
            for v in 0..g.order {
                if rows.contains(&v) {
                    continue;
                }
                rows.push(v);
                if feasible(p, g, rows, cols) && rec(p, g, rows, cols) {
                    return true;
                }
                rows.pop();
            }
            return false;
        }
        if cols.len() < p.ncols() as usize {
            for v in 0..g.order {
                if cols.contains(&v) {
                    continue;
                }
                cols.push(v);
                if feasible(p, g, rows, cols) && rec(p, g, rows, cols) {
                    return true;
                }
                cols.pop();
            }
            return false;
        }
        true
    }

    if p.nrows() as usize > g.order || p.ncols() as usize > g.order || p.nsyms() as usize > g.order
    {
        return false;
    }
    rec(p, g, &mut Vec::new(), &mut Vec::new())
}

/// Brute-force canonical encoding: minimum of the byte encoding over all six
/// conjugates, all row permutations, and all column permutations, with
/// symbols renamed greedily by first appearance.  With rows and columns
/// fixed the sorted triple order is already determined (cells are distinct),
/// so first-appearance symbol renaming is the unique minimum for that part.
pub fn brute_canonical_bytes(p: &Pls) -> Vec<u8> {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut best: Option<Vec<u8>> = None;
    for perm in PERMS {
        let q = p.conjugate(perm);
        let (m, n, k) = (q.nrows(), q.ncols(), q.nsyms());
        for rp in all_perms(m) {
            for cp in all_perms(n) {
                let mut relabeled: Vec<(u16, u16, u16)> = q
                    .triples()
                    .iter()
                    .map(|t| (rp[t.row as usize - 1], cp[t.col as usize - 1], t.sym))
                    .collect();
                relabeled.sort();
                let mut sym_map = vec![0u16; k as usize + 1];
                let mut next = 1u16;
                let mut bytes = vec![m as u8, n as u8, k as u8];
                for (r, c, s) in relabeled {
                    if sym_map[s as usize] == 0 {
                        sym_map[s as usize] = next;
                        next += 1;
                    }
                    bytes.extend_from_slice(&[r as u8, c as u8, sym_map[s as usize] as u8]);
                }
                if best.as_ref().map_or(true, |b| bytes < *b) {
                    best = Some(bytes);
                }
            }
        }
    }
    best.unwrap()
}
