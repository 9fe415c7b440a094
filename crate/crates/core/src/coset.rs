//! Todd–Coxeter coset enumeration: subgroup index and group order for
//! finitely presented groups, with an explicit coset-count bound.
//!
//! The enumerator is deduction-driven (Felsch-style) by default, with a
//! scan-and-fill (HLT) strategy behind a flag.  Coincidences are handled by
//! union-find merging with full row migration, so at quiescence live rows
//! only reference live cosets.

use crate::presentation::Presentation;
use crate::rewrite::to_doubled;
use crate::word::Word;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_MAX_COSETS: usize = 100_000;

/// Result of an enumeration: the subgroup index, or overflow when the live
/// coset count would exceed the bound.  Overflow is a value, not an error;
/// it proves nothing about the group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TcOutcome {
    Index(usize),
    Overflow,
}

impl TcOutcome {
    pub fn index(&self) -> Option<usize> {
        match self {
            TcOutcome::Index(n) => Some(*n),
            TcOutcome::Overflow => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Felsch,
    Hlt,
}

/// A closed, compacted coset table.  Cosets are numbered 1..=cosets with
/// coset 1 the subgroup itself; columns follow the doubled alphabet.
#[derive(Clone, Debug)]
pub struct CosetTable {
    pub num_gens: usize,
    pub cosets: usize,
    rows: Vec<u32>,
}

impl CosetTable {
    fn at(&self, coset: usize, letter: usize) -> usize {
        self.rows[(coset - 1) * 2 * self.num_gens + letter] as usize
    }

    /// Coset reached from `start` by the word (right action).
    pub fn trace(&self, start: usize, w: &Word) -> usize {
        to_doubled(w)
            .iter()
            .fold(start, |c, &x| self.at(c, x as usize))
    }

    /// Audit: every relator fixes every coset, every subgroup generator
    /// fixes coset 1, and all rows are complete permutation columns.
    pub fn is_closed_consistent(&self, pres: &Presentation, subgens: &[Word]) -> bool {
        let n = self.cosets;
        for letter in 0..2 * self.num_gens {
            let mut seen = vec![false; n + 1];
            for c in 1..=n {
                let d = self.at(c, letter);
                if d == 0 || d > n || seen[d] {
                    return false;
                }
                seen[d] = true;
            }
        }
        pres.relators
            .iter()
            .all(|r| (1..=n).all(|c| self.trace(c, r) == c))
            && subgens.iter().all(|g| self.trace(1, g) == 1)
    }
}

struct Enumerator {
    ncols: usize,
    max_cosets: usize,
    tau: Vec<u32>, // row per coset id starting at 1; 0 = undefined
    parent: Vec<u32>,
    live: usize,
    alloc: usize,
    deductions: Vec<(u32, u16)>,
    /// Cyclic rotations of every relator and its inverse, grouped by first
    /// letter, for deduction-driven scanning.
    rots_by_letter: Vec<Vec<Vec<u16>>>,
    relators: Vec<Vec<u16>>,
    subgens: Vec<Vec<u16>>,
    overflowed: bool,
    /// Definition cursor: all cosets below it were complete when last
    /// inspected.  Reset on coincidences.
    cursor: u32,
    rng: Option<ChaCha8Rng>,
}

fn inv(x: u16) -> u16 {
    x ^ 1
}

impl Enumerator {
    fn new(
        pres: &Presentation,
        subgens: &[Word],
        max_cosets: usize,
        seed: Option<u64>,
    ) -> Self {
        let ncols = 2 * pres.num_gens();
        let mut rots_by_letter = vec![Vec::new(); ncols];
        let mut relators = Vec::new();
        for rel in &pres.relators {
            let w = to_doubled(&rel.cyclic_reduce());
            if w.is_empty() {
                continue;
            }
            for base in [w.clone(), to_doubled(&rel.cyclic_reduce().inverse())] {
                for i in 0..base.len() {
                    let mut rot = base[i..].to_vec();
                    rot.extend_from_slice(&base[..i]);
                    let bucket = &mut rots_by_letter[rot[0] as usize];
                    if !bucket.contains(&rot) {
                        bucket.push(rot);
                    }
                }
            }
            relators.push(w);
        }
        let mut e = Enumerator {
            ncols,
            max_cosets,
            tau: vec![0; ncols], // dummy row for coset id 0
            parent: vec![0],
            live: 0,
            alloc: 0,
            deductions: Vec::new(),
            rots_by_letter,
            relators,
            subgens: subgens.iter().map(to_doubled).collect(),
            overflowed: false,
            cursor: 1,
            rng: seed.map(rand::SeedableRng::seed_from_u64),
        };
        e.new_coset();
        e
    }

    fn rep(&mut self, mut c: u32) -> u32 {
        while self.parent[c as usize] != c {
            let p = self.parent[c as usize];
            self.parent[c as usize] = self.parent[p as usize];
            c = self.parent[c as usize];
        }
        c
    }

    fn is_live(&self, c: u32) -> bool {
        self.parent[c as usize] == c
    }

    fn get(&self, c: u32, x: u16) -> u32 {
        self.tau[c as usize * self.ncols + x as usize]
    }

    fn put(&mut self, c: u32, x: u16, d: u32) {
        self.tau[c as usize * self.ncols + x as usize] = d;
    }

    fn set_edge(&mut self, c: u32, x: u16, d: u32) {
        self.put(c, x, d);
        self.put(d, inv(x), c);
        self.deductions.push((c, x));
        self.deductions.push((d, inv(x)));
    }

    fn new_coset(&mut self) -> Option<u32> {
        if self.live >= self.max_cosets {
            self.overflowed = true;
            return None;
        }
        self.alloc += 1;
        self.live += 1;
        self.parent.push(self.alloc as u32);
        self.tau.extend(std::iter::repeat(0).take(self.ncols));
        Some(self.alloc as u32)
    }

    fn merge(&mut self, a: u32, b: u32, queue: &mut Vec<u32>) {
        let a = self.rep(a);
        let b = self.rep(b);
        if a == b {
            return;
        }
        let (keep, drop) = if a < b { (a, b) } else { (b, a) };
        self.parent[drop as usize] = keep;
        self.live -= 1;
        queue.push(drop);
    }

    /// Merges two cosets and migrates the dead rows.  The strict mirror
    /// invariant (tau(c,x)=d iff tau(d,x^-1)=c) guarantees every reference
    /// to a dead coset shows up in that coset's own row, so migration
    /// removes all of them.
    fn coincide(&mut self, a: u32, b: u32) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut qi = 0;
        while qi < queue.len() {
            let dead = queue[qi];
            qi += 1;
            for x in 0..self.ncols as u16 {
                let target = self.get(dead, x);
                if target == 0 {
                    continue;
                }
                self.put(dead, x, 0);
                self.put(target, inv(x), 0);
                let mu = self.rep(dead);
                let nu = self.rep(target);
                let via_mu = self.get(mu, x);
                if via_mu != 0 {
                    self.merge(nu, via_mu, &mut queue);
                } else {
                    let via_nu = self.get(nu, inv(x));
                    if via_nu != 0 {
                        self.merge(mu, via_nu, &mut queue);
                    } else {
                        self.set_edge(mu, x, nu);
                    }
                }
            }
        }
        self.cursor = 1;
    }

    /// Scans the word from `start`, closing it when both ends meet.  With a
    /// one-letter gap the missing edge is deduced; with a wider gap, `fill`
    /// decides between defining cosets (HLT) and leaving it (Felsch).
    fn scan(&mut self, start: u32, w: &[u16], fill: bool) {
        let mut f = self.rep(start);
        let mut i = 0usize;
        loop {
            while i < w.len() {
                let t = self.get(f, w[i]);
                if t == 0 {
                    break;
                }
                f = t;
                i += 1;
            }
            let alpha = self.rep(start);
            if i == w.len() {
                if f != alpha {
                    self.coincide(f, alpha);
                }
                return;
            }
            let mut b = alpha;
            let mut j = w.len();
            while j > i {
                let t = self.get(b, inv(w[j - 1]));
                if t == 0 {
                    break;
                }
                b = t;
                j -= 1;
            }
            if j == i {
                if f != b {
                    self.coincide(f, b);
                }
                return;
            }
            if j == i + 1 {
                self.set_edge(f, w[i], b);
                return;
            }
            if !fill {
                return;
            }
            let Some(n) = self.new_coset() else { return };
            self.set_edge(f, w[i], n);
            f = n;
            i += 1;
        }
    }

    fn drain_deductions(&mut self) {
        while let Some((c, x)) = self.deductions.pop() {
            if self.overflowed {
                return;
            }
            let c = self.rep(c);
            if self.get(c, x) == 0 {
                continue; // edge re-arranged by a coincidence
            }
            let rots = std::mem::take(&mut self.rots_by_letter[x as usize]);
            for rot in &rots {
                self.scan(c, rot, false);
            }
            self.rots_by_letter[x as usize] = rots;
        }
    }

    fn compact_if_sparse(&mut self) {
        if self.alloc <= 4096 || self.live * 2 >= self.alloc || !self.deductions.is_empty()
        {
            return;
        }
        let mut remap = vec![0u32; self.alloc + 1];
        let mut next = 0u32;
        for c in 1..=self.alloc as u32 {
            if self.is_live(c) {
                next += 1;
                remap[c as usize] = next;
            }
        }
        let mut tau = vec![0u32; (next as usize + 1) * self.ncols];
        for c in 1..=self.alloc as u32 {
            if !self.is_live(c) {
                continue;
            }
            for x in 0..self.ncols {
                let d = self.tau[c as usize * self.ncols + x];
                if d != 0 {
                    tau[remap[c as usize] as usize * self.ncols + x] = remap[d as usize];
                }
            }
        }
        self.tau = tau;
        self.alloc = next as usize;
        self.parent = (0..=next).collect();
        self.cursor = 1;
    }

    /// First live coset with an undefined entry, or a seeded-random one
    /// when checking definition-order independence.
    fn next_undefined(&mut self) -> Option<(u32, u16)> {
        if let Some(rng) = &mut self.rng {
            let mut rng = rng.clone();
            let mut open = Vec::new();
            for c in 1..=self.alloc as u32 {
                if !self.is_live(c) {
                    continue;
                }
                for x in 0..self.ncols as u16 {
                    if self.get(c, x) == 0 {
                        open.push((c, x));
                    }
                }
            }
            let pick = (!open.is_empty()).then(|| open[rng.gen_range(0..open.len())]);
            *self.rng.as_mut().unwrap() = rng;
            return pick;
        }
        while (self.cursor as usize) <= self.alloc {
            let c = self.cursor;
            if self.is_live(c) {
                for x in 0..self.ncols as u16 {
                    if self.get(c, x) == 0 {
                        return Some((c, x));
                    }
                }
            }
            self.cursor += 1;
        }
        None
    }

    fn run_felsch(&mut self) {
        for sg in self.subgens.clone() {
            self.scan(1, &sg, true);
            if self.overflowed {
                return;
            }
            self.drain_deductions();
        }
        loop {
            self.drain_deductions();
            if self.overflowed {
                return;
            }
            self.compact_if_sparse();
            let Some((c, x)) = self.next_undefined() else { return };
            let Some(n) = self.new_coset() else { return };
            self.set_edge(c, x, n);
        }
    }

    fn run_hlt(&mut self) {
        for sg in self.subgens.clone() {
            self.scan(1, &sg, true);
            if self.overflowed {
                return;
            }
        }
        self.deductions.clear();
        let mut alpha = 1u32;
        while (alpha as usize) <= self.alloc {
            if !self.is_live(alpha) {
                alpha += 1;
                continue;
            }
            let relators = self.relators.clone();
            for rel in &relators {
                self.scan(alpha, rel, true);
                self.deductions.clear();
                if self.overflowed {
                    return;
                }
                if !self.is_live(alpha) {
                    break;
                }
            }
            if self.is_live(alpha) {
                for x in 0..self.ncols as u16 {
                    if self.get(alpha, x) == 0 {
                        let Some(n) = self.new_coset() else { return };
                        self.set_edge(alpha, x, n);
                        self.deductions.clear();
                    }
                }
            }
            alpha += 1;
        }
    }

    fn into_table(mut self) -> Option<CosetTable> {
        if self.overflowed {
            return None;
        }
        self.cursor = 1;
        self.rng = None;
        debug_assert!(self.next_undefined().is_none());
        let mut remap = vec![0u32; self.alloc + 1];
        let mut next = 0u32;
        for c in 1..=self.alloc as u32 {
            if self.is_live(c) {
                next += 1;
                remap[c as usize] = next;
            }
        }
        let mut rows = vec![0u32; next as usize * self.ncols];
        for c in 1..=self.alloc as u32 {
            if !self.is_live(c) {
                continue;
            }
            for x in 0..self.ncols {
                let d = self.tau[c as usize * self.ncols + x];
                rows[(remap[c as usize] as usize - 1) * self.ncols + x] = remap[d as usize];
            }
        }
        Some(CosetTable {
            num_gens: self.ncols / 2,
            cosets: next as usize,
            rows,
        })
    }
}

/// Full enumeration returning the closed table, or `None` on overflow.
pub fn todd_coxeter_table(
    pres: &Presentation,
    subgens: &[Word],
    max_cosets: usize,
    strategy: Strategy,
    define_seed: Option<u64>,
) -> Option<CosetTable> {
    let mut e = Enumerator::new(pres, subgens, max_cosets, define_seed);
    match strategy {
        Strategy::Felsch => e.run_felsch(),
        Strategy::Hlt => e.run_hlt(),
    }
    e.into_table()
}

/// Index of the subgroup generated by `subgens`, by Felsch enumeration.
pub fn todd_coxeter(pres: &Presentation, subgens: &[Word], max_cosets: usize) -> TcOutcome {
    match todd_coxeter_table(pres, subgens, max_cosets, Strategy::Felsch, None) {
        Some(t) => TcOutcome::Index(t.cosets),
        None => TcOutcome::Overflow,
    }
}

/// Order of the presented group: index of the trivial subgroup.
pub fn group_order(pres: &Presentation, max_cosets: usize) -> TcOutcome {
    todd_coxeter(pres, &[], max_cosets)
}

/// Bounds for the random finite-quotient search.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct QuotientBudget {
    pub rounds: usize,
    pub max_cosets: usize,
}

impl Default for QuotientBudget {
    fn default() -> Self {
        QuotientBudget {
            rounds: 30,
            max_cosets: 10_000,
        }
    }
}

/// A finite quotient in which every label family stayed distinct, together
/// with the resulting embedding.
#[derive(Clone, Debug)]
pub struct QuotientOutcome {
    pub quotient: Presentation,
    pub order: usize,
    pub witness: crate::groups::EmbeddingWitness,
}

/// Result of testing one candidate quotient.
#[derive(Clone, Debug)]
pub enum QuotientCheck {
    /// Enumeration did not close within the coset bound.
    Overflow,
    /// The quotient is finite but at least one label family collapsed, so it
    /// yields no embedding.
    Collapsed { order: usize },
    Embedded(QuotientOutcome),
}

/// Maps the labels of a square through a finite quotient of its presented
/// group.  Because the quotient map is a homomorphism, every cell equation
/// already holds among the images; an embedding exists iff each family's
/// images are distinct.
pub fn finite_quotient_check(
    quotient: &Presentation,
    labels: &crate::presentation::PlsLabels,
    max_cosets: usize,
) -> QuotientCheck {
    let Some(table) = todd_coxeter_table(quotient, &[], max_cosets, Strategy::Felsch, None) else {
        return QuotientCheck::Overflow;
    };
    let order = table.cosets;
    let image = |w: &Word| table.trace(1, w) - 1;
    let rows: Vec<usize> = labels.rows.iter().map(image).collect();
    let cols: Vec<usize> = labels.cols.iter().map(image).collect();
    let syms: Vec<usize> = labels.syms.iter().map(image).collect();
    let distinct = |v: &[usize]| {
        let mut seen = vec![false; order];
        v.iter().all(|&x| !std::mem::replace(&mut seen[x], true))
    };
    if !(distinct(&rows) && distinct(&cols) && distinct(&syms)) {
        return QuotientCheck::Collapsed { order };
    }
    let group = match crate::groups::group_from_coset_table(
        &format!("quotient of order {order}"),
        quotient,
        &table,
    ) {
        Ok(g) => g,
        Err(_) => return QuotientCheck::Overflow,
    };
    QuotientCheck::Embedded(QuotientOutcome {
        quotient: quotient.clone(),
        order,
        witness: crate::groups::EmbeddingWitness {
            group,
            rows,
            cols,
            syms,
        },
    })
}

/// Uniformly random freely reduced word of the given length over the
/// doubled alphabet.
fn random_reduced_word(rng: &mut ChaCha8Rng, num_gens: usize, len: usize) -> Word {
    let ncols = 2 * num_gens;
    let mut w = Word::empty();
    let mut prev: Option<usize> = None;
    for _ in 0..len {
        let x = match prev {
            None => rng.gen_range(0..ncols),
            Some(p) => {
                let forbidden = p ^ 1;
                let mut x = rng.gen_range(0..ncols - 1);
                if x >= forbidden {
                    x += 1;
                }
                x
            }
        };
        w = w.mul(&Word::gen(x / 2, x % 2 == 1));
        prev = Some(x);
    }
    w
}

/// Witness search by random finite quotients: each round pads the relator
/// list with short random relators (lengths 1..=8) until it is strictly
/// longer than before and at least the generator count, then enumerates and
/// checks the labels.  Returns the first quotient that embeds the square, or
/// `None` once the budget is spent; a miss proves nothing.  Outcomes are
/// reproducible for a fixed seed.
pub fn random_quotient_search(
    pres: &Presentation,
    labels: &crate::presentation::PlsLabels,
    seed: u64,
    budget: &QuotientBudget,
) -> Option<QuotientOutcome> {
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    if pres.num_gens() == 0 {
        return match finite_quotient_check(pres, labels, budget.max_cosets) {
            QuotientCheck::Embedded(out) => Some(out),
            _ => None,
        };
    }
    for _ in 0..budget.rounds {
        let mut quotient = pres.clone();
        let target = pres.num_gens().max(pres.relators.len() + 1);
        while quotient.relators.len() < target {
            let len = rng.gen_range(1..=8);
            quotient
                .relators
                .push(random_reduced_word(&mut rng, pres.num_gens(), len));
        }
        if let QuotientCheck::Embedded(out) =
            finite_quotient_check(&quotient, labels, budget.max_cosets)
        {
            return Some(out);
        }
    }
    None
}
