//! Bounded Knuth–Bendix completion over a shortlex order, normal-form
//! reduction against the completed (or partial) system, the reduced-form
//! collision test, and a cyclicity prover built on top of it.
//!
//! Everything proved here uses only rule applications, and every rule is a
//! consequence of the relators, so equal normal forms prove equality in the
//! presented group even when completion was cut off by a limit.  Distinct
//! normal forms prove distinctness only when the system is confluent.

use crate::presentation::{Collision, Family, PlsLabels, Presentation};
use crate::word::Word;
use std::collections::VecDeque;

/// Words over the doubled alphabet: letter `2g` is generator `g`, letter
/// `2g+1` its formal inverse.  This makes the shortlex order "generator,
/// then its inverse, then the next generator" a plain comparison of letter
/// ids.
type Letters = Vec<u16>;

pub fn to_doubled(w: &Word) -> Letters {
    w.letters()
        .iter()
        .map(|&l| {
            let g = (l.unsigned_abs() - 1) as u16;
            2 * g + u16::from(l < 0)
        })
        .collect()
}

pub fn from_doubled(ls: &[u16]) -> Word {
    Word::from_letters(
        ls.iter()
            .map(|&d| {
                let g = (d / 2) as i32 + 1;
                if d % 2 == 1 {
                    -g
                } else {
                    g
                }
            })
            .collect(),
    )
}

fn shortlex_less(a: &[u16], b: &[u16]) -> bool {
    (a.len(), a) < (b.len(), b)
}

/// A rewriting rule lhs -> rhs with lhs strictly greater in shortlex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: Letters,
    pub rhs: Letters,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct KbLimits {
    pub max_rules: usize,
    pub max_rule_len: usize,
    pub max_iterations: usize,
}

impl Default for KbLimits {
    fn default() -> Self {
        KbLimits {
            max_rules: 2000,
            max_rule_len: 64,
            max_iterations: 200_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RewritingSystem {
    pub num_gens: usize,
    pub rules: Vec<Rule>,
    pub confluent: bool,
    pub limits: KbLimits,
    buckets: Vec<Vec<usize>>,
}

impl RewritingSystem {
    fn new(num_gens: usize, mut rules: Vec<Rule>, confluent: bool, limits: KbLimits) -> Self {
        rules.sort_by(|a, b| (a.lhs.len(), &a.lhs).cmp(&(b.lhs.len(), &b.lhs)));
        let buckets = build_buckets(&rules, None, 2 * num_gens);
        RewritingSystem {
            num_gens,
            rules,
            confluent,
            limits,
            buckets,
        }
    }

    pub fn reduce_letters(&self, w: &[u16]) -> Letters {
        reduce_impl(&self.rules, &self.buckets, w)
    }

    /// Normal form of a word, i.e. the result of leftmost-longest rule
    /// application until no rule applies.
    pub fn reduce_word(&self, w: &Word) -> Word {
        from_doubled(&self.reduce_letters(&to_doubled(w)))
    }
}

fn build_buckets(rules: &[Rule], active: Option<&[bool]>, nletters: usize) -> Vec<Vec<usize>> {
    let mut buckets = vec![Vec::new(); nletters];
    for (i, r) in rules.iter().enumerate() {
        if active.map_or(true, |a| a[i]) {
            buckets[r.lhs[0] as usize].push(i);
        }
    }
    // Longest lhs first makes leftmost-longest application a linear scan.
    for b in &mut buckets {
        b.sort_by_key(|&i| (std::cmp::Reverse(rules[i].lhs.len()), i));
    }
    buckets
}

fn reduce_impl(rules: &[Rule], buckets: &[Vec<usize>], w: &[u16]) -> Letters {
    let mut v = w.to_vec();
    'outer: loop {
        for pos in 0..v.len() {
            for &ri in &buckets[v[pos] as usize] {
                let lhs = &rules[ri].lhs;
                if v.len() - pos >= lhs.len() && v[pos..pos + lhs.len()] == lhs[..] {
                    let mut nv = Vec::with_capacity(v.len());
                    nv.extend_from_slice(&v[..pos]);
                    nv.extend_from_slice(&rules[ri].rhs);
                    nv.extend_from_slice(&v[pos + lhs.len()..]);
                    v = nv;
                    continue 'outer;
                }
            }
        }
        return v;
    }
}

/// Completion state, stepped under an iteration budget so callers can probe
/// the partial system between bursts.
struct Completion {
    num_gens: usize,
    limits: KbLimits,
    rules: Vec<Rule>,
    active: Vec<bool>,
    buckets: Vec<Vec<usize>>,
    eqs: VecDeque<(Letters, Letters)>,
    pairs: VecDeque<(usize, usize)>,
    iterations: usize,
    lost: bool,
    rules_full: bool,
}

impl Completion {
    fn new(pres: &Presentation, limits: KbLimits) -> Self {
        let g = pres.num_gens();
        let mut c = Completion {
            num_gens: g,
            limits,
            rules: Vec::new(),
            active: Vec::new(),
            buckets: vec![Vec::new(); 2 * g],
            eqs: VecDeque::new(),
            pairs: VecDeque::new(),
            iterations: 0,
            lost: false,
            rules_full: false,
        };
        for i in 0..g as u16 {
            c.add_rule(vec![2 * i, 2 * i + 1], vec![]);
            c.add_rule(vec![2 * i + 1, 2 * i], vec![]);
        }
        for rel in &pres.relators {
            c.eqs.push_back((to_doubled(rel), vec![]));
        }
        c
    }

    fn reduce(&self, w: &[u16]) -> Letters {
        reduce_impl(&self.rules, &self.buckets, w)
    }

    fn rebuild_buckets(&mut self) {
        self.buckets = build_buckets(&self.rules, Some(&self.active), 2 * self.num_gens);
    }

    fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    fn add_rule(&mut self, lhs: Letters, rhs: Letters) {
        let idx = self.rules.len();
        self.rules.push(Rule { lhs, rhs });
        self.active.push(true);
        self.rebuild_buckets();
        // Rules whose lhs the new rule now rewrites go back to the equation
        // queue; reducible right-hand sides are rewritten in place.
        for r in 0..idx {
            if !self.active[r] {
                continue;
            }
            let new_lhs = &self.rules[idx].lhs;
            if self.rules[r]
                .lhs
                .windows(new_lhs.len())
                .any(|w| w == &new_lhs[..])
            {
                self.active[r] = false;
                let dead = self.rules[r].clone();
                self.eqs.push_back((dead.lhs, dead.rhs));
            } else {
                let reduced = self.reduce(&self.rules[r].rhs);
                if reduced != self.rules[r].rhs {
                    self.rules[r].rhs = reduced;
                }
            }
        }
        self.rebuild_buckets();
        for j in 0..=idx {
            if self.active[j] {
                self.pairs.push_back((idx, j));
                if j != idx {
                    self.pairs.push_back((j, idx));
                }
            }
        }
    }

    fn resolve(&mut self, a: Letters, b: Letters) {
        let a = self.reduce(&a);
        let b = self.reduce(&b);
        if a == b {
            return;
        }
        let (lhs, rhs) = if shortlex_less(&a, &b) { (b, a) } else { (a, b) };
        if lhs.len() > self.limits.max_rule_len {
            self.lost = true;
            return;
        }
        if self.active_count() >= self.limits.max_rules {
            self.lost = true;
            self.rules_full = true;
            return;
        }
        self.add_rule(lhs, rhs);
    }

    /// All critical-pair equations from overlaps of rule i's lhs with rule
    /// j's lhs: proper suffix-prefix overlaps, plus j's lhs occurring inside
    /// i's.
    fn overlap_eqs(&mut self, i: usize, j: usize) {
        if !self.active[i] || !self.active[j] {
            return;
        }
        let (l1, r1) = (self.rules[i].lhs.clone(), self.rules[i].rhs.clone());
        let (l2, r2) = (self.rules[j].lhs.clone(), self.rules[j].rhs.clone());
        for k in 1..l1.len().min(l2.len()) {
            if l1[l1.len() - k..] == l2[..k] {
                let mut a = r1.clone();
                a.extend_from_slice(&l2[k..]);
                let mut b = l1[..l1.len() - k].to_vec();
                b.extend_from_slice(&r2);
                self.eqs.push_back((a, b));
            }
        }
        if i != j && l2.len() <= l1.len() {
            for pos in 0..=l1.len() - l2.len() {
                if l1[pos..pos + l2.len()] == l2[..] {
                    let mut b = l1[..pos].to_vec();
                    b.extend_from_slice(&r2);
                    b.extend_from_slice(&l1[pos + l2.len()..]);
                    self.eqs.push_back((r1.clone(), b));
                }
            }
        }
    }

    /// Works until the total iteration count reaches `target` or nothing is
    /// pending.  Returns true when all equations and critical pairs are
    /// resolved.
    fn run(&mut self, target: usize) -> bool {
        while self.iterations < target {
            if self.rules_full {
                return false;
            }
            self.iterations += 1;
            if let Some((a, b)) = self.eqs.pop_front() {
                self.resolve(a, b);
            } else if let Some((i, j)) = self.pairs.pop_front() {
                self.overlap_eqs(i, j);
            } else {
                return true;
            }
        }
        false
    }

    fn snapshot(&self, done: bool) -> RewritingSystem {
        let rules: Vec<Rule> = self
            .rules
            .iter()
            .zip(&self.active)
            .filter(|(_, &a)| a)
            .map(|(r, _)| r.clone())
            .collect();
        RewritingSystem::new(self.num_gens, rules, done && !self.lost, self.limits)
    }
}

/// Bounded completion of a presentation's relators (plus the free-group
/// rules) into a rewriting system.  Limit exhaustion is reported through
/// `confluent = false`, never as an error.
pub fn knuth_bendix(pres: &Presentation, limits: KbLimits) -> RewritingSystem {
    let mut c = Completion::new(pres, limits);
    let done = c.run(limits.max_iterations);
    c.snapshot(done)
}

/// First two labels in one family with equal normal forms.  Such a pair is
/// equal in the presented group, which rules out every embedding.
pub fn kb_collision_test(fams: &PlsLabels, rws: &RewritingSystem) -> Option<Collision> {
    let families = [
        (Family::Rows, &fams.rows),
        (Family::Cols, &fams.cols),
        (Family::Syms, &fams.syms),
    ];
    for (family, words) in families {
        let reduced: Vec<Letters> = words
            .iter()
            .map(|w| rws.reduce_letters(&to_doubled(w)))
            .collect();
        for a in 0..reduced.len() {
            for b in a + 1..reduced.len() {
                if reduced[a] == reduced[b] {
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

/// Largest exponent magnitude the cyclicity prover searches.
pub const CYCLIC_EXPONENT_BOUND: i64 = 16;

/// Proof that a presented group is cyclic: every generator has the same
/// normal form as `generator` raised to the listed exponent, under the
/// partial rewriting system reached after `iterations` completion steps
/// (recorded so a checker can replay the reduction deterministically).
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CyclicProof {
    pub generator: usize,
    pub exponents: Vec<i64>,
    pub iterations: usize,
}

/// Tries to prove the presented group cyclic by bounded completion,
/// probing between bursts: if some generator t satisfies
/// nf(g) = nf(t^e) with |e| bounded for every generator g, all generators
/// are powers of t.  Equal normal forms prove equality even when the
/// system is not confluent, so early success is sound.  `None` means
/// inconclusive, not a disproof.
pub fn prove_cyclic(pres: &Presentation) -> Option<CyclicProof> {
    let limits = KbLimits::default();
    if pres.num_gens() == 0 {
        return Some(CyclicProof {
            generator: 0,
            exponents: vec![],
            iterations: 0,
        });
    }
    let mut c = Completion::new(pres, limits);
    for target in [2_000, 20_000, limits.max_iterations] {
        let done = c.run(target);
        if let Some(mut p) = try_cyclic(&c.snapshot(done)) {
            p.iterations = c.iterations;
            return Some(p);
        }
        if done || c.rules_full {
            break;
        }
    }
    None
}

/// Replays a cyclicity proof: rebuilds the completion state after the
/// recorded number of steps (deterministic) and checks that every
/// generator's normal form equals that of the claimed power.  Equal normal
/// forms prove equality in the group no matter how the proof was found.
pub fn verify_cyclic_proof(pres: &Presentation, proof: &CyclicProof) -> bool {
    let g = pres.num_gens();
    if proof.exponents.len() != g {
        return false;
    }
    if g == 0 {
        return true;
    }
    if proof.generator >= g || proof.exponents.iter().any(|e| e.abs() > CYCLIC_EXPONENT_BOUND) {
        return false;
    }
    let mut c = Completion::new(pres, KbLimits::default());
    c.run(proof.iterations);
    let rws = c.snapshot(false);
    (0..g).all(|i| {
        rws.reduce_letters(&[2 * i as u16])
            == rws.reduce_letters(&power_letters(proof.generator, proof.exponents[i]))
    })
}

fn power_letters(t: usize, e: i64) -> Letters {
    let letter = if e >= 0 { 2 * t as u16 } else { 2 * t as u16 + 1 };
    vec![letter; e.unsigned_abs() as usize]
}

fn try_cyclic(rws: &RewritingSystem) -> Option<CyclicProof> {
    let g = rws.num_gens;
    let nfs: Vec<Letters> = (0..g)
        .map(|i| rws.reduce_letters(&[2 * i as u16]))
        .collect();
    'cand: for t in 0..g {
        let mut exponents = vec![0i64; g];
        for (i, nf) in nfs.iter().enumerate() {
            let mut found = false;
            'search: for mag in 0..=CYCLIC_EXPONENT_BOUND {
                for e in [mag, -mag] {
                    if rws.reduce_letters(&power_letters(t, e)) == *nf {
                        exponents[i] = e;
                        found = true;
                        break 'search;
                    }
                    if mag == 0 {
                        break;
                    }
                }
            }
            if !found {
                continue 'cand;
            }
        }
        return Some(CyclicProof {
            generator: t,
            exponents,
            iterations: 0,
        });
    }
    None
}

/// All normal forms of a system, by breadth-first extension (a word is
/// irreducible iff its proper prefixes are and no lhs is a suffix).
/// Returns `None` when more than `cap` forms exist.  For a confluent system
/// of a finite group, the count is the group order.
pub fn normal_forms(rws: &RewritingSystem, cap: usize) -> Option<Vec<Word>> {
    let mut out: Vec<Letters> = vec![vec![]];
    let mut frontier: Vec<Letters> = vec![vec![]];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for w in &frontier {
            for l in 0..2 * rws.num_gens as u16 {
                let mut v = w.clone();
                v.push(l);
                let reducible = rws
                    .rules
                    .iter()
                    .any(|r| r.lhs.len() <= v.len() && v.ends_with(&r.lhs));
                if !reducible {
                    if out.len() >= cap {
                        return None;
                    }
                    out.push(v.clone());
                    next.push(v);
                }
            }
        }
        frontier = next;
    }
    Some(out.iter().map(|ls| from_doubled(ls)).collect())
}
