//! Certificates for squares whose group is one of the Baumslag-type
//! one-relator groups `⟨a, b | b = [b, c]⟩` with `c` one of `b^a`,
//! `(b⁻²)^a`, `(b²)^a`.
//!
//! Baumslag (1969) proved the first of these groups infinite and
//! non-cyclic with every finite quotient cyclic, and the other two are
//! isomorphic to it.  Two consequences drive this module: in any finite
//! quotient the generator `b` dies (so label words collapse to powers of
//! `a`, and an exponent collision rules out every finite embedding), and
//! any equality between two labels would force the whole group to equal
//! one of its cyclic quotients (so a cyclicity proof per label pair
//! certifies that the square embeds in the group itself, which is
//! infinite).

use crate::coset::{todd_coxeter, DEFAULT_MAX_COSETS};
use crate::presentation::{
    reduced_labels, tietze_reduce, tietze_reduce_ordered, Collision, EliminationOrder, Family,
    PlsLabels, Presentation, TIETZE_BUDGET,
};
use crate::rewrite::{prove_cyclic, verify_cyclic_proof, CyclicProof};
use crate::word::Word;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Statement imported from the literature, recorded inside every
/// certificate this module issues rather than reproved.
pub const FAMILY_AXIOM: &str = "Baumslag (1969): the group <a,b | b = [b, b^a]> is infinite and \
     non-cyclic, and all of its finite quotients are cyclic, so b maps to \
     the identity in every finite quotient.  The groups with relator \
     b = [b, (b^-2)^a] and b = [b, (b^2)^a] are isomorphic to it; in their \
     finite quotients b^2 = 1, and the relator then forces b = [b, 1] = 1.";

/// Which of the three one-relator groups a presentation matched.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyKind {
    B,
    B1,
    B2,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 3] = [FamilyKind::B, FamilyKind::B1, FamilyKind::B2];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::B => "B",
            FamilyKind::B1 => "B1",
            FamilyKind::B2 => "B2",
        }
    }

    /// Exponent e in the conjugating word c = (b^e)^a of the defining
    /// relator b = [b, c].
    fn conjugated_power(self) -> i64 {
        match self {
            FamilyKind::B => 1,
            FamilyKind::B1 => -2,
            FamilyKind::B2 => 2,
        }
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|&k| k == self).unwrap()
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn commutator(x: &Word, y: &Word) -> Word {
    x.inverse().mul(&y.inverse()).mul(x).mul(y)
}

/// x^w = w⁻¹ x w.
fn conjugate(x: &Word, w: &Word) -> Word {
    w.inverse().mul(x).mul(w)
}

/// The defining relator b⁻¹·[b, c] over generators a = 0, b = 1,
/// cyclically reduced.
pub fn family_relator(kind: FamilyKind) -> Word {
    let a = Word::gen(0, false);
    let b = Word::gen(1, false);
    let c = conjugate(&b.pow(kind.conjugated_power()), &a);
    b.inverse().mul(&commutator(&b, &c)).cyclic_reduce()
}

/// The group ⟨a, b | b = [b, c]⟩ for the given family.
pub fn family_presentation(kind: FamilyKind) -> Presentation {
    Presentation {
        gens: vec!["a".to_string(), "b".to_string()],
        relators: vec![family_relator(kind)],
    }
}

/// How the two generators of a matched presentation line up with the
/// generators a, b of the family relator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleMap {
    pub a_gen: usize,
    pub a_inverted: bool,
    pub b_gen: usize,
    pub b_inverted: bool,
    pub relator_inverted: bool,
}

impl RoleMap {
    fn flags(&self) -> usize {
        self.a_inverted as usize + self.b_inverted as usize + self.relator_inverted as usize
    }
}

/// A reduced presentation recognised as one of the three family groups,
/// with the generator correspondence that exhibits the match.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyMatch {
    pub family: FamilyKind,
    pub role: RoleMap,
}

/// Rewrites `relator` into family coordinates: `role.a_gen` becomes
/// generator 0 (inverted if flagged), `role.b_gen` becomes generator 1,
/// and the whole word is inverted if flagged, then cyclically reduced.
fn apply_role(relator: &Word, role: &RoleMap) -> Word {
    let mut perm = vec![0usize; 2];
    perm[role.a_gen] = 0;
    perm[role.b_gen] = 1;
    let mut w = relator.rename(&perm);
    if role.a_inverted {
        w = w.substitute(0, &Word::gen(0, true));
    }
    if role.b_inverted {
        w = w.substitute(1, &Word::gen(1, true));
    }
    if role.relator_inverted {
        w = w.inverse();
    }
    w.cyclic_reduce()
}

fn cyclic_equal(x: &Word, y: &Word) -> bool {
    x.len() == y.len() && (0..x.len().max(1)).any(|k| x.rotate(k % x.len().max(1)) == *y)
}

/// All role maps for a two-generator presentation, fewest inversion flags
/// first so that a match reports the most direct correspondence.
fn candidate_roles() -> Vec<RoleMap> {
    let mut roles = Vec::new();
    for a_gen in 0..2 {
        for a_inverted in [false, true] {
            for b_inverted in [false, true] {
                for relator_inverted in [false, true] {
                    roles.push(RoleMap {
                        a_gen,
                        a_inverted,
                        b_gen: 1 - a_gen,
                        b_inverted,
                        relator_inverted,
                    });
                }
            }
        }
    }
    roles.sort_by_key(|r| {
        (
            r.flags(),
            r.a_gen,
            r.a_inverted,
            r.b_inverted,
            r.relator_inverted,
        )
    });
    roles
}

/// Every family the presentation's relator matches, in family order.  The
/// relators of B1 and B2 define the same symmetry class (invert b and the
/// relator), so a presentation matching one of them matches both.
pub fn match_families(pres: &Presentation) -> Vec<FamilyMatch> {
    if pres.num_gens() != 2 || pres.relators.len() != 1 {
        return Vec::new();
    }
    let w = pres.relators[0].cyclic_reduce();
    let roles = candidate_roles();
    FamilyKind::ALL
        .iter()
        .filter_map(|&family| {
            let target = family_relator(family);
            roles
                .iter()
                .find(|role| cyclic_equal(&apply_role(&w, role), &target))
                .map(|&role| FamilyMatch { family, role })
        })
        .collect()
}

/// The match needing the fewest generator/relator inversions, tie broken
/// towards the earlier family.  A presentation written naturally in one
/// family's terms therefore reports that family.
pub fn match_family(pres: &Presentation) -> Option<FamilyMatch> {
    match_families(pres)
        .into_iter()
        .min_by_key(|m| (m.role.flags(), m.family.index()))
}

/// Two labels in one family that become the same power of `a` once `b` is
/// killed.  By the recorded axiom every finite quotient kills `b`, so the
/// two labels coincide in every finite quotient and the square embeds in
/// no finite group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollapseCertificate {
    pub collision: Collision,
    /// The shared exponent of `a` (with the role's inversion applied).
    pub exponent: i64,
}

fn collapsed_exponent(w: &Word, role: &RoleMap) -> i64 {
    let sign = if role.a_inverted { -1 } else { 1 };
    sign * w.exponent_sum(role.a_gen)
}

/// Substitutes b ↦ 1 in every label word, leaving integer exponents of
/// `a`, and reports the first within-family exponent collision (rows,
/// then columns, then symbols, pairs in index order).  `None` means no
/// collision, which proves nothing either way.
pub fn finite_collapse_certificate(
    labels: &PlsLabels,
    matched: &FamilyMatch,
) -> Option<CollapseCertificate> {
    for (family, words) in [
        (Family::Rows, &labels.rows),
        (Family::Cols, &labels.cols),
        (Family::Syms, &labels.syms),
    ] {
        let exps: Vec<i64> = words
            .iter()
            .map(|w| collapsed_exponent(w, &matched.role))
            .collect();
        for a in 0..exps.len() {
            for b in a + 1..exps.len() {
                if exps[a] == exps[b] {
                    return Some(CollapseCertificate {
                        collision: Collision {
                            family,
                            a: a + 1,
                            b: b + 1,
                        },
                        exponent: exps[a],
                    });
                }
            }
        }
    }
    None
}

/// Proof that two labels differ in the presented group: adding the
/// relator x·y⁻¹ makes the group cyclic, which the recorded axiom says
/// the family group is not, so x = y is impossible.  Positions are
/// 1-based within `family`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairProof {
    pub family: Family,
    pub a: usize,
    pub b: usize,
    pub proof: CyclicProof,
}

fn label_pairs(labels: &PlsLabels) -> Vec<(Family, usize, usize, Word)> {
    let mut out = Vec::new();
    for (family, words) in [
        (Family::Rows, &labels.rows),
        (Family::Cols, &labels.cols),
        (Family::Syms, &labels.syms),
    ] {
        for a in 0..words.len() {
            for b in a + 1..words.len() {
                let rel = words[a].mul(&words[b].inverse()).free_reduce();
                out.push((family, a + 1, b + 1, rel));
            }
        }
    }
    out
}

/// Tries to prove every unordered pair of labels within each family
/// distinct.  A pair whose words are literally equal is hopeless, and a
/// pair whose quotient resists the bounded cyclicity prover leaves the
/// certificate incomplete, so both yield `None`.
pub fn distinctness_certificate(
    pres: &Presentation,
    labels: &PlsLabels,
) -> Option<Vec<PairProof>> {
    let pairs = label_pairs(labels);
    if pairs.iter().any(|(_, _, _, rel)| rel.is_empty()) {
        return None;
    }
    pairs
        .into_par_iter()
        .map(|(family, a, b, rel)| {
            let mut quotient = pres.clone();
            quotient.relators.push(rel);
            prove_cyclic(&quotient).map(|proof| PairProof {
                family,
                a,
                b,
                proof,
            })
        })
        .collect()
}

/// Full certificate that a square embeds in an infinite group but in no
/// finite one: a recognised family presentation with its label words, the
/// forced finite-quotient collision, one cyclicity proof per label pair,
/// and the literature fact everything leans on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfNotFinCertificate {
    pub presentation: Presentation,
    pub labels: PlsLabels,
    pub matched: FamilyMatch,
    pub collapse: CollapseCertificate,
    pub distinctness: Vec<PairProof>,
    pub axiom: String,
}

/// Reductions of a square's presentation worth testing against the
/// families.  Shortest-relator elimination reaches the eleven-letter
/// relators of B1 and B2 but can stall with extra generators; the ranked
/// reduction always minimises and reaches the nine-letter B form when it
/// exists.  Only two-generator, one-relator outcomes are returned.
pub fn matching_reductions(
    pres: &Presentation,
    labels: &PlsLabels,
) -> Vec<(Presentation, PlsLabels)> {
    let mut out: Vec<(Presentation, PlsLabels)> = Vec::new();
    for reduced in [
        tietze_reduce_ordered(pres, TIETZE_BUDGET, EliminationOrder::ShortestRelator, true),
        tietze_reduce(pres, TIETZE_BUDGET),
    ] {
        if reduced.pres.num_gens() != 2 || reduced.pres.relators.len() != 1 {
            continue;
        }
        let entry = (reduced.pres, reduced_labels(labels, &reduced.images));
        if !out.contains(&entry) {
            out.push(entry);
        }
    }
    out
}

/// Runs the whole family pipeline on a square's defining presentation:
/// reduce, recognise, certify the finite collapse and the pairwise
/// distinctness.  The first reduction that carries all three steps wins.
pub fn build_inf_not_fin(
    pres: &Presentation,
    labels: &PlsLabels,
) -> Option<InfNotFinCertificate> {
    for (rp, rl) in matching_reductions(pres, labels) {
        let Some(matched) = match_family(&rp) else {
            continue;
        };
        let Some(collapse) = finite_collapse_certificate(&rl, &matched) else {
            continue;
        };
        let Some(distinctness) = distinctness_certificate(&rp, &rl) else {
            continue;
        };
        return Some(InfNotFinCertificate {
            presentation: rp,
            labels: rl,
            matched,
            collapse,
            distinctness,
            axiom: FAMILY_AXIOM.to_string(),
        });
    }
    None
}

/// Checks a certificate without rerunning any search: the role map must
/// send the stored relator to the claimed family relator, the collapse
/// collision must recompute to equal exponents, every label pair must be
/// covered by exactly one proof, and each cyclicity proof must replay
/// against its augmented presentation.
pub fn verify_inf_not_fin(cert: &InfNotFinCertificate) -> bool {
    if cert.axiom != FAMILY_AXIOM {
        return false;
    }
    let pres = &cert.presentation;
    if pres.num_gens() != 2 || pres.relators.len() != 1 {
        return false;
    }
    let role = &cert.matched.role;
    if role.a_gen >= 2 || role.b_gen >= 2 || role.a_gen == role.b_gen {
        return false;
    }
    let target = family_relator(cert.matched.family);
    if !cyclic_equal(&apply_role(&pres.relators[0].cyclic_reduce(), role), &target) {
        return false;
    }

    let words_of = |family: Family| match family {
        Family::Rows => &cert.labels.rows,
        Family::Cols => &cert.labels.cols,
        Family::Syms => &cert.labels.syms,
    };

    let col = &cert.collapse.collision;
    let words = words_of(col.family);
    if col.a == 0 || col.b == 0 || col.a >= col.b || col.b > words.len() {
        return false;
    }
    let ea = collapsed_exponent(&words[col.a - 1], role);
    let eb = collapsed_exponent(&words[col.b - 1], role);
    if ea != eb || ea != cert.collapse.exponent {
        return false;
    }

    let mut expected: Vec<(Family, usize, usize)> = label_pairs(&cert.labels)
        .into_iter()
        .map(|(f, a, b, _)| (f, a, b))
        .collect();
    let mut covered: Vec<(Family, usize, usize)> = cert
        .distinctness
        .iter()
        .map(|p| (p.family, p.a, p.b))
        .collect();
    let key = |t: &(Family, usize, usize)| (t.0 as usize, t.1, t.2);
    expected.sort_by_key(key);
    covered.sort_by_key(key);
    if expected != covered {
        return false;
    }

    cert.distinctness.par_iter().all(|pp| {
        let words = words_of(pp.family);
        let rel = words[pp.a - 1].mul(&words[pp.b - 1].inverse()).free_reduce();
        if rel.is_empty() {
            return false;
        }
        let mut quotient = pres.clone();
        quotient.relators.push(rel);
        verify_cyclic_proof(&quotient, &pp.proof)
    })
}

/// One coset-enumeration fact about a family group: the listed subgroup
/// generators and the index Todd–Coxeter found (`None` when enumeration
/// did not close within the budget).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyFact {
    pub family: FamilyKind,
    pub subgroup: String,
    pub index: Option<usize>,
}

/// Confirms by coset enumeration that ⟨b⁻², a⟩ has index 1 in B1 and
/// ⟨b², a⟩ has index 1 in B2 (so each family group is generated by the
/// collapse survivors), with ⟨a, b⟩ in B as a sanity row.
pub fn verify_family_facts(max_cosets: usize) -> Vec<FamilyFact> {
    let a = Word::gen(0, false);
    let b = Word::gen(1, false);
    let cases = [
        (FamilyKind::B1, "b^-2, a", vec![b.pow(-2), a.clone()]),
        (FamilyKind::B2, "b^2, a", vec![b.pow(2), a.clone()]),
        (FamilyKind::B, "a, b", vec![a.clone(), b.clone()]),
    ];
    cases
        .into_iter()
        .map(|(family, subgroup, subgens)| {
            let outcome = todd_coxeter(&family_presentation(family), &subgens, max_cosets);
            FamilyFact {
                family,
                subgroup: subgroup.to_string(),
                index: outcome.index(),
            }
        })
        .collect()
}

/// `verify_family_facts` with the default coset budget.
pub fn default_family_facts() -> Vec<FamilyFact> {
    verify_family_facts(DEFAULT_MAX_COSETS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{TWELVE_CELL_B, TWELVE_CELL_B1, TWELVE_CELL_B2};
    use crate::pls::Pls;
    use crate::presentation::presentation_of;


    fn defining(grid: &str) -> (Presentation, PlsLabels) {
        presentation_of(&Pls::parse(grid).unwrap())
    }

    #[test]
    fn family_relators_have_frozen_letters() {
        // b⁻¹·[b, c] expanded by hand for each conjugating word c.
        assert_eq!(
            family_relator(FamilyKind::B).letters(),
            [-2, -2, -1, -2, 1, 2, -1, 2, 1]
        );
        assert_eq!(
            family_relator(FamilyKind::B1).letters(),
            [-2, -2, -1, 2, 2, 1, 2, -1, -2, -2, 1]
        );
        assert_eq!(
            family_relator(FamilyKind::B2).letters(),
            [-2, -2, -1, -2, -2, 1, 2, -1, 2, 2, 1]
        );
    }

    #[test]
    fn own_relators_match_their_family() {
        for kind in FamilyKind::ALL {
            let m = match_family(&family_presentation(kind)).unwrap();
            assert_eq!(m.family, kind);
            assert_eq!(
                m.role,
                RoleMap {
                    a_gen: 0,
                    a_inverted: false,
                    b_gen: 1,
                    b_inverted: false,
                    relator_inverted: false,
                }
            );
        }
        // B1 and B2 share a symmetry class: each one's relator also
        // matches the other family, but only with extra inversions.
        let b1 = match_families(&family_presentation(FamilyKind::B1));
        assert_eq!(
            b1.iter().map(|m| m.family).collect::<Vec<_>>(),
            [FamilyKind::B1, FamilyKind::B2]
        );
        let b2 = match_families(&family_presentation(FamilyKind::B2));
        assert_eq!(
            b2.iter().map(|m| m.family).collect::<Vec<_>>(),
            [FamilyKind::B1, FamilyKind::B2]
        );
        // The nine-letter B relator matches nothing else.
        let b = match_families(&family_presentation(FamilyKind::B));
        assert_eq!(b.iter().map(|m| m.family).collect::<Vec<_>>(), [FamilyKind::B]);
    }

    #[test]
    fn scrambled_presentations_still_match() {
        // Swap the generators, invert the new a, and invert-rotate the
        // relator; the matcher must undo all of it.
        let w = family_relator(FamilyKind::B)
            .rename(&[1, 0])
            .substitute(1, &Word::gen(1, true))
            .inverse()
            .rotate(4);
        let pres = Presentation {
            gens: vec!["x".to_string(), "y".to_string()],
            relators: vec![w],
        };
        let m = match_family(&pres).unwrap();
        assert_eq!(m.family, FamilyKind::B);
        assert_eq!(m.role.a_gen, 1);
        assert!(cyclic_equal(
            &apply_role(&pres.relators[0].cyclic_reduce(), &m.role),
            &family_relator(FamilyKind::B)
        ));
    }

    #[test]
    fn wrong_relators_match_nothing() {
        let cases = [
            "u v | v^2 u^-2",
            "u v | u^2",
            "u v |",
            "u v w | v^2 u^-2",
            "a b | a^-1 b^-1 a b",
        ];
        for text in cases {
            let pres = Presentation::parse(text).unwrap();
            assert!(match_families(&pres).is_empty(), "{text}");
        }
    }

    #[test]
    fn paper_squares_reduce_into_their_families() {
        for (grid, expected) in [
            (TWELVE_CELL_B, FamilyKind::B),
            (TWELVE_CELL_B1, FamilyKind::B1),
            (TWELVE_CELL_B2, FamilyKind::B2),
        ] {
            let (pres, labels) = defining(grid);
            let routes = matching_reductions(&pres, &labels);
            let found: Vec<FamilyKind> = routes
                .iter()
                .filter_map(|(rp, _)| match_family(rp).map(|m| m.family))
                .collect();
            assert!(
                found.contains(&expected),
                "expected {expected} among {found:?}"
            );
            assert_eq!(found.first(), Some(&expected));
        }
    }

    #[test]
    fn collapse_certificate_reports_the_first_forced_collision() {
        let (pres, labels) = defining(TWELVE_CELL_B);
        let (rp, rl) = matching_reductions(&pres, &labels).remove(0);
        let m = match_family(&rp).unwrap();
        assert_eq!(m.family, FamilyKind::B);
        let c = finite_collapse_certificate(&rl, &m).unwrap();
        assert_eq!(
            c.collision,
            Collision {
                family: Family::Rows,
                a: 1,
                b: 4,
            }
        );
        assert_eq!(c.exponent, 0);
    }

    #[test]
    fn collapse_needs_an_exponent_collision() {
        let m = match_family(&family_presentation(FamilyKind::B)).unwrap();
        let a = Word::gen(0, false);
        let labels = PlsLabels {
            rows: vec![Word::empty(), a.clone(), a.pow(2)],
            cols: vec![Word::empty(), a.pow(3)],
            syms: vec![a.pow(4)],
        };
        assert_eq!(finite_collapse_certificate(&labels, &m), None);
    }

    #[test]
    fn distinctness_rejects_literally_equal_labels() {
        let pres = family_presentation(FamilyKind::B);
        let b = Word::gen(1, false);
        let labels = PlsLabels {
            rows: vec![Word::empty(), b.clone(), b.clone()],
            cols: vec![Word::empty()],
            syms: vec![b],
        };
        assert_eq!(distinctness_certificate(&pres, &labels), None);
    }

    #[test]
    fn end_to_end_certificates_for_the_paper_squares() {
        for (grid, family, pairs) in [
            (TWELVE_CELL_B, FamilyKind::B, 31),
            (TWELVE_CELL_B1, FamilyKind::B1, 31),
            (TWELVE_CELL_B2, FamilyKind::B2, 30),
        ] {
            let (pres, labels) = defining(grid);
            let cert = build_inf_not_fin(&pres, &labels).unwrap();
            assert_eq!(cert.matched.family, family);
            assert_eq!(cert.distinctness.len(), pairs);
            assert!(verify_inf_not_fin(&cert));
        }
    }

    #[test]
    fn tampered_certificates_are_rejected() {
        let (pres, labels) = defining(TWELVE_CELL_B);
        let cert = build_inf_not_fin(&pres, &labels).unwrap();
        assert!(verify_inf_not_fin(&cert));

        let mut t = cert.clone();
        t.axiom = "trust me".to_string();
        assert!(!verify_inf_not_fin(&t));

        let mut t = cert.clone();
        t.matched.family = FamilyKind::B1;
        assert!(!verify_inf_not_fin(&t));

        let mut t = cert.clone();
        t.collapse.collision.b = 2;
        assert!(!verify_inf_not_fin(&t));

        let mut t = cert.clone();
        t.distinctness.pop();
        assert!(!verify_inf_not_fin(&t));

        let mut t = cert.clone();
        t.distinctness[0].proof.generator = 7;
        assert!(!verify_inf_not_fin(&t));

        // An exponent edit stays undetectable in a pair whose quotient is
        // trivial (any power claim is then true), so corrupt each pair in
        // turn: some quotient must distinguish the claimed powers.
        let caught = (0..cert.distinctness.len()).any(|i| {
            let mut t = cert.clone();
            t.distinctness[i].proof.exponents[0] += 1;
            !verify_inf_not_fin(&t)
        });
        assert!(caught);
    }

    #[test]
    fn family_facts_all_close_at_index_one() {
        let facts = default_family_facts();
        assert_eq!(facts.len(), 3);
        for fact in &facts {
            assert_eq!(fact.index, Some(1), "{} <{}>", fact.family, fact.subgroup);
        }
    }
}
