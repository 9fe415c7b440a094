//! Abelianization and the exact abelian-embeddability test.
//!
//! Abelianizing the defining presentation of a square gives the universal
//! abelian group receiving it.  The square embeds in some abelian group
//! exactly when its row, column, and symbol labels stay pairwise distinct
//! (within each family) in that universal group, and in that case it also
//! embeds in a finite abelian group obtained by reducing the free
//! coordinates modulo large-enough odd moduli.

use crate::pls::Pls;
use crate::presentation::{presentation_of, Collision, Family, Presentation};
use crate::snf::{smith_normal_form, IntMatrix};
use crate::word::Word;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Net exponent sums of each relator: one row per relator, one column per
/// generator.
pub fn exponent_matrix(pres: &Presentation) -> IntMatrix {
    let g = pres.num_gens();
    let mut m = IntMatrix::zeros(pres.relators.len(), g);
    for (i, rel) in pres.relators.iter().enumerate() {
        for j in 0..g {
            m[(i, j)] = BigInt::from(rel.exponent_sum(j));
        }
    }
    m
}

/// A finitely generated abelian group in invariant-factor coordinates:
/// `torsion` lists the invariant factors greater than 1 (each dividing the
/// next), and `rank` counts the free coordinates.  Elements are vectors of
/// length `torsion.len() + rank`, torsion coordinates first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroup {
    pub torsion: Vec<BigInt>,
    pub rank: usize,
    /// Image of each presentation generator, already reduced.
    pub gen_images: Vec<Vec<BigInt>>,
}

impl AbelianGroup {
    pub fn is_trivial(&self) -> bool {
        self.torsion.is_empty() && self.rank == 0
    }

    fn reduce(&self, mut v: Vec<BigInt>) -> Vec<BigInt> {
        for (x, d) in v.iter_mut().zip(&self.torsion) {
            *x = x.mod_floor(d);
        }
        v
    }

    fn add_scaled(&self, acc: &mut [BigInt], v: &[BigInt], e: i64) {
        let e = BigInt::from(e);
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x * &e;
        }
    }

    /// Image of a word over the presentation's generators.
    pub fn image_of_word(&self, w: &Word) -> Vec<BigInt> {
        let mut acc = vec![BigInt::zero(); self.torsion.len() + self.rank];
        for (g, img) in self.gen_images.iter().enumerate() {
            let e = w.exponent_sum(g);
            if e != 0 {
                self.add_scaled(&mut acc, img, e);
            }
        }
        self.reduce(acc)
    }
}

/// Abelianizes a presentation via the Smith normal form of its exponent
/// matrix.  With U*M*V = D, right-multiplication by V is an automorphism of
/// the generator lattice carrying the relator lattice onto the diagonal one,
/// so generator j lands on row j of V; coordinates with invariant factor 1
/// are dropped, factors > 1 become torsion, zeros become free coordinates.
pub fn abelianization(pres: &Presentation) -> AbelianGroup {
    let m = exponent_matrix(pres);
    let s = smith_normal_form(&m);
    let g = pres.num_gens();
    let factor = |i: usize| -> BigInt {
        if i < s.d.rows.min(s.d.cols) {
            s.d[(i, i)].clone()
        } else {
            BigInt::zero()
        }
    };
    let torsion_cols: Vec<usize> = (0..g).filter(|&i| factor(i) > BigInt::one()).collect();
    let free_cols: Vec<usize> = (0..g).filter(|&i| factor(i).is_zero()).collect();
    let torsion: Vec<BigInt> = torsion_cols.iter().map(|&i| factor(i)).collect();
    let gen_images = (0..g)
        .map(|j| {
            let mut v: Vec<BigInt> = torsion_cols
                .iter()
                .chain(&free_cols)
                .map(|&i| s.v[(j, i)].clone())
                .collect();
            for (x, d) in v.iter_mut().zip(&torsion) {
                *x = x.mod_floor(d);
            }
            v
        })
        .collect();
    AbelianGroup {
        torsion,
        rank: free_cols.len(),
        gen_images,
    }
}

/// An explicit embedding of a square into a finite abelian group
/// (torsion factors plus one modulus per free coordinate), given by the
/// image vectors of every row, column, and symbol.  Checkable by plain
/// modular arithmetic, independent of how it was found.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FiniteAbelianWitness {
    pub torsion: Vec<BigInt>,
    pub moduli: Vec<BigInt>,
    pub rows: Vec<Vec<BigInt>>,
    pub cols: Vec<Vec<BigInt>>,
    pub syms: Vec<Vec<BigInt>>,
}

impl FiniteAbelianWitness {
    pub fn group_order(&self) -> BigInt {
        self.torsion
            .iter()
            .chain(&self.moduli)
            .product()
    }
}

/// Truncates an embedding into `a` down to a finite group.  Free coordinate
/// entries of the label vectors differ by at most twice the largest absolute
/// entry, so reducing coordinate i modulo 2*max|entry|+1 keeps distinct
/// vectors distinct while preserving every additive relation.
pub fn finite_abelian_witness(
    a: &AbelianGroup,
    rows: &[Vec<BigInt>],
    cols: &[Vec<BigInt>],
    syms: &[Vec<BigInt>],
) -> FiniteAbelianWitness {
    let t = a.torsion.len();
    let all = || rows.iter().chain(cols).chain(syms);
    let moduli: Vec<BigInt> = (0..a.rank)
        .map(|f| {
            let max_abs = all().map(|v| v[t + f].abs()).max().unwrap_or_default();
            BigInt::from(2) * max_abs + 1
        })
        .collect();
    let reduce = |vs: &[Vec<BigInt>]| -> Vec<Vec<BigInt>> {
        vs.iter()
            .map(|v| {
                let mut v = v.clone();
                for (x, m) in v[t..].iter_mut().zip(&moduli) {
                    *x = x.mod_floor(m);
                }
                v
            })
            .collect()
    };
    let (rows, cols, syms) = (reduce(rows), reduce(cols), reduce(syms));
    FiniteAbelianWitness {
        torsion: a.torsion.clone(),
        moduli,
        rows,
        cols,
        syms,
    }
}

/// Outcome of the abelian test: either an explicit finite abelian embedding
/// or two labels of one family that are equal in the universal abelian
/// group, hence in every abelian group.
#[derive(Clone, Debug)]
pub enum AbelianOutcome {
    Abelian(FiniteAbelianWitness),
    NotAbelian(Collision),
}

impl AbelianOutcome {
    pub fn is_abelian(&self) -> bool {
        matches!(self, AbelianOutcome::Abelian(_))
    }
}

/// Decides whether a square embeds in an abelian group.  Both directions
/// are exact: a within-family duplicate in the universal abelian group rules
/// out every abelian target, and duplicate-free labels yield a concrete
/// finite witness.
pub fn abelian_embedding_test(p: &Pls) -> AbelianOutcome {
    let (pres, labels) = presentation_of(p);
    let a = abelianization(&pres);
    let image = |ws: &[Word]| -> Vec<Vec<BigInt>> {
        ws.iter().map(|w| a.image_of_word(w)).collect()
    };
    let rows = image(&labels.rows);
    let cols = image(&labels.cols);
    let syms = image(&labels.syms);
    for (family, vecs) in [
        (Family::Rows, &rows),
        (Family::Cols, &cols),
        (Family::Syms, &syms),
    ] {
        for i in 0..vecs.len() {
            for j in i + 1..vecs.len() {
                if vecs[i] == vecs[j] {
                    return AbelianOutcome::NotAbelian(Collision {
                        family,
                        a: i + 1,
                        b: j + 1,
                    });
                }
            }
        }
    }
    AbelianOutcome::Abelian(finite_abelian_witness(&a, &rows, &cols, &syms))
}

/// Checks a finite abelian witness against the square by direct modular
/// arithmetic: well-formed vectors, distinct labels within each family, and
/// row + col = sym for every filled cell.
pub fn verify_abelian_witness(p: &Pls, w: &FiniteAbelianWitness) -> bool {
    let dims = w.torsion.len() + w.moduli.len();
    let moduli: Vec<BigInt> = w.torsion.iter().chain(&w.moduli).cloned().collect();
    if moduli.iter().any(|m| m < &BigInt::one()) {
        return false;
    }
    let families = [&w.rows, &w.cols, &w.syms];
    let sizes = [p.nrows() as usize, p.ncols() as usize, p.nsyms() as usize];
    for (vecs, &size) in families.iter().zip(&sizes) {
        if vecs.len() != size {
            return false;
        }
        for v in *vecs {
            if v.len() != dims {
                return false;
            }
            for (x, m) in v.iter().zip(&moduli) {
                if x.is_negative() || x >= m {
                    return false;
                }
            }
        }
        for i in 0..vecs.len() {
            for j in i + 1..vecs.len() {
                if vecs[i] == vecs[j] {
                    return false;
                }
            }
        }
    }
    p.triples().iter().all(|t| {
        let r = &w.rows[t.row as usize - 1];
        let c = &w.cols[t.col as usize - 1];
        let s = &w.syms[t.sym as usize - 1];
        (0..dims).all(|i| (&r[i] + &c[i] - &s[i]).mod_floor(&moduli[i]).is_zero())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::species::{candidate_flags, extend_species, seed_catalog};

    const NINE_CELL: &str = "a d . .\n. a d .\n. b . c\nc . b a\n";
    const TEN_CELL: &str = "a b c .\nb d . c\nc . d .\n. e . a\n";

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn exponent_matrix_counts_net_exponents() {
        let pres = Presentation::parse("u v | v v u^-1 u^-1").unwrap();
        let m = exponent_matrix(&pres);
        assert_eq!((m.rows, m.cols), (1, 2));
        assert_eq!(m[(0, 0)], BigInt::from(-2));
        assert_eq!(m[(0, 1)], BigInt::from(2));

        // Mixed signs cancel: this word is balanced in a and nets b^-1.
        let pres = Presentation::parse("a b | b^-2 a^-1 b^-1 a b a^-1 b a").unwrap();
        let m = exponent_matrix(&pres);
        assert!(m[(0, 0)].is_zero());
        assert_eq!(m[(0, 1)], BigInt::from(-1));
    }

    #[test]
    fn abelianization_of_simple_presentations() {
        let free = abelianization(&Presentation::parse("a b |").unwrap());
        assert_eq!((free.torsion.len(), free.rank), (0, 2));
        assert_eq!(free.gen_images, vec![big(&[1, 0]), big(&[0, 1])]);

        let cyclic = abelianization(&Presentation::parse("a | a^5").unwrap());
        assert_eq!(cyclic.torsion, vec![BigInt::from(5)]);
        assert_eq!(cyclic.rank, 0);
        assert_eq!(cyclic.gen_images, vec![big(&[1])]);

        let trivial = abelianization(&Presentation::parse("a | a").unwrap());
        assert!(trivial.is_trivial());
        assert!(trivial.gen_images[0].is_empty());

        let klein = abelianization(
            &Presentation::parse("a b | a a, b b, a b a b").unwrap(),
        );
        assert_eq!(klein.torsion, vec![BigInt::from(2), BigInt::from(2)]);
        assert_eq!(klein.rank, 0);
    }

    #[test]
    fn one_relator_example_has_torsion_two_and_rank_one() {
        let pres = Presentation::parse("u v | v v u^-1 u^-1").unwrap();
        let a = abelianization(&pres);
        assert_eq!(a.torsion, vec![BigInt::from(2)]);
        assert_eq!(a.rank, 1);
        let zero = vec![BigInt::zero(); 2];
        assert_eq!(a.image_of_word(&pres.relators[0]), zero);
        // u and v stay distinct, but v^-1 u^2 falls onto v.
        let u = a.image_of_word(&Word::parse("u", &pres.gens).unwrap());
        let v = a.image_of_word(&Word::parse("v", &pres.gens).unwrap());
        let w = a.image_of_word(&Word::parse("v^-1 u^2", &pres.gens).unwrap());
        assert_ne!(u, v);
        assert_eq!(w, v);
    }

    #[test]
    fn relators_always_map_to_zero() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let p = crate::testing::random_pls(&mut rng, 6);
            let (pres, _) = presentation_of(&p);
            let a = abelianization(&pres);
            let zero = vec![BigInt::zero(); a.torsion.len() + a.rank];
            for rel in &pres.relators {
                assert_eq!(a.image_of_word(rel), zero);
            }
        }
    }

    #[test]
    fn intercalate_embeds_in_order_two_group() {
        let p = Pls::parse("a b\nb a\n").unwrap();
        let AbelianOutcome::Abelian(w) = abelian_embedding_test(&p) else {
            panic!("2x2 Latin square embeds in Z/2");
        };
        assert_eq!(w.torsion, vec![BigInt::from(2)]);
        assert!(w.moduli.is_empty());
        assert_eq!(w.group_order(), BigInt::from(2));
        assert_eq!(w.rows, vec![big(&[0]), big(&[1])]);
        assert!(verify_abelian_witness(&p, &w));
    }

    #[test]
    fn single_cell_embeds_in_trivial_group() {
        let p = Pls::parse("a\n").unwrap();
        let AbelianOutcome::Abelian(w) = abelian_embedding_test(&p) else {
            panic!("a single cell embeds trivially");
        };
        assert_eq!(w.group_order(), BigInt::one());
        assert!(verify_abelian_witness(&p, &w));
    }

    #[test]
    fn nine_cell_square_collides_on_symbols_c_and_d() {
        let p = Pls::parse(NINE_CELL).unwrap();
        let AbelianOutcome::NotAbelian(c) = abelian_embedding_test(&p) else {
            panic!("expected a collision");
        };
        assert_eq!(c.family, Family::Syms);
        let mut names = [p.sym_name(c.a as u16), p.sym_name(c.b as u16)];
        names.sort();
        assert_eq!(names, ["c".to_string(), "d".to_string()]);
    }

    #[test]
    fn ten_cell_square_collides_on_symbols_c_and_e() {
        let p = Pls::parse(TEN_CELL).unwrap();
        let AbelianOutcome::NotAbelian(c) = abelian_embedding_test(&p) else {
            panic!("expected a collision");
        };
        assert_eq!(
            c,
            Collision {
                family: Family::Syms,
                a: 3,
                b: 5
            }
        );
        assert_eq!(p.sym_name(3), "c");
        assert_eq!(p.sym_name(5), "e");
    }

    #[test]
    fn ten_of_eleven_size_six_candidates_are_abelian() {
        let mut cat = seed_catalog();
        for _ in 1..6 {
            cat = extend_species(&cat);
        }
        let verdicts: Vec<bool> = cat
            .reps
            .values()
            .filter(|p| candidate_flags(p).candidate())
            .map(|p| abelian_embedding_test(p).is_abelian())
            .collect();
        assert_eq!(verdicts.len(), 11);
        assert_eq!(verdicts.iter().filter(|&&b| b).count(), 10);
    }

    #[test]
    fn witness_moduli_are_twice_max_entry_plus_one() {
        let a = AbelianGroup {
            torsion: vec![],
            rank: 1,
            gen_images: vec![big(&[1])],
        };
        let rows = [big(&[0]), big(&[1]), big(&[3])];
        let w = finite_abelian_witness(&a, &rows, &[big(&[0])], &[big(&[0])]);
        assert_eq!(w.moduli, vec![BigInt::from(7)]);
        assert_eq!(w.rows[2], big(&[3]));
    }

    #[test]
    fn verifier_rejects_tampered_witnesses() {
        let p = Pls::parse("a b\nb a\n").unwrap();
        let AbelianOutcome::Abelian(w) = abelian_embedding_test(&p) else {
            unreachable!()
        };
        let mut bad = w.clone();
        bad.syms[1] = bad.syms[0].clone(); // duplicate symbol
        assert!(!verify_abelian_witness(&p, &bad));
        let mut bad = w.clone();
        bad.rows[1] = big(&[5]); // out of range
        assert!(!verify_abelian_witness(&p, &bad));
        let mut bad = w;
        bad.cols.pop(); // wrong family size
        assert!(!verify_abelian_witness(&p, &bad));
    }

    #[test]
    fn random_witnesses_verify_and_collisions_are_real() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut seen_abelian = 0;
        for _ in 0..80 {
            let size = rng.gen_range(1..=6);
            let p = crate::testing::random_pls(&mut rng, size);
            match abelian_embedding_test(&p) {
                AbelianOutcome::Abelian(w) => {
                    seen_abelian += 1;
                    assert!(verify_abelian_witness(&p, &w));
                }
                AbelianOutcome::NotAbelian(c) => {
                    let (pres, labels) = presentation_of(&p);
                    let a = abelianization(&pres);
                    let fam = match c.family {
                        Family::Rows => &labels.rows,
                        Family::Cols => &labels.cols,
                        Family::Syms => &labels.syms,
                    };
                    assert_eq!(
                        a.image_of_word(&fam[c.a - 1]),
                        a.image_of_word(&fam[c.b - 1])
                    );
                }
            }
        }
        assert!(seen_abelian > 0, "expected some abelian squares");
    }
}
