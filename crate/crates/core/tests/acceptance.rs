//! End-to-end acceptance checks.  One test per criterion; each prints a
//! single PASS line (visible with `--nocapture`) or panics with the
//! failing details.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_traits::{One, Signed, Zero};
use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use plsemb::abelian::verify_abelian_witness;
use plsemb::baumslag::verify_inf_not_fin;
use plsemb::canon::canonical_form;
use plsemb::corpus;
use plsemb::coset::group_order;
use plsemb::groups::{embed_into_group, verify_embedding_witness};
use plsemb::pipeline::{
    self, artifact_config, certificate_matches, ArtifactStatus, Certificate, Config, SurveyRow,
    VerdictRecord,
};
use plsemb::pls::Pls;
use plsemb::presentation::{
    find_duplicate, presentation_of, reduced_labels, same_relator_class, tietze_reduce,
    Collision, Family, Presentation, TIETZE_BUDGET,
};
use plsemb::rewrite::{kb_collision_test, knuth_bendix, normal_forms, KbLimits};
use plsemb::snf::{determinant, smith_normal_form, IntMatrix};
use plsemb::species::{CountRow, SpeciesCatalog};
use plsemb::testing;

/// Full desk-scale run shared by the count criteria and the witness sweep:
/// catalogs and count rows for sizes 1-8, plus the classification of every
/// candidate species under default budgets.
struct DeskRun {
    _dir: tempfile::TempDir,
    catalog_dir: PathBuf,
    counts: Vec<CountRow>,
    rows: Vec<SurveyRow>,
    records: Vec<VerdictRecord>,
}

static DESK: Lazy<DeskRun> = Lazy::new(|| {
    let dir = tempfile::tempdir().expect("tempdir");
    let catalog_dir = dir.path().join("catalogs");
    let out = dir.path().join("results.jsonl");
    let counts = pipeline::run_enumerate(8, &catalog_dir).expect("enumerate to size 8");
    let rows = pipeline::run_survey(8, Some(&catalog_dir), &out, false, &Config::default())
        .expect("survey to size 8");
    let records = pipeline::read_records(&out).expect("read the survey records");
    DeskRun {
        _dir: dir,
        catalog_dir,
        counts,
        rows,
        records,
    }
});

static SMALL_SPECIES: Lazy<Vec<SpeciesCatalog>> =
    Lazy::new(|| pipeline::species_catalogs(6, None).expect("species catalogs to size 6"));

fn pass(line: &str) {
    println!("PASS {line}");
}

#[test]
fn criterion_1_species_counts_through_size_eight() {
    let expected: Vec<CountRow> = [
        (1, 1, 1, 0),
        (2, 2, 1, 0),
        (3, 5, 3, 0),
        (4, 18, 11, 2),
        (5, 59, 36, 0),
        (6, 306, 213, 11),
        (7, 1861, 1405, 50),
        (8, 15097, 12274, 489),
    ]
    .into_iter()
    .map(|(size, all, connected, candidates)| CountRow {
        size,
        all,
        connected,
        candidates,
    })
    .collect();
    assert_eq!(DESK.counts, expected, "species counts per size");

    // The report path reads the same rows back from the catalog directory.
    let reread = pipeline::read_counts(&DESK.catalog_dir).expect("counts.csv");
    assert_eq!(reread, expected, "counts.csv round trip");
    let csv = pipeline::count_table_csv(&reread);
    assert!(csv.contains("8,15097,12274,489"), "csv: {csv}");

    pass("criterion 1: species counts 1-8 are 1,2,5,18,59,306,1861,15097 (candidates 0,0,0,2,0,11,50,489)");
}

#[test]
fn criterion_2_classification_counts_through_size_eight() {
    let expected: Vec<SurveyRow> = [
        (4, 0, 2, 0, 0),
        (6, 0, 10, 1, 0),
        (7, 2, 44, 4, 0),
        (8, 16, 435, 38, 0),
    ]
    .into_iter()
    .map(|(size, ne, abelian, nonabelian, inf_not_fin)| SurveyRow {
        size,
        ne,
        abelian,
        nonabelian,
        inf_not_fin,
        unresolved: 0,
    })
    .collect();
    assert_eq!(DESK.rows, expected, "classification counts per size");
    assert_eq!(DESK.records.len(), 552, "one record per candidate species");

    pass("criterion 2: classification counts for sizes 4,6,7,8 match with zero unresolved");
}

#[test]
fn criterion_3_bundled_artifact_checks_all_pass() {
    let report = pipeline::verify_artifacts(&artifact_config()).expect("artifact checks run");
    for check in &report.checks {
        assert!(check.pass, "{}: {}", check.name, check.detail);
    }
    assert_eq!(report.status, ArtifactStatus::AllPass);
    assert_eq!(report.checks.len(), 8);

    pass("criterion 3: all 8 bundled artifact checks verify");
}

#[test]
fn criterion_4_worked_example_regressions() {
    // Nine-cell square: the presentation collapses to a free group of rank
    // one, where the labels of the second and fourth symbols coincide.
    let p = Pls::parse(corpus::NINE_CELL).unwrap();
    let (pres, labels) = presentation_of(&p);
    let red = tietze_reduce(&pres, TIETZE_BUDGET);
    assert_eq!(red.pres.num_gens(), 1, "nine-cell generators");
    assert!(red.pres.is_free(), "nine-cell relators");
    let lab = reduced_labels(&labels, &red.images);
    assert_eq!(
        find_duplicate(&lab),
        Some(Collision {
            family: Family::Syms,
            a: 2,
            b: 4
        }),
        "nine-cell symbol collision"
    );
    assert_eq!(lab.syms[1], lab.syms[3], "colliding symbol labels agree");

    // Ten-cell square: two generators with one relator in the class of
    // v^2 u^-2, and rewriting merges the symbol labeled v with the one
    // labeled v^-1 u^2.
    let p = Pls::parse(corpus::TEN_CELL).unwrap();
    let (pres, labels) = presentation_of(&p);
    let red = tietze_reduce(&pres, TIETZE_BUDGET);
    assert_eq!(red.pres.num_gens(), 2, "ten-cell generators");
    assert_eq!(red.pres.relators.len(), 1, "ten-cell relators");
    let model = Presentation::parse("u v | v^2 u^-2").unwrap();
    assert!(
        same_relator_class(&red.pres.relators[0], &model.relators[0], 2),
        "ten-cell relator {:?} is not in the v^2 u^-2 class",
        red.pres.relators[0]
    );
    let lab = reduced_labels(&labels, &red.images);
    let rws = knuth_bendix(&red.pres, KbLimits::default());
    assert_eq!(
        kb_collision_test(&lab, &rws),
        Some(Collision {
            family: Family::Syms,
            a: 3,
            b: 5
        }),
        "ten-cell rewriting collision"
    );
    assert_eq!(
        rws.reduce_word(&lab.syms[2]),
        rws.reduce_word(&lab.syms[4]),
        "colliding symbols share a normal form"
    );

    pass("criterion 4: worked-example reductions and collisions reproduce");
}

#[test]
fn criterion_5_property_suites() {
    let snf_checked = snf_identities_hold();
    let canon_checked = canonical_form_agrees_with_brute_force();
    let embed_checked = embedding_search_agrees_with_naive_oracle();
    coset_enumeration_landmarks();
    let kb_checked = normal_form_counts_match_cyclic_orders();
    let witnesses_checked = every_emitted_witness_verifies();
    let invariance_checked = classification_is_invariant_on_random_orbits();

    pass(&format!(
        "criterion 5: property suites (snf {snf_checked} matrices, canonical {canon_checked} squares, \
         embedding {embed_checked} pairs, coset landmarks, normal forms {kb_checked} groups, \
         {witnesses_checked} witnesses, invariance {invariance_checked} squares)"
    ));
}

/// U * A * V = D with U, V unimodular and the diagonal a nonnegative
/// divisibility chain, on random matrices up to 8 x 8 with entries in
/// [-20, 20].
fn snf_identities_hold() -> usize {
    let cases: Vec<IntMatrix> = {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        (0..1000)
            .map(|_| {
                let rows = rng.gen_range(1..=8);
                let cols = rng.gen_range(1..=8);
                let data: Vec<Vec<i64>> = (0..rows)
                    .map(|_| (0..cols).map(|_| rng.gen_range(-20..=20)).collect())
                    .collect();
                IntMatrix::from_rows(&data)
            })
            .collect()
    };
    cases.par_iter().for_each(|a| {
        let s = smith_normal_form(a);
        assert_eq!(s.u.mul(a).mul(&s.v), s.d, "U*A*V = D for {a:?}");
        assert!(determinant(&s.u).abs().is_one(), "U unimodular for {a:?}");
        assert!(determinant(&s.v).abs().is_one(), "V unimodular for {a:?}");
        assert!(s.d.is_diagonal(), "D diagonal for {a:?}");
        let diag = s.diagonal();
        for w in diag.windows(2) {
            assert!(!w[0].is_negative() && !w[1].is_negative(), "nonnegative diagonal");
            if w[0].is_zero() {
                assert!(w[1].is_zero(), "zeros close the chain for {a:?}");
            } else {
                assert!((&w[1] % &w[0]).is_zero(), "{} divides {} for {a:?}", w[0], w[1]);
            }
        }
    });
    cases.len()
}

/// The canonical form induces exactly the same equivalence classes as the
/// brute-force minimum over all six conjugates and all relabelings, across
/// every species of size <= 6 plus a scrambled copy of each.
fn canonical_form_agrees_with_brute_force() -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut pool: Vec<Pls> = Vec::new();
    for cat in SMALL_SPECIES.iter() {
        for p in cat.reps.values() {
            pool.push(p.clone());
            let perm = testing::all_perms(3)[rng.gen_range(0..6)].clone();
            let conj = p.conjugate([
                perm[0] as usize - 1,
                perm[1] as usize - 1,
                perm[2] as usize - 1,
            ]);
            pool.push(testing::random_relabel(&mut rng, &conj));
        }
    }
    let keys: Vec<(Vec<u8>, Vec<u8>)> = pool
        .par_iter()
        .map(|p| {
            (
                canonical_form(p).as_bytes().to_vec(),
                testing::brute_canonical_bytes(p),
            )
        })
        .collect();
    let mut canon_to_brute: BTreeMap<&[u8], &[u8]> = BTreeMap::new();
    let mut brute_to_canon: BTreeMap<&[u8], &[u8]> = BTreeMap::new();
    for (c, b) in &keys {
        let prev = canon_to_brute.entry(c).or_insert(b);
        assert_eq!(*prev, &b[..], "one canonical class maps to two brute classes");
        let prev = brute_to_canon.entry(b).or_insert(c);
        assert_eq!(*prev, &c[..], "one brute class maps to two canonical classes");
    }
    let species: usize = SMALL_SPECIES.iter().map(|c| c.reps.len()).sum();
    assert_eq!(canon_to_brute.len(), species, "distinct classes in the pool");
    keys.len()
}

/// The normalized embedding search answers exactly like the brute-force
/// assignment search on every species of size <= 5 against every group of
/// order <= 8, and each witness found passes the checker.
fn embedding_search_agrees_with_naive_oracle() -> usize {
    let groups = pipeline::group_catalog(&Config {
        max_catalog_order: 8,
        ..Config::default()
    })
    .expect("group catalog to order 8");
    let species: Vec<&Pls> = SMALL_SPECIES
        .iter()
        .filter(|c| c.size <= 5)
        .flat_map(|c| c.reps.values())
        .collect();
    let pairs: Vec<(&Pls, &plsemb::groups::FiniteGroup)> = species
        .iter()
        .flat_map(|p| groups.iter().map(move |g| (*p, g)))
        .collect();
    pairs.par_iter().for_each(|(p, g)| {
        let found = embed_into_group(p, g);
        let naive = testing::naive_embed_exists(p, g);
        assert_eq!(
            found.is_some(),
            naive,
            "search vs oracle on {} in {}",
            p.render(),
            g.name
        );
        if let Some(w) = found {
            assert!(verify_embedding_witness(p, &w), "witness checks out");
        }
    });
    pairs.len()
}

/// Coset enumeration pins the order-6 presentation and overflows on a free
/// generator instead of pretending to finish.
fn coset_enumeration_landmarks() {
    let s3 = Presentation::parse("a b | a^3, b^2, a b a b").unwrap();
    assert_eq!(group_order(&s3, 100_000).index(), Some(6));
    let free = Presentation::parse("a |").unwrap();
    assert_eq!(group_order(&free, 1000).index(), None);
}

/// Completed rewriting systems for the cyclic groups list exactly as many
/// normal forms as the group has elements.
fn normal_form_counts_match_cyclic_orders() -> usize {
    for k in 1..=12usize {
        let pres = Presentation::parse(&format!("a | a^{k}")).unwrap();
        let rws = knuth_bendix(&pres, KbLimits::default());
        assert!(rws.confluent, "completion finishes for order {k}");
        let forms = normal_forms(&rws, 10_000).expect("finitely many normal forms");
        assert_eq!(forms.len(), k, "normal forms for the cyclic group of order {k}");
    }
    12
}

/// Every witness-bearing certificate in the full desk survey passes its
/// checker, and every certificate kind matches its verdict.
fn every_emitted_witness_verifies() -> usize {
    DESK.records
        .par_iter()
        .map(|rec| {
            let p = Pls::parse(&rec.pls).expect("recorded square parses");
            assert!(
                certificate_matches(rec.verdict, rec.certificate.as_ref()),
                "certificate kind fits verdict for {}",
                rec.canonical_id
            );
            match &rec.certificate {
                Some(Certificate::AbelianWitness { witness }) => {
                    assert!(verify_abelian_witness(&p, witness), "abelian witness for {}", rec.canonical_id);
                    1
                }
                Some(Certificate::FiniteWitness { witness }) => {
                    assert!(verify_embedding_witness(&p, witness), "finite witness for {}", rec.canonical_id);
                    1
                }
                Some(Certificate::FreeResidual { witness, .. }) => {
                    if let Some(w) = witness {
                        assert!(verify_embedding_witness(&p, w), "free-residual witness for {}", rec.canonical_id);
                    }
                    witness.is_some() as usize
                }
                Some(Certificate::BaumslagCertificate { certificate }) => {
                    assert!(verify_inf_not_fin(certificate), "family certificate for {}", rec.canonical_id);
                    1
                }
                _ => 0,
            }
        })
        .sum()
}

/// Classifying a square and a randomly transformed member of its species
/// produces identical records (timings aside) on 200 random squares of
/// size <= 7.
fn classification_is_invariant_on_random_orbits() -> usize {
    let cfg = artifact_config();
    let groups = pipeline::group_catalog(&cfg).expect("group catalog");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cases: Vec<(Pls, Pls)> = (0..200)
        .map(|_| {
            let size = rng.gen_range(1..=7);
            let p = testing::random_pls(&mut rng, size);
            let perm = testing::all_perms(3)[rng.gen_range(0..6)].clone();
            let conj = p.conjugate([
                perm[0] as usize - 1,
                perm[1] as usize - 1,
                perm[2] as usize - 1,
            ]);
            let q = testing::random_relabel(&mut rng, &conj);
            (p, q)
        })
        .collect();
    cases.par_iter().for_each(|(p, q)| {
        let strip = |rec: &VerdictRecord| {
            let mut v = serde_json::to_value(rec).unwrap();
            v.as_object_mut().unwrap().remove("stage_timings_ms");
            v
        };
        let a = strip(&pipeline::classify(p, &cfg, &groups));
        let b = strip(&pipeline::classify(q, &cfg, &groups));
        assert_eq!(a, b, "records differ on a species orbit:\n{}\n{}", p.render(), q.render());
    });
    cases.len()
}
