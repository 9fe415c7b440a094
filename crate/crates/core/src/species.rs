//! Species enumeration by incremental extension, and the two pruning rules
//! that cut the survey down to candidate squares.
//!
//! Every species of size t arises from a species of size t-1 by adding one
//! triple: removing any triple from a square and renumbering leaves a valid
//! smaller square, so extending each representative in all ways (existing or
//! one fresh index per coordinate) and canonicalizing reaches everything.

use crate::canon::{canonicalize, CanonicalForm};
use crate::pls::{Pls, Triple};
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;

/// All species representatives of one size, keyed and ordered by canonical
/// form.  Representatives carry the canonical labeling.
pub struct SpeciesCatalog {
    pub size: usize,
    pub reps: BTreeMap<CanonicalForm, Pls>,
}

/// The single species of size 1.
pub fn seed_catalog() -> SpeciesCatalog {
    let p = Pls::new(vec![Triple::new(1, 1, 1)]).unwrap();
    let (rep, form) = canonicalize(&p);
    let mut reps = BTreeMap::new();
    reps.insert(form, rep);
    SpeciesCatalog { size: 1, reps }
}

/// All species of size `cat.size + 1`, from extending every representative
/// by one triple in every way that keeps the Latin property.  The new triple
/// may use an existing or one fresh row, column and symbol.
pub fn extend_species(cat: &SpeciesCatalog) -> SpeciesCatalog {
    let extended: Vec<(CanonicalForm, Pls)> = cat
        .reps
        .par_iter()
        .flat_map_iter(|(_, p)| extensions(p))
        .map(|q| {
            let (rep, form) = canonicalize(&q);
            (form, rep)
        })
        .collect();
    let mut reps = BTreeMap::new();
    for (form, rep) in extended {
        reps.entry(form).or_insert(rep);
    }
    SpeciesCatalog {
        size: cat.size + 1,
        reps,
    }
}

fn extensions(p: &Pls) -> Vec<Pls> {
    let (m, n, k) = (p.nrows(), p.ncols(), p.nsyms());
    let mut out = Vec::new();
    for r in 1..=m + 1 {
        for c in 1..=n + 1 {
            if p.triples().iter().any(|t| t.row == r && t.col == c) {
                continue;
            }
            for s in 1..=k + 1 {
                let clash = p
                    .triples()
                    .iter()
                    .any(|t| (t.row == r && t.sym == s) || (t.col == c && t.sym == s));
                if clash {
                    continue;
                }
                let mut triples = p.triples().to_vec();
                triples.push(Triple::new(r, c, s));
                out.push(Pls::new(triples).expect("extension keeps validity"));
            }
        }
    }
    out
}

/// Survey flags for one species: connectivity and the two removal-based
/// pruning conditions.  A square is a candidate when it is connected and
/// neither condition fires.  All three flags are species invariants: the
/// conditions treat columns and symbols symmetrically, so checking the three
/// cyclic conjugates covers all six.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CandidateFlags {
    pub connected: bool,
    pub pruned_by_cond1: bool,
    pub pruned_by_cond2: bool,
}

impl CandidateFlags {
    pub fn candidate(&self) -> bool {
        self.connected && !self.pruned_by_cond1 && !self.pruned_by_cond2
    }
}

pub fn candidate_flags(p: &Pls) -> CandidateFlags {
    let rotations = [
        p.clone(),
        p.conjugate([1, 2, 0]),
        p.conjugate([2, 0, 1]),
    ];
    CandidateFlags {
        connected: p.is_connected(),
        pruned_by_cond1: rotations.iter().any(cond1),
        pruned_by_cond2: rotations.iter().any(cond2),
    }
}

/// Condition 1: some triple (r, c, s) alone in its row can be removed such
/// that every remaining triple's row r' still meets column c or symbol s,
/// i.e. (r', c) or (r', s) occurs among the remaining triples.
fn cond1(p: &Pls) -> bool {
    let row_deg = p.degrees(0);
    let ts = p.triples();
    'outer: for (i, t) in ts.iter().enumerate() {
        if row_deg[t.row as usize] != 1 {
            continue;
        }
        for (j, u) in ts.iter().enumerate() {
            if j == i {
                continue;
            }
            let meets = ts.iter().enumerate().any(|(l, v)| {
                l != i && v.row == u.row && (v.col == t.col || v.sym == t.sym)
            });
            if !meets {
                continue 'outer;
            }
        }
        return true;
    }
    false
}

/// Condition 2: some full row (r, c_1, s_1), ..., (r, c_l, s_l) can be
/// removed such that no removed triple has both its column and its symbol
/// still occurring among the remaining triples.
fn cond2(p: &Pls) -> bool {
    let ts = p.triples();
    'rows: for r in 1..=p.nrows() {
        for t in ts.iter().filter(|t| t.row == r) {
            let col_survives = ts.iter().any(|v| v.row != r && v.col == t.col);
            let sym_survives = ts.iter().any(|v| v.row != r && v.sym == t.sym);
            if col_survives && sym_survives {
                continue 'rows;
            }
        }
        return true;
    }
    false
}

/// One row of the survey count table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CountRow {
    pub size: usize,
    pub all: usize,
    pub connected: usize,
    pub candidates: usize,
}

pub fn count_report(cat: &SpeciesCatalog) -> CountRow {
    let flags: Vec<CandidateFlags> = cat
        .reps
        .par_iter()
        .map(|(_, p)| candidate_flags(p))
        .collect();
    CountRow {
        size: cat.size,
        all: cat.reps.len(),
        connected: flags.iter().filter(|f| f.connected).count(),
        candidates: flags.iter().filter(|f| f.candidate()).count(),
    }
}

/// Writes a catalog as a length-prefixed text container: for each
/// representative, a line with the byte length of its rendered grid, then
/// the grid itself.  Records are ordered by canonical form.
pub fn write_catalog(cat: &SpeciesCatalog, path: &Path) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    for rep in cat.reps.values() {
        let text = rep.render();
        writeln!(w, "{}", text.len())?;
        w.write_all(text.as_bytes())?;
    }
    w.flush()
}

pub fn read_catalog(size: usize, path: &Path) -> anyhow::Result<SpeciesCatalog> {
    let file = std::fs::File::open(path)?;
    let mut r = std::io::BufReader::new(file);
    let mut reps = BTreeMap::new();
    let mut line = String::new();
    loop {
        line.clear();
        if r.read_line(&mut line)? == 0 {
            break;
        }
        let len: usize = line.trim().parse()?;
        let mut buf = vec![0u8; len];
        std::io::Read::read_exact(&mut r, &mut buf)?;
        let text = String::from_utf8(buf)?;
        let p = Pls::parse(&text)?;
        anyhow::ensure!(p.size() == size, "record of size {} in size-{size} catalog", p.size());
        let (rep, form) = canonicalize(&p);
        reps.insert(form, rep);
    }
    Ok(SpeciesCatalog { size, reps })
}

pub fn catalog_file_name(size: usize) -> String {
    format!("species_{size:02}.pls")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalogs_up_to(max: usize) -> Vec<SpeciesCatalog> {
        let mut cats = vec![seed_catalog()];
        while cats.len() < max {
            cats.push(extend_species(cats.last().unwrap()));
        }
        cats
    }

    #[test]
    fn species_counts_up_to_size_six() {
        let cats = catalogs_up_to(6);
        let rows: Vec<CountRow> = cats.iter().map(count_report).collect();
        let all: Vec<usize> = rows.iter().map(|r| r.all).collect();
        let connected: Vec<usize> = rows.iter().map(|r| r.connected).collect();
        let candidates: Vec<usize> = rows.iter().map(|r| r.candidates).collect();
        assert_eq!(all, vec![1, 2, 5, 18, 59, 306]);
        assert_eq!(connected, vec![1, 1, 3, 11, 36, 213]);
        assert_eq!(candidates, vec![0, 0, 0, 2, 0, 11]);
    }

    #[test]
    fn size_one_square_is_pruned_by_condition_one() {
        let p = Pls::parse("a").unwrap();
        let flags = candidate_flags(&p);
        assert!(flags.connected);
        assert!(flags.pruned_by_cond1);
        assert!(!flags.candidate());
    }

    #[test]
    fn intercalate_is_a_candidate() {
        let p = Pls::parse("a b\nb a").unwrap();
        let flags = candidate_flags(&p);
        assert_eq!(
            flags,
            CandidateFlags {
                connected: true,
                pruned_by_cond1: false,
                pruned_by_cond2: false
            }
        );
    }

    #[test]
    fn flags_are_species_invariant() {
        use crate::testing::{random_pls, random_relabel};
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..200 {
            let size = rng.gen_range(1..=7);
            let p = random_pls(&mut rng, size);
            let flags = candidate_flags(&p);
            let q = random_relabel(&mut rng, &p);
            assert_eq!(candidate_flags(&q), flags);
            let perm = [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]
                [rng.gen_range(0..5)];
            assert_eq!(candidate_flags(&p.conjugate(perm)), flags, "square\n{p}");
        }
    }

    #[test]
    fn catalog_roundtrips_through_disk() {
        let cats = catalogs_up_to(4);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join(catalog_file_name(4));
        write_catalog(&cats[3], &path).unwrap();
        let back = read_catalog(4, &path).unwrap();
        assert_eq!(back.reps.len(), cats[3].reps.len());
        assert!(back.reps.keys().eq(cats[3].reps.keys()));
    }
}
