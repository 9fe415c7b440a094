//! Partial Latin squares represented as sets of (row, column, symbol) triples.
//!
//! A partial Latin square (PLS) of size t is a set of t triples, 1-based in
//! every coordinate, such that no two triples agree in more than one
//! coordinate, every row index 1..=m occurs, every column index 1..=n occurs,
//! and every symbol 1..=k occurs.  The grid picture: an m x n array in which
//! cell (r, c) holds symbol s exactly when (r, c, s) is a triple, no symbol
//! repeats within a row or column, and no row or column is entirely empty.

use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// One filled cell: row `r`, column `c`, symbol `s`, all 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub row: u16,
    pub col: u16,
    pub sym: u16,
}

impl Triple {
    pub fn new(row: u16, col: u16, sym: u16) -> Self {
        Triple { row, col, sym }
    }

    fn get(&self, axis: usize) -> u16 {
        match axis {
            0 => self.row,
            1 => self.col,
            _ => self.sym,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlsError {
    #[error("empty partial Latin square")]
    Empty,
    #[error("ragged grid: line {0} has a different number of cells")]
    RaggedGrid(usize),
    #[error("Latin violation at row {row}, column {col}: {kind}")]
    LatinViolation { row: u16, col: u16, kind: String },
    #[error("empty row {0}")]
    EmptyRow(u16),
    #[error("empty column {0}")]
    EmptyColumn(u16),
    #[error("unused symbol {0}")]
    UnusedSymbol(u16),
    #[error("coordinate out of range in triple ({0}, {1}, {2})")]
    OutOfRange(u16, u16, u16),
}

/// A validated partial Latin square.  Triples are kept sorted; symbol display
/// names are remembered when the square was parsed from text.
#[derive(Clone, Debug)]
pub struct Pls {
    triples: Vec<Triple>,
    nrows: u16,
    ncols: u16,
    nsyms: u16,
    sym_names: Option<Vec<String>>,
}

/// Equality is structural: two squares with the same triples are equal even
/// if they were parsed with different symbol spellings.
impl PartialEq for Pls {
    fn eq(&self, other: &Self) -> bool {
        self.triples == other.triples
    }
}

impl Eq for Pls {}

impl Pls {
    /// Validates a triple list as a partial Latin square.
    pub fn new(mut triples: Vec<Triple>) -> Result<Self, PlsError> {
        if triples.is_empty() {
            return Err(PlsError::Empty);
        }
        triples.sort();
        triples.dedup();
        let mut nrows = 0;
        let mut ncols = 0;
        let mut nsyms = 0;
        for t in &triples {
            if t.row == 0 || t.col == 0 || t.sym == 0 || t.row > 255 || t.col > 255 || t.sym > 255 {
                return Err(PlsError::OutOfRange(t.row, t.col, t.sym));
            }
            nrows = nrows.max(t.row);
            ncols = ncols.max(t.col);
            nsyms = nsyms.max(t.sym);
        }
        let mut row_seen = vec![false; nrows as usize + 1];
        let mut col_seen = vec![false; ncols as usize + 1];
        let mut sym_seen = vec![false; nsyms as usize + 1];
        for (i, a) in triples.iter().enumerate() {
            row_seen[a.row as usize] = true;
            col_seen[a.col as usize] = true;
            sym_seen[a.sym as usize] = true;
            for b in &triples[i + 1..] {
                let kind = if a.row == b.row && a.col == b.col {
                    Some("two symbols in one cell")
                } else if a.row == b.row && a.sym == b.sym {
                    Some("symbol repeated in a row")
                } else if a.col == b.col && a.sym == b.sym {
                    Some("symbol repeated in a column")
                } else {
                    None
                };
                if let Some(kind) = kind {
                    return Err(PlsError::LatinViolation {
                        row: b.row,
                        col: b.col,
                        kind: kind.to_string(),
                    });
                }
            }
        }
        if let Some(r) = row_seen.iter().skip(1).position(|&x| !x) {
            return Err(PlsError::EmptyRow(r as u16 + 1));
        }
        if let Some(c) = col_seen.iter().skip(1).position(|&x| !x) {
            return Err(PlsError::EmptyColumn(c as u16 + 1));
        }
        if let Some(s) = sym_seen.iter().skip(1).position(|&x| !x) {
            return Err(PlsError::UnusedSymbol(s as u16 + 1));
        }
        Ok(Pls {
            triples,
            nrows,
            ncols,
            nsyms,
            sym_names: None,
        })
    }

    /// Parses a whitespace-separated grid, one line per row, `.` for an empty
    /// cell.  Symbol names are mapped to 1-based ids in order of first
    /// appearance (row-major).
    pub fn parse(text: &str) -> Result<Self, PlsError> {
        let lines: Vec<Vec<&str>> = text
            .lines()
            .map(|l| l.split_whitespace().collect())
            .filter(|toks: &Vec<&str>| !toks.is_empty())
            .collect();
        if lines.is_empty() {
            return Err(PlsError::Empty);
        }
        let width = lines[0].len();
        for (i, l) in lines.iter().enumerate() {
            if l.len() != width {
                return Err(PlsError::RaggedGrid(i + 1));
            }
        }
        let mut names: Vec<String> = Vec::new();
        let mut ids: BTreeMap<&str, u16> = BTreeMap::new();
        let mut triples = Vec::new();
        for (r, l) in lines.iter().enumerate() {
            for (c, tok) in l.iter().enumerate() {
                if *tok == "." {
                    continue;
                }
                let id = *ids.entry(tok).or_insert_with(|| {
                    names.push(tok.to_string());
                    names.len() as u16
                });
                triples.push(Triple::new(r as u16 + 1, c as u16 + 1, id));
            }
        }
        // Row and column counts come from the grid shape, so a trailing
        // all-empty line or column is an explicit error rather than silently
        // dropped.
        if triples.is_empty() {
            return Err(PlsError::Empty);
        }
        let nrows = triples.iter().map(|t| t.row).max().unwrap();
        if (nrows as usize) < lines.len() {
            return Err(PlsError::EmptyRow(nrows + 1));
        }
        let ncols = triples.iter().map(|t| t.col).max().unwrap();
        if (ncols as usize) < width {
            return Err(PlsError::EmptyColumn(ncols + 1));
        }
        let mut pls = Pls::new(triples)?;
        pls.sym_names = Some(names);
        Ok(pls)
    }

    /// Renders the grid so that `parse(render(p))` recovers the same triples.
    pub fn render(&self) -> String {
        let mut grid = vec![vec![None; self.ncols as usize]; self.nrows as usize];
        for t in &self.triples {
            grid[t.row as usize - 1][t.col as usize - 1] = Some(t.sym);
        }
        let mut out = String::new();
        for row in &grid {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Some(s) => self.sym_name(*s),
                    None => ".".to_string(),
                })
                .collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    /// Display name of a symbol id: the parsed name when available, else
    /// `a`, `b`, ..., `z`, `s27`, `s28`, ...
    pub fn sym_name(&self, sym: u16) -> String {
        if let Some(names) = &self.sym_names {
            if let Some(name) = names.get(sym as usize - 1) {
                return name.clone();
            }
        }
        default_sym_name(sym)
    }

    pub fn size(&self) -> usize {
        self.triples.len()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn nrows(&self) -> u16 {
        self.nrows
    }

    pub fn ncols(&self) -> u16 {
        self.ncols
    }

    pub fn nsyms(&self) -> u16 {
        self.nsyms
    }

    /// Applies a permutation of the three coordinate roles: the value in
    /// coordinate `i` of each old triple becomes coordinate `perm[i]` of the
    /// new one.  The six permutations of (row, col, sym) yield the six
    /// conjugates of the square.
    pub fn conjugate(&self, perm: [usize; 3]) -> Pls {
        debug_assert!({
            let mut p = perm;
            p.sort();
            p == [0, 1, 2]
        });
        let triples = self
            .triples
            .iter()
            .map(|t| {
                let mut coords = [0u16; 3];
                coords[perm[0]] = t.row;
                coords[perm[1]] = t.col;
                coords[perm[2]] = t.sym;
                Triple::new(coords[0], coords[1], coords[2])
            })
            .collect();
        Pls::new(triples).expect("conjugate of a valid square is valid")
    }

    /// True iff the triple graph (triples adjacent when they agree in some
    /// coordinate) is connected.
    pub fn is_connected(&self) -> bool {
        let t = self.triples.len();
        let mut seen = vec![false; t];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for j in 0..t {
                if !seen[j] && adjacent(&self.triples[i], &self.triples[j]) {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == t
    }

    /// Connected components of the triple graph, as index sets into
    /// `triples()`.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let t = self.triples.len();
        let mut comp = vec![usize::MAX; t];
        let mut ncomp = 0;
        for start in 0..t {
            if comp[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start] = ncomp;
            while let Some(i) = stack.pop() {
                for j in 0..t {
                    if comp[j] == usize::MAX && adjacent(&self.triples[i], &self.triples[j]) {
                        comp[j] = ncomp;
                        stack.push(j);
                    }
                }
            }
            ncomp += 1;
        }
        let mut out = vec![Vec::new(); ncomp];
        for (i, &c) in comp.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    /// Extracts the sub-square on a set of triple indices, renumbering all
    /// three coordinates contiguously.  Returns the square together with the
    /// original row / column / symbol indices in renumbered order.
    pub fn sub_square(&self, indices: &[usize]) -> (Pls, SubIndexMap) {
        let mut rows: Vec<u16> = indices.iter().map(|&i| self.triples[i].row).collect();
        let mut cols: Vec<u16> = indices.iter().map(|&i| self.triples[i].col).collect();
        let mut syms: Vec<u16> = indices.iter().map(|&i| self.triples[i].sym).collect();
        for v in [&mut rows, &mut cols, &mut syms] {
            v.sort();
            v.dedup();
        }
        let pos = |v: &[u16], x: u16| v.binary_search(&x).unwrap() as u16 + 1;
        let triples = indices
            .iter()
            .map(|&i| {
                let t = self.triples[i];
                Triple::new(pos(&rows, t.row), pos(&cols, t.col), pos(&syms, t.sym))
            })
            .collect();
        let sub = Pls::new(triples).expect("sub-square of a valid square is valid");
        (
            sub,
            SubIndexMap {
                rows,
                cols,
                syms,
            },
        )
    }

    /// Degree (number of triples) of each value along one axis: 0 = rows,
    /// 1 = columns, 2 = symbols.  Index 0 of the result is unused.
    pub fn degrees(&self, axis: usize) -> Vec<u16> {
        let max = match axis {
            0 => self.nrows,
            1 => self.ncols,
            _ => self.nsyms,
        };
        let mut deg = vec![0u16; max as usize + 1];
        for t in &self.triples {
            deg[t.get(axis) as usize] += 1;
        }
        deg
    }
}

/// Original indices of a sub-square's rows, columns and symbols, sorted; the
/// renumbered index i+1 corresponds to entry i.
#[derive(Clone, Debug)]
pub struct SubIndexMap {
    pub rows: Vec<u16>,
    pub cols: Vec<u16>,
    pub syms: Vec<u16>,
}

pub fn default_sym_name(sym: u16) -> String {
    if sym <= 26 {
        ((b'a' + sym as u8 - 1) as char).to_string()
    } else {
        format!("s{sym}")
    }
}

fn adjacent(a: &Triple, b: &Triple) -> bool {
    a.row == b.row || a.col == b.col || a.sym == b.sym
}

impl fmt::Display for Pls {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
