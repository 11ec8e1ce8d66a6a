//! Forbidden configurations — grids, punctured grids, wickets — and a
//! deterministic backtracking search for embeddings of them in a linear
//! hypergraph, with geometric transversality classification.
//!
//! A pattern embedding is a set of "row" edges (pairwise disjoint, listed by
//! ascending edge index) plus a set of "column" edges (likewise), rows and
//! columns disjoint as edge sets, such that row i and column j share exactly
//! one vertex — the cross x_ij — unless (i, j) is a designated hole, in
//! which case they are disjoint. Linearity caps every intersection at one
//! vertex, so the search only decides which intersections are empty. Each
//! hole (i, j) additionally names two fillers: a vertex of row i lying in no
//! column edge and a vertex of column j lying in no row edge, all fillers
//! and crosses pairwise distinct. In a valid row/column frame the non-cross
//! vertices of a row are automatically in no column edge (a shared vertex
//! would be a second intersection), so fillers are assigned canonically:
//! holes in index order take the spare vertices in ascending order.

use crate::geom::intersect;
use crate::hyper::{LinearHypergraph, LinearityOutcome};
use serde_json::json;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("hypergraph carries no supporting-line geometry")]
    NoGeometry,
    #[error("estimated search tree of {estimate} row tuples exceeds the hard cap {cap}")]
    InstanceTooLarge { estimate: u128, cap: u128 },
    #[error("invalid pattern: {0}")]
    BadSpec(String),
    #[error("internal search error: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    Grid,
    Punctured,
    Wicket,
}

impl PatternKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PatternKind::Grid => "grid",
            PatternKind::Punctured => "punctured",
            PatternKind::Wicket => "wicket",
        }
    }
}

/// Hole discipline for punctured grids: any hole set of a given size, or a
/// specific hole set up to row/column permutation and transposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HolePattern {
    None,
    Count(usize),
    Set(BTreeSet<(usize, usize)>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSpec {
    pub kind: PatternKind,
    pub r: usize,
    pub holes: HolePattern,
}

impl PatternSpec {
    /// The full r x r grid.
    pub fn grid(r: usize) -> PatternSpec {
        PatternSpec {
            kind: PatternKind::Grid,
            r,
            holes: HolePattern::None,
        }
    }

    /// An r x r grid with exactly t empty intersections, anywhere.
    pub fn punctured(r: usize, t: usize) -> PatternSpec {
        PatternSpec {
            kind: PatternKind::Punctured,
            r,
            holes: HolePattern::Count(t),
        }
    }

    /// An r x r grid with holes exactly at the given (row, col) positions,
    /// up to permuting rows, permuting columns, and transposing.
    pub fn punctured_at(r: usize, holes: BTreeSet<(usize, usize)>) -> PatternSpec {
        PatternSpec {
            kind: PatternKind::Punctured,
            r,
            holes: HolePattern::Set(holes),
        }
    }

    /// Three pairwise disjoint rows crossed by two disjoint columns, all six
    /// crosses distinct: a 3 x 3 grid with one column removed.
    pub fn wicket() -> PatternSpec {
        PatternSpec {
            kind: PatternKind::Wicket,
            r: 3,
            holes: HolePattern::None,
        }
    }

    /// (rows, columns) of the pattern frame.
    pub fn dims(&self) -> (usize, usize) {
        match self.kind {
            PatternKind::Grid | PatternKind::Punctured => (self.r, self.r),
            PatternKind::Wicket => (3, 2),
        }
    }

    /// Exact number of holes every embedding must have.
    pub fn hole_count(&self) -> usize {
        match &self.holes {
            HolePattern::None => 0,
            HolePattern::Count(t) => *t,
            HolePattern::Set(set) => set.len(),
        }
    }

    fn validate(&self, h: &LinearHypergraph) -> Result<(), PatternError> {
        let bad = |msg: String| Err(PatternError::BadSpec(msg));
        match self.kind {
            PatternKind::Grid => {
                if self.holes != HolePattern::None {
                    return bad("a grid has no holes".into());
                }
                if self.r != h.r() {
                    return bad(format!(
                        "grid size {} must equal the uniformity {}",
                        self.r,
                        h.r()
                    ));
                }
            }
            PatternKind::Punctured => {
                if self.r != h.r() {
                    return bad(format!(
                        "punctured grid size {} must equal the uniformity {}",
                        self.r,
                        h.r()
                    ));
                }
                let t = self.hole_count();
                if t == 0 || t > self.r * self.r {
                    return bad(format!(
                        "punctured grids need between 1 and {} holes, got {}",
                        self.r * self.r,
                        t
                    ));
                }
                if let HolePattern::Set(set) = &self.holes {
                    if set.iter().any(|&(i, j)| i >= self.r || j >= self.r) {
                        return bad(format!(
                            "hole positions must lie in the {0} x {0} frame",
                            self.r
                        ));
                    }
                }
                if self.holes == HolePattern::None {
                    return bad("punctured grids need a hole count or hole set".into());
                }
            }
            PatternKind::Wicket => {
                if self.holes != HolePattern::None {
                    return bad("a wicket has no holes".into());
                }
                if h.r() < 3 {
                    return bad("a wicket needs uniformity at least 3".into());
                }
            }
        }
        if self.dims().0 > 200 {
            return bad("pattern frame too large".into());
        }
        Ok(())
    }
}

/// A concrete occurrence of a pattern. Row and column indices in cross,
/// hole, and filler positions are 0-based slots into `row_edges` /
/// `col_edges`. `transverse` and `holes_off_vertex_set` are filled in when
/// the hypergraph carries line geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub row_edges: Vec<u32>,
    pub col_edges: Vec<u32>,
    pub crosses: BTreeMap<(usize, usize), u32>,
    pub holes: BTreeSet<(usize, usize)>,
    /// hole -> (row-side filler a_ij, column-side filler b_ij).
    pub fillers: BTreeMap<(usize, usize), (u32, u32)>,
    pub transverse: Option<bool>,
    pub holes_off_vertex_set: Option<bool>,
}

impl Embedding {
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "row_edges": self.row_edges,
            "col_edges": self.col_edges,
            "crosses": self.crosses.iter().map(|(&(i, j), &v)| json!([i, j, v])).collect::<Vec<_>>(),
            "holes": self.holes.iter().map(|&(i, j)| json!([i, j])).collect::<Vec<_>>(),
            "fillers": self.fillers.iter().map(|(&(i, j), &(a, b))| json!([i, j, a, b])).collect::<Vec<_>>(),
            "transverse": self.transverse,
            "holes_off_vertex_set": self.holes_off_vertex_set,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub transverse: bool,
    pub holes_off_vertex_set: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    /// Backtracking node limit; a node is one candidate edge examined.
    pub budget: u64,
    /// Count only transverse embeddings whose holes avoid the vertex set;
    /// everything else is reported in `Certificate::excluded`.
    pub transverse_only: bool,
    /// Called with the node count every ~4M nodes.
    pub progress: Option<fn(u64)>,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            budget: 100_000_000,
            transverse_only: false,
            progress: None,
        }
    }
}

/// Row-tuple estimates above this are refused outright.
const HARD_CAP: u128 = 1_000_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(Embedding),
    NotFound { nodes: u64, excluded: usize },
    BudgetExhausted { nodes: u64 },
}

/// Result of a full enumeration. `complete` is false when the node budget
/// ran out, in which case absence has NOT been certified. In
/// transverse-only mode, embeddings failing transversality or with a hole
/// on a vertex land in `excluded` instead of `found`.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub nodes: u64,
    pub complete: bool,
    pub found: Vec<Embedding>,
    pub excluded: Vec<Embedding>,
}

/// First embedding in canonical search order, if any.
pub fn find_embedding(
    h: &LinearHypergraph,
    spec: &PatternSpec,
    config: &SearchConfig,
) -> Result<SearchOutcome, PatternError> {
    let mut s = Searcher::new(h, spec, config, true)?;
    s.run()?;
    Ok(if let Some(e) = s.found.into_iter().next() {
        SearchOutcome::Found(e)
    } else if s.exhausted {
        SearchOutcome::BudgetExhausted { nodes: s.nodes }
    } else {
        SearchOutcome::NotFound {
            nodes: s.nodes,
            excluded: s.excluded.len(),
        }
    })
}

/// Enumerate every embedding. The certificate only claims absence when it
/// is `complete`. For square patterns each transpose pair is counted once:
/// the canonical orientation puts the overall least edge among the rows.
pub fn exhaustive_certify(
    h: &LinearHypergraph,
    spec: &PatternSpec,
    config: &SearchConfig,
) -> Result<Certificate, PatternError> {
    let (nrows, _) = spec.dims();
    let estimate = binomial_estimate(h.edge_count() as u128, nrows);
    if estimate > HARD_CAP {
        return Err(PatternError::InstanceTooLarge {
            estimate,
            cap: HARD_CAP,
        });
    }
    let mut s = Searcher::new(h, spec, config, false)?;
    s.run()?;
    Ok(Certificate {
        nodes: s.nodes,
        complete: !s.exhausted,
        found: s.found,
        excluded: s.excluded,
    })
}

fn binomial_estimate(n: u128, k: usize) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        if n <= i {
            return 0;
        }
        acc = acc.saturating_mul(n - i) / (i + 1);
        if acc > HARD_CAP * 1000 {
            return acc;
        }
    }
    acc
}

/// Geometric classification: `transverse` when the supporting lines of rows
/// and columns meet in nrows x ncols pairwise distinct projective points,
/// `holes_off_vertex_set` when no hole intersection point is a vertex of h.
pub fn classify_embedding(
    h: &LinearHypergraph,
    emb: &Embedding,
) -> Result<Classification, PatternError> {
    if !h.has_geometry() {
        return Err(PatternError::NoGeometry);
    }
    let field = h.field().clone();
    let line = |e: u32| h.edge_line(e).expect("geometry present");
    let row_lines: Vec<_> = emb.row_edges.iter().map(|&e| line(e)).collect();
    let col_lines: Vec<_> = emb.col_edges.iter().map(|&e| line(e)).collect();
    let mut pts = Vec::with_capacity(row_lines.len() * col_lines.len());
    let mut transverse = true;
    for &rl in &row_lines {
        for &cl in &col_lines {
            match intersect(&field, rl, cl) {
                Ok(p) => pts.push(p),
                Err(_) => transverse = false, // identical lines
            }
        }
    }
    if transverse {
        let distinct: BTreeSet<_> = pts.iter().collect();
        transverse = distinct.len() == pts.len();
    }
    let mut holes_off_vertex_set = true;
    for &(i, j) in &emb.holes {
        match intersect(&field, row_lines[i], col_lines[j]) {
            Ok(p) => {
                if let Some(a) = p.to_affine() {
                    if h.vertex_at_point(a).is_some() {
                        holes_off_vertex_set = false;
                    }
                }
            }
            Err(_) => holes_off_vertex_set = false,
        }
    }
    Ok(Classification {
        transverse,
        holes_off_vertex_set,
    })
}

/// Full from-scratch re-check of an embedding against the pattern,
/// using only naive set operations on the stored edges — independent of
/// the search's pair index and bookkeeping.
pub fn validate_embedding(
    h: &LinearHypergraph,
    spec: &PatternSpec,
    emb: &Embedding,
) -> Result<(), String> {
    let (nrows, ncols) = spec.dims();
    if emb.row_edges.len() != nrows || emb.col_edges.len() != ncols {
        return Err("wrong frame dimensions".into());
    }
    let ascending = |v: &[u32]| {
        v.windows(2).all(|w| w[0] < w[1]) && v.iter().all(|&e| (e as usize) < h.edge_count())
    };
    if !ascending(&emb.row_edges) || !ascending(&emb.col_edges) {
        return Err("edge lists must be ascending and in range".into());
    }
    let row_ids: BTreeSet<u32> = emb.row_edges.iter().copied().collect();
    if emb.col_edges.iter().any(|e| row_ids.contains(e)) {
        return Err("row and column edge sets overlap".into());
    }
    let set = |e: u32| -> BTreeSet<u32> { h.edge(e).iter().copied().collect() };
    let rows: Vec<BTreeSet<u32>> = emb.row_edges.iter().map(|&e| set(e)).collect();
    let cols: Vec<BTreeSet<u32>> = emb.col_edges.iter().map(|&e| set(e)).collect();
    for i in 0..nrows {
        for i2 in i + 1..nrows {
            if rows[i].intersection(&rows[i2]).next().is_some() {
                return Err(format!("rows {} and {} intersect", i, i2));
            }
        }
    }
    for j in 0..ncols {
        for j2 in j + 1..ncols {
            if cols[j].intersection(&cols[j2]).next().is_some() {
                return Err(format!("columns {} and {} intersect", j, j2));
            }
        }
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, col) in cols.iter().enumerate() {
            let inter: Vec<u32> = row.intersection(col).copied().collect();
            if emb.holes.contains(&(i, j)) {
                if !inter.is_empty() {
                    return Err(format!("hole ({}, {}) is not empty", i, j));
                }
            } else {
                if inter.len() != 1 {
                    return Err(format!(
                        "cross ({}, {}) has {} shared vertices",
                        i,
                        j,
                        inter.len()
                    ));
                }
                if emb.crosses.get(&(i, j)) != Some(&inter[0]) {
                    return Err(format!("cross ({}, {}) is misrecorded", i, j));
                }
            }
        }
    }
    if emb.crosses.len() != nrows * ncols - emb.holes.len() {
        return Err("cross map has wrong size".into());
    }
    let cross_vals: BTreeSet<u32> = emb.crosses.values().copied().collect();
    if cross_vals.len() != emb.crosses.len() {
        return Err("cross vertices are not distinct".into());
    }
    if emb.fillers.keys().cloned().collect::<BTreeSet<_>>() != emb.holes {
        return Err("fillers must cover exactly the holes".into());
    }
    let mut all_marked = cross_vals.clone();
    for (&(i, j), &(a, b)) in &emb.fillers {
        if !rows[i].contains(&a) {
            return Err(format!("filler a_{}{} is not in row {}", i, j, i));
        }
        if !cols[j].contains(&b) {
            return Err(format!("filler b_{}{} is not in column {}", i, j, j));
        }
        if cols.iter().any(|c| c.contains(&a)) {
            return Err(format!("filler a_{}{} lies in a column edge", i, j));
        }
        if rows.iter().any(|r| r.contains(&b)) {
            return Err(format!("filler b_{}{} lies in a row edge", i, j));
        }
        if !all_marked.insert(a) || !all_marked.insert(b) {
            return Err("fillers and crosses are not pairwise distinct".into());
        }
    }
    match (&spec.holes, spec.kind) {
        (HolePattern::None, _) => {
            if !emb.holes.is_empty() {
                return Err("pattern admits no holes".into());
            }
        }
        (HolePattern::Count(t), _) => {
            if emb.holes.len() != *t {
                return Err(format!(
                    "expected exactly {} holes, got {}",
                    t,
                    emb.holes.len()
                ));
            }
        }
        (HolePattern::Set(target), _) => {
            if !holes_equivalent(&emb.holes, target, nrows == ncols) {
                return Err("hole set is not equivalent to the requested one".into());
            }
        }
    }
    Ok(())
}

/// Are two hole sets equal up to permuting rows, permuting columns, and —
/// when the frame is square — transposing?
pub fn holes_equivalent(
    a: &BTreeSet<(usize, usize)>,
    b: &BTreeSet<(usize, usize)>,
    allow_transpose: bool,
) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if holes_isomorphic(a, b) {
        return true;
    }
    if allow_transpose {
        let at: BTreeSet<(usize, usize)> = a.iter().map(|&(i, j)| (j, i)).collect();
        return holes_isomorphic(&at, b);
    }
    false
}

/// Bipartite isomorphism of two hole sets viewed as row-column incidences,
/// by backtracking over the involved rows and columns (hole sets are tiny).
fn holes_isomorphic(a: &BTreeSet<(usize, usize)>, b: &BTreeSet<(usize, usize)>) -> bool {
    fn profile(
        s: &BTreeSet<(usize, usize)>,
    ) -> (Vec<usize>, Vec<usize>, BTreeMap<usize, BTreeSet<usize>>) {
        let rows: Vec<usize> = s
            .iter()
            .map(|&(i, _)| i)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let cols: Vec<usize> = s
            .iter()
            .map(|&(_, j)| j)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut by_row: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for &(i, j) in s {
            by_row.entry(i).or_default().insert(j);
        }
        (rows, cols, by_row)
    }
    let (ar, ac, aby) = profile(a);
    let (br, bc, bby) = profile(b);
    if ar.len() != br.len() || ac.len() != bc.len() {
        return false;
    }
    // assign each involved row of a to a distinct involved row of b, then
    // each involved column likewise, checking every hole maps onto b
    #[allow(clippy::too_many_arguments)]
    fn assign_rows(
        idx: usize,
        ar: &[usize],
        br: &[usize],
        row_map: &mut BTreeMap<usize, usize>,
        used: &mut BTreeSet<usize>,
        aby: &BTreeMap<usize, BTreeSet<usize>>,
        bby: &BTreeMap<usize, BTreeSet<usize>>,
        ac: &[usize],
        bc: &[usize],
        a: &BTreeSet<(usize, usize)>,
        b: &BTreeSet<(usize, usize)>,
    ) -> bool {
        if idx == ar.len() {
            let mut col_map: BTreeMap<usize, usize> = BTreeMap::new();
            let mut col_used: BTreeSet<usize> = BTreeSet::new();
            return assign_cols(0, ac, bc, &mut col_map, &mut col_used, row_map, a, b);
        }
        let ra = ar[idx];
        for &rb in br {
            if used.contains(&rb) || aby[&ra].len() != bby[&rb].len() {
                continue;
            }
            used.insert(rb);
            row_map.insert(ra, rb);
            if assign_rows(idx + 1, ar, br, row_map, used, aby, bby, ac, bc, a, b) {
                return true;
            }
            row_map.remove(&ra);
            used.remove(&rb);
        }
        false
    }
    #[allow(clippy::too_many_arguments)]
    fn assign_cols(
        idx: usize,
        ac: &[usize],
        bc: &[usize],
        col_map: &mut BTreeMap<usize, usize>,
        used: &mut BTreeSet<usize>,
        row_map: &BTreeMap<usize, usize>,
        a: &BTreeSet<(usize, usize)>,
        b: &BTreeSet<(usize, usize)>,
    ) -> bool {
        if idx == ac.len() {
            return a
                .iter()
                .all(|&(i, j)| b.contains(&(row_map[&i], col_map[&j])));
        }
        let ca = ac[idx];
        for &cb in bc {
            if used.contains(&cb) {
                continue;
            }
            used.insert(cb);
            col_map.insert(ca, cb);
            if assign_cols(idx + 1, ac, bc, col_map, used, row_map, a, b) {
                return true;
            }
            col_map.remove(&ca);
            used.remove(&cb);
        }
        false
    }
    let mut row_map = BTreeMap::new();
    let mut used = BTreeSet::new();
    assign_rows(
        0,
        &ar,
        &br,
        &mut row_map,
        &mut used,
        &aby,
        &bby,
        &ac,
        &bc,
        a,
        b,
    )
}

const NO_ROW: u8 = u8::MAX;

struct Searcher<'a> {
    h: &'a LinearHypergraph,
    spec: &'a PatternSpec,
    nrows: usize,
    ncols: usize,
    target_holes: usize,
    /// candidate columns must come from pair lookups over all row pairs;
    /// complete exactly when every column meets at least two rows
    pair_candidates_complete: bool,
    halve: bool,
    first_only: bool,
    transverse_only: bool,
    classify: bool,
    budget: u64,
    progress: Option<fn(u64)>,
    nodes: u64,
    exhausted: bool,
    stop: bool,
    error: Option<PatternError>,
    vertex_row: Vec<u8>,
    col_used: Vec<bool>,
    rows: Vec<u32>,
    cols: Vec<u32>,
    col_crosses: Vec<Vec<(usize, u32)>>,
    found: Vec<Embedding>,
    excluded: Vec<Embedding>,
}

impl<'a> Searcher<'a> {
    fn new(
        h: &'a LinearHypergraph,
        spec: &'a PatternSpec,
        config: &SearchConfig,
        first_only: bool,
    ) -> Result<Searcher<'a>, PatternError> {
        spec.validate(h)?;
        if config.budget == 0 {
            return Err(PatternError::BadSpec("budget must be positive".into()));
        }
        if h.check_uniform().is_err() || h.check_linear() != LinearityOutcome::Pass {
            return Err(PatternError::BadSpec(
                "hypergraph is not linear and uniform".into(),
            ));
        }
        if config.transverse_only && !h.has_geometry() {
            return Err(PatternError::NoGeometry);
        }
        let (nrows, ncols) = spec.dims();
        let target_holes = spec.hole_count();
        Ok(Searcher {
            h,
            spec,
            nrows,
            ncols,
            target_holes,
            pair_candidates_complete: target_holes + 2 <= nrows,
            halve: nrows == ncols,
            first_only,
            transverse_only: config.transverse_only,
            classify: h.has_geometry(),
            budget: config.budget,
            progress: config.progress,
            nodes: 0,
            exhausted: false,
            stop: false,
            error: None,
            vertex_row: vec![NO_ROW; h.n()],
            col_used: vec![false; h.n()],
            rows: Vec::with_capacity(nrows),
            cols: Vec::with_capacity(ncols),
            col_crosses: Vec::with_capacity(ncols),
            found: Vec::new(),
            excluded: Vec::new(),
        })
    }

    fn run(&mut self) -> Result<(), PatternError> {
        self.extend_rows(0);
        if let Some(e) = self.error.take() {
            return Err(e);
        }
        Ok(())
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes & 0x3F_FFFF == 0 {
            if let Some(f) = self.progress {
                f(self.nodes);
            }
        }
        if self.nodes > self.budget {
            self.exhausted = true;
            self.stop = true;
            return false;
        }
        true
    }

    fn extend_rows(&mut self, start: usize) {
        if self.stop {
            return;
        }
        if self.rows.len() == self.nrows {
            self.column_phase();
            return;
        }
        let remaining_needed = self.nrows - self.rows.len();
        let last = self.h.edge_count().saturating_sub(remaining_needed);
        for e in start..=last {
            if !self.tick() || self.stop {
                return;
            }
            let edge = self.h.edge(e as u32);
            if edge.iter().any(|&v| self.vertex_row[v as usize] != NO_ROW) {
                continue;
            }
            let depth = self.rows.len() as u8;
            for &v in edge {
                self.vertex_row[v as usize] = depth;
            }
            self.rows.push(e as u32);
            self.extend_rows(e + 1);
            self.rows.pop();
            for &v in edge {
                self.vertex_row[v as usize] = NO_ROW;
            }
            if self.stop {
                return;
            }
        }
    }

    fn column_candidates(&self) -> Vec<u32> {
        let mut cands: Vec<u32> = Vec::new();
        if self.pair_candidates_complete {
            for i1 in 0..self.nrows {
                for i2 in i1 + 1..self.nrows {
                    for &u in self.h.edge(self.rows[i1]) {
                        for &v in self.h.edge(self.rows[i2]) {
                            if let Some(e) = self.h.edge_through(u, v) {
                                cands.push(e);
                            }
                        }
                    }
                }
            }
        } else {
            cands.extend(0..self.h.edge_count() as u32);
        }
        cands.sort_unstable();
        cands.dedup();
        let floor = if self.halve { self.rows[0] } else { 0 };
        cands.retain(|&e| e >= floor && !self.rows.contains(&e));
        cands
    }

    fn column_phase(&mut self) {
        let cands = self.column_candidates();
        self.extend_cols(&cands, 0, 0);
    }

    fn extend_cols(&mut self, cands: &[u32], start: usize, holes: usize) {
        if self.stop {
            return;
        }
        if self.cols.len() == self.ncols {
            if holes == self.target_holes {
                self.emit();
            }
            return;
        }
        let slots_left = self.ncols - self.cols.len();
        if cands.len() < start + slots_left {
            return;
        }
        let max_holes_per_col = if self.pair_candidates_complete {
            self.nrows - 2
        } else {
            self.nrows
        };
        for pos in start..=cands.len() - slots_left {
            if !self.tick() || self.stop {
                return;
            }
            let e = cands[pos];
            let edge = self.h.edge(e);
            if edge.iter().any(|&v| self.col_used[v as usize]) {
                continue;
            }
            let mut crosses: Vec<(usize, u32)> = Vec::with_capacity(self.nrows);
            let mut row_mask: u64 = 0;
            let mut valid = true;
            for &v in edge {
                let ri = self.vertex_row[v as usize];
                if ri != NO_ROW {
                    let bit = 1u64 << ri;
                    if row_mask & bit != 0 {
                        valid = false; // same edge twice is the only way here
                        break;
                    }
                    row_mask |= bit;
                    crosses.push((ri as usize, v));
                }
            }
            if !valid {
                continue;
            }
            let col_holes = self.nrows - crosses.len();
            let new_holes = holes + col_holes;
            if new_holes > self.target_holes {
                continue;
            }
            // even maximally holey future columns cannot reach the target
            if new_holes + (slots_left - 1) * max_holes_per_col < self.target_holes {
                continue;
            }
            crosses.sort_unstable();
            for &v in edge {
                self.col_used[v as usize] = true;
            }
            self.cols.push(e);
            self.col_crosses.push(crosses);
            self.extend_cols(cands, pos + 1, new_holes);
            self.col_crosses.pop();
            self.cols.pop();
            for &v in edge {
                self.col_used[v as usize] = false;
            }
            if self.stop {
                return;
            }
        }
    }

    /// A full frame with the right hole count: assemble, match the hole
    /// pattern, validate independently, classify, and record.
    fn emit(&mut self) {
        let mut crosses: BTreeMap<(usize, usize), u32> = BTreeMap::new();
        for (j, col) in self.col_crosses.iter().enumerate() {
            for &(i, v) in col {
                crosses.insert((i, j), v);
            }
        }
        let mut holes: BTreeSet<(usize, usize)> = BTreeSet::new();
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                if !crosses.contains_key(&(i, j)) {
                    holes.insert((i, j));
                }
            }
        }
        if let HolePattern::Set(target) = &self.spec.holes {
            if !holes_equivalent(&holes, target, self.nrows == self.ncols) {
                return;
            }
        }
        // canonical fillers: per row, holes in column order take the row's
        // non-cross vertices in ascending order; per column symmetrically
        let mut fillers: BTreeMap<(usize, usize), (u32, u32)> = BTreeMap::new();
        let cross_set: BTreeSet<u32> = crosses.values().copied().collect();
        for i in 0..self.nrows {
            let spares: Vec<u32> = self
                .h
                .edge(self.rows[i])
                .iter()
                .copied()
                .filter(|v| !cross_set.contains(v))
                .collect();
            let mut k = 0;
            for &(hi, hj) in holes.iter() {
                if hi == i {
                    fillers.insert((i, hj), (spares[k], u32::MAX));
                    k += 1;
                }
            }
        }
        for j in 0..self.ncols {
            let spares: Vec<u32> = self
                .h
                .edge(self.cols[j])
                .iter()
                .copied()
                .filter(|v| !cross_set.contains(v))
                .collect();
            let mut k = 0;
            for &(i, hj) in holes.iter() {
                if hj == j {
                    fillers.get_mut(&(i, j)).expect("hole recorded").1 = spares[k];
                    k += 1;
                }
            }
        }
        let mut emb = Embedding {
            row_edges: self.rows.clone(),
            col_edges: self.cols.clone(),
            crosses,
            holes,
            fillers,
            transverse: None,
            holes_off_vertex_set: None,
        };
        if self.classify {
            match classify_embedding(self.h, &emb) {
                Ok(c) => {
                    emb.transverse = Some(c.transverse);
                    emb.holes_off_vertex_set = Some(c.holes_off_vertex_set);
                }
                Err(e) => {
                    self.error = Some(e);
                    self.stop = true;
                    return;
                }
            }
        }
        if let Err(msg) = validate_embedding(self.h, self.spec, &emb) {
            self.error = Some(PatternError::Internal(format!(
                "search produced an embedding the validator rejects: {}",
                msg
            )));
            self.stop = true;
            return;
        }
        let counts = !self.transverse_only
            || (emb.transverse == Some(true) && emb.holes_off_vertex_set == Some(true));
        if counts {
            self.found.push(emb);
            if self.first_only {
                self.stop = true;
            }
        } else {
            self.excluded.push(emb);
        }
    }
}
