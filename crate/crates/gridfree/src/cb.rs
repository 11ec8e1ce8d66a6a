//! Cayley–Bacharach machinery as exact linear algebra over F_q: monomial
//! bases, evaluation matrices, rank/nullspace, and the checkable vanishing
//! statements (rank-equality form, degree budget, Alon–Füredi).

use crate::ff::{Field, FieldElement};
use crate::geom::{intersect, line_through, GeomError, Line, ProjPoint};
use crate::hyper::{LinearHypergraph, Model, ModelParams};
use rand::Rng;
use thiserror::Error;

/// Candidate count cap below which kernel enumeration is exhaustive.
pub const KERNEL_ENUM_CAP: u64 = 1_000_000;
/// Sample count used when the kernel is too large to enumerate.
pub const KERNEL_SAMPLES: u64 = 1_000;
/// Largest product set alon_furedi_check will enumerate.
pub const GRID_CAP: u64 = 1_024;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CbError {
    #[error("degree {degree} exceeds the rank-equality scope {max}")]
    DegreeOutOfScope { degree: usize, max: usize },
    #[error("kernel of dimension {dim} has {candidates} candidates, over the cap {cap} with sampling disabled")]
    KernelTooLarge {
        dim: usize,
        candidates: u128,
        cap: u64,
    },
    #[error("product set has {size} points, over the enumeration cap {cap}")]
    GridTooLarge { size: u128, cap: u64 },
    #[error("scenario unsatisfiable: {0}")]
    ScenarioUnsatisfiable(String),
    #[error("bad input: {0}")]
    BadInput(String),
}

/// Monomials of fixed shape in `nvars` variables, graded-lex ordered:
/// blocks of ascending total degree, descending lex within a block.
/// Homogeneous bases hold the single top-degree block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    nvars: usize,
    degree: usize,
    homogeneous: bool,
    monomials: Vec<Vec<u32>>,
}

fn push_block(out: &mut Vec<Vec<u32>>, nvars: usize, degree: u32) {
    let mut exps = vec![0u32; nvars];
    exps[0] = degree;
    loop {
        out.push(exps.clone());
        let Some(i) = (0..nvars - 1).rev().find(|&i| exps[i] > 0) else {
            break;
        };
        let tail: u32 = exps[i + 1..].iter().sum();
        exps[i] -= 1;
        for e in &mut exps[i + 1..] {
            *e = 0;
        }
        exps[i + 1] = tail + 1;
    }
}

impl MonomialBasis {
    /// Homogeneous degree-d monomials in the plane coordinates (x, y, z).
    pub fn homogeneous_plane(degree: usize) -> MonomialBasis {
        let mut monomials = Vec::new();
        push_block(&mut monomials, 3, degree as u32);
        MonomialBasis {
            nvars: 3,
            degree,
            homogeneous: true,
            monomials,
        }
    }

    /// All monomials of total degree <= degree in nvars variables.
    pub fn affine(nvars: usize, degree: usize) -> MonomialBasis {
        assert!(nvars >= 1, "affine basis needs at least one variable");
        let mut monomials = Vec::new();
        for d in 0..=degree as u32 {
            push_block(&mut monomials, nvars, d);
        }
        MonomialBasis {
            nvars,
            degree,
            homogeneous: false,
            monomials,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[Vec<u32>] {
        &self.monomials
    }

    pub fn index_of(&self, exps: &[u32]) -> Option<usize> {
        self.monomials.iter().position(|m| m == exps)
    }

    /// One evaluation row: each monomial at the given coordinates.
    pub fn eval_row(&self, field: &Field, coords: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(coords.len(), self.nvars, "coordinate arity mismatch");
        self.monomials
            .iter()
            .map(|exps| {
                let mut acc = field.one();
                for (c, &e) in coords.iter().zip(exps) {
                    acc = field.mul(acc, field.pow(*c, e as u64));
                }
                acc
            })
            .collect()
    }

    /// Evaluate the polynomial with the given coefficients at coords.
    pub fn eval_poly(
        &self,
        field: &Field,
        coeffs: &[FieldElement],
        coords: &[FieldElement],
    ) -> FieldElement {
        assert_eq!(coeffs.len(), self.len(), "coefficient arity mismatch");
        let row = self.eval_row(field, coords);
        let mut acc = field.zero();
        for (c, v) in coeffs.iter().zip(row) {
            acc = field.add(acc, field.mul(*c, v));
        }
        acc
    }

    /// Human-readable polynomial, skipping zero terms.
    pub fn format_poly(&self, field: &Field, coeffs: &[FieldElement]) -> String {
        assert_eq!(coeffs.len(), self.len(), "coefficient arity mismatch");
        let names: Vec<String> = if self.nvars == 3 {
            vec!["x".into(), "y".into(), "z".into()]
        } else {
            (1..=self.nvars).map(|i| format!("x{i}")).collect()
        };
        let mut terms = Vec::new();
        for (c, exps) in coeffs.iter().zip(&self.monomials) {
            if c.is_zero() {
                continue;
            }
            let mut t = field.format_element(*c);
            for (name, &e) in names.iter().zip(exps) {
                match e {
                    0 => {}
                    1 => t.push_str(&format!("*{name}")),
                    _ => t.push_str(&format!("*{name}^{e}")),
                }
            }
            terms.push(t);
        }
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join(" + ")
        }
    }
}

/// Row-major matrix of monomial evaluations: one row per point, one
/// column per basis monomial.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalMatrix {
    nrows: usize,
    ncols: usize,
    entries: Vec<FieldElement>,
}

impl EvalMatrix {
    pub fn from_rows(ncols: usize, rows: Vec<Vec<FieldElement>>) -> EvalMatrix {
        let nrows = rows.len();
        let mut entries = Vec::with_capacity(nrows * ncols);
        for row in rows {
            assert_eq!(row.len(), ncols, "ragged row");
            entries.extend(row);
        }
        EvalMatrix {
            nrows,
            ncols,
            entries,
        }
    }

    pub fn from_proj_points(
        field: &Field,
        basis: &MonomialBasis,
        points: &[ProjPoint],
    ) -> EvalMatrix {
        assert_eq!(basis.nvars(), 3, "projective rows need a plane basis");
        let rows = points
            .iter()
            .map(|p| basis.eval_row(field, &[p.x, p.y, p.z]))
            .collect();
        EvalMatrix::from_rows(basis.len(), rows)
    }

    pub fn from_affine_tuples(
        field: &Field,
        basis: &MonomialBasis,
        tuples: &[Vec<FieldElement>],
    ) -> EvalMatrix {
        let rows = tuples.iter().map(|t| basis.eval_row(field, t)).collect();
        EvalMatrix::from_rows(basis.len(), rows)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn entry(&self, i: usize, j: usize) -> FieldElement {
        self.entries[i * self.ncols + j]
    }

    pub fn without_row(&self, drop: usize) -> EvalMatrix {
        assert!(drop < self.nrows, "row index out of range");
        let mut entries = Vec::with_capacity((self.nrows - 1) * self.ncols);
        for i in 0..self.nrows {
            if i != drop {
                entries.extend_from_slice(&self.entries[i * self.ncols..(i + 1) * self.ncols]);
            }
        }
        EvalMatrix {
            nrows: self.nrows - 1,
            ncols: self.ncols,
            entries,
        }
    }
}

/// Result of exact elimination: the rank and a canonical nullspace basis
/// (one vector per free column, that column's coordinate set to 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankNullspace {
    pub rank: usize,
    pub nullspace: Vec<Vec<FieldElement>>,
}

/// Reduced row echelon form by exact Gaussian elimination, pivoting on
/// the first nonzero entry in column order.
pub fn rank_and_nullspace(field: &Field, m: &EvalMatrix) -> RankNullspace {
    let (nrows, ncols) = (m.nrows, m.ncols);
    let mut a = m.entries.clone();
    let at = |a: &[FieldElement], i: usize, j: usize| a[i * ncols + j];
    let mut pivot_col_of_row = Vec::new();
    let mut pivot_row = 0usize;
    for col in 0..ncols {
        let Some(src) = (pivot_row..nrows).find(|&i| !at(&a, i, col).is_zero()) else {
            continue;
        };
        for j in 0..ncols {
            a.swap(pivot_row * ncols + j, src * ncols + j);
        }
        let inv = field.inv(at(&a, pivot_row, col)).expect("pivot is nonzero");
        for j in 0..ncols {
            a[pivot_row * ncols + j] = field.mul(a[pivot_row * ncols + j], inv);
        }
        for i in 0..nrows {
            if i == pivot_row || at(&a, i, col).is_zero() {
                continue;
            }
            let f = at(&a, i, col);
            for j in 0..ncols {
                let v = field.sub(a[i * ncols + j], field.mul(f, a[pivot_row * ncols + j]));
                a[i * ncols + j] = v;
            }
        }
        pivot_col_of_row.push(col);
        pivot_row += 1;
        if pivot_row == nrows {
            break;
        }
    }
    let rank = pivot_col_of_row.len();
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; ncols];
        for &c in &pivot_col_of_row {
            v[c] = true;
        }
        v
    };
    let mut nullspace = Vec::with_capacity(ncols - rank);
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut v = vec![field.zero(); ncols];
        v[free] = field.one();
        for (row, &pc) in pivot_col_of_row.iter().enumerate() {
            v[pc] = field.neg(at(&a, row, free));
        }
        nullspace.push(v);
    }
    RankNullspace { rank, nullspace }
}

/// Why a 2r-line family fails to be a transverse complete intersection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Degeneracy {
    DuplicateRow {
        i: usize,
        j: usize,
    },
    DuplicateCol {
        i: usize,
        j: usize,
    },
    SharedLine {
        row: usize,
        col: usize,
    },
    CoincidentCrosses {
        first: (usize, usize),
        second: (usize, usize),
        point: ProjPoint,
    },
}

impl std::fmt::Display for Degeneracy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Degeneracy::DuplicateRow { i, j } => write!(f, "rows {i} and {j} are the same line"),
            Degeneracy::DuplicateCol { i, j } => {
                write!(f, "columns {i} and {j} are the same line")
            }
            Degeneracy::SharedLine { row, col } => {
                write!(f, "row {row} and column {col} are the same line")
            }
            Degeneracy::CoincidentCrosses { first, second, .. } => write!(
                f,
                "crosses ({}, {}) and ({}, {}) coincide",
                first.0, first.1, second.0, second.1
            ),
        }
    }
}

/// The r^2 pairwise intersections of r row lines with r column lines,
/// or the first degeneracy that prevents them from being distinct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntersectionOutcome {
    /// Points in row-major order: index i*r + j is rows[i] meet cols[j].
    Transverse(Vec<ProjPoint>),
    Degenerate(Degeneracy),
}

pub fn complete_intersection(field: &Field, rows: &[Line], cols: &[Line]) -> IntersectionOutcome {
    assert_eq!(rows.len(), cols.len(), "need as many rows as columns");
    assert!(!rows.is_empty(), "need at least one line per side");
    let r = rows.len();
    for i in 0..r {
        for j in i + 1..r {
            if rows[i] == rows[j] {
                return IntersectionOutcome::Degenerate(Degeneracy::DuplicateRow { i, j });
            }
            if cols[i] == cols[j] {
                return IntersectionOutcome::Degenerate(Degeneracy::DuplicateCol { i, j });
            }
        }
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, col) in cols.iter().enumerate() {
            if row == col {
                return IntersectionOutcome::Degenerate(Degeneracy::SharedLine { row: i, col: j });
            }
        }
    }
    let mut points = Vec::with_capacity(r * r);
    for row in rows {
        for col in cols {
            match intersect(field, *row, *col) {
                Ok(p) => points.push(p),
                Err(GeomError::IdenticalLines) => unreachable!("duplicates ruled out above"),
                Err(e) => unreachable!("intersect only fails on identical lines: {e}"),
            }
        }
    }
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            if points[a] == points[b] {
                return IntersectionOutcome::Degenerate(Degeneracy::CoincidentCrosses {
                    first: (a / r, a % r),
                    second: (b / r, b % r),
                    point: points[a],
                });
            }
        }
    }
    IntersectionOutcome::Transverse(points)
}

/// A polynomial that vanishes on all listed points except one: the
/// configuration it refutes, with its full value pattern for re-checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CbWitness {
    pub point_index: usize,
    pub point: ProjPoint,
    pub degree: usize,
    /// Coefficients over MonomialBasis::homogeneous_plane(degree).
    pub coeffs: Vec<FieldElement>,
    /// Values on the full point set; zero everywhere except point_index.
    pub values: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CbOutcome {
    Pass { rank: usize },
    Counterexample(CbWitness),
}

fn isqrt_exact(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// Rank-equality form of the vanishing statement: for every x in X,
/// rank of the evaluation matrix without x's row equals the full rank,
/// i.e. any degree-d form vanishing on all of X minus x vanishes at x
/// too. In strict mode d must be within the budget 2r-3; falsify mode
/// runs over budget and returns the counterexample it finds.
pub fn cb_check(
    field: &Field,
    x: &[ProjPoint],
    degree: usize,
    falsify: bool,
) -> Result<CbOutcome, CbError> {
    let Some(r) = isqrt_exact(x.len()) else {
        return Err(CbError::BadInput(format!(
            "point set of size {} is not a square r^2",
            x.len()
        )));
    };
    if r < 3 {
        return Err(CbError::BadInput(format!("need r >= 3, got r = {r}")));
    }
    let max = 2 * r - 3;
    if degree > max && !falsify {
        return Err(CbError::DegreeOutOfScope { degree, max });
    }
    let basis = MonomialBasis::homogeneous_plane(degree);
    let m = EvalMatrix::from_proj_points(field, &basis, x);
    let full = rank_and_nullspace(field, &m).rank;
    for i in 0..x.len() {
        let sub = m.without_row(i);
        let rn = rank_and_nullspace(field, &sub);
        if rn.rank == full {
            continue;
        }
        let coeffs = rn
            .nullspace
            .iter()
            .find(|v| {
                !basis
                    .eval_poly(field, v, &[x[i].x, x[i].y, x[i].z])
                    .is_zero()
            })
            .cloned()
            .expect("a rank drop leaves a kernel vector not vanishing at the dropped point");
        let values: Vec<FieldElement> = x
            .iter()
            .map(|p| basis.eval_poly(field, &coeffs, &[p.x, p.y, p.z]))
            .collect();
        debug_assert!(values
            .iter()
            .enumerate()
            .all(|(k, v)| (k == i) != v.is_zero()));
        return Ok(CbOutcome::Counterexample(CbWitness {
            point_index: i,
            point: x[i],
            degree,
            coeffs,
            values,
        }));
    }
    Ok(CbOutcome::Pass { rank: full })
}

/// How the kernel of the on-curve evaluation matrix was searched.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverageMethod {
    Exhaustive { candidates: u64 },
    Sampled { samples: u64 },
}

impl CoverageMethod {
    pub fn probabilistic(&self) -> bool {
        matches!(self, CoverageMethod::Sampled { .. })
    }
}

/// A degree-d form vanishing on all of S and at no point of X minus S.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetWitness {
    pub degree: usize,
    pub coeffs: Vec<FieldElement>,
    /// Values on X in order; zero exactly on the S indices.
    pub values: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BudgetOutcome {
    Pass {
        kernel_dim: usize,
        method: CoverageMethod,
    },
    Witness(BudgetWitness),
}

#[derive(Debug, Clone)]
pub struct BudgetOptions {
    /// Enforce d + (t-1) <= 2r-3; disable to hunt witnesses over budget.
    pub strict: bool,
    /// Exhaustive enumeration only while q^dim(kernel) stays at or below this.
    pub enumeration_cap: u64,
    /// Sample count when the kernel is over the cap.
    pub samples: u64,
    /// Permit the sampled fallback; otherwise KernelTooLarge.
    pub allow_sampling: bool,
    pub seed: u64,
}

impl Default for BudgetOptions {
    fn default() -> BudgetOptions {
        BudgetOptions {
            strict: true,
            enumeration_cap: KERNEL_ENUM_CAP,
            samples: KERNEL_SAMPLES,
            allow_sampling: true,
            seed: 0,
        }
    }
}

/// Checks that no degree-d form vanishes on all of S while missing every
/// point of X minus S. S is given by ascending point indices into X.
/// Exhaustive over projective kernel representatives when the kernel is
/// small; otherwise seeded random sampling, flagged as probabilistic.
pub fn degree_budget_check(
    field: &Field,
    x: &[ProjPoint],
    s_indices: &[usize],
    degree: usize,
    opts: &BudgetOptions,
) -> Result<BudgetOutcome, CbError> {
    let Some(r) = isqrt_exact(x.len()) else {
        return Err(CbError::BadInput(format!(
            "point set of size {} is not a square r^2",
            x.len()
        )));
    };
    if r < 3 {
        return Err(CbError::BadInput(format!("need r >= 3, got r = {r}")));
    }
    if s_indices.windows(2).any(|w| w[0] >= w[1]) || s_indices.iter().any(|&i| i >= x.len()) {
        return Err(CbError::BadInput(
            "S indices must be ascending and in range".into(),
        ));
    }
    let t = x.len() - s_indices.len();
    if t == 0 {
        return Err(CbError::BadInput(
            "need at least one point outside S".into(),
        ));
    }
    let max = 2 * r - 3;
    if opts.strict && degree + (t - 1) > max {
        return Err(CbError::DegreeOutOfScope {
            degree: degree + t - 1,
            max,
        });
    }
    let basis = MonomialBasis::homogeneous_plane(degree);
    let s_points: Vec<ProjPoint> = s_indices.iter().map(|&i| x[i]).collect();
    let in_s = {
        let mut v = vec![false; x.len()];
        for &i in s_indices {
            v[i] = true;
        }
        v
    };
    let outside: Vec<ProjPoint> = x
        .iter()
        .enumerate()
        .filter(|(i, _)| !in_s[*i])
        .map(|(_, p)| *p)
        .collect();
    let m = EvalMatrix::from_proj_points(field, &basis, &s_points);
    let kernel = rank_and_nullspace(field, &m).nullspace;
    let dim = kernel.len();
    if dim == 0 {
        return Ok(BudgetOutcome::Pass {
            kernel_dim: 0,
            method: CoverageMethod::Exhaustive { candidates: 0 },
        });
    }

    let outside_rows: Vec<Vec<FieldElement>> = outside
        .iter()
        .map(|p| {
            kernel
                .iter()
                .map(|v| basis.eval_poly(field, v, &[p.x, p.y, p.z]))
                .collect()
        })
        .collect();
    let misses_all_outside = |combo: &[FieldElement]| {
        outside_rows.iter().all(|row| {
            let mut acc = field.zero();
            for (c, v) in combo.iter().zip(row) {
                acc = field.add(acc, field.mul(*c, *v));
            }
            !acc.is_zero()
        })
    };
    let witness_from = |combo: &[FieldElement]| {
        let mut coeffs = vec![field.zero(); basis.len()];
        for (c, v) in combo.iter().zip(&kernel) {
            for (out, w) in coeffs.iter_mut().zip(v) {
                *out = field.add(*out, field.mul(*c, *w));
            }
        }
        let values: Vec<FieldElement> = x
            .iter()
            .map(|p| basis.eval_poly(field, &coeffs, &[p.x, p.y, p.z]))
            .collect();
        debug_assert!(values
            .iter()
            .enumerate()
            .all(|(i, v)| in_s[i] == v.is_zero()));
        BudgetOutcome::Witness(BudgetWitness {
            degree,
            coeffs,
            values,
        })
    };

    let q = field.q();
    let space: u128 = (q as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if space <= opts.enumeration_cap as u128 {
        let candidates = (space - 1) / (q as u128 - 1);
        let mut combo = vec![field.zero(); dim];
        // Projective representatives: first nonzero coordinate equal to 1.
        for lead in 0..dim {
            combo[lead] = field.one();
            loop {
                if misses_all_outside(&combo) {
                    return Ok(witness_from(&combo));
                }
                let Some(i) = (lead + 1..dim)
                    .rev()
                    .find(|&i| combo[i].index() + 1 < q as u32)
                else {
                    break;
                };
                combo[i] = field.el(combo[i].index() as u64 + 1);
                for c in combo[i + 1..].iter_mut() {
                    *c = field.zero();
                }
            }
            for c in combo[lead..].iter_mut() {
                *c = field.zero();
            }
        }
        return Ok(BudgetOutcome::Pass {
            kernel_dim: dim,
            method: CoverageMethod::Exhaustive {
                candidates: candidates as u64,
            },
        });
    }
    if !opts.allow_sampling {
        return Err(CbError::KernelTooLarge {
            dim,
            candidates: space,
            cap: opts.enumeration_cap,
        });
    }
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(opts.seed);
    let samples = opts.samples.max(KERNEL_SAMPLES);
    for _ in 0..samples {
        let combo: Vec<FieldElement> = (0..dim).map(|_| field.el(rng.gen_range(0..q))).collect();
        if combo.iter().all(|c| c.is_zero()) {
            continue;
        }
        if misses_all_outside(&combo) {
            return Ok(witness_from(&combo));
        }
    }
    Ok(BudgetOutcome::Pass {
        kernel_dim: dim,
        method: CoverageMethod::Sampled { samples },
    })
}

/// A polynomial vanishing on all but one product-set point yet not there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AfWitness {
    pub point_index: usize,
    pub point: Vec<FieldElement>,
    pub degree: usize,
    /// Coefficients over MonomialBasis::affine(n, degree).
    pub coeffs: Vec<FieldElement>,
    pub values: Vec<FieldElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AfOutcome {
    Pass { rank: usize },
    Counterexample(AfWitness),
}

/// Product-set points of A_1 x ... x A_n in odometer order, last
/// coordinate fastest.
pub fn product_points(sets: &[Vec<FieldElement>]) -> Vec<Vec<FieldElement>> {
    let mut out = vec![Vec::new()];
    for set in sets {
        let mut next = Vec::with_capacity(out.len() * set.len());
        for prefix in &out {
            for &v in set {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Vanishing on all but one point of a finite product set forces
/// vanishing everywhere, for total degree within the budget
/// sum(|A_i| - 1) - 1: checked per point as rank equality over the
/// affine basis. Falsify mode runs over budget and reports the witness.
pub fn alon_furedi_check(
    field: &Field,
    sets: &[Vec<FieldElement>],
    degree: usize,
    falsify: bool,
) -> Result<AfOutcome, CbError> {
    if sets.is_empty() {
        return Err(CbError::BadInput("need at least one factor set".into()));
    }
    for (i, set) in sets.iter().enumerate() {
        if set.is_empty() {
            return Err(CbError::BadInput(format!("factor set {i} is empty")));
        }
        let mut seen = std::collections::BTreeSet::new();
        if !set.iter().all(|e| seen.insert(*e)) {
            return Err(CbError::BadInput(format!(
                "factor set {i} has repeated elements"
            )));
        }
    }
    let size: u128 = sets.iter().map(|s| s.len() as u128).product();
    if size > GRID_CAP as u128 {
        return Err(CbError::GridTooLarge {
            size,
            cap: GRID_CAP,
        });
    }
    let budget: usize = sets
        .iter()
        .map(|s| s.len() - 1)
        .sum::<usize>()
        .saturating_sub(1);
    if degree > budget && !falsify {
        return Err(CbError::DegreeOutOfScope {
            degree,
            max: budget,
        });
    }
    let basis = MonomialBasis::affine(sets.len(), degree);
    let points = product_points(sets);
    let m = EvalMatrix::from_affine_tuples(field, &basis, &points);
    let full = rank_and_nullspace(field, &m).rank;
    for i in 0..points.len() {
        let sub = m.without_row(i);
        let rn = rank_and_nullspace(field, &sub);
        if rn.rank == full {
            continue;
        }
        let coeffs = rn
            .nullspace
            .iter()
            .find(|v| !basis.eval_poly(field, v, &points[i]).is_zero())
            .cloned()
            .expect("a rank drop leaves a kernel vector not vanishing at the dropped point");
        let values: Vec<FieldElement> = points
            .iter()
            .map(|p| basis.eval_poly(field, &coeffs, p))
            .collect();
        return Ok(AfOutcome::Counterexample(AfWitness {
            point_index: i,
            point: points[i].clone(),
            degree,
            coeffs,
            values,
        }));
    }
    Ok(AfOutcome::Pass { rank: full })
}

/// Multiply projective linear forms a*x + b*y + c*z into one homogeneous
/// coefficient vector over homogeneous_plane(forms.len()).
pub fn product_of_linear_forms(field: &Field, forms: &[[FieldElement; 3]]) -> Vec<FieldElement> {
    assert!(!forms.is_empty(), "need at least one linear form");
    let mut degree = 0usize;
    let mut basis = MonomialBasis::homogeneous_plane(0);
    let mut coeffs = vec![field.one()];
    for form in forms {
        let next_basis = MonomialBasis::homogeneous_plane(degree + 1);
        let mut next = vec![field.zero(); next_basis.len()];
        for (c, exps) in coeffs.iter().zip(basis.monomials()) {
            if c.is_zero() {
                continue;
            }
            for (var, &fc) in form.iter().enumerate() {
                if fc.is_zero() {
                    continue;
                }
                let mut e = exps.clone();
                e[var] += 1;
                let idx = next_basis
                    .index_of(&e)
                    .expect("product monomial in next basis");
                next[idx] = field.add(next[idx], field.mul(*c, fc));
            }
        }
        degree += 1;
        basis = next_basis;
        coeffs = next;
    }
    coeffs
}

fn line_form(line: &Line) -> [FieldElement; 3] {
    [line.a, line.b, line.c]
}

/// Machine replay of the grid refutation for the layer-and-conic model:
/// the witness curve (layer lines plus consecutive chords through all
/// conic crosses but the last), its value pattern on the configuration,
/// and the rank equality it contradicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefutationTrace {
    pub r: usize,
    pub witness_degree: usize,
    /// Coefficients over homogeneous_plane(2r - 3).
    pub witness_coeffs: Vec<FieldElement>,
    /// Values on the crosses in row-major order.
    pub values: Vec<FieldElement>,
    pub vanishing_count: usize,
    /// The one conic cross the witness does not vanish on.
    pub missed_point: ProjPoint,
    /// Rank equality verdict at degree 2r - 3 over the same crosses.
    pub cb_outcome: CbOutcome,
    /// True when the explicit witness and the rank equality cannot both
    /// hold, completing the contradiction.
    pub contradiction: bool,
}

fn hrq_curves(h: &LinearHypergraph) -> Result<Vec<FieldElement>, CbError> {
    match (&h.meta().model, &h.meta().params) {
        (Model::Hrq, ModelParams::Hrq { alphas, .. }) => Ok(alphas.clone()),
        _ => Err(CbError::BadInput(
            "grid certificates need a layer-and-conic construction".into(),
        )),
    }
}

/// Replays the grid-freeness argument on a hypothetical 2r-line family
/// for a layer-and-conic hypergraph. Checks the scenario step by step:
/// 2r distinct lines, every cross affine and on a layer or the conic,
/// exactly r distinct crosses on the conic, all crosses distinct. Any
/// failure is reported as ScenarioUnsatisfiable, which for a concrete
/// family is itself evidence that it cannot form a grid. A family
/// passing every precondition would yield the witness-curve trace whose
/// contradiction flag records the rank-equality clash.
pub fn grid_certificate(
    h: &LinearHypergraph,
    rows: &[Line],
    cols: &[Line],
) -> Result<RefutationTrace, CbError> {
    let field = h.field();
    let r = h.r();
    let alphas = hrq_curves(h)?;
    if rows.len() != r || cols.len() != r {
        return Err(CbError::BadInput(format!(
            "need {r} rows and {r} columns, got {} and {}",
            rows.len(),
            cols.len()
        )));
    }
    for i in 0..r {
        for j in i + 1..r {
            if rows[i] == rows[j] {
                return Err(CbError::ScenarioUnsatisfiable(
                    Degeneracy::DuplicateRow { i, j }.to_string(),
                ));
            }
            if cols[i] == cols[j] {
                return Err(CbError::ScenarioUnsatisfiable(
                    Degeneracy::DuplicateCol { i, j }.to_string(),
                ));
            }
        }
    }
    for (i, row) in rows.iter().enumerate() {
        for (j, col) in cols.iter().enumerate() {
            if row == col {
                return Err(CbError::ScenarioUnsatisfiable(
                    Degeneracy::SharedLine { row: i, col: j }.to_string(),
                ));
            }
        }
    }
    let mut crosses = Vec::with_capacity(r * r);
    for (i, row) in rows.iter().enumerate() {
        for (j, col) in cols.iter().enumerate() {
            let p = intersect(field, *row, *col).expect("distinct lines always meet");
            let Some(aff) = p.to_affine() else {
                return Err(CbError::ScenarioUnsatisfiable(format!(
                    "rows {i} and columns {j} are parallel, their cross is at infinity"
                )));
            };
            let on_layer = alphas.contains(&aff.y);
            let on_conic = field.mul(aff.x, aff.x) == aff.y;
            if !on_layer && !on_conic {
                return Err(CbError::ScenarioUnsatisfiable(format!(
                    "cross ({i}, {j}) at ({}, {}) lies on no layer and off the conic",
                    field.format_element(aff.x),
                    field.format_element(aff.y)
                )));
            }
            crosses.push((p, on_conic));
        }
    }
    let mut on_b: Vec<ProjPoint> = crosses
        .iter()
        .filter(|(_, conic)| *conic)
        .map(|(p, _)| *p)
        .collect();
    on_b.sort();
    on_b.dedup();
    if on_b.len() != r {
        return Err(CbError::ScenarioUnsatisfiable(format!(
            "the family puts {} distinct cross points on the conic, the scenario needs exactly {r}",
            on_b.len()
        )));
    }
    let points: Vec<ProjPoint> = crosses.iter().map(|(p, _)| *p).collect();
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            if points[a] == points[b] {
                return Err(CbError::ScenarioUnsatisfiable(
                    Degeneracy::CoincidentCrosses {
                        first: (a / r, a % r),
                        second: (b / r, b % r),
                        point: points[a],
                    }
                    .to_string(),
                ));
            }
        }
    }

    let witness_coeffs = refutation_witness(field, &alphas, &on_b)?;
    let basis = MonomialBasis::homogeneous_plane(2 * r - 3);
    let values: Vec<FieldElement> = points
        .iter()
        .map(|p| basis.eval_poly(field, &witness_coeffs, &[p.x, p.y, p.z]))
        .collect();
    let vanishing_count = values.iter().filter(|v| v.is_zero()).count();
    let missed_point = *on_b.last().expect("r >= 3 conic points");
    let missed_index = points
        .iter()
        .position(|p| *p == missed_point)
        .expect("the missed conic point is a cross");
    let cb_outcome = cb_check(field, &points, 2 * r - 3, false)?;
    let contradiction = vanishing_count == r * r - 1
        && !values[missed_index].is_zero()
        && matches!(cb_outcome, CbOutcome::Pass { .. });
    Ok(RefutationTrace {
        r,
        witness_degree: 2 * r - 3,
        witness_coeffs,
        values,
        vanishing_count,
        missed_point,
        cb_outcome,
        contradiction,
    })
}

/// The refutation's witness curve: the r-1 layer lines joined with the
/// chords through consecutive sorted conic points b_1..b_{r-1}, a form
/// of degree 2r-3 vanishing at every b_i except the last. The conic
/// points must be affine, distinct, and on the parabola.
pub fn refutation_witness(
    field: &Field,
    alphas: &[FieldElement],
    bs: &[ProjPoint],
) -> Result<Vec<FieldElement>, CbError> {
    let r = bs.len();
    if r < 3 || alphas.len() != r - 1 {
        return Err(CbError::BadInput(format!(
            "need r >= 3 conic points and r - 1 layer heights, got {} and {}",
            r,
            alphas.len()
        )));
    }
    let mut sorted = bs.to_vec();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != r {
        return Err(CbError::BadInput("conic points must be distinct".into()));
    }
    for p in &sorted {
        let Some(aff) = p.to_affine() else {
            return Err(CbError::BadInput("conic points must be affine".into()));
        };
        if field.mul(aff.x, aff.x) != aff.y {
            return Err(CbError::BadInput(format!(
                "({}, {}) is not on the conic",
                field.format_element(aff.x),
                field.format_element(aff.y)
            )));
        }
    }
    let mut forms: Vec<[FieldElement; 3]> = alphas
        .iter()
        .map(|&a| [field.zero(), field.one(), field.neg(a)])
        .collect();
    for w in sorted.windows(2).take(r - 2) {
        let (p1, p2) = (w[0].to_affine().unwrap(), w[1].to_affine().unwrap());
        let chord = line_through(field, p1, p2).expect("distinct conic points span a chord");
        forms.push(line_form(&chord));
    }
    Ok(product_of_linear_forms(field, &forms))
}

/// Machine replay of the punctured refutation for the parallel model:
/// the layer-union curve's value pattern on a transverse configuration
/// and the degree-budget verdict it contradicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetTrace {
    pub r: usize,
    /// Crosses off the layer union.
    pub t: usize,
    /// Coefficients of the layer-union form over homogeneous_plane(r).
    pub layer_coeffs: Vec<FieldElement>,
    pub values: Vec<FieldElement>,
    /// Ascending cross indices on the layer union.
    pub s_indices: Vec<usize>,
    pub budget_outcome: BudgetOutcome,
    pub contradiction: bool,
}

/// Replays the punctured-grid refutation on a hypothetical 2r-line
/// family for a parallel-layer hypergraph: a transverse configuration
/// whose crosses all but t lie on the layer union would make the layer
/// form itself contradict the degree budget. Scenario failures are
/// reported as ScenarioUnsatisfiable; hole counts outside 1..=r-2 are
/// out of the budget's scope and rejected as DegreeOutOfScope.
pub fn parallel_certificate(
    h: &LinearHypergraph,
    rows: &[Line],
    cols: &[Line],
) -> Result<BudgetTrace, CbError> {
    let field = h.field();
    let r = h.r();
    let (layer_values, direction) = match (&h.meta().model, &h.meta().params) {
        (
            Model::Parallel,
            ModelParams::Parallel {
                layer_values,
                direction,
            },
        ) => (layer_values.clone(), *direction),
        _ => {
            return Err(CbError::BadInput(
                "parallel certificates need a parallel-layer construction".into(),
            ))
        }
    };
    if rows.len() != r || cols.len() != r {
        return Err(CbError::BadInput(format!(
            "need {r} rows and {r} columns, got {} and {}",
            rows.len(),
            cols.len()
        )));
    }
    let points = match complete_intersection(field, rows, cols) {
        IntersectionOutcome::Transverse(points) => points,
        IntersectionOutcome::Degenerate(d) => {
            return Err(CbError::ScenarioUnsatisfiable(d.to_string()))
        }
    };
    let forms: Vec<[FieldElement; 3]> = layer_values
        .iter()
        .map(|&c| match direction {
            crate::hyper::LayerDirection::Horizontal => [field.zero(), field.one(), field.neg(c)],
            crate::hyper::LayerDirection::Vertical => [field.one(), field.zero(), field.neg(c)],
        })
        .collect();
    let layer_coeffs = product_of_linear_forms(field, &forms);
    let basis = MonomialBasis::homogeneous_plane(r);
    let values: Vec<FieldElement> = points
        .iter()
        .map(|p| basis.eval_poly(field, &layer_coeffs, &[p.x, p.y, p.z]))
        .collect();
    let s_indices: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_zero())
        .map(|(i, _)| i)
        .collect();
    let t = points.len() - s_indices.len();
    if t == 0 {
        return Err(CbError::ScenarioUnsatisfiable(
            "every cross lies on the layer union, there is no hole".into(),
        ));
    }
    let max = 2 * r - 3;
    if r + (t - 1) > max {
        return Err(CbError::DegreeOutOfScope {
            degree: r + t - 1,
            max,
        });
    }
    let budget_outcome =
        degree_budget_check(field, &points, &s_indices, r, &BudgetOptions::default())?;
    let contradiction = matches!(budget_outcome, BudgetOutcome::Pass { .. });
    Ok(BudgetTrace {
        r,
        t,
        layer_coeffs,
        values,
        s_indices,
        budget_outcome,
        contradiction,
    })
}

/// Draws 2r distinct random lines until their pairwise crosses are r^2
/// distinct points. Deterministic for a fixed seeded generator.
pub fn random_transverse_family<R: Rng>(
    field: &Field,
    r: usize,
    rng: &mut R,
) -> (Vec<Line>, Vec<Line>, Vec<ProjPoint>) {
    assert!(r >= 2, "need at least two lines per side");
    let q = field.q();
    for _ in 0..10_000 {
        let mut lines = Vec::with_capacity(2 * r);
        while lines.len() < 2 * r {
            let (a, b) = (field.el(rng.gen_range(0..q)), field.el(rng.gen_range(0..q)));
            if a.is_zero() && b.is_zero() {
                continue;
            }
            let c = field.el(rng.gen_range(0..q));
            let line = Line::new(field, a, b, c).expect("(a, b) is nonzero");
            if !lines.contains(&line) {
                lines.push(line);
            }
        }
        let cols = lines.split_off(r);
        if let IntersectionOutcome::Transverse(points) = complete_intersection(field, &lines, &cols)
        {
            return (lines, cols, points);
        }
    }
    panic!("no transverse family found in 10000 attempts over GF({q})");
}
