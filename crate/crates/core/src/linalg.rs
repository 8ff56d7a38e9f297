//! Matrices over `𝔒[π_D^{-1}]`, diagonal reduction and Dieudonné determinants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::{self, CenterFraction};
use crate::series::{SkewRing, SkewSeries, SkewSeriesRecord};

/// The value `π_D^{-a} · g`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentEntry {
    pub a: u32,
    pub g: SkewSeries,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaurentEntryRecord {
    pub a: u32,
    pub g: SkewSeriesRecord,
}

impl LaurentEntry {
    pub fn integral(g: SkewSeries) -> Self {
        LaurentEntry { a: 0, g }
    }

    /// Content-normalised `π_D^{-a} g`.
    pub fn new(a: u32, g: SkewSeries) -> Self {
        Self::new_counted(a, g).0
    }

    /// As [`LaurentEntry::new`], also returning the number of `π_D` divisions.
    pub(crate) fn new_counted(a: u32, g: SkewSeries) -> (Self, u32) {
        if g.is_zero() {
            return (LaurentEntry { a: 0, g }, 0);
        }
        let k = g.content().unwrap_or(0).min(a);
        let g = if k > 0 { g.left_div_pi(k) } else { g };
        (LaurentEntry { a: a - k, g }, k)
    }

    /// `π_D^v g` for any integer `v`.
    pub fn from_pi_power(v: i64, g: SkewSeries) -> Self {
        if v >= 0 {
            LaurentEntry { a: 0, g: g.left_mul_pi(v as u32) }
        } else {
            LaurentEntry::new((-v) as u32, g)
        }
    }

    pub fn ring(&self) -> &SkewRing {
        self.g.ring()
    }

    pub fn is_zero(&self) -> bool {
        self.g.is_zero()
    }

    pub fn zero(ring: &SkewRing) -> Self {
        LaurentEntry::integral(ring.zero())
    }

    pub fn one(ring: &SkewRing) -> Self {
        LaurentEntry::integral(ring.one())
    }

    pub(crate) fn add_counted(&self, o: &LaurentEntry) -> (Self, u32) {
        let (x, y) = if self.a >= o.a { (self, o) } else { (o, self) };
        let g = x.g.add(&y.g.left_mul_pi(x.a - y.a));
        LaurentEntry::new_counted(x.a, g)
    }

    pub fn add(&self, o: &LaurentEntry) -> Self {
        self.add_counted(o).0
    }

    pub fn neg(&self) -> Self {
        LaurentEntry { a: self.a, g: self.g.neg() }
    }

    pub fn sub(&self, o: &LaurentEntry) -> Self {
        self.add(&o.neg())
    }

    pub(crate) fn mul_counted(&self, o: &LaurentEntry) -> (Self, u32) {
        let g = self.g.conj_pi(o.a as i64).mul(&o.g);
        LaurentEntry::new_counted(self.a + o.a, g)
    }

    pub fn mul(&self, o: &LaurentEntry) -> Self {
        self.mul_counted(o).0
    }

    /// `(v, g°)` with `self = π_D^v g°` and `g°` of content zero; `None` for zero.
    pub fn split_content(&self) -> Option<(i64, SkewSeries)> {
        let c = self.g.content()?;
        Some((c as i64 - self.a as i64, self.g.left_div_pi(c)))
    }

    pub fn to_record(&self) -> LaurentEntryRecord {
        LaurentEntryRecord { a: self.a, g: self.g.to_record() }
    }

    pub fn from_record(ring: &SkewRing, rec: &LaurentEntryRecord) -> Result<Self> {
        Ok(LaurentEntry::new(rec.a, ring.from_record(&rec.g)?))
    }

    /// Inverse of `π_D^v ε` with `ε ∈ 𝔒^×`.
    pub fn unit_inverse(&self) -> Result<Self> {
        let (v, u) = self.split_content().ok_or(Error::NotUnit)?;
        let ui = u.invert_unit()?;
        // (π^v u)^{-1} = u^{-1} π^{-v} = π^{-v} (π^v u^{-1} π^{-v})
        Ok(LaurentEntry::from_pi_power(-v, ui.conj_pi(v)))
    }
}

/// An elementary factor: a transposition, `1 + λ e_{ij}`, or `diag(…, u, …)`.
#[derive(Clone, Debug, PartialEq)]
pub enum ElemOp {
    Swap { i: usize, j: usize },
    AddMultiple { i: usize, j: usize, lambda: LaurentEntry },
    Scale { i: usize, u: LaurentEntry },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum ElemOpRecord {
    Swap { i: usize, j: usize },
    AddMultiple { i: usize, j: usize, lambda: LaurentEntryRecord },
    Scale { i: usize, u: LaurentEntryRecord },
}

impl ElemOp {
    pub fn to_record(&self) -> ElemOpRecord {
        match self {
            ElemOp::Swap { i, j } => ElemOpRecord::Swap { i: *i, j: *j },
            ElemOp::AddMultiple { i, j, lambda } => ElemOpRecord::AddMultiple { i: *i, j: *j, lambda: lambda.to_record() },
            ElemOp::Scale { i, u } => ElemOpRecord::Scale { i: *i, u: u.to_record() },
        }
    }

    pub fn from_record(ring: &SkewRing, rec: &ElemOpRecord) -> Result<Self> {
        Ok(match rec {
            ElemOpRecord::Swap { i, j } => ElemOp::Swap { i: *i, j: *j },
            ElemOpRecord::AddMultiple { i, j, lambda } => {
                ElemOp::AddMultiple { i: *i, j: *j, lambda: LaurentEntry::from_record(ring, lambda)? }
            }
            ElemOpRecord::Scale { i, u } => ElemOp::Scale { i: *i, u: LaurentEntry::from_record(ring, u)? },
        })
    }

    /// The elementary matrix of size `n`.
    pub fn matrix(&self, ring: &SkewRing, n: usize) -> SkewMatrix {
        let mut m = SkewMatrix::identity(ring, n);
        match self {
            ElemOp::Swap { i, j } => {
                m.entries[*i][*i] = LaurentEntry::zero(ring);
                m.entries[*j][*j] = LaurentEntry::zero(ring);
                m.entries[*i][*j] = LaurentEntry::one(ring);
                m.entries[*j][*i] = LaurentEntry::one(ring);
            }
            ElemOp::AddMultiple { i, j, lambda } => m.entries[*i][*j] = lambda.clone(),
            ElemOp::Scale { i, u } => m.entries[*i][*i] = u.clone(),
        }
        m
    }
}

/// Dieudonné determinant of an elementary factor.
#[derive(Clone, Debug, PartialEq)]
pub enum DetContribution {
    One,
    MinusOne,
    Unit(LaurentEntry),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkewMatrix {
    ring: SkewRing,
    pub entries: Vec<Vec<LaurentEntry>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkewMatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<LaurentEntryRecord>>,
}

impl SkewMatrix {
    pub fn new(ring: &SkewRing, entries: Vec<Vec<LaurentEntry>>) -> Result<Self> {
        let cols = entries.first().map_or(0, |r| r.len());
        if entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Mismatch("ragged matrix".into()));
        }
        if entries.iter().flatten().any(|e| e.ring() != ring) {
            return Err(Error::Mismatch("entries from a different ring".into()));
        }
        Ok(SkewMatrix { ring: ring.clone(), entries })
    }

    pub fn identity(ring: &SkewRing, n: usize) -> Self {
        let entries = (0..n)
            .map(|i| (0..n).map(|j| if i == j { LaurentEntry::one(ring) } else { LaurentEntry::zero(ring) }).collect())
            .collect();
        SkewMatrix { ring: ring.clone(), entries }
    }

    pub fn diagonal(ring: &SkewRing, diag: Vec<LaurentEntry>) -> Self {
        let n = diag.len();
        let mut m = SkewMatrix::identity(ring, n);
        for (i, d) in diag.into_iter().enumerate() {
            m.entries[i][i] = d;
        }
        m
    }

    pub fn ring(&self) -> &SkewRing {
        &self.ring
    }
    pub fn rows(&self) -> usize {
        self.entries.len()
    }
    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, |r| r.len())
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries.iter().enumerate().all(|(i, row)| row.iter().enumerate().all(|(j, e)| i == j || e.is_zero()))
    }

    pub fn mul(&self, o: &SkewMatrix) -> Result<SkewMatrix> {
        if self.cols() != o.rows() {
            return Err(Error::Mismatch("inner dimensions differ".into()));
        }
        let entries = (0..self.rows())
            .map(|i| {
                (0..o.cols())
                    .map(|j| {
                        (0..self.cols()).fold(LaurentEntry::zero(&self.ring), |acc, k| {
                            if self.entries[i][k].is_zero() || o.entries[k][j].is_zero() {
                                acc
                            } else {
                                acc.add(&self.entries[i][k].mul(&o.entries[k][j]))
                            }
                        })
                    })
                    .collect()
            })
            .collect();
        Ok(SkewMatrix { ring: self.ring.clone(), entries })
    }

    /// The same matrix at another `p`-adic precision.
    pub(crate) fn to_p_ring(&self, ring: &SkewRing) -> SkewMatrix {
        let entries = self
            .entries
            .iter()
            .map(|r| r.iter().map(|e| LaurentEntry::new(e.a, e.g.to_p_ring(ring))).collect())
            .collect();
        SkewMatrix { ring: ring.clone(), entries }
    }

    /// The same matrix at another `X`-precision.
    pub fn to_ring(&self, ring: &SkewRing) -> SkewMatrix {
        let entries = self
            .entries
            .iter()
            .map(|r| r.iter().map(|e| LaurentEntry::new(e.a, e.g.to_ring(ring))).collect())
            .collect();
        SkewMatrix { ring: ring.clone(), entries }
    }

    /// Whether every entry lies in `𝔒`.
    pub fn is_integral(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.a == 0)
    }

    pub fn to_record(&self) -> SkewMatrixRecord {
        SkewMatrixRecord {
            rows: self.rows(),
            cols: self.cols(),
            entries: self.entries.iter().map(|r| r.iter().map(|e| e.to_record()).collect()).collect(),
        }
    }

    pub fn from_record(ring: &SkewRing, rec: &SkewMatrixRecord) -> Result<Self> {
        if rec.entries.len() != rec.rows || rec.entries.iter().any(|r| r.len() != rec.cols) {
            return Err(Error::Parse("matrix shape does not match rows/cols".into()));
        }
        let entries = rec
            .entries
            .iter()
            .map(|r| r.iter().map(|e| LaurentEntry::from_record(ring, e)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        SkewMatrix::new(ring, entries)
    }

    fn check_op(&self, op: &ElemOp, n: usize) -> Result<DetContribution> {
        match op {
            ElemOp::Swap { i, j } => {
                if *i >= n || *j >= n {
                    return Err(Error::BadParameters("index out of range".into()));
                }
                Ok(if i == j { DetContribution::One } else { DetContribution::MinusOne })
            }
            ElemOp::AddMultiple { i, j, .. } => {
                if *i >= n || *j >= n || i == j {
                    return Err(Error::BadParameters("add_multiple needs distinct in-range indices".into()));
                }
                Ok(DetContribution::One)
            }
            ElemOp::Scale { i, u } => {
                if *i >= n {
                    return Err(Error::BadParameters("index out of range".into()));
                }
                u.unit_inverse()?;
                Ok(DetContribution::Unit(u.clone()))
            }
        }
    }

    /// `E · self` for the elementary matrix `E` of `op`.
    pub fn row_op(&self, op: &ElemOp) -> Result<(SkewMatrix, DetContribution)> {
        let contribution = self.check_op(op, self.rows())?;
        let mut out = self.clone();
        match op {
            ElemOp::Swap { i, j } => out.entries.swap(*i, *j),
            ElemOp::AddMultiple { i, j, lambda } => {
                for c in 0..self.cols() {
                    let t = lambda.mul(&self.entries[*j][c]);
                    out.entries[*i][c] = self.entries[*i][c].add(&t);
                }
            }
            ElemOp::Scale { i, u } => {
                for c in 0..self.cols() {
                    out.entries[*i][c] = u.mul(&self.entries[*i][c]);
                }
            }
        }
        Ok((out, contribution))
    }

    /// `self · E` for the elementary matrix `E` of `op`.
    pub fn col_op(&self, op: &ElemOp) -> Result<(SkewMatrix, DetContribution)> {
        let contribution = self.check_op(op, self.cols())?;
        let mut out = self.clone();
        match op {
            ElemOp::Swap { i, j } => {
                for row in out.entries.iter_mut() {
                    row.swap(*i, *j);
                }
            }
            ElemOp::AddMultiple { i, j, lambda } => {
                for r in 0..self.rows() {
                    let t = self.entries[r][*i].mul(lambda);
                    out.entries[r][*j] = self.entries[r][*j].add(&t);
                }
            }
            ElemOp::Scale { i, u } => {
                for r in 0..self.rows() {
                    out.entries[r][*i] = self.entries[r][*i].mul(u);
                }
            }
        }
        Ok((out, contribution))
    }
}

/// `A = L_1 ⋯ L_k · B · R_1 ⋯ R_l` with `B` diagonal.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub left: Vec<ElemOp>,
    pub diag: SkewMatrix,
    pub right: Vec<ElemOp>,
    /// Relative `π_D`-adic precision of the determinant: the true `B` is
    /// `diag · (1 + E)` with `det(1 + E) ≡ 1 mod π_D^precision`.
    pub precision: i64,
}

impl Reduction {
    /// Multiplies the factorisation back out. The product agrees with the
    /// input modulo `π_D^{sN - κ}`, `κ` the total `π_D`-denominator of the
    /// factors, and exactly when no denominators occur.
    pub fn replay(&self) -> Result<SkewMatrix> {
        let ring = self.diag.ring();
        let n = self.diag.rows();
        let mut acc = self.diag.clone();
        for op in self.left.iter().rev() {
            acc = op.matrix(ring, n).mul(&acc)?;
        }
        for op in &self.right {
            acc = acc.mul(&op.matrix(ring, n))?;
        }
        Ok(acc)
    }

    pub fn swaps(&self) -> usize {
        self.left.iter().chain(&self.right).filter(|op| matches!(op, ElemOp::Swap { i, j } if i != j)).count()
    }
}

const EXACT: i64 = i64::MAX / 4;

/// A working entry whose true value lies in `x + π_D^err 𝔒`.
#[derive(Clone)]
struct Tracked {
    x: LaurentEntry,
    err: i64,
}

impl Tracked {
    fn exact(x: LaurentEntry) -> Self {
        Tracked { x, err: EXACT }
    }

    fn stored_val(&self) -> Option<i64> {
        self.x.g.content().map(|c| c as i64 - self.x.a as i64)
    }

    /// Lower bound for the valuation of the true value.
    fn val(&self) -> i64 {
        self.stored_val().map_or(self.err, |v| v.min(self.err))
    }

    fn significant(&self) -> bool {
        self.stored_val().is_some_and(|v| v < self.err)
    }

    /// Drops a value that is indistinguishable from zero.
    fn settle(&mut self) {
        if !self.x.is_zero() && !self.significant() {
            self.x = LaurentEntry::zero(self.x.ring());
        }
    }

    fn mul(&self, o: &Tracked, full: i64) -> Tracked {
        let err = (self.val().saturating_add(o.err)).min(self.err.saturating_add(o.val()));
        if self.x.is_zero() || o.x.is_zero() {
            return Tracked { x: LaurentEntry::zero(self.x.ring()), err };
        }
        let (x, l) = self.x.mul_counted(&o.x);
        let gran = full - (x.a + l) as i64;
        Tracked { x, err: err.min(gran) }
    }

    fn sub(&self, o: &Tracked, full: i64) -> Tracked {
        let (x, l) = self.x.add_counted(&o.x.neg());
        let gran = full - (x.a + l) as i64;
        Tracked { x, err: self.err.min(o.err).min(gran) }
    }
}

/// Closure of a weight matrix under min-plus products of walks of length at least one.
fn min_plus_closure(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = m.len();
    let mut c = m.to_vec();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = c[i][k].saturating_add(c[k][j]).min(EXACT);
                if via < c[i][j] {
                    c[i][j] = via;
                }
            }
        }
    }
    c
}

/// Relative precision of `det(I + M)` when `v(M_ij) ≥ m_ij`: the least weight of
/// a cycle, provided some diagonal similarity makes every entry of `M`
/// topologically nilpotent; `0` otherwise.
fn cycle_precision(m: &[Vec<i64>]) -> i64 {
    let shifted: Vec<Vec<i64>> = m.iter().map(|r| r.iter().map(|&x| x.saturating_sub(1)).collect()).collect();
    let feasible = min_plus_closure(&shifted).iter().enumerate().all(|(i, r)| r[i] >= 0);
    if !feasible {
        return 0;
    }
    min_plus_closure(m).iter().enumerate().map(|(i, r)| r[i]).min().unwrap_or(EXACT)
}

struct Candidate {
    order: usize,
    i: usize,
    j: usize,
}

/// Jacobson-style diagonal reduction of a square matrix over `𝔒[π_D^{-1}]`.
pub fn diagonal_reduce(a: &SkewMatrix) -> Result<Reduction> {
    let t = a.ring().tower();
    Ok(reduce_tracked(a, (t.s() as u32 * t.precision()) as i64)?.0)
}

/// Diagonal reduction of a matrix whose integral entries are known modulo
/// `π_D^input`, which may be coarser than the ring's own precision. Also
/// returns the relative error bounds `v(d_i^{-1} E_ij)` of the final matrix.
fn reduce_tracked(a: &SkewMatrix, input: i64) -> Result<(Reduction, Vec<Vec<i64>>)> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::BadParameters("diagonal reduction needs a square matrix".into()));
    }
    let ring = a.ring().clone();
    let t = ring.tower();
    let full = (t.s() as u32 * t.precision()) as i64;
    let mut w: Vec<Vec<Tracked>> = a
        .entries
        .iter()
        .map(|row| row.iter().map(|x| Tracked { x: x.clone(), err: input - x.a as i64 }).collect())
        .collect();
    let mut left = Vec::new();
    let mut right_rev = Vec::new();
    let cap = 8 * n * ring.prec_x() + 32;
    let mut passes = 0;
    let diagonal = a.is_diagonal();
    for k in 0..n {
        if diagonal {
            if !w[k][k].significant() {
                return Err(Error::SingularAtPrecision);
            }
            continue;
        }
        loop {
            passes += 1;
            if passes > cap {
                return Err(Error::ReductionStalled(cap));
            }
            let mut cands = Vec::new();
            for (i, row) in w.iter_mut().enumerate().skip(k) {
                for (j, e) in row.iter_mut().enumerate().skip(k) {
                    e.settle();
                    if let Some((_, g)) = e.x.split_content() {
                        cands.push(Candidate { order: g.reduced_order().expect("content zero"), i, j });
                    }
                }
            }
            if cands.is_empty() {
                return Err(Error::SingularAtPrecision);
            }
            cands.sort_by_key(|c| (c.order, c.i, c.j));
            let mut chosen = None;
            for c in &cands {
                let (v, g) = w[c.i][c.j].x.split_content().unwrap();
                match g.weierstrass_prepare() {
                    Ok((eps, f)) => {
                        chosen = Some((c.i, c.j, v, eps, f));
                        break;
                    }
                    Err(Error::NotPreparable(_)) | Err(Error::NotUnit) => continue,
                    Err(e) => return Err(e),
                }
            }
            let Some((pi, pj, v, eps, f)) = chosen else {
                return Err(Error::NotPreparable(cands[0].order));
            };
            if pi != k {
                w.swap(pi, k);
                left.push(ElemOp::Swap { i: pi, j: k });
            }
            if pj != k {
                for row in w.iter_mut() {
                    row.swap(pj, k);
                }
                right_rev.push(ElemOp::Swap { i: pj, j: k });
            }
            // pivot = π^v ε F; scale the row by (π^v ε)^{-1}
            let unit = LaurentEntry::from_pi_power(v, eps.clone());
            let unit_inv = Tracked {
                x: LaurentEntry::from_pi_power(-v, eps.invert_unit()?.conj_pi(v)),
                err: full - v,
            };
            let pivot_err = (w[k][k].err - v).min(full);
            for c in 0..n {
                w[k][c] = if c == k {
                    Tracked { x: LaurentEntry::integral(f.clone()), err: pivot_err }
                } else {
                    unit_inv.mul(&w[k][c], full)
                };
            }
            left.push(ElemOp::Scale { i: k, u: unit });
            // clear the column with left divisions by F
            let mut dirty = false;
            for i in k + 1..n {
                w[i][k].settle();
                if w[i][k].x.is_zero() {
                    continue;
                }
                let a_i = w[i][k].x.a;
                let (q, r) = f.left_divide_monic(&w[i][k].x.g)?;
                let lambda = Tracked::exact(LaurentEntry::new(a_i, q));
                for c in 0..n {
                    if c == k {
                        continue;
                    }
                    let t = lambda.mul(&w[k][c], full);
                    w[i][c] = w[i][c].sub(&t, full);
                }
                let err = w[i][k].err.min(lambda.val().saturating_add(pivot_err)).min(full - a_i as i64);
                let mut rem = Tracked { x: LaurentEntry::new(a_i, r), err };
                rem.settle();
                dirty |= !rem.x.is_zero();
                w[i][k] = rem;
                left.push(ElemOp::AddMultiple { i, j: k, lambda: lambda.x });
            }
            if dirty {
                continue;
            }
            // clear the row with right divisions by F
            for j in k + 1..n {
                w[k][j].settle();
                if w[k][j].x.is_zero() {
                    continue;
                }
                let a_j = w[k][j].x.a;
                let gt = w[k][j].x.g.conj_pi(-(a_j as i64));
                let (q, r) = f.right_divide_monic(&gt)?;
                let mu = Tracked::exact(LaurentEntry::new(a_j, q.conj_pi(a_j as i64)));
                for row in w.iter_mut() {
                    let t = row[k].mul(&mu, full);
                    row[j] = row[j].sub(&t, full);
                }
                let err = w[k][j].err.min(pivot_err.saturating_add(mu.val())).min(full - a_j as i64);
                let mut rem = Tracked { x: LaurentEntry::new(a_j, r.conj_pi(a_j as i64)), err };
                rem.settle();
                dirty |= !rem.x.is_zero();
                w[k][j] = rem;
                right_rev.push(ElemOp::AddMultiple { i: k, j, lambda: mu.x });
            }
            if !dirty {
                break;
            }
        }
    }
    right_rev.reverse();
    let mut rel = Vec::with_capacity(n);
    for (i, row) in w.iter().enumerate() {
        let vi = row[i].stored_val().ok_or(Error::SingularAtPrecision)?;
        rel.push(row.iter().map(|e| e.err.saturating_sub(vi).min(EXACT)).collect::<Vec<_>>());
    }
    let precision = cycle_precision(&rel);
    let entries = w
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, e)| if i == j { e.x } else { LaurentEntry::zero(&ring) })
                .collect()
        })
        .collect();
    let diag = SkewMatrix { ring: ring.clone(), entries };
    Ok((Reduction { left, diag, right: right_rev, precision }, rel))
}

/// A comparable representative of a Dieudonné determinant class:
/// `π_D^w · unit · F` with `nr(unit) = u_nr`.
#[derive(Clone, Debug, PartialEq)]
pub struct DetNormalForm {
    pub w: i64,
    pub f: SkewSeries,
    pub u_nr: CenterFraction,
    pub unit: SkewSeries,
    /// p-adic precision up to which the data are guaranteed.
    pub prec_p: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetNormalFormRecord {
    pub w: i64,
    #[serde(rename = "F")]
    pub f: SkewSeriesRecord,
    pub u_nr: CenterFraction,
    pub prec_p: u32,
}

impl DetNormalForm {
    pub fn to_record(&self) -> DetNormalFormRecord {
        DetNormalFormRecord { w: self.w, f: self.f.to_record(), u_nr: self.u_nr.clone(), prec_p: self.prec_p }
    }

    /// `u_nr · nr(F)`, the reduced norm of the unit-times-distinguished part.
    pub fn unit_poly_norm(&self) -> Result<CenterFraction> {
        let t = self.f.ring().tower();
        let nf = norm::reduced_norm_series(&self.f)?;
        Ok(norm::cf_mul(t, &self.u_nr, &nf))
    }

    /// The full reduced norm `nr(π_D)^w · u_nr · nr(F)`.
    pub fn reduced_norm(&self) -> Result<CenterFraction> {
        let ring = self.f.ring();
        let pn = norm::pi_norm_power(ring, self.w);
        Ok(norm::cf_mul(ring.tower(), &pn, &self.unit_poly_norm()?))
    }

    /// Equality of classes as seen through the reduced norm.
    pub fn same_class(&self, other: &DetNormalForm) -> Result<bool> {
        let t = self.f.ring().tower();
        let prec = t.d() as i64 * self.w.min(other.w) + self.prec_p.min(other.prec_p) as i64;
        Ok(norm::cf_eq(t, &self.reduced_norm()?, &other.reduced_norm()?, prec))
    }
}

/// Dieudonné determinant of a square matrix via diagonal reduction.
///
/// The reduction runs at a higher internal `p`-adic precision; the result is
/// reduced back and its `prec_p` refers to the input precision.
pub fn dieudonne_det(a: &SkewMatrix) -> Result<DetNormalForm> {
    let ring = a.ring();
    let t = ring.tower();
    let input = (t.s() as u32 * t.precision()) as i64;
    let red = if t.d() == 1 { reduce_valued(a, input)? } else { reduce_tracked(&a.to_p_ring(&ring.working()), input)?.0 };
    let nf = det_from_reduction(&red, t.precision())?;
    let f = nf.f.to_p_ring(ring);
    let unit = nf.unit.to_p_ring(ring);
    let u_nr = norm::reduced_norm_series(&unit)?;
    Ok(DetNormalForm { w: nf.w, f, u_nr, unit, prec_p: nf.prec_p })
}

/// Reduction when `π_D`-content is a valuation of `𝔒`. Over the completed
/// localisation at `π_D` every matrix has a Smith form, so for integral `A`
/// `v(A^{-1}) ≥ -v(det A)` and an input error `E ≡ 0 mod π_D^input` moves
/// the determinant by a factor `det(1 + A^{-1}E) ≡ 1 mod π_D^{input - w}`.
/// Rounding inside the reduction is tracked separately, at a working
/// precision raised until it no longer dominates.
fn reduce_valued(a: &SkewMatrix, input: i64) -> Result<Reduction> {
    let ring = a.ring();
    let n = a.rows() as i64;
    let vals = a.entries.iter().flatten().filter_map(|x| x.split_content().map(|(v, _)| v));
    let mu = (-vals.min().unwrap_or(0)).max(0);
    let den = a.entries.iter().flatten().map(|x| x.a as i64).max().unwrap_or(0);
    let mut work = ring.working();
    loop {
        let wt = work.tower();
        let (mut red, _) = reduce_tracked(&a.to_p_ring(&work), (wt.s() as u32 * wt.precision()) as i64)?;
        let w = reduction_w(&red)?;
        let sensitivity = input - den - w - (n - 1) * mu;
        if red.precision < sensitivity {
            let deficit = ((sensitivity - red.precision) as u32).div_ceil(wt.s() as u32);
            if let Some(next) = work.at_p_precision(wt.precision() + deficit) {
                work = next;
                continue;
            }
        }
        red.precision = red.precision.min(sensitivity);
        return Ok(red);
    }
}

fn reduction_w(red: &Reduction) -> Result<i64> {
    let scales = red.left.iter().chain(&red.right).filter_map(|op| match op {
        ElemOp::Scale { u, .. } => Some(u),
        _ => None,
    });
    let diag = (0..red.diag.rows()).map(|i| &red.diag.entries[i][i]);
    scales.chain(diag).map(|x| x.split_content().map(|(v, _)| v).ok_or(Error::SingularAtPrecision)).sum()
}

pub(crate) fn det_from_reduction(red: &Reduction, input: u32) -> Result<DetNormalForm> {
    let ring = red.diag.ring().clone();
    let t = ring.tower();
    let mut factors: Vec<LaurentEntry> = Vec::new();
    for op in red.left.iter().chain(&red.right) {
        if let ElemOp::Scale { u, .. } = op {
            factors.push(u.clone());
        }
    }
    for i in 0..red.diag.rows() {
        factors.push(red.diag.entries[i][i].clone());
    }
    let mut w = 0i64;
    let mut f_total = ring.one();
    let mut unit = ring.one();
    let mut u_nr = norm::cf_one(&ring);
    for fac in &factors {
        let (v, g) = fac.split_content().ok_or(Error::SingularAtPrecision)?;
        w += v;
        let (eps, fd) = g.weierstrass_prepare()?;
        f_total = f_total.mul(&fd);
        unit = unit.mul(&eps.conj_pi(-w));
        u_nr = norm::cf_mul(t, &u_nr, &norm::reduced_norm_series(&eps)?);
    }
    if red.swaps() % 2 == 1 {
        unit = unit.neg();
        let ds = t.d() * t.s();
        if ds % 2 == 1 {
            u_nr = norm::cf_neg(t, &u_nr);
        }
    }
    let prec_p = (red.precision / t.s() as i64).min(input as i64);
    if prec_p < 1 {
        return Err(Error::PrecisionExhausted(format!(
            "determinant known to relative precision π_D^{} only",
            red.precision
        )));
    }
    Ok(DetNormalForm { w, f: f_total, u_nr, unit, prec_p: prec_p as u32 })
}
