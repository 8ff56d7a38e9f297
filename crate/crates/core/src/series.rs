//! The skew power series ring `𝔒 = O_D[[X; τ, τ - id]]` at finite precision.
//!
//! `T = (1+X)^d - 1` is central, so `𝔒 T^{M_T}` is a two-sided ideal and we
//! compute in the finite ring `𝔒 / (p^N, T^{M_T})`. Since `T^{M_T}` is a monic
//! polynomial of degree `M = d · M_T` with integer coefficients, every class has
//! a unique representative `Σ_{i<M} a_i X^i` (coefficients written on the
//! left). Products expand `X r = τ(r) X + δ(r)` and then reduce modulo `T^{M_T}`.
//!
//! Weierstraß preparation and division take the representative polynomial as
//! the exact input and work internally at a larger `X`-precision so that the
//! distinguished polynomial and remainder are exact modulo `p^N`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, DElement};
use crate::error::{Error, Result};
use crate::tower::{Tower, TowerElement};
use crate::zmod::Zmod;

struct RingData {
    alg: Algebra,
    m: usize,
    m_t: usize,
    w: usize,
    /// Coefficients of `T^{M_T}` in `X`, degree `M`, monic.
    t_pow: Vec<u64>,
    work: OnceLock<SkewRing>,
}

/// `𝔒 / (p^N, T^{M_T})` for a fixed algebra and `X`-precision `M = d · M_T`.
#[derive(Clone)]
pub struct SkewRing(Arc<RingData>);

impl fmt::Debug for SkewRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SkewRing(M = {}, {:?})", self.0.m, self.0.alg)
    }
}

impl PartialEq for SkewRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.m == other.0.m && self.0.alg == other.0.alg)
    }
}

/// An element of `𝔒` modulo `(p^N, T^{M_T})`.
#[derive(Clone, PartialEq)]
pub struct SkewSeries {
    ring: SkewRing,
    c: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkewSeriesRecord {
    pub prec_x: usize,
    pub coeffs: Vec<DElement>,
}

/// A truncated series over `O_k` (or `O_M`) in the central variable `T`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterSeries {
    pub prec_t: usize,
    pub coeffs: Vec<TowerElement>,
}

fn binomial_row(n: usize, z: Zmod) -> Vec<u64> {
    let mut row = vec![1 % z.modulus()];
    for _ in 0..n {
        let mut next = vec![0; row.len() + 1];
        for (i, &c) in row.iter().enumerate() {
            next[i] = z.add(next[i], c);
            next[i + 1] = z.add(next[i + 1], c);
        }
        row = next;
    }
    row
}

fn int_poly_mul(a: &[u64], b: &[u64], z: Zmod) -> Vec<u64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = z.add(out[i + j], z.mul(x, y));
        }
    }
    out
}

/// Coefficients of `T = (1+X)^d - 1` modulo `p^N`.
pub(crate) fn t_poly(d: usize, z: Zmod) -> Vec<u64> {
    let mut t = binomial_row(d, z);
    t[0] = z.sub(t[0], 1 % z.modulus());
    t
}

impl SkewRing {
    /// The ring at `X`-precision `prec_x`, which must be a positive multiple of `d`.
    pub fn new(alg: &Algebra, prec_x: usize) -> Result<SkewRing> {
        let d = alg.tower().d();
        if prec_x == 0 || prec_x % d != 0 {
            return Err(Error::BadParameters(format!("X-precision {prec_x} must be a positive multiple of d = {d}")));
        }
        if !alg.tau_c_is_one() {
            return Err(Error::BadParameters("series arithmetic needs τ(π_D) = π_D".into()));
        }
        let z = alg.tower().zm();
        let t = t_poly(d, z);
        let m_t = prec_x / d;
        let mut t_pow = vec![1 % z.modulus()];
        for _ in 0..m_t {
            t_pow = int_poly_mul(&t_pow, &t, z);
        }
        Ok(SkewRing(Arc::new(RingData {
            alg: alg.clone(),
            m: prec_x,
            m_t,
            w: alg.width(),
            t_pow,
            work: OnceLock::new(),
        })))
    }

    pub fn algebra(&self) -> &Algebra {
        &self.0.alg
    }
    pub fn tower(&self) -> &Tower {
        self.0.alg.tower()
    }
    pub fn prec_x(&self) -> usize {
        self.0.m
    }
    pub fn prec_t(&self) -> usize {
        self.0.m_t
    }
    pub(crate) fn width(&self) -> usize {
        self.0.w
    }

    /// Same algebra, `X`-precision rounded up to a multiple of `d`.
    pub(crate) fn with_prec(&self, m: usize) -> SkewRing {
        let d = self.tower().d();
        let m = m.div_ceil(d).max(1) * d;
        if m == self.0.m {
            return self.clone();
        }
        SkewRing::new(&self.0.alg, m).expect("validated algebra")
    }

    /// Same algebra and `X`-precision at a higher internal `p`-adic precision,
    /// `N + max(4, N/2)` or the largest supported below it.
    pub(crate) fn working(&self) -> SkewRing {
        self.0
            .work
            .get_or_init(|| {
                let n = self.tower().precision();
                (n + 1..=n + 4.max(n / 2)).rev().find_map(|k| self.at_p_precision(k)).unwrap_or_else(|| self.clone())
            })
            .clone()
    }

    /// Same algebra and `X`-precision at `p`-adic precision `n`, if `p^n` is
    /// supported.
    pub(crate) fn at_p_precision(&self, n: u32) -> Option<SkewRing> {
        if (self.tower().p() as u128).checked_pow(n).is_none_or(|m| m >= 1 << 62) {
            return None;
        }
        let mut desc = self.algebra().descriptor().clone();
        desc.tower.n = n;
        let alg = Algebra::from_descriptor(&desc).ok()?;
        SkewRing::new(&alg, self.0.m).ok()
    }

    fn wrap(&self, c: Vec<u64>) -> SkewSeries {
        debug_assert_eq!(c.len(), self.0.m * self.0.w);
        SkewSeries { ring: self.clone(), c }
    }

    pub fn zero(&self) -> SkewSeries {
        self.wrap(vec![0; self.0.m * self.0.w])
    }

    pub fn one(&self) -> SkewSeries {
        self.constant_int(&self.0.alg.int_one())
    }

    pub fn x(&self) -> SkewSeries {
        let w = self.0.w;
        let mut buf = vec![0; 2 * w];
        buf[w] = 1 % self.tower().modulus();
        self.reduce_poly(buf)
    }

    pub(crate) fn constant_int(&self, x: &[u64]) -> SkewSeries {
        let mut c = vec![0; self.0.m * self.0.w];
        c[..self.0.w].copy_from_slice(x);
        self.wrap(c)
    }

    /// The constant series `x` for integral `x ∈ O_D`.
    pub fn constant(&self, x: &DElement) -> Result<SkewSeries> {
        self.from_coeffs(std::slice::from_ref(x))
    }

    /// `Σ coeffs[i] X^i`, reduced modulo `T^{M_T}` when longer than `M`.
    pub fn from_coeffs(&self, coeffs: &[DElement]) -> Result<SkewSeries> {
        let alg = &self.0.alg;
        let mut buf = Vec::with_capacity(coeffs.len().max(1) * self.0.w);
        for c in coeffs {
            let c = alg.normalize(c.clone())?;
            if c.pi_denom != 0 {
                return Err(Error::BadParameters("series coefficients must be integral".into()));
            }
            buf.extend(alg.flat(&c));
        }
        Ok(self.reduce_poly(buf))
    }

    pub fn from_record(&self, rec: &SkewSeriesRecord) -> Result<SkewSeries> {
        if rec.prec_x != self.0.m {
            return Err(Error::Mismatch(format!("series has prec_x {} but ring has {}", rec.prec_x, self.0.m)));
        }
        self.from_coeffs(&rec.coeffs)
    }

    /// Reduces a flat polynomial of any degree modulo `T^{M_T}`.
    pub(crate) fn reduce_poly(&self, mut buf: Vec<u64>) -> SkewSeries {
        let (m, w) = (self.0.m, self.0.w);
        let t = self.tower();
        let len = buf.len() / w;
        for k in (m..len).rev() {
            let c: Vec<u64> = buf[k * w..(k + 1) * w].to_vec();
            if Tower::is_zero_slice(&c) {
                continue;
            }
            for (l, &tl) in self.0.t_pow.iter().enumerate() {
                if tl == 0 {
                    continue;
                }
                let mut sc = c.clone();
                t.scale_assign(&mut sc, tl);
                let idx = k - m + l;
                t.sub_assign(&mut buf[idx * w..(idx + 1) * w], &sc);
            }
        }
        buf.resize(m * w, 0);
        self.wrap(buf)
    }

    /// `X · g`.
    pub(crate) fn x_mul(&self, g: &[u64]) -> Vec<u64> {
        let (m, w) = (self.0.m, self.0.w);
        let t = self.tower();
        let mut out = vec![0; (m + 1) * w];
        let mut tg = vec![0; w];
        for j in 0..m {
            let gj = &g[j * w..(j + 1) * w];
            if Tower::is_zero_slice(gj) {
                continue;
            }
            self.0.alg.tau_int(gj, &mut tg);
            t.add_assign(&mut out[(j + 1) * w..(j + 2) * w], &tg);
            t.add_assign(&mut out[j * w..(j + 1) * w], &tg);
            t.sub_assign(&mut out[j * w..(j + 1) * w], gj);
        }
        let top: Vec<u64> = out[m * w..].to_vec();
        if !Tower::is_zero_slice(&top) {
            for l in 0..m {
                let tl = self.0.t_pow[l];
                if tl == 0 {
                    continue;
                }
                let mut sc = top.clone();
                t.scale_assign(&mut sc, tl);
                t.sub_assign(&mut out[l * w..(l + 1) * w], &sc);
            }
        }
        out.truncate(m * w);
        out
    }

    /// The table `X^i · g` for `i < M`.
    pub(crate) fn left_x_table(&self, g: &[u64]) -> Vec<Vec<u64>> {
        let mut table = Vec::with_capacity(self.0.m);
        table.push(g.to_vec());
        for i in 1..self.0.m {
            let next = self.x_mul(&table[i - 1]);
            table.push(next);
        }
        table
    }

    /// `a · b` given the table of `X^i b`.
    pub(crate) fn mul_with_table(&self, a: &[u64], table: &[Vec<u64>]) -> Vec<u64> {
        let (m, w) = (self.0.m, self.0.w);
        let mut out = vec![0; m * w];
        for (i, row) in table.iter().enumerate() {
            let ai = &a[i * w..(i + 1) * w];
            if Tower::is_zero_slice(ai) {
                continue;
            }
            for j in 0..m {
                let rj = &row[j * w..(j + 1) * w];
                if Tower::is_zero_slice(rj) {
                    continue;
                }
                self.0.alg.mul_add_int(ai, rj, &mut out[j * w..(j + 1) * w]);
            }
        }
        out
    }

    pub(crate) fn mul_raw(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let (m, w) = (self.0.m, self.0.w);
        let mut out = vec![0; m * w];
        let mut cur = b.to_vec();
        let last = (0..m).rev().find(|&i| !Tower::is_zero_slice(&a[i * w..(i + 1) * w]));
        let Some(last) = last else { return out };
        for i in 0..=last {
            if i > 0 {
                cur = self.x_mul(&cur);
            }
            let ai = &a[i * w..(i + 1) * w];
            if Tower::is_zero_slice(ai) {
                continue;
            }
            for j in 0..m {
                let cj = &cur[j * w..(j + 1) * w];
                if !Tower::is_zero_slice(cj) {
                    self.0.alg.mul_add_int(ai, cj, &mut out[j * w..(j + 1) * w]);
                }
            }
        }
        out
    }

    /// Embeds `h(T)` with `T ↦ (1+X)^d - 1`. Coefficients must lie in `O_k`.
    pub fn center_embed(&self, h: &CenterSeries) -> Result<SkewSeries> {
        let t = self.tower();
        let w = self.0.w;
        let tp = t_poly(t.d(), t.zm());
        let mut t_ser = vec![0; (tp.len()) * w];
        for (i, &c) in tp.iter().enumerate() {
            t_ser[i * w] = c;
        }
        let t_ser = self.reduce_poly(t_ser);
        let mut acc = self.zero();
        let mut power = self.one();
        for (j, hj) in h.coeffs.iter().enumerate() {
            if j >= self.0.m_t {
                break;
            }
            let hj = t.normalize(hj.clone())?;
            if hj.denom_exp != 0 || !t.in_k(&hj) {
                return Err(Error::BadParameters("centre coefficients must lie in O_k".into()));
            }
            let mut c = vec![0; w];
            c[..t.f_m()].copy_from_slice(&hj.coeffs);
            acc = acc.add(&power.scale_left_int(&c));
            power = power.mul(&t_ser);
        }
        Ok(acc)
    }

    /// Solves `u v ≡ 1` modulo `(π_D, T)`; the quotient is `F_Q`-valued
    /// polynomials of degree `< d` in `X`, an `F_p`-space of dimension `d f_M`.
    fn residue_inverse(&self, u: &SkewSeries) -> Option<Vec<u64>> {
        let t = self.tower();
        let (d, f, w) = (t.d(), t.f_m(), self.0.w);
        let small = self.with_prec(d);
        let ur = u.to_ring(&small);
        let n = d * f;
        let p = t.p();
        let fp = Zmod::new(p);
        let residue = |g: &[u64]| -> Vec<u64> { (0..d).flat_map(|i| g[i * w..i * w + f].iter().map(|c| c % p)).collect() };
        let mut mat = vec![vec![0u64; n + 1]; n];
        for i in 0..d {
            for j in 0..f {
                let mut b = vec![0; d * w];
                b[i * w + j] = 1;
                let col = residue(&small.mul_raw(&ur.c, &b));
                for (row, &v) in col.iter().enumerate() {
                    mat[row][i * f + j] = v;
                }
            }
        }
        mat[0][n] = 1;
        let sol = solve_mod_p(mat, fp)?;
        let mut v = vec![0; self.0.m * w];
        for i in 0..d {
            v[i * w..i * w + f].copy_from_slice(&sol[i * f..(i + 1) * f]);
        }
        Some(v)
    }
}

fn solve_mod_p(mut a: Vec<Vec<u64>>, z: Zmod) -> Option<Vec<u64>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| a[r][col] != 0)?;
        a.swap(col, piv);
        let inv = z.inv(a[col][col])?;
        for c in col..=n {
            a[col][c] = z.mul(a[col][c], inv);
        }
        for r in 0..n {
            if r != col && a[r][col] != 0 {
                let factor = a[r][col];
                for c in col..=n {
                    let v = z.mul(factor, a[col][c]);
                    a[r][c] = z.sub(a[r][c], v);
                }
            }
        }
    }
    Some(a.into_iter().map(|row| row[n]).collect())
}

impl fmt::Debug for SkewSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.ring.0.w;
        let z = self.ring.tower().zm();
        let mut terms = Vec::new();
        for (i, c) in self.c.chunks(w).enumerate() {
            if !Tower::is_zero_slice(c) {
                let v: Vec<i64> = c.iter().map(|&x| z.to_signed(x)).collect();
                terms.push(format!("{v:?}·X^{i}"));
            }
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl SkewSeries {
    pub fn ring(&self) -> &SkewRing {
        &self.ring
    }
    pub(crate) fn coeff_int(&self, i: usize) -> &[u64] {
        let w = self.ring.0.w;
        &self.c[i * w..(i + 1) * w]
    }

    pub fn coeff(&self, i: usize) -> DElement {
        self.ring.0.alg.from_flat(self.coeff_int(i).to_vec(), 0).expect("integral coefficient")
    }

    pub fn coeffs(&self) -> Vec<DElement> {
        (0..self.ring.0.m).map(|i| self.coeff(i)).collect()
    }

    pub fn to_record(&self) -> SkewSeriesRecord {
        SkewSeriesRecord { prec_x: self.ring.0.m, coeffs: self.coeffs() }
    }

    pub fn is_zero(&self) -> bool {
        Tower::is_zero_slice(&self.c)
    }

    /// Highest index with a nonzero coefficient.
    pub fn degree(&self) -> Option<usize> {
        let w = self.ring.0.w;
        (0..self.ring.0.m).rev().find(|&i| !Tower::is_zero_slice(&self.c[i * w..(i + 1) * w]))
    }

    fn check(&self, other: &SkewSeries) {
        assert!(self.ring == other.ring, "operands live in different rings");
    }

    pub fn add(&self, other: &SkewSeries) -> SkewSeries {
        self.check(other);
        let mut c = self.c.clone();
        self.ring.tower().add_assign(&mut c, &other.c);
        self.ring.wrap(c)
    }

    pub fn sub(&self, other: &SkewSeries) -> SkewSeries {
        self.check(other);
        let mut c = self.c.clone();
        self.ring.tower().sub_assign(&mut c, &other.c);
        self.ring.wrap(c)
    }

    pub fn neg(&self) -> SkewSeries {
        let mut c = self.c.clone();
        self.ring.tower().neg_assign(&mut c);
        self.ring.wrap(c)
    }

    /// The skew product `self · other`.
    pub fn mul(&self, other: &SkewSeries) -> SkewSeries {
        self.check(other);
        self.ring.wrap(self.ring.mul_raw(&self.c, &other.c))
    }

    pub(crate) fn scale_left_int(&self, a: &[u64]) -> SkewSeries {
        let w = self.ring.0.w;
        let alg = &self.ring.0.alg;
        let mut c = vec![0; self.c.len()];
        for (src, dst) in self.c.chunks(w).zip(c.chunks_mut(w)) {
            if !Tower::is_zero_slice(src) {
                alg.mul_int(a, src, dst);
            }
        }
        self.ring.wrap(c)
    }

    /// `a · self` for integral `a ∈ O_D`.
    pub fn pow(&self, k: usize) -> SkewSeries {
        (0..k).fold(self.ring.one(), |acc, _| acc.mul(self))
    }

    pub fn scale_left(&self, a: &DElement) -> Result<SkewSeries> {
        let a = self.ring.0.alg.normalize(a.clone())?;
        if a.pi_denom != 0 {
            return Err(Error::BadParameters("scalar must be integral".into()));
        }
        Ok(self.scale_left_int(&self.ring.0.alg.flat(&a)))
    }

    /// `π_D^k self π_D^{-k}`: `π_D` commutes with `X`, so this is `σ^k` on coefficients.
    pub fn conj_pi(&self, k: i64) -> SkewSeries {
        let w = self.ring.0.w;
        let alg = &self.ring.0.alg;
        let mut c = vec![0; self.c.len()];
        for (src, dst) in self.c.chunks(w).zip(c.chunks_mut(w)) {
            alg.conj_pi_int(src, k, dst);
        }
        self.ring.wrap(c)
    }

    /// `π_D^k · self`.
    pub fn left_mul_pi(&self, k: u32) -> SkewSeries {
        let w = self.ring.0.w;
        let alg = &self.ring.0.alg;
        let c = self.c.chunks(w).flat_map(|x| alg.left_mul_pi_int(x, k)).collect();
        self.ring.wrap(c)
    }

    /// `self · π_D^k`.
    pub fn right_mul_pi(&self, k: u32) -> SkewSeries {
        let w = self.ring.0.w;
        let alg = &self.ring.0.alg;
        let c = self.c.chunks(w).flat_map(|x| alg.right_mul_pi_int(x, k)).collect();
        self.ring.wrap(c)
    }

    /// Least `v_D` over the coefficients; `None` for zero.
    pub fn content(&self) -> Option<u32> {
        let w = self.ring.0.w;
        let alg = &self.ring.0.alg;
        self.c.chunks(w).filter_map(|x| alg.val_d_int(x)).min()
    }

    /// `g` with `π_D^k g = self`; requires `content ≥ k`. Loses `⌈k/s⌉` p-adic digits.
    pub fn left_div_pi(&self, k: u32) -> SkewSeries {
        let w = self.ring.0.w;
        let alg = &self.ring.0.alg;
        let mut c = self.c.clone();
        for _ in 0..k {
            c = c.chunks(w).flat_map(|x| alg.left_div_pi_int(x)).collect();
        }
        self.ring.wrap(c)
    }

    /// Applies `τ^k` coefficientwise.
    pub(crate) fn tau_coeffs(&self, k: usize) -> SkewSeries {
        let w = self.ring.0.w;
        let alg = &self.ring.0.alg;
        let mut c = self.c.clone();
        let mut tmp = vec![0; w];
        for _ in 0..k {
            for x in c.chunks_mut(w) {
                alg.tau_int(x, &mut tmp);
                x.copy_from_slice(&tmp);
            }
        }
        self.ring.wrap(c)
    }

    /// Moves to another precision: pads the representative, or reduces it modulo
    /// the smaller power of `T`.
    pub fn to_ring(&self, ring: &SkewRing) -> SkewSeries {
        assert!(ring.0.alg == self.ring.0.alg, "different algebras");
        if ring.0.m >= self.ring.0.m {
            let mut c = self.c.clone();
            c.resize(ring.0.m * ring.0.w, 0);
            ring.wrap(c)
        } else {
            ring.reduce_poly(self.c.clone())
        }
    }

    /// Moves to the same algebra at another `p`-adic precision: lifts the
    /// residues, or reduces them.
    pub(crate) fn to_p_ring(&self, ring: &SkewRing) -> SkewSeries {
        assert_eq!(ring.0.m, self.ring.0.m, "different X-precisions");
        let md = ring.tower().modulus();
        ring.wrap(self.c.iter().map(|&x| x % md).collect())
    }

    /// Least `i` with `a_i ∈ O_D^×`, or `None` when no coefficient is a unit.
    pub fn reduced_order(&self) -> Option<usize> {
        let alg = &self.ring.0.alg;
        (0..self.ring.0.m).find(|&i| alg.is_unit_int(self.coeff_int(i)))
    }

    /// Whether this is monic of degree `e` with non-leading coefficients in `rad(O_D)`.
    pub fn is_distinguished(&self) -> bool {
        let Some(e) = self.degree() else { return false };
        self.coeff_int(e) == self.ring.0.alg.int_one().as_slice() && self.reduced_order() == Some(e)
    }

    /// Two-sided inverse of a unit of `𝔒`.
    pub fn invert_unit(&self) -> Result<SkewSeries> {
        let ring = &self.ring;
        if !ring.0.alg.is_unit_int(self.coeff_int(0)) {
            return Err(Error::NotUnit);
        }
        let mut v = ring.wrap(ring.residue_inverse(self).ok_or(Error::NotUnit)?);
        let one = ring.one();
        let two = one.add(&one);
        for _ in 0..64 {
            let uv = self.mul(&v);
            if uv == one {
                return Ok(v);
            }
            v = v.mul(&two.sub(&uv));
        }
        Err(Error::NoConvergence(64))
    }

    fn ext_ring(&self, e: usize) -> SkewRing {
        let t = self.ring.tower();
        let (s, n, d) = (t.s(), t.precision() as usize, t.d());
        self.ring.with_prec(self.ring.0.m + e * (s * n + 1) + (d - 1) * n)
    }

    /// Core of preparation at extended precision: returns `(q, F)` with
    /// `F = q · self` distinguished of degree `e = ord^red(self)`.
    fn prepare_ext(&self, ext: &SkewRing, e: usize) -> Result<(SkewSeries, SkewSeries)> {
        let t = self.ring.tower();
        let w = ext.0.w;
        let m = ext.0.m;
        let f = self.to_ring(ext);
        let mut low = vec![0; m * w];
        low[..e * w].copy_from_slice(&f.c[..e * w]);
        let mut high = vec![0; m * w];
        high[..(m - e) * w].copy_from_slice(&f.c[e * w..]);
        let u = ext.wrap(high);
        let u_inv = u.invert_unit().map_err(|_| Error::NotPreparable(e))?;
        let wser = u_inv.mul(&ext.wrap(low));
        let table = ext.left_x_table(&wser.c);
        let mut xe = vec![0; m * w];
        xe[e * w..(e + 1) * w].copy_from_slice(&self.ring.0.alg.int_one());
        let cap = (t.precision() as usize * self.ring.0.m).max(self.ring.algebra().s() * t.precision() as usize + 2);
        let mut h = vec![0; m * w];
        let mut rest = vec![0; m * w];
        let mut converged = false;
        for _ in 0..cap {
            rest = xe.clone();
            t.sub_assign(&mut rest, &ext.mul_with_table(&h, &table));
            let mut next = vec![0; m * w];
            next[..(m - e) * w].copy_from_slice(&rest[e * w..]);
            if next == h {
                converged = true;
                break;
            }
            h = next;
        }
        if !converged {
            return Err(Error::NoConvergence(cap));
        }
        let mut fd = vec![0; m * w];
        fd[e * w..(e + 1) * w].copy_from_slice(&self.ring.0.alg.int_one());
        t.sub_assign(&mut fd[..e * w], &rest[..e * w]);
        let q = ext.wrap(h).mul(&u_inv);
        Ok((q, ext.wrap(fd)))
    }

    /// Weierstraß preparation `self = ε · F` with `ε ∈ 𝔒^×` and `F` distinguished.
    pub fn weierstrass_prepare(&self) -> Result<(SkewSeries, SkewSeries)> {
        let e = self.reduced_order().ok_or(Error::InfiniteReducedOrder)?;
        if e == 0 {
            self.invert_unit().map_err(|_| Error::NotPreparable(0))?;
            return Ok((self.clone(), self.ring.one()));
        }
        let ext = self.ext_ring(e);
        let (q, fd) = self.prepare_ext(&ext, e)?;
        let eps = q.invert_unit()?;
        Ok((eps.to_ring(&self.ring), fd.to_ring(&self.ring)))
    }

    /// Left Weierstraß division `g = q · self + r` with `deg r < ord^red(self)`.
    pub fn weierstrass_divide(&self, g: &SkewSeries) -> Result<(SkewSeries, SkewSeries)> {
        self.check(g);
        let e = self.reduced_order().ok_or(Error::InfiniteReducedOrder)?;
        if e == 0 {
            let inv = self.invert_unit().map_err(|_| Error::NotPreparable(0))?;
            return Ok((g.mul(&inv), self.ring.zero()));
        }
        let ext = self.ext_ring(e);
        let (q, fd) = self.prepare_ext(&ext, e)?;
        let (q1, r) = fd.left_divide_monic(&g.to_ring(&ext))?;
        Ok((q1.mul(&q).to_ring(&self.ring), r.to_ring(&self.ring)))
    }

    /// Exact left long division `g = q · self + r` by a monic polynomial `self`
    /// of degree `e`, `deg r < e`.
    pub fn left_divide_monic(&self, g: &SkewSeries) -> Result<(SkewSeries, SkewSeries)> {
        self.check(g);
        let ring = &self.ring;
        let (m, w) = (ring.0.m, ring.0.w);
        let t = ring.tower();
        let e = self.degree().ok_or(Error::InfiniteReducedOrder)?;
        if self.coeff_int(e) != ring.0.alg.int_one().as_slice() {
            return Err(Error::BadParameters("divisor is not monic".into()));
        }
        let gdeg = g.degree().unwrap_or(0);
        let mut r = g.c.clone();
        let mut q = vec![0; m * w];
        if gdeg >= e {
            let table = ring.left_x_table(&self.c);
            for k in (e..=gdeg).rev() {
                let c = r[k * w..(k + 1) * w].to_vec();
                if Tower::is_zero_slice(&c) {
                    continue;
                }
                q[(k - e) * w..(k - e + 1) * w].copy_from_slice(&c);
                let row = &table[k - e];
                for j in 0..=k {
                    let rj = &row[j * w..(j + 1) * w];
                    if Tower::is_zero_slice(rj) {
                        continue;
                    }
                    let mut prod = vec![0; w];
                    ring.0.alg.mul_int(&c, rj, &mut prod);
                    t.sub_assign(&mut r[j * w..(j + 1) * w], &prod);
                }
            }
        }
        Ok((ring.wrap(q), ring.wrap(r)))
    }

    /// Exact right long division `g = self · q + r` by a monic polynomial `self`
    /// of degree `e`, `deg r < e`.
    pub fn right_divide_monic(&self, g: &SkewSeries) -> Result<(SkewSeries, SkewSeries)> {
        self.check(g);
        let ring = &self.ring;
        let (m, w) = (ring.0.m, ring.0.w);
        let t = ring.tower();
        let d = t.d();
        let e = self.degree().ok_or(Error::InfiniteReducedOrder)?;
        if self.coeff_int(e) != ring.0.alg.int_one().as_slice() {
            return Err(Error::BadParameters("divisor is not monic".into()));
        }
        let gdeg = g.degree().unwrap_or(0);
        let mut r = g.c.clone();
        let mut q = vec![0; m * w];
        let inv_steps = (d - e % d) % d;
        for k in (e..=gdeg.max(e)).rev() {
            let c = r[k * w..(k + 1) * w].to_vec();
            if Tower::is_zero_slice(&c) {
                continue;
            }
            // leading coefficient of F · c' X^{k-e} is τ^e(c')
            let cp = ring.constant_int(&c).tau_coeffs(inv_steps);
            let cp = cp.coeff_int(0).to_vec();
            t.add_assign(&mut q[(k - e) * w..(k - e + 1) * w], &cp);
            let fc = self.mul(&ring.constant_int(&cp));
            for j in 0..=e {
                let src = &fc.c[j * w..(j + 1) * w];
                if j + k - e < m {
                    t.sub_assign(&mut r[(j + k - e) * w..(j + k - e + 1) * w], src);
                }
            }
        }
        Ok((ring.wrap(q), ring.wrap(r)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::make_algebra;
    use crate::tower::make_tower;

    fn ring(p: u64, f_k: usize, d: usize, s: usize, n: u32, m: usize) -> SkewRing {
        let t = make_tower(p, f_k, d, s, n).unwrap();
        SkewRing::new(&make_algebra(&t, 1).unwrap(), m).unwrap()
    }

    fn poly(r: &SkewRing, coeffs: &[i64]) -> SkewSeries {
        let t = r.tower();
        let cs: Vec<DElement> = coeffs.iter().map(|&c| r.algebra().from_tower(&t.from_int(c)).unwrap()).collect();
        r.from_coeffs(&cs).unwrap()
    }

    #[test]
    fn x_times_scalar() {
        let r = ring(3, 1, 3, 1, 6, 6);
        let t = r.tower();
        let a = r.algebra();
        let c = r.constant(&a.from_tower(&t.from_int(5)).unwrap()).unwrap();
        assert_eq!(r.x().mul(&c), c.mul(&r.x()));
        let w = a.from_tower(&t.omega()).unwrap();
        let tw = a.tau(&w).unwrap();
        let lhs = r.x().mul(&r.constant(&w).unwrap());
        let rhs = r.constant(&tw).unwrap().mul(&r.x()).add(&r.constant(&a.d_sub(&tw, &w).unwrap()).unwrap());
        assert_eq!(lhs, rhs);
        assert_ne!(lhs, r.constant(&w).unwrap().mul(&r.x()));
    }

    #[test]
    fn reduced_orders() {
        let r = ring(5, 1, 1, 1, 6, 6);
        assert_eq!(poly(&r, &[5, 1]).reduced_order(), Some(1));
        assert_eq!(poly(&r, &[3]).reduced_order(), Some(0));
        assert_eq!(poly(&r, &[5, 10, 25]).reduced_order(), None);
    }

    #[test]
    fn commutative_division_example() {
        let r = ring(5, 1, 1, 1, 8, 8);
        let g = poly(&r, &[0, 0, 1]);
        let f = poly(&r, &[5, 1]);
        let (q, rem) = f.weierstrass_divide(&g).unwrap();
        assert_eq!(q, poly(&r, &[-5, 1]));
        assert_eq!(rem, poly(&r, &[25]));
        let (q1, r1) = f.weierstrass_divide(&f).unwrap();
        assert_eq!((q1, r1), (r.one(), r.zero()));
        let c = poly(&r, &[7]);
        assert_eq!(f.weierstrass_divide(&c).unwrap(), (r.zero(), c));
    }

    #[test]
    fn commutative_preparation_example() {
        let r = ring(5, 1, 1, 1, 8, 8);
        let f = poly(&r, &[5, 6, 1]);
        let (u, fd) = f.weierstrass_prepare().unwrap();
        assert_eq!(u, poly(&r, &[1, 1]));
        assert_eq!(fd, poly(&r, &[5, 1]));
        let g = poly(&r, &[5, 1]);
        assert_eq!(g.weierstrass_prepare().unwrap(), (r.one(), g.clone()));
        assert!(poly(&r, &[5, 10]).weierstrass_prepare().is_err());
    }

    #[test]
    fn geometric_series() {
        let r = ring(5, 1, 1, 1, 6, 6);
        assert_eq!(r.one().invert_unit().unwrap(), r.one());
        assert_eq!(poly(&r, &[1, -1]).invert_unit().unwrap(), poly(&r, &[1, 1, 1, 1, 1, 1]));
    }

    #[test]
    fn non_unit_with_unit_constant() {
        // X ω = τ(ω) X + δ(ω) has a unit constant term but is not a unit
        let r = ring(3, 1, 3, 1, 4, 6);
        let w = r.algebra().from_tower(&r.tower().omega()).unwrap();
        let f = r.x().mul(&r.constant(&w).unwrap());
        assert_eq!(f.reduced_order(), Some(0));
        assert_eq!(f.invert_unit().unwrap_err(), Error::NotUnit);
        assert_eq!(f.weierstrass_prepare().unwrap_err(), Error::NotPreparable(0));
    }

    #[test]
    fn center_embedding() {
        let r = ring(3, 1, 3, 2, 4, 6);
        let t = r.tower();
        let h = CenterSeries { prec_t: 2, coeffs: vec![t.zero(), t.one()] };
        let img = r.center_embed(&h).unwrap();
        assert_eq!(img, poly(&r, &[0, 3, 3, 1]));
        let c = CenterSeries { prec_t: 2, coeffs: vec![t.from_int(4)] };
        assert_eq!(r.center_embed(&c).unwrap(), poly(&r, &[4]));
        let w = r.constant(&r.algebra().from_tower(&t.omega()).unwrap()).unwrap();
        assert_eq!(img.mul(&w), w.mul(&img));
        assert_eq!(img.mul(&r.x()), r.x().mul(&img));
        let pi = r.constant(&r.algebra().pi()).unwrap();
        assert_eq!(img.mul(&pi), pi.mul(&img));
    }

    #[test]
    fn right_division_recombines() {
        let r = ring(3, 1, 3, 1, 5, 9);
        let a = r.algebra();
        let t = r.tower();
        let w = a.from_tower(&t.omega()).unwrap();
        let fd = r.from_coeffs(&[a.from_tower(&t.from_int(3)).unwrap(), a.zero(), a.one()]).unwrap();
        let g = r.constant(&w).unwrap().mul(&r.x()).mul(&r.x()).mul(&r.x()).add(&poly(&r, &[1, 2]));
        let (q, rem) = fd.right_divide_monic(&g).unwrap();
        assert!(rem.degree().unwrap_or(0) < 2);
        assert_eq!(fd.mul(&q).add(&rem), g);
        let (q, rem) = fd.left_divide_monic(&g).unwrap();
        assert_eq!(q.mul(&fd).add(&rem), g);
    }
}
