//! The embedding `Φ` into matrices over `O_M[[T]]`, reduced norms over the
//! centre `Frac(O_k[[T]])`, dimension reduction and the monicity check.

use serde::{Deserialize, Serialize};

use crate::comm::{self, CommRing};
use crate::error::{Error, Result};
use crate::linalg::{dieudonne_det, DetNormalForm, LaurentEntry, SkewMatrix};
use crate::series::{CenterSeries, SkewRing, SkewSeries};
use crate::tower::{Tower, TowerElement};
use crate::zmod::Zmod;

/// `num / (p^{p_denom} T^{t_denom})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterFraction {
    pub num: CenterSeries,
    pub p_denom: u32,
    pub t_denom: u32,
}

/// `(d·s) × (d·s)` image of an element under `Φ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiMatrix {
    pub entries: Vec<Vec<CenterFraction>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precision {
    pub p: u32,
    pub t: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormChecks {
    pub integral: bool,
    pub galois_invariant: bool,
    pub monic: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: CenterFraction,
    pub precision: Precision,
    pub checks: NormChecks,
}

/// `O_M[[T]] / (p^N, T^{M_T})` on flat coefficient blocks.
struct TRing<'a> {
    t: &'a Tower,
    mt: usize,
}

impl TRing<'_> {
    fn f(&self) -> usize {
        self.t.f_m()
    }
}

impl CommRing for TRing<'_> {
    type E = Vec<u64>;
    fn zero(&self) -> Vec<u64> {
        vec![0; self.mt * self.f()]
    }
    fn one(&self) -> Vec<u64> {
        let mut v = self.zero();
        v[0] = 1 % self.t.modulus();
        v
    }
    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let mut c = a.clone();
        self.t.add_assign(&mut c, b);
        c
    }
    fn sub(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let mut c = a.clone();
        self.t.sub_assign(&mut c, b);
        c
    }
    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let f = self.f();
        let mut c = self.zero();
        for i in 0..self.mt {
            let ai = &a[i * f..(i + 1) * f];
            if Tower::is_zero_slice(ai) {
                continue;
            }
            for j in 0..self.mt - i {
                let bj = &b[j * f..(j + 1) * f];
                if Tower::is_zero_slice(bj) {
                    continue;
                }
                self.t.mul_add_into(ai, bj, &mut c[(i + j) * f..(i + j + 1) * f]);
            }
        }
        c
    }
}

fn binomials(n: usize, z: Zmod) -> Vec<Vec<u64>> {
    let mut rows = vec![vec![1 % z.modulus()]];
    for i in 1..=n {
        let prev = &rows[i - 1];
        let mut row = vec![0; i + 1];
        for (k, r) in row.iter_mut().enumerate() {
            let a = if k < prev.len() { prev[k] } else { 0 };
            let b = if k > 0 { prev[k - 1] } else { 0 };
            *r = z.add(a, b);
        }
        rows.push(row);
    }
    rows
}

/// `Φ(g)` for an integral series, as `(d·s)²` flat `T`-series.
fn phi_series(g: &SkewSeries) -> Vec<Vec<Vec<u64>>> {
    let ring = g.ring();
    let alg = ring.algebra();
    let t = ring.tower();
    let z = t.zm();
    let (d, s, f) = (t.d(), t.s(), t.f_m());
    let (m, mt, w) = (ring.prec_x(), ring.prec_t(), ring.width());
    let binom = binomials(m.max(mt), z);
    // coefficients in the basis Y^k, Y = 1 + X
    let mut b = vec![0u64; m * w];
    for i in 0..m {
        let ai = g.coeff_int(i);
        if Tower::is_zero_slice(ai) {
            continue;
        }
        for k in 0..=i {
            let mut c = binom[i][k];
            if (i - k) % 2 == 1 {
                c = z.neg(c);
            }
            for (o, &x) in b[k * w..(k + 1) * w].iter_mut().zip(ai) {
                *o = z.add(*o, z.mul(c, x));
            }
        }
    }
    let n = d * s;
    let mut out = vec![vec![vec![0u64; mt * f]; n]; n];
    let tau = alg.tau_exponent();
    let mut tmp = vec![0u64; f];
    for k in 0..m {
        let bk = &b[k * w..(k + 1) * w];
        if Tower::is_zero_slice(bk) {
            continue;
        }
        let ph = alg.phi_int(bk);
        let (i, q) = (k % d, k / d);
        for r in 0..d {
            let c = (r + i) % d;
            let zp = q + usize::from(c < r);
            for (a, row) in ph.iter().enumerate() {
                for (bb, e) in row.iter().enumerate() {
                    if Tower::is_zero_slice(e) {
                        continue;
                    }
                    t.frob_into(tau * r, e, &mut tmp);
                    let dst = &mut out[r * s + a][c * s + bb];
                    for j in 0..mt.min(zp + 1) {
                        let cj = binom[zp][j];
                        for (o, &x) in dst[j * f..(j + 1) * f].iter_mut().zip(&tmp) {
                            *o = z.add(*o, z.mul(cj, x));
                        }
                    }
                }
            }
        }
    }
    out
}

/// `Φ(π_D^{-a} g) = p^{-e} Φ(π_D^{se-a} g)`; returns the integral part and `e`.
fn phi_entry(x: &LaurentEntry) -> (Vec<Vec<Vec<u64>>>, u32) {
    let s = x.ring().tower().s() as u32;
    let e = x.a.div_ceil(s);
    (phi_series(&x.g.left_mul_pi(s * e - x.a)), e)
}

fn to_center(t: &Tower, flat: &[u64], mt: usize) -> CenterSeries {
    let f = t.f_m();
    let coeffs = (0..mt).map(|j| TowerElement { coeffs: flat[j * f..(j + 1) * f].to_vec(), denom_exp: 0 }).collect();
    CenterSeries { prec_t: mt, coeffs }
}

fn from_center(t: &Tower, c: &CenterSeries) -> Vec<u64> {
    let f = t.f_m();
    let mut out = vec![0u64; c.prec_t * f];
    for (j, e) in c.coeffs.iter().enumerate().take(c.prec_t) {
        out[j * f..(j + 1) * f].copy_from_slice(&e.coeffs);
    }
    out
}

fn canonical(t: &Tower, mut num: Vec<u64>, mut p_denom: u32, mt: usize) -> CenterFraction {
    if Tower::is_zero_slice(&num) {
        p_denom = 0;
    }
    while p_denom > 0 && num.iter().all(|&c| c % t.p() == 0) {
        t.div_p_assign(&mut num, 1);
        p_denom -= 1;
    }
    CenterFraction { num: to_center(t, &num, mt), p_denom, t_denom: 0 }
}

/// `Φ(x)` with entries over `Frac(O_M[[T]])`.
pub fn phi_big(x: &LaurentEntry) -> PhiMatrix {
    let t = x.ring().tower();
    let mt = x.ring().prec_t();
    let (m, e) = phi_entry(x);
    PhiMatrix {
        entries: m.into_iter().map(|row| row.into_iter().map(|v| canonical(t, v, e, mt)).collect()).collect(),
    }
}

pub(crate) fn cf_one(ring: &SkewRing) -> CenterFraction {
    let t = ring.tower();
    let tr = TRing { t, mt: ring.prec_t() };
    CenterFraction { num: to_center(t, &tr.one(), ring.prec_t()), p_denom: 0, t_denom: 0 }
}

pub(crate) fn cf_mul(t: &Tower, a: &CenterFraction, b: &CenterFraction) -> CenterFraction {
    let mt = a.num.prec_t.min(b.num.prec_t);
    let tr = TRing { t, mt };
    let (x, y) = (from_center(t, &a.num), from_center(t, &b.num));
    let f = t.f_m();
    let prod = tr.mul(&x[..mt * f].to_vec(), &y[..mt * f].to_vec());
    let mut c = canonical(t, prod, a.p_denom + b.p_denom, mt);
    c.t_denom = a.t_denom + b.t_denom;
    c
}

pub(crate) fn cf_neg(t: &Tower, a: &CenterFraction) -> CenterFraction {
    let mut x = from_center(t, &a.num);
    t.neg_assign(&mut x);
    CenterFraction { num: to_center(t, &x, a.num.prec_t), ..a.clone() }
}

/// Equality of values modulo `p^prec` (and the common `T`-precision).
pub(crate) fn cf_eq(t: &Tower, a: &CenterFraction, b: &CenterFraction, prec: i64) -> bool {
    if a.t_denom != b.t_denom {
        return false;
    }
    let mt = a.num.prec_t.min(b.num.prec_t);
    let f = t.f_m();
    let dm = a.p_denom.max(b.p_denom);
    let lift = |c: &CenterFraction| {
        let mut v = from_center(t, &c.num)[..mt * f].to_vec();
        let k = dm - c.p_denom;
        if k > 0 {
            let pk = t.zm().pow(t.p(), k as u64);
            t.scale_assign(&mut v, pk);
        }
        v
    };
    let digits = (prec + dm as i64).clamp(0, t.precision() as i64) as u32;
    let pm = t.p().pow(digits);
    lift(a).iter().zip(lift(b)).all(|(x, y)| x % pm == y % pm)
}

/// `nr(π_D)^w = ((-1)^{s-1} p)^{d w}`.
pub(crate) fn pi_norm_power(ring: &SkewRing, w: i64) -> CenterFraction {
    let t = ring.tower();
    let (d, s) = (t.d() as i64, t.s() as i64);
    let z = t.zm();
    let mut one = cf_one(ring);
    let k = d * w.abs();
    let mut num = from_center(t, &one.num);
    if w >= 0 {
        t.scale_assign(&mut num, z.pow(t.p(), k as u64));
    } else {
        one.p_denom = k as u32;
    }
    if (s - 1) * k % 2 == 1 {
        t.neg_assign(&mut num);
    }
    CenterFraction { num: to_center(t, &num, ring.prec_t()), ..one }
}

/// Reduced norm of a single integral series, `det Φ(g)`.
pub(crate) fn reduced_norm_series(g: &SkewSeries) -> Result<CenterFraction> {
    let m = SkewMatrix::new(g.ring(), vec![vec![LaurentEntry::integral(g.clone())]])?;
    Ok(reduced_norm_center(&m)?.value)
}

/// `nr(A) = det Φ(A)` over the centre.
pub fn reduced_norm_center(a: &SkewMatrix) -> Result<NormReport> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::BadParameters("reduced norm needs a square matrix".into()));
    }
    let ring = a.ring();
    let t = ring.tower();
    let mt = ring.prec_t();
    let ds = t.d() * t.s();
    let tr = TRing { t, mt };
    let mut big = vec![vec![tr.zero(); n * ds]; n * ds];
    let mut denom = 0u32;
    for i in 0..n {
        let parts: Vec<_> = a.entries[i].iter().map(phi_entry).collect();
        let e_row = parts.iter().map(|(_, e)| *e).max().unwrap_or(0);
        denom += e_row * ds as u32;
        for (j, (m, e)) in parts.into_iter().enumerate() {
            let scale = t.zm().pow(t.p(), (e_row - e) as u64);
            for (r, row) in m.into_iter().enumerate() {
                for (c, mut v) in row.into_iter().enumerate() {
                    if scale != 1 {
                        t.scale_assign(&mut v, scale);
                    }
                    big[i * ds + r][j * ds + c] = v;
                }
            }
        }
    }
    if denom >= t.precision() {
        return Err(Error::PrecisionExhausted(format!("p-denominator {denom} at precision {}", t.precision())));
    }
    let det = comm::det(&tr, &big);
    let f = t.f_m();
    let fk = t.f_k();
    let mut tmp = vec![0u64; f];
    let galois = det.chunks(f).all(|c| {
        t.frob_into(fk, c, &mut tmp);
        tmp == c
    });
    if !galois {
        return Err(Error::NotGaloisInvariant);
    }
    let value = canonical(t, det, denom, mt);
    let integral = value.p_denom == 0 && value.t_denom == 0;
    Ok(NormReport {
        value,
        precision: Precision { p: t.precision() - denom, t: mt },
        checks: NormChecks { integral, galois_invariant: true, monic: None },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompatReport {
    pub matrix_norm: CenterFraction,
    pub det_norm: CenterFraction,
    pub precision: Precision,
    pub agree: bool,
}

/// Compares `nr(A)` with `nr(det A)` computed from the normal form.
pub fn nr_det_compat(a: &SkewMatrix) -> Result<CompatReport> {
    let lhs = reduced_norm_center(a)?;
    let nf = dieudonne_det(a)?;
    compat_with(a.ring(), &lhs, &nf)
}

fn compat_with(ring: &SkewRing, lhs: &NormReport, nf: &DetNormalForm) -> Result<CompatReport> {
    let t = ring.tower();
    let rhs = nf.reduced_norm()?;
    let prec = (lhs.precision.p as i64).min(nf.prec_p as i64 + t.d() as i64 * nf.w).max(0);
    Ok(CompatReport {
        agree: cf_eq(t, &lhs.value, &rhs, prec),
        matrix_norm: lhs.value.clone(),
        det_norm: rhs,
        precision: Precision { p: prec as u32, t: lhs.precision.t },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub m: usize,
    pub n: usize,
    /// Net `π_D`-exponent of `det A`; integrality forces it to be non-negative.
    pub w: i64,
    pub c_integral: bool,
    pub class_agrees: bool,
    pub norm_agrees: bool,
    pub precision: Precision,
}

/// Replaces an `mn × mn` matrix over `𝔒` by an `n × n` one with the same determinant.
pub fn dimension_reduce(a: &SkewMatrix, n: usize) -> Result<(SkewMatrix, DimensionReport)> {
    let size = a.rows();
    if a.cols() != size || n == 0 || size % n != 0 {
        return Err(Error::BadParameters(format!("a {size}×{} matrix is not made of {n}×{n} blocks", a.cols())));
    }
    if !a.is_integral() {
        return Err(Error::BadParameters("dimension reduction needs an integral matrix".into()));
    }
    let ring = a.ring();
    let nf = dieudonne_det(a)?;
    if nf.w < 0 {
        return Err(Error::WPositiveViolation(nf.w));
    }
    let head = nf.unit.mul(&nf.f).left_mul_pi(nf.w as u32);
    let mut c = SkewMatrix::identity(ring, n);
    c.entries[0][0] = LaurentEntry::integral(head);
    let nf_c = dieudonne_det(&c)?;
    let class_agrees = nf.same_class(&nf_c)?;
    let na = reduced_norm_center(a)?;
    let nc = reduced_norm_center(&c)?;
    let prec = na.precision.p.min(nc.precision.p).min(nf.prec_p).min(nf_c.prec_p);
    let norm_agrees = cf_eq(ring.tower(), &na.value, &nc.value, prec as i64)
        && compat_with(ring, &na, &nf)?.agree
        && compat_with(ring, &nc, &nf_c)?.agree;
    let report = DimensionReport {
        m: size / n,
        n,
        w: nf.w,
        c_integral: c.is_integral(),
        class_agrees,
        norm_agrees,
        precision: Precision { p: prec, t: ring.prec_t() },
    };
    if !class_agrees || !norm_agrees {
        return Err(Error::Inconsistent(format!("dimension reduction postcondition failed: {report:?}")));
    }
    Ok((c, report))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonicReport {
    pub norm: NormReport,
    /// Coefficients of `nr(G)` in powers of `Z = 1 + T`.
    pub z_coeffs: Vec<TowerElement>,
    pub z_degree: Option<usize>,
    pub expected_degree: usize,
}

/// Checks that the reduced norm of a monic `G` of degree `e` is monic of degree `s·e` in `1 + T`.
pub fn monic_norm_check(g: &SkewSeries) -> Result<MonicReport> {
    let ring = g.ring();
    let t = ring.tower();
    let alg = ring.algebra();
    let e = g.degree().ok_or_else(|| Error::BadParameters("G = 0 is not monic".into()))?;
    if g.coeff(e) != alg.one() {
        return Err(Error::BadParameters("G is not monic".into()));
    }
    let se = t.s() * e;
    let mt = ring.prec_t();
    if mt <= se {
        return Err(Error::PrecisionExhausted(format!("M_T = {mt} must exceed s·e = {se}")));
    }
    let mut norm = reduced_norm_center(&SkewMatrix::new(ring, vec![vec![LaurentEntry::integral(g.clone())]])?)?;
    let z = t.zm();
    let f = t.f_m();
    let h = from_center(t, &norm.value.num);
    let binom = binomials(mt, z);
    let mut c = vec![0u64; mt * f];
    for j in 0..mt {
        for k in 0..=j {
            let mut b = binom[j][k];
            if (j - k) % 2 == 1 {
                b = z.neg(b);
            }
            for (o, &x) in c[k * f..(k + 1) * f].iter_mut().zip(&h[j * f..(j + 1) * f]) {
                *o = z.add(*o, z.mul(b, x));
            }
        }
    }
    let z_degree = (0..mt).rev().find(|&k| !Tower::is_zero_slice(&c[k * f..(k + 1) * f]));
    let lead_one = z_degree == Some(se) && c[se * f] == 1 % t.modulus() && c[se * f + 1..(se + 1) * f].iter().all(|&x| x == 0);
    norm.checks.monic = Some(lead_one && norm.value.p_denom == 0);
    Ok(MonicReport { z_coeffs: to_center(t, &c, mt).coeffs, z_degree, expected_degree: se, norm })
}
