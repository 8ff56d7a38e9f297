//! Truncated arithmetic in an unramified tower `Q_p ⊆ k ⊆ K ⊆ M = K(ω)`.
//!
//! Every field in the tower is unramified over `Q_p`, so the whole tower is
//! modelled inside `O_M = Z_p[t]/(P(t))` where `P` is a monic lift of an
//! irreducible polynomial over `F_p` of degree `f_M = f_k · d · s`. Elements
//! are coefficient vectors in the power basis of `t`, reduced modulo `p^N`,
//! together with a power of `p` in the denominator.
//!
//! Subfields are never tagged: `x ∈ K` iff `x` is fixed by `Frob^{f_K}`, and
//! `x ∈ k` iff it is fixed by `Frob^{f_k}`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::zmod::{checked_pow, is_prime, prime_factors, val_p, Zmod};

/// Largest supported absolute degree `f_M` of the inertia field.
pub const MAX_DEGREE: usize = 32;

/// Serialisable parameters of a tower. `def_poly` lists `c_0, …, c_{f_M}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TowerDescriptor {
    pub p: u64,
    pub f_k: usize,
    pub d: usize,
    pub s: usize,
    #[serde(rename = "N")]
    pub n: u32,
    pub def_poly: Vec<u64>,
}

/// An element `p^{-denom_exp} · Σ coeffs[i] t^i` of `M`.
///
/// Canonical form: zero has `denom_exp = 0`, and a positive `denom_exp`
/// never coexists with a coefficient vector divisible by `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TowerElement {
    pub coeffs: Vec<u64>,
    pub denom_exp: u32,
}

struct TowerData {
    desc: TowerDescriptor,
    f: usize,
    zm: Zmod,
    fp: Zmod,
    /// `frob[k]` is the matrix of `Frob^k`, column-major: column `j` is `Frob^k(t^j)`.
    frob: Vec<Vec<u64>>,
    omega: Vec<u64>,
}

/// Validated, immutable tower context. Cloning is cheap.
#[derive(Clone)]
pub struct Tower(Arc<TowerData>);

impl fmt::Debug for Tower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Tower").field(&self.0.desc).finish()
    }
}

impl PartialEq for Tower {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.desc == other.0.desc
    }
}

fn check_parameters(p: u64, f_k: usize, d: usize, s: usize, n: u32) -> Result<usize> {
    if p == 2 || !is_prime(p) {
        return Err(Error::BadParameters(format!("p = {p} is not an odd prime")));
    }
    if f_k == 0 || s == 0 || n == 0 || d == 0 {
        return Err(Error::BadParameters("f_k, d, s and N must be positive".into()));
    }
    let mut dd = d;
    while dd % p as usize == 0 {
        dd /= p as usize;
    }
    if dd != 1 {
        return Err(Error::BadParameters(format!("d = {d} is not a power of {p}")));
    }
    let f = f_k * d * s;
    if f > MAX_DEGREE {
        return Err(Error::BadParameters(format!("f_M = {f} exceeds {MAX_DEGREE}")));
    }
    let limit = 1u64 << 62;
    match checked_pow(p, n) {
        Some(m) if m < limit => {}
        _ => return Err(Error::BadParameters(format!("p^N = {p}^{n} does not fit in 62 bits"))),
    }
    match checked_pow(p, f as u32) {
        Some(m) if m < limit => {}
        _ => return Err(Error::BadParameters(format!("p^f_M = {p}^{f} does not fit in 62 bits"))),
    }
    let q_k = checked_pow(p, f_k as u32).unwrap();
    if (q_k - 1) % s as u64 != 0 {
        return Err(Error::IndexHypothesisViolated { s, q_k_minus_one: q_k - 1 });
    }
    Ok(f)
}

/// Builds the tower for `(p, f_k, d, s, N)` with the least irreducible
/// defining polynomial.
pub fn make_tower(p: u64, f_k: usize, d: usize, s: usize, n: u32) -> Result<Tower> {
    let f = check_parameters(p, f_k, d, s, n)?;
    let def_poly = least_irreducible(p, f);
    Tower::build(TowerDescriptor { p, f_k, d, s, n, def_poly })
}

impl Tower {
    pub fn from_descriptor(desc: &TowerDescriptor) -> Result<Tower> {
        let f = check_parameters(desc.p, desc.f_k, desc.d, desc.s, desc.n)?;
        if desc.def_poly.len() != f + 1 || desc.def_poly[f] != 1 {
            return Err(Error::BadParameters(format!("def_poly must be monic of degree {f}")));
        }
        if desc.def_poly.iter().any(|&c| c >= desc.p) {
            return Err(Error::BadParameters("def_poly coefficients must lie in 0..p".into()));
        }
        if !is_irreducible(desc.p, &desc.def_poly) {
            return Err(Error::BadParameters("def_poly is not irreducible mod p".into()));
        }
        Tower::build(desc.clone())
    }

    fn build(desc: TowerDescriptor) -> Result<Tower> {
        let f = desc.def_poly.len() - 1;
        let zm = Zmod::new(checked_pow(desc.p, desc.n).unwrap());
        let fp = Zmod::new(desc.p);
        let mut data = TowerData { desc, f, zm, fp, frob: Vec::new(), omega: Vec::new() };
        data.frob = frobenius_matrices(&data);
        let tower = Tower(Arc::new(data));
        let omega = tower.find_omega();
        let mut data = Arc::try_unwrap(tower.0).ok().expect("unique during construction");
        data.omega = omega;
        Ok(Tower(Arc::new(data)))
    }

    pub fn descriptor(&self) -> &TowerDescriptor {
        &self.0.desc
    }
    pub fn p(&self) -> u64 {
        self.0.desc.p
    }
    pub fn f_k(&self) -> usize {
        self.0.desc.f_k
    }
    pub fn d(&self) -> usize {
        self.0.desc.d
    }
    pub fn s(&self) -> usize {
        self.0.desc.s
    }
    /// The p-adic precision `N`.
    pub fn precision(&self) -> u32 {
        self.0.desc.n
    }
    /// Residue degree `f_K = d · f_k` of `K`.
    pub fn f_big(&self) -> usize {
        self.0.desc.f_k * self.0.desc.d
    }
    /// Absolute degree `f_M` of the inertia field `M = K(ω)`.
    pub fn f_m(&self) -> usize {
        self.0.f
    }
    /// `q = p^{f_K}`.
    pub fn q(&self) -> u64 {
        self.p().pow(self.f_big() as u32)
    }
    pub fn q_k(&self) -> u64 {
        self.p().pow(self.f_k() as u32)
    }
    pub fn modulus(&self) -> u64 {
        self.0.zm.modulus()
    }
    pub(crate) fn zm(&self) -> Zmod {
        self.0.zm
    }

    // ---- integral kernels on coefficient slices of length f_M ----

    pub(crate) fn add_assign(&self, a: &mut [u64], b: &[u64]) {
        let z = self.0.zm;
        for (x, &y) in a.iter_mut().zip(b) {
            *x = z.add(*x, y);
        }
    }

    pub(crate) fn sub_assign(&self, a: &mut [u64], b: &[u64]) {
        let z = self.0.zm;
        for (x, &y) in a.iter_mut().zip(b) {
            *x = z.sub(*x, y);
        }
    }

    pub(crate) fn neg_assign(&self, a: &mut [u64]) {
        let z = self.0.zm;
        for x in a.iter_mut() {
            *x = z.neg(*x);
        }
    }

    pub(crate) fn scale_assign(&self, a: &mut [u64], c: u64) {
        let z = self.0.zm;
        for x in a.iter_mut() {
            *x = z.mul(*x, c);
        }
    }

    /// `out = a · b` in `O_M / p^N`.
    pub(crate) fn mul_into(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        poly_mulmod(self.0.zm, a, b, &self.0.desc.def_poly, out);
    }

    /// `out += a · b`.
    pub(crate) fn mul_add_into(&self, a: &[u64], b: &[u64], out: &mut [u64]) {
        let mut tmp = [0u64; MAX_DEGREE];
        let f = self.0.f;
        self.mul_into(a, b, &mut tmp[..f]);
        self.add_assign(out, &tmp[..f]);
    }

    /// `out = Frob^k(a)` where `Frob` is the absolute Frobenius of `M`.
    pub(crate) fn frob_into(&self, k: usize, a: &[u64], out: &mut [u64]) {
        let f = self.0.f;
        let k = k % f;
        if k == 0 {
            out.copy_from_slice(a);
            return;
        }
        let z = self.0.zm;
        let mat = &self.0.frob[k];
        out.iter_mut().for_each(|x| *x = 0);
        for (j, &aj) in a.iter().enumerate() {
            if aj == 0 {
                continue;
            }
            let col = &mat[j * f..(j + 1) * f];
            for (o, &c) in out.iter_mut().zip(col) {
                *o = z.add(*o, z.mul(aj, c));
            }
        }
    }

    pub(crate) fn is_zero_slice(a: &[u64]) -> bool {
        a.iter().all(|&x| x == 0)
    }

    /// Minimum p-adic valuation of the coefficients; `N` for zero.
    pub(crate) fn val_slice(&self, a: &[u64]) -> u32 {
        let (p, n) = (self.p(), self.precision());
        a.iter().map(|&c| val_p(c, p, n)).min().unwrap_or(n)
    }

    /// Exact division by `p^k`; the top `k` digits become zero.
    pub(crate) fn div_p_assign(&self, a: &mut [u64], k: u32) {
        let pk = self.p().pow(k);
        for x in a.iter_mut() {
            debug_assert_eq!(*x % pk, 0);
            *x /= pk;
        }
    }

    pub(crate) fn is_unit_slice(&self, a: &[u64]) -> bool {
        let p = self.p();
        a.iter().any(|&c| c % p != 0)
    }

    /// Inverse of a unit of `O_M` modulo `p^N`.
    pub(crate) fn inv_unit_slice(&self, a: &[u64]) -> Result<Vec<u64>> {
        let f = self.0.f;
        let p = self.p();
        let res: Vec<u64> = a.iter().map(|&c| c % p).collect();
        let y0 = fp_poly_inverse(self.0.fp, &res, &self.0.desc.def_poly).ok_or(Error::NotInvertible)?;
        let mut y = vec![0u64; f];
        y[..y0.len()].copy_from_slice(&y0);
        let two = self.int_slice(2);
        let mut ay = vec![0u64; f];
        let mut corr = vec![0u64; f];
        let mut next = vec![0u64; f];
        for _ in 0..64 {
            self.mul_into(a, &y, &mut ay);
            if ay == self.int_slice(1) {
                return Ok(y);
            }
            corr.copy_from_slice(&two);
            self.sub_assign(&mut corr, &ay);
            self.mul_into(&y, &corr, &mut next);
            std::mem::swap(&mut y, &mut next);
        }
        Err(Error::NoConvergence(64))
    }

    pub(crate) fn int_slice(&self, c: i64) -> Vec<u64> {
        let mut v = vec![0u64; self.0.f];
        v[0] = self.0.zm.from_i64(c);
        v
    }

    pub(crate) fn pow_slice(&self, a: &[u64], mut e: u64) -> Vec<u64> {
        let f = self.0.f;
        let mut base = a.to_vec();
        let mut acc = self.int_slice(1);
        let mut tmp = vec![0u64; f];
        while e > 0 {
            if e & 1 == 1 {
                self.mul_into(&acc, &base, &mut tmp);
                acc.copy_from_slice(&tmp);
            }
            self.mul_into(&base, &base, &mut tmp);
            base.copy_from_slice(&tmp);
            e >>= 1;
        }
        acc
    }

    // ---- public element API ----

    pub fn zero(&self) -> TowerElement {
        TowerElement { coeffs: vec![0; self.0.f], denom_exp: 0 }
    }

    pub fn one(&self) -> TowerElement {
        self.from_int(1)
    }

    pub fn from_int(&self, c: i64) -> TowerElement {
        TowerElement { coeffs: self.int_slice(c), denom_exp: 0 }
    }

    /// The generator `t` of `O_M` over `Z_p`.
    pub fn generator(&self) -> TowerElement {
        let f = self.0.f;
        let mut c = vec![0u64; f];
        if f == 1 {
            c[0] = self.0.zm.neg(self.0.desc.def_poly[0]);
        } else {
            c[1] = 1;
        }
        TowerElement { coeffs: c, denom_exp: 0 }
    }

    /// Builds an element from raw coefficients and a denominator exponent, normalising.
    pub fn element(&self, coeffs: &[i64], denom_exp: u32) -> Result<TowerElement> {
        if coeffs.len() != self.0.f {
            return Err(Error::Mismatch(format!("expected {} coefficients", self.0.f)));
        }
        let c = coeffs.iter().map(|&x| self.0.zm.from_i64(x)).collect();
        self.normalize(TowerElement { coeffs: c, denom_exp })
    }

    /// Checks shape and reduces into canonical form.
    pub fn normalize(&self, mut x: TowerElement) -> Result<TowerElement> {
        if x.coeffs.len() != self.0.f {
            return Err(Error::Mismatch(format!("expected {} coefficients", self.0.f)));
        }
        let m = self.modulus();
        x.coeffs.iter_mut().for_each(|c| *c %= m);
        if Self::is_zero_slice(&x.coeffs) {
            x.denom_exp = 0;
            return Ok(x);
        }
        let v = self.val_slice(&x.coeffs).min(x.denom_exp);
        if v > 0 {
            self.div_p_assign(&mut x.coeffs, v);
            x.denom_exp -= v;
        }
        if x.denom_exp >= self.precision() {
            return Err(Error::PrecisionExhausted(format!(
                "denominator p^{} at precision {}",
                x.denom_exp,
                self.precision()
            )));
        }
        Ok(x)
    }

    pub fn is_zero(&self, x: &TowerElement) -> bool {
        Self::is_zero_slice(&x.coeffs)
    }

    fn scaled_up(&self, x: &TowerElement, k: u32) -> Vec<u64> {
        let mut c = x.coeffs.clone();
        let pk = self.0.zm.pow(self.p(), k as u64);
        self.scale_assign(&mut c, pk);
        c
    }

    pub fn add(&self, x: &TowerElement, y: &TowerElement) -> Result<TowerElement> {
        let e = x.denom_exp.max(y.denom_exp);
        let mut c = self.scaled_up(x, e - x.denom_exp);
        self.add_assign(&mut c, &self.scaled_up(y, e - y.denom_exp));
        self.normalize(TowerElement { coeffs: c, denom_exp: e })
    }

    pub fn neg(&self, x: &TowerElement) -> TowerElement {
        let mut c = x.coeffs.clone();
        self.neg_assign(&mut c);
        TowerElement { coeffs: c, denom_exp: x.denom_exp }
    }

    pub fn sub(&self, x: &TowerElement, y: &TowerElement) -> Result<TowerElement> {
        self.add(x, &self.neg(y))
    }

    pub fn mul(&self, x: &TowerElement, y: &TowerElement) -> Result<TowerElement> {
        let mut c = vec![0u64; self.0.f];
        self.mul_into(&x.coeffs, &y.coeffs, &mut c);
        self.normalize(TowerElement { coeffs: c, denom_exp: x.denom_exp + y.denom_exp })
    }

    /// p-adic valuation; `None` for zero.
    pub fn val(&self, x: &TowerElement) -> Option<i64> {
        if self.is_zero(x) {
            None
        } else {
            Some(self.val_slice(&x.coeffs) as i64 - x.denom_exp as i64)
        }
    }

    pub fn inv(&self, x: &TowerElement) -> Result<TowerElement> {
        if self.is_zero(x) {
            return Err(Error::NotInvertible);
        }
        let v = self.val_slice(&x.coeffs);
        let mut u = x.coeffs.clone();
        self.div_p_assign(&mut u, v);
        let ui = self.inv_unit_slice(&u)?;
        let shift = x.denom_exp as i64 - v as i64;
        if shift >= 0 {
            self.normalize(TowerElement { coeffs: self.scaled_up(&TowerElement { coeffs: ui, denom_exp: 0 }, shift as u32), denom_exp: 0 })
        } else {
            self.normalize(TowerElement { coeffs: ui, denom_exp: (-shift) as u32 })
        }
    }

    pub fn pow(&self, x: &TowerElement, e: i64) -> Result<TowerElement> {
        let base = if e < 0 { self.inv(x)? } else { x.clone() };
        let mut acc = self.one();
        let mut b = base;
        let mut k = e.unsigned_abs();
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &b)?;
            }
            b = self.mul(&b, &b)?;
            k >>= 1;
        }
        Ok(acc)
    }

    /// `Frob^k(x)` for the absolute Frobenius of `M / Q_p`; negative `k` allowed.
    pub fn frobenius(&self, x: &TowerElement, k: i64) -> TowerElement {
        let f = self.0.f as i64;
        let k = k.rem_euclid(f) as usize;
        let mut out = vec![0u64; self.0.f];
        self.frob_into(k, &x.coeffs, &mut out);
        TowerElement { coeffs: out, denom_exp: x.denom_exp }
    }

    /// Residue of an integral element, coefficients in `0..p`.
    pub fn residue(&self, x: &TowerElement) -> Vec<u64> {
        let p = self.p();
        x.coeffs.iter().map(|c| c % p).collect()
    }

    /// Teichmüller representative of a residue-field element given by its
    /// coordinates in the basis `1, t̄, …`.
    pub fn teichmuller(&self, residue: &[u64]) -> Result<TowerElement> {
        if residue.len() != self.0.f {
            return Err(Error::Mismatch(format!("expected {} residue coordinates", self.0.f)));
        }
        let p = self.p();
        let mut x: Vec<u64> = residue.iter().map(|c| c % p).collect();
        for _ in 0..self.precision() + 2 {
            let mut y = x.clone();
            for _ in 0..self.0.f {
                y = self.pow_slice(&y, p);
            }
            if y == x {
                return Ok(TowerElement { coeffs: x, denom_exp: 0 });
            }
            x = y;
        }
        Err(Error::NoConvergence(self.precision() as usize + 2))
    }

    /// The fixed root of unity `ω` of exact order `q^s - 1`.
    pub fn omega(&self) -> TowerElement {
        TowerElement { coeffs: self.0.omega.clone(), denom_exp: 0 }
    }

    /// `x ∈ K`, i.e. fixed by `Frob^{f_K}`.
    pub fn in_big_k(&self, x: &TowerElement) -> bool {
        self.frobenius(x, self.f_big() as i64) == *x
    }

    /// `x ∈ k`, i.e. fixed by `Frob^{f_k}`.
    pub fn in_k(&self, x: &TowerElement) -> bool {
        self.frobenius(x, self.f_k() as i64) == *x
    }

    /// Whether `x - y` vanishes modulo `p^prec` (absolute precision).
    pub fn eq_to_precision(&self, x: &TowerElement, y: &TowerElement, prec: i64) -> bool {
        match self.sub(x, y) {
            Ok(d) => match self.val(&d) {
                None => true,
                Some(v) => v >= prec,
            },
            Err(_) => false,
        }
    }

    fn find_omega(&self) -> Vec<u64> {
        let f = self.0.f;
        let p = self.p();
        let big_q = p.pow(f as u32);
        let factors = prime_factors(big_q - 1);
        let fp = self.0.fp;
        let def = &self.0.desc.def_poly;
        for n in 1..big_q {
            let mut g = vec![0u64; f];
            let mut m = n;
            for c in g.iter_mut() {
                *c = m % p;
                m /= p;
            }
            let primitive = factors.iter().all(|&r| {
                let h = fp_poly_pow(fp, &g, (big_q - 1) / r, def);
                !(h[0] == 1 && h[1..].iter().all(|&c| c == 0))
            });
            if primitive {
                // (Q - 1)/(q^s - 1) = 1 since Q = q^s.
                return self.teichmuller(&g).expect("teichmuller iteration converges").coeffs;
            }
        }
        unreachable!("finite field has a primitive element")
    }
}

fn poly_mulmod(z: Zmod, a: &[u64], b: &[u64], def: &[u64], out: &mut [u64]) {
    let f = def.len() - 1;
    let mut prod = [0u64; 2 * MAX_DEGREE];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = z.add(prod[i + j], z.mul(ai, bj));
        }
    }
    for k in (f..(2 * f).saturating_sub(1)).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        let nc = z.neg(c);
        for j in 0..f {
            if def[j] != 0 {
                prod[k - f + j] = z.add(prod[k - f + j], z.mul(nc, def[j]));
            }
        }
    }
    out.copy_from_slice(&prod[..f]);
}

fn fp_poly_pow(z: Zmod, a: &[u64], mut e: u64, def: &[u64]) -> Vec<u64> {
    let f = def.len() - 1;
    let mut acc = vec![0u64; f];
    acc[0] = 1;
    let mut base = a.to_vec();
    let mut tmp = vec![0u64; f];
    while e > 0 {
        if e & 1 == 1 {
            poly_mulmod(z, &acc, &base, def, &mut tmp);
            acc.copy_from_slice(&tmp);
        }
        poly_mulmod(z, &base, &base, def, &mut tmp);
        base.copy_from_slice(&tmp);
        e >>= 1;
    }
    acc
}

fn trim(mut a: Vec<u64>) -> Vec<u64> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn fp_poly_divrem(z: Zmod, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    if r.len() < b.len() {
        return (vec![], r);
    }
    let lead_inv = z.inv(*b.last().unwrap()).unwrap();
    let mut q = vec![0u64; r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = z.mul(*r.last().unwrap(), lead_inv);
        q[shift] = c;
        for (j, &bj) in b.iter().enumerate() {
            r[shift + j] = z.sub(r[shift + j], z.mul(c, bj));
        }
        r = trim(r);
    }
    (q, r)
}

fn fp_poly_mul(z: Zmod, a: &[u64], b: &[u64]) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = z.add(out[i + j], z.mul(x, y));
        }
    }
    trim(out)
}

fn fp_poly_sub(z: Zmod, a: &[u64], b: &[u64]) -> Vec<u64> {
    let n = a.len().max(b.len());
    let mut out = vec![0u64; n];
    for (i, o) in out.iter_mut().enumerate() {
        *o = z.sub(a.get(i).copied().unwrap_or(0), b.get(i).copied().unwrap_or(0));
    }
    trim(out)
}

/// Inverse of `a` modulo the monic polynomial `def` over `F_p`.
fn fp_poly_inverse(z: Zmod, a: &[u64], def: &[u64]) -> Option<Vec<u64>> {
    let (mut r0, mut r1) = (trim(def.to_vec()), trim(a.to_vec()));
    let (mut s0, mut s1): (Vec<u64>, Vec<u64>) = (vec![], vec![1]);
    while !r1.is_empty() {
        let (q, r) = fp_poly_divrem(z, &r0, &r1);
        let s2 = fp_poly_sub(z, &s0, &fp_poly_mul(z, &q, &s1));
        r0 = std::mem::replace(&mut r1, r);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if r0.len() != 1 {
        return None;
    }
    let c = z.inv(r0[0])?;
    let (_, s) = fp_poly_divrem(z, &s0, def);
    Some(s.iter().map(|&x| z.mul(x, c)).collect())
}

fn fp_poly_gcd(z: Zmod, a: &[u64], b: &[u64]) -> Vec<u64> {
    let (mut r0, mut r1) = (trim(a.to_vec()), trim(b.to_vec()));
    while !r1.is_empty() {
        let (_, r) = fp_poly_divrem(z, &r0, &r1);
        r0 = std::mem::replace(&mut r1, r);
    }
    r0
}

/// Rabin's irreducibility test for a monic polynomial over `F_p`.
fn is_irreducible(p: u64, def: &[u64]) -> bool {
    let f = def.len() - 1;
    if f == 1 {
        return true;
    }
    let z = Zmod::new(p);
    let mut x = vec![0u64; f];
    x[1] = 1;
    // powers[i] = x^{p^i} mod def
    let mut powers = vec![x.clone()];
    for i in 1..=f {
        let next = fp_poly_pow(z, &powers[i - 1], p, def);
        powers.push(next);
    }
    if powers[f] != x {
        return false;
    }
    prime_factors(f as u64).into_iter().all(|r| {
        let h = fp_poly_sub(z, &powers[f / r as usize], &x);
        fp_poly_gcd(z, &h, def).len() == 1
    })
}

/// Least monic irreducible polynomial of degree `f` over `F_p`, ordering
/// candidates by the base-`p` integer `Σ c_i p^i` of their lower coefficients.
fn least_irreducible(p: u64, f: usize) -> Vec<u64> {
    let mut n: u64 = 0;
    loop {
        let mut poly = vec![0u64; f + 1];
        let mut m = n;
        for c in poly.iter_mut().take(f) {
            *c = m % p;
            m /= p;
        }
        poly[f] = 1;
        if is_irreducible(p, &poly) {
            return poly;
        }
        n += 1;
    }
}

fn frobenius_matrices(data: &TowerData) -> Vec<Vec<u64>> {
    let f = data.f;
    let z = data.zm;
    let def = &data.desc.def_poly;
    let p = data.desc.p;
    let mul = |a: &[u64], b: &[u64]| {
        let mut out = vec![0u64; f];
        poly_mulmod(z, a, b, def, &mut out);
        out
    };
    let pow = |a: &[u64], mut e: u64| {
        let mut acc = vec![0u64; f];
        acc[0] = 1 % z.modulus();
        let mut b = a.to_vec();
        while e > 0 {
            if e & 1 == 1 {
                acc = mul(&acc, &b);
            }
            b = mul(&b, &b);
            e >>= 1;
        }
        acc
    };
    let mut t = vec![0u64; f];
    if f == 1 {
        t[0] = z.neg(def[0]);
    } else {
        t[1] = 1;
    }
    let eval = |coeffs: &[u64], x: &[u64]| {
        let mut acc = vec![0u64; f];
        for &c in coeffs.iter().rev() {
            acc = mul(&acc, x);
            acc[0] = z.add(acc[0], c);
        }
        acc
    };
    let deriv: Vec<u64> = (1..def.len()).map(|i| z.mul(i as u64 % z.modulus(), def[i])).collect();
    // Hensel-lift the root of P congruent to t^p.
    let mut x = pow(&t, p);
    let fpz = Zmod::new(p);
    for _ in 0..=data.desc.n + 1 {
        let px = eval(def, &x);
        if px.iter().all(|&c| c == 0) {
            break;
        }
        let dx = eval(&deriv, &x);
        let res: Vec<u64> = dx.iter().map(|c| c % p).collect();
        let inv0 = fp_poly_inverse(fpz, &res, def).expect("P is separable mod p");
        let mut y = vec![0u64; f];
        y[..inv0.len()].copy_from_slice(&inv0);
        for _ in 0..64 {
            let dy = mul(&dx, &y);
            let mut corr = dy.iter().map(|&c| z.neg(c)).collect::<Vec<_>>();
            corr[0] = z.add(corr[0], 2 % z.modulus());
            let next = mul(&y, &corr);
            if next == y {
                break;
            }
            y = next;
        }
        let step = mul(&px, &y);
        for (xi, si) in x.iter_mut().zip(step) {
            *xi = z.sub(*xi, si);
        }
    }
    let mut sigma = vec![0u64; f * f];
    let mut power = vec![0u64; f];
    power[0] = 1 % z.modulus();
    for j in 0..f {
        sigma[j * f..(j + 1) * f].copy_from_slice(&power);
        power = mul(&power, &x);
    }
    let mut mats = vec![identity(f, z.modulus())];
    for k in 1..f {
        let prev = &mats[k - 1];
        let mut m = vec![0u64; f * f];
        for j in 0..f {
            for l in 0..f {
                let c = prev[j * f + l];
                if c == 0 {
                    continue;
                }
                for i in 0..f {
                    m[j * f + i] = z.add(m[j * f + i], z.mul(c, sigma[l * f + i]));
                }
            }
        }
        mats.push(m);
    }
    mats
}

fn identity(f: usize, m: u64) -> Vec<u64> {
    let mut id = vec![0u64; f * f];
    for j in 0..f {
        id[j * f + j] = 1 % m;
    }
    id
}
