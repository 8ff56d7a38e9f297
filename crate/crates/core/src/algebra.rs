//! The cyclic division algebra `D = (M/K, σ, p)` of index `s` and Hasse
//! invariant `r/s`, together with the extension of `τ ∈ Gal(K/k)` to `D`.
//!
//! Elements are `π_D^{-b} · Σ x_i π_D^i` with integral `x_i ∈ O_M`, subject to
//! `π_D z π_D^{-1} = σ(z)` and `π_D^s = p`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::comm::{charpoly, IntRing};
use crate::error::{Error, Result};
use crate::tower::{Tower, TowerDescriptor, TowerElement};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlgebraDescriptor {
    pub tower: TowerDescriptor,
    pub r: usize,
    pub tau_a: usize,
    pub tau_c: TowerElement,
}

/// `π_D^{-pi_denom} · Σ coeffs[i] π_D^i`; coefficients are integral.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DElement {
    pub pi_denom: u32,
    pub coeffs: Vec<TowerElement>,
}

/// Outcome of the bounded search for an extension of `τ` to `D`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauSearchReport {
    pub candidates_tested: usize,
    pub valid: Vec<(usize, TowerElement)>,
}

struct AlgebraData {
    tower: Tower,
    desc: AlgebraDescriptor,
    sigma: usize,
    tau_a: usize,
    c_one: bool,
    /// `c σ(c) ⋯ σ^{i-1}(c)` for `i < s`.
    c_pows: Vec<Vec<u64>>,
}

#[derive(Clone)]
pub struct Algebra(Arc<AlgebraData>);

impl std::fmt::Debug for Algebra {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("Algebra").field(&self.0.desc).finish()
    }
}

impl PartialEq for Algebra {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.desc == other.0.desc
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The Frobenius exponent `a = f_k + j f_K` (`0 ≤ j < s`) with `s | 1 + j d`.
fn tau_exponent(tower: &Tower) -> usize {
    let (s, d) = (tower.s(), tower.d());
    let j = (0..s).find(|j| (1 + j * d) % s == 0).expect("d is prime to s");
    (tower.f_k() + j * tower.f_big()) % tower.f_m()
}

/// Searches `c ∈ teich(F_q^×) · (1 + p·teich(F_{q_k}))` and the `s`
/// exponents `a ≡ f_k (mod f_K)` for pairs making `τ` an automorphism of
/// order `d` of `D`.
pub fn extend_tau(tower: &Tower, r: usize) -> Result<TauSearchReport> {
    let (s, f) = (tower.s(), tower.f_m());
    let big_q = (tower.q() as u128).pow(s as u32) as u64;
    let omega = tower.omega();
    let w_k = tower.pow(&omega, ((big_q - 1) / (tower.q() - 1)) as i64)?;
    let w_kk = tower.pow(&omega, ((big_q - 1) / (tower.q_k() - 1)) as i64)?;
    let mut lifts = vec![tower.zero()];
    for i in 0..tower.q_k() - 1 {
        lifts.push(tower.pow(&w_kk, i as i64)?);
    }
    let sigma = (tower.f_big() * r) % f;
    let p = tower.from_int(tower.p() as i64);
    let mut tested = 0;
    let mut valid = Vec::new();
    for j in 0..s {
        let a = (tower.f_k() + j * tower.f_big()) % f;
        for i in 0..tower.q() - 1 {
            let base = tower.pow(&w_k, i as i64)?;
            for l in &lifts {
                let c = tower.mul(&base, &tower.add(&tower.one(), &tower.mul(&p, l)?)?)?;
                tested += 1;
                if tau_axioms_hold(tower, sigma, a, &c)? {
                    valid.push((a, c));
                }
            }
        }
    }
    Ok(TauSearchReport { candidates_tested: tested, valid })
}

fn tau_axioms_hold(tower: &Tower, sigma: usize, a: usize, c: &TowerElement) -> Result<bool> {
    let (s, d, f) = (tower.s(), tower.d(), tower.f_m());
    let omega = tower.omega();
    let big_q = (tower.q() as u128).pow(s as u32) as i64;
    let w_k = tower.pow(&omega, (big_q - 1) / (tower.q() as i64 - 1))?;
    // restriction to K is Frob^{f_k}
    if tower.frobenius(&w_k, a as i64) != tower.frobenius(&w_k, tower.f_k() as i64) {
        return Ok(false);
    }
    // τ^d = id on M, and of exact order d on K
    if tower.frobenius(&omega, (a * d) as i64) != omega {
        return Ok(false);
    }
    if d > 1 && tower.frobenius(&w_k, (a * (d / tower.p() as usize)) as i64) == w_k {
        return Ok(false);
    }
    // σ τ = τ σ on M
    let st = tower.frobenius(&tower.frobenius(&omega, a as i64), sigma as i64);
    let ts = tower.frobenius(&tower.frobenius(&omega, sigma as i64), a as i64);
    if st != ts {
        return Ok(false);
    }
    if tower.val(c) != Some(0) {
        return Ok(false);
    }
    // τ(π_D)^s = τ(p) = p, i.e. N_σ(c) = 1
    let mut norm = tower.one();
    for i in 0..s {
        norm = tower.mul(&norm, &tower.frobenius(c, ((i * sigma) % f) as i64))?;
    }
    if norm != tower.one() {
        return Ok(false);
    }
    // τ^d(π_D) = π_D
    let mut prod = tower.one();
    for i in 0..d {
        prod = tower.mul(&prod, &tower.frobenius(c, ((i * a) % f) as i64))?;
    }
    Ok(prod == tower.one())
}

/// Builds `D` with Hasse invariant `r/s`, extending `τ` by [`extend_tau`].
pub fn make_algebra(tower: &Tower, r: usize) -> Result<Algebra> {
    let s = tower.s();
    if r == 0 || r > s || gcd(r, s) != 1 {
        return Err(Error::BadParameters(format!("r = {r} must satisfy 1 ≤ r ≤ s and gcd(r, s) = 1")));
    }
    let (a, c) = if tower.d() == 1 {
        (tau_exponent(tower), tower.one())
    } else {
        let report = extend_tau(tower, r)?;
        match report.valid.len() {
            0 => return Err(Error::NoValidExtension),
            1 => report.valid.into_iter().next().unwrap(),
            n => return Err(Error::AmbiguousExtension { count: n }),
        }
    };
    Algebra::build(tower.clone(), AlgebraDescriptor { tower: tower.descriptor().clone(), r, tau_a: a, tau_c: c })
}

impl Algebra {
    pub fn from_descriptor(desc: &AlgebraDescriptor) -> Result<Algebra> {
        let tower = Tower::from_descriptor(&desc.tower)?;
        let s = tower.s();
        if desc.r == 0 || desc.r > s || gcd(desc.r, s) != 1 {
            return Err(Error::BadParameters(format!("r = {} is not a valid Hasse numerator", desc.r)));
        }
        let c = tower.normalize(desc.tau_c.clone())?;
        let sigma = (tower.f_big() * desc.r) % tower.f_m();
        if desc.tau_a >= tower.f_m() || !tau_axioms_hold(&tower, sigma, desc.tau_a, &c)? {
            return Err(Error::BadParameters("tau data fail the automorphism axioms".into()));
        }
        Algebra::build(tower, desc.clone())
    }

    fn build(tower: Tower, desc: AlgebraDescriptor) -> Result<Algebra> {
        let (s, f) = (tower.s(), tower.f_m());
        let sigma = (tower.f_big() * desc.r) % f;
        let c = desc.tau_c.coeffs.clone();
        let mut c_pows = vec![tower.int_slice(1)];
        for i in 1..s {
            let mut next = vec![0; f];
            let mut sc = vec![0; f];
            tower.frob_into((i - 1) * sigma, &c, &mut sc);
            tower.mul_into(&c_pows[i - 1], &sc, &mut next);
            c_pows.push(next);
        }
        let c_one = c == tower.int_slice(1);
        Ok(Algebra(Arc::new(AlgebraData { tau_a: desc.tau_a, tower, desc, sigma, c_one, c_pows })))
    }

    pub fn descriptor(&self) -> &AlgebraDescriptor {
        &self.0.desc
    }
    pub fn tower(&self) -> &Tower {
        &self.0.tower
    }
    pub fn s(&self) -> usize {
        self.0.tower.s()
    }
    pub fn r(&self) -> usize {
        self.0.desc.r
    }
    /// Frobenius exponent of `σ` on `M`.
    pub fn sigma_exponent(&self) -> usize {
        self.0.sigma
    }
    /// Frobenius exponent of `τ` on `M`.
    pub fn tau_exponent(&self) -> usize {
        self.0.tau_a
    }
    pub(crate) fn tau_c_is_one(&self) -> bool {
        self.0.c_one
    }
    /// Length `s · f_M` of an integral coefficient block.
    pub(crate) fn width(&self) -> usize {
        self.s() * self.0.tower.f_m()
    }

    // ---- integral kernels; an integral element is a flat block of s·f_M residues ----

    pub(crate) fn int_one(&self) -> Vec<u64> {
        let mut v = vec![0; self.width()];
        v[0] = 1 % self.0.tower.modulus();
        v
    }

    pub(crate) fn mul_int(&self, x: &[u64], y: &[u64], out: &mut [u64]) {
        out.iter_mut().for_each(|o| *o = 0);
        self.mul_add_int(x, y, out);
    }

    /// `out += x · y`.
    pub(crate) fn mul_add_int(&self, x: &[u64], y: &[u64], out: &mut [u64]) {
        let t = &self.0.tower;
        let (s, f) = (self.s(), t.f_m());
        let p = t.p();
        let mut sy = [0u64; crate::tower::MAX_DEGREE];
        let mut prod = [0u64; crate::tower::MAX_DEGREE];
        for j in 0..s {
            let yj = &y[j * f..(j + 1) * f];
            if Tower::is_zero_slice(yj) {
                continue;
            }
            for i in 0..s {
                let xi = &x[i * f..(i + 1) * f];
                if Tower::is_zero_slice(xi) {
                    continue;
                }
                t.frob_into(i * self.0.sigma, yj, &mut sy[..f]);
                t.mul_into(xi, &sy[..f], &mut prod[..f]);
                let mut k = i + j;
                if k >= s {
                    k -= s;
                    t.scale_assign(&mut prod[..f], p);
                }
                t.add_assign(&mut out[k * f..(k + 1) * f], &prod[..f]);
            }
        }
    }

    /// `π_D^k x π_D^{-k}`.
    pub(crate) fn conj_pi_int(&self, x: &[u64], k: i64, out: &mut [u64]) {
        let t = &self.0.tower;
        let f = t.f_m() as i64;
        let e = (k * self.0.sigma as i64).rem_euclid(f) as usize;
        for (xi, oi) in x.chunks(f as usize).zip(out.chunks_mut(f as usize)) {
            t.frob_into(e, xi, oi);
        }
    }

    /// `π_D^k x`.
    pub(crate) fn left_mul_pi_int(&self, x: &[u64], k: u32) -> Vec<u64> {
        let mut cur = x.to_vec();
        for _ in 0..k {
            cur = self.shift_pi(&cur, true);
        }
        cur
    }

    /// `x π_D^k`.
    pub(crate) fn right_mul_pi_int(&self, x: &[u64], k: u32) -> Vec<u64> {
        let mut cur = x.to_vec();
        for _ in 0..k {
            cur = self.shift_pi(&cur, false);
        }
        cur
    }

    fn shift_pi(&self, x: &[u64], left: bool) -> Vec<u64> {
        let t = &self.0.tower;
        let (s, f) = (self.s(), t.f_m());
        let mut out = vec![0; s * f];
        for i in 0..s {
            let xi = &x[i * f..(i + 1) * f];
            let k = (i + 1) % s;
            let dst = &mut out[k * f..(k + 1) * f];
            if left {
                t.frob_into(self.0.sigma, xi, dst);
            } else {
                dst.copy_from_slice(xi);
            }
            if i + 1 == s {
                t.scale_assign(dst, t.p());
            }
        }
        out
    }

    /// `y` with `π_D y = x`, assuming `x_0 ≡ 0 (mod p)`. The top p-adic digit of
    /// the moved coefficient is lost.
    pub(crate) fn left_div_pi_int(&self, x: &[u64]) -> Vec<u64> {
        let t = &self.0.tower;
        let (s, f) = (self.s(), t.f_m());
        let inv = (f as i64 - self.0.sigma as i64).rem_euclid(f as i64) as usize;
        let mut out = vec![0; s * f];
        for i in 1..s {
            t.frob_into(inv, &x[i * f..(i + 1) * f], &mut out[(i - 1) * f..i * f]);
        }
        let mut x0 = x[..f].to_vec();
        t.div_p_assign(&mut x0, 1);
        t.frob_into(inv, &x0, &mut out[(s - 1) * f..]);
        out
    }

    /// `v_D` of an integral element; `None` for zero.
    pub(crate) fn val_d_int(&self, x: &[u64]) -> Option<u32> {
        let t = &self.0.tower;
        let (s, f) = (self.s() as u32, t.f_m());
        x.chunks(f)
            .enumerate()
            .filter(|(_, c)| !Tower::is_zero_slice(c))
            .map(|(i, c)| s * t.val_slice(c) + i as u32)
            .min()
    }

    pub(crate) fn is_unit_int(&self, x: &[u64]) -> bool {
        self.0.tower.is_unit_slice(&x[..self.0.tower.f_m()])
    }

    /// `τ(x)` for integral `x`.
    pub(crate) fn tau_int(&self, x: &[u64], out: &mut [u64]) {
        let t = &self.0.tower;
        let f = t.f_m();
        if self.0.c_one {
            for (xi, oi) in x.chunks(f).zip(out.chunks_mut(f)) {
                t.frob_into(self.0.tau_a, xi, oi);
            }
            return;
        }
        let mut tmp = vec![0; f];
        for (i, (xi, oi)) in x.chunks(f).zip(out.chunks_mut(f)).enumerate() {
            t.frob_into(self.0.tau_a, xi, &mut tmp);
            t.mul_into(&tmp, &self.0.c_pows[i], oi);
        }
    }

    /// `φ(x)` for integral `x`, row-major `s × s` entries of length `f_M`.
    pub(crate) fn phi_int(&self, x: &[u64]) -> Vec<Vec<Vec<u64>>> {
        let t = &self.0.tower;
        let (s, f) = (self.s(), t.f_m());
        (0..s)
            .map(|r| {
                (0..s)
                    .map(|c| {
                        let i = (c + s - r) % s;
                        let mut e = vec![0; f];
                        t.frob_into(r * self.0.sigma, &x[i * f..(i + 1) * f], &mut e);
                        if c < r {
                            t.scale_assign(&mut e, t.p());
                        }
                        e
                    })
                    .collect()
            })
            .collect()
    }

    /// Writes `x` as `p^{-e} · Z` with `Z` integral, returning `(Z, e)`.
    pub(crate) fn split_denominator(&self, x: &DElement) -> (Vec<u64>, u32) {
        let s = self.s() as u32;
        let e = x.pi_denom.div_ceil(s);
        (self.left_mul_pi_int(&self.flat(x), s * e - x.pi_denom), e)
    }

    pub(crate) fn flat(&self, x: &DElement) -> Vec<u64> {
        x.coeffs.iter().flat_map(|c| c.coeffs.iter().copied()).collect()
    }

    /// Canonicalises `π_D^{-b} X`.
    pub(crate) fn from_flat(&self, mut x: Vec<u64>, mut b: u32) -> Result<DElement> {
        let t = &self.0.tower;
        let f = t.f_m();
        if Tower::is_zero_slice(&x) {
            b = 0;
        }
        while b > 0 && !t.is_unit_slice(&x[..f]) {
            x = self.left_div_pi_int(&x);
            b -= 1;
        }
        if b as u64 >= self.s() as u64 * t.precision() as u64 {
            return Err(Error::PrecisionExhausted(format!("π_D-denominator {b}")));
        }
        Ok(DElement {
            pi_denom: b,
            coeffs: x.chunks(f).map(|c| TowerElement { coeffs: c.to_vec(), denom_exp: 0 }).collect(),
        })
    }

    // ---- public element API ----

    pub fn zero(&self) -> DElement {
        self.from_flat(vec![0; self.width()], 0).unwrap()
    }
    pub fn one(&self) -> DElement {
        self.from_flat(self.int_one(), 0).unwrap()
    }
    pub fn pi(&self) -> DElement {
        let mut x = vec![0; self.width()];
        if self.s() == 1 {
            x[0] = self.0.tower.p();
        } else {
            x[self.0.tower.f_m()] = 1;
        }
        self.from_flat(x, 0).unwrap()
    }

    /// Embeds a (possibly fractional) element of `M` as the constant coefficient.
    pub fn from_tower(&self, z: &TowerElement) -> Result<DElement> {
        self.from_parts(std::slice::from_ref(z))
    }

    /// `Σ coeffs[i] π_D^i` with coefficients in `M` (denominators allowed); missing
    /// trailing coefficients are zero.
    pub fn from_parts(&self, coeffs: &[TowerElement]) -> Result<DElement> {
        let t = &self.0.tower;
        let (s, f) = (self.s(), t.f_m());
        if coeffs.len() > s {
            return Err(Error::Mismatch(format!("at most {s} coefficients expected")));
        }
        let e = coeffs.iter().map(|c| c.denom_exp).max().unwrap_or(0);
        let mut x = vec![0; s * f];
        for (i, c) in coeffs.iter().enumerate() {
            let c = t.normalize(c.clone())?;
            let mut v = c.coeffs.clone();
            t.scale_assign(&mut v, t.zm().pow(t.p(), (e - c.denom_exp) as u64));
            x[i * f..(i + 1) * f].copy_from_slice(&v);
        }
        self.from_flat(x, e * s as u32)
    }

    /// Checks shape and canonical form of an externally supplied element.
    pub fn normalize(&self, x: DElement) -> Result<DElement> {
        if x.coeffs.len() != self.s() {
            return Err(Error::Mismatch(format!("expected {} coefficients", self.s())));
        }
        let y = self.from_parts(&x.coeffs)?;
        self.from_flat(self.flat(&y), y.pi_denom + x.pi_denom)
    }

    pub fn is_zero(&self, x: &DElement) -> bool {
        x.coeffs.iter().all(|c| Tower::is_zero_slice(&c.coeffs))
    }

    pub fn d_add(&self, x: &DElement, y: &DElement) -> Result<DElement> {
        let (x, y) = if x.pi_denom >= y.pi_denom { (x, y) } else { (y, x) };
        let mut a = self.flat(x);
        let b = self.left_mul_pi_int(&self.flat(y), x.pi_denom - y.pi_denom);
        self.0.tower.add_assign(&mut a, &b);
        self.from_flat(a, x.pi_denom)
    }

    pub fn d_neg(&self, x: &DElement) -> DElement {
        let mut a = self.flat(x);
        self.0.tower.neg_assign(&mut a);
        self.from_flat(a, x.pi_denom).unwrap()
    }

    pub fn d_sub(&self, x: &DElement, y: &DElement) -> Result<DElement> {
        self.d_add(x, &self.d_neg(y))
    }

    pub fn d_mul(&self, x: &DElement, y: &DElement) -> Result<DElement> {
        let w = self.width();
        let mut cx = vec![0; w];
        self.conj_pi_int(&self.flat(x), y.pi_denom as i64, &mut cx);
        let mut out = vec![0; w];
        self.mul_int(&cx, &self.flat(y), &mut out);
        self.from_flat(out, x.pi_denom + y.pi_denom)
    }

    /// `v_D(x)` with `v_D(π_D) = 1`.
    pub fn valuation_d(&self, x: &DElement) -> Result<i64> {
        let v = self.val_d_int(&self.flat(x)).ok_or(Error::ZeroElement)?;
        Ok(v as i64 - x.pi_denom as i64)
    }

    /// `x^{-1}` by solving `φ(u)^T z = e_0` for the unit part `u` of `x`.
    pub fn d_inv(&self, x: &DElement) -> Result<DElement> {
        let t = &self.0.tower;
        let s = self.s();
        let mut u = self.flat(x);
        let m = self.val_d_int(&u).ok_or(Error::NotInvertible)?;
        for _ in 0..m {
            u = self.left_div_pi_int(&u);
        }
        let phi = self.phi_int(&u);
        let a: Vec<Vec<TowerElement>> = (0..s)
            .map(|r| (0..s).map(|c| TowerElement { coeffs: phi[c][r].clone(), denom_exp: 0 }).collect())
            .collect();
        let mut rhs = vec![t.zero(); s];
        rhs[0] = t.one();
        let z = solve_tower(t, a, rhs)?;
        let inv_u = self.from_parts(&z)?;
        // x = π^{-b} π^m u, so x^{-1} = u^{-1} π^{b-m}
        let shift = x.pi_denom as i64 - m as i64;
        if shift >= 0 {
            let (zi, e) = self.split_denominator(&inv_u);
            self.from_flat(self.right_mul_pi_int(&zi, shift as u32), e * s as u32)
        } else {
            let k = (-shift) as u32;
            let mut c = vec![0; self.width()];
            let (zi, e) = self.split_denominator(&inv_u);
            self.conj_pi_int(&zi, k as i64, &mut c);
            self.from_flat(c, k + e * s as u32)
        }
    }

    /// `φ(x)` as an `s × s` matrix over `M`.
    pub fn split_phi(&self, x: &DElement) -> Result<Vec<Vec<TowerElement>>> {
        let t = &self.0.tower;
        let (z, e) = self.split_denominator(x);
        self.phi_int(&z)
            .into_iter()
            .map(|row| row.into_iter().map(|c| t.normalize(TowerElement { coeffs: c, denom_exp: e })).collect())
            .collect()
    }

    /// Reduced characteristic polynomial, constant term first, monic of degree `s`.
    pub fn reduced_char_poly(&self, x: &DElement) -> Result<Vec<TowerElement>> {
        let t = &self.0.tower;
        let s = self.s();
        let (z, e) = self.split_denominator(x);
        let cp = charpoly(&IntRing(t), &self.phi_int(&z));
        let out: Vec<TowerElement> = cp
            .into_iter()
            .enumerate()
            .map(|(k, c)| t.normalize(TowerElement { coeffs: c, denom_exp: e * (s - k) as u32 }))
            .collect::<Result<_>>()?;
        if out.iter().any(|c| !t.in_big_k(c)) {
            return Err(Error::CoefficientNotInBaseField);
        }
        Ok(out)
    }

    /// `nr(x) = det φ(x) ∈ K`.
    pub fn reduced_norm_local(&self, x: &DElement) -> Result<TowerElement> {
        let t = &self.0.tower;
        let cp = self.reduced_char_poly(x)?;
        Ok(if self.s() % 2 == 1 { t.neg(&cp[0]) } else { cp[0].clone() })
    }

    /// `τ(x)`.
    pub fn tau(&self, x: &DElement) -> Result<DElement> {
        let mut out = vec![0; self.width()];
        self.tau_int(&self.flat(x), &mut out);
        if x.pi_denom == 0 {
            return self.from_flat(out, 0);
        }
        if self.0.c_one {
            return self.from_flat(out, x.pi_denom);
        }
        let mut tp = vec![0; self.width()];
        self.tau_int(&self.flat(&self.pi()), &mut tp);
        let tpi = self.from_flat(tp, 0)?;
        let mut tpb = self.one();
        for _ in 0..x.pi_denom {
            tpb = self.d_mul(&tpb, &tpi)?;
        }
        self.d_mul(&self.d_inv(&tpb)?, &self.from_flat(out, 0)?)
    }

    /// `σ`, extended to `D` as conjugation by `π_D`.
    pub fn conj_pi(&self, x: &DElement, k: i64) -> Result<DElement> {
        let mut out = vec![0; self.width()];
        self.conj_pi_int(&self.flat(x), k, &mut out);
        self.from_flat(out, x.pi_denom)
    }

    /// Whether `δ^d = (τ - id)^d` maps every basis element `t^j π_D^i` into `p O_D`.
    pub fn delta_nilpotency_check(&self) -> bool {
        let t = &self.0.tower;
        let (f, d) = (t.f_m(), t.d());
        let w = self.s() * f;
        (0..w).all(|idx| {
            let mut x = vec![0; w];
            x[idx] = 1;
            for _ in 0..d {
                let mut tx = vec![0; w];
                self.tau_int(&x, &mut tx);
                t.sub_assign(&mut tx, &x);
                x = tx;
            }
            x.iter().all(|&c| c % t.p() == 0)
        })
    }
}

/// Solves `a z = b` over `M` by elimination with minimal-valuation pivots.
fn solve_tower(t: &Tower, mut a: Vec<Vec<TowerElement>>, mut b: Vec<TowerElement>) -> Result<Vec<TowerElement>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n)
            .filter_map(|r| t.val(&a[r][col]).map(|v| (v, r)))
            .min()
            .ok_or(Error::NotInvertible)?
            .1;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = t.inv(&a[col][col])?;
        for r in col + 1..n {
            if t.is_zero(&a[r][col]) {
                continue;
            }
            let factor = t.mul(&a[r][col], &inv)?;
            for c in col..n {
                let v = t.mul(&factor, &a[col][c])?;
                a[r][c] = t.sub(&a[r][c], &v)?;
            }
            let v = t.mul(&factor, &b[col])?;
            b[r] = t.sub(&b[r], &v)?;
        }
    }
    let mut z = vec![t.zero(); n];
    for r in (0..n).rev() {
        let mut acc = b[r].clone();
        for c in r + 1..n {
            acc = t.sub(&acc, &t.mul(&a[r][c], &z[c])?)?;
        }
        z[r] = t.mul(&acc, &t.inv(&a[r][r])?)?;
    }
    Ok(z)
}
