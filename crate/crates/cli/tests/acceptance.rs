//! Acceptance run: one pass/fail line per criterion.
//!
//! Criteria whose statement covers algebras with `d > 1` report those classes
//! separately. The process fails when any answer is wrong, or when a `d = 1`
//! class does not fully pass.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use skewdet::algebra::DElement;
use skewdet::instance::{Instance, InstanceFile, Overrides};
use skewdet::linalg::{dieudonne_det, DetNormalForm, ElemOp, LaurentEntry, SkewMatrix};
use skewdet::norm::{
    dimension_reduce, monic_norm_check, nr_det_compat, reduced_norm_center, CenterFraction, MonicReport,
};
use skewdet::random::Sampler;
use skewdet::{extend_tau, make_algebra, make_tower, selftest, Error, SkewRing, SkewSeries};

type Class = (u64, usize, usize, usize, u32, usize);

const D1: [Class; 3] = [(5, 1, 1, 1, 10, 10), (5, 1, 1, 2, 8, 8), (3, 2, 1, 2, 6, 6)];
const D3: [Class; 2] = [(3, 1, 3, 1, 8, 9), (3, 1, 3, 2, 6, 12)];

fn ring(c: Class) -> SkewRing {
    let t = make_tower(c.0, c.1, c.2, c.3, c.4).unwrap();
    SkewRing::new(&make_algebra(&t, 1).unwrap(), c.5).unwrap()
}

fn label(c: Class) -> String {
    format!("({},{},{},{})", c.0, c.1, c.2, c.3)
}

/// Case counts for one class.
#[derive(Default)]
struct Tally {
    pass: usize,
    wrong: usize,
    /// Inputs the library declined or flagged with an error, by kind.
    declined: BTreeMap<&'static str, usize>,
    first: Option<String>,
}

fn declined_kind(e: &Error) -> Option<&'static str> {
    Some(match e {
        Error::NotPreparable(_) => "not preparable",
        Error::ReductionStalled(_) => "stalled",
        Error::NotUnit => "not a unit",
        Error::PrecisionExhausted(_) => "precision exhausted",
        Error::SingularAtPrecision => "singular at precision",
        Error::WPositiveViolation(_) => "negative w",
        Error::Inconsistent(_) => "inconsistency detected",
        Error::NotGaloisInvariant => "norm not Galois invariant",
        _ => return None,
    })
}

impl Tally {
    fn add(&mut self, r: Result<bool, Error>, what: &str) {
        match r {
            Ok(true) => self.pass += 1,
            Ok(false) => {
                self.wrong += 1;
                self.first.get_or_insert_with(|| what.to_string());
            }
            Err(e) => match declined_kind(&e) {
                Some(k) => *self.declined.entry(k).or_default() += 1,
                None => {
                    self.wrong += 1;
                    self.first.get_or_insert_with(|| format!("{what}: {e}"));
                }
            },
        }
    }

    fn total(&self) -> usize {
        self.pass + self.wrong + self.declined.values().sum::<usize>()
    }

    fn ok(&self) -> bool {
        self.wrong == 0 && self.declined.is_empty()
    }

    fn summary(&self) -> String {
        let mut s = format!("{}/{}", self.pass, self.total());
        for (k, n) in &self.declined {
            write!(s, " ({n} {k})").unwrap();
        }
        if let Some(f) = &self.first {
            write!(s, " [first wrong: {f}]").unwrap();
        }
        s
    }
}

struct Verdict {
    /// The criterion as stated.
    pass: bool,
    /// No silent wrong answer anywhere and every `d = 1` class passed.
    gate: bool,
    detail: String,
}

fn by_class(parts: Vec<(Class, Tally)>) -> Verdict {
    let pass = parts.iter().all(|(_, t)| t.ok());
    let gate = parts.iter().all(|(c, t)| t.wrong == 0 && (c.2 > 1 || t.ok()));
    let detail = parts.iter().map(|(c, t)| format!("{} {}", label(*c), t.summary())).collect::<Vec<_>>().join("; ");
    Verdict { pass, gate, detail }
}

// ---------------------------------------------------------------------------
// Commutative reference over Z/p^N[[X]]

struct Zp {
    p: u128,
    n: u32,
    m: u128,
}

impl Zp {
    fn new(p: u64, n: u32) -> Self {
        Zp { p: p as u128, n, m: (p as u128).pow(n) }
    }

    fn mul(&self, a: u128, b: u128) -> u128 {
        a * b % self.m
    }

    fn sub(&self, a: u128, b: u128) -> u128 {
        (a + self.m - b) % self.m
    }

    fn inv(&self, a: u128) -> u128 {
        let (mut r0, mut r1) = (self.m as i128, a as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        assert_eq!(r0, 1, "not a unit");
        t0.rem_euclid(self.m as i128) as u128
    }

    fn val(&self, mut a: u128) -> u32 {
        if a == 0 {
            return self.n;
        }
        let mut v = 0;
        while a % self.p == 0 {
            a /= self.p;
            v += 1;
        }
        v
    }

    fn pmul(&self, a: &[u128], b: &[u128], len: usize) -> Vec<u128> {
        let mut out = vec![0; len];
        for (i, &x) in a.iter().enumerate().take(len) {
            for (j, &y) in b.iter().enumerate().take(len - i) {
                out[i + j] = (out[i + j] + x * y) % self.m;
            }
        }
        out
    }

    fn psub(&self, a: &[u128], b: &[u128]) -> Vec<u128> {
        let n = a.len().max(b.len());
        (0..n).map(|i| self.sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0))).collect()
    }

    fn inv_series(&self, u: &[u128], len: usize) -> Vec<u128> {
        let v0 = self.inv(u[0]);
        let mut v = vec![0u128; len];
        v[0] = v0;
        for k in 1..len {
            let mut s = 0;
            for j in 1..=k.min(u.len() - 1) {
                s = (s + u[j] * v[k - j]) % self.m;
            }
            v[k] = self.mul(self.sub(0, s), v0);
        }
        v
    }

    /// `f = E · F` with `E` a unit and `F` distinguished, for a polynomial `f`;
    /// both truncated to `len`.
    fn prepare(&self, f: &[u128], len: usize) -> (Vec<u128>, Vec<u128>) {
        let e = f.iter().position(|&c| c % self.p != 0).expect("finite reduced order");
        if e == 0 {
            let mut one = vec![0; len];
            one[0] = 1;
            return (f[..len].to_vec(), one);
        }
        let big = len + e * (self.n as usize + 2);
        let mut fp = f.to_vec();
        fp.resize(big, 0);
        let mut cap_f = vec![0u128; e + 1];
        cap_f[e] = 1;
        let mut cap_e = fp[e..].to_vec();
        cap_e.resize(big, 0);
        for _ in 0..=self.n {
            let delta = self.psub(&fp, &self.pmul(&cap_f, &cap_e, big));
            let e_inv = self.inv_series(&cap_e, e);
            let df = self.pmul(&delta, &e_inv, e);
            let rest = self.psub(&delta, &self.pmul(&cap_e, &df, big));
            assert!(rest[..e].iter().all(|&c| c == 0));
            for i in 0..e {
                cap_f[i] = (cap_f[i] + df[i]) % self.m;
            }
            for i in 0..big - e {
                cap_e[i] = (cap_e[i] + rest[i + e]) % self.m;
            }
        }
        cap_f.resize(len, 0);
        cap_e.truncate(len);
        (cap_e, cap_f)
    }

    /// Polynomial long division by a monic `d`.
    fn long_div(&self, g: &[u128], d: &[u128]) -> (Vec<u128>, Vec<u128>) {
        let e = d.iter().rposition(|&c| c != 0).unwrap();
        let mut r = g.to_vec();
        let mut q = vec![0u128; g.len()];
        for k in (e..g.len()).rev() {
            let c = r[k];
            if c == 0 {
                continue;
            }
            q[k - e] = c;
            for j in 0..=e {
                r[k - e + j] = self.sub(r[k - e + j], self.mul(c, d[j]));
            }
        }
        (q, r)
    }

    fn det(&self, a: &[Vec<Vec<u128>>], len: usize) -> Vec<u128> {
        let n = a.len();
        if n == 1 {
            return a[0][0][..len].to_vec();
        }
        let mut acc = vec![0u128; len];
        for j in 0..n {
            let minor: Vec<Vec<Vec<u128>>> =
                a[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect()).collect();
            let term = self.pmul(&a[0][j], &self.det(&minor, len), len);
            acc = if j % 2 == 0 {
                acc.iter().zip(&term).map(|(x, y)| (x + y) % self.m).collect()
            } else {
                self.psub(&acc, &term)
            };
        }
        acc
    }
}

fn to_poly(g: &SkewSeries) -> Vec<u128> {
    g.coeffs()
        .iter()
        .map(|c| {
            assert_eq!(c.pi_denom, 0);
            assert_eq!(c.coeffs.len(), 1);
            assert_eq!(c.coeffs[0].denom_exp, 0);
            c.coeffs[0].coeffs[0] as u128
        })
        .collect()
}

fn eq_mod(a: &[u128], b: &[u128], pk: u128) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x % pk == y % pk)
}

fn criterion_1() -> Verdict {
    let c: Class = (5, 1, 1, 1, 16, 16);
    let r = ring(c);
    let z = Zp::new(5, 16);
    let m = 16;
    let mut smp = Sampler::new(101);
    let mut t = [Tally::default(), Tally::default(), Tally::default(), Tally::default(), Tally::default()];
    let mut f_exact = 0;
    let mut min_prec = 16;
    for i in 0..500 {
        let (a, b) = (smp.series(&r, m - 1), smp.series(&r, m - 1));
        t[0].add(Ok(to_poly(&a.mul(&b)) == z.pmul(&to_poly(&a), &to_poly(&b), m)), "mul");

        let e = smp.rng().gen_range(0..=4);
        let f = smp.series_with_order(&r, e, m - 1);
        let fp = to_poly(&f);
        let (ce, cf) = z.prepare(&fp, m);
        t[1].add(f.weierstrass_prepare().map(|(eps, ff)| to_poly(&eps) == ce && to_poly(&ff) == cf), "prepare");

        let g = smp.series(&r, m - 1);
        let (q0, rem) = z.long_div(&to_poly(&g), &cf);
        let q = z.pmul(&q0, &z.inv_series(&ce, m), m);
        t[2].add(f.weierstrass_divide(&g).map(|(qq, rr)| to_poly(&qq) == q && to_poly(&rr) == rem), "divide");

        let n = if i % 3 == 0 { 3 } else { 2 };
        let mat = if i % 2 == 0 { smp.matrix_deep(&r, n, 3) } else { smp.matrix(&r, n, 3) };
        let polys: Vec<Vec<Vec<u128>>> = mat
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| match x.split_content() {
                        Some((v, g)) => to_poly(&g.left_mul_pi(v as u32)),
                        None => vec![0; m],
                    })
                    .collect()
            })
            .collect();
        let det = z.det(&polys, m);
        let w = det.iter().map(|&x| z.val(x)).min().unwrap();
        let res = dieudonne_det(&mat).map(|nf| {
            min_prec = min_prec.min(nf.prec_p);
            let rep = to_poly(&nf.unit.mul(&nf.f).left_mul_pi(nf.w as u32));
            let digits = (nf.prec_p + w).min(16);
            let pw = 5u128.pow(w);
            let reduced: Vec<u128> = det.iter().map(|x| x / pw).collect();
            let (_, of) = z.prepare(&reduced, m);
            if eq_mod(&to_poly(&nf.f), &of, 5u128.pow(nf.prec_p.min(16 - w))) {
                f_exact += 1;
            }
            nf.w == w as i64 && eq_mod(&rep, &det, 5u128.pow(digits)) && nf.f.is_distinguished()
        });
        t[3].add(res, "det");

        let res = reduced_norm_center(&mat).map(|rep| {
            rep.value.p_denom == 0
                && rep.value.t_denom == 0
                && rep.precision.p == 16
                && rep.value.num.coeffs.iter().map(|x| x.coeffs[0] as u128).collect::<Vec<_>>() == det
        });
        t[4].add(res, "norm");
    }
    let names = ["mul", "prepare", "divide", "det", "norm"];
    let pass = t.iter().all(Tally::ok);
    let mut detail = names.iter().zip(&t).map(|(n, t)| format!("{n} {}", t.summary())).collect::<Vec<_>>().join(", ");
    write!(detail, "; F equals the oracle's F in {f_exact}/500, min output precision p^{min_prec}").unwrap();
    Verdict { pass, gate: pass, detail }
}

fn criterion_2() -> Verdict {
    let mut parts = Vec::new();
    let mut uniq_parts = Vec::new();
    for c in [(3, 1, 3, 1, 12, 12), (5, 1, 1, 2, 12, 12)] {
        let r = ring(c);
        let mut smp = Sampler::new(202);
        let mut t = Tally::default();
        let mut u = Tally::default();
        for _ in 0..200 {
            let e = smp.rng().gen_range(0..=6);
            let f = smp.series_with_order(&r, e, 11);
            t.add(
                f.weierstrass_prepare().map(|(eps, ff)| {
                    eps.mul(&ff) == f && ff.is_distinguished() && ff.degree() == Some(e) && eps.invert_unit().is_ok()
                }),
                "prepare∘multiply",
            );
            let g = smp.series(&r, 11);
            t.add(
                f.weierstrass_divide(&g)
                    .map(|(q, rem)| q.mul(&f).add(&rem) == g && rem.degree().is_none_or(|k| k < e)),
                "divide∘recombine",
            );
            let unit = smp.unit(&r, 4).unwrap();
            let ff = smp.distinguished(&r, e);
            u.add(unit.mul(&ff).weierstrass_prepare().map(|(a, b)| a == unit && b == ff), "uniqueness");
        }
        parts.push((c, t));
        uniq_parts.push((c, u));
    }
    let a = by_class(parts);
    let b = by_class(uniq_parts);
    Verdict {
        pass: a.pass && b.pass,
        gate: a.gate && b.gate,
        detail: format!("round trips {}; uniqueness {}", a.detail, b.detail),
    }
}

fn same(a: &SkewMatrix, b: &SkewMatrix) -> Result<bool, Error> {
    dieudonne_det(a)?.same_class(&dieudonne_det(b)?)
}

fn one_by_one(r: &SkewRing, g: SkewSeries) -> SkewMatrix {
    SkewMatrix::new(r, vec![vec![LaurentEntry::integral(g)]]).unwrap()
}

fn representative(nf: &DetNormalForm) -> SkewSeries {
    nf.unit.mul(&nf.f).left_mul_pi(nf.w as u32)
}

fn criterion_3() -> Verdict {
    let mut parts = Vec::new();
    let mut perm_ok = true;
    for c in D1.iter().chain(&D3).copied() {
        let r = ring(c);
        let mut smp = Sampler::new(303);
        let mut t = Tally::default();
        for i in 0..200 {
            let n = if i % 4 == 0 { 3 } else { 2 };
            let a = if i % 2 == 0 { smp.matrix_deep(&r, n, 3) } else { smp.matrix(&r, n, 3) };
            let (x, y) = (smp.rng().gen_range(0..n), smp.rng().gen_range(1..n));
            let op = ElemOp::AddMultiple {
                i: x,
                j: (x + y) % n,
                lambda: LaurentEntry::new(smp.rng().gen_range(0..=1), smp.series(&r, 3)),
            };
            let moved = if i % 3 == 0 { a.col_op(&op) } else { a.row_op(&op) };
            t.add(moved.and_then(|(b, _)| same(&a, &b)), "elementary invariance");
            t.add(same(&op.matrix(&r, n), &SkewMatrix::identity(&r, n)), "elementary matrix");

            let k = smp.rng().gen_range(0..=1);
            let e = smp.rng().gen_range(0..=2);
            let s = smp.series_with_order(&r, e, 3).left_mul_pi(k);
            let mut dg = vec![LaurentEntry::one(&r); n];
            dg[0] = LaurentEntry::integral(s.clone());
            let res = (|| {
                let lhs = SkewMatrix::diagonal(&r, dg).mul(&a)?;
                let rhs = one_by_one(&r, s.mul(&representative(&dieudonne_det(&a)?)));
                same(&lhs, &rhs)
            })();
            t.add(res, "diag(r,1,…)·A");
            let e2 = smp.rng().gen_range(0..=2);
            let s2 = smp.series_with_order(&r, e2, 3);
            let d2 = SkewMatrix::diagonal(&r, vec![LaurentEntry::integral(s.clone()), LaurentEntry::integral(s2.clone())]);
            t.add(same(&d2, &one_by_one(&r, s.mul(&s2))), "diagonal product");

            let res = (|| {
                let a0 = smp.unit(&r, 3)?;
                let (b, cc, d) = (smp.series(&r, 3), smp.series(&r, 3), smp.series(&r, 3));
                let h = a0.mul(&d.sub(&cc.mul(&a0.invert_unit()?).mul(&b)));
                let m = SkewMatrix::new(
                    &r,
                    vec![
                        vec![LaurentEntry::integral(a0), LaurentEntry::integral(b)],
                        vec![LaurentEntry::integral(cc), LaurentEntry::integral(d)],
                    ],
                )?;
                same(&m, &one_by_one(&r, h))
            })();
            t.add(res, "Schur oracle");
        }
        for n in 2..=4 {
            for i in 0..n {
                for j in i + 1..n {
                    let p = ElemOp::Swap { i, j }.matrix(&r, n);
                    let nf = dieudonne_det(&p).unwrap();
                    let minus = one_by_one(&r, r.one().neg());
                    perm_ok &= nf.w == 0 && nf.f == r.one() && same(&p, &minus).unwrap();
                }
            }
        }
        parts.push((c, t));
    }
    let mut v = by_class(parts);
    v.pass &= perm_ok;
    v.gate &= perm_ok;
    v.detail = format!("transpositions give -1: {perm_ok}; {}", v.detail);
    v
}

fn criterion_4() -> Verdict {
    let mut parts = Vec::new();
    for c in D1.iter().chain(&D3).copied() {
        let r = ring(c);
        let t = r.tower().clone();
        let mut smp = Sampler::new(404);
        let mut tally = Tally::default();
        for i in 0..100 {
            let n = 1 + i % 2;
            let a = if i % 4 < 2 { smp.matrix_deep(&r, n, 3) } else { smp.matrix(&r, n, 3) };
            let res = reduced_norm_center(&a).map(|rep| {
                rep.checks.integral
                    && rep.checks.galois_invariant
                    && rep.value.p_denom == 0
                    && rep.value.t_denom == 0
                    && rep.value.num.coeffs.iter().all(|x| x.denom_exp == 0 && t.in_k(x))
            });
            tally.add(res, "integrality");
        }
        parts.push((c, tally));
    }
    by_class(parts)
}

fn criterion_5() -> Verdict {
    let mut parts = Vec::new();
    for c in [(5, 1, 1, 2, 8, 8), (3, 1, 3, 2, 6, 24)] {
        let r = ring(c);
        let mut smp = Sampler::new(505);
        let mut t = Tally::default();
        for i in 0..50 {
            let e = i % 4;
            let mut g = r.x().pow(e);
            if e > 0 {
                g = g.add(&smp.series(&r, e - 1));
            }
            let res = monic_norm_check(&g).map(|rep: MonicReport| {
                rep.norm.checks.monic == Some(true)
                    && rep.z_degree == Some(2 * e)
                    && rep.norm.checks.integral
                    && rep.norm.precision.t >= 8
            });
            t.add(res, "monic norm");
        }
        parts.push((c, t));
    }
    by_class(parts)
}

fn criterion_6() -> Verdict {
    let mut parts = Vec::new();
    for c in D1.iter().chain(&D3).copied() {
        let r = ring(c);
        let mut smp = Sampler::new(606);
        let mut t = Tally::default();
        for i in 0..100 {
            let a = if i % 2 == 0 { smp.matrix_deep(&r, 2, 3) } else { smp.matrix(&r, 2, 3) };
            t.add(nr_det_compat(&a).map(|rep| rep.agree), "compat");
        }
        parts.push((c, t));
    }
    by_class(parts)
}

/// Agreement of two integral centre values modulo `p^prec`.
fn cf_agree(p: u64, a: &CenterFraction, b: &CenterFraction, prec: u32) -> bool {
    let pk = p.pow(prec);
    a.p_denom == 0
        && b.p_denom == 0
        && a.t_denom == b.t_denom
        && a.num.coeffs.iter().zip(&b.num.coeffs).all(|(x, y)| x.coeffs.iter().zip(&y.coeffs).all(|(u, v)| u % pk == v % pk))
}

fn criterion_7() -> Verdict {
    let mut parts = Vec::new();
    for c in D1.iter().chain(&D3).copied() {
        let r = ring(c);
        let mut smp = Sampler::new(707);
        let mut t = Tally::default();
        for i in 0..70 {
            let (size, n) = if i < 50 { (2, 1) } else { (4, 2) };
            let a = if i % 2 == 0 { smp.matrix_deep(&r, size, 2) } else { smp.matrix(&r, size, 2) };
            let res = dimension_reduce(&a, n).and_then(|(cm, rep)| {
                let (na, nc) = (reduced_norm_center(&a)?, reduced_norm_center(&cm)?);
                let prec = rep.precision.p;
                Ok(cm.is_integral()
                    && cm.rows() == n
                    && rep.w >= 0
                    && rep.class_agrees
                    && rep.norm_agrees
                    && same(&a, &cm)?
                    && cf_agree(c.0, &na.value, &nc.value, prec))
            });
            t.add(res, if i < 50 { "2×2 → 1×1" } else { "4×4 → 2×2" });
        }
        parts.push((c, t));
    }
    by_class(parts)
}

fn criterion_8() -> Verdict {
    let tower = make_tower(3, 1, 3, 2, 8).unwrap();
    let report = extend_tau(&tower, 1).unwrap();
    let alg = make_algebra(&tower, 1).unwrap();
    let desc = alg.descriptor();
    let mut checks: Vec<(&str, bool)> = vec![
        ("exactly one valid candidate", report.valid.len() == 1),
        ("descriptor uses it", report.valid.first() == Some(&(desc.tau_a, desc.tau_c.clone()))),
        ("δ^d(O_D) ⊆ p O_D on a basis", alg.delta_nilpotency_check()),
    ];
    let mut smp = Sampler::new(808);
    let (f_k, f_big, s) = (tower.f_k() as i64, tower.f_big() as i64, tower.s() as i64);
    let tau3 = |x: &DElement| alg.tau(&alg.tau(&alg.tau(x).unwrap()).unwrap()).unwrap();
    let (mut hom, mut on_k, mut order, mut commute, mut nilp) = (true, true, true, true, true);
    let omega = alg.from_tower(&tower.omega()).unwrap();
    order &= tau3(&omega) == omega && tau3(&alg.pi()) == alg.pi();
    for _ in 0..50 {
        let (x, y) = (smp.d_int(&alg), smp.d_int(&alg));
        hom &= alg.tau(&alg.d_mul(&x, &y).unwrap()).unwrap()
            == alg.d_mul(&alg.tau(&x).unwrap(), &alg.tau(&y).unwrap()).unwrap();
        hom &= alg.tau(&alg.d_add(&x, &y).unwrap()).unwrap()
            == alg.d_add(&alg.tau(&x).unwrap(), &alg.tau(&y).unwrap()).unwrap();
        order &= tau3(&x) == x;

        let z = smp.tower_int(&tower);
        let mut k = tower.zero();
        for j in 0..s {
            k = tower.add(&k, &tower.frobenius(&z, j * f_big)).unwrap();
        }
        on_k &= tower.in_big_k(&k)
            && alg.tau(&alg.from_tower(&k).unwrap()).unwrap()
                == alg.from_tower(&tower.frobenius(&k, f_k)).unwrap();
        let zd = alg.from_tower(&z).unwrap();
        commute &= alg.tau(&alg.conj_pi(&zd, 1).unwrap()).unwrap() == alg.conj_pi(&alg.tau(&zd).unwrap(), 1).unwrap();

        let mut dx = x.clone();
        for _ in 0..tower.d() {
            dx = alg.d_sub(&alg.tau(&dx).unwrap(), &dx).unwrap();
        }
        nilp &= alg.is_zero(&dx) || alg.valuation_d(&dx).unwrap() >= s;
    }
    let w_k = tower.pow(&tower.omega(), ((tower.q().pow(2) - 1) / (tower.q() - 1)) as i64).unwrap();
    let w_kd = alg.from_tower(&w_k).unwrap();
    checks.extend([
        ("τ(xy) = τ(x)τ(y), τ(x+y) = τ(x)+τ(y)", hom),
        ("τ|_K = Frob^{f_k}", on_k),
        ("τ^d = id", order),
        ("τ ≠ id on K", alg.tau(&w_kd).unwrap() != w_kd),
        ("στ = τσ on M", commute),
        ("δ^d(x) ∈ p O_D on samples", nilp),
    ]);
    let pass = checks.iter().all(|(_, b)| *b);
    let failed: Vec<_> = checks.iter().filter(|(_, b)| !b).map(|(n, _)| *n).collect();
    Verdict {
        pass,
        gate: pass,
        detail: format!(
            "(3,1,3,2): {} candidates tested, {} valid (a = {}, c = {:?}); {}",
            report.candidates_tested,
            report.valid.len(),
            desc.tau_a,
            desc.tau_c.coeffs,
            if failed.is_empty() { "all axioms hold".into() } else { format!("failed: {failed:?}") }
        ),
    }
}

// ---------------------------------------------------------------------------
// Serialisation and CLI determinism

fn round_trip<T: Serialize + DeserializeOwned + PartialEq>(x: &T) -> bool {
    let s = serde_json::to_string(x).unwrap();
    let y: T = serde_json::from_str(&s).unwrap();
    y == *x && serde_json::to_string(&y).unwrap() == s
}

fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Arguments of the `fixture` command that produced each pinned file.
const FIXTURES: [(&str, &[&str]); 7] = [
    ("comm", &["--seed", "11", "--p", "5", "--prec-p", "8", "--prec-x", "8", "--count", "2"]),
    ("quat5", &["--seed", "12", "--p", "5", "--s", "2", "--prec-p", "8", "--prec-x", "8", "--count", "2"]),
    ("quat9", &["--seed", "13", "--p", "3", "--f-k", "2", "--s", "2", "--prec-p", "6", "--prec-x", "6", "--count", "2"]),
    ("tower27", &["--seed", "14", "--p", "3", "--d", "3", "--s", "2", "--prec-p", "6", "--prec-x", "12", "--count", "2"]),
    ("block4", &["--seed", "15", "--p", "5", "--s", "2", "--prec-p", "8", "--prec-x", "8", "--size", "4", "--count", "1"]),
    ("lowprec", &["--seed", "1", "--p", "3", "--prec-p", "2", "--prec-x", "4", "--size", "3", "--count", "2", "--degree", "2"]),
    (
        "nonlocal4",
        &[
            "--seed", "36", "--p", "3", "--d", "3", "--s", "2", "--prec-p", "4", "--prec-x", "6", "--size", "4", "--count", "3",
            "--degree", "2",
        ],
    ),
];

fn run_cli(args: &[String]) -> (Vec<u8>, Vec<u8>, Option<i32>) {
    let out = Command::new(env!("CARGO_BIN_EXE_skewdet")).args(args).output().expect("binary runs");
    (out.stdout, out.stderr, out.status.code())
}

fn criterion_9() -> Verdict {
    let mut rt_ok = 0;
    let mut rt_bad = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if ok {
            rt_ok += 1;
        } else {
            rt_bad.push(name.to_string());
        }
    };
    let mut runs = 0;
    let mut diffs = Vec::new();
    let mut pinned_bad = Vec::new();
    let mut rerun = |args: Vec<String>| {
        runs += 1;
        let a = run_cli(&args);
        if a != run_cli(&args) {
            diffs.push(args.join(" "));
        }
        a
    };
    for (name, fargs) in FIXTURES {
        let path = fixtures_dir().join(format!("{name}.json"));
        let text = std::fs::read_to_string(&path).unwrap();
        let file = InstanceFile::from_json(&text).unwrap();
        check(name, file.to_json() == text.trim_end() && round_trip(&file));
        let inst = Instance::load(&file, Overrides::default()).unwrap();
        let mut again = inst.to_file();
        let mut orig = file.clone();
        again.matrices.sort_by(|a, b| a.name.cmp(&b.name));
        orig.matrices.sort_by(|a, b| a.name.cmp(&b.name));
        check(name, again == orig);
        let r = &inst.ring;
        check(name, round_trip(r.algebra().descriptor()) && round_trip(&r.tower().descriptor().clone()));
        for (mname, m) in &inst.matrices {
            let rec = m.to_record();
            check(mname, round_trip(&rec) && SkewMatrix::from_record(r, &rec).as_ref() == Ok(m));
            if let Ok(nf) = dieudonne_det(m) {
                check(mname, round_trip(&nf.to_record()));
            }
            if let Ok(rep) = nr_det_compat(m) {
                check(mname, round_trip(&rep));
            }
            if let Ok(rep) = reduced_norm_center(m) {
                check(mname, round_trip(&rep));
            }
            if let Ok((_, rep)) = dimension_reduce(m, 1) {
                check(mname, round_trip(&rep));
            }
            for row in &m.entries {
                for x in row {
                    let rec = x.to_record();
                    check(mname, round_trip(&rec) && LaurentEntry::from_record(r, &rec).as_ref() == Ok(x));
                    let op = ElemOp::AddMultiple { i: 0, j: 1, lambda: x.clone() }.to_record();
                    check(mname, round_trip(&op) && ElemOp::from_record(r, &op).unwrap().to_record() == op);
                }
            }
        }
        for s in inst.series.values() {
            check(name, round_trip(&s.to_record()) && r.from_record(&s.to_record()).as_ref() == Ok(s));
            check(name, round_trip(&s.coeff(0)) && round_trip(&s.coeff(0).coeffs[0]));
            if let Ok(rep) = monic_norm_check(s) {
                check(name, round_trip(&rep));
            }
        }

        let gen = rerun(std::iter::once("fixture".to_string()).chain(fargs.iter().map(|s| s.to_string())).collect());
        if gen.0 != text.as_bytes() {
            pinned_bad.push(name);
        }
        let base = |cmd: &str| vec![cmd.to_string(), "--instance".to_string(), path.display().to_string()];
        for (mname, m) in &inst.matrices {
            for cmd in ["det", "norm"] {
                let mut a = base(cmd);
                a.extend(["--matrix".into(), mname.clone()]);
                rerun(a);
            }
            for n in (1..=m.rows()).filter(|n| m.rows() % n == 0 && *n < m.rows()) {
                let mut a = base("reduce");
                a.extend(["--matrix".into(), mname.clone(), "--block-size".into(), n.to_string()]);
                rerun(a);
            }
        }
        for sname in inst.series.keys() {
            let mut a = base("monic");
            a.extend(["--series".into(), sname.clone()]);
            rerun(a);
        }
    }
    let tau = extend_tau(&make_tower(3, 1, 3, 2, 6).unwrap(), 1).unwrap();
    check("tau", round_trip(&tau));
    check("selftest", round_trip(&selftest::run(1, selftest::Level::Quick).unwrap()));
    for level in ["quick", "full"] {
        rerun(vec!["selftest".into(), "--seed".into(), "1".into(), "--level".into(), level.into()]);
    }
    let pass = rt_bad.is_empty() && diffs.is_empty() && pinned_bad.is_empty();
    Verdict {
        pass,
        gate: pass,
        detail: format!(
            "{rt_ok} round trips exact{}; {runs} CLI invocations rerun byte-identically{}",
            if rt_bad.is_empty() { String::new() } else { format!(", failures in {rt_bad:?}") },
            if diffs.is_empty() { String::new() } else { format!(", differences: {diffs:?}") }
        ) + &if pinned_bad.is_empty() {
            "; fixture command reproduces every pinned file".to_string()
        } else {
            format!("; regenerated fixtures differ: {pinned_bad:?}")
        },
    }
}

fn main() {
    let jobs: Vec<(u8, &str, fn() -> Verdict)> = vec![
        (1, "commutative oracle, (5,1,1,1) N=M=16, 500 cases", criterion_1),
        (2, "Weierstraß round trips and uniqueness, N=M=12", criterion_2),
        (3, "Dieudonné axioms and Schur oracle", criterion_3),
        (4, "reduced-norm integrality", criterion_4),
        (5, "monic norm at s=2, M_T=8", criterion_5),
        (6, "nr(A) = nr(det A)", criterion_6),
        (7, "dimension reduction", criterion_7),
        (8, "τ extension at (3,1,3,2)", criterion_8),
        (9, "serialisation round trips and CLI determinism", criterion_9),
    ];
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(id, name, f)| {
                s.spawn(move || {
                    let start = Instant::now();
                    let v = f();
                    (id, name, v, start.elapsed())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    });
    let mut gate = true;
    let mut passed = 0;
    for (id, name, v, dt) in &results {
        println!(
            "criterion {id} {}  {name}  ({:.1} s)\n    {}",
            if v.pass { "PASS" } else { "FAIL" },
            dt.as_secs_f64(),
            v.detail
        );
        passed += v.pass as usize;
        gate &= v.gate;
    }
    println!("{passed}/{} criteria pass", results.len());
    if !gate {
        println!("acceptance gate failed: a silent wrong answer or a failing d = 1 class");
        std::process::exit(1);
    }
}
