//! Seeded property suites behind the `selftest` command.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{make_algebra, Algebra};
use crate::error::{Error, Result};
use crate::linalg::{dieudonne_det, diagonal_reduce, ElemOp, LaurentEntry, SkewMatrix};
use crate::norm::{monic_norm_check, nr_det_compat, reduced_norm_center};
use crate::random::Sampler;
use crate::series::SkewRing;
use crate::tower::make_tower;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl FromStr for Level {
    type Err = Error;
    fn from_str(s: &str) -> Result<Level> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            _ => Err(Error::BadParameters(format!("unknown level {s:?}, expected quick or full"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub suite: String,
    pub class: String,
    pub passed: usize,
    pub failed: usize,
    /// Cases whose inputs admit no Weierstraß factorisation.
    pub skipped: usize,
    pub first_failure: Option<String>,
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<22} {:<14} passed {:>4}  failed {:>3}  skipped {:>3}",
            self.suite, self.class, self.passed, self.failed, self.skipped
        )?;
        if let Some(e) = &self.first_failure {
            write!(f, "  first failure: {e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub level: Level,
    pub suites: Vec<SuiteResult>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.suites.iter().all(|s| s.failed == 0)
    }
}

enum Outcome {
    Pass,
    Fail(String),
    Skip,
}

fn check(b: bool, what: &str) -> Result<Outcome> {
    Ok(if b { Outcome::Pass } else { Outcome::Fail(what.to_string()) })
}

struct Runner<'a> {
    ring: &'a SkewRing,
    class: String,
    smp: Sampler,
    cases: usize,
    out: Vec<SuiteResult>,
}

impl Runner<'_> {
    fn suite(&mut self, name: &str, mut case: impl FnMut(&SkewRing, &mut Sampler) -> Result<Outcome>) {
        let mut res = SuiteResult {
            suite: name.into(),
            class: self.class.clone(),
            passed: 0,
            failed: 0,
            skipped: 0,
            first_failure: None,
        };
        for _ in 0..self.cases {
            let o = match case(self.ring, &mut self.smp) {
                Ok(o) => o,
                Err(Error::NotPreparable(_)) => Outcome::Skip,
                Err(e) => Outcome::Fail(e.to_string()),
            };
            match o {
                Outcome::Pass => res.passed += 1,
                Outcome::Skip => res.skipped += 1,
                Outcome::Fail(msg) => {
                    res.failed += 1;
                    res.first_failure.get_or_insert(msg);
                }
            }
        }
        self.out.push(res);
    }
}

fn ring_for(p: u64, f_k: usize, d: usize, s: usize, n: u32, m: usize) -> Result<SkewRing> {
    let t = make_tower(p, f_k, d, s, n)?;
    let a: Algebra = make_algebra(&t, 1)?;
    SkewRing::new(&a, m)
}

/// Runs every property suite with a generator seeded by `seed`.
pub fn run(seed: u64, level: Level) -> Result<SelftestReport> {
    let (cases, classes): (usize, Vec<(u64, usize, usize, usize, u32, usize)>) = match level {
        Level::Quick => (6, vec![(5, 1, 1, 1, 8, 8), (5, 1, 1, 2, 6, 6), (3, 1, 3, 1, 6, 6)]),
        Level::Full => (
            40,
            vec![(5, 1, 1, 1, 12, 12), (5, 1, 1, 2, 8, 8), (3, 2, 1, 2, 6, 6), (3, 1, 3, 1, 8, 9), (3, 1, 3, 2, 6, 12)],
        ),
    };
    let mut suites = Vec::new();
    for (i, &(p, f_k, d, s, n, m)) in classes.iter().enumerate() {
        let ring = ring_for(p, f_k, d, s, n, m)?;
        let mut r = Runner {
            ring: &ring,
            class: format!("({p},{f_k},{d},{s})"),
            smp: Sampler::new(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(i as u64)),
            cases,
            out: Vec::new(),
        };
        r.suite("series.associativity", |ring, smp| {
            let (a, b, c) = (smp.series(ring, 4), smp.series(ring, 4), smp.series(ring, 4));
            check(a.mul(&b).mul(&c) == a.mul(&b.mul(&c)), "(ab)c != a(bc)")
        });
        r.suite("series.prepare", |ring, smp| {
            let u = smp.unit(ring, 3)?;
            let e = 1 + smp.series(ring, 0).degree().unwrap_or(0) % 3;
            let f = smp.distinguished(ring, e);
            let g = u.mul(&f);
            let (eps, ff) = g.weierstrass_prepare()?;
            check(eps.mul(&ff) == g && ff.is_distinguished(), "prepare does not recombine")
        });
        r.suite("series.divide", |ring, smp| {
            let f = smp.preparable(ring, 3, 4)?;
            let g = smp.series(ring, 5);
            let (q, rem) = f.weierstrass_divide(&g)?;
            let e = f.reduced_order().unwrap();
            check(q.mul(&f).add(&rem) == g && rem.degree().map_or(true, |k| k < e), "division does not recombine")
        });
        r.suite("norm.multiplicative", |ring, smp| {
            let (a, b) = (smp.matrix(ring, 2, 3), smp.matrix(ring, 2, 3));
            let na = reduced_norm_center(&a)?;
            let nb = reduced_norm_center(&b)?;
            let nab = reduced_norm_center(&a.mul(&b)?)?;
            let prod = crate::norm::cf_mul(ring.tower(), &na.value, &nb.value);
            check(nab.value == prod && na.checks.integral, "nr(AB) != nr(A) nr(B)")
        });
        r.suite("norm.monic", |ring, smp| {
            let e = (smp.series(ring, 0).degree().unwrap_or(0) % 2) + 1;
            if ring.prec_t() <= ring.tower().s() * e {
                return Ok(Outcome::Skip);
            }
            let mut g = smp.series(ring, e - 1);
            g = g.add(&ring.x().pow(e));
            let rep = monic_norm_check(&g)?;
            let sign_even = (ring.tower().d() - 1) * ring.tower().s() * e % 2 == 0;
            check(rep.z_degree == Some(ring.tower().s() * e) && rep.norm.checks.monic == Some(sign_even), "nr(G) not monic")
        });
        if d == 1 {
            r.suite("linalg.replay", |ring, smp| {
                let a = smp.matrix(ring, 2, 3);
                let red = diagonal_reduce(&a)?;
                check(red.diag.is_diagonal() && red.replay()? == a, "replay differs")
            });
            r.suite("linalg.elementary", |ring, smp| {
                let a = smp.matrix(ring, 2, 3);
                let lambda = LaurentEntry::new(1, smp.series(ring, 2));
                let (b, _) = a.row_op(&ElemOp::AddMultiple { i: 1, j: 0, lambda })?;
                check(dieudonne_det(&a)?.same_class(&dieudonne_det(&b)?)?, "det changed under add_multiple")
            });
            r.suite("linalg.schur", |ring, smp| {
                let a = smp.unit(ring, 3)?;
                let (b, c, d) = (smp.series(ring, 3), smp.series(ring, 3), smp.series(ring, 3));
                let h = a.mul(&d.sub(&c.mul(&a.invert_unit()?).mul(&b)));
                let m = SkewMatrix::new(
                    ring,
                    vec![
                        vec![LaurentEntry::integral(a), LaurentEntry::integral(b)],
                        vec![LaurentEntry::integral(c), LaurentEntry::integral(d)],
                    ],
                )?;
                let one = SkewMatrix::new(ring, vec![vec![LaurentEntry::integral(h)]])?;
                check(dieudonne_det(&m)?.same_class(&dieudonne_det(&one)?)?, "Schur complement class differs")
            });
            r.suite("norm.compat", |ring, smp| {
                let a = smp.matrix(ring, 2, 3);
                check(nr_det_compat(&a)?.agree, "nr(A) != nr(det A)")
            });
        }
        suites.extend(r.out);
    }
    Ok(SelftestReport { seed, level, suites })
}
