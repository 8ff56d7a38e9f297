//! Seeded generators for test data and self-tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{Algebra, DElement};
use crate::error::{Error, Result};
use crate::linalg::{LaurentEntry, SkewMatrix};
use crate::series::{SkewRing, SkewSeries};
use crate::tower::{Tower, TowerElement};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn tower_int(&mut self, t: &Tower) -> TowerElement {
        let m = t.modulus();
        let coeffs = (0..t.f_m()).map(|_| self.rng.gen_range(0..m)).collect();
        TowerElement { coeffs, denom_exp: 0 }
    }

    /// Uniform element of `O_D / p^N`.
    pub fn d_int(&mut self, a: &Algebra) -> DElement {
        let t = a.tower();
        let parts: Vec<TowerElement> = (0..a.s()).map(|_| self.tower_int(t)).collect();
        a.from_parts(&parts).expect("integral parts")
    }

    /// Uniform element of `O_D^×`.
    pub fn d_unit(&mut self, a: &Algebra) -> DElement {
        loop {
            let x = self.d_int(a);
            if a.valuation_d(&x) == Ok(0) {
                return x;
            }
        }
    }

    /// Uniform element of `rad(O_D) = π_D O_D`.
    pub fn d_rad(&mut self, a: &Algebra) -> DElement {
        let x = self.d_int(a);
        a.d_mul(&a.pi(), &x).expect("integral product")
    }

    /// Random polynomial with coefficients in `O_D` of degree at most `deg`.
    pub fn series(&mut self, r: &SkewRing, deg: usize) -> SkewSeries {
        let a = r.algebra();
        let cs: Vec<DElement> = (0..=deg.min(r.prec_x() - 1)).map(|_| self.d_int(a)).collect();
        r.from_coeffs(&cs).expect("integral coefficients")
    }

    /// Random series whose reduced order is exactly `e` (when `e < M`).
    pub fn series_with_order(&mut self, r: &SkewRing, e: usize, deg: usize) -> SkewSeries {
        let a = r.algebra();
        let deg = deg.max(e).min(r.prec_x() - 1);
        let cs: Vec<DElement> = (0..=deg)
            .map(|i| match i.cmp(&e) {
                std::cmp::Ordering::Less => self.d_rad(a),
                std::cmp::Ordering::Equal => self.d_unit(a),
                std::cmp::Ordering::Greater => self.d_int(a),
            })
            .collect();
        r.from_coeffs(&cs).expect("integral coefficients")
    }

    /// A random unit of `𝔒`, by rejection.
    pub fn unit(&mut self, r: &SkewRing, deg: usize) -> Result<SkewSeries> {
        for _ in 0..1000 {
            let u = self.series_with_order(r, 0, deg);
            if u.invert_unit().is_ok() {
                return Ok(u);
            }
        }
        Err(Error::NotUnit)
    }

    /// A random distinguished polynomial of degree `e`.
    pub fn distinguished(&mut self, r: &SkewRing, e: usize) -> SkewSeries {
        let a = r.algebra();
        let mut cs: Vec<DElement> = (0..e).map(|_| self.d_rad(a)).collect();
        cs.push(a.one());
        r.from_coeffs(&cs).expect("integral coefficients")
    }

    /// Random polynomial of reduced order `≤ max_e` that admits a Weierstraß
    /// factorisation, by rejection.
    pub fn preparable(&mut self, r: &SkewRing, max_e: usize, deg: usize) -> Result<SkewSeries> {
        for _ in 0..1000 {
            let e = self.rng.gen_range(0..=max_e);
            let f = self.series_with_order(r, e, deg);
            match f.weierstrass_prepare() {
                Ok(_) => return Ok(f),
                Err(Error::NotPreparable(_)) | Err(Error::NotUnit) => continue,
                Err(err) => return Err(err),
            }
        }
        Err(Error::NotPreparable(max_e))
    }

    /// Random `n × n` matrix of integral polynomial entries of degree `≤ deg`.
    pub fn matrix(&mut self, r: &SkewRing, n: usize, deg: usize) -> SkewMatrix {
        let entries = (0..n)
            .map(|_| (0..n).map(|_| LaurentEntry::integral(self.series(r, deg))).collect())
            .collect();
        SkewMatrix::new(r, entries).expect("square grid")
    }

    /// Random `n × n` matrix whose entries carry random `π_D`-content (0 or 1)
    /// and random reduced order (at most 2).
    pub fn matrix_deep(&mut self, r: &SkewRing, n: usize, deg: usize) -> SkewMatrix {
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            let mut row = Vec::with_capacity(n);
            for _ in 0..n {
                let k = self.rng.gen_range(0..=1);
                let e = self.rng.gen_range(0..=2);
                row.push(LaurentEntry::integral(self.series_with_order(r, e, deg).left_mul_pi(k)));
            }
            entries.push(row);
        }
        SkewMatrix::new(r, entries).expect("square grid")
    }
}
