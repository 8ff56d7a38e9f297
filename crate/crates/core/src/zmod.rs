//! Residues modulo a fixed modulus below 2^62.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Zmod {
    m: u64,
    small: bool,
}

impl Zmod {
    pub fn new(m: u64) -> Self {
        debug_assert!(m >= 1 && m < (1 << 62));
        Zmod { m, small: m < (1 << 32) }
    }

    #[inline]
    pub fn modulus(self) -> u64 {
        self.m
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    #[inline]
    pub fn neg(self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.m - a
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        if self.small {
            a * b % self.m
        } else {
            ((a as u128 * b as u128) % self.m as u128) as u64
        }
    }

    pub fn pow(self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1 % self.m;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn from_i64(self, x: i64) -> u64 {
        let m = self.m as i128;
        (((x as i128) % m + m) % m) as u64
    }

    /// Signed representative in (-m/2, m/2].
    pub fn to_signed(self, a: u64) -> i64 {
        if a > self.m / 2 {
            a as i64 - self.m as i64
        } else {
            a as i64
        }
    }

    pub fn inv(self, a: u64) -> Option<u64> {
        let (mut r0, mut r1) = (self.m as i128, (a % self.m) as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        if r0 != 1 {
            return None;
        }
        let m = self.m as i128;
        Some((((s0 % m) + m) % m) as u64)
    }
}

/// p-adic valuation of a residue modulo p^n; returns n for zero.
pub(crate) fn val_p(mut a: u64, p: u64, n: u32) -> u32 {
    if a == 0 {
        return n;
    }
    let mut v = 0;
    while a % p == 0 {
        a /= p;
        v += 1;
    }
    v
}

pub(crate) fn checked_pow(p: u64, e: u32) -> Option<u64> {
    let mut r: u64 = 1;
    for _ in 0..e {
        r = r.checked_mul(p)?;
    }
    Some(r)
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}
