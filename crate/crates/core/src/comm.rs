//! Division-free commutative linear algebra.

use crate::tower::Tower;

pub(crate) trait CommRing {
    type E: Clone + PartialEq;
    fn zero(&self) -> Self::E;
    fn one(&self) -> Self::E;
    fn add(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn sub(&self, a: &Self::E, b: &Self::E) -> Self::E;
    fn mul(&self, a: &Self::E, b: &Self::E) -> Self::E;
}

/// Coefficients of `det(λ·1 - A)`, constant term first (Berkowitz).
pub(crate) fn charpoly<R: CommRing>(ring: &R, a: &[Vec<R::E>]) -> Vec<R::E> {
    let n = a.len();
    if n == 0 {
        return vec![ring.one()];
    }
    // c holds coefficients highest degree first
    let mut c = vec![ring.one(), ring.sub(&ring.zero(), &a[0][0])];
    for r in 1..n {
        // column: 1, -a_rr, -R S, -R C S, ...
        let mut col = Vec::with_capacity(r + 2);
        col.push(ring.one());
        col.push(ring.sub(&ring.zero(), &a[r][r]));
        let mut v: Vec<R::E> = (0..r).map(|i| a[i][r].clone()).collect();
        for _ in 0..r {
            let rs = (0..r).fold(ring.zero(), |acc, j| ring.add(&acc, &ring.mul(&a[r][j], &v[j])));
            col.push(ring.sub(&ring.zero(), &rs));
            let next: Vec<R::E> = (0..r)
                .map(|i| (0..r).fold(ring.zero(), |acc, j| ring.add(&acc, &ring.mul(&a[i][j], &v[j]))))
                .collect();
            v = next;
        }
        let mut out = vec![ring.zero(); r + 2];
        for (i, o) in out.iter_mut().enumerate() {
            for (j, cj) in c.iter().enumerate() {
                if i >= j {
                    *o = ring.add(o, &ring.mul(&col[i - j], cj));
                }
            }
        }
        c = out;
    }
    c.reverse();
    c
}

pub(crate) fn det<R: CommRing>(ring: &R, a: &[Vec<R::E>]) -> R::E {
    let cp = charpoly(ring, a);
    let c0 = cp[0].clone();
    if a.len() % 2 == 1 {
        ring.sub(&ring.zero(), &c0)
    } else {
        c0
    }
}

/// `O_M / p^N` on coefficient vectors.
pub(crate) struct IntRing<'a>(pub &'a Tower);

impl CommRing for IntRing<'_> {
    type E = Vec<u64>;
    fn zero(&self) -> Vec<u64> {
        self.0.int_slice(0)
    }
    fn one(&self) -> Vec<u64> {
        self.0.int_slice(1)
    }
    fn add(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let mut c = a.clone();
        self.0.add_assign(&mut c, b);
        c
    }
    fn sub(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let mut c = a.clone();
        self.0.sub_assign(&mut c, b);
        c
    }
    fn mul(&self, a: &Vec<u64>, b: &Vec<u64>) -> Vec<u64> {
        let mut c = vec![0; a.len()];
        self.0.mul_into(a, b, &mut c);
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Zn(i64);
    impl CommRing for Zn {
        type E = i64;
        fn zero(&self) -> i64 {
            0
        }
        fn one(&self) -> i64 {
            1
        }
        fn add(&self, a: &i64, b: &i64) -> i64 {
            (a + b).rem_euclid(self.0)
        }
        fn sub(&self, a: &i64, b: &i64) -> i64 {
            (a - b).rem_euclid(self.0)
        }
        fn mul(&self, a: &i64, b: &i64) -> i64 {
            (a * b).rem_euclid(self.0)
        }
    }

    #[test]
    fn small_charpolys() {
        let r = Zn(1_000_003);
        let a = vec![vec![1, 2], vec![3, 4]];
        // λ^2 - 5λ - 2
        assert_eq!(charpoly(&r, &a), vec![1_000_001, 999_998, 1]);
        let b = vec![vec![2, 0, 1], vec![1, 3, 0], vec![0, 1, 4]];
        assert_eq!(det(&r, &b), 25);
    }
}
