//! Linear algebra over prime fields and rational reconstruction.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `2^61 - 1`, used for elimination (fast reduction).
pub const MERSENNE_61: u64 = (1 << 61) - 1;
/// Largest prime below `2^62`, used as an independent check.
pub const CHECK_PRIME: u64 = 4_611_686_018_427_387_847;

#[inline]
fn mul_mersenne(a: u64, b: u64) -> u64 {
    let t = a as u128 * b as u128;
    let s = (t as u64 & MERSENNE_61) + (t >> 61) as u64;
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

#[inline]
fn mul_add_mersenne(a: u64, b: u64, c: u64) -> u64 {
    let t = a as u128 + b as u128 * c as u128;
    let s = (t as u64 & MERSENNE_61) + (t >> 61) as u64;
    let s = (s & MERSENNE_61) + (s >> 61);
    if s >= MERSENNE_61 {
        s - MERSENNE_61
    } else {
        s
    }
}

/// Arithmetic modulo a prime below `2^63`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Field {
    pub p: u64,
}

impl Field {
    pub const fn new(p: u64) -> Self {
        Self { p }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.p == MERSENNE_61 {
            mul_mersenne(a, b)
        } else {
            ((a as u128 * b as u128) % self.p as u128) as u64
        }
    }

    /// `a + b c`.
    #[inline]
    pub fn mul_add(&self, a: u64, b: u64, c: u64) -> u64 {
        if self.p == MERSENNE_61 {
            mul_add_mersenne(a, b, c)
        } else {
            ((a as u128 + b as u128 * c as u128) % self.p as u128) as u64
        }
    }

    pub fn pow(&self, mut a: u64, mut e: u64) -> u64 {
        let mut r = 1;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, a);
            }
            a = self.mul(a, a);
            e >>= 1;
        }
        r
    }

    pub fn inv(&self, a: u64) -> Option<u64> {
        (a != 0).then(|| self.pow(a, self.p - 2))
    }

    pub fn from_bigint(&self, n: &BigInt) -> u64 {
        let m = n.mod_floor(&BigInt::from(self.p));
        m.to_u64().expect("residue fits in u64")
    }

    /// Image of a rational; `None` when the denominator vanishes mod p.
    pub fn from_rational(&self, q: &BigRational) -> Option<u64> {
        let d = self.inv(self.from_bigint(q.denom()))?;
        Some(self.mul(self.from_bigint(q.numer()), d))
    }
}

/// Basis of the right nullspace of the `rows x ncols` row-major matrix `m`
/// over `field`. Each basis vector has a 1 at one free column.
pub fn nullspace(field: &Field, mut m: Vec<u64>, rows: usize, ncols: usize) -> Vec<Vec<u64>> {
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for col in 0..ncols {
        if r == rows {
            break;
        }
        let Some(pr) = (r..rows).find(|&i| m[i * ncols + col] != 0) else {
            continue;
        };
        if pr != r {
            for k in col..ncols {
                m.swap(pr * ncols + k, r * ncols + k);
            }
        }
        let inv = field.inv(m[r * ncols + col]).expect("nonzero pivot");
        for k in col..ncols {
            m[r * ncols + k] = field.mul(m[r * ncols + k], inv);
        }
        let (head, tail) = m.split_at_mut((r + 1) * ncols);
        let pivot_row = &head[r * ncols..];
        for row in tail.chunks_exact_mut(ncols) {
            let f = row[col];
            if f == 0 {
                continue;
            }
            let nf = field.p - f;
            if field.p == MERSENNE_61 {
                for (x, &pv) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x = mul_add_mersenne(*x, nf, pv);
                }
            } else {
                for (x, &pv) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *x = field.mul_add(*x, nf, pv);
                }
            }
        }
        pivots.push(col);
        r += 1;
    }

    let is_pivot = {
        let mut v = vec![false; ncols];
        for &c in &pivots {
            v[c] = true;
        }
        v
    };
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut x = vec![0u64; ncols];
        x[free] = 1;
        for (i, &pc) in pivots.iter().enumerate().rev() {
            let row = &m[i * ncols..(i + 1) * ncols];
            let mut acc = 0u64;
            for k in pc + 1..ncols {
                if row[k] != 0 && x[k] != 0 {
                    acc = field.add(acc, field.mul(row[k], x[k]));
                }
            }
            x[pc] = field.sub(0, acc);
        }
        basis.push(x);
    }
    basis
}

/// Rational `a/b` with `|a|, |b| <= sqrt(p/2)` and `a = b * v (mod p)`.
pub fn rational_reconstruct(v: u64, p: u64) -> Option<BigRational> {
    let bound = ((p / 2) as f64).sqrt() as i128;
    let (mut r0, mut r1) = (p as i128, v as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 > bound {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if t1 == 0 || t1.abs() > bound {
        return None;
    }
    let q = BigRational::new(BigInt::from(r1), BigInt::from(t1));
    Some(q)
}

/// Reconstructs a modular vector as a primitive integer vector.
pub fn reconstruct_integer_vector(v: &[u64], p: u64) -> Option<Vec<BigInt>> {
    let rats: Vec<BigRational> = v.iter().map(|&x| rational_reconstruct(x, p)).collect::<Option<_>>()?;
    let lcm = rats.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = rats.iter().map(|q| (q * BigRational::from(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return None;
    }
    // Make the last nonzero entry positive for a canonical sign.
    let sign = match ints.iter().rev().find(|x| !x.is_zero()).map(|x| x.sign()) {
        Some(Sign::Minus) => -BigInt::one(),
        _ => BigInt::one(),
    };
    Some(ints.into_iter().map(|x| x / &g * &sign).collect())
}

/// Deterministic Miller-Rabin for `n < 2^64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let f = Field::new(n);
    let (mut d, mut s) = (n - 1, 0);
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = f.pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = f.mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Largest absolute value among the entries, as a float.
pub fn max_abs(v: &[BigInt]) -> f64 {
    v.iter().map(|x| x.abs().to_f64().unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert!(is_prime(MERSENNE_61));
        assert!(is_prime(CHECK_PRIME));
        assert!(!is_prime(CHECK_PRIME + 2));
        assert!(!is_prime(561));
    }

    #[test]
    fn mersenne_reduction_matches_generic() {
        let f = Field::new(MERSENNE_61);
        let pairs = [(3u64, 5u64), (MERSENNE_61 - 1, MERSENNE_61 - 1), (1 << 60, (1 << 60) + 12345)];
        for (a, b) in pairs {
            let g = ((a as u128 * b as u128) % MERSENNE_61 as u128) as u64;
            assert_eq!(f.mul(a, b), g);
        }
        assert_eq!(f.mul(f.inv(12345).unwrap(), 12345), 1);
        let m = MERSENNE_61 - 1;
        let g = ((m as u128 + m as u128 * m as u128) % MERSENNE_61 as u128) as u64;
        assert_eq!(f.mul_add(m, m, m), g);
    }

    #[test]
    fn nullspace_of_small_matrix() {
        let f = Field::new(MERSENNE_61);
        // Rows of [1 2 3; 2 4 6; 1 1 1] have nullspace spanned by (1, -2, 1).
        let m = vec![1, 2, 3, 2, 4, 6, 1, 1, 1];
        let ns = nullspace(&f, m, 3, 3);
        assert_eq!(ns.len(), 1);
        let ints = reconstruct_integer_vector(&ns[0], f.p).unwrap();
        assert_eq!(ints, vec![BigInt::from(1), BigInt::from(-2), BigInt::from(1)]);
    }

    #[test]
    fn full_rank_has_trivial_nullspace() {
        let f = Field::new(MERSENNE_61);
        assert!(nullspace(&f, vec![1, 2, 3, 4, 5, 7, 0, 0, 1, 9, 9, 9], 4, 3).is_empty());
    }

    #[test]
    fn reconstruction_round_trip() {
        let f = Field::new(MERSENNE_61);
        for (a, b) in [(3i64, 7i64), (-4860, 1), (1, 20_000_000), (-123_456, 789)] {
            let q = BigRational::new(BigInt::from(a), BigInt::from(b));
            let v = f.from_rational(&q).unwrap();
            assert_eq!(rational_reconstruct(v, f.p).unwrap(), q);
        }
    }
}
