//! Arithmetic in `Z/p` and `Z/p^2` for odd primes `p`, plus Teichmüller lifts.
//!
//! Everything above this module works with one of exactly two moduli per
//! prime. [`Modulus`] carries the prime alongside the modulus so that
//! reductions between the two levels never need to re-factor anything.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Largest prime accepted; keeps `p^2` inside a `u64`.
pub const MAX_PRIME: u64 = (1 << 32) - 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Modulus {
    prime: u64,
    exponent: u32,
    value: u64,
}

impl Modulus {
    /// `p^exponent` for an odd prime `p` and `exponent` in `{1, 2}`.
    pub fn new(prime: u64, exponent: u32) -> Result<Self> {
        if !(1..=2).contains(&exponent) {
            return Err(Error::domain(format!(
                "precision must be 1 or 2, got {exponent}"
            )));
        }
        if prime == 2 || prime > MAX_PRIME || !is_prime(prime) {
            return Err(Error::NotOddPrime(prime));
        }
        Ok(Modulus {
            prime,
            exponent,
            value: prime.pow(exponent),
        })
    }

    pub fn prime_field(p: u64) -> Result<Self> {
        Self::new(p, 1)
    }

    pub fn prime_squared(p: u64) -> Result<Self> {
        Self::new(p, 2)
    }

    /// Recovers the structure of a raw modulus value (`p` or `p^2`).
    pub fn from_value(m: u64) -> Result<Self> {
        if m > 2 && m <= MAX_PRIME && is_prime(m) {
            return Self::new(m, 1);
        }
        let root = m.isqrt();
        if root * root == m && root > 2 && is_prime(root) {
            return Self::new(root, 2);
        }
        Err(Error::domain(format!(
            "modulus {m} is neither an odd prime nor its square"
        )))
    }

    #[inline]
    pub fn prime(&self) -> u64 {
        self.prime
    }

    #[inline]
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    /// The same prime at precision 1.
    pub fn base_field(&self) -> Modulus {
        Modulus {
            prime: self.prime,
            exponent: 1,
            value: self.prime,
        }
    }

    #[inline]
    pub fn reduce(&self, x: u64) -> u64 {
        x % self.value
    }

    pub fn reduce_signed(&self, x: i64) -> u64 {
        x.rem_euclid(self.value as i64) as u64
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.value {
            s - self.value
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.value - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.value - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.value <= u32::MAX as u64 {
            (a * b) % self.value
        } else {
            ((a as u128 * b as u128) % self.value as u128) as u64
        }
    }

    pub fn pow(&self, base: u64, mut exponent: u64) -> u64 {
        let mut result = 1 % self.value;
        let mut b = base % self.value;
        while exponent > 0 {
            if exponent & 1 == 1 {
                result = self.mul(result, b);
            }
            b = self.mul(b, b);
            exponent >>= 1;
        }
        result
    }

    pub fn inv(&self, a: u64) -> Result<u64> {
        let a = a % self.value;
        if a.is_multiple_of(self.prime) {
            return Err(Error::NotInvertible {
                value: a,
                modulus: self.value,
            });
        }
        // Extended Euclid on signed 128-bit to avoid overflow at p^2 ~ 2^64.
        let (mut old_r, mut r) = (a as i128, self.value as i128);
        let (mut old_s, mut s) = (1i128, 0i128);
        while r != 0 {
            let q = old_r / r;
            (old_r, r) = (r, old_r - q * r);
            (old_s, s) = (s, old_s - q * s);
        }
        debug_assert_eq!(old_r, 1);
        Ok(old_s.rem_euclid(self.value as i128) as u64)
    }

    /// Representative in `(-m/2, m/2]`.
    pub fn centered(&self, a: u64) -> i64 {
        let a = a % self.value;
        if a > self.value / 2 {
            a as i64 - self.value as i64
        } else {
            a as i64
        }
    }

    pub fn residue(&self, value: u64) -> Residue {
        Residue {
            value: value % self.value,
            modulus: *self,
        }
    }

    pub fn residue_signed(&self, value: i64) -> Residue {
        Residue {
            value: self.reduce_signed(value),
            modulus: *self,
        }
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 1 {
            write!(f, "{}", self.prime)
        } else {
            write!(f, "{}^{}", self.prime, self.exponent)
        }
    }
}

/// An element of `Z/p` or `Z/p^2`. Always stored reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    modulus: Modulus,
}

impl Residue {
    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    #[inline]
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn centered(&self) -> i64 {
        self.modulus.centered(self.value)
    }

    /// Image under `Z/p^2 -> Z/p` (identity at precision 1).
    pub fn reduce_to_field(&self) -> Residue {
        self.modulus.base_field().residue(self.value)
    }

    /// `self / p` for a residue mod `p^2` that is divisible by `p`.
    pub fn divide_by_prime(&self) -> Option<Residue> {
        let p = self.modulus.prime;
        if self.modulus.exponent != 2 || !self.value.is_multiple_of(p) {
            return None;
        }
        Some(self.modulus.base_field().residue(self.value / p))
    }

    pub fn pow(self, exponent: u64) -> Residue {
        mod_pow(self, exponent)
    }

    pub fn inv(self) -> Result<Residue> {
        mod_inv(self)
    }

    fn check_same(&self, other: &Residue) {
        assert_eq!(
            self.modulus, other.modulus,
            "mixed moduli {} and {}",
            self.modulus, other.modulus
        );
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}", self.value, self.modulus)
    }
}

impl Add for Residue {
    type Output = Residue;
    fn add(self, rhs: Residue) -> Residue {
        self.check_same(&rhs);
        Residue {
            value: self.modulus.add(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Sub for Residue {
    type Output = Residue;
    fn sub(self, rhs: Residue) -> Residue {
        self.check_same(&rhs);
        Residue {
            value: self.modulus.sub(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Mul for Residue {
    type Output = Residue;
    fn mul(self, rhs: Residue) -> Residue {
        self.check_same(&rhs);
        Residue {
            value: self.modulus.mul(self.value, rhs.value),
            modulus: self.modulus,
        }
    }
}

impl Neg for Residue {
    type Output = Residue;
    fn neg(self) -> Residue {
        Residue {
            value: self.modulus.neg(self.value),
            modulus: self.modulus,
        }
    }
}

pub fn mod_pow(base: Residue, exponent: u64) -> Residue {
    Residue {
        value: base.modulus.pow(base.value, exponent),
        modulus: base.modulus,
    }
}

pub fn mod_inv(a: Residue) -> Result<Residue> {
    Ok(Residue {
        value: a.modulus.inv(a.value)?,
        modulus: a.modulus,
    })
}

/// The `(p-1)`-th root of unity mod `p^2` congruent to `a` mod `p`,
/// computed as `a^p mod p^2`.
pub fn teichmuller(a: i64, p: u64) -> Result<Residue> {
    let m = Modulus::prime_squared(p)?;
    let base = m.reduce_signed(a);
    if base % p == 0 {
        return Err(Error::NotInvertible {
            value: base,
            modulus: m.value(),
        });
    }
    Ok(m.residue(m.pow(base, p)))
}

/// Trial division; every prime this crate handles is below `2^32`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Odd primes strictly below `limit`, ascending.
pub fn odd_primes_below(limit: u64) -> Vec<u64> {
    if limit <= 3 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n];
    let mut i = 2;
    while i * i < n {
        if !composite[i] {
            let mut j = i * i;
            while j < n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    (3..n)
        .filter(|&k| !composite[k])
        .map(|k| k as u64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    fn big_pow_mod(b: u64, e: u32, m: u64) -> u64 {
        let v = BigUint::from(b).pow(e) % BigUint::from(m);
        v.try_into().unwrap()
    }

    #[test]
    fn pow_examples() {
        let m = Modulus::prime_field(37).unwrap();
        assert_eq!(big_pow_mod(2, 8, 37), 34);
        assert_eq!(big_pow_mod(3, 8, 37), 12);
        assert_eq!(mod_pow(m.residue(2), 8).value(), 34);
        assert_eq!(mod_pow(m.residue(3), 8).value(), 12);
        assert_eq!(mod_pow(m.residue(17), 0).value(), 1);
        assert_eq!(mod_pow(m.residue(0), 0).value(), 1);
    }

    #[test]
    fn inverse_examples() {
        let m = Modulus::prime_field(37).unwrap();
        assert_eq!(mod_inv(m.residue(30)).unwrap().value(), 21);
        assert_eq!(30 * 21 % 37, 1);
        assert_eq!(mod_inv(m.residue(1)).unwrap().value(), 1);
        let m2 = Modulus::prime_squared(37).unwrap();
        assert_eq!(mod_inv(m2.residue(1)).unwrap().value(), 1);
        assert!(matches!(
            mod_inv(m2.residue(37)),
            Err(Error::NotInvertible {
                value: 37,
                modulus: 1369
            })
        ));
    }

    #[test]
    fn teichmuller_examples() {
        assert_eq!(teichmuller(1, 37).unwrap().value(), 1);
        assert_eq!(teichmuller(36, 37).unwrap().value(), 37 * 37 - 1);
        // brute force: the unique x mod 25 with x = 2 mod 5 and x^4 = 1
        let roots: Vec<u64> = (0..25u64)
            .filter(|x| x % 5 == 2 && x.pow(4) % 25 == 1)
            .collect();
        assert_eq!(roots, vec![7]);
        assert_eq!(teichmuller(2, 5).unwrap().value(), 7);
        assert!(teichmuller(37, 37).is_err());
    }

    #[test]
    fn rejects_bad_moduli() {
        assert!(matches!(
            Modulus::prime_field(2),
            Err(Error::NotOddPrime(2))
        ));
        assert!(Modulus::prime_field(9).is_err());
        assert!(Modulus::new(5, 3).is_err());
        assert_eq!(Modulus::from_value(49).unwrap().prime(), 7);
        assert_eq!(Modulus::from_value(49).unwrap().exponent(), 2);
        assert!(Modulus::from_value(4).is_err());
        assert!(Modulus::from_value(15).is_err());
    }

    #[test]
    fn large_prime_square_arithmetic() {
        let p = 4_294_967_291u64; // largest prime below 2^32
        let m = Modulus::prime_squared(p).unwrap();
        let a = m.residue(p * p - 3);
        let b = a.inv().unwrap();
        assert_eq!((a * b).value(), 1);
        assert_eq!(mod_pow(m.residue(5), p - 1).reduce_to_field().value(), 1);
    }

    #[test]
    fn centered_representatives() {
        let m = Modulus::prime_field(37).unwrap();
        assert_eq!(m.centered(18), 18);
        assert_eq!(m.centered(19), -18);
        assert_eq!(m.centered(36), -1);
    }

    #[test]
    fn primes_below() {
        assert_eq!(odd_primes_below(20), vec![3, 5, 7, 11, 13, 17, 19]);
        assert!(odd_primes_below(3).is_empty());
        assert_eq!(odd_primes_below(10_000).len(), 1228);
    }

    fn small_prime() -> impl Strategy<Value = u64> {
        prop::sample::select(odd_primes_below(2000))
    }

    proptest! {
        #[test]
        fn teichmuller_lifts(p in small_prime(), a in 1i64..100_000) {
            prop_assume!(!(a as u64).is_multiple_of(p));
            let w = teichmuller(a, p).unwrap();
            prop_assert_eq!(w.value() % p, a as u64 % p);
            prop_assert_eq!(w.pow(p - 1).value(), 1);
        }

        #[test]
        fn teichmuller_is_multiplicative(p in small_prime(), a in 1i64..5000, b in 1i64..5000) {
            prop_assume!(!(a as u64).is_multiple_of(p) && !(b as u64).is_multiple_of(p));
            let lhs = teichmuller(a * b, p).unwrap();
            let rhs = teichmuller(a, p).unwrap() * teichmuller(b, p).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn inverse_and_fermat(p in small_prime(), a in 1u64..1_000_000, sq in any::<bool>()) {
            prop_assume!(a % p != 0);
            let m = Modulus::new(p, if sq { 2 } else { 1 }).unwrap();
            let x = m.residue(a);
            prop_assert_eq!(x.inv().unwrap().inv().unwrap(), x);
            prop_assert_eq!(x.pow(p - 1).reduce_to_field().value(), 1);
        }
    }
}
