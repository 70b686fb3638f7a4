//! Exact Bernoulli numbers from the defining recurrence
//! `sum_{j=0}^{k} C(k+1, j) B_j = 0`.
//!
//! Values are memoized in a process-wide table that grows on demand. The
//! recurrence sum is accumulated over a common denominator (the product of
//! all primes up to the target index plus one, which every `B_j` denominator
//! divides) so only one gcd is taken per new value.

use std::sync::Mutex;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::modring::{odd_primes_below, Modulus, Residue};

pub const DEFAULT_BOUND: u64 = 2048;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactBernoulli {
    index: u64,
    numerator: BigInt,
    denominator: BigInt,
}

impl ExactBernoulli {
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    /// Always positive.
    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    /// Reduction into `Z/p^k`; fails when `p` divides the denominator.
    pub fn reduce(&self, m: Modulus) -> Result<Residue> {
        let modulus = BigInt::from(m.value());
        let den = self.denominator.mod_floor(&modulus).to_u64().unwrap();
        if den % m.prime() == 0 {
            return Err(Error::PoleAtIndex {
                index: self.index,
                p: m.prime(),
            });
        }
        let num = self.numerator.mod_floor(&modulus).to_u64().unwrap();
        Ok(m.residue(m.mul(num, m.inv(den)?)))
    }
}

struct Table {
    // values[k] = (numerator, denominator) for every k computed so far
    values: Vec<(BigInt, BigInt)>,
}

static TABLE: Mutex<Table> = Mutex::new(Table { values: Vec::new() });

pub fn bernoulli_exact(k: u64) -> Result<ExactBernoulli> {
    bernoulli_exact_bounded(k, DEFAULT_BOUND)
}

/// `B_k` for even `k` (and `k = 1`), subject to `k <= bound`.
pub fn bernoulli_exact_bounded(k: u64, bound: u64) -> Result<ExactBernoulli> {
    if k > bound {
        return Err(Error::BoundExceeded {
            what: "Bernoulli index",
            value: k,
            bound,
        });
    }
    if k % 2 == 1 && k != 1 {
        return Ok(ExactBernoulli {
            index: k,
            numerator: BigInt::zero(),
            denominator: BigInt::one(),
        });
    }
    let mut table = TABLE.lock().unwrap_or_else(|e| e.into_inner());
    table.extend_to(k as usize);
    let (n, d) = &table.values[k as usize];
    Ok(ExactBernoulli {
        index: k,
        numerator: n.clone(),
        denominator: d.clone(),
    })
}

impl Table {
    fn extend_to(&mut self, target: usize) {
        if self.values.is_empty() {
            self.values.push((BigInt::one(), BigInt::one()));
            self.values.push((BigInt::from(-1), BigInt::from(2)));
        }
        let have = self.values.len() - 1;
        if target <= have {
            return;
        }
        // overshoot a little so a run of nearby requests shares one setup pass
        let target = target.max(have + 64).next_multiple_of(2);

        let mut common = BigInt::from(2);
        for q in odd_primes_below(target as u64 + 2) {
            common *= q;
        }
        // weights[j] = B_j * common, an integer
        let mut weights: Vec<Option<BigInt>> = self
            .values
            .iter()
            .map(|(n, d)| {
                if n.is_zero() {
                    None
                } else {
                    Some(n * (&common / d))
                }
            })
            .collect();

        let mut n = self.values.len();
        while n <= target {
            if n % 2 == 1 {
                self.values.push((BigInt::zero(), BigInt::one()));
                weights.push(None);
                n += 1;
                continue;
            }
            let mut sum = BigInt::zero();
            let mut binom = BigUint::one(); // C(n+1, j)
            for (j, w) in weights.iter().enumerate().take(n) {
                if let Some(w) = w {
                    sum += BigInt::from_biguint(Sign::Plus, binom.clone()) * w;
                }
                binom = binom * BigUint::from(n + 1 - j) / BigUint::from(j + 1);
            }
            // (n+1) B_n = -sum / common
            let mut num = -sum;
            let mut den = &common * BigInt::from(n + 1);
            let g = num.gcd(&den);
            num /= &g;
            den /= &g;
            if den.is_negative() {
                num = -num;
                den = -den;
            }
            weights.push(Some(&num * (&common / &den)));
            self.values.push((num, den));
            n += 1;
        }
    }
}
