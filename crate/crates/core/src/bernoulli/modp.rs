//! Bernoulli numbers modulo a prime without big integers.

use crate::error::{Error, Result};
use crate::modring::Modulus;

/// `B_k mod p` for every even `k` in `[2, p-3]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BernoulliTableModP {
    p: u64,
    // values[k/2 - 1] = B_k mod p
    values: Vec<u64>,
}

impl BernoulliTableModP {
    /// Inverts the power series `(e^t - 1)/t = sum t^n/(n+1)!` mod `p`
    /// and reads `B_k = k! * [t^k]`. Quadratic in `p`.
    pub fn compute(p: u64) -> Result<Self> {
        let m = Modulus::prime_field(p)?;
        if p < 5 {
            return Ok(BernoulliTableModP {
                p,
                values: Vec::new(),
            });
        }
        let top = (p - 3) as usize;

        // inverse factorials 1/n! for n <= top + 1 (all below p)
        let mut fact = 1u64;
        for n in 1..=(top as u64 + 1) {
            fact = m.mul(fact, n);
        }
        let mut inv_fact = vec![0u64; top + 2];
        inv_fact[top + 1] = m.inv(fact)?;
        for n in (0..=top).rev() {
            inv_fact[n] = m.mul(inv_fact[n + 1], n as u64 + 1);
        }

        // series a_j = 1/(j+1)!, inverse c with c_0 = 1.
        // Accumulate each convolution unreduced: terms are < p^2 and there
        // are at most p of them, which fits in a u64 for p < 2^21.
        let lazy = p < (1 << 21);
        let mut c = vec![0u64; top + 1];
        c[0] = 1;
        for n in 1..=top {
            let acc = if lazy {
                let mut acc = 0u64;
                for j in 1..=n {
                    acc += inv_fact[j + 1] * c[n - j];
                }
                acc % p
            } else {
                let mut acc = 0u64;
                for j in 1..=n {
                    acc = m.add(acc, m.mul(inv_fact[j + 1], c[n - j]));
                }
                acc
            };
            c[n] = m.neg(acc);
        }

        let mut values = Vec::with_capacity(top / 2);
        let mut fact = 1u64;
        for (k, &ck) in c.iter().enumerate().take(top + 1).skip(1) {
            fact = m.mul(fact, k as u64);
            if k % 2 == 0 {
                values.push(m.mul(fact, ck));
            }
        }
        Ok(BernoulliTableModP { p, values })
    }

    /// Builds a table from already-known residues (e.g. a cache hit).
    pub fn from_values(p: u64, values: Vec<u64>) -> Result<Self> {
        let expected = if p < 5 { 0 } else { ((p - 3) / 2) as usize };
        if values.len() != expected || values.iter().any(|&v| v >= p) {
            return Err(Error::domain(format!(
                "table for p = {p} needs {expected} residues below p"
            )));
        }
        Ok(BernoulliTableModP { p, values })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    /// `B_k mod p` for even `k` in `[2, p-3]`.
    pub fn get(&self, k: u64) -> Option<u64> {
        if k < 2 || k % 2 == 1 {
            return None;
        }
        self.values.get((k / 2 - 1) as usize).copied()
    }

    /// `(k, B_k mod p)` pairs, ascending in `k`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(idx, &v)| (2 * idx as u64 + 2, v))
    }

    /// Even indices `r` with `p | B_r`.
    pub fn irregular_indices(&self) -> Vec<u64> {
        self.iter()
            .filter(|&(_, v)| v == 0)
            .map(|(k, _)| k)
            .collect()
    }
}

/// `B_k mod p` for a single even `k` with `p` not dividing `k` and
/// `(p-1)` not dividing `k`, via Voronoi's congruence
/// `(c^k - 1) B_k = k c^(k-1) sum_{j<p} j^(k-1) floor(jc/p)  (mod p)`.
/// Linear in `p`; usable for primes far beyond the quadratic table.
pub fn bernoulli_mod_single(k: u64, p: u64) -> Result<u64> {
    let m = Modulus::prime_field(p)?;
    if k < 2 || k % 2 == 1 {
        return Err(Error::domain(format!("index {k} must be even and >= 2")));
    }
    if k.is_multiple_of(p - 1) {
        return Err(Error::PoleAtIndex { index: k, p });
    }
    if k.is_multiple_of(p) {
        return Err(Error::domain(format!(
            "index {k} is divisible by {p}; use the exact path"
        )));
    }
    // some c has c^k != 1 because (p-1) does not divide k
    let c = (2..p)
        .find(|&c| m.pow(c, k) != 1)
        .expect("a primitive root exists");
    let mut sum = 0u64;
    for j in 1..p {
        let q = (j * c) / p % p;
        if q != 0 {
            sum = m.add(sum, m.mul(q, m.pow(j, k - 1)));
        }
    }
    let rhs = m.mul(m.mul(k % p, m.pow(c, k - 1)), sum);
    let lhs_coeff = m.sub(m.pow(c, k), 1);
    Ok(m.mul(rhs, m.inv(lhs_coeff)?))
}
