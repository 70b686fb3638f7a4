//! Bernoulli numbers (exact and modular), irregular pairs, and the
//! constant and linear coefficients of the characteristic power series
//! attached to an irregular pair.

pub mod cache;
pub mod exact;
pub mod modp;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

pub use cache::BernoulliCache;
pub use exact::{bernoulli_exact, bernoulli_exact_bounded, ExactBernoulli, DEFAULT_BOUND};
pub use modp::{bernoulli_mod_single, BernoulliTableModP};

use crate::error::{Error, Result};
use crate::modring::{odd_primes_below, Modulus, Residue};

/// Primes handled by [`scan_irregular`] stay below this.
pub const SCAN_LIMIT_MAX: u64 = 10_000;

/// An odd prime `p` and even `r` in `[2, p-3]` with `p | B_r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct IrregularPair {
    p: u64,
    r: u64,
}

impl IrregularPair {
    /// Checks the index range and `B_r = 0 mod p`. Costs `O(p log p)`.
    pub fn new(p: u64, r: u64) -> Result<Self> {
        Modulus::prime_field(p)?;
        if r % 2 == 1 || r < 2 || r + 3 > p {
            return Err(Error::NotIrregular { p, r });
        }
        if bernoulli_mod_single(r, p)? != 0 {
            return Err(Error::NotIrregular { p, r });
        }
        Ok(IrregularPair { p, r })
    }

    // Only for indices already read off a verified table.
    pub(crate) fn from_table(p: u64, r: u64) -> Self {
        IrregularPair { p, r }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    pub fn field(&self) -> Modulus {
        Modulus::prime_field(self.p).expect("validated at construction")
    }
}

impl fmt::Display for IrregularPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.r)
    }
}

/// `B_k mod p^precision`.
///
/// Precision 1 with `k <= p-3` goes through the mod-`p` series table;
/// everything else reduces the exact rational, so it is capped at
/// [`DEFAULT_BOUND`].
pub fn bernoulli_mod(k: u64, p: u64, precision: u32) -> Result<Residue> {
    let m = Modulus::new(p, precision)?;
    if k < 2 || k % 2 == 1 {
        return Err(Error::domain(format!("index {k} must be even and >= 2")));
    }
    if k.is_multiple_of(p - 1) {
        return Err(Error::PoleAtIndex { index: k, p });
    }
    if precision == 1 && k + 3 <= p {
        let table = BernoulliTableModP::compute(p)?;
        return Ok(m.residue(table.get(k).expect("index within table")));
    }
    bernoulli_exact(k)?.reduce(m)
}

pub fn irregular_pairs(p: u64) -> Result<Vec<IrregularPair>> {
    let table = BernoulliTableModP::compute(p)?;
    Ok(pairs_from_table(&table))
}

fn pairs_from_table(table: &BernoulliTableModP) -> Vec<IrregularPair> {
    table
        .irregular_indices()
        .into_iter()
        .map(|r| IrregularPair::from_table(table.prime(), r))
        .collect()
}

/// Irregular indices for every odd prime below `limit`; primes without any
/// are omitted. Runs on the current rayon pool. When a cache is supplied,
/// complete tables are read from it and newly computed ones appended.
pub fn scan_irregular(
    limit: u64,
    cache: Option<&mut BernoulliCache>,
) -> Result<BTreeMap<u64, Vec<u64>>> {
    Ok(scan_tables(limit, cache)?
        .into_iter()
        .filter_map(|t| {
            let idx = t.irregular_indices();
            (!idx.is_empty()).then(|| (t.prime(), idx))
        })
        .collect())
}

/// Irregular pairs below `limit`, ascending by `(p, r)`.
pub fn scan_irregular_pairs(
    limit: u64,
    cache: Option<&mut BernoulliCache>,
) -> Result<Vec<IrregularPair>> {
    Ok(scan_tables(limit, cache)?
        .iter()
        .flat_map(pairs_from_table)
        .collect())
}

fn scan_tables(
    limit: u64,
    mut cache: Option<&mut BernoulliCache>,
) -> Result<Vec<BernoulliTableModP>> {
    if limit > SCAN_LIMIT_MAX {
        return Err(Error::BoundExceeded {
            what: "scan limit",
            value: limit,
            bound: SCAN_LIMIT_MAX,
        });
    }
    let primes = odd_primes_below(limit);
    let cached: Vec<Option<BernoulliTableModP>> = primes
        .iter()
        .map(|&p| cache.as_ref().and_then(|c| c.table_mod_p(p)))
        .collect();
    let fresh: Vec<Option<BernoulliTableModP>> = primes
        .par_iter()
        .zip(cached.par_iter())
        .map(|(&p, hit)| match hit {
            Some(_) => Ok(None),
            None => BernoulliTableModP::compute(p).map(Some),
        })
        .collect::<Result<_>>()?;

    let mut tables = Vec::with_capacity(primes.len());
    for (hit, computed) in cached.into_iter().zip(fresh) {
        match (hit, computed) {
            (Some(t), _) => tables.push(t),
            (None, Some(t)) => {
                if let Some(c) = cache.as_deref_mut() {
                    c.insert_table(&t)?;
                }
                tables.push(t);
            }
            (None, None) => unreachable!(),
        }
    }
    Ok(tables)
}

/// `f(0)/p` and `f'(0)` mod `p` for the characteristic power series `f`
/// of the `omega^(p-r)` eigenspace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IwasawaCoeffs {
    pub pair: IrregularPair,
    pub f0_over_p: Residue,
    pub fprime0: Residue,
}

/// Uses `f(0) = ((r-2)/r) B_r - B_{r+p-1}` and
/// `p f'(0) = B_r/r - B_{r+p-1}/(r-1)`, both mod `p^2`.
pub fn iwasawa_coeffs(pair: IrregularPair) -> Result<IwasawaCoeffs> {
    let (p, r) = (pair.p, pair.r);
    let m2 = Modulus::prime_squared(p)?;
    let b_r = bernoulli_exact(r)?.reduce(m2)?;
    if b_r.value() % p != 0 {
        return Err(Error::NotIrregular { p, r });
    }
    let b_shift = bernoulli_exact(r + p - 1)?.reduce(m2)?;

    let r_inv = m2.residue(r).inv()?;
    let r1_inv = m2.residue(r - 1).inv()?;
    let f0 = m2.residue(r - 2) * r_inv * b_r - b_shift;
    let pf1 = b_r * r_inv - b_shift * r1_inv;

    let divide = |x: Residue, name: &str| {
        x.divide_by_prime()
            .ok_or_else(|| Error::IntegralityFailure {
                p,
                r,
                detail: format!("{name} = {} is not divisible by p", x.value()),
            })
    };
    Ok(IwasawaCoeffs {
        pair,
        f0_over_p: divide(f0, "f(0)")?,
        fprime0: divide(pf1, "p f'(0)")?,
    })
}
