//! The end-to-end verification suite run by `cyclopair verify-all`.
//!
//! Each [`Check`] corresponds to one numbered acceptance criterion. Checks
//! never panic on a mathematical mismatch; they report it.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bernoulli::{
    bernoulli_exact, iwasawa_coeffs, scan_irregular_pairs, BernoulliCache, BernoulliTableModP,
    IrregularPair,
};
use crate::error::Result;
use crate::galois::galois_relation;
use crate::ihara::{
    commutator_ratio, cross_check_pairing, derivation_to_galois, DerivationRelation, LambdaTable,
};
use crate::linalg::{kernel_mod_p, solution_module_mod_p2, ModMatrix};
use crate::modring::{odd_primes_below, Modulus};
use crate::relations::{
    check_degenerate_candidate, check_vanishing_at_p_minus_r, partner_index, solve_pairing,
    solve_pairing_mod_p2, solve_pairing_with, PairingVector,
};

/// Entries `{i: e_i}` of the (37, 32) pairing, partners included.
pub const GOLDEN_37_32: [(u64, i64); 18] = [
    (1, 1),
    (3, -11),
    (5, 0),
    (7, -1),
    (9, 1),
    (11, -2),
    (13, -6),
    (15, -3),
    (17, 3),
    (19, 6),
    (21, 2),
    (23, -1),
    (25, 1),
    (27, 0),
    (29, 11),
    (31, -1),
    (33, 11),
    (35, -11),
];

#[derive(Clone, Debug)]
pub struct Check {
    pub criterion: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] criterion {}: {} ({:.2?}) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.criterion,
            self.name,
            self.elapsed,
            self.detail
        )
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteConfig {
    /// Primes below this are scanned for criteria 2, 3 and 8.
    pub limit: u64,
    /// Primes below this go through the mod-`p^2` solver.
    pub mod_p2_limit: u64,
    pub kernel_cases: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            limit: 1000,
            mod_p2_limit: 300,
            kernel_cases: 600,
            seed: 0x5eed,
        }
    }
}

fn timed(criterion: u8, name: &'static str, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(x) => x,
        Err(e) => (false, format!("error: {e}")),
    };
    Check {
        criterion,
        name,
        passed,
        detail,
        elapsed: start.elapsed(),
    }
}

fn within(check: Check, limit: Duration) -> Check {
    if check.elapsed <= limit {
        return check;
    }
    Check {
        passed: false,
        detail: format!("{} (exceeded {:?})", check.detail, limit),
        ..check
    }
}

/// Runs every criterion in order. The Bernoulli cache, if any, backs the
/// irregular-pair scan.
pub fn run_suite(cfg: &SuiteConfig, cache: Option<&mut BernoulliCache>) -> Result<Vec<Check>> {
    let mut checks = vec![within(golden_vector(), Duration::from_secs(1))];

    let start = Instant::now();
    let pairs = scan_irregular_pairs(cfg.limit, cache)?;
    let solved: Vec<Result<PairingVector>> = pairs.par_iter().map(solve_pairing).collect();
    let scan_time = start.elapsed();
    checks.push(timed(2, "uniqueness", || {
        let bad: Vec<String> = pairs
            .iter()
            .zip(&solved)
            .filter(|(_, v)| !matches!(v, Ok(v) if v.is_unique()))
            .map(|(p, _)| p.to_string())
            .collect();
        Ok((
            bad.is_empty(),
            format!(
                "{} pairs below {}, non-unique: {:?}",
                pairs.len(),
                cfg.limit,
                bad
            ),
        ))
    }));
    // the scan and solves above belong to this criterion
    checks[1].elapsed += scan_time;
    checks.push(timed(3, "vanishing at p-r", || {
        let bad: Vec<String> = solved
            .iter()
            .flatten()
            .filter(|v| !check_vanishing_at_p_minus_r(v))
            .map(|v| v.pair().to_string())
            .collect();
        Ok((bad.is_empty(), format!("failures: {bad:?}")))
    }));
    checks.push(mod_p2_bound(&pairs, cfg.mod_p2_limit));
    checks.push(within(bernoulli_congruences(), Duration::from_secs(1)));
    checks.push(ihara());
    checks.push(within(degeneracy(), Duration::from_secs(1)));
    checks.push(properties(cfg, &pairs, &solved));
    Ok(checks)
}

fn golden_vector() -> Check {
    timed(1, "(37, 32) golden vector", || {
        let pair = IrregularPair::new(37, 32)?;
        let v = solve_pairing(&pair)?;
        let field = pair.field();
        let golden: Vec<u64> = GOLDEN_37_32
            .iter()
            .map(|&(_, e)| field.reduce_signed(e))
            .collect();
        let ok = v.is_unique() && v.projectively_equal(&golden);
        Ok((ok, format!("kernel_dim {}", v.kernel_dimension)))
    })
}

fn mod_p2_bound(pairs: &[IrregularPair], limit: u64) -> Check {
    timed(4, "mod p^2 solution order", || {
        let small: Vec<&IrregularPair> = pairs.iter().filter(|x| x.p() < limit).collect();
        let orders: Vec<u32> = small
            .par_iter()
            .map(|x| solve_pairing_mod_p2(x).map(|s| s.order_exponent()))
            .collect::<Result<_>>()?;
        let bad: Vec<String> = small
            .iter()
            .zip(&orders)
            .filter(|(_, &e)| e != 1)
            .map(|(x, e)| format!("{x}: p^{e}"))
            .collect();
        Ok((
            bad.is_empty() && !small.is_empty(),
            format!("{} pairs below {limit}, order != p: {bad:?}", small.len()),
        ))
    })
}

fn bernoulli_congruences() -> Check {
    timed(5, "Bernoulli congruences for (37, 32)", || {
        let pair = IrregularPair::new(37, 32)?;
        let c = iwasawa_coeffs(pair)?;
        let v = solve_pairing(&pair)?;
        let rel = galois_relation(&pair, &v, &c)?;
        let ratio = rel.a_gamma * rel.a_x.inv()?;
        let ok = c.f0_over_p.value() == 14 && c.fprime0.value() == 16 && ratio.centered() == -3;
        Ok((
            ok,
            format!(
                "f(0)/p = {}, f'(0) = {}, a_gamma/a_x = {}",
                c.f0_over_p,
                c.fprime0,
                ratio.centered()
            ),
        ))
    })
}

fn ihara() -> Check {
    timed(6, "Ihara cross-check at (691, 12)", || {
        let g = derivation_to_galois(
            &DerivationRelation::weight_twelve(),
            &LambdaTable::standard(),
        )?;
        let (c39, c57) = (g.get(3, 9).unwrap().value(), g.get(5, 7).unwrap().value());
        let proportional = c39 * 174 % 691 == c57 * 190 % 691;
        let ratio = commutator_ratio(&g)?;
        let start = Instant::now();
        let v = solve_pairing(&IrregularPair::new(691, 12)?)?;
        let solve_time = start.elapsed();
        let consistent = cross_check_pairing(&v, &g)?;
        let e3 = v.entry(3).unwrap().value();
        let e5 = v.entry(5).unwrap().value();
        let direct = e3 * 174 % 691 == e5 * 190 % 691;
        let ok = proportional
            && ratio.value() == 50
            && consistent
            && direct
            && v.is_unique()
            && solve_time < Duration::from_secs(10);
        Ok((
            ok,
            format!(
                "coeffs ({c39}, {c57}), ratio {}, pairing consistent {consistent}, solve {solve_time:.2?}",
                ratio
            ),
        ))
    })
}

fn degeneracy() -> Check {
    timed(7, "degeneracy at (89209, 44606)", || {
        let rep = check_degenerate_candidate(89209, 44606)?;
        let half = Modulus::prime_field(89209)?.pow(2, (89209 - 1) / 2) == 1;
        Ok((
            rep.degeneracy_present && rep.pair_irregular && half,
            format!(
                "2^((p-1)/2) = 1: {half}, columns vanish: {}, p | B_r: {}",
                rep.columns_vanish, rep.pair_irregular
            ),
        ))
    })
}

fn properties(
    cfg: &SuiteConfig,
    pairs: &[IrregularPair],
    solved: &[Result<PairingVector>],
) -> Check {
    timed(8, "property suites", || {
        let mut failures = Vec::new();
        if !bernoulli_paths_agree(100)? {
            failures.push("fast vs exact Bernoulli");
        }
        if !random_kernels_agree(cfg.kernel_cases, cfg.seed)? {
            failures.push("brute-force kernels");
        }
        if !kummer(100, 200)? {
            failures.push("Kummer congruence");
        }
        if !von_staudt_clausen(200)? {
            failures.push("von Staudt-Clausen");
        }
        if !solved.iter().flatten().all(skew_symmetric) {
            failures.push("skew symmetry");
        }
        let small: Vec<&IrregularPair> = pairs.iter().filter(|x| x.p() < 300).collect();
        let odd_a_ok = small
            .par_iter()
            .map(|x| -> Result<bool> {
                let even = solve_pairing(x)?;
                let all = solve_pairing_with(x, true)?;
                Ok(all.kernel_dimension == even.kernel_dimension && all.values() == even.values())
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .all(|b| b);
        if !odd_a_ok {
            failures.push("odd-a rows");
        }
        Ok((failures.is_empty(), format!("failed: {failures:?}")))
    })
}

/// Series table against the exact recurrence, `k <= min(p-3, 512)`.
pub fn bernoulli_paths_agree(max_p: u64) -> Result<bool> {
    for p in odd_primes_below(max_p + 1) {
        let table = BernoulliTableModP::compute(p)?;
        let m = Modulus::prime_field(p)?;
        for k in (2..=(p.saturating_sub(3)).min(512)).step_by(2) {
            if table.get(k) != Some(bernoulli_exact(k)?.reduce(m)?.value()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn brute_force_solutions(m: &ModMatrix) -> HashSet<Vec<u64>> {
    let q = m.modulus().value();
    let n = m.cols();
    let total = q.pow(n as u32);
    (0..total)
        .map(|mut code| {
            (0..n)
                .map(|_| {
                    let d = code % q;
                    code /= q;
                    d
                })
                .collect::<Vec<u64>>()
        })
        .filter(|v| m.annihilates(v))
        .collect()
}

fn generated_module(
    modulus: Modulus,
    gens: &[Vec<u64>],
    exps: &[u32],
    n: usize,
) -> HashSet<Vec<u64>> {
    let mut out = HashSet::from([vec![0; n]]);
    for (g, &e) in gens.iter().zip(exps) {
        let order = modulus.prime().pow(e);
        let mut next = HashSet::new();
        for v in &out {
            for c in 0..order {
                next.insert(
                    v.iter()
                        .zip(g)
                        .map(|(&x, &y)| modulus.add(x, modulus.mul(c, y)))
                        .collect(),
                );
            }
        }
        out = next;
    }
    out
}

/// Random matrices over `Z/p` and `Z/p^2` (moduli up to 121, at most six
/// columns): the solver's span must equal the brute-force solution set.
pub fn random_kernels_agree(cases: usize, seed: u64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let moduli = [3u64, 5, 7, 11, 9, 25, 49, 121];
    for _ in 0..cases {
        let modulus = Modulus::from_value(moduli[rng.random_range(0..moduli.len())])?;
        let q = modulus.value();
        let max_cols = (1..=6u32).filter(|&c| q.pow(c) <= 20_000).max().unwrap() as usize;
        let cols = rng.random_range(1..=max_cols);
        let rows = rng.random_range(1..=6);
        let mut m = ModMatrix::zeros(modulus, rows, cols);
        let sparse = rng.random_bool(0.5);
        for r in 0..rows {
            for c in 0..cols {
                let x = if sparse && rng.random_bool(0.6) {
                    modulus.prime() * rng.random_range(0..modulus.prime()) % q
                } else {
                    rng.random_range(0..q)
                };
                m.set(r, c, x);
            }
        }
        let brute = brute_force_solutions(&m);
        let basis = if modulus.exponent() == 1 {
            kernel_mod_p(&m)?
        } else {
            solution_module_mod_p2(&m)?
        };
        let generated = generated_module(modulus, basis.vectors(), basis.exponents(), cols);
        let expected_size = modulus.prime().pow(basis.order_exponent());
        if generated != brute || brute.len() as u64 != expected_size {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `B_k / k = B_{k+p-1} / (k+p-1) mod p` for `p - 1` not dividing `k`.
pub fn kummer(max_p: u64, max_k: u64) -> Result<bool> {
    for p in odd_primes_below(max_p + 1).into_iter().filter(|&p| p >= 5) {
        let m = Modulus::prime_field(p)?;
        for k in (2..=max_k).step_by(2).filter(|k| k % (p - 1) != 0) {
            let k2 = k + p - 1;
            if k % p == 0 || k2 % p == 0 {
                continue;
            }
            let lhs = m.mul(bernoulli_exact(k)?.reduce(m)?.value(), m.inv(k % p)?);
            let rhs = m.mul(bernoulli_exact(k2)?.reduce(m)?.value(), m.inv(k2 % p)?);
            if lhs != rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// The denominator of `B_k` is the product of primes `q` with `q - 1 | k`,
/// and `B_k + sum 1/q` is an integer.
pub fn von_staudt_clausen(max_k: u64) -> Result<bool> {
    for k in (2..=max_k).step_by(2) {
        let b = bernoulli_exact(k)?;
        let qs: Vec<u64> = std::iter::once(2)
            .chain(odd_primes_below(k + 2))
            .filter(|q| k % (q - 1) == 0)
            .collect();
        let prod: BigInt = qs.iter().map(|&q| BigInt::from(q)).product();
        if b.denominator() != &prod {
            return Ok(false);
        }
        // B_k + sum 1/q = (num + sum prod/q) / prod
        let shifted: BigInt = qs
            .iter()
            .fold(b.numerator().clone(), |acc, &q| acc + &prod / q);
        if !shifted.is_multiple_of(&prod) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `e_i + e_{i'} = 0` for partners and `e_i = 0` when `i` is its own partner,
/// for every vector in the kernel basis.
pub fn skew_symmetric(v: &PairingVector) -> bool {
    let (p, r) = (v.pair().p(), v.pair().r());
    let field = v.pair().field();
    v.basis().iter().all(|b| {
        (1..=p - 2).step_by(2).all(|i| {
            let j = partner_index(p, r, i);
            let (x, y) = (b[((i - 1) / 2) as usize], b[((j - 1) / 2) as usize]);
            field.add(x, y) == 0
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn component_checks() {
        assert!(bernoulli_paths_agree(60).unwrap());
        assert!(random_kernels_agree(120, 7).unwrap());
        assert!(kummer(40, 80).unwrap());
        assert!(von_staudt_clausen(80).unwrap());
        let v = solve_pairing(&IrregularPair::new(37, 32).unwrap()).unwrap();
        assert!(skew_symmetric(&v));
        let mut broken = v.values().to_vec();
        broken[3] = (broken[3] + 1) % 37;
        let w = PairingVector::from_values(v.pair(), broken).unwrap();
        assert!(!skew_symmetric(&w));
    }

    #[test]
    fn small_suite_passes() {
        let cfg = SuiteConfig {
            limit: 120,
            mod_p2_limit: 120,
            kernel_cases: 100,
            ..SuiteConfig::default()
        };
        let checks = run_suite(&cfg, None).unwrap();
        assert_eq!(checks.len(), 8);
        for c in &checks {
            assert!(c.passed, "{c}");
        }
    }
}
