//! The linear system cut out by the symbol relations `{rho_a, rho_{a-1}} = 0`
//! among cyclotomic units, together with skew-symmetry, and its solution:
//! the pairing values `e_{i,r}` up to a common scalar.
//!
//! Unknowns are indexed by odd `i` in `[1, p-2]`; column `(i-1)/2` holds
//! `x_i`. The partner of `i` is `r - i` reduced mod `p-1` into `[1, p-2]`.

use std::fmt;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::bernoulli::{bernoulli_mod_single, IrregularPair};
use crate::error::{Error, Result};
use crate::linalg::{kernel_mod_p, solution_module_mod_p2, KernelBasis, ModMatrix, RowTag};
use crate::modring::{teichmuller, Modulus, Residue};

/// Largest prime for the mod-`p^2` solver.
pub const MOD_P2_PRIME_BOUND: u64 = 3000;

/// How the bases `a`, `2`, `a-1` are lifted when working mod `p^2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LiftConvention {
    /// Replace each base `b` by its Teichmüller lift `b^p`.
    #[default]
    Teichmuller,
    /// Use the integers themselves.
    Naive,
}

pub fn column_of(i: u64) -> usize {
    debug_assert!(i % 2 == 1);
    ((i - 1) / 2) as usize
}

pub fn index_of(column: usize) -> u64 {
    2 * column as u64 + 1
}

/// `r - i` reduced into `[1, p-2]`; odd whenever `i` is.
pub fn partner_index(p: u64, r: u64, i: u64) -> u64 {
    (r as i64 - i as i64).rem_euclid(p as i64 - 1) as u64
}

/// Coefficient of `x_i` in the relation for `a`:
/// `(1 + a^(p-i) - 2^(p-i)) (1 - 2^(p-r+i)) (1 - (a-1)^(p-r+i))`.
pub fn relation_coefficient(
    pair: &IrregularPair,
    a: u64,
    i: u64,
    precision: u32,
) -> Result<Residue> {
    relation_coefficient_with(pair, a, i, precision, LiftConvention::Teichmuller)
}

pub fn relation_coefficient_with(
    pair: &IrregularPair,
    a: u64,
    i: u64,
    precision: u32,
    convention: LiftConvention,
) -> Result<Residue> {
    let (p, r) = (pair.p(), pair.r());
    if a < 3 || a > p - 1 {
        return Err(Error::domain(format!("a = {a} outside [3, {}]", p - 1)));
    }
    if i.is_multiple_of(2) || i > p - 2 {
        return Err(Error::domain(format!(
            "i = {i} is not odd in [1, {}]",
            p - 2
        )));
    }
    let m = Modulus::new(p, precision)?;
    let lifts = Lifts::new(m, convention)?;
    Ok(m.residue(lifts.coefficient(p, r, a, i)))
}

/// Bases (as residues mod `p^precision`) for one modulus and convention.
struct Lifts {
    modulus: Modulus,
    convention: LiftConvention,
}

impl Lifts {
    fn new(modulus: Modulus, convention: LiftConvention) -> Result<Self> {
        Ok(Lifts {
            modulus,
            convention,
        })
    }

    fn lift(&self, b: u64) -> u64 {
        let m = self.modulus;
        match (m.exponent(), self.convention) {
            (1, _) | (_, LiftConvention::Naive) => m.reduce(b),
            _ => teichmuller(b as i64, m.prime())
                .expect("bases are units")
                .value(),
        }
    }

    fn coefficient(&self, p: u64, r: u64, a: u64, i: u64) -> u64 {
        let m = self.modulus;
        let (la, l2, la1) = (self.lift(a), self.lift(2), self.lift(a - 1));
        let e1 = p - i;
        let e2 = p - r + i;
        let f1 = m.sub(m.add(1, m.pow(la, e1)), m.pow(l2, e1));
        let f2 = m.sub(1, m.pow(l2, e2));
        let f3 = m.sub(1, m.pow(la1, e2));
        m.mul(m.mul(f1, f2), f3)
    }
}

#[derive(Clone, Debug)]
pub struct RelationSystem {
    pub pair: IrregularPair,
    pub precision: u32,
    pub include_odd_a: bool,
    pub convention: LiftConvention,
    pub matrix: ModMatrix,
}

impl RelationSystem {
    pub fn columns(&self) -> usize {
        self.matrix.cols()
    }

    pub fn relation_rows(&self) -> usize {
        self.count(|t| matches!(t, RowTag::Relation { .. }))
    }

    pub fn skew_rows(&self) -> usize {
        self.count(|t| matches!(t, RowTag::Skew { .. } | RowTag::SelfPair { .. }))
    }

    fn count(&self, f: impl Fn(&RowTag) -> bool) -> usize {
        self.matrix.row_tags().iter().filter(|t| f(t)).count()
    }
}

pub fn build_system(
    pair: &IrregularPair,
    precision: u32,
    include_odd_a: bool,
) -> Result<RelationSystem> {
    build_system_with(pair, precision, include_odd_a, LiftConvention::Teichmuller)
}

pub fn build_system_with(
    pair: &IrregularPair,
    precision: u32,
    include_odd_a: bool,
    convention: LiftConvention,
) -> Result<RelationSystem> {
    let (p, r) = (pair.p(), pair.r());
    let m = Modulus::new(p, precision)?;
    let lifts = Lifts::new(m, convention)?;
    let cols = ((p - 1) / 2) as usize;

    // powers are shared across rows: precompute 2^(p-i) and 2^(p-r+i)
    let l2 = lifts.lift(2);
    let mut two_a = vec![0u64; cols];
    let mut two_b = vec![0u64; cols];
    for (c, (x, y)) in two_a.iter_mut().zip(two_b.iter_mut()).enumerate() {
        let i = index_of(c);
        *x = m.pow(l2, p - i);
        *y = m.sub(1, m.pow(l2, p - r + i));
    }

    let mut matrix = ModMatrix::with_columns(m, cols);
    let mut a_values: Vec<u64> = (4..=p - 1).step_by(2).collect();
    if include_odd_a {
        a_values.extend((3..=p - 2).step_by(2));
    }
    let mut row = vec![0u64; cols];
    for a in a_values {
        let (la, la1) = (lifts.lift(a), lifts.lift(a - 1));
        for (c, slot) in row.iter_mut().enumerate() {
            let i = index_of(c);
            let f1 = m.sub(m.add(1, m.pow(la, p - i)), two_a[c]);
            let f3 = m.sub(1, m.pow(la1, p - r + i));
            *slot = m.mul(m.mul(f1, two_b[c]), f3);
        }
        matrix.push_row(&row, RowTag::Relation { a });
    }

    for c in 0..cols {
        let i = index_of(c);
        let j = partner_index(p, r, i);
        row.fill(0);
        if j == i {
            row[c] = 2;
            matrix.push_row(&row, RowTag::SelfPair { i });
        } else if i < j {
            row[c] = 1;
            row[column_of(j)] = 1;
            matrix.push_row(&row, RowTag::Skew { i, j });
        }
    }

    Ok(RelationSystem {
        pair: *pair,
        precision,
        include_odd_a,
        convention,
        matrix,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// The smallest index with a nonzero entry carries the value 1.
    FirstNonzeroOne,
}

/// Solution of the mod-`p` system, normalized up to scalar.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairingVector {
    pair: IrregularPair,
    // values[(i-1)/2] = e_{i,r} mod p
    values: Vec<u64>,
    pub normalization: Normalization,
    pub kernel_dimension: usize,
    // every normalized kernel basis vector; values == basis[0]
    basis: Vec<Vec<u64>>,
}

impl PairingVector {
    /// A vector with explicit entries, normalized; used for synthetic
    /// inputs and for values read back from exports.
    pub fn from_values(pair: IrregularPair, values: Vec<u64>) -> Result<Self> {
        let cols = ((pair.p() - 1) / 2) as usize;
        if values.len() != cols {
            return Err(Error::domain(format!(
                "expected {cols} entries, got {}",
                values.len()
            )));
        }
        let field = pair.field();
        let values: Vec<u64> = values.into_iter().map(|x| field.reduce(x)).collect();
        let values = normalize(field, values)?;
        Ok(PairingVector {
            pair,
            basis: vec![values.clone()],
            values,
            normalization: Normalization::FirstNonzeroOne,
            kernel_dimension: 1,
        })
    }

    pub fn pair(&self) -> IrregularPair {
        self.pair
    }

    /// `e_{i,r}` for odd `i` in `[1, p-2]`.
    pub fn entry(&self, i: u64) -> Option<Residue> {
        if i.is_multiple_of(2) || i == 0 || i > self.pair.p() - 2 {
            return None;
        }
        Some(self.pair.field().residue(self.values[column_of(i)]))
    }

    /// `(i, e_{i,r})`, ascending in `i`.
    pub fn entries(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(c, &v)| (index_of(c), v))
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn basis(&self) -> &[Vec<u64>] {
        &self.basis
    }

    pub fn is_unique(&self) -> bool {
        self.kernel_dimension == 1
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0)
    }

    /// Whether the two vectors agree up to a nonzero scalar.
    pub fn projectively_equal(&self, other: &[u64]) -> bool {
        projectively_equal(self.pair.field(), &self.values, other)
    }

    pub fn report(&self) -> PairingReport<'_> {
        PairingReport {
            p: self.pair.p(),
            r: self.pair.r(),
            kernel_dim: self.kernel_dimension,
            normalization: self.normalization,
            entries: Entries(&self.values),
        }
    }
}

/// JSON export shape for a single pairing.
#[derive(Serialize)]
pub struct PairingReport<'a> {
    pub p: u64,
    pub r: u64,
    pub kernel_dim: usize,
    pub normalization: Normalization,
    pub entries: Entries<'a>,
}

/// Serializes as `{"1": e_1, "3": e_3, ...}` in ascending index order.
pub struct Entries<'a>(pub &'a [u64]);

impl Serialize for Entries<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (c, v) in self.0.iter().enumerate() {
            map.serialize_entry(&index_of(c).to_string(), v)?;
        }
        map.end()
    }
}

fn normalize(field: Modulus, mut v: Vec<u64>) -> Result<Vec<u64>> {
    if let Some(&lead) = v.iter().find(|&&x| x != 0) {
        let inv = field.inv(lead)?;
        for x in &mut v {
            *x = field.mul(*x, inv);
        }
    }
    Ok(v)
}

pub fn projectively_equal(field: Modulus, a: &[u64], b: &[u64]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let na = normalize(field, a.iter().map(|&x| field.reduce(x)).collect());
    let nb = normalize(field, b.iter().map(|&x| field.reduce(x)).collect());
    matches!((na, nb), (Ok(x), Ok(y)) if x == y)
}

pub fn solve_pairing(pair: &IrregularPair) -> Result<PairingVector> {
    solve_pairing_with(pair, false)
}

pub fn solve_pairing_with(pair: &IrregularPair, include_odd_a: bool) -> Result<PairingVector> {
    let system = build_system(pair, 1, include_odd_a)?;
    let kernel = kernel_mod_p(&system.matrix)?;
    if kernel.dimension() == 0 {
        return Err(Error::TriviallyZero {
            p: pair.p(),
            r: pair.r(),
        });
    }
    let field = pair.field();
    let dim = kernel.dimension();
    let basis = kernel
        .into_vectors()
        .into_iter()
        .map(|v| normalize(field, v))
        .collect::<Result<Vec<_>>>()?;
    for v in &basis {
        assert!(system.matrix.annihilates(v), "kernel vector fails re-check");
    }
    Ok(PairingVector {
        pair: *pair,
        values: basis[0].clone(),
        normalization: Normalization::FirstNonzeroOne,
        kernel_dimension: dim,
        basis,
    })
}

/// Solution module of the mod-`p^2` system.
#[derive(Clone, Debug)]
pub struct ModP2Solution {
    pub pair: IrregularPair,
    pub convention: LiftConvention,
    pub module: KernelBasis,
}

impl ModP2Solution {
    /// `e` with module order `p^e`.
    pub fn order_exponent(&self) -> u32 {
        self.module.order_exponent()
    }
}

pub fn solve_pairing_mod_p2(pair: &IrregularPair) -> Result<ModP2Solution> {
    solve_pairing_mod_p2_with(pair, LiftConvention::Teichmuller)
}

pub fn solve_pairing_mod_p2_with(
    pair: &IrregularPair,
    convention: LiftConvention,
) -> Result<ModP2Solution> {
    if pair.p() > MOD_P2_PRIME_BOUND {
        return Err(Error::BoundExceeded {
            what: "prime for the mod p^2 solver",
            value: pair.p(),
            bound: MOD_P2_PRIME_BOUND,
        });
    }
    let system = build_system_with(pair, 2, false, convention)?;
    let module = solution_module_mod_p2(&system.matrix)?;
    Ok(ModP2Solution {
        pair: *pair,
        convention,
        module,
    })
}

/// Whether `e_{p-r,r}` vanishes.
pub fn check_vanishing_at_p_minus_r(v: &PairingVector) -> bool {
    let pair = v.pair();
    v.entry(pair.p() - pair.r()).is_some_and(|e| e.is_zero())
}

/// Outcome of the `r = (p+3)/2` degeneracy test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegeneracyReport {
    pub p: u64,
    pub r: u64,
    /// Index `(p+1)/2`, the partner of `1`.
    pub partner: u64,
    /// `2^(p-r+1) = 1 mod p`, killing the middle factor at `i = 1`.
    pub two_power_is_one: bool,
    /// `p - r + (p+1)/2 = 0 mod (p-1)`, killing the middle factor at the partner.
    pub partner_exponent_vanishes: bool,
    /// Both columns evaluate to zero in every even-`a` relation row.
    pub columns_vanish: bool,
    /// `p | B_r`, checked by a single-index congruence.
    pub pair_irregular: bool,
    pub degeneracy_present: bool,
}

/// Tests whether `x_1 = -x_{(p+1)/2} = 1`, all else zero, solves the
/// system for `r = (p+3)/2`, without assembling the matrix.
pub fn check_degenerate_candidate(p: u64, r: u64) -> Result<DegeneracyReport> {
    let m = Modulus::prime_field(p)?;
    if p % 4 != 1 || r != (p + 3) / 2 {
        return Err(Error::domain(format!(
            "degeneracy test needs p = 1 mod 4 and r = (p+3)/2; got p = {p}, r = {r}"
        )));
    }
    let partner = p.div_ceil(2);
    debug_assert_eq!(partner_index(p, r, 1), partner);
    let two_power_is_one = m.pow(2, p - r + 1) == 1;
    let partner_exponent_vanishes = (p - r + partner).is_multiple_of(p - 1);

    let lifts = Lifts::new(m, LiftConvention::Teichmuller)?;
    let columns_vanish = (4..=p - 1)
        .step_by(2)
        .all(|a| lifts.coefficient(p, r, a, 1) == 0 && lifts.coefficient(p, r, a, partner) == 0);
    let pair_irregular = bernoulli_mod_single(r, p)? == 0;

    Ok(DegeneracyReport {
        p,
        r,
        partner,
        two_power_is_one,
        partner_exponent_vanishes,
        columns_vanish,
        pair_irregular,
        degeneracy_present: two_power_is_one && partner_exponent_vanishes && columns_vanish,
    })
}

impl fmt::Display for DegeneracyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "p = {}, r = {}, partner index {}",
            self.p, self.r, self.partner
        )?;
        writeln!(f, "2^(p-r+1) = 1 mod p: {}", self.two_power_is_one)?;
        writeln!(
            f,
            "partner exponent = 0 mod p-1: {}",
            self.partner_exponent_vanishes
        )?;
        writeln!(
            f,
            "columns 1 and {} vanish: {}",
            self.partner, self.columns_vanish
        )?;
        writeln!(f, "p | B_r: {}", self.pair_irregular)?;
        write!(f, "degeneracy present: {}", self.degeneracy_present)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;

    fn pair(p: u64, r: u64) -> IrregularPair {
        IrregularPair::new(p, r).unwrap()
    }

    #[test]
    fn coefficient_against_big_integer_evaluation() {
        let pw = |b: i64, e: u32| BigInt::from(b).pow(e);
        let big = (BigInt::from(1) + pw(4, 34) - pw(2, 34))
            * (BigInt::from(1) - pw(2, 8))
            * (BigInt::from(1) - pw(3, 8));
        let m37 = BigInt::from(37);
        let expected = ((big % &m37 + &m37) % &m37).to_u64().unwrap();
        assert_eq!(expected, 29);
        let got = relation_coefficient(&pair(37, 32), 4, 3, 1).unwrap();
        assert_eq!(got.value(), 29);
    }

    #[test]
    fn column_r_minus_one_vanishes() {
        let pr = pair(37, 32);
        for a in (4..=36).step_by(2) {
            for prec in [1, 2] {
                assert!(relation_coefficient(&pr, a, 31, prec).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn coefficient_domain() {
        let pr = pair(37, 32);
        assert!(relation_coefficient(&pr, 2, 3, 1).is_err());
        assert!(relation_coefficient(&pr, 37, 3, 1).is_err());
        assert!(relation_coefficient(&pr, 4, 4, 1).is_err());
        assert!(relation_coefficient(&pr, 4, 37, 1).is_err());
    }

    #[test]
    fn system_shapes() {
        let s = build_system(&pair(37, 32), 1, false).unwrap();
        assert_eq!(s.columns(), 18);
        assert_eq!(s.relation_rows(), 17);
        assert_eq!(s.skew_rows(), 9);

        let s = build_system(&pair(37, 32), 1, true).unwrap();
        assert_eq!(s.relation_rows(), 34);

        let s = build_system(&pair(59, 44), 1, false).unwrap();
        assert!(s.matrix.row_tags().contains(&RowTag::SelfPair { i: 51 }));
        assert_eq!(partner_index(59, 44, 51), 51);
    }

    #[test]
    fn matrix_entries_match_single_coefficients() {
        let pr = pair(59, 44);
        for prec in [1, 2] {
            for conv in [LiftConvention::Teichmuller, LiftConvention::Naive] {
                let s = build_system_with(&pr, prec, true, conv).unwrap();
                for (row, tag) in s.matrix.row_tags().iter().enumerate() {
                    if let RowTag::Relation { a } = *tag {
                        for c in 0..s.columns() {
                            let want = relation_coefficient_with(&pr, a, index_of(c), prec, conv)
                                .unwrap()
                                .value();
                            assert_eq!(s.matrix.get(row, c), want);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn conventions_agree_mod_p() {
        let pr = pair(37, 32);
        let t = build_system_with(&pr, 2, false, LiftConvention::Teichmuller).unwrap();
        let n = build_system_with(&pr, 2, false, LiftConvention::Naive).unwrap();
        assert_eq!(t.matrix.reduce_mod_p(), n.matrix.reduce_mod_p());
        assert_ne!(t.matrix, n.matrix);
    }

    #[test]
    fn golden_37_32() {
        let v = solve_pairing(&pair(37, 32)).unwrap();
        assert_eq!(v.kernel_dimension, 1);
        let golden: [i64; 18] = [
            1, -11, 0, -1, 1, -2, -6, -3, 3, 6, 2, -1, 1, 0, 11, -1, 11, -11,
        ];
        let golden: Vec<u64> = golden.iter().map(|&x| x.rem_euclid(37) as u64).collect();
        assert!(v.projectively_equal(&golden));
        assert_eq!(v.values(), golden.as_slice());
        assert!(check_vanishing_at_p_minus_r(&v));
    }

    #[test]
    fn pairing_59_44() {
        let v = solve_pairing(&pair(59, 44)).unwrap();
        assert_eq!(v.kernel_dimension, 1);
        assert!(v.entry(51).unwrap().is_zero());
        assert!(v.entry(15).unwrap().is_zero());
        assert!(check_vanishing_at_p_minus_r(&v));
    }

    #[test]
    fn synthetic_vanishing_failure() {
        let pr = pair(37, 32);
        let mut vals = vec![0u64; 18];
        vals[column_of(5)] = 1;
        let v = PairingVector::from_values(pr, vals).unwrap();
        assert!(!check_vanishing_at_p_minus_r(&v));
    }

    #[test]
    fn mod_p2_order_for_37() {
        let s = solve_pairing_mod_p2(&pair(37, 32)).unwrap();
        assert_eq!(s.order_exponent(), 1);
    }

    #[test]
    fn mod_p2_bound() {
        let pr = crate::modring::odd_primes_below(3300)
            .into_iter()
            .filter(|&p| p > MOD_P2_PRIME_BOUND)
            .flat_map(|p| crate::bernoulli::irregular_pairs(p).unwrap())
            .next()
            .unwrap();
        assert!(matches!(
            solve_pairing_mod_p2(&pr),
            Err(Error::BoundExceeded { .. })
        ));
    }

    #[test]
    fn degeneracy_examples() {
        let rep = check_degenerate_candidate(89209, 44606).unwrap();
        assert!(rep.two_power_is_one);
        assert!(rep.partner_exponent_vanishes);
        assert!(rep.columns_vanish);
        assert!(rep.degeneracy_present);

        let rep = check_degenerate_candidate(13, 8).unwrap();
        assert_eq!(2u64.pow(6) % 13, 12);
        assert!(!rep.two_power_is_one);
        assert!(!rep.degeneracy_present);

        // 37 = 5 mod 8, so 2 is a non-residue and 2^18 = -1
        let rep = check_degenerate_candidate(37, 20).unwrap();
        assert!(!rep.degeneracy_present);

        assert!(check_degenerate_candidate(37, 32).is_err());
        assert!(check_degenerate_candidate(43, 23).is_err());
    }

    #[test]
    fn coefficient_vanishes_at_i1_for_89209() {
        let pr = IrregularPair::new(89209, 44606).unwrap();
        for a in [4u64, 10, 1000, 89208] {
            assert!(relation_coefficient(&pr, a, 1, 1).unwrap().is_zero());
        }
    }
}
