//! Coefficient bookkeeping between the stable derivation algebra and the
//! graded Galois Lie algebra.
//!
//! A generator `D_m` is congruent mod `p` to `-(m-1)! lambda_m(D_m)` times
//! the image of `sigma_m`, so `[D_i, D_j]` carries the factor
//! `(i-1)! lambda_i (j-1)! lambda_j` (the two signs cancel).

use std::collections::BTreeMap;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modring::{Modulus, Residue};
use crate::relations::PairingVector;

/// `head * delta = sum c [D_i, D_j]` in weight `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DerivationRelation {
    pub p: u64,
    pub m: u32,
    pub head: i64,
    pub terms: Vec<(u32, u32, i64)>,
}

impl DerivationRelation {
    pub fn new(p: u64, m: u32, head: i64, terms: Vec<(u32, u32, i64)>) -> Result<Self> {
        Modulus::prime_field(p)?;
        for &(i, j, _) in &terms {
            if i + j != m || i >= j || i < 3 || i % 2 == 0 || j % 2 == 0 {
                return Err(Error::domain(format!(
                    "term [D_{i}, D_{j}] is not an odd pair i < j with i + j = {m}"
                )));
            }
        }
        Ok(DerivationRelation { p, m, head, terms })
    }

    /// `691 delta = 2 [D_3, D_9] - 27 [D_5, D_7]` in weight 12.
    pub fn weight_twelve() -> Self {
        Self::new(691, 12, 691, vec![(3, 9, 2), (5, 7, -27)]).expect("valid relation")
    }
}

/// `lambda_m(D_m)` for the weights where it is known.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LambdaTable(BTreeMap<u32, u64>);

impl LambdaTable {
    pub fn standard() -> Self {
        LambdaTable(BTreeMap::from([(3, 1), (5, 2), (7, 16), (9, 144)]))
    }

    pub fn from_map(values: BTreeMap<u32, u64>) -> Self {
        LambdaTable(values)
    }

    pub fn get(&self, m: u32) -> Option<u64> {
        self.0.get(&m).copied()
    }
}

/// Coefficients of `[sigma_i, sigma_j]`, keyed by `(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaloisCoeffs {
    pub field: Modulus,
    pub coeffs: BTreeMap<(u32, u32), Residue>,
}

impl GaloisCoeffs {
    pub fn get(&self, i: u32, j: u32) -> Option<Residue> {
        self.coeffs.get(&(i, j)).copied()
    }

    pub fn scaled(&self, c: u64) -> GaloisCoeffs {
        let c = self.field.residue(c);
        GaloisCoeffs {
            field: self.field,
            coeffs: self.coeffs.iter().map(|(&k, &v)| (k, v * c)).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}

/// Serializes as `{"3,9": c, "5,7": c}`.
impl Serialize for GaloisCoeffs {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.coeffs.len()))?;
        for ((i, j), v) in &self.coeffs {
            map.serialize_entry(&format!("{i},{j}"), &v.value())?;
        }
        map.end()
    }
}

fn factorial_mod(n: u32, m: Modulus) -> u64 {
    (1..=n as u64).fold(1, |acc, k| m.mul(acc, k))
}

pub fn derivation_to_galois(
    rel: &DerivationRelation,
    lambda: &LambdaTable,
) -> Result<GaloisCoeffs> {
    let field = Modulus::prime_field(rel.p)?;
    let mut coeffs = BTreeMap::new();
    for &(i, j, c) in &rel.terms {
        let li = lambda.get(i).ok_or(Error::MissingLambda(i))?;
        let lj = lambda.get(j).ok_or(Error::MissingLambda(j))?;
        let scale = [
            factorial_mod(i - 1, field),
            field.reduce(li),
            factorial_mod(j - 1, field),
            field.reduce(lj),
        ]
        .into_iter()
        .fold(field.reduce_signed(c), |acc, x| field.mul(acc, x));
        let slot = coeffs.entry((i, j)).or_insert_with(|| field.residue(0));
        *slot = *slot + field.residue(scale);
    }
    Ok(GaloisCoeffs { field, coeffs })
}

/// The `rho` with `[sigma_3, sigma_9] = rho [sigma_5, sigma_7]`, i.e.
/// `-c_{5,7} / c_{3,9}`.
pub fn commutator_ratio(coeffs: &GaloisCoeffs) -> Result<Residue> {
    if coeffs.coeffs.len() != 2 {
        return Err(Error::WrongShape);
    }
    let (Some(c39), Some(c57)) = (coeffs.get(3, 9), coeffs.get(5, 7)) else {
        return Err(Error::WrongShape);
    };
    if c39.is_zero() {
        return Err(Error::ZeroCoefficient((3, 9)));
    }
    if c57.is_zero() {
        return Err(Error::ZeroCoefficient((5, 7)));
    }
    Ok(-c57 * c39.inv()?)
}

/// Whether `(e_3, e_5)` is proportional to `(c_{3,9}, c_{5,7})`.
///
/// Index 1 is deliberately ignored: its generator has weight `p`, not 1,
/// so it cannot occur in weight 12.
pub fn cross_check_pairing(v: &PairingVector, coeffs: &GaloisCoeffs) -> Result<bool> {
    let pair = v.pair();
    if (pair.p(), pair.r()) != (691, 12) || coeffs.field.prime() != 691 {
        return Err(Error::PairMismatch {
            p: 691,
            r: 12,
            other_p: pair.p(),
            other_r: pair.r(),
        });
    }
    let (Some(c39), Some(c57)) = (coeffs.get(3, 9), coeffs.get(5, 7)) else {
        return Err(Error::WrongShape);
    };
    let e3 = v.entry(3).expect("index in range");
    let e5 = v.entry(5).expect("index in range");
    Ok(e3 * c57 == e5 * c39)
}

#[derive(Clone, Debug, Serialize)]
pub struct IharaReport {
    pub p: u64,
    pub r: u64,
    pub galois_coeffs: GaloisCoeffs,
    pub ratio: u64,
    pub pairing_consistent: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bernoulli::IrregularPair;
    use crate::relations::solve_pairing;
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;

    // big-integer products, reduced once at the end
    fn oracle(c: i64, i: u32, j: u32, li: u64, lj: u64) -> u64 {
        let fact = |n: u32| (1..=n).fold(BigInt::from(1), |a, k| a * k);
        let prod = BigInt::from(c) * fact(i - 1) * li * fact(j - 1) * lj;
        let m = BigInt::from(691);
        ((prod % &m + &m) % &m).to_u64().unwrap()
    }

    #[test]
    fn weight_twelve_coefficients() {
        let g = derivation_to_galois(
            &DerivationRelation::weight_twelve(),
            &LambdaTable::standard(),
        )
        .unwrap();
        let c39 = g.get(3, 9).unwrap().value();
        let c57 = g.get(5, 7).unwrap().value();
        assert_eq!(c39, oracle(2, 3, 9, 1, 144));
        assert_eq!(c57, oracle(-27, 5, 7, 2, 16));
        // proportional to (190, 174)
        assert_eq!(c39 * 174 % 691, c57 * 190 % 691);
        assert_eq!(commutator_ratio(&g).unwrap().value(), 50);
    }

    #[test]
    fn single_and_empty_terms() {
        let rel = DerivationRelation::new(691, 12, 691, vec![(3, 9, 1)]).unwrap();
        let g = derivation_to_galois(&rel, &LambdaTable::standard()).unwrap();
        assert_eq!(g.get(3, 9).unwrap().value(), 2 * 40320 * 144 % 691);
        let empty = DerivationRelation::new(691, 12, 691, vec![]).unwrap();
        assert!(derivation_to_galois(&empty, &LambdaTable::standard())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn missing_lambda() {
        let rel = DerivationRelation::new(691, 16, 1, vec![(5, 11, 1)]).unwrap();
        assert!(matches!(
            derivation_to_galois(&rel, &LambdaTable::standard()),
            Err(Error::MissingLambda(11))
        ));
    }

    #[test]
    fn bad_terms_rejected() {
        assert!(DerivationRelation::new(691, 12, 1, vec![(4, 8, 1)]).is_err());
        assert!(DerivationRelation::new(691, 12, 1, vec![(3, 7, 1)]).is_err());
        assert!(DerivationRelation::new(691, 12, 1, vec![(9, 3, 1)]).is_err());
    }

    #[test]
    fn ratio_examples() {
        let f = Modulus::prime_field(691).unwrap();
        let mk = |a: u64, b: u64| GaloisCoeffs {
            field: f,
            coeffs: BTreeMap::from([((3, 9), f.residue(a)), ((5, 7), f.residue(b))]),
        };
        assert_eq!(commutator_ratio(&mk(190, 174)).unwrap().value(), 50);
        assert_eq!(commutator_ratio(&mk(380, 348)).unwrap().value(), 50);
        assert_eq!(commutator_ratio(&mk(501, 517)).unwrap().value(), 50);
        assert!(matches!(
            commutator_ratio(&mk(1, 0)),
            Err(Error::ZeroCoefficient((5, 7)))
        ));
        let one = GaloisCoeffs {
            field: f,
            coeffs: BTreeMap::from([((3, 9), f.residue(1))]),
        };
        assert!(matches!(commutator_ratio(&one), Err(Error::WrongShape)));
    }

    #[test]
    fn pairing_cross_check() {
        let pair = IrregularPair::new(691, 12).unwrap();
        let v = solve_pairing(&pair).unwrap();
        let g = derivation_to_galois(
            &DerivationRelation::weight_twelve(),
            &LambdaTable::standard(),
        )
        .unwrap();
        assert!(cross_check_pairing(&v, &g).unwrap());
        assert!(cross_check_pairing(&v, &g.scaled(5)).unwrap());

        let mut vals = v.values().to_vec();
        let (e1, e3) = (vals[0], vals[1]);
        vals[1] = (e3 + 1) % 691;
        // keep the leading entry so normalization does not rescale
        assert_ne!(e1, 0);
        let perturbed = PairingVector::from_values(pair, vals).unwrap();
        assert!(!cross_check_pairing(&perturbed, &g).unwrap());

        let other = solve_pairing(&IrregularPair::new(37, 32).unwrap()).unwrap();
        assert!(cross_check_pairing(&other, &g).is_err());
    }
}
