//! The degree-two relation in the pro-p Galois group attached to an
//! irregular pair, its image under the Fox-derivative map modulo `m^2`,
//! and the pairing criterion for Greenberg's conjecture.
//!
//! Generators are indexed as integers `m` with `2 <= m <= p`; the unit
//! indexed by `1` in the pairing vector becomes generator `x_p`.

use std::fmt;

use serde::Serialize;

use crate::bernoulli::{BernoulliTableModP, IrregularPair, IwasawaCoeffs};
use crate::error::{Error, Result};
use crate::modring::{Modulus, Residue};
use crate::relations::{partner_index, PairingVector};

/// One `e [x_i, x_j]` summand, `i < j` after relabeling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CommutatorTerm {
    pub i: u64,
    pub j: u64,
    pub coefficient: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaloisRelation {
    pub pair: IrregularPair,
    /// Coefficient of `p x_r`.
    pub a_x: Residue,
    /// Coefficient of `[gamma, x_r]`.
    pub a_gamma: Residue,
    /// Odd-odd commutators, including those with zero coefficient.
    pub commutator_terms: Vec<CommutatorTerm>,
    /// Even-even index pairs whose coefficients are not determined here.
    pub even_even_slots: Vec<(u64, u64)>,
}

/// Generator label for a pairing index.
pub fn generator_label(p: u64, i: u64) -> u64 {
    if i == 1 {
        p
    } else {
        i
    }
}

fn pairing_index(p: u64, label: u64) -> u64 {
    if label == p {
        1
    } else {
        label
    }
}

pub fn galois_relation(
    pair: &IrregularPair,
    v: &PairingVector,
    coeffs: &IwasawaCoeffs,
) -> Result<GaloisRelation> {
    for other in [v.pair(), coeffs.pair] {
        if other != *pair {
            return Err(Error::PairMismatch {
                p: pair.p(),
                r: pair.r(),
                other_p: other.p(),
                other_r: other.r(),
            });
        }
    }
    let (p, r) = (pair.p(), pair.r());
    let a_x = coeffs.f0_over_p + coeffs.fprime0;
    let a_gamma = -coeffs.fprime0;

    let mut commutator_terms: Vec<CommutatorTerm> = (1..=p - 2)
        .step_by(2)
        .filter_map(|i| {
            let j = partner_index(p, r, i);
            let (li, lj) = (generator_label(p, i), generator_label(p, j));
            (li < lj).then(|| CommutatorTerm {
                i: li,
                j: lj,
                coefficient: v.entry(pairing_index(p, li)).expect("odd index").value(),
            })
        })
        .collect();
    commutator_terms.sort_by_key(|t| t.i);

    let irregular = BernoulliTableModP::compute(p)?.irregular_indices();
    let mut even_even_slots = Vec::new();
    for (n, &i) in irregular.iter().enumerate() {
        for &j in &irregular[n + 1..] {
            if (i + j) % (p - 1) == r % (p - 1) {
                even_even_slots.push((i, j));
            }
        }
    }

    Ok(GaloisRelation {
        pair: *pair,
        a_x,
        a_gamma,
        commutator_terms,
        even_even_slots,
    })
}

impl GaloisRelation {
    pub fn field(&self) -> Modulus {
        self.pair.field()
    }

    pub fn nonzero_terms(&self) -> impl Iterator<Item = &CommutatorTerm> {
        self.commutator_terms.iter().filter(|t| t.coefficient != 0)
    }

    pub fn is_zero(&self) -> bool {
        self.a_x.is_zero() && self.a_gamma.is_zero() && self.nonzero_terms().next().is_none()
    }

    /// `a_gamma / a_x`, invariant under rescaling the head.
    pub fn head_ratio(&self) -> Option<Residue> {
        self.a_x.inv().ok().map(|inv| self.a_gamma * inv)
    }

    /// Coefficient of `[x_i, x_j]` (labels in either order).
    pub fn coefficient(&self, i: u64, j: u64) -> Option<u64> {
        let (i, j) = (i.min(j), i.max(j));
        self.commutator_terms
            .iter()
            .find(|t| t.i == i && t.j == j)
            .map(|t| t.coefficient)
    }

    pub fn report(&self, greenberg: GreenbergVerdict) -> RelationReport {
        RelationReport {
            p: self.pair.p(),
            r: self.pair.r(),
            a_x: self.a_x.value(),
            a_gamma: self.a_gamma.value(),
            terms: self
                .commutator_terms
                .iter()
                .map(|t| [t.i, t.j, t.coefficient])
                .collect(),
            scalar_class: "projective",
            greenberg,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub p: u64,
    pub r: u64,
    pub a_x: u64,
    pub a_gamma: u64,
    pub terms: Vec<[u64; 3]>,
    pub scalar_class: &'static str,
    pub greenberg: GreenbergVerdict,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RenderOptions {
    /// Rescale the head so `p x_r` appears with coefficient 1, writing
    /// `y = x_r^c` for the absorbed unit.
    pub normalize_head: bool,
}

/// Renders `A p x_r + B [gamma, x_r] + sum e [x_i, x_j] = 0` with
/// coefficients in `(-p/2, p/2]`.
pub fn render_relation(rel: &GaloisRelation) -> String {
    render_relation_with(
        rel,
        RenderOptions {
            normalize_head: true,
        },
    )
}

pub fn render_relation_with(rel: &GaloisRelation, opts: RenderOptions) -> String {
    if rel.is_zero() {
        return "0 = 0".to_string();
    }
    let (p, r) = (rel.pair.p(), rel.pair.r());
    let field = rel.field();
    let mut out = Terms::default();

    let scaled = if opts.normalize_head {
        rel.head_ratio()
    } else {
        None
    };
    match scaled {
        Some(ratio) => {
            out.push(1, format!("{p}·y"));
            out.push(ratio.centered(), "[γ,y]".to_string());
        }
        None => {
            out.push(rel.a_x.centered(), format!("{p}·x_{r}"));
            out.push(rel.a_gamma.centered(), format!("[γ,x_{r}]"));
        }
    }
    for t in &rel.commutator_terms {
        out.push(
            field.centered(t.coefficient),
            format!("[x_{},x_{}]", t.i, t.j),
        );
    }

    let mut text = format!("{} = 0\n", out.finish());
    if scaled.is_some() {
        text.push_str(&format!(
            "# y = x_{r}^c for some unit c; the commutator coefficients are fixed only up to a common scalar"
        ));
    } else {
        text.push_str("# the commutator coefficients are fixed only up to a common scalar");
    }
    for (i, j) in &rel.even_even_slots {
        text.push_str(&format!("\n# unresolved even-even term [x_{i},x_{j}]"));
    }
    text
}

#[derive(Default)]
struct Terms {
    text: String,
}

impl Terms {
    fn push(&mut self, coeff: i64, body: String) {
        if coeff == 0 {
            return;
        }
        let mag = coeff.unsigned_abs();
        let shown = if body.starts_with('[') || mag != 1 {
            format!(
                "{mag}{}{body}",
                if body.starts_with('[') { "" } else { "·" }
            )
        } else {
            body
        };
        if self.text.is_empty() {
            if coeff < 0 {
                self.text.push('-');
            }
            self.text.push_str(&shown);
        } else {
            self.text.push_str(if coeff < 0 { " - " } else { " + " });
            self.text.push_str(&shown);
        }
    }

    fn finish(self) -> String {
        if self.text.is_empty() {
            "0".to_string()
        } else {
            self.text
        }
    }
}

impl fmt::Display for GaloisRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_relation(self))
    }
}

/// A linear term in the image of the relation modulo `m^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FoxTerm {
    /// `coefficient · T_t · dx_dx`, coefficient mod `p`.
    Linear { coefficient: u64, t: u64, dx: u64 },
    /// `l · dx_dx` with `l = a_x p` recorded mod `p^2`.
    Head { l_mod_p2: u64, dx: u64 },
}

impl fmt::Display for FoxTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FoxTerm::Linear { coefficient, t, dx } => write!(f, "{coefficient}·T_{t} dx_{dx}"),
            FoxTerm::Head { l_mod_p2, dx } => write!(f, "l·dx_{dx} (l = {l_mod_p2} mod p^2)"),
        }
    }
}

/// Each `e [x_i, x_j]` contributes `-e T_j dx_i + e T_i dx_j`; a nonzero
/// head contributes `l dx_r`.
pub fn fox_image(rel: &GaloisRelation) -> Vec<FoxTerm> {
    let field = rel.field();
    let mut terms = Vec::new();
    for t in rel.nonzero_terms() {
        terms.push(FoxTerm::Linear {
            coefficient: field.neg(t.coefficient),
            t: t.j,
            dx: t.i,
        });
        terms.push(FoxTerm::Linear {
            coefficient: t.coefficient,
            t: t.i,
            dx: t.j,
        });
    }
    if !rel.a_x.is_zero() {
        terms.push(FoxTerm::Head {
            l_mod_p2: rel.a_x.value() * rel.pair.p(),
            dx: rel.pair.r(),
        });
    }
    terms
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GreenbergVerdict {
    /// A nonzero odd-odd coefficient and an attested nontrivial pairing.
    Holds,
    /// A nonzero odd-odd coefficient, nontriviality not attested.
    Conditional,
    /// No nonzero odd-odd coefficient.
    Fails,
}

impl fmt::Display for GreenbergVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GreenbergVerdict::Holds => "holds",
            GreenbergVerdict::Conditional => "conditional",
            GreenbergVerdict::Fails => "fails",
        })
    }
}

pub fn greenberg_criterion(rel: &GaloisRelation, nontriviality_attested: bool) -> GreenbergVerdict {
    match (rel.nonzero_terms().next().is_some(), nontriviality_attested) {
        (false, _) => GreenbergVerdict::Fails,
        (true, true) => GreenbergVerdict::Holds,
        (true, false) => GreenbergVerdict::Conditional,
    }
}

/// Pairs for which nontriviality of the actual cup product is known from an
/// independent computation, with the source.
pub fn shipped_attestation(pair: &IrregularPair) -> Option<&'static str> {
    match (pair.p(), pair.r()) {
        (37, 32) => Some("independent norm-residue symbol computation over Q(mu_37)"),
        _ => None,
    }
}
