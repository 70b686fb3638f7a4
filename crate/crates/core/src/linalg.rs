//! Dense linear algebra over `Z/p` and `Z/p^2`.
//!
//! Kernels over the field use Gauss-Jordan elimination with first-nonzero
//! pivoting, so the returned basis depends only on the input. Over `Z/p^2`
//! a plain echelon form misses solutions that live in `p Z/p^2`, so the
//! solver diagonalizes with row and column operations (minimal-valuation
//! pivots, units first) and reads every solution off the column transform.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::modring::Modulus;

/// Provenance of a matrix row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RowTag {
    Unlabeled,
    /// Relation row for the unit pair `(rho_a, rho_{a-1})`.
    Relation {
        a: u64,
    },
    /// `x_i + x_j = 0` for partner indices.
    Skew {
        i: u64,
        j: u64,
    },
    /// `2 x_i = 0` for a self-partnered index.
    SelfPair {
        i: u64,
    },
}

impl fmt::Display for RowTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RowTag::Unlabeled => write!(f, "-"),
            RowTag::Relation { a } => write!(f, "rel(a={a})"),
            RowTag::Skew { i, j } => write!(f, "skew({i},{j})"),
            RowTag::SelfPair { i } => write!(f, "self({i})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMatrix {
    modulus: Modulus,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
    row_tags: Vec<RowTag>,
}

impl ModMatrix {
    pub fn zeros(modulus: Modulus, rows: usize, cols: usize) -> Self {
        ModMatrix {
            modulus,
            rows,
            cols,
            entries: vec![0; rows * cols],
            row_tags: vec![RowTag::Unlabeled; rows],
        }
    }

    pub fn identity(modulus: Modulus, n: usize) -> Self {
        let mut m = Self::zeros(modulus, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Entries are reduced into `[0, modulus)`.
    pub fn from_rows(modulus: Modulus, rows: &[Vec<i64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::domain("ragged matrix rows"));
        }
        let entries = rows
            .iter()
            .flatten()
            .map(|&x| modulus.reduce_signed(x))
            .collect();
        Ok(ModMatrix {
            modulus,
            rows: rows.len(),
            cols,
            entries,
            row_tags: vec![RowTag::Unlabeled; rows.len()],
        })
    }

    /// Starts an empty matrix with a fixed column count; see [`push_row`].
    ///
    /// [`push_row`]: ModMatrix::push_row
    pub fn with_columns(modulus: Modulus, cols: usize) -> Self {
        Self::zeros(modulus, 0, cols)
    }

    pub fn push_row(&mut self, row: &[u64], tag: RowTag) {
        assert_eq!(row.len(), self.cols, "row length");
        self.entries
            .extend(row.iter().map(|&x| self.modulus.reduce(x)));
        self.row_tags.push(tag);
        self.rows += 1;
    }

    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: u64) {
        self.entries[r * self.cols + c] = self.modulus.reduce(value);
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_tags(&self) -> &[RowTag] {
        &self.row_tags
    }

    pub fn set_row_tag(&mut self, r: usize, tag: RowTag) {
        self.row_tags[r] = tag;
    }

    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.cols, "vector length");
        let m = self.modulus;
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(0, |acc, (&a, &x)| m.add(acc, m.mul(a, m.reduce(x))))
            })
            .collect()
    }

    pub fn annihilates(&self, v: &[u64]) -> bool {
        self.mul_vec(v).iter().all(|&x| x == 0)
    }

    /// Entrywise image under `Z/p^2 -> Z/p`.
    pub fn reduce_mod_p(&self) -> ModMatrix {
        let field = self.modulus.base_field();
        ModMatrix {
            modulus: field,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&x| field.reduce(x)).collect(),
            row_tags: self.row_tags.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelBasis {
    modulus: Modulus,
    cols: usize,
    vectors: Vec<Vec<u64>>,
    // p^exponents[i] annihilates vectors[i]; all 1 over the field
    exponents: Vec<u32>,
}

impl KernelBasis {
    pub fn modulus(&self) -> Modulus {
        self.modulus
    }

    pub fn vectors(&self) -> &[Vec<u64>] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<Vec<u64>> {
        self.vectors
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    /// Number of generators (the dimension over `Z/p`).
    pub fn dimension(&self) -> usize {
        self.vectors.len()
    }

    /// `e` such that the solution set has `p^e` elements.
    pub fn order_exponent(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn ambient_dimension(&self) -> usize {
        self.cols
    }
}

/// Right kernel over `Z/p` by Gauss-Jordan elimination.
///
/// Row updates are accumulated without reduction and only reduced when a
/// row becomes a pivot, when its entry in the current pivot column is read,
/// or when it approaches `u64` overflow.
pub fn kernel_mod_p(matrix: &ModMatrix) -> Result<KernelBasis> {
    let modulus = matrix.modulus;
    if modulus.exponent() != 1 {
        return Err(Error::ModulusNotPrime(modulus.value()));
    }
    let p = modulus.prime();
    let (rows, cols) = (matrix.rows, matrix.cols);
    let mut a = matrix.entries.clone();
    let budget = (u64::MAX - p) / ((p - 1) * (p - 1));
    let mut pending = vec![0u64; rows];
    let mut pivot_cols = Vec::new();
    let mut pivot_row = vec![0u64; cols];
    let mut rank = 0;

    for c in 0..cols {
        let Some(pr) = (rank..rows).find(|&r| !a[r * cols + c].is_multiple_of(p)) else {
            continue;
        };
        if pr != rank {
            for cc in 0..cols {
                a.swap(pr * cols + cc, rank * cols + cc);
            }
            pending.swap(pr, rank);
        }
        let base = rank * cols;
        let inv = modulus.inv(a[base + c] % p)?;
        for cc in c..cols {
            a[base + cc] = modulus.mul(a[base + cc] % p, inv);
        }
        pending[rank] = 0;
        pivot_row[c..].copy_from_slice(&a[base + c..base + cols]);

        for (r, pend) in pending.iter_mut().enumerate() {
            if r == rank {
                continue;
            }
            let off = r * cols;
            let f = a[off + c] % p;
            if f == 0 {
                a[off + c] = 0;
                continue;
            }
            if *pend >= budget {
                for x in &mut a[off + c..off + cols] {
                    *x %= p;
                }
                *pend = 0;
            }
            let nf = p - f;
            for (x, &y) in a[off + c..off + cols].iter_mut().zip(&pivot_row[c..]) {
                *x += nf * y;
            }
            *pend += 1;
        }
        pivot_cols.push(c);
        rank += 1;
    }
    for x in &mut a {
        *x %= p;
    }

    let mut is_pivot = vec![false; cols];
    for &c in &pivot_cols {
        is_pivot[c] = true;
    }
    let vectors: Vec<Vec<u64>> = (0..cols)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![0u64; cols];
            v[f] = 1;
            for (i, &pc) in pivot_cols.iter().enumerate() {
                v[pc] = modulus.neg(a[i * cols + f]);
            }
            v
        })
        .collect();
    let exponents = vec![1; vectors.len()];
    Ok(KernelBasis {
        modulus,
        cols,
        vectors,
        exponents,
    })
}

/// Generators of `{v : M v = 0 mod p^2}` with their annihilator exponents.
pub fn solution_module_mod_p2(matrix: &ModMatrix) -> Result<KernelBasis> {
    let modulus = matrix.modulus;
    if modulus.exponent() != 2 {
        return Err(Error::ModulusNotSquareOfPrime(modulus.value()));
    }
    let p = modulus.prime();
    let (rows, cols) = (matrix.rows, matrix.cols);
    let mut a = matrix.entries.clone();
    // transform[j] is column j of the accumulated column-operation matrix
    let mut transform: Vec<Vec<u64>> = (0..cols)
        .map(|j| {
            let mut col = vec![0u64; cols];
            col[j] = 1;
            col
        })
        .collect();
    let mut valuations: Vec<u32> = Vec::new();
    let diag = rows.min(cols);

    let find = |a: &[u64], t: usize, unit: bool| -> Option<(usize, usize)> {
        (t..cols).find_map(|c| {
            (t..rows)
                .find(|&r| {
                    let x = a[r * cols + c];
                    if unit {
                        !x.is_multiple_of(p)
                    } else {
                        x != 0
                    }
                })
                .map(|r| (r, c))
        })
    };

    for t in 0..diag {
        let (pr, pc, val) = match find(&a, t, true) {
            Some((r, c)) => (r, c, 0),
            None => match find(&a, t, false) {
                Some((r, c)) => (r, c, 1),
                None => break,
            },
        };
        if pr != t {
            for cc in 0..cols {
                a.swap(pr * cols + cc, t * cols + cc);
            }
        }
        if pc != t {
            for r in 0..rows {
                a.swap(r * cols + pc, r * cols + t);
            }
            transform.swap(pc, t);
        }
        let scale = if val == 0 { 1 } else { p };
        // pivot = scale * unit; make it exactly `scale`
        let unit_inv = modulus.inv(a[t * cols + t] / scale)?;
        for cc in t..cols {
            a[t * cols + cc] = modulus.mul(a[t * cols + cc], unit_inv);
        }
        for r in t + 1..rows {
            let x = a[r * cols + t];
            if x == 0 {
                continue;
            }
            let f = x / scale;
            for cc in t..cols {
                let y = modulus.mul(f, a[t * cols + cc]);
                a[r * cols + cc] = modulus.sub(a[r * cols + cc], y);
            }
        }
        for j in t + 1..cols {
            let y = a[t * cols + j];
            if y == 0 {
                continue;
            }
            let f = y / scale;
            a[t * cols + j] = 0;
            let (left, right) = transform.split_at_mut(j);
            let (src, dst) = (&left[t], &mut right[0]);
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = modulus.sub(*d, modulus.mul(f, s));
            }
        }
        valuations.push(val);
    }

    let mut vectors = Vec::new();
    let mut exponents = Vec::new();
    for (j, col) in transform.into_iter().enumerate() {
        match valuations.get(j) {
            Some(0) => {}
            Some(_) => {
                vectors.push(col.iter().map(|&x| modulus.mul(x, p)).collect());
                exponents.push(1);
            }
            None => {
                vectors.push(col);
                exponents.push(2);
            }
        }
    }
    Ok(KernelBasis {
        modulus,
        cols,
        vectors,
        exponents,
    })
}

/// Whether `v` lies in the `Z/p`-span of `basis`.
pub fn in_span_mod_p(field: Modulus, basis: &[Vec<u64>], v: &[u64]) -> Result<bool> {
    let n = v.len();
    // columns: basis vectors then v; v is in the span iff some kernel vector
    // has a nonzero last coordinate
    let mut m = ModMatrix::zeros(field, n, basis.len() + 1);
    for (j, b) in basis.iter().chain(std::iter::once(&v.to_vec())).enumerate() {
        assert_eq!(b.len(), n, "vector length");
        for (i, &x) in b.iter().enumerate() {
            m.set(i, j, x);
        }
    }
    let k = kernel_mod_p(&m)?;
    Ok(k.vectors().iter().any(|w| w[basis.len()] != 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(p: u64) -> Modulus {
        Modulus::prime_field(p).unwrap()
    }

    fn square(p: u64) -> Modulus {
        Modulus::prime_squared(p).unwrap()
    }

    #[test]
    fn identity_has_trivial_kernel() {
        let k = kernel_mod_p(&ModMatrix::identity(field(7), 5)).unwrap();
        assert_eq!(k.dimension(), 0);
    }

    #[test]
    fn zero_row_has_full_kernel() {
        let k = kernel_mod_p(&ModMatrix::zeros(field(7), 1, 4)).unwrap();
        assert_eq!(k.dimension(), 4);
    }

    #[test]
    fn rank_one_example() {
        let m = ModMatrix::from_rows(field(5), &[vec![1, 2], vec![2, 4]]).unwrap();
        // brute force over (Z/5)^2
        let sols: Vec<(u64, u64)> = (0..5)
            .flat_map(|x| (0..5).map(move |y| (x, y)))
            .filter(|&(x, y)| (x + 2 * y) % 5 == 0)
            .collect();
        assert_eq!(sols.len(), 5);
        let k = kernel_mod_p(&m).unwrap();
        assert_eq!(k.dimension(), 1);
        assert_eq!(k.vectors()[0], vec![3, 1]);
        assert!(sols.contains(&(3, 1)));
    }

    #[test]
    fn wrong_modulus_kinds() {
        assert!(matches!(
            kernel_mod_p(&ModMatrix::identity(square(3), 2)),
            Err(Error::ModulusNotPrime(9))
        ));
        assert!(matches!(
            solution_module_mod_p2(&ModMatrix::identity(field(3), 2)),
            Err(Error::ModulusNotSquareOfPrime(3))
        ));
    }

    #[test]
    fn mod_p2_examples() {
        let k = solution_module_mod_p2(&ModMatrix::identity(square(3), 3)).unwrap();
        assert_eq!(k.order_exponent(), 0);

        let k =
            solution_module_mod_p2(&ModMatrix::from_rows(square(3), &[vec![3]]).unwrap()).unwrap();
        // brute force over Z/9: 3x = 0 has x in {0, 3, 6}
        assert_eq!((0..9).filter(|x| 3 * x % 9 == 0).count(), 3);
        assert_eq!(k.order_exponent(), 1);
        assert_eq!(k.vectors(), &[vec![3]]);

        let k = solution_module_mod_p2(&ModMatrix::zeros(square(3), 1, 1)).unwrap();
        assert_eq!(k.order_exponent(), 2);

        let k = solution_module_mod_p2(&ModMatrix::zeros(square(3), 2, 2)).unwrap();
        assert_eq!(k.order_exponent(), 4);
    }

    #[test]
    fn lazy_reduction_survives_many_updates() {
        // large prime, many rows hitting the same pivot columns
        let p = 4_294_967_291;
        let m = field(p);
        let n = 12;
        let mut mat = ModMatrix::zeros(m, n + 3, n);
        for r in 0..n + 3 {
            for c in 0..n {
                let x = (r as u64 + 1).wrapping_mul(2_654_435_761) ^ (c as u64 * 40_503);
                mat.set(r, c, x % p);
            }
        }
        let k = kernel_mod_p(&mat).unwrap();
        for v in k.vectors() {
            assert!(mat.annihilates(v));
        }
    }

    #[test]
    fn span_membership() {
        let f = field(7);
        let basis = vec![vec![1, 2, 0], vec![0, 1, 1]];
        assert!(in_span_mod_p(f, &basis, &[2, 5, 1]).unwrap());
        assert!(!in_span_mod_p(f, &basis, &[0, 0, 1]).unwrap());
        assert!(in_span_mod_p(f, &[], &[0, 0, 0]).unwrap());
    }

    #[test]
    fn row_tags_and_reduction() {
        let mut m = ModMatrix::with_columns(square(5), 2);
        m.push_row(&[26, 7], RowTag::Relation { a: 4 });
        m.push_row(&[5, 0], RowTag::Skew { i: 1, j: 3 });
        assert_eq!(m.row(0), &[1, 7]);
        let r = m.reduce_mod_p();
        assert_eq!(r.row(0), &[1, 2]);
        assert_eq!(r.row_tags()[1], RowTag::Skew { i: 1, j: 3 });
    }
}
