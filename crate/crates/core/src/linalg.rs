//! Dense linear-algebra helpers on top of nalgebra.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::poly::{CliffordPoly, Exponents};

/// Right singular vectors spanning the numerical nullspace of `a`.
pub struct Nullspace {
    pub vectors: Vec<DVector<f64>>,
    /// All singular values, descending.
    pub singular_values: Vec<f64>,
    pub rank: usize,
}

/// Nullspace with cutoff `rel_tol * σ_max`. Wide matrices are padded with
/// zero rows so that the full right-singular basis is available.
pub fn nullspace(a: &DMatrix<f64>, rel_tol: f64) -> Nullspace {
    let cols = a.ncols();
    if a.nrows() == 0 || a.iter().all(|&v| v == 0.0) {
        return Nullspace {
            vectors: (0..cols)
                .map(|i| DVector::from_fn(cols, |r, _| if r == i { 1.0 } else { 0.0 }))
                .collect(),
            singular_values: vec![0.0; cols],
            rank: 0,
        };
    }
    let padded = if a.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (a.nrows(), cols)).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = svd.singular_values.max();
    let cutoff = rel_tol * smax;
    let mut vectors = Vec::new();
    let mut rank = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            vectors.push(v_t.row(i).transpose());
        } else {
            rank += 1;
        }
    }
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Nullspace {
        vectors,
        singular_values,
        rank,
    }
}

pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Real coordinates of a list of polynomials over the union of their
/// (monomial, blade) slots; column `j` holds polynomial `j`.
pub fn coordinate_matrix(polys: &[CliffordPoly]) -> DMatrix<f64> {
    let mut rows: BTreeMap<(Exponents, usize), usize> = BTreeMap::new();
    for p in polys {
        for (e, c) in p.terms() {
            for (mask, &v) in c.coeffs().iter().enumerate() {
                if v != 0.0 {
                    let next = rows.len();
                    rows.entry((*e, mask)).or_insert(next);
                }
            }
        }
    }
    let mut a = DMatrix::zeros(rows.len(), polys.len());
    for (j, p) in polys.iter().enumerate() {
        for (e, c) in p.terms() {
            for (mask, &v) in c.coeffs().iter().enumerate() {
                if v != 0.0 {
                    a[(rows[&(*e, mask)], j)] = v;
                }
            }
        }
    }
    a
}

/// Linear combination `Σ_i w_i p_i`.
pub fn combine(polys: &[CliffordPoly], weights: &DVector<f64>) -> CliffordPoly {
    let dim = polys[0].dim();
    let mut terms: BTreeMap<Exponents, crate::Multivector> = BTreeMap::new();
    for (p, &w) in polys.iter().zip(weights.iter()) {
        if w == 0.0 {
            continue;
        }
        for (e, c) in p.terms() {
            terms
                .entry(*e)
                .or_insert_with(|| crate::Multivector::zero(dim))
                .add_scaled(c, w);
        }
    }
    CliffordPoly::from_terms(dim, terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = nullspace(&a, 1e-9);
        assert_eq!(ns.vectors.len(), 2);
        assert_eq!(ns.rank, 1);
        for v in &ns.vectors {
            assert!((&a * v).norm() < 1e-14);
        }
    }

    #[test]
    fn nullspace_of_zero_matrix_is_everything() {
        let a = DMatrix::<f64>::zeros(0, 4);
        assert_eq!(nullspace(&a, 1e-9).vectors.len(), 4);
    }
}
