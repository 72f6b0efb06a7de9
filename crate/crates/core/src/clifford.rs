//! Real Clifford algebra `Cl_m` with the negative-definite signature
//! `e_i e_j + e_j e_i = -2 δ_ij`.
//!
//! A [`Multivector`] stores all `2^m` blade coefficients densely. Blade `A`
//! is addressed by its bitmask: bit `i` set means `e_{i+1}` is a factor, and
//! factors are always kept in ascending order.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 8;

/// Sign of `e_a e_b` after normalising to ascending order, including the
/// `e_i^2 = -1` contractions.
#[inline]
pub fn blade_product_sign(a: usize, b: usize) -> f64 {
    let mut swaps = 0u32;
    let mut shifted = a >> 1;
    while shifted != 0 {
        swaps += (shifted & b).count_ones();
        shifted >>= 1;
    }
    swaps += (a & b).count_ones();
    if swaps & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn sign_table(dim: usize) -> &'static [f64] {
    static TABLES: [OnceLock<Vec<f64>>; MAX_DIM + 1] = [const { OnceLock::new() }; MAX_DIM + 1];
    TABLES[dim].get_or_init(|| {
        let n = 1usize << dim;
        let mut table = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                table[a * n + b] = blade_product_sign(a, b);
            }
        }
        table
    })
}

#[inline]
pub fn grade_of(blade: usize) -> usize {
    blade.count_ones() as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multivector {
    dim: usize,
    coeffs: Vec<f64>,
}

impl Multivector {
    pub fn zero(dim: usize) -> Self {
        assert!(
            (1..=MAX_DIM).contains(&dim),
            "Clifford dimension must be in 1..={MAX_DIM}, got {dim}"
        );
        Self {
            dim,
            coeffs: vec![0.0; 1 << dim],
        }
    }

    pub fn try_from_coeffs(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if coeffs.len() != 1 << dim {
            return Err(Error::DimensionMismatch {
                left: 1 << dim,
                right: coeffs.len(),
            });
        }
        Ok(Self { dim, coeffs })
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut mv = Self::zero(dim);
        mv.coeffs[0] = value;
        mv
    }

    pub fn blade(dim: usize, mask: usize, value: f64) -> Self {
        let mut mv = Self::zero(dim);
        mv.coeffs[mask] = value;
        mv
    }

    /// The generator `e_{i+1}` (zero-based index).
    pub fn basis_vector(dim: usize, i: usize) -> Self {
        Self::blade(dim, 1 << i, 1.0)
    }

    /// Grade-1 element `Σ_i x_i e_i`.
    pub fn vector(components: &[f64]) -> Self {
        let mut mv = Self::zero(components.len());
        for (i, &c) in components.iter().enumerate() {
            mv.coeffs[1 << i] = c;
        }
        mv
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn get(&self, mask: usize) -> f64 {
        self.coeffs[mask]
    }

    pub fn set(&mut self, mask: usize, value: f64) {
        self.coeffs[mask] = value;
    }

    pub fn scalar_part(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn vector_part(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.coeffs[1 << i]).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc.max(c.abs()))
    }

    /// Euclidean norm of the coefficient vector.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, other: &Multivector, s: f64) {
        debug_assert_eq!(self.dim, other.dim);
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += s * b;
        }
    }

    /// `self += s * (a b)` without allocating the product.
    pub fn add_product(&mut self, a: &Multivector, b: &Multivector, s: f64) {
        debug_assert!(self.dim == a.dim && a.dim == b.dim);
        let n = 1usize << self.dim;
        let signs = sign_table(self.dim);
        for (ia, &ca) in a.coeffs.iter().enumerate() {
            if ca == 0.0 {
                continue;
            }
            let sa = s * ca;
            let row = &signs[ia * n..(ia + 1) * n];
            for (ib, &cb) in b.coeffs.iter().enumerate() {
                if cb != 0.0 {
                    self.coeffs[ia ^ ib] += row[ib] * sa * cb;
                }
            }
        }
    }

    fn product(&self, other: &Multivector) -> Multivector {
        assert_eq!(
            self.dim, other.dim,
            "geometric product of multivectors from different algebras"
        );
        let mut out = Multivector::zero(self.dim);
        out.add_product(self, other, 1.0);
        out
    }

    fn map_by_grade(&self, sign: impl Fn(usize) -> f64) -> Multivector {
        Multivector {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(mask, c)| c * sign(grade_of(mask)))
                .collect(),
        }
    }

    /// Reversion `ẽ_A`: reverses the order of the factors of each blade.
    pub fn reversion(&self) -> Multivector {
        self.map_by_grade(|r| if (r * r.saturating_sub(1) / 2) % 2 == 0 { 1.0 } else { -1.0 })
    }

    /// Clifford conjugation `ē_A = (-1)^r ẽ_A`.
    pub fn conjugate(&self) -> Multivector {
        self.map_by_grade(|r| if (r * (r + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 })
    }

    pub fn grade_involution(&self) -> Multivector {
        self.map_by_grade(|r| if r % 2 == 0 { 1.0 } else { -1.0 })
    }

    pub fn grade_project(&self, grade: usize) -> Result<Multivector> {
        if grade > self.dim {
            return Err(Error::GradeOutOfRange {
                grade,
                dim: self.dim,
            });
        }
        Ok(self.map_by_grade(|r| if r == grade { 1.0 } else { 0.0 }))
    }

    /// Largest coefficient outside grade 1.
    pub fn non_vector_residual(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(mask, _)| grade_of(*mask) != 1)
            .fold(0.0, |acc, (_, c)| acc.max(c.abs()))
    }
}

pub fn geometric_product(a: &Multivector, b: &Multivector) -> Result<Multivector> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            left: a.dim,
            right: b.dim,
        });
    }
    Ok(a.product(b))
}

/// `v x v` for a unit vector `v`: flips the component of `x` along `v` and
/// keeps the orthogonal part.
pub fn reflect(v: &Multivector, x: &Multivector) -> Result<Multivector> {
    const TOL: f64 = 1e-12;
    if v.dim != x.dim {
        return Err(Error::DimensionMismatch {
            left: v.dim,
            right: x.dim,
        });
    }
    if v.non_vector_residual() > TOL || x.non_vector_residual() > TOL {
        return Err(Error::NotAVector);
    }
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit(norm));
    }
    Ok(&(v * x) * v)
}

impl Add for &Multivector {
    type Output = Multivector;
    fn add(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.dim, rhs.dim);
        Multivector {
            dim: self.dim,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Multivector {
    type Output = Multivector;
    fn sub(self, rhs: &Multivector) -> Multivector {
        assert_eq!(self.dim, rhs.dim);
        Multivector {
            dim: self.dim,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Multivector {
    type Output = Multivector;
    fn mul(self, rhs: &Multivector) -> Multivector {
        self.product(rhs)
    }
}

impl Neg for &Multivector {
    type Output = Multivector;
    fn neg(self) -> Multivector {
        self.scale(-1.0)
    }
}

impl AddAssign<&Multivector> for Multivector {
    fn add_assign(&mut self, rhs: &Multivector) {
        self.add_scaled(rhs, 1.0);
    }
}

impl SubAssign<&Multivector> for Multivector {
    fn sub_assign(&mut self, rhs: &Multivector) {
        self.add_scaled(rhs, -1.0);
    }
}

pub fn blade_label(mask: usize) -> String {
    if mask == 0 {
        return String::new();
    }
    (0..MAX_DIM)
        .filter(|i| mask & (1 << i) != 0)
        .map(|i| format!("e{}", i + 1))
        .collect()
}

impl fmt::Display for Multivector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (mask, &c) in self.coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            if first {
                write!(f, "{c}")?;
            } else if c < 0.0 {
                write!(f, " - {}", -c)?;
            } else {
                write!(f, " + {c}")?;
            }
            let label = blade_label(mask);
            if !label.is_empty() {
                write!(f, " {label}")?;
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}
