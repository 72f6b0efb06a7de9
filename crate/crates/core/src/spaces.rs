//! The polynomial spaces `H_k` (harmonic) and `M_k` (left monogenic) in the
//! variable `u`, the Almansi-Fischer projections between them, the
//! reproducing kernel of `M_k`, and polynomial null solutions of `R_k`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::Multivector;
use crate::error::{Error, Result};
use crate::linalg::{self, combine, coordinate_matrix};
use crate::ops;
use crate::poly::{homogeneous_exponents, pairing_u, CliffordPoly, Exponents, VariableGroup};

use VariableGroup::{U, V, X};

/// Singular values below this fraction of the largest span the nullspace.
pub const NULLSPACE_REL_TOL: f64 = 1e-9;
/// Residual allowed for elements of a constructed basis.
pub const BASIS_RESIDUAL_TOL: f64 = 1e-10;
/// Residual allowed for membership checks on inputs.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
pub const REPRODUCING_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceKind {
    Harmonic,
    Monogenic,
    /// Null solutions of `R_k`, homogeneous of the given degree in `x`.
    RkNull(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolySpaceBasis {
    pub m: usize,
    pub k: usize,
    pub kind: SpaceKind,
    pub elements: Vec<CliffordPoly>,
    /// Singular values of the defining operator's matrix, descending.
    pub singular_values: Vec<f64>,
}

impl PolySpaceBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }

    /// Real combination of the basis with coefficients uniform in `[-1, 1]`.
    pub fn random_element<R: Rng>(&self, rng: &mut R) -> CliffordPoly {
        let w = DVector::from_fn(self.elements.len(), |_, _| rng.gen_range(-1.0..1.0));
        combine(&self.elements, &w)
    }

    /// Smallest singular value of the basis' coordinate matrix; positive
    /// exactly when the elements are linearly independent.
    pub fn independence(&self) -> f64 {
        let s = linalg::singular_values(&coordinate_matrix(&self.elements));
        s.last().copied().unwrap_or(0.0)
    }
}

/// Real basis of the Clifford-valued homogeneous polynomials of degree `k`
/// in `u`: every monomial times every blade.
pub fn monomial_blade_basis(m: usize, k: usize) -> Vec<CliffordPoly> {
    let mut out = Vec::new();
    for exps in homogeneous_exponents(m, k) {
        let e = Exponents::from_group(U, &exps);
        for mask in 0..1usize << m {
            out.push(CliffordPoly::monomial(e, Multivector::blade(m, mask, 1.0)));
        }
    }
    out
}

/// Basis of the nullspace of a real-linear map restricted to `span(domain)`.
pub fn nullspace_of_map<F>(domain: &[CliffordPoly], op: F) -> (Vec<CliffordPoly>, Vec<f64>)
where
    F: Fn(&CliffordPoly) -> CliffordPoly + Sync,
{
    let images: Vec<CliffordPoly> = domain.par_iter().map(&op).collect();
    let a = coordinate_matrix(&images);
    let a = if a.nrows() == 0 {
        DMatrix::zeros(0, domain.len())
    } else {
        a
    };
    let ns = linalg::nullspace(&a, NULLSPACE_REL_TOL);
    let elements = ns.vectors.iter().map(|w| combine(domain, w)).collect();
    (elements, ns.singular_values)
}

fn check_params(m: usize) -> Result<()> {
    if !(3..=crate::clifford::MAX_DIM).contains(&m) {
        return Err(Error::UnsupportedDimension(m));
    }
    Ok(())
}

pub fn build_harmonic_basis(m: usize, k: usize) -> Result<PolySpaceBasis> {
    check_params(m)?;
    let (elements, singular_values) =
        nullspace_of_map(&monomial_blade_basis(m, k), |p| p.laplacian(U));
    Ok(PolySpaceBasis {
        m,
        k,
        kind: SpaceKind::Harmonic,
        elements,
        singular_values,
    })
}

pub fn build_monogenic_basis(m: usize, k: usize) -> Result<PolySpaceBasis> {
    check_params(m)?;
    let (elements, singular_values) =
        nullspace_of_map(&monomial_blade_basis(m, k), |p| p.dirac_left(U));
    Ok(PolySpaceBasis {
        m,
        k,
        kind: SpaceKind::Monogenic,
        elements,
        singular_values,
    })
}

/// Polynomials `f(x, u)`, homogeneous of degree `d` in `x` and `M_k`-valued
/// in `u`, with `R_k f = 0`.
pub fn build_rk_null_basis(m: usize, k: usize, d: usize) -> Result<PolySpaceBasis> {
    let mk = build_monogenic_basis(m, k)?;
    let mut domain = Vec::new();
    for exps in homogeneous_exponents(m, d) {
        let xmono = CliffordPoly::monomial(
            Exponents::from_group(X, &exps),
            Multivector::scalar(m, 1.0),
        );
        for b in &mk.elements {
            domain.push(xmono.mul(b));
        }
    }
    let (elements, singular_values) =
        nullspace_of_map(&domain, |f| ops::rarita_schwinger_unchecked(f, m, k));
    Ok(PolySpaceBasis {
        m,
        k,
        kind: SpaceKind::RkNull(d),
        elements,
        singular_values,
    })
}

fn projection_constant(m: usize, k: usize) -> Result<f64> {
    let c = m as f64 + 2.0 * k as f64 - 2.0;
    if c == 0.0 {
        return Err(Error::Parameter(format!(
            "m + 2k - 2 vanishes for m = {m}, k = {k}"
        )));
    }
    Ok(c)
}

/// `u D_u h` with both factors acting from the left.
fn u_dirac_left(h: &CliffordPoly, m: usize) -> CliffordPoly {
    CliffordPoly::vector_var(m, U).mul(&h.dirac_left(U))
}

/// `(h D_u) u` with both factors acting from the right.
fn dirac_u_right(h: &CliffordPoly, m: usize) -> CliffordPoly {
    h.dirac_right(U).mul(&CliffordPoly::vector_var(m, U))
}

/// `P_k^+ = 1 + u D_u / (m + 2k - 2)` : `H_k → M_k`.
pub fn proj_plus(h: &CliffordPoly, m: usize, k: usize) -> Result<CliffordPoly> {
    let c = projection_constant(m, k)?;
    Ok(h.add_scaled(&u_dirac_left(h, m), 1.0 / c))
}

/// `P_k^- = -u D_u / (m + 2k - 2)` : `H_k → u M_{k-1}`.
pub fn proj_minus(h: &CliffordPoly, m: usize, k: usize) -> Result<CliffordPoly> {
    let c = projection_constant(m, k)?;
    Ok(u_dirac_left(h, m).scale(-1.0 / c))
}

/// Right-handed `P_k^+`: `h + (h D_u) u / (m + 2k - 2)`, onto right monogenic
/// polynomials.
pub fn proj_plus_right(h: &CliffordPoly, m: usize, k: usize) -> Result<CliffordPoly> {
    let c = projection_constant(m, k)?;
    Ok(h.add_scaled(&dirac_u_right(h, m), 1.0 / c))
}

/// Right-handed `P_k^-`: `-(h D_u) u / (m + 2k - 2)`.
pub fn proj_minus_right(h: &CliffordPoly, m: usize, k: usize) -> Result<CliffordPoly> {
    let c = projection_constant(m, k)?;
    Ok(dirac_u_right(h, m).scale(-1.0 / c))
}

fn relative(residual: f64, scale: f64) -> f64 {
    residual / scale.max(1.0)
}

pub fn harmonic_residual(h: &CliffordPoly) -> f64 {
    relative(h.laplacian(U).max_abs_coeff(), h.max_abs_coeff())
}

pub fn monogenic_residual(h: &CliffordPoly) -> f64 {
    relative(h.dirac_left(U).max_abs_coeff(), h.max_abs_coeff())
}

pub fn right_monogenic_residual(h: &CliffordPoly) -> f64 {
    relative(h.dirac_right(U).max_abs_coeff(), h.max_abs_coeff())
}

fn homogeneity_residual(h: &CliffordPoly, k: usize) -> f64 {
    relative(
        h.euler_degree(U).sub(&h.scale(k as f64)).max_abs_coeff(),
        h.max_abs_coeff(),
    )
}

/// Checks that `f` is `M_k`-valued in `u` (homogeneous of degree `k`, left
/// monogenic) up to [`MEMBERSHIP_TOL`].
pub fn check_mk(f: &CliffordPoly, k: usize) -> Result<()> {
    let r = homogeneity_residual(f, k).max(monogenic_residual(f));
    if r > MEMBERSHIP_TOL {
        return Err(Error::NotInSpace {
            space: "M_k",
            residual: r,
        });
    }
    Ok(())
}

/// Checks that `g` is `u M_{k-1}`-valued: harmonic, degree `k`, and fixed by `P_k^-`.
pub fn check_u_mk(g: &CliffordPoly, m: usize, k: usize) -> Result<()> {
    let r = homogeneity_residual(g, k)
        .max(harmonic_residual(g))
        .max(relative(
            proj_plus(g, m, k)?.max_abs_coeff(),
            g.max_abs_coeff(),
        ));
    if r > MEMBERSHIP_TOL {
        return Err(Error::NotInSpace {
            space: "u M_{k-1}",
            residual: r,
        });
    }
    Ok(())
}

/// `H_k = M_k ⊕ u M_{k-1}`: returns `(P_k^+ h, P_k^- h)`.
pub fn almansi_fischer_split(
    h: &CliffordPoly,
    m: usize,
    k: usize,
) -> Result<(CliffordPoly, CliffordPoly)> {
    let r = harmonic_residual(h).max(homogeneity_residual(h, k));
    if r > MEMBERSHIP_TOL {
        return Err(Error::NotInSpace {
            space: "H_k",
            residual: r,
        });
    }
    Ok((proj_plus(h, m, k)?, proj_minus(h, m, k)?))
}

/// Reproducing kernel of `M_k`: `f(v) = ∫ \bar{Z_k(u, v)} f(u) dS(u)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZonalKernel {
    pub m: usize,
    pub k: usize,
    /// `Z_k(u, v)`: left monogenic in `u`, right monogenic in `v`.
    pub kernel: CliffordPoly,
    pub reproducing_residual: f64,
    pub condition: f64,
}

impl ZonalKernel {
    /// `\bar{Z_k(u, v)}`: its `v`-dependence sits on the left and it is
    /// right monogenic in `u`.
    pub fn conjugate_kernel(&self) -> CliffordPoly {
        self.kernel.conjugate()
    }

    /// `∫ \bar{Z_k(u, v)} f(u) dS(u)` as a polynomial in `v`.
    pub fn reproduce(&self, f: &CliffordPoly) -> Result<CliffordPoly> {
        for g in [X, V] {
            if f.depends_on(g) {
                return Err(Error::GroupNotAllowed(g));
            }
        }
        Ok(self.conjugate_kernel().mul(f).integrate_sphere_u())
    }

    /// Largest coefficient of `reproduce(f) - f(v)`.
    pub fn reproducing_error(&self, f: &CliffordPoly) -> Result<f64> {
        Ok(self
            .reproduce(f)?
            .sub(&f.rename_group(U, V))
            .max_abs_coeff())
    }
}

/// Picks elements `g_1..g_N` of `M_k` such that `{g_i e_A}` is a real basis,
/// i.e. generators of `M_k` as a free right `Cl_m`-module.
fn module_generators(basis: &PolySpaceBasis, seed: u64) -> Result<Vec<CliffordPoly>> {
    let m = basis.m;
    let blades = 1usize << m;
    if basis.dim() % blades != 0 {
        return Err(Error::Parameter(format!(
            "dim M_k = {} is not a multiple of 2^m",
            basis.dim()
        )));
    }
    let n = basis.dim() / blades;
    for attempt in 0..8u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let gens: Vec<CliffordPoly> = (0..n).map(|_| basis.random_element(&mut rng)).collect();
        let mut spanning = Vec::with_capacity(basis.dim());
        for g in &gens {
            for mask in 0..blades {
                spanning.push(g.right_mul(&Multivector::blade(m, mask, 1.0)));
            }
        }
        let s = linalg::singular_values(&coordinate_matrix(&spanning));
        if s.last().copied().unwrap_or(0.0) > NULLSPACE_REL_TOL * s[0] {
            return Ok(gens);
        }
    }
    Err(Error::Parameter(
        "could not find free module generators for M_k".into(),
    ))
}

/// Builds `Z_k` from the ansatz `Z = Σ_{ij} g_i(u) C_ij \bar{g_j(v)}` where the
/// `g_i` generate `M_k` over `Cl_m`. The reproducing constraints reduce to the
/// real linear system `Σ_i \bar{C_ij} G_il = δ_jl` with Gram entries
/// `G_il = ∫ \bar{g_i} g_l dS`.
pub fn build_zonal_kernel(m: usize, k: usize) -> Result<ZonalKernel> {
    let basis = build_monogenic_basis(m, k)?;
    build_zonal_kernel_from(&basis)
}

pub fn build_zonal_kernel_from(basis: &PolySpaceBasis) -> Result<ZonalKernel> {
    let (m, k) = (basis.m, basis.k);
    let blades = 1usize << m;
    let gens = module_generators(basis, 0x2a_5eed + (m * 31 + k) as u64)?;
    let n = gens.len();
    let conj: Vec<CliffordPoly> = gens.iter().map(CliffordPoly::conjugate).collect();
    let mut gram = vec![vec![Multivector::zero(m); n]; n];
    for i in 0..n {
        for l in 0..n {
            gram[i][l] = pairing_u(&conj[i], &gens[l])?;
        }
    }
    // Column (i, A): Y_i = e_A. Row (l, B): blade B of Σ_i Y_i G_il.
    let size = n * blades;
    let mut a = DMatrix::zeros(size, size);
    for i in 0..n {
        for mask in 0..blades {
            let ea = Multivector::blade(m, mask, 1.0);
            for l in 0..n {
                let prod = &ea * &gram[i][l];
                for (b, &v) in prod.coeffs().iter().enumerate() {
                    a[(l * blades + b, i * blades + mask)] = v;
                }
            }
        }
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin;
    let mut coeffs = vec![vec![Multivector::zero(m); n]; n]; // coeffs[i][j] = C_ij
    let mut solve_residual: f64 = 0.0;
    for j in 0..n {
        let rhs = DVector::from_fn(size, |r, _| if r == j * blades { 1.0 } else { 0.0 });
        let y = svd
            .solve(&rhs, smax * 1e-14)
            .map_err(|e| Error::Parameter(e.to_string()))?;
        solve_residual = solve_residual.max((&a * &y - &rhs).amax());
        for i in 0..n {
            let yi = Multivector::try_from_coeffs(
                m,
                y.rows(i * blades, blades).iter().copied().collect(),
            )?;
            coeffs[i][j] = yi.conjugate();
        }
    }
    if condition > 1e12 {
        return Err(Error::IllConditioned {
            condition,
            residual: solve_residual,
        });
    }
    let conj_v: Vec<CliffordPoly> = conj.iter().map(|c| c.rename_group(U, V)).collect();
    let mut kernel = CliffordPoly::zero(m);
    for i in 0..n {
        let mut right = CliffordPoly::zero(m);
        for j in 0..n {
            right = right.add(&conj_v[j].left_mul(&coeffs[i][j]));
        }
        kernel = kernel.add(&gens[i].mul(&right));
    }
    let mut zk = ZonalKernel {
        m,
        k,
        kernel,
        reproducing_residual: 0.0,
        condition,
    };
    let mut residual: f64 = 0.0;
    for b in &basis.elements {
        residual = residual.max(zk.reproducing_error(b)?);
    }
    zk.reproducing_residual = residual;
    if residual > REPRODUCING_TOL {
        return Err(Error::IllConditioned {
            condition,
            residual,
        });
    }
    Ok(zk)
}

/// Random `M_k`-valued polynomial in `x` of total degree at most `max_degree`
/// (or exactly `max_degree` when `homogeneous`).
pub fn random_x_field<R: Rng>(
    basis: &PolySpaceBasis,
    max_degree: usize,
    homogeneous: bool,
    rng: &mut R,
) -> CliffordPoly {
    let m = basis.m;
    let mut out = CliffordPoly::zero(m);
    let start = if homogeneous { max_degree } else { 0 };
    for d in start..=max_degree {
        for exps in homogeneous_exponents(m, d) {
            let xmono = CliffordPoly::monomial(
                Exponents::from_group(X, &exps),
                Multivector::scalar(m, 1.0),
            );
            out = out.add(&xmono.mul(&basis.random_element(rng)));
        }
    }
    out
}

/// `u g` for a random `M_{k-1}`-valued field `g`, i.e. a `u M_{k-1}`-valued field.
pub fn random_u_field<R: Rng>(
    lower_basis: &PolySpaceBasis,
    max_degree: usize,
    rng: &mut R,
) -> CliffordPoly {
    let m = lower_basis.m;
    CliffordPoly::vector_var(m, U).mul(&random_x_field(lower_basis, max_degree, false, rng))
}

pub fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    (0..r).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// `dim M_k = 2^m C(m+k-2, m-2)` for `Cl_m`-valued polynomials.
pub fn monogenic_dimension(m: usize, k: usize) -> usize {
    (1 << m) * binomial(m + k - 2, m - 2)
}

/// `dim H_k = 2^m (C(m+k-1, k) - C(m+k-3, k-2))`.
pub fn harmonic_dimension(m: usize, k: usize) -> usize {
    let lower = if k >= 2 { binomial(m + k - 3, k - 2) } else { 0 };
    (1 << m) * (binomial(m + k - 1, k) - lower)
}
