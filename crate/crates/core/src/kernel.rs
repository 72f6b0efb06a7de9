//! Fundamental solutions `E_k^{2j-1}` of the fermionic operators as rational
//! kernels `Σ_s N_s(x - y, u, v) |x - y|^{-s}`, their exact x-derivatives,
//! and calibration of the constants `λ_{2j-1}`.
//!
//! Kernels sit on the left of the u-pairing, so they are built right
//! monogenic in `u`: `E = λ \bar{Z_k}(xux, v) x |x|^{-(m + 2k + 2 - 2j)}`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::Multivector;
use crate::error::{Error, Result};
use crate::ops::{coeff_a, RsOperators, SpinField};
use crate::poly::{pairing_u_partial, CliffordPoly, CompiledPoly, Exponents, VariableGroup};
use crate::quad::{build_sphere_rule, integrate_surface};
use crate::spaces::{build_monogenic_basis, build_zonal_kernel_from, PolySpaceBasis, ZonalKernel};

use VariableGroup::{U, V, X};

/// Kernels are never evaluated closer than this to their center.
pub const SINGULARITY_GUARD: f64 = 1e-9;
pub const LADDER_TOL: f64 = 1e-8;
pub const LADDER_POINTS: usize = 20;
pub const CALIBRATION_SEED: u64 = 0x1a3b_da;

/// `Σ_s N_s(X, u, v) |X|^{-s}` with `X = x - center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalKernel {
    m: usize,
    center: Vec<f64>,
    terms: BTreeMap<u32, CliffordPoly>,
}

impl RationalKernel {
    pub fn zero(m: usize, center: &[f64]) -> Self {
        assert_eq!(center.len(), m);
        Self {
            m,
            center: center.to_vec(),
            terms: BTreeMap::new(),
        }
    }

    pub fn from_term(center: &[f64], numerator: CliffordPoly, pole: u32) -> Self {
        let mut k = Self::zero(numerator.dim(), center);
        k.add_term(pole, &numerator);
        k
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &CliffordPoly)> {
        self.terms.iter().map(|(s, n)| (*s, n))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total number of monomials over all numerators.
    pub fn size(&self) -> usize {
        self.terms.values().map(CliffordPoly::num_terms).sum()
    }

    pub fn add_term(&mut self, pole: u32, numerator: &CliffordPoly) {
        let slot = self
            .terms
            .entry(pole)
            .or_insert_with(|| CliffordPoly::zero(self.m));
        *slot = slot.add(numerator);
        if slot.is_zero() {
            self.terms.remove(&pole);
        }
    }

    fn same_center(&self, other: &Self) {
        assert!(
            self.m == other.m && self.center == other.center,
            "kernels with different centers"
        );
    }

    pub fn map_numerators(&self, f: impl Fn(&CliffordPoly) -> CliffordPoly) -> Self {
        let mut out = Self::zero(self.m, &self.center);
        for (s, n) in &self.terms {
            out.add_term(*s, &f(n));
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        SpinField::add_scaled(self, other, -1.0)
    }

    /// `∂/∂x_i`, exact: `∂_i(N r^{-s}) = (∂_i N) r^{-s} - s X_i N r^{-s-2}`.
    pub fn differentiate_x(&self, i: usize) -> Self {
        let xi = CliffordPoly::var(self.m, X, i);
        let mut out = Self::zero(self.m, &self.center);
        for (s, n) in &self.terms {
            out.add_term(*s, &n.partial(X, i));
            if *s > 0 {
                out.add_term(s + 2, &xi.mul(n).scale(-(*s as f64)));
            }
        }
        out
    }

    fn dirac(&self, left: bool) -> Self {
        let xv = CliffordPoly::vector_var(self.m, X);
        let mut out = Self::zero(self.m, &self.center);
        for (s, n) in &self.terms {
            let (dn, xn) = if left {
                (n.dirac_left(X), xv.mul(n))
            } else {
                (n.dirac_right(X), n.mul(&xv))
            };
            out.add_term(*s, &dn);
            if *s > 0 {
                out.add_term(s + 2, &xn.scale(-(*s as f64)));
            }
        }
        out
    }

    /// Common value of `deg_X(monomial) - s` over all terms, if there is one.
    pub fn homogeneity(&self) -> Option<i64> {
        let mut value = None;
        for (s, n) in &self.terms {
            for (e, _) in n.terms() {
                let h = e.degree_in(X) as i64 - *s as i64;
                match value {
                    None => value = Some(h),
                    Some(v) if v != h => return None,
                    _ => {}
                }
            }
        }
        value
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms
            .values()
            .map(CliffordPoly::max_abs_coeff)
            .fold(0.0, f64::max)
    }

    fn offset(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        if x.len() != self.m {
            return Err(Error::DimensionMismatch {
                left: self.m,
                right: x.len(),
            });
        }
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let r = d.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r <= SINGULARITY_GUARD {
            return Err(Error::Singular(r));
        }
        Ok((d, r))
    }

    /// Numeric substitution of `x`; the result is a polynomial in the
    /// remaining groups.
    pub fn evaluate(&self, x: &[f64]) -> Result<CliffordPoly> {
        let (d, r) = self.offset(x)?;
        let mut out = CliffordPoly::zero(self.m);
        for (s, n) in &self.terms {
            let val = n.evaluate(&[(X, &d)]);
            out = out.add_scaled(&val, r.powi(-(*s as i32)));
        }
        Ok(out)
    }

    pub fn compile(&self) -> CompiledKernel {
        CompiledKernel {
            m: self.m,
            center: self.center.clone(),
            parts: self
                .terms
                .iter()
                .map(|(s, n)| (*s, CompiledPoly::new(n, X)))
                .collect(),
        }
    }

    /// `(K, G)_u`: integrates `u` out of `K · G`, where `G` is a polynomial
    /// in the shifted variable `X` and in `u`.
    pub fn pair_u(&self, g: &CliffordPoly) -> Self {
        self.map_numerators(|n| pairing_u_partial(n, g))
    }

    /// Fixes `v` numerically.
    pub fn substitute_v(&self, v: &[f64]) -> Self {
        self.map_numerators(|n| n.evaluate(&[(V, v)]))
    }
}

impl SpinField for RationalKernel {
    fn dirac_x_left(&self) -> Self {
        self.dirac(true)
    }

    fn dirac_x_right(&self) -> Self {
        self.dirac(false)
    }

    fn map_u<F: Fn(&CliffordPoly) -> CliffordPoly>(&self, f: F) -> Self {
        self.map_numerators(f)
    }

    fn add_scaled(&self, other: &Self, s: f64) -> Self {
        self.same_center(other);
        let mut out = self.clone();
        for (p, n) in &other.terms {
            out.add_term(*p, &n.scale(s));
        }
        out
    }

    fn scale(&self, s: f64) -> Self {
        self.map_numerators(|n| n.scale(s))
    }
}

/// A kernel prepared for evaluation at many points.
#[derive(Clone, Debug)]
pub struct CompiledKernel {
    m: usize,
    center: Vec<f64>,
    parts: Vec<(u32, CompiledPoly)>,
}

impl CompiledKernel {
    pub fn eval(&self, x: &[f64]) -> Result<CliffordPoly> {
        let d: Vec<f64> = x.iter().zip(&self.center).map(|(a, b)| a - b).collect();
        let r = d.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r <= SINGULARITY_GUARD {
            return Err(Error::Singular(r));
        }
        let mut acc: BTreeMap<Exponents, Multivector> = BTreeMap::new();
        for (s, p) in &self.parts {
            p.eval_into(&d, r.powi(-(*s as i32)), &mut acc);
        }
        let mut out = CliffordPoly::zero(self.m);
        for (e, c) in acc {
            out.add_term(e, &c);
        }
        Ok(out)
    }

    /// Value of a kernel whose numerators depend on `x` only.
    pub fn eval_constant(&self, x: &[f64]) -> Result<Multivector> {
        Ok(self.eval(x)?.constant_value())
    }
}

/// `p(X + y)`: rewrites a polynomial in `x` in the shifted variable `X = x - y`.
pub fn shift_x(p: &CliffordPoly, y: &[f64]) -> Result<CliffordPoly> {
    let m = p.dim();
    if y.len() != m {
        return Err(Error::DimensionMismatch {
            left: m,
            right: y.len(),
        });
    }
    if !p.depends_on(X) {
        return Ok(p.clone());
    }
    let repl: Vec<CliffordPoly> = (0..m)
        .map(|i| CliffordPoly::var(m, X, i).add(&CliffordPoly::scalar(m, y[i])))
        .collect();
    p.substitute(X, &repl)
}

/// Pole order `m + 2k + 2 - 2j` of `E_k^{2j-1}`.
pub fn kernel_pole(m: usize, k: usize, j: usize) -> Result<u32> {
    let s = (m + 2 * k + 2) as i64 - 2 * j as i64;
    if j == 0 || s < 1 {
        return Err(Error::Parameter(format!(
            "no rational fundamental solution for m = {m}, k = {k}, j = {j}"
        )));
    }
    Ok(s as u32)
}

/// `E_k^{2j-1}(x - y, u, v) = λ \bar{Z_k}((x-y) u (x-y), v) (x-y) |x-y|^{-(m+2k+2-2j)}`.
pub fn build_ek(m: usize, k: usize, j: usize, y: &[f64], zonal: &ZonalKernel, lambda: f64) -> Result<RationalKernel> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::Parameter(format!("λ = {lambda} must be finite and nonzero")));
    }
    if zonal.m != m || zonal.k != k {
        return Err(Error::Parameter(format!(
            "zonal kernel built for (m, k) = ({}, {}), expected ({m}, {k})",
            zonal.m, zonal.k
        )));
    }
    if y.len() != m {
        return Err(Error::DimensionMismatch {
            left: m,
            right: y.len(),
        });
    }
    let pole = kernel_pole(m, k, j)?;
    // xux = |x|^2 u - 2 <x, u> x, componentwise
    let x2 = CliffordPoly::norm_squared(m, X);
    let mut xu = CliffordPoly::zero(m);
    for i in 0..m {
        xu = xu.add(&CliffordPoly::var(m, X, i).mul(&CliffordPoly::var(m, U, i)));
    }
    let w: Vec<CliffordPoly> = (0..m)
        .map(|i| {
            x2.mul(&CliffordPoly::var(m, U, i))
                .sub(&xu.mul(&CliffordPoly::var(m, X, i)).scale(2.0))
        })
        .collect();
    let zw = zonal.conjugate_kernel().substitute(U, &w)?;
    let numerator = zw.mul(&CliffordPoly::vector_var(m, X)).scale(lambda);
    Ok(RationalKernel::from_term(y, numerator, pole))
}

/// Whether `E_k^1, ..., E_k^{2j-1}` form a working ladder. In even dimension
/// the kernel with `2t = m` is annihilated by the ladder factor, so no chain
/// may pass through it.
pub fn ladder_supported(m: usize, j: usize) -> bool {
    j >= 1 && (m % 2 == 1 || 2 * j < m)
}

/// `M_k` basis and reproducing kernel for one `(m, k)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelFamily {
    pub m: usize,
    pub k: usize,
    pub basis: PolySpaceBasis,
    pub zonal: ZonalKernel,
}

impl KernelFamily {
    pub fn build(m: usize, k: usize) -> Result<Self> {
        let basis = build_monogenic_basis(m, k)?;
        let zonal = build_zonal_kernel_from(&basis)?;
        Ok(Self { m, k, basis, zonal })
    }

    pub fn kernel(&self, j: usize, y: &[f64], lambda: f64) -> Result<RationalKernel> {
        build_ek(self.m, self.k, j, y, &self.zonal, lambda)
    }

    pub fn calibrated_kernel(&self, j: usize, y: &[f64], table: &LambdaTable) -> Result<RationalKernel> {
        self.kernel(j, y, table.get(self.m, self.k, j)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderOutcome {
    /// Largest coefficient of `E_hi (a T_k^* T_k + R_k^2) - E_lo` over the points.
    pub residual: f64,
    pub relative: f64,
    /// Least-squares factor `c` with `c · E_hi (...) ≈ E_lo`; `1` when calibrated.
    pub ratio: f64,
}

/// Sample points `y + r ω` with `r ∈ [0.5, 2]`.
pub fn ladder_points(m: usize, y: &[f64], n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let dir = loop {
                let d: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let n2: f64 = d.iter().map(|c| c * c).sum();
                if n2 > 0.01 && n2 <= 1.0 {
                    break d.iter().map(|c| c / n2.sqrt()).collect::<Vec<_>>();
                }
            };
            let r = rng.gen_range(0.5..2.0);
            y.iter().zip(&dir).map(|(c, d)| c + r * d).collect()
        })
        .collect()
}

fn poly_dot(a: &CliffordPoly, b: &CliffordPoly) -> f64 {
    a.terms()
        .filter_map(|(e, ca)| b.coefficient(e).map(|cb| (ca, cb)))
        .map(|(ca, cb)| ca.coeffs().iter().zip(cb.coeffs()).map(|(x, y)| x * y).sum::<f64>())
        .sum()
}

/// Compares the right action of `a_{j-1} T_k^* T_k + R_k^2` on `e_hi` with
/// `e_lo` at `points`. The kernels act from the right because they sit on the
/// left of every pairing.
pub fn ladder_check(
    m: usize,
    k: usize,
    j: usize,
    e_hi: &RationalKernel,
    e_lo: &RationalKernel,
    points: &[Vec<f64>],
) -> Result<LadderOutcome> {
    if j < 2 {
        return Err(Error::Parameter("the ladder starts at j = 2".into()));
    }
    let a = *coeff_a(m, k, j - 1)?.numer() as f64 / *coeff_a(m, k, j - 1)?.denom() as f64;
    let ops = RsOperators::new(m, k)?;
    let lhs = ops.factor_right(a, 1.0, e_hi);
    let (mut ab, mut aa) = (0.0, 0.0);
    let (mut residual, mut scale) = (0.0f64, 0.0f64);
    for p in points {
        let va = lhs.evaluate(p)?;
        let vb = e_lo.evaluate(p)?;
        ab += poly_dot(&va, &vb);
        aa += poly_dot(&va, &va);
        residual = residual.max(va.sub(&vb).max_abs_coeff());
        scale = scale.max(vb.max_abs_coeff());
    }
    if aa == 0.0 {
        return Err(Error::DegenerateBatch("ladder image vanishes".into()));
    }
    Ok(LadderOutcome {
        residual,
        relative: residual / scale.max(f64::MIN_POSITIVE),
        ratio: ab / aa,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaEntry {
    pub m: usize,
    pub k: usize,
    pub j: usize,
    pub value: f64,
    /// Relative residual of the calibrating identity.
    pub residual: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LambdaTable {
    pub entries: Vec<LambdaEntry>,
}

impl LambdaTable {
    pub fn entry(&self, m: usize, k: usize, j: usize) -> Option<&LambdaEntry> {
        self.entries.iter().find(|e| e.m == m && e.k == k && e.j == j)
    }

    pub fn get(&self, m: usize, k: usize, j: usize) -> Result<f64> {
        self.entry(m, k, j)
            .map(|e| e.value)
            .ok_or(Error::Uncalibrated { m, k, j })
    }

    pub fn insert(&mut self, entry: LambdaEntry) {
        self.entries
            .retain(|e| !(e.m == entry.m && e.k == entry.k && e.j == entry.j));
        self.entries.push(entry);
        self.entries.sort_by_key(|e| (e.m, e.k, e.j));
    }
}

/// `∫_{|x|=1} (E(x, u, v), x f(u))_u dσ(x)` for a kernel centered at the
/// origin and an x-constant `f`; exact, since `|x| = 1` on the sphere turns
/// the integrand into a polynomial.
pub fn centered_cauchy_integral(e: &RationalKernel, f: &CliffordPoly) -> Result<CliffordPoly> {
    if e.center().iter().any(|&c| c != 0.0) {
        return Err(Error::Parameter("kernel must be centered at the origin".into()));
    }
    if f.depends_on(X) || f.depends_on(V) {
        return Err(Error::GroupNotAllowed(if f.depends_on(X) { X } else { V }));
    }
    let g = CliffordPoly::vector_var(e.dim(), X).mul(f);
    let paired = e.pair_u(&g);
    let mut sum = CliffordPoly::zero(e.dim());
    for (_, n) in paired.terms() {
        sum = sum.add(n);
    }
    Ok(sum.rename_group(X, U).integrate_sphere_u())
}

fn calibrate_first(family: &KernelFamily, seed: u64) -> Result<LambdaEntry> {
    let (m, k) = (family.m, family.k);
    let e = family.kernel(1, &vec![0.0; m], 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let batch: Vec<CliffordPoly> = (0..4).map(|_| family.basis.random_element(&mut rng)).collect();
    let mut pairs = Vec::with_capacity(batch.len());
    let (mut lf, mut ll) = (0.0, 0.0);
    for f in &batch {
        let l = centered_cauchy_integral(&e, f)?;
        let target = f.rename_group(U, V);
        lf += poly_dot(&l, &target);
        ll += poly_dot(&l, &l);
        pairs.push((l, target));
    }
    if ll < 1e-300 {
        return Err(Error::DegenerateBatch(format!(
            "first-order Cauchy integral vanishes for (m, k) = ({m}, {k})"
        )));
    }
    let lambda = lf / ll;
    let mut residual: f64 = 0.0;
    for (l, target) in &pairs {
        let r = l.scale(lambda).sub(target).max_abs_coeff() / target.max_abs_coeff();
        residual = residual.max(r);
    }
    Ok(LambdaEntry {
        m,
        k,
        j: 1,
        value: lambda,
        residual,
        seed,
    })
}

/// Calibrates `λ_1, ..., λ_{2j-1}` for the family, filling in whatever the
/// table is missing, and returns `λ_{2j-1}`. `λ_1` normalises the first
/// order Cauchy formula on x-constant fields; each further constant is fixed
/// by the ladder identity against the previous one.
pub fn calibrate_lambda(family: &KernelFamily, j: usize, table: &mut LambdaTable) -> Result<f64> {
    let (m, k) = (family.m, family.k);
    if let Ok(v) = table.get(m, k, j) {
        return Ok(v);
    }
    if !ladder_supported(m, j) {
        return Err(Error::Parameter(format!(
            "λ_{} is not defined by the ladder for even m = {m} with 2j >= m",
            2 * j - 1
        )));
    }
    let seed = CALIBRATION_SEED ^ ((m * 1000 + k * 10 + j) as u64);
    let entry = if j == 1 {
        calibrate_first(family, seed)?
    } else {
        let lo = calibrate_lambda(family, j - 1, table)?;
        let y = vec![0.0; m];
        let e_hi = family.kernel(j, &y, 1.0)?;
        let e_lo = family.kernel(j - 1, &y, lo)?;
        let points = ladder_points(m, &y, LADDER_POINTS, seed);
        let fit = ladder_check(m, k, j, &e_hi, &e_lo, &points)?;
        let check = ladder_check(m, k, j, &e_hi.scale(fit.ratio), &e_lo, &points)?;
        LambdaEntry {
            m,
            k,
            j,
            value: fit.ratio,
            residual: check.relative,
            seed,
        }
    };
    if entry.value == 0.0 || !entry.value.is_finite() {
        return Err(Error::DegenerateBatch(format!(
            "λ_{} for (m, k) = ({m}, {k}) came out as {}",
            2 * j - 1,
            entry.value
        )));
    }
    let value = entry.value;
    table.insert(entry);
    Ok(value)
}

/// Estimates `λ_1` from one configuration: the first-order Cauchy integral
/// over the unit sphere of an x-constant `f`, singularity at `y`, evaluated
/// at a numeric `v` with a quadrature rule of the given order.
pub fn cauchy_lambda_estimate(
    family: &KernelFamily,
    f: &CliffordPoly,
    y: &[f64],
    v: &[f64],
    order: usize,
) -> Result<f64> {
    let m = family.m;
    let e = family.kernel(1, y, 1.0)?.substitute_v(v);
    // n(x) = x = X + y on the unit sphere
    let normal = CliffordPoly::vector_var(m, X).add(&CliffordPoly::constant(Multivector::vector(y)));
    let integrand = e.pair_u(&normal.mul(f)).compile();
    let rule = build_sphere_rule(m, order, &vec![0.0; m], 1.0)?;
    let l: Multivector = integrate_surface(&rule, |node| integrand.eval_constant(node.point))?;
    let target = f.evaluate(&[(U, v)]).constant_value();
    let ll: f64 = l.coeffs().iter().map(|c| c * c).sum();
    if ll < 1e-300 {
        return Err(Error::DegenerateBatch("Cauchy integral vanishes".into()));
    }
    let lt: f64 = l.coeffs().iter().zip(target.coeffs()).map(|(a, b)| a * b).sum();
    Ok(lt / ll)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::sphere_area;
    use crate::spaces::right_monogenic_residual;
    use std::f64::consts::PI;

    fn family(m: usize, k: usize) -> KernelFamily {
        KernelFamily::build(m, k).unwrap()
    }

    #[test]
    fn power_rule() {
        let k = RationalKernel::from_term(&[0.0; 3], CliffordPoly::scalar(3, 1.0), 3);
        let d = k.differentiate_x(1);
        let expected = CliffordPoly::var(3, X, 1).scale(-3.0);
        assert_eq!(d.terms().count(), 1);
        let (s, n) = d.terms().next().unwrap();
        assert_eq!(s, 5);
        assert!(n.sub(&expected).max_abs_coeff() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let fam = family(3, 1);
        let y = [0.1, -0.2, 0.3];
        let e = fam.kernel(2, &y, 1.0).unwrap();
        let x = [0.7, 0.4, -0.5];
        let h = 1e-5;
        for i in 0..3 {
            let exact = e.differentiate_x(i).evaluate(&x).unwrap();
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = e
                .evaluate(&xp)
                .unwrap()
                .sub(&e.evaluate(&xm).unwrap())
                .scale(0.5 / h);
            let rel = exact.sub(&fd).max_abs_coeff() / exact.max_abs_coeff();
            assert!(rel < 1e-8, "axis {i}: {rel}");
        }
    }

    #[test]
    fn mixed_partials_commute() {
        let fam = family(3, 1);
        let e = fam.kernel(1, &[0.0; 3], 1.0).unwrap();
        let a = e.differentiate_x(0).differentiate_x(2);
        let b = e.differentiate_x(2).differentiate_x(0);
        let x = [0.3, 0.9, -0.4];
        let diff = a.evaluate(&x).unwrap().sub(&b.evaluate(&x).unwrap());
        assert!(diff.max_abs_coeff() < 1e-12);
    }

    #[test]
    fn homogeneity_and_u_degree() {
        let fam = family(3, 1);
        for j in 1..=2 {
            let e = fam.kernel(j, &[0.0; 3], 1.0).unwrap();
            assert_eq!(e.homogeneity(), Some(2 * j as i64 - 1 - 3));
            let x = [0.3, -0.5, 0.6];
            let x2: Vec<f64> = x.iter().map(|c| 2.0 * c).collect();
            let a = e.evaluate(&x).unwrap();
            let b = e.evaluate(&x2).unwrap();
            let t = 2f64.powi(2 * j as i32 - 1 - 3);
            assert!(b.sub(&a.scale(t)).max_abs_coeff() < 1e-12 * a.max_abs_coeff());
            for (_, n) in e.terms() {
                assert!(n.is_homogeneous_in(U, 1));
            }
            let d = e.differentiate_x(0);
            assert_eq!(d.homogeneity(), Some(2 * j as i64 - 2 - 3));
        }
    }

    #[test]
    fn scalar_kernel_in_three_dimensions() {
        let fam = family(3, 0);
        let e = fam.kernel(1, &[0.0; 3], 2.0).unwrap();
        let x = [0.5, -1.0, 0.25];
        let r3 = x.iter().map(|c| c * c).sum::<f64>().powf(1.5);
        let expected = Multivector::vector(&x).scale(2.0 / (4.0 * PI * r3));
        let got = e.evaluate(&x).unwrap().constant_value();
        assert!((&got - &expected).max_abs() < 1e-14);
    }

    #[test]
    fn evaluation_at_the_center_is_rejected() {
        let fam = family(3, 0);
        let e = fam.kernel(1, &[0.1, 0.0, 0.0], 1.0).unwrap();
        assert!(matches!(e.evaluate(&[0.1, 0.0, 0.0]), Err(Error::Singular(_))));
        assert!(fam.kernel(1, &[0.0; 3], 0.0).is_err());
        assert!(fam.kernel(3, &[0.0; 3], 1.0).is_err());
    }

    #[test]
    fn first_order_kernel_is_right_rarita_schwinger_null() {
        for (m, k) in [(3, 1), (3, 2), (4, 1)] {
            let fam = family(m, k);
            let y = vec![0.2; m];
            let e = fam.kernel(1, &y, 1.0).unwrap();
            let ops = RsOperators::new(m, k).unwrap();
            let r = ops.rk_right(&e);
            for p in ladder_points(m, &y, 5, 7) {
                let val = e.evaluate(&p).unwrap();
                assert!(right_monogenic_residual(&val) < 1e-10);
                let res = r.evaluate(&p).unwrap().max_abs_coeff();
                assert!(res < 1e-10 * val.max_abs_coeff().max(1.0), "(m,k)=({m},{k}): {res}");
            }
        }
    }

    #[test]
    fn kernel_is_monogenic_in_v() {
        let fam = family(4, 1);
        let e = fam.kernel(2, &[0.0; 4], 1.0).unwrap();
        let val = e.evaluate(&[0.3, -0.2, 0.5, 0.1]).unwrap();
        assert!(val.dirac_left(V).max_abs_coeff() < 1e-8);
    }

    #[test]
    fn scalar_cauchy_constant() {
        // k = 0: E = λ x / (ω_m |x|^m) and the u-pairing of constants adds
        // another factor ω_m, so the Cauchy kernel -x / (ω_m |x|^m) needs λ = -1/ω_m.
        for m in [3, 4] {
            let fam = family(m, 0);
            let mut table = LambdaTable::default();
            let l = calibrate_lambda(&fam, 1, &mut table).unwrap();
            assert!((l * sphere_area(m) + 1.0).abs() < 1e-10, "m={m}: {l}");
            assert!(table.entry(m, 0, 1).unwrap().residual < 1e-10);
        }
    }

    #[test]
    fn ladder_after_calibration() {
        let fam = family(3, 1);
        let mut table = LambdaTable::default();
        let l3 = calibrate_lambda(&fam, 2, &mut table).unwrap();
        assert!(l3 != 0.0);
        let y = [0.1, 0.2, -0.1];
        let hi = fam.calibrated_kernel(2, &y, &table).unwrap();
        let lo = fam.calibrated_kernel(1, &y, &table).unwrap();
        let pts = ladder_points(3, &y, LADDER_POINTS, 99);
        let out = ladder_check(3, 1, 2, &hi, &lo, &pts).unwrap();
        assert!(out.residual < LADDER_TOL, "{out:?}");
        let doubled = ladder_check(3, 1, 2, &hi.scale(2.0), &lo, &pts).unwrap();
        assert!(doubled.relative > 0.5);
    }

    #[test]
    fn even_dimension_ladder_degenerates_at_half_dimension() {
        let fam = family(4, 1);
        let e3 = fam.kernel(2, &[0.0; 4], 1.0).unwrap();
        let ops = RsOperators::new(4, 1).unwrap();
        let image = ops.factor_right(-1.0 / 3.0, 1.0, &e3);
        let p = [0.4, -0.3, 0.8, 0.2];
        assert!(image.evaluate(&p).unwrap().max_abs_coeff() < 1e-12);
        let mut table = LambdaTable::default();
        assert!(calibrate_lambda(&fam, 2, &mut table).is_err());
        assert!(ladder_supported(5, 2) && !ladder_supported(4, 2) && ladder_supported(4, 1));
    }

    #[test]
    fn uncalibrated_lookup_fails() {
        let table = LambdaTable::default();
        assert!(matches!(table.get(3, 1, 2), Err(Error::Uncalibrated { .. })));
    }

    #[test]
    fn cauchy_estimate_matches_calibration() {
        let fam = family(3, 1);
        let mut table = LambdaTable::default();
        let l1 = calibrate_lambda(&fam, 1, &mut table).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = fam.basis.random_element(&mut rng);
        let est = cauchy_lambda_estimate(&fam, &f, &[0.2, -0.1, 0.3], &[0.4, 0.5, -0.2], 32).unwrap();
        assert!((est - l1).abs() < 1e-8 * l1.abs(), "{est} vs {l1}");
    }
}
