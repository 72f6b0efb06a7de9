//! Boundary and volume integrals of u-pairings `(K(x, u, v), F(x, u))_u`
//! over balls, with the u-integration done exactly and the x-integration
//! by quadrature.

use crate::clifford::Multivector;
use crate::error::Result;
use crate::kernel::{shift_x, CompiledKernel, RationalKernel};
use crate::poly::{CliffordPoly, VariableGroup};
use crate::quad::{integrate_surface, integrate_volume, BallRule, SphereRule};

use VariableGroup::{U, V, X};

/// A polynomial field `g(x, u)` viewed as a kernel without poles, centered at
/// the origin, so it can stand on the left of a pairing.
pub fn field_as_kernel(g: &CliffordPoly) -> RationalKernel {
    RationalKernel::from_term(&vec![0.0; g.dim()], g.clone(), 0)
}

/// The x-integrand of `(K, dσ_x F)_u` on the sphere `|x - c| = R`, with `u`
/// integrated out: `Σ_s P_s(x - y, v) |x - y|^{-s}` where `P_s` carries the
/// normal `n(x) = (x - c) / R`.
pub fn boundary_integrand(k: &RationalKernel, f: &CliffordPoly, c: &[f64], radius: f64) -> Result<CompiledKernel> {
    let m = k.dim();
    let y = k.center();
    // n(x) = (X + y - c) / R
    let offset: Vec<f64> = y.iter().zip(c).map(|(a, b)| a - b).collect();
    let normal = CliffordPoly::vector_var(m, X)
        .add(&CliffordPoly::constant(Multivector::vector(&offset)))
        .scale(1.0 / radius);
    let g = normal.mul(&shift_x(f, y)?);
    Ok(k.pair_u(&g).compile())
}

/// The x-integrand of `(K, F)_u` with `u` integrated out.
pub fn volume_integrand(k: &RationalKernel, f: &CliffordPoly) -> Result<CompiledKernel> {
    Ok(k.pair_u(&shift_x(f, k.center())?).compile())
}

pub fn integrate_boundary(integrand: &CompiledKernel, rule: &SphereRule) -> Result<CliffordPoly> {
    integrate_surface(rule, |node| integrand.eval(node.point))
}

pub fn integrate_ball(integrand: &CompiledKernel, rule: &BallRule) -> Result<CliffordPoly> {
    integrate_volume(rule, |x| integrand.eval(x))
}

/// `∫_{∂B} (K, dσ_x F)_u` with `dσ_x = n(x) dσ(x)`; a polynomial in `v`.
pub fn boundary_pairing(k: &RationalKernel, f: &CliffordPoly, rule: &SphereRule) -> Result<CliffordPoly> {
    integrate_boundary(&boundary_integrand(k, f, &rule.center, rule.radius)?, rule)
}

/// `∫_B (K, F)_u dx`; a polynomial in `v`.
pub fn volume_pairing(k: &RationalKernel, f: &CliffordPoly, rule: &BallRule) -> Result<CliffordPoly> {
    integrate_ball(&volume_integrand(k, f)?, rule)
}

/// `f(y, v)`: evaluates `x` at `y` and renames `u` to `v`.
pub fn field_value_at(f: &CliffordPoly, y: &[f64]) -> CliffordPoly {
    f.evaluate(&[(X, y)]).rename_group(U, V)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{build_ball_rule, build_sphere_rule};
    use crate::spaces::{build_monogenic_basis, random_x_field};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_fields_have_zero_flux() {
        let basis = build_monogenic_basis(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = basis.random_element(&mut rng);
        let g = basis.random_element(&mut rng).conjugate();
        let rule = build_sphere_rule(3, 8, &[0.0; 3], 1.0).unwrap();
        let flux = boundary_pairing(&field_as_kernel(&g), &f, &rule).unwrap();
        assert!(flux.max_abs_coeff() < 1e-13);
    }

    #[test]
    fn divergence_form_for_dirac() {
        // ∫_{∂B} (g, n f)_u = ∫_B (g D_x, f)_u + (g, D_x f)_u for any polynomial fields
        let basis = build_monogenic_basis(3, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_x_field(&basis, 2, false, &mut rng);
        let g = random_x_field(&basis, 2, false, &mut rng).conjugate();
        let c = [0.1, -0.2, 0.05];
        let sphere = build_sphere_rule(3, 8, &c, 0.9).unwrap();
        let ball = build_ball_rule(3, 8, &c, 0.9).unwrap();
        let lhs = boundary_pairing(&field_as_kernel(&g), &f, &sphere).unwrap();
        let a = volume_pairing(&field_as_kernel(&g.dirac_right(X)), &f, &ball).unwrap();
        let b = volume_pairing(&field_as_kernel(&g), &f.dirac_left(X), &ball).unwrap();
        let rhs = a.add(&b);
        assert!(lhs.sub(&rhs).max_abs_coeff() < 1e-12 * lhs.max_abs_coeff().max(1.0));
    }
}
