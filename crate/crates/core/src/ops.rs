//! Rarita-Schwinger type operators and the odd order fermionic operators
//! built from them.
//!
//! Every operator is `P_k^± D_x`, acting either from the left on fields
//! `f(x, u)` or from the right on fields placed on the left of a pairing.
//! The [`SpinField`] trait abstracts over polynomial fields and rational
//! kernels so both share one implementation.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{CliffordPoly, VariableGroup};
use crate::spaces::{self, check_mk, check_u_mk};

use VariableGroup::X;

/// A Clifford-valued function of `x` whose `u`-dependence is polynomial.
pub trait SpinField: Clone {
    fn dirac_x_left(&self) -> Self;
    fn dirac_x_right(&self) -> Self;
    /// Applies a linear map that only acts on the `u`-dependence.
    fn map_u<F: Fn(&CliffordPoly) -> CliffordPoly>(&self, f: F) -> Self;
    fn add_scaled(&self, other: &Self, s: f64) -> Self;
    fn scale(&self, s: f64) -> Self;
}

impl SpinField for CliffordPoly {
    fn dirac_x_left(&self) -> Self {
        self.dirac_left(X)
    }

    fn dirac_x_right(&self) -> Self {
        self.dirac_right(X)
    }

    fn map_u<F: Fn(&CliffordPoly) -> CliffordPoly>(&self, f: F) -> Self {
        f(self)
    }

    fn add_scaled(&self, other: &Self, s: f64) -> Self {
        CliffordPoly::add_scaled(self, other, s)
    }

    fn scale(&self, s: f64) -> Self {
        CliffordPoly::scale(self, s)
    }
}

/// `a_s = -4 s^2 / ((m + 2k - 2s - 2)(m + 2k + 2s - 2))`.
pub fn coeff_a(m: usize, k: usize, s: usize) -> Result<Ratio<i64>> {
    let (m, k, s) = (m as i64, k as i64, s as i64);
    let lower = m + 2 * k - 2 * s - 2;
    let upper = m + 2 * k + 2 * s - 2;
    if lower <= 0 {
        return Err(Error::Parameter(format!(
            "m + 2k - 2s - 2 = {lower} must be positive (m = {m}, k = {k}, s = {s})"
        )));
    }
    if upper == 0 {
        return Err(Error::Parameter(format!(
            "m + 2k + 2s - 2 vanishes (m = {m}, k = {k}, s = {s})"
        )));
    }
    Ok(Ratio::new(-4 * s * s, lower * upper))
}

pub fn coeff_b(_m: usize, _k: usize, _s: usize) -> Ratio<i64> {
    Ratio::from_integer(1)
}

fn ratio_to_f64(r: &Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `D_{2j-1} = R_k Π_{s=1}^{j-1} (a_s T_k T_k^* + b_s R_k^2)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FermionicOperatorSpec {
    pub m: usize,
    pub k: usize,
    pub j: usize,
    pub a: Vec<Ratio<i64>>,
    pub b: Vec<Ratio<i64>>,
}

impl FermionicOperatorSpec {
    pub fn new(m: usize, k: usize, j: usize) -> Result<Self> {
        if j == 0 {
            return Err(Error::Parameter("the order index j starts at 1".into()));
        }
        if m < 3 {
            return Err(Error::UnsupportedDimension(m));
        }
        let a = (1..j).map(|s| coeff_a(m, k, s)).collect::<Result<Vec<_>>>()?;
        let b = (1..j).map(|s| coeff_b(m, k, s)).collect();
        Ok(Self { m, k, j, a, b })
    }

    pub fn order(&self) -> usize {
        2 * self.j - 1
    }

    /// `a_s` as a float, `s` one-based.
    pub fn a(&self, s: usize) -> f64 {
        ratio_to_f64(&self.a[s - 1])
    }

    pub fn b(&self, s: usize) -> f64 {
        ratio_to_f64(&self.b[s - 1])
    }
}

/// The four Rarita-Schwinger type operators for fixed `(m, k)`.
#[derive(Clone, Copy, Debug)]
pub struct RsOperators {
    pub m: usize,
    pub k: usize,
}

impl RsOperators {
    pub fn new(m: usize, k: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::UnsupportedDimension(m));
        }
        Ok(Self { m, k })
    }

    fn plus<F: SpinField>(&self, h: &F) -> F {
        h.map_u(|p| spaces::proj_plus(p, self.m, self.k).expect("m >= 3"))
    }

    fn minus<F: SpinField>(&self, h: &F) -> F {
        h.map_u(|p| spaces::proj_minus(p, self.m, self.k).expect("m >= 3"))
    }

    fn plus_right<F: SpinField>(&self, h: &F) -> F {
        h.map_u(|p| spaces::proj_plus_right(p, self.m, self.k).expect("m >= 3"))
    }

    fn minus_right<F: SpinField>(&self, h: &F) -> F {
        h.map_u(|p| spaces::proj_minus_right(p, self.m, self.k).expect("m >= 3"))
    }

    /// `R_k f = P_k^+ D_x f` on `M_k`-valued fields.
    pub fn rk<F: SpinField>(&self, f: &F) -> F {
        self.plus(&f.dirac_x_left())
    }

    /// `T_k g = P_k^+ D_x g` on `u M_{k-1}`-valued fields.
    pub fn tk<F: SpinField>(&self, g: &F) -> F {
        self.plus(&g.dirac_x_left())
    }

    /// `T_k^* f = P_k^- D_x f` on `M_k`-valued fields.
    pub fn tk_star<F: SpinField>(&self, f: &F) -> F {
        self.minus(&f.dirac_x_left())
    }

    /// `Q_k g = P_k^- D_x g` on `u M_{k-1}`-valued fields.
    pub fn qk<F: SpinField>(&self, g: &F) -> F {
        self.minus(&g.dirac_x_left())
    }

    /// Right action `g R_k`: right `P_k^+` of `g D_x`.
    pub fn rk_right<F: SpinField>(&self, g: &F) -> F {
        self.plus_right(&g.dirac_x_right())
    }

    pub fn tk_right<F: SpinField>(&self, g: &F) -> F {
        self.plus_right(&g.dirac_x_right())
    }

    pub fn tk_star_right<F: SpinField>(&self, g: &F) -> F {
        self.minus_right(&g.dirac_x_right())
    }

    pub fn qk_right<F: SpinField>(&self, g: &F) -> F {
        self.minus_right(&g.dirac_x_right())
    }

    /// `(a T_k T_k^* + b R_k^2) f`
    pub fn factor<F: SpinField>(&self, a: f64, b: f64, f: &F) -> F {
        let tt = self.tk(&self.tk_star(f));
        let rr = self.rk(&self.rk(f));
        tt.scale(a).add_scaled(&rr, b)
    }

    /// Right action `g (a T_k^* T_k + b R_k^2)`, i.e. `T_k^*` is applied first.
    pub fn factor_right<F: SpinField>(&self, a: f64, b: f64, g: &F) -> F {
        let tt = self.tk_right(&self.tk_star_right(g));
        let rr = self.rk_right(&self.rk_right(g));
        tt.scale(a).add_scaled(&rr, b)
    }
}

pub(crate) fn rarita_schwinger_unchecked(f: &CliffordPoly, m: usize, k: usize) -> CliffordPoly {
    RsOperators { m, k }.rk(f)
}

pub fn apply_rk(f: &CliffordPoly, m: usize, k: usize) -> Result<CliffordPoly> {
    check_mk(f, k)?;
    Ok(RsOperators::new(m, k)?.rk(f))
}

pub fn apply_tk(g: &CliffordPoly, m: usize, k: usize) -> Result<CliffordPoly> {
    check_u_mk(g, m, k)?;
    Ok(RsOperators::new(m, k)?.tk(g))
}

pub fn apply_tk_star(f: &CliffordPoly, m: usize, k: usize) -> Result<CliffordPoly> {
    check_mk(f, k)?;
    Ok(RsOperators::new(m, k)?.tk_star(f))
}

pub fn apply_qk(g: &CliffordPoly, m: usize, k: usize) -> Result<CliffordPoly> {
    check_u_mk(g, m, k)?;
    Ok(RsOperators::new(m, k)?.qk(g))
}

pub fn apply_right_rk<F: SpinField>(g: &F, m: usize, k: usize) -> Result<F> {
    Ok(RsOperators::new(m, k)?.rk_right(g))
}

pub fn apply_right_tk_star<F: SpinField>(g: &F, m: usize, k: usize) -> Result<F> {
    Ok(RsOperators::new(m, k)?.tk_star_right(g))
}

/// `D_{2j-1} f`; the rightmost factor `s = j-1` acts first and `R_k` last.
pub fn apply_fermionic(spec: &FermionicOperatorSpec, f: &CliffordPoly) -> Result<CliffordPoly> {
    check_mk(f, spec.k)?;
    let ops = RsOperators::new(spec.m, spec.k)?;
    let mut g = f.clone();
    for s in (1..spec.j).rev() {
        g = ops.factor(spec.a(s), spec.b(s), &g);
    }
    Ok(ops.rk(&g))
}

/// `[D_1 f, D_3 f, ..., D_{2j-1} f]` computed through the prefix recursion
/// `D_{2t-1} = (a_{t-1} T_k T_k^* + b_{t-1} R_k^2) D_{2t-3}`.
pub fn fermionic_chain(spec: &FermionicOperatorSpec, f: &CliffordPoly) -> Result<Vec<CliffordPoly>> {
    check_mk(f, spec.k)?;
    let ops = RsOperators::new(spec.m, spec.k)?;
    let mut chain = vec![ops.rk(f)];
    for t in 2..=spec.j {
        let prev = chain.last().unwrap();
        chain.push(ops.factor(spec.a(t - 1), spec.b(t - 1), prev));
    }
    Ok(chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use VariableGroup::U;
    use crate::clifford::Multivector;
    use crate::poly::Exponents;
    use crate::spaces::{build_monogenic_basis, random_u_field, random_x_field};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coefficient_values() {
        assert_eq!(coeff_a(3, 1, 1).unwrap(), Ratio::new(-4, 5));
        assert_eq!(coeff_a(5, 0, 1).unwrap(), Ratio::new(-4, 5));
        assert_eq!(coeff_a(3, 2, 2).unwrap(), Ratio::new(-16, 9));
        let err = coeff_a(3, 0, 1).unwrap_err();
        assert!(err.to_string().contains("m + 2k - 2s - 2 = -1"));
    }

    #[test]
    fn spec_validation() {
        assert!(FermionicOperatorSpec::new(3, 1, 2).is_ok());
        assert!(FermionicOperatorSpec::new(3, 1, 3).is_err());
        assert!(FermionicOperatorSpec::new(3, 2, 3).is_ok());
        assert!(FermionicOperatorSpec::new(3, 1, 0).is_err());
    }

    #[test]
    fn constant_fields_are_annihilated() {
        let (m, k) = (3, 1);
        let mk = build_monogenic_basis(m, k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = mk.random_element(&mut rng);
        assert!(apply_rk(&f, m, k).unwrap().is_zero());
        assert!(apply_tk_star(&f, m, k).unwrap().is_zero());
    }

    #[test]
    fn rk_on_linear_field_matches_hand_expansion() {
        let (m, k) = (3, 1);
        let mk = build_monogenic_basis(m, k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = mk.random_element(&mut rng);
        let f = CliffordPoly::var(m, X, 0).mul(&g);
        let expected = spaces::proj_plus(&g.left_mul(&Multivector::basis_vector(m, 0)), m, k).unwrap();
        assert!(apply_rk(&f, m, k).unwrap().sub(&expected).max_abs_coeff() < 1e-13);
    }

    #[test]
    fn codomains() {
        let (m, k) = (3, 2);
        let mk = build_monogenic_basis(m, k).unwrap();
        let mk1 = build_monogenic_basis(m, k - 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_x_field(&mk, 2, false, &mut rng);
        let g = random_u_field(&mk1, 2, &mut rng);
        let r = apply_rk(&f, m, k).unwrap();
        assert!(r.dirac_left(U).max_abs_coeff() < 1e-10);
        let q = apply_qk(&g, m, k).unwrap();
        assert!(spaces::proj_minus(&q, m, k).unwrap().sub(&q).max_abs_coeff() < 1e-10);
        let t = apply_tk(&g, m, k).unwrap();
        assert!(t.dirac_left(U).max_abs_coeff() < 1e-10);
        let ts = apply_tk_star(&f, m, k).unwrap();
        assert!(check_u_mk(&ts, m, k).is_ok());
    }

    #[test]
    fn domain_violations_are_rejected() {
        let (m, k) = (3, 1);
        let h = CliffordPoly::var(m, U, 0);
        assert!(matches!(apply_rk(&h, m, k), Err(Error::NotInSpace { .. })));
        let mk = build_monogenic_basis(m, k).unwrap();
        let f = mk.elements[0].clone();
        assert!(matches!(apply_tk(&f, m, k), Err(Error::NotInSpace { .. })));
    }

    #[test]
    fn twistor_composition_step_by_step() {
        let (m, k) = (3, 1);
        let mk = build_monogenic_basis(m, k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = mk.random_element(&mut rng);
        let f = CliffordPoly::var(m, X, 0).mul(&CliffordPoly::var(m, X, 1)).mul(&g);
        let step = apply_tk_star(&f, m, k).unwrap();
        let composed = apply_tk(&step, m, k).unwrap();
        let ops = RsOperators::new(m, k).unwrap();
        let direct = ops.tk(&ops.tk_star(&f));
        assert!(composed.sub(&direct).max_abs_coeff() < 1e-14);
        // T_k^* f by hand: P^-(e1 x2 g + e2 x1 g)
        let by_hand = spaces::proj_minus(
            &CliffordPoly::var(m, X, 1)
                .mul(&g.left_mul(&Multivector::basis_vector(m, 0)))
                .add(&CliffordPoly::var(m, X, 0).mul(&g.left_mul(&Multivector::basis_vector(m, 1)))),
            m,
            k,
        )
        .unwrap();
        assert!(step.sub(&by_hand).max_abs_coeff() < 1e-13);
    }

    #[test]
    fn fermionic_first_order_is_rk() {
        let (m, k) = (3, 1);
        let mk = build_monogenic_basis(m, k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = random_x_field(&mk, 2, false, &mut rng);
        let spec = FermionicOperatorSpec::new(m, k, 1).unwrap();
        assert_eq!(apply_fermionic(&spec, &f).unwrap(), apply_rk(&f, m, k).unwrap());
    }

    #[test]
    fn third_order_factor_by_factor() {
        let (m, k) = (3, 1);
        let mk = build_monogenic_basis(m, k).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let f = random_x_field(&mk, 3, true, &mut rng);
        let spec = FermionicOperatorSpec::new(m, k, 2).unwrap();
        let ops = RsOperators::new(m, k).unwrap();
        let a1 = -0.8;
        let inner = ops.tk(&ops.tk_star(&f)).scale(a1).add(&ops.rk(&ops.rk(&f)));
        let expected = ops.rk(&inner);
        let got = apply_fermionic(&spec, &f).unwrap();
        assert!(got.sub(&expected).max_abs_coeff() < 1e-12);
        assert!(got.max_abs_coeff() > 1e-3);
        let chain = fermionic_chain(&spec, &f).unwrap();
        assert!(chain[1].sub(&got).max_abs_coeff() < 1e-10);
    }

    #[test]
    fn right_actions_on_constants_vanish() {
        let (m, k) = (3, 1);
        let g = CliffordPoly::monomial(Exponents::ZERO, Multivector::blade(m, 0b110, 1.0));
        assert!(apply_right_rk(&g, m, k).unwrap().is_zero());
        assert!(apply_right_tk_star(&g, m, k).unwrap().is_zero());
    }

    #[test]
    fn rk_commutes_with_the_second_order_factor() {
        for (m, k) in [(3, 1), (3, 2), (4, 1)] {
            let mk = build_monogenic_basis(m, k).unwrap();
            let ops = RsOperators::new(m, k).unwrap();
            let spec = FermionicOperatorSpec::new(m, k, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(8);
            for _ in 0..5 {
                let f = random_x_field(&mk, 3, false, &mut rng);
                let lhs = ops.rk(&ops.factor(spec.a(1), spec.b(1), &f));
                let rhs = ops.factor(spec.a(1), spec.b(1), &ops.rk(&f));
                assert!(lhs.sub(&rhs).max_abs_coeff() < 1e-10, "m={m} k={k}");
                assert!(lhs.max_abs_coeff() > 1e-3);
            }
        }
    }
}
