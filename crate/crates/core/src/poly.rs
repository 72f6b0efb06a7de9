//! Sparse polynomials in three groups of real variables `u`, `x`, `v`
//! (each of length `m`) with Clifford-algebra coefficients.
//!
//! Variables are real scalars and commute with everything; only the
//! coefficients are non-commutative. Products therefore multiply
//! coefficients in order and add exponents.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::clifford::{Multivector, MAX_DIM};
use crate::error::{Error, Result};

/// Coefficients whose largest component falls at or below this value are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VariableGroup {
    U,
    X,
    V,
}

impl VariableGroup {
    pub const ALL: [VariableGroup; 3] = [VariableGroup::U, VariableGroup::X, VariableGroup::V];

    fn offset(self) -> usize {
        match self {
            VariableGroup::U => 0,
            VariableGroup::X => MAX_DIM,
            VariableGroup::V => 2 * MAX_DIM,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VariableGroup::U => "u",
            VariableGroup::X => "x",
            VariableGroup::V => "v",
        }
    }
}

/// Exponent vector over all three variable groups.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Exponents([u8; 3 * MAX_DIM]);

impl Exponents {
    pub const ZERO: Exponents = Exponents([0; 3 * MAX_DIM]);

    pub fn get(&self, group: VariableGroup, i: usize) -> u8 {
        self.0[group.offset() + i]
    }

    pub fn set(&mut self, group: VariableGroup, i: usize, e: u8) {
        self.0[group.offset() + i] = e;
    }

    pub fn with(mut self, group: VariableGroup, i: usize, e: u8) -> Self {
        self.set(group, i, e);
        self
    }

    pub fn from_group(group: VariableGroup, exps: &[u8]) -> Self {
        let mut out = Self::ZERO;
        for (i, &e) in exps.iter().enumerate() {
            out.set(group, i, e);
        }
        out
    }

    pub fn group_slice(&self, group: VariableGroup) -> &[u8] {
        &self.0[group.offset()..group.offset() + MAX_DIM]
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    pub fn degree_in(&self, group: VariableGroup) -> usize {
        self.group_slice(group).iter().map(|&e| e as usize).sum()
    }

    pub fn product(&self, other: &Exponents) -> Exponents {
        let mut out = *self;
        for (a, b) in out.0.iter_mut().zip(other.0.iter()) {
            *a += *b;
        }
        out
    }

    /// Keeps only the exponents of `group`.
    pub fn only(&self, group: VariableGroup) -> Exponents {
        let mut out = Self::ZERO;
        let o = group.offset();
        out.0[o..o + MAX_DIM].copy_from_slice(&self.0[o..o + MAX_DIM]);
        out
    }

    /// Zeroes the exponents of `group`.
    pub fn without(&self, group: VariableGroup) -> Exponents {
        let mut out = *self;
        let o = group.offset();
        out.0[o..o + MAX_DIM].fill(0);
        out
    }
}

// Graded lexicographic order.
impl Ord for Exponents {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Exponents {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Exponents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", monomial_label(self))
    }
}

fn monomial_label(e: &Exponents) -> String {
    let mut parts = Vec::new();
    for g in VariableGroup::ALL {
        for i in 0..MAX_DIM {
            match e.get(g, i) {
                0 => {}
                1 => parts.push(format!("{}{}", g.name(), i + 1)),
                p => parts.push(format!("{}{}^{}", g.name(), i + 1, p)),
            }
        }
    }
    parts.join("*")
}

/// All exponent vectors of total degree `degree` in the first `dim` variables.
pub fn homogeneous_exponents(dim: usize, degree: usize) -> Vec<Vec<u8>> {
    fn rec(dim: usize, left: usize, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if prefix.len() == dim - 1 {
            prefix.push(left as u8);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e as u8);
            rec(dim, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(dim, degree, &mut Vec::with_capacity(dim), &mut out);
    out
}

fn ln_gamma_half(n: usize) -> f64 {
    // lnΓ(n/2) for n ≥ 1
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        (0..256)
            .map(|n| {
                if n == 0 {
                    f64::INFINITY
                } else {
                    statrs::function::gamma::ln_gamma(n as f64 / 2.0)
                }
            })
            .collect()
    });
    table
        .get(n)
        .copied()
        .unwrap_or_else(|| statrs::function::gamma::ln_gamma(n as f64 / 2.0))
}

/// `∫_{S^{m-1}} u^α dS(u)`: zero when some exponent is odd, otherwise
/// `2 Π_i Γ((α_i+1)/2) / Γ((|α|+m)/2)`.
pub fn sphere_moment(dim: usize, alpha: &[u8]) -> f64 {
    let mut log_num = 0.0;
    let mut total = 0usize;
    for &a in &alpha[..dim] {
        if a % 2 == 1 {
            return 0.0;
        }
        log_num += ln_gamma_half(a as usize + 1);
        total += a as usize;
    }
    2.0 * (log_num - ln_gamma_half(total + dim)).exp()
}

pub fn sphere_area(dim: usize) -> f64 {
    sphere_moment(dim, &[0; MAX_DIM])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "PolyRepr", from = "PolyRepr")]
pub struct CliffordPoly {
    dim: usize,
    terms: BTreeMap<Exponents, Multivector>,
}

// JSON maps need string keys, so terms are stored as a list.
#[derive(Clone, Serialize, Deserialize)]
struct PolyRepr {
    dim: usize,
    terms: Vec<(Exponents, Multivector)>,
}

impl From<CliffordPoly> for PolyRepr {
    fn from(p: CliffordPoly) -> Self {
        PolyRepr {
            dim: p.dim,
            terms: p.terms.into_iter().collect(),
        }
    }
}

impl From<PolyRepr> for CliffordPoly {
    fn from(r: PolyRepr) -> Self {
        CliffordPoly {
            dim: r.dim,
            terms: r.terms.into_iter().collect(),
        }
    }
}

impl CliffordPoly {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Multivector) -> Self {
        Self::monomial(Exponents::ZERO, c)
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        Self::constant(Multivector::scalar(dim, value))
    }

    pub fn monomial(exps: Exponents, c: Multivector) -> Self {
        let mut p = Self::zero(c.dim());
        p.add_term(exps, &c);
        p
    }

    /// The scalar coordinate function `g_i`.
    pub fn var(dim: usize, group: VariableGroup, i: usize) -> Self {
        Self::monomial(Exponents::ZERO.with(group, i, 1), Multivector::scalar(dim, 1.0))
    }

    /// The Clifford vector variable `Σ_i e_i g_i`.
    pub fn vector_var(dim: usize, group: VariableGroup) -> Self {
        let mut p = Self::zero(dim);
        for i in 0..dim {
            p.add_term(
                Exponents::ZERO.with(group, i, 1),
                &Multivector::basis_vector(dim, i),
            );
        }
        p
    }

    /// Squared norm `Σ_i g_i^2` as a scalar polynomial.
    pub fn norm_squared(dim: usize, group: VariableGroup) -> Self {
        let mut p = Self::zero(dim);
        for i in 0..dim {
            p.add_term(
                Exponents::ZERO.with(group, i, 2),
                &Multivector::scalar(dim, 1.0),
            );
        }
        p
    }

    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Exponents, Multivector)>) -> Self {
        let mut p = Self::zero(dim);
        for (e, c) in terms {
            p.add_term(e, &c);
        }
        p.prune(PRUNE_THRESHOLD);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &Multivector)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, exps: &Exponents) -> Option<&Multivector> {
        self.terms.get(exps)
    }

    /// Adds `c · monomial(exps)` in place (no pruning).
    pub fn add_term(&mut self, exps: Exponents, c: &Multivector) {
        debug_assert_eq!(c.dim(), self.dim);
        match self.terms.get_mut(&exps) {
            Some(existing) => *existing += c,
            None => {
                self.terms.insert(exps, c.clone());
            }
        }
    }

    pub fn add_term_scaled(&mut self, exps: Exponents, c: &Multivector, s: f64) {
        match self.terms.get_mut(&exps) {
            Some(existing) => existing.add_scaled(c, s),
            None => {
                self.terms.insert(exps, c.scale(s));
            }
        }
    }

    pub fn prune(&mut self, threshold: f64) {
        self.terms.retain(|_, c| c.max_abs() > threshold);
    }

    pub fn pruned(mut self, threshold: f64) -> Self {
        self.prune(threshold);
        self
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |acc, c| acc.max(c.max_abs()))
    }

    pub fn add(&self, other: &CliffordPoly) -> CliffordPoly {
        self.add_scaled(other, 1.0)
    }

    pub fn sub(&self, other: &CliffordPoly) -> CliffordPoly {
        self.add_scaled(other, -1.0)
    }

    /// `self + s * other`
    pub fn add_scaled(&self, other: &CliffordPoly, s: f64) -> CliffordPoly {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term_scaled(*e, c, s);
        }
        out.pruned(PRUNE_THRESHOLD)
    }

    pub fn neg(&self) -> CliffordPoly {
        self.scale(-1.0)
    }

    pub fn scale(&self, s: f64) -> CliffordPoly {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            out.terms.insert(*e, c.scale(s));
        }
        out.pruned(PRUNE_THRESHOLD)
    }

    pub fn mul(&self, other: &CliffordPoly) -> CliffordPoly {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.product(eb);
                let slot = out
                    .terms
                    .entry(e)
                    .or_insert_with(|| Multivector::zero(self.dim));
                slot.add_product(ca, cb, 1.0);
            }
        }
        out.pruned(PRUNE_THRESHOLD)
    }

    /// `c · p` with the constant on the left.
    pub fn left_mul(&self, c: &Multivector) -> CliffordPoly {
        self.map_coeffs(|a| c * a)
    }

    /// `p · c` with the constant on the right.
    pub fn right_mul(&self, c: &Multivector) -> CliffordPoly {
        self.map_coeffs(|a| a * c)
    }

    pub fn map_coeffs(&self, f: impl Fn(&Multivector) -> Multivector) -> CliffordPoly {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            out.terms.insert(*e, f(c));
        }
        out.pruned(PRUNE_THRESHOLD)
    }

    /// Clifford conjugation applied coefficient-wise (variables are real).
    pub fn conjugate(&self) -> CliffordPoly {
        self.map_coeffs(Multivector::conjugate)
    }

    pub fn reversion(&self) -> CliffordPoly {
        self.map_coeffs(Multivector::reversion)
    }

    pub fn partial(&self, group: VariableGroup, i: usize) -> CliffordPoly {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let p = e.get(group, i);
            if p == 0 {
                continue;
            }
            out.add_term_scaled(e.with(group, i, p - 1), c, p as f64);
        }
        out.pruned(PRUNE_THRESHOLD)
    }

    /// `Σ_i e_i ∂p/∂g_i`
    pub fn dirac_left(&self, group: VariableGroup) -> CliffordPoly {
        self.dirac(group, true)
    }

    /// `Σ_i ∂p/∂g_i e_i`
    pub fn dirac_right(&self, group: VariableGroup) -> CliffordPoly {
        self.dirac(group, false)
    }

    fn dirac(&self, group: VariableGroup, left: bool) -> CliffordPoly {
        let dim = self.dim;
        let mut out = Self::zero(dim);
        for (e, c) in &self.terms {
            for i in 0..dim {
                let p = e.get(group, i);
                if p == 0 {
                    continue;
                }
                let slot = out
                    .terms
                    .entry(e.with(group, i, p - 1))
                    .or_insert_with(|| Multivector::zero(dim));
                let ei = Multivector::basis_vector(dim, i);
                if left {
                    slot.add_product(&ei, c, p as f64);
                } else {
                    slot.add_product(c, &ei, p as f64);
                }
            }
        }
        out.pruned(PRUNE_THRESHOLD)
    }

    pub fn laplacian(&self, group: VariableGroup) -> CliffordPoly {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            for i in 0..self.dim {
                let p = e.get(group, i);
                if p < 2 {
                    continue;
                }
                out.add_term_scaled(e.with(group, i, p - 2), c, (p as f64) * (p as f64 - 1.0));
            }
        }
        out.pruned(PRUNE_THRESHOLD)
    }

    /// Euler operator `Σ_i g_i ∂/∂g_i`.
    pub fn euler_degree(&self, group: VariableGroup) -> CliffordPoly {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let d = e.degree_in(group);
            if d > 0 {
                out.terms.insert(*e, c.scale(d as f64));
            }
        }
        out
    }

    pub fn depends_on(&self, group: VariableGroup) -> bool {
        self.terms.keys().any(|e| e.degree_in(group) > 0)
    }

    pub fn max_degree_in(&self, group: VariableGroup) -> usize {
        self.terms.keys().map(|e| e.degree_in(group)).max().unwrap_or(0)
    }

    pub fn is_homogeneous_in(&self, group: VariableGroup, degree: usize) -> bool {
        self.terms.keys().all(|e| e.degree_in(group) == degree)
    }

    /// Substitutes numeric values for the assigned groups.
    pub fn evaluate(&self, assignment: &[(VariableGroup, &[f64])]) -> CliffordPoly {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let mut rest = *e;
            let mut factor = 1.0;
            for (group, point) in assignment {
                for (i, &xi) in point.iter().enumerate().take(self.dim) {
                    let p = e.get(*group, i);
                    if p > 0 {
                        factor *= xi.powi(p as i32);
                    }
                }
                rest = rest.without(*group);
            }
            if factor != 0.0 {
                out.add_term_scaled(rest, c, factor);
            }
        }
        out.pruned(PRUNE_THRESHOLD)
    }

    /// Value of a polynomial with no remaining variables.
    pub fn constant_value(&self) -> Multivector {
        let mut out = Multivector::zero(self.dim);
        for (e, c) in &self.terms {
            debug_assert_eq!(e.degree(), 0, "polynomial is not constant");
            if e.degree() == 0 {
                out += c;
            }
        }
        out
    }

    pub fn rename_group(&self, from: VariableGroup, to: VariableGroup) -> CliffordPoly {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let mut moved = e.without(from);
            for i in 0..MAX_DIM {
                let p = e.get(from, i);
                if p > 0 {
                    moved.set(to, i, moved.get(to, i) + p);
                }
            }
            out.add_term(moved, c);
        }
        out.pruned(PRUNE_THRESHOLD)
    }

    /// Replaces each variable `g_i` of `group` by the scalar-valued
    /// polynomial `replacement[i]`.
    pub fn substitute(&self, group: VariableGroup, replacement: &[CliffordPoly]) -> Result<CliffordPoly> {
        if replacement.len() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: replacement.len(),
            });
        }
        for r in replacement {
            let non_scalar = r
                .terms
                .values()
                .map(|c| c.coeffs()[1..].iter().fold(0.0f64, |a, b| a.max(b.abs())))
                .fold(0.0, f64::max);
            if non_scalar > 0.0 {
                return Err(Error::Parameter(
                    "substituted expressions must be scalar-valued".into(),
                ));
            }
        }
        let mut powers: Vec<Vec<CliffordPoly>> = replacement
            .iter()
            .map(|r| vec![CliffordPoly::scalar(self.dim, 1.0), r.clone()])
            .collect();
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let mut acc = CliffordPoly::monomial(e.without(group), c.clone());
            for i in 0..self.dim {
                let p = e.get(group, i) as usize;
                if p == 0 {
                    continue;
                }
                while powers[i].len() <= p {
                    let next = powers[i].last().unwrap().mul(&replacement[i]);
                    powers[i].push(next);
                }
                acc = acc.mul(&powers[i][p]);
            }
            for (ae, ac) in acc.terms {
                out.add_term(ae, &ac);
            }
        }
        Ok(out.pruned(PRUNE_THRESHOLD))
    }

    /// `∫_{S^{m-1}} p(u) dS(u)` computed from closed-form monomial moments.
    pub fn sphere_moment_integral(&self) -> Result<Multivector> {
        for g in [VariableGroup::X, VariableGroup::V] {
            if self.depends_on(g) {
                return Err(Error::GroupNotAllowed(g));
            }
        }
        let mut out = Multivector::zero(self.dim);
        for (e, c) in &self.terms {
            let w = sphere_moment(self.dim, e.group_slice(VariableGroup::U));
            if w != 0.0 {
                out.add_scaled(c, w);
            }
        }
        Ok(out)
    }

    /// Integrates out `u` over the unit sphere, keeping `x` and `v`.
    pub fn integrate_sphere_u(&self) -> CliffordPoly {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let w = sphere_moment(self.dim, e.group_slice(VariableGroup::U));
            if w != 0.0 {
                out.add_term_scaled(e.without(VariableGroup::U), c, w);
            }
        }
        out.pruned(PRUNE_THRESHOLD)
    }

    /// Splits the polynomial by its exponents in `group`, keeping the
    /// remaining variables.
    pub fn collect_by(&self, group: VariableGroup) -> BTreeMap<Exponents, CliffordPoly> {
        let mut out: BTreeMap<Exponents, CliffordPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            out.entry(e.only(group))
                .or_insert_with(|| CliffordPoly::zero(self.dim))
                .add_term(e.without(group), c);
        }
        out
    }
}

/// `(P, Q)_u = ∫_{S^{m-1}} P(u) Q(u) dS(u)` with no conjugation.
pub fn pairing_u(p: &CliffordPoly, q: &CliffordPoly) -> Result<Multivector> {
    if p.dim != q.dim {
        return Err(Error::DimensionMismatch {
            left: p.dim,
            right: q.dim,
        });
    }
    for g in [VariableGroup::X, VariableGroup::V] {
        if p.depends_on(g) {
            return Err(Error::GroupNotAllowed(g));
        }
        if q.depends_on(g) {
            return Err(Error::GroupNotAllowed(g));
        }
    }
    Ok(pairing_u_unchecked(p, q))
}

/// Pairing without the group checks; `p` and `q` must depend on `u` only.
pub fn pairing_u_unchecked(p: &CliffordPoly, q: &CliffordPoly) -> Multivector {
    let dim = p.dim;
    let mut out = Multivector::zero(dim);
    for (ea, ca) in &p.terms {
        for (eb, cb) in &q.terms {
            let e = ea.product(eb);
            let w = sphere_moment(dim, e.group_slice(VariableGroup::U));
            if w != 0.0 {
                out.add_product(ca, cb, w);
            }
        }
    }
    out
}

/// `(P, Q)_u` keeping every variable other than `u`: integrates `u` out of
/// the product `P Q` without forming the full product.
pub fn pairing_u_partial(p: &CliffordPoly, q: &CliffordPoly) -> CliffordPoly {
    assert_eq!(p.dim, q.dim);
    let dim = p.dim;
    let left = p.collect_by(VariableGroup::U);
    let right = q.collect_by(VariableGroup::U);
    let mut out: BTreeMap<Exponents, Multivector> = BTreeMap::new();
    for (ea, pa) in &left {
        for (eb, qb) in &right {
            let w = sphere_moment(dim, ea.product(eb).group_slice(VariableGroup::U));
            if w == 0.0 {
                continue;
            }
            for (ta, ca) in &pa.terms {
                for (tb, cb) in &qb.terms {
                    out.entry(ta.product(tb))
                        .or_insert_with(|| Multivector::zero(dim))
                        .add_product(ca, cb, w);
                }
            }
        }
    }
    CliffordPoly::from_terms(dim, out)
}

/// The reproducing-kernel pairing `∫ \bar{P}(u) Q(u) dS(u)`.
pub fn conjugate_pairing_u(p: &CliffordPoly, q: &CliffordPoly) -> Result<Multivector> {
    pairing_u(&p.conjugate(), q)
}

/// A polynomial prepared for repeated numeric evaluation of one variable
/// group, leaving a polynomial in the others.
#[derive(Clone, Debug)]
pub struct CompiledPoly {
    dim: usize,
    group: VariableGroup,
    rest: Vec<Exponents>,
    blocks: Vec<Vec<([u8; MAX_DIM], Multivector)>>,
    max_power: usize,
}

impl CompiledPoly {
    pub fn new(p: &CliffordPoly, group: VariableGroup) -> Self {
        let mut grouped: BTreeMap<Exponents, Vec<([u8; MAX_DIM], Multivector)>> = BTreeMap::new();
        let mut max_power = 0;
        for (e, c) in &p.terms {
            let mut key = [0u8; MAX_DIM];
            key.copy_from_slice(e.group_slice(group));
            max_power = max_power.max(key.iter().copied().max().unwrap_or(0) as usize);
            grouped
                .entry(e.without(group))
                .or_default()
                .push((key, c.clone()));
        }
        let (rest, blocks) = grouped.into_iter().unzip();
        Self {
            dim: p.dim,
            group,
            rest,
            blocks,
            max_power,
        }
    }

    pub fn group(&self) -> VariableGroup {
        self.group
    }

    /// Evaluates at `point`, scaling every coefficient by `scale`, and adds
    /// the result into `acc`.
    pub fn eval_into(&self, point: &[f64], scale: f64, acc: &mut BTreeMap<Exponents, Multivector>) {
        let dim = self.dim;
        let mut pows = vec![[1.0f64; 16]; dim];
        for (i, pw) in pows.iter_mut().enumerate() {
            for p in 1..=self.max_power.min(15) {
                pw[p] = pw[p - 1] * point[i];
            }
        }
        for (rest, block) in self.rest.iter().zip(&self.blocks) {
            let slot = acc
                .entry(*rest)
                .or_insert_with(|| Multivector::zero(dim));
            for (key, c) in block {
                let mut w = scale;
                for i in 0..dim {
                    let k = key[i] as usize;
                    if k > 0 {
                        w *= if k < 16 { pows[i][k] } else { point[i].powi(k as i32) };
                    }
                }
                slot.add_scaled(c, w);
            }
        }
    }

    pub fn eval(&self, point: &[f64]) -> CliffordPoly {
        let mut acc = BTreeMap::new();
        self.eval_into(point, 1.0, &mut acc);
        CliffordPoly::from_terms(self.dim, acc)
    }
}

impl fmt::Display for CliffordPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            let label = monomial_label(e);
            if label.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c}) {label}")?;
            }
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use VariableGroup::*;

    fn u(dim: usize) -> CliffordPoly {
        CliffordPoly::vector_var(dim, U)
    }

    #[test]
    fn dirac_of_vector_variable() {
        assert_eq!(u(3).dirac_left(U), CliffordPoly::scalar(3, -3.0));
        assert_eq!(u(3).dirac_right(U), CliffordPoly::scalar(3, -3.0));
    }

    #[test]
    fn fueter_variable_is_monogenic() {
        // u1 - u2 e1e2
        let p = CliffordPoly::var(3, U, 0).sub(
            &CliffordPoly::var(3, U, 1).right_mul(&Multivector::blade(3, 0b011, 1.0)),
        );
        assert!(p.dirac_left(U).is_zero());
    }

    #[test]
    fn constants_are_killed() {
        let c = CliffordPoly::constant(Multivector::blade(3, 0b101, 2.0));
        assert!(c.dirac_left(U).is_zero());
        assert!(c.dirac_right(X).is_zero());
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(
            CliffordPoly::norm_squared(3, U).laplacian(U),
            CliffordPoly::scalar(3, 6.0)
        );
        let p = CliffordPoly::var(3, U, 0).mul(&CliffordPoly::var(3, U, 1));
        assert!(p.laplacian(U).is_zero());
    }

    #[test]
    fn euler_examples() {
        let p = CliffordPoly::monomial(
            Exponents::from_group(U, &[2, 1, 0]),
            Multivector::scalar(3, 1.0),
        );
        assert_eq!(p.euler_degree(U), p.scale(3.0));
        assert!(CliffordPoly::scalar(3, 4.0).euler_degree(U).is_zero());
    }

    #[test]
    fn sphere_moments() {
        let one = CliffordPoly::scalar(3, 1.0);
        let v = one.sphere_moment_integral().unwrap().scalar_part();
        assert!((v - 4.0 * PI).abs() < 1e-13);
        let u1sq = CliffordPoly::monomial(
            Exponents::from_group(U, &[2, 0, 0]),
            Multivector::scalar(3, 1.0),
        );
        let v = u1sq.sphere_moment_integral().unwrap().scalar_part();
        assert!((v - 4.0 * PI / 3.0).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }

    #[test]
    fn moment_rejects_other_groups() {
        let p = CliffordPoly::var(3, X, 0);
        assert_eq!(
            p.sphere_moment_integral(),
            Err(Error::GroupNotAllowed(X))
        );
    }

    #[test]
    fn pairing_examples() {
        let one = CliffordPoly::scalar(3, 1.0);
        let v = pairing_u(&one, &one).unwrap();
        assert!((v.scalar_part() - 4.0 * PI).abs() < 1e-13);
        let p = pairing_u(&CliffordPoly::var(3, U, 0), &CliffordPoly::var(3, U, 1)).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn evaluate_examples() {
        let p = CliffordPoly::var(3, U, 0).left_mul(&Multivector::basis_vector(3, 0));
        let got = p.evaluate(&[(U, &[1.0, 0.0, 0.0])]);
        assert_eq!(got, CliffordPoly::constant(Multivector::basis_vector(3, 0)));
        assert_eq!(p.evaluate(&[]), p);
    }

    #[test]
    fn rename_moves_exponents() {
        let p = CliffordPoly::var(3, U, 2);
        assert_eq!(p.rename_group(U, V), CliffordPoly::var(3, V, 2));
    }

    #[test]
    fn substitution_of_scalar_polys() {
        // u1 -> x1 + x2, u2 -> x1*x2, u3 -> 1, applied to u1*u2 e1
        let p = CliffordPoly::var(3, U, 0)
            .mul(&CliffordPoly::var(3, U, 1))
            .left_mul(&Multivector::basis_vector(3, 0));
        let r = vec![
            CliffordPoly::var(3, X, 0).add(&CliffordPoly::var(3, X, 1)),
            CliffordPoly::var(3, X, 0).mul(&CliffordPoly::var(3, X, 1)),
            CliffordPoly::scalar(3, 1.0),
        ];
        let got = p.substitute(U, &r).unwrap();
        let expected = r[0].mul(&r[1]).left_mul(&Multivector::basis_vector(3, 0));
        assert_eq!(got, expected);
        let bad = vec![CliffordPoly::vector_var(3, X); 3];
        assert!(p.substitute(U, &bad).is_err());
    }

    #[test]
    fn compiled_evaluation_matches_direct() {
        let p = CliffordPoly::vector_var(3, X)
            .mul(&CliffordPoly::vector_var(3, U))
            .mul(&CliffordPoly::vector_var(3, X))
            .mul(&CliffordPoly::norm_squared(3, X));
        let x = [0.3, -0.7, 1.1];
        let direct = p.evaluate(&[(X, &x)]);
        let compiled = CompiledPoly::new(&p, X).eval(&x);
        assert!(direct.sub(&compiled).max_abs_coeff() < 1e-13);
    }

    #[test]
    fn exponent_enumeration_counts() {
        assert_eq!(homogeneous_exponents(3, 2).len(), 6);
        assert_eq!(homogeneous_exponents(4, 3).len(), 20);
        assert_eq!(homogeneous_exponents(3, 0), vec![vec![0, 0, 0]]);
    }
}
