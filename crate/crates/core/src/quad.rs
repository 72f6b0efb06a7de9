//! Product quadrature on spheres and balls in `R^m`.
//!
//! Sphere rules use hyperspherical coordinates: Gauss rules in the cosine of
//! each polar angle (with the Gegenbauer weight coming from the Jacobian) and
//! the trapezoidal rule in the azimuth. A rule of order `q` integrates every
//! polynomial of total degree `≤ q` exactly.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::clifford::Multivector;
use crate::error::{Error, Result};
use crate::poly::CliffordPoly;

pub const SUPPORTED_DIMS: [usize; 3] = [3, 4, 5];

/// Gauss nodes and weights on `[-1, 1]` for the weight `(1 - t^2)^alpha`,
/// from the eigen-decomposition of the Jacobi matrix.
pub fn gauss_gegenbauer(n: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1 && alpha > -1.0);
    let mut jac = DMatrix::zeros(n, n);
    for i in 1..n {
        let k = i as f64;
        let beta = k * (k + 2.0 * alpha)
            / ((2.0 * k + 2.0 * alpha + 1.0) * (2.0 * k + 2.0 * alpha - 1.0));
        let off = beta.sqrt();
        jac[(i, i - 1)] = off;
        jac[(i - 1, i)] = off;
    }
    let mu0 = (0.5 * std::f64::consts::PI.ln() + ln_gamma(alpha + 1.0) - ln_gamma(alpha + 1.5)).exp();
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // Symmetrise: the weight function is even.
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let t = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-t, w);
        pairs[j] = (t, w);
    }
    if n % 2 == 1 {
        pairs[n / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_gegenbauer(n, 0.0)
}

fn check_dim(m: usize) -> Result<()> {
    if SUPPORTED_DIMS.contains(&m) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(m))
    }
}

/// Largest rule that will be materialized.
pub const MAX_NODES: usize = 10_000_000;

fn sphere_node_count(m: usize, order: usize) -> usize {
    (order / 2 + 1).pow(m as u32 - 2) * (order + 1)
}

fn check_size(nodes: usize) -> Result<()> {
    if nodes > MAX_NODES {
        return Err(Error::Parameter(format!(
            "rule would have {nodes} nodes, above the limit of {MAX_NODES}"
        )));
    }
    Ok(())
}

fn check_order(order: usize) -> Result<()> {
    if order < 4 {
        return Err(Error::Parameter(format!("quadrature order {order} is below 4")));
    }
    Ok(())
}

/// Unit-sphere directions and weights for `S^{m-1}`.
fn unit_sphere(m: usize, order: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n_polar = order / 2 + 1;
    let n_az = order + 1;
    // Start from the azimuthal circle and prepend one polar angle at a time.
    let mut dirs: Vec<Vec<f64>> = Vec::with_capacity(n_az);
    let mut weights = Vec::with_capacity(n_az);
    let dphi = 2.0 * std::f64::consts::PI / n_az as f64;
    for i in 0..n_az {
        let phi = (i as f64 + 0.5) * dphi;
        dirs.push(vec![phi.cos(), phi.sin()]);
        weights.push(dphi);
    }
    for level in (1..=m - 2).rev() {
        // θ_level carries sin^{m-1-level}; in t = cos θ the weight is (1-t^2)^{(m-2-level)/2}
        let alpha = (m - 2 - level) as f64 / 2.0;
        let (t, w) = gauss_gegenbauer(n_polar, alpha);
        let mut next_dirs = Vec::with_capacity(dirs.len() * n_polar);
        let mut next_w = Vec::with_capacity(dirs.len() * n_polar);
        for (ti, wi) in t.iter().zip(&w) {
            let s = (1.0 - ti * ti).sqrt();
            for (d, dw) in dirs.iter().zip(&weights) {
                let mut p = Vec::with_capacity(d.len() + 1);
                p.push(*ti);
                p.extend(d.iter().map(|c| c * s));
                next_dirs.push(p);
                next_w.push(wi * dw);
            }
        }
        dirs = next_dirs;
        weights = next_w;
    }
    (dirs, weights)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SphereRule {
    pub m: usize,
    pub order: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// Outward unit normals as grade-1 multivectors.
    pub normals: Vec<Multivector>,
}

impl SphereRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn build_sphere_rule(m: usize, order: usize, center: &[f64], radius: f64) -> Result<SphereRule> {
    check_dim(m)?;
    check_order(order)?;
    if center.len() != m {
        return Err(Error::DimensionMismatch {
            left: m,
            right: center.len(),
        });
    }
    if radius <= 0.0 {
        return Err(Error::Parameter(format!("radius {radius} must be positive")));
    }
    check_size(sphere_node_count(m, order))?;
    let (dirs, w) = unit_sphere(m, order);
    let scale = radius.powi(m as i32 - 1);
    let nodes = dirs
        .iter()
        .map(|d| d.iter().zip(center).map(|(di, ci)| ci + radius * di).collect())
        .collect();
    let normals = dirs.iter().map(|d| Multivector::vector(d)).collect();
    Ok(SphereRule {
        m,
        order,
        center: center.to_vec(),
        radius,
        nodes,
        weights: w.iter().map(|wi| wi * scale).collect(),
        normals,
    })
}

/// Volume rule for the ball `B(center, radius)` written in polar
/// coordinates about `pole` (any interior point). Radial nodes carry the
/// `r^{m-1}` Jacobian, so integrands behaving like `|x - pole|^{1-m}` stay
/// bounded along each ray.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallRule {
    pub m: usize,
    pub order: usize,
    pub center: Vec<f64>,
    pub radius: f64,
    pub pole: Vec<f64>,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl BallRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

pub fn build_ball_rule(m: usize, order: usize, center: &[f64], radius: f64) -> Result<BallRule> {
    build_ball_rule_about(m, order, center, radius, center)
}

pub fn build_ball_rule_about(
    m: usize,
    order: usize,
    center: &[f64],
    radius: f64,
    pole: &[f64],
) -> Result<BallRule> {
    check_dim(m)?;
    check_order(order)?;
    if center.len() != m || pole.len() != m {
        return Err(Error::DimensionMismatch {
            left: m,
            right: center.len().min(pole.len()),
        });
    }
    if radius <= 0.0 {
        return Err(Error::Parameter(format!("radius {radius} must be positive")));
    }
    let offset: Vec<f64> = pole.iter().zip(center).map(|(p, c)| p - c).collect();
    let d2: f64 = offset.iter().map(|d| d * d).sum();
    if d2 >= radius * radius {
        return Err(Error::Parameter("pole must lie inside the ball".into()));
    }
    let n_radial = order / 2 + 1 + m / 2;
    check_size(sphere_node_count(m, order) * n_radial)?;
    let (dirs, dir_w) = unit_sphere(m, order);
    let (t, w) = gauss_legendre(n_radial);
    let mut nodes = Vec::with_capacity(dirs.len() * n_radial);
    let mut weights = Vec::with_capacity(dirs.len() * n_radial);
    for (d, dw) in dirs.iter().zip(&dir_w) {
        let b: f64 = offset.iter().zip(d).map(|(o, di)| o * di).sum();
        let reach = -b + (b * b - d2 + radius * radius).sqrt();
        for (ti, wi) in t.iter().zip(&w) {
            let r = 0.5 * reach * (1.0 + ti);
            nodes.push(pole.iter().zip(d).map(|(p, di)| p + r * di).collect());
            weights.push(dw * 0.5 * reach * wi * r.powi(m as i32 - 1));
        }
    }
    Ok(BallRule {
        m,
        order,
        center: center.to_vec(),
        radius,
        pole: pole.to_vec(),
        nodes,
        weights,
    })
}

/// Values that can be accumulated by a quadrature rule.
pub trait QuadValue: Clone + Send {
    fn axpy(&mut self, w: f64, other: &Self);
    fn scaled(&self, w: f64) -> Self;
    fn all_finite(&self) -> bool;
}

impl QuadValue for f64 {
    fn axpy(&mut self, w: f64, other: &Self) {
        *self += w * other;
    }
    fn scaled(&self, w: f64) -> Self {
        self * w
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Multivector {
    fn axpy(&mut self, w: f64, other: &Self) {
        self.add_scaled(other, w);
    }
    fn scaled(&self, w: f64) -> Self {
        self.scale(w)
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

fn axpy_poly(out: &mut CliffordPoly, w: f64, p: &CliffordPoly) {
    for (e, c) in p.terms() {
        out.add_term_scaled(*e, c, w);
    }
}

impl QuadValue for CliffordPoly {
    fn axpy(&mut self, w: f64, other: &Self) {
        axpy_poly(self, w, other);
    }
    fn scaled(&self, w: f64) -> Self {
        // No pruning here: quadrature weights can be tiny.
        let mut out = CliffordPoly::zero(self.dim());
        axpy_poly(&mut out, w, self);
        out
    }
    fn all_finite(&self) -> bool {
        self.terms().all(|(_, c)| c.is_finite())
    }
}

impl<T: QuadValue> QuadValue for Vec<T> {
    fn axpy(&mut self, w: f64, other: &Self) {
        for (a, b) in self.iter_mut().zip(other) {
            a.axpy(w, b);
        }
    }
    fn scaled(&self, w: f64) -> Self {
        self.iter().map(|v| v.scaled(w)).collect()
    }
    fn all_finite(&self) -> bool {
        self.iter().all(QuadValue::all_finite)
    }
}

fn pairwise_sum<T: QuadValue>(values: &[T]) -> T {
    if values.len() == 1 {
        return values[0].clone();
    }
    let mid = values.len() / 2;
    let mut left = pairwise_sum(&values[..mid]);
    left.axpy(1.0, &pairwise_sum(&values[mid..]));
    left
}

/// Weighted sum in node order; the reduction tree depends only on the
/// number of nodes, so results do not depend on thread scheduling.
fn reduce<T, F>(n: usize, weight: impl Fn(usize) -> f64 + Sync, f: F) -> Result<T>
where
    T: QuadValue,
    F: Fn(usize) -> Result<T> + Sync,
{
    if n == 0 {
        return Err(Error::Parameter("empty quadrature rule".into()));
    }
    let values: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let v = f(i)?;
            if !v.all_finite() {
                return Err(Error::NonFinite(i));
            }
            Ok(v.scaled(weight(i)))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(pairwise_sum(&values))
}

pub struct SurfaceNode<'a> {
    pub index: usize,
    pub point: &'a [f64],
    pub normal: &'a Multivector,
}

/// `∫_{∂B} F(x) dσ(x)`; the integrand receives the outward normal so it can
/// place `dσ_x = n(x) dσ(x)` where the formula requires it.
pub fn integrate_surface<T, F>(rule: &SphereRule, f: F) -> Result<T>
where
    T: QuadValue,
    F: Fn(&SurfaceNode) -> Result<T> + Sync,
{
    reduce(
        rule.len(),
        |i| rule.weights[i],
        |i| {
            f(&SurfaceNode {
                index: i,
                point: &rule.nodes[i],
                normal: &rule.normals[i],
            })
        },
    )
}

pub fn integrate_volume<T, F>(rule: &BallRule, f: F) -> Result<T>
where
    T: QuadValue,
    F: Fn(&[f64]) -> Result<T> + Sync,
{
    reduce(rule.len(), |i| rule.weights[i], |i| f(&rule.nodes[i]))
}
