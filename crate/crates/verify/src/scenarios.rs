//! One function per verified identity. Every scenario reduces the identity to
//! a difference of polynomials in `v` and reports its largest coefficient.

use std::sync::Arc;
use std::time::Instant;

use fermionic_core::integrals::{
    boundary_integrand, field_as_kernel, field_value_at, integrate_ball, integrate_boundary,
    volume_integrand,
};
use fermionic_core::kernel::{
    cauchy_lambda_estimate, ladder_check, ladder_points, CompiledKernel, KernelFamily, LambdaEntry,
    RationalKernel, LADDER_POINTS,
};
use fermionic_core::ops::{fermionic_chain, FermionicOperatorSpec, RsOperators};
use fermionic_core::quad::{build_ball_rule, build_ball_rule_about, build_sphere_rule};
use fermionic_core::spaces::{
    build_harmonic_basis, harmonic_dimension, monogenic_dimension, monogenic_residual, proj_minus,
    proj_plus, random_u_field, random_x_field,
};
use fermionic_core::CliffordPoly;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{FieldKind, Scenario, ScenarioConfig};
use crate::error::Result;
use crate::report::{Measure, Outcome, ResidualEntry, VerificationReport};
use crate::workspace::Workspace;

pub const SMALL_BALL_RADII: [f64; 3] = [0.1, 0.05, 0.025];

pub fn run(cfg: &ScenarioConfig, ws: &Workspace) -> Result<VerificationReport> {
    cfg.validate()?;
    let start = Instant::now();
    let (measure, outcome) = match cfg.scenario {
        Scenario::StokesRk => (Measure::Relative, run_stokes(cfg, ws, Stokes::Rk)?),
        Scenario::StokesTk => (Measure::Relative, run_stokes(cfg, ws, Stokes::Tk)?),
        Scenario::StokesQk => (Measure::Relative, run_stokes(cfg, ws, Stokes::Qk)?),
        Scenario::BorelPompeiu => (Measure::Relative, run_borel_pompeiu(cfg, ws)?),
        Scenario::Cauchy => (Measure::Relative, run_cauchy(cfg, ws)?),
        Scenario::Ladder => (Measure::Absolute, run_ladder(cfg, ws)?),
        Scenario::Commutation => (Measure::Absolute, run_commutation(cfg, ws)?),
        Scenario::Reproducing => (Measure::Absolute, run_reproducing(cfg, ws)?),
        Scenario::Fischer => (Measure::Absolute, run_fischer(cfg)?),
        Scenario::Calibration => (Measure::Relative, run_calibration(cfg, ws)?),
        Scenario::SmallBall => (Measure::Slope, run_small_ball(cfg, ws)?),
    };
    let wall_ms = start.elapsed().as_millis() as u64;
    Ok(VerificationReport::assemble(cfg, measure, outcome, wall_ms))
}

fn rng_for(cfg: &ScenarioConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed)
}

fn magnitude(p: &CliffordPoly) -> f64 {
    p.max_abs_coeff()
}

fn relative(absolute: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        absolute / scale
    } else {
        absolute
    }
}

#[derive(Clone, Copy)]
enum Stokes {
    Rk,
    Tk,
    Qk,
}

/// `∫_Ω [(g O, f)_u + (g, O' f)_u] dx = ∫_{∂Ω} (g, dσ_x f)_u` for the pairs
/// `(O, O') = (R_k, R_k), (T_k, T_k^*), (Q_k, Q_k)`.
fn run_stokes(cfg: &ScenarioConfig, ws: &Workspace, kind: Stokes) -> Result<Outcome> {
    let (m, k, d) = (cfg.m, cfg.k, cfg.degree);
    let mut rng = rng_for(cfg);
    let ops = RsOperators::new(m, k)?;
    let (f, g) = match kind {
        Stokes::Rk => {
            let b = ws.monogenic(m, k)?;
            let f = random_x_field(&b, d, false, &mut rng);
            (f, random_x_field(&b, d, false, &mut rng).conjugate())
        }
        Stokes::Tk => {
            let b = ws.monogenic(m, k)?;
            let lo = ws.lower(m, k)?;
            let f = random_x_field(&b, d, false, &mut rng);
            (f, random_u_field(&lo, d, &mut rng).conjugate())
        }
        Stokes::Qk => {
            let lo = ws.lower(m, k)?;
            let f = random_u_field(&lo, d, &mut rng);
            (f, random_u_field(&lo, d, &mut rng).conjugate())
        }
    };
    let gk = field_as_kernel(&g);
    let (g_op, f_op) = match kind {
        Stokes::Rk => (ops.rk_right(&gk), ops.rk(&f)),
        Stokes::Tk => (ops.tk_right(&gk), ops.tk_star(&f)),
        Stokes::Qk => (ops.qk_right(&gk), ops.qk(&f)),
    };
    let origin = vec![0.0; m];
    let vol_left = volume_integrand(&g_op, &f)?;
    let vol_right = volume_integrand(&gk, &f_op)?;
    let bnd = boundary_integrand(&gk, &f, &origin, cfg.radius)?;
    let mut out = Outcome::default();
    for &q in &cfg.quad_orders {
        let sphere = build_sphere_rule(m, q, &origin, cfg.radius)?;
        let ball = build_ball_rule(m, q, &origin, cfg.radius)?;
        let a = integrate_ball(&vol_left, &ball)?;
        let b = integrate_ball(&vol_right, &ball)?;
        let s = integrate_boundary(&bnd, &sphere)?;
        let absolute = magnitude(&a.add(&b).sub(&s));
        let scale = magnitude(&a).max(magnitude(&b)).max(magnitude(&s));
        out.residuals.push(ResidualEntry {
            order: q,
            absolute,
            relative: relative(absolute, scale),
        });
        out.detail(format!("nodes_surface_q{q:03}"), sphere.len() as f64);
        out.detail(format!("nodes_volume_q{q:03}"), ball.len() as f64);
        out.detail("term_volume_right_action", magnitude(&a));
        out.detail("term_volume_left_action", magnitude(&b));
        out.detail("term_boundary", magnitude(&s));
    }
    Ok(out)
}

struct KernelSetup {
    family: Arc<KernelFamily>,
    spec: FermionicOperatorSpec,
    ops: RsOperators,
    lambdas: Vec<LambdaEntry>,
    /// `E_k^1, E_k^3, ..., E_k^{2j-1}` centered at `y`.
    kernels: Vec<RationalKernel>,
}

fn kernel_setup(cfg: &ScenarioConfig, ws: &Workspace) -> Result<KernelSetup> {
    let (m, k, j) = (cfg.m, cfg.k, cfg.j);
    let family = ws.family(m, k)?;
    let lambdas = ws.lambdas(m, k, j)?;
    let kernels = lambdas
        .iter()
        .map(|l| family.kernel(l.j, &cfg.center, l.value))
        .collect::<fermionic_core::Result<Vec<_>>>()?;
    Ok(KernelSetup {
        family,
        spec: FermionicOperatorSpec::new(m, k, j)?,
        ops: RsOperators::new(m, k)?,
        lambdas,
        kernels,
    })
}

fn test_field(cfg: &ScenarioConfig, ws: &Workspace, setup: &KernelSetup, rng: &mut ChaCha8Rng) -> Result<CliffordPoly> {
    Ok(match cfg.field {
        FieldKind::Random => random_x_field(&setup.family.basis, cfg.degree, false, rng),
        FieldKind::RkNull => ws.rk_null(cfg.m, cfg.k, cfg.degree)?.random_element(rng),
    })
}

struct BoundaryTerm {
    label: String,
    sign: f64,
    integrand: CompiledKernel,
}

/// Boundary terms of the Borel-Pompeiu formula. The factor that raises
/// `D_{2t-3}` to `D_{2t-1}` carries the coefficients `a_{t-1}, b_{t-1}`.
fn boundary_terms(cfg: &ScenarioConfig, setup: &KernelSetup, f: &CliffordPoly, chain: &[CliffordPoly]) -> Result<Vec<BoundaryTerm>> {
    let origin = vec![0.0; cfg.m];
    let ops = &setup.ops;
    let mut terms = vec![BoundaryTerm {
        label: "boundary_e1_f".into(),
        sign: 1.0,
        integrand: boundary_integrand(&setup.kernels[0], f, &origin, cfg.radius)?,
    }];
    for t in 2..=cfg.j {
        let e = &setup.kernels[t - 1];
        let h = &chain[t - 2];
        let (a, b) = (setup.spec.a(t - 1), setup.spec.b(t - 1));
        let mixed = ops.tk_star(h).scale(a).add(&ops.rk(h).scale(b));
        terms.push(BoundaryTerm {
            label: format!("boundary_t{t}_operator"),
            sign: 1.0,
            integrand: boundary_integrand(e, &mixed, &origin, cfg.radius)?,
        });
        terms.push(BoundaryTerm {
            label: format!("boundary_t{t}_right_tk_star"),
            sign: -1.0,
            integrand: boundary_integrand(&ops.tk_star_right(e), &h.scale(a), &origin, cfg.radius)?,
        });
        terms.push(BoundaryTerm {
            label: format!("boundary_t{t}_right_rk"),
            sign: -1.0,
            integrand: boundary_integrand(&ops.rk_right(e), &h.scale(b), &origin, cfg.radius)?,
        });
    }
    Ok(terms)
}

fn sum_boundary(terms: &[BoundaryTerm], q: usize, cfg: &ScenarioConfig, out: &mut Outcome) -> Result<CliffordPoly> {
    let sphere = build_sphere_rule(cfg.m, q, &vec![0.0; cfg.m], cfg.radius)?;
    out.detail(format!("nodes_surface_q{q:03}"), sphere.len() as f64);
    let mut total = CliffordPoly::zero(cfg.m);
    for t in terms {
        let v = integrate_boundary(&t.integrand, &sphere)?;
        out.detail(format!("term_{}", t.label), magnitude(&v));
        total = total.add_scaled(&v, t.sign);
    }
    Ok(total)
}

/// `∫_Ω (E^{2j-1}, D_{2j-1} f)_u dx = (boundary terms) - f(y, v)`.
fn run_borel_pompeiu(cfg: &ScenarioConfig, ws: &Workspace) -> Result<Outcome> {
    let setup = kernel_setup(cfg, ws)?;
    let mut rng = rng_for(cfg);
    let f = test_field(cfg, ws, &setup, &mut rng)?;
    let chain = fermionic_chain(&setup.spec, &f)?;
    let target = field_value_at(&f, &cfg.center);
    let lhs_integrand = volume_integrand(&setup.kernels[cfg.j - 1], &chain[cfg.j - 1])?;
    let terms = boundary_terms(cfg, &setup, &f, &chain)?;
    let mut out = Outcome {
        lambda_used: setup.lambdas.clone(),
        ..Outcome::default()
    };
    out.detail("term_f_at_y", magnitude(&target));
    out.detail("field_d_2j-1_f", magnitude(&chain[cfg.j - 1]));
    let origin = vec![0.0; cfg.m];
    for &q in &cfg.quad_orders {
        let ball = build_ball_rule_about(cfg.m, q, &origin, cfg.radius, &cfg.center)?;
        out.detail(format!("nodes_volume_q{q:03}"), ball.len() as f64);
        let lhs = integrate_ball(&lhs_integrand, &ball)?;
        let rhs = sum_boundary(&terms, q, cfg, &mut out)?.sub(&target);
        out.detail("term_volume_lhs", magnitude(&lhs));
        let absolute = magnitude(&lhs.sub(&rhs));
        out.residuals.push(ResidualEntry {
            order: q,
            absolute,
            relative: relative(absolute, magnitude(&lhs).max(magnitude(&target))),
        });
    }
    Ok(out)
}

/// Reconstructs `f(y, v)` from boundary data when `D_{2j-1} f = 0`.
fn run_cauchy(cfg: &ScenarioConfig, ws: &Workspace) -> Result<Outcome> {
    let setup = kernel_setup(cfg, ws)?;
    let mut rng = rng_for(cfg);
    let f = test_field(cfg, ws, &setup, &mut rng)?;
    let chain = fermionic_chain(&setup.spec, &f)?;
    let null = magnitude(&chain[cfg.j - 1]) / magnitude(&f).max(f64::MIN_POSITIVE);
    if null > 1e-8 {
        return Err(crate::error::VerifyError::Config(format!(
            "cauchy: test field is not a null solution of D_{} (residual {null:.2e})",
            2 * cfg.j - 1
        )));
    }
    let target = field_value_at(&f, &cfg.center);
    let terms = boundary_terms(cfg, &setup, &f, &chain)?;
    let mut out = Outcome {
        lambda_used: setup.lambdas.clone(),
        ..Outcome::default()
    };
    out.detail("null_residual", null);
    out.detail("term_f_at_y", magnitude(&target));
    for &q in &cfg.quad_orders {
        let recon = sum_boundary(&terms, q, cfg, &mut out)?;
        let absolute = magnitude(&recon.sub(&target));
        out.residuals.push(ResidualEntry {
            order: q,
            absolute,
            relative: relative(absolute, magnitude(&target)),
        });
    }
    Ok(out)
}

fn run_ladder(cfg: &ScenarioConfig, ws: &Workspace) -> Result<Outcome> {
    let setup = kernel_setup(cfg, ws)?;
    let (hi, lo) = (&setup.kernels[cfg.j - 1], &setup.kernels[cfg.j - 2]);
    let points = ladder_points(cfg.m, &cfg.center, LADDER_POINTS, cfg.seed);
    let res = ladder_check(cfg.m, cfg.k, cfg.j, hi, lo, &points)?;
    let mut out = Outcome {
        lambda_used: setup.lambdas.clone(),
        ..Outcome::default()
    };
    out.residuals.push(ResidualEntry {
        order: 0,
        absolute: res.residual,
        relative: res.relative,
    });
    out.detail("ratio", res.ratio);
    let image = setup.ops.factor_right(setup.spec.a(cfg.j - 1), setup.spec.b(cfg.j - 1), hi);
    if let (Some(a), Some(b)) = (hi.homogeneity(), image.homogeneity()) {
        out.detail("homogeneity_drop", (a - b) as f64);
    }
    Ok(out)
}

fn run_commutation(cfg: &ScenarioConfig, ws: &Workspace) -> Result<Outcome> {
    let (m, k) = (cfg.m, cfg.k);
    let basis = ws.monogenic(m, k)?;
    let spec = FermionicOperatorSpec::new(m, k, cfg.j)?;
    let ops = RsOperators::new(m, k)?;
    let mut rng = rng_for(cfg);
    let (mut absolute, mut scale) = (0.0f64, 0.0f64);
    for _ in 0..cfg.samples {
        let f = random_x_field(&basis, cfg.degree, false, &mut rng);
        for s in 1..cfg.j {
            let (a, b) = (spec.a(s), spec.b(s));
            let lhs = ops.rk(&ops.factor(a, b, &f));
            let rhs = ops.factor(a, b, &ops.rk(&f));
            absolute = absolute.max(magnitude(&lhs.sub(&rhs)));
            scale = scale.max(magnitude(&lhs));
        }
    }
    let mut out = Outcome::default();
    out.residuals.push(ResidualEntry {
        order: 0,
        absolute,
        relative: relative(absolute, scale),
    });
    out.detail("samples", cfg.samples as f64);
    Ok(out)
}

fn run_reproducing(cfg: &ScenarioConfig, ws: &Workspace) -> Result<Outcome> {
    let fam = ws.family(cfg.m, cfg.k)?;
    let mut rng = rng_for(cfg);
    let (mut absolute, mut scale) = (0.0f64, 0.0f64);
    for _ in 0..cfg.samples {
        let f = fam.basis.random_element(&mut rng);
        absolute = absolute.max(fam.zonal.reproducing_error(&f)?);
        scale = scale.max(magnitude(&f));
    }
    let mut out = Outcome::default();
    out.residuals.push(ResidualEntry {
        order: 0,
        absolute,
        relative: relative(absolute, scale),
    });
    out.detail("dim_mk", fam.basis.dim() as f64);
    out.detail("gram_condition", fam.zonal.condition);
    Ok(out)
}

fn run_fischer(cfg: &ScenarioConfig) -> Result<Outcome> {
    let (m, k) = (cfg.m, cfg.k);
    let h = build_harmonic_basis(m, k)?;
    let mut absolute: f64 = 0.0;
    let mut out = Outcome::default();
    for e in &h.elements {
        let p = proj_plus(e, m, k)?;
        let n = proj_minus(e, m, k)?;
        let checks = [
            magnitude(&proj_plus(&p, m, k)?.sub(&p)),
            magnitude(&proj_minus(&n, m, k)?.sub(&n)),
            magnitude(&p.add(&n).sub(e)),
            magnitude(&proj_plus(&n, m, k)?),
            monogenic_residual(&p),
        ];
        absolute = checks.into_iter().fold(absolute, f64::max);
    }
    let dim_h = h.dim();
    let dim_m = monogenic_dimension(m, k);
    let dim_lower = if k > 0 { monogenic_dimension(m, k - 1) } else { 0 };
    if dim_h != dim_m + dim_lower || dim_h != harmonic_dimension(m, k) {
        absolute = absolute.max(1.0);
        out.notes.push(format!(
            "dim H_k = {dim_h}, dim M_k + dim M_(k-1) = {}",
            dim_m + dim_lower
        ));
    }
    out.detail("dim_hk", dim_h as f64);
    out.detail("dim_mk", dim_m as f64);
    out.detail("dim_mk_minus_1", dim_lower as f64);
    out.residuals.push(ResidualEntry {
        order: 0,
        absolute,
        relative: absolute,
    });
    Ok(out)
}

fn random_point<R: Rng>(m: usize, radius: f64, rng: &mut R) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..m).map(|_| rng.gen_range(-radius..radius)).collect();
        if p.iter().map(|c| c * c).sum::<f64>() <= radius * radius {
            return p;
        }
    }
}

/// Recovers `λ_{2j-1}` from independent configurations and reports the spread.
fn run_calibration(cfg: &ScenarioConfig, ws: &Workspace) -> Result<Outcome> {
    let (m, k, j) = (cfg.m, cfg.k, cfg.j);
    let fam = ws.family(m, k)?;
    let lambdas = ws.lambdas(m, k, j)?;
    let table = lambdas[j - 1].value;
    let mut out = Outcome {
        lambda_used: lambdas.clone(),
        ..Outcome::default()
    };
    if lambdas.iter().any(|l| l.value == 0.0) {
        out.notes.push("a calibrated constant is zero".into());
    }
    let summarize = |estimates: &[f64], order: usize, out: &mut Outcome| {
        let max = estimates.iter().copied().fold(f64::MIN, f64::max);
        let min = estimates.iter().copied().fold(f64::MAX, f64::min);
        let dev = estimates
            .iter()
            .map(|e| (e - table).abs())
            .fold(0.0f64, f64::max);
        let zero = lambdas.iter().any(|l| l.value == 0.0);
        out.residuals.push(ResidualEntry {
            order,
            absolute: dev,
            relative: if zero {
                f64::INFINITY
            } else {
                ((max - min) / table.abs()).max(dev / table.abs())
            },
        });
        out.detail(format!("spread_q{order:03}"), (max - min) / table.abs());
    };
    if j == 1 {
        for &q in &cfg.quad_orders {
            let mut rng = rng_for(cfg);
            let mut estimates = Vec::with_capacity(cfg.samples);
            for _ in 0..cfg.samples {
                let f = fam.basis.random_element(&mut rng);
                let y = random_point(m, 0.5, &mut rng);
                let v = random_point(m, 1.0, &mut rng);
                estimates.push(cauchy_lambda_estimate(&fam, &f, &y, &v, q)?);
            }
            summarize(&estimates, q, &mut out);
        }
    } else {
        let mut rng = rng_for(cfg);
        let lo = lambdas[j - 2].value;
        let mut estimates = Vec::with_capacity(cfg.samples);
        for i in 0..cfg.samples {
            let y = random_point(m, 0.5, &mut rng);
            let hi = fam.kernel(j, &y, table)?;
            let low = fam.kernel(j - 1, &y, lo)?;
            let points = ladder_points(m, &y, LADDER_POINTS, cfg.seed.wrapping_add(i as u64));
            estimates.push(table * ladder_check(m, k, j, &hi, &low, &points)?.ratio);
        }
        summarize(&estimates, 0, &mut out);
    }
    Ok(out)
}

/// `|∫_{B_r(y)} (E^{2j-1}, D_{2j-1} f)_u dx|` for shrinking `r`, with the
/// log-log slope as the metric.
fn run_small_ball(cfg: &ScenarioConfig, ws: &Workspace) -> Result<Outcome> {
    let setup = kernel_setup(cfg, ws)?;
    let mut rng = rng_for(cfg);
    let f = test_field(cfg, ws, &setup, &mut rng)?;
    let chain = fermionic_chain(&setup.spec, &f)?;
    let integrand = volume_integrand(&setup.kernels[cfg.j - 1], &chain[cfg.j - 1])?;
    let q = *cfg.quad_orders.last().expect("validated");
    let mut out = Outcome {
        lambda_used: setup.lambdas.clone(),
        ..Outcome::default()
    };
    let mut logs = Vec::new();
    let mut first = None;
    for (i, &r) in SMALL_BALL_RADII.iter().enumerate() {
        let ball = build_ball_rule(cfg.m, q, &cfg.center, r)?;
        let value = magnitude(&integrate_ball(&integrand, &ball)?);
        let base = *first.get_or_insert(value);
        out.residuals.push(ResidualEntry {
            order: q,
            absolute: value,
            relative: relative(value, base),
        });
        out.detail(format!("radius_{i}"), r);
        logs.push((r.ln(), value.ln()));
    }
    let n = logs.len() as f64;
    let (sx, sy) = logs.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let cov: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let slope = cov / var;
    out.detail("slope", slope);
    out.detail("slope_lower_bound", (2 * cfg.j - 1) as f64);
    out.slope = Some(slope);
    Ok(out)
}
