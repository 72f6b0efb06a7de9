use std::collections::BTreeMap;
use std::fmt::Write as _;

use fermionic_core::kernel::LambdaEntry;
use serde::{Deserialize, Serialize};

use crate::config::ScenarioConfig;
use crate::error::{Result, VerifyError};

/// Residuals below this are rounding noise; the ladder does not have to keep
/// decreasing once it gets there.
pub const MONOTONE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualEntry {
    /// Quadrature order, or 0 for quadrature-free checks.
    pub order: usize,
    pub absolute: f64,
    pub relative: f64,
}

/// Which number is compared with the tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Absolute,
    Relative,
    /// Log-log slope, which must be at least the tolerance.
    Slope,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub params: ScenarioConfig,
    pub lambda_used: Vec<LambdaEntry>,
    pub residuals: Vec<ResidualEntry>,
    pub pass: bool,
    pub wall_ms: u64,
    pub measure: Measure,
    pub metric: f64,
    pub tolerance: f64,
    pub monotone: bool,
    /// Per-term magnitudes, node counts and other diagnostics.
    pub details: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

/// What a scenario computes before pass/fail is decided.
#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub residuals: Vec<ResidualEntry>,
    pub lambda_used: Vec<LambdaEntry>,
    pub details: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    /// Set for slope-type scenarios.
    pub slope: Option<f64>,
}

impl Outcome {
    pub fn detail(&mut self, key: impl Into<String>, value: f64) {
        self.details.insert(key.into(), value);
    }
}

pub fn is_monotone(values: &[f64]) -> bool {
    values
        .windows(2)
        .all(|w| w[1] <= w[0] || w[1] <= MONOTONE_FLOOR)
}

impl VerificationReport {
    pub fn assemble(cfg: &ScenarioConfig, measure: Measure, outcome: Outcome, wall_ms: u64) -> Self {
        let pick = |r: &ResidualEntry| match measure {
            Measure::Absolute => r.absolute,
            _ => r.relative,
        };
        let series: Vec<f64> = outcome.residuals.iter().map(pick).collect();
        let (metric, monotone, pass) = match measure {
            Measure::Slope => {
                let s = outcome.slope.unwrap_or(f64::NAN);
                (s, true, s >= cfg.tol)
            }
            _ => {
                let top = series.last().copied().unwrap_or(f64::NAN);
                let mono = is_monotone(&series);
                (top, mono, top <= cfg.tol)
            }
        };
        Self {
            scenario: cfg.scenario.name().to_string(),
            params: cfg.clone(),
            lambda_used: outcome.lambda_used,
            residuals: outcome.residuals,
            pass,
            wall_ms,
            measure,
            metric,
            tolerance: cfg.tol,
            monotone,
            details: outcome.details,
            notes: outcome.notes,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| VerifyError::Serialize(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "[{}] {} m={} k={} j={} R={} y={:?} seed={}",
            if self.pass { "PASS" } else { "FAIL" },
            self.scenario,
            p.m,
            p.k,
            p.j,
            p.radius,
            p.center,
            p.seed
        );
        let cmp = if self.measure == Measure::Slope { ">=" } else { "<=" };
        let _ = writeln!(
            s,
            "  {:?} metric {:.3e} {cmp} {:.1e}{}  ({} ms)",
            self.measure,
            self.metric,
            self.tolerance,
            if self.monotone { "" } else { "  [ladder not monotone]" },
            self.wall_ms
        );
        for r in &self.residuals {
            let _ = writeln!(
                s,
                "  order {:>3}: absolute {:.3e}  relative {:.3e}",
                r.order, r.absolute, r.relative
            );
        }
        for l in &self.lambda_used {
            let _ = writeln!(
                s,
                "  lambda_{} = {:.12e} (residual {:.1e})",
                2 * l.j - 1,
                l.value,
                l.residual
            );
        }
        for (k, v) in &self.details {
            let _ = writeln!(s, "  {k} = {v:.6e}");
        }
        for n in &self.notes {
            let _ = writeln!(s, "  note: {n}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotonicity_with_noise_floor() {
        assert!(is_monotone(&[1e-3, 1e-6, 1e-9]));
        assert!(!is_monotone(&[1e-3, 1e-2]));
        assert!(is_monotone(&[1e-14, 3e-14, 2e-15]));
    }
}
