use std::fmt;
use std::str::FromStr;

use fermionic_core::kernel::ladder_supported;
use fermionic_core::ops::FermionicOperatorSpec;
use serde::{Deserialize, Serialize};

use crate::error::{Result, VerifyError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    StokesRk,
    StokesTk,
    StokesQk,
    BorelPompeiu,
    Cauchy,
    Ladder,
    Commutation,
    Reproducing,
    Fischer,
    Calibration,
    SmallBall,
}

impl Scenario {
    pub const ALL: [Scenario; 11] = [
        Scenario::StokesRk,
        Scenario::StokesTk,
        Scenario::StokesQk,
        Scenario::BorelPompeiu,
        Scenario::Cauchy,
        Scenario::Ladder,
        Scenario::Commutation,
        Scenario::Reproducing,
        Scenario::Fischer,
        Scenario::Calibration,
        Scenario::SmallBall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::StokesRk => "stokes-rk",
            Scenario::StokesTk => "stokes-tk",
            Scenario::StokesQk => "stokes-qk",
            Scenario::BorelPompeiu => "borel-pompeiu",
            Scenario::Cauchy => "cauchy",
            Scenario::Ladder => "ladder",
            Scenario::Commutation => "commutation",
            Scenario::Reproducing => "reproducing",
            Scenario::Fischer => "fischer",
            Scenario::Calibration => "calibration",
            Scenario::SmallBall => "small-ball",
        }
    }

    pub fn default_tol(self) -> f64 {
        match self {
            Scenario::StokesRk | Scenario::StokesTk | Scenario::StokesQk => 1e-4,
            Scenario::BorelPompeiu | Scenario::Cauchy => 1e-3,
            Scenario::Ladder | Scenario::Reproducing => 1e-8,
            Scenario::Commutation | Scenario::Fischer => 1e-10,
            Scenario::Calibration => 1e-4,
            // minimum log-log slope
            Scenario::SmallBall => 1.0,
        }
    }

    /// Whether the scenario integrates over the domain (and so needs m <= 5).
    pub fn uses_quadrature(self) -> bool {
        !matches!(
            self,
            Scenario::Ladder | Scenario::Commutation | Scenario::Reproducing | Scenario::Fischer
        )
    }

    /// Whether the scenario needs the fundamental solutions up to `E^{2j-1}`.
    pub fn uses_kernels(self) -> bool {
        matches!(
            self,
            Scenario::BorelPompeiu
                | Scenario::Cauchy
                | Scenario::Ladder
                | Scenario::Calibration
                | Scenario::SmallBall
        )
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = VerifyError;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| VerifyError::Config(format!("unknown scenario `{s}`")))
    }
}

/// Family the test functions are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    /// Random `M_k`-valued polynomial of total x-degree at most `degree`.
    Random,
    /// Homogeneous null solution of `R_k` of x-degree `degree`.
    RkNull,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub m: usize,
    pub k: usize,
    pub j: usize,
    /// Radius of the domain, a ball about the origin.
    pub radius: f64,
    /// Evaluation point `y`.
    pub center: Vec<f64>,
    pub quad_orders: Vec<usize>,
    pub seed: u64,
    pub tol: f64,
    pub field: FieldKind,
    pub degree: usize,
    /// Number of random test functions or configurations.
    pub samples: usize,
}

pub fn default_center(m: usize) -> Vec<f64> {
    [0.2, -0.1, 0.15, -0.05, 0.1, 0.05, -0.1, 0.05]
        .into_iter()
        .take(m)
        .collect()
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, m: usize, k: usize, j: usize) -> Self {
        let degree = match scenario {
            Scenario::BorelPompeiu | Scenario::SmallBall => 2 * j,
            Scenario::Commutation => 3,
            _ => 2,
        };
        let samples = match scenario {
            Scenario::Commutation | Scenario::Reproducing => 50,
            Scenario::Calibration => 10,
            _ => 1,
        };
        Self {
            scenario,
            m,
            k,
            j,
            radius: 1.0,
            center: default_center(m),
            quad_orders: vec![16, 32, 64],
            seed: 7,
            tol: scenario.default_tol(),
            field: if scenario == Scenario::Cauchy {
                FieldKind::RkNull
            } else {
                FieldKind::Random
            },
            degree,
            samples,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(VerifyError::Config(format!("{}: {msg}", self.scenario)));
        let max_m = if self.scenario.uses_quadrature() { 5 } else { 6 };
        if self.m < 3 || self.m > max_m {
            return bad(format!("m = {} outside 3..={max_m}", self.m));
        }
        if self.k > 3 {
            return bad(format!("k = {} is above 3", self.k));
        }
        if self.j == 0 {
            return bad("j must be at least 1".into());
        }
        if self.center.len() != self.m {
            return bad(format!("center has {} entries, expected {}", self.center.len(), self.m));
        }
        if !(self.radius > 0.0) {
            return bad(format!("radius {} must be positive", self.radius));
        }
        let ny = self.center.iter().map(|c| c * c).sum::<f64>().sqrt();
        if ny > 0.8 * self.radius {
            return bad(format!("|y| = {ny} exceeds 0.8 R"));
        }
        if self.quad_orders.is_empty() {
            return bad("empty quadrature ladder".into());
        }
        if self.quad_orders.iter().any(|&q| q < 4) || self.quad_orders.windows(2).any(|w| w[1] <= w[0]) {
            return bad("quadrature orders must be >= 4 and increasing".into());
        }
        if self.samples == 0 {
            return bad("samples must be positive".into());
        }
        if !(self.tol > 0.0) {
            return bad("tolerance must be positive".into());
        }
        if matches!(self.scenario, Scenario::StokesTk | Scenario::StokesQk) && self.k == 0 {
            return bad("u M_{k-1} is empty for k = 0".into());
        }
        if matches!(self.scenario, Scenario::Ladder | Scenario::Commutation) && self.j < 2 {
            return bad("needs j >= 2".into());
        }
        if self.j >= 2 || self.scenario.uses_kernels() {
            FermionicOperatorSpec::new(self.m, self.k, self.j)
                .map_err(|e| VerifyError::Config(format!("{}: {e}", self.scenario)))?;
        }
        if self.scenario.uses_kernels() && !ladder_supported(self.m, self.j) {
            return bad(format!(
                "the kernel ladder degenerates for even m = {} with 2j >= m",
                self.m
            ));
        }
        if self.scenario == Scenario::Cauchy && self.field == FieldKind::Random && self.degree + 1 > 2 * self.j - 1 {
            return bad(format!(
                "random fields of degree {} are not null solutions of D_{}",
                self.degree,
                2 * self.j - 1
            ));
        }
        Ok(())
    }
}

/// Partially specified scenario parameters, as given on the command line or in
/// one section of a suite file.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub j: Option<usize>,
    pub radius: Option<f64>,
    pub center: Option<Vec<f64>>,
    pub quad_orders: Option<Vec<usize>>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub field: Option<FieldKind>,
    pub degree: Option<usize>,
    pub samples: Option<usize>,
}

impl Overrides {
    /// Fields of `self` win over `base`.
    pub fn or(self, base: &Overrides) -> Overrides {
        let b = base.clone();
        Overrides {
            scenario: self.scenario.or(b.scenario),
            m: self.m.or(b.m),
            k: self.k.or(b.k),
            j: self.j.or(b.j),
            radius: self.radius.or(b.radius),
            center: self.center.or(b.center),
            quad_orders: self.quad_orders.or(b.quad_orders),
            seed: self.seed.or(b.seed),
            tol: self.tol.or(b.tol),
            field: self.field.or(b.field),
            degree: self.degree.or(b.degree),
            samples: self.samples.or(b.samples),
        }
    }

    pub fn build(self) -> Result<ScenarioConfig> {
        let scenario = self
            .scenario
            .ok_or_else(|| VerifyError::Config("no scenario given".into()))?;
        let mut c = ScenarioConfig::new(scenario, self.m.unwrap_or(3), self.k.unwrap_or(1), self.j.unwrap_or(1));
        if let Some(v) = self.radius {
            c.radius = v;
        }
        if let Some(v) = self.center {
            c.center = v;
        }
        if let Some(v) = self.quad_orders {
            c.quad_orders = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.tol {
            c.tol = v;
        }
        if let Some(v) = self.field {
            c.field = v;
        }
        if let Some(v) = self.degree {
            c.degree = v;
        }
        if let Some(v) = self.samples {
            c.samples = v;
        }
        c.validate()?;
        Ok(c)
    }
}

/// Parses a suite file: an optional `[defaults]` table followed by one table
/// per run. A run names its scenario with a `scenario` key, or else through
/// the table name.
pub fn parse_suite(text: &str) -> Result<Vec<ScenarioConfig>> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| VerifyError::Config(e.to_string()))?;
    let section = |name: &str, v: &toml::Value| -> Result<Overrides> {
        v.clone()
            .try_into()
            .map_err(|e: toml::de::Error| VerifyError::Config(format!("[{name}]: {e}")))
    };
    let defaults = match table.get("defaults") {
        Some(v) => section("defaults", v)?,
        None => Overrides::default(),
    };
    let mut out = Vec::new();
    for (name, v) in &table {
        if name == "defaults" {
            continue;
        }
        let mut o = section(name, v)?;
        if o.scenario.is_none() {
            o.scenario = Some(name.parse()?);
        }
        out.push(o.or(&defaults).build()?);
    }
    if out.is_empty() {
        return Err(VerifyError::Config("suite file defines no scenarios".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
    }

    #[test]
    fn validation() {
        assert!(ScenarioConfig::new(Scenario::BorelPompeiu, 3, 1, 2).validate().is_ok());
        assert!(ScenarioConfig::new(Scenario::BorelPompeiu, 4, 1, 2).validate().is_err());
        assert!(ScenarioConfig::new(Scenario::Ladder, 3, 0, 2).validate().is_err());
        assert!(ScenarioConfig::new(Scenario::StokesTk, 3, 0, 1).validate().is_err());
        let mut c = ScenarioConfig::new(Scenario::Cauchy, 3, 1, 1);
        c.center = vec![0.9, 0.0, 0.0];
        assert!(c.validate().is_err());
        c.center = vec![0.1, 0.0, 0.0];
        c.quad_orders = vec![16, 8];
        assert!(c.validate().is_err());
    }

    #[test]
    fn suite_sections() {
        let text = r#"
            [defaults]
            m = 3
            k = 1
            quad-orders = [8, 16]

            [stokes-rk]

            [cauchy-high]
            scenario = "cauchy"
            j = 2
            center = [0.1, 0.0, 0.0]
        "#;
        let suite = parse_suite(text).unwrap();
        assert_eq!(suite.len(), 2);
        assert_eq!(suite[0].scenario, Scenario::StokesRk);
        assert_eq!(suite[0].quad_orders, vec![8, 16]);
        assert_eq!(suite[1].scenario, Scenario::Cauchy);
        assert_eq!(suite[1].j, 2);
        assert!(parse_suite("[nonsense]\n").is_err());
        assert!(parse_suite("[fischer]\nbogus = 1\n").is_err());
    }
}
