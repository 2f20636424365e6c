//! Scenario files: who trades, what they start with, over which network,
//! and how tightly to integrate.
//!
//! A scenario is one TOML file. Unknown keys are rejected, every integrator
//! setting is optional, and validation failures name the offending field.
//!
//! ```toml
//! name = "symmetric_exchange"
//! description = "Mirror-image endowments, identical preferences."
//!
//! [utility]
//! exponents = [[0.5, 0.5], [0.5, 0.5]]
//!
//! [endowments]
//! bundles = [[3.0, 1.0], [1.0, 3.0]]
//!
//! [network]
//! probabilities = [0.5, 0.5]
//!
//! [integrator]
//! stop_field_norm = 1e-8
//! ```

use serde::Deserialize;

use crate::economy::{Allocation, UtilityParams};
use crate::error::{Error, Result};
use crate::integrate::IntegratorConfig;
use crate::networks::NetworkSpec;

/// A fully validated simulation input.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub labels: Vec<String>,
    pub params: UtilityParams,
    pub endowments: Allocation,
    pub network: NetworkSpec,
    pub integrator: IntegratorConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    labels: Option<Vec<String>>,
    utility: UtilitySection,
    endowments: EndowmentSection,
    network: NetworkSection,
    #[serde(default)]
    integrator: Option<IntegratorConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UtilitySection {
    exponents: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EndowmentSection {
    bundles: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkSection {
    probabilities: Vec<f64>,
}

impl Scenario {
    /// Parses and validates a scenario from TOML text. `origin` names the
    /// source in error messages.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        let file: ScenarioFile =
            toml::from_str(text).map_err(|e| Error::Parse(format!("{origin}: {e}")))?;
        Self::assemble(file, origin)
    }

    /// Loads a scenario from a file path.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    fn assemble(file: ScenarioFile, origin: &str) -> Result<Self> {
        let at = |field: &str, e: Error| -> Error {
            Error::Validation(format!("{origin}: {field}: {e}"))
        };

        let params =
            UtilityParams::new(file.utility.exponents).map_err(|e| at("utility.exponents", e))?;
        let endowments = Allocation::from_bundles(&file.endowments.bundles)
            .map_err(|e| at("endowments.bundles", e))?;
        let network = NetworkSpec::from_probabilities(&file.network.probabilities)
            .map_err(|e| at("network.probabilities", e))?;
        let integrator = file.integrator.unwrap_or_default();
        integrator.validate().map_err(|e| at("integrator", e))?;

        let n = params.agent_count();
        if n < 2 {
            return Err(Error::Validation(format!(
                "{origin}: utility.exponents: a scenario needs at least two agents"
            )));
        }
        if endowments.agents() != n {
            return Err(Error::Validation(format!(
                "{origin}: endowments.bundles: {} bundles for {} agents",
                endowments.agents(),
                n
            )));
        }
        if endowments.goods() != params.good_count() {
            return Err(Error::Validation(format!(
                "{origin}: endowments.bundles: bundles have {} goods, exponents have {}",
                endowments.goods(),
                params.good_count()
            )));
        }
        if network.agents() != n {
            return Err(Error::Validation(format!(
                "{origin}: network.probabilities: {} entries for {} agents",
                network.agents(),
                n
            )));
        }
        if !endowments.is_interior(integrator.boundary_floor) {
            return Err(Error::Boundary(format!(
                "{origin}: endowments.bundles: every holding must exceed the boundary \
                 floor {:e}; smallest is {}",
                integrator.boundary_floor,
                endowments.min_entry()
            )));
        }

        let labels = match file.labels {
            Some(labels) => {
                if labels.len() != n {
                    return Err(Error::Validation(format!(
                        "{origin}: labels: {} labels for {n} agents",
                        labels.len()
                    )));
                }
                labels
            }
            None => (1..=n).map(|i| format!("agent-{i}")).collect(),
        };

        Ok(Self {
            name: file.name,
            description: file.description,
            labels,
            params,
            endowments,
            network,
            integrator,
        })
    }

    pub fn agent_count(&self) -> usize {
        self.params.agent_count()
    }

    pub fn good_count(&self) -> usize {
        self.params.good_count()
    }

    /// The same scenario on a different network; used by simplex sweeps.
    pub fn with_probabilities(&self, probabilities: &[f64]) -> Result<Self> {
        let mut out = self.clone();
        out.network = NetworkSpec::from_probabilities(probabilities)?;
        Ok(out)
    }
}

/// Name, description, and TOML source of every scenario shipped with the
/// crate. The endowment values are repository choices picked to respect the
/// documented orderings; they are not measured data.
pub fn bundled() -> &'static [(&'static str, &'static str)] {
    &[
        ("table1_row1", include_str!("../scenarios/table1_row1.toml")),
        ("table1_row2", include_str!("../scenarios/table1_row2.toml")),
        ("table1_row3", include_str!("../scenarios/table1_row3.toml")),
        ("table1_row4", include_str!("../scenarios/table1_row4.toml")),
        ("table1_row5", include_str!("../scenarios/table1_row5.toml")),
        (
            "symmetric_exchange",
            include_str!("../scenarios/symmetric_exchange.toml"),
        ),
        (
            "asymmetric_mild",
            include_str!("../scenarios/asymmetric_mild.toml"),
        ),
        (
            "asymmetric_skewed",
            include_str!("../scenarios/asymmetric_skewed.toml"),
        ),
        (
            "asymmetric_crossed",
            include_str!("../scenarios/asymmetric_crossed.toml"),
        ),
    ]
}

/// Loads one of the bundled scenarios by name.
pub fn load_bundled(name: &str) -> Result<Scenario> {
    for (candidate, text) in bundled() {
        if *candidate == name {
            return Scenario::from_toml_str(text, name);
        }
    }
    Err(Error::Validation(format!(
        "unknown bundled scenario `{name}`; available: {}",
        bundled()
            .iter()
            .map(|(n, _)| *n)
            .collect::<Vec<_>>()
            .join(", ")
    )))
}

/// Resolves `--scenario` arguments: a path wins when the file exists,
/// otherwise the name is looked up among the bundled scenarios.
pub fn resolve(spec: &str) -> Result<Scenario> {
    let path = std::path::Path::new(spec);
    if path.exists() {
        Scenario::load(path)
    } else {
        load_bundled(spec)
    }
}

/// Parses a gradient file for the existence check: TOML with
/// `mu = [[...], ...]`, one row per agent.
pub fn load_gradient_file(path: &std::path::Path) -> Result<crate::economy::GradientMatrix> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct GradientFile {
        mu: Vec<Vec<f64>>,
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let file: GradientFile =
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    crate::economy::GradientMatrix::from_columns(&file.mu)
}
