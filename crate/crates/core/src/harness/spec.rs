//! Experiment spec files (strict JSON schema).

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::optimizer::{Init, ModelKind, OptimizerConfig};
use crate::scattering::Architecture;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Los,
    Rayleigh,
    Rician {
        k: Vec<f64>,
    },
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Los => "los",
            Scenario::Rayleigh => "rayleigh",
            Scenario::Rician { .. } => "rician",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSelection {
    Physics,
    WidelyUsed,
    /// Configuration optimized for the widely used model, evaluated in the physics-compliant one.
    SuboptimalCross,
}

impl ModelSelection {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSelection::Physics => "physics",
            ModelSelection::WidelyUsed => "widely_used",
            ModelSelection::SuboptimalCross => "suboptimal_cross",
        }
    }
}

/// Trial count, either fixed or overridden for particular element counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Trials {
    Fixed(usize),
    PerElementCount(TrialPolicy),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialPolicy {
    pub default: usize,
    #[serde(default, with = "string_keys")]
    pub per_n_i: BTreeMap<usize, usize>,
}

/// JSON object keys are strings; untagged enums cannot coerce them to integers.
mod string_keys {
    use super::*;
    use serde::de::Error as _;

    pub fn serialize<S: Serializer>(m: &BTreeMap<usize, usize>, s: S) -> std::result::Result<S::Ok, S::Error> {
        m.iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect::<BTreeMap<String, usize>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BTreeMap<usize, usize>, D::Error> {
        BTreeMap::<String, usize>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| {
                k.parse::<usize>()
                    .map(|k| (k, v))
                    .map_err(|_| D::Error::custom(format!("per_n_i key `{k}` is not an element count")))
            })
            .collect()
    }
}

impl Trials {
    pub fn for_n_i(&self, n_i: usize) -> usize {
        match self {
            Trials::Fixed(n) => *n,
            Trials::PerElementCount(p) => p.per_n_i.get(&n_i).copied().unwrap_or(p.default),
        }
    }

    fn all_positive(&self) -> bool {
        match self {
            Trials::Fixed(n) => *n >= 1,
            Trials::PerElementCount(p) => p.default >= 1 && p.per_n_i.values().all(|&n| n >= 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Identity,
    RandomPhase,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_outer_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_inner_iters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<InitKind>,
}

impl OptimizerOverrides {
    /// Full configuration for one run; `init_seed` feeds random-phase starts.
    pub fn config(&self, model: ModelKind, architecture: Architecture, init_seed: u64) -> OptimizerConfig {
        let d = OptimizerConfig::default();
        OptimizerConfig {
            max_outer_iters: self.max_outer_iters.unwrap_or(d.max_outer_iters),
            max_inner_iters: self.max_inner_iters.unwrap_or(d.max_inner_iters),
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            init: match self.init.unwrap_or(InitKind::RandomPhase) {
                InitKind::Identity => Init::Identity,
                InitKind::RandomPhase => Init::RandomPhase { seed: init_seed },
            },
            architecture,
            model,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidSpec(format!("unknown output format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default)]
    pub format: OutputFormat,
}

fn two() -> usize {
    2
}

mod one_or_many {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        One(usize),
        Many(Vec<usize>),
    }

    pub fn serialize<S: Serializer>(v: &[usize], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<usize>, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::One(x) => vec![x],
            Repr::Many(v) => v,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    /// RIS counts; a single number is accepted.
    #[serde(with = "one_or_many")]
    pub l: Vec<usize>,
    pub n_i_grid: Vec<usize>,
    #[serde(default = "two")]
    pub n_t: usize,
    #[serde(default = "two")]
    pub n_r: usize,
    pub trials: Trials,
    pub seed: u64,
    pub models: Vec<ModelSelection>,
    pub architectures: Vec<Architecture>,
    #[serde(default)]
    pub optimizer: OptimizerOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl ExperimentSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(s).map_err(|e| Error::InvalidSpec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_string()));
        if !self.trials.all_positive() {
            return bad("trials must be at least 1");
        }
        if self.l.is_empty() || self.l.contains(&0) {
            return bad("l must list at least one RIS count, each at least 1");
        }
        if self.n_i_grid.is_empty() || self.n_i_grid.contains(&0) {
            return bad("n_i_grid must list at least one element count, each at least 1");
        }
        if self.n_t == 0 || self.n_r == 0 {
            return bad("n_t and n_r must be at least 1");
        }
        if self.models.is_empty() {
            return bad("models must not be empty");
        }
        if self.architectures.is_empty() {
            return bad("architectures must not be empty");
        }
        if self.models.contains(&ModelSelection::SuboptimalCross)
            && !(self.models.contains(&ModelSelection::Physics) && self.models.contains(&ModelSelection::WidelyUsed))
        {
            return bad("suboptimal_cross requires both physics and widely_used");
        }
        if let Scenario::Rician { k } = &self.scenario {
            if k.is_empty() || k.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return bad("rician k list must be nonempty, finite and nonnegative");
            }
        }
        let o = &self.optimizer;
        if o.max_outer_iters == Some(0) || o.max_inner_iters == Some(0) {
            return bad("optimizer iteration caps must be at least 1");
        }
        if let Some(t) = o.rel_tol {
            if !(t > 0.0 && t.is_finite()) {
                return bad("optimizer rel_tol must be positive");
            }
        }
        Ok(())
    }

    pub fn wants(&self, m: ModelSelection) -> bool {
        self.models.contains(&m)
    }

    pub fn needs_physics(&self) -> bool {
        self.wants(ModelSelection::Physics) || self.wants(ModelSelection::SuboptimalCross)
    }

    pub fn needs_widely(&self) -> bool {
        self.wants(ModelSelection::WidelyUsed) || self.wants(ModelSelection::SuboptimalCross)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "scenario": {"rician": {"k": [0, 1, 3]}},
        "l": 2,
        "n_i_grid": [8, 16],
        "trials": {"default": 10, "per_n_i": {"16": 3}},
        "seed": 7,
        "models": ["physics", "widely_used", "suboptimal_cross"],
        "architectures": ["diagonal", "unitary"],
        "optimizer": {"rel_tol": 1e-8, "init": "identity"},
        "output": {"path": "out.csv", "format": "csv"}
    }"#;

    #[test]
    fn parses_full_spec() {
        let s = ExperimentSpec::from_json(BASE).unwrap();
        assert_eq!(s.l, vec![2]);
        assert_eq!((s.n_t, s.n_r), (2, 2));
        assert_eq!(s.trials.for_n_i(8), 10);
        assert_eq!(s.trials.for_n_i(16), 3);
        assert_eq!(s.scenario, Scenario::Rician { k: vec![0.0, 1.0, 3.0] });
        let cfg = s.optimizer.config(ModelKind::Physics, Architecture::Unitary, 5);
        assert_eq!(cfg.init, Init::Identity);
        assert_eq!(cfg.rel_tol, 1e-8);
        assert_eq!(cfg.max_outer_iters, 100);
        let again = ExperimentSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let with_extra = BASE.replacen("\"seed\": 7,", "\"seed\": 7, \"colour\": 1,", 1);
        assert!(matches!(ExperimentSpec::from_json(&with_extra), Err(Error::InvalidSpec(_))));
        let nested = BASE.replacen("\"init\": \"identity\"", "\"init\": \"identity\", \"x\": 1", 1);
        assert!(ExperimentSpec::from_json(&nested).is_err());
    }

    #[test]
    fn invariants_are_enforced() {
        for (from, to) in [
            ("\"l\": 2", "\"l\": []"),
            ("\"n_i_grid\": [8, 16]", "\"n_i_grid\": []"),
            ("\"default\": 10", "\"default\": 0"),
            ("\"models\": [\"physics\", \"widely_used\", \"suboptimal_cross\"]", "\"models\": [\"physics\", \"suboptimal_cross\"]"),
            ("[0, 1, 3]", "[]"),
            ("\"rel_tol\": 1e-8", "\"rel_tol\": 0"),
        ] {
            let s = BASE.replacen(from, to, 1);
            assert!(ExperimentSpec::from_json(&s).is_err(), "{to}");
        }
    }

    #[test]
    fn plain_scenarios_and_fixed_trials() {
        let s = r#"{"scenario": "los", "l": [2, 4], "n_i_grid": [8], "trials": 5, "seed": 1,
                    "models": ["physics"], "architectures": ["diagonal"]}"#;
        let s = ExperimentSpec::from_json(s).unwrap();
        assert_eq!(s.scenario, Scenario::Los);
        assert_eq!(s.trials, Trials::Fixed(5));
        assert!(s.output.is_none());
        assert!(s.needs_physics() && !s.needs_widely());
    }
}
