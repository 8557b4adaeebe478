use std::collections::BTreeMap;
use std::path::Path;

use srg_core::case_studies::{
    bellman_operator, bellman_sampler, build_f_p, example_matrices, random_mdp, regularized_bellman_operator, Mdp,
    Policy,
};
use srg_core::error::{Result, SrgError};
use srg_core::io::read_json;
use srg_core::linalg::Matrix;
use srg_core::pairings::PairingSpec;
use srg_core::sampling::{IncrementSampler, SamplerKind};
use srg_core::srg::Operator;

use crate::args::OperatorArgs;

pub const BUILTINS: [&str; 7] = ["I", "A1", "Ainf", "F1", "Finf", "bellman", "bellman_reg"];

pub const DEFAULT_GAMMA: f64 = 0.7;
pub const DEFAULT_ALPHA: f64 = 0.25;
pub const DEFAULT_STATES: usize = 8;
pub const DEFAULT_ACTIONS: usize = 3;

pub struct Resolved {
    pub op: Operator,
    /// Identifier recorded in the run config.
    pub id: String,
    pub matrix: Option<Matrix>,
    pub default_spec: PairingSpec,
    /// Sampler scale and default kind suited to the operator.
    pub sampler_scale: f64,
    pub default_sampler: SamplerKind,
    pub parameters: BTreeMap<String, f64>,
    pub mdp: Option<Mdp>,
}

impl Resolved {
    fn linear(id: &str, m: Matrix, spec: PairingSpec) -> Result<Self> {
        Ok(Resolved {
            op: Operator::matrix(m.clone())?,
            id: id.to_string(),
            matrix: Some(m),
            default_spec: spec,
            sampler_scale: 1.0,
            default_sampler: SamplerKind::Mixed,
            parameters: BTreeMap::new(),
            mdp: None,
        })
    }

    pub fn sampler(&self, kind: Option<SamplerKind>) -> IncrementSampler {
        IncrementSampler::with_scale(kind.unwrap_or(self.default_sampler), self.sampler_scale)
    }
}

pub fn resolve(args: &OperatorArgs, seed: u64) -> Result<Resolved> {
    if let Some(path) = &args.matrix {
        return from_matrix_file(path);
    }
    let id = args.operator.as_deref().unwrap_or("A1");
    builtin(id, args, seed)
}

pub fn from_matrix_file(path: &Path) -> Result<Resolved> {
    let rows: Vec<Vec<f64>> = read_json(path)?;
    let m = Matrix::square_from_rows(&rows)?;
    Resolved::linear(&format!("matrix:{}", path.display()), m, PairingSpec::L2Dot)
}

pub fn builtin(id: &str, args: &OperatorArgs, seed: u64) -> Result<Resolved> {
    let (a1, ainf) = example_matrices();
    match id {
        "I" => Resolved::linear("I", Matrix::identity(3), PairingSpec::L2Dot),
        "A1" => Resolved::linear("A1", a1, PairingSpec::L1Sign),
        "Ainf" => Resolved::linear("Ainf", ainf, PairingSpec::LInfMax),
        "F1" | "Finf" => {
            let (m, spec) = if id == "F1" {
                (a1, PairingSpec::L1Sign)
            } else {
                (ainf, PairingSpec::LInfMax)
            };
            Ok(Resolved {
                op: build_f_p(&m)?,
                id: id.to_string(),
                matrix: None,
                default_spec: spec,
                sampler_scale: 1.0,
                default_sampler: SamplerKind::Mixed,
                parameters: BTreeMap::new(),
                mdp: None,
            })
        }
        "bellman" | "bellman_reg" => {
            let gamma = args.gamma.unwrap_or(DEFAULT_GAMMA);
            let states = args.states.unwrap_or(DEFAULT_STATES);
            let actions = args.actions.unwrap_or(DEFAULT_ACTIONS);
            let mdp = random_mdp(states, actions, gamma, seed)?;
            let pi = Policy::first_action(states);
            let mut parameters = BTreeMap::from([
                ("gamma".to_string(), gamma),
                ("states".to_string(), states as f64),
                ("actions".to_string(), actions as f64),
            ]);
            let op = if id == "bellman" {
                bellman_operator(&mdp, &pi)?
            } else {
                let alpha = args.alpha.unwrap_or(DEFAULT_ALPHA);
                parameters.insert("alpha".into(), alpha);
                regularized_bellman_operator(&mdp, &pi, alpha)?
            };
            let sampler = bellman_sampler(&mdp);
            Ok(Resolved {
                op,
                id: id.to_string(),
                matrix: None,
                default_spec: PairingSpec::LInfMax,
                sampler_scale: sampler.scale,
                default_sampler: sampler.kind,
                parameters,
                mdp: Some(mdp),
            })
        }
        other => Err(SrgError::InvalidParameter(format!(
            "unknown operator `{other}` (expected one of {})",
            BUILTINS.join(", ")
        ))),
    }
}
