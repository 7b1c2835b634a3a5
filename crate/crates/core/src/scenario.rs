//! Scenario configuration: TOML schema, validation with field-path errors,
//! and compiled-in presets.
//!
//! Agent indices in config files are 1-based. The decomposition is fixed to
//! r = span{e1, e2}, s = span{e3} and the group to SE(2).

use crate::algebra::{AlgebraVector, CostMetric, DualVector};
use crate::dynamics::{
    legendre, legendre_inverse, AgentStateH, AgentStateL, Formulation, MultiAgentState,
    SystemModel,
};
use crate::error::{Error, Result};
use crate::interaction::{EdgeParams, GammaMode, InteractionGraph, PotentialParams};
use crate::se2::{self, GroupElement};
use crate::sim::{IntegratorMethod, IntegratorSpec};
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

/// Agent colors used in plots, in the replication key order.
pub const AGENT_COLORS: [&str; 3] = ["red", "blue", "green"];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Fixed to "SE2"; present for forward compatibility.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default = "default_formulation")]
    pub formulation: String,
    #[serde(default = "default_gamma_mode")]
    pub gamma_mode: String,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub graph: GraphConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub cost: CostConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub agents: Vec<AgentConfig>,
}

fn default_formulation() -> String {
    "hamiltonian".into()
}

fn default_gamma_mode() -> String {
    "oracle".into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: String,
    pub step_size: f64,
    pub steps: usize,
    /// Re-project poses onto the group after each step. Defaults to false
    /// for the entrywise Euler method in paper mode and true otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reproject: Option<bool>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: "rk4".into(),
            step_size: 1e-3,
            steps: 1000,
            reproject: None,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphConfig {
    /// "complete" (default) or "edges".
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<String>,
    /// Explicit edge list, 1-based agent indices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    pub sigma: f64,
    pub distance: f64,
    #[serde(default)]
    pub safety_radius: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<EdgeOverride>,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig {
            sigma: 1.0,
            distance: 0.1,
            safety_radius: 0.0,
            overrides: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeOverride {
    /// 1-based agent pair.
    pub pair: [usize; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostConfig {
    /// Diagonal of the metric on the actuated block.
    pub weights: Vec<f64>,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            weights: vec![2.0, 1.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_stride() -> usize {
    1
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { stride: 1 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    /// (x, y, θ); alternative to `matrix`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<[f64; 3]>,
    /// Raw homogeneous matrix rows; alternative to `pose`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[f64; 3]; 3]>,
    /// Initial control (u¹, u²) for Lagrangian runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<[f64; 2]>,
    /// Initial multiplier λ³; defaults to 0 when `control` is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<f64>,
    /// Initial momentum (μ¹, μ², μ³) for Hamiltonian runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum: Option<[f64; 3]>,
    /// Per-agent metric diagonal override.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

/// A validated, ready-to-run scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub model: SystemModel,
    pub initial: MultiAgentState,
    pub integrator: IntegratorSpec,
    pub stride: usize,
    /// Non-fatal validation notes (e.g. disconnected graph).
    pub warnings: Vec<String>,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config("<toml>", e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Validate and assemble the runnable scenario.
    pub fn build(&self) -> Result<Scenario> {
        if let Some(g) = &self.group {
            if g != "SE2" {
                return Err(Error::config("group", format!("unsupported group `{g}`")));
            }
        }
        if self.agents.is_empty() {
            return Err(Error::config("agents", "at least one agent is required"));
        }
        let count = self.agents.len();
        let mut warnings = Vec::new();

        let formulation = match self.formulation.as_str() {
            "lagrangian" => Formulation::Lagrangian,
            "hamiltonian" => Formulation::Hamiltonian,
            other => {
                return Err(Error::config(
                    "formulation",
                    format!("`{other}` is not one of lagrangian|hamiltonian"),
                ))
            }
        };
        let gamma_mode = match self.gamma_mode.as_str() {
            "oracle" => GammaMode::Oracle,
            "paper" => GammaMode::Paper,
            other => {
                return Err(Error::config(
                    "gamma_mode",
                    format!("`{other}` is not one of oracle|paper"),
                ))
            }
        };

        let graph = self.build_graph(count)?;
        if !graph.is_connected() {
            warnings.push("interaction graph is not connected".into());
        }
        let params = self.build_potential(&graph)?;
        let decomp = se2::decomposition();
        let algebra = se2::structure_constants();
        if !decomp.check(&algebra) {
            return Err(Error::InvalidDecomposition(
                "SE(2) split failed the bracket-inclusion check".into(),
            ));
        }

        let default_weights = &self.cost.weights;
        let metrics = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let w = a.weights.as_deref().unwrap_or(default_weights);
                CostMetric::diagonal(w, &decomp).map_err(|e| {
                    Error::config(format!("agents[{}].weights", i + 1), e.to_string())
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let model = SystemModel {
            algebra,
            decomp,
            metrics,
            graph,
            params,
            gamma_mode,
        };

        let initial = self.build_initial(&model, formulation)?;
        let integrator = self.build_integrator(gamma_mode)?;
        integrator.validate()?;
        if self.output.stride == 0 {
            return Err(Error::config("output.stride", "must be at least 1"));
        }

        Ok(Scenario {
            name: self.name.clone().unwrap_or_else(|| "unnamed".into()),
            model,
            initial,
            integrator,
            stride: self.output.stride,
            warnings,
        })
    }

    fn build_graph(&self, count: usize) -> Result<InteractionGraph> {
        match (&self.graph.topology, &self.graph.edges) {
            (Some(t), None) if t == "complete" => Ok(InteractionGraph::complete(count)),
            (None, None) => Ok(InteractionGraph::complete(count)),
            (topology, Some(edges)) => {
                if let Some(t) = topology {
                    if t != "edges" {
                        return Err(Error::config(
                            "graph.topology",
                            format!("`{t}` conflicts with an explicit edge list"),
                        ));
                    }
                }
                let zero_based: Vec<(usize, usize)> = edges
                    .iter()
                    .map(|&[a, b]| {
                        if a == 0 || b == 0 {
                            return Err(Error::config("graph.edges", "agent indices are 1-based"));
                        }
                        Ok((a - 1, b - 1))
                    })
                    .collect::<Result<_>>()?;
                InteractionGraph::new(count, &zero_based)
                    .map_err(|e| Error::config("graph.edges", e.to_string()))
            }
            (Some(t), None) => Err(Error::config(
                "graph.topology",
                format!("`{t}` is not one of complete|edges"),
            )),
        }
    }

    fn build_potential(&self, graph: &InteractionGraph) -> Result<PotentialParams> {
        if self.potential.sigma <= 0.0 || self.potential.distance <= 0.0 {
            return Err(Error::config(
                "potential",
                "sigma and distance must be positive",
            ));
        }
        let mut params = PotentialParams::uniform(
            graph,
            self.potential.sigma,
            self.potential.distance,
            self.potential.safety_radius,
        )
        .map_err(|e| Error::config("potential", e.to_string()))?;
        for (k, o) in self.potential.overrides.iter().enumerate() {
            let [a, b] = o.pair;
            if a == 0 || b == 0 {
                return Err(Error::config(
                    format!("potential.overrides[{k}].pair"),
                    "agent indices are 1-based",
                ));
            }
            let base = params.edge(a - 1, b - 1).map_err(|_| {
                Error::config(
                    format!("potential.overrides[{k}].pair"),
                    format!("({a},{b}) is not an edge of the graph"),
                )
            })?;
            params
                .set_edge(
                    a - 1,
                    b - 1,
                    EdgeParams {
                        sigma: o.sigma.unwrap_or(base.sigma),
                        distance: o.distance.unwrap_or(base.distance),
                    },
                )
                .map_err(|e| Error::config(format!("potential.overrides[{k}]"), e.to_string()))?;
        }
        Ok(params)
    }

    fn build_integrator(&self, gamma_mode: GammaMode) -> Result<IntegratorSpec> {
        let method = match self.integrator.method.as_str() {
            "euler-matrix" => IntegratorMethod::EulerMatrix,
            "lie-euler" => IntegratorMethod::LieEuler,
            "rk4" => IntegratorMethod::Rk4Chart,
            other => {
                return Err(Error::config(
                    "integrator.method",
                    format!("`{other}` is not one of euler-matrix|lie-euler|rk4"),
                ))
            }
        };
        // replication mode keeps the raw matrix drift; every other mode
        // projects back onto the group
        let reproject = self.integrator.reproject.unwrap_or(!matches!(
            (method, gamma_mode),
            (IntegratorMethod::EulerMatrix, GammaMode::Paper)
        ));
        Ok(IntegratorSpec {
            method,
            step_size: self.integrator.step_size,
            steps: self.integrator.steps,
            reproject,
        })
    }

    fn build_initial(
        &self,
        model: &SystemModel,
        formulation: Formulation,
    ) -> Result<MultiAgentState> {
        let n = model.dim();
        let mut lagrangian = Vec::new();
        let mut hamiltonian = Vec::new();
        for (idx, a) in self.agents.iter().enumerate() {
            let label = format!("agents[{}]", idx + 1);
            let pose = match (&a.pose, &a.matrix) {
                (Some([x, y, th]), None) => GroupElement::from_pose(*x, *y, *th)
                    .map_err(|e| Error::config(format!("{label}.pose"), e.to_string()))?,
                (None, Some(rows)) => {
                    let m = Matrix3::from_fn(|r, c| rows[r][c]);
                    GroupElement::from_matrix(m)
                        .map_err(|e| Error::config(format!("{label}.matrix"), e.to_string()))?
                }
                (Some(_), Some(_)) => {
                    return Err(Error::config(
                        format!("{label}"),
                        "give either pose or matrix, not both",
                    ))
                }
                (None, None) => {
                    return Err(Error::config(
                        format!("{label}"),
                        "missing initial pose (pose or matrix)",
                    ))
                }
            };

            // (u, λ) and μ views of the initial condition
            let given_l = a.control.map(|[u1, u2]| {
                let u = AlgebraVector(vec![u1, u2, 0.0]);
                let lam = DualVector(vec![0.0, 0.0, a.multiplier.unwrap_or(0.0)]);
                (u, lam)
            });
            let given_h = a.momentum.map(|m| DualVector(m.to_vec()));
            if a.multiplier.is_some() && a.control.is_none() {
                return Err(Error::config(
                    format!("{label}.multiplier"),
                    "multiplier requires control",
                ));
            }

            match formulation {
                Formulation::Lagrangian => {
                    let (u, lam) = match (given_l, given_h) {
                        (Some(ul), None) => ul,
                        (None, Some(mu)) => legendre_inverse(&mu, model.metric(idx), &model.decomp),
                        (Some(_), Some(_)) => {
                            return Err(Error::config(
                                format!("{label}"),
                                "give either control/multiplier or momentum, not both",
                            ))
                        }
                        (None, None) => (AlgebraVector::zero(n), DualVector::zero(n)),
                    };
                    lagrangian.push(
                        AgentStateL::new(pose, u, lam, &model.decomp)
                            .map_err(|e| Error::config(label.clone(), e.to_string()))?,
                    );
                }
                Formulation::Hamiltonian => {
                    let mu = match (given_l, given_h) {
                        (None, Some(mu)) => mu,
                        (Some((u, lam)), None) => {
                            legendre(&u, &lam, model.metric(idx), &model.decomp)
                                .map_err(|e| Error::config(label.clone(), e.to_string()))?
                        }
                        (Some(_), Some(_)) => {
                            return Err(Error::config(
                                format!("{label}"),
                                "give either control/multiplier or momentum, not both",
                            ))
                        }
                        (None, None) => DualVector::zero(n),
                    };
                    hamiltonian.push(AgentStateH { pose, momentum: mu });
                }
            }
        }
        Ok(match formulation {
            Formulation::Lagrangian => MultiAgentState::Lagrangian(lagrangian),
            Formulation::Hamiltonian => MultiAgentState::Hamiltonian(hamiltonian),
        })
    }
}

/// Look up a compiled-in preset by name.
pub fn preset(name: &str) -> Option<ScenarioConfig> {
    match name {
        "paper-unicycles" => Some(paper_unicycles()),
        "triangle" => Some(triangle()),
        _ => None,
    }
}

pub const PRESET_NAMES: [&str; 2] = ["paper-unicycles", "triangle"];

/// The three-unicycle replication scenario: equilateral start with side
/// 0.5, σ = 1, d = 0.1, entrywise Euler with h = 0.001 for 15000 steps,
/// published Γ coefficients, complete graph.
///
/// Initial matrices are stored raw. The second agent's printed matrix has
/// rotation block [[-c, c], [c, -c]] (c = 1/√2), which is singular, not a
/// rotation; the stored block flips the sign of the (1,2) entry, giving the
/// rotation by 3π/4. This is the unique single-entry repair under which the
/// run stays collision-free with the published qualitative behavior.
pub fn paper_unicycles() -> ScenarioConfig {
    let c = std::f64::consts::SQRT_2 / 2.0;
    let s3 = 3.0_f64.sqrt();
    ScenarioConfig {
        name: Some("paper-unicycles".into()),
        group: Some("SE2".into()),
        formulation: "lagrangian".into(),
        gamma_mode: "paper".into(),
        integrator: IntegratorConfig {
            method: "euler-matrix".into(),
            step_size: 1e-3,
            steps: 15000,
            reproject: None, // resolves to false in paper mode
        },
        graph: GraphConfig {
            topology: Some("complete".into()),
            edges: None,
        },
        potential: PotentialConfig {
            sigma: 1.0,
            distance: 0.1,
            safety_radius: 0.05,
            overrides: Vec::new(),
        },
        cost: CostConfig {
            weights: vec![2.0, 1.0],
        },
        output: OutputConfig { stride: 1 },
        agents: vec![
            AgentConfig {
                matrix: Some([[c, -c, -0.25], [c, c, 0.0], [0.0, 0.0, 1.0]]),
                control: Some([2.5, 1.25]),
                multiplier: Some(0.0),
                ..Default::default()
            },
            AgentConfig {
                matrix: Some([[-c, -c, 0.25], [c, -c, 0.0], [0.0, 0.0, 1.0]]),
                control: Some([-2.0, 2.0]),
                multiplier: Some(0.0),
                ..Default::default()
            },
            AgentConfig {
                matrix: Some([[0.0, 1.0, 0.0], [-1.0, 0.0, s3 / 4.0], [0.0, 0.0, 1.0]]),
                control: Some([0.5, 1.0]),
                multiplier: Some(0.0),
                ..Default::default()
            },
        ],
    }
}

/// A smooth three-agent scenario that stays well clear of the collision
/// shell: side-1 equilateral start with mild momenta. Used by the
/// equivalence, equivariance and conservation studies.
pub fn triangle() -> ScenarioConfig {
    let s3 = 3.0_f64.sqrt();
    ScenarioConfig {
        name: Some("triangle".into()),
        group: Some("SE2".into()),
        formulation: "hamiltonian".into(),
        gamma_mode: "oracle".into(),
        integrator: IntegratorConfig {
            method: "rk4".into(),
            step_size: 1e-3,
            steps: 1000,
            reproject: None,
        },
        graph: GraphConfig {
            topology: Some("complete".into()),
            edges: None,
        },
        potential: PotentialConfig {
            sigma: 1.0,
            distance: 0.1,
            safety_radius: 0.05,
            overrides: Vec::new(),
        },
        cost: CostConfig {
            weights: vec![2.0, 1.0],
        },
        output: OutputConfig { stride: 1 },
        agents: vec![
            AgentConfig {
                pose: Some([-0.5, 0.0, std::f64::consts::FRAC_PI_2]),
                momentum: Some([1.0, 0.6, 0.0]),
                ..Default::default()
            },
            AgentConfig {
                pose: Some([0.5, 0.0, std::f64::consts::FRAC_PI_2]),
                momentum: Some([-0.8, 0.5, 0.0]),
                ..Default::default()
            },
            AgentConfig {
                pose: Some([0.0, s3 / 2.0, -std::f64::consts::FRAC_PI_2]),
                momentum: Some([0.6, 0.7, 0.0]),
                ..Default::default()
            },
        ],
    }
}
