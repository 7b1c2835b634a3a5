//! Reduced necessary-condition vector fields for the multi-agent optimal
//! control problem: the split Lagrangian form on (g, u, λ), the Hamiltonian
//! form on (g, μ) with controls recovered by maximization, the Legendre
//! bridge between them, and the reduced Hamiltonian they conserve.
//!
//! Both right-hand sides evaluate the same underlying field: with
//! μ = W u + λ the momentum equation is μ̇ = ad*_u μ + Σ_j Γ-term, split
//! through the r ⊕ s projections on the Lagrangian side. The coupling term
//! enters so that the flow conserves the reduced Hamiltonian (kinetic − V)
//! in oracle mode and reproduces the published SE(2) system in paper mode.

use crate::algebra::{
    pairing, project_dual, AlgebraVector, CostMetric, Decomposition, DualVector, Part,
    StructureConstants,
};
use crate::error::{Error, Result};
use crate::interaction::{
    coupling_term, neighbor_sum, total_potential, GammaMode, InteractionGraph, PotentialParams,
};
use crate::se2::GroupElement;

/// Which set of state variables a run integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formulation {
    /// (g, u, λ) with the split equations.
    Lagrangian,
    /// (g, μ) with PMP-maximized controls.
    Hamiltonian,
}

/// Immutable problem data shared by all agents.
#[derive(Debug, Clone)]
pub struct SystemModel {
    pub algebra: StructureConstants,
    pub decomp: Decomposition,
    /// One cost metric per agent (heterogeneous agents allowed).
    pub metrics: Vec<CostMetric>,
    pub graph: InteractionGraph,
    pub params: PotentialParams,
    pub gamma_mode: GammaMode,
}

impl SystemModel {
    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn agent_count(&self) -> usize {
        self.graph.agent_count()
    }

    pub fn metric(&self, i: usize) -> &CostMetric {
        &self.metrics[i]
    }

    fn check_agent_count(&self, got: usize) -> Result<()> {
        if got != self.agent_count() {
            return Err(Error::DimensionMismatch {
                expected: self.agent_count(),
                got,
            });
        }
        Ok(())
    }

    /// Σ_{j∈N_i} of the configured coupling term at agent i.
    pub fn coupling_sum(&self, poses: &[GroupElement], i: usize) -> Result<DualVector> {
        let mode = self.gamma_mode;
        neighbor_sum(&self.graph, &self.params, poses, i, self.dim(), |e, gi, gj| {
            coupling_term(mode, e, gi, gj)
        })
    }
}

/// Per-agent Lagrangian state: control on r, multiplier on s*.
#[derive(Debug, Clone)]
pub struct AgentStateL {
    pub pose: GroupElement,
    pub control: AlgebraVector,
    pub multiplier: DualVector,
}

impl AgentStateL {
    pub fn new(
        pose: GroupElement,
        control: AlgebraVector,
        multiplier: DualVector,
        d: &Decomposition,
    ) -> Result<Self> {
        for k in d.s_indices() {
            if control[k] != 0.0 {
                return Err(Error::SupportViolation {
                    context: "control has components outside the actuated subspace",
                });
            }
        }
        for k in d.r_indices() {
            if multiplier[k] != 0.0 {
                return Err(Error::SupportViolation {
                    context: "multiplier has components outside the unactuated dual",
                });
            }
        }
        Ok(AgentStateL {
            pose,
            control,
            multiplier,
        })
    }
}

/// Per-agent Hamiltonian state: full momentum covector.
#[derive(Debug, Clone)]
pub struct AgentStateH {
    pub pose: GroupElement,
    pub momentum: DualVector,
}

/// Stacked multi-agent state with its formulation tag.
#[derive(Debug, Clone)]
pub enum MultiAgentState {
    Lagrangian(Vec<AgentStateL>),
    Hamiltonian(Vec<AgentStateH>),
}

impl MultiAgentState {
    pub fn formulation(&self) -> Formulation {
        match self {
            MultiAgentState::Lagrangian(_) => Formulation::Lagrangian,
            MultiAgentState::Hamiltonian(_) => Formulation::Hamiltonian,
        }
    }

    pub fn agent_count(&self) -> usize {
        match self {
            MultiAgentState::Lagrangian(a) => a.len(),
            MultiAgentState::Hamiltonian(a) => a.len(),
        }
    }

    pub fn poses(&self) -> Vec<GroupElement> {
        match self {
            MultiAgentState::Lagrangian(a) => a.iter().map(|s| s.pose).collect(),
            MultiAgentState::Hamiltonian(a) => a.iter().map(|s| s.pose).collect(),
        }
    }

    /// Convert to the Hamiltonian formulation through the Legendre map.
    pub fn to_hamiltonian(&self, model: &SystemModel) -> Result<MultiAgentState> {
        match self {
            MultiAgentState::Hamiltonian(_) => Ok(self.clone()),
            MultiAgentState::Lagrangian(agents) => {
                let mapped = agents
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        Ok(AgentStateH {
                            pose: a.pose,
                            momentum: legendre(
                                &a.control,
                                &a.multiplier,
                                model.metric(i),
                                &model.decomp,
                            )?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(MultiAgentState::Hamiltonian(mapped))
            }
        }
    }
}

/// Time derivatives of one Lagrangian agent.
#[derive(Debug, Clone)]
pub struct AgentDerivL {
    /// Body velocity ξ with ġ = g · hat(ξ); equals the current control.
    pub body_vel: AlgebraVector,
    pub d_control: AlgebraVector,
    pub d_multiplier: DualVector,
}

/// Time derivatives of one Hamiltonian agent.
#[derive(Debug, Clone)]
pub struct AgentDerivH {
    /// Body velocity, the maximizing control u*(μ).
    pub body_vel: AlgebraVector,
    pub d_momentum: DualVector,
}

/// PMP maximization map: u* = W⁻¹ μ|_r, zero on s — the unique maximizer
/// of ⟨μ, u⟩ − C(u) over controls supported on the actuated subspace.
pub fn optimal_control(mu: &DualVector, metric: &CostMetric, d: &Decomposition) -> AlgebraVector {
    // w_inv is supported on the r block, so the projection is implicit
    let _ = d;
    metric.apply_inverse(mu)
}

/// Legendre map μ = W u + λ = ∂C/∂u + λ.
pub fn legendre(
    u: &AlgebraVector,
    lambda: &DualVector,
    metric: &CostMetric,
    d: &Decomposition,
) -> Result<DualVector> {
    for k in d.s_indices() {
        if u[k] != 0.0 {
            return Err(Error::SupportViolation {
                context: "legendre: control off the actuated subspace",
            });
        }
    }
    for k in d.r_indices() {
        if lambda[k] != 0.0 {
            return Err(Error::SupportViolation {
                context: "legendre: multiplier off the unactuated dual",
            });
        }
    }
    Ok(metric.apply(u).add(lambda))
}

/// Inverse of [`legendre`]: u = W⁻¹ μ|_r, λ = μ|_s. Exact round trip.
pub fn legendre_inverse(
    mu: &DualVector,
    metric: &CostMetric,
    d: &Decomposition,
) -> (AlgebraVector, DualVector) {
    (metric.apply_inverse(mu), project_dual(mu, d, Part::S))
}

/// Split-form right-hand side (the Lagrangian necessary conditions):
/// W u̇ = [ad*_u(Wu + λ) + Σ Γ-term]|_r, λ̇ = [same]|_s, ġ = g·hat(u).
pub fn lagrangian_rhs(model: &SystemModel, agents: &[AgentStateL]) -> Result<Vec<AgentDerivL>> {
    model.check_agent_count(agents.len())?;
    let poses: Vec<GroupElement> = agents.iter().map(|a| a.pose).collect();
    let d = &model.decomp;
    agents
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let q = model.coupling_sum(&poses, i)?;
            let mu = legendre(&a.control, &a.multiplier, model.metric(i), d)?;
            let total = model.algebra.ad_star(&a.control, &mu)?.add(&q);
            let d_control = model.metric(i).apply_inverse(&project_dual(&total, d, Part::R));
            let d_multiplier = project_dual(&total, d, Part::S);
            Ok(AgentDerivL {
                body_vel: a.control.clone(),
                d_control,
                d_multiplier,
            })
        })
        .collect()
}

/// PMP right-hand side: u* = W⁻¹μ|_r, μ̇ = ad*_{u*} μ + Σ Γ-term,
/// ġ = g·hat(u*).
pub fn hamiltonian_rhs(model: &SystemModel, agents: &[AgentStateH]) -> Result<Vec<AgentDerivH>> {
    model.check_agent_count(agents.len())?;
    let poses: Vec<GroupElement> = agents.iter().map(|a| a.pose).collect();
    agents
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let q = model.coupling_sum(&poses, i)?;
            let u_star = optimal_control(&a.momentum, model.metric(i), &model.decomp);
            let d_momentum = model.algebra.ad_star(&u_star, &a.momentum)?.add(&q);
            Ok(AgentDerivH {
                body_vel: u_star,
                d_momentum,
            })
        })
        .collect()
}

/// Reduced Hamiltonian Σ_i [⟨μ_i, u*_i⟩ − C_i(u*_i)] − Σ_{edges} V_ij;
/// conserved along the oracle-mode flow.
pub fn reduced_hamiltonian(
    model: &SystemModel,
    poses: &[GroupElement],
    momenta: &[DualVector],
) -> Result<f64> {
    model.check_agent_count(poses.len())?;
    model.check_agent_count(momenta.len())?;
    let mut kinetic = 0.0;
    for (i, mu) in momenta.iter().enumerate() {
        let u_star = optimal_control(mu, model.metric(i), &model.decomp);
        kinetic += pairing(mu, &u_star)? - model.metric(i).cost(&u_star);
    }
    Ok(kinetic - total_potential(&model.graph, &model.params, poses)?)
}

/// [`reduced_hamiltonian`] on either formulation, mapping Lagrangian
/// variables through the Legendre transformation first.
pub fn reduced_hamiltonian_state(model: &SystemModel, state: &MultiAgentState) -> Result<f64> {
    let ham = state.to_hamiltonian(model)?;
    match &ham {
        MultiAgentState::Hamiltonian(agents) => {
            let poses: Vec<GroupElement> = agents.iter().map(|a| a.pose).collect();
            let momenta: Vec<DualVector> = agents.iter().map(|a| a.momentum.clone()).collect();
            reduced_hamiltonian(model, &poses, &momenta)
        }
        MultiAgentState::Lagrangian(_) => unreachable!(),
    }
}
