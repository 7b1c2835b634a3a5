//! Time integration of the reduced systems with pluggable steppers,
//! trajectory recording and runtime monitors.
//!
//! Three steppers are provided. `EulerMatrix` is the replication method:
//! entrywise Euler on the pose matrices, which slowly leaves the group (the
//! drift is monitored, and in replication mode deliberately not projected
//! away). `LieEuler` updates poses by the group exponential. `Rk4Chart` is
//! a fourth-order Munthe-Kaas method in the exponential chart at the
//! current pose, used for all conservation and convergence studies.

use crate::algebra::AlgebraVector;
use crate::dynamics::{
    hamiltonian_rhs, lagrangian_rhs, legendre, optimal_control, reduced_hamiltonian, AgentStateH,
    AgentStateL, Formulation, MultiAgentState, SystemModel,
};
use crate::error::{Error, Result};
use crate::interaction::min_pairwise_distance;
use crate::se2::{exp, hat, GroupElement};

/// Time-stepping method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegratorMethod {
    /// g ← g + h·g·hat(u), entrywise; algebra variables by explicit Euler.
    EulerMatrix,
    /// g ← g·exp(h·u); algebra variables by explicit Euler.
    LieEuler,
    /// Fourth-order Munthe-Kaas step in the exponential chart.
    Rk4Chart,
}

/// Integration plan: method, step size, step count, and whether poses are
/// re-projected onto the group after each step (off in replication mode).
#[derive(Debug, Clone, Copy)]
pub struct IntegratorSpec {
    pub method: IntegratorMethod,
    pub step_size: f64,
    pub steps: usize,
    pub reproject: bool,
}

impl IntegratorSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) {
            return Err(Error::config("integrator.step_size", "must be positive"));
        }
        if self.steps == 0 {
            return Err(Error::config("integrator.steps", "must be at least 1"));
        }
        Ok(())
    }
}

/// Scalar diagnostics recorded with every sample.
#[derive(Debug, Clone, Copy)]
pub struct Monitors {
    /// Minimum center distance over all agent pairs.
    pub min_distance: f64,
    /// Reduced Hamiltonian (kinetic − potential), through the Legendre map
    /// for Lagrangian runs.
    pub hamiltonian: f64,
    /// max_i ‖R_iᵀR_i − I‖_F, the group-constraint drift.
    pub ortho_defect: f64,
}

/// One recorded time sample.
#[derive(Debug, Clone)]
pub struct Sample {
    pub step: usize,
    pub time: f64,
    /// (x, y, θ) per agent.
    pub poses: Vec<(f64, f64, f64)>,
    /// Control per agent: the state u for Lagrangian runs, u*(μ) for
    /// Hamiltonian runs.
    pub controls: Vec<Vec<f64>>,
    /// Costate per agent: λ for Lagrangian runs, μ for Hamiltonian runs.
    pub costates: Vec<Vec<f64>>,
    pub monitors: Monitors,
}

/// How a run ended.
#[derive(Debug, Clone)]
pub enum RunOutcome {
    Completed,
    /// Stopped early; the error is a stamped `Collision` or
    /// `NonFiniteState`.
    Aborted(Error),
}

impl RunOutcome {
    pub fn is_completed(&self) -> bool {
        matches!(self, RunOutcome::Completed)
    }
}

/// Recorded trajectory: every `stride`-th step plus the final one, and the
/// outcome (partial records keep their cause).
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub formulation: Formulation,
    pub agent_count: usize,
    pub step_size: f64,
    pub samples: Vec<Sample>,
    pub outcome: RunOutcome,
}

impl TrajectoryRecord {
    /// Minimum of the recorded min-distance monitor.
    pub fn min_distance(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.monitors.min_distance)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest |h(t) − h(0)| over the record.
    pub fn hamiltonian_drift(&self) -> f64 {
        let Some(first) = self.samples.first() else {
            return 0.0;
        };
        let h0 = first.monitors.hamiltonian;
        self.samples
            .iter()
            .map(|s| (s.monitors.hamiltonian - h0).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_ortho_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.monitors.ortho_defect)
            .fold(0.0, f64::max)
    }
}

// Mutable integration state: poses plus the flattened algebra variables
// (per agent: u ++ λ for Lagrangian runs, μ for Hamiltonian runs).
#[derive(Debug, Clone)]
pub(crate) struct FlatState {
    pub formulation: Formulation,
    pub poses: Vec<GroupElement>,
    pub z: Vec<f64>,
}

fn block_len(formulation: Formulation, dim: usize) -> usize {
    match formulation {
        Formulation::Lagrangian => 2 * dim,
        Formulation::Hamiltonian => dim,
    }
}

impl FlatState {
    pub fn from_state(state: &MultiAgentState, dim: usize) -> Self {
        let formulation = state.formulation();
        let poses = state.poses();
        let mut z = Vec::with_capacity(state.agent_count() * block_len(formulation, dim));
        match state {
            MultiAgentState::Lagrangian(agents) => {
                for a in agents {
                    z.extend_from_slice(a.control.as_slice());
                    z.extend_from_slice(a.multiplier.as_slice());
                }
            }
            MultiAgentState::Hamiltonian(agents) => {
                for a in agents {
                    z.extend_from_slice(a.momentum.as_slice());
                }
            }
        }
        FlatState {
            formulation,
            poses,
            z,
        }
    }

    pub fn to_state(&self, dim: usize) -> MultiAgentState {
        let b = block_len(self.formulation, dim);
        match self.formulation {
            Formulation::Lagrangian => MultiAgentState::Lagrangian(
                self.poses
                    .iter()
                    .enumerate()
                    .map(|(i, p)| AgentStateL {
                        pose: *p,
                        control: AlgebraVector(self.z[i * b..i * b + dim].to_vec()),
                        multiplier: crate::algebra::DualVector(
                            self.z[i * b + dim..(i + 1) * b].to_vec(),
                        ),
                    })
                    .collect(),
            ),
            Formulation::Hamiltonian => MultiAgentState::Hamiltonian(
                self.poses
                    .iter()
                    .enumerate()
                    .map(|(i, p)| AgentStateH {
                        pose: *p,
                        momentum: crate::algebra::DualVector(self.z[i * b..(i + 1) * b].to_vec()),
                    })
                    .collect(),
            ),
        }
    }

    fn is_finite(&self) -> bool {
        self.poses
            .iter()
            .all(|p| p.matrix().iter().all(|v| v.is_finite()))
            && self.z.iter().all(|v| v.is_finite())
    }
}

// Body velocities and flattened z-derivatives at a state snapshot.
fn eval_rhs(
    model: &SystemModel,
    formulation: Formulation,
    poses: &[GroupElement],
    z: &[f64],
) -> Result<(Vec<AlgebraVector>, Vec<f64>)> {
    let n = model.dim();
    let b = block_len(formulation, n);
    match formulation {
        Formulation::Lagrangian => {
            let agents: Vec<AgentStateL> = poses
                .iter()
                .enumerate()
                .map(|(i, p)| AgentStateL {
                    pose: *p,
                    control: AlgebraVector(z[i * b..i * b + n].to_vec()),
                    multiplier: crate::algebra::DualVector(z[i * b + n..(i + 1) * b].to_vec()),
                })
                .collect();
            let derivs = lagrangian_rhs(model, &agents)?;
            let mut zdot = Vec::with_capacity(z.len());
            let mut vels = Vec::with_capacity(poses.len());
            for d in derivs {
                zdot.extend_from_slice(d.d_control.as_slice());
                zdot.extend_from_slice(d.d_multiplier.as_slice());
                vels.push(d.body_vel);
            }
            Ok((vels, zdot))
        }
        Formulation::Hamiltonian => {
            let agents: Vec<AgentStateH> = poses
                .iter()
                .enumerate()
                .map(|(i, p)| AgentStateH {
                    pose: *p,
                    momentum: crate::algebra::DualVector(z[i * b..(i + 1) * b].to_vec()),
                })
                .collect();
            let derivs = hamiltonian_rhs(model, &agents)?;
            let mut zdot = Vec::with_capacity(z.len());
            let mut vels = Vec::with_capacity(poses.len());
            for d in derivs {
                zdot.extend_from_slice(d.d_momentum.as_slice());
                vels.push(d.body_vel);
            }
            Ok((vels, zdot))
        }
    }
}

/// One entrywise-Euler step: g ← g + h·g·hat(u), z ← z + h·ż. The pose
/// update is NOT projected back to the group unless `reproject` is set.
pub(crate) fn step_euler_matrix(
    model: &SystemModel,
    state: &mut FlatState,
    h: f64,
    reproject: bool,
) -> Result<()> {
    let (vels, zdot) = eval_rhs(model, state.formulation, &state.poses, &state.z)?;
    for (i, g) in state.poses.iter_mut().enumerate() {
        let m = g.matrix() + g.matrix() * hat(&vels[i]) * h;
        *g = GroupElement::from_matrix_unchecked(m);
        if reproject {
            *g = g.reorthonormalized();
        }
    }
    for (zi, di) in state.z.iter_mut().zip(&zdot) {
        *zi += h * di;
    }
    Ok(())
}

/// One Lie-Euler step: g ← g·exp(h·u), z ← z + h·ż.
pub(crate) fn step_lie_euler(model: &SystemModel, state: &mut FlatState, h: f64) -> Result<()> {
    let (vels, zdot) = eval_rhs(model, state.formulation, &state.poses, &state.z)?;
    for (i, g) in state.poses.iter_mut().enumerate() {
        *g = g.compose(&exp(&vels[i].scaled(h))?);
    }
    for (zi, di) in state.z.iter_mut().zip(&zdot) {
        *zi += h * di;
    }
    Ok(())
}

// Chart velocity of the Munthe-Kaas step for body-velocity kinematics
// ġ = g·hat(u): with g = g0·exp(ζ), the chart ODE is
// ζ̇ = u + ½[ζ, u] + 1/12 [ζ, [ζ, u]] (series truncation sufficient for
// order 4).
fn chart_velocity(
    model: &SystemModel,
    zeta: &AlgebraVector,
    u: &AlgebraVector,
) -> Result<AlgebraVector> {
    let b1 = model.algebra.bracket(zeta, u)?;
    let b2 = model.algebra.bracket(zeta, &b1)?;
    Ok(u.add(&b1.scaled(0.5)).add(&b2.scaled(1.0 / 12.0)))
}

/// One RKMK4 step: classical RK4 on the chart ODE for the poses coupled
/// with RK4 on the algebra variables.
pub(crate) fn step_rk4_chart(model: &SystemModel, state: &mut FlatState, h: f64) -> Result<()> {
    let r = state.poses.len();
    let dim = model.dim();

    // evaluates (chart velocities, zdot) at chart offsets `zetas`, z values `zs`
    let stage = |zetas: &[AlgebraVector], zs: &[f64]| -> Result<(Vec<AlgebraVector>, Vec<f64>)> {
        let poses: Vec<GroupElement> = state
            .poses
            .iter()
            .zip(zetas)
            .map(|(g, zeta)| Ok(g.compose(&exp(zeta)?)))
            .collect::<Result<_>>()?;
        let (vels, zdot) = eval_rhs(model, state.formulation, &poses, zs)?;
        let cs = zetas
            .iter()
            .zip(&vels)
            .map(|(zeta, u)| chart_velocity(model, zeta, u))
            .collect::<Result<Vec<_>>>()?;
        Ok((cs, zdot))
    };

    let zero = vec![AlgebraVector::zero(dim); r];
    let offset = |cs: &[AlgebraVector], a: f64| -> Vec<AlgebraVector> {
        cs.iter().map(|c| c.scaled(a)).collect()
    };
    let zoff = |m: &[f64], a: f64| -> Vec<f64> {
        state.z.iter().zip(m).map(|(z, d)| z + a * d).collect()
    };

    let (c1, m1) = stage(&zero, &state.z)?;
    let (c2, m2) = stage(&offset(&c1, 0.5 * h), &zoff(&m1, 0.5 * h))?;
    let (c3, m3) = stage(&offset(&c2, 0.5 * h), &zoff(&m2, 0.5 * h))?;
    let (c4, m4) = stage(&offset(&c3, h), &zoff(&m3, h))?;

    for i in 0..r {
        let incr = c1[i]
            .add(&c2[i].scaled(2.0))
            .add(&c3[i].scaled(2.0))
            .add(&c4[i])
            .scaled(h / 6.0);
        state.poses[i] = state.poses[i].compose(&exp(&incr)?);
    }
    for (k, zi) in state.z.iter_mut().enumerate() {
        *zi += h / 6.0 * (m1[k] + 2.0 * m2[k] + 2.0 * m3[k] + m4[k]);
    }
    Ok(())
}

fn step(model: &SystemModel, state: &mut FlatState, spec: &IntegratorSpec) -> Result<()> {
    match spec.method {
        IntegratorMethod::EulerMatrix => {
            step_euler_matrix(model, state, spec.step_size, spec.reproject)
        }
        IntegratorMethod::LieEuler => {
            step_lie_euler(model, state, spec.step_size)?;
            if spec.reproject {
                for g in &mut state.poses {
                    *g = g.reorthonormalized();
                }
            }
            Ok(())
        }
        IntegratorMethod::Rk4Chart => {
            step_rk4_chart(model, state, spec.step_size)?;
            if spec.reproject {
                for g in &mut state.poses {
                    *g = g.reorthonormalized();
                }
            }
            Ok(())
        }
    }
}

// Momenta of the current state (through the Legendre map for Lagrangian
// runs), for the Hamiltonian monitor.
fn current_momenta(
    model: &SystemModel,
    state: &FlatState,
) -> Result<Vec<crate::algebra::DualVector>> {
    let n = model.dim();
    let b = block_len(state.formulation, n);
    (0..state.poses.len())
        .map(|i| match state.formulation {
            Formulation::Lagrangian => legendre(
                &AlgebraVector(state.z[i * b..i * b + n].to_vec()),
                &crate::algebra::DualVector(state.z[i * b + n..(i + 1) * b].to_vec()),
                model.metric(i),
                &model.decomp,
            ),
            Formulation::Hamiltonian => Ok(crate::algebra::DualVector(
                state.z[i * b..(i + 1) * b].to_vec(),
            )),
        })
        .collect()
}

fn sample(model: &SystemModel, state: &FlatState, step: usize, time: f64) -> Result<Sample> {
    let n = model.dim();
    let b = block_len(state.formulation, n);
    let momenta = current_momenta(model, state)?;
    let hamiltonian = reduced_hamiltonian(model, &state.poses, &momenta)?;
    let controls = (0..state.poses.len())
        .map(|i| match state.formulation {
            Formulation::Lagrangian => state.z[i * b..i * b + n].to_vec(),
            Formulation::Hamiltonian => {
                optimal_control(&momenta[i], model.metric(i), &model.decomp)
                    .as_slice()
                    .to_vec()
            }
        })
        .collect();
    let costates = (0..state.poses.len())
        .map(|i| match state.formulation {
            Formulation::Lagrangian => state.z[i * b + n..(i + 1) * b].to_vec(),
            Formulation::Hamiltonian => state.z[i * b..(i + 1) * b].to_vec(),
        })
        .collect();
    Ok(Sample {
        step,
        time,
        poses: state.poses.iter().map(|p| p.pose()).collect(),
        controls,
        costates,
        monitors: Monitors {
            min_distance: min_pairwise_distance(&state.poses),
            hamiltonian,
            ortho_defect: state
                .poses
                .iter()
                .map(|p| p.orthogonality_defect())
                .fold(0.0, f64::max),
        },
    })
}

/// Integrate `spec.steps` steps from `initial`, recording every
/// `stride`-th step and the final one. Deterministic given its inputs;
/// stops at the first collision or non-finite state, returning the partial
/// record with the stamped cause.
pub fn run(
    model: &SystemModel,
    initial: &MultiAgentState,
    spec: &IntegratorSpec,
    stride: usize,
) -> Result<TrajectoryRecord> {
    spec.validate()?;
    if stride == 0 {
        return Err(Error::config("output.stride", "must be at least 1"));
    }
    if initial.agent_count() != model.agent_count() {
        return Err(Error::DimensionMismatch {
            expected: model.agent_count(),
            got: initial.agent_count(),
        });
    }

    let mut state = FlatState::from_state(initial, model.dim());
    let mut samples = Vec::with_capacity(spec.steps / stride + 2);
    let h = spec.step_size;

    // initial sample; a collision here is the "started inside the shell" case
    match sample(model, &state, 0, 0.0) {
        Ok(s) => samples.push(s),
        Err(e) => {
            return Ok(TrajectoryRecord {
                formulation: state.formulation,
                agent_count: state.poses.len(),
                step_size: h,
                samples,
                outcome: RunOutcome::Aborted(e.at_step(0.0, 0)),
            })
        }
    }

    for k in 1..=spec.steps {
        let t_prev = (k - 1) as f64 * h;
        if let Err(e) = step(model, &mut state, spec) {
            return Ok(TrajectoryRecord {
                formulation: state.formulation,
                agent_count: state.poses.len(),
                step_size: h,
                samples,
                outcome: RunOutcome::Aborted(e.at_step(t_prev, k - 1)),
            });
        }
        let t = k as f64 * h;
        if !state.is_finite() {
            return Ok(TrajectoryRecord {
                formulation: state.formulation,
                agent_count: state.poses.len(),
                step_size: h,
                samples,
                outcome: RunOutcome::Aborted(
                    Error::NonFiniteState {
                        time: t,
                        step: k,
                        context: "integration state",
                    },
                ),
            });
        }
        if k % stride == 0 || k == spec.steps {
            match sample(model, &state, k, t) {
                Ok(s) => samples.push(s),
                Err(e) => {
                    return Ok(TrajectoryRecord {
                        formulation: state.formulation,
                        agent_count: state.poses.len(),
                        step_size: h,
                        samples,
                        outcome: RunOutcome::Aborted(e.at_step(t, k)),
                    })
                }
            }
        }
    }

    Ok(TrajectoryRecord {
        formulation: state.formulation,
        agent_count: state.poses.len(),
        step_size: h,
        samples,
        outcome: RunOutcome::Completed,
    })
}

/// Final integration state of a run that completed (convenience for tests
/// and the equivalence studies).
pub fn integrate_state(
    model: &SystemModel,
    initial: &MultiAgentState,
    spec: &IntegratorSpec,
) -> Result<MultiAgentState> {
    spec.validate()?;
    let mut state = FlatState::from_state(initial, model.dim());
    for k in 1..=spec.steps {
        step(model, &mut state, spec).map_err(|e| e.at_step((k - 1) as f64 * spec.step_size, k - 1))?;
        if !state.is_finite() {
            return Err(Error::NonFiniteState {
                time: k as f64 * spec.step_size,
                step: k,
                context: "integration state",
            });
        }
    }
    Ok(state.to_state(model.dim()))
}
