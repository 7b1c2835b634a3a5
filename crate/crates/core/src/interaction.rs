//! Interaction graph and collision-avoidance potentials: barrier evaluation,
//! body-frame coupling forces, and their split into actuated/unactuated
//! parts.
//!
//! Two coupling routes exist. `Oracle` differentiates the barrier exactly
//! (closed form, validated against finite differences of the potential).
//! `Paper` replays the published closed-form coefficients verbatim; they
//! differ from the derivative of the published potential by a 1/16 factor,
//! a missing heading dependence, and the sign of the unactuated component,
//! and are kept only for figure replication.

use crate::algebra::{Decomposition, DualVector, Part, project_dual};
use crate::error::{Error, Result};
use crate::se2::GroupElement;
use std::collections::{BTreeMap, BTreeSet};

/// Undirected, static interaction topology over `r` agents.
#[derive(Debug, Clone)]
pub struct InteractionGraph {
    count: usize,
    edges: BTreeSet<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

impl InteractionGraph {
    pub fn new(count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if a >= count || b >= count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a},{b}) out of range for {count} agents"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut neighbors = vec![Vec::new(); count];
        for &(a, b) in &set {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        Ok(InteractionGraph {
            count,
            edges: set,
            neighbors,
        })
    }

    /// Complete graph K_r.
    pub fn complete(count: usize) -> Self {
        let mut edges = Vec::new();
        for i in 0..count {
            for j in (i + 1)..count {
                edges.push((i, j));
            }
        }
        Self::new(count, &edges).expect("complete graph is valid")
    }

    pub fn agent_count(&self) -> usize {
        self.count
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, i: usize) -> Result<&[usize]> {
        self.neighbors
            .get(i)
            .map(|v| v.as_slice())
            .ok_or(Error::AgentIndex {
                index: i,
                count: self.count,
            })
    }

    /// BFS connectivity over the whole vertex set.
    pub fn is_connected(&self) -> bool {
        if self.count == 0 {
            return true;
        }
        let mut seen = vec![false; self.count];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut visited = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.neighbors[v] {
                if !seen[w] {
                    seen[w] = true;
                    visited += 1;
                    stack.push(w);
                }
            }
        }
        visited == self.count
    }
}

/// Barrier parameters of a single unordered edge.
#[derive(Debug, Clone, Copy)]
pub struct EdgeParams {
    /// Potential strength σ > 0.
    pub sigma: f64,
    /// Prescribed center distance d > 0; the barrier diverges there.
    pub distance: f64,
}

/// Per-edge barrier parameters, stored on unordered pairs so the symmetry
/// V_ij = V_ji holds by construction.
#[derive(Debug, Clone)]
pub struct PotentialParams {
    edges: BTreeMap<(usize, usize), EdgeParams>,
    /// Monitored safety radius; diagnostic only, not a force term.
    pub safety_radius: f64,
}

impl PotentialParams {
    pub fn uniform(
        graph: &InteractionGraph,
        sigma: f64,
        distance: f64,
        safety_radius: f64,
    ) -> Result<Self> {
        let mut p = PotentialParams {
            edges: BTreeMap::new(),
            safety_radius,
        };
        for (a, b) in graph.edges() {
            p.set_edge(a, b, EdgeParams { sigma, distance })?;
        }
        Ok(p)
    }

    pub fn set_edge(&mut self, i: usize, j: usize, params: EdgeParams) -> Result<()> {
        if i == j {
            return Err(Error::InvalidGraph("edge parameters on a self-loop".into()));
        }
        if params.sigma <= 0.0 || params.distance <= 0.0 {
            return Err(Error::InvalidGraph(format!(
                "edge ({i},{j}): sigma and distance must be positive"
            )));
        }
        self.edges.insert((i.min(j), i.max(j)), params);
        Ok(())
    }

    pub fn edge(&self, i: usize, j: usize) -> Result<EdgeParams> {
        self.edges
            .get(&(i.min(j), i.max(j)))
            .copied()
            .ok_or_else(|| Error::InvalidGraph(format!("no parameters for edge ({i},{j})")))
    }
}

// Squared center distance minus d², the barrier denominator; collision error
// when it is not strictly positive. Caller supplies (i, j) for reporting.
fn shell_gap(e: &EdgeParams, gi: &GroupElement, gj: &GroupElement, i: usize, j: usize) -> Result<f64> {
    let dx = gi.x() - gj.x();
    let dy = gi.y() - gj.y();
    let sq = dx * dx + dy * dy;
    let gap = sq - e.distance * e.distance;
    if gap <= 0.0 {
        return Err(Error::Collision {
            i,
            j,
            time: f64::NAN,
            step: 0,
            dist: sq.sqrt(),
            min_dist: e.distance,
        });
    }
    Ok(gap)
}

/// Barrier potential V_ij = σ / (2 ((x_i−x_j)² + (y_i−y_j)² − d²)).
pub fn potential(e: &EdgeParams, gi: &GroupElement, gj: &GroupElement) -> Result<f64> {
    let gap = shell_gap(e, gi, gj, 0, 0)?;
    Ok(e.sigma / (2.0 * gap))
}

/// Closed-form body-frame pullback of ∂V_ij/∂g_i at g_i.
///
/// With Δ = p_i − p_j, D the shell gap and (c, s) = (cos θ_i, sin θ_i):
/// component e¹ is zero (rotating in place moves no mass center),
/// e² carries −σ (Δx c + Δy s)/D², e³ carries −σ (−Δx s + Δy c)/D².
/// Must agree with central finite differences of the potential along
/// g_i · exp(t e_k) to 1e-6 relative error.
pub fn coupling_force(e: &EdgeParams, gi: &GroupElement, gj: &GroupElement) -> Result<DualVector> {
    let gap = shell_gap(e, gi, gj, 0, 0)?;
    let dx = gi.x() - gj.x();
    let dy = gi.y() - gj.y();
    let m = gi.matrix();
    let (c, s) = (m[(0, 0)], m[(1, 0)]);
    let scale = -e.sigma / (gap * gap);
    Ok(DualVector(vec![
        0.0,
        scale * (dx * c + dy * s),
        scale * (-dx * s + dy * c),
    ]))
}

/// Published closed-form coefficients (Γ_ij on e², Γ̃_ij on e³), verbatim.
pub fn paper_gamma_coefficients(
    e: &EdgeParams,
    gi: &GroupElement,
    gj: &GroupElement,
) -> Result<(f64, f64)> {
    let gap = shell_gap(e, gi, gj, 0, 0)?;
    let denom = 16.0 * gap * gap;
    let gamma = -e.sigma * (gj.x() - gi.x()) / denom;
    let gamma_tilde = -e.sigma * (gj.y() - gi.y()) / denom;
    Ok((gamma, gamma_tilde))
}

/// Selects which coupling term feeds the reduced equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaMode {
    /// Exact gradient of the barrier (default; conservative dynamics).
    Oracle,
    /// Published coefficients, quirks included, for figure replication.
    Paper,
}

/// Per-edge vector added to the coadjoint term of the momentum equation.
///
/// In `Oracle` mode this is the coupling force itself. In `Paper` mode the
/// components are arranged so that the integrated equations reproduce the
/// published system: μ̇² picks up −Γ_ij and μ̇³ picks up +Γ̃_ij.
pub fn coupling_term(
    mode: GammaMode,
    e: &EdgeParams,
    gi: &GroupElement,
    gj: &GroupElement,
) -> Result<DualVector> {
    match mode {
        GammaMode::Oracle => coupling_force(e, gi, gj),
        GammaMode::Paper => {
            let (gamma, gamma_tilde) = paper_gamma_coefficients(e, gi, gj)?;
            Ok(DualVector(vec![0.0, -gamma, gamma_tilde]))
        }
    }
}

/// Split a coupling covector into its r* and s* parts (Γ, Γ̃).
pub fn gamma_split(force: &DualVector, d: &Decomposition) -> (DualVector, DualVector) {
    (
        project_dual(force, d, Part::R),
        project_dual(force, d, Part::S),
    )
}

/// Σ over the neighbors of agent `i` of a per-edge covector evaluator;
/// neighbor order is fixed (ascending index) for determinism.
pub fn neighbor_sum<F>(
    graph: &InteractionGraph,
    params: &PotentialParams,
    poses: &[GroupElement],
    i: usize,
    dim: usize,
    f: F,
) -> Result<DualVector>
where
    F: Fn(&EdgeParams, &GroupElement, &GroupElement) -> Result<DualVector>,
{
    if i >= poses.len() {
        return Err(Error::AgentIndex {
            index: i,
            count: poses.len(),
        });
    }
    let mut sum = DualVector::zero(dim);
    for &j in graph.neighbors(i)? {
        let e = params.edge(i, j)?;
        let term = f(&e, &poses[i], &poses[j]).map_err(|err| err.with_pair(i, j))?;
        sum = sum.add(&term);
    }
    Ok(sum)
}

/// Total barrier energy ½ Σ_i Σ_{j∈N_i} V_ij = Σ_{edges} V_ij.
pub fn total_potential(
    graph: &InteractionGraph,
    params: &PotentialParams,
    poses: &[GroupElement],
) -> Result<f64> {
    let mut sum = 0.0;
    for (a, b) in graph.edges() {
        let e = params.edge(a, b)?;
        sum += potential(&e, &poses[a], &poses[b]).map_err(|err| err.with_pair(a, b))?;
    }
    Ok(sum)
}

/// Minimum center distance over all unordered agent pairs.
pub fn min_pairwise_distance(poses: &[GroupElement]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..poses.len() {
        for j in (i + 1)..poses.len() {
            let dx = poses[i].x() - poses[j].x();
            let dy = poses[i].y() - poses[j].y();
            best = best.min((dx * dx + dy * dy).sqrt());
        }
    }
    best
}

impl Error {
    // fill agent indices into a collision raised by an edge evaluator
    fn with_pair(self, a: usize, b: usize) -> Error {
        match self {
            Error::Collision {
                time,
                step,
                dist,
                min_dist,
                ..
            } => Error::Collision {
                i: a,
                j: b,
                time,
                step,
                dist,
                min_dist,
            },
            other => other,
        }
    }
}
