//! Projection of the target onto the residual's zero sublevel set by an
//! expanding-ball search with certified radius increments.
//!
//! Starting from the target, the ball around it grows by radii that the
//! eps-Lipschitz bounds certify cannot skip over the sublevel set. The
//! residual is minimized on each new boundary sphere, the slack parameter
//! shrinks geometrically whenever the residual comes close to it, and the
//! run stops once the residual of the current iterate falls below the
//! stopping tolerance (or exactly reaches the set).

mod argmin;
mod chebyshev;

pub use argmin::{circle_argmin, sphere_argmin, SphereEval};
pub use chebyshev::{chebyshev_center, smallest_enclosing_circle, EnclosingCircle};

use crate::bounds::lip_residual;
use crate::error::{Error, Result};
use crate::geometry::{Branch, ImpactPoint3, ShotAngles};
use crate::residual::{Residual, Scenario, Task};
use crate::scalar::{lit, Real};

/// Tunable parameters of one projection run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams<T> {
    /// Initial slack of the eps-Lipschitz certificates.
    pub eps0: T,
    /// Near-threshold factor: the slack shrinks when the residual drops
    /// below `ε_k(1 + γ)`.
    pub gamma: T,
    /// Geometric shrink factor of the slack.
    pub lambda: T,
    /// Stopping residual; a run converges when the residual goes below it.
    pub eps_star: T,
    /// Optional stop on the displacement between consecutive recorded
    /// near-threshold iterates.
    pub eps_q: Option<T>,
    /// Iteration cap.
    pub max_iter: usize,
    /// Samples per angular dimension of the boundary search.
    pub samples: usize,
    /// Zoom passes refining the boundary argmin around the best cell.
    pub refine_levels: usize,
    /// The slack is never shrunk below `eps_floor_factor · eps0`.
    pub eps_floor_factor: T,
    /// Abandon the branch once the ball radius exceeds this value
    /// (dominance cut used for the second branch).
    pub radius_cap: Option<T>,
    /// Record the full per-iteration trace.
    pub record_trace: bool,
}

impl<T: Real> SolverParams<T> {
    /// Defaults for the given task. The planar search is a circle and can
    /// afford a dense grid; the spatial searches run hundreds of
    /// thousands of boundary minimizations and use a coarser grid with
    /// zoom refinement instead.
    pub fn new(task: Task, eps0: T) -> Self {
        let half = lit::<T>(0.5);
        Self {
            eps0,
            gamma: half,
            lambda: half,
            eps_star: eps0,
            eps_q: None,
            max_iter: 1_000_000,
            samples: match task {
                Task::Planar => 2048,
                Task::Spatial | Task::Terrain => 24,
            },
            refine_levels: 3,
            eps_floor_factor: lit(1e-6),
            radius_cap: None,
            record_trace: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps0 > T::zero()) {
            return Err(Error::InvalidScenario(format!("ε₀ must be positive, got {}", self.eps0)));
        }
        for (name, v) in [("γ", self.gamma), ("λ", self.lambda), ("ε*", self.eps_star)] {
            if !(v > T::zero() && v < T::one()) {
                return Err(Error::InvalidScenario(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        if self.samples < 4 {
            return Err(Error::InvalidScenario("boundary search needs at least 4 samples".into()));
        }
        Ok(())
    }
}

/// Why a projection run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Residual of the returned point is below the stopping tolerance.
    Converged,
    /// The slack reached its floor (or the iterates stalled) before the
    /// residual did.
    ResidualFloor,
    /// Iteration cap reached; the best point seen is returned.
    IterCap,
    /// The boundary sphere no longer meets the reachable set, or the ball
    /// provably cannot contain a better point than the other branch's.
    InfeasibleBranch,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::ResidualFloor => "residual_floor",
            SolveStatus::IterCap => "iter_cap",
            SolveStatus::InfeasibleBranch => "infeasible_branch",
        }
    }
}

/// Outcome of one branch run.
#[derive(Debug, Clone)]
pub struct SolveResult<T> {
    pub point: ImpactPoint3<T>,
    pub angles: Option<ShotAngles<T>>,
    pub branch: Branch,
    pub residual: T,
    pub distance: T,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Terrain task only: a clearance minimum vanished within tolerance,
    /// so the sight line or the arc grazes the terrain surface.
    pub grazing: bool,
}

/// One iteration of the run.
#[derive(Debug, Clone, Copy)]
pub struct IterRecord<T> {
    pub k: usize,
    pub eps: T,
    pub residual: T,
    /// Radius increment when this iteration expanded the ball.
    pub radius_inc: Option<T>,
    pub cum_radius: T,
    pub point: ImpactPoint3<T>,
}

/// Near-threshold iterate recorded before each slack shrink.
#[derive(Debug, Clone, Copy)]
pub struct QRecord<T> {
    pub k: usize,
    pub point: ImpactPoint3<T>,
    pub residual: T,
}

#[derive(Debug, Clone)]
pub struct SolverTrace<T> {
    pub iterations: Vec<IterRecord<T>>,
    pub q_points: Vec<QRecord<T>>,
}

impl<T> Default for SolverTrace<T> {
    fn default() -> Self {
        Self { iterations: Vec::new(), q_points: Vec::new() }
    }
}

/// Branch result together with its trace.
#[derive(Debug, Clone)]
pub struct BranchOutcome<T> {
    pub result: SolveResult<T>,
    pub trace: SolverTrace<T>,
}

/// Both branch outcomes and the index of the better converged one.
#[derive(Debug, Clone)]
pub struct Solution<T> {
    pub branches: Vec<BranchOutcome<T>>,
    pub best: Option<usize>,
}

impl<T: Real> Solution<T> {
    pub fn best_result(&self) -> Option<&SolveResult<T>> {
        self.best.map(|i| &self.branches[i].result)
    }
}

/// Projects the target onto the feasible set along one inverse branch.
pub fn project_branch<T: Real>(
    task: Task,
    branch: Branch,
    target: ImpactPoint3<T>,
    scenario: &Scenario<T>,
    params: &SolverParams<T>,
) -> Result<BranchOutcome<T>> {
    params.validate()?;
    let residual = Residual::new(task, branch, scenario, target);
    if !residual.in_set(target) {
        return Err(Error::InvalidScenario(format!(
            "target ({}, {}, {}) lies outside the reachable set",
            target.x, target.y, target.z
        )));
    }

    let one = T::one();
    let sqrt_n = lit::<T>((task.dim() as f64).sqrt());
    let eps_floor = params.eps_floor_factor * params.eps0;
    let mut eps = params.eps0;
    let mut point = target;
    let mut value = residual.eval(point)?;
    let mut cum_radius = T::zero();
    let mut k = 0usize;
    let mut trace = SolverTrace::default();
    trace.q_points.push(QRecord { k: 0, point, residual: value });
    let mut best = (value, point);
    let mut expanded_since_q = false;
    // The certified bound depends only on the slack; cache it per slack.
    let mut lip_cache: Option<(T, T)> = None;

    let finish = |status: SolveStatus,
                  point: ImpactPoint3<T>,
                  value: T,
                  k: usize,
                  trace: SolverTrace<T>|
     -> Result<BranchOutcome<T>> {
        let angles = residual.angles(point).ok();
        let grazing = match residual.clearances(point)? {
            Some((sight, arc)) => {
                let tol = lit::<T>(1e-6);
                sight.abs() <= tol || arc.abs() <= tol
            }
            None => false,
        };
        Ok(BranchOutcome {
            result: SolveResult {
                point,
                angles,
                branch,
                residual: value,
                distance: point.dist(&target),
                iterations: k,
                status,
                grazing,
            },
            trace,
        })
    };

    loop {
        if params.record_trace {
            trace.iterations.push(IterRecord {
                k,
                eps,
                residual: value,
                radius_inc: None,
                cum_radius,
                point,
            });
        }

        // Stopping checks on the freshly evaluated iterate. A non-positive
        // residual is an exact hit; below ε* the point is accepted as the
        // approximate projection.
        if value < params.eps_star {
            return finish(SolveStatus::Converged, point, value, k, trace);
        }
        if k >= params.max_iter {
            return finish(SolveStatus::IterCap, best.1, best.0, k, trace);
        }

        if value < eps * (one + params.gamma) {
            // Near-threshold iterate: record it and shrink the slack. The
            // displacement stop compares records separated by at least
            // one expansion.
            if let Some(eps_q) = params.eps_q {
                if let Some(prev) = trace.q_points.last() {
                    if expanded_since_q && prev.point.dist(&point) < eps_q {
                        trace.q_points.push(QRecord { k, point, residual: value });
                        return finish(SolveStatus::ResidualFloor, best.1, best.0, k, trace);
                    }
                }
            }
            trace.q_points.push(QRecord { k, point, residual: value });
            expanded_since_q = false;
            eps = if value <= eps { params.lambda * value } else { params.lambda * eps };
            if eps < eps_floor {
                return finish(SolveStatus::ResidualFloor, best.1, best.0, k, trace);
            }
        } else {
            // Expand the ball by the certified radius and minimize the
            // residual on the new boundary.
            let lip = match lip_cache {
                Some((cached_eps, l)) if cached_eps == eps => l,
                _ => {
                    let l = lip_residual(task, eps, scenario)?.value;
                    lip_cache = Some((eps, l));
                    l
                }
            };
            let r_k = (value - eps) / (sqrt_n * lip);
            cum_radius += r_k;
            if let Some(cap) = params.radius_cap {
                if cum_radius > cap {
                    return finish(SolveStatus::InfeasibleBranch, best.1, best.0, k, trace);
                }
            }
            let eval =
                |p: ImpactPoint3<T>, cutoff: T| -> Option<T> { residual.eval_in_set(p, cutoff) };
            // Sub-cell precision only matters where the value approaches
            // the branch or stopping thresholds.
            let refine_below = Some(
                lit::<T>(1.2) * (eps * (one + params.gamma)).max(params.eps_star),
            );
            let found = match task {
                Task::Planar => circle_argmin(
                    target,
                    cum_radius,
                    &eval,
                    params.samples,
                    params.refine_levels,
                    refine_below,
                ),
                Task::Spatial | Task::Terrain => sphere_argmin(
                    target,
                    cum_radius,
                    &eval,
                    params.samples,
                    params.refine_levels,
                    refine_below,
                ),
            };
            match found {
                None => return finish(SolveStatus::InfeasibleBranch, best.1, best.0, k, trace),
                Some((p, v)) => {
                    point = p;
                    value = v;
                    expanded_since_q = true;
                    if params.record_trace {
                        if let Some(last) = trace.iterations.last_mut() {
                            last.radius_inc = Some(r_k);
                        }
                    }
                }
            }
        }

        if value < best.0 {
            best = (value, point);
        }
        k += 1;
    }
}

/// Runs both inverse branches and keeps the converged result nearer to
/// the target. The second branch is abandoned once its ball radius
/// exceeds the first branch's distance, which cannot hide a better
/// solution.
pub fn solve<T: Real>(
    task: Task,
    target: ImpactPoint3<T>,
    scenario: &Scenario<T>,
    params: &SolverParams<T>,
) -> Result<Solution<T>> {
    let low = project_branch(task, Branch::Low, target, scenario, params)?;
    let mut high_params = params.clone();
    if low.result.status == SolveStatus::Converged {
        let cap = low.result.distance;
        high_params.radius_cap = Some(match high_params.radius_cap {
            Some(c) => c.min(cap),
            None => cap,
        });
    }
    let high = project_branch(task, Branch::High, target, scenario, &high_params)?;

    let branches = vec![low, high];
    let mut best: Option<usize> = None;
    for (i, b) in branches.iter().enumerate() {
        if b.result.status != SolveStatus::Converged {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(j) if b.result.distance < branches[j].result.distance => Some(i),
            keep => keep,
        };
    }
    Ok(Solution { branches, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::VisibilityCone;
    use crate::geometry::{GravityContext, ReachableSetParams};
    use crate::residual::Weights;
    use crate::terrain::ClearanceGrid;

    fn planar_scenario() -> Scenario<f64> {
        let ctx = GravityContext::standard(180.0).unwrap();
        Scenario::new(
            ctx,
            ReachableSetParams::planar(&ctx, 100.0).unwrap(),
            VisibilityCone::e1().unwrap(),
            Weights::defaults(Task::Planar),
            None,
            ClearanceGrid::default(),
        )
        .unwrap()
    }

    #[test]
    fn feasible_target_returns_immediately() {
        let s = planar_scenario();
        // ψ = 37° is inside the cone band; its impact point is feasible
        // through the flat branch.
        let r = s.ctx.v_sq * (2.0 * 37f64.to_radians()).sin();
        let m = ImpactPoint3::new(r, 0.0, 0.0);
        let params = SolverParams::new(Task::Planar, 0.01);
        let out = project_branch(Task::Planar, Branch::Low, m, &s, &params).unwrap();
        assert_eq!(out.result.status, SolveStatus::Converged);
        assert_eq!(out.result.iterations, 0);
        assert_eq!(out.result.distance, 0.0);
        assert!(out.result.residual <= 0.0);
    }

    #[test]
    fn projects_toward_cone_band() {
        let s = planar_scenario();
        let m = ImpactPoint3::new(2700.0, 0.0, 0.0);
        let params = SolverParams::new(Task::Planar, 0.01);
        let out = project_branch(Task::Planar, Branch::Low, m, &s, &params).unwrap();
        assert_eq!(out.result.status, SolveStatus::Converged);
        assert!(out.result.residual < 0.01);
        let psi = out.result.angles.unwrap().psi.to_degrees();
        assert!((psi - 34.4).abs() < 0.5, "ψ = {psi}°");
        assert!((out.result.point.x - 3081.4).abs() < 20.0, "x = {}", out.result.point.x);
    }

    #[test]
    fn trace_invariants_hold() {
        let s = planar_scenario();
        let m = ImpactPoint3::new(2700.0, 0.0, 0.0);
        let params = SolverParams::new(Task::Planar, 0.05);
        let out = project_branch(Task::Planar, Branch::Low, m, &s, &params).unwrap();
        let trace = &out.trace;
        assert!(!trace.iterations.is_empty());
        let mut prev_eps = f64::INFINITY;
        let mut cum = 0.0;
        for rec in &trace.iterations {
            assert!(rec.eps <= prev_eps + 1e-15, "slack must not grow");
            prev_eps = rec.eps;
            if let Some(r) = rec.radius_inc {
                assert!(r > 0.0, "expansion radius must be positive");
                cum += r;
            }
            assert!((rec.cum_radius + rec.radius_inc.unwrap_or(0.0) - cum).abs() < 1e-9);
        }
        // Expansion iterates sit on the sphere of their cumulative radius.
        for pair in trace.iterations.windows(2) {
            if pair[0].radius_inc.is_some() {
                let d = pair[1].point.dist(&m);
                let want = pair[0].cum_radius + pair[0].radius_inc.unwrap();
                assert!((d - want).abs() / want.max(1.0) < 1e-9, "d = {d}, want = {want}");
            }
        }
    }

    #[test]
    fn high_branch_infeasible_under_low_cone() {
        // The cone band tops out at 40°, which the lofted branch of a far
        // planar target cannot satisfy inside the reachable set, so the
        // expanding ball eventually leaves it.
        let s = planar_scenario();
        let m = ImpactPoint3::new(2700.0, 0.0, 0.0);
        let mut params = SolverParams::new(Task::Planar, 0.05);
        params.samples = 512;
        let out = project_branch(Task::Planar, Branch::High, m, &s, &params).unwrap();
        assert_eq!(out.result.status, SolveStatus::InfeasibleBranch);
    }

    #[test]
    fn solve_picks_converged_branch() {
        let s = planar_scenario();
        let m = ImpactPoint3::new(2700.0, 0.0, 0.0);
        let mut params = SolverParams::new(Task::Planar, 0.05);
        params.samples = 1024;
        let sol = solve(Task::Planar, m, &s, &params).unwrap();
        let best = sol.best_result().expect("low branch converges");
        assert_eq!(best.branch, Branch::Low);
        assert_eq!(sol.branches.len(), 2);
        // Dominance cut kicks in quickly for the hopeless branch.
        assert!(sol.branches[1].result.status != SolveStatus::Converged);
    }

    #[test]
    fn target_outside_reachable_set_rejected() {
        let s = planar_scenario();
        let m = ImpactPoint3::new(50.0, 0.0, 0.0);
        let params = SolverParams::new(Task::Planar, 0.05);
        assert!(matches!(
            project_branch(Task::Planar, Branch::Low, m, &s, &params),
            Err(Error::InvalidScenario(_))
        ));
    }

    #[test]
    fn iter_cap_returns_best_seen() {
        let s = planar_scenario();
        let m = ImpactPoint3::new(110.0, 0.0, 0.0);
        let mut params = SolverParams::new(Task::Planar, 0.01);
        params.max_iter = 5;
        let out = project_branch(Task::Planar, Branch::Low, m, &s, &params).unwrap();
        assert_eq!(out.result.status, SolveStatus::IterCap);
        assert_eq!(out.result.iterations, 5);
        assert!(out.result.residual.is_finite());
    }
}
