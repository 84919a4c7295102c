//! The aggregated residual whose zero sublevel set is each task's
//! feasible set: a weighted max of cone violation, range and floor
//! margins, surface contact and the two clearance minima.

use crate::cone::VisibilityCone;
use crate::error::{Error, Result};
use crate::geometry::{
    azimuth, in_reachable_planar, in_reachable_spatial, inverse_elevation_planar,
    inverse_elevation_spatial, Branch, GravityContext, ImpactPoint3, ReachableSetParams,
    ShotAngles,
};
use crate::scalar::{lit, Real};
use crate::terrain::{segment_clearance, trajectory_clearance, ClearanceGrid, TerrainField};

/// The three problem variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    /// Target and impact point in the horizon plane.
    Planar,
    /// Target anywhere in space, trajectory point free.
    Spatial,
    /// Target on the terrain surface, impact on the surface, sight line
    /// and arc clear of the terrain interior.
    Terrain,
}

impl Task {
    /// Dimension of the search space.
    pub fn dim(self) -> usize {
        match self {
            Task::Planar => 2,
            Task::Spatial | Task::Terrain => 3,
        }
    }

    pub fn is_spatial(self) -> bool {
        !matches!(self, Task::Planar)
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Task::Planar => write!(f, "I"),
            Task::Spatial => write!(f, "II.a"),
            Task::Terrain => write!(f, "II.b"),
        }
    }
}

/// Positive weight per residual component. Unused components are ignored
/// by the tasks that do not have them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights<T> {
    /// Cone violation through the inverse maps.
    pub cone: T,
    /// Minimum downrange margin `κ − x`.
    pub range: T,
    /// Floor margin `z_min − z` (spatial free task).
    pub floor: T,
    /// Surface contact `|H|` (terrain task).
    pub surface: T,
    /// Sight-segment clearance (terrain task).
    pub sight: T,
    /// Trajectory-arc clearance (terrain task).
    pub arc: T,
}

impl<T: Real> Weights<T> {
    /// Component weights balancing the per-component accuracies of the
    /// shared stopping tolerance.
    pub fn defaults(task: Task) -> Self {
        let one = T::one();
        let hundredth = lit::<T>(0.01);
        let thousandth = lit::<T>(0.001);
        match task {
            Task::Planar => Self {
                cone: one,
                range: hundredth,
                floor: one,
                surface: one,
                sight: one,
                arc: one,
            },
            Task::Spatial => Self {
                cone: one,
                range: hundredth,
                floor: hundredth,
                surface: one,
                sight: one,
                arc: one,
            },
            Task::Terrain => Self {
                cone: one,
                range: hundredth,
                floor: one,
                surface: thousandth,
                sight: thousandth,
                arc: thousandth,
            },
        }
    }

    fn validate(&self, task: Task) -> Result<()> {
        let mut used = vec![("cone", self.cone), ("range", self.range)];
        match task {
            Task::Planar => {}
            Task::Spatial => used.push(("floor", self.floor)),
            Task::Terrain => {
                used.push(("surface", self.surface));
                used.push(("sight", self.sight));
                used.push(("arc", self.arc));
            }
        }
        for (name, w) in used {
            if !(w > T::zero()) || !w.is_finite() {
                return Err(Error::InvalidScenario(format!(
                    "weight {name} must be positive, got {w}"
                )));
            }
        }
        Ok(())
    }
}

/// Everything fixed for a problem instance except the target point.
#[derive(Debug, Clone)]
pub struct Scenario<T> {
    pub ctx: GravityContext<T>,
    pub bounds: ReachableSetParams<T>,
    pub cone: VisibilityCone<T>,
    pub weights: Weights<T>,
    pub terrain: Option<TerrainField<T>>,
    pub clearance: ClearanceGrid,
}

impl<T: Real> Scenario<T> {
    pub fn new(
        ctx: GravityContext<T>,
        bounds: ReachableSetParams<T>,
        cone: VisibilityCone<T>,
        weights: Weights<T>,
        terrain: Option<TerrainField<T>>,
        clearance: ClearanceGrid,
    ) -> Result<Self> {
        clearance.validate()?;
        Ok(Self { ctx, bounds, cone, weights, terrain, clearance })
    }

    /// Full validation for the given task, including the sampled checks
    /// of declared Lipschitz constants.
    pub fn validate(&self, task: Task) -> Result<()> {
        self.weights.validate(task)?;
        self.cone.validate_lipschitz(4096)?;
        if task == Task::Terrain {
            match &self.terrain {
                None => {
                    return Err(Error::InvalidScenario(
                        "terrain task requires a terrain field".into(),
                    ))
                }
                Some(t) => t.validate_for_scenario(self.bounds.z_min, self.bounds.rho)?,
            }
        }
        Ok(())
    }
}

/// Residual evaluator for one task, branch and target.
pub struct Residual<'a, T> {
    pub task: Task,
    pub branch: Branch,
    pub scenario: &'a Scenario<T>,
    /// Target point; the terrain task's sight segment runs from here.
    pub target: ImpactPoint3<T>,
    rho_sq: T,
    two_v_sq: T,
    v_fourth: T,
}

impl<'a, T: Real> Residual<'a, T> {
    pub fn new(
        task: Task,
        branch: Branch,
        scenario: &'a Scenario<T>,
        target: ImpactPoint3<T>,
    ) -> Self {
        let v_sq = scenario.ctx.v_sq;
        Self {
            task,
            branch,
            scenario,
            target,
            rho_sq: scenario.bounds.rho * scenario.bounds.rho,
            two_v_sq: lit::<T>(2.0) * v_sq,
            v_fourth: v_sq * v_sq,
        }
    }

    /// Barrel angles whose trajectory reaches `n` on this branch.
    pub fn angles(&self, n: ImpactPoint3<T>) -> Result<ShotAngles<T>> {
        let s = self.scenario;
        let phi = azimuth(n.x, n.y, s.bounds.kappa)?;
        let psi = match self.task {
            Task::Planar => inverse_elevation_planar(&s.ctx, n.planar(), self.branch)?,
            Task::Spatial | Task::Terrain => {
                inverse_elevation_spatial(&s.ctx, n, self.branch)?
            }
        };
        Ok(ShotAngles::new(phi, psi))
    }

    /// Membership of `n` in the task's reachable set.
    pub fn in_set(&self, n: ImpactPoint3<T>) -> bool {
        let s = self.scenario;
        match self.task {
            Task::Planar => in_reachable_planar(n.planar(), &s.bounds),
            Task::Spatial | Task::Terrain => in_reachable_spatial(&s.ctx, n, &s.bounds),
        }
    }

    /// Full residual value. Non-positive iff `n` is feasible for the task
    /// (up to the 1-D minimization approximation).
    pub fn eval(&self, n: ImpactPoint3<T>) -> Result<T> {
        self.eval_with_cutoff(n, T::infinity())
    }

    /// Residual with early exit: once the running max of the cheap
    /// components reaches `cutoff`, the expensive clearance terms are
    /// skipped and the partial max is returned. The result is exact
    /// whenever it is below `cutoff`.
    pub fn eval_with_cutoff(&self, n: ImpactPoint3<T>, cutoff: T) -> Result<T> {
        let angles = self.angles(n)?;
        Ok(self.weighted_components(angles, n, cutoff))
    }

    /// Fused membership test and residual for the boundary search:
    /// `None` outside the task's reachable set, otherwise the residual
    /// under the same cutoff contract as [`Residual::eval_with_cutoff`].
    pub fn eval_in_set(&self, n: ImpactPoint3<T>, cutoff: T) -> Option<T> {
        let s = self.scenario;
        let b = &s.bounds;
        if n.x < b.kappa {
            return None;
        }
        let r_sq = n.x * n.x + n.y * n.y;
        if r_sq > self.rho_sq {
            return None;
        }
        let psi = match self.task {
            Task::Planar => {
                let q = T::FRAC_PI_4();
                q + self.branch.sign::<T>() * (q - lit::<T>(0.5) * (r_sq.sqrt() / s.ctx.v_sq).asin())
            }
            Task::Spatial | Task::Terrain => {
                if n.z < b.z_min {
                    return None;
                }
                // Below the envelope exactly when the discriminant is
                // non-negative.
                let rad = self.v_fourth - (r_sq + self.two_v_sq * n.z);
                if rad < T::zero() {
                    return None;
                }
                ((s.ctx.v_sq + self.branch.sign::<T>() * rad.sqrt()) / r_sq.sqrt()).atan()
            }
        };
        let angles = ShotAngles::new((n.y / n.x).atan(), psi);
        Some(self.weighted_components(angles, n, cutoff))
    }

    fn weighted_components(&self, angles: ShotAngles<T>, n: ImpactPoint3<T>, cutoff: T) -> T {
        let s = self.scenario;
        let w = &s.weights;
        let mut acc = w.cone * s.cone.violation(angles);
        acc = acc.max(w.range * (s.bounds.kappa - n.x));
        match self.task {
            Task::Planar => {}
            Task::Spatial => {
                acc = acc.max(w.floor * (s.bounds.z_min - n.z));
            }
            Task::Terrain => {
                let terrain = s.terrain.as_ref().expect("validated terrain task");
                acc = acc.max(w.surface * terrain.eval(n).abs());
                if acc >= cutoff {
                    return acc;
                }
                let sight = segment_clearance(terrain, self.target, n, &s.clearance);
                acc = acc.max(-(w.sight * sight));
                if acc >= cutoff {
                    return acc;
                }
                let arc = trajectory_clearance(&s.ctx, terrain, angles, n.range(), &s.clearance);
                acc = acc.max(-(w.arc * arc));
            }
        }
        acc
    }

    /// Clearance minima at `n` (terrain task), for grazing diagnostics.
    pub fn clearances(&self, n: ImpactPoint3<T>) -> Result<Option<(T, T)>> {
        if self.task != Task::Terrain {
            return Ok(None);
        }
        let s = self.scenario;
        let terrain = s.terrain.as_ref().expect("validated terrain task");
        let angles = self.angles(n)?;
        let sight = segment_clearance(terrain, self.target, n, &s.clearance);
        let arc = trajectory_clearance(&s.ctx, terrain, angles, n.range(), &s.clearance);
        Ok(Some((sight, arc)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terrain::survey_block_terrain;

    fn scenario(task: Task) -> Scenario<f64> {
        let ctx = GravityContext::standard(180.0).unwrap();
        let bounds = match task {
            Task::Planar => ReachableSetParams::planar(&ctx, 100.0).unwrap(),
            _ => ReachableSetParams::spatial(&ctx, 100.0, -10.0).unwrap(),
        };
        let terrain = (task == Task::Terrain).then(survey_block_terrain);
        Scenario::new(
            ctx,
            bounds,
            VisibilityCone::e1().unwrap(),
            Weights::defaults(task),
            terrain,
            ClearanceGrid::default(),
        )
        .unwrap()
    }

    #[test]
    fn planar_residual_zero_on_cone_edge() {
        let s = scenario(Task::Planar);
        let x = s.ctx.v_sq * 70f64.to_radians().sin();
        let f = Residual::new(Task::Planar, Branch::Low, &s, ImpactPoint3::new(x, 0.0, 0.0))
            .eval(ImpactPoint3::new(x, 0.0, 0.0))
            .unwrap();
        assert!(f.abs() < 1e-12, "residual = {f}");
    }

    #[test]
    fn planar_residual_at_far_target() {
        let s = scenario(Task::Planar);
        let n = ImpactPoint3::new(2700.0, 0.0, 0.0);
        let f = Residual::new(Task::Planar, Branch::Low, &s, n).eval(n).unwrap();
        // Cone shortfall of the flat-branch elevation, about 0.13 rad.
        let psi = 0.5 * (2700.0 / s.ctx.v_sq).asin();
        let want = 35f64.to_radians() - psi;
        assert!((f - want).abs() < 1e-12);
        assert!((f - 0.130).abs() < 5e-3, "residual = {f}");
    }

    #[test]
    fn terrain_residual_on_surface_target() {
        let mut s = scenario(Task::Terrain);
        s.cone = VisibilityCone::e2().unwrap();
        let m = ImpactPoint3::new(110.0, 0.0, 20.0);
        let r = Residual::new(Task::Terrain, Branch::Low, &s, m);
        // Surface term vanishes on the block roof edge; the cone term
        // decides the value.
        let f = r.eval(m).unwrap();
        let angles = r.angles(m).unwrap();
        let cone = s.cone.violation(angles);
        assert!((f - cone).abs() < 1e-12, "f = {f}, cone = {cone}");
        assert!(cone > 0.0);
    }

    #[test]
    fn spatial_floor_component() {
        let s = scenario(Task::Spatial);
        let n = ImpactPoint3::new(3000.0, 0.0, -10.0);
        let r = Residual::new(Task::Spatial, Branch::Low, &s, n);
        let on_floor = r.eval(n).unwrap();
        let above = r.eval(ImpactPoint3::new(3000.0, 0.0, -9.0)).unwrap();
        // Floor margin is zero on the floor and negative above; the cone
        // term dominates in both cases here.
        assert!(on_floor >= above);
    }

    #[test]
    fn weight_scaling_scales_residual() {
        let s = scenario(Task::Planar);
        let mut doubled = s.clone();
        doubled.weights.cone *= 2.0;
        doubled.weights.range *= 2.0;
        for (x, y) in [(2700.0, 0.0), (150.0, 40.0), (3000.0, -500.0)] {
            let n = ImpactPoint3::new(x, y, 0.0);
            let f1 = Residual::new(Task::Planar, Branch::Low, &s, n).eval(n).unwrap();
            let f2 = Residual::new(Task::Planar, Branch::Low, &doubled, n).eval(n).unwrap();
            assert!((2.0 * f1 - f2).abs() < 1e-12);
        }
    }

    #[test]
    fn unreachable_point_propagates() {
        let s = scenario(Task::Spatial);
        let n = ImpactPoint3::new(100.0, 0.0, 1700.0);
        let r = Residual::new(Task::Spatial, Branch::Low, &s, n);
        assert_eq!(r.eval(n), Err(Error::Unreachable));
        assert!(!r.in_set(n));
    }

    #[test]
    fn fused_eval_matches_two_step_path() {
        for task in [Task::Planar, Task::Spatial, Task::Terrain] {
            let mut s = scenario(task);
            s.cone = VisibilityCone::e2().unwrap();
            let m = match task {
                Task::Planar => ImpactPoint3::new(2700.0, 0.0, 0.0),
                _ => ImpactPoint3::new(110.0, 0.0, 20.0),
            };
            let r = Residual::new(task, Branch::Low, &s, m);
            let mut state = 0xdeadbeefu64;
            let mut next = move || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                (state >> 33) as f64 / (1u64 << 31) as f64
            };
            for _ in 0..2000 {
                let p = ImpactPoint3::new(
                    next() * 3400.0,
                    (next() - 0.5) * 6000.0,
                    if task == Task::Planar { 0.0 } else { (next() - 0.5) * 400.0 },
                );
                let fused = r.eval_in_set(p, f64::INFINITY);
                let two_step = if r.in_set(p) { r.eval(p).ok() } else { None };
                match (fused, two_step) {
                    (None, None) => {}
                    (Some(a), Some(b)) => assert!(
                        (a - b).abs() <= 1e-12 * a.abs().max(1.0),
                        "fused {a} vs two-step {b} at {p:?}"
                    ),
                    other => panic!("membership disagreement at {p:?}: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn cutoff_is_exact_below_threshold() {
        let mut s = scenario(Task::Terrain);
        s.cone = VisibilityCone::e2().unwrap();
        let m = ImpactPoint3::new(110.0, 0.0, 20.0);
        let r = Residual::new(Task::Terrain, Branch::Low, &s, m);
        for (x, y, z) in [(108.0, -0.5, 25.0), (150.0, 10.0, 30.0), (300.0, 0.0, 5.0)] {
            let n = ImpactPoint3::new(x, y, z);
            let full = r.eval(n).unwrap();
            let cut = r.eval_with_cutoff(n, full + 1e-9).unwrap();
            assert_eq!(full, cut);
            // With a cutoff below the value, the partial max stays >= cutoff.
            let pruned = r.eval_with_cutoff(n, full - 0.5).unwrap();
            assert!(pruned >= full - 0.5 || pruned == full);
        }
    }
}
