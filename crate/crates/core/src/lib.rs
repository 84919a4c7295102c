//! Barrel-direction optimization for unguided projectiles.
//!
//! Three problems are solved with one method. The barrel direction is
//! restricted to a visibility cone with a possibly nonsmooth boundary,
//! and the target is either in the gun's horizon plane, anywhere in
//! space, or on a terrain surface that the trajectory and the sight line
//! from the target must clear. Each problem is recast as projecting the
//! target onto the zero sublevel set of a max-aggregated residual whose
//! eps-Lipschitz bounds certify the expansion radii of a ball search.
//!
//! The crate is generic over the floating-point scalar via [`Real`];
//! `*64` aliases fix `f64` for the common case.

pub mod bounds;
pub mod cone;
pub mod error;
pub mod geometry;
pub mod residual;
mod scalar;
pub mod solver;
pub mod terrain;

pub use error::{Error, Result};
pub use scalar::Real;

pub use bounds::{lip_azimuth, lip_cone, lip_elevation_planar, lip_elevation_spatial, lip_residual, tau_eps_limit, tau_root, EpsLipBound};
pub use cone::{ElevationBound, VisibilityCone};
pub use geometry::{
    azimuth, impact_point_planar, in_reachable_planar, in_reachable_spatial,
    inverse_elevation_planar, inverse_elevation_spatial, spatial_radicand, trajectory_point,
    velocity_from_angles, Branch, GravityContext, ImpactPoint2, ImpactPoint3, ReachableSetParams,
    ShotAngles, STANDARD_GRAVITY,
};
pub use residual::{Residual, Scenario, Task, Weights};
pub use solver::{
    chebyshev_center, circle_argmin, smallest_enclosing_circle, solve, sphere_argmin,
    BranchOutcome, EnclosingCircle, IterRecord, QRecord, Solution, SolveResult, SolveStatus,
    SolverParams, SolverTrace, project_branch,
};
pub use terrain::{
    segment_clearance, segment_clearance_error_bound, survey_block_terrain, trajectory_clearance,
    ClearanceGrid, TerrainExpr, TerrainField,
};

/// `f64` instantiations of the main types.
pub type GravityContext64 = GravityContext<f64>;
pub type ShotAngles64 = ShotAngles<f64>;
pub type ImpactPoint2_64 = ImpactPoint2<f64>;
pub type ImpactPoint3_64 = ImpactPoint3<f64>;
pub type Scenario64 = Scenario<f64>;
pub type SolverParams64 = SolverParams<f64>;
pub type SolveResult64 = SolveResult<f64>;
pub type Solution64 = Solution<f64>;
