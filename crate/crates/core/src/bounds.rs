//! Certified Lipschitz and eps-Lipschitz bound estimators for every
//! function in the residual chain.
//!
//! A function is eps-Lipschitz when `|f(x) − f(y)| ≤ L(ε)·‖x − y‖₁ + ε`
//! for the given `ε`. The solver's expansion radii are valid only while
//! these estimates hold, so the constants are conservative by design.

use crate::error::{Error, Result};
use crate::geometry::{GravityContext, ReachableSetParams};
use crate::residual::{Scenario, Task};
use crate::scalar::{lit, Real};

/// A bound value together with the slack `ε` it is valid at. Plain
/// Lipschitz bounds carry no `ε`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpsLipBound<T> {
    pub eps: Option<T>,
    pub value: T,
}

impl<T: Real> EpsLipBound<T> {
    pub fn plain(value: T) -> Self {
        Self { eps: None, value }
    }

    pub fn at(eps: T, value: T) -> Self {
        Self { eps: Some(eps), value }
    }
}

/// Upper end of the `tau_root` domain, `π/2 − 1`.
pub fn tau_eps_limit<T: Real>() -> T {
    T::FRAC_PI_2() - T::one()
}

/// Unique root on [0, 1) of `(π/2 − ε − arcsin τ)·√(1 − τ²) = 1 − τ`.
///
/// Accepts `ε` in `(0, π/2 − 1]`; the right endpoint maps to τ = 0.
pub fn tau_root<T: Real>(eps: T) -> Result<T> {
    let limit = tau_eps_limit::<T>();
    if !(eps > T::zero() && eps <= limit) {
        return Err(Error::Domain(format!(
            "tau_root requires ε in (0, {limit}], got {eps}"
        )));
    }
    let f = |tau: T| {
        (T::FRAC_PI_2() - eps - tau.asin()) * (T::one() - tau * tau).sqrt() - (T::one() - tau)
    };
    let mut lo = T::zero();
    let mut hi = T::one() - lit::<T>(1e-15);
    // f(0) = π/2 − ε − 1 ≥ 0 and f(τ) < 0 near 1, so the root is bracketed.
    // At the right end of the ε domain the root is the bracket endpoint.
    if f(lo) == T::zero() {
        return Ok(T::zero());
    }
    let tol = lit::<T>(1e-12).max(T::epsilon() * lit::<T>(8.0));
    while hi - lo > tol {
        let mid = lit::<T>(0.5) * (lo + hi);
        if f(mid) >= T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lit::<T>(0.5) * (lo + hi))
}

/// Lipschitz bound of the cone violation in the angles:
/// `max{lip(g₁), lip(g₂), 1}`.
pub fn lip_cone<T: Real>(cone: &crate::cone::VisibilityCone<T>) -> T {
    cone.g1.lip().max(cone.g2.lip()).max(T::one())
}

/// Lipschitz bound of the azimuth over the reachable set: `√2/κ`.
pub fn lip_azimuth<T: Real>(kappa: T) -> T {
    T::SQRT_2() / kappa
}

/// eps-Lipschitz bound of the planar inverse elevation:
/// `1/(√2·v²·√(1 − τ²(2ε)))`.
pub fn lip_elevation_planar<T: Real>(eps: T, ctx: &GravityContext<T>) -> Result<EpsLipBound<T>> {
    let tau = tau_root(lit::<T>(2.0) * eps)?;
    let value = (T::SQRT_2() * ctx.v_sq * (T::one() - tau * tau).sqrt()).recip();
    Ok(EpsLipBound::at(eps, value))
}

/// eps-Lipschitz bound of the spatial inverse elevation:
/// `(ρ/(2ε) + β·√2)/κ²` with `β = v² + √(v⁴ − κ² − 2v²·z_min)`.
pub fn lip_elevation_spatial<T: Real>(
    eps: T,
    ctx: &GravityContext<T>,
    params: &ReachableSetParams<T>,
) -> Result<EpsLipBound<T>> {
    if !(eps > T::zero()) {
        return Err(Error::Domain(format!("ε must be positive, got {eps}")));
    }
    let two = lit::<T>(2.0);
    let beta = ctx.v_sq
        + (ctx.v_sq * ctx.v_sq - params.kappa * params.kappa - two * ctx.v_sq * params.z_min)
            .sqrt();
    let value =
        (params.rho / (two * eps) + beta * T::SQRT_2()) / (params.kappa * params.kappa);
    Ok(EpsLipBound::at(eps, value))
}

/// eps-Lipschitz bound of the task residual, composed from the component
/// bounds with the scenario weights.
pub fn lip_residual<T: Real>(
    task: Task,
    eps: T,
    scenario: &Scenario<T>,
) -> Result<EpsLipBound<T>> {
    if !(eps > T::zero()) {
        return Err(Error::Domain(format!("ε must be positive, got {eps}")));
    }
    let w = &scenario.weights;
    let lip_g = lip_cone(&scenario.cone);
    let nested = eps / (w.cone * lip_g);
    let elevation = match task {
        Task::Planar => lip_elevation_planar(nested, &scenario.ctx)?.value,
        Task::Spatial | Task::Terrain => {
            lip_elevation_spatial(nested, &scenario.ctx, &scenario.bounds)?.value
        }
    };
    let cone_term = w.cone * lip_g * (lip_azimuth(scenario.bounds.kappa) + elevation);
    let value = match task {
        Task::Planar => cone_term.max(w.range),
        Task::Spatial => cone_term.max(w.range).max(w.floor),
        Task::Terrain => {
            let lip_h = scenario
                .terrain
                .as_ref()
                .expect("terrain task carries a terrain field")
                .lip();
            let arc = w.arc
                * lip_h
                * (scenario.bounds.rho * lip_h / (lit::<T>(8.0) * eps) + T::one());
            cone_term
                .max(w.range)
                .max(w.surface * lip_h)
                .max(w.sight * lip_h)
                .max(arc)
        }
    };
    Ok(EpsLipBound::at(eps, value))
}
