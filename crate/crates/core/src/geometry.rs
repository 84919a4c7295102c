//! Forward and inverse ballistic maps between barrel angles and points in
//! the gun-centered frame, plus reachable-set membership.
//!
//! The gun sits at the origin, `z` points up against gravity, and the drag
//! free trajectory is the classic parabola. Ranges scale with `v² = v0²/g`,
//! which has units of metres.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Standard gravitational acceleration, m/s².
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Muzzle speed together with the gravity scale `v² = v0²/g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GravityContext<T> {
    /// Muzzle speed, m/s.
    pub v0: T,
    /// Gravitational acceleration magnitude, m/s².
    pub g: T,
    /// `v0²/g`, metres. Equals the maximum ground range at 45° elevation.
    pub v_sq: T,
}

impl<T: Real> GravityContext<T> {
    /// Builds the context from a muzzle speed and gravity value.
    pub fn new(v0: T, g: T) -> Result<Self> {
        if !(v0 > T::zero()) || !v0.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "muzzle speed must be positive, got {v0}"
            )));
        }
        if !(g > T::zero()) || !g.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "gravity must be positive, got {g}"
            )));
        }
        Ok(Self { v0, g, v_sq: v0 * v0 / g })
    }

    /// Context under standard gravity.
    pub fn standard(v0: T) -> Result<Self> {
        Self::new(v0, lit(STANDARD_GRAVITY))
    }

    /// The dimensionless speed scale `v = v0/√g` (units m^(1/2)).
    pub fn v(&self) -> T {
        self.v_sq.sqrt()
    }

    /// Height of the envelope of all trajectories above a ground distance
    /// `r`: points strictly above it are unreachable at this muzzle speed.
    pub fn envelope_height(&self, r_sq: T) -> T {
        lit::<T>(0.5) * (self.v_sq - r_sq / self.v_sq)
    }
}

/// Azimuth and elevation of the barrel semi-axis, radians.
///
/// `psi` lies in (−π/2, π/2); `phi` is stored in (−π, π] and mapped into
/// [0, 2π) only where a cone with positive lower azimuth requires it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShotAngles<T> {
    pub phi: T,
    pub psi: T,
}

impl<T: Real> ShotAngles<T> {
    pub fn new(phi: T, psi: T) -> Self {
        Self { phi, psi }
    }
}

/// Impact point in the true-horizon plane of the gun, metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactPoint2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> ImpactPoint2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    /// Ground distance from the gun.
    pub fn range(&self) -> T {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Point of a trajectory in the gun-centered 3-D frame, metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpactPoint3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> ImpactPoint3<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    /// Ground-plane distance from the gun.
    pub fn range(&self) -> T {
        self.x.hypot(self.y)
    }

    pub fn dist(&self, other: &Self) -> T {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn planar(&self) -> ImpactPoint2<T> {
        ImpactPoint2::new(self.x, self.y)
    }
}

/// Selects one of the two elevations that reach the same point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Flat trajectory (ψ ≤ π/4 in the planar task).
    Low,
    /// Lofted trajectory.
    High,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Low, Branch::High];

    /// 1 for the low branch, 2 for the high branch.
    pub fn index(self) -> u8 {
        match self {
            Branch::Low => 1,
            Branch::High => 2,
        }
    }

    /// Sign of the discriminant term: −1 for low, +1 for high.
    pub fn sign<T: Real>(self) -> T {
        match self {
            Branch::Low => -T::one(),
            Branch::High => T::one(),
        }
    }
}

/// Bounds of the reachable set: minimum downrange distance, floor altitude
/// and maximum ground-plane range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReachableSetParams<T> {
    /// Minimum downrange distance κ, m.
    pub kappa: T,
    /// Floor altitude, m (negative; `-∞` for the planar task).
    pub z_min: T,
    /// Maximum ground-plane range, m.
    pub rho: T,
}

impl<T: Real> ReachableSetParams<T> {
    /// Parameters for the planar task: impact points in the horizon plane.
    pub fn planar(ctx: &GravityContext<T>, kappa: T) -> Result<Self> {
        let rho = ctx.v_sq;
        Self::validate(kappa, T::neg_infinity(), rho)
    }

    /// Parameters for the spatial tasks with a floor at `z_min < 0`.
    pub fn spatial(ctx: &GravityContext<T>, kappa: T, z_min: T) -> Result<Self> {
        if !(z_min < T::zero()) {
            return Err(Error::InvalidScenario(format!(
                "floor altitude must be negative, got {z_min}"
            )));
        }
        let rho = (ctx.v_sq * (ctx.v_sq - lit::<T>(2.0) * z_min)).sqrt();
        Self::validate(kappa, z_min, rho)
    }

    fn validate(kappa: T, z_min: T, rho: T) -> Result<Self> {
        if !(kappa > T::zero()) || !kappa.is_finite() {
            return Err(Error::InvalidScenario(format!(
                "minimum downrange distance must be positive, got {kappa}"
            )));
        }
        if !(rho > kappa) {
            return Err(Error::InvalidScenario(format!(
                "maximum range {rho} does not exceed minimum downrange distance {kappa}"
            )));
        }
        Ok(Self { kappa, z_min, rho })
    }
}

/// Initial velocity vector for the given barrel direction.
pub fn velocity_from_angles<T: Real>(ctx: &GravityContext<T>, a: ShotAngles<T>) -> [T; 3] {
    let (sp, cp) = (a.phi.sin(), a.phi.cos());
    let (se, ce) = (a.psi.sin(), a.psi.cos());
    [ctx.v0 * ce * cp, ctx.v0 * ce * sp, ctx.v0 * se]
}

/// Impact point in the horizon plane for an upward shot (the forward map
/// of the planar task). Range is `v² sin 2ψ`.
pub fn impact_point_planar<T: Real>(
    ctx: &GravityContext<T>,
    a: ShotAngles<T>,
) -> Result<ImpactPoint2<T>> {
    if !(a.psi >= T::zero() && a.psi < T::FRAC_PI_2()) {
        return Err(Error::Domain(format!(
            "planar impact requires elevation in [0, π/2), got {}",
            a.psi
        )));
    }
    let r = ctx.v_sq * (lit::<T>(2.0) * a.psi).sin();
    Ok(ImpactPoint2::new(r * a.phi.cos(), r * a.phi.sin()))
}

/// Point of the trajectory whose ground-plane distance from the gun is `r`
/// (the forward map of the spatial tasks).
pub fn trajectory_point<T: Real>(
    ctx: &GravityContext<T>,
    a: ShotAngles<T>,
    r: T,
) -> Result<ImpactPoint3<T>> {
    if !(r >= T::zero()) {
        return Err(Error::Domain(format!("arc parameter must be non-negative, got {r}")));
    }
    let t = a.psi.tan();
    let z = r * t - (T::one() + t * t) * r * r / (lit::<T>(2.0) * ctx.v_sq);
    Ok(ImpactPoint3::new(r * a.phi.cos(), r * a.phi.sin(), z))
}

/// Azimuth of a point with `x ≥ κ > 0`; single-valued in (−π/2, π/2).
pub fn azimuth<T: Real>(x: T, y: T, kappa: T) -> Result<T> {
    if !(x >= kappa) {
        return Err(Error::Unreachable);
    }
    Ok((y / x).atan())
}

/// Elevation that lands the shot on the planar point `n`, for the chosen
/// branch. Low branch covers (0, π/4], high branch [π/4, π/2).
pub fn inverse_elevation_planar<T: Real>(
    ctx: &GravityContext<T>,
    n: ImpactPoint2<T>,
    branch: Branch,
) -> Result<T> {
    let r = n.range();
    if r > ctx.v_sq {
        return Err(Error::Unreachable);
    }
    let q = T::FRAC_PI_4();
    Ok(q + branch.sign::<T>() * (q - lit::<T>(0.5) * (r / ctx.v_sq).asin()))
}

/// Discriminant of the spatial inverse: non-negative exactly on points at
/// or below the trajectory envelope.
pub fn spatial_radicand<T: Real>(ctx: &GravityContext<T>, n: ImpactPoint3<T>) -> T {
    let r_sq = n.x * n.x + n.y * n.y;
    ctx.v_sq * ctx.v_sq - (r_sq + lit::<T>(2.0) * ctx.v_sq * n.z)
}

/// Elevation whose trajectory passes through the spatial point `n`, for
/// the chosen branch.
pub fn inverse_elevation_spatial<T: Real>(
    ctx: &GravityContext<T>,
    n: ImpactPoint3<T>,
    branch: Branch,
) -> Result<T> {
    let r = n.range();
    if !(r > T::zero()) {
        return Err(Error::Unreachable);
    }
    let rad = spatial_radicand(ctx, n);
    if rad < T::zero() {
        return Err(Error::Unreachable);
    }
    Ok(((ctx.v_sq + branch.sign::<T>() * rad.sqrt()) / r).atan())
}

/// Membership in the planar reachable set.
pub fn in_reachable_planar<T: Real>(n: ImpactPoint2<T>, params: &ReachableSetParams<T>) -> bool {
    n.x >= params.kappa && n.range() <= params.rho
}

/// Membership in the spatial reachable set, including the envelope bound.
pub fn in_reachable_spatial<T: Real>(
    ctx: &GravityContext<T>,
    n: ImpactPoint3<T>,
    params: &ReachableSetParams<T>,
) -> bool {
    n.x >= params.kappa
        && n.range() <= params.rho
        && n.z >= params.z_min
        && n.z <= ctx.envelope_height(n.x * n.x + n.y * n.y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> GravityContext<f64> {
        GravityContext::standard(180.0).unwrap()
    }

    #[test]
    fn speed_scale_values() {
        let c = ctx();
        assert!((c.v_sq - 3303.88).abs() < 0.01, "v_sq = {}", c.v_sq);

        let unit = GravityContext::new(1.0, 1.0).unwrap();
        assert_eq!(unit.v(), 1.0);
        assert_eq!(unit.v_sq, 1.0);

        // Lower gravity stretches the maximum range.
        let c98 = GravityContext::<f64>::new(180.0, 9.8).unwrap();
        let rho = ReachableSetParams::planar(&c98, 100.0).unwrap().rho;
        assert!((rho - 3306.12).abs() < 0.01);
    }

    #[test]
    fn rejects_non_positive_inputs() {
        assert!(GravityContext::new(0.0, 9.8).is_err());
        assert!(GravityContext::new(-1.0, 9.8).is_err());
        assert!(GravityContext::new(180.0, 0.0).is_err());
        assert!(GravityContext::<f64>::new(180.0, f64::NAN).is_err());
    }

    #[test]
    fn velocity_axis_aligned() {
        let c = ctx();
        let v = velocity_from_angles(&c, ShotAngles::new(0.0, 0.0));
        assert!((v[0] - 180.0).abs() < 1e-12 && v[1].abs() < 1e-12 && v[2].abs() < 1e-12);

        let v = velocity_from_angles(&c, ShotAngles::new(std::f64::consts::FRAC_PI_2, 0.0));
        assert!(v[0].abs() < 1e-10 && (v[1] - 180.0).abs() < 1e-12);

        let v = velocity_from_angles(&c, ShotAngles::new(0.0, std::f64::consts::FRAC_PI_4));
        let want = 180.0 / 2f64.sqrt();
        assert!((v[0] - want).abs() < 1e-12 && (v[2] - want).abs() < 1e-12);
    }

    #[test]
    fn velocity_norm_is_muzzle_speed() {
        let c = ctx();
        for i in 0..100 {
            let phi = -3.0 + 0.06 * i as f64;
            let psi = -1.5 + 0.03 * i as f64;
            let v = velocity_from_angles(&c, ShotAngles::new(phi, psi));
            let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            assert!((norm - 180.0).abs() / 180.0 < 1e-12);
        }
    }

    #[test]
    fn planar_impact_examples() {
        let c = ctx();
        let n = impact_point_planar(&c, ShotAngles::new(0.0, std::f64::consts::FRAC_PI_4)).unwrap();
        assert!((n.x - c.v_sq).abs() < 1e-9);
        assert!(n.y.abs() < 1e-9);

        let n = impact_point_planar(&c, ShotAngles::new(1.0, 0.0)).unwrap();
        assert_eq!((n.x, n.y), (0.0, 0.0));

        let n = impact_point_planar(&c, ShotAngles::new(0.0, 34.4f64.to_radians())).unwrap();
        assert!((n.x - 3080.3).abs() < 0.5, "x = {}", n.x);

        assert!(impact_point_planar(&c, ShotAngles::new(0.0, -0.1)).is_err());
        assert!(impact_point_planar(&c, ShotAngles::new(0.0, 1.6)).is_err());
    }

    #[test]
    fn trajectory_point_examples() {
        let c = ctx();
        let muzzle = trajectory_point(&c, ShotAngles::new(0.3, 0.5), 0.0).unwrap();
        assert_eq!((muzzle.x, muzzle.y, muzzle.z), (0.0, 0.0, 0.0));

        // 45° shot lands back at z = 0 at the maximum range.
        let land = trajectory_point(&c, ShotAngles::new(0.0, std::f64::consts::FRAC_PI_4), c.v_sq)
            .unwrap();
        assert!(land.z.abs() < 1e-9);

        let p = trajectory_point(&c, ShotAngles::new(0.0, 30f64.to_radians()), 1000.0).unwrap();
        assert!((p.z - 375.5692).abs() < 1e-2, "z = {}", p.z);

        assert!(trajectory_point(&c, ShotAngles::new(0.0, 0.3), -1.0).is_err());
    }

    #[test]
    fn azimuth_examples() {
        assert_eq!(azimuth(100.0, 0.0, 100.0).unwrap(), 0.0);
        assert!((azimuth(100.0, 100.0, 100.0).unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
        let deg = azimuth::<f64>(2606.4, 48.4, 100.0).unwrap().to_degrees();
        assert!((deg - 1.06).abs() < 0.01, "azimuth = {deg}°");
        assert_eq!(azimuth(99.0, 0.0, 100.0), Err(Error::Unreachable));
    }

    #[test]
    fn planar_inverse_round_trip() {
        let c = ctx();
        let n = impact_point_planar(&c, ShotAngles::new(0.2, 0.3)).unwrap();
        let psi = inverse_elevation_planar(&c, n, Branch::Low).unwrap();
        assert!((psi - 0.3).abs() < 1e-9);
        let phi = azimuth(n.x, n.y, 1.0).unwrap();
        assert!((phi - 0.2).abs() < 1e-12);

        // High elevation is recovered by the high branch.
        let n = impact_point_planar(&c, ShotAngles::new(0.0, 1.2)).unwrap();
        let psi = inverse_elevation_planar(&c, n, Branch::High).unwrap();
        assert!((psi - 1.2).abs() < 1e-9);

        // At the maximum range both branches coincide at π/4.
        let top = ImpactPoint2::new(c.v_sq, 0.0);
        let lo = inverse_elevation_planar(&c, top, Branch::Low).unwrap();
        let hi = inverse_elevation_planar(&c, top, Branch::High).unwrap();
        assert!((lo - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!((hi - std::f64::consts::FRAC_PI_4).abs() < 1e-12);

        let outside = ImpactPoint2::new(c.v_sq + 1.0, 0.0);
        assert_eq!(inverse_elevation_planar(&c, outside, Branch::Low), Err(Error::Unreachable));
    }

    #[test]
    fn spatial_inverse_round_trip() {
        let c = ctx();
        let n = trajectory_point(&c, ShotAngles::new(0.1, 0.5), 800.0).unwrap();
        let psi_lo = inverse_elevation_spatial(&c, n, Branch::Low).unwrap();
        let psi_hi = inverse_elevation_spatial(&c, n, Branch::High).unwrap();
        let recovered = if (psi_lo - 0.5).abs() < (psi_hi - 0.5).abs() { psi_lo } else { psi_hi };
        assert!((recovered - 0.5).abs() < 1e-9);
        assert!(psi_lo < psi_hi);

        // Regenerate the point from the recovered branch angles.
        let phi = azimuth(n.x, n.y, 1.0).unwrap();
        let back = trajectory_point(&c, ShotAngles::new(phi, recovered), n.range()).unwrap();
        assert!(back.dist(&n) < 1e-9);
    }

    #[test]
    fn spatial_inverse_on_envelope() {
        let c = ctx();
        let r = 1200.0;
        let z = c.envelope_height(r * r);
        let n = ImpactPoint3::new(r, 0.0, z);
        let rad = spatial_radicand(&c, n);
        assert!(rad.abs() < 1e-6 * c.v_sq * c.v_sq);
        let psi = inverse_elevation_spatial(&c, ImpactPoint3::new(r, 0.0, z - 1e-9), Branch::Low)
            .unwrap();
        assert!((psi - (c.v_sq / r).atan()).abs() < 1e-4);
    }

    #[test]
    fn spatial_inverse_unreachable() {
        let c = ctx();
        // Envelope above x = 100 sits near 1650 m; 1700 m is out of reach.
        let n = ImpactPoint3::new(100.0, 0.0, 1700.0);
        assert_eq!(inverse_elevation_spatial(&c, n, Branch::Low), Err(Error::Unreachable));
        assert!(c.envelope_height(100.0 * 100.0) < 1700.0);
    }

    #[test]
    fn reachable_set_membership() {
        let c = ctx();
        let planar = ReachableSetParams::planar(&c, 100.0).unwrap();
        assert!(in_reachable_planar(ImpactPoint2::new(100.0, 0.0), &planar));
        assert!(!in_reachable_planar(ImpactPoint2::new(99.9, 0.0), &planar));
        assert!(!in_reachable_planar(ImpactPoint2::new(3300.0, 300.0), &planar));

        let spatial = ReachableSetParams::spatial(&c, 100.0, -10.0).unwrap();
        assert!(!in_reachable_spatial(&c, ImpactPoint3::new(100.0, 0.0, 1700.0), &spatial));
        assert!(in_reachable_spatial(&c, ImpactPoint3::new(100.0, 0.0, -10.0), &spatial));
        assert!(!in_reachable_spatial(&c, ImpactPoint3::new(100.0, 0.0, -10.1), &spatial));
    }

    #[test]
    fn envelope_matches_radicand_sign() {
        let c = ctx();
        let mut state = 0x243f6a8885a308d3u64;
        let mut next = move || {
            state = state.wrapping_add(0x9e3779b97f4a7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
            (z ^ (z >> 31)) as f64 / u64::MAX as f64
        };
        for _ in 0..100_000 {
            let x = 100.0 + 3300.0 * next();
            let y = -3300.0 + 6600.0 * next();
            let z = -100.0 + 2200.0 * next();
            let n = ImpactPoint3::new(x, y, z);
            let below = z <= c.envelope_height(x * x + y * y);
            let rad_ok = spatial_radicand(&c, n) >= 0.0;
            assert_eq!(below, rad_ok, "disagreement at ({x}, {y}, {z})");
        }
    }

    #[test]
    fn params_validation() {
        let c = ctx();
        assert!(ReachableSetParams::planar(&c, 0.0).is_err());
        assert!(ReachableSetParams::planar(&c, 4000.0).is_err());
        assert!(ReachableSetParams::spatial(&c, 100.0, 0.0).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let c = GravityContext::<f32>::standard(180.0).unwrap();
        let n = impact_point_planar(&c, ShotAngles::new(0.2f32, 0.3)).unwrap();
        let psi = inverse_elevation_planar(&c, n, Branch::Low).unwrap();
        assert!((psi - 0.3).abs() < 1e-4);
    }
}
