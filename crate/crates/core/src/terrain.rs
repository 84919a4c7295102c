//! Terrain as a min/max tree of affine pieces, with a computable Lipschitz
//! constant, plus the two 1-D clearance minimizations along a sight
//! segment and along a trajectory arc.

use crate::error::{Error, Result};
use crate::geometry::{GravityContext, ImpactPoint3, ShotAngles};
use crate::scalar::{lit, Real};

/// Node of a terrain expression tree. The solid is `{H ≤ 0}` and the
/// surface is `{H = 0}`.
#[derive(Debug, Clone, PartialEq)]
pub enum TerrainExpr<T> {
    /// `a·x + b·y + c·z + d`.
    Affine { a: T, b: T, c: T, d: T },
    Min(Vec<TerrainExpr<T>>),
    Max(Vec<TerrainExpr<T>>),
}

impl<T: Real> TerrainExpr<T> {
    /// Children are evaluated left to right; on ties the first operand wins.
    pub fn eval(&self, p: ImpactPoint3<T>) -> T {
        match self {
            TerrainExpr::Affine { a, b, c, d } => *a * p.x + *b * p.y + *c * p.z + *d,
            TerrainExpr::Min(children) => {
                let mut it = children.iter();
                let mut acc = it.next().expect("validated non-empty").eval(p);
                for child in it {
                    let v = child.eval(p);
                    if v < acc {
                        acc = v;
                    }
                }
                acc
            }
            TerrainExpr::Max(children) => {
                let mut it = children.iter();
                let mut acc = it.next().expect("validated non-empty").eval(p);
                for child in it {
                    let v = child.eval(p);
                    if v > acc {
                        acc = v;
                    }
                }
                acc
            }
        }
    }

    /// Lipschitz constant under the 1-norm: the largest absolute affine
    /// coefficient in the tree.
    fn lip(&self) -> T {
        match self {
            TerrainExpr::Affine { a, b, c, .. } => a.abs().max(b.abs()).max(c.abs()),
            TerrainExpr::Min(children) | TerrainExpr::Max(children) => children
                .iter()
                .map(|c| c.lip())
                .fold(T::zero(), |acc, l| acc.max(l)),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            TerrainExpr::Affine { a, b, c, d } => {
                if ![*a, *b, *c, *d].iter().all(|v| v.is_finite()) {
                    return Err(Error::InvalidScenario("non-finite terrain coefficient".into()));
                }
                Ok(())
            }
            TerrainExpr::Min(children) | TerrainExpr::Max(children) => {
                if children.is_empty() {
                    return Err(Error::InvalidScenario("empty min/max terrain node".into()));
                }
                children.iter().try_for_each(|c| c.validate())
            }
        }
    }
}

/// A terrain expression with its Lipschitz constant.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainField<T> {
    expr: TerrainExpr<T>,
    lip: T,
}

impl<T: Real> TerrainField<T> {
    pub fn new(expr: TerrainExpr<T>) -> Result<Self> {
        expr.validate()?;
        let lip = expr.lip();
        Ok(Self { expr, lip })
    }

    /// Flat ground at altitude `z0`: `H = z − z0`.
    pub fn floor(z0: T) -> Self {
        Self {
            expr: TerrainExpr::Affine { a: T::zero(), b: T::zero(), c: T::one(), d: -z0 },
            lip: T::one(),
        }
    }

    /// A rectangular block on flat ground:
    /// `min{max{x0−x, x−x1, y0−y, y−y1, z−z_top}, z−z_floor}`.
    pub fn block_over_floor(x0: T, x1: T, y0: T, y1: T, z_top: T, z_floor: T) -> Result<Self> {
        let aff = |a: f64, b: f64, c: f64, d: T| TerrainExpr::Affine {
            a: lit(a),
            b: lit(b),
            c: lit(c),
            d,
        };
        Self::new(TerrainExpr::Min(vec![
            TerrainExpr::Max(vec![
                aff(-1.0, 0.0, 0.0, x0),
                aff(1.0, 0.0, 0.0, -x1),
                aff(0.0, -1.0, 0.0, y0),
                aff(0.0, 1.0, 0.0, -y1),
                aff(0.0, 0.0, 1.0, -z_top),
            ]),
            aff(0.0, 0.0, 1.0, -z_floor),
        ]))
    }

    pub fn eval(&self, p: ImpactPoint3<T>) -> T {
        self.expr.eval(p)
    }

    pub fn lip(&self) -> T {
        self.lip
    }

    pub fn expr(&self) -> &TerrainExpr<T> {
        &self.expr
    }

    /// Checks that the gun is not inside the solid and that everything at
    /// or below `z_min` is solid (the latter sampled on a coarse grid).
    pub fn validate_for_scenario(&self, z_min: T, extent: T) -> Result<()> {
        if self.eval(ImpactPoint3::new(T::zero(), T::zero(), T::zero())) < T::zero() {
            return Err(Error::InvalidScenario("gun position lies inside the terrain solid".into()));
        }
        let n = 24;
        for i in 0..=n {
            for j in 0..=n {
                let x = -extent + lit::<T>(2.0) * extent * lit::<T>(i as f64 / n as f64);
                let y = -extent + lit::<T>(2.0) * extent * lit::<T>(j as f64 / n as f64);
                if self.eval(ImpactPoint3::new(x, y, z_min)) > T::zero() {
                    return Err(Error::InvalidScenario(format!(
                        "terrain is not solid at the floor altitude near ({x}, {y}, {z_min})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Sample counts for the 1-D clearance minimizations and the number of
/// golden-section iterations refining around the best sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClearanceGrid {
    pub n_lambda: usize,
    pub n_mu: usize,
    pub golden_iters: usize,
}

impl Default for ClearanceGrid {
    fn default() -> Self {
        Self { n_lambda: 64, n_mu: 64, golden_iters: 40 }
    }
}

impl ClearanceGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n_lambda < 2 || self.n_mu < 2 {
            return Err(Error::InvalidScenario("clearance sample counts must be at least 2".into()));
        }
        Ok(())
    }
}

/// Uniform scan of `f` on [0, 1] followed by golden-section refinement in
/// the bracket around the best sample. Returns the smallest value seen.
fn min_on_unit_interval<T: Real>(f: impl Fn(T) -> T, samples: usize, golden_iters: usize) -> T {
    debug_assert!(samples >= 2);
    let step = T::one() / lit::<T>((samples - 1) as f64);
    let mut best = f(T::zero());
    let mut best_i = 0usize;
    for i in 1..samples {
        let v = f(step * lit::<T>(i as f64));
        if v < best {
            best = v;
            best_i = i;
        }
    }

    let mut lo = if best_i == 0 { T::zero() } else { step * lit::<T>((best_i - 1) as f64) };
    let mut hi = if best_i + 1 >= samples { T::one() } else { step * lit::<T>((best_i + 1) as f64) };
    let inv_phi = lit::<T>(0.618_033_988_749_894_9);
    let mut a = hi - (hi - lo) * inv_phi;
    let mut b = lo + (hi - lo) * inv_phi;
    let mut fa = f(a);
    let mut fb = f(b);
    for _ in 0..golden_iters {
        if fa <= fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - (hi - lo) * inv_phi;
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + (hi - lo) * inv_phi;
            fb = f(b);
        }
        if fa < best {
            best = fa;
        }
        if fb < best {
            best = fb;
        }
    }
    best
}

/// Approximate minimum of the terrain along the straight segment from `m`
/// to `n` (`λ = 0` at `m`). Non-negative means the sight line clears the
/// solid's interior.
pub fn segment_clearance<T: Real>(
    terrain: &TerrainField<T>,
    m: ImpactPoint3<T>,
    n: ImpactPoint3<T>,
    grid: &ClearanceGrid,
) -> T {
    min_on_unit_interval(
        |lam| {
            let om = T::one() - lam;
            terrain.eval(ImpactPoint3::new(
                lam * n.x + om * m.x,
                lam * n.y + om * m.y,
                lam * n.z + om * m.z,
            ))
        },
        grid.n_lambda,
        grid.golden_iters,
    )
}

/// Approximate minimum of the terrain along the trajectory arc from the
/// muzzle to the point at ground distance `r`.
pub fn trajectory_clearance<T: Real>(
    ctx: &GravityContext<T>,
    terrain: &TerrainField<T>,
    a: ShotAngles<T>,
    r: T,
    grid: &ClearanceGrid,
) -> T {
    debug_assert!(r >= T::zero());
    let (sp, cp) = (a.phi.sin(), a.phi.cos());
    let t = a.psi.tan();
    let fall = (T::one() + t * t) / (lit::<T>(2.0) * ctx.v_sq);
    min_on_unit_interval(
        |mu| {
            let rr = mu * r;
            terrain.eval(ImpactPoint3::new(rr * cp, rr * sp, rr * t - fall * rr * rr))
        },
        grid.n_mu,
        grid.golden_iters,
    )
}

/// Worst-case gap between the sampled minimum and the true minimum of the
/// segment clearance, from the Lipschitz constant and the grid spacing.
pub fn segment_clearance_error_bound<T: Real>(
    terrain: &TerrainField<T>,
    m: ImpactPoint3<T>,
    n: ImpactPoint3<T>,
    grid: &ClearanceGrid,
) -> T {
    let norm1 = (n.x - m.x).abs() + (n.y - m.y).abs() + (n.z - m.z).abs();
    terrain.lip() * norm1 / (lit::<T>(2.0) * lit::<T>((grid.n_lambda - 1) as f64))
}

/// The survey-area terrain used by the bundled spatial-terrain scenarios:
/// a 40 m tall block between 90 m and 130 m downrange on ground at −10 m.
pub fn survey_block_terrain<T: Real>() -> TerrainField<T> {
    TerrainField::block_over_floor(
        lit(90.0),
        lit(130.0),
        lit(-10.0),
        lit(30.0),
        lit(20.0),
        lit(-10.0),
    )
    .expect("static terrain is valid")
}
