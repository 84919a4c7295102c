//! Scenario file schema. Angles are degrees at this boundary and are
//! converted to radians once at load time.

use gunlay::{
    ClearanceGrid, ElevationBound, GravityContext, ImpactPoint3, ReachableSetParams, Scenario,
    SolverParams, Task, TerrainExpr, TerrainField, VisibilityCone, Weights, STANDARD_GRAVITY,
};
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub task: String,
    pub v0: f64,
    #[serde(default)]
    pub g: Option<f64>,
    pub kappa: f64,
    #[serde(default)]
    pub z_min: Option<f64>,
    pub targets: Vec<TargetSpec>,
    pub cones: Vec<ConeEntry>,
    pub eps0: Vec<f64>,
    #[serde(default)]
    pub weights: Option<WeightsSpec>,
    #[serde(default)]
    pub terrain: Option<TerrainSpec>,
    #[serde(default)]
    pub solver: Option<SolverSpec>,
    #[serde(default)]
    pub clearance: Option<ClearanceSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub name: String,
    /// 2 coordinates for the planar task, 3 for the spatial tasks. A
    /// third coordinate on a planar target is dropped with a warning.
    pub point: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeEntry {
    pub name: String,
    pub cone: ConeSpec,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ConeSpec {
    /// Builtin names: "E1" (constant band 35°..40°) or "E2" (sine bands).
    Named(String),
    Explicit {
        theta1_deg: f64,
        theta2_deg: f64,
        g1: BoundSpec,
        g2: BoundSpec,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundSpec {
    #[serde(default)]
    pub constant_deg: Option<f64>,
    #[serde(default)]
    pub abs_offset_sine: Option<AbsOffsetSineSpec>,
    #[serde(default)]
    pub piecewise_deg: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbsOffsetSineSpec {
    pub offset: f64,
    pub scale_deg: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSpec {
    #[serde(default)]
    pub cone: Option<f64>,
    #[serde(default)]
    pub range: Option<f64>,
    #[serde(default)]
    pub floor: Option<f64>,
    #[serde(default)]
    pub surface: Option<f64>,
    #[serde(default)]
    pub sight: Option<f64>,
    #[serde(default)]
    pub arc: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum TerrainSpec {
    Affine { affine: [f64; 4] },
    Floor { floor: f64 },
    Min { min: Vec<TerrainSpec> },
    Max { max: Vec<TerrainSpec> },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub eps_star: Option<f64>,
    #[serde(default)]
    pub eps_q: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub refine_levels: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClearanceSpec {
    #[serde(default)]
    pub n_lambda: Option<usize>,
    #[serde(default)]
    pub n_mu: Option<usize>,
    #[serde(default)]
    pub golden_iters: Option<usize>,
}

/// A validated scenario ready to run.
#[derive(Debug)]
pub struct LoadedScenario {
    pub task: Task,
    pub scenario: Scenario<f64>,
    pub targets: Vec<(String, ImpactPoint3<f64>, bool)>,
    pub cones: Vec<(String, VisibilityCone<f64>)>,
    pub eps0: Vec<f64>,
    pub solver: Option<SolverSpec>,
}

pub fn parse_task(s: &str) -> Result<Task, String> {
    match s {
        "I" => Ok(Task::Planar),
        "II.a" => Ok(Task::Spatial),
        "II.b" => Ok(Task::Terrain),
        other => Err(format!("task must be one of \"I\", \"II.a\", \"II.b\", got \"{other}\"")),
    }
}

fn build_bound(spec: &BoundSpec, field: &str) -> Result<ElevationBound<f64>, String> {
    let chosen = [
        spec.constant_deg.is_some(),
        spec.abs_offset_sine.is_some(),
        spec.piecewise_deg.is_some(),
    ]
    .iter()
    .filter(|b| **b)
    .count();
    if chosen != 1 {
        return Err(format!(
            "{field}: exactly one of constant_deg, abs_offset_sine, piecewise_deg required"
        ));
    }
    if let Some(c) = spec.constant_deg {
        return Ok(ElevationBound::Constant(c.to_radians()));
    }
    if let Some(s) = &spec.abs_offset_sine {
        return Ok(ElevationBound::AbsOffsetSine {
            offset: s.offset,
            scale: s.scale_deg.to_radians(),
        });
    }
    let knots = spec
        .piecewise_deg
        .as_ref()
        .unwrap()
        .iter()
        .map(|[phi, psi]| (phi.to_radians(), psi.to_radians()))
        .collect();
    Ok(ElevationBound::PiecewiseLinear(knots))
}

fn build_cone(entry: &ConeEntry) -> Result<VisibilityCone<f64>, String> {
    let cone = match &entry.cone {
        ConeSpec::Named(name) => match name.as_str() {
            "E1" => VisibilityCone::e1(),
            "E2" => VisibilityCone::e2(),
            other => return Err(format!("cone \"{}\": unknown builtin \"{other}\"", entry.name)),
        },
        ConeSpec::Explicit { theta1_deg, theta2_deg, g1, g2 } => VisibilityCone::new(
            theta1_deg.to_radians(),
            theta2_deg.to_radians(),
            build_bound(g1, "g1")?,
            build_bound(g2, "g2")?,
        ),
    };
    cone.map_err(|e| format!("cone \"{}\": {e}", entry.name))
}

fn build_terrain(spec: &TerrainSpec) -> TerrainExpr<f64> {
    match spec {
        TerrainSpec::Affine { affine: [a, b, c, d] } => {
            TerrainExpr::Affine { a: *a, b: *b, c: *c, d: *d }
        }
        TerrainSpec::Floor { floor } => {
            TerrainExpr::Affine { a: 0.0, b: 0.0, c: 1.0, d: -floor }
        }
        TerrainSpec::Min { min } => TerrainExpr::Min(min.iter().map(build_terrain).collect()),
        TerrainSpec::Max { max } => TerrainExpr::Max(max.iter().map(build_terrain).collect()),
    }
}

impl ScenarioFile {
    pub fn load(&self) -> Result<LoadedScenario, String> {
        let task = parse_task(&self.task)?;
        let ctx = GravityContext::new(self.v0, self.g.unwrap_or(STANDARD_GRAVITY))
            .map_err(|e| e.to_string())?;
        let bounds = match task {
            Task::Planar => ReachableSetParams::planar(&ctx, self.kappa),
            Task::Spatial | Task::Terrain => {
                let z_min = self
                    .z_min
                    .ok_or_else(|| format!("task {} requires z_min", self.task))?;
                ReachableSetParams::spatial(&ctx, self.kappa, z_min)
            }
        }
        .map_err(|e| e.to_string())?;

        if self.targets.is_empty() {
            return Err("targets must be non-empty".into());
        }
        if self.cones.is_empty() {
            return Err("cones must be non-empty".into());
        }
        for eps in &self.eps0 {
            if !(*eps > 0.0 && *eps < 1.0) {
                return Err(format!("eps0 values must lie in (0, 1), got {eps}"));
            }
        }

        let mut targets = Vec::new();
        for t in &self.targets {
            let (point, dropped_z) = match (task, t.point.as_slice()) {
                (Task::Planar, [x, y]) => (ImpactPoint3::new(*x, *y, 0.0), false),
                (Task::Planar, [x, y, z]) => (ImpactPoint3::new(*x, *y, 0.0), *z != 0.0),
                (Task::Spatial | Task::Terrain, [x, y, z]) => {
                    (ImpactPoint3::new(*x, *y, *z), false)
                }
                _ => {
                    return Err(format!(
                        "target \"{}\": expected {} coordinates, got {}",
                        t.name,
                        if task == Task::Planar { 2 } else { 3 },
                        t.point.len()
                    ))
                }
            };
            targets.push((t.name.clone(), point, dropped_z));
        }

        let cones = self
            .cones
            .iter()
            .map(|c| build_cone(c).map(|v| (c.name.clone(), v)))
            .collect::<Result<Vec<_>, _>>()?;

        let mut weights = Weights::defaults(task);
        if let Some(w) = &self.weights {
            if let Some(v) = w.cone {
                weights.cone = v;
            }
            if let Some(v) = w.range {
                weights.range = v;
            }
            if let Some(v) = w.floor {
                weights.floor = v;
            }
            if let Some(v) = w.surface {
                weights.surface = v;
            }
            if let Some(v) = w.sight {
                weights.sight = v;
            }
            if let Some(v) = w.arc {
                weights.arc = v;
            }
        }

        let terrain = match (task, &self.terrain) {
            (Task::Terrain, Some(spec)) => {
                Some(TerrainField::new(build_terrain(spec)).map_err(|e| e.to_string())?)
            }
            (Task::Terrain, None) => return Err("task II.b requires a terrain".into()),
            (_, Some(_)) => return Err(format!("task {} does not take a terrain", self.task)),
            (_, None) => None,
        };

        let mut clearance = ClearanceGrid::default();
        if let Some(c) = &self.clearance {
            if let Some(v) = c.n_lambda {
                clearance.n_lambda = v;
            }
            if let Some(v) = c.n_mu {
                clearance.n_mu = v;
            }
            if let Some(v) = c.golden_iters {
                clearance.golden_iters = v;
            }
        }

        // Cone choice varies per row; validate the scenario shell with the
        // first cone and each cone's declared constants separately.
        let scenario = Scenario::new(
            ctx,
            bounds,
            cones[0].1.clone(),
            weights,
            terrain,
            clearance,
        )
        .map_err(|e| e.to_string())?;
        scenario.validate(task).map_err(|e| e.to_string())?;
        for (name, cone) in &cones {
            cone.validate_lipschitz(4096)
                .map_err(|e| format!("cone \"{name}\": {e}"))?;
        }

        Ok(LoadedScenario {
            task,
            scenario,
            targets,
            cones,
            eps0: self.eps0.clone(),
            solver: self.solver.clone(),
        })
    }
}

/// Builds the per-run solver parameters from file overrides.
pub fn solver_params(task: Task, eps0: f64, spec: &Option<SolverSpec>) -> SolverParams<f64> {
    let mut p = SolverParams::new(task, eps0);
    if let Some(s) = spec {
        if let Some(v) = s.gamma {
            p.gamma = v;
        }
        if let Some(v) = s.lambda {
            p.lambda = v;
        }
        if let Some(v) = s.eps_star {
            p.eps_star = v;
        }
        p.eps_q = s.eps_q;
        if let Some(v) = s.max_iter {
            p.max_iter = v;
        }
        if let Some(v) = s.samples {
            p.samples = v;
        }
        if let Some(v) = s.refine_levels {
            p.refine_levels = v;
        }
    }
    p
}
