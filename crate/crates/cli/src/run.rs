//! Row expansion, batch solving and output writers.

use std::fmt::Write as _;
use std::time::Instant;

use gunlay::{
    chebyshev_center, solve, trajectory_point, ImpactPoint3, Scenario, ShotAngles, Solution, Task,
};
use rayon::prelude::*;

use crate::schema::{solver_params, LoadedScenario};

/// One (target, cone, eps0) combination.
#[derive(Debug, Clone)]
pub struct RowSpec {
    pub index: usize,
    pub target_name: String,
    pub target: ImpactPoint3<f64>,
    pub cone_name: String,
    pub cone_index: usize,
    pub eps0: f64,
}

pub struct RowResult {
    pub spec: RowSpec,
    pub solution: Solution<f64>,
    pub wall_time: f64,
}

impl RowResult {
    pub fn converged(&self) -> bool {
        self.solution.best.is_some()
    }
}

/// Expands rows in file order: targets outermost, then cones, then eps0.
pub fn expand_rows(loaded: &LoadedScenario, chebyshev: bool) -> Result<Vec<RowSpec>, String> {
    let targets: Vec<(String, ImpactPoint3<f64>)> = if chebyshev {
        if loaded.task != Task::Planar {
            return Err("multi-target reduction applies to task I only".into());
        }
        let pts: Vec<(f64, f64)> = loaded.targets.iter().map(|(_, p, _)| (p.x, p.y)).collect();
        let center = chebyshev_center(&pts).map_err(|e| e.to_string())?;
        vec![("chebyshev".to_string(), ImpactPoint3::new(center.0, center.1, 0.0))]
    } else {
        loaded.targets.iter().map(|(n, p, _)| (n.clone(), *p)).collect()
    };

    let mut rows = Vec::new();
    let mut index = 0;
    for (tname, tpoint) in &targets {
        for (ci, (cname, _)) in loaded.cones.iter().enumerate() {
            for eps in &loaded.eps0 {
                rows.push(RowSpec {
                    index,
                    target_name: tname.clone(),
                    target: *tpoint,
                    cone_name: cname.clone(),
                    cone_index: ci,
                    eps0: *eps,
                });
                index += 1;
            }
        }
    }
    Ok(rows)
}

/// Solves all rows, possibly concurrently; results come back in row order.
pub fn run_rows(loaded: &LoadedScenario, rows: Vec<RowSpec>) -> Result<Vec<RowResult>, String> {
    rows.into_par_iter()
        .map(|row| {
            let mut scenario: Scenario<f64> = loaded.scenario.clone();
            scenario.cone = loaded.cones[row.cone_index].1.clone();
            let params = solver_params(loaded.task, row.eps0, &loaded.solver);
            let start = Instant::now();
            let solution = solve(loaded.task, row.target, &scenario, &params)
                .map_err(|e| format!("row {} ({}, {}, {}): {e}", row.index, row.target_name, row.cone_name, row.eps0))?;
            Ok(RowResult { spec: row, solution, wall_time: start.elapsed().as_secs_f64() })
        })
        .collect()
}

pub const CSV_HEADER: &str =
    "target,cone,eps0,x_n,y_n,z_n,phi_deg,psi_deg,k_total,time_s,status,branch,residual,distance,note";

/// One CSV line per row, dashes for the point columns of rows that did
/// not converge, mirroring the table layout.
pub fn csv_row(row: &RowResult, task: Task) -> String {
    let mut line = String::new();
    let s = &row.spec;
    write!(line, "{},{},{}", s.target_name, s.cone_name, s.eps0).unwrap();
    match row.solution.best_result() {
        Some(r) => {
            let a = r.angles.expect("converged result has angles");
            let z = if task == Task::Planar { 0.0 } else { r.point.z };
            write!(
                line,
                ",{:.1},{:.1},{:.1},{:.1},{:.1},{},{:.3},{},{},{:.6},{:.1},{}",
                r.point.x,
                r.point.y,
                z,
                a.phi.to_degrees(),
                a.psi.to_degrees(),
                r.iterations,
                row.wall_time,
                r.status.as_str(),
                r.branch.index(),
                r.residual,
                r.distance,
                if r.grazing { "grazing" } else { "" },
            )
            .unwrap();
        }
        None => {
            let statuses: Vec<&str> = row
                .solution
                .branches
                .iter()
                .map(|b| b.result.status.as_str())
                .collect();
            let iterations: usize =
                row.solution.branches.iter().map(|b| b.result.iterations).sum();
            write!(
                line,
                ",-,-,-,-,-,{},{:.3},{},-,-,-,",
                iterations,
                row.wall_time,
                statuses.join("/"),
            )
            .unwrap();
        }
    }
    line
}

pub fn csv_document(rows: &[RowResult], task: Task) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&csv_row(row, task));
        out.push('\n');
    }
    out
}

/// Flat key=value trace dump, one line per iteration, per branch.
pub fn trace_document(row: &RowResult) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for branch in &row.solution.branches {
        let mut out = String::new();
        for rec in &branch.trace.iterations {
            writeln!(
                out,
                "k={} eps={:.9} residual={:.9} radius_inc={} cum_radius={:.6} x={:.6} y={:.6} z={:.6}",
                rec.k,
                rec.eps,
                rec.residual,
                rec.radius_inc.map_or("-".to_string(), |r| format!("{r:.9}")),
                rec.cum_radius,
                rec.point.x,
                rec.point.y,
                rec.point.z,
            )
            .unwrap();
        }
        for q in &branch.trace.q_points {
            writeln!(
                out,
                "q k={} residual={:.9} x={:.6} y={:.6} z={:.6}",
                q.k, q.residual, q.point.x, q.point.y, q.point.z
            )
            .unwrap();
        }
        files.push((
            format!("trace_row{}_branch{}.txt", row.spec.index, branch.result.branch.index()),
            out,
        ));
    }
    files
}

/// Samples the solution arc from the muzzle to the impact point.
pub fn export_polyline(
    scenario: &Scenario<f64>,
    row: &RowResult,
    n_samples: usize,
) -> Result<String, String> {
    let result = row
        .solution
        .best_result()
        .ok_or_else(|| format!("row {} did not converge", row.spec.index))?;
    let angles: ShotAngles<f64> = result.angles.expect("converged result has angles");
    let r_n = result.point.range();
    let mut out = String::from("mu,x,y,z\n");
    let denom = (n_samples - 1).max(1) as f64;
    for i in 0..n_samples {
        let mu = i as f64 / denom;
        let p = trajectory_point(&scenario.ctx, angles, mu * r_n).map_err(|e| e.to_string())?;
        writeln!(out, "{mu:.6},{:.6},{:.6},{:.6}", p.x, p.y, p.z).unwrap();
    }
    Ok(out)
}

/// Exit code contract: 0 all converged, 1 some rows non-converged.
pub fn exit_code(rows: &[RowResult]) -> i32 {
    if rows.iter().all(|r| r.converged()) {
        0
    } else {
        1
    }
}

/// Human-readable one-line summary per row, for stderr.
pub fn summary_line(row: &RowResult) -> String {
    let s = &row.spec;
    match row.solution.best_result() {
        Some(r) => {
            let a = r.angles.unwrap();
            format!(
                "row {:2} {:10} {:8} eps={:<5} -> ({:9.1}, {:7.1}, {:7.1})  phi={:6.1}°  psi={:5.1}°  k={:<7} {:7.3}s  {}",
                s.index,
                s.target_name,
                s.cone_name,
                s.eps0,
                r.point.x,
                r.point.y,
                r.point.z,
                a.phi.to_degrees(),
                a.psi.to_degrees(),
                r.iterations,
                row.wall_time,
                r.status.as_str(),
            )
        }
        None => format!(
            "row {:2} {:10} {:8} eps={:<5} -> non-converged ({})",
            s.index,
            s.target_name,
            s.cone_name,
            s.eps0,
            row.solution
                .branches
                .iter()
                .map(|b| b.result.status.as_str())
                .collect::<Vec<_>>()
                .join("/"),
        ),
    }
}
