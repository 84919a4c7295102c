//! Deterministic grid minimization of the residual over the boundary
//! sphere (or circle) of the expanding ball, restricted to the reachable
//! set.
//!
//! Candidates are scanned in index order; ties keep the first index. A
//! parallel scan reduces `(value, index)` pairs with a total order, so the
//! result is bit-stable regardless of thread count.

use rayon::prelude::*;

use crate::geometry::ImpactPoint3;
use crate::scalar::{lit, Real};

/// Evaluator contract: `None` when the point is outside the reachable
/// set; otherwise the residual, which may be returned partially evaluated
/// once it is known to reach `cutoff`.
pub trait SphereEval<T>: Sync {
    fn eval(&self, p: ImpactPoint3<T>, cutoff: T) -> Option<T>;
}

impl<T, F> SphereEval<T> for F
where
    F: Fn(ImpactPoint3<T>, T) -> Option<T> + Sync,
{
    fn eval(&self, p: ImpactPoint3<T>, cutoff: T) -> Option<T> {
        self(p, cutoff)
    }
}

#[derive(Clone, Copy)]
struct Candidate<T> {
    value: T,
    index: usize,
    point: ImpactPoint3<T>,
}

fn better<T: Real>(new: &Candidate<T>, old: &Option<Candidate<T>>) -> bool {
    match old {
        None => true,
        Some(o) => new.value < o.value || (new.value == o.value && new.index < o.index),
    }
}

fn combine<T: Real>(a: Option<Candidate<T>>, b: Option<Candidate<T>>) -> Option<Candidate<T>> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            if better(&y, &Some(x)) {
                Some(y)
            } else {
                Some(x)
            }
        }
    }
}

/// Minimizes the evaluator over the circle of radius `radius` about
/// `center` in the z-plane of the center. Returns `None` when no grid
/// point lies in the reachable set.
///
/// `refine_threshold`: zooming below the coarse cell only matters when
/// the value is close to a solver decision threshold; coarse minima at or
/// above the threshold are returned as found.
pub fn circle_argmin<T: Real, F: SphereEval<T>>(
    center: ImpactPoint3<T>,
    radius: T,
    f: &F,
    samples: usize,
    refine_levels: usize,
    refine_threshold: Option<T>,
) -> Option<(ImpactPoint3<T>, T)> {
    debug_assert!(samples >= 4);
    let tau = T::TAU();
    let step = tau / lit::<T>(samples as f64);
    let at = |theta: T| {
        ImpactPoint3::new(
            center.x + radius * theta.cos(),
            center.y + radius * theta.sin(),
            center.z,
        )
    };

    let mut best: Option<Candidate<T>> = None;
    let mut best_theta = T::zero();
    for i in 0..samples {
        let theta = step * lit::<T>(i as f64);
        let cutoff = best.as_ref().map_or(T::infinity(), |b| b.value);
        if let Some(v) = f.eval(at(theta), cutoff) {
            let cand = Candidate { value: v, index: i, point: at(theta) };
            if better(&cand, &best) {
                best = Some(cand);
                best_theta = theta;
            }
        }
    }
    let mut best = best?;
    if let Some(threshold) = refine_threshold {
        if best.value >= threshold {
            return Some((best.point, best.value));
        }
    }

    // Zoom into the bracket around the best sample; 17 sub-samples per
    // level shrink the cell by a factor of 8.
    let mut span = step;
    for _ in 0..refine_levels {
        let n = 17usize;
        let sub = lit::<T>(2.0) * span / lit::<T>((n - 1) as f64);
        let lo = best_theta - span;
        let mut improved_theta = best_theta;
        for i in 0..n {
            let theta = lo + sub * lit::<T>(i as f64);
            if let Some(v) = f.eval(at(theta), best.value) {
                if v < best.value {
                    best = Candidate { value: v, index: best.index, point: at(theta) };
                    improved_theta = theta;
                }
            }
        }
        best_theta = improved_theta;
        span = sub;
    }
    Some((best.point, best.value))
}

/// Minimizes the evaluator over the sphere of radius `radius` about
/// `center`. The grid is uniform in spherical angles; rows are scanned in
/// parallel and reduced deterministically.
pub fn sphere_argmin<T: Real, F: SphereEval<T>>(
    center: ImpactPoint3<T>,
    radius: T,
    f: &F,
    samples: usize,
    refine_levels: usize,
    refine_threshold: Option<T>,
) -> Option<(ImpactPoint3<T>, T)> {
    debug_assert!(samples >= 4);
    let n_alpha = samples;
    let n_beta = samples;
    let alpha_step = T::TAU() / lit::<T>(n_alpha as f64);
    let beta_step = T::PI() / lit::<T>((n_beta - 1) as f64);
    let alpha_trig: Vec<(T, T)> = (0..n_alpha)
        .map(|i| {
            let alpha = -T::PI() + alpha_step * lit::<T>(i as f64);
            (alpha.sin(), alpha.cos())
        })
        .collect();
    let at = |alpha: T, beta: T| {
        let (sb, cb) = (beta.sin(), beta.cos());
        ImpactPoint3::new(
            center.x + radius * cb * alpha.cos(),
            center.y + radius * cb * alpha.sin(),
            center.z + radius * sb,
        )
    };

    let scan_row = |mut acc: Option<Candidate<T>>, j: usize| {
        let beta = -T::FRAC_PI_2() + beta_step * lit::<T>(j as f64);
        let (sb, cb) = (beta.sin(), beta.cos());
        let (rc, rs) = (radius * cb, radius * sb);
        for (i, (sa, ca)) in alpha_trig.iter().enumerate() {
            let p = ImpactPoint3::new(center.x + rc * *ca, center.y + rc * *sa, center.z + rs);
            let cutoff = acc.as_ref().map_or(T::infinity(), |b| b.value);
            if let Some(v) = f.eval(p, cutoff) {
                let cand = Candidate { value: v, index: j * n_alpha + i, point: p };
                if better(&cand, &acc) {
                    acc = Some(cand);
                }
            }
        }
        acc
    };
    // Small grids are cheaper on one thread than under the scheduler; the
    // reduce keyed on (value, index) makes both paths agree bit for bit.
    // Coarse chunks keep the running-best cutoff effective for pruning.
    let best = if n_alpha * n_beta <= 2048 {
        (0..n_beta).fold(None, scan_row)
    } else {
        let threads = rayon::current_num_threads().max(1);
        (0..n_beta)
            .into_par_iter()
            .with_min_len(n_beta.div_ceil(threads))
            .fold(|| None, scan_row)
            .reduce(|| None, combine)
    };
    let mut best = best?;
    if let Some(threshold) = refine_threshold {
        if best.value >= threshold {
            return Some((best.point, best.value));
        }
    }

    let j = best.index / n_alpha;
    let i = best.index % n_alpha;
    let mut alpha0 = -T::PI() + alpha_step * lit::<T>(i as f64);
    let mut beta0 = -T::FRAC_PI_2() + beta_step * lit::<T>(j as f64);
    let mut span_a = alpha_step;
    let mut span_b = beta_step;
    for _ in 0..refine_levels {
        let n = 9usize;
        let sub_a = lit::<T>(2.0) * span_a / lit::<T>((n - 1) as f64);
        let sub_b = lit::<T>(2.0) * span_b / lit::<T>((n - 1) as f64);
        let (mut na, mut nb) = (alpha0, beta0);
        for jj in 0..n {
            let beta = (beta0 - span_b + sub_b * lit::<T>(jj as f64))
                .max(-T::FRAC_PI_2())
                .min(T::FRAC_PI_2());
            for ii in 0..n {
                let alpha = alpha0 - span_a + sub_a * lit::<T>(ii as f64);
                if let Some(v) = f.eval(at(alpha, beta), best.value) {
                    if v < best.value {
                        best = Candidate { value: v, index: best.index, point: at(alpha, beta) };
                        na = alpha;
                        nb = beta;
                    }
                }
            }
        }
        alpha0 = na;
        beta0 = nb;
        span_a = sub_a;
        span_b = sub_b;
    }
    Some((best.point, best.value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_finds_known_minimizer() {
        // Distance to a fixed point on the circle: unique minimizer there.
        let target = ImpactPoint3::new(110.0, 10.0, 0.0);
        let center = ImpactPoint3::new(100.0, 10.0, 0.0);
        let f = |p: ImpactPoint3<f64>, _c: f64| Some(p.dist(&target));
        let (p, v) = circle_argmin(center, 10.0, &f, 512, 3, None).unwrap();
        assert!(v < 1e-3);
        assert!(p.dist(&target) < 1e-3);
    }

    #[test]
    fn circle_constant_ties_break_to_first_index() {
        let center = ImpactPoint3::new(0.0, 0.0, 0.0);
        let f = |_p: ImpactPoint3<f64>, _c: f64| Some(1.0);
        let (p, v) = circle_argmin(center, 5.0, &f, 64, 0, None).unwrap();
        assert_eq!(v, 1.0);
        // θ = 0 is index 0.
        assert!((p.x - 5.0).abs() < 1e-12 && p.y.abs() < 1e-12);
    }

    #[test]
    fn circle_empty_filter() {
        let center = ImpactPoint3::new(0.0, 0.0, 0.0);
        let f = |_p: ImpactPoint3<f64>, _c: f64| -> Option<f64> { None };
        assert!(circle_argmin(center, 5.0, &f, 64, 2, None).is_none());
    }

    #[test]
    fn circle_matches_dense_sweep() {
        // Cone-style residual about a planar target; compare against a
        // dense angular sweep within one coarse cell.
        let center = ImpactPoint3::new(2700.0, 0.0, 0.0);
        let radius = 100.0;
        let f = |p: ImpactPoint3<f64>, _c: f64| {
            let r = p.range();
            if r > 3303.0 {
                return None;
            }
            let psi = 0.5 * (r / 3303.88).asin();
            let phi = (p.y / p.x).atan();
            Some((35f64.to_radians() - psi).max(phi.abs() - 0.2))
        };
        let (_, v) = circle_argmin(center, radius, &f, 2048, 2, None).unwrap();
        let mut dense = f64::INFINITY;
        for i in 0..1_000_000u32 {
            let th = i as f64 / 1e6 * std::f64::consts::TAU;
            let p = ImpactPoint3::new(center.x + radius * th.cos(), center.y + radius * th.sin(), 0.0);
            if let Some(val) = f(p, f64::INFINITY) {
                dense = dense.min(val);
            }
        }
        assert!((v - dense).abs() < 1e-6, "grid {v} vs dense {dense}");
    }

    #[test]
    fn sphere_finds_known_minimizer() {
        let target = ImpactPoint3::new(103.0, -4.0, 7.0);
        let center = ImpactPoint3::new(100.0, 0.0, 0.0);
        let radius = center.dist(&target);
        let f = |p: ImpactPoint3<f64>, _c: f64| Some(p.dist(&target));
        let (p, v) = sphere_argmin(center, radius, &f, 64, 3, None).unwrap();
        assert!(v < 1e-2, "value = {v}");
        assert!(p.dist(&target) < 1e-2);
    }

    #[test]
    fn sphere_deterministic_across_runs() {
        let center = ImpactPoint3::new(50.0, 2.0, -3.0);
        let f = |p: ImpactPoint3<f64>, _c: f64| {
            Some((p.x * 0.37).sin() + (p.y * 1.3).cos() * 0.5 + (p.z * 0.11).sin())
        };
        let a = sphere_argmin(center, 20.0, &f, 96, 2, None).unwrap();
        let b = sphere_argmin(center, 20.0, &f, 96, 2, None).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn sphere_pruning_matches_unpruned() {
        // An evaluator that honors the cutoff contract must give the same
        // argmin as full evaluation.
        let center = ImpactPoint3::new(0.0, 0.0, 0.0);
        let full = |p: ImpactPoint3<f64>| (p.x - 3.0).abs().max(0.2 * (p.y + 1.0).abs());
        let pruned = |p: ImpactPoint3<f64>, c: f64| {
            let cheap = (p.x - 3.0).abs();
            if cheap >= c {
                return Some(cheap);
            }
            Some(full(p))
        };
        let exact = |p: ImpactPoint3<f64>, _c: f64| Some(full(p));
        let a = sphere_argmin(center, 5.0, &pruned, 48, 2, None).unwrap();
        let b = sphere_argmin(center, 5.0, &exact, 48, 2, None).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }
}
