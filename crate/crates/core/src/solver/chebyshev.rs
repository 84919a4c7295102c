//! Center of the smallest circle enclosing a finite planar target set,
//! used to reduce a multi-point target to a single aim point.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnclosingCircle<T> {
    pub center: (T, T),
    pub radius: T,
}

fn dist<T: Real>(a: (T, T), b: (T, T)) -> T {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn contains<T: Real>(c: &EnclosingCircle<T>, p: (T, T)) -> bool {
    dist(c.center, p) <= c.radius * (T::one() + lit::<T>(1e-12)) + lit::<T>(1e-12)
}

fn circle_from_two<T: Real>(a: (T, T), b: (T, T)) -> EnclosingCircle<T> {
    let half = lit::<T>(0.5);
    let center = ((a.0 + b.0) * half, (a.1 + b.1) * half);
    EnclosingCircle { center, radius: dist(center, a).max(dist(center, b)) }
}

fn circle_from_three<T: Real>(a: (T, T), b: (T, T), c: (T, T)) -> Option<EnclosingCircle<T>> {
    let d = lit::<T>(2.0) * (a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1));
    if d == T::zero() {
        return None;
    }
    let aa = a.0 * a.0 + a.1 * a.1;
    let bb = b.0 * b.0 + b.1 * b.1;
    let cc = c.0 * c.0 + c.1 * c.1;
    let ux = (aa * (b.1 - c.1) + bb * (c.1 - a.1) + cc * (a.1 - b.1)) / d;
    let uy = (aa * (c.0 - b.0) + bb * (a.0 - c.0) + cc * (b.0 - a.0)) / d;
    let center = (ux, uy);
    let radius = dist(center, a).max(dist(center, b)).max(dist(center, c));
    Some(EnclosingCircle { center, radius })
}

/// Smallest enclosing circle by the move-to-front incremental method with
/// a fixed deterministic shuffle.
pub fn smallest_enclosing_circle<T: Real>(points: &[(T, T)]) -> Result<EnclosingCircle<T>> {
    if points.is_empty() {
        return Err(Error::Domain("target set must be non-empty".into()));
    }
    let mut pts = points.to_vec();
    let mut state = 0x853c49e6748fea9bu64;
    for i in (1..pts.len()).rev() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let j = (state >> 33) as usize % (i + 1);
        pts.swap(i, j);
    }

    let mut circle = EnclosingCircle { center: pts[0], radius: T::zero() };
    for i in 1..pts.len() {
        if contains(&circle, pts[i]) {
            continue;
        }
        circle = EnclosingCircle { center: pts[i], radius: T::zero() };
        for j in 0..i {
            if contains(&circle, pts[j]) {
                continue;
            }
            circle = circle_from_two(pts[i], pts[j]);
            for k in 0..j {
                if contains(&circle, pts[k]) {
                    continue;
                }
                circle = circle_from_three(pts[i], pts[j], pts[k])
                    .unwrap_or_else(|| circle_from_two(pts[i], pts[j]));
            }
        }
    }
    Ok(circle)
}

/// The single aim point replacing a multi-point planar target.
pub fn chebyshev_center<T: Real>(points: &[(T, T)]) -> Result<(T, T)> {
    Ok(smallest_enclosing_circle(points)?.center)
}
