//! Closed-form proximal maps shared by several operator kinds.

use nalgebra::DVector;

/// Scalar soft-thresholding, the prox of `t|.|`.
#[inline]
pub fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Euclidean projection onto the standard simplex `{x >= 0, sum(x) = 1}`.
///
/// Sort-based threshold search: after sorting `z` in decreasing order, the
/// active support is the longest prefix whose entries stay above the running
/// threshold `(prefix_sum - 1) / len`.
pub fn project_simplex(z: &DVector<f64>) -> DVector<f64> {
    let mut sorted: Vec<f64> = z.iter().copied().collect();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));

    let mut prefix = 0.0;
    let mut tau = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        prefix += u;
        let candidate = (prefix - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    z.map(|v| (v - tau).max(0.0))
}

/// Projection onto the halfspace `{x : <normal, x> >= bound}`.
pub fn project_halfspace(z: &DVector<f64>, normal: &DVector<f64>, bound: f64) -> DVector<f64> {
    let gap = bound - normal.dot(z);
    if gap <= 0.0 {
        z.clone()
    } else {
        z + normal * (gap / normal.norm_squared())
    }
}

/// Prox of `step * |y - x|` on the pair `(x, y)`.
///
/// Both ends move toward each other by `min(step, |y - x| / 2)`, so the mean
/// is preserved and the pair never crosses.
pub fn tv_pair_prox(pair: (f64, f64), step: f64) -> (f64, f64) {
    let (x, y) = pair;
    let diff = y - x;
    if diff == 0.0 {
        return pair;
    }
    if step >= diff.abs() / 2.0 {
        let mean = x + diff / 2.0;
        return (mean, mean);
    }
    let shift = step.copysign(diff);
    (x + shift, y - shift)
}

/// Resolvent of the Poisson negative log-likelihood `weight * sum(x - y log x)`.
///
/// Solves `x^2 - (z - t) x - t y = 0` for the nonnegative root, `t = step * weight`.
pub fn poisson_prox(z: f64, y: f64, t: f64) -> f64 {
    let w = z - t;
    let radicand = w * w + 4.0 * t * y;
    debug_assert!(radicand >= 0.0, "negative radicand for y = {y}");
    let root = radicand.sqrt();
    if w >= 0.0 {
        0.5 * (w + root)
    } else if y == 0.0 {
        0.0
    } else {
        // same root, written without cancellation
        2.0 * t * y / (root - w)
    }
}
