//! Independent oracles shared by the integration tests. None of these call
//! into the library code they are used to check.

#![allow(dead_code)]

/// Central finite-difference gradient of `f` at `x`.
pub fn central_diff(f: impl Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + step;
            let up = f(&probe);
            probe[i] = x[i] - step;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * step)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, 0 when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

/// Is the point `(x, y)` inside the `w × h` rectangle centered at the origin
/// and rotated by `deg` degrees?
fn inside_rotated(x: f64, y: f64, w: f64, h: f64, deg: f64) -> bool {
    let (s, c) = deg.to_radians().sin_cos();
    // Rotate the point back into the rectangle's own frame.
    let u = x * c + y * s;
    let v = -x * s + y * c;
    let tol = 1e-9;
    u.abs() <= w / 2.0 + tol && v.abs() <= h / 2.0 + tol
}

/// Tallest height for an origin-centered `width`-wide axis-aligned rectangle
/// whose four corners lie inside the rotated rectangle.
fn max_height(width: f64, w: f64, h: f64, deg: f64) -> f64 {
    let fits = |hh: f64| {
        [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .iter()
            .all(|(sx, sy)| inside_rotated(sx * width / 2.0, sy * hh / 2.0, w, h, deg))
    };
    if !fits(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, w.hypot(h));
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Brute-force maximum-area inscribed rectangle: integer scan over the crop
/// width, bisection for the height, then a 0.01 px refinement around the
/// best integer width. Returns `(width, height)`.
pub fn brute_force_rect(w: f64, h: f64, deg: f64) -> (f64, f64) {
    let limit = w.hypot(h).ceil() as usize;
    let mut best = (0.0, 0.0);
    for iw in 1..=limit {
        let width = iw as f64;
        let height = max_height(width, w, h, deg);
        if width * height > best.0 * best.1 {
            best = (width, height);
        }
    }
    let center = best.0;
    let mut k = -100;
    while k <= 100 {
        let width = center + k as f64 * 0.01;
        if width > 0.0 {
            let height = max_height(width, w, h, deg);
            if width * height > best.0 * best.1 {
                best = (width, height);
            }
        }
        k += 1;
    }
    best
}

/// AUC@k by left Riemann sum of the empirical accuracy curve on a 0.001°
/// grid, normalized by `k`.
pub fn riemann_auc(errors: &[f64], k: f64) -> f64 {
    let step = 0.001;
    let steps = (k / step).round() as usize;
    let n = errors.len() as f64;
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut covered = 0usize;
    let mut area = 0.0;
    for i in 0..steps {
        let t = (i as f64 + 0.5) * step;
        while covered < sorted.len() && sorted[covered] <= t {
            covered += 1;
        }
        area += covered as f64 / n * step;
    }
    area / k
}

/// Shortest way around the circle between two angles in degrees.
pub fn wrap_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs() % 360.0;
    d.min(360.0 - d)
}
