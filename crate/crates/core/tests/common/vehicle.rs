//! Hand-written single-track vehicle update and polygon geometry used as
//! reference points for the vehicle model.

use scrl::system::BmwParams;

/// Noise-free successor, branch chosen by `|x4| < 0.1`. Inputs are assumed
/// already inside the saturation box.
pub fn reference_drift(p: &BmwParams, x: &[f64], nu: &[f64]) -> ([f64; 7], bool) {
    let (x3, x4, x5, x6, x7) = (x[2], x[3], x[4], x[5], x[6]);
    let (v1, v2) = (nu[0], nu[1]);
    let low = x4.abs() < 0.1;
    let mut d = [0.0; 7];
    d[2] = v1;
    d[3] = v2;
    if low {
        let lwb = p.wheelbase;
        d[0] = x4 * x5.cos();
        d[1] = x4 * x5.sin();
        d[4] = x4 / lwb * x3.tan();
        d[5] = v2 / lwb * x3.tan() + x4 / (lwb * x3.cos().powi(2)) * v1;
        d[6] = 0.0;
    } else {
        let g = p.gravity;
        let (lf, lr, h) = (p.l_front, p.l_rear, p.h_cg);
        let cf = p.stiffness_front * (g * lr - v2 * h);
        let cr = p.stiffness_rear * (g * lf + v2 * h);
        d[0] = x4 * (x5 + x7).cos();
        d[1] = x4 * (x5 + x7).sin();
        d[4] = x6;
        d[5] = p.friction * p.mass / (p.inertia_z * (lr + lf))
            * (lf * cf * x3 + (lr * cr - lf * cf) * x7 - (lf * lf * cf + lr * lr * cr) * x6 / x4);
        d[6] = p.friction / (x4 * (lr + lf))
            * (cf * x3 + (cr + cf) * x7 - (lf * cf - lr * cr) * x6 / x4)
            - x6;
    }
    let mut out = [0.0; 7];
    for i in 0..7 {
        out[i] = x[i] + p.tau * d[i];
    }
    (out, low)
}

type Pt = (f64, f64);

fn cross(o: Pt, a: Pt, b: Pt) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn on_segment(p: Pt, a: Pt, b: Pt) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

fn segments_meet(a: Pt, b: Pt, c: Pt, d: Pt) -> bool {
    let (d1, d2) = (cross(c, d, a), cross(c, d, b));
    let (d3, d4) = (cross(a, b, c), cross(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(a, c, d))
        || (d2 == 0.0 && on_segment(b, c, d))
        || (d3 == 0.0 && on_segment(c, a, b))
        || (d4 == 0.0 && on_segment(d, a, b))
}

/// Point in a convex polygon given in either orientation, boundary included.
fn inside_convex(p: Pt, poly: &[Pt]) -> bool {
    let n = poly.len();
    let signs: Vec<f64> = (0..n)
        .map(|i| cross(poly[i], poly[(i + 1) % n], p))
        .collect();
    signs.iter().all(|s| *s >= 0.0) || signs.iter().all(|s| *s <= 0.0)
}

/// Closed polygons intersect iff an edge pair crosses or one contains a
/// vertex of the other.
pub fn polygons_intersect(a: &[Pt], b: &[Pt]) -> bool {
    for i in 0..a.len() {
        for j in 0..b.len() {
            if segments_meet(a[i], a[(i + 1) % a.len()], b[j], b[(j + 1) % b.len()]) {
                return true;
            }
        }
    }
    a.iter().any(|p| inside_convex(*p, b)) || b.iter().any(|p| inside_convex(*p, a))
}

/// Corners of a `length × width` body centred at `(cx, cy)` rotated by `yaw`.
pub fn body(cx: f64, cy: f64, yaw: f64, length: f64, width: f64) -> Vec<Pt> {
    let (hl, hw) = (length / 2.0, width / 2.0);
    [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
        .iter()
        .map(|&(dx, dy)| {
            (
                cx + dx * yaw.cos() - dy * yaw.sin(),
                cy + dx * yaw.sin() + dy * yaw.cos(),
            )
        })
        .collect()
}

pub fn rectangle(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Vec<Pt> {
    vec![(x_lo, y_lo), (x_hi, y_lo), (x_hi, y_hi), (x_lo, y_hi)]
}
