//! Planar points, poses and polyline utilities.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

/// Position plus heading (radians, counter-clockwise from +x).
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose2 {
    pub fn point(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    /// Pose after travelling `s` along an arc of curvature `k`.
    pub fn advance(&self, s: f64, k: f64) -> Pose2 {
        let h = self.heading;
        if k.abs() < 1e-12 {
            Pose2 {
                x: self.x + s * h.cos(),
                y: self.y + s * h.sin(),
                heading: h,
            }
        } else {
            let h1 = h + k * s;
            Pose2 {
                x: self.x + (h1.sin() - h.sin()) / k,
                y: self.y - (h1.cos() - h.cos()) / k,
                heading: h1,
            }
        }
    }

    pub fn rotate(&self, angle: f64) -> Pose2 {
        Pose2 {
            heading: self.heading + angle,
            ..*self
        }
    }
}

pub fn polyline_length(pts: &[Point2]) -> f64 {
    pts.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Point at arc length `s` (clamped to the ends).
pub fn point_at_arclength(pts: &[Point2], s: f64) -> Point2 {
    assert!(!pts.is_empty());
    if s <= 0.0 {
        return pts[0];
    }
    let mut acc = 0.0;
    for w in pts.windows(2) {
        let d = w[0].dist(w[1]);
        if acc + d >= s && d > 0.0 {
            return w[0].lerp(w[1], (s - acc) / d);
        }
        acc += d;
    }
    *pts.last().unwrap()
}

/// `n` points spaced uniformly by arc length, endpoints included.
pub fn resample(pts: &[Point2], n: usize) -> Vec<Point2> {
    assert!(n >= 2 && !pts.is_empty());
    let total = polyline_length(pts);
    // single pass over the segments instead of a search per sample
    let mut out = Vec::with_capacity(n);
    let mut seg = 0usize;
    let mut acc = 0.0;
    for i in 0..n {
        let s = total * i as f64 / (n - 1) as f64;
        while seg + 1 < pts.len() - 1 && acc + pts[seg].dist(pts[seg + 1]) < s {
            acc += pts[seg].dist(pts[seg + 1]);
            seg += 1;
        }
        if pts.len() == 1 {
            out.push(pts[0]);
            continue;
        }
        let d = pts[seg].dist(pts[seg + 1]);
        let t = if d > 0.0 { ((s - acc) / d).clamp(0.0, 1.0) } else { 0.0 };
        out.push(pts[seg].lerp(pts[seg + 1], t));
    }
    *out.last_mut().unwrap() = *pts.last().unwrap();
    out
}

/// Sub-polyline between arc lengths `s0 <= s1`.
pub fn slice_arclength(pts: &[Point2], s0: f64, s1: f64) -> Vec<Point2> {
    let mut out = vec![point_at_arclength(pts, s0)];
    let mut acc = 0.0;
    for w in pts.windows(2) {
        acc += w[0].dist(w[1]);
        if acc > s0 && acc < s1 {
            out.push(w[1]);
        }
    }
    out.push(point_at_arclength(pts, s1));
    out
}

/// Discrete Fréchet distance (Eiter–Mannila coupling recurrence).
pub fn discrete_frechet(a: &[Point2], b: &[Point2]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let m = b.len();
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    for (i, &pa) in a.iter().enumerate() {
        for (j, &pb) in b.iter().enumerate() {
            let d = pa.dist(pb);
            cur[j] = match (i, j) {
                (0, 0) => d,
                (0, _) => cur[j - 1].max(d),
                (_, 0) => prev[0].max(d),
                _ => prev[j].min(prev[j - 1]).min(cur[j - 1]).max(d),
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Shape metric: discrete Fréchet distance after resampling both curves to
/// `SHAPE_SAMPLES` points.
pub const SHAPE_SAMPLES: usize = 64;

pub fn shape_distance(a: &[Point2], b: &[Point2]) -> f64 {
    discrete_frechet(&resample(a, SHAPE_SAMPLES), &resample(b, SHAPE_SAMPLES))
}

/// Wrap an angle into (−π, π].
pub fn wrap_angle(a: f64) -> f64 {
    let two_pi = std::f64::consts::TAU;
    let mut r = a.rem_euclid(two_pi);
    if r > std::f64::consts::PI {
        r -= two_pi;
    }
    r
}
