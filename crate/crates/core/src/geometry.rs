//! Small real-valued vector helpers shared by the recognizer and beautifier.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_angle_deg(deg: f64) -> Self {
        let r = deg.to_radians();
        Vec2::new(r.cos(), r.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Direction in degrees, in (-180, 180].
    pub fn angle_deg(self) -> f64 {
        self.y.atan2(self.x).to_degrees()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

pub fn distance(a: Vec2, b: Vec2) -> f64 {
    (a - b).norm()
}

/// Unsigned angle between two nonzero vectors, in [0, 180] degrees.
pub fn angle_between_deg(a: Vec2, b: Vec2) -> f64 {
    a.cross(b).abs().atan2(a.dot(b)).to_degrees()
}

/// Distance from `p` to the closed segment `a`-`b`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return distance(p, a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    distance(p, a + ab * t)
}

/// Wraps an angle in degrees into [0, 360).
pub fn wrap_deg(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// Signed difference `to - from` wrapped into (-180, 180].
pub fn signed_delta_deg(from: f64, to: f64) -> f64 {
    let d = wrap_deg(to - from);
    if d > 180.0 {
        d - 360.0
    } else {
        d
    }
}
