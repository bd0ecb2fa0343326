//! Planar geometry shared by the world model and the motion planner.

use serde::{Deserialize, Serialize};

/// Axis-aligned rectangle in table coordinates (meters).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl Aabb {
    pub const fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Self {
        Aabb { xmin, ymin, xmax, ymax }
    }

    /// Box of the given half extents centered on `(cx, cy)`.
    pub fn centered(cx: f64, cy: f64, half_x: f64, half_y: f64) -> Self {
        Aabb::new(cx - half_x, cy - half_y, cx + half_x, cy + half_y)
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Aabb::new(v[0], v[1], v[2], v[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.xmin, self.ymin, self.xmax, self.ymax]
    }

    pub fn is_valid(&self) -> bool {
        self.xmax > self.xmin && self.ymax > self.ymin && self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.xmin + self.xmax) / 2.0, (self.ymin + self.ymax) / 2.0)
    }

    pub fn half_extents(&self) -> (f64, f64) {
        (self.width() / 2.0, self.height() / 2.0)
    }

    /// Open-interval overlap: boxes that only share an edge do not overlap.
    pub fn overlaps(&self, other: &Aabb) -> bool {
        self.xmin < other.xmax && other.xmin < self.xmax && self.ymin < other.ymax && other.ymin < self.ymax
    }

    /// Closed containment of a point.
    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.xmin && x <= self.xmax && y >= self.ymin && y <= self.ymax
    }

    pub fn contains(&self, other: &Aabb) -> bool {
        other.xmin >= self.xmin && other.xmax <= self.xmax && other.ymin >= self.ymin && other.ymax <= self.ymax
    }

    pub fn inflate(&self, margin: f64) -> Aabb {
        Aabb::new(self.xmin - margin, self.ymin - margin, self.xmax + margin, self.ymax + margin)
    }

    pub fn translated_to(&self, cx: f64, cy: f64) -> Aabb {
        let (hx, hy) = self.half_extents();
        Aabb::centered(cx, cy, hx, hy)
    }

    /// Smallest box covering both.
    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb::new(
            self.xmin.min(other.xmin),
            self.ymin.min(other.ymin),
            self.xmax.max(other.xmax),
            self.ymax.max(other.ymax),
        )
    }
}

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &Point2, t: f64) -> Point2 {
        Point2::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn touching_boxes_do_not_overlap() {
        let a = Aabb::new(0.0, 0.0, 1.0, 1.0);
        let b = Aabb::new(1.0, 0.0, 2.0, 1.0);
        assert!(!a.overlaps(&b));
        assert!(a.overlaps(&Aabb::new(0.99, 0.5, 2.0, 0.6)));
    }

    #[test]
    fn translate_keeps_extents() {
        let a = Aabb::new(0.0, 0.0, 0.2, 0.1).translated_to(1.0, 1.0);
        assert!((a.width() - 0.2).abs() < 1e-12);
        assert!((a.height() - 0.1).abs() < 1e-12);
        assert_eq!(a.center(), (1.0, 1.0));
    }
}
