use serde::{Deserialize, Serialize};

pub type Point3 = [f64; 3];

/// Axis-aligned box in meters. Membership is closed on every face.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 6]", into = "[f64; 6]")]
pub struct Box3 {
    pub min: Point3,
    pub max: Point3,
}

impl Box3 {
    pub fn new(lx: f64, rx: f64, ly: f64, ry: f64, lz: f64, rz: f64) -> Self {
        Box3 {
            min: [lx, ly, lz],
            max: [rx, ry, rz],
        }
    }

    /// From `[lx, rx, ly, ry, lz, rz]`.
    pub fn from_bounds(b: [f64; 6]) -> Self {
        Box3::new(b[0], b[1], b[2], b[3], b[4], b[5])
    }

    pub fn bounds(&self) -> [f64; 6] {
        [
            self.min[0], self.max[0], self.min[1], self.max[1], self.min[2], self.max[2],
        ]
    }

    pub fn unit_cube(origin: Point3) -> Self {
        Box3 {
            min: origin,
            max: [origin[0] + 1.0, origin[1] + 1.0, origin[2] + 1.0],
        }
    }

    /// Finite bounds with positive extent on every axis.
    pub fn is_valid(&self) -> bool {
        (0..3).all(|a| self.min[a].is_finite() && self.max[a].is_finite() && self.min[a] < self.max[a])
    }

    #[inline]
    pub fn contains_point(&self, p: Point3) -> bool {
        (0..3).all(|a| self.min[a] <= p[a] && p[a] <= self.max[a])
    }

    pub fn contains_box(&self, other: &Box3) -> bool {
        (0..3).all(|a| self.min[a] <= other.min[a] && other.max[a] <= self.max[a])
    }

    /// True when the open interiors overlap; boxes sharing only a face or
    /// an edge do not.
    pub fn interiors_intersect(&self, other: &Box3) -> bool {
        (0..3).all(|a| self.min[a] < other.max[a] && other.min[a] < self.max[a])
    }

    pub fn union(&self, other: &Box3) -> Box3 {
        let mut out = *self;
        for a in 0..3 {
            out.min[a] = out.min[a].min(other.min[a]);
            out.max[a] = out.max[a].max(other.max[a]);
        }
        out
    }

    pub fn center(&self) -> Point3 {
        [
            0.5 * (self.min[0] + self.max[0]),
            0.5 * (self.min[1] + self.max[1]),
            0.5 * (self.min[2] + self.max[2]),
        ]
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|a| self.max[a] - self.min[a]).product()
    }
}

impl From<[f64; 6]> for Box3 {
    fn from(b: [f64; 6]) -> Self {
        Box3::from_bounds(b)
    }
}

impl From<Box3> for [f64; 6] {
    fn from(b: Box3) -> Self {
        b.bounds()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_membership() {
        let b = Box3::new(0., 1., 0., 1., 0., 1.);
        assert!(b.contains_point([0., 0., 0.]));
        assert!(b.contains_point([1., 1., 1.]));
        assert!(!b.contains_point([1.000001, 0.5, 0.5]));
    }

    #[test]
    fn shared_face_is_not_interior_overlap() {
        let a = Box3::unit_cube([0., 0., 0.]);
        let b = Box3::unit_cube([1., 0., 0.]);
        assert!(!a.interiors_intersect(&b));
        let c = Box3::unit_cube([0.5, 0.5, 0.5]);
        assert!(a.interiors_intersect(&c));
    }

    #[test]
    fn degenerate() {
        assert!(!Box3::new(0., 0., 0., 1., 0., 1.).is_valid());
        assert!(!Box3::new(0., f64::NAN, 0., 1., 0., 1.).is_valid());
        assert!(Box3::unit_cube([3., 4., 5.]).is_valid());
    }

    #[test]
    fn serde_as_six_tuple() {
        let b: Box3 = serde_json::from_str("[0, 1, 2, 3, 4, 5.5]").unwrap();
        assert_eq!(b, Box3::new(0., 1., 2., 3., 4., 5.5));
        assert_eq!(serde_json::to_string(&b).unwrap(), "[0.0,1.0,2.0,3.0,4.0,5.5]");
    }
}
