//! Euclidean comparison triangles.

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Absolute tolerance for comparison-geometry floats.
pub const COMPARISON_TOL: f64 = 1e-9;

/// A side of the triangle `(x1, x2, x3)`, oriented from its first-named vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    X1X2,
    X1X3,
    X2X3,
}

impl Side {
    pub const ALL: [Side; 3] = [Side::X1X2, Side::X1X3, Side::X2X3];

    /// Endpoint vertex indices (0-based into `[x1, x2, x3]`).
    pub fn endpoints(self) -> (usize, usize) {
        match self {
            Side::X1X2 => (0, 1),
            Side::X1X3 => (0, 2),
            Side::X2X3 => (1, 2),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// A point on a triangle side at `offset` from the side's first endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideLocation {
    pub side: Side,
    pub offset: f64,
}

impl SideLocation {
    pub fn new(side: Side, offset: f64) -> Self {
        SideLocation { side, offset }
    }
}

/// Planar triangle with side lengths `a = d(x1,x2)`, `b = d(x1,x3)`, `c = d(x2,x3)`.
///
/// `x1` sits at the origin and `x2` on the positive x-axis; `x3` is placed by
/// the law of cosines with the cosine clamped to `[-1, 1]`, so collinear and
/// fully degenerate triples are accepted.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTriangle {
    pub sides: [f64; 3],
    pub points: [[f64; 2]; 3],
    pub d_delta: f64,
}

impl ComparisonTriangle {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, GeometryError> {
        let scale = a.max(b).max(c).max(1.0);
        let tol = COMPARISON_TOL * scale;
        let bad = !(a.is_finite() && b.is_finite() && c.is_finite())
            || a < -tol
            || b < -tol
            || c < -tol
            || a > b + c + tol
            || b > a + c + tol
            || c > a + b + tol;
        if bad {
            return Err(GeometryError::SidesNotATriangle { a: a.to_string(), b: b.to_string(), c: c.to_string() });
        }
        let (a, b, c) = (a.max(0.0), b.max(0.0), c.max(0.0));
        let x3 = if a == 0.0 || b == 0.0 {
            [b, 0.0]
        } else {
            let cos = ((a * a + b * b - c * c) / (2.0 * a * b)).clamp(-1.0, 1.0);
            let sin = (1.0 - cos * cos).max(0.0).sqrt();
            [b * cos, b * sin]
        };
        Ok(ComparisonTriangle { sides: [a, b, c], points: [[0.0, 0.0], [a, 0.0], x3], d_delta: a.max(b).max(c) })
    }

    pub fn side_length(&self, side: Side) -> f64 {
        self.sides[side.index()]
    }

    /// Comparison point for a location on a side.
    pub fn point(&self, loc: SideLocation) -> Result<[f64; 2], GeometryError> {
        let len = self.side_length(loc.side);
        let tol = COMPARISON_TOL * len.max(1.0);
        if !loc.offset.is_finite() || loc.offset < -tol || loc.offset > len + tol {
            return Err(GeometryError::InvalidOffset {
                side: loc.side,
                offset: loc.offset.to_string(),
                length: len.to_string(),
            });
        }
        let (i, j) = loc.side.endpoints();
        let (p, q) = (self.points[i], self.points[j]);
        let s = if len == 0.0 { 0.0 } else { (loc.offset / len).clamp(0.0, 1.0) };
        Ok([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])])
    }

    pub fn distance(&self, p: SideLocation, q: SideLocation) -> Result<f64, GeometryError> {
        let (u, v) = (self.point(p)?, self.point(q)?);
        Ok(((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2)).sqrt())
    }
}

/// Euclidean distance between the comparison points of `p` and `q`.
pub fn comparison_distance(sides: (f64, f64, f64), p: SideLocation, q: SideLocation) -> Result<f64, GeometryError> {
    ComparisonTriangle::new(sides.0, sides.1, sides.2)?.distance(p, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-9
    }

    #[test]
    fn equilateral_vertex_to_opposite_midpoint() {
        for t in [1.0, 10.0, 1000.0] {
            let d = comparison_distance(
                (t, t, t),
                SideLocation::new(Side::X1X2, 0.0),
                SideLocation::new(Side::X2X3, t / 2.0),
            )
            .unwrap();
            assert!((d - 3f64.sqrt() / 2.0 * t).abs() <= 1e-9 * t.max(1.0), "t={t} d={d}");
        }
    }

    #[test]
    fn collinear_long_side() {
        let d = comparison_distance(
            (2.0, 1.0, 1.0),
            SideLocation::new(Side::X1X2, 0.5),
            SideLocation::new(Side::X1X2, 1.5),
        )
        .unwrap();
        assert!(close(d, 1.0));
    }

    #[test]
    fn right_triangle_median_matches_oracle() {
        // Median from x1 to the midpoint of x2x3: 0.5 * sqrt(2a^2 + 2b^2 - c^2).
        let (a, b, c) = (3.0f64, 4.0f64, 5.0f64);
        let oracle = 0.5 * (2.0 * a * a + 2.0 * b * b - c * c).sqrt();
        let d =
            comparison_distance((a, b, c), SideLocation::new(Side::X1X3, 0.0), SideLocation::new(Side::X2X3, c / 2.0))
                .unwrap();
        assert!(close(d, oracle));
        assert!(close(d, 2.5));
    }

    #[test]
    fn reproduces_side_lengths_and_is_symmetric() {
        let tri = ComparisonTriangle::new(5.0, 7.0, 4.0).unwrap();
        let v = |side, off| SideLocation::new(side, off);
        assert!(close(tri.distance(v(Side::X1X2, 0.0), v(Side::X1X2, 5.0)).unwrap(), 5.0));
        assert!(close(tri.distance(v(Side::X1X3, 7.0), v(Side::X1X2, 0.0)).unwrap(), 7.0));
        assert!(close(tri.distance(v(Side::X2X3, 0.0), v(Side::X2X3, 4.0)).unwrap(), 4.0));
        let p = v(Side::X1X3, 2.5);
        let q = v(Side::X2X3, 1.0);
        assert!(close(tri.distance(p, q).unwrap(), tri.distance(q, p).unwrap()));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ComparisonTriangle::new(1.0, 1.0, 3.0), Err(GeometryError::SidesNotATriangle { .. })));
        let err = comparison_distance(
            (1.0, 1.0, 1.0),
            SideLocation::new(Side::X1X2, 1.5),
            SideLocation::new(Side::X1X2, 0.0),
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::InvalidOffset { .. }));
    }

    #[test]
    fn degenerate_point_triangle() {
        let tri = ComparisonTriangle::new(0.0, 0.0, 0.0).unwrap();
        let o = SideLocation::new(Side::X1X2, 0.0);
        assert_eq!(tri.distance(o, SideLocation::new(Side::X2X3, 0.0)).unwrap(), 0.0);
    }
}
