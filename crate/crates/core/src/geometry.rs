//! Points, straight segments and polylines in pixel space.
//!
//! `x` grows to the right (column) and `y` grows downward (row). Coordinates
//! are real-valued; a pixel `(c, r)` is identified with the point at its
//! center, `(c as f64, r as f64)`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rounds both coordinates to the nearest integer.
    pub fn rounded(self) -> Point {
        Point::new(self.x.round(), self.y.round())
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

/// A straight segment kept in canonical left-to-right orientation:
/// `s.x <= e.x`, and `s.y <= e.y` when the segment is vertical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSegment {
    s: Point,
    e: Point,
}

impl LineSegment {
    /// Builds a segment from two endpoints in any order.
    pub fn new(a: Point, b: Point) -> Self {
        let swap = a.x > b.x || (a.x == b.x && a.y > b.y);
        if swap {
            Self { s: b, e: a }
        } else {
            Self { s: a, e: b }
        }
    }

    pub fn from_coords(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::new(Point::new(x0, y0), Point::new(x1, y1))
    }

    pub fn start(&self) -> Point {
        self.s
    }

    pub fn end(&self) -> Point {
        self.e
    }

    pub fn midpoint(&self) -> Point {
        Point::new((self.s.x + self.e.x) / 2.0, (self.s.y + self.e.y) / 2.0)
    }

    pub fn length(&self) -> f64 {
        segment_length(self)
    }

    pub fn is_degenerate(&self) -> bool {
        self.s == self.e
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Self {
        Self::new(f(self.s), f(self.e))
    }
}

/// Ordered vertex list with at least two vertices and no repeated
/// consecutive vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    points: Vec<Point>,
}

impl Polyline {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DegenerateGeometry("polyline needs at least two points"));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::DegenerateGeometry("polyline has non-finite coordinates"));
        }
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::DegenerateGeometry(
                "polyline has repeated consecutive points",
            ));
        }
        Ok(Self { points })
    }

    /// Drops repeated consecutive points, then validates.
    pub fn from_points_dedup(mut points: Vec<Point>) -> Result<Self> {
        points.dedup();
        Self::new(points)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn first(&self) -> Point {
        self.points[0]
    }

    pub fn last(&self) -> Point {
        self.points[self.points.len() - 1]
    }

    /// Consecutive vertex pairs as raw (uncanonicalized) endpoint pairs.
    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn arc_length(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    /// Minimum Euclidean distance from `p` to any point of the polyline.
    pub fn distance_to(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }
}

impl From<LineSegment> for Polyline {
    fn from(l: LineSegment) -> Self {
        if l.is_degenerate() {
            // Keep the type invariant; a degenerate segment becomes a
            // minimal horizontal stub.
            return Polyline {
                points: vec![l.s, Point::new(l.s.x + 1.0, l.s.y)],
            };
        }
        Polyline {
            points: vec![l.s, l.e],
        }
    }
}

pub fn segment_length(l: &LineSegment) -> f64 {
    l.s.distance(l.e)
}

/// Acute angle in degrees between the segment's carrier line and the x axis.
pub fn angle_to_horizontal(l: &LineSegment) -> Result<f64> {
    chord_angle(l.s, l.e)
}

/// Acute angle in degrees between the line through `a` and `b` and the x axis.
pub fn chord_angle(a: Point, b: Point) -> Result<f64> {
    let dx = (b.x - a.x).abs();
    let dy = (b.y - a.y).abs();
    if dx == 0.0 && dy == 0.0 {
        return Err(Error::DegenerateGeometry("angle of a zero-length segment"));
    }
    Ok(dy.atan2(dx).to_degrees())
}

/// Orthogonal projection of `p` onto the carrier line of `l`.
///
/// Returns the normalized parameter `t` (0 at `s`, 1 at `e`) and the
/// perpendicular distance from `p` to the carrier line.
pub fn project_onto(l: &LineSegment, p: Point) -> Result<(f64, f64)> {
    let (t, signed) = project_signed(l, p)?;
    Ok((t, signed.abs()))
}

fn project_signed(l: &LineSegment, p: Point) -> Result<(f64, f64)> {
    let dx = l.e.x - l.s.x;
    let dy = l.e.y - l.s.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return Err(Error::DegenerateGeometry("projection onto a zero-length segment"));
    }
    let px = p.x - l.s.x;
    let py = p.y - l.s.y;
    let t = (px * dx + py * dy) / len2;
    let signed = (dx * py - dy * px) / len2.sqrt();
    Ok((t, signed))
}

/// Whether `l1` is covered by `l2`: both endpoints of `l1` project onto the
/// segment `l2` and the closest point of `l1` lies within `d_max` (strictly)
/// of the carrier line of `l2`.
pub fn is_covered_by(l1: &LineSegment, l2: &LineSegment, d_max: f64) -> Result<bool> {
    if l1.is_degenerate() {
        return Err(Error::DegenerateGeometry("coverage test on a zero-length segment"));
    }
    let (ts, ds) = project_signed(l2, l1.s)?;
    let (te, de) = project_signed(l2, l1.e)?;
    let on_segment = (0.0..=1.0).contains(&ts) && (0.0..=1.0).contains(&te);
    // Signed distance is affine along l1, so its minimum modulus is zero when
    // the endpoints straddle the line and otherwise sits at an endpoint.
    let min_dist = if ds * de <= 0.0 {
        0.0
    } else {
        ds.abs().min(de.abs())
    };
    Ok(on_segment && min_dist < d_max)
}

/// Euclidean distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let dx = b.x - a.x;
    let dy = b.y - a.y;
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * dx, a.y + t * dy))
}

/// Even-odd point-in-polygon test; the polygon is implicitly closed.
pub fn point_in_polygon(p: Point, polygon: &[Point]) -> bool {
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Total-least-squares straight segment through a point cloud.
///
/// The carrier line passes through the centroid along the principal axis of
/// the scatter matrix. The endpoints are the projections of the two extreme
/// points along that axis. An isotropic cloud resolves to the horizontal axis.
pub fn fit_segment(points: &[Point]) -> Result<LineSegment> {
    if points.is_empty() {
        return Err(Error::DegenerateGeometry("cannot fit a line to no points"));
    }
    let first = points[0];
    if points.iter().all(|&p| p == first) {
        return Err(Error::DegenerateGeometry(
            "need at least two distinct points to fit a line",
        ));
    }
    let n = points.len() as f64;
    let (sum_x, sum_y) = points
        .iter()
        .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
    let (cx, cy) = (sum_x / n, sum_y / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p.x - cx, p.y - cy);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    // Major-axis angle; atan2(0, 0) = 0 gives the horizontal tie-break.
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    let (ux, uy) = (theta.cos(), theta.sin());
    let (mut t_min, mut t_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in points {
        let t = (p.x - cx) * ux + (p.y - cy) * uy;
        t_min = t_min.min(t);
        t_max = t_max.max(t);
    }
    Ok(LineSegment::new(
        Point::new(cx + t_min * ux, cy + t_min * uy),
        Point::new(cx + t_max * ux, cy + t_max * uy),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(x0: f64, y0: f64, x1: f64, y1: f64) -> LineSegment {
        LineSegment::from_coords(x0, y0, x1, y1)
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn lengths() {
        assert_eq!(segment_length(&seg(0.0, 0.0, 0.0, 0.0)), 0.0);
        assert_eq!(segment_length(&seg(0.0, 0.0, 3.0, 4.0)), 5.0);
        assert_eq!(segment_length(&seg(10.0, 2.0, 110.0, 2.0)), 100.0);
    }

    #[test]
    fn canonical_orientation() {
        let l = seg(5.0, 1.0, 0.0, 3.0);
        assert_eq!(l.start(), Point::new(0.0, 3.0));
        let v = seg(2.0, 9.0, 2.0, 1.0);
        assert_eq!(v.start(), Point::new(2.0, 1.0));
        assert_eq!(v.end(), Point::new(2.0, 9.0));
    }

    #[test]
    fn angles() {
        assert_eq!(angle_to_horizontal(&seg(0.0, 0.0, 10.0, 0.0)).unwrap(), 0.0);
        assert!(close(angle_to_horizontal(&seg(0.0, 0.0, 10.0, 10.0)).unwrap(), 45.0, 1e-12));
        assert_eq!(angle_to_horizontal(&seg(0.0, 0.0, 0.0, 10.0)).unwrap(), 90.0);
        assert!(close(angle_to_horizontal(&seg(0.0, 10.0, 10.0, 0.0)).unwrap(), 45.0, 1e-12));
        assert!(matches!(
            angle_to_horizontal(&seg(1.0, 1.0, 1.0, 1.0)),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn projections() {
        let l = seg(0.0, 0.0, 10.0, 0.0);
        assert_eq!(project_onto(&l, Point::new(5.0, 3.0)).unwrap(), (0.5, 3.0));
        assert_eq!(project_onto(&l, Point::new(15.0, 0.0)).unwrap(), (1.5, 0.0));
        let d = seg(0.0, 0.0, 10.0, 10.0);
        let (t, dist) = project_onto(&d, Point::new(10.0, 0.0)).unwrap();
        assert!(close(t, 0.5, 1e-12));
        assert!(close(dist, 10.0 / 2f64.sqrt(), 1e-6));
        assert!(close(dist, 7.0711, 1e-4));
        assert!(project_onto(&seg(0.0, 0.0, 0.0, 0.0), Point::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn coverage() {
        let long = seg(0.0, 1.0, 100.0, 1.0);
        assert!(is_covered_by(&seg(10.0, 0.0, 20.0, 0.0), &long, 20.0).unwrap());
        assert!(!is_covered_by(
            &seg(10.0, 0.0, 20.0, 0.0),
            &seg(0.0, 30.0, 100.0, 30.0),
            20.0
        )
        .unwrap());
        assert!(!is_covered_by(
            &seg(-5.0, 1.0, 5.0, 1.0),
            &seg(0.0, 0.0, 100.0, 0.0),
            20.0
        )
        .unwrap());
        // A segment crossing the carrier line has minimum distance zero.
        assert!(is_covered_by(&seg(10.0, -40.0, 20.0, 40.0), &seg(0.0, 0.0, 100.0, 0.0), 1.0).unwrap());
        assert!(is_covered_by(&seg(1.0, 1.0, 1.0, 1.0), &long, 1.0).is_err());
    }

    #[test]
    fn fits_exact_lines() {
        let l = fit_segment(&[
            Point::new(0.0, 5.0),
            Point::new(5.0, 5.0),
            Point::new(10.0, 5.0),
        ])
        .unwrap();
        assert!(close(l.start().x, 0.0, 1e-9) && close(l.start().y, 5.0, 1e-9));
        assert!(close(l.end().x, 10.0, 1e-9) && close(l.end().y, 5.0, 1e-9));

        let d = fit_segment(&[Point::new(2.0, 2.0), Point::new(0.0, 0.0), Point::new(1.0, 1.0)])
            .unwrap();
        assert!(close(d.start().x, 0.0, 1e-9) && close(d.start().y, 0.0, 1e-9));
        assert!(close(d.end().x, 2.0, 1e-9) && close(d.end().y, 2.0, 1e-9));

        let v = fit_segment(&[Point::new(3.0, 7.0), Point::new(3.0, 1.0)]).unwrap();
        assert_eq!(v.start(), Point::new(3.0, 1.0));
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        assert!(fit_segment(&[]).is_err());
        assert!(fit_segment(&[Point::new(1.0, 1.0); 4]).is_err());
    }

    #[test]
    fn isotropic_cloud_fits_horizontal() {
        let square = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
        ];
        let l = fit_segment(&square).unwrap();
        assert_eq!(angle_to_horizontal(&l).unwrap(), 0.0);
    }

    #[test]
    fn polyline_validation() {
        assert!(Polyline::new(vec![Point::new(0.0, 0.0)]).is_err());
        assert!(Polyline::new(vec![Point::new(0.0, 0.0), Point::new(0.0, 0.0)]).is_err());
        let p = Polyline::from_points_dedup(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 0.0),
            Point::new(3.0, 4.0),
        ])
        .unwrap();
        assert_eq!(p.points().len(), 2);
        assert_eq!(p.arc_length(), 5.0);
        assert_eq!(p.distance_to(Point::new(3.0, 0.0)), 2.4);
    }

    #[test]
    fn polygon_membership() {
        let square = [
            Point::new(0.0, 0.0),
            Point::new(10.0, 0.0),
            Point::new(10.0, 10.0),
            Point::new(0.0, 10.0),
        ];
        assert!(point_in_polygon(Point::new(5.0, 5.0), &square));
        assert!(!point_in_polygon(Point::new(15.0, 5.0), &square));
        assert!(!point_in_polygon(Point::new(5.0, 5.0), &square[..2]));
    }
}
