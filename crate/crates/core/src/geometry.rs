//! Planar polygon primitives in projected meter coordinates.
//!
//! Only what the regionalization needs: shoelace areas, ring validation,
//! boundary-to-boundary distance, point location and an interior-overlap
//! test for units that are expected to tile the plane.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }

    fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn distance(self, o: Point) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }
}

/// A closed ring stored without the repeated closing vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Ring(pub Vec<Point>);

impl Ring {
    /// Builds a ring, dropping a trailing vertex equal to the first one.
    pub fn new(mut pts: Vec<Point>) -> Self {
        if pts.len() > 1 && pts.first() == pts.last() {
            pts.pop();
        }
        Ring(pts)
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Ring(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn points(&self) -> &[Point] {
        &self.0
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.0.len();
        let mut s = 0.0;
        for i in 0..n {
            let a = self.0[i];
            let b = self.0[(i + 1) % n];
            s += a.x * b.y - b.x * a.y;
        }
        0.5 * s
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.0.len();
        (0..n).map(move |i| (self.0[i], self.0[(i + 1) % n]))
    }

    /// Checks vertex count, nonzero area and absence of self-intersections.
    pub fn validate(&self) -> Result<(), String> {
        let n = self.0.len();
        if n < 3 {
            return Err(format!("ring has {n} distinct vertices, need at least 3"));
        }
        if self.0.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err("ring has non-finite coordinates".into());
        }
        if self.signed_area().abs() <= f64::EPSILON * self.bbox().extent().powi(2) {
            return Err("ring has zero area".into());
        }
        let edges: Vec<_> = self.edges().collect();
        for i in 0..n {
            if edges[i].0 == edges[i].1 {
                return Err(format!("ring has a repeated vertex at position {i}"));
            }
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                let (a, b) = edges[i];
                let (c, d) = edges[j];
                if adjacent {
                    // Consecutive edges may only share their common endpoint.
                    let shared = if j == i + 1 { b } else { a };
                    let (p, q) = if j == i + 1 { (a, d) } else { (b, c) };
                    if collinear_overlap(a, b, c, d) > 0.0
                        || point_on_segment(p, c, d) && p != shared
                        || point_on_segment(q, a, b) && q != shared
                    {
                        return Err(format!("ring folds back on itself near vertex {j}"));
                    }
                } else if segments_intersect(a, b, c, d) {
                    return Err(format!("ring self-intersects between edges {i} and {j}"));
                }
            }
        }
        Ok(())
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(self.0.iter().copied())
    }
}

/// A polygon: one exterior ring and any number of holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    pub exterior: Ring,
    pub holes: Vec<Ring>,
}

impl Polygon {
    pub fn new(exterior: Ring, holes: Vec<Ring>) -> Self {
        Polygon { exterior, holes }
    }

    pub fn area(&self) -> f64 {
        self.exterior.signed_area().abs() - self.holes.iter().map(|h| h.signed_area().abs()).sum::<f64>()
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        std::iter::once(&self.exterior).chain(self.holes.iter())
    }
}

/// A (multi)polygon shape; a single polygon is a one-element shape.
#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub polygons: Vec<Polygon>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

impl Shape {
    pub fn new(polygons: Vec<Polygon>) -> Self {
        Shape { polygons }
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Shape::new(vec![Polygon::new(Ring::rect(x0, y0, x1, y1), vec![])])
    }

    pub fn area(&self) -> f64 {
        self.polygons.iter().map(Polygon::area).sum()
    }

    pub fn rings(&self) -> impl Iterator<Item = &Ring> {
        self.polygons.iter().flat_map(Polygon::rings)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.rings().flat_map(Ring::edges)
    }

    pub fn vertices(&self) -> impl Iterator<Item = Point> + '_ {
        self.rings().flat_map(|r| r.0.iter().copied())
    }

    pub fn bbox(&self) -> BBox {
        BBox::of(self.vertices())
    }

    /// Area-weighted centroid over all polygons.
    pub fn centroid(&self) -> Point {
        let (mut cx, mut cy, mut a) = (0.0, 0.0, 0.0);
        for poly in &self.polygons {
            let rings = std::iter::once((&poly.exterior, 1.0)).chain(poly.holes.iter().map(|h| (h, -1.0)));
            for (ring, sign) in rings {
                let ra = ring.signed_area();
                // Normalize orientation: exteriors add, holes subtract.
                let orient = ra.signum() * sign;
                for (p, q) in ring.edges() {
                    let c = p.x * q.y - q.x * p.y;
                    cx += orient * (p.x + q.x) * c;
                    cy += orient * (p.y + q.y) * c;
                }
                a += orient * ra;
            }
        }
        if a.abs() < f64::MIN_POSITIVE {
            let b = self.bbox();
            return Point::new(0.5 * (b.min.x + b.max.x), 0.5 * (b.min.y + b.max.y));
        }
        Point::new(cx / (6.0 * a), cy / (6.0 * a))
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.polygons.is_empty() {
            return Err("shape has no polygons".into());
        }
        for (k, poly) in self.polygons.iter().enumerate() {
            for ring in poly.rings() {
                ring.validate().map_err(|e| format!("polygon {k}: {e}"))?;
            }
            if poly.area() <= 0.0 {
                return Err(format!("polygon {k}: holes cover the whole exterior"));
            }
        }
        Ok(())
    }

    /// Even-odd point location with a small boundary tolerance.
    pub fn locate(&self, p: Point, tol: f64) -> Location {
        for (a, b) in self.edges() {
            if point_segment_distance(p, a, b) <= tol {
                return Location::Boundary;
            }
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if x > p.x {
                    inside = !inside;
                }
            }
        }
        if inside {
            Location::Inside
        } else {
            Location::Outside
        }
    }

    /// Inside intervals of the horizontal line at height `y`.
    fn scanline(&self, y: f64) -> Vec<(f64, f64)> {
        let mut xs: Vec<f64> = self
            .edges()
            .filter(|(a, b)| (a.y > y) != (b.y > y))
            .map(|(a, b)| a.x + (y - a.y) * (b.x - a.x) / (b.y - a.y))
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.chunks_exact(2).map(|c| (c[0], c[1])).collect()
    }

    /// True when the two shapes share interior area (not just boundary).
    pub fn interiors_overlap(&self, other: &Shape) -> bool {
        if !self.bbox().intersects(&other.bbox(), 0.0) {
            return false;
        }
        for (a, b) in self.edges() {
            for (c, d) in other.edges() {
                if segments_cross_properly(a, b, c, d) {
                    return true;
                }
            }
        }
        // Without proper crossings the left-to-right order of boundary
        // crossings is fixed inside every horizontal slab between vertex
        // heights, so testing each slab's mid line is exhaustive.
        let mut ys: Vec<f64> = self.vertices().chain(other.vertices()).map(|p| p.y).collect();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        let scale = self.bbox().union(&other.bbox()).extent().max(1.0);
        let tol = 1e-9 * scale;
        for w in ys.windows(2) {
            if w[1] - w[0] <= tol {
                continue;
            }
            let y = 0.5 * (w[0] + w[1]);
            let sa = self.scanline(y);
            let sb = other.scanline(y);
            for &(a0, a1) in &sa {
                for &(b0, b1) in &sb {
                    if a1.min(b1) - a0.max(b0) > tol {
                        return true;
                    }
                }
            }
        }
        false
    }

    /// True when `other` lies inside this shape (boundary contact allowed).
    pub fn contains_shape(&self, other: &Shape, tol: f64) -> bool {
        if other.vertices().any(|p| self.locate(p, tol) == Location::Outside) {
            return false;
        }
        for (a, b) in self.edges() {
            for (c, d) in other.edges() {
                if segments_cross_properly(a, b, c, d) {
                    return false;
                }
            }
        }
        // Vertex tests miss a child that wraps around a hole; the shared
        // area must equal the child's area.
        let lost = other.area() - overlap_area_estimate(self, other);
        lost <= 1e-6 * other.area().max(1.0)
    }
}

/// Exact slab-based area of `inner ∩ outer` for shapes without proper crossings.
fn overlap_area_estimate(outer: &Shape, inner: &Shape) -> f64 {
    let mut ys: Vec<f64> = outer.vertices().chain(inner.vertices()).map(|p| p.y).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let mut area = 0.0;
    for w in ys.windows(2) {
        let h = w[1] - w[0];
        if h <= 0.0 {
            continue;
        }
        // Cross-section length is linear in y within a slab, so the midpoint rule is exact.
        let y = 0.5 * (w[0] + w[1]);
        let so = outer.scanline(y);
        let si = inner.scanline(y);
        let mut len = 0.0;
        for &(a0, a1) in &so {
            for &(b0, b1) in &si {
                len += (a1.min(b1) - a0.max(b0)).max(0.0);
            }
        }
        area += len * h;
    }
    area
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Point,
    pub max: Point,
}

impl BBox {
    pub fn of(pts: impl Iterator<Item = Point>) -> Self {
        let mut b = BBox {
            min: Point::new(f64::INFINITY, f64::INFINITY),
            max: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        };
        for p in pts {
            b.min.x = b.min.x.min(p.x);
            b.min.y = b.min.y.min(p.y);
            b.max.x = b.max.x.max(p.x);
            b.max.y = b.max.y.max(p.y);
        }
        b
    }

    pub fn extent(&self) -> f64 {
        (self.max.x - self.min.x).max(self.max.y - self.min.y)
    }

    pub fn union(&self, o: &BBox) -> BBox {
        BBox {
            min: Point::new(self.min.x.min(o.min.x), self.min.y.min(o.min.y)),
            max: Point::new(self.max.x.max(o.max.x), self.max.y.max(o.max.y)),
        }
    }

    /// Whether the boxes come within `margin` of each other.
    pub fn intersects(&self, o: &BBox, margin: f64) -> bool {
        self.min.x <= o.max.x + margin
            && o.min.x <= self.max.x + margin
            && self.min.y <= o.max.y + margin
            && o.min.y <= self.max.y + margin
    }

    /// Lower bound on the distance between anything inside the two boxes.
    pub fn distance(&self, o: &BBox) -> f64 {
        let dx = (o.min.x - self.max.x).max(self.min.x - o.max.x).max(0.0);
        let dy = (o.min.y - self.max.y).max(self.min.y - o.max.y).max(0.0);
        dx.hypot(dy)
    }
}

fn orientation(a: Point, b: Point, c: Point) -> f64 {
    let ab = b.sub(a);
    let ac = c.sub(a);
    let v = ab.cross(ac);
    let scale = (ab.dot(ab) * ac.dot(ac)).sqrt();
    if v.abs() <= 1e-12 * scale {
        0.0
    } else {
        v
    }
}

fn point_on_segment(p: Point, a: Point, b: Point) -> bool {
    orientation(a, b, p) == 0.0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

/// Length of the shared part of two collinear segments (0 if not collinear).
fn collinear_overlap(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if orientation(a, b, c) != 0.0 || orientation(a, b, d) != 0.0 {
        return 0.0;
    }
    let dir = b.sub(a);
    let len = dir.dot(dir).sqrt();
    if len == 0.0 {
        return 0.0;
    }
    let t = |p: Point| p.sub(a).dot(dir) / len;
    let (c0, c1) = {
        let (u, v) = (t(c), t(d));
        (u.min(v), u.max(v))
    };
    (len.min(c1) - 0.0f64.max(c0)).max(0.0)
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orientation(a, b, c);
    let o2 = orientation(a, b, d);
    let o3 = orientation(c, d, a);
    let o4 = orientation(c, d, b);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    point_on_segment(c, a, b) || point_on_segment(d, a, b) || point_on_segment(a, c, d) || point_on_segment(b, c, d)
}

/// Interiors of the two segments cross at a single point.
pub fn segments_cross_properly(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orientation(a, b, c);
    let o2 = orientation(a, b, d);
    let o3 = orientation(c, d, a);
    let o4 = orientation(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(Point::new(a.x + t * ab.x, a.y + t * ab.y))
}

pub fn segment_distance(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

/// Minimum Euclidean distance between the boundaries of two shapes.
pub fn boundary_distance(s: &Shape, t: &Shape) -> f64 {
    let mut best = f64::INFINITY;
    for (a, b) in s.edges() {
        let eb = BBox::of([a, b].into_iter());
        for (c, d) in t.edges() {
            if eb.distance(&BBox::of([c, d].into_iter())) >= best {
                continue;
            }
            best = best.min(segment_distance(a, b, c, d));
            if best == 0.0 {
                return 0.0;
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shoelace_area_of_rect() {
        let s = Shape::rect(0.0, 0.0, 3.0, 2.0);
        assert_eq!(s.area(), 6.0);
        assert!(s.validate().is_ok());
    }

    #[test]
    fn hole_reduces_area() {
        let p = Polygon::new(Ring::rect(0.0, 0.0, 4.0, 4.0), vec![Ring::rect(1.0, 1.0, 2.0, 2.0)]);
        assert_eq!(p.area(), 15.0);
    }

    #[test]
    fn bowtie_is_rejected() {
        let r = Ring::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ]);
        assert!(r.validate().is_err());
    }

    #[test]
    fn degenerate_rings_rejected() {
        let line = Ring::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)]);
        assert!(line.validate().is_err());
        let two = Ring::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]);
        assert!(two.validate().is_err());
    }

    #[test]
    fn closing_vertex_is_dropped() {
        let r = Ring::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 0.0),
        ]);
        assert_eq!(r.0.len(), 3);
    }

    #[test]
    fn overlap_detection() {
        let a = Shape::rect(0.0, 0.0, 2.0, 1.0);
        let b = Shape::rect(1.0, 0.0, 3.0, 1.0);
        let c = Shape::rect(2.0, 0.0, 3.0, 1.0);
        assert!(a.interiors_overlap(&b));
        assert!(!a.interiors_overlap(&c));
        assert!(a.interiors_overlap(&a.clone()));
        // Plus-shaped crossing without any vertex inside the other.
        let h = Shape::rect(0.0, 1.0, 3.0, 2.0);
        let v = Shape::rect(1.0, 0.0, 2.0, 3.0);
        assert!(h.interiors_overlap(&v));
    }

    #[test]
    fn containment() {
        let block = Shape::rect(0.0, 0.0, 10.0, 10.0);
        assert!(block.contains_shape(&Shape::rect(0.0, 0.0, 5.0, 5.0), 1e-9));
        assert!(!block.contains_shape(&Shape::rect(8.0, 8.0, 12.0, 9.0), 1e-9));
        let ring = Shape::new(vec![Polygon::new(
            Ring::rect(0.0, 0.0, 10.0, 10.0),
            vec![Ring::rect(2.0, 2.0, 8.0, 8.0)],
        )]);
        assert!(!ring.contains_shape(&Shape::rect(1.0, 1.0, 9.0, 9.0), 1e-9));
    }

    #[test]
    fn centroid_of_rect() {
        let c = Shape::rect(0.0, 0.0, 4.0, 2.0).centroid();
        assert!((c.x - 2.0).abs() < 1e-12 && (c.y - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distances() {
        let a = Shape::rect(0.0, 0.0, 1.0, 1.0);
        let b = Shape::rect(2.0, 0.0, 3.0, 1.0);
        assert_eq!(boundary_distance(&a, &b), 1.0);
        let c = Shape::rect(1.0, 0.0, 2.0, 1.0);
        assert_eq!(boundary_distance(&a, &c), 0.0);
    }
}
