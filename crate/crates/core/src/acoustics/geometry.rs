//! Plan-view geometry helpers.

pub type Point = [f64; 2];

#[inline]
fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

#[inline]
fn on_segment(p: Point, a: Point, b: Point) -> bool {
    p[0] >= a[0].min(b[0]) - 1e-12
        && p[0] <= a[0].max(b[0]) + 1e-12
        && p[1] >= a[1].min(b[1]) - 1e-12
        && p[1] <= a[1].max(b[1]) + 1e-12
}

/// Closed-segment intersection test, touching counts.
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(p1, q1, q2))
        || (d2 == 0.0 && on_segment(p2, q1, q2))
        || (d3 == 0.0 && on_segment(q1, p1, p2))
        || (d4 == 0.0 && on_segment(q2, p1, p2))
}

pub fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return distance(p, a);
    }
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0);
    distance(p, [a[0] + t * dx, a[1] + t * dy])
}

/// Simple polygon given as an open ring (last vertex joins the first).
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    ring: Vec<Point>,
    min: Point,
    max: Point,
}

impl Polygon {
    pub fn new(ring: Vec<Point>) -> Self {
        let mut ring = ring;
        if ring.len() > 1 && ring.first() == ring.last() {
            ring.pop();
        }
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in &ring {
            for k in 0..2 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        Self { ring, min, max }
    }

    pub fn ring(&self) -> &[Point] {
        &self.ring
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.ring.len();
        (0..n).map(move |i| (self.ring[i], self.ring[(i + 1) % n]))
    }

    /// Even-odd rule; boundary points count as inside.
    pub fn contains(&self, p: Point) -> bool {
        if p[0] < self.min[0] || p[0] > self.max[0] || p[1] < self.min[1] || p[1] > self.max[1] {
            return false;
        }
        if self.edges().any(|(a, b)| point_segment_distance(p, a, b) < 1e-9) {
            return true;
        }
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Whether segment `a`-`b` touches or crosses the polygon.
    pub fn blocks(&self, a: Point, b: Point) -> bool {
        if a[0].max(b[0]) < self.min[0]
            || a[0].min(b[0]) > self.max[0]
            || a[1].max(b[1]) < self.min[1]
            || a[1].min(b[1]) > self.max[1]
        {
            return false;
        }
        self.edges().any(|(p, q)| segments_intersect(a, b, p, q)) || self.contains(a) || self.contains(b)
    }

    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges().map(|(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
    }

    pub fn bbox(&self) -> (Point, Point) {
        (self.min, self.max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Polygon {
        Polygon::new(vec![[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]])
    }

    #[test]
    fn containment() {
        let s = square();
        assert!(s.contains([5.0, 5.0]));
        assert!(s.contains([0.0, 5.0]));
        assert!(!s.contains([-1.0, 5.0]));
        assert!(!s.contains([5.0, 10.5]));
    }

    #[test]
    fn blocking() {
        let s = square();
        assert!(s.blocks([-5.0, 5.0], [15.0, 5.0]));
        assert!(!s.blocks([-5.0, 15.0], [15.0, 15.0]));
        assert!(!s.blocks([-5.0, -5.0], [-1.0, 20.0]));
        assert!(s.blocks([-5.0, 0.0], [15.0, 0.0]));
    }

    #[test]
    fn closed_ring_normalized() {
        let p = Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 0.0]]);
        assert_eq!(p.ring().len(), 3);
    }

    #[test]
    fn distances() {
        assert!((point_segment_distance([5.0, 3.0], [0.0, 0.0], [10.0, 0.0]) - 3.0).abs() < 1e-12);
        assert!((point_segment_distance([13.0, 4.0], [0.0, 0.0], [10.0, 0.0]) - 5.0).abs() < 1e-12);
        assert!((square().boundary_distance([12.0, 5.0]) - 2.0).abs() < 1e-12);
    }
}
