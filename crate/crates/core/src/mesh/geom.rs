//! Small planar geometry kernel shared by the generators and the loader.

pub type Point = [f64; 2];

#[inline]
pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

#[inline]
pub fn dist(a: Point, b: Point) -> f64 {
    norm(sub(a, b))
}

#[inline]
pub fn midpoint(a: Point, b: Point) -> Point {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
}

/// Signed area, positive for counter-clockwise polygons.
pub fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        acc += cross(poly[i], poly[(i + 1) % n]);
    }
    0.5 * acc
}

pub fn centroid(poly: &[Point]) -> Point {
    let n = poly.len();
    let mut a = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let c = cross(p, q);
        a += c;
        cx += (p[0] + q[0]) * c;
        cy += (p[1] + q[1]) * c;
    }
    [cx / (3.0 * a), cy / (3.0 * a)]
}

pub fn circumcenter(a: Point, b: Point, c: Point) -> Option<Point> {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let d = 2.0 * cross(ab, ac);
    if d.abs() <= f64::EPSILON * (dot(ab, ab) + dot(ac, ac)) {
        return None;
    }
    let ab2 = dot(ab, ab);
    let ac2 = dot(ac, ac);
    let ux = (ac[1] * ab2 - ab[1] * ac2) / d;
    let uy = (ab[0] * ac2 - ac[0] * ab2) / d;
    Some([a[0] + ux, a[1] + uy])
}

pub fn diameter(poly: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for (i, &p) in poly.iter().enumerate() {
        for &q in &poly[i + 1..] {
            best = best.max(dist(p, q));
        }
    }
    best
}

/// Largest interior angle of a triangle, in radians.
pub fn max_angle(a: Point, b: Point, c: Point) -> f64 {
    let angle = |p: Point, q: Point, r: Point| {
        let u = sub(q, p);
        let v = sub(r, p);
        cross(u, v).abs().atan2(dot(u, v))
    };
    angle(a, b, c).max(angle(b, c, a)).max(angle(c, a, b))
}

fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0);
    dist(p, [a[0] + t * ab[0], a[1] + t * ab[1]])
}

/// Distance from `p` to the closed polygon (zero inside).
pub fn distance_to_polygon(p: Point, poly: &[Point]) -> f64 {
    if contains(poly, p, 0.0) {
        return 0.0;
    }
    let n = poly.len();
    (0..n)
        .map(|i| segment_distance(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Point-in-polygon by winding number; points within `tol` of an edge count as inside.
pub fn contains(poly: &[Point], p: Point, tol: f64) -> bool {
    let n = poly.len();
    for i in 0..n {
        if segment_distance(p, poly[i], poly[(i + 1) % n]) <= tol {
            return true;
        }
    }
    let mut winding = 0i32;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let side = cross(sub(b, a), sub(p, a));
        if a[1] <= p[1] {
            if b[1] > p[1] && side > 0.0 {
                winding += 1;
            }
        } else if b[1] <= p[1] && side < 0.0 {
            winding -= 1;
        }
    }
    winding != 0
}
