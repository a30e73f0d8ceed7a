//! Small fixed-size vector helpers for points in Å.

pub type Point3 = [f64; 3];

#[inline]
pub fn sub(a: Point3, b: Point3) -> Point3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn add(a: Point3, b: Point3) -> Point3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn scale(a: Point3, s: f64) -> Point3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot(a: Point3, b: Point3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: Point3, b: Point3) -> Point3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: Point3) -> f64 {
    dot(a, a).sqrt()
}

/// Signed volume of the tetrahedron (a, b, c, d); positive when (b-a, c-a, d-a)
/// is right-handed.
pub fn signed_volume(a: Point3, b: Point3, c: Point3, d: Point3) -> f64 {
    dot(sub(b, a), cross(sub(c, a), sub(d, a))) / 6.0
}

pub fn centroid<const N: usize>(pts: [Point3; N]) -> Point3 {
    let mut c = [0.0; 3];
    for p in pts {
        c = add(c, p);
    }
    scale(c, 1.0 / N as f64)
}

/// Area-weighted normal of triangle (a, b, c): `(b-a) x (c-a) / 2`.
pub fn triangle_area_normal(a: Point3, b: Point3, c: Point3) -> Point3 {
    scale(cross(sub(b, a), sub(c, a)), 0.5)
}

/// Gradients of the four barycentric coordinates of a tetrahedron together
/// with its signed volume. Returns `None` for a degenerate element.
pub fn p1_gradients(p: [Point3; 4]) -> Option<([Point3; 4], f64)> {
    let e1 = sub(p[1], p[0]);
    let e2 = sub(p[2], p[0]);
    let e3 = sub(p[3], p[0]);
    let det = dot(e1, cross(e2, e3));
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    // rows of the inverse Jacobian are the gradients of lambda_1..lambda_3
    let g1 = scale(cross(e2, e3), 1.0 / det);
    let g2 = scale(cross(e3, e1), 1.0 / det);
    let g3 = scale(cross(e1, e2), 1.0 / det);
    let g0 = scale(add(add(g1, g2), g3), -1.0);
    Some(([g0, g1, g2, g3], det / 6.0))
}
