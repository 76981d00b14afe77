use rand::Rng;

use super::vec3::Vec3;
use crate::num::Real;

/// Solid centred on its local origin, symmetric about the z axis planes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Solid<T> {
    Box { half: Vec3<T> },
    Cylinder { radius: T, half_height: T },
    CylinderShell { inner: T, outer: T, half_height: T },
    Disk { radius: T, half_thickness: T },
}

/// Up to two disjoint parameter intervals where a line lies inside a solid.
#[derive(Clone, Copy, Debug)]
pub struct Spans<T> {
    n: usize,
    s: [(T, T); 2],
}

impl<T: Real> Spans<T> {
    fn empty() -> Self {
        Spans { n: 0, s: [(T::zero(), T::zero()); 2] }
    }

    fn push(&mut self, a: T, b: T) {
        if a < b {
            self.s[self.n] = (a, b);
            self.n += 1;
        }
    }

    pub fn as_slice(&self) -> &[(T, T)] {
        &self.s[..self.n]
    }
}

#[inline]
fn slab<T: Real>(p: T, d: T, h: T, t0: &mut T, t1: &mut T) -> bool {
    if d == T::zero() {
        return p.abs() <= h;
    }
    let inv = T::one() / d;
    let a = (-h - p) * inv;
    let b = (h - p) * inv;
    *t0 = t0.max(a.min(b));
    *t1 = t1.min(a.max(b));
    true
}

/// Parameter interval of a line inside a closed z-aligned cylinder.
#[inline]
pub(crate) fn cylinder_span<T: Real>(p: Vec3<T>, d: Vec3<T>, r: T, h: T) -> Option<(T, T)> {
    let mut t0 = T::neg_infinity();
    let mut t1 = T::infinity();
    if !slab(p.z, d.z, h, &mut t0, &mut t1) {
        return None;
    }
    let a = d.x * d.x + d.y * d.y;
    let c = p.x * p.x + p.y * p.y - r * r;
    if a == T::zero() {
        if c > T::zero() {
            return None;
        }
    } else {
        let b = p.x * d.x + p.y * d.y;
        let disc = b * b - a * c;
        if disc <= T::zero() {
            return None;
        }
        let sq = disc.sqrt();
        let q = -(b + if b < T::zero() { -sq } else { sq });
        let (ra, rb) = (q / a, c / q);
        t0 = t0.max(ra.min(rb));
        t1 = t1.min(ra.max(rb));
    }
    if t0 < t1 {
        Some((t0, t1))
    } else {
        None
    }
}

impl<T: Real> Solid<T> {
    pub fn validate(&self) -> Result<(), String> {
        let pos = |v: T| v > T::zero() && v.is_finite();
        let ok = match *self {
            Solid::Box { half } => pos(half.x) && pos(half.y) && pos(half.z),
            Solid::Cylinder { radius, half_height } => pos(radius) && pos(half_height),
            Solid::Disk { radius, half_thickness } => pos(radius) && pos(half_thickness),
            Solid::CylinderShell { inner, outer, half_height } => {
                if !(pos(inner) && pos(outer) && pos(half_height)) {
                    false
                } else if inner >= outer {
                    return Err("shell inner radius must be smaller than outer".into());
                } else {
                    true
                }
            }
        };
        if ok {
            Ok(())
        } else {
            Err("all dimensions must be > 0".into())
        }
    }

    /// Half extents of the axis-aligned bounding box.
    pub fn half_extents(&self) -> Vec3<T> {
        match *self {
            Solid::Box { half } => half,
            Solid::Cylinder { radius, half_height } => Vec3::new(radius, radius, half_height),
            Solid::Disk { radius, half_thickness } => Vec3::new(radius, radius, half_thickness),
            Solid::CylinderShell { outer, half_height, .. } => Vec3::new(outer, outer, half_height),
        }
    }

    pub fn volume(&self) -> T {
        let two = T::lit(2.0);
        match *self {
            Solid::Box { half } => T::lit(8.0) * half.x * half.y * half.z,
            Solid::Cylinder { radius, half_height } => T::PI() * radius * radius * two * half_height,
            Solid::Disk { radius, half_thickness } => T::PI() * radius * radius * two * half_thickness,
            Solid::CylinderShell { inner, outer, half_height } => {
                T::PI() * (outer * outer - inner * inner) * two * half_height
            }
        }
    }

    /// Point containment in local coordinates, boundary included.
    #[inline]
    pub fn contains(&self, p: Vec3<T>) -> bool {
        match *self {
            Solid::Box { half } => p.x.abs() <= half.x && p.y.abs() <= half.y && p.z.abs() <= half.z,
            Solid::Cylinder { radius: r, half_height: h } | Solid::Disk { radius: r, half_thickness: h } => {
                p.z.abs() <= h && p.x * p.x + p.y * p.y <= r * r
            }
            Solid::CylinderShell { inner, outer, half_height } => {
                let r2 = p.x * p.x + p.y * p.y;
                p.z.abs() <= half_height && r2 <= outer * outer && r2 >= inner * inner
            }
        }
    }

    /// Parameter intervals along `p + t d` that lie inside the solid.
    #[inline]
    pub fn spans(&self, p: Vec3<T>, d: Vec3<T>) -> Spans<T> {
        let mut out = Spans::empty();
        match *self {
            Solid::Box { half } => {
                let mut t0 = T::neg_infinity();
                let mut t1 = T::infinity();
                if slab(p.x, d.x, half.x, &mut t0, &mut t1)
                    && slab(p.y, d.y, half.y, &mut t0, &mut t1)
                    && slab(p.z, d.z, half.z, &mut t0, &mut t1)
                {
                    out.push(t0, t1);
                }
            }
            Solid::Cylinder { radius: r, half_height: h } | Solid::Disk { radius: r, half_thickness: h } => {
                if let Some((a, b)) = cylinder_span(p, d, r, h) {
                    out.push(a, b);
                }
            }
            Solid::CylinderShell { inner, outer, half_height } => {
                if let Some((a0, a1)) = cylinder_span(p, d, outer, half_height) {
                    match cylinder_span(p, d, inner, half_height) {
                        None => out.push(a0, a1),
                        Some((b0, b1)) => {
                            out.push(a0, a1.min(b0));
                            out.push(a0.max(b1), a1);
                        }
                    }
                }
            }
        }
        out
    }

    /// Distance to leave the solid from an interior point; 0 if not inside.
    #[inline]
    pub fn exit_distance(&self, p: Vec3<T>, d: Vec3<T>) -> T {
        for &(a, b) in self.spans(p, d).as_slice() {
            if a <= T::zero() && b > T::zero() {
                return b;
            }
        }
        T::zero()
    }

    /// Distance to the first entry ahead of `p`; 0 when `p` is already inside.
    #[inline]
    pub fn entry_distance(&self, p: Vec3<T>, d: Vec3<T>) -> Option<T> {
        for &(a, b) in self.spans(p, d).as_slice() {
            if b > T::zero() {
                return Some(a.max(T::zero()));
            }
        }
        None
    }

    /// Uniform point inside the solid by rejection from its bounding box.
    pub fn sample_local<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3<T> {
        let h = self.half_extents();
        loop {
            let mut u = || T::lit(2.0 * rng.gen::<f64>() - 1.0);
            let p = Vec3::new(h.x * u(), h.y * u(), h.z * u());
            if self.contains(p) {
                return p;
            }
        }
    }
}
