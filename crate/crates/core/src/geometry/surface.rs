use rand::Rng;

use super::vec3::Vec3;
use crate::num::Real;

/// Part of a closed cylindrical surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Facet {
    Lateral,
    Top,
    Bottom,
}

impl Facet {
    pub const ALL: [Facet; 3] = [Facet::Lateral, Facet::Top, Facet::Bottom];

    pub fn name(self) -> &'static str {
        match self {
            Facet::Lateral => "lateral",
            Facet::Top => "top",
            Facet::Bottom => "bottom",
        }
    }

    pub fn from_name(s: &str) -> Option<Facet> {
        Facet::ALL.into_iter().find(|f| f.name() == s)
    }
}

/// Closed, z-aligned mathematical cylinder used to emit or record particles.
/// It is not a volume and does not affect transport.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SurfaceDef<T> {
    pub name: String,
    pub radius: T,
    pub half_height: T,
    pub center: Vec3<T>,
}

/// An inward crossing of a surface.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceHit<T> {
    pub t: T,
    pub facet: Facet,
    /// Cosine of the angle to the inward normal, in [0, 1].
    pub cos_theta: T,
}

impl<T: Real> SurfaceDef<T> {
    pub fn lateral_area(&self) -> T {
        T::lit(4.0) * T::PI() * self.radius * self.half_height
    }

    pub fn cap_area(&self) -> T {
        T::PI() * self.radius * self.radius
    }

    pub fn facet_area(&self, f: Facet) -> T {
        match f {
            Facet::Lateral => self.lateral_area(),
            Facet::Top | Facet::Bottom => self.cap_area(),
        }
    }

    /// Lateral wall plus both caps, cm².
    pub fn area(&self) -> T {
        self.lateral_area() + T::lit(2.0) * self.cap_area()
    }

    pub fn contains(&self, p: Vec3<T>) -> bool {
        let q = p - self.center;
        q.z.abs() <= self.half_height && q.x * q.x + q.y * q.y <= self.radius * self.radius
    }

    pub fn inward_normal(&self, f: Facet, p: Vec3<T>) -> Vec3<T> {
        match f {
            Facet::Top => -Vec3::ez(),
            Facet::Bottom => Vec3::ez(),
            Facet::Lateral => {
                let q = p - self.center;
                Vec3::new(-q.x, -q.y, T::zero()).normalized().unwrap_or(Vec3::new(-T::one(), T::zero(), T::zero()))
            }
        }
    }

    /// Uniform point on one facet with its inward normal.
    pub fn sample_on_facet<R: Rng + ?Sized>(&self, f: Facet, rng: &mut R) -> (Vec3<T>, Vec3<T>) {
        let phi = T::lit(std::f64::consts::TAU * rng.gen::<f64>());
        let (s, c) = phi.sin_cos();
        match f {
            Facet::Lateral => {
                let z = self.half_height * T::lit(2.0 * rng.gen::<f64>() - 1.0);
                let p = self.center + Vec3::new(self.radius * c, self.radius * s, z);
                (p, Vec3::new(-c, -s, T::zero()))
            }
            Facet::Top | Facet::Bottom => {
                let r = self.radius * T::lit(rng.gen::<f64>().sqrt());
                let z = if f == Facet::Top { self.half_height } else { -self.half_height };
                (self.center + Vec3::new(r * c, r * s, z), self.inward_normal(f, Vec3::zero()))
            }
        }
    }

    pub fn pick_facet(&self, u: f64) -> Facet {
        let total = self.area().to_f64_lossy();
        let lat = self.lateral_area().to_f64_lossy() / total;
        let cap = self.cap_area().to_f64_lossy() / total;
        if u < lat {
            Facet::Lateral
        } else if u < lat + cap {
            Facet::Top
        } else {
            Facet::Bottom
        }
    }

    /// Uniform point per unit area over wall and caps, with the inward normal.
    pub fn sample_on_surface<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec3<T>, Vec3<T>, Facet) {
        let f = self.pick_facet(rng.gen::<f64>());
        let (p, n) = self.sample_on_facet(f, rng);
        (p, n, f)
    }

    /// Entry and exit parameters of the line `p + t d`, and whether the
    /// entry happens through a cap.
    fn span(&self, p: Vec3<T>, d: Vec3<T>) -> Option<(T, T, bool)> {
        let q = p - self.center;
        let h = self.half_height;
        let (mut z0, mut z1) = (T::neg_infinity(), T::infinity());
        if d.z == T::zero() {
            if q.z.abs() > h {
                return None;
            }
        } else {
            let a = (-h - q.z) / d.z;
            let b = (h - q.z) / d.z;
            z0 = a.min(b);
            z1 = a.max(b);
        }
        let (mut r0, mut r1) = (T::neg_infinity(), T::infinity());
        let a = d.x * d.x + d.y * d.y;
        let c = q.x * q.x + q.y * q.y - self.radius * self.radius;
        if a == T::zero() {
            if c > T::zero() {
                return None;
            }
        } else {
            let b = q.x * d.x + q.y * d.y;
            let disc = b * b - a * c;
            if disc <= T::zero() {
                return None;
            }
            let sq = disc.sqrt();
            let qq = -(b + if b < T::zero() { -sq } else { sq });
            r0 = (qq / a).min(c / qq);
            r1 = (qq / a).max(c / qq);
        }
        let t0 = z0.max(r0);
        let t1 = z1.min(r1);
        if t0 < t1 {
            Some((t0, t1, z0 >= r0))
        } else {
            None
        }
    }

    /// Inward crossing within the segment `(0, len]`, if any.
    pub fn inward_crossing(&self, p: Vec3<T>, d: Vec3<T>, len: T) -> Option<SurfaceHit<T>> {
        let (t0, _, cap) = self.span(p, d)?;
        if !(t0 > T::zero() && t0 <= len) {
            return None;
        }
        let hit = p + d * t0;
        let facet = if cap {
            if d.z < T::zero() {
                Facet::Top
            } else {
                Facet::Bottom
            }
        } else {
            Facet::Lateral
        };
        let n = self.inward_normal(facet, hit);
        let cos_theta = d.dot(n).max(T::zero()).min(T::one());
        Some(SurfaceHit { t: t0, facet, cos_theta })
    }

    /// Outward crossing within the segment `(0, len]`, if any.
    pub fn outward_crossing(&self, p: Vec3<T>, d: Vec3<T>, len: T) -> Option<T> {
        let (_, t1, _) = self.span(p, d)?;
        if t1 > T::zero() && t1 <= len {
            Some(t1)
        } else {
            None
        }
    }
}
