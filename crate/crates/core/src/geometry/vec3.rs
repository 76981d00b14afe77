use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::num::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Vec3 { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Vec3::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn ez() -> Self {
        Vec3::new(T::zero(), T::zero(), T::one())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self * (T::one() / n))
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn is_unit(self) -> bool {
        (self.norm() - T::one()).abs() <= T::lit(1e-9).max(T::epsilon() * T::lit(16.0))
    }

    pub fn max_abs(self) -> T {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.to_f64_lossy()),
            U::lit(self.y.to_f64_lossy()),
            U::lit(self.z.to_f64_lossy()),
        )
    }

    /// Isotropic unit vector from two uniforms in [0, 1).
    #[inline]
    pub fn isotropic(u1: T, u2: T) -> Self {
        let two = T::lit(2.0);
        let cz = T::one() - two * u1;
        let sz = (T::one() - cz * cz).max(T::zero()).sqrt();
        let phi = two * T::PI() * u2;
        Vec3::new(sz * phi.cos(), sz * phi.sin(), cz)
    }

    /// Two unit vectors completing `self` (assumed unit) to a right-handed basis.
    #[inline]
    pub fn orthonormal_basis(self) -> (Self, Self) {
        // Duff et al., "Building an orthonormal basis, revisited".
        let sign = if self.z >= T::zero() { T::one() } else { -T::one() };
        let a = -T::one() / (sign + self.z);
        let b = self.x * self.y * a;
        let u = Vec3::new(T::one() + sign * self.x * self.x * a, sign * b, -sign * self.x);
        let v = Vec3::new(b, sign + self.y * self.y * a, -self.y);
        (u, v)
    }

    /// Unit vector at polar cosine `cos_t` and azimuth `phi` about `self`.
    #[inline]
    pub fn rotated(self, cos_t: T, phi: T) -> Self {
        let (u, v) = self.orthonormal_basis();
        let sin_t = (T::one() - cos_t * cos_t).max(T::zero()).sqrt();
        let d = u * (sin_t * phi.cos()) + v * (sin_t * phi.sin()) + self * cos_t;
        d.normalized().unwrap_or(self)
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn basis_is_orthonormal(u1 in 0.0f64..1.0, u2 in 0.0f64..1.0) {
            let n = Vec3::isotropic(u1, u2);
            let (a, b) = n.orthonormal_basis();
            prop_assert!(a.is_unit() && b.is_unit());
            prop_assert!(a.dot(b).abs() < 1e-12 && a.dot(n).abs() < 1e-12 && b.dot(n).abs() < 1e-12);
            prop_assert!((a.cross(b) - n).norm() < 1e-12);
        }

        #[test]
        fn rotation_keeps_polar_angle(u1 in 0.0f64..1.0, u2 in 0.0f64..1.0, c in -1.0f64..1.0, phi in 0.0f64..6.3) {
            let n = Vec3::isotropic(u1, u2);
            let d = n.rotated(c, phi);
            prop_assert!(d.is_unit());
            prop_assert!((d.dot(n) - c).abs() < 1e-9);
        }

        #[test]
        fn isotropic_is_unit_f32(u1 in 0.0f32..1.0, u2 in 0.0f32..1.0) {
            prop_assert!(Vec3::<f32>::isotropic(u1, u2).is_unit());
        }
    }
}
