//! Interaction kinematics. Generic over the scalar so they can be checked in
//! `f32` as well as `f64`.

use crate::num::Real;

pub const ELECTRON_MASS_KEV: f64 = 510.998_95;

/// Klein–Nishina Compton sampling (the Geant4 standard-model algorithm).
/// `u` yields uniforms in [0, 1). Returns the scattered photon energy and
/// the cosine of the scattering angle.
#[inline]
pub fn klein_nishina<T: Real>(energy: T, mut u: impl FnMut() -> T) -> (T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    let k = energy / T::lit(ELECTRON_MASS_KEV);
    let eps0 = one / (one + two * k);
    let eps0sq = eps0 * eps0;
    let alpha1 = -eps0.ln();
    let alpha2 = alpha1 + T::lit(0.5) * (one - eps0sq);
    loop {
        let (eps, epssq) = if alpha1 > alpha2 * u() {
            let e = (-alpha1 * u()).exp();
            (e, e * e)
        } else {
            let sq = eps0sq + (one - eps0sq) * u();
            (sq.sqrt(), sq)
        };
        let onecost = (one - eps) / (eps * k);
        let sint2 = onecost * (two - onecost);
        let greject = one - eps * sint2 / (one + epssq);
        if greject >= u() {
            return (eps * energy, one - onecost);
        }
    }
}

/// Elastic scattering off a nucleus of mass number `a`, with centre-of-mass
/// cosine `mu_cm`. Returns (recoil energy, lab cosine of the neutron).
#[inline]
pub fn elastic<T: Real>(energy: T, a: T, mu_cm: T) -> (T, T) {
    let one = T::one();
    let two = T::lit(2.0);
    let recoil = energy * two * a / ((a + one) * (a + one)) * (one - mu_cm);
    let den = (a * a + two * a * mu_cm + one).sqrt();
    let cos_lab = if den > T::zero() { ((one + a * mu_cm) / den).max(-one).min(one) } else { T::zero() };
    (recoil.min(energy), cos_lab)
}

/// Largest fractional energy transfer in one elastic collision, 4A/(A+1)².
pub fn max_elastic_transfer<T: Real>(a: T) -> T {
    T::lit(4.0) * a / ((a + T::one()) * (a + T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn backscatter_gives_max_transfer() {
        let (r, c) = elastic(1000.0f64, 28.0, -1.0);
        assert!((r / 1000.0 - 4.0 * 28.0 / (29.0 * 29.0)).abs() < 1e-15);
        assert_eq!(c, -1.0);
        assert!((max_elastic_transfer(28.0f64) - 0.13317).abs() < 1e-4);
    }

    #[test]
    fn kn_mean_energy_matches_numerical_integral() {
        // Mean scattered energy at 661.7 keV from the Klein–Nishina
        // cross-section integrated on a fine cosine grid.
        let e0 = 661.7;
        let k = e0 / ELECTRON_MASS_KEV;
        let n = 200_000;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let c = -1.0 + (i as f64 + 0.5) * 2.0 / n as f64;
            let p = 1.0 / (1.0 + k * (1.0 - c));
            let w = p * p * (p + 1.0 / p - (1.0 - c * c));
            num += w * p * e0;
            den += w;
        }
        let expect = num / den;
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let m = 400_000;
        let mean: f64 = (0..m).map(|_| klein_nishina(e0, || r.gen::<f64>()).0).sum::<f64>() / m as f64;
        assert!((mean - expect).abs() < 1.0, "{mean} vs {expect}");
    }

    #[test]
    fn kn_in_f32() {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..1000 {
            let (e, c) = klein_nishina(500.0f32, || r.gen::<f32>());
            assert!(e > 0.0 && e <= 500.0 && (-1.0..=1.0).contains(&c));
        }
    }

    proptest! {
        #[test]
        fn compton_kinematics_consistent(e in 10.0f64..10_000.0, seed in any::<u64>()) {
            let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (e1, c) = klein_nishina(e, || r.gen::<f64>());
            let expect = e / (1.0 + e / ELECTRON_MASS_KEV * (1.0 - c));
            prop_assert!((e1 - expect).abs() <= 1e-9 * e);
            prop_assert!(e1 >= e / (1.0 + 2.0 * e / ELECTRON_MASS_KEV) * (1.0 - 1e-12));
        }

        #[test]
        fn elastic_bounds(e in 1.0f64..1e5, a in 1.0f64..250.0, mu in -1.0f64..=1.0) {
            let (r, c) = elastic(e, a, mu);
            prop_assert!(r >= 0.0 && r <= e * max_elastic_transfer(a) * (1.0 + 1e-12));
            prop_assert!((-1.0..=1.0).contains(&c));
        }
    }
}
