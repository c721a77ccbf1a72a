use num_complex::Complex64;

use super::Sign;
use crate::error::{Error, Result};

type C64 = Complex64;

/// Growth rates of the `k`-th Fourier mode linearized about a plane wave of
/// amplitudes `(a, b)`: `+-k sqrt(a^2 + b^2 - k^2)` and `+-i k^2`.
pub fn dispersion(k: i64, a: f64, b: f64) -> [C64; 4] {
    let kf = k as f64;
    let root = C64::from(a * a + b * b - kf * kf).sqrt() * kf;
    let k2 = C64::new(0.0, kf * kf);
    [root, -root, k2, -k2]
}

/// Number of modes `1..=k_max` with a positive real growth rate.
pub fn unstable_mode_count(a: f64, b: f64, k_max: u32) -> usize {
    (1..=k_max as i64).filter(|&k| dispersion(k, a, b)[0].re > 0.0).count()
}

/// Growing (`Plus`) or decaying (`Minus`) eigenfunction of the mode `cos x`.
pub fn unstable_eigenfunction(t: f64, x: f64, sign: Sign, a: f64, b: f64) -> Result<(C64, C64)> {
    let s = a * a + b * b;
    if s <= 1.0 {
        return Err(Error::SubcriticalAmplitude(s));
    }
    let sigma = (s - 1.0).sqrt();
    let sg = sign.value();
    let f = C64::from_polar((sg * sigma * t).exp() * x.cos(), sg * sigma.atan());
    Ok((f * a, f * b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispersion_examples() {
        let d = dispersion(1, 1.0, 1.0);
        let want = [C64::from(1.0), C64::from(-1.0), C64::i(), -C64::i()];
        for k in 0..4 {
            assert!((d[k] - want[k]).norm() < 1e-15);
        }
        let d = dispersion(2, 1.0, 1.0);
        assert!((d[0] - C64::new(0.0, 2.0 * 2f64.sqrt())).norm() < 1e-14);
        assert!((d[1] + d[0]).norm() < 1e-15);
        assert!(dispersion(0, 1.0, 1.0).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn mode_counts() {
        assert_eq!(unstable_mode_count(1.0, 1.0, 10), 1);
        assert_eq!(unstable_mode_count(1.2, 1.2, 10), 1);
        assert_eq!(unstable_mode_count(0.5, 0.5, 10), 0);
        assert_eq!(unstable_mode_count(5f64.sqrt(), 0.0, 10), 2);
    }

    #[test]
    fn eigenfunction_at_origin_and_growth() {
        let (a, b) = (0.9, 0.8);
        let phi = (a * a + b * b - 1.0f64).sqrt().atan();
        let (p, q) = unstable_eigenfunction(0.0, 0.0, Sign::Plus, a, b).unwrap();
        assert!((p - C64::from_polar(a, phi)).norm() < 1e-15);
        assert!((q - C64::from_polar(b, phi)).norm() < 1e-15);
        let sigma = (a * a + b * b - 1.0f64).sqrt();
        let (p1, _) = unstable_eigenfunction(0.3, 0.2, Sign::Plus, a, b).unwrap();
        let (p2, _) = unstable_eigenfunction(1.3, 0.2, Sign::Plus, a, b).unwrap();
        assert!(((p2 / p1).re - sigma.exp()).abs() < 1e-10);
        assert!(unstable_eigenfunction(0.0, 0.0, Sign::Plus, 0.5, 0.5).is_err());
    }

    /// Substitutes into
    /// `i p_t + p_xx + a/2 [a (p + conj p) + b (q + conj q)] = 0` and its `q` twin.
    #[test]
    fn solves_linearized_equations() {
        let (a, b) = (1.1, 0.6);
        let sigma = (a * a + b * b - 1.0f64).sqrt();
        for sign in [Sign::Plus, Sign::Minus] {
            for &(t, x) in &[(0.0, 0.0), (0.7, 1.3), (-1.0, 4.0)] {
                let (p, q) = unstable_eigenfunction(t, x, sign, a, b).unwrap();
                // t-derivative: multiply by +-sigma; xx-derivative: multiply by -1
                let pt = p * (sign.value() * sigma);
                let qt = q * (sign.value() * sigma);
                let coupling = a * (p + p.conj()) + b * (q + q.conj());
                let rp = C64::i() * pt - p + coupling * (a / 2.0);
                let rq = C64::i() * qt - q + coupling * (b / 2.0);
                assert!(rp.norm() < 1e-8 && rq.norm() < 1e-8, "{rp} {rq}");
            }
        }
    }
}
