//! Invariant functionals `H`, `E1`, `E2`, `G` of the integrable flow and the
//! variational gradient of `G`.
//!
//! Integrals over `[0, 2 pi)` use the equispaced trapezoid rule, which is
//! spectrally accurate for smooth periodic integrands. Gradients are taken with
//! respect to the conjugate variable: for a real functional `F`,
//! `dF = 2 Re <dF/d(conj p), dp>` with `<u, v> = int u conj(v) dx`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::field::{ComplexField, SpectralGrid};

type C64 = Complex64;

fn trapezoid(field: &ComplexField, f: impl Fn(usize) -> f64) -> f64 {
    (0..field.len()).map(f).sum::<f64>() * field.dx()
}

fn grid(field: &ComplexField) -> SpectralGrid {
    SpectralGrid::new(field.len()).expect("ComplexField guarantees a valid grid size")
}

/// `(E1, E2) = (int |p|^2, int |q|^2)`.
pub fn l2_norms(field: &ComplexField) -> (f64, f64) {
    (
        trapezoid(field, |j| field.p[j].norm_sqr()),
        trapezoid(field, |j| field.q[j].norm_sqr()),
    )
}

/// `H = int |p_x|^2 + |q_x|^2 - (1/4)[(|p|^2 + |q|^2)^2 - 2 omega^2 (|p|^2 + |q|^2)] dx`.
pub fn hamiltonian(field: &ComplexField, omega: f64) -> f64 {
    let d = grid(field).derivative_field(field, 1).unwrap();
    let w2 = omega * omega;
    trapezoid(field, |j| {
        let m = field.p[j].norm_sqr() + field.q[j].norm_sqr();
        d.p[j].norm_sqr() + d.q[j].norm_sqr() - 0.25 * (m * m - 2.0 * w2 * m)
    })
}

/// `G = int |p_x|^2 + |q_x|^2 - (1/4)(|p|^2 + |q|^2)^2 dx + (E1 + E2)^2 / (8 pi)`.
pub fn functional_g(field: &ComplexField) -> f64 {
    let d = grid(field).derivative_field(field, 1).unwrap();
    let (e1, e2) = l2_norms(field);
    let local = trapezoid(field, |j| {
        let m = field.p[j].norm_sqr() + field.q[j].norm_sqr();
        d.p[j].norm_sqr() + d.q[j].norm_sqr() - 0.25 * m * m
    });
    local + (e1 + e2).powi(2) / (8.0 * PI)
}

/// `(dG/d(conj p), dG/d(conj q))` packed as a field:
/// `-p_xx - (1/2)(|p|^2 + |q|^2) p + (E1 + E2) p / (4 pi)`.
pub fn variational_gradient_g(field: &ComplexField) -> ComplexField {
    let dxx = grid(field).derivative_field(field, 2).unwrap();
    let (e1, e2) = l2_norms(field);
    let mean = (e1 + e2) / (4.0 * PI);
    let n = field.len();
    let mut p = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    for j in 0..n {
        let m = field.p[j].norm_sqr() + field.q[j].norm_sqr();
        let c = mean - 0.5 * m;
        p.push(-dxx.p[j] + field.p[j] * c);
        q.push(-dxx.q[j] + field.q[j] * c);
    }
    ComplexField { p, q }
}

/// `<u, v> = int (u_p conj(v_p) + u_q conj(v_q)) dx`.
pub fn inner(u: &ComplexField, v: &ComplexField) -> C64 {
    let s: C64 =
        u.p.iter()
            .zip(&v.p)
            .chain(u.q.iter().zip(&v.q))
            .map(|(a, b)| a * b.conj())
            .sum();
    s * u.dx()
}

/// Rate of change `dG/dt = 2 Re <dG/d(conj u), u_t>` along a velocity field.
pub fn g_rate(field: &ComplexField, velocity: &ComplexField) -> f64 {
    2.0 * inner(&variational_gradient_g(field), velocity).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_smooth(rng: &mut impl Rng, n: usize, modes: i32) -> ComplexField {
        let mut coef = || {
            (-modes..=modes)
                .map(|k| {
                    let amp = 0.6 / (1.0 + (k * k) as f64);
                    (k, C64::new(rng.gen_range(-amp..amp), rng.gen_range(-amp..amp)))
                })
                .collect::<Vec<_>>()
        };
        let (cp, cq) = (coef(), coef());
        ComplexField::from_fn(n, |x| {
            let eval = |c: &[(i32, C64)]| c.iter().map(|(k, a)| a * C64::from_polar(1.0, *k as f64 * x)).sum();
            (eval(&cp), eval(&cq))
        })
        .unwrap()
    }

    #[test]
    fn zero_field() {
        let f = ComplexField::constant(32, C64::from(0.0), C64::from(0.0)).unwrap();
        assert_eq!(hamiltonian(&f, 1.5), 0.0);
        assert_eq!(functional_g(&f), 0.0);
        assert_eq!(l2_norms(&f), (0.0, 0.0));
        assert_eq!(variational_gradient_g(&f).max_abs(), 0.0);
    }

    #[test]
    fn constants() {
        let (a, b, w) = (0.8, 0.5, 1.5);
        let f = ComplexField::constant(32, C64::from_polar(a, 0.3), C64::from_polar(b, -1.0)).unwrap();
        let s = a * a + b * b;
        let want = 2.0 * PI * (-0.25) * (s * s - 2.0 * w * w * s);
        assert!((hamiltonian(&f, w) - want).abs() < 1e-12);
        let (e1, e2) = l2_norms(&f);
        assert!((e1 - 2.0 * PI * a * a).abs() < 1e-13);
        assert!((e2 - 2.0 * PI * b * b).abs() < 1e-13);

        let one = ComplexField::constant(16, C64::from(1.0), C64::from(0.0)).unwrap();
        assert!((l2_norms(&one).0 - 2.0 * PI).abs() < 1e-14);
        let wave = ComplexField::from_fn(16, |x| (C64::from_polar(1.0, x), C64::from(0.0))).unwrap();
        assert!((l2_norms(&wave).0 - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn resonance_circle_is_critical() {
        let w = 1.5f64;
        let a = w / 2f64.sqrt();
        let f = ComplexField::constant(64, C64::from_polar(a, 0.7), C64::from_polar(a, 0.7)).unwrap();
        assert!(functional_g(&f).abs() < 1e-12);
        assert!(variational_gradient_g(&f).max_abs() < 1e-13);
        // off-diagonal constants on the circle are critical too
        let th = 0.4f64;
        let f = ComplexField::constant(64, C64::from(w * th.cos()), C64::from(w * th.sin())).unwrap();
        assert!(functional_g(&f).abs() < 1e-12);
        assert!(variational_gradient_g(&f).max_abs() < 1e-13);
    }

    #[test]
    fn g_is_h_plus_norm_combination() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(21);
        for _ in 0..20 {
            let w = rng.gen_range(1.0..2.0);
            let f = random_smooth(&mut rng, 64, 4);
            let (e1, e2) = l2_norms(&f);
            let e = e1 + e2;
            let want = hamiltonian(&f, w) + 0.5 * (e / (4.0 * PI) - w * w) * e;
            let g = functional_g(&f);
            assert!((g - want).abs() <= 1e-10 * g.abs().max(1.0));
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        for _ in 0..5 {
            let u = random_smooth(&mut rng, 64, 5);
            let v = random_smooth(&mut rng, 64, 5);
            let analytic = 2.0 * inner(&variational_gradient_g(&u), &v).re;
            let fd = |h: f64| (functional_g(&u.axpy(h, &v)) - functional_g(&u.axpy(-h, &v))) / (2.0 * h);
            let rel = (fd(1e-5) - analytic).abs() / analytic.abs();
            assert!(rel < 1e-6, "relative error {rel:e}");
            let errs: Vec<f64> = [4e-2, 2e-2, 1e-2].iter().map(|&h| (fd(h) - analytic).abs()).collect();
            for w in errs.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!((order - 2.0).abs() < 0.1, "observed order {order}");
            }
        }
    }
}
