//! Exact solution of the benchmark bar.
//!
//! Unit bar, clamped at `x = 1`, released from `u⁰(x) = (1 - x)/2` at rest with
//! no body force. The free end reaches the obstacle at `t = 1`, stays in
//! contact until `t = 2` and returns to the initial state at `t = 3`; the
//! motion is 3-periodic. With `τ = t mod 3`:
//!
//! * `τ ∈ [0, 1]`: `u = (1 - max(x, τ)) / 2`
//! * `τ ∈ [1, 2]`, `s = τ - 1`: `u = -min(x, 1 - x, s, 1 - s) / 2`
//! * `τ ∈ [2, 3]`: `u = min(τ - 2, 1 - x) / 2`
//!
//! The contact multiplier is `λ = u_x(0, ·)`, equal to `-1/2` while in contact.

use crate::error::{invalid, Result};

pub const PERIOD: f64 = 3.0;
pub const IMPACT_TIME: f64 = 1.0;
pub const RELEASE_TIME: f64 = 2.0;

pub fn initial_displacement(x: f64) -> f64 {
    0.5 * (1.0 - x)
}

pub fn initial_velocity(_x: f64) -> f64 {
    0.0
}

fn check(x: f64, t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("position {x} outside [0, 1]")));
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(invalid(format!("time {t} must be finite and nonnegative")));
    }
    Ok(())
}

fn phase_time(t: f64) -> f64 {
    t.rem_euclid(PERIOD)
}

fn displacement_at_phase(x: f64, tau: f64) -> f64 {
    if tau <= 1.0 {
        0.5 * (1.0 - x.max(tau))
    } else if tau <= 2.0 {
        let s = tau - 1.0;
        // written as a difference so that the contact end gives +0, not -0
        0.0 - 0.5 * x.min(1.0 - x).min(s).min(1.0 - s)
    } else {
        0.5 * (tau - 2.0).min(1.0 - x)
    }
}

pub fn exact_displacement(x: f64, t: f64) -> Result<f64> {
    check(x, t)?;
    Ok(displacement_at_phase(x, phase_time(t)))
}

// The solution is piecewise linear with slopes in {0, ±1/2}, so a one-sided
// difference quotient over a tiny step, snapped to the nearest half-integer,
// is the exact one-sided derivative away from kink intersections.
const ONE_SIDED_STEP: f64 = 1e-9;

fn snap_half(v: f64) -> f64 {
    (2.0 * v).round() / 2.0
}

fn velocity_side(x: f64, t: f64, upper: bool) -> f64 {
    let d = if upper { ONE_SIDED_STEP } else { -ONE_SIDED_STEP };
    let u0 = displacement_at_phase(x, phase_time(t));
    let u1 = displacement_at_phase(x, phase_time(t + d));
    snap_half((u1 - u0) / d)
}

fn strain_side(x: f64, t: f64, right: bool) -> f64 {
    let d = if right { ONE_SIDED_STEP } else { -ONE_SIDED_STEP };
    let tau = phase_time(t);
    snap_half((displacement_at_phase(x + d, tau) - displacement_at_phase(x, tau)) / d)
}

/// Time derivative of [`exact_displacement`]. On a line of discontinuity the
/// average of the two one-sided limits is returned.
pub fn exact_velocity(x: f64, t: f64) -> Result<f64> {
    check(x, t)?;
    Ok(0.5 * (velocity_side(x, t, true) + velocity_side(x, t, false)))
}

/// Spatial derivative of [`exact_displacement`], averaged on kinks and
/// one-sided at the ends of the bar.
pub fn exact_strain(x: f64, t: f64) -> Result<f64> {
    check(x, t)?;
    Ok(if x == 0.0 {
        strain_side(x, t, true)
    } else if x == 1.0 {
        strain_side(x, t, false)
    } else {
        0.5 * (strain_side(x, t, true) + strain_side(x, t, false))
    })
}

/// Contact multiplier `λ(t) = u_x(0, t)`: `-1/2` strictly inside the contact
/// phase, zero otherwise.
pub fn exact_multiplier(t: f64) -> Result<f64> {
    check(0.0, t)?;
    let tau = phase_time(t);
    Ok(if tau > IMPACT_TIME && tau < RELEASE_TIME { -0.5 } else { 0.0 })
}

/// `∫₀¹ (u_t² + u_x²) dx`, conserved by the exact motion.
pub fn exact_energy() -> f64 {
    0.25
}

/// Energy of the exact solution in the discrete normalization
/// `½∫(u_t² + u_x²)`.
pub fn exact_discrete_energy() -> f64 {
    0.5 * exact_energy()
}

/// Exact nodal values `u(x_i, t)` for `i = 0..=m` on the unit bar.
pub fn nodal_displacement(m: usize, t: f64) -> Result<Vec<f64>> {
    (0..=m)
        .map(|i| exact_displacement(if i == m { 1.0 } else { i as f64 * (1.0 / m as f64) }, t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// d'Alembert construction `u = F(x+t) + G(x-t)` on a grid of spacing
    /// `1/n`. The fixed end reflects `F(s) = -G(2-s)`; at the contact end the
    /// outgoing wave follows the free reflection unless that would open a
    /// negative gap, in which case it pins `u(0,t) = 0`. Exact for data that
    /// is piecewise linear on the grid.
    fn characteristics(n: usize, steps: usize) -> Vec<Vec<f64>> {
        let d = 1.0 / n as f64;
        let kmax = steps + n;
        let mut f = vec![0.0; kmax + 1];
        // g[j] holds G(1 - j d).
        let mut g = vec![0.0; n + kmax + 1];
        for k in 0..=n {
            f[k] = 0.5 * initial_displacement(k as f64 * d);
            g[k] = 0.5 * initial_displacement(1.0 - k as f64 * d);
        }
        for k in 1..=kmax {
            if k > n {
                f[k] = -g[k - n];
            }
            let free = g[n + k - 1] + f[k] - f[k - 1];
            g[n + k] = free.max(-f[k]);
        }
        (0..=steps)
            .map(|step| (0..=n).map(|i| f[i + step] + g[n - i + step]).collect())
            .collect()
    }

    #[test]
    fn displacement_examples() {
        assert!((exact_displacement(0.5, 0.0).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(exact_displacement(0.0, 1.5).unwrap(), 0.0);
        assert!((exact_displacement(0.3, 1.1).unwrap() + 0.05).abs() < 1e-15);
        assert!(exact_displacement(1.5, 0.0).is_err());
        assert!(exact_displacement(0.5, -1.0).is_err());
    }

    #[test]
    fn matches_characteristics_construction() {
        for n in [12, 60, 240] {
            let steps = 6 * n;
            let lat = characteristics(n, steps);
            for (k, row) in lat.iter().enumerate() {
                let t = k as f64 / n as f64;
                for (i, v) in row.iter().enumerate() {
                    let x = i as f64 / n as f64;
                    let e = exact_displacement(x, t).unwrap();
                    assert!((e - v).abs() < 1e-12, "n={n} x={x} t={t}: {e} vs {v}");
                }
            }
        }
    }

    #[test]
    fn periodic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(0.0..=1.0);
            let t: f64 = rng.gen_range(0.0..6.0);
            // t + 3 is exact in binary for these magnitudes only up to rounding of t;
            // use dyadic times so the shift is exact
            let t = (t * 1024.0).round() / 1024.0;
            assert_eq!(exact_displacement(x, t).unwrap(), exact_displacement(x, t + 3.0).unwrap());
        }
    }

    #[test]
    fn velocity_examples() {
        assert_eq!(exact_velocity(0.9, 0.1).unwrap(), 0.0);
        assert_eq!(exact_velocity(0.5, 1.25).unwrap(), -0.5);
        assert_eq!(exact_velocity(0.5, 2.2).unwrap(), 0.5);
        // on the front x = τ: average of -1/2 and 0
        assert_eq!(exact_velocity(0.5, 0.5).unwrap(), -0.25);
    }

    #[test]
    fn velocity_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 2000 {
            let x: f64 = rng.gen_range(0.01..0.99);
            let t: f64 = rng.gen_range(0.01..5.99);
            if distance_to_kinks(x, t) < 1e-3 {
                continue;
            }
            let d = 1e-6;
            let fd = (exact_displacement(x, t + d).unwrap() - exact_displacement(x, t - d).unwrap()) / (2.0 * d);
            assert!((fd - exact_velocity(x, t).unwrap()).abs() < 1e-6, "x={x} t={t}");
            let fx = (exact_displacement(x + d, t).unwrap() - exact_displacement(x - d, t).unwrap()) / (2.0 * d);
            assert!((fx - exact_strain(x, t).unwrap()).abs() < 1e-6, "x={x} t={t}");
            checked += 1;
        }
    }

    #[test]
    fn multiplier_examples() {
        assert_eq!(exact_multiplier(0.5).unwrap(), 0.0);
        assert_eq!(exact_multiplier(1.5).unwrap(), -0.5);
        assert_eq!(exact_multiplier(4.5).unwrap(), -0.5);
        assert_eq!(exact_multiplier(2.5).unwrap(), 0.0);
    }

    #[test]
    fn multiplier_is_strain_at_contact_end() {
        for k in 1..300 {
            let t = k as f64 * 0.02 + 0.001;
            let lam = exact_multiplier(t).unwrap();
            let ux = (exact_displacement(1e-7, t).unwrap() - exact_displacement(0.0, t).unwrap()) / 1e-7;
            if lam != 0.0 {
                assert!((ux - lam).abs() < 1e-6, "t={t}");
            }
        }
    }

    /// Composite midpoint integration of the energy density.
    fn energy_by_quadrature(t: f64) -> f64 {
        let n = 10_000;
        (0..n)
            .map(|k| {
                let x = (k as f64 + 0.5) / n as f64;
                let ut = exact_velocity(x, t).unwrap();
                let ux = exact_strain(x, t).unwrap();
                ut * ut + ux * ux
            })
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn energy_is_constant() {
        assert_eq!(exact_energy(), 0.25);
        for t in [0.0, 0.3, 1.5, 1.77, 2.4, 3.9] {
            assert!((energy_by_quadrature(t) - 0.25).abs() < 1e-6, "t={t}");
        }
    }

    fn distance_to_kinks(x: f64, t: f64) -> f64 {
        let tau = t.rem_euclid(3.0);
        let r2 = std::f64::consts::SQRT_2;
        let mut d = [tau, (tau - 1.0).abs(), (tau - 2.0).abs(), (3.0 - tau)]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        let s = tau - 1.0;
        for line in [
            (x - tau).abs() / r2,
            (x - s).abs() / r2,
            (x - (1.0 - s)).abs() / r2,
            (x - 0.5).abs(),
            (s - 0.5).abs(),
            ((tau - 2.0) - (1.0 - x)).abs() / r2,
        ] {
            d = d.min(line);
        }
        d
    }

    #[test]
    fn wave_equation_residual_vanishes_off_characteristics() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let step = 1e-4;
        let mut checked = 0;
        while checked < 10_000 {
            let x: f64 = rng.gen_range(0.0..1.0);
            let t: f64 = rng.gen_range(0.0..6.0);
            if x < 1e-3 || x > 1.0 - 1e-3 || distance_to_kinks(x, t) <= 1e-3 {
                continue;
            }
            let u = |x: f64, t: f64| exact_displacement(x, t).unwrap();
            let utt = (u(x, t + step) - 2.0 * u(x, t) + u(x, t - step)) / (step * step);
            let uxx = (u(x + step, t) - 2.0 * u(x, t) + u(x - step, t)) / (step * step);
            assert!((utt - uxx).abs() <= 1e-6, "x={x} t={t}: {}", utt - uxx);
            checked += 1;
        }
    }

    #[test]
    fn signorini_conditions_hold() {
        for k in 0..=6000 {
            let t = k as f64 * 1e-3;
            let gap = exact_displacement(0.0, t).unwrap();
            let lam = exact_multiplier(t).unwrap();
            assert!(gap >= 0.0);
            assert!(lam <= 0.0);
            assert_eq!(gap * lam, 0.0);
        }
    }

    #[test]
    fn continuous_across_phase_boundaries() {
        for tb in [1.0, 2.0, 3.0] {
            for i in 0..=20 {
                let x = i as f64 / 20.0;
                let a = exact_displacement(x, tb).unwrap();
                let b = displacement_at_phase(x, if tb == 3.0 { 3.0 } else { tb + 1e-15 });
                let c = displacement_at_phase(x, tb - 1e-15);
                assert!((a - b).abs() < 1e-12 && (a - c).abs() < 1e-12);
            }
        }
    }
}
