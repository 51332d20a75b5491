//! States, energies and the one-constraint complementarity solve.
//!
//! Sign convention: the multiplier `λ` enters the contact-node equation as
//! `-λ e₀` and satisfies `0 ≤ u₀ ⊥ λ ≤ 0`, so the force the obstacle exerts on
//! the bar is `-λ ≥ 0`.

use crate::assembly::{AssembledSystem, ReducedSystem};
use crate::banded::{dot, norm_inf, SymTridiag};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Unknowns `u_0..u_{m-1}`, contact node included.
    Full,
    /// Unknowns `u_1..u_{m-1}`; the contact node is `u_0 = u_1⁺`.
    Reduced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
    pub lambda: f64,
    pub layout: Layout,
}

impl State {
    pub fn new(t: f64, u: Vec<f64>, v: Vec<f64>, layout: Layout) -> Result<Self> {
        if u.len() != v.len() || u.is_empty() {
            return Err(invalid("displacement and velocity must have the same nonzero length"));
        }
        let a = vec![0.0; u.len()];
        Ok(Self {
            t,
            u,
            v,
            a,
            lambda: 0.0,
            layout,
        })
    }

    /// Displacement of the contact node.
    pub fn contact_displacement(&self) -> f64 {
        match self.layout {
            Layout::Full => self.u[0],
            Layout::Reduced => positive_part(self.u[0]),
        }
    }

    /// Displacement of node 1.
    pub fn first_interior(&self) -> f64 {
        match self.layout {
            Layout::Full => self.u[1],
            Layout::Reduced => self.u[0],
        }
    }

    /// Nodal displacements `u_0..u_m`, Dirichlet value appended.
    pub fn nodal_displacement(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.u.len() + 2);
        if self.layout == Layout::Reduced {
            out.push(positive_part(self.u[0]));
        }
        out.extend_from_slice(&self.u);
        out.push(0.0);
        out
    }

    /// Stiffness flux `(u_1 - u_0)/h` at the contact node.
    pub fn contact_flux(&self, h: f64) -> f64 {
        (self.first_interior() - self.contact_displacement()) / h
    }

    pub fn dim_matches(&self, sys: &AssembledSystem) -> bool {
        let m = sys.dim();
        let expected = match self.layout {
            Layout::Full => m,
            Layout::Reduced => m - 1,
        };
        self.u.len() == expected && self.v.len() == expected && self.a.len() == expected
    }
}

pub fn positive_part(s: f64) -> f64 {
    s.max(0.0)
}

/// Heaviside switch with `H(0) = 1/2`.
pub fn heaviside(s: f64) -> f64 {
    if s > 0.0 {
        1.0
    } else if s == 0.0 {
        0.5
    } else {
        0.0
    }
}

/// Right-hand side of the first-order reduced system `(U, P)' = G(U, P)`,
/// where `P = h M* U'` is the momentum:
///
/// `G(U, P) = ( (1/h) M*⁻¹ P , -(1/h) S* U + F + (1/h) u₁⁺ e₁ )`.
pub fn rhs_g(red: &ReducedSystem, u: &[f64], p: &[f64], load: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = red.dim();
    if u.len() != n || p.len() != n || load.len() != n {
        return Err(invalid("rhs_g: vector lengths must equal the reduced dimension"));
    }
    let h = red.h;
    let du: Vec<f64> = red.mstar.factor()?.solve(p)?.into_iter().map(|x| x / h).collect();
    let su = red.sstar.matvec(u)?;
    let mut dp: Vec<f64> = su.iter().zip(load).map(|(s, f)| -s / h + f).collect();
    dp[0] += positive_part(u[0]) / h;
    Ok((du, dp))
}

/// Energy of the reduced system:
/// `(h/2) VᵀM*V + (1/2h) UᵀS*U - (1/2h)(u₁⁺)² - UᵀF`.
pub fn reduced_energy(red: &ReducedSystem, u: &[f64], v: &[f64], load: &[f64]) -> Result<f64> {
    let h = red.h;
    if load.len() != u.len() {
        return Err(invalid("load length differs from state length"));
    }
    let up = positive_part(u[0]);
    Ok(0.5 * h * red.mstar.quad_form(v)? + 0.5 / h * red.sstar.quad_form(u)? - 0.5 / h * up * up - dot(u, load))
}

/// Energy of the full system: `½VᵀMV + ½UᵀSU - UᵀF`.
pub fn full_energy(sys: &AssembledSystem, u: &[f64], v: &[f64], load: &[f64]) -> Result<f64> {
    if load.len() != u.len() {
        return Err(invalid("load length differs from state length"));
    }
    Ok(0.5 * sys.mass.quad_form(v)? + 0.5 * sys.stiffness.quad_form(u)? - dot(u, load))
}

/// Discrete energy of `state` with the formula matching its layout.
pub fn discrete_energy(sys: &AssembledSystem, state: &State) -> Result<f64> {
    if !state.dim_matches(sys) {
        return Err(invalid("state layout does not match the system dimension"));
    }
    match state.layout {
        Layout::Full => full_energy(sys, &state.u, &state.v, &sys.load_full(state.t)),
        Layout::Reduced => reduced_energy(sys.reduced()?, &state.u, &state.v, &sys.load_reduced(state.t)),
    }
}

/// Contact forcing of the hybrid step on node 1 (without the `e₁`):
/// `H(-u)/(2h) (u + u')⁺ + H(u)/(2h) (u⁺ + u'⁺)` with `u = u₁ⁿ`, `u' = u₁ⁿ⁺¹`.
pub fn hybrid_contact_force(h: f64, u1_n: f64, u1_next: f64) -> f64 {
    heaviside(-u1_n) / (2.0 * h) * positive_part(u1_n + u1_next)
        + heaviside(u1_n) / (2.0 * h) * (positive_part(u1_n) + positive_part(u1_next))
}

/// Closed-form energy change of one hybrid step. Everything except the
/// contact terms cancels, leaving
/// `(u' - u) c(u, u') + ((u⁺)² - (u'⁺)²) / 2h`.
pub fn hybrid_increment_closed_form(h: f64, u1_n: f64, u1_next: f64) -> f64 {
    let (a, b) = (positive_part(u1_n), positive_part(u1_next));
    (u1_next - u1_n) * hybrid_contact_force(h, u1_n, u1_next) + (a * a - b * b) / (2.0 * h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyIncrement {
    pub direct: f64,
    pub closed_form: f64,
}

/// `E(n+1) - E(n)` for two consecutive reduced states, computed directly and
/// through the closed form.
pub fn energy_increment(sys: &AssembledSystem, prev: &State, next: &State) -> Result<EnergyIncrement> {
    if prev.layout != Layout::Reduced || next.layout != Layout::Reduced {
        return Err(invalid("energy increment is defined for reduced states"));
    }
    let red = sys.reduced()?;
    let direct = discrete_energy(sys, next)? - discrete_energy(sys, prev)?;
    Ok(EnergyIncrement {
        direct,
        closed_form: hybrid_increment_closed_form(red.h, prev.u[0], next.u[0]),
    })
}

/// `(tₙ, Eₙ, ΔEₙ)` records with `ΔEₙ = Eₙ₊₁ - Eₙ`; the last entry has no
/// successor and stores zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    pub times: Vec<f64>,
    pub energies: Vec<f64>,
}

impl EnergyLedger {
    pub fn push(&mut self, t: f64, e: f64) {
        self.times.push(t);
        self.energies.push(e);
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn increment(&self, n: usize) -> f64 {
        if n + 1 < self.energies.len() {
            self.energies[n + 1] - self.energies[n]
        } else {
            0.0
        }
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.energies.windows(2).map(|w| w[1] - w[0])
    }
}

/// Affine gap `α x[index] + offset`, constrained to be nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactFunctional {
    pub index: usize,
    pub scale: f64,
    pub offset: f64,
}

impl ContactFunctional {
    pub fn node(index: usize) -> Self {
        Self {
            index,
            scale: 1.0,
            offset: 0.0,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.scale * x[self.index] + self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactSolution {
    pub x: Vec<f64>,
    pub lambda: f64,
    pub gap: f64,
}

/// Solves `K x + λ c = b` with `0 ≤ g(x) ⊥ λ ≤ 0` for a single affine gap `g`.
///
/// First the inactive branch (`λ = 0`); if its gap is negative the constraint
/// is imposed as an equality and the multiplier recovered from the two
/// solves `K y = b`, `K z = c`. A gap of exactly zero keeps `λ = 0`.
pub fn solve_contact_step(
    k: &SymTridiag,
    b: &[f64],
    injection: &[f64],
    gap: ContactFunctional,
) -> Result<ContactSolution> {
    if b.len() != k.n() || injection.len() != k.n() || gap.index >= k.n() {
        return Err(invalid("contact solve: dimensions do not match"));
    }
    if gap.scale.is_nan() || gap.scale <= 0.0 {
        return Err(invalid("contact functional must have a positive scale"));
    }
    let factor = k.factor()?;
    let y = factor.solve(b)?;
    let g_free = gap.eval(&y);
    if g_free >= 0.0 {
        return Ok(ContactSolution {
            x: y,
            lambda: 0.0,
            gap: g_free,
        });
    }
    let z = factor.solve(injection)?;
    let coupling = gap.scale * z[gap.index];
    if coupling.is_nan() || coupling <= 0.0 {
        return Err(Error::Complementarity {
            gap: g_free,
            lambda: f64::NAN,
        });
    }
    let lambda = g_free / coupling;
    let mut x: Vec<f64> = y.iter().zip(&z).map(|(yi, zi)| yi - lambda * zi).collect();
    // enforce the active constraint exactly; `+ 0.0` maps -0 to +0
    x[gap.index] = -gap.offset / gap.scale + 0.0;
    let g = gap.eval(&x);
    let scale = 1.0 + norm_inf(&x);
    if lambda > 0.0 || g.abs() > 1e-10 * scale {
        return Err(Error::Complementarity { gap: g, lambda });
    }
    Ok(ContactSolution { x, lambda, gap: g })
}

/// `max(|min(g, 0)|, |max(λ, 0)|, |g λ|)`.
pub fn kkt_residual(gap: f64, lambda: f64) -> f64 {
    (-gap).max(0.0).max(lambda.max(0.0)).max((gap * lambda).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::WeightMode;
    use proptest::prelude::*;

    #[test]
    fn positive_part_examples() {
        assert_eq!(positive_part(-0.3), 0.0);
        assert_eq!(positive_part(0.5), 0.5);
        assert_eq!(positive_part(0.0), 0.0);
    }

    proptest! {
        #[test]
        fn positive_part_properties(a in -1e6f64..1e6, b in -1e6f64..1e6) {
            prop_assert_eq!(positive_part(positive_part(a)), positive_part(a));
            if a <= b {
                prop_assert!(positive_part(a) <= positive_part(b));
            }
            prop_assert!((positive_part(a) - positive_part(b)).abs() <= (a - b).abs());
        }
    }

    #[test]
    fn contact_solve_examples() {
        let k = SymTridiag::new(vec![2.0, 2.0], vec![-1.0]).unwrap();
        // unconstrained x0 = 0.2 >= 0
        let b = k.matvec(&[0.2, 0.5]).unwrap();
        let sol = solve_contact_step(&k, &b, &[1.0, 0.0], ContactFunctional::node(0)).unwrap();
        assert_eq!(sol.lambda, 0.0);
        assert!((sol.x[0] - 0.2).abs() < 1e-15 && (sol.x[1] - 0.5).abs() < 1e-15);

        let one = SymTridiag::identity(1);
        let sol = solve_contact_step(&one, &[-1.0], &[1.0], ContactFunctional::node(0)).unwrap();
        assert_eq!(sol.x, vec![0.0]);
        assert_eq!(sol.lambda, -1.0);

        // touching exactly: λ = 0
        let b = [-0.5, 1.0];
        let sol = solve_contact_step(&k, &b, &[1.0, 0.0], ContactFunctional::node(0)).unwrap();
        assert_eq!(sol.lambda, 0.0);
    }

    #[test]
    fn contact_solve_with_affine_gap() {
        // gap = (x0 + 0.5 * 0.2) / 1.5
        let k = SymTridiag::new(vec![3.0, 2.0, 2.0], vec![-1.0, -0.5]).unwrap();
        let b = [-2.0, 1.0, 0.3];
        let gap = ContactFunctional {
            index: 0,
            scale: 1.0 / 1.5,
            offset: 0.1 / 1.5,
        };
        let sol = solve_contact_step(&k, &b, &[0.4, 0.0, 0.0], gap).unwrap();
        assert!(sol.lambda < 0.0);
        assert!(gap.eval(&sol.x).abs() < 1e-14);
        let r = k.matvec(&sol.x).unwrap();
        assert!((r[0] + sol.lambda * 0.4 - b[0]).abs() < 1e-12);
        assert!((r[1] - b[1]).abs() < 1e-12 && (r[2] - b[2]).abs() < 1e-12);
    }

    #[test]
    fn rhs_g_examples() {
        let sys = AssembledSystem::benchmark(3, WeightMode::Mod3).unwrap();
        let red = sys.reduced().unwrap();
        let (du, dp) = rhs_g(red, &[0.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(du, vec![0.0, 0.0]);
        assert_eq!(dp, vec![0.0, 0.0]);

        // U = (-1, 0): contact term vanishes; acceleration (1/h) M*⁻¹ dP = -(1/h²) M*⁻¹ S* U
        let h = red.h;
        let (_, dp) = rhs_g(red, &[-1.0, 0.0], &[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!((dp[0] - 2.0 / h).abs() < 1e-12 && (dp[1] + 1.0 / h).abs() < 1e-12);
        let acc: Vec<f64> = red.mstar.factor().unwrap().solve(&dp).unwrap().iter().map(|x| x / h).collect();
        // dense 2x2: M* = [[2/3, 1/3], [1/3, 1]], S* U = (-2, 1)
        let det = 2.0 / 3.0 - 1.0 / 9.0;
        let (r0, r1) = (2.0, -1.0);
        let expect = [(1.0 * r0 - 1.0 / 3.0 * r1) / det / (h * h), (-1.0 / 3.0 * r0 + 2.0 / 3.0 * r1) / det / (h * h)];
        assert!((acc[0] - expect[0]).abs() < 1e-10 && (acc[1] - expect[1]).abs() < 1e-10);
    }

    #[test]
    fn rhs_g_reproduces_second_order_form() {
        // h M* Ü + (1/h) S* U = F + (1/h) u₁⁺ e₁ with Ü = (1/h) M*⁻¹ P'
        let sys = AssembledSystem::benchmark(3, WeightMode::Mod3).unwrap();
        let red = sys.reduced().unwrap();
        let h = red.h;
        let u = [0.3, -0.2];
        let f = [0.05, 0.1];
        let (_, dp) = rhs_g(red, &u, &[0.0, 0.0], &f).unwrap();
        let acc: Vec<f64> = red.mstar.factor().unwrap().solve(&dp).unwrap().iter().map(|x| x / h).collect();
        let lhs_m = red.mstar.matvec(&acc).unwrap();
        let lhs_s = red.sstar.matvec(&u).unwrap();
        for i in 0..2 {
            let lhs = h * lhs_m[i] + lhs_s[i] / h;
            let rhs = f[i] + if i == 0 { 0.3 / h } else { 0.0 };
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn rhs_g_lipschitz_constant_scales_like_inverse_h() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut scaled = vec![];
        for m in [6, 12, 24] {
            let sys = AssembledSystem::benchmark(m, WeightMode::Mod3).unwrap();
            let red = sys.reduced().unwrap();
            let n = red.dim();
            let f = vec![0.0; n];
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let mut v = || (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
                let (u1, p1, u2, p2) = (v(), v(), v(), v());
                let (a1, b1) = rhs_g(red, &u1, &p1, &f).unwrap();
                let (a2, b2) = rhs_g(red, &u2, &p2, &f).unwrap();
                let dg: f64 = a1.iter().zip(&a2).chain(b1.iter().zip(&b2)).map(|(x, y)| (x - y).powi(2)).sum();
                let dx: f64 = u1.iter().zip(&u2).chain(p1.iter().zip(&p2)).map(|(x, y)| (x - y).powi(2)).sum();
                worst = worst.max((dg / dx).sqrt());
            }
            assert!(worst.is_finite());
            scaled.push(worst * red.h);
        }
        let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
        assert!(hi / lo <= 4.0, "{scaled:?}");
    }

    #[test]
    fn full_energy_of_benchmark_initial_data() {
        let sys = AssembledSystem::benchmark(6, WeightMode::Mod1).unwrap();
        let u: Vec<f64> = (0..6).map(|i| 0.5 * (1.0 - i as f64 / 6.0)).collect();
        let e = full_energy(&sys, &u, &[0.0; 6], &[0.0; 6]).unwrap();
        assert!((e - 0.125).abs() < 1e-14);
    }

    #[test]
    fn reduced_energy_matches_full_energy_with_eliminated_node() {
        // with w₀ = 0 the full energy at u₀ = u₁⁺ equals the reduced energy
        let sys = AssembledSystem::benchmark(3, WeightMode::Mod3).unwrap();
        let red = sys.reduced().unwrap();
        for (u1, u2) in [(0.4, 0.1), (-0.3, 0.2), (0.0, -0.5)] {
            let v = [0.7, -0.2];
            let er = reduced_energy(red, &[u1, u2], &v, &[0.0, 0.0]).unwrap();
            let ef = full_energy(&sys, &[positive_part(u1), u1, u2], &[123.0, v[0], v[1]], &[0.0; 3]).unwrap();
            assert!((er - ef).abs() < 1e-13, "{u1} {u2}: {er} vs {ef}");
        }
    }

    #[test]
    fn closed_form_contact_cases() {
        let h = 1.0 / 6.0;
        // both nonpositive
        assert_eq!(hybrid_increment_closed_form(h, -0.2, -0.1), 0.0);
        // leaving positive side into contact
        assert!(hybrid_increment_closed_form(h, 0.2, -0.1) < 0.0);
        // from zero
        assert!(hybrid_increment_closed_form(h, 0.0, 0.3).abs() < 1e-15);
        assert!(hybrid_increment_closed_form(h, 0.0, -0.3).abs() < 1e-15);
        // impact step u < 0 < u'
        assert!(hybrid_increment_closed_form(h, -0.2, 0.1) < 0.0);
        // staying positive
        assert!(hybrid_increment_closed_form(h, 0.2, 0.3).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn closed_form_is_nonpositive(u in -1.0f64..1.0, w in -1.0f64..1.0) {
            prop_assert!(hybrid_increment_closed_form(0.1, u, w) <= 1e-15);
        }
    }

    #[test]
    fn kkt_residual_examples() {
        assert_eq!(kkt_residual(0.0, -0.5), 0.0);
        assert_eq!(kkt_residual(0.2, 0.0), 0.0);
        assert!(kkt_residual(-1e-3, 0.0) > 0.0);
        assert!(kkt_residual(0.1, -0.1) > 0.0);
    }

    #[test]
    fn ledger_increments() {
        let mut l = EnergyLedger::default();
        l.push(0.0, 1.0);
        l.push(0.1, 0.75);
        l.push(0.2, 0.5);
        assert_eq!(l.increment(0), -0.25);
        assert_eq!(l.increment(2), 0.0);
        assert_eq!(l.increments().collect::<Vec<_>>(), vec![-0.25, -0.25]);
    }
}
