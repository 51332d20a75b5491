//! Time integrators for the contact problem.
//!
//! Full-layout schemes (Newmark, backward Euler, Paoli–Schatzman) carry the
//! contact node and its multiplier explicitly; each step is one bordered
//! solve through [`solve_contact_step`]. Reduced-layout schemes (hybrid,
//! Crank–Nicolson on the first-order system) work on `u_1..u_{m-1}` with the
//! scalar nonlinearity `u_1⁺`, resolved exactly by trying both sign branches.

use std::fmt;

use crate::assembly::AssembledSystem;
use crate::banded::SymTridiag;
use crate::contact::{
    hybrid_contact_force, kkt_residual, positive_part, solve_contact_step, ContactFunctional, Layout, State,
};
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    Newmark,
    BackwardEuler,
    PaoliSchatzman,
    Hybrid,
    SemiDiscreteCn,
}

impl SchemeKind {
    pub fn layout(self) -> Layout {
        match self {
            SchemeKind::Newmark | SchemeKind::BackwardEuler | SchemeKind::PaoliSchatzman => Layout::Full,
            SchemeKind::Hybrid | SchemeKind::SemiDiscreteCn => Layout::Reduced,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Newmark => "newmark",
            SchemeKind::BackwardEuler => "backward_euler",
            SchemeKind::PaoliSchatzman => "paoli_schatzman",
            SchemeKind::Hybrid => "hybrid",
            SchemeKind::SemiDiscreteCn => "semidiscrete_cn",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub kind: SchemeKind,
    pub beta: f64,
    pub gamma: f64,
    /// Restitution coefficient in `[0, 1]` (Paoli–Schatzman only).
    pub e: f64,
    pub dt: f64,
}

impl SchemeParams {
    pub fn newmark(beta: f64, gamma: f64, dt: f64) -> Self {
        Self {
            kind: SchemeKind::Newmark,
            beta,
            gamma,
            e: 1.0,
            dt,
        }
    }

    /// Newmark with `(β, γ) = (1/4, 1/2)`.
    pub fn crank_nicolson(dt: f64) -> Self {
        Self::newmark(0.25, 0.5, dt)
    }

    pub fn backward_euler(dt: f64) -> Self {
        Self {
            kind: SchemeKind::BackwardEuler,
            ..Self::crank_nicolson(dt)
        }
    }

    pub fn paoli_schatzman(beta: f64, e: f64, dt: f64) -> Self {
        Self {
            kind: SchemeKind::PaoliSchatzman,
            beta,
            gamma: 0.5,
            e,
            dt,
        }
    }

    pub fn hybrid(dt: f64) -> Self {
        Self {
            kind: SchemeKind::Hybrid,
            ..Self::crank_nicolson(dt)
        }
    }

    pub fn semidiscrete_cn(dt: f64) -> Self {
        Self {
            kind: SchemeKind::SemiDiscreteCn,
            ..Self::crank_nicolson(dt)
        }
    }

    /// `γ ≥ 1/2` and `β ≥ (1/2 + γ)²/4`, the unconditional stability region of
    /// Newmark on linear elastodynamics.
    pub fn unconditionally_stable(&self) -> bool {
        self.gamma >= 0.5 && self.beta >= 0.25 * (0.5 + self.gamma).powi(2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("time step must be positive, got {}", self.dt)));
        }
        if matches!(self.kind, SchemeKind::Newmark | SchemeKind::PaoliSchatzman) && (self.beta.is_nan() || self.beta <= 0.0) {
            return Err(Error::Config(format!("beta must be positive, got {}", self.beta)));
        }
        if !(0.0..=1.0).contains(&self.e) {
            return Err(Error::Config(format!("restitution must lie in [0, 1], got {}", self.e)));
        }
        Ok(())
    }
}

fn require_layout(state: &State, sys: &AssembledSystem, layout: Layout) -> Result<()> {
    if state.layout != layout || !state.dim_matches(sys) {
        return Err(invalid(format!(
            "state layout {:?} with {} unknowns does not fit a {:?} step on m = {}",
            state.layout,
            state.u.len(),
            layout,
            sys.dim()
        )));
    }
    Ok(())
}

/// With `w_0 = 0` the kernel of the full mass matrix is `span(e₀)`.
fn mass_has_contact_kernel(mass: &SymTridiag) -> bool {
    mass.get(0, 0) == 0.0 && mass.get(0, 1) == 0.0
}

fn unit(n: usize, i: usize, scale: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = scale;
    v
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| a * xi + yi).collect()
}

/// Acceleration consistent with the equation of motion at `t`.
///
/// Full: `M A = F - S U - λ e₀`, solved off the kernel when `w_0 = 0`
/// (the contact-node acceleration is then set to zero).
/// Reduced: `h M* A = F + (1/h) u₁⁺ e₁ - (1/h) S* U`.
pub fn initial_acceleration(sys: &AssembledSystem, u: &[f64], lambda: f64, layout: Layout, t: f64) -> Result<Vec<f64>> {
    match layout {
        Layout::Full => {
            let m = sys.dim();
            if u.len() != m {
                return Err(invalid("initial_acceleration: displacement length != m"));
            }
            let su = sys.stiffness.matvec(u)?;
            let mut rhs: Vec<f64> = sys.load_full(t).iter().zip(&su).map(|(f, s)| f - s).collect();
            rhs[0] -= lambda;
            if mass_has_contact_kernel(&sys.mass) {
                let mut a = vec![0.0];
                a.extend(sys.mass.trailing(1)?.factor()?.solve(&rhs[1..])?);
                Ok(a)
            } else {
                sys.mass.factor()?.solve(&rhs)
            }
        }
        Layout::Reduced => {
            let red = sys.reduced()?;
            if u.len() != red.dim() {
                return Err(invalid("initial_acceleration: displacement length != m - 1"));
            }
            let su = red.stiffness().matvec(u)?;
            let mut rhs: Vec<f64> = sys.load_reduced(t).iter().zip(&su).map(|(f, s)| f - s).collect();
            rhs[0] += positive_part(u[0]) / red.h;
            red.mass().factor()?.solve(&rhs)
        }
    }
}

/// Interpolates initial data at the nodes of `layout` and attaches the
/// consistent initial acceleration (with `λ⁰ = 0`).
pub fn initial_state(
    sys: &AssembledSystem,
    layout: Layout,
    u0: impl Fn(f64) -> f64,
    v0: impl Fn(f64) -> f64,
) -> Result<State> {
    let first = match layout {
        Layout::Full => 0,
        Layout::Reduced => 1,
    };
    let nodes: Vec<f64> = (first..sys.dim()).map(|i| sys.mesh.node(i)).collect();
    let mut s = State::new(
        0.0,
        nodes.iter().map(|x| u0(*x)).collect(),
        nodes.iter().map(|x| v0(*x)).collect(),
        layout,
    )?;
    s.a = initial_acceleration(sys, &s.u, 0.0, layout, 0.0)?;
    Ok(s)
}

/// One Newmark(β, γ) step with the contact condition `0 ≤ u₀ ⊥ λ ≤ 0`
/// imposed at `tₙ₊₁`.
///
/// Eliminating `Üⁿ⁺¹` gives `(M + βΔt²S) Uⁿ⁺¹ = βΔt² (F - λ e₀) + M Ũ` with
/// the predictor `Ũ = Uⁿ + ΔtU̇ⁿ + (1/2 - β)Δt²Üⁿ`.
pub fn newmark_step(sys: &AssembledSystem, params: &SchemeParams, state: &State) -> Result<State> {
    require_layout(state, sys, Layout::Full)?;
    let (dt, beta, gamma) = (params.dt, params.beta, params.gamma);
    let m = sys.dim();
    let c = beta * dt * dt;
    let pred: Vec<f64> = (0..m)
        .map(|i| state.u[i] + dt * state.v[i] + (0.5 - beta) * dt * dt * state.a[i])
        .collect();
    let k = sys.mass.lin_comb(1.0, &sys.stiffness, c)?;
    let t = state.t + dt;
    let mp = sys.mass.matvec(&pred)?;
    let b = axpy(c, &sys.load_full(t), &mp);
    let sol = solve_contact_step(&k, &b, &unit(m, 0, c), ContactFunctional::node(0))?;
    let a: Vec<f64> = sol.x.iter().zip(&pred).map(|(x, p)| (x - p) / c).collect();
    let v: Vec<f64> = (0..m)
        .map(|i| state.v[i] + dt * ((1.0 - gamma) * state.a[i] + gamma * a[i]))
        .collect();
    Ok(State {
        t,
        u: sol.x,
        v,
        a,
        lambda: sol.lambda,
        layout: Layout::Full,
    })
}

/// Fully implicit first-order step:
/// `(M + Δt²S) Uⁿ⁺¹ = Δt² (F - λ e₀) + M (Uⁿ + ΔtU̇ⁿ)`.
pub fn backward_euler_step(sys: &AssembledSystem, params: &SchemeParams, state: &State) -> Result<State> {
    require_layout(state, sys, Layout::Full)?;
    let dt = params.dt;
    let m = sys.dim();
    let c = dt * dt;
    let pred = axpy(dt, &state.v, &state.u);
    let k = sys.mass.lin_comb(1.0, &sys.stiffness, c)?;
    let t = state.t + dt;
    let b = axpy(c, &sys.load_full(t), &sys.mass.matvec(&pred)?);
    let sol = solve_contact_step(&k, &b, &unit(m, 0, c), ContactFunctional::node(0))?;
    let v: Vec<f64> = sol.x.iter().zip(&state.u).map(|(x, u)| (x - u) / dt).collect();
    let a: Vec<f64> = v.iter().zip(&state.v).map(|(v1, v0)| (v1 - v0) / dt).collect();
    Ok(State {
        t,
        u: sol.x,
        v,
        a,
        lambda: sol.lambda,
        layout: Layout::Full,
    })
}

/// Result of a two-step Paoli–Schatzman update. The multiplier belongs to
/// the middle time `tₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStepOutcome {
    pub lambda_mid: f64,
    pub gap_mid: f64,
    pub next: State,
}

/// Paoli–Schatzman step from `(Uⁿ⁻¹, Uⁿ)` to `Uⁿ⁺¹`:
///
/// `M(Uⁿ⁺¹ - 2Uⁿ + Uⁿ⁻¹)/Δt² + S(βUⁿ⁺¹ + (1-2β)Uⁿ + βUⁿ⁻¹) = -λⁿe₀ + Fⁿ`
/// with `0 ≤ (u₀ⁿ⁺¹ + e u₀ⁿ⁻¹)/(1 + e) ⊥ λⁿ ≤ 0`. When the mass has the
/// kernel `span(e₀)`, the explicit stiffness terms lose their `e₀` component.
pub fn paoli_schatzman_step(
    sys: &AssembledSystem,
    params: &SchemeParams,
    prev: &State,
    cur: &State,
) -> Result<TwoStepOutcome> {
    require_layout(prev, sys, Layout::Full)?;
    require_layout(cur, sys, Layout::Full)?;
    let (dt, beta, e) = (params.dt, params.beta, params.e);
    let m = sys.dim();
    let dt2 = dt * dt;
    let mut s_cur = sys.stiffness.matvec(&cur.u)?;
    let mut s_prev = sys.stiffness.matvec(&prev.u)?;
    if mass_has_contact_kernel(&sys.mass) {
        s_cur[0] = 0.0;
        s_prev[0] = 0.0;
    }
    let two_cur_minus_prev: Vec<f64> = cur.u.iter().zip(&prev.u).map(|(c, p)| 2.0 * c - p).collect();
    let mut b = sys.mass.matvec(&two_cur_minus_prev)?;
    let load = sys.load_full(cur.t);
    for i in 0..m {
        b[i] += dt2 * (load[i] - (1.0 - 2.0 * beta) * s_cur[i] - beta * s_prev[i]);
    }
    let k = sys.mass.lin_comb(1.0, &sys.stiffness, beta * dt2)?;
    let gap = ContactFunctional {
        index: 0,
        scale: 1.0 / (1.0 + e),
        offset: e * prev.u[0] / (1.0 + e),
    };
    let sol = solve_contact_step(&k, &b, &unit(m, 0, dt2), gap)?;
    let v: Vec<f64> = sol.x.iter().zip(&cur.u).map(|(x, u)| (x - u) / dt).collect();
    let a: Vec<f64> = (0..m).map(|i| (sol.x[i] - 2.0 * cur.u[i] + prev.u[i]) / dt2).collect();
    Ok(TwoStepOutcome {
        lambda_mid: sol.lambda,
        gap_mid: sol.gap,
        next: State {
            t: cur.t + dt,
            u: sol.x,
            v,
            a,
            lambda: 0.0,
            layout: Layout::Full,
        },
    })
}

/// Second-order Taylor start-up `U¹ = U⁰ + ΔtV⁰ + (Δt²/2)A⁰` for two-step
/// schemes. A negative contact displacement is projected back onto the
/// obstacle in the `(M + βΔt²S)` metric, producing a nonpositive multiplier.
pub fn bootstrap_first_step(sys: &AssembledSystem, params: &SchemeParams, state: &State) -> Result<State> {
    require_layout(state, sys, Layout::Full)?;
    let dt = params.dt;
    let m = sys.dim();
    let half = 0.5 * dt * dt;
    let pred: Vec<f64> = (0..m).map(|i| state.u[i] + dt * state.v[i] + half * state.a[i]).collect();
    let v: Vec<f64> = axpy(dt, &state.a, &state.v);
    let (u, lambda) = if pred[0] >= 0.0 {
        (pred, 0.0)
    } else {
        let k = sys.mass.lin_comb(1.0, &sys.stiffness, params.beta * dt * dt)?;
        let b = k.matvec(&pred)?;
        let sol = solve_contact_step(&k, &b, &unit(m, 0, half), ContactFunctional::node(0))?;
        (sol.x, sol.lambda)
    };
    Ok(State {
        t: state.t + dt,
        u,
        v,
        a: state.a.clone(),
        lambda,
        layout: Layout::Full,
    })
}

/// Solves `K x = r + A (α + x₁)⁺ e₁` exactly, `K` SPD and `K - A e₁e₁ᵀ` SPD.
fn solve_positive_part_system(k: &SymTridiag, r: &[f64], a: f64, alpha: f64, t: f64) -> Result<Vec<f64>> {
    let mut kp = k.clone();
    kp.add_to_diag(0, -a);
    let mut rp = r.to_vec();
    rp[0] += a * alpha;
    let xp = kp.factor()?.solve(&rp)?;
    if alpha + xp[0] >= 0.0 {
        return Ok(xp);
    }
    let xn = k.factor()?.solve(r)?;
    if alpha + xn[0] <= 0.0 {
        return Ok(xn);
    }
    Err(Error::DegenerateBranch { t })
}

fn reduced_multiplier(h: f64, u1: f64) -> f64 {
    (u1 - positive_part(u1)) / h
}

/// Energy-dissipative hybrid step on the reduced system: midpoint rule for
/// the linear part, and for the contact term the midpoint value
/// `(u₁ⁿ + u₁ⁿ⁺¹)⁺/2h` when `u₁ⁿ < 0` or the trapezoidal value
/// `((u₁ⁿ)⁺ + (u₁ⁿ⁺¹)⁺)/2h` when `u₁ⁿ > 0` (their average at `u₁ⁿ = 0`).
///
/// The reported multiplier is the contact-node flux `(u₁ - u₀)/h`.
pub fn hybrid_step(sys: &AssembledSystem, params: &SchemeParams, state: &State) -> Result<State> {
    require_layout(state, sys, Layout::Reduced)?;
    if !sys.forcing.is_time_constant() {
        return Err(Error::Config("hybrid scheme requires a time-independent load".into()));
    }
    let red = sys.reduced()?;
    let (dt, h) = (params.dt, red.h);
    let mass = red.mass();
    let stiff = red.stiffness();
    let k = mass.lin_comb(2.0 / (dt * dt), &stiff, 0.5)?;

    let mu = mass.matvec(&state.u)?;
    let mv = mass.matvec(&state.v)?;
    let su = stiff.matvec(&state.u)?;
    let load = sys.load_reduced(state.t);
    let mut r: Vec<f64> = (0..red.dim())
        .map(|i| load[i] + 2.0 / (dt * dt) * mu[i] + 2.0 / dt * mv[i] - 0.5 * su[i])
        .collect();

    // contact term as A (α + x₁)⁺ + D with A = 1/2h in every case
    let u1 = state.u[0];
    let (alpha, d) = if u1 < 0.0 { (u1, 0.0) } else { (0.0, u1 / (2.0 * h)) };
    r[0] += d;
    let u = solve_positive_part_system(&k, &r, 0.5 / h, alpha, state.t + dt)?;
    debug_assert!(
        (k.matvec(&u).unwrap()[0] - r[0] + d - hybrid_contact_force(h, u1, u[0])).abs()
            <= 1e-9 * (1.0 + r[0].abs())
    );

    let v: Vec<f64> = (0..u.len())
        .map(|i| 2.0 * (u[i] - state.u[i]) / dt - state.v[i])
        .collect();
    let a: Vec<f64> = (0..u.len())
        .map(|i| 2.0 * (v[i] - state.v[i]) / dt - state.a[i])
        .collect();
    let lambda = reduced_multiplier(h, u[0]);
    Ok(State {
        t: state.t + dt,
        u,
        v,
        a,
        lambda,
        layout: Layout::Reduced,
    })
}

/// Crank–Nicolson on `(U, P)' = G(U, P)` with momentum `P = h M* U̇`:
/// `(𝒰ⁿ⁺¹ - 𝒰ⁿ)/Δt = (G(𝒰ⁿ⁺¹) + G(𝒰ⁿ))/2`.
///
/// Eliminating `Pⁿ⁺¹` leaves
/// `(4/Δt² hM* + S*/h) Uⁿ⁺¹ - (1/h)(u₁ⁿ⁺¹)⁺ e₁ = (4/Δt² hM* - S*/h) Uⁿ + (4/Δt) Pⁿ + 2F + (1/h)(u₁ⁿ)⁺ e₁`.
pub fn semidiscrete_cn_step(sys: &AssembledSystem, params: &SchemeParams, state: &State) -> Result<State> {
    require_layout(state, sys, Layout::Reduced)?;
    let red = sys.reduced()?;
    let (dt, h) = (params.dt, red.h);
    let mass = red.mass();
    let stiff = red.stiffness();
    let c = 4.0 / (dt * dt);
    let k = mass.lin_comb(c, &stiff, 1.0)?;

    let p = mass.matvec(&state.v)?;
    let mu = mass.matvec(&state.u)?;
    let su = stiff.matvec(&state.u)?;
    // trapezoidal average of a possibly time-dependent load
    let f0 = sys.load_reduced(state.t);
    let f1 = sys.load_reduced(state.t + dt);
    let mut r: Vec<f64> = (0..red.dim())
        .map(|i| c * mu[i] - su[i] + 4.0 / dt * p[i] + f0[i] + f1[i])
        .collect();
    r[0] += positive_part(state.u[0]) / h;
    let u = solve_positive_part_system(&k, &r, 1.0 / h, 0.0, state.t + dt)?;

    let v: Vec<f64> = (0..u.len())
        .map(|i| 2.0 * (u[i] - state.u[i]) / dt - state.v[i])
        .collect();
    let a = initial_acceleration(sys, &u, 0.0, Layout::Reduced, state.t + dt)?;
    let lambda = reduced_multiplier(h, u[0]);
    Ok(State {
        t: state.t + dt,
        u,
        v,
        a,
        lambda,
        layout: Layout::Reduced,
    })
}

/// States at `t₀..t_N` and the complementarity residual of every step.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<State>,
    /// `kkt[n]` belongs to the constraint solved while producing step `n + 1`.
    pub kkt: Vec<f64>,
}

impl Trajectory {
    pub fn max_kkt(&self) -> f64 {
        self.kkt.iter().fold(0.0, |m, x| m.max(*x))
    }
}

/// Advances `initial` by `steps` steps of `params.kind`.
///
/// For Paoli–Schatzman the first step is [`bootstrap_first_step`] and the
/// multiplier computed while producing `Uⁿ⁺¹` is stored on state `n`; the
/// final state keeps `λ = 0`.
pub fn integrate(sys: &AssembledSystem, params: &SchemeParams, initial: State, steps: usize) -> Result<Trajectory> {
    params.validate()?;
    let layout = params.kind.layout();
    if initial.layout != layout {
        return Err(Error::Config(format!(
            "scheme {} needs a {:?} state, got {:?}",
            params.kind, layout, initial.layout
        )));
    }
    require_layout(&initial, sys, layout)?;
    if layout == Layout::Reduced {
        sys.reduced().map_err(|e| Error::Config(format!("scheme {} needs w_0 = 0: {e}", params.kind)))?;
    }
    let mut states = Vec::with_capacity(steps + 1);
    let mut kkt = Vec::with_capacity(steps);
    states.push(initial);
    if params.kind == SchemeKind::PaoliSchatzman {
        if steps == 0 {
            return Ok(Trajectory { states, kkt });
        }
        let first = bootstrap_first_step(sys, params, &states[0])?;
        kkt.push(kkt_residual(first.u[0], first.lambda));
        states.push(first);
        for n in 1..steps {
            let out = paoli_schatzman_step(sys, params, &states[n - 1], &states[n])?;
            states[n].lambda = out.lambda_mid;
            kkt.push(kkt_residual(out.gap_mid, out.lambda_mid));
            states.push(out.next);
        }
        return Ok(Trajectory { states, kkt });
    }
    for n in 0..steps {
        let cur = &states[n];
        let next = match params.kind {
            SchemeKind::Newmark => newmark_step(sys, params, cur)?,
            SchemeKind::BackwardEuler => backward_euler_step(sys, params, cur)?,
            SchemeKind::Hybrid => hybrid_step(sys, params, cur)?,
            SchemeKind::SemiDiscreteCn => semidiscrete_cn_step(sys, params, cur)?,
            SchemeKind::PaoliSchatzman => unreachable!(),
        };
        kkt.push(kkt_residual(next.contact_displacement(), next.lambda));
        states.push(next);
    }
    Ok(Trajectory { states, kkt })
}
