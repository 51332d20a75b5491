//! Benchmark runs, error norms and convergence studies.
//!
//! Errors are measured against the P1 interpolant of the exact solution at
//! the mesh nodes, so they contain scheme error only and no interpolation
//! error.

use rayon::prelude::*;

use crate::assembly::{AssembledSystem, Mesh1D, WeightMode};
use crate::contact::{discrete_energy, EnergyLedger, Layout, State};
use crate::error::{invalid, Error, Result};
use crate::integrators::{initial_state, integrate, SchemeKind, SchemeParams, Trajectory};
use crate::oracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Outputs {
    pub trajectory: bool,
    pub energy: bool,
    pub errors: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            trajectory: true,
            energy: true,
            errors: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioConfig {
    pub m: usize,
    pub dt: f64,
    pub t_final: f64,
    pub mode: WeightMode,
    pub scheme: SchemeParams,
    pub outputs: Outputs,
}

impl Default for ScenarioConfig {
    /// Crank–Nicolson, nearest-neighbour redistribution, `Δx = 1/6`,
    /// `Δt = 1/100`, `T = 4`.
    fn default() -> Self {
        Self {
            m: 6,
            dt: 0.01,
            t_final: 4.0,
            mode: WeightMode::Mod3,
            scheme: SchemeParams::crank_nicolson(0.01),
            outputs: Outputs::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn new(kind: SchemeKind, mode: WeightMode, m: usize, dt: f64, t_final: f64) -> Self {
        let scheme = match kind {
            SchemeKind::Newmark => SchemeParams::crank_nicolson(dt),
            SchemeKind::BackwardEuler => SchemeParams::backward_euler(dt),
            SchemeKind::PaoliSchatzman => SchemeParams::paoli_schatzman(0.25, 1.0, dt),
            SchemeKind::Hybrid => SchemeParams::hybrid(dt),
            SchemeKind::SemiDiscreteCn => SchemeParams::semidiscrete_cn(dt),
        };
        Self {
            m,
            dt,
            t_final,
            mode,
            scheme,
            outputs: Outputs::default(),
        }
    }

    /// Number of steps; `T` must be a multiple of `Δt`.
    pub fn steps(&self) -> Result<usize> {
        if self.dt.is_nan() || self.dt <= 0.0 || self.t_final.is_nan() || self.t_final < 0.0 {
            return Err(Error::Config("dt must be positive and T nonnegative".into()));
        }
        let n = (self.t_final / self.dt).round();
        if (n * self.dt - self.t_final).abs() > 1e-9 * self.t_final.max(1.0) {
            return Err(Error::Config(format!(
                "T = {} is not a multiple of dt = {}",
                self.t_final, self.dt
            )));
        }
        Ok(n as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 3 {
            return Err(Error::Config(format!("m must be at least 3, got {}", self.m)));
        }
        if self.scheme.dt != self.dt {
            return Err(Error::Config("scheme time step differs from scenario time step".into()));
        }
        self.scheme.validate()?;
        if self.scheme.kind.layout() == Layout::Reduced && self.mode == WeightMode::Mod1 {
            return Err(Error::Config(format!(
                "scheme {} works on the reduced system and needs a redistributed mass (mod 2 or 3)",
                self.scheme.kind
            )));
        }
        if self.mode == WeightMode::Custom {
            return Err(Error::Config("custom weights are not available in benchmark scenarios".into()));
        }
        self.steps().map(|_| ())
    }
}

/// One output row per time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub u0: f64,
    pub u1: f64,
    pub lambda: f64,
    /// `(u_1 - u_0)/h`, the stiffness flux at the contact node.
    pub flux: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErrorReport {
    /// `max_n ‖uⁿ - u(tₙ)‖_{L²(0,1)}` over nodal P1 fields.
    pub linf_l2_displacement: f64,
    /// `(Δt Σ (u₀ⁿ - u(0, tₙ))²)^½`.
    pub l2_contact_displacement: f64,
    /// `(Δt Σ (λⁿ - λ(tₙ))²)^½`.
    pub l2_multiplier: f64,
    /// `max_n |Eⁿ - E_exact|` with `E_exact = ½∫(u_t² + u_x²)`.
    pub energy_drift: f64,
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    pub trajectory: Trajectory,
    pub records: Vec<StepRecord>,
    pub ledger: EnergyLedger,
    pub errors: ErrorReport,
}

impl ScenarioRun {
    pub fn nodal_displacements(&self) -> Vec<Vec<f64>> {
        self.trajectory.states.iter().map(State::nodal_displacement).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Mean of `λⁿ` over `tₙ` in the open interval `(a, b)`.
    pub fn mean_multiplier(&self, a: f64, b: f64) -> f64 {
        mean(self.records.iter().filter(|r| r.t > a && r.t < b).map(|r| r.lambda))
    }

    pub fn max_contact_displacement(&self, a: f64, b: f64) -> f64 {
        self.records
            .iter()
            .filter(|r| r.t > a && r.t < b)
            .fold(f64::NEG_INFINITY, |m, r| m.max(r.u0))
    }
}

fn mean(it: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = it.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

/// `‖v‖_{L²}` of the P1 interpolant of nodal values `v_0..v_m`:
/// `Σ_e (h/3)(v_i² + v_i v_{i+1} + v_{i+1}²)`.
pub fn l2_norm_field(mesh: &Mesh1D, nodal: &[f64]) -> Result<f64> {
    if nodal.len() != mesh.elements() + 1 {
        return Err(invalid(format!(
            "expected {} nodal values, got {}",
            mesh.elements() + 1,
            nodal.len()
        )));
    }
    let h = mesh.h();
    let sq: f64 = nodal
        .windows(2)
        .map(|w| h / 3.0 * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1]))
        .sum();
    Ok(sq.sqrt())
}

/// `max_n ‖uⁿ - u(tₙ)‖_{L²}` against the exact benchmark solution.
pub fn linf_l2_error(mesh: &Mesh1D, nodal: &[Vec<f64>], times: &[f64]) -> Result<f64> {
    if nodal.len() != times.len() {
        return Err(invalid("one time per nodal field required"));
    }
    let mut worst: f64 = 0.0;
    for (u, t) in nodal.iter().zip(times) {
        let exact = oracle::nodal_displacement(mesh.elements(), *t)?;
        let diff: Vec<f64> = u.iter().zip(&exact).map(|(a, b)| a - b).collect();
        worst = worst.max(l2_norm_field(mesh, &diff)?);
    }
    Ok(worst)
}

/// Least-squares slope of `log(error)` against `log(step)`.
pub fn convergence_order(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(invalid("convergence order needs at least three points"));
    }
    if points.iter().any(|(s, e)| !(*s > 0.0 && *e > 0.0)) {
        return Err(invalid("steps and errors must be positive"));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(s, _)| s.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, e)| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// Energy of the exact solution from exact nodal displacements (strain per
/// element) and element-midpoint velocities. Equals `1/8` whenever the
/// kinks of the exact solution sit on nodes.
pub fn oracle_grid_energy(m: usize, t: f64) -> Result<f64> {
    let mesh = Mesh1D::unit(m)?;
    let h = mesh.h();
    let u = oracle::nodal_displacement(m, t)?;
    let mut e = 0.0;
    for j in 0..m {
        let strain = (u[j + 1] - u[j]) / h;
        let vel = oracle::exact_velocity(mesh.node(j) + 0.5 * h, t)?;
        e += 0.5 * h * (strain * strain + vel * vel);
    }
    Ok(e)
}

pub fn benchmark_system(config: &ScenarioConfig) -> Result<AssembledSystem> {
    AssembledSystem::benchmark(config.m, config.mode)
}

pub fn benchmark_initial_state(sys: &AssembledSystem, layout: Layout) -> Result<State> {
    initial_state(sys, layout, oracle::initial_displacement, oracle::initial_velocity)
}

/// Runs the benchmark with `config` and evaluates it against the exact
/// solution.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ScenarioRun> {
    config.validate()?;
    let sys = benchmark_system(config)?;
    let steps = config.steps()?;
    let init = benchmark_initial_state(&sys, config.scheme.kind.layout())?;
    let trajectory = integrate(&sys, &config.scheme, init, steps)?;
    let h = sys.mesh.h();

    let mut records = Vec::with_capacity(trajectory.states.len());
    let mut ledger = EnergyLedger::default();
    for (n, s) in trajectory.states.iter().enumerate() {
        let t = n as f64 * config.dt;
        let energy = discrete_energy(&sys, s)?;
        ledger.push(t, energy);
        records.push(StepRecord {
            t,
            u0: s.contact_displacement(),
            u1: s.first_interior(),
            lambda: s.lambda,
            flux: s.contact_flux(h),
            energy,
        });
    }

    let errors = if config.outputs.errors {
        let nodal: Vec<Vec<f64>> = trajectory.states.iter().map(State::nodal_displacement).collect();
        let times: Vec<f64> = records.iter().map(|r| r.t).collect();
        let mut contact = 0.0;
        let mut mult = 0.0;
        for r in &records {
            contact += (r.u0 - oracle::exact_displacement(0.0, r.t)?).powi(2);
            mult += (r.lambda - oracle::exact_multiplier(r.t)?).powi(2);
        }
        let e_ref = oracle::exact_discrete_energy();
        ErrorReport {
            linf_l2_displacement: linf_l2_error(&sys.mesh, &nodal, &times)?,
            l2_contact_displacement: (config.dt * contact).sqrt(),
            l2_multiplier: (config.dt * mult).sqrt(),
            energy_drift: ledger.energies.iter().fold(0.0, |m, e| m.max((e - e_ref).abs())),
        }
    } else {
        ErrorReport::default()
    };

    Ok(ScenarioRun {
        config: *config,
        trajectory,
        records,
        ledger,
        errors,
    })
}

/// Runs `base` once per redistribution mode its scheme supports, keeping
/// every other setting.
pub fn compare_mods(base: &ScenarioConfig) -> Result<Vec<(WeightMode, ErrorReport)>> {
    let modes: &[WeightMode] = match base.scheme.kind.layout() {
        Layout::Full => &[WeightMode::Mod1, WeightMode::Mod2, WeightMode::Mod3],
        Layout::Reduced => &[WeightMode::Mod2, WeightMode::Mod3],
    };
    modes
        .par_iter()
        .map(|mode| {
            let cfg = ScenarioConfig { mode: *mode, ..*base };
            Ok((*mode, run_scenario(&cfg)?.errors))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudy {
    /// `(Δt, error)` pairs.
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
}

/// Temporal convergence of Crank–Nicolson on the reduced first-order system:
/// `max_n ‖(U, P)ⁿ - (U, P)_ref(tₙ)‖₂` against a run with `dt_ref`, which
/// must divide every step in `dts`.
pub fn temporal_order_study(
    m: usize,
    mode: WeightMode,
    dts: &[f64],
    dt_ref: f64,
    t_final: f64,
) -> Result<OrderStudy> {
    let sys = AssembledSystem::benchmark(m, mode)?;
    let mass = sys.reduced()?.mass();
    let run = |dt: f64| -> Result<Vec<Vec<f64>>> {
        let cfg = ScenarioConfig::new(SchemeKind::SemiDiscreteCn, mode, m, dt, t_final);
        let init = benchmark_initial_state(&sys, Layout::Reduced)?;
        let traj = integrate(&sys, &cfg.scheme, init, cfg.steps()?)?;
        traj.states
            .iter()
            .map(|s| {
                let mut z = s.u.clone();
                z.extend(mass.matvec(&s.v)?);
                Ok(z)
            })
            .collect()
    };
    let reference = run(dt_ref)?;
    let points: Vec<(f64, f64)> = dts
        .par_iter()
        .map(|&dt| {
            let ratio = (dt / dt_ref).round();
            if (ratio * dt_ref - dt).abs() > 1e-12 * dt {
                return Err(invalid(format!("dt = {dt} is not a multiple of dt_ref = {dt_ref}")));
            }
            let ratio = ratio as usize;
            let coarse = run(dt)?;
            let err = coarse
                .iter()
                .enumerate()
                .map(|(n, z)| {
                    let r = &reference[n * ratio];
                    z.iter().zip(r).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
                })
                .fold(0.0, f64::max);
            Ok((dt, err))
        })
        .collect::<Result<_>>()?;
    let slope = convergence_order(&points)?;
    Ok(OrderStudy { points, slope })
}

/// `linf_l2_error` of `base` rerun on each mesh size.
pub fn spatial_refinement_study(base: &ScenarioConfig, ms: &[usize]) -> Result<Vec<(usize, f64)>> {
    ms.par_iter()
        .map(|&m| {
            let run = run_scenario(&ScenarioConfig { m, ..*base })?;
            Ok((m, run.errors.linf_l2_displacement))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l2_norm_examples() {
        let mesh = Mesh1D::unit(4).unwrap();
        assert_eq!(l2_norm_field(&mesh, &[0.0; 5]).unwrap(), 0.0);
        let one_element = [1.0, 1.0, 0.0, 0.0, 0.0];
        // (h/3)(1 + 1 + 1) plus the half-hat on the next element (h/3)
        let expected = (mesh.h() + mesh.h() / 3.0).sqrt();
        assert!((l2_norm_field(&mesh, &one_element).unwrap() - expected).abs() < 1e-15);
        for m in [3, 7, 20] {
            let mesh = Mesh1D::unit(m).unwrap();
            let x: Vec<f64> = (0..=m).map(|i| mesh.node(i)).collect();
            assert!((l2_norm_field(&mesh, &x).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        }
        assert!(l2_norm_field(&mesh, &[0.0; 3]).is_err());
    }

    #[test]
    fn order_examples() {
        let s = convergence_order(&[(1.0, 1.0), (0.5, 0.5), (0.25, 0.25)]).unwrap();
        assert!((s - 1.0).abs() < 1e-14);
        let s = convergence_order(&[(1.0, 1.0), (0.5, 0.25), (0.25, 0.0625)]).unwrap();
        assert!((s - 2.0).abs() < 1e-14);
        assert!(convergence_order(&[(1.0, 1.0), (0.5, 0.0), (0.25, 0.1)]).is_err());
        assert!(convergence_order(&[(1.0, 1.0), (0.5, 0.5)]).is_err());
    }

    #[test]
    fn error_of_exact_samples_is_zero() {
        let mesh = Mesh1D::unit(6).unwrap();
        let times = [0.0, 0.5, 1.5, 2.25];
        let nodal: Vec<Vec<f64>> = times.iter().map(|t| oracle::nodal_displacement(6, *t).unwrap()).collect();
        assert_eq!(linf_l2_error(&mesh, &nodal, &times).unwrap(), 0.0);
    }

    #[test]
    fn oracle_grid_energy_is_constant_at_kink_aligned_times() {
        for m in [6, 12] {
            for k in 0..=(4 * m) {
                let t = k as f64 / m as f64;
                let e = oracle_grid_energy(m, t).unwrap();
                assert!((e - 0.125).abs() <= 1e-10, "m={m} t={t}: {e}");
            }
        }
    }

    #[test]
    fn zero_length_run_has_only_initial_state() {
        let mut cfg = ScenarioConfig::default();
        cfg.t_final = 0.0;
        let run = run_scenario(&cfg).unwrap();
        assert_eq!(run.records.len(), 1);
        assert_eq!(run.errors.linf_l2_displacement, 0.0);
    }

    #[test]
    fn incompatible_scheme_and_mode_rejected() {
        let cfg = ScenarioConfig::new(SchemeKind::Hybrid, WeightMode::Mod1, 6, 0.01, 1.0);
        assert!(matches!(run_scenario(&cfg), Err(Error::Config(_))));
        let cfg = ScenarioConfig::new(SchemeKind::Newmark, WeightMode::Mod3, 6, 0.03, 1.0);
        assert!(matches!(run_scenario(&cfg), Err(Error::Config(_))));
    }
}
