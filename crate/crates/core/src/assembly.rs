//! Mesh, weighted mass, stiffness and load assembly.
//!
//! Nodes are `x_i = i h` for `i = 0..=m`. Node 0 is the contact node, node `m`
//! carries the homogeneous Dirichlet condition and is eliminated, so the full
//! system has the `m` unknowns `u_0..u_{m-1}`. The mass density on element
//! `[j h, (j + 1) h]` is scaled by the weight `w_j`; setting `w_0 = 0` removes
//! the inertia of the contact node, and the redistribution modes decide where
//! that mass goes.

use std::fmt;
use std::sync::Arc;

use crate::banded::SymTridiag;
use crate::error::{invalid, Error, Result};

/// Uniform mesh of `(0, L)` with `m` elements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh1D {
    length: f64,
    m: usize,
    h: f64,
}

impl Mesh1D {
    pub fn new(length: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(invalid(format!("mesh needs at least 2 elements, got {m}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(invalid(format!("bar length must be positive, got {length}")));
        }
        Ok(Self {
            length,
            m,
            h: length / m as f64,
        })
    }

    /// Unit-length mesh used by the benchmark.
    pub fn unit(m: usize) -> Result<Self> {
        Self::new(1.0, m)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn elements(&self) -> usize {
        self.m
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Coordinate of node `i` (`0..=m`).
    pub fn node(&self, i: usize) -> f64 {
        if i == self.m {
            self.length
        } else {
            i as f64 * self.h
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightMode {
    /// No redistribution: all weights one.
    Mod1,
    /// Contact-node mass spread uniformly over the remaining elements.
    Mod2,
    /// Contact-node mass moved onto the neighbouring element.
    Mod3,
    Custom,
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WeightMode::Mod1 => "mod1",
            WeightMode::Mod2 => "mod2",
            WeightMode::Mod3 => "mod3",
            WeightMode::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Per-element mass weights: `w[j]` applies to `[j h, (j + 1) h]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightProfile {
    mode: WeightMode,
    w: Vec<f64>,
}

impl WeightProfile {
    pub fn mode(&self) -> WeightMode {
        self.mode
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Arbitrary weights. Requires `w[j] >= 0` and `w[j] > 0` for `j >= 1`.
    pub fn custom(w: Vec<f64>) -> Result<Self> {
        if w.len() < 2 {
            return Err(invalid("custom weight profile needs at least two elements"));
        }
        if w.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(invalid("custom weights must be finite and nonnegative"));
        }
        if w[1..].iter().any(|x| *x <= 0.0) {
            return Err(invalid("custom weights w[j], j >= 1, must be positive"));
        }
        Ok(Self {
            mode: WeightMode::Custom,
            w,
        })
    }

    /// Contact-node inertia removed (`w_0 = 0`).
    pub fn is_redistributed(&self) -> bool {
        self.w[0] == 0.0
    }
}

pub fn build_weights(mode: WeightMode, m: usize) -> Result<WeightProfile> {
    if m < 3 {
        return Err(invalid(format!("weight profiles need m >= 3, got {m}")));
    }
    let w = match mode {
        WeightMode::Mod1 => vec![1.0; m],
        WeightMode::Mod2 => {
            let c = m as f64 / (m as f64 - 1.0);
            std::iter::once(0.0).chain(std::iter::repeat_n(c, m - 1)).collect()
        }
        WeightMode::Mod3 => {
            let mut w = vec![1.0; m];
            w[0] = 0.0;
            w[1] = 2.0;
            w
        }
        WeightMode::Custom => {
            return Err(invalid("custom profiles are built with WeightProfile::custom"));
        }
    };
    Ok(WeightProfile { mode, w })
}

/// `M_ik = ∫ φ_k φ_i w_h dx` over the `m` unknown nodes.
pub fn assemble_mass(mesh: &Mesh1D, wp: &WeightProfile) -> Result<SymTridiag> {
    let m = mesh.elements();
    if wp.w.len() != m {
        return Err(invalid(format!(
            "weight profile has {} entries, mesh has {} elements",
            wp.w.len(),
            m
        )));
    }
    let h = mesh.h();
    let w = &wp.w;
    Ok(SymTridiag::from_fn(
        m,
        |i| {
            if i == 0 {
                h / 3.0 * w[0]
            } else {
                h / 3.0 * (w[i - 1] + w[i])
            }
        },
        |i| h / 6.0 * w[i],
    ))
}

/// `S_ik = ∫ φ'_k φ'_i dx` over the `m` unknown nodes.
pub fn assemble_stiffness(mesh: &Mesh1D) -> SymTridiag {
    let h = mesh.h();
    SymTridiag::from_fn(
        mesh.elements(),
        |i| if i == 0 { 1.0 / h } else { 2.0 / h },
        |_| -1.0 / h,
    )
}

/// Nodal load `f_i(t) = ∫ f(x, t) w_h(x) φ_i(x) dx` for `i = 0..m-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadVector {
    full: Vec<f64>,
}

impl LoadVector {
    pub fn from_full(full: Vec<f64>) -> Self {
        Self { full }
    }

    pub fn zeros(m: usize) -> Self {
        Self { full: vec![0.0; m] }
    }

    pub fn full(&self) -> &[f64] {
        &self.full
    }

    /// Entries for nodes `1..m-1`.
    pub fn reduced(&self) -> &[f64] {
        &self.full[1..]
    }
}

const GAUSS_2: [f64; 2] = [-0.577_350_269_189_625_8, 0.577_350_269_189_625_8];

/// Two-point Gauss rule per element; exact for `f` affine in `x`.
pub fn assemble_load(
    mesh: &Mesh1D,
    wp: &WeightProfile,
    f: &dyn Fn(f64, f64) -> f64,
    t: f64,
) -> LoadVector {
    let m = mesh.elements();
    let h = mesh.h();
    let mut full = vec![0.0; m];
    for j in 0..m {
        let wj = wp.w[j];
        if wj == 0.0 {
            continue;
        }
        let left = mesh.node(j);
        for g in GAUSS_2 {
            let xi = 0.5 * (1.0 + g);
            let x = left + xi * h;
            let fx = f(x, t) * wj * 0.5 * h;
            full[j] += fx * (1.0 - xi);
            if j + 1 < m {
                full[j + 1] += fx * xi;
            }
        }
    }
    LoadVector { full }
}

/// Matrices of the system with the contact node eliminated (`u_0 = u_1⁺`).
///
/// `mstar = M / h` and `sstar = h S`, both restricted to nodes `1..m-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem {
    pub h: f64,
    pub mstar: SymTridiag,
    pub sstar: SymTridiag,
    pub load: Vec<f64>,
}

impl ReducedSystem {
    /// `h M*`, i.e. the restricted mass matrix.
    pub fn mass(&self) -> SymTridiag {
        self.mstar.scaled(self.h)
    }

    /// `S* / h`, i.e. the restricted stiffness matrix.
    pub fn stiffness(&self) -> SymTridiag {
        self.sstar.scaled(1.0 / self.h)
    }

    pub fn dim(&self) -> usize {
        self.mstar.n()
    }
}

/// Eliminates the contact node. Only valid when its mass row vanishes.
pub fn reduce_system(h: f64, mass: &SymTridiag, stiffness: &SymTridiag, load_full: &[f64]) -> Result<ReducedSystem> {
    let m = mass.n();
    if stiffness.n() != m || load_full.len() != m {
        return Err(invalid("mass, stiffness and load dimensions differ"));
    }
    if m < 2 {
        return Err(invalid("reduction needs at least two unknowns"));
    }
    if mass.get(0, 0) != 0.0 || mass.get(0, 1) != 0.0 {
        return Err(Error::InvalidMode(
            "contact-node mass is nonzero (w_0 != 0); elimination u_0 = u_1+ does not apply".into(),
        ));
    }
    Ok(ReducedSystem {
        h,
        mstar: mass.trailing(1)?.scaled(1.0 / h),
        sstar: stiffness.trailing(1)?.scaled(h),
        load: load_full[1..].to_vec(),
    })
}

pub type DensityFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// External force density.
#[derive(Clone)]
pub enum Forcing {
    /// Time-independent nodal load.
    Constant(LoadVector),
    /// Density `f(x, t)`, reassembled at every requested time.
    Field(DensityFn),
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Forcing::Constant(l) => f.debug_tuple("Constant").field(l).finish(),
            Forcing::Field(_) => f.write_str("Field(..)"),
        }
    }
}

impl Forcing {
    pub fn is_time_constant(&self) -> bool {
        matches!(self, Forcing::Constant(_))
    }
}

/// Everything an integrator needs: mesh, weights, matrices and forcing.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub mesh: Mesh1D,
    pub weights: WeightProfile,
    pub mass: SymTridiag,
    pub stiffness: SymTridiag,
    pub forcing: Forcing,
    reduced: Option<ReducedSystem>,
}

impl AssembledSystem {
    pub fn new(mesh: Mesh1D, weights: WeightProfile, forcing: Forcing) -> Result<Self> {
        let mass = assemble_mass(&mesh, &weights)?;
        let stiffness = assemble_stiffness(&mesh);
        if let Forcing::Constant(l) = &forcing {
            if l.full.len() != mesh.elements() {
                return Err(invalid(format!(
                    "constant load has {} entries, expected {}",
                    l.full.len(),
                    mesh.elements()
                )));
            }
        }
        let mut sys = Self {
            mesh,
            weights,
            mass,
            stiffness,
            forcing,
            reduced: None,
        };
        if sys.weights.is_redistributed() {
            let load = sys.load_full(0.0);
            sys.reduced = Some(reduce_system(sys.mesh.h(), &sys.mass, &sys.stiffness, &load)?);
        }
        Ok(sys)
    }

    /// Unloaded benchmark system on the unit bar.
    pub fn benchmark(m: usize, mode: WeightMode) -> Result<Self> {
        let mesh = Mesh1D::unit(m)?;
        let weights = build_weights(mode, m)?;
        Self::new(mesh, weights, Forcing::Constant(LoadVector::zeros(m)))
    }

    pub fn dim(&self) -> usize {
        self.mesh.elements()
    }

    pub fn load_full(&self, t: f64) -> Vec<f64> {
        match &self.forcing {
            Forcing::Constant(l) => l.full.clone(),
            Forcing::Field(f) => assemble_load(&self.mesh, &self.weights, f.as_ref(), t).full,
        }
    }

    pub fn load_reduced(&self, t: f64) -> Vec<f64> {
        let mut full = self.load_full(t);
        full.remove(0);
        full
    }

    pub fn reduced(&self) -> Result<&ReducedSystem> {
        self.reduced.as_ref().ok_or_else(|| {
            Error::InvalidMode(format!(
                "weight mode {} keeps contact-node mass; no reduced system",
                self.weights.mode()
            ))
        })
    }
}
