//! Time propagation of `|ρ(t)⟩` under a Liouvillian.
//!
//! [`evolve`] integrates `d|ρ⟩/dt = L|ρ⟩` with an adaptive Dormand-Prince
//! 5(4) pair and samples observables on a caller-supplied time grid.
//! [`expm_oracle`] applies a dense matrix exponential and serves as the
//! reference for small problems.
//!
//! Both work on the smallest coordinate subspace of the doubled space that
//! contains the support of `ρ(0)` and is mapped into itself by `L`. The
//! restriction is exact: every other amplitude stays zero for all time. For
//! charge-conserving kinds started in one sector this shrinks the problem
//! from `dim²` to the sector block.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dense;
use crate::error::{Error, Result};
use crate::fock::SparseOperator;
use crate::janus::JanusRealization;
use crate::math;
use crate::reference::{fidelity, ReferenceState};
use crate::steady::eigen_residuals;
use crate::tfd::{apply_lift, apply_tilde, build_liouvillian, Liouvillian, VectorizedState};

/// Largest (reduced) dimension the dense oracle accepts.
pub const DENSE_ORACLE_MAX_DIM: usize = 4096;

/// Tolerance for the physicality checks on `ρ(0)`.
pub const INITIAL_STATE_TOLERANCE: f64 = 1e-10;

/// Population of the top two Fock levels above which a run is flagged.
pub const LEAK_WARNING: f64 = 1e-6;

/// Largest support on which the minimum eigenvalue is computed.
pub const MIN_EIG_MAX_SUPPORT: usize = 1024;

const SHORT_TERM_TOL: f64 = 1e-12;
const DEFAULT_MAX_STEPS: usize = 10_000_000;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone)]
pub struct EvolveOptions {
    /// Per-step error tolerance (absolute plus relative, max norm).
    pub tol: f64,
    pub max_step: Option<f64>,
    pub max_steps: usize,
    /// Reference for the `fidelity_ref` observable.
    pub reference: Option<ReferenceState>,
    /// Keep the sampled states in the trajectory.
    pub keep_states: bool,
    /// Integrate on the reachable subspace of `ρ(0)`.
    pub reduce: bool,
}

impl EvolveOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            max_step: None,
            max_steps: DEFAULT_MAX_STEPS,
            reference: None,
            keep_states: true,
            reduce: true,
        }
    }

    pub fn with_reference(mut self, reference: ReferenceState) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn with_max_step(mut self, max_step: f64) -> Self {
        self.max_step = Some(max_step);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub t: f64,
    pub trace: Complex64,
    /// `‖ρ - ρ†‖_F`.
    pub herm_dev: f64,
    /// Smallest eigenvalue of the Hermitian part of `ρ`; `None` when the
    /// support exceeds [`MIN_EIG_MAX_SUPPORT`].
    pub min_eig: Option<f64>,
    pub mean_n: Vec<f64>,
    /// Population with any mode in its top two levels.
    pub leak: f64,
    pub fidelity_ref: Option<f64>,
    /// Steady-state eigen-relation residuals, only for `κ > 0`.
    pub resid_f: Option<f64>,
    pub resid_ftilde: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Empty unless [`EvolveOptions::keep_states`].
    pub states: Vec<VectorizedState>,
    pub observables: Vec<Observables>,
    /// Dimension of the subspace that was integrated.
    pub reduced_dim: usize,
    pub steps: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn max_trace_deviation(&self) -> f64 {
        self.observables
            .iter()
            .map(|o| (o.trace - Complex64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_herm_dev(&self) -> f64 {
        self.observables
            .iter()
            .map(|o| o.herm_dev)
            .fold(0.0, f64::max)
    }

    /// Smallest sampled minimum eigenvalue, ignoring samples where it was not
    /// computed.
    pub fn min_eigenvalue(&self) -> Option<f64> {
        self.observables
            .iter()
            .filter_map(|o| o.min_eig)
            .reduce(f64::min)
    }

    pub fn max_leak(&self) -> f64 {
        self.observables.iter().map(|o| o.leak).fold(0.0, f64::max)
    }

    pub fn leak_warning(&self) -> bool {
        self.max_leak() > LEAK_WARNING
    }

    pub fn final_state(&self) -> Option<&VectorizedState> {
        self.states.last()
    }
}

pub fn evolve(
    l: &Liouvillian,
    rho0: &VectorizedState,
    t_grid: &[f64],
    tol: f64,
) -> Result<Trajectory> {
    evolve_with(l, rho0, t_grid, &EvolveOptions::new(tol))
}

pub fn evolve_with(
    l: &Liouvillian,
    rho0: &VectorizedState,
    t_grid: &[f64],
    options: &EvolveOptions,
) -> Result<Trajectory> {
    let space = l.space();
    if rho0.space() != space {
        return Err(Error::DimensionMismatch {
            expected: space.doubled_dim(),
            found: rho0.dim(),
        });
    }
    if let Some(r) = &options.reference {
        if r.space != *space {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: r.vector.dim(),
            });
        }
    }
    if !(options.tol.is_finite() && options.tol > 0.0) {
        return Err(Error::NonFinite { name: "tol" });
    }
    check_time_grid(t_grid)?;
    check_physical(rho0)?;

    let reduced = Reduced::new(&l.op, rho0, options.reduce);
    let mut stepper = DormandPrince::new(&reduced.op, reduced.restrict(rho0), options);

    let mut trajectory = Trajectory {
        times: Vec::with_capacity(t_grid.len()),
        states: Vec::new(),
        observables: Vec::with_capacity(t_grid.len()),
        reduced_dim: reduced.indices.len(),
        steps: 0,
        rejected: 0,
    };
    for &t in t_grid {
        stepper.advance_to(t)?;
        let state = reduced.embed(rho0, &stepper.y);
        trajectory
            .observables
            .push(observe(l, &state, t, options.reference.as_ref())?);
        trajectory.times.push(t);
        if options.keep_states {
            trajectory.states.push(state);
        }
    }
    trajectory.steps = stepper.steps;
    trajectory.rejected = stepper.rejected;
    Ok(trajectory)
}

fn check_time_grid(t_grid: &[f64]) -> Result<()> {
    let starts_at_zero = t_grid.first() == Some(&0.0);
    let increasing = t_grid.windows(2).all(|w| w[0] < w[1]);
    if !starts_at_zero || !increasing || t_grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidTimeGrid);
    }
    Ok(())
}

fn check_physical(rho: &VectorizedState) -> Result<()> {
    if rho
        .amplitudes()
        .iter()
        .any(|x| !(x.re.is_finite() && x.im.is_finite()))
    {
        return Err(Error::NonPhysicalState {
            reason: "non-finite amplitude",
        });
    }
    if (rho.trace() - Complex64::new(1.0, 0.0)).norm() > INITIAL_STATE_TOLERANCE {
        return Err(Error::NonPhysicalState {
            reason: "trace differs from 1",
        });
    }
    if rho.hermiticity_deviation() > INITIAL_STATE_TOLERANCE {
        return Err(Error::NonPhysicalState {
            reason: "not Hermitian",
        });
    }
    if let Some(m) = min_eigenvalue(rho) {
        if m < -INITIAL_STATE_TOLERANCE {
            return Err(Error::NonPhysicalState {
                reason: "not positive semidefinite",
            });
        }
    }
    Ok(())
}

/// Smallest eigenvalue of `ρ` (Hermitian part), computed on its support.
/// Zero eigenvalues outside the support are included.
pub fn min_eigenvalue(rho: &VectorizedState) -> Option<f64> {
    let support = rho.support();
    if support.len() > MIN_EIG_MAX_SUPPORT {
        return None;
    }
    if support.is_empty() {
        return Some(0.0);
    }
    let block = DMatrix::from_fn(support.len(), support.len(), |i, j| {
        rho.entry(support[i], support[j])
    });
    let m = dense::hermitian_min_eigenvalue(&block);
    Some(if support.len() < rho.space().dim() {
        m.min(0.0)
    } else {
        m
    })
}

/// Population of basis states with some mode in its top two levels.
pub fn truncation_leak(rho: &VectorizedState) -> f64 {
    let space = rho.space();
    let pops = rho.populations();
    (0..space.dim())
        .filter(|&i| (0..space.mode_count()).any(|m| space.occupation(i, m) + 2 >= space.cutoff(m)))
        .map(|i| pops[i])
        .sum()
}

fn observe(
    l: &Liouvillian,
    state: &VectorizedState,
    t: f64,
    reference: Option<&ReferenceState>,
) -> Result<Observables> {
    let space = l.space();
    let (resid_f, resid_ftilde) = if l.kappa > 0.0 {
        let r = eigen_residuals(state, &l.realization, l.g, l.kappa)?;
        (Some(r.resid_f), Some(r.resid_ftilde))
    } else {
        (None, None)
    };
    let fidelity_ref = match reference {
        Some(r) => Some(fidelity(state, r)?),
        None => None,
    };
    Ok(Observables {
        t,
        trace: state.trace(),
        herm_dev: state.hermiticity_deviation(),
        min_eig: min_eigenvalue(state),
        mean_n: (0..space.mode_count())
            .map(|m| state.mean_occupation(m))
            .collect(),
        leak: truncation_leak(state),
        fidelity_ref,
        resid_f,
        resid_ftilde,
    })
}

struct Reduced {
    op: SparseOperator,
    indices: Vec<usize>,
}

impl Reduced {
    fn new(op: &SparseOperator, rho0: &VectorizedState, reduce: bool) -> Self {
        if !reduce {
            return Self {
                op: op.clone(),
                indices: (0..op.rows()).collect(),
            };
        }
        let seeds: Vec<usize> = rho0
            .amplitudes()
            .iter()
            .enumerate()
            .filter_map(|(k, &v)| (v != ZERO).then_some(k))
            .collect();
        let indices = op.reachable_from(&seeds);
        Self {
            op: op.submatrix(&indices),
            indices,
        }
    }

    fn restrict(&self, rho: &VectorizedState) -> Vec<Complex64> {
        self.indices.iter().map(|&k| rho.amplitudes()[k]).collect()
    }

    fn embed(&self, like: &VectorizedState, local: &[Complex64]) -> VectorizedState {
        let mut full = VectorizedState::zeros(like.space());
        let amps = full.amplitudes_mut();
        for (&k, &v) in self.indices.iter().zip(local) {
            amps[k] = v;
        }
        full
    }
}

// The generator is time independent, so the nodes c_i are not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct DormandPrince<'a> {
    op: &'a SparseOperator,
    t: f64,
    y: Vec<Complex64>,
    h: f64,
    tol: f64,
    max_step: f64,
    max_steps: usize,
    k: [Vec<Complex64>; 7],
    stage: Vec<Complex64>,
    fresh_k0: bool,
    steps: usize,
    rejected: usize,
}

impl<'a> DormandPrince<'a> {
    fn new(op: &'a SparseOperator, y: Vec<Complex64>, options: &EvolveOptions) -> Self {
        let n = y.len();
        let scale = op.norm_inf();
        let h = if scale > 0.0 {
            0.5 * math::powf(options.tol, 0.2) / scale
        } else {
            f64::INFINITY
        };
        let max_step = options.max_step.unwrap_or(f64::INFINITY);
        Self {
            op,
            t: 0.0,
            y,
            h: h.min(max_step),
            tol: options.tol,
            max_step,
            max_steps: options.max_steps,
            k: core::array::from_fn(|_| vec![ZERO; n]),
            stage: vec![ZERO; n],
            fresh_k0: false,
            steps: 0,
            rejected: 0,
        }
    }

    fn advance_to(&mut self, t_end: f64) -> Result<()> {
        if self.op.nnz() == 0 {
            self.t = t_end;
            return Ok(());
        }
        while self.t < t_end {
            if self.steps + self.rejected >= self.max_steps {
                return Err(Error::StepUnderflow { t: self.t });
            }
            let remaining = t_end - self.t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            if h <= 4.0 * f64::EPSILON * self.t.abs().max(1.0) && !last {
                return Err(Error::StepUnderflow { t: self.t });
            }
            let err = self.try_step(h);
            if err <= 1.0 {
                self.t = if last { t_end } else { self.t + h };
                self.steps += 1;
                // FSAL: the last stage is the derivative at the new point.
                self.k.swap(0, 6);
                self.fresh_k0 = true;
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * math::powf(err, -0.2)).min(5.0)
                };
                if !last || grow < 1.0 {
                    self.h = (h * grow.max(0.2)).min(self.max_step);
                }
            } else {
                self.rejected += 1;
                let shrink = (0.9 * math::powf(err, -0.2)).max(0.1);
                self.h = h * shrink;
                if self.h <= 4.0 * f64::EPSILON * self.t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t: self.t });
                }
            }
        }
        Ok(())
    }

    /// Computes stages for a step of size `h`; on acceptance the new state is
    /// written to `y`. Returns the scaled error norm.
    fn try_step(&mut self, h: f64) -> f64 {
        let n = self.y.len();
        if !self.fresh_k0 {
            self.op.matvec_into(&self.y, &mut self.k[0]);
            self.fresh_k0 = true;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = ZERO;
                for (j, &a) in A[s][..s].iter().enumerate() {
                    if a != 0.0 {
                        acc += self.k[j][i] * a;
                    }
                }
                self.stage[i] = self.y[i] + acc * h;
            }
            self.op.matvec_into(&self.stage, &mut self.k[s]);
        }
        // stage holds y + h Σ b_j k_j, the fifth-order solution
        let mut err = 0.0f64;
        for i in 0..n {
            let mut e = ZERO;
            for (j, &w) in E.iter().enumerate() {
                if w != 0.0 {
                    e += self.k[j][i] * w;
                }
            }
            let sc = self.tol * (1.0 + self.y[i].norm().max(self.stage[i].norm()));
            err = err.max((e * h).norm() / sc);
        }
        if err.is_nan() {
            err = f64::INFINITY;
        }
        if err <= 1.0 {
            core::mem::swap(&mut self.y, &mut self.stage);
        }
        err
    }
}

/// `exp(tL)|ρ0⟩` by a dense matrix exponential on the reachable subspace.
pub fn expm_oracle(l: &Liouvillian, t: f64, rho0: &VectorizedState) -> Result<VectorizedState> {
    if rho0.space() != l.space() {
        return Err(Error::DimensionMismatch {
            expected: l.space().doubled_dim(),
            found: rho0.dim(),
        });
    }
    if !t.is_finite() {
        return Err(Error::NonFinite { name: "t" });
    }
    let reduced = Reduced::new(&l.op, rho0, true);
    let local = expm_apply(&reduced.op, t, &reduced.restrict(rho0))?;
    Ok(reduced.embed(rho0, &local))
}

/// `exp(t·op)·v` with a dense Padé exponential.
pub fn expm_apply(op: &SparseOperator, t: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = op.rows();
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    if n > DENSE_ORACLE_MAX_DIM {
        return Err(Error::DenseTooLarge {
            dim: n,
            limit: DENSE_ORACLE_MAX_DIM,
        });
    }
    if t == 0.0 || n == 0 {
        return Ok(v.to_vec());
    }
    let m = op.to_dense() * Complex64::new(t, 0.0);
    Ok(dense::mat_vec(&dense::expm(&m), v))
}

/// `|ρ(t)⟩` under the pure drive `-ig[F + F†, ·]` (κ = 0).
pub fn short_term_state(
    real: &JanusRealization,
    g: f64,
    t: f64,
    rho0: &VectorizedState,
) -> Result<VectorizedState> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidTimeGrid);
    }
    let l = build_liouvillian(real, g, 0.0)?;
    let grid: Vec<f64> = if t == 0.0 { vec![0.0] } else { vec![0.0, t] };
    let mut options = EvolveOptions::new(SHORT_TERM_TOL);
    options.keep_states = true;
    let trajectory = evolve_with(&l, rho0, &grid, &options)?;
    Ok(trajectory
        .states
        .into_iter()
        .last()
        .expect("grid is nonempty"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenEstimate {
    /// Rayleigh quotient `⟨v|X|v⟩/⟨v|v⟩`.
    pub lambda: Complex64,
    /// `‖Xv - λv‖/‖v‖`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GEigenReport {
    /// `X = lift(G)`, acting as `ρ ↦ Gρ`.
    pub lift: EigenEstimate,
    /// `X = tilde(G)`, acting as `ρ ↦ ρG†`.
    pub tilde: EigenEstimate,
}

/// Rayleigh-quotient eigen-estimates of `G_which = (G_which†)†` on both copies.
pub fn verify_g_eigenstate(
    state: &VectorizedState,
    real: &JanusRealization,
    which: usize,
) -> Result<GEigenReport> {
    let norm = state.norm();
    if norm == 0.0 {
        return Err(Error::ZeroState);
    }
    let g = real.g(which)?;
    let lifted = apply_lift(&g, state)?;
    let tilded = apply_tilde(&g, state)?;
    Ok(GEigenReport {
        lift: estimate(state, &lifted, norm),
        tilde: estimate(state, &tilded, norm),
    })
}

fn estimate(v: &VectorizedState, image: &VectorizedState, norm: f64) -> EigenEstimate {
    let lambda = v.inner(image) / (norm * norm);
    let r: f64 = image
        .amplitudes()
        .iter()
        .zip(v.amplitudes())
        .map(|(x, y)| (x - lambda * y).norm_sqr())
        .sum();
    EigenEstimate {
        lambda,
        residual: math::sqrt(r) / norm,
    }
}

/// `‖[F, F†]‖_F`, zero for the kinds whose drive commutes with its adjoint.
pub fn drive_self_commutator(real: &JanusRealization) -> Result<f64> {
    Ok(real.f.commutator(&real.f.adjoint())?.frobenius())
}
