//! Steady states: null vectors of the Liouvillian, optionally restricted to a
//! charge sector, and the eigen-relations they satisfy.
//!
//! For `L = -ig[F + F†, ·] + κD[F]` one has `L = κD[F + 2ig/κ]`, so a pure
//! steady state `|ψ⟩⟨ψ|` obeys `F|ψ⟩ = -(2ig/κ)|ψ⟩`. In the doubled space this
//! reads `lift(F)|ρ⟩ = -(2ig/κ)|ρ⟩` and `tilde(F)|ρ⟩ = +(2ig/κ)|ρ⟩`.
//!
//! When `F` conserves a charge the full null space is degenerate, one steady
//! state per sector, and a sector must be chosen explicitly.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::banded::BandLu;
use crate::dense;
use crate::error::{Error, Result};
use crate::fock;
use crate::janus::JanusRealization;
pub use crate::janus::{Parity, Sector};
use crate::tfd::{self, apply_lift, apply_tilde, Liouvillian, VectorizedState};

/// Largest (restricted) dimension handled by the dense SVD path.
pub const DENSE_NULL_MAX_DIM: usize = 4096;

/// Storage cap for the banded factorization used by shift-invert.
pub const BAND_MAX_ENTRIES: usize = 1 << 27;

const MAX_INVERSE_ITERATIONS: usize = 50;
const MIN_INVERSE_ITERATIONS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullSpaceMethod {
    /// Full singular value decomposition of the (restricted) generator.
    DenseNull,
    /// Banded LU of `L - σI` with a tiny shift, then inverse iteration.
    ShiftInvert,
    /// Dense up to [`DENSE_NULL_MAX_DIM`], shift-invert above.
    Auto,
}

#[derive(Debug, Clone)]
pub struct SteadyStateResult {
    /// Unit-trace steady state.
    pub state: VectorizedState,
    pub sector: Option<Sector>,
    pub method: NullSpaceMethod,
    /// Dimension of the block that was solved.
    pub solved_dim: usize,
    /// `‖L·v‖/‖v‖` recomputed with the full generator.
    pub null_residual: f64,
    pub resid_f: f64,
    pub resid_ftilde: f64,
    /// `-2ig/κ`.
    pub lambda_target: Complex64,
    /// Number of singular values below the null threshold (dense path only).
    pub null_dim: Option<usize>,
    /// Second-smallest singular value (dense path only).
    pub second_singular_value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenResiduals {
    /// `‖lift(F)v + (2ig/κ)v‖/‖v‖`.
    pub resid_f: f64,
    /// `‖tilde(F)v - (2ig/κ)v‖/‖v‖`.
    pub resid_ftilde: f64,
    /// `⟨v|lift(F)|v⟩/⟨v|v⟩`.
    pub lambda_f_rayleigh: Complex64,
    pub lambda_target: Complex64,
}

/// Single-copy basis indices carrying charge `sector`.
pub fn single_copy_sector(real: &JanusRealization, sector: Sector) -> Result<Vec<usize>> {
    let charge = real.charge.as_ref().ok_or(Error::NoConservedCharge {
        kind: real.kind.name(),
    })?;
    if !charge.accepts(sector) {
        return Err(Error::InvalidSector {
            kind: real.kind.name(),
        });
    }
    let space = &real.space;
    let indices: Vec<usize> = (0..space.dim())
        .filter(|&i| charge.sector_of(space, i) == sector)
        .collect();
    if indices.is_empty() {
        return Err(Error::EmptySector);
    }
    Ok(indices)
}

/// Doubled-space indices `n·dim + m` with both `|n⟩` and `|m⟩` in `sector`,
/// in ascending order.
pub fn sector_basis(real: &JanusRealization, sector: Sector) -> Result<Vec<usize>> {
    let single = single_copy_sector(real, sector)?;
    let d = real.space.dim();
    Ok(single
        .iter()
        .flat_map(|&n| single.iter().map(move |&m| n * d + m))
        .collect())
}

pub fn steady_state(
    l: &Liouvillian,
    sector: Option<Sector>,
    method: NullSpaceMethod,
    tol: f64,
) -> Result<SteadyStateResult> {
    if l.kappa <= 0.0 {
        return Err(Error::ZeroKappa);
    }
    let real = &l.realization;
    let space = real.space.clone();
    let indices: Vec<usize> = match sector {
        Some(s) => sector_basis(real, s)?,
        None => (0..space.doubled_dim()).collect(),
    };
    let block = if sector.is_some() {
        l.op.submatrix(&indices)
    } else {
        l.op.clone()
    };
    let n = indices.len();
    let method = match method {
        NullSpaceMethod::Auto if n <= DENSE_NULL_MAX_DIM => NullSpaceMethod::DenseNull,
        NullSpaceMethod::Auto => NullSpaceMethod::ShiftInvert,
        m => m,
    };

    let (local, null_dim, second) = match method {
        NullSpaceMethod::DenseNull => {
            if n > DENSE_NULL_MAX_DIM {
                return Err(Error::DenseTooLarge {
                    dim: n,
                    limit: DENSE_NULL_MAX_DIM,
                });
            }
            let nv = dense::null_vector(block.to_dense());
            let sv = &nv.singular_values;
            let largest = sv.last().copied().unwrap_or(0.0).max(1.0);
            let threshold = tol * largest;
            let null_dim = sv.iter().filter(|&&s| s <= threshold).count();
            if null_dim == 0 {
                return Err(Error::NoNullVector { smallest: sv[0] });
            }
            if null_dim > 1 {
                return Err(Error::DegenerateNullSpace { dim: null_dim });
            }
            (nv.vector, Some(null_dim), sv.get(1).copied())
        }
        NullSpaceMethod::ShiftInvert => {
            if sector.is_none() && real.charge.is_some() {
                return Err(Error::SectorRequired);
            }
            let d = space.dim();
            // ⟨I| is the left null vector, so |I⟩ has a nonzero component
            // along the steady state.
            let start: Vec<Complex64> = indices
                .iter()
                .map(|&k| {
                    if k / d == k % d {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                })
                .collect();
            (inverse_iteration(&block, start, tol)?, None, None)
        }
        NullSpaceMethod::Auto => unreachable!("resolved above"),
    };

    let mut full = VectorizedState::zeros(&space);
    for (&k, &v) in indices.iter().zip(&local) {
        full.amplitudes_mut()[k] = v;
    }
    let trace = full.trace();
    if trace.norm() <= f64::EPSILON * full.norm() {
        return Err(Error::ZeroTrace);
    }
    let state = full.scaled(trace.inv());

    let lv = l.op.matvec(state.amplitudes())?;
    let null_residual = fock::norm(&lv) / state.norm();
    let resid = eigen_residuals(&state, real, l.g, l.kappa)?;

    Ok(SteadyStateResult {
        state,
        sector,
        method,
        solved_dim: n,
        null_residual,
        resid_f: resid.resid_f,
        resid_ftilde: resid.resid_ftilde,
        lambda_target: resid.lambda_target,
        null_dim,
        second_singular_value: second,
    })
}

fn inverse_iteration(
    block: &fock::SparseOperator,
    start: Vec<Complex64>,
    tol: f64,
) -> Result<Vec<Complex64>> {
    let scale = block.norm_inf().max(1.0);
    let lu = BandLu::factor(block, Complex64::new(1e-10 * scale, 0.0), BAND_MAX_ENTRIES)?;
    let mut x = start;
    let mut residual = f64::INFINITY;
    for iteration in 0..MAX_INVERSE_ITERATIONS {
        let y = lu.solve(&x);
        let norm = fock::norm(&y);
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        x = y.into_iter().map(|v| v / norm).collect();
        residual = fock::norm(&block.matvec(&x)?);
        if residual <= tol && iteration + 1 >= MIN_INVERSE_ITERATIONS {
            return Ok(x);
        }
    }
    Err(Error::NotConverged {
        iterations: MAX_INVERSE_ITERATIONS,
        residual,
    })
}

pub fn eigen_residuals(
    state: &VectorizedState,
    real: &JanusRealization,
    g: f64,
    kappa: f64,
) -> Result<EigenResiduals> {
    let lambda = tfd::lambda_target(g, kappa).ok_or(Error::ZeroKappa)?;
    let norm = state.norm();
    if norm == 0.0 {
        return Err(Error::ZeroState);
    }
    let lf = apply_lift(&real.f, state)?;
    let tf = apply_tilde(&real.f, state)?;
    let resid_f = deviation(lf.amplitudes(), state.amplitudes(), lambda) / norm;
    let resid_ftilde = deviation(tf.amplitudes(), state.amplitudes(), lambda.conj()) / norm;
    let lambda_f_rayleigh = state.inner(&lf) / (norm * norm);
    Ok(EigenResiduals {
        resid_f,
        resid_ftilde,
        lambda_f_rayleigh,
        lambda_target: lambda,
    })
}

fn deviation(image: &[Complex64], v: &[Complex64], lambda: Complex64) -> f64 {
    libm::sqrt(
        image
            .iter()
            .zip(v)
            .map(|(a, b)| (a - lambda * b).norm_sqr())
            .sum(),
    )
}

/// Largest off-sector matrix element of `L` between sectors of the given
/// labels; zero when `L` is block diagonal in the charge.
pub fn off_sector_max(l: &Liouvillian) -> Result<f64> {
    let real = &l.realization;
    let charge = real.charge.as_ref().ok_or(Error::NoConservedCharge {
        kind: real.kind.name(),
    })?;
    let space = &real.space;
    let d = space.dim();
    let labels: Vec<Sector> = (0..d).map(|i| charge.sector_of(space, i)).collect();
    let mut worst = 0.0f64;
    for (i, j, v) in l.op.triplets() {
        let (ri, rj) = (
            (labels[i / d], labels[i % d]),
            (labels[j / d], labels[j % d]),
        );
        if ri != rj {
            worst = worst.max(v.norm());
        }
    }
    Ok(worst)
}
