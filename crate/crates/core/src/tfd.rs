//! Thermo-field vectorization and Liouvillian assembly.
//!
//! A density matrix `ρ` on `H` is carried as `|ρ⟩ = (ρ ⊗ I)|I⟩ = Σ ρ_nm |n, m⟩`
//! in `H ⊗ H*`, with the non-tilde index major so that the amplitudes are a
//! row-major copy of `ρ`. Operators act on the first factor through
//! [`lift`] (`A ⊗ I`) and on the second through [`tilde`] (`I ⊗ conj(A)`),
//! which gives
//!
//! ```text
//! lift(A)|ρ⟩ = |Aρ⟩      tilde(A)|ρ⟩ = |ρA†⟩      tilde(A)†|ρ⟩ = |ρA⟩
//! ```
//!
//! and in particular `lift(a)|I⟩ = tilde(a)†|I⟩`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{self, FockSpace, SparseOperator, StateVector};
use crate::janus::JanusRealization;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest doubled dimension for which [`build_liouvillian`] re-derives the
/// generator by direct Kronecker vectorization and compares.
pub const KRONECKER_CHECK_MAX_DIM: usize = 1 << 20;

/// Tolerance of the tilde-rule vs Kronecker comparison.
pub const ASSEMBLY_TOLERANCE: f64 = 1e-13;

/// `|ρ⟩` in `H ⊗ H*`, amplitude of `|n, m⟩` at `n * dim + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedState {
    space: FockSpace,
    amplitudes: Vec<Complex64>,
}

impl VectorizedState {
    pub fn from_amplitudes(space: FockSpace, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.doubled_dim() {
            return Err(Error::DimensionMismatch {
                expected: space.doubled_dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { space, amplitudes })
    }

    pub fn zeros(space: &FockSpace) -> Self {
        Self {
            amplitudes: vec![ZERO; space.doubled_dim()],
            space: space.clone(),
        }
    }

    /// `|ρ⟩` for `ρ = |ψ⟩⟨ψ|`.
    pub fn from_pure(space: &FockSpace, psi: &StateVector) -> Result<Self> {
        let d = space.dim();
        if psi.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: psi.dim(),
            });
        }
        let p = psi.amplitudes();
        let mut amplitudes = vec![ZERO; d * d];
        for n in 0..d {
            if p[n] == ZERO {
                continue;
            }
            for m in 0..d {
                amplitudes[n * d + m] = p[n] * p[m].conj();
            }
        }
        Ok(Self {
            space: space.clone(),
            amplitudes,
        })
    }

    /// Projector onto a single-copy basis state.
    pub fn basis_projector(space: &FockSpace, index: usize) -> Self {
        let mut v = Self::zeros(space);
        v.amplitudes[index * space.dim() + index] = ONE;
        v
    }

    pub fn from_dense(space: &FockSpace, rho: &DMatrix<Complex64>) -> Result<Self> {
        let d = space.dim();
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: rho.nrows(),
            });
        }
        let amplitudes = (0..d * d).map(|k| rho[(k / d, k % d)]).collect();
        Ok(Self {
            space: space.clone(),
            amplitudes,
        })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    /// `ρ_nm`.
    #[inline]
    pub fn entry(&self, n: usize, m: usize) -> Complex64 {
        self.amplitudes[n * self.space.dim() + m]
    }

    /// `⟨I|ρ⟩ = Tr ρ`.
    pub fn trace(&self) -> Complex64 {
        let d = self.space.dim();
        (0..d).map(|n| self.amplitudes[n * d + n]).sum()
    }

    /// `‖ρ - ρ†‖_F`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.space.dim();
        let mut s = 0.0;
        for n in 0..d {
            for m in n + 1..d {
                s += 2.0 * (self.entry(n, m) - self.entry(m, n).conj()).norm_sqr();
            }
            let im = 2.0 * self.entry(n, n).im;
            s += im * im;
        }
        libm::sqrt(s)
    }

    pub fn norm(&self) -> f64 {
        fock::norm(&self.amplitudes)
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        fock::inner(&self.amplitudes, &other.amplitudes)
    }

    /// Frobenius distance `‖ρ - σ‖_F`.
    pub fn distance(&self, other: &Self) -> f64 {
        fock::distance(&self.amplitudes, &other.amplitudes)
    }

    pub fn scaled(mut self, s: Complex64) -> Self {
        self.amplitudes.iter_mut().for_each(|x| *x *= s);
        self
    }

    /// `ρ` as a sparse single-copy operator.
    pub fn devectorize(&self) -> SparseOperator {
        let d = self.space.dim();
        let triplets = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, &v)| (k / d, k % d, v));
        SparseOperator::from_triplets(d, d, triplets).expect("indices within bounds")
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let d = self.space.dim();
        DMatrix::from_fn(d, d, |n, m| self.entry(n, m))
    }

    /// Single-copy basis indices carrying any weight (`ρ` vanishes outside the
    /// square block on these rows and columns).
    pub fn support(&self) -> Vec<usize> {
        let d = self.space.dim();
        let mut used = vec![false; d];
        for n in 0..d {
            for m in 0..d {
                if self.amplitudes[n * d + m] != ZERO {
                    used[n] = true;
                    used[m] = true;
                }
            }
        }
        used.iter()
            .enumerate()
            .filter_map(|(i, &u)| u.then_some(i))
            .collect()
    }

    /// Diagonal of `ρ`.
    pub fn populations(&self) -> Vec<f64> {
        let d = self.space.dim();
        (0..d).map(|n| self.amplitudes[n * d + n].re).collect()
    }

    /// `⟨n_mode⟩ = Σ_n n_mode(n) ρ_nn`.
    pub fn mean_occupation(&self, mode: usize) -> f64 {
        let d = self.space.dim();
        (0..d)
            .map(|n| self.space.occupation(n, mode) as f64 * self.amplitudes[n * d + n].re)
            .sum()
    }
}

/// `|I⟩ = Σ_n |n, n⟩` (not normalized).
pub fn identity_vector(space: &FockSpace) -> VectorizedState {
    let d = space.dim();
    let mut v = VectorizedState::zeros(space);
    for n in 0..d {
        v.amplitudes[n * d + n] = ONE;
    }
    v
}

/// `|ρ⟩ = (ρ ⊗ I)|I⟩`.
pub fn vectorize(space: &FockSpace, rho: &SparseOperator) -> Result<VectorizedState> {
    let d = space.dim();
    if rho.rows() != d || rho.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if rho.rows() != d {
                rho.rows()
            } else {
                rho.cols()
            },
        });
    }
    let mut v = VectorizedState::zeros(space);
    for (n, m, x) in rho.triplets() {
        v.amplitudes[n * d + m] = x;
    }
    Ok(v)
}

pub fn devectorize(v: &VectorizedState) -> SparseOperator {
    v.devectorize()
}

fn check_single_copy(space: &FockSpace, a: &SparseOperator) -> Result<()> {
    if a.rows() != space.dim() || a.cols() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: a.rows(),
        });
    }
    Ok(())
}

/// `A ⊗ I` on the doubled space.
pub fn lift(space: &FockSpace, a: &SparseOperator) -> Result<SparseOperator> {
    check_single_copy(space, a)?;
    Ok(a.kron(&space.identity()))
}

/// `I ⊗ conj(A)` on the doubled space (entrywise conjugation in the Fock
/// basis).
pub fn tilde(space: &FockSpace, a: &SparseOperator) -> Result<SparseOperator> {
    check_single_copy(space, a)?;
    Ok(space.identity().kron(&a.conj()))
}

/// `lift(A)|v⟩ = |Aρ⟩` without forming the doubled operator.
pub fn apply_lift(a: &SparseOperator, v: &VectorizedState) -> Result<VectorizedState> {
    let space = v.space();
    check_single_copy(space, a)?;
    let d = space.dim();
    let mut out = VectorizedState::zeros(space);
    for (i, k, x) in a.triplets() {
        let src = &v.amplitudes[k * d..(k + 1) * d];
        let dst = &mut out.amplitudes[i * d..(i + 1) * d];
        for (o, s) in dst.iter_mut().zip(src) {
            *o += x * s;
        }
    }
    Ok(out)
}

/// `tilde(A)|v⟩ = |ρA†⟩` without forming the doubled operator.
pub fn apply_tilde(a: &SparseOperator, v: &VectorizedState) -> Result<VectorizedState> {
    let space = v.space();
    check_single_copy(space, a)?;
    let d = space.dim();
    let mut out = VectorizedState::zeros(space);
    for (j, k, x) in a.triplets() {
        let xc = x.conj();
        for n in 0..d {
            out.amplitudes[n * d + j] += xc * v.amplitudes[n * d + k];
        }
    }
    Ok(out)
}

/// Placement of the tilde factors in the `ρF†F` dissipator term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissipatorOrdering {
    /// `tilde(F)† tilde(F)`, the vectorization of `ρF†F`; trace preserving.
    Standard,
    /// `tilde(F) tilde(F)†`, i.e. `ρFF†`. Kept only as a diagnostic: it does
    /// not preserve the trace whenever `F` is not normal.
    Literal,
}

/// Generator `L` of `d|ρ⟩/dt = L|ρ⟩` on the doubled space.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub op: SparseOperator,
    pub g: f64,
    pub kappa: f64,
    pub ordering: DissipatorOrdering,
    pub realization: JanusRealization,
    /// Max entrywise difference against direct Kronecker vectorization, when
    /// the cross-check was run.
    pub kronecker_diff: Option<f64>,
}

impl Liouvillian {
    pub fn space(&self) -> &FockSpace {
        &self.realization.space
    }

    /// `-2ig/κ`: target eigenvalue of `lift(F)` on the steady state.
    /// `tilde(F)` carries the conjugate `+2ig/κ`.
    pub fn lambda_target(&self) -> Option<Complex64> {
        lambda_target(self.g, self.kappa)
    }
}

pub fn lambda_target(g: f64, kappa: f64) -> Option<Complex64> {
    (kappa > 0.0).then(|| Complex64::new(0.0, -2.0 * g / kappa))
}

pub fn build_liouvillian(real: &JanusRealization, g: f64, kappa: f64) -> Result<Liouvillian> {
    let check = real.space.doubled_dim() <= KRONECKER_CHECK_MAX_DIM;
    build_liouvillian_with(real, g, kappa, DissipatorOrdering::Standard, check)
}

/// Tilde-rule assembly of
/// `-ig(F - F̃† + F† - F̃) + κ/2 (2FF̃ - F̃†F̃ - F†F)` (with `F̃F̃†` in the
/// last-but-one slot for [`DissipatorOrdering::Literal`]).
///
/// With `cross_check`, the same generator is rebuilt from the master equation
/// by direct Kronecker vectorization `vec(AρB) = (A ⊗ Bᵀ)vec(ρ)`; for the
/// standard ordering a disagreement above [`ASSEMBLY_TOLERANCE`] is an error.
pub fn build_liouvillian_with(
    real: &JanusRealization,
    g: f64,
    kappa: f64,
    ordering: DissipatorOrdering,
    cross_check: bool,
) -> Result<Liouvillian> {
    if !g.is_finite() {
        return Err(Error::NonFinite { name: "g" });
    }
    if !kappa.is_finite() {
        return Err(Error::NonFinite { name: "kappa" });
    }
    if kappa < 0.0 {
        return Err(Error::NegativeKappa(kappa));
    }
    let space = &real.space;
    let f = &real.f;
    let lf = lift(space, f)?;
    let tf = tilde(space, f)?;
    let lf_dag = lf.adjoint();
    let tf_dag = tf.adjoint();

    let drive = lf
        .sub(&tf_dag)?
        .add(&lf_dag)?
        .sub(&tf)?
        .scaled(Complex64::new(0.0, -g));
    let mut op = drive;
    if kappa > 0.0 {
        let right = match ordering {
            DissipatorOrdering::Standard => tf_dag.product(&tf)?,
            DissipatorOrdering::Literal => tf.product(&tf_dag)?,
        };
        let dissipator = lf
            .product(&tf)?
            .scaled_re(2.0)
            .sub(&right)?
            .sub(&lf_dag.product(&lf)?)?
            .scaled_re(kappa / 2.0);
        op = op.add(&dissipator)?;
    }

    let kronecker_diff = if cross_check {
        let direct = kronecker_liouvillian(real, g, kappa)?;
        let diff = op.max_abs_diff(&direct)?;
        if ordering == DissipatorOrdering::Standard && diff > ASSEMBLY_TOLERANCE {
            return Err(Error::AssemblyMismatch { diff });
        }
        Some(diff)
    } else {
        None
    };

    Ok(Liouvillian {
        op,
        g,
        kappa,
        ordering,
        realization: real.clone(),
        kronecker_diff,
    })
}

/// The master equation vectorized term by term with `vec(AρB) = (A ⊗ Bᵀ)vec(ρ)`.
pub fn kronecker_liouvillian(
    real: &JanusRealization,
    g: f64,
    kappa: f64,
) -> Result<SparseOperator> {
    let id = real.space.identity();
    let f = &real.f;
    let f_dag = f.adjoint();
    let ftf = f_dag.product(f)?;

    // Fρ - ρF + F†ρ - ρF†
    let commutators = f
        .kron(&id)
        .sub(&id.kron(&f.transpose()))?
        .add(&f_dag.kron(&id))?
        .sub(&id.kron(&f_dag.transpose()))?;
    let mut op = commutators.scaled(Complex64::new(0.0, -g));
    if kappa > 0.0 {
        // 2FρF† - F†Fρ - ρF†F
        let dissipator = f
            .kron(&f_dag.transpose())
            .scaled_re(2.0)
            .sub(&ftf.kron(&id))?
            .sub(&id.kron(&ftf.transpose()))?
            .scaled_re(kappa / 2.0);
        op = op.add(&dissipator)?;
    }
    Ok(op)
}

/// `‖⟨I|·L‖_∞`: the largest `|d Tr ρ/dt|` over basis inputs.
pub fn trace_form_check(l: &Liouvillian) -> f64 {
    trace_form_residual(l.space(), &l.op)
}

pub fn trace_form_residual(space: &FockSpace, op: &SparseOperator) -> f64 {
    let d = space.dim();
    let mut col = vec![ZERO; op.cols()];
    for n in 0..d {
        for (j, v) in op.row(n * d + n) {
            col[j] += v;
        }
    }
    col.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// `max_mode max(‖lift(a)|I⟩ - tilde(a)†|I⟩‖, ‖lift(a)†|I⟩ - tilde(a)|I⟩‖)`
/// using the doubled-space operators.
pub fn identity_relation_residual(space: &FockSpace) -> Result<f64> {
    let id_vec = identity_vector(space);
    let mut worst = 0.0f64;
    for mode in 0..space.mode_count() {
        let a = space.lower(mode)?;
        let la = lift(space, &a)?;
        let ta = tilde(space, &a)?;
        let lhs = la.matvec(id_vec.amplitudes())?;
        let rhs = ta.adjoint().matvec(id_vec.amplitudes())?;
        worst = worst.max(fock::distance(&lhs, &rhs));
        let lhs = la.adjoint().matvec(id_vec.amplitudes())?;
        let rhs = ta.matvec(id_vec.amplitudes())?;
        worst = worst.max(fock::distance(&lhs, &rhs));
    }
    Ok(worst)
}
