//! Analytic benchmark states in a truncated Fock space.
//!
//! All states live on mode 0 (and mode 1 for two-mode states); any further
//! modes are left in vacuum. Amplitudes are generated by their ratio
//! recursions, the truncated vector is renormalized, and the weight that fell
//! outside the cutoff is reported as `truncation_loss`.
//!
//! Phase conventions follow the generators of the short-time dynamics:
//! `two_mode_squeezed(r, 0)` is `exp(-ir(ab + a†b†))|0,0⟩` and
//! `squeezed_vacuum(r, 0)` is `exp(-ir(a² + a†²))|0⟩`.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockSpace, StateVector};
use crate::janus::Parity;
use crate::math;
use crate::tfd::VectorizedState;

/// Default bound on the weight lost to truncation.
pub const TRUNCATION_LOSS_BOUND: f64 = 1e-8;

/// Hermiticity tolerance accepted by [`fidelity`].
pub const FIDELITY_HERMITIAN_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceKind {
    /// Eigenstate of `ab` with eigenvalue `zeta` and `n_a - n_b = q`.
    PairCoherent { zeta: Complex64, q: usize },
    /// Two-mode squeezed (Caves-Schumaker) vacuum.
    TwoModeSqueezed { r: f64, phase: f64 },
    /// `N(|α⟩ ± |-α⟩)`.
    Cat { alpha: Complex64, parity: Parity },
    /// Single-mode squeezed (Yuen) vacuum.
    SqueezedVacuum { r: f64, phase: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceState {
    pub kind: ReferenceKind,
    pub space: FockSpace,
    pub vector: StateVector,
    pub truncation_loss: f64,
}

impl ReferenceState {
    /// Builds the state, failing if more than `max_loss` of its weight lies
    /// beyond the cutoff.
    pub fn build(space: &FockSpace, kind: ReferenceKind, max_loss: f64) -> Result<Self> {
        let (vector, loss) = match kind {
            ReferenceKind::PairCoherent { zeta, q } => pair_coherent_amplitudes(space, zeta, q)?,
            ReferenceKind::TwoModeSqueezed { r, phase } => tmss_amplitudes(space, r, phase)?,
            ReferenceKind::Cat { alpha, parity } => cat_amplitudes(space, alpha, parity)?,
            ReferenceKind::SqueezedVacuum { r, phase } => squeezed_amplitudes(space, r, phase)?,
        };
        if loss.is_nan() || loss > max_loss {
            return Err(Error::TruncationLoss {
                loss,
                bound: max_loss,
            });
        }
        Ok(Self {
            kind,
            space: space.clone(),
            vector: vector.normalized()?,
            truncation_loss: loss,
        })
    }

    pub fn pair_coherent(space: &FockSpace, zeta: Complex64, q: usize) -> Result<Self> {
        Self::build(
            space,
            ReferenceKind::PairCoherent { zeta, q },
            TRUNCATION_LOSS_BOUND,
        )
    }

    pub fn two_mode_squeezed(space: &FockSpace, r: f64, phase: f64) -> Result<Self> {
        Self::build(
            space,
            ReferenceKind::TwoModeSqueezed { r, phase },
            TRUNCATION_LOSS_BOUND,
        )
    }

    pub fn cat(space: &FockSpace, alpha: Complex64, parity: Parity) -> Result<Self> {
        Self::build(
            space,
            ReferenceKind::Cat { alpha, parity },
            TRUNCATION_LOSS_BOUND,
        )
    }

    pub fn squeezed_vacuum(space: &FockSpace, r: f64, phase: f64) -> Result<Self> {
        Self::build(
            space,
            ReferenceKind::SqueezedVacuum { r, phase },
            TRUNCATION_LOSS_BOUND,
        )
    }

    /// `|ψ⟩⟨ψ|` in vectorized form.
    pub fn vectorized(&self) -> VectorizedState {
        VectorizedState::from_pure(&self.space, &self.vector).expect("same space")
    }
}

/// Principal square root of `lambda`, the cat amplitude whose `a²` eigenvalue
/// is `lambda`.
pub fn cat_alpha(lambda: Complex64) -> Complex64 {
    lambda.sqrt()
}

fn require_modes(space: &FockSpace, n: usize, kind: &'static str) -> Result<()> {
    if space.mode_count() < n {
        return Err(Error::WrongModeCount {
            kind,
            required: n,
            found: space.mode_count(),
        });
    }
    Ok(())
}

fn check_finite(x: f64, name: &'static str) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name })
    }
}

/// Sums `|c_k|²` for a ratio recursion `c_{k+1} = c_k · ratio(k)` starting
/// at `c_start`, splitting into the first `kept` terms and the tail. The tail
/// loop stops once past the peak and the terms are negligible.
fn weight_split(
    c_start: Complex64,
    kept: usize,
    ratio: impl Fn(usize) -> Complex64,
) -> (Vec<Complex64>, f64, f64) {
    let mut amps = Vec::with_capacity(kept);
    let mut c = c_start;
    let mut head = 0.0;
    let mut k = 0usize;
    while k < kept {
        amps.push(c);
        head += c.norm_sqr();
        c *= ratio(k);
        k += 1;
    }
    let mut tail = 0.0;
    let mut guard = 0usize;
    loop {
        let w = c.norm_sqr();
        tail += w;
        let r = ratio(k).norm_sqr();
        if (r < 1.0 && w <= 1e-30 * (head + tail)) || w == 0.0 || guard > 1_000_000 {
            break;
        }
        c *= ratio(k);
        k += 1;
        guard += 1;
    }
    (amps, head, tail)
}

fn pair_coherent_amplitudes(
    space: &FockSpace,
    zeta: Complex64,
    q: usize,
) -> Result<(StateVector, f64)> {
    require_modes(space, 2, "pair_coherent")?;
    check_finite(zeta.re, "zeta")?;
    check_finite(zeta.im, "zeta")?;
    let (na, nb) = (space.cutoff(0), space.cutoff(1));
    if q >= na {
        return Err(Error::ChargeTooLarge { q, cutoff: na });
    }
    // c_n = ζⁿ / √(n!(n+q)!) on |n+q, n⟩
    let mut c0 = 1.0;
    for k in 1..=q {
        c0 /= math::sqrt(k as f64);
    }
    let kept = (na - q).min(nb);
    let (amps, head, tail) = weight_split(Complex64::new(c0, 0.0), kept, |n| {
        zeta / math::sqrt(((n + 1) * (n + q + 1)) as f64)
    });
    let mut v = StateVector::zeros(space.dim());
    let mut occ = alloc::vec![0usize; space.mode_count()];
    for (n, c) in amps.into_iter().enumerate() {
        occ[0] = n + q;
        occ[1] = n;
        v[space.index_of(&occ).expect("within cutoff")] = c;
    }
    Ok((v, tail / (head + tail)))
}

fn tmss_amplitudes(space: &FockSpace, r: f64, phase: f64) -> Result<(StateVector, f64)> {
    require_modes(space, 2, "two_mode_squeezed")?;
    check_finite(r, "r")?;
    check_finite(phase, "phase")?;
    // sech r · (-i e^{iφ} tanh r)ⁿ on |n, n⟩
    let ratio = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, phase) * math::tanh(r);
    let kept = space.cutoff(0).min(space.cutoff(1));
    let (amps, head, tail) =
        weight_split(Complex64::new(1.0 / math::cosh(r), 0.0), kept, |_| ratio);
    let mut v = StateVector::zeros(space.dim());
    let mut occ = alloc::vec![0usize; space.mode_count()];
    for (n, c) in amps.into_iter().enumerate() {
        occ[0] = n;
        occ[1] = n;
        v[space.index_of(&occ).expect("within cutoff")] = c;
    }
    Ok((v, tail / (head + tail)))
}

fn squeezed_amplitudes(space: &FockSpace, r: f64, phase: f64) -> Result<(StateVector, f64)> {
    require_modes(space, 1, "squeezed_vacuum")?;
    check_finite(r, "r")?;
    check_finite(phase, "phase")?;
    // (cosh 2r)^{-1/2} (-i e^{iφ} tanh 2r)^m √((2m)!) / (2^m m!) on |2m⟩
    let z = Complex64::new(0.0, -1.0) * Complex64::from_polar(1.0, phase) * math::tanh(2.0 * r);
    let kept = space.cutoff(0).div_ceil(2);
    let (amps, head, tail) = weight_split(
        Complex64::new(1.0 / math::sqrt(math::cosh(2.0 * r)), 0.0),
        kept,
        |m| z * math::sqrt(((2 * m + 1) * (2 * m + 2)) as f64) / (2.0 * (m + 1) as f64),
    );
    let mut v = StateVector::zeros(space.dim());
    let mut occ = alloc::vec![0usize; space.mode_count()];
    for (m, c) in amps.into_iter().enumerate() {
        occ[0] = 2 * m;
        v[space.index_of(&occ).expect("within cutoff")] = c;
    }
    Ok((v, tail / (head + tail)))
}

fn cat_amplitudes(
    space: &FockSpace,
    alpha: Complex64,
    parity: Parity,
) -> Result<(StateVector, f64)> {
    require_modes(space, 1, "cat")?;
    check_finite(alpha.re, "alpha")?;
    check_finite(alpha.im, "alpha")?;
    // αⁿ/√n! on n of the given parity, divided by α for odd cats so that the
    // α → 0 limit is |1⟩ rather than 0/0.
    let p = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let n_at = |k: usize| 2 * k + p;
    let cutoff = space.cutoff(0);
    let kept = if cutoff > p {
        (cutoff - p).div_ceil(2)
    } else {
        0
    };
    let alpha2 = alpha * alpha;
    let (amps, head, tail) = weight_split(Complex64::new(1.0, 0.0), kept, |k| {
        alpha2 / math::sqrt(((n_at(k) + 1) * (n_at(k) + 2)) as f64)
    });
    let mut v = StateVector::zeros(space.dim());
    let mut occ = alloc::vec![0usize; space.mode_count()];
    for (k, c) in amps.into_iter().enumerate() {
        occ[0] = n_at(k);
        v[space.index_of(&occ).expect("within cutoff")] = c;
    }
    Ok((v, tail / (head + tail)))
}

/// `⟨ψ|ρ|ψ⟩` for a pure reference `ψ`.
pub fn fidelity(rho: &VectorizedState, reference: &ReferenceState) -> Result<f64> {
    let space = rho.space();
    if space.dim() != reference.vector.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: reference.vector.dim(),
        });
    }
    let deviation = rho.hermiticity_deviation();
    if deviation > FIDELITY_HERMITIAN_TOLERANCE {
        return Err(Error::NonHermitian { deviation });
    }
    let psi = reference.vector.amplitudes();
    let support: Vec<usize> = (0..psi.len())
        .filter(|&i| psi[i] != Complex64::new(0.0, 0.0))
        .collect();
    let mut f = Complex64::new(0.0, 0.0);
    for &n in &support {
        for &m in &support {
            f += psi[n].conj() * rho.entry(n, m) * psi[m];
        }
    }
    Ok(f.re)
}
