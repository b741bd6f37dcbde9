//! Concrete Janus-faced pairs `(F, {G_i†})` with `[F, G_i†] = 1`.
//!
//! | kind          | F            | G_0†                     | G_1†                     | charge        |
//! |---------------|--------------|--------------------------|--------------------------|---------------|
//! | `pair_ab`     | `ab`         | `a†b† (n_b+1)⁻¹`         | `a†b† (n_a+1)⁻¹`         | `n_a - n_b`   |
//! | `square_a2`   | `a²`         | `a†²/2 (n_a+1)⁻¹`        | `a†²/2 (n_a+2)⁻¹`        | `(-1)^{n_a}`  |
//! | `single_beta` | `a + βa†²`   | as `square_a2`           | as `square_a2`           | none          |
//! | `pair_beta`   | `ab + βa†b†` | `a†b†/2 (n_b+1)⁻¹`       | `a†b†/2 (n_a+1)⁻¹`       | `n_a - n_b`   |
//!
//! The inverse-number factors are diagonal and act first (to the right of the
//! raising part). For `a²` the two conjugates are canonical on complementary
//! parity sectors: `G_0†` on even Fock states, `G_1†` on odd ones.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockSpace, SparseOperator};
use crate::math;

/// Interior margin used for operators that move occupations by two.
pub const DEFAULT_MARGIN: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum JanusKind {
    PairAb,
    SquareA2,
    SingleBeta,
    PairBeta,
}

impl JanusKind {
    pub const ALL: [JanusKind; 4] = [
        JanusKind::PairAb,
        JanusKind::SquareA2,
        JanusKind::SingleBeta,
        JanusKind::PairBeta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            JanusKind::PairAb => "pair_ab",
            JanusKind::SquareA2 => "square_a2",
            JanusKind::SingleBeta => "single_beta",
            JanusKind::PairBeta => "pair_beta",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn required_modes(self) -> usize {
        match self {
            JanusKind::PairAb | JanusKind::PairBeta => 2,
            JanusKind::SquareA2 | JanusKind::SingleBeta => 1,
        }
    }

    pub fn uses_beta(self) -> bool {
        matches!(self, JanusKind::SingleBeta | JanusKind::PairBeta)
    }

    pub fn has_charge(self) -> bool {
        !matches!(self, JanusKind::SingleBeta)
    }
}

impl core::fmt::Display for JanusKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Eigenvalue label of a conserved charge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    /// `n_a - n_b = q`.
    Difference(i64),
    /// `(-1)^{n_a}`.
    Parity(Parity),
}

/// Which conserved quantity a realization carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChargeKind {
    Difference { a: usize, b: usize },
    Parity { mode: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Charge {
    pub kind: ChargeKind,
    pub operator: SparseOperator,
}

impl Charge {
    /// Charge label of a single-copy basis state.
    pub fn sector_of(&self, space: &FockSpace, index: usize) -> Sector {
        match self.kind {
            ChargeKind::Difference { a, b } => Sector::Difference(
                space.occupation(index, a) as i64 - space.occupation(index, b) as i64,
            ),
            ChargeKind::Parity { mode } => {
                Sector::Parity(Parity::of(space.occupation(index, mode)))
            }
        }
    }

    /// Whether `sector` is a label of this kind of charge.
    pub fn accepts(&self, sector: Sector) -> bool {
        matches!(
            (self.kind, sector),
            (ChargeKind::Difference { .. }, Sector::Difference(_))
                | (ChargeKind::Parity { .. }, Sector::Parity(_))
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JanusConfig {
    pub kind: JanusKind,
    /// Deformation strength; ignored by `pair_ab` and `square_a2`.
    pub beta: Complex64,
    pub space: FockSpace,
}

impl JanusConfig {
    pub fn new(kind: JanusKind, space: FockSpace) -> Self {
        Self {
            kind,
            beta: Complex64::new(0.0, 0.0),
            space,
        }
    }

    pub fn with_beta(mut self, beta: Complex64) -> Self {
        self.beta = beta;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JanusRealization {
    pub kind: JanusKind,
    pub beta: Complex64,
    pub space: FockSpace,
    pub f: SparseOperator,
    pub g_daggers: Vec<SparseOperator>,
    pub charge: Option<Charge>,
}

/// Placement of the inverse-number factor inside `G†`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagonalOrder {
    /// `raise · diag`: the diagonal acts first.
    DiagonalFirst,
    /// `diag · raise`.
    DiagonalLast,
}

pub fn build_pair(config: &JanusConfig) -> Result<JanusRealization> {
    build_pair_with_order(config, DiagonalOrder::DiagonalFirst)
}

pub fn build_pair_with_order(
    config: &JanusConfig,
    order: DiagonalOrder,
) -> Result<JanusRealization> {
    let space = &config.space;
    let kind = config.kind;
    if space.mode_count() < kind.required_modes() {
        return Err(Error::WrongModeCount {
            kind: kind.name(),
            required: kind.required_modes(),
            found: space.mode_count(),
        });
    }
    if !(config.beta.re.is_finite() && config.beta.im.is_finite()) {
        return Err(Error::NonFinite { name: "beta" });
    }
    let beta = if kind.uses_beta() {
        config.beta
    } else {
        Complex64::new(0.0, 0.0)
    };

    let inverse_number = |mode: usize, shift: f64| {
        space.diagonal(|occ| Complex64::new(1.0 / (occ[mode] as f64 + shift), 0.0))
    };
    let conjugate = |raise: &SparseOperator, diag: SparseOperator| -> Result<SparseOperator> {
        match order {
            DiagonalOrder::DiagonalFirst => raise.product(&diag),
            DiagonalOrder::DiagonalLast => diag.product(raise),
        }
    };

    let a = space.lower(0)?;
    let (f, g_daggers, charge) = match kind {
        JanusKind::PairAb | JanusKind::PairBeta => {
            let b = space.lower(1)?;
            let ab = a.product(&b)?;
            let ab_dag = ab.adjoint();
            let f = ab.add(&ab_dag.scaled(beta))?;
            let raise = if kind == JanusKind::PairAb {
                ab_dag
            } else {
                ab_dag.scaled_re(0.5)
            };
            let g = alloc::vec![
                conjugate(&raise, inverse_number(1, 1.0))?,
                conjugate(&raise, inverse_number(0, 1.0))?,
            ];
            let q = space.number(0)?.sub(&space.number(1)?)?;
            let charge = Charge {
                kind: ChargeKind::Difference { a: 0, b: 1 },
                operator: q,
            };
            (f, g, Some(charge))
        }
        JanusKind::SquareA2 | JanusKind::SingleBeta => {
            let a2 = a.product(&a)?;
            let a2_dag = a2.adjoint();
            let f = if kind == JanusKind::SquareA2 {
                a2
            } else {
                a.add(&a2_dag.scaled(beta))?
            };
            let raise = a2_dag.scaled_re(0.5);
            let g = alloc::vec![
                conjugate(&raise, inverse_number(0, 1.0))?,
                conjugate(&raise, inverse_number(0, 2.0))?,
            ];
            let charge = (kind == JanusKind::SquareA2).then(|| Charge {
                kind: ChargeKind::Parity { mode: 0 },
                operator: space
                    .diagonal(|occ| Complex64::new(if occ[0] % 2 == 0 { 1.0 } else { -1.0 }, 0.0)),
            });
            (f, g, charge)
        }
    };

    Ok(JanusRealization {
        kind,
        beta,
        space: space.clone(),
        f,
        g_daggers,
        charge,
    })
}

impl JanusRealization {
    pub fn g_dagger(&self, which: usize) -> Result<&SparseOperator> {
        self.g_daggers.get(which).ok_or(Error::InvalidConjugate {
            which,
            available: self.g_daggers.len(),
        })
    }

    /// `G_i = (G_i†)†`.
    pub fn g(&self, which: usize) -> Result<SparseOperator> {
        Ok(self.g_dagger(which)?.adjoint())
    }

    /// `[F, Q]` for the conserved charge `Q`, if any. Exactly zero (no stored
    /// entries) for a genuinely conserved charge.
    pub fn charge_commutator(&self) -> Option<SparseOperator> {
        self.charge
            .as_ref()
            .map(|q| self.f.commutator(&q.operator).expect("same space"))
    }

    /// A sector on which `G_which†` satisfies the contract exactly away from
    /// the cutoff: parity even/odd for `a²`-type kinds (`G_0†`/`G_1†`), the
    /// balanced sector `n_a = n_b` for pair kinds.
    pub fn canonical_sector(&self, which: usize) -> Option<Sector> {
        match self.kind {
            JanusKind::SquareA2 | JanusKind::SingleBeta => Some(Sector::Parity(if which == 0 {
                Parity::Even
            } else {
                Parity::Odd
            })),
            JanusKind::PairAb | JanusKind::PairBeta => Some(Sector::Difference(0)),
        }
    }
}

/// `max ‖([F, G_which†] - I)|n⟩‖` over interior basis states `|n⟩` (all
/// occupations `≤ cutoff - 1 - margin`).
pub fn commutator_residual(real: &JanusRealization, which: usize, margin: usize) -> Result<f64> {
    residual_over(real, which, margin, |_| true)
}

/// As [`commutator_residual`] but only over interior states of one sector of
/// the given parity or charge label.
pub fn commutator_residual_in_sector(
    real: &JanusRealization,
    which: usize,
    margin: usize,
    sector: Sector,
) -> Result<f64> {
    let space = &real.space;
    let kind = match sector {
        Sector::Parity(_) => ChargeKind::Parity { mode: 0 },
        Sector::Difference(_) if space.mode_count() >= 2 => ChargeKind::Difference { a: 0, b: 1 },
        Sector::Difference(_) => {
            return Err(Error::WrongModeCount {
                kind: "charge difference",
                required: 2,
                found: space.mode_count(),
            })
        }
    };
    let charge = Charge {
        kind,
        operator: SparseOperator::zeros(0, 0),
    };
    residual_over(real, which, margin, |i| {
        charge.sector_of(space, i) == sector
    })
}

fn residual_over(
    real: &JanusRealization,
    which: usize,
    margin: usize,
    include: impl Fn(usize) -> bool,
) -> Result<f64> {
    let space = &real.space;
    let comm = real.f.commutator(real.g_dagger(which)?)?;
    let interior: Vec<bool> = (0..space.dim())
        .map(|i| space.is_interior(i, margin) && include(i))
        .collect();
    if !interior.iter().any(|&x| x) {
        return Err(Error::EmptyInterior { margin });
    }
    Ok(column_deviation_from_identity(&comm, &interior))
}

/// `max ‖[F, F†]|n⟩‖` over interior basis states; zero iff `F` is normal there.
pub fn self_commutator_norm(real: &JanusRealization, margin: usize) -> Result<f64> {
    let space = &real.space;
    let comm = real.f.commutator(&real.f.adjoint())?;
    let interior: Vec<bool> = (0..space.dim())
        .map(|i| space.is_interior(i, margin))
        .collect();
    if !interior.iter().any(|&x| x) {
        return Err(Error::EmptyInterior { margin });
    }
    let mut col_sq = alloc::vec![0.0f64; space.dim()];
    for (_, j, v) in comm.triplets() {
        col_sq[j] += v.norm_sqr();
    }
    Ok(col_sq
        .iter()
        .zip(&interior)
        .filter(|(_, &keep)| keep)
        .map(|(s, _)| math::sqrt(*s))
        .fold(0.0, f64::max))
}

fn column_deviation_from_identity(op: &SparseOperator, keep: &[bool]) -> f64 {
    let n = op.cols();
    let mut col_sq = alloc::vec![0.0f64; n];
    let mut diag_seen = alloc::vec![false; n];
    for (i, j, v) in op.triplets() {
        let d = if i == j {
            diag_seen[j] = true;
            v - Complex64::new(1.0, 0.0)
        } else {
            v
        };
        col_sq[j] += d.norm_sqr();
    }
    for j in 0..n {
        if !diag_seen[j] {
            col_sq[j] += 1.0;
        }
    }
    (0..n)
        .filter(|&j| keep[j])
        .map(|j| math::sqrt(col_sq[j]))
        .fold(0.0, f64::max)
}
