//! Scenario execution: contract checks, time evolution and steady state, each
//! writing one artifact plus a list of hard checks.

use std::path::{Path, PathBuf};

use janus_core::evolution::{self, min_eigenvalue, truncation_leak};
use janus_core::janus::{commutator_residual_in_sector, self_commutator_norm, DEFAULT_MARGIN};
use janus_core::reference::{cat_alpha, TRUNCATION_LOSS_BOUND};
use janus_core::tfd::{build_liouvillian_with, identity_relation_residual, trace_form_check};
use janus_core::{
    build_liouvillian, build_pair, commutator_residual, fidelity, steady_state,
    verify_g_eigenstate, Complex64, Error, EvolveOptions, FockSpace, JanusConfig, JanusKind,
    Liouvillian, NullSpaceMethod, Parity, ReferenceKind, ReferenceState, Sector, VectorizedState,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{write_json, write_trajectory_file};
use crate::scenario::{ReferenceRequest, Scenario};

pub const VERIFY_FILE: &str = "verify.json";
pub const TRAJECTORY_FILE: &str = "trajectory.csv";
pub const STEADY_FILE: &str = "steady.json";

pub const TRACE_FORM_BOUND: f64 = 1e-12;
pub const KRONECKER_BOUND: f64 = 1e-13;
pub const IDENTITY_BOUND: f64 = 1e-13;
pub const CANONICAL_BOUND: f64 = 1e-12;
pub const EVOLVE_TRACE_BOUND: f64 = 1e-9;
pub const EVOLVE_HERM_BOUND: f64 = 1e-9;
pub const MIN_EIG_BOUND: f64 = -1e-8;
pub const ORACLE_FACTOR: f64 = 10.0;
pub const NULL_RESIDUAL_BOUND: f64 = 1e-8;
pub const STEADY_TRACE_BOUND: f64 = 1e-10;
pub const STEADY_HERM_BOUND: f64 = 1e-8;
pub const EIGEN_RESIDUAL_BOUND: f64 = 1e-5;
/// Eigen-relation checks only apply while the steady state stays clear of
/// the cutoff by this much population.
pub const EIGEN_LEAK_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Verify,
    Evolve,
    Steady,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::Verify, Stage::Evolve, Stage::Steady];
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Overrides the scenario tolerance.
    pub tol: Option<f64>,
    /// Compare every sample against `exp(Lt)ρ(0)` and solve the steady state
    /// with a dense null-space decomposition.
    pub dense_oracle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Equal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, relation: Relation, bound: f64) -> Self {
        let pass = match relation {
            Relation::AtMost => value <= bound,
            Relation::AtLeast => value >= bound,
            Relation::Equal => value == bound,
        };
        Self {
            name: name.into(),
            value,
            relation,
            bound,
            pass,
        }
    }

    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value, Relation::AtMost, bound)
    }

    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value, Relation::AtLeast, bound)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageOutcome {
    pub stage: Stage,
    pub file: PathBuf,
    pub pass: bool,
    pub failed: Vec<String>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub out_dir: PathBuf,
    pub pass: bool,
    pub stages: Vec<StageOutcome>,
}

struct Report {
    body: Value,
    checks: Vec<Check>,
    warnings: Vec<String>,
}

impl Report {
    fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn finish(mut self, stage: Stage, file: PathBuf) -> (Value, StageOutcome) {
        let pass = self.pass();
        let failed = self
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.clone())
            .collect();
        if let Value::Object(map) = &mut self.body {
            map.insert(
                "checks".into(),
                serde_json::to_value(&self.checks).expect("plain data"),
            );
            map.insert("warnings".into(), json!(self.warnings));
            map.insert("pass".into(), json!(pass));
        }
        let outcome = StageOutcome {
            stage,
            file,
            pass,
            failed,
            warnings: self.warnings,
        };
        (self.body, outcome)
    }
}

/// Runs `stages` of `scenario`, writing artifacts to `out_dir`.
pub fn run(
    scenario: &Scenario,
    stages: &[Stage],
    out_dir: &Path,
    options: &RunOptions,
) -> Result<Summary, CliError> {
    let tol = options.tol.unwrap_or(scenario.tol);
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::write(out_dir, e))?;

    let space = FockSpace::new(&scenario.cutoffs)?;
    let real = build_pair(&JanusConfig::new(scenario.kind, space).with_beta(scenario.beta))?;
    let l = build_liouvillian(&real, scenario.g, scenario.kappa)?;

    let mut outcomes = Vec::with_capacity(stages.len());
    for &stage in stages {
        let (file, report) = match stage {
            Stage::Verify => (VERIFY_FILE, verify(scenario, &l)?),
            Stage::Evolve => (
                TRAJECTORY_FILE,
                evolve(scenario, &l, tol, options.dense_oracle, out_dir)?,
            ),
            Stage::Steady => (
                STEADY_FILE,
                steady(scenario, &l, tol, options.dense_oracle)?,
            ),
        };
        let path = out_dir.join(file);
        let (body, outcome) = report.finish(stage, path.clone());
        match stage {
            Stage::Evolve => write_json(&out_dir.join("evolve.json"), &body)?,
            _ => write_json(&path, &body)?,
        }
        outcomes.push(outcome);
    }
    Ok(Summary {
        scenario: scenario.name.clone(),
        out_dir: out_dir.to_path_buf(),
        pass: outcomes.iter().all(|o| o.pass),
        stages: outcomes,
    })
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn sector_json(sector: Option<Sector>) -> Value {
    match sector {
        None => Value::Null,
        Some(Sector::Difference(q)) => json!(q),
        Some(Sector::Parity(p)) => json!(p.name()),
    }
}

/// `None` when the interior or the sector has no basis states.
fn optional(r: janus_core::Result<f64>) -> Result<Option<f64>, CliError> {
    match r {
        Ok(x) => Ok(Some(x)),
        Err(Error::EmptyInterior { .. } | Error::EmptySector) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// Kinds whose steady state is pinned by the eigen relation on a canonical
/// sector.
fn exact_kind(kind: JanusKind) -> bool {
    matches!(kind, JanusKind::PairAb | JanusKind::SquareA2)
}

fn verify(scenario: &Scenario, l: &Liouvillian) -> Result<Report, CliError> {
    let real = &l.realization;
    let space = l.space();
    let mut checks = Vec::new();
    let mut warnings = Vec::new();

    let mut conjugates = Vec::new();
    for which in 0..real.g_daggers.len() {
        let interior = optional(commutator_residual(real, which, DEFAULT_MARGIN))?;
        let sector = real.canonical_sector(which);
        let canonical = match sector {
            Some(s) => optional(commutator_residual_in_sector(
                real,
                which,
                DEFAULT_MARGIN,
                s,
            ))?,
            None => None,
        };
        if exact_kind(scenario.kind) {
            match canonical {
                Some(r) => checks.push(Check::at_most(
                    format!("commutator_G{which}_canonical"),
                    r,
                    CANONICAL_BOUND,
                )),
                None => warnings.push(format!("G{which}: canonical sector has no interior states")),
            }
        }
        conjugates.push(json!({
            "index": which,
            "residual_interior": interior,
            "canonical_sector": sector_json(sector),
            "residual_canonical": canonical,
        }));
    }

    let charge = real.charge_commutator().map(|c| c.max_abs());
    if let Some(c) = charge {
        checks.push(Check::new("charge_commutator", c, Relation::Equal, 0.0));
    }
    let self_commutator = optional(self_commutator_norm(real, DEFAULT_MARGIN))?;
    let identity = identity_relation_residual(space)?;
    checks.push(Check::at_most(
        "identity_relation",
        identity,
        IDENTITY_BOUND,
    ));
    let trace_form = trace_form_check(l);
    checks.push(Check::at_most("trace_form", trace_form, TRACE_FORM_BOUND));
    let literal = build_liouvillian_with(
        real,
        l.g,
        l.kappa,
        janus_core::DissipatorOrdering::Literal,
        false,
    )?;
    let literal_trace_form = trace_form_check(&literal);
    match l.kronecker_diff {
        Some(d) => checks.push(Check::at_most("kronecker_diff", d, KRONECKER_BOUND)),
        None => warnings.push("kronecker cross-check skipped: doubled space too large".into()),
    }

    let body = json!({
        "scenario": scenario.name,
        "kind": scenario.kind.name(),
        "beta": complex(scenario.beta),
        "cutoffs": scenario.cutoffs,
        "margin": DEFAULT_MARGIN,
        "conjugates": conjugates,
        "charge_commutator": charge,
        "self_commutator": self_commutator,
        "identity_relation": identity,
        "trace_form": trace_form,
        "literal_trace_form": literal_trace_form,
        "kronecker_diff": l.kronecker_diff,
    });
    Ok(Report {
        body,
        checks,
        warnings,
    })
}

fn sector_charge(scenario: &Scenario) -> Option<i64> {
    match scenario.sector {
        Some(Sector::Difference(q)) => Some(q),
        _ => None,
    }
}

fn sector_parity(scenario: &Scenario) -> Parity {
    match scenario.sector {
        Some(Sector::Parity(p)) => p,
        _ => Parity::Even,
    }
}

fn reference_kind(
    scenario: &Scenario,
    request: &ReferenceRequest,
) -> Result<ReferenceKind, CliError> {
    let target = || {
        janus_core::tfd::lambda_target(scenario.g, scenario.kappa).ok_or_else(|| {
            CliError::validation(
                "validation.reference",
                "zeta/alpha default to -2ig/kappa and need kappa > 0",
            )
        })
    };
    Ok(match *request {
        ReferenceRequest::PairCoherent { zeta, q } => {
            let q = match q {
                Some(q) => q,
                None => {
                    let q = sector_charge(scenario).unwrap_or(0);
                    usize::try_from(q).map_err(|_| {
                        CliError::validation(
                            "validation.reference",
                            format!("pair-coherent references need q >= 0, sector is {q}"),
                        )
                    })?
                }
            };
            ReferenceKind::PairCoherent {
                zeta: zeta.map_or_else(target, Ok)?,
                q,
            }
        }
        ReferenceRequest::Tmss { r, phase } => ReferenceKind::TwoModeSqueezed { r, phase },
        ReferenceRequest::Cat { alpha, parity } => ReferenceKind::Cat {
            alpha: match alpha {
                Some(a) => a,
                None => cat_alpha(target()?),
            },
            parity: parity.unwrap_or_else(|| sector_parity(scenario)),
        },
        ReferenceRequest::SqueezedVacuum { r, phase } => ReferenceKind::SqueezedVacuum { r, phase },
    })
}

fn scenario_reference(
    scenario: &Scenario,
    space: &FockSpace,
) -> Result<Option<ReferenceState>, CliError> {
    scenario
        .reference
        .as_ref()
        .map(|request| {
            let kind = reference_kind(scenario, request)?;
            Ok(ReferenceState::build(space, kind, TRUNCATION_LOSS_BOUND)?)
        })
        .transpose()
}

fn evolve(
    scenario: &Scenario,
    l: &Liouvillian,
    tol: f64,
    dense_oracle: bool,
    out_dir: &Path,
) -> Result<Report, CliError> {
    let space = l.space();
    let rho0 = VectorizedState::basis_projector(space, 0);
    let grid = scenario.time_grid();
    let mut options = EvolveOptions::new(tol);
    options.keep_states = dense_oracle;
    options.reference = scenario_reference(scenario, space)?;
    let trajectory = evolution::evolve_with(l, &rho0, &grid, &options)?;
    write_trajectory_file(&out_dir.join(TRAJECTORY_FILE), &trajectory)?;

    let mut checks = vec![
        Check::at_most(
            "trace_deviation",
            trajectory.max_trace_deviation(),
            EVOLVE_TRACE_BOUND,
        ),
        Check::at_most("herm_dev", trajectory.max_herm_dev(), EVOLVE_HERM_BOUND),
    ];
    let mut warnings = Vec::new();
    let min_eig = trajectory.min_eigenvalue();
    match min_eig {
        Some(m) => checks.push(Check::at_least("min_eig", m, MIN_EIG_BOUND)),
        None => warnings.push("min_eig not computed: support too large".into()),
    }
    if trajectory.leak_warning() {
        warnings.push(format!(
            "population near the cutoff reached {:.3e}; raise the cutoffs",
            trajectory.max_leak()
        ));
    }

    let mut oracle = Value::Null;
    if dense_oracle {
        let mut worst = 0.0f64;
        let mut skipped = None;
        for (t, state) in trajectory.times.iter().zip(&trajectory.states) {
            match evolution::expm_oracle(l, *t, &rho0) {
                Ok(exact) => worst = worst.max(exact.distance(state)),
                Err(e @ Error::DenseTooLarge { .. }) => {
                    skipped = Some(e);
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        match skipped {
            Some(e) => warnings.push(format!("dense oracle skipped: {e}")),
            None => {
                checks.push(Check::at_most(
                    "oracle_distance",
                    worst,
                    ORACLE_FACTOR * tol,
                ));
                oracle = json!(worst);
            }
        }
    }

    let last = trajectory
        .observables
        .last()
        .expect("grid has at least two points");
    let body = json!({
        "scenario": scenario.name,
        "kind": scenario.kind.name(),
        "tol": tol,
        "samples": trajectory.times.len(),
        "reduced_dim": trajectory.reduced_dim,
        "steps": trajectory.steps,
        "rejected": trajectory.rejected,
        "max_trace_deviation": trajectory.max_trace_deviation(),
        "max_herm_dev": trajectory.max_herm_dev(),
        "min_eig": min_eig,
        "max_leak": trajectory.max_leak(),
        "final_mean_n": last.mean_n,
        "final_fidelity_ref": last.fidelity_ref,
        "oracle_distance": oracle,
    });
    Ok(Report {
        body,
        checks,
        warnings,
    })
}

/// Fidelity with an automatically chosen reference; build failures (the
/// reference does not fit the cutoff) become warnings.
fn auto_fidelity(
    state: &VectorizedState,
    space: &FockSpace,
    kind: ReferenceKind,
    warnings: &mut Vec<String>,
) -> Result<Option<f64>, CliError> {
    match ReferenceState::build(space, kind, TRUNCATION_LOSS_BOUND) {
        Ok(r) => Ok(Some(fidelity(state, &r)?)),
        Err(e @ (Error::TruncationLoss { .. } | Error::ChargeTooLarge { .. })) => {
            warnings.push(format!("reference skipped: {e}"));
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn steady(scenario: &Scenario, l: &Liouvillian, tol: f64, dense: bool) -> Result<Report, CliError> {
    if l.kappa == 0.0 {
        return Ok(Report {
            body: json!({ "scenario": scenario.name, "steady": "skipped (kappa=0)" }),
            checks: Vec::new(),
            warnings: Vec::new(),
        });
    }
    let space = l.space();
    let result = steady_state(
        l,
        scenario.sector,
        if dense {
            NullSpaceMethod::DenseNull
        } else {
            NullSpaceMethod::Auto
        },
        tol,
    )?;
    let state = &result.state;
    let mut warnings = Vec::new();

    let trace = state.trace();
    let herm = state.hermiticity_deviation();
    let min_eig = min_eigenvalue(state);
    let leak = truncation_leak(state);
    let mut checks = vec![
        Check::at_most("null_residual", result.null_residual, NULL_RESIDUAL_BOUND),
        Check::at_most("trace_deviation", (trace - 1.0).norm(), STEADY_TRACE_BOUND),
        Check::at_most("herm_dev", herm, STEADY_HERM_BOUND),
    ];
    match min_eig {
        Some(m) => checks.push(Check::at_least("min_eig", m, MIN_EIG_BOUND)),
        None => warnings.push("min_eig not computed: support too large".into()),
    }
    if leak > EIGEN_LEAK_LIMIT {
        warnings.push(format!(
            "population near the cutoff is {leak:.3e}; raise the cutoffs"
        ));
    }
    if exact_kind(scenario.kind) && leak <= EIGEN_LEAK_LIMIT {
        checks.push(Check::at_most(
            "resid_F",
            result.resid_f,
            EIGEN_RESIDUAL_BOUND,
        ));
        checks.push(Check::at_most(
            "resid_Ftilde",
            result.resid_ftilde,
            EIGEN_RESIDUAL_BOUND,
        ));
    }

    let lambda = result.lambda_target;
    let fidelity_pair_coherent = match (scenario.kind, sector_charge(scenario)) {
        (JanusKind::PairAb, Some(q)) if q >= 0 => auto_fidelity(
            state,
            space,
            ReferenceKind::PairCoherent {
                zeta: lambda,
                q: q as usize,
            },
            &mut warnings,
        )?,
        _ => None,
    };
    let fidelity_cat = match scenario.kind {
        JanusKind::SquareA2 => auto_fidelity(
            state,
            space,
            ReferenceKind::Cat {
                alpha: cat_alpha(lambda),
                parity: sector_parity(scenario),
            },
            &mut warnings,
        )?,
        _ => None,
    };
    let fidelity_reference = match scenario_reference(scenario, space)? {
        Some(r) => Some(fidelity(state, &r)?),
        None => None,
    };

    let g_eigen: Vec<Value> = (0..l.realization.g_daggers.len())
        .map(|which| {
            let r = verify_g_eigenstate(state, &l.realization, which)?;
            Ok(json!({
                "index": which,
                "lift_lambda": complex(r.lift.lambda),
                "lift_residual": r.lift.residual,
                "tilde_lambda": complex(r.tilde.lambda),
                "tilde_residual": r.tilde.residual,
            }))
        })
        .collect::<Result<_, CliError>>()?;

    let body = json!({
        "scenario": scenario.name,
        "kind": scenario.kind.name(),
        "steady": "ok",
        "sector": sector_json(result.sector),
        "method": format!("{:?}", result.method),
        "solved_dim": result.solved_dim,
        "null_residual": result.null_residual,
        "null_dim": result.null_dim,
        "second_singular_value": result.second_singular_value,
        "lambda_target": complex(lambda),
        "lambda_target_tilde": complex(lambda.conj()),
        "resid_F": result.resid_f,
        "resid_Ftilde": result.resid_ftilde,
        "trace": complex(trace),
        "herm_dev": herm,
        "min_eig": min_eig,
        "leak": leak,
        "mean_n": (0..space.mode_count()).map(|m| state.mean_occupation(m)).collect::<Vec<_>>(),
        "fidelity_pair_coherent": fidelity_pair_coherent,
        "fidelity_cat": fidelity_cat,
        "fidelity_reference": fidelity_reference,
        "g_eigen": g_eigen,
    });
    Ok(Report {
        body,
        checks,
        warnings,
    })
}
