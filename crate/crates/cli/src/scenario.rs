//! Scenario files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! kind = "pair_ab"        # pair_ab | square_a2 | single_beta | pair_beta
//! beta = [0.0, 0.0]       # [re, im], only for the beta kinds
//! g = 0.5
//! kappa = 1.0
//! cutoffs = [24, 24]
//! sector = 0              # n_a - n_b for pair kinds, "even"/"odd" for square_a2
//! t_max = 5.0
//! n_samples = 51
//! tol = 1e-10
//!
//! [reference]             # optional
//! kind = "pair_coherent"  # pair_coherent | tmss | cat | squeezed_vacuum
//! zeta = [0.0, -1.0]
//! q = 0
//! ```

use std::path::Path;

use janus_core::{Complex64, JanusKind, Parity, Sector};
use serde::Deserialize;

use crate::error::CliError;

/// Largest `|β|` accepted without `--allow-large-beta`.
pub const BETA_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, Default)]
pub struct ValidationOptions {
    pub allow_large_beta: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: String,
    beta: Option<[f64; 2]>,
    g: f64,
    kappa: f64,
    cutoffs: Vec<usize>,
    sector: Option<RawSector>,
    t_max: f64,
    n_samples: usize,
    tol: f64,
    reference: Option<RawReference>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawSector {
    Charge(i64),
    Parity(String),
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawReference {
    PairCoherent {
        zeta: Option<[f64; 2]>,
        q: Option<usize>,
    },
    Tmss {
        r: f64,
        #[serde(default)]
        phase: f64,
    },
    Cat {
        alpha: Option<[f64; 2]>,
        parity: Option<String>,
    },
    SqueezedVacuum {
        r: f64,
        #[serde(default)]
        phase: f64,
    },
}

/// Reference state requested by a scenario. Unset parameters of the
/// steady-state references default to the eigen-relation target: `ζ = -2ig/κ`
/// and `α = √ζ`, with `q` and parity taken from the sector.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceRequest {
    PairCoherent {
        zeta: Option<Complex64>,
        q: Option<usize>,
    },
    Tmss {
        r: f64,
        phase: f64,
    },
    Cat {
        alpha: Option<Complex64>,
        parity: Option<Parity>,
    },
    SqueezedVacuum {
        r: f64,
        phase: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub kind: JanusKind,
    pub beta: Complex64,
    pub g: f64,
    pub kappa: f64,
    pub cutoffs: Vec<usize>,
    pub sector: Option<Sector>,
    pub t_max: f64,
    pub n_samples: usize,
    pub tol: f64,
    pub reference: Option<ReferenceRequest>,
}

fn finite(name: &'static str, code: &'static str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::validation(
            code,
            format!("{name} must be finite, got {x}"),
        ))
    }
}

fn complex(pair: [f64; 2], name: &'static str, code: &'static str) -> Result<Complex64, CliError> {
    Ok(Complex64::new(
        finite(name, code, pair[0])?,
        finite(name, code, pair[1])?,
    ))
}

fn parity(text: &str, code: &'static str) -> Result<Parity, CliError> {
    match text {
        "even" => Ok(Parity::Even),
        "odd" => Ok(Parity::Odd),
        other => Err(CliError::validation(
            code,
            format!("parity must be \"even\" or \"odd\", got {other:?}"),
        )),
    }
}

impl Scenario {
    pub fn load(path: &Path, options: ValidationOptions) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".to_owned());
        Self::parse(&name, &text, options).map_err(|e| match e {
            CliError::Parse { message, .. } => CliError::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    pub fn parse(name: &str, text: &str, options: ValidationOptions) -> Result<Self, CliError> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| CliError::Parse {
            path: name.into(),
            message: e.message().to_owned(),
        })?;
        Self::validate(name, raw, options)
    }

    fn validate(
        name: &str,
        raw: RawScenario,
        options: ValidationOptions,
    ) -> Result<Self, CliError> {
        let kind = JanusKind::from_name(&raw.kind).ok_or_else(|| {
            CliError::validation(
                "validation.kind",
                format!(
                    "unknown kind {:?}; expected pair_ab, square_a2, single_beta or pair_beta",
                    raw.kind
                ),
            )
        })?;

        let beta = match raw.beta {
            Some(b) => complex(b, "beta", "validation.beta")?,
            None => Complex64::new(0.0, 0.0),
        };
        if !kind.uses_beta() && beta != Complex64::new(0.0, 0.0) {
            return Err(CliError::validation(
                "validation.beta",
                format!("kind {kind} takes no beta"),
            ));
        }
        if beta.norm() > BETA_LIMIT && !options.allow_large_beta {
            return Err(CliError::validation(
                "validation.beta",
                format!(
                    "|beta| = {} exceeds {BETA_LIMIT}; pass --allow-large-beta to override",
                    beta.norm()
                ),
            ));
        }

        let g = finite("g", "validation.g", raw.g)?;
        let kappa = finite("kappa", "validation.kappa", raw.kappa)?;
        if kappa < 0.0 {
            return Err(CliError::validation(
                "validation.kappa",
                format!("kappa must be non-negative, got {kappa}"),
            ));
        }

        if raw.cutoffs.len() != kind.required_modes() {
            return Err(CliError::validation(
                "validation.cutoffs",
                format!(
                    "kind {kind} needs {} cutoff(s), got {}",
                    kind.required_modes(),
                    raw.cutoffs.len()
                ),
            ));
        }
        if let Some(&c) = raw.cutoffs.iter().find(|&&c| c < 2) {
            return Err(CliError::validation(
                "validation.cutoffs",
                format!("cutoffs must be at least 2, got {c}"),
            ));
        }

        let sector = match (raw.sector, kind) {
            (None, _) => None,
            (Some(RawSector::Charge(q)), JanusKind::PairAb | JanusKind::PairBeta) => {
                Some(Sector::Difference(q))
            }
            (Some(RawSector::Parity(p)), JanusKind::SquareA2) => {
                Some(Sector::Parity(parity(&p, "validation.sector")?))
            }
            (Some(_), JanusKind::SingleBeta) => {
                return Err(CliError::validation(
                    "validation.sector",
                    "single_beta conserves no charge; remove sector",
                ))
            }
            (Some(_), JanusKind::SquareA2) => {
                return Err(CliError::validation(
                    "validation.sector",
                    "square_a2 sectors are \"even\" or \"odd\"",
                ))
            }
            (Some(_), _) => {
                return Err(CliError::validation(
                    "validation.sector",
                    "pair sectors are integers n_a - n_b",
                ))
            }
        };
        if kind.has_charge() && kappa > 0.0 && sector.is_none() {
            return Err(CliError::validation(
                "validation.sector",
                format!("kind {kind} has one steady state per sector; set sector"),
            ));
        }

        let t_max = finite("t_max", "validation.t_max", raw.t_max)?;
        if t_max <= 0.0 {
            return Err(CliError::validation(
                "validation.t_max",
                format!("t_max must be positive, got {t_max}"),
            ));
        }
        if raw.n_samples < 2 {
            return Err(CliError::validation(
                "validation.n_samples",
                format!("n_samples must be at least 2, got {}", raw.n_samples),
            ));
        }
        let tol = validate_tol(raw.tol)?;

        let reference = raw.reference.map(resolve_reference).transpose()?;
        if let Some(r) = &reference {
            let needs = match r {
                ReferenceRequest::PairCoherent { .. } | ReferenceRequest::Tmss { .. } => 2,
                _ => 1,
            };
            if kind.required_modes() != needs {
                return Err(CliError::validation(
                    "validation.reference",
                    format!("reference does not fit the modes of kind {kind}"),
                ));
            }
            let implicit = matches!(
                r,
                ReferenceRequest::PairCoherent { zeta: None, .. }
                    | ReferenceRequest::Cat { alpha: None, .. }
            );
            if implicit && kappa == 0.0 {
                return Err(CliError::validation(
                    "validation.reference",
                    "zeta/alpha default to -2ig/kappa and need kappa > 0",
                ));
            }
        }

        Ok(Self {
            name: name.to_owned(),
            kind,
            beta,
            g,
            kappa,
            cutoffs: raw.cutoffs,
            sector,
            t_max,
            n_samples: raw.n_samples,
            tol,
            reference,
        })
    }

    /// `n_samples` equally spaced times on `[0, t_max]`.
    pub fn time_grid(&self) -> Vec<f64> {
        let last = (self.n_samples - 1) as f64;
        (0..self.n_samples)
            .map(|k| {
                if k + 1 == self.n_samples {
                    self.t_max
                } else {
                    self.t_max * k as f64 / last
                }
            })
            .collect()
    }
}

pub fn validate_tol(tol: f64) -> Result<f64, CliError> {
    if tol.is_finite() && tol > 0.0 {
        Ok(tol)
    } else {
        Err(CliError::validation(
            "validation.tol",
            format!("tol must be positive and finite, got {tol}"),
        ))
    }
}

fn resolve_reference(raw: RawReference) -> Result<ReferenceRequest, CliError> {
    let code = "validation.reference";
    Ok(match raw {
        RawReference::PairCoherent { zeta, q } => ReferenceRequest::PairCoherent {
            zeta: zeta.map(|z| complex(z, "zeta", code)).transpose()?,
            q,
        },
        RawReference::Tmss { r, phase } => ReferenceRequest::Tmss {
            r: finite("r", code, r)?,
            phase: finite("phase", code, phase)?,
        },
        RawReference::Cat { alpha, parity: p } => ReferenceRequest::Cat {
            alpha: alpha.map(|a| complex(a, "alpha", code)).transpose()?,
            parity: p.map(|p| parity(&p, code)).transpose()?,
        },
        RawReference::SqueezedVacuum { r, phase } => ReferenceRequest::SqueezedVacuum {
            r: finite("r", code, r)?,
            phase: finite("phase", code, phase)?,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAIR: &str = r#"
kind = "pair_ab"
g = 0.5
kappa = 1.0
cutoffs = [24, 24]
sector = 0
t_max = 5.0
n_samples = 11
tol = 1e-10

[reference]
kind = "pair_coherent"
"#;

    fn parse(text: &str) -> Result<Scenario, CliError> {
        Scenario::parse("test", text, ValidationOptions::default())
    }

    fn code(text: &str) -> &'static str {
        parse(text).unwrap_err().code()
    }

    #[test]
    fn parses_pair_scenario() {
        let s = parse(PAIR).unwrap();
        assert_eq!(s.kind, JanusKind::PairAb);
        assert_eq!(s.sector, Some(Sector::Difference(0)));
        assert_eq!(
            s.reference,
            Some(ReferenceRequest::PairCoherent {
                zeta: None,
                q: None
            })
        );
        let grid = s.time_grid();
        assert_eq!(grid.len(), 11);
        assert_eq!(grid[0], 0.0);
        assert_eq!(grid[10], 5.0);
    }

    #[test]
    fn parity_sector() {
        let text = r#"
kind = "square_a2"
g = 0.5
kappa = 1.0
cutoffs = [30]
sector = "odd"
t_max = 1.0
n_samples = 2
tol = 1e-8
"#;
        assert_eq!(
            parse(text).unwrap().sector,
            Some(Sector::Parity(Parity::Odd))
        );
        assert_eq!(
            code(&text.replace("\"odd\"", "\"up\"")),
            "validation.sector"
        );
        assert_eq!(code(&text.replace("\"odd\"", "1")), "validation.sector");
    }

    #[test]
    fn validation_codes() {
        assert_eq!(
            code(&PAIR.replace("kappa = 1.0", "kappa = -1.0")),
            "validation.kappa"
        );
        assert_eq!(code(&PAIR.replace("pair_ab", "triple")), "validation.kind");
        assert_eq!(
            code(&PAIR.replace("[24, 24]", "[24]")),
            "validation.cutoffs"
        );
        assert_eq!(
            code(&PAIR.replace("[24, 24]", "[24, 1]")),
            "validation.cutoffs"
        );
        assert_eq!(
            code(&PAIR.replace("n_samples = 11", "n_samples = 1")),
            "validation.n_samples"
        );
        assert_eq!(
            code(&PAIR.replace("tol = 1e-10", "tol = 0.0")),
            "validation.tol"
        );
        assert_eq!(
            code(&PAIR.replace("t_max = 5.0", "t_max = -1.0")),
            "validation.t_max"
        );
        assert_eq!(code(&PAIR.replace("g = 0.5", "g = nan")), "validation.g");
        assert_eq!(code(&PAIR.replace("sector = 0\n", "")), "validation.sector");
        assert_eq!(
            code(&PAIR.replace("g = 0.5", "g = 0.5\nbeta = [0.1, 0.0]")),
            "validation.beta"
        );
        assert_eq!(code(&PAIR.replace("g = 0.5", "g = \"x\"")), "config.parse");
        assert_eq!(
            code(&PAIR.replace("g = 0.5", "g = 0.5\ngamma = 1")),
            "config.parse"
        );
    }

    #[test]
    fn beta_limit() {
        let text = PAIR
            .replace("pair_ab", "pair_beta")
            .replace("g = 0.5", "g = 0.5\nbeta = [0.4, 0.4]");
        assert_eq!(code(&text), "validation.beta");
        let allowed = Scenario::parse(
            "t",
            &text,
            ValidationOptions {
                allow_large_beta: true,
            },
        )
        .unwrap();
        assert_eq!(allowed.beta, Complex64::new(0.4, 0.4));
    }

    #[test]
    fn sector_optional_without_dissipation() {
        let text = PAIR
            .replace("kappa = 1.0", "kappa = 0.0")
            .replace("sector = 0\n", "")
            .replace("kind = \"pair_coherent\"", "kind = \"tmss\"\nr = 0.5");
        let s = parse(&text).unwrap();
        assert_eq!(s.sector, None);
        assert_eq!(
            s.reference,
            Some(ReferenceRequest::Tmss { r: 0.5, phase: 0.0 })
        );
        // implicit zeta needs kappa > 0
        assert_eq!(
            code(&PAIR.replace("kappa = 1.0", "kappa = 0.0")),
            "validation.reference"
        );
    }

    #[test]
    fn reference_must_fit_modes() {
        let text = PAIR.replace("kind = \"pair_coherent\"", "kind = \"cat\"");
        assert_eq!(code(&text), "validation.reference");
    }
}
