//! Run configuration and field specifications loaded from JSON.

use std::path::Path;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use jleg::acs::{builtin, MatrixField};
use jleg::foliation::{FoliationConfig, LeafKind};
use jleg::solver::SolverConfig;
use jleg::{ACSField, Coeffs, JField};

use crate::expr;
use crate::CliError;

/// {"builtin": name, "params": {...}}, {"coeffs": {sigma, beta, gamma, delta}}
/// with expression strings, or {"matrix": [[..4..] x 4]} (acs-check only).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum AcsSpec {
    Builtin {
        builtin: String,
        #[serde(default)]
        params: BuiltinParams,
    },
    Coeffs {
        coeffs: CoeffExprs,
        #[serde(default)]
        radius: Option<f64>,
    },
    Matrix {
        matrix: [[f64; 4]; 4],
    },
}

impl Default for AcsSpec {
    fn default() -> Self {
        AcsSpec::Builtin { builtin: "standard".into(), params: BuiltinParams::default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuiltinParams {
    pub eps: Option<f64>,
    pub mode: Option<u64>,
    pub base: Option<Coeffs>,
    pub coeffs: Option<Coeffs>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffExprs {
    pub sigma: String,
    pub beta: String,
    pub gamma: String,
    pub delta: String,
}

fn need<T>(v: Option<T>, name: &str, builtin: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("builtin '{builtin}' needs params.{name}")))
}

impl AcsSpec {
    pub fn field(&self) -> Result<ACSField, CliError> {
        match self {
            AcsSpec::Builtin { builtin: name, params } => match name.as_str() {
                "standard" => Ok(ACSField::standard()),
                "constant" => Ok(ACSField::constant(need(params.coeffs, "coeffs", name)?)),
                "sigma_linear" => Ok(builtin::sigma_linear(need(params.eps, "eps", name)?)),
                "perturbed" => Ok(builtin::perturbed(
                    need(params.eps, "eps", name)?,
                    params.mode.unwrap_or(1),
                    params.base.unwrap_or(Coeffs::STANDARD),
                )),
                other => Err(CliError::Usage(format!(
                    "unknown builtin '{other}' (expected standard, constant, sigma_linear, perturbed)"
                ))),
            },
            AcsSpec::Coeffs { coeffs, radius } => {
                let parse = |s: &str| expr::parse(s).map(expr::Expr::into_field).map_err(|e| CliError::Usage(e.to_string()));
                let f = ACSField::new(parse(&coeffs.sigma)?, parse(&coeffs.beta)?, parse(&coeffs.gamma)?, parse(&coeffs.delta)?);
                Ok(match radius {
                    Some(r) => f.with_radius(*r),
                    None => f,
                })
            }
            AcsSpec::Matrix { .. } => {
                Err(CliError::Usage("matrix fields are only accepted by acs-check".into()))
            }
        }
    }

    /// Any spec as a J field for the identity checks.
    pub fn j_field(&self) -> Result<Box<dyn JField>, CliError> {
        match self {
            AcsSpec::Matrix { matrix } => {
                let m = Matrix4::from_fn(|i, j| matrix[i][j]);
                Ok(Box::new(MatrixField::new(move |_| m, 1.0)))
            }
            other => Ok(Box::new(other.field()?)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiskInput {
    /// Base point (x1, y1, x2, y2, t).
    pub p: [f64; 5],
    /// Plane chart coordinate w = re + i im.
    pub x: [f64; 2],
}

impl Default for DiskInput {
    fn default() -> Self {
        DiskInput { p: [0.0; 5], x: [0.0; 2] }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LeafInput {
    pub kind: LeafKind,
    pub x: [f64; 2],
    /// Base point (zeta) of a parallel leaf.
    pub p: [f64; 2],
}

impl Default for LeafInput {
    fn default() -> Self {
        LeafInput { kind: LeafKind::Polar, x: [0.0; 2], p: [0.0; 2] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub acs: AcsSpec,
    pub solver: SolverConfig,
    pub foliation: FoliationConfig,
    pub seed: u64,
    pub samples: Option<usize>,
    /// solve-disk: the disk through (p, x).
    pub disk: DiskInput,
    /// solve-disk: treat `disk` as a target (Q, Y) on Z and invert Psi first;
    /// intersect: use the disk whose slice point and tangent are exactly `patch`.
    pub invert: bool,
    /// solve-disk: choose r by halving until the smallness test passes.
    pub auto_dilate: bool,
    /// foliate / intersect: leaf parameters.
    pub leaf: LeafInput,
    /// leaf-of: the query point (x1, y1, x2, y2, t).
    pub q: Option<[f64; 5]>,
    /// intersect: the J-invariant patch.
    pub patch: DiskInput,
    /// verify-scenario: s5, cy or n5.
    pub scenario: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            acs: AcsSpec::default(),
            solver: SolverConfig::default(),
            foliation: FoliationConfig::default(),
            seed: 0,
            samples: None,
            disk: DiskInput::default(),
            invert: false,
            auto_dilate: false,
            leaf: LeafInput::default(),
            q: None,
            patch: DiskInput::default(),
            scenario: None,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn load_acs(path: &Path) -> Result<AcsSpec, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}
