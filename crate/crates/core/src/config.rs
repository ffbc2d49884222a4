//! TOML experiment configuration: a scenario description (preset name or
//! explicit domain + generators) followed by an ordered experiment list.
//!
//! Matrices are flat row-major arrays with a declared dimension, so a config
//! is writable from any language without a schema engine.

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;

use crate::domain::ConvexDomain;
use crate::error::{Error, Result};
use crate::group::{preset, GroupScenario};
use crate::projective::ProjectiveMap;

/// Word-length cap used when an explicit scenario omits `max_word_length`.
pub const DEFAULT_MAX_WORD_LENGTH: usize = 64;
/// Enumeration radius used when an explicit scenario omits `max_radius`.
pub const DEFAULT_MAX_RADIUS: f64 = 12.0;
/// Random-sample count used when a property experiment omits `samples`.
pub const DEFAULT_PROPERTY_SAMPLES: usize = 100;

/// Top-level parsed config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for every randomized check in the run.
    #[serde(default)]
    pub seed: u64,
    pub scenario: ScenarioConfig,
    /// Experiments execute in file order.
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

/// Either `preset = "name"` or an explicit domain + group description.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub preset: Option<String>,
    pub domain: Option<DomainConfig>,
    pub group: Option<GroupConfig>,
    pub basepoint: Option<Vec<f64>>,
    pub max_word_length: Option<usize>,
    pub max_radius: Option<f64>,
}

/// Domain description block.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainConfig {
    /// Unit Euclidean ball (the Klein model).
    Ball { dim: usize },
    /// `{x : (x-center)^T shape (x-center) < 1}` for SPD `shape`.
    Ellipsoid { center: Vec<f64>, shape: MatrixConfig },
    /// Scaled p-norm ball.
    PnormBall { dim: usize, exponent: f64, scale: f64 },
    /// Standard open simplex.
    Simplex { dim: usize },
    /// Intersection of halfspaces `normals[i] . x < offsets[i]`.
    Polytope {
        normals: MatrixConfig,
        offsets: Vec<f64>,
    },
}

/// Flat row-major matrix with declared shape.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixConfig {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<f64>,
}

impl MatrixConfig {
    /// Validates the entry count and rebuilds the matrix; `field` names the
    /// config location in diagnostics.
    pub fn to_matrix(&self, field: &str) -> Result<DMatrix<f64>> {
        let want = self.rows * self.cols;
        if self.entries.len() != want {
            return Err(Error::Config(format!(
                "{field}: expected {want} entries for a {}x{} matrix, found {}",
                self.rows,
                self.cols,
                self.entries.len()
            )));
        }
        check_finite(&self.entries, field)?;
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &self.entries))
    }
}

/// Generator block: square matrices of size `generator_dim`, row-major.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub free_group: bool,
    pub generator_dim: usize,
    pub generators: Vec<Vec<f64>>,
}

/// One `[[experiment]]` block; `name` selects the operation suite and the
/// remaining keys are its parameters. Omitted parameters fall back to
/// scenario limits or the documented defaults.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    /// Hilbert distance between two explicit interior points.
    Distance { x: Vec<f64>, y: Vec<f64> },
    /// Orbit ball enumeration with per-shell counts.
    OrbitBall {
        radius: Option<f64>,
        budget: Option<usize>,
    },
    /// Critical exponent by log-count slope and Poincare bracket.
    CriticalExponent {
        radius: Option<f64>,
        budget: Option<usize>,
    },
    /// Patterson-Sullivan density atoms plus conformality / unit-mass audits.
    PsMeasure {
        radius: Option<f64>,
        budget: Option<usize>,
        /// Strictly supercritical weight; default `1.02 * delta_hat`.
        s: Option<f64>,
        /// Second viewpoint for the conformality audit; default basepoint
        /// nudged toward the first orbit direction.
        viewpoint: Option<Vec<f64>>,
        far_atoms: Option<usize>,
    },
    /// Shadow lemma ratio audit at r and r+1, plus the Busemann sandwich.
    ShadowAudit {
        radius: Option<f64>,
        budget: Option<usize>,
        shadow_radius: Option<f64>,
        band: Option<[f64; 2]>,
        max_audited: Option<usize>,
    },
    /// Primitive closed geodesic counts on a length grid.
    ClosedGeodesics {
        max_word_length: Option<usize>,
        grid_points: Option<usize>,
        budget: Option<usize>,
    },
    /// Orbit counting N(t) with plateau normalization.
    OrbitCount {
        radii: Option<Vec<f64>>,
        x: Option<Vec<f64>>,
        y: Option<Vec<f64>>,
        budget: Option<usize>,
    },
    /// Paired-endpoint equidistribution with boundary caps given as group
    /// words anchoring shadow cones.
    Equidistribution {
        radii: Option<Vec<f64>>,
        cap_words: Option<[Vec<i32>; 4]>,
        cap_radius: Option<f64>,
        budget: Option<usize>,
    },
    /// Random-sample metric axiom checks (symmetry, triangle, separation).
    MetricAxioms { samples: Option<usize> },
    /// Busemann cocycle and along-ray identities on random configurations.
    BusemannIdentities { samples: Option<usize> },
    /// Every property experiment plus cross-module consistency checks.
    PropertySuite { samples: Option<usize> },
}

impl ExperimentConfig {
    /// The kebab-case experiment name as written in config files.
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::Distance { .. } => "distance",
            ExperimentConfig::OrbitBall { .. } => "orbit-ball",
            ExperimentConfig::CriticalExponent { .. } => "critical-exponent",
            ExperimentConfig::PsMeasure { .. } => "ps-measure",
            ExperimentConfig::ShadowAudit { .. } => "shadow-audit",
            ExperimentConfig::ClosedGeodesics { .. } => "closed-geodesics",
            ExperimentConfig::OrbitCount { .. } => "orbit-count",
            ExperimentConfig::Equidistribution { .. } => "equidistribution",
            ExperimentConfig::MetricAxioms { .. } => "metric-axioms",
            ExperimentConfig::BusemannIdentities { .. } => "busemann-identities",
            ExperimentConfig::PropertySuite { .. } => "property-suite",
        }
    }
}

fn check_finite(values: &[f64], field: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::Config(format!(
            "{field}: entry {i} is not finite"
        ))),
        None => Ok(()),
    }
}

impl RunConfig {
    /// Parses a TOML document; syntax and type errors carry the parser's
    /// line/field diagnostic.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }
}

impl DomainConfig {
    pub fn build(&self) -> Result<ConvexDomain> {
        match self {
            DomainConfig::Ball { dim } => Ok(ConvexDomain::unit_ball(*dim)),
            DomainConfig::Ellipsoid { center, shape } => {
                check_finite(center, "scenario.domain.center")?;
                let m = shape.to_matrix("scenario.domain.shape")?;
                ConvexDomain::ellipsoid(DVector::from_column_slice(center), m)
            }
            DomainConfig::PnormBall {
                dim,
                exponent,
                scale,
            } => ConvexDomain::pnorm_ball(*dim, *exponent, *scale),
            DomainConfig::Simplex { dim } => Ok(ConvexDomain::simplex(*dim)),
            DomainConfig::Polytope { normals, offsets } => {
                let m = normals.to_matrix("scenario.domain.normals")?;
                check_finite(offsets, "scenario.domain.offsets")?;
                let rows: Vec<DVector<f64>> =
                    (0..m.nrows()).map(|i| m.row(i).transpose()).collect();
                ConvexDomain::halfspace_polytope(rows, offsets.clone())
            }
        }
    }
}

impl ScenarioConfig {
    /// Builds the scenario: a preset by name, or domain + group + basepoint
    /// assembled from the explicit blocks. Explicit limits override preset
    /// limits when both are given.
    pub fn build(&self) -> Result<GroupScenario> {
        if let Some(name) = &self.preset {
            if self.domain.is_some() || self.group.is_some() {
                return Err(Error::Config(
                    "scenario: give either `preset` or explicit domain/group blocks, not both"
                        .into(),
                ));
            }
            let mut s = preset(name)?;
            if let Some(bp) = &self.basepoint {
                check_finite(bp, "scenario.basepoint")?;
                let bp = DVector::from_column_slice(bp);
                if !s.domain.contains(&bp) {
                    return Err(Error::Config(
                        "scenario.basepoint: not interior to the preset domain".into(),
                    ));
                }
                s.basepoint = bp;
            }
            if let Some(l) = self.max_word_length {
                s.max_word_length = l;
            }
            if let Some(r) = self.max_radius {
                s.max_radius = r;
            }
            return Ok(s);
        }

        let domain = self
            .domain
            .as_ref()
            .ok_or_else(|| Error::Config("scenario.domain: missing (no preset named)".into()))?
            .build()?;
        let group = self
            .group
            .as_ref()
            .ok_or_else(|| Error::Config("scenario.group: missing (no preset named)".into()))?;
        let basepoint = self
            .basepoint
            .as_ref()
            .ok_or_else(|| Error::Config("scenario.basepoint: missing".into()))?;
        check_finite(basepoint, "scenario.basepoint")?;

        let n = group.generator_dim;
        if n < 2 {
            return Err(Error::Config(format!(
                "scenario.group.generator_dim: must be at least 2, got {n}"
            )));
        }
        if group.generators.is_empty() {
            return Err(Error::Config(
                "scenario.group.generators: empty list".into(),
            ));
        }
        let mut maps = Vec::with_capacity(group.generators.len());
        for (i, flat) in group.generators.iter().enumerate() {
            let field = format!("scenario.group.generators[{i}]");
            if flat.len() != n * n {
                return Err(Error::Config(format!(
                    "{field}: expected {} entries for a {n}x{n} matrix, found {}",
                    n * n,
                    flat.len()
                )));
            }
            check_finite(flat, &field)?;
            maps.push(ProjectiveMap::new(DMatrix::from_row_slice(n, n, flat))?);
        }

        GroupScenario::new(
            domain,
            maps,
            group.free_group,
            DVector::from_column_slice(basepoint),
            self.max_word_length.unwrap_or(DEFAULT_MAX_WORD_LENGTH),
            self.max_radius.unwrap_or(DEFAULT_MAX_RADIUS),
        )
    }
}
