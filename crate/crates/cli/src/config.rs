use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toral_rigidity::cocycle::{coboundary_construct, FieldTerm};
use toral_rigidity::fixtures::phi_field;
use toral_rigidity::{CircleCocycle, CocycleError, FourierField, GeneratorSet, ProductGrid};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: toml::de::Error },
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), reason: reason.into() }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub action: ActionConfig,
    #[serde(default)]
    pub cocycle: CocycleConfig,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub certify: CertifyConfig,
    #[serde(default)]
    pub outputs: Outputs,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ActionConfig {
    /// One matrix per generator, each a list of rows.
    pub generators: Vec<Vec<Vec<i64>>>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Recipe {
    Identity,
    /// `φ(α(a)x)∘φ(x)⁻¹` with the standard `φ` of amplitude `eps`.
    Coboundary,
    /// Rotation by `theta` on every generator.
    Rotation,
    /// `φ(α(a)x)∘R_θ∘φ(x)⁻¹`.
    ConjugatedRotation,
}

/// Fourier coefficient `(index, re, im)`; the index lists the base
/// frequencies followed by the fiber frequency.
pub type Triple = (Vec<i64>, f64, f64);

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    #[serde(default)]
    pub shift: f64,
    #[serde(default)]
    pub twist: Vec<i64>,
    #[serde(default)]
    pub terms: Vec<Triple>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CocycleConfig {
    pub recipe: Option<Recipe>,
    pub eps: Option<f64>,
    pub theta: Option<f64>,
    pub conjugator: Option<FieldConfig>,
    #[serde(default)]
    pub generators: Vec<FieldConfig>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Grids {
    pub base: usize,
    pub fiber: usize,
}

impl Default for Grids {
    fn default() -> Self {
        Grids { base: 16, fiber: 32 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Convergence tolerance for sections and holonomies.
    pub tol: f64,
    /// Threshold applied to every reported residual.
    pub residual: f64,
    /// Robustness safety factor.
    pub safety: f64,
    pub search_bound: i64,
    pub witness_bound: i64,
    pub k_max: u32,
    pub l_max: u32,
    pub max_iter: usize,
    pub samples: usize,
    pub path_samples: usize,
    pub cone_samples: usize,
    pub robustness_samples: usize,
    pub norm_cap: i64,
    pub max_period: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol: 1e-8,
            residual: 1e-6,
            safety: 0.1,
            search_bound: 8,
            witness_bound: 3,
            k_max: 4,
            l_max: 6,
            max_iter: 200,
            samples: 32,
            path_samples: 16,
            cone_samples: 200,
            robustness_samples: 50,
            norm_cap: 60,
            max_period: 6,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertifyConfig {
    /// Element for the single bunching check; the first chamber
    /// representative when absent.
    pub element: Option<Vec<i64>>,
    /// Bunching exponent; `inf` is accepted.
    pub r: f64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig { element: None, r: 1.0 }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    /// Report file name inside the output directory.
    pub report: Option<PathBuf>,
    pub diagram: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse { source, .. } => ConfigError::Parse { path: path.to_path_buf(), source },
            e => e,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|source| ConfigError::Parse { path: PathBuf::from("<config>"), source })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (name, n) in [("grids.base", self.grids.base), ("grids.fiber", self.grids.fiber)] {
            if n < 16 || !n.is_power_of_two() {
                return Err(invalid(name, format!("{n} is not a power of two ≥ 16")));
            }
        }
        let t = &self.tolerances;
        if !(1e-12..=1e-4).contains(&t.tol) {
            return Err(invalid("tolerances.tol", format!("{:e} outside [1e-12, 1e-4]", t.tol)));
        }
        if !(t.residual > 0.0) {
            return Err(invalid("tolerances.residual", "must be positive"));
        }
        if !(t.safety > 0.0 && t.safety <= 1.0) {
            return Err(invalid("tolerances.safety", "must lie in (0, 1]"));
        }
        if t.search_bound < 1 || t.witness_bound < 1 {
            return Err(invalid("tolerances.search_bound", "bounds must be ≥ 1"));
        }
        if t.k_max == 0 || t.l_max == 0 || t.max_iter == 0 {
            return Err(invalid("tolerances.k_max", "iteration caps must be ≥ 1"));
        }
        if !(self.certify.r >= 0.0) {
            return Err(invalid("certify.r", "must be ≥ 0"));
        }
        if self.action.generators.is_empty() {
            return Err(invalid("action.generators", "no generators"));
        }
        let d = self.action.generators[0].len();
        for (j, g) in self.action.generators.iter().enumerate() {
            if g.len() != d || g.iter().any(|row| row.len() != d) {
                return Err(invalid(format!("action.generators[{j}]"), format!("not a {d}×{d} matrix")));
            }
        }
        let k = self.action.generators.len();
        if let Some(a) = &self.certify.element {
            if a.len() != k {
                return Err(invalid("certify.element", format!("expected {k} entries, found {}", a.len())));
            }
        }
        let c = &self.cocycle;
        match (c.recipe, c.generators.is_empty()) {
            (Some(_), false) => return Err(invalid("cocycle", "give either recipe or generators, not both")),
            (None, false) if c.generators.len() != k => {
                return Err(invalid("cocycle.generators", format!("expected {k} fields, found {}", c.generators.len())))
            }
            (Some(r), true) => {
                if matches!(r, Recipe::Coboundary | Recipe::ConjugatedRotation) && c.eps.is_none() {
                    return Err(invalid("cocycle.eps", "required by this recipe"));
                }
                if matches!(r, Recipe::Rotation | Recipe::ConjugatedRotation) && c.theta.is_none() {
                    return Err(invalid("cocycle.theta", "required by this recipe"));
                }
            }
            _ => {}
        }
        let fields = c.conjugator.iter().map(|f| ("cocycle.conjugator".to_string(), f)).chain(
            c.generators.iter().enumerate().map(|(j, f)| (format!("cocycle.generators[{j}]"), f)),
        );
        for (name, f) in fields {
            if !f.twist.is_empty() && f.twist.len() != d {
                return Err(invalid(format!("{name}.twist"), format!("expected {d} entries")));
            }
            for (i, term) in f.terms.iter().enumerate() {
                if term.0.len() != d + 1 {
                    return Err(invalid(format!("{name}.terms[{i}]"), format!("index needs {} entries (base then fiber)", d + 1)));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> ProductGrid {
        ProductGrid::new(self.grids.base, self.grids.fiber)
    }

    pub fn generator_set(&self) -> Result<GeneratorSet, toral_rigidity::ActionError> {
        GeneratorSet::from_rows(&self.action.generators)
    }

    pub fn build_cocycle(&self, gens: GeneratorSet) -> Result<CircleCocycle, CocycleError> {
        let c = &self.cocycle;
        let (d, k) = (gens.dim(), gens.rank());
        if !c.generators.is_empty() {
            let cores = c.generators.iter().map(field).collect();
            return match &c.conjugator {
                Some(phi) => CircleCocycle::conjugated(gens, field(phi), cores),
                None => CircleCocycle::new(gens, cores),
            };
        }
        let eps = c.eps.unwrap_or(0.0);
        let theta = c.theta.unwrap_or(0.0);
        match c.recipe.unwrap_or(Recipe::Identity) {
            Recipe::Identity => Ok(CircleCocycle::identity(gens)),
            Recipe::Rotation => CircleCocycle::new(gens, vec![FourierField::rotation(theta); k]),
            Recipe::Coboundary => coboundary_construct(phi_field(eps, d), vec![FourierField::identity(); k], gens),
            Recipe::ConjugatedRotation => coboundary_construct(phi_field(eps, d), vec![FourierField::rotation(theta); k], gens),
        }
    }
}

fn field(f: &FieldConfig) -> FourierField {
    FourierField {
        shift: f.shift,
        twist: f.twist.clone(),
        terms: f
            .terms
            .iter()
            .map(|(idx, re, im)| {
                let (n, m) = idx.split_last().expect("validated index length");
                FieldTerm { m: m.to_vec(), n: *n, re: *re, im: *im }
            })
            .collect(),
    }
}
