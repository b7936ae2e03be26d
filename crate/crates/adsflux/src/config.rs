//! Scenario configuration for the command-line runner: which representation
//! pair, which mesh and isotopy family, which loop classes, and the
//! tolerances and step controls of every suite check. Configurations load
//! from JSON with unknown keys rejected, so that a typo fails loudly instead
//! of silently falling back to a default.

use crate::lie::{GroupElt, IsomPair, Mat2};
use crate::rep::{LoopWord, RepPair};
use serde::{Deserialize, Serialize};

/// Which representation pair to run against. Matrices are row-major 2×2
/// entries, normalized into PSL(2,R) on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RepSpec {
    /// The diagonal representation of the regular octagon pairings.
    Octagon,
    /// Right factor conjugated by β.
    Conjugate { beta: [f64; 4] },
    /// Explicit generator images, one (left, right) matrix pair per standard
    /// generator a₁, b₁, a₂, b₂.
    Explicit { generators: Vec<ExplicitGen> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitGen {
    pub left: [f64; 4],
    pub right: [f64; 4],
}

/// The octagon mesh resolution used for discrete one-forms.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    pub rings: usize,
    pub boundary: usize,
}

/// Which one-parameter family of equivariant maps to build.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    /// Exact flow of the harmonic one-form with the given generator periods.
    Harmonic { periods: [f64; 4], duration: f64 },
    /// Hamiltonian flow of an invariant bump function.
    Hamiltonian { amplitude: f64, width: f64, duration: f64 },
}

/// Per-check tolerances of the verification suite; `--tol-scale` multiplies
/// all of them uniformly.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub embedding: f64,
    pub fiber: f64,
    pub sasaki: f64,
    pub curvature: f64,
    pub gauss_graph: f64,
    pub horizontality: f64,
    pub lagrangian: f64,
    pub induced_metric: f64,
    pub hamiltonian_flux: f64,
    pub flux_holonomy_rel: f64,
    pub anchored_holonomy: f64,
    pub relator: f64,
    pub form_periods: f64,
    pub cocloseness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            embedding: 1e-10,
            fiber: 1e-9,
            sasaki: 1e-6,
            curvature: 1e-3,
            gauss_graph: 1e-8,
            horizontality: 1e-7,
            lagrangian: 1e-6,
            induced_metric: 1e-8,
            hamiltonian_flux: 1e-4,
            flux_holonomy_rel: 0.02,
            anchored_holonomy: 1e-4,
            relator: 1e-9,
            form_periods: 1e-6,
            cocloseness: 1e-8,
        }
    }
}

/// Numerical step controls shared by the suites.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Controls {
    /// RK4 step of Hamiltonian flows.
    pub ode_step: f64,
    /// Central-difference step for section derivatives.
    pub fd_step: f64,
}

impl Default for Controls {
    fn default() -> Self {
        Controls { ode_step: 1e-3, fd_step: 1e-5 }
    }
}

/// Sample counts for the randomized property checks.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Samples {
    pub points: usize,
    pub frames: usize,
    pub squares: usize,
}

impl Default for Samples {
    fn default() -> Self {
        Samples { points: 1000, frames: 100, squares: 20 }
    }
}

/// Parameter grids of the two scans.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSpec {
    /// Square sizes for the curvature convergence scan.
    pub epsilons: Vec<f64>,
    /// Family durations for the flux–holonomy comparison scan.
    pub durations: Vec<f64>,
}

impl Default for ScanSpec {
    fn default() -> Self {
        ScanSpec { epsilons: vec![0.04, 0.02, 0.01], durations: vec![0.05, 0.1, 0.2] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub representation: RepSpec,
    pub mesh: MeshSpec,
    pub family: FamilySpec,
    /// Loop words in the standard generators, e.g. "a1", "b2'", "a1 b1".
    pub loops: Vec<String>,
    pub tolerances: Tolerances,
    pub controls: Controls,
    pub samples: Samples,
    pub scan: ScanSpec,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            representation: RepSpec::Octagon,
            mesh: MeshSpec { rings: 9, boundary: 64 },
            family: FamilySpec::Harmonic { periods: [1.0, 0.0, 0.0, 0.0], duration: 0.1 },
            loops: vec!["a1".into(), "b1".into(), "a2".into(), "b2".into()],
            tolerances: Tolerances::default(),
            controls: Controls::default(),
            samples: Samples::default(),
            scan: ScanSpec::default(),
        }
    }
}

#[derive(Debug)]
pub enum ConfigError {
    Io(std::io::Error),
    /// Schema violation: malformed JSON, unknown key, or wrong type.
    Schema(String),
    /// Well-formed but semantically invalid (nonpositive tolerance, bad loop
    /// word, degenerate mesh, …).
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Io(e) => write!(f, "cannot read config: {e}"),
            ConfigError::Schema(m) => write!(f, "config schema violation: {m}"),
            ConfigError::Invalid(m) => write!(f, "invalid config: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| ConfigError::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(ConfigError::Io)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let t = &self.tolerances;
        let named = [
            ("embedding", t.embedding),
            ("fiber", t.fiber),
            ("sasaki", t.sasaki),
            ("curvature", t.curvature),
            ("gauss_graph", t.gauss_graph),
            ("horizontality", t.horizontality),
            ("lagrangian", t.lagrangian),
            ("induced_metric", t.induced_metric),
            ("hamiltonian_flux", t.hamiltonian_flux),
            ("flux_holonomy_rel", t.flux_holonomy_rel),
            ("anchored_holonomy", t.anchored_holonomy),
            ("relator", t.relator),
            ("form_periods", t.form_periods),
            ("cocloseness", t.cocloseness),
        ];
        for (name, v) in named {
            if !(v > 0.0) {
                return Err(ConfigError::Invalid(format!("tolerance {name} must be positive")));
            }
        }
        if !(self.controls.ode_step > 0.0 && self.controls.fd_step > 0.0) {
            return Err(ConfigError::Invalid("step controls must be positive".into()));
        }
        if self.mesh.rings < 2 || self.mesh.boundary < 8 || self.mesh.boundary % 8 != 0 {
            return Err(ConfigError::Invalid(
                "mesh needs rings ≥ 2 and a boundary count that is a positive multiple of 8"
                    .into(),
            ));
        }
        if let FamilySpec::Hamiltonian { width, .. } = self.family {
            if !(width > 0.0) {
                return Err(ConfigError::Invalid("bump width must be positive".into()));
            }
        }
        for w in &self.loops {
            if LoopWord::parse(w).is_none() {
                return Err(ConfigError::Invalid(format!("cannot parse loop word {w:?}")));
            }
        }
        if let RepSpec::Explicit { generators } = &self.representation {
            if generators.len() != 4 {
                return Err(ConfigError::Invalid(
                    "explicit representation needs exactly 4 generator pairs".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn build_rep(&self) -> RepPair {
        let mat = |e: &[f64; 4]| GroupElt::new(Mat2::new(e[0], e[1], e[2], e[3]));
        match &self.representation {
            RepSpec::Octagon => RepPair::octagon(),
            RepSpec::Conjugate { beta } => RepPair::octagon().conjugate(mat(beta)),
            RepSpec::Explicit { generators } => {
                let gens: Vec<IsomPair> = generators
                    .iter()
                    .map(|g| IsomPair::new(mat(&g.left), mat(&g.right)))
                    .collect();
                RepPair::explicit([gens[0], gens[1], gens[2], gens[3]])
            }
        }
    }

    pub fn loop_words(&self) -> Vec<LoopWord> {
        self.loops
            .iter()
            .map(|w| LoopWord::parse(w).expect("validated loop word"))
            .collect()
    }
}
