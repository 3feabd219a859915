//! JSON run configuration (`schema_version` 1).
//!
//! Parsing goes through `serde_path_to_error`, so every schema or validation
//! failure carries a JSON pointer to the key that caused it.

use std::path::{Path, PathBuf};

use ncmukai_core::field::Grid;
use ncmukai_core::torus::TorusData;
use serde::{Deserialize, Serialize};

use crate::error::AppError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    /// One entry per torus; suites pick the first entry of the genus they need.
    pub torus: Vec<TorusSpec>,
    pub grid: GridSpec,
    pub spectral: SpectralSpec,
    pub pairing: PairingSpec,
    pub dg_instances: DgSpec,
    pub tolerances: Tolerances,
    /// Directory that relative instance paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TorusSpec {
    pub g: usize,
    /// `lattice_basis[k]` is the k-th generator in V ≅ ℝ^{2g}.
    pub lattice_basis: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "R")]
    pub r: f64,
    pub h: f64,
    /// λ ranges over lattice points with every coordinate in `[-w, w]`.
    pub lambda_window: i64,
    pub boundary_tol: f64,
    pub tail_tol: f64,
    /// Coarser grid for the genus-two (four real dimensions) checks.
    pub genus2: CoarseGrid,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CoarseGrid {
    #[serde(rename = "R")]
    pub r: f64,
    pub h: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpectralSpec {
    pub num_eigenvalues: usize,
    /// Blade sectors k − l to scan.
    pub sector_list: Vec<i32>,
    pub eigensolver_budget: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_decay_tol")]
    pub decay_tol: f64,
    /// Number of sampled w on the Y side.
    #[serde(default = "default_w_samples")]
    pub w_samples: usize,
}

fn default_max_iter() -> usize {
    400
}

fn default_decay_tol() -> f64 {
    1e-2
}

fn default_w_samples() -> usize {
    5
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PairingSpec {
    pub quad_tol: f64,
    /// Lattice window of the V × Λ fields fed to α.
    #[serde(default = "default_pairing_window")]
    pub window: i64,
}

fn default_pairing_window() -> i64 {
    4
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DgSpec {
    pub files: Vec<String>,
    pub random_trials: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Coefficient-level identities of the polynomial-Gaussian calculus.
    pub exact: f64,
    /// Finite algebra: torus data, exterior algebra, twisted group algebra.
    pub algebra: f64,
    pub dg: f64,
    /// Classical-limit comparison against the Fourier model.
    pub classical: f64,
    /// `[𝕐⁰,Φ] + Φ² + 2πi B^{0,2}` on the genus-two grid.
    pub curvature: f64,
    /// `ℙ² − 2πi B^{0,2}` and `ℚ² + 2πi B^{0,2}` on the genus-two grid.
    pub curvature_square: f64,
    /// Central-difference σ identities.
    pub dbar_sigma: f64,
    /// `C` in `‖𝕏η‖ < C h²`.
    pub eta_constant: f64,
    /// Lower bound for `‖𝕏η₀⁰‖`.
    pub eta_floor: f64,
    pub alpha: f64,
    pub stokes: f64,
    /// Allowed `1 − overlap` between kernel vector and generator.
    pub overlap: f64,
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut s = String::new();
    for seg in path.iter() {
        s.push('/');
        match seg {
            Segment::Seq { index } => s.push_str(&index.to_string()),
            Segment::Map { key } => s.push_str(key),
            Segment::Enum { variant } => s.push_str(variant),
            Segment::Unknown => s.push('?'),
        }
    }
    if s.is_empty() {
        s.push('/');
    }
    s
}

fn bad(pointer: impl Into<String>, message: impl Into<String>) -> AppError {
    AppError::Config { pointer: pointer.into(), message: message.into() }
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, AppError> {
        let cfg = Config::load_unchecked(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Schema-checked but not validated; used to bootstrap the instance files
    /// a config refers to.
    pub fn load_unchecked(path: &Path) -> Result<Config, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad("/", format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Config::parse_unchecked(&text, &base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Config, AppError> {
        let cfg = Config::parse_unchecked(text, base_dir)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn parse_unchecked(text: &str, base_dir: &Path) -> Result<Config, AppError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let mut cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let p = pointer_of(e.path());
            bad(p, e.into_inner().to_string())
        })?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    /// Command-line grid overrides apply to the primary (genus-one) grid.
    pub fn with_grid(mut self, h: Option<f64>, r: Option<f64>) -> Result<Config, AppError> {
        if let Some(h) = h {
            self.grid.h = h;
        }
        if let Some(r) = r {
            self.grid.r = r;
        }
        self.validate()?;
        Ok(self)
    }

    /// Both grids at half the step.
    pub fn refined(&self) -> Config {
        let mut c = self.clone();
        c.grid.h *= 0.5;
        c.grid.genus2.h *= 0.5;
        c
    }

    pub fn validate(&self) -> Result<(), AppError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad("/schema_version", format!("unsupported schema version {} (expected {SCHEMA_VERSION})", self.schema_version)));
        }
        if self.torus.is_empty() {
            return Err(bad("/torus", "at least one torus is required"));
        }
        for (k, t) in self.torus.iter().enumerate() {
            let n = 2 * t.g;
            if t.lattice_basis.len() != n || t.lattice_basis.iter().any(|v| v.len() != n) {
                return Err(bad(format!("/torus/{k}/lattice_basis"), format!("expected {n} vectors of length {n}")));
            }
            if t.b.len() != n || t.b.iter().any(|r| r.len() != n) {
                return Err(bad(format!("/torus/{k}/B"), format!("expected a {n}x{n} matrix")));
            }
            for r in 0..n {
                for c in 0..n {
                    if (t.b[r][c] + t.b[c][r]).abs() > 1e-12 {
                        return Err(bad(format!("/torus/{k}/B/{r}/{c}"), "B must be antisymmetric"));
                    }
                }
            }
            TorusData::new(t.g, &t.lattice_basis, &t.b).map_err(|e| bad(format!("/torus/{k}"), e.to_string()))?;
        }
        let g = &self.grid;
        positive("/grid/R", g.r)?;
        positive("/grid/h", g.h)?;
        if g.h >= g.r {
            return Err(bad("/grid/h", "step must be smaller than the radius"));
        }
        if g.lambda_window < 0 {
            return Err(bad("/grid/lambda_window", "must be non-negative"));
        }
        positive("/grid/boundary_tol", g.boundary_tol)?;
        positive("/grid/tail_tol", g.tail_tol)?;
        positive("/grid/genus2/R", g.genus2.r)?;
        positive("/grid/genus2/h", g.genus2.h)?;
        if g.genus2.h >= g.genus2.r {
            return Err(bad("/grid/genus2/h", "step must be smaller than the radius"));
        }
        Grid::new(2, g.r, g.h).map_err(|e| bad("/grid/h", e.to_string()))?;
        Grid::new(4, g.genus2.r, g.genus2.h).map_err(|e| bad("/grid/genus2/h", e.to_string()))?;
        // lattice actions translate fields by whole grid steps
        if let Some(k) = self.torus.iter().position(|t| t.g == 1) {
            for (i, v) in self.torus[k].lattice_basis.iter().enumerate() {
                for (a, x) in v.iter().enumerate() {
                    let s = x / g.h;
                    if (s - s.round()).abs() > 1e-9 {
                        return Err(bad(format!("/torus/{k}/lattice_basis/{i}/{a}"), format!("not an integer multiple of grid.h = {}", g.h)));
                    }
                }
            }
        }
        let s = &self.spectral;
        if s.num_eigenvalues < 2 {
            return Err(bad("/spectral/num_eigenvalues", "at least two eigenpairs are needed to resolve a gap"));
        }
        if s.eigensolver_budget == 0 {
            return Err(bad("/spectral/eigensolver_budget", "must be positive"));
        }
        if s.max_iter < s.num_eigenvalues {
            return Err(bad("/spectral/max_iter", "must be at least num_eigenvalues"));
        }
        positive("/spectral/decay_tol", s.decay_tol)?;
        if s.sector_list.iter().any(|k| k.abs() > 1) {
            return Err(bad("/spectral/sector_list", "genus-one sectors lie in -1..=1"));
        }
        positive("/pairing/quad_tol", self.pairing.quad_tol)?;
        if self.pairing.window < 1 {
            return Err(bad("/pairing/window", "must be at least 1"));
        }
        for (k, f) in self.dg_instances.files.iter().enumerate() {
            let p = self.resolve(f);
            if !p.is_file() {
                return Err(bad(format!("/dg_instances/files/{k}"), format!("no such file {}", p.display())));
            }
        }
        let t = &self.tolerances;
        for (key, v) in [
            ("exact", t.exact),
            ("algebra", t.algebra),
            ("dg", t.dg),
            ("classical", t.classical),
            ("curvature", t.curvature),
            ("curvature_square", t.curvature_square),
            ("dbar_sigma", t.dbar_sigma),
            ("eta_constant", t.eta_constant),
            ("eta_floor", t.eta_floor),
            ("alpha", t.alpha),
            ("stokes", t.stokes),
            ("overlap", t.overlap),
        ] {
            positive(&format!("/tolerances/{key}"), v)?;
        }
        Ok(())
    }

    pub fn resolve(&self, file: &str) -> PathBuf {
        let p = Path::new(file);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// First configured torus of genus `g`.
    pub fn torus(&self, g: usize) -> Result<TorusData, AppError> {
        let (k, t) = self
            .torus
            .iter()
            .enumerate()
            .find(|(_, t)| t.g == g)
            .ok_or_else(|| bad("/torus", format!("no torus of genus {g} configured")))?;
        TorusData::new(t.g, &t.lattice_basis, &t.b).map_err(|e| bad(format!("/torus/{k}"), e.to_string()))
    }

    pub fn all_tori(&self) -> Vec<TorusData> {
        self.torus.iter().filter_map(|t| TorusData::new(t.g, &t.lattice_basis, &t.b).ok()).collect()
    }

    /// The genus-one grid on ℝ².
    pub fn grid1(&self) -> Result<Grid, AppError> {
        Grid::new(2, self.grid.r, self.grid.h).map_err(|e| bad("/grid", e.to_string()))
    }

    /// The genus-two grid on ℝ⁴.
    pub fn grid2(&self) -> Result<Grid, AppError> {
        Grid::new(4, self.grid.genus2.r, self.grid.genus2.h).map_err(|e| bad("/grid/genus2", e.to_string()))
    }
}

fn positive(pointer: &str, v: f64) -> Result<(), AppError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(bad(pointer, format!("must be a positive number, got {v}")))
    }
}
