//! Curved DGA instance files.
//!
//! ```json
//! {
//!   "name": "prototype",
//!   "basis": [{"name": "1", "degree": 0}, ...],
//!   "mul": [[i, j, k, [re, im]], ...],
//!   "d":   [[row, col, [re, im]], ...],
//!   "c":   [[re, im], ...],
//!   "connection": [[re, im], ...]
//! }
//! ```
//!
//! `mul` lists `e_i e_j ∋ v e_k`, `d` lists `d(e_col) ∋ v e_row`, and `c` is the
//! curvature in the basis. The optional `connection` is an element `A` such that
//! twisting by `−A` gives a flat algebra; it seeds rank-one twisted complexes
//! `𝔼 = d − A`.

use std::path::Path;

use ncmukai_core::dg::{CurvedDGA, Elem};
use ncmukai_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::AppError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisEntry {
    pub name: String,
    pub degree: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub name: String,
    pub basis: Vec<BasisEntry>,
    pub mul: Vec<(usize, usize, usize, [f64; 2])>,
    pub d: Vec<(usize, usize, [f64; 2])>,
    pub c: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub connection: Option<Vec<[f64; 2]>>,
}

/// A validated instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub name: String,
    pub alg: CurvedDGA,
    pub connection: Option<Elem>,
}

fn cx(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

fn pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

impl InstanceFile {
    pub fn from_dga(name: &str, alg: &CurvedDGA, connection: Option<&[C64]>) -> Self {
        let n = alg.dim();
        let basis = alg.names.iter().zip(&alg.degrees).map(|(s, &d)| BasisEntry { name: s.clone(), degree: d }).collect();
        let mut mul = Vec::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v = alg.structure(i, j, k);
                    if v != C64::new(0.0, 0.0) {
                        mul.push((i, j, k, pair(v)));
                    }
                }
            }
        }
        let mut d = Vec::new();
        for col in 0..n {
            for row in 0..n {
                let v = alg.d[(row, col)];
                if v != C64::new(0.0, 0.0) {
                    d.push((row, col, pair(v)));
                }
            }
        }
        InstanceFile {
            name: name.to_string(),
            basis,
            mul,
            d,
            c: alg.c.iter().map(|&z| pair(z)).collect(),
            connection: connection.map(|a| a.iter().map(|&z| pair(z)).collect()),
        }
    }

    /// Build and validate every curved-DGA axiom.
    pub fn build(&self) -> ncmukai_core::Result<Instance> {
        let names = self.basis.iter().map(|b| b.name.clone()).collect();
        let degrees = self.basis.iter().map(|b| b.degree).collect();
        let mul: Vec<_> = self.mul.iter().map(|&(i, j, k, v)| (i, j, k, cx(v))).collect();
        let d: Vec<_> = self.d.iter().map(|&(r, c, v)| (r, c, cx(v))).collect();
        let alg = CurvedDGA::new(names, degrees, &mul, &d, self.c.iter().map(|&v| cx(v)).collect())?;
        let connection = match &self.connection {
            Some(a) if a.len() != alg.dim() => {
                return Err(ncmukai_core::Error::Dimension(format!("connection has {} coefficients, basis has {}", a.len(), alg.dim())))
            }
            Some(a) => Some(a.iter().map(|&v| cx(v)).collect()),
            None => None,
        };
        Ok(Instance { name: self.name.clone(), alg, connection })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance serialises");
        s.push('\n');
        s
    }
}

pub fn load(path: &Path) -> Result<Instance, AppError> {
    let err = |m: String| AppError::Instance { path: path.display().to_string(), message: m };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let file: InstanceFile = serde_path_to_error::deserialize(de).map_err(|e| err(format!("at {}: {}", e.path(), e.inner())))?;
    file.build().map_err(|e| err(e.to_string()))
}

pub fn save(path: &Path, file: &InstanceFile) -> Result<(), AppError> {
    std::fs::write(path, file.to_json()).map_err(|e| AppError::Output { path: path.display().to_string(), message: e.to_string() })
}
