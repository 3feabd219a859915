//! Shared helpers: the default config, edited and written to a temp dir.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// The default config with instance paths made absolute.
pub fn default_json() -> Value {
    let text = std::fs::read_to_string(data_dir().join("default.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    for f in v["dg_instances"]["files"].as_array_mut().unwrap() {
        *f = Value::String(data_dir().join(f.as_str().unwrap()).display().to_string());
    }
    v
}

pub fn write_config(dir: &Path, v: &Value) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

pub fn ncmukai(args: &[&str], config: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncmukai")).args(args).arg("--config").arg(config).output().expect("binary runs")
}
