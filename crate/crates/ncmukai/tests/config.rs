mod common;

use common::{data_dir, default_json};
use ncmukai::{AppError, Config};
use serde_json::json;

fn parse(v: &serde_json::Value) -> Result<Config, AppError> {
    Config::parse(&v.to_string(), &data_dir())
}

fn pointer(e: AppError) -> String {
    match e {
        AppError::Config { pointer, .. } => pointer,
        other => panic!("not a config error: {other}"),
    }
}

#[test]
fn default_config_is_valid() {
    let cfg = Config::load(&data_dir().join("default.json")).unwrap();
    assert_eq!(cfg.torus(1).unwrap().g, 1);
    assert_eq!(cfg.torus(2).unwrap().g, 2);
    assert_eq!(cfg.grid1().unwrap().dim, 2);
    assert_eq!(cfg.grid2().unwrap().dim, 4);
    let fine = cfg.refined();
    assert_eq!(fine.grid.h, cfg.grid.h / 2.0);
    assert_eq!(fine.grid.genus2.h, cfg.grid.genus2.h / 2.0);
    fine.validate().unwrap();
}

#[test]
fn optional_fields_take_defaults() {
    let mut v = default_json();
    v["spectral"].as_object_mut().unwrap().remove("max_iter");
    v["pairing"].as_object_mut().unwrap().remove("window");
    let cfg = parse(&v).unwrap();
    assert_eq!(cfg.spectral.max_iter, 400);
    assert_eq!(cfg.spectral.decay_tol, 1e-2);
    assert_eq!(cfg.spectral.w_samples, 5);
    assert_eq!(cfg.pairing.window, 4);
}

#[test]
fn errors_carry_json_pointers() {
    let cases = [
        ("/schema_version", json!({"schema_version": 9})),
        ("/grid/h", json!({"grid": {"h": -0.1}})),
        ("/grid/genus2/h", json!({"grid": {"genus2": {"R": 2.0, "h": 0.3}}})),
        ("/torus/1/B/2/3", json!({"torus": [null, {"B": [[0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.1], [0.0, 0.0, 0.0, 0.0]]}]})),
        ("/tolerances/overlap", json!({"tolerances": {"overlap": 0.0}})),
        ("/spectral/sector_list", json!({"spectral": {"sector_list": [0, 2]}})),
        ("/dg_instances/files/1", json!({"dg_instances": {"files": ["dg/prototype.json", "dg/missing.json"]}})),
    ];
    for (want, patch) in cases {
        let mut v = default_json();
        merge(&mut v, &patch);
        assert_eq!(pointer(parse(&v).unwrap_err()), want, "patch {patch}");
    }
    let mut v = default_json();
    v["grid"]["R"] = json!("three");
    assert_eq!(pointer(parse(&v).unwrap_err()), "/grid/R");
    let mut v = default_json();
    v["tolerances"]["tightest"] = json!(0.0);
    assert_eq!(pointer(parse(&v).unwrap_err()), "/tolerances/tightest");
}

#[test]
fn grid_overrides_apply_to_the_primary_grid() {
    let cfg = Config::load(&data_dir().join("default.json")).unwrap();
    let c = cfg.clone().with_grid(Some(0.05), Some(2.0)).unwrap();
    assert_eq!((c.grid.h, c.grid.r), (0.05, 2.0));
    assert_eq!(c.grid.genus2, cfg.grid.genus2);
    assert!(cfg.with_grid(Some(0.07), None).is_err());
}

/// Overlay `patch` on `v`; nulls in arrays leave entries untouched.
fn merge(v: &mut serde_json::Value, patch: &serde_json::Value) {
    match (v, patch) {
        (serde_json::Value::Object(a), serde_json::Value::Object(b)) => {
            for (k, p) in b {
                merge(a.entry(k.clone()).or_insert(serde_json::Value::Null), p);
            }
        }
        (serde_json::Value::Array(a), serde_json::Value::Array(b)) if b.iter().any(|x| x.is_null() || x.is_object()) => {
            for (x, p) in a.iter_mut().zip(b) {
                if !p.is_null() {
                    merge(x, p);
                }
            }
        }
        (slot, p) => *slot = p.clone(),
    }
}
