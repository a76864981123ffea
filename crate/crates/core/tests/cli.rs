use std::process::Command;

use cartan_dynamics::cli::run_with_env;
use serde_json::Value;

const SCHEMA: &str = include_str!("../../../docs/report.schema.json");
const CORPUS: &str = include_str!("data/parser_corpus.txt");
const SIEGEL: &str = "z^2 + (-0.7373688780783197-0.6754902942615238i)z";

fn cli(args: &[&str]) -> (i32, Vec<u8>, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_with_env(std::iter::once("cartan").chain(args.iter().copied()), None, &mut out, &mut err);
    (code, out, String::from_utf8_lossy(&err).into_owned())
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = cli(args);
    let value = serde_json::from_slice(&out).unwrap_or_else(|e| panic!("{args:?}: {e}; stderr: {err}"));
    (code, value)
}

/// Checks `value` against the subset of JSON Schema used in docs:
/// `$ref`, `type`, `required`, `properties`, `items`, `enum`, `const`,
/// `oneOf`, `minimum`, `minItems`, `maxItems`.
fn validate(schema: &Value, root: &Value, value: &Value, path: &str) -> Result<(), String> {
    if let Some(r) = schema.get("$ref").and_then(Value::as_str) {
        let name = r.strip_prefix("#/$defs/").ok_or_else(|| format!("unsupported ref {r}"))?;
        return validate(&root["$defs"][name], root, value, path);
    }
    if let Some(options) = schema.get("oneOf").and_then(Value::as_array) {
        let matches = options.iter().filter(|o| validate(o, root, value, path).is_ok()).count();
        if matches != 1 {
            return Err(format!("{path}: {matches} oneOf branches match {value}"));
        }
    }
    if let Some(c) = schema.get("const") {
        if c != value {
            return Err(format!("{path}: expected {c}, found {value}"));
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            return Err(format!("{path}: {value} not in {options:?}"));
        }
    }
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => value.is_object(),
            "array" => value.is_array(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.is_u64() || value.is_i64(),
            "boolean" => value.is_boolean(),
            other => return Err(format!("unsupported type {other}")),
        };
        if !ok {
            return Err(format!("{path}: expected {t}, found {value}"));
        }
    }
    if let (Some(min), Some(v)) = (schema.get("minimum").and_then(Value::as_f64), value.as_f64()) {
        if v < min {
            return Err(format!("{path}: {v} below {min}"));
        }
    }
    if let Some(items) = value.as_array() {
        let len = items.len() as u64;
        if schema.get("minItems").and_then(Value::as_u64).is_some_and(|m| len < m)
            || schema.get("maxItems").and_then(Value::as_u64).is_some_and(|m| len > m)
        {
            return Err(format!("{path}: {len} items out of range"));
        }
        if let Some(item_schema) = schema.get("items") {
            for (i, item) in items.iter().enumerate() {
                validate(item_schema, root, item, &format!("{path}[{i}]"))?;
            }
        }
    }
    if let Some(obj) = value.as_object() {
        for key in schema.get("required").and_then(Value::as_array).into_iter().flatten() {
            let key = key.as_str().unwrap_or_default();
            if !obj.contains_key(key) {
                return Err(format!("{path}: missing {key}"));
            }
        }
        if let Some(props) = schema.get("properties").and_then(Value::as_object) {
            for (key, sub) in props {
                if let Some(v) = obj.get(key) {
                    validate(sub, root, v, &format!("{path}.{key}"))?;
                }
            }
        }
    }
    Ok(())
}

fn schema() -> Value {
    serde_json::from_str(SCHEMA).unwrap()
}

#[test]
fn analyze_examples() {
    let (code, r) = json(&["analyze", "z^2", "--space", "julia", "--format", "json"]);
    assert_eq!(code, 0);
    assert_eq!(r["verdict"], "Cartan");
    let (code, r) = json(&["analyze", "z^2-2", "--space", "julia"]);
    assert_eq!(code, 0);
    assert_eq!(r["verdict"], "NotCartan");
    assert_eq!(r["witnesses"][0]["point"], serde_json::json!([0.0, 0.0]));
    let (code, _, err) = cli(&["analyze", "z", "--space", "julia"]);
    assert_eq!(code, 1);
    assert!(err.contains("DegreeTooLow"), "{err}");
}

#[test]
fn undetermined_exits_with_two() {
    let (code, r) = json(&["analyze", SIEGEL, "--space", "julia", "--max-iter", "2000"]);
    assert_eq!(code, 2, "{r}");
    assert_eq!(r["verdict"], "Undetermined");
    assert_eq!(r["witnesses"][0]["membership"]["certificate"]["kind"], "None");
}

#[test]
fn reports_validate_against_the_schema() {
    let root = schema();
    for space in ["julia", "fatou", "sphere"] {
        for src in ["z^2", "z^2 - 2", "(z^2+1)/(2z)", "z^3 - 0.75z", "1/z^2"] {
            let (_, r) = json(&["analyze", src, "--space", space]);
            validate(&root, &root, &r, "$").unwrap_or_else(|e| panic!("{src} over {space}: {e}"));
        }
    }
    let (_, r) = json(&["analyze", SIEGEL, "--max-iter", "500"]);
    validate(&root, &root, &r, "$").unwrap();
    let entry = &root["$defs"]["critical_entry"];
    for src in ["z^2", "z^2 - 2", "z^3", "(z^2+1)/(2z)"] {
        let (_, list) = json(&["critical", src]);
        for item in list.as_array().unwrap() {
            validate(entry, &root, item, "$[]").unwrap_or_else(|e| panic!("{src}: {e}"));
        }
    }
}

#[test]
fn validator_rejects_broken_reports() {
    let root = schema();
    let (_, mut r) = json(&["analyze", "z^2"]);
    r["verdict"] = "Maybe".into();
    assert!(validate(&root, &root, &r, "$").is_err());
    let (_, mut r) = json(&["analyze", "z^2"]);
    r.as_object_mut().unwrap().remove("seed");
    assert!(validate(&root, &root, &r, "$").is_err());
}

#[test]
fn json_output_is_byte_stable() {
    for args in [
        &["analyze", "z^2 - 1", "--space", "fatou"][..],
        &["critical", "(z^2+1)/(2z)"],
        &["verify", "z^2", "--depth", "3"],
    ] {
        assert_eq!(cli(args).1, cli(args).1, "{args:?}");
    }
}

#[test]
fn critical_examples() {
    let (code, list) = json(&["critical", "z^2"]);
    assert_eq!(code, 0);
    assert_eq!(list.as_array().unwrap().len(), 2);
    assert_eq!(list[0]["point"], serde_json::json!([0.0, 0.0]));
    assert_eq!(list[1]["point"], "inf");
    for item in list.as_array().unwrap() {
        assert_eq!(item["e"], 2);
        assert_eq!(item["verdict"], "InFatou");
    }
    let (_, list) = json(&["critical", "z^2-2"]);
    let zero = list.as_array().unwrap().iter().find(|c| c["point"] == serde_json::json!([0.0, 0.0])).unwrap();
    assert_eq!(zero["verdict"], "InJulia");
    let (_, list) = json(&["critical", "z^3"]);
    let points: Vec<_> = list.as_array().unwrap().iter().map(|c| (c["point"].clone(), c["e"].clone())).collect();
    assert_eq!(points, vec![(serde_json::json!([0.0, 0.0]), 3.into()), ("inf".into(), 3.into())]);
}

#[test]
fn render_writes_ppm() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.ppm");
    let (code, _, err) =
        cli(&["render", "z^2", "--viewport", "-2,-2,2,2", "--res", "256x256", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 15 + 3 * 256 * 256);
    let (code, out, _) = cli(&["render", "z^2", "--res", "16x8"]);
    assert_eq!(code, 0);
    assert!(out.starts_with(b"P6\n16 8\n255\n"));
    assert_eq!(out.len(), 12 + 3 * 16 * 8);
    for bad in ["1,-1,-1,1", "-1,1,1,-1", "0,0,1", "a,b,c,d"] {
        let (code, _, err) = cli(&["render", "z^2", "--viewport", bad]);
        assert_eq!(code, 1, "{bad}");
        assert!(err.contains("viewport"), "{err}");
    }
    assert_eq!(cli(&["render", "z^2", "--res", "0x10"]).0, 1);
}

#[test]
fn render_is_deterministic_for_rational_maps() {
    let args = ["render", "(z^2+1)/(2z)", "--viewport", "-2,-2,2,2", "--res", "48x48", "--seed", "9"];
    assert_eq!(cli(&args).1, cli(&args).1);
}

#[test]
fn verify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("tree.json");
    let (code, r) = json(&["verify", "z^2", "--depth", "4", "--seed", "7", "--dump", dump.to_str().unwrap()]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["passed"], true);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));
    let tree: Value = serde_json::from_slice(&std::fs::read(&dump).unwrap()).unwrap();
    assert_eq!(tree["nodes"].as_array().unwrap().len(), 31 + 2);
    assert_eq!(tree["edges"].as_array().unwrap().len(), 32);

    let (code, out, _) = cli(&["verify", "z^2-2", "--depth", "3", "--format", "text"]);
    assert_eq!(code, 0);
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("rho composition") && !text.contains("FAIL"), "{text}");

    let (code, _, err) = cli(&["verify", "z^2", "--depth", "99"]);
    assert_eq!(code, 1);
    assert!(err.contains("SizeCapExceeded"), "{err}");
}

#[test]
fn exit_codes_over_the_corpus() {
    for src in CORPUS.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
        let degree = cartan_dynamics::parse::parse_map(src).unwrap().degree();
        let (code, out, err) = cli(&["analyze", src, "--space", "julia", "--max-iter", "2000"]);
        if degree < 2 {
            assert_eq!(code, 1, "{src}");
            assert!(err.contains("DegreeTooLow"), "{src}: {err}");
            continue;
        }
        let r: Value = serde_json::from_slice(&out).unwrap();
        let expected = if r["verdict"] == "Undetermined" { 2 } else { 0 };
        assert_eq!(code, expected, "{src}");
    }
    assert_eq!(cli(&["analyze", "z^^2"]).0, 1);
    assert_eq!(cli(&["nonsense"]).0, 1);
    assert_eq!(cli(&["--help"]).0, 0);
}

#[test]
fn binary_honors_seed_override_and_streams_ppm() {
    let bin = env!("CARGO_BIN_EXE_cartan");
    let out = Command::new(bin).args(["critical", "z^2", "--seed", "3"]).env("CARTAN_SEED", "0x2A").output().unwrap();
    assert!(out.status.success());
    let out = Command::new(bin).args(["analyze", "z^2"]).env("CARTAN_SEED", "42").output().unwrap();
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["seed"], 42);
    let out = Command::new(bin).args(["analyze", "z^2", "--seed", "5"]).env_remove("CARTAN_SEED").output().unwrap();
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["seed"], 5);
    let out = Command::new(bin).args(["render", "z^2", "--res", "8x8"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(out.stdout.len(), 11 + 3 * 64);
    let out = Command::new(bin).args(["analyze", "z^2 +"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains('^'));
}
