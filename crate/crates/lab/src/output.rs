use std::path::Path;

use serde::Serialize;
use serde_json::{json, Number, Value};

use crate::LabError;

pub const SCHEMA_VERSION: u32 = 1;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rewrites every non-integer number with 17 significant digits.
fn widen(v: &mut Value) {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            if text.contains(['.', 'e', 'E']) {
                if let Some(x) = n.as_f64() {
                    *n = fmt17(x).parse::<Number>().expect("formatted float is a JSON number");
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(widen),
        Value::Object(map) => map.values_mut().for_each(widen),
        _ => {}
    }
}

/// Envelope for a successful command.
pub fn document(command: &str, config: &impl Serialize, result: Value) -> Result<Value, LabError> {
    let config = serde_json::to_value(config).map_err(|e| LabError::Io(e.to_string()))?;
    let mut doc = json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "result": result,
    });
    widen(&mut doc);
    Ok(doc)
}

pub fn error_document(command: &str, err: &LabError) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "error": {
            "kind": err.kind(),
            "message": err.to_string(),
            "exit_code": err.exit_code(),
        },
    })
}

pub fn render(doc: &Value) -> String {
    serde_json::to_string_pretty(doc).expect("JSON values always serialize")
}

pub fn write_text(path: &Path, text: &str) -> Result<(), LabError> {
    std::fs::write(path, text).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))
}

pub fn ensure_dir(dir: &Path) -> Result<(), LabError> {
    std::fs::create_dir_all(dir).map_err(|e| LabError::Io(format!("{}: {e}", dir.display())))
}
