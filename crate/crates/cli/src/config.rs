//! Run configuration: an optional JSON document overlaid with command-line
//! flags, validated against the command's schema.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Reads `file` (if any), replaces every key given on the command line and
/// deserializes the result. Unknown keys are rejected by the target type.
pub fn merge<T: Serialize + DeserializeOwned>(file: Option<&Path>, flags: &T) -> Result<T, CliError> {
    let mut doc = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
            match serde_json::from_str::<Value>(&text) {
                Ok(Value::Object(m)) => m,
                Ok(_) => return Err(CliError::Validation("config must be a JSON object".into())),
                Err(e) => return Err(CliError::Validation(format!("malformed config: {e}"))),
            }
        }
        None => Map::new(),
    };
    let Value::Object(given) = serde_json::to_value(flags).expect("flag structs serialize") else {
        unreachable!("flag structs serialize to objects")
    };
    for (k, v) in given {
        if !v.is_null() {
            doc.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(doc)).map_err(|e| CliError::Validation(format!("invalid config: {e}")))
}

/// Keys naming output locations; they do not change results and are left
/// out of the hash.
const OUTPUT_KEYS: [&str; 2] = ["out", "out_dir"];

/// SHA-256 of the command name and the canonical JSON of the merged config.
pub fn config_hash<T: Serialize>(command: &str, cfg: &T) -> String {
    let mut value = serde_json::to_value(cfg).expect("config serializes");
    if let Value::Object(m) = &mut value {
        for k in OUTPUT_KEYS {
            m.remove(k);
        }
    }
    let canonical = value.to_string();
    let digest = Sha256::new()
        .chain_update(command.as_bytes())
        .chain_update([0u8])
        .chain_update(canonical.as_bytes())
        .finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
