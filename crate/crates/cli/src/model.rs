use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use ncgrad::qms::{GeneratorJson, LindbladGenerator};
use ncgrad::zoo::{self, Model, ModelJson};
use sha2::{Digest, Sha256};

/// Resolves `zoo:<name>` or a JSON file holding a model or a bare generator.
pub fn load_model(spec: &str, params: &BTreeMap<String, String>) -> Result<Model> {
    if let Some(name) = spec.strip_prefix("zoo:") {
        return Ok(zoo::build(name, params)?);
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path).with_context(|| format!("reading model {}", path.display()))?;
    if let Ok(json) = serde_json::from_str::<ModelJson>(&text) {
        return Ok(Model::from_json(&json)?);
    }
    let gen: GeneratorJson =
        serde_json::from_str(&text).with_context(|| format!("{} is neither a model nor a generator", path.display()))?;
    let generator = LindbladGenerator::from_json(&gen)?;
    let name = path.file_stem().map_or("model".into(), |s| s.to_string_lossy().into_owned());
    Ok(Model::from_json(&ModelJson {
        name,
        constant: None,
        reference: String::new(),
        generator: generator.to_json(),
        group: None,
    })?)
}

/// Git-style object hash `sha256("blob <len>\0" + content)` of the model JSON.
pub fn model_hash(model: &Model) -> Result<String> {
    let body = serde_json::to_vec(&model.to_json())?;
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", body.len()).as_bytes());
    h.update(&body);
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}
