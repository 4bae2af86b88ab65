//! `report`: aggregates run logs from an output directory. Refuses to mix
//! runs with different config hashes.

use crate::errors::AppError;
use std::path::Path;

pub fn run(out_dir: &Path) -> Result<(), AppError> {
    let mut logs = Vec::new();
    let entries = std::fs::read_dir(out_dir)
        .map_err(|e| AppError::config(format!("cannot read {}: {e}", out_dir.display())))?;
    let mut paths: Vec<_> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .map(|n| n.ends_with("_runlog.json"))
                .unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(AppError::config(format!(
            "no run logs found in {}",
            out_dir.display()
        )));
    }
    for path in &paths {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| AppError::config(format!("bad run log {}: {e}", path.display())))?;
        logs.push((path.clone(), value));
    }

    let first_hash = logs[0].1["config_hash"]
        .as_str()
        .unwrap_or_default()
        .to_string();
    for (path, log) in &logs {
        let hash = log["config_hash"].as_str().unwrap_or_default();
        if hash != first_hash {
            return Err(AppError::config(format!(
                "config hash mismatch: {} carries {hash}, expected {first_hash}",
                path.display()
            )));
        }
    }

    let aggregate = serde_json::json!({
        "config_hash": first_hash,
        "runs": logs.iter().map(|(path, log)| serde_json::json!({
            "log": path.file_name().and_then(|n| n.to_str()),
            "command": log["command"],
            "seed": log["seed"],
            "outputs": log["outputs"],
            "summary": log["summary"],
        })).collect::<Vec<_>>(),
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&aggregate).expect("serializable aggregate")
    );
    Ok(())
}
