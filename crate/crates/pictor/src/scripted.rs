//! Loads canned agent replies from JSON for offline runs.
//!
//! Format: one key per role, each holding the replies that role returns in
//! order. Example:
//!
//! ```json
//! {
//!   "dispatcher": ["[Masking_Data_with_Legend]"],
//!   "planner": ["THOUGHT 1: ...\nACTION 1: ...", "FINAL ANSWER: 4\nTERMINATE"],
//!   "visual_critic": ["true", "true"],
//!   "planning_critic": ["ADJUSTMENT: False\nFine."]
//! }
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use pictor_core::workflow::{Role, ScriptedBackend};

pub fn parse_script(text: &str) -> Result<ScriptedBackend> {
    let raw: BTreeMap<String, Vec<String>> =
        serde_json::from_str(text).context("parsing script json")?;
    let mut backend = ScriptedBackend::new();
    for (key, replies) in raw {
        let Some(role) = Role::from_name(&key) else {
            let valid: Vec<&str> = Role::ALL.iter().map(|r| r.name()).collect();
            bail!("unknown role '{key}' in script (expected one of {})", valid.join(", "));
        };
        backend.extend(role, replies);
    }
    Ok(backend)
}

pub fn load_script(path: &Path) -> Result<ScriptedBackend> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    parse_script(&text).with_context(|| path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripts_load_in_order() {
        let mut backend = parse_script(
            r#"{"planner": ["first", "second"], "visual_critic": ["true"]}"#,
        )
        .unwrap();
        assert_eq!(backend.remaining(Role::Planner), 2);
        use pictor_core::workflow::{AgentBackend, AgentPrompt};
        let prompt = AgentPrompt { role: Role::Planner, text: "x".into(), images: vec![] };
        assert_eq!(backend.reply(&prompt).unwrap(), "first");
        assert_eq!(backend.reply(&prompt).unwrap(), "second");
    }

    #[test]
    fn unknown_roles_are_named_in_the_error() {
        let err = parse_script(r#"{"overseer": []}"#).unwrap_err().to_string();
        assert!(err.contains("overseer"), "{err}");
        assert!(err.contains("planning_critic"), "{err}");
    }
}
