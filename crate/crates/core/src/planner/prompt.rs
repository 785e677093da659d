use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gridworld::EnvKind;

/// Closing line of every prompt; lists the whole option grammar.
pub const FORMAT_DIRECTIVE: &str = "Answer with one to three options, in order, using only these phrases: \
explore; go to the <color> <object>; pick up the <color> <object>; toggle the <color> <object>. \
Colors: red, green, blue, purple, yellow, grey. Objects: key, box, door.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptStyle {
    Plain,
    ChainOfThought,
}

impl PromptStyle {
    pub fn default_for(kind: EnvKind) -> Self {
        if kind == EnvKind::ColoredDoorKey {
            PromptStyle::ChainOfThought
        } else {
            PromptStyle::Plain
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exemplar {
    pub observation: String,
    pub reasoning: String,
    pub plan: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    #[serde(default)]
    pub note: String,
    pub instruction: String,
    pub exemplars: Vec<Exemplar>,
}

fn bundled_text(kind: EnvKind) -> &'static str {
    match kind {
        EnvKind::SimpleDoorKey => include_str!("../../templates/SimpleDoorKey.json"),
        EnvKind::KeyInBox => include_str!("../../templates/KeyInBox.json"),
        EnvKind::RandomBoxKey => include_str!("../../templates/RandomBoxKey.json"),
        EnvKind::ColoredDoorKey => include_str!("../../templates/ColoredDoorKey.json"),
        EnvKind::MovingObstacle => include_str!("../../templates/MovingObstacle.json"),
    }
}

impl Template {
    pub fn from_json(text: &str) -> Result<Self> {
        let t: Template = serde_json::from_str(text).map_err(|e| Error::Config(format!("prompt template: {e}")))?;
        if t.exemplars.len() < 2 || t.exemplars.len() > 4 {
            return Err(Error::Config(format!(
                "prompt template needs 2 to 4 exemplars, found {}",
                t.exemplars.len()
            )));
        }
        Ok(t)
    }

    pub fn bundled(kind: EnvKind) -> Result<Self> {
        Self::from_json(bundled_text(kind))
    }

    /// `<dir>/<EnvKind>.json`.
    pub fn load(dir: &Path, kind: EnvKind) -> Result<Self> {
        let path = dir.join(format!("{}.json", kind.name()));
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Config(format!("missing prompt template {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// The prefix goes in the system message, the rest in the user message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptParts {
    pub prefix: String,
    pub user: String,
}

impl PromptParts {
    pub fn new(template: &Template, facts_text: &str, style: PromptStyle) -> Self {
        let mut prefix = template.instruction.clone();
        for (i, ex) in template.exemplars.iter().enumerate() {
            prefix.push_str(&format!("\n\nExample {}:\nObservation: {}\n", i + 1, ex.observation));
            if style == PromptStyle::ChainOfThought {
                prefix.push_str(&format!("Reasoning: {}\n", ex.reasoning));
            }
            prefix.push_str(&format!("Plan: {}", ex.plan));
        }
        let user = format!("Observation: {facts_text}\n{FORMAT_DIRECTIVE}");
        Self { prefix, user }
    }

    pub fn full_text(&self) -> String {
        format!("{}\n{}", self.prefix, self.user)
    }
}

/// Full prompt from the bundled template for `kind`.
pub fn build_prompt(kind: EnvKind, facts_text: &str, style: PromptStyle) -> Result<String> {
    Ok(PromptParts::new(&Template::bundled(kind)?, facts_text, style).full_text())
}
