//! Prompt wording lives in versioned template files with `{{name}}`
//! placeholders, so it can be swapped without rebuilding.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use thiserror::Error;

macro_rules! builtin {
    ($($name:literal),* $(,)?) => {
        [$(($name, include_str!(concat!("../../templates/v1/", $name, ".tmpl")))),*]
    };
}

const BUILTIN_V1: [(&str, &str); 14] = builtin![
    "task_concept_vs_concept",
    "task_concept_vs_mention",
    "task_generate",
    "documents_header",
    "document",
    "examples_header",
    "example",
    "cot_simple",
    "cot_strong",
    "case_concept_vs_concept",
    "case_concept_vs_mention",
    "case_generate",
    "answer_format",
    "answer_generate",
];

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("unknown template {0:?}")]
    Unknown(String),
    #[error("template {template:?}: no value for placeholder {placeholder:?}")]
    MissingValue { template: String, placeholder: String },
    #[error("template {template:?}: unterminated placeholder")]
    Unterminated { template: String },
    #[error("template file {0:?} does not override a known template")]
    UnexpectedFile(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateRegistry {
    version: String,
    templates: BTreeMap<String, String>,
}

impl Default for TemplateRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TemplateRegistry {
    pub fn builtin() -> Self {
        TemplateRegistry {
            version: "v1".to_string(),
            templates: BUILTIN_V1.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    /// Built-in templates overridden by every `<name>.tmpl` in `dir`. The
    /// version label becomes the directory name.
    pub fn from_dir(dir: &Path) -> Result<Self, TemplateError> {
        let mut registry = Self::builtin();
        registry.version =
            dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| dir.display().to_string());
        let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<Result<_, _>>()?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("tmpl") {
                continue;
            }
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            if !registry.templates.contains_key(&name) {
                return Err(TemplateError::UnexpectedFile(name));
            }
            let text = fs::read_to_string(&path)?;
            registry.templates.insert(name, text.trim_end_matches('\n').to_string());
        }
        Ok(registry)
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn get(&self, name: &str) -> Result<&str, TemplateError> {
        self.templates.get(name).map(String::as_str).ok_or_else(|| TemplateError::Unknown(name.to_string()))
    }

    /// Substitutes `{{key}}` placeholders. Values are inserted verbatim and
    /// are not rescanned.
    pub fn render(&self, name: &str, values: &[(&str, &str)]) -> Result<String, TemplateError> {
        let template = self.get(name)?;
        let mut out = String::with_capacity(template.len());
        let mut rest = template;
        while let Some(open) = rest.find("{{") {
            out.push_str(&rest[..open]);
            let after = &rest[open + 2..];
            let close = after.find("}}").ok_or_else(|| TemplateError::Unterminated { template: name.to_string() })?;
            let key = after[..close].trim();
            let value = values.iter().find(|(k, _)| *k == key).map(|(_, v)| *v).ok_or_else(|| {
                TemplateError::MissingValue { template: name.to_string(), placeholder: key.to_string() }
            })?;
            out.push_str(value);
            rest = &after[close + 2..];
        }
        out.push_str(rest);
        Ok(out)
    }
}
