//! Name-addressed backend construction.
//!
//! Accepted specs: `reference`, `reference-copy`, `planted:` followed by
//! `+`-separated bug ids (`planted:L2`, `planted:L1+L3`; `planted:` or
//! `planted:none` for the empty set). Any spec may be prefixed `alias=` to
//! rename the instance.

use std::collections::HashSet;
use std::sync::Arc;

use super::planted::{default_name, BugId, PlantedBackend, UnknownBugId};
use super::reference::ReferenceBackend;
use super::Backend;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegistryError {
    #[error("unknown backend `{0}`")]
    UnknownBackend(String),
    #[error(transparent)]
    UnknownBug(#[from] UnknownBugId),
    #[error("duplicate backend name `{0}`")]
    DuplicateName(String),
    #[error("empty backend alias in `{0}`")]
    EmptyAlias(String),
}

pub fn resolve_backend(spec: &str) -> Result<Arc<dyn Backend>, RegistryError> {
    let spec = spec.trim();
    let (alias, body) = match spec.split_once('=') {
        Some((a, b)) => {
            let a = a.trim();
            if a.is_empty() {
                return Err(RegistryError::EmptyAlias(spec.to_string()));
            }
            (Some(a.to_string()), b.trim())
        }
        None => (None, spec),
    };
    if body == "reference" || body == "reference-copy" {
        return Ok(Arc::new(ReferenceBackend::new(
            alias.unwrap_or_else(|| body.to_string()),
        )));
    }
    if let Some(list) = body.strip_prefix("planted:") {
        let bugs = if list.is_empty() || list == "none" {
            Vec::new()
        } else {
            list.split('+')
                .map(|s| s.trim().parse::<BugId>())
                .collect::<Result<Vec<_>, _>>()?
        };
        let name = alias.unwrap_or_else(|| default_name(&bugs));
        return Ok(Arc::new(PlantedBackend::new(name, &bugs)));
    }
    Err(RegistryError::UnknownBackend(body.to_string()))
}

/// Resolves every spec; instance names must be unique.
pub fn resolve_backends<S: AsRef<str>>(
    specs: &[S],
) -> Result<Vec<Arc<dyn Backend>>, RegistryError> {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(specs.len());
    for s in specs {
        let b = resolve_backend(s.as_ref())?;
        if !seen.insert(b.name().to_string()) {
            return Err(RegistryError::DuplicateName(b.name().to_string()));
        }
        out.push(b);
    }
    Ok(out)
}
