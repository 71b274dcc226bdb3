//! Differential testing of JSON libraries with LLM-generated unit tests.
//!
//! Seeds are mined into a [`corpus`], rewritten by an LLM ([`llm`]) into
//! [`tdsl`] scripts, executed on several [`backends`], compared by
//! [`diffcore`], triaged by [`classify`], and orchestrated by [`pipeline`].

pub mod backends;
pub mod classify;
pub mod corpus;
pub mod diffcore;
pub mod features;
pub mod llm;
pub mod pipeline;
pub mod tdsl;
pub mod value;

use sha2::{Digest, Sha256};

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: impl AsRef<[u8]>) -> String {
    hex::encode(Sha256::digest(bytes.as_ref()))
}
