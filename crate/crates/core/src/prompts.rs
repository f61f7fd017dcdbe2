//! System prompts for the two LLM stages.
//!
//! The bundled texts are this project's own defaults, not a reproduction of
//! any published prompt. Override them by pointing `prompt_dir` at a
//! directory holding `extraction.txt` and/or `entailment.txt`.

use std::fs;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};

pub const EXTRACTION_V1: &str = include_str!("../prompts/extraction.v1.txt");
pub const ENTAILMENT_V1: &str = include_str!("../prompts/entailment.v1.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompts {
    pub extraction: String,
    pub entailment: String,
}

impl Default for Prompts {
    fn default() -> Self {
        Prompts { extraction: EXTRACTION_V1.to_string(), entailment: ENTAILMENT_V1.to_string() }
    }
}

impl Prompts {
    /// Bundled prompts with any files found in `dir` taking precedence.
    pub fn load(dir: Option<&Path>) -> io::Result<Self> {
        let mut prompts = Prompts::default();
        if let Some(dir) = dir {
            for (name, slot) in [("extraction.txt", &mut prompts.extraction), ("entailment.txt", &mut prompts.entailment)] {
                let path = dir.join(name);
                if path.exists() {
                    *slot = fs::read_to_string(&path)?;
                }
            }
        }
        Ok(prompts)
    }

    pub fn extraction_hash(&self) -> String {
        sha256_hex(&self.extraction)
    }

    pub fn entailment_hash(&self) -> String {
        sha256_hex(&self.entailment)
    }
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}
