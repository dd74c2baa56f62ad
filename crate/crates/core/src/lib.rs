//! Detects the ten classic Python code smells, removes them through a
//! deterministic rules backend or an LLM-prompted backend, verifies the
//! result, and curates smell-cleaned corpora with summary statistics.

pub mod corpus;
pub mod detectors;
pub mod llmclient;
pub mod pysource;
pub mod refactor;
pub mod report;
pub mod scope;
pub mod span;
pub mod verify;
