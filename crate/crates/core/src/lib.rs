//! Mining credible binary questions about a treatment hierarchy from posterior
//! or bootstrap samples of relative effects.
//!
//! The pipeline ranks every sample, counts ranked and unranked permutations and
//! combinations in one pass over the rank matrix, grows partial hierarchies
//! level by level, finds each treatment's highest-density rank region, and
//! finally marks entries implied by others.

pub mod arrangements;
pub mod catalog;
pub mod error;
pub mod hdr;
pub mod ingest;
pub mod oracle;
pub mod partial;
pub mod report;
pub mod taxonomy;
pub mod trim;

pub use catalog::{analyze, credible_catalog, Analysis, CatalogEntry, CredibleCatalog, MineOptions};
pub use error::{Error, Result};
pub use ingest::{AnalysisConfig, Direction, RankMatrix, SampleMatrix, Samples, Threshold};
pub use taxonomy::{Kind, Mid, Question};
