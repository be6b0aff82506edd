//! Reproducible experiment runner for the spectral fractional Laplacian
//! Pohozaev machinery: TOML configs in, JSON/Markdown reports and CSV
//! matrices out.

pub mod cli;
pub mod config;
pub mod report;
pub mod runner;
pub mod suites;
