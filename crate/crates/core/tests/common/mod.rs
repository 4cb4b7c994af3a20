//! Shared fixtures and reference implementations for integration tests.

pub mod qp_oracle;

#[allow(dead_code)]
pub mod fixtures;
