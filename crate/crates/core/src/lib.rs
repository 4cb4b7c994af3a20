//! Tuning epsilon-SVR hyperparameters with the golden sine algorithm and
//! applying the tuned model to one-step-ahead time-series forecasting.

pub mod embedding;
pub mod error;
pub mod metrics;
pub mod optim;
pub mod pipeline;
pub mod svr;

pub use error::{Error, Result};
