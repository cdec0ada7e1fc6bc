//! Forecasting engine and benchmark harness for daily transit event-count
//! series.
//!
//! Two complementary approaches live side by side:
//!
//! - a self-exciting (Hawkes) point process over individual event
//!   timestamps: maximum-likelihood fitting ([`hawkes`]), Ogata-thinning
//!   simulation and next-event / daily-aggregate forecasting ([`sim`]),
//!   and goodness-of-fit diagnostics ([`diagnostics`]);
//! - a regression model zoo ([`models`]) over sliding-window feature
//!   matrices ([`features`]), compared under a bootstrap protocol with
//!   chronological splits and covariate-blend ablations ([`bench`]).
//!
//! The [`data`] module holds the domain types (calendar dates, daily
//! records, event series) plus CSV ingestion and synthetic-data
//! generators used throughout the test suites.

pub mod bench;
pub mod data;
pub mod diagnostics;
pub mod features;
pub mod hawkes;
pub mod models;
pub mod rngutil;
pub mod sim;
pub mod stats;
