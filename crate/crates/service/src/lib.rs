//! HTTP front end and session store for the bnx explanation engine.

pub mod api;
pub mod bundle;
pub mod cli;
pub mod error;
pub mod store;

pub use api::router;
pub use bundle::{explain, whatif, ExplanationBundle, Mode, WhatIfReport};
pub use error::{ApiError, ErrorBody};
pub use store::{Session, Snapshot, Store, StoreError};
