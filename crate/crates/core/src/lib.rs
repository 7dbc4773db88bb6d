//! Third-party tracker detection across emails, websites and mobile app
//! dumps, with shared public-suffix domain handling and report aggregation.

pub mod digest;
pub mod domain;
pub mod email;
pub mod par;
pub mod trackerdb;
pub mod web;
pub mod app;
pub mod report;
