//! Joint detection and tracking on bird's-eye-view centerness maps.
//!
//! The library covers the full desk-scale experiment loop:
//!
//! * [`geometry`] — SE(2) poses, BEV grids, boxes, pillar occupancy.
//! * [`scenario`] — deterministic synthetic worlds with a ray-cast
//!   visibility model.
//! * [`targets`] — hybrid-time centerness / motion / regression target maps
//!   built from consecutive ground-truth frames.
//! * [`losses`] — the focal + L1 training objective and its gradient.
//! * [`oracle`] — a ground-truth-driven detection head with a configurable
//!   degradation model, standing in for a trained network.
//! * [`tracker`] — online joint tracking: map averaging, peak extraction,
//!   identity read-off, and motion updating.
//! * [`baselines`] — greedy closest-distance and Kalman-filter
//!   tracking-by-detection baselines plus a Hungarian solver.
//! * [`metrics`] — CLEAR-MOT accumulation, AMOTA recall sweeps, mAVE.

pub mod baselines;
pub mod geometry;
pub mod losses;
pub mod metrics;
pub mod oracle;
pub mod scenario;
pub mod targets;
pub mod tracker;
