//! Defect-aware compiler, simulator and analyzer for hex-grid surface-code circuits.
//!
//! The pipeline runs `layout` → `subsystem` → `schedule` (with detectors from
//! `isg`) → `noise_sim` → `analysis` / `decode`.

pub mod analysis;
pub mod circuit_ir;
pub mod decode;
pub mod fixtures;
pub mod gf2;
pub mod isg;
pub mod layout;
pub mod noise_sim;
pub mod pauli;
pub mod schedule;
pub mod subsystem;
