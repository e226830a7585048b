//! Frozen thresholds, measured once over the corpus and committed as `calibration.json`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::mainlemma::ClaimThresholds;

/// Thresholds checked by the acceptance suite. Each frozen value is
/// `max(1.05 * achieved, floor)` at calibration time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Easy-atom bound: sup of `||M_upper b||_1 / |b|_atb` over random atomic blocks.
    pub c_easy: f64,
    /// Bounds on `h1 upper / (||f||_1 + ||M_lower f||_1)`.
    pub r_min: f64,
    pub r_max: f64,
    /// Overlap of the dilated Whitney cubes, indexed by dimension minus one.
    pub whitney_overlap: Vec<usize>,
    /// Overlap of the Besicovitch subfamily, indexed by dimension minus one.
    pub besicovitch_overlap: Vec<usize>,
    /// Main-lemma constants.
    pub claims: ClaimThresholds,
    /// Free-form notes on how each value was measured.
    #[serde(default)]
    pub notes: Vec<String>,
}

const FROZEN: &str = include_str!("../calibration.json");

impl Calibration {
    pub fn frozen() -> &'static Calibration {
        static CELL: OnceLock<Calibration> = OnceLock::new();
        CELL.get_or_init(|| serde_json::from_str(FROZEN).expect("calibration.json parses"))
    }

    pub fn whitney_overlap_for(&self, dim: usize) -> usize {
        self.whitney_overlap.get(dim.wrapping_sub(1)).copied().unwrap_or(0)
    }

    pub fn besicovitch_overlap_for(&self, dim: usize) -> usize {
        self.besicovitch_overlap.get(dim.wrapping_sub(1)).copied().unwrap_or(0)
    }
}

impl ClaimThresholds {
    pub fn frozen() -> Self {
        Calibration::frozen().claims
    }
}

/// `max(1.05 * achieved, floor)`.
pub fn freeze(achieved: f64, floor: f64) -> f64 {
    (1.05 * achieved).max(floor)
}
