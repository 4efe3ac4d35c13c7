use serde::{Deserialize, Serialize};

use crate::dst::{pignistic, MassFunction};

use super::FusionError;

/// Per-cell class decided from the pignistic probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    Free,
    Infrastructure,
    Unmapped,
    Stopped,
    Moving,
    Unknown,
}

impl Decision {
    /// Singleton classes in frame order `F, I, U, S, M`.
    pub const CLASSES: [Decision; 5] = [
        Decision::Free,
        Decision::Infrastructure,
        Decision::Unmapped,
        Decision::Stopped,
        Decision::Moving,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Decision::Free => "F",
            Decision::Infrastructure => "I",
            Decision::Unmapped => "U",
            Decision::Stopped => "S",
            Decision::Moving => "M",
            Decision::Unknown => "UNKNOWN",
        }
    }
}

/// Two pignistic probabilities closer than this are a tie.
const TIE_EPS: f64 = 1e-12;

/// Argmax of the pignistic probability over `F, I, U, S, M`; ties go to the
/// earlier class. Returns [`Decision::Unknown`] when the best probability is
/// below `unknown_threshold`.
pub fn decide(m: &MassFunction, unknown_threshold: f64) -> Result<Decision, FusionError> {
    let betp = pignistic(m)?;
    let mut best = 0;
    for (k, &p) in betp.probabilities().iter().enumerate().skip(1) {
        if p > betp.prob(best) + TIE_EPS {
            best = k;
        }
    }
    if betp.prob(best) < unknown_threshold {
        Ok(Decision::Unknown)
    } else {
        Ok(Decision::CLASSES[best])
    }
}
