use std::sync::Arc;

use super::{DstError, FrameOfDiscernment, Subset, MASS_TOLERANCE, TOTAL_CONFLICT_EPS};

/// Sums this close to 1 are left alone; rescaling them would only move
/// rounding error around.
const RESCALE_EPS: f64 = 1e-12;

/// A basic belief assignment over the power set of a frame.
///
/// A mass function with `m(∅) > 0` is *unnormalized*: it only appears as the
/// output of the conjunctive rule and carries the conflict between its
/// sources. Constructors that produce normal mass functions reject it.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    frame: Arc<FrameOfDiscernment>,
    masses: Vec<f64>,
}

impl MassFunction {
    /// Builds a normal mass function from a dense mass array.
    ///
    /// Sums within [`MASS_TOLERANCE`] of 1 are renormalized; larger
    /// deviations are an error.
    pub fn new(frame: Arc<FrameOfDiscernment>, masses: Vec<f64>) -> Result<Self, DstError> {
        Self::build(frame, masses, false)
    }

    /// Like [`MassFunction::new`], but allows mass on the empty set.
    pub fn new_unnormalized(
        frame: Arc<FrameOfDiscernment>,
        masses: Vec<f64>,
    ) -> Result<Self, DstError> {
        Self::build(frame, masses, true)
    }

    /// Builds a normal mass function from `(subset, mass)` pairs. Repeated
    /// subsets accumulate.
    pub fn from_focal(
        frame: Arc<FrameOfDiscernment>,
        focal: &[(Subset, f64)],
    ) -> Result<Self, DstError> {
        let mut masses = vec![0.0; frame.subset_count()];
        for &(subset, mass) in focal {
            if !frame.contains(subset) {
                return Err(DstError::SubsetOutOfFrame(subset.bits()));
            }
            masses[subset.index()] += mass;
        }
        Self::new(frame, masses)
    }

    /// Total ignorance, `m(Ω) = 1`.
    pub fn vacuous(frame: Arc<FrameOfDiscernment>) -> Self {
        let mut masses = vec![0.0; frame.subset_count()];
        masses[frame.omega().index()] = 1.0;
        Self { frame, masses }
    }

    /// Certainty on one subset, `m(A) = 1`.
    pub fn categorical(frame: Arc<FrameOfDiscernment>, subset: Subset) -> Result<Self, DstError> {
        Self::from_focal(frame, &[(subset, 1.0)])
    }

    /// Simple support function `m(A) = weight`, `m(Ω) = 1 - weight`.
    pub fn simple_support(
        frame: Arc<FrameOfDiscernment>,
        subset: Subset,
        weight: f64,
    ) -> Result<Self, DstError> {
        let omega = frame.omega();
        Self::from_focal(frame, &[(subset, weight), (omega, 1.0 - weight)])
    }

    fn build(
        frame: Arc<FrameOfDiscernment>,
        mut masses: Vec<f64>,
        allow_empty: bool,
    ) -> Result<Self, DstError> {
        let expected = frame.subset_count();
        if masses.len() != expected {
            return Err(DstError::MassCount {
                expected,
                actual: masses.len(),
            });
        }
        for (k, m) in masses.iter_mut().enumerate() {
            if !m.is_finite() || *m < -MASS_TOLERANCE || *m > 1.0 + MASS_TOLERANCE {
                return Err(DstError::MassOutOfRange {
                    subset: k as u32,
                    value: *m,
                });
            }
            *m = m.clamp(0.0, 1.0);
        }
        if !allow_empty && masses[0] > MASS_TOLERANCE {
            return Err(DstError::NotNormal(masses[0]));
        }
        if !allow_empty {
            masses[0] = 0.0;
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(DstError::MassSum(total));
        }
        if (total - 1.0).abs() > RESCALE_EPS {
            masses.iter_mut().for_each(|m| *m /= total);
        }
        Ok(Self { frame, masses })
    }

    /// Wraps masses produced by an operation that preserves total mass.
    /// Renormalizes float drift; deviations beyond the tolerance are bugs.
    pub(crate) fn from_combination(frame: Arc<FrameOfDiscernment>, masses: Vec<f64>) -> Self {
        let total: f64 = masses.iter().sum();
        debug_assert!(
            (total - 1.0).abs() <= MASS_TOLERANCE,
            "combination produced total mass {total}"
        );
        let mut masses = masses;
        if (total - 1.0).abs() > RESCALE_EPS && total > 0.0 {
            masses.iter_mut().for_each(|m| *m /= total);
        }
        Self { frame, masses }
    }

    pub fn frame(&self) -> &Arc<FrameOfDiscernment> {
        &self.frame
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, subset: Subset) -> f64 {
        self.masses.get(subset.index()).copied().unwrap_or(0.0)
    }

    /// Mass on the empty set, the conflict `K` left by the conjunctive rule.
    pub fn conflict(&self) -> f64 {
        self.masses[0]
    }

    pub fn is_normal(&self) -> bool {
        self.masses[0] == 0.0
    }

    pub fn is_vacuous(&self) -> bool {
        self.masses[self.frame.omega().index()] == 1.0
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Subsets with strictly positive mass, in index order.
    pub fn focal_elements(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        self.masses
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0.0)
            .map(|(k, &m)| (Subset::from_bits(k as u32), m))
    }

    /// Sum of the masses of every non-empty subset of `subset`.
    pub fn belief_in(&self, subset: Subset) -> f64 {
        self.focal_elements()
            .filter(|(a, _)| !a.is_empty() && a.is_subset_of(subset))
            .map(|(_, m)| m)
            .sum()
    }

    pub fn same_frame(&self, other: &MassFunction) -> bool {
        self.is_on_frame(&other.frame)
    }

    pub fn is_on_frame(&self, frame: &Arc<FrameOfDiscernment>) -> bool {
        Arc::ptr_eq(&self.frame, frame) || self.frame.as_ref() == frame.as_ref()
    }

    /// Errors with [`DstError::NotNormal`] when `m(∅) > 0`.
    pub fn require_normal(&self) -> Result<(), DstError> {
        if self.is_normal() {
            Ok(())
        } else {
            Err(DstError::NotNormal(self.masses[0]))
        }
    }

    /// Dempster normalization: removes `m(∅)` and rescales by `1 / (1 - K)`.
    pub fn normalized(&self) -> Result<Self, DstError> {
        let conflict = self.masses[0];
        if conflict >= 1.0 - TOTAL_CONFLICT_EPS {
            return Err(DstError::TotalConflict);
        }
        if conflict == 0.0 {
            return Ok(self.clone());
        }
        let scale = 1.0 / (1.0 - conflict);
        let mut masses: Vec<f64> = self.masses.iter().map(|m| m * scale).collect();
        masses[0] = 0.0;
        Ok(Self::from_combination(self.frame.clone(), masses))
    }
}
