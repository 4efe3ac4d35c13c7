//! Discounting, pignistic probability, refinings and specializations.

use std::sync::Arc;

use super::{DstError, FrameOfDiscernment, MassFunction, Subset, MASS_TOLERANCE};

/// Classic discounting: a fraction `alpha` of every mass moves to `Ω`.
pub fn discount(m: &MassFunction, alpha: f64) -> Result<MassFunction, DstError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(DstError::InvalidDiscount(alpha));
    }
    m.require_normal()?;
    let keep = 1.0 - alpha;
    let omega = m.frame().omega().index();
    let mut masses: Vec<f64> = m.masses().iter().map(|v| v * keep).collect();
    masses[omega] += alpha;
    Ok(MassFunction::from_combination(m.frame().clone(), masses))
}

/// Pignistic probability distribution over the singletons of a frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Pignistic {
    frame: Arc<FrameOfDiscernment>,
    probs: Vec<f64>,
}

impl Pignistic {
    pub fn frame(&self) -> &Arc<FrameOfDiscernment> {
        &self.frame
    }

    /// Probabilities in frame label order.
    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, index: usize) -> f64 {
        self.probs[index]
    }

    /// `BetP(B) = Σ_{ω ∈ B} BetP(ω)`.
    pub fn prob_of(&self, subset: Subset) -> f64 {
        subset.elements().map(|k| self.probs[k]).sum()
    }
}

/// Pignistic transformation. Rejects unnormalized input.
pub fn pignistic(m: &MassFunction) -> Result<Pignistic, DstError> {
    m.require_normal()?;
    let n = m.frame().len();
    let mut probs = vec![0.0; n];
    for (a, mass) in m.focal_elements() {
        let share = mass / f64::from(a.len());
        for k in a.elements() {
            probs[k] += share;
        }
    }
    Ok(Pignistic {
        frame: m.frame().clone(),
        probs,
    })
}

/// A one-to-many mapping from a coarse frame into a finer one. Singleton
/// images are non-empty, pairwise disjoint and cover the target frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Refining {
    source: Arc<FrameOfDiscernment>,
    target: Arc<FrameOfDiscernment>,
    images: Vec<Subset>,
}

impl Refining {
    /// `images[k]` is the target subset of the `k`-th source hypothesis.
    pub fn new(
        source: Arc<FrameOfDiscernment>,
        target: Arc<FrameOfDiscernment>,
        images: Vec<Subset>,
    ) -> Result<Self, DstError> {
        if images.len() != source.len() {
            return Err(DstError::InvalidRefining(format!(
                "expected {} singleton images, got {}",
                source.len(),
                images.len()
            )));
        }
        let mut covered = Subset::EMPTY;
        for (k, &image) in images.iter().enumerate() {
            let label = &source.labels()[k];
            if image.is_empty() {
                return Err(DstError::InvalidRefining(format!(
                    "image of {label} is empty"
                )));
            }
            if !target.contains(image) {
                return Err(DstError::SubsetOutOfFrame(image.bits()));
            }
            if !covered.intersect(image).is_empty() {
                return Err(DstError::InvalidRefining(format!(
                    "image of {label} overlaps another image"
                )));
            }
            covered = covered | image;
        }
        if covered != target.omega() {
            return Err(DstError::InvalidRefining(
                "images do not cover the target frame".into(),
            ));
        }
        Ok(Self {
            source,
            target,
            images,
        })
    }

    pub fn source(&self) -> &Arc<FrameOfDiscernment> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FrameOfDiscernment> {
        &self.target
    }

    /// `r(A) = ∪_{ω ∈ A} r(ω)`.
    pub fn apply(&self, subset: Subset) -> Subset {
        subset
            .elements()
            .fold(Subset::EMPTY, |acc, k| acc | self.images[k])
    }
}

/// Carries each mass `m(A)` onto `r(A)` in the target frame.
pub fn refine(m: &MassFunction, r: &Refining) -> Result<MassFunction, DstError> {
    if !m.is_on_frame(&r.source) {
        return Err(DstError::FrameMismatch);
    }
    let mut masses = vec![0.0; r.target.subset_count()];
    for (a, mass) in m.focal_elements() {
        masses[r.apply(a).index()] += mass;
    }
    Ok(MassFunction::from_combination(r.target.clone(), masses))
}

/// A specialization matrix stored by columns: column `B` lists the subsets
/// `A ⊆ B` that receive a share `S(A, B)` of `m(B)`. Columns not set
/// explicitly are the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct Specialization {
    frame: Arc<FrameOfDiscernment>,
    columns: Vec<Vec<(Subset, f64)>>,
}

impl Specialization {
    pub fn identity(frame: Arc<FrameOfDiscernment>) -> Self {
        let columns = frame.subsets().map(|b| vec![(b, 1.0)]).collect();
        Self { frame, columns }
    }

    /// Replaces column `source` with the given `(target, weight)` entries.
    pub fn set_column(
        &mut self,
        source: Subset,
        entries: Vec<(Subset, f64)>,
    ) -> Result<(), DstError> {
        if !self.frame.contains(source) {
            return Err(DstError::SubsetOutOfFrame(source.bits()));
        }
        let mut total = 0.0;
        for &(target, weight) in &entries {
            if !target.is_subset_of(source) {
                return Err(DstError::InvalidSpecialization(format!(
                    "{} is not a subset of {}",
                    self.frame.describe(target),
                    self.frame.describe(source)
                )));
            }
            if !(0.0..=1.0).contains(&weight) {
                return Err(DstError::InvalidSpecialization(format!(
                    "weight {weight} outside [0, 1]"
                )));
            }
            total += weight;
        }
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(DstError::InvalidSpecialization(format!(
                "column {} sums to {total}",
                self.frame.describe(source)
            )));
        }
        self.columns[source.index()] = entries;
        Ok(())
    }

    pub fn with_column(
        mut self,
        source: Subset,
        entries: Vec<(Subset, f64)>,
    ) -> Result<Self, DstError> {
        self.set_column(source, entries)?;
        Ok(self)
    }

    pub fn frame(&self) -> &Arc<FrameOfDiscernment> {
        &self.frame
    }

    /// `S(target, source)`.
    pub fn weight(&self, target: Subset, source: Subset) -> f64 {
        self.columns[source.index()]
            .iter()
            .filter(|(t, _)| *t == target)
            .map(|(_, w)| w)
            .sum()
    }
}

/// `m'(A) = Σ_B S(A, B) · m(B)`.
pub fn specialize(m: &MassFunction, s: &Specialization) -> Result<MassFunction, DstError> {
    if !m.is_on_frame(&s.frame) {
        return Err(DstError::FrameMismatch);
    }
    let mut masses = vec![0.0; m.frame().subset_count()];
    for (b, mass) in m.focal_elements() {
        for &(a, weight) in &s.columns[b.index()] {
            masses[a.index()] += weight * mass;
        }
    }
    Ok(MassFunction::from_combination(m.frame().clone(), masses))
}
