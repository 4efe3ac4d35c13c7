//! Combination rules.

use super::{DstError, MassFunction, Subset};

fn check_frames(m1: &MassFunction, m2: &MassFunction) -> Result<(), DstError> {
    if m1.same_frame(m2) {
        Ok(())
    } else {
        Err(DstError::FrameMismatch)
    }
}

/// Sums `m1(B) * m2(C)` into `op(B, C)` over every pair of focal elements.
fn combine_with(
    m1: &MassFunction,
    m2: &MassFunction,
    op: impl Fn(Subset, Subset) -> Subset,
) -> Vec<f64> {
    let mut out = vec![0.0; m1.frame().subset_count()];
    for (b, mb) in m1.focal_elements() {
        for (c, mc) in m2.focal_elements() {
            out[op(b, c).index()] += mb * mc;
        }
    }
    out
}

/// Unnormalized conjunctive rule. The result keeps the conflict on `∅`.
pub fn combine_conjunctive(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction, DstError> {
    check_frames(m1, m2)?;
    let masses = combine_with(m1, m2, Subset::intersect);
    Ok(MassFunction::from_combination(m1.frame().clone(), masses))
}

/// Dempster's rule: the conjunctive rule normalized by `1 - K`.
pub fn combine_dempster(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction, DstError> {
    combine_conjunctive(m1, m2)?.normalized()
}

/// Disjunctive rule, for sources of which only one is known to be reliable.
pub fn combine_disjunctive(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction, DstError> {
    check_frames(m1, m2)?;
    let masses = combine_with(m1, m2, Subset::union);
    Ok(MassFunction::from_combination(m1.frame().clone(), masses))
}

/// Yager's rule: the conjunctive rule with the conflict moved to `Ω`.
pub fn combine_yager(m1: &MassFunction, m2: &MassFunction) -> Result<MassFunction, DstError> {
    check_frames(m1, m2)?;
    let mut masses = combine_with(m1, m2, Subset::intersect);
    let omega = m1.frame().omega().index();
    masses[omega] += masses[0];
    masses[0] = 0.0;
    Ok(MassFunction::from_combination(m1.frame().clone(), masses))
}

/// The conflict `K` between two sources, `(m1 ∩ m2)(∅)`.
pub fn conflict_degree(m1: &MassFunction, m2: &MassFunction) -> Result<f64, DstError> {
    Ok(combine_conjunctive(m1, m2)?.conflict())
}
