use crate::dst::{combine_dempster, refine, DstError, MassFunction, Specialization};

use super::{omega_pg, sg_refining, FusionError, FusionParams, F, M, OCCUPIED};

/// Carries a sensor cell from `{F, O}` onto `{F, I, U, S, M}`.
pub fn refine_sg(m_sg: &MassFunction) -> Result<MassFunction, FusionError> {
    m_sg.require_normal()?;
    Ok(refine(m_sg, sg_refining())?)
}

/// Injects the map prior into refined sensor evidence (Dempster's rule).
pub fn combine_prior(
    m_sg_pg: &MassFunction,
    m_gg: &MassFunction,
) -> Result<MassFunction, FusionError> {
    Ok(combine_dempster(m_sg_pg, m_gg)?)
}

/// The empty-intersection mass of a previous-perception / sensor pair, split
/// by origin.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ConflictPair {
    /// Free before, occupied now: an object appeared (`∅_FO`).
    pub fo: f64,
    /// Occupied before, free now: an object left (`∅_OF`).
    pub of: f64,
    /// Every other empty intersection, e.g. `{I}` against `{S}`.
    pub residual: f64,
}

impl ConflictPair {
    /// `∅_FO + ∅_OF`, the conflict that drives the accumulator.
    pub fn dynamic(&self) -> f64 {
        self.fo + self.of
    }

    pub fn total(&self) -> f64 {
        self.fo + self.of + self.residual
    }
}

fn check_pg(m: &MassFunction) -> Result<(), FusionError> {
    if !m.is_on_frame(omega_pg()) {
        return Err(DstError::FrameMismatch.into());
    }
    m.require_normal()?;
    Ok(())
}

/// Conjunctive combination of `prev` (perception) and `current` (sensor with
/// prior) with the empty-set mass split into a [`ConflictPair`]. The
/// returned mass array has `0` on `∅`.
fn partitioned_conjunction(
    prev: &MassFunction,
    current: &MassFunction,
) -> Result<(Vec<f64>, ConflictPair), FusionError> {
    check_pg(prev)?;
    check_pg(current)?;
    let mut masses = vec![0.0; prev.frame().subset_count()];
    let mut conflicts = ConflictPair::default();
    for (b, mb) in prev.focal_elements() {
        for (c, mc) in current.focal_elements() {
            let product = mb * mc;
            let meet = b & c;
            if !meet.is_empty() {
                masses[meet.index()] += product;
            } else if b.is_subset_of(OCCUPIED) && !c.intersect(F).is_empty() {
                conflicts.of += product;
            } else if !b.intersect(F).is_empty() && c.is_subset_of(OCCUPIED) {
                conflicts.fo += product;
            } else {
                conflicts.residual += product;
            }
        }
    }
    Ok((masses, conflicts))
}

/// Splits `(prev ∩ current)(∅)` into appearing, disappearing and residual
/// conflict.
pub fn conflict_masses(
    m_pg_prev: &MassFunction,
    m_sg_prior: &MassFunction,
) -> Result<ConflictPair, FusionError> {
    Ok(partitioned_conjunction(m_pg_prev, m_sg_prior)?.1)
}

/// The modified conjunctive rule: `∅_FO` goes to `{M}`, `∅_OF` and the
/// residual conflict go to `Ω`. Returns the fused mass and the conflict
/// split before redistribution.
pub fn fuse_pg(
    m_pg: &MassFunction,
    m_sg_prior: &MassFunction,
) -> Result<(MassFunction, ConflictPair), FusionError> {
    let (mut masses, conflicts) = partitioned_conjunction(m_pg, m_sg_prior)?;
    let omega = m_pg.frame().omega().index();
    masses[M.index()] += conflicts.fo;
    masses[omega] += conflicts.of + conflicts.residual;
    let fused = MassFunction::new(m_pg.frame().clone(), masses)?;
    Ok((fused, conflicts))
}

/// Aggregate occupied mass `Σ_{A ⊆ {I,U,S,M}} m(A)`.
pub fn occupied_mass(m: &MassFunction) -> f64 {
    m.belief_in(OCCUPIED)
}

/// Next accumulator value: grows by `delta_inc` while the cell is occupied
/// without conflict, shrinks by `delta_dec` when the conflict exceeds
/// `gamma_empty`, otherwise holds.
pub fn update_accumulator(
    zeta_prev: f64,
    m_pg_new: &MassFunction,
    conflicts: &ConflictPair,
    params: &FusionParams,
) -> f64 {
    let conflict = conflicts.dynamic();
    let zeta = if occupied_mass(m_pg_new) >= params.gamma_o && conflict <= params.gamma_empty {
        zeta_prev + params.delta_inc
    } else if conflict > params.gamma_empty {
        zeta_prev - params.delta_dec
    } else {
        zeta_prev
    };
    // Repeated steps such as 10 × 0.1 stop an ulp short of the bound.
    if zeta >= 1.0 - ZETA_SNAP {
        1.0
    } else if zeta <= ZETA_SNAP {
        0.0
    } else {
        zeta
    }
}

/// Accumulator values this close to 0 or 1 are snapped to the bound.
const ZETA_SNAP: f64 = 1e-9;

/// The specialization matrix driven by `ζ`: every set `A ∋ M` other than
/// `{M}` itself sends `ζ·m(A)` to `A \ {M}`.
pub fn accumulator_specialization(zeta: f64) -> Result<Specialization, FusionError> {
    let frame = omega_pg().clone();
    let mut s = Specialization::identity(frame.clone());
    for a in frame.subsets() {
        if M.is_subset_of(a) && a != M {
            s.set_column(a, vec![(a.without(M), zeta), (a, 1.0 - zeta)])?;
        }
    }
    Ok(s)
}

/// Applies [`accumulator_specialization`] directly, without building the
/// matrix.
pub fn apply_accumulator_specialization(
    m: &MassFunction,
    zeta: f64,
) -> Result<MassFunction, FusionError> {
    check_pg(m)?;
    if !(0.0..=1.0).contains(&zeta) {
        return Err(FusionError::InvalidParam {
            name: "zeta",
            value: zeta,
        });
    }
    let mut masses = vec![0.0; m.frame().subset_count()];
    for (a, mass) in m.focal_elements() {
        if M.is_subset_of(a) && a != M {
            masses[a.without(M).index()] += zeta * mass;
            masses[a.index()] += (1.0 - zeta) * mass;
        } else {
            masses[a.index()] += mass;
        }
    }
    Ok(MassFunction::new(m.frame().clone(), masses)?)
}
