//! Strategies, brute-force oracles and property checks shared by the
//! property tests and the acceptance suite.
#![allow(dead_code)]

use std::sync::Arc;

use evigrid::dst::{
    combine_conjunctive, combine_dempster, combine_disjunctive, combine_yager, discount, pignistic,
    refine, specialize, DstError, FrameOfDiscernment, MassFunction, Refining, Specialization,
    Subset,
};
use evigrid::fusion::{
    accumulator_specialization, apply_accumulator_specialization, conflict_masses, fuse_pg,
    omega_pg, step, step_cell, FusionParams, OCCUPIED,
};
use evigrid::grid::{EvidentialGrid, GridSpec, PerceptionCell, PerceptionGrid};
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const TOL: f64 = 1e-9;

pub fn frame(n: usize) -> Arc<FrameOfDiscernment> {
    let labels: Vec<String> = (0..n).map(|k| format!("h{k}")).collect();
    Arc::new(FrameOfDiscernment::new(labels).unwrap())
}

/// Dense masses over the `2^n` subsets, `m(∅) = 0`, some subsets left
/// empty so that focal sets vary.
pub fn normal_masses(n: usize) -> impl Strategy<Value = Vec<f64>> {
    let count = 1usize << n;
    prop::collection::vec((0.0..1.0f64, prop::bool::weighted(0.6)), count - 1).prop_map(
        move |weights| {
            let mut masses = vec![0.0];
            masses.extend(weights.iter().map(|&(w, keep)| if keep { w } else { 0.0 }));
            masses[count - 1] += 1e-3;
            let total: f64 = masses.iter().sum();
            masses.iter().map(|m| m / total).collect()
        },
    )
}

pub fn mass_on(frame: Arc<FrameOfDiscernment>) -> impl Strategy<Value = MassFunction> {
    normal_masses(frame.len()).prop_map(move |m| MassFunction::new(frame.clone(), m).unwrap())
}

/// A frame of size 2..=4 and `k` mass functions on it.
pub fn masses_on_random_frame(k: usize) -> impl Strategy<Value = Vec<MassFunction>> {
    (2usize..=4).prop_flat_map(move |n| prop::collection::vec(mass_on(frame(n)), k))
}

pub fn pg_mass() -> impl Strategy<Value = MassFunction> {
    mass_on(omega_pg().clone())
}

/// Perception-frame masses whose focal sets all lie inside `{I, U, S, M}`.
pub fn occupied_only_pg_mass() -> impl Strategy<Value = MassFunction> {
    prop::collection::vec(0.0..1.0f64, 15).prop_map(|w| {
        let frame = omega_pg().clone();
        let mut masses = vec![0.0; 32];
        let occupied: Vec<Subset> = frame
            .subsets()
            .filter(|s| !s.is_empty() && s.is_subset_of(OCCUPIED))
            .collect();
        for (s, w) in occupied.iter().zip(&w) {
            masses[s.index()] = *w + 1e-3;
        }
        let total: f64 = masses.iter().sum();
        MassFunction::new(frame, masses.iter().map(|m| m / total).collect()).unwrap()
    })
}

// Oracles: straight double loops over every pair of subsets, written
// without the library's focal-element iteration.

pub fn oracle_combine(m1: &[f64], m2: &[f64], op: fn(usize, usize) -> usize) -> Vec<f64> {
    let size = m1.len();
    let mut out = vec![0.0; size];
    for b in 0..size {
        for c in 0..size {
            out[op(b, c)] += m1[b] * m2[c];
        }
    }
    out
}

pub fn oracle_conjunctive(m1: &[f64], m2: &[f64]) -> Vec<f64> {
    oracle_combine(m1, m2, |b, c| b & c)
}

pub fn oracle_disjunctive(m1: &[f64], m2: &[f64]) -> Vec<f64> {
    oracle_combine(m1, m2, |b, c| b | c)
}

pub fn oracle_dempster(m1: &[f64], m2: &[f64]) -> Option<Vec<f64>> {
    let mut out = oracle_conjunctive(m1, m2);
    let k = out[0];
    if k >= 1.0 - 1e-12 {
        return None;
    }
    out[0] = 0.0;
    Some(out.iter().map(|m| m / (1.0 - k)).collect())
}

pub fn oracle_yager(m1: &[f64], m2: &[f64]) -> Vec<f64> {
    let mut out = oracle_conjunctive(m1, m2);
    let last = out.len() - 1;
    out[last] += out[0];
    out[0] = 0.0;
    out
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn close(a: &[f64], b: &[f64], what: &str) -> Result<(), TestCaseError> {
    let d = max_diff(a, b);
    prop_assert!(d <= TOL, "{}: differs by {}", what, d);
    Ok(())
}

fn sums_to_one(m: &MassFunction, what: &str) -> Result<(), TestCaseError> {
    prop_assert!(
        (m.total() - 1.0).abs() <= TOL,
        "{}: total {}",
        what,
        m.total()
    );
    prop_assert!(
        m.masses().iter().all(|&x| (0.0..=1.0 + TOL).contains(&x)),
        "{}: mass out of range",
        what
    );
    Ok(())
}

fn normal(m: &MassFunction, what: &str) -> Result<(), TestCaseError> {
    sums_to_one(m, what)?;
    prop_assert!(m.conflict() == 0.0, "{}: m(∅) = {}", what, m.conflict());
    Ok(())
}

// Property checks. Each takes generated inputs and fails with a message.

pub fn prop_normalization(ms: &[MassFunction], alpha: f64, zeta: f64) -> Result<(), TestCaseError> {
    let (m1, m2) = (&ms[0], &ms[1]);
    sums_to_one(&combine_conjunctive(m1, m2).unwrap(), "conjunctive")?;
    normal(&combine_disjunctive(m1, m2).unwrap(), "disjunctive")?;
    normal(&combine_yager(m1, m2).unwrap(), "yager")?;
    match combine_dempster(m1, m2) {
        Ok(m) => normal(&m, "dempster")?,
        Err(DstError::TotalConflict) => {}
        Err(e) => return Err(TestCaseError::fail(e.to_string())),
    }
    normal(&discount(m1, alpha).unwrap(), "discount")?;
    let p = pignistic(m1).unwrap();
    let total: f64 = p.probabilities().iter().sum();
    prop_assert!((total - 1.0).abs() <= TOL, "pignistic total {}", total);
    let pg = embed_in_pg(m1);
    normal(
        &apply_accumulator_specialization(&pg, zeta).unwrap(),
        "specialization",
    )?;
    Ok(())
}

/// Copies masses of a small frame onto the perception frame, index by index.
fn embed_in_pg(m: &MassFunction) -> MassFunction {
    let mut masses = vec![0.0; 32];
    let omega = m.frame().omega();
    for (s, v) in m.focal_elements() {
        let target = if s == omega { 31 } else { s.index() };
        masses[target] += v;
    }
    MassFunction::new(omega_pg().clone(), masses).unwrap()
}

pub fn prop_commutative_associative(ms: &[MassFunction]) -> Result<(), TestCaseError> {
    let (a, b, c) = (&ms[0], &ms[1], &ms[2]);
    type Rule = fn(&MassFunction, &MassFunction) -> Result<MassFunction, DstError>;
    for (name, rule) in [
        ("conjunctive", combine_conjunctive as Rule),
        ("disjunctive", combine_disjunctive as Rule),
    ] {
        let ab = rule(a, b).unwrap();
        let ba = rule(b, a).unwrap();
        close(ab.masses(), ba.masses(), &format!("{name} commutativity"))?;
        let left = rule(&ab, c).unwrap();
        let right = rule(a, &rule(b, c).unwrap()).unwrap();
        close(
            left.masses(),
            right.masses(),
            &format!("{name} associativity"),
        )?;
    }
    Ok(())
}

pub fn prop_dempster_is_normalized_conjunction(ms: &[MassFunction]) -> Result<(), TestCaseError> {
    let conj = combine_conjunctive(&ms[0], &ms[1]).unwrap();
    match (combine_dempster(&ms[0], &ms[1]), conj.normalized()) {
        (Ok(d), Ok(n)) => close(d.masses(), n.masses(), "dempster vs normalized conjunctive"),
        (Err(DstError::TotalConflict), Err(DstError::TotalConflict)) => Ok(()),
        (d, n) => Err(TestCaseError::fail(format!("mismatch: {d:?} vs {n:?}"))),
    }
}

pub fn prop_vacuous_neutrality(m: &MassFunction) -> Result<(), TestCaseError> {
    let vac = MassFunction::vacuous(m.frame().clone());
    close(
        combine_conjunctive(m, &vac).unwrap().masses(),
        m.masses(),
        "conjunctive",
    )?;
    close(
        combine_dempster(m, &vac).unwrap().masses(),
        m.masses(),
        "dempster",
    )?;
    close(
        combine_yager(&vac, m).unwrap().masses(),
        m.masses(),
        "yager",
    )?;
    close(
        combine_disjunctive(m, &vac).unwrap().masses(),
        vac.masses(),
        "disjunctive absorbs into vacuous",
    )?;
    Ok(())
}

pub fn prop_discount_composition(m: &MassFunction, a: f64, b: f64) -> Result<(), TestCaseError> {
    let twice = discount(&discount(m, a).unwrap(), b).unwrap();
    let once = discount(m, 1.0 - (1.0 - a) * (1.0 - b)).unwrap();
    close(twice.masses(), once.masses(), "discount composition")?;
    close(discount(m, 0.0).unwrap().masses(), m.masses(), "alpha = 0")?;
    close(
        discount(m, 1.0).unwrap().masses(),
        MassFunction::vacuous(m.frame().clone()).masses(),
        "alpha = 1",
    )
}

/// A coarse frame of size `assignment.max()+1` refined onto a frame of size
/// `assignment.len()`: target element `k` belongs to coarse element
/// `assignment[k]`.
pub fn refining_from(assignment: &[usize]) -> Option<Refining> {
    let coarse = assignment.iter().max()? + 1;
    let mut images = vec![Subset::EMPTY; coarse];
    for (k, &a) in assignment.iter().enumerate() {
        images[a] = images[a] | Subset::singleton(k);
    }
    if images.iter().any(|s| s.is_empty()) {
        return None;
    }
    Refining::new(frame(coarse), frame(assignment.len()), images).ok()
}

pub fn refining_strategy() -> impl Strategy<Value = Refining> {
    (2usize..=5)
        .prop_flat_map(|fine| prop::collection::vec(0usize..fine.min(3), fine))
        .prop_filter_map("every coarse element needs an image", |a| refining_from(&a))
}

pub fn prop_refine_commutes(r: &Refining, w1: &[f64], w2: &[f64]) -> Result<(), TestCaseError> {
    let size = r.source().subset_count();
    let make = |w: &[f64]| {
        let mut masses = vec![0.0];
        masses.extend(w.iter().take(size - 1).map(|x| x + 1e-3));
        let total: f64 = masses.iter().sum();
        MassFunction::new(
            r.source().clone(),
            masses.iter().map(|m| m / total).collect(),
        )
        .unwrap()
    };
    let (m1, m2) = (make(w1), make(w2));
    let left = refine(&combine_conjunctive(&m1, &m2).unwrap(), r).unwrap();
    let right = combine_conjunctive(&refine(&m1, r).unwrap(), &refine(&m2, r).unwrap()).unwrap();
    close(
        left.masses(),
        right.masses(),
        "refine after vs before conjunctive",
    )?;
    let left = refine(&combine_disjunctive(&m1, &m2).unwrap(), r).unwrap();
    let right = combine_disjunctive(&refine(&m1, r).unwrap(), &refine(&m2, r).unwrap()).unwrap();
    close(
        left.masses(),
        right.masses(),
        "refine after vs before disjunctive",
    )
}

/// Random specialization: each column spreads over random subsets of its
/// source set.
pub fn prop_specialization_preserves_mass(
    m: &MassFunction,
    seeds: &[f64],
    zeta: f64,
) -> Result<(), TestCaseError> {
    let frame = m.frame().clone();
    let mut s = Specialization::identity(frame.clone());
    let mut seed = seeds.iter().cycle();
    for source in frame.subsets() {
        let subsets: Vec<Subset> = frame.subsets().filter(|t| t.is_subset_of(source)).collect();
        let weights: Vec<f64> = subsets.iter().map(|_| *seed.next().unwrap()).collect();
        let total: f64 = weights.iter().sum::<f64>() + 1e-3;
        let mut entries: Vec<(Subset, f64)> = subsets
            .iter()
            .zip(&weights)
            .map(|(t, w)| (*t, w / total))
            .collect();
        entries.push((source, 1e-3 / total));
        s.set_column(source, entries).unwrap();
    }
    let out = specialize(m, &s).unwrap();
    prop_assert!(
        (out.total() - 1.0).abs() <= TOL,
        "specialized total {}",
        out.total()
    );

    let pg = embed_in_pg(m);
    let direct = apply_accumulator_specialization(&pg, zeta).unwrap();
    let matrix = specialize(&pg, &accumulator_specialization(zeta).unwrap()).unwrap();
    normal(&direct, "accumulator specialization")?;
    close(
        direct.masses(),
        matrix.masses(),
        "direct vs matrix specialization",
    )
}

pub fn prop_fuse_conflict_conservation(
    prev: &MassFunction,
    cur: &MassFunction,
) -> Result<(), TestCaseError> {
    let conj = combine_conjunctive(prev, cur).unwrap();
    let (fused, c) = fuse_pg(prev, cur).unwrap();
    prop_assert!(c.fo >= 0.0 && c.of >= 0.0 && c.residual >= 0.0);
    prop_assert!(
        (c.total() - conj.conflict()).abs() <= TOL,
        "fo+of+residual = {} but conjunctive conflict is {}",
        c.total(),
        conj.conflict()
    );
    prop_assert_eq!(fused.conflict(), 0.0);
    normal(&fused, "fused")?;
    let split = conflict_masses(prev, cur).unwrap();
    prop_assert_eq!(split, c);
    Ok(())
}

/// Without free evidence in the previous cell no conflict can be an
/// appearance, and the rule reduces to Yager's.
pub fn prop_fuse_is_yager_without_appearance(
    prev: &MassFunction,
    cur: &MassFunction,
) -> Result<(), TestCaseError> {
    let (fused, c) = fuse_pg(prev, cur).unwrap();
    prop_assert_eq!(c.fo, 0.0);
    close(
        fused.masses(),
        combine_yager(prev, cur).unwrap().masses(),
        "fuse vs yager",
    )
}

/// The grid step matches a sequential loop over cells bit for bit.
pub fn prop_parallel_matches_sequential(
    prev: &[MassFunction],
    sg: &[f64],
    gg: &[MassFunction],
    zeta: &[f64],
) -> Result<(), TestCaseError> {
    let n = prev.len();
    let spec = GridSpec::new(0.0, 0.0, 0.5, n, 1).unwrap();
    let sg_frame = evigrid::fusion::omega_sg().clone();
    let sg_cells: Vec<MassFunction> = sg
        .iter()
        .map(|&w| {
            MassFunction::from_focal(
                sg_frame.clone(),
                &[
                    (Subset::singleton(0), w * 0.5),
                    (Subset::singleton(1), (1.0 - w) * 0.5),
                    (sg_frame.omega(), 0.5),
                ],
            )
            .unwrap()
        })
        .collect();
    let cells: Vec<PerceptionCell> = prev
        .iter()
        .zip(zeta)
        .map(|(m, &z)| PerceptionCell::new(m.clone(), z).unwrap())
        .collect();
    let pg = PerceptionGrid::from_cells(spec, cells.clone()).unwrap();
    let sg_grid = EvidentialGrid::from_cells(spec, sg_frame, sg_cells.clone()).unwrap();
    let gg_grid = EvidentialGrid::from_cells(spec, omega_pg().clone(), gg.to_vec()).unwrap();
    let params = FusionParams::default();
    let out = step(&pg, &sg_grid, &gg_grid, &params).unwrap();
    for k in 0..n {
        let (cell, _) = step_cell(&cells[k], &sg_cells[k], &gg[k], &params).unwrap();
        prop_assert_eq!(&out.grid.cells()[k], &cell);
    }
    Ok(())
}
