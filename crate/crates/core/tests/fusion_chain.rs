//! Multi-epoch single-cell runs checked against a dense, bit-twiddling
//! re-implementation of one epoch, and against hand-computed values.

mod common;

use common::*;
use evigrid::dst::{pignistic, MassFunction};
use evigrid::fusion::{
    decide, fuse_pg, omega_pg, omega_sg, refine_sg, step_cell, Decision, FusionParams, I, M,
    SG_FREE, SG_OCCUPIED,
};
use evigrid::grid::PerceptionCell;
use proptest::prelude::*;

// Bits of the perception frame.
const BF: usize = 1;
const BI: usize = 2;
const BM: usize = 16;
const BOCC: usize = 0b11110;
const BOMEGA: usize = 0b11111;

fn sg(free: f64, occ: f64) -> MassFunction {
    let frame = omega_sg().clone();
    let omega = frame.omega();
    MassFunction::from_focal(
        frame,
        &[
            (SG_FREE, free),
            (SG_OCCUPIED, occ),
            (omega, 1.0 - free - occ),
        ],
    )
    .unwrap()
}

fn prior(bits: usize, beta: f64) -> MassFunction {
    let mut m = vec![0.0; 32];
    m[bits] += beta;
    m[BOMEGA] += 1.0 - beta;
    MassFunction::new(omega_pg().clone(), m).unwrap()
}

/// One epoch on dense arrays, straight from the definitions.
fn oracle_epoch(
    prev: &[f64],
    zeta: f64,
    sg: &[f64],
    gg: &[f64],
    p: &FusionParams,
) -> (Vec<f64>, f64) {
    // {F} -> {F}, {O} -> {I,U,S,M}, Ω -> Ω
    let mut refined = vec![0.0; 32];
    refined[BF] += sg[1];
    refined[BOCC] += sg[2];
    refined[BOMEGA] += sg[3];
    let current = oracle_dempster(&refined, gg).expect("prior is compatible");

    let mut special = vec![0.0; 32];
    for a in 0..32 {
        if a & BM != 0 && a != BM {
            special[a & !BM] += zeta * prev[a];
            special[a] += (1.0 - zeta) * prev[a];
        } else {
            special[a] += prev[a];
        }
    }
    let aged: Vec<f64> = (0..32)
        .map(|a| (1.0 - p.alpha) * special[a] + if a == BOMEGA { p.alpha } else { 0.0 })
        .collect();

    let mut fused = vec![0.0; 32];
    let (mut fo, mut of) = (0.0, 0.0);
    for b in 1..32 {
        for c in 1..32 {
            let w = aged[b] * current[c];
            if w == 0.0 {
                continue;
            }
            if b & c != 0 {
                fused[b & c] += w;
            } else if b & BF == 0 && c & BF != 0 {
                of += w;
                fused[BOMEGA] += w;
            } else if b & BF != 0 && c & BF == 0 {
                fo += w;
                fused[BM] += w;
            } else {
                fused[BOMEGA] += w;
            }
        }
    }
    let occupied: f64 = (1..32).filter(|a| a & BF == 0).map(|a| fused[a]).sum();
    let conflict = fo + of;
    let zeta = if occupied >= p.gamma_o && conflict <= p.gamma_empty {
        (zeta + p.delta_inc).min(1.0)
    } else if conflict > p.gamma_empty {
        (zeta - p.delta_dec).max(0.0)
    } else {
        zeta
    };
    (fused, zeta)
}

#[test]
fn appearing_object_matches_hand_computation() {
    let p = FusionParams::default();
    let gg = prior(BOMEGA, 1.0);
    let mut cell = PerceptionCell::fresh();

    // Free, then occupied twice.
    let (c1, _) = step_cell(&cell, &sg(0.7, 0.0), &gg, &p).unwrap();
    assert!((c1.mass.mass(evigrid::fusion::F) - 0.7).abs() < 1e-12);
    assert_eq!(c1.zeta, 0.0);
    cell = c1;

    let (c2, k2) = step_cell(&cell, &sg(0.0, 0.8), &gg, &p).unwrap();
    // aged {F}: 0.665, Ω: 0.335; ∅_FO = 0.665·0.8 goes to {M}
    assert!((k2.fo - 0.532).abs() < 1e-12);
    let m2 = c2.mass.masses();
    for (bits, want) in [(BM, 0.532), (BF, 0.133), (BOCC, 0.268), (BOMEGA, 0.067)] {
        assert!(
            (m2[bits] - want).abs() < 1e-12,
            "epoch 2 subset {bits:#b}: {}",
            m2[bits]
        );
    }
    // occupied mass 0.8 but conflict 0.532 > γ_∅: ζ decreases, clamped at 0
    assert_eq!(c2.zeta, 0.0);
    cell = c2;

    let (c3, k3) = step_cell(&cell, &sg(0.0, 0.8), &gg, &p).unwrap();
    assert!((k3.fo - 0.10108).abs() < 1e-12);
    let m3 = c3.mass.masses();
    for (bits, want) in [
        (BM, 0.60648),
        (BF, 0.02527),
        (BOCC, 0.34552),
        (BOMEGA, 0.02273),
    ] {
        assert!(
            (m3[bits] - want).abs() < 1e-12,
            "epoch 3 subset {bits:#b}: {}",
            m3[bits]
        );
    }
    assert!((c3.zeta - 0.2).abs() < 1e-12);
    let betp_m = pignistic(&c3.mass).unwrap().prob_of(M);
    assert!((betp_m - (0.60648 + 0.34552 / 4.0 + 0.02273 / 5.0)).abs() < 1e-12);
    assert_eq!(
        decide(&c3.mass, p.unknown_threshold).unwrap(),
        Decision::Moving
    );
}

#[test]
fn building_cell_is_reinforced_towards_infrastructure() {
    let p = FusionParams::default();
    let gg = prior(BI, 0.9);
    let mut cell = PerceptionCell::fresh();
    for _ in 0..5 {
        cell = step_cell(&cell, &sg(0.0, 0.8), &gg, &p).unwrap().0;
    }
    assert!(cell.mass.mass(I) > 0.9, "m(I) = {}", cell.mass.mass(I));
    assert_eq!(
        decide(&cell.mass, p.unknown_threshold).unwrap(),
        Decision::Infrastructure
    );
}

#[test]
fn stopped_object_on_the_road_becomes_stopped() {
    let p = FusionParams::default();
    let gg = prior(0b11001, 0.8);
    let mut cell = PerceptionCell::fresh();
    let mut decisions = Vec::new();
    for _ in 0..10 {
        cell = step_cell(&cell, &sg(0.0, 0.8), &gg, &p).unwrap().0;
        decisions.push(decide(&cell.mass, p.unknown_threshold).unwrap());
    }
    assert_eq!(cell.zeta, 1.0);
    assert_eq!(*decisions.last().unwrap(), Decision::Stopped);
    assert!(!decisions.contains(&Decision::Infrastructure));
}

#[test]
fn accumulator_reaches_one_despite_rounding() {
    let gg = prior(BOMEGA, 1.0);
    for delta_inc in [0.1, 0.3, 0.7, 1.0 / 3.0, 0.05] {
        let p = FusionParams {
            delta_inc,
            ..FusionParams::default()
        };
        let mut cell = PerceptionCell::fresh();
        for _ in 0..(1.0 / delta_inc).ceil() as usize {
            cell = step_cell(&cell, &sg(0.0, 0.8), &gg, &p).unwrap().0;
        }
        assert_eq!(cell.zeta, 1.0, "delta_inc {delta_inc}");
    }
}

fn sg_strategy() -> impl Strategy<Value = (f64, f64)> {
    // free and occupied support of one cell, merged as the sensor model does
    (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(wf, wo)| {
        let k = wf * wo;
        if k >= 1.0 - 1e-9 {
            (0.0, 0.0)
        } else {
            (wf * (1.0 - wo) / (1.0 - k), wo * (1.0 - wf) / (1.0 - k))
        }
    })
}

fn gg_strategy() -> impl Strategy<Value = MassFunction> {
    (
        prop::sample::select(vec![BI, 0b11001, 0b11101, BOMEGA]),
        0.0..=1.0f64,
    )
        .prop_map(|(bits, beta)| prior(bits, beta))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn epochs_match_the_dense_oracle(
        sgs in prop::collection::vec(sg_strategy(), 1..15),
        gg in gg_strategy(),
        alpha in 0.0..=0.3f64,
        delta_inc in 0.05..=1.0f64,
    ) {
        let p = FusionParams { alpha, delta_inc, ..FusionParams::default() };
        let mut cell = PerceptionCell::fresh();
        let mut dense = cell.mass.masses().to_vec();
        let mut zeta = 0.0;
        for &(f, o) in &sgs {
            let sgm = sg(f, o);
            cell = step_cell(&cell, &sgm, &gg, &p).unwrap().0;
            let (d, z) = oracle_epoch(&dense, zeta, sgm.masses(), gg.masses(), &p);
            dense = d;
            zeta = z;
            prop_assert!(max_diff(cell.mass.masses(), &dense) < 1e-9);
            prop_assert!((cell.zeta - zeta).abs() < 1e-9);
        }
    }

    #[test]
    fn accumulator_saturates_under_steady_occupancy(
        mu_o in 0.6..=1.0f64,
        delta_inc in 0.05..=1.0f64,
    ) {
        let p = FusionParams { delta_inc, ..FusionParams::default() };
        let gg = prior(BOMEGA, 1.0);
        let needed = (1.0 / delta_inc).ceil() as usize;
        let mut cell = PerceptionCell::fresh();
        let mut last = 0.0;
        for _ in 0..needed {
            cell = step_cell(&cell, &sg(0.0, mu_o), &gg, &p).unwrap().0;
            prop_assert!(cell.zeta >= last);
            last = cell.zeta;
        }
        prop_assert_eq!(cell.zeta, 1.0);
    }

    #[test]
    fn vacuous_prior_is_the_map_free_pipeline(
        prev in pg_mass(),
        zeta in 0.0..=1.0f64,
        (f, o) in sg_strategy(),
    ) {
        let p = FusionParams::default();
        let start = PerceptionCell::new(prev, zeta).unwrap();
        let sgm = sg(f, o);
        let with_prior = step_cell(&start, &sgm, &prior(BOMEGA, 1.0), &p).unwrap().0;
        let special = evigrid::fusion::apply_accumulator_specialization(&start.mass, zeta).unwrap();
        let aged = evigrid::dst::discount(&special, p.alpha).unwrap();
        let (map_free, _) = fuse_pg(&aged, &refine_sg(&sgm).unwrap()).unwrap();
        prop_assert_eq!(with_prior.mass.masses(), map_free.masses());
    }
}
