use serde::{Deserialize, Serialize};

use super::{FusionError, BUILDING, INTERMEDIATE, ROAD};
use crate::dst::MassFunction;

/// Per-map-context discount factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextAlpha {
    pub building: f64,
    pub road: f64,
    pub intermediate: f64,
}

/// The map context of a prior cell, from its non-`Ω` focal element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapContext {
    Building,
    Road,
    Intermediate,
}

impl MapContext {
    /// `None` for a vacuous prior or one that carries none of the three
    /// context sets.
    pub fn of_prior(gg: &MassFunction) -> Option<Self> {
        [
            (MapContext::Building, gg.mass(BUILDING)),
            (MapContext::Road, gg.mass(ROAD)),
            (MapContext::Intermediate, gg.mass(INTERMEDIATE)),
        ]
        .into_iter()
        .filter(|(_, m)| *m > 0.0)
        .fold(
            None,
            |best: Option<(MapContext, f64)>, (ctx, m)| match best {
                Some((_, bm)) if bm >= m => best,
                _ => Some((ctx, m)),
            },
        )
        .map(|(ctx, _)| ctx)
    }
}

/// Tuning of the temporal fusion. Every field is optional in config files
/// and falls back to the documented default.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FusionParams {
    /// Discount applied to the previous perception grid each epoch.
    #[serde(default = "defaults::alpha")]
    pub alpha: f64,
    #[serde(default = "defaults::delta_inc")]
    pub delta_inc: f64,
    #[serde(default = "defaults::delta_dec")]
    pub delta_dec: f64,
    /// Minimum occupied mass for the accumulator to grow.
    #[serde(default = "defaults::gamma_o")]
    pub gamma_o: f64,
    /// Conflict (`∅_FO + ∅_OF`) above which the accumulator shrinks.
    #[serde(default = "defaults::gamma_empty")]
    pub gamma_empty: f64,
    /// Decisions whose best pignistic probability is below this are UNKNOWN.
    #[serde(default = "defaults::unknown_threshold")]
    pub unknown_threshold: f64,
    /// Optional discount per map context; `alpha` is used when absent and
    /// for cells without a context.
    #[serde(default)]
    pub context_alpha: Option<ContextAlpha>,
}

mod defaults {
    pub fn alpha() -> f64 {
        0.05
    }
    pub fn delta_inc() -> f64 {
        0.2
    }
    pub fn delta_dec() -> f64 {
        0.4
    }
    pub fn gamma_o() -> f64 {
        0.6
    }
    pub fn gamma_empty() -> f64 {
        0.3
    }
    pub fn unknown_threshold() -> f64 {
        0.5
    }
}

impl Default for FusionParams {
    fn default() -> Self {
        Self {
            alpha: defaults::alpha(),
            delta_inc: defaults::delta_inc(),
            delta_dec: defaults::delta_dec(),
            gamma_o: defaults::gamma_o(),
            gamma_empty: defaults::gamma_empty(),
            unknown_threshold: defaults::unknown_threshold(),
            context_alpha: None,
        }
    }
}

impl FusionParams {
    pub fn validate(&self) -> Result<(), FusionError> {
        let mut fields = vec![
            ("alpha", self.alpha),
            ("delta_inc", self.delta_inc),
            ("delta_dec", self.delta_dec),
            ("gamma_o", self.gamma_o),
            ("gamma_empty", self.gamma_empty),
            ("unknown_threshold", self.unknown_threshold),
        ];
        if let Some(ctx) = &self.context_alpha {
            fields.extend([
                ("context_alpha.building", ctx.building),
                ("context_alpha.road", ctx.road),
                ("context_alpha.intermediate", ctx.intermediate),
            ]);
        }
        for (name, value) in fields {
            if !(0.0..=1.0).contains(&value) {
                return Err(FusionError::InvalidParam { name, value });
            }
        }
        Ok(())
    }

    /// Discount factor for a cell with the given map prior.
    pub fn alpha_for(&self, gg: &MassFunction) -> f64 {
        match (&self.context_alpha, MapContext::of_prior(gg)) {
            (Some(table), Some(MapContext::Building)) => table.building,
            (Some(table), Some(MapContext::Road)) => table.road,
            (Some(table), Some(MapContext::Intermediate)) => table.intermediate,
            _ => self.alpha,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::{omega_pg, OMEGA_PG};

    #[test]
    fn defaults_parse_from_empty_table() {
        let p: FusionParams = toml::from_str("").unwrap();
        assert_eq!(p, FusionParams::default());
        assert!(p.validate().is_ok());
    }

    #[test]
    fn rejects_out_of_range() {
        let p = FusionParams {
            delta_dec: 1.5,
            ..FusionParams::default()
        };
        assert_eq!(
            p.validate(),
            Err(FusionError::InvalidParam {
                name: "delta_dec",
                value: 1.5
            })
        );
    }

    #[test]
    fn context_alpha_lookup() {
        let frame = omega_pg().clone();
        let road =
            MassFunction::from_focal(frame.clone(), &[(ROAD, 0.8), (OMEGA_PG, 0.2)]).unwrap();
        let vacuous = MassFunction::vacuous(frame);
        let mut p = FusionParams::default();
        assert_eq!(p.alpha_for(&road), 0.05);
        p.context_alpha = Some(ContextAlpha {
            building: 0.01,
            road: 0.2,
            intermediate: 0.1,
        });
        assert_eq!(p.alpha_for(&road), 0.2);
        assert_eq!(p.alpha_for(&vacuous), 0.05);
        assert_eq!(MapContext::of_prior(&road), Some(MapContext::Road));
    }
}
