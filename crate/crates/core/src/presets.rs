//! Named parameter sets.

use crate::geom::{vec2, Vec2};
use crate::swarm::SwarmParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Precise formation gains.
    Fig4,
    /// Coverage formation gains.
    Fig5,
    /// Coverage gains plus frame negotiation.
    Fig6,
}

impl Preset {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "fig4" => Some(Preset::Fig4),
            "fig5" => Some(Preset::Fig5),
            "fig6" => Some(Preset::Fig6),
            _ => None,
        }
    }

    pub fn params(self) -> SwarmParams {
        let base = SwarmParams {
            r_sense: 1.3,
            v_max: 2.0,
            ..SwarmParams::default()
        };
        match self {
            Preset::Fig4 => SwarmParams {
                c1: 1.0,
                c2: 0.4,
                sigma: 0.22,
                kappa1: 3.0,
                kappa2: 10.0,
                kappa3: 1.0,
                ..base
            },
            Preset::Fig5 => SwarmParams {
                sigma1: 2.0,
                sigma2: 10.0,
                kappa2: 4.0,
                kappa3: 20.0,
                ..base
            },
            Preset::Fig6 => SwarmParams {
                c1n: 1.6,
                c2n: 1.6,
                c3n: 1.6,
                c4n: 1.6,
                alpha: 0.8,
                ..Preset::Fig5.params()
            },
        }
    }

    /// World position of the grid's origin cell in static coverage runs.
    pub fn anchor(self) -> Vec2 {
        match self {
            Preset::Fig4 => Vec2::zeros(),
            Preset::Fig5 | Preset::Fig6 => vec2(11.1, 11.1),
        }
    }
}
