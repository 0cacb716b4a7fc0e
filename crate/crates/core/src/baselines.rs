//! The proposed scheme and the fixed-array comparison schemes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ao::{run_ao_with, AoPlan, LayoutPolicy, Solution};
use crate::error::{Error, Result};
use crate::fa_pso::{ArrayLayout, FEASIBILITY_TOL};
use crate::scenario::{ReceiveGeometry, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeId {
    /// Trajectory, beamforming and both antenna arrays optimized.
    Proposed,
    /// Only the transmit antennas move; the receive array is a fixed ULA.
    Tfao,
    /// Both arrays fixed, spread uniformly over the whole region.
    Sula,
    /// Both arrays fixed at half-wavelength spacing.
    Dula,
}

impl SchemeId {
    pub const ALL: [SchemeId; 4] = [SchemeId::Proposed, SchemeId::Tfao, SchemeId::Sula, SchemeId::Dula];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::Proposed => "proposed",
            SchemeId::Tfao => "tfao",
            SchemeId::Sula => "sula",
            SchemeId::Dula => "dula",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::InvalidArgument(format!("unknown scheme '{s}' (expected proposed, tfao, sula or dula)"))
            })
    }
}

/// `count` coordinates spaced `D/(count−1)` from 0 to `D`.
pub fn sula_layout(count: usize, aperture: f64, min_spacing: f64) -> Result<Vec<f64>> {
    if count <= 1 {
        return Ok(vec![0.0; count]);
    }
    let spacing = aperture / (count - 1) as f64;
    if spacing < min_spacing - FEASIBILITY_TOL {
        return Err(Error::ApertureTooSmall {
            count,
            min_spacing,
            required: (count - 1) as f64 * min_spacing,
            aperture,
        });
    }
    Ok((0..count)
        .map(|i| if i + 1 == count { aperture } else { i as f64 * spacing })
        .collect())
}

/// `count` coordinates at half-wavelength spacing starting at 0.
pub fn dula_layout(count: usize, wavelength: f64, aperture: f64) -> Result<Vec<f64>> {
    let spacing = wavelength / 2.0;
    let span = count.saturating_sub(1) as f64 * spacing;
    if span > aperture + FEASIBILITY_TOL {
        return Err(Error::ApertureTooSmall {
            count,
            min_spacing: spacing,
            required: span,
            aperture,
        });
    }
    Ok((0..count).map(|i| i as f64 * spacing).collect())
}

/// Starting layout and layout policy for a scheme.
pub fn plan(scheme: SchemeId, scenario: &Scenario) -> Result<AoPlan> {
    let dula = ArrayLayout::dula(scenario)?;
    let sula = ArrayLayout::sula(scenario)?;
    Ok(match scheme {
        SchemeId::Proposed => AoPlan {
            initial_layout: dula,
            policy: LayoutPolicy::Optimize,
        },
        SchemeId::Tfao => AoPlan {
            initial_layout: ArrayLayout {
                tx: dula.tx,
                rx: match scenario.tfao_receive {
                    ReceiveGeometry::Sula => sula.rx,
                    ReceiveGeometry::Dula => dula.rx,
                },
            },
            policy: LayoutPolicy::TransmitOnly,
        },
        SchemeId::Sula => AoPlan {
            initial_layout: sula,
            policy: LayoutPolicy::Frozen,
        },
        SchemeId::Dula => AoPlan {
            initial_layout: dula,
            policy: LayoutPolicy::Frozen,
        },
    })
}

pub fn run_scheme(scheme: SchemeId, scenario: &Scenario) -> Result<Solution> {
    run_ao_with(scenario, &plan(scheme, scenario)?)
}
