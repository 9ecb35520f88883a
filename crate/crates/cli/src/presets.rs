//! The three measured circuits.

use std::fmt;
use std::str::FromStr;

use fractance::network::{make_alternating_ladder, make_nested_ladder};
use fractance::LadderSpec64;
use serde::{Deserialize, Serialize};

pub const R1: f64 = 2000.0;
pub const R2: f64 = 8200.0;
pub const C: f64 = 470e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Dl060,
    Dl130,
    Nl14x14,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Dl060, Preset::Dl130, Preset::Nl14x14];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Dl060 => "dl060",
            Preset::Dl130 => "dl130",
            Preset::Nl14x14 => "nl14x14",
        }
    }

    pub fn spec(self) -> LadderSpec64 {
        let ladder = |n| make_alternating_ladder(R1, R2, C, n).expect("preset parameters are valid");
        match self {
            Preset::Dl060 => ladder(60),
            Preset::Dl130 => ladder(130),
            Preset::Nl14x14 => make_nested_ladder(R1, R2, &ladder(14), 14).expect("preset parameters are valid"),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown preset {s:?}; expected dl060, dl130 or nl14x14"))
    }
}
