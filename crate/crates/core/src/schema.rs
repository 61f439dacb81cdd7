//! The fixed seven-variable schema of a daily weather snapshot, with units
//! and inclusive value ranges, plus the binary event label.
//!
//! Wind is carried as two signed components (eastward `wind_u`, northward
//! `wind_v`); unlike the other non-negative variables they are exempt from
//! a lower bound, since signed components are the standard convention for
//! reanalysis products.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub const VARIABLE_COUNT: usize = 7;

/// One of the seven per-cell meteorological variables, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    Temperature,
    WindU,
    WindV,
    Precipitation,
    ColumnRainWater,
    LargeScaleRainRate,
    CloudCover,
}

impl Variable {
    pub const ALL: [Variable; VARIABLE_COUNT] = [
        Variable::Temperature,
        Variable::WindU,
        Variable::WindV,
        Variable::Precipitation,
        Variable::ColumnRainWater,
        Variable::LargeScaleRainRate,
        Variable::CloudCover,
    ];

    pub fn key(self) -> &'static str {
        self.descriptor().key
    }

    pub fn unit(self) -> &'static str {
        self.descriptor().unit
    }

    /// Inclusive bounds; `None` means unbounded on that side.
    pub fn bounds(self) -> (Option<f64>, Option<f64>) {
        let d = self.descriptor();
        (d.lower, d.upper)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_key(key: &str) -> Option<Variable> {
        Variable::ALL.into_iter().find(|v| v.key() == key)
    }

    pub fn descriptor(self) -> &'static VariableDescriptor {
        &SCHEMA[self as usize]
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Static description of one variable: canonical key, unit, inclusive range.
#[derive(Clone, Copy, Debug)]
pub struct VariableDescriptor {
    pub variable: Variable,
    pub key: &'static str,
    pub unit: &'static str,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
}

/// The ordered list of the seven variable descriptors.
pub type VariableSchema = [VariableDescriptor; VARIABLE_COUNT];

pub const SCHEMA: VariableSchema = [
    VariableDescriptor {
        variable: Variable::Temperature,
        key: "temperature",
        unit: "K",
        lower: Some(0.0),
        upper: None,
    },
    VariableDescriptor {
        variable: Variable::WindU,
        key: "wind_u",
        unit: "m s^-1",
        lower: None,
        upper: None,
    },
    VariableDescriptor {
        variable: Variable::WindV,
        key: "wind_v",
        unit: "m s^-1",
        lower: None,
        upper: None,
    },
    VariableDescriptor {
        variable: Variable::Precipitation,
        key: "precipitation",
        unit: "m",
        lower: Some(0.0),
        upper: None,
    },
    VariableDescriptor {
        variable: Variable::ColumnRainWater,
        key: "column_rain_water",
        unit: "kg m^-2",
        lower: Some(0.0),
        upper: None,
    },
    VariableDescriptor {
        variable: Variable::LargeScaleRainRate,
        key: "large_scale_rain_rate",
        unit: "kg m^-2 s^-1",
        lower: Some(0.0),
        upper: None,
    },
    VariableDescriptor {
        variable: Variable::CloudCover,
        key: "cloud_cover",
        unit: "1",
        lower: Some(0.0),
        upper: Some(1.0),
    },
];

/// Binary event label; `Tornado` is the positive class in every metric.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Tornado,
    NullEvent,
}

impl Label {
    /// Dense class index used by classifier internals: null 0, tornado 1.
    pub fn class_index(self) -> usize {
        match self {
            Label::NullEvent => 0,
            Label::Tornado => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Tornado => "tornado",
            Label::NullEvent => "null_event",
        }
    }

    /// Signed form used by margin-based classifiers: tornado +1, null -1.
    pub fn signum(self) -> i8 {
        match self {
            Label::Tornado => 1,
            Label::NullEvent => -1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tornado" => Ok(Label::Tornado),
            "null_event" => Ok(Label::NullEvent),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}
