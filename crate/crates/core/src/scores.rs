//! Score tables shared by the metric, fusion and evaluation modules.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Month;
use crate::error::{Error, Result};
use crate::kosmodel::TreeCode;

/// Per-node values keyed by tree code, ascending code order.
pub type NodeScores = BTreeMap<TreeCode, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aspect {
    Disruptiveness,
    Influence,
    Informativeness,
    Usefulness,
}

impl Aspect {
    pub const ALL: [Aspect; 4] =
        [Aspect::Disruptiveness, Aspect::Influence, Aspect::Informativeness, Aspect::Usefulness];

    pub fn name(self) -> &'static str {
        match self {
            Aspect::Disruptiveness => "disruptiveness",
            Aspect::Influence => "influence",
            Aspect::Informativeness => "informativeness",
            Aspect::Usefulness => "usefulness",
        }
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Aspect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Aspect::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown aspect {s:?}")))
    }
}

/// One aspect's node scores for one month.
#[derive(Clone, Debug, PartialEq)]
pub struct AspectScores {
    pub aspect: Aspect,
    pub month: Month,
    pub values: NodeScores,
}

impl AspectScores {
    pub fn new(aspect: Aspect, month: Month, values: NodeScores) -> Self {
        AspectScores { aspect, month, values }
    }
}

/// Formats a float with 17 significant digits, enough to round-trip.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
