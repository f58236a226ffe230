use serde::{Deserialize, Serialize};
use std::fmt;

/// Factored load combinations used for strength checks and for the gravity
/// state held during pushover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LoadCombination {
    /// `1.2D + 1.6L`
    Aci1,
    /// `1.2D + 1.0L ± 1.4E`
    Aci2,
    /// `0.9D ± 1.4E`
    Aci3,
    /// Gravity for strength checks, `1.2D + 1.6L`.
    GStrength,
    /// Gravity held during pushover, `1.1(D + L)`.
    GPbd,
}

impl LoadCombination {
    pub const ALL: [LoadCombination; 5] = [
        LoadCombination::Aci1,
        LoadCombination::Aci2,
        LoadCombination::Aci3,
        LoadCombination::GStrength,
        LoadCombination::GPbd,
    ];

    /// `(dead, live, earthquake)` factors.
    pub fn factors(self) -> (f64, f64, f64) {
        match self {
            LoadCombination::Aci1 | LoadCombination::GStrength => (1.2, 1.6, 0.0),
            LoadCombination::Aci2 => (1.2, 1.0, 1.4),
            LoadCombination::Aci3 => (0.9, 0.0, 1.4),
            LoadCombination::GPbd => (1.1, 1.1, 0.0),
        }
    }

    /// Whether the earthquake term acts in both directions.
    pub fn reversible(self) -> bool {
        self.factors().2 != 0.0
    }

    pub fn tag(self) -> &'static str {
        match self {
            LoadCombination::Aci1 => "ACI-1",
            LoadCombination::Aci2 => "ACI-2",
            LoadCombination::Aci3 => "ACI-3",
            LoadCombination::GStrength => "G-strength",
            LoadCombination::GPbd => "G-pbd",
        }
    }
}

impl fmt::Display for LoadCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Linear combination of dead, live and earthquake effects.
pub fn factored_load(combination: LoadCombination, dead: f64, live: f64, quake: f64) -> f64 {
    let (d, l, e) = combination.factors();
    d * dead + l * live + e * quake
}
