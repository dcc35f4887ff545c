//! Size caps for the exhaustive kernels.

use serde::{Deserialize, Serialize};

pub const ENV_CENSUS_CELLS: &str = "QINTERP_CENSUS_CELLS";
pub const ENV_PAIR_SPACE: &str = "QINTERP_PAIR_SPACE";
pub const ENV_STATE_AMPLITUDES: &str = "QINTERP_STATE_AMPLITUDES";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Counters held by a census (`q^J` per histogram).
    pub census_cells: u64,
    /// Pairs `(x, y)` visited by one enumeration.
    pub pair_space: u64,
    /// Amplitudes in a single statevector.
    pub state_amplitudes: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            census_cells: 1 << 28,
            pair_space: 1 << 32,
            state_amplitudes: 1 << 22,
        }
    }
}

impl Budget {
    /// Defaults, overridden by any of the `QINTERP_*` environment variables.
    pub fn from_env() -> Self {
        let read = |key: &str, default: u64| {
            std::env::var(key)
                .ok()
                .and_then(|v| v.trim().parse().ok())
                .unwrap_or(default)
        };
        let d = Budget::default();
        Budget {
            census_cells: read(ENV_CENSUS_CELLS, d.census_cells),
            pair_space: read(ENV_PAIR_SPACE, d.pair_space),
            state_amplitudes: read(ENV_STATE_AMPLITUDES, d.state_amplitudes),
        }
    }
}
