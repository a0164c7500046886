//! Min-max statistics for the network inputs and the stress data.
//!
//! Young's modulus uses one global range; each stress component has its
//! own range. Components that vanish identically in plane deformation
//! (`13, 23, 31, 32`) are not normalized. Load components `F_bar_ij` that
//! vary across the training split are min-max scaled; constant ones pass
//! through unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral_grid::Mat3;

/// Flat (row-major) indices of the stress components carried in plane
/// deformation.
pub const ACTIVE_COMPONENTS: [usize; 5] = [0, 1, 3, 4, 8];

pub const COMPONENT_NAMES: [&str; 9] = ["11", "12", "13", "21", "22", "23", "31", "32", "33"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub e_min: f64,
    pub e_max: f64,
    pub f_min: [f64; 9],
    pub f_max: [f64; 9],
    pub p_min: [f64; 9],
    pub p_max: [f64; 9],
}

/// The data a statistics fit needs from one training sample.
pub struct StatsSample<'a> {
    pub e: &'a [f64],
    pub f_bar: &'a Mat3,
    pub p: &'a [Mat3],
}

fn flat(m: &Mat3, c: usize) -> f64 {
    m[c / 3][c % 3]
}

impl NormalizationStats {
    /// Fits the statistics on training samples only.
    pub fn fit<'a>(samples: impl IntoIterator<Item = StatsSample<'a>>) -> Result<Self> {
        let mut s = NormalizationStats {
            e_min: f64::INFINITY,
            e_max: f64::NEG_INFINITY,
            f_min: [f64::INFINITY; 9],
            f_max: [f64::NEG_INFINITY; 9],
            p_min: [f64::INFINITY; 9],
            p_max: [f64::NEG_INFINITY; 9],
        };
        let mut count = 0;
        for sample in samples {
            count += 1;
            for &e in sample.e {
                s.e_min = s.e_min.min(e);
                s.e_max = s.e_max.max(e);
            }
            for c in 0..9 {
                let f = flat(sample.f_bar, c);
                s.f_min[c] = s.f_min[c].min(f);
                s.f_max[c] = s.f_max[c].max(f);
            }
            for p in sample.p {
                for c in ACTIVE_COMPONENTS {
                    let v = flat(p, c);
                    s.p_min[c] = s.p_min[c].min(v);
                    s.p_max[c] = s.p_max[c].max(v);
                }
            }
        }
        if count == 0 {
            return Err(Error::Precondition(
                "statistics need at least one sample".into(),
            ));
        }
        for c in [2, 5, 6, 7] {
            s.p_min[c] = 0.0;
            s.p_max[c] = 0.0;
        }
        s.check()?;
        Ok(s)
    }

    /// Errors on a degenerate normalized channel.
    pub fn check(&self) -> Result<()> {
        if !(self.e_max > self.e_min) {
            return Err(Error::DegenerateChannel("E".into()));
        }
        for c in ACTIVE_COMPONENTS {
            if !(self.p_max[c] > self.p_min[c]) {
                return Err(Error::DegenerateChannel(format!("P{}", COMPONENT_NAMES[c])));
            }
        }
        Ok(())
    }

    pub fn normalize_e(&self, e: f64) -> f64 {
        (e - self.e_min) / (self.e_max - self.e_min)
    }

    pub fn denormalize_e(&self, v: f64) -> f64 {
        self.e_min + v * (self.e_max - self.e_min)
    }

    /// Load component `c` as fed to the network.
    pub fn normalize_f(&self, c: usize, f: f64) -> f64 {
        let span = self.f_max[c] - self.f_min[c];
        if span > 0.0 {
            (f - self.f_min[c]) / span
        } else {
            f
        }
    }

    pub fn p_range(&self, c: usize) -> f64 {
        self.p_max[c] - self.p_min[c]
    }

    /// Common stress scale: the largest component range.
    pub fn s_ref(&self) -> f64 {
        ACTIVE_COMPONENTS
            .iter()
            .map(|&c| self.p_range(c))
            .fold(0.0, f64::max)
    }

    /// Min-max normalized stress; structural-zero components map to zero.
    pub fn normalize_p(&self, p: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for c in ACTIVE_COMPONENTS {
            out[c / 3][c % 3] = (p[c / 3][c % 3] - self.p_min[c]) / self.p_range(c);
        }
        out
    }

    pub fn denormalize_p(&self, p: &Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for c in ACTIVE_COMPONENTS {
            out[c / 3][c % 3] = self.p_min[c] + p[c / 3][c % 3] * self.p_range(c);
        }
        out
    }
}
