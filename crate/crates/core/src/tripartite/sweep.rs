use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gaussian::LogBase;
use super::scattering::entanglement_with;
use super::TripartiteParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    GB,
    GC,
    DeltaA,
    DeltaC,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::GB => "g_b",
            SweepParam::GC => "g_c",
            SweepParam::DeltaA => "delta_a",
            SweepParam::DeltaC => "delta_c",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "g_b" => Some(SweepParam::GB),
            "g_c" => Some(SweepParam::GC),
            "delta_a" => Some(SweepParam::DeltaA),
            "delta_c" => Some(SweepParam::DeltaC),
            _ => None,
        }
    }

    pub fn apply(self, p: &mut TripartiteParams, value: f64) {
        match self {
            SweepParam::GB => p.g_b = value,
            SweepParam::GC => p.g_c = value,
            SweepParam::DeltaA => p.delta_a = value,
            SweepParam::DeltaC => p.delta_c = value,
        }
    }
}

/// One swept parameter and its values in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepAxis {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl SweepAxis {
    /// `n` evenly spaced points from `start` to `stop` inclusive.
    pub fn linspace(param: SweepParam, start: f64, stop: f64, n: usize) -> Result<Self> {
        if n == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(Error::domain("axis needs a finite range and at least one point"));
        }
        let values = if n == 1 {
            vec![start]
        } else {
            (0..n)
                .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
                .collect()
        };
        Ok(Self { param, values })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub base: TripartiteParams,
    pub axes: Vec<SweepAxis>,
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Axis values of the `index`-th point; the last axis varies fastest.
    fn coordinates(&self, mut index: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.values.len();
            out[k] = axis.values[index % n];
            index /= n;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SweepStatus {
    Stable {
        max_re_eigenvalue: f64,
        zeta_minus: f64,
        log_negativity: f64,
    },
    /// Entanglement is not reported for unstable points.
    Unstable {
        max_re_eigenvalue: f64,
    },
    Error {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// One value per axis, in grid order.
    pub coordinates: Vec<f64>,
    pub status: SweepStatus,
}

impl SweepRow {
    pub fn stable(&self) -> Option<bool> {
        match self.status {
            SweepStatus::Stable { .. } => Some(true),
            SweepStatus::Unstable { .. } => Some(false),
            SweepStatus::Error { .. } => None,
        }
    }

    pub fn max_re_eigenvalue(&self) -> Option<f64> {
        match self.status {
            SweepStatus::Stable { max_re_eigenvalue, .. } | SweepStatus::Unstable { max_re_eigenvalue } => {
                Some(max_re_eigenvalue)
            }
            SweepStatus::Error { .. } => None,
        }
    }

    pub fn zeta_minus(&self) -> Option<f64> {
        match self.status {
            SweepStatus::Stable { zeta_minus, .. } => Some(zeta_minus),
            _ => None,
        }
    }

    pub fn log_negativity(&self) -> Option<f64> {
        match self.status {
            SweepStatus::Stable { log_negativity, .. } => Some(log_negativity),
            _ => None,
        }
    }
}

/// Evaluates every grid point at analysis frequency `omega`, in parallel,
/// returning rows in lexicographic axis order. Failures stay in their row.
pub fn sweep(grid: &SweepGrid, omega: f64) -> Vec<SweepRow> {
    sweep_with(grid, omega, LogBase::Natural)
}

pub fn sweep_with(grid: &SweepGrid, omega: f64, base: LogBase) -> Vec<SweepRow> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let coordinates = grid.coordinates(i);
            let mut p = grid.base;
            for (axis, v) in grid.axes.iter().zip(&coordinates) {
                axis.param.apply(&mut p, *v);
            }
            SweepRow {
                coordinates,
                status: evaluate(&p, omega, base),
            }
        })
        .collect()
}

fn evaluate(p: &TripartiteParams, omega: f64, base: LogBase) -> SweepStatus {
    use super::matrices::drift_matrix;
    use super::stability::is_stable;
    let run = || -> Result<SweepStatus> {
        p.validate()?;
        let s = is_stable(&drift_matrix(p))?;
        if !s.stable {
            return Ok(SweepStatus::Unstable {
                max_re_eigenvalue: s.max_re_eigenvalue,
            });
        }
        let e = entanglement_with(omega, p, base)?;
        Ok(SweepStatus::Stable {
            max_re_eigenvalue: e.max_re_eigenvalue,
            zeta_minus: e.zeta_minus,
            log_negativity: e.log_negativity,
        })
    };
    run().unwrap_or_else(|e| SweepStatus::Error { message: e.to_string() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::hz_to_rad;
    use crate::tripartite::entanglement;
    use crate::tripartite::test_params::reference;

    #[test]
    fn single_point_matches_direct_call() {
        let p = reference();
        let grid = SweepGrid {
            base: p,
            axes: vec![SweepAxis {
                param: SweepParam::GB,
                values: vec![hz_to_rad(2e5)],
            }],
        };
        let rows = sweep(&grid, 0.0);
        assert_eq!(rows.len(), 1);
        let mut q = p;
        q.g_b = hz_to_rad(2e5);
        let e = entanglement(0.0, &q).unwrap();
        assert_eq!(rows[0].zeta_minus(), Some(e.zeta_minus));
        assert_eq!(rows[0].stable(), Some(e.stable));
    }

    #[test]
    fn rows_are_lexicographic() {
        let grid = SweepGrid {
            base: reference(),
            axes: vec![
                SweepAxis {
                    param: SweepParam::GB,
                    values: vec![0.0, 1.0, 2.0],
                },
                SweepAxis {
                    param: SweepParam::GC,
                    values: vec![10.0, 20.0],
                },
            ],
        };
        let coords: Vec<_> = sweep(&grid, 0.0).into_iter().map(|r| r.coordinates).collect();
        assert_eq!(
            coords,
            vec![
                vec![0.0, 10.0],
                vec![0.0, 20.0],
                vec![1.0, 10.0],
                vec![1.0, 20.0],
                vec![2.0, 10.0],
                vec![2.0, 20.0]
            ]
        );
    }

    #[test]
    fn zero_optomechanical_coupling_row_is_unentangled() {
        let grid = SweepGrid {
            base: reference(),
            axes: vec![SweepAxis::linspace(SweepParam::GB, 0.0, hz_to_rad(1e5), 3).unwrap()],
        };
        let rows = sweep(&grid, 0.0);
        assert_eq!(rows[0].log_negativity(), Some(0.0));
    }

    #[test]
    fn errors_stay_in_row() {
        let mut base = reference();
        base.kappa_a_in = 0.0;
        base.kappa_a_ex = 0.0;
        base.kappa_c_in = 0.0;
        base.kappa_c_ex = 0.0;
        base.gamma = 0.0;
        base.g_b = 0.0;
        let grid = SweepGrid {
            base,
            axes: vec![SweepAxis {
                param: SweepParam::GC,
                values: vec![0.0, f64::NAN],
            }],
        };
        let rows = sweep(&grid, 0.0);
        assert_eq!(rows.len(), 2);
        assert!(matches!(rows[1].status, SweepStatus::Error { .. }));
    }
}
