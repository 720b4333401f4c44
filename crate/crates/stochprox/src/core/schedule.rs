use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step-size sequence (gamma_n). The power family gamma_n = gamma0 / (n+1)^p
/// is classified analytically; arbitrary explicit lists cannot be classified
/// from a finite prefix and report `Unknown`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum StepSchedule {
    Power { gamma0: f64, p: f64 },
    ExplicitList { values: Vec<f64> },
}

/// Analytic classification against the Robbins-Monro conditions
/// (divergent step sum, convergent sum of squares).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScheduleClass {
    RobbinsMonro,
    SquareSumDiverges,
    SumConverges,
    Unknown,
}

impl StepSchedule {
    pub fn power(gamma0: f64, p: f64) -> Result<Self> {
        if !(gamma0 > 0.0) || !gamma0.is_finite() {
            return Err(Error::InvalidSchedule {
                reason: format!("gamma0 must be a positive finite real, got {gamma0}"),
            });
        }
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidSchedule {
                reason: format!("exponent p must be a positive finite real, got {p}"),
            });
        }
        Ok(StepSchedule::Power { gamma0, p })
    }

    pub fn explicit(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSchedule {
                reason: "explicit list must be nonempty".into(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidSchedule {
                reason: format!("every step must be a positive finite real, got {bad}"),
            });
        }
        Ok(StepSchedule::ExplicitList { values })
    }

    /// gamma_n.
    pub fn step(&self, n: usize) -> Result<f64> {
        match self {
            StepSchedule::Power { gamma0, p } => Ok(gamma0 / ((n + 1) as f64).powf(*p)),
            StepSchedule::ExplicitList { values } => {
                values
                    .get(n)
                    .copied()
                    .ok_or(Error::ScheduleIndexOutOfRange {
                        index: n,
                        len: values.len(),
                    })
            }
        }
    }

    /// sup_n gamma_n, used by the forward-backward step bound.
    pub fn sup_step(&self) -> f64 {
        match self {
            // gamma_n decreases in n for p > 0
            StepSchedule::Power { gamma0, .. } => *gamma0,
            StepSchedule::ExplicitList { values } => values.iter().cloned().fold(0.0, f64::max),
        }
    }

    pub fn classify(&self) -> ScheduleClass {
        match self {
            StepSchedule::Power { p, .. } => {
                if *p <= 0.5 {
                    ScheduleClass::SquareSumDiverges
                } else if *p <= 1.0 {
                    ScheduleClass::RobbinsMonro
                } else {
                    ScheduleClass::SumConverges
                }
            }
            StepSchedule::ExplicitList { .. } => ScheduleClass::Unknown,
        }
    }
}

/// Classification helper matching the operation-level contract.
pub fn validate_schedule(schedule: &StepSchedule) -> ScheduleClass {
    schedule.classify()
}
