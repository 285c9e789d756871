use alloc::vec::Vec;

use crate::algorithms::Trajectory;

/// Absolute slacks used by [`check_monotonicity_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicitySlack {
    pub distance: f64,
    pub step: f64,
}

impl Default for MonotonicitySlack {
    fn default() -> Self {
        Self { distance: 1e-12, step: 1e-10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// `‖x_{k+1} − x*‖² > ‖x_k − x*‖²`.
    DistanceIncrease,
    /// `‖x_{k+1} − x_k‖² > ‖x_0 − x*‖²`.
    StepTooLong,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityViolation {
    /// Index of the record whose outgoing step is at fault.
    pub k: usize,
    pub kind: ViolationKind,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonotonicityReport {
    pub violations: Vec<MonotonicityViolation>,
    pub checked_steps: usize,
}

impl MonotonicityReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that distances to the solution never grow and that no step is
/// longer than the initial distance, as exact SPPM guarantees on
/// interpolating problems.
pub fn check_monotonicity(traj: &Trajectory) -> MonotonicityReport {
    check_monotonicity_with(traj, MonotonicitySlack::default())
}

pub fn check_monotonicity_with(traj: &Trajectory, slack: MonotonicitySlack) -> MonotonicityReport {
    let mut report = MonotonicityReport::default();
    let Some(first) = traj.records.first() else {
        return report;
    };
    let d0 = first.dist_sq;
    for (k, pair) in traj.records.windows(2).enumerate() {
        report.checked_steps += 1;
        let growth = pair[1].dist_sq - pair[0].dist_sq;
        if !(growth <= slack.distance) {
            report.violations.push(MonotonicityViolation {
                k,
                kind: ViolationKind::DistanceIncrease,
                excess: growth,
            });
        }
        if let Some(step) = &pair[0].step {
            let excess = step.step_norm_sq - d0;
            if !(excess <= slack.step) {
                report.violations.push(MonotonicityViolation {
                    k,
                    kind: ViolationKind::StepTooLong,
                    excess,
                });
            }
        }
    }
    report
}
