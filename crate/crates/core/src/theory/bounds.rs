use alloc::format;
use alloc::vec::Vec;

use super::TheoryError;
use crate::algorithms::Trajectory;

/// The families of convergence guarantees for SPPM and its inexact variant.
///
/// Sublinear bounds constrain the expected gap `f(x̃) − f*` at an iterate
/// drawn uniformly from the run. Contraction bounds constrain `E‖x_k − x*‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BoundKind {
    ConvexExact,
    StronglyConvexExact,
    ConvexInexact,
    StronglyConvexInexact,
    SimilarityExact,
    SimilarityInexact,
    NeighborhoodExact,
    NeighborhoodInexact,
}

impl BoundKind {
    pub const ALL: [BoundKind; 8] = [
        BoundKind::ConvexExact,
        BoundKind::StronglyConvexExact,
        BoundKind::ConvexInexact,
        BoundKind::StronglyConvexInexact,
        BoundKind::SimilarityExact,
        BoundKind::SimilarityInexact,
        BoundKind::NeighborhoodExact,
        BoundKind::NeighborhoodInexact,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::ConvexExact => "convex_exact",
            BoundKind::StronglyConvexExact => "strongly_convex_exact",
            BoundKind::ConvexInexact => "convex_inexact",
            BoundKind::StronglyConvexInexact => "strongly_convex_inexact",
            BoundKind::SimilarityExact => "similarity_exact",
            BoundKind::SimilarityInexact => "similarity_inexact",
            BoundKind::NeighborhoodExact => "neighborhood_exact",
            BoundKind::NeighborhoodInexact => "neighborhood_inexact",
        }
    }

    pub fn is_sublinear(self) -> bool {
        matches!(self, BoundKind::ConvexExact | BoundKind::ConvexInexact)
    }

    pub fn is_inexact(self) -> bool {
        matches!(
            self,
            BoundKind::ConvexInexact
                | BoundKind::StronglyConvexInexact
                | BoundKind::SimilarityInexact
                | BoundKind::NeighborhoodInexact
        )
    }

    /// Whether the bound is stated in terms of `φ(R0, R0/γ)`.
    pub fn uses_phi(self) -> bool {
        matches!(
            self,
            BoundKind::ConvexExact
                | BoundKind::StronglyConvexExact
                | BoundKind::ConvexInexact
                | BoundKind::StronglyConvexInexact
        )
    }
}

/// Inputs to [`bound_curve`]. Fields a bound does not use are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundParams {
    pub gamma: f64,
    pub mu: f64,
    pub delta_star: f64,
    pub sigma_star_sq: f64,
    /// Inexactness level of the inner solver, in `[0, 1)`.
    pub c: f64,
    /// `‖x_0 − x*‖²`.
    pub r0_sq: f64,
    /// `φ(R0, R0/γ)`.
    pub phi_value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCurve {
    pub kind: BoundKind,
    pub params: BoundParams,
    shape: Shape,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// `coefficient · R0² / k`
    Sublinear { coefficient: f64 },
    /// `factor^k · R0² + floor`
    Contraction { factor: f64, floor: f64 },
}

impl BoundCurve {
    /// Bound at iteration `k`. Sublinear bounds are `+∞` at `k = 0`.
    pub fn value(&self, k: usize) -> f64 {
        let r0_sq = self.params.r0_sq;
        match self.shape {
            Shape::Sublinear { coefficient } => {
                if k == 0 {
                    f64::INFINITY
                } else {
                    coefficient * r0_sq / k as f64
                }
            }
            Shape::Contraction { factor, floor } => {
                libm::pow(factor, k as f64) * r0_sq + floor
            }
        }
    }

    pub fn values(&self, horizon: usize) -> Vec<f64> {
        (0..=horizon).map(|k| self.value(k)).collect()
    }

    pub fn contraction_factor(&self) -> Option<f64> {
        match self.shape {
            Shape::Contraction { factor, .. } => Some(factor),
            Shape::Sublinear { .. } => None,
        }
    }

    /// Radius of the neighborhood the iterates are driven into; zero unless
    /// the bound carries a variance term.
    pub fn floor(&self) -> f64 {
        match self.shape {
            Shape::Contraction { floor, .. } => floor,
            Shape::Sublinear { .. } => 0.0,
        }
    }
}

fn precondition(kind: BoundKind, requirement: alloc::string::String) -> TheoryError {
    TheoryError::Precondition { bound: kind.name(), requirement }
}

/// `γ ≤ limit / δ*²`, treating `δ* = 0` as unconstrained.
fn check_similarity_step(
    kind: BoundKind,
    p: &BoundParams,
    limit: f64,
    label: &str,
) -> Result<(), TheoryError> {
    let d2 = p.delta_star * p.delta_star;
    if d2 > 0.0 && p.gamma * d2 > limit {
        return Err(precondition(
            kind,
            format!(
                "gamma <= {label} / delta*^2 = {} (gamma = {}, mu = {}, delta* = {})",
                limit / d2,
                p.gamma,
                p.mu,
                p.delta_star
            ),
        ));
    }
    Ok(())
}

/// Builds the curve for `kind`, or reports the first violated precondition.
pub fn bound_curve(kind: BoundKind, params: BoundParams) -> Result<BoundCurve, TheoryError> {
    let p = &params;
    if !(p.gamma > 0.0 && p.gamma.is_finite()) {
        return Err(precondition(kind, format!("gamma > 0 (gamma = {})", p.gamma)));
    }
    if !(p.r0_sq >= 0.0 && p.r0_sq.is_finite()) {
        return Err(TheoryError::InvalidArgument("r0_sq must be finite and nonnegative"));
    }
    if kind.is_inexact() && !(0.0..1.0).contains(&p.c) {
        return Err(precondition(kind, format!("0 <= c < 1 (c = {})", p.c)));
    }
    if kind.uses_phi() && !(p.phi_value >= 0.0 && p.phi_value.is_finite()) {
        return Err(precondition(
            kind,
            format!("phi(R0, R0/gamma) finite and nonnegative (phi = {})", p.phi_value),
        ));
    }
    if !kind.is_sublinear() && !(p.mu > 0.0 && p.mu.is_finite()) {
        return Err(precondition(kind, format!("mu > 0 (mu = {})", p.mu)));
    }
    if !(p.delta_star >= 0.0) || !(p.sigma_star_sq >= 0.0) {
        return Err(TheoryError::InvalidArgument(
            "delta_star and sigma_star_sq must be nonnegative",
        ));
    }

    let g = p.gamma;
    let one_minus_c = 1.0 - p.c;
    let shape = match kind {
        BoundKind::ConvexExact => Shape::Sublinear {
            coefficient: (p.phi_value + 2.0 / g) / 2.0,
        },
        BoundKind::ConvexInexact => Shape::Sublinear {
            coefficient: (p.phi_value + 2.0 / g) / (2.0 * one_minus_c),
        },
        BoundKind::StronglyConvexExact | BoundKind::StronglyConvexInexact => {
            let scale = if kind == BoundKind::StronglyConvexInexact { one_minus_c } else { 1.0 };
            let rate = scale * p.mu / (2.0 / g + p.phi_value);
            if rate > 1.0 {
                return Err(precondition(
                    kind,
                    format!("mu <= 2/gamma + phi (mu = {}, 2/gamma + phi = {})", p.mu, 2.0 / g + p.phi_value),
                ));
            }
            Shape::Contraction { factor: 1.0 - rate, floor: 0.0 }
        }
        BoundKind::SimilarityExact => {
            check_similarity_step(kind, p, p.mu / 2.0, "mu/2")?;
            Shape::Contraction {
                factor: 1.0 - (g * p.mu / 4.0).min(0.5),
                floor: 0.0,
            }
        }
        BoundKind::SimilarityInexact => {
            check_similarity_step(kind, p, p.mu / 4.0, "mu/4")?;
            Shape::Contraction {
                factor: 1.0 - (g * p.mu / 4.0).min(one_minus_c / 2.0),
                floor: 0.0,
            }
        }
        BoundKind::NeighborhoodExact => {
            check_similarity_step(kind, p, p.mu / 4.0, "mu/4")?;
            Shape::Contraction {
                factor: 1.0 - 0.5 * (g * p.mu / 2.0).min(1.0),
                floor: 4.0 * (2.0 / (g * p.mu)).max(1.0) * g * g * p.sigma_star_sq,
            }
        }
        BoundKind::NeighborhoodInexact => {
            check_similarity_step(kind, p, p.mu * one_minus_c / 4.0, "mu(1-c)/4")?;
            Shape::Contraction {
                factor: 1.0 - 0.25 * (g * p.mu).min(1.0),
                floor: (1.0 / (g * p.mu)).max(1.0) * 8.0 * g * g * p.sigma_star_sq / one_minus_c,
            }
        }
    };
    Ok(BoundCurve { kind, params, shape })
}

/// Seed-averaged statistics of a set of runs sharing a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanTrajectory {
    /// Mean of `‖x_k − x*‖²` over runs.
    pub dist_sq: Vec<f64>,
    /// Entry `k ≥ 1` is the mean over runs of `(1/k) Σ_{j<k} (f(x_j) − f*)`,
    /// the expected gap of an iterate drawn uniformly from `x_0..x_{k−1}`.
    /// Entry 0 is the mean initial gap.
    pub uniform_gap: Vec<f64>,
    pub runs: usize,
}

impl MeanTrajectory {
    pub fn from_runs(runs: &[Trajectory]) -> Result<Self, TheoryError> {
        let first = runs.first().ok_or(TheoryError::NoRuns)?;
        let len = first.records.len();
        if let Some(t) = runs.iter().find(|t| t.records.len() != len) {
            return Err(TheoryError::HorizonMismatch { expected: len, got: t.records.len() });
        }
        let mut dist_sq = alloc::vec![0.0; len];
        let mut uniform_gap = alloc::vec![0.0; len];
        let m = runs.len() as f64;
        for t in runs {
            let mut gap_sum = 0.0;
            for (k, rec) in t.records.iter().enumerate() {
                dist_sq[k] += rec.dist_sq / m;
                if k == 0 {
                    uniform_gap[0] += rec.gap / m;
                } else {
                    uniform_gap[k] += gap_sum / k as f64 / m;
                }
                gap_sum += rec.gap;
            }
        }
        Ok(Self { dist_sq, uniform_gap, runs: runs.len() })
    }

    pub fn horizon(&self) -> usize {
        self.dist_sq.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DominanceRow {
    pub k: usize,
    pub bound: f64,
    pub empirical: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominanceReport {
    pub kind: BoundKind,
    pub rows: Vec<DominanceRow>,
    pub max_ratio: f64,
    pub worst_k: usize,
    /// Iterations where `empirical > slack · bound`.
    pub violations: Vec<usize>,
}

impl DominanceReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compares a mean trajectory with a bound curve, iteration by iteration.
///
/// The sublinear bounds are checked against the uniform-iterate gap from
/// `k = 1`; contraction bounds against the mean squared distance from `k = 0`.
pub fn check_bound_dominance(
    mean: &MeanTrajectory,
    curve: &BoundCurve,
    slack: f64,
) -> Result<DominanceReport, TheoryError> {
    if !(slack >= 1.0) {
        return Err(TheoryError::InvalidArgument("slack must be at least 1"));
    }
    let (series, start) = if curve.kind.is_sublinear() {
        (&mean.uniform_gap, 1)
    } else {
        (&mean.dist_sq, 0)
    };
    let mut rows = Vec::with_capacity(series.len());
    let mut violations = Vec::new();
    let (mut max_ratio, mut worst_k) = (0.0_f64, start);
    for (k, &empirical) in series.iter().enumerate().skip(start) {
        let bound = curve.value(k);
        let ratio = if empirical <= 0.0 {
            0.0
        } else if bound > 0.0 {
            empirical / bound
        } else {
            f64::INFINITY
        };
        let limit = if slack.is_infinite() { f64::INFINITY } else { slack * bound };
        // NaN compares false and is caught here as well.
        if !(empirical <= limit) {
            violations.push(k);
        }
        if ratio > max_ratio || ratio.is_nan() {
            max_ratio = ratio;
            worst_k = k;
        }
        rows.push(DominanceRow { k, bound, empirical, ratio });
    }
    Ok(DominanceReport { kind: curve.kind, rows, max_ratio, worst_k, violations })
}
