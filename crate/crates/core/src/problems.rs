//! Finite-sum test problems `f(x) = (1/n) Σ f_i(x)`.
//!
//! Three families are available:
//!
//! | kind | component `f_i(x)` | minimizer |
//! |------|--------------------|-----------|
//! | [`ProblemKind::PowerNorm`] | `a_i ‖x‖^{2s}` | `0` |
//! | [`ProblemKind::RegularizedPowerNorm`] | `a_i ‖x‖^{2s} + λ x_i²` (requires `n = d`) | `0` |
//! | [`ProblemKind::ShiftedQuadratic`] | `½ ‖x − b_i‖²` | mean of the `b_i` |
//!
//! The two power-norm families satisfy interpolation (every component gradient
//! vanishes at the origin). The shifted quadratic does not, unless all shifts
//! coincide, and is the test bed for the variance-at-optimum bounds.
//!
//! Component indices are zero based.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::linalg::{self, powu};
use crate::rng::{self, Stream};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
    #[error("component index {index} out of range for {n} components")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("point has dimension {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point has non-finite coordinates")]
    NonFinite,
}

fn invalid(name: &'static str, reason: &'static str) -> ProblemError {
    ProblemError::InvalidParameter { name, reason }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ProblemKind {
    PowerNorm,
    RegularizedPowerNorm,
    ShiftedQuadratic,
}

/// Constants of a problem that are known in closed form. `None` marks a
/// constant that does not exist or is not asserted for the family.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProblemConstants {
    pub l0: Option<f64>,
    pub l1: Option<f64>,
    /// Strong-convexity modulus of `f`.
    pub mu: Option<f64>,
    /// `(1/n) Σ ‖∇f_i(x*)‖²`.
    pub sigma_star_sq: Option<f64>,
    /// Star-similarity constant, when known exactly.
    pub delta_star: Option<f64>,
}

/// Value and gradient oracles of a finite sum with uniform sampling.
///
/// The theory estimators are generic over this trait so they can be checked
/// on hand-built problems as well as on [`ProblemInstance`]. Implementations
/// may assume `i < num_components()` and `x.len() == dim()`.
pub trait FiniteSum {
    fn num_components(&self) -> usize;
    fn dim(&self) -> usize;
    fn component_value(&self, i: usize, x: &[f64]) -> f64;
    /// Writes `∇f_i(x)` into `out`.
    fn component_gradient(&self, i: usize, x: &[f64], out: &mut [f64]);

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.num_components();
        (0..n).map(|i| self.component_value(i, x)).sum::<f64>() / n as f64
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        let n = self.num_components();
        let mut g = vec![0.0; self.dim()];
        out.iter_mut().for_each(|o| *o = 0.0);
        for i in 0..n {
            self.component_gradient(i, x, &mut g);
            for (o, gi) in out.iter_mut().zip(&g) {
                *o += gi;
            }
        }
        out.iter_mut().for_each(|o| *o /= n as f64);
    }
}

/// Parameters identifying a problem instance, for manifests.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProblemRecord {
    pub kind: ProblemKind,
    pub n: usize,
    pub d: usize,
    pub s: Option<u32>,
    pub lambda: Option<f64>,
    pub spread: Option<f64>,
    pub seed: Option<u64>,
    pub constants: ProblemConstants,
}

/// An immutable finite-sum problem with a known minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    kind: ProblemKind,
    n: usize,
    d: usize,
    s: u32,
    a: Vec<f64>,
    lambda: f64,
    spread: f64,
    /// Row-major `n × d`, shifted quadratic only.
    shifts: Vec<f64>,
    minimizer: Vec<f64>,
    f_star: f64,
    sigma_star_sq: f64,
    interpolating: bool,
    seed: Option<u64>,
}

impl ProblemInstance {
    /// `f_i(x) = a_i ‖x‖^{2s}` with `a_i` drawn uniformly from `(0, 1]`.
    pub fn power_norm(n: usize, d: usize, s: u32, seed: u64) -> Result<Self, ProblemError> {
        check_sizes(n, d)?;
        let mut p = Self::power_norm_with_coefficients(d, s, draw_coefficients(n, seed))?;
        p.seed = Some(seed);
        Ok(p)
    }

    pub fn power_norm_with_coefficients(
        d: usize,
        s: u32,
        a: Vec<f64>,
    ) -> Result<Self, ProblemError> {
        check_sizes(a.len(), d)?;
        check_power(s)?;
        check_coefficients(&a)?;
        Ok(Self {
            kind: ProblemKind::PowerNorm,
            n: a.len(),
            d,
            s,
            a,
            lambda: 0.0,
            spread: 0.0,
            shifts: Vec::new(),
            minimizer: vec![0.0; d],
            f_star: 0.0,
            sigma_star_sq: 0.0,
            interpolating: true,
            seed: None,
        })
    }

    /// `f_i(x) = a_i ‖x‖^{2s} + λ ⟨e_i, x⟩²`. The sum is `λ/n`-strongly convex
    /// only when every coordinate is regularized, so `n` must equal `d`.
    pub fn regularized_power_norm(
        n: usize,
        d: usize,
        s: u32,
        lambda: f64,
        seed: u64,
    ) -> Result<Self, ProblemError> {
        check_sizes(n, d)?;
        if n != d {
            return Err(invalid("n", "regularized power norm requires n = d"));
        }
        let mut p =
            Self::regularized_power_norm_with_coefficients(d, s, lambda, draw_coefficients(n, seed))?;
        p.seed = Some(seed);
        Ok(p)
    }

    pub fn regularized_power_norm_with_coefficients(
        d: usize,
        s: u32,
        lambda: f64,
        a: Vec<f64>,
    ) -> Result<Self, ProblemError> {
        check_sizes(a.len(), d)?;
        if a.len() != d {
            return Err(invalid("n", "regularized power norm requires n = d"));
        }
        check_power(s)?;
        check_coefficients(&a)?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(invalid("lambda", "must be positive and finite"));
        }
        Ok(Self {
            kind: ProblemKind::RegularizedPowerNorm,
            n: a.len(),
            d,
            s,
            a,
            lambda,
            spread: 0.0,
            shifts: Vec::new(),
            minimizer: vec![0.0; d],
            f_star: 0.0,
            sigma_star_sq: 0.0,
            interpolating: true,
            seed: None,
        })
    }

    /// `f_i(x) = ½‖x − b_i‖²` with every coordinate of `b_i` uniform in
    /// `[−spread/√d, spread/√d)`, so `‖b_i‖ ≤ spread`.
    pub fn shifted_quadratic(
        n: usize,
        d: usize,
        spread: f64,
        seed: u64,
    ) -> Result<Self, ProblemError> {
        check_sizes(n, d)?;
        if !(spread > 0.0 && spread.is_finite()) {
            return Err(invalid("spread", "must be positive and finite"));
        }
        let mut rng = rng::stream(seed, Stream::Shifts);
        let half_width = spread / libm::sqrt(d as f64);
        let shifts = (0..n)
            .map(|_| {
                (0..d)
                    .map(|_| rng.random_range(-half_width..half_width))
                    .collect()
            })
            .collect();
        let mut p = Self::shifted_quadratic_with_shifts(d, shifts)?;
        p.seed = Some(seed);
        p.spread = spread;
        Ok(p)
    }

    pub fn shifted_quadratic_with_shifts(
        d: usize,
        shifts: Vec<Vec<f64>>,
    ) -> Result<Self, ProblemError> {
        let n = shifts.len();
        check_sizes(n, d)?;
        let mut flat = Vec::with_capacity(n * d);
        for b in &shifts {
            if b.len() != d {
                return Err(ProblemError::DimensionMismatch {
                    expected: d,
                    got: b.len(),
                });
            }
            if !linalg::all_finite(b) {
                return Err(ProblemError::NonFinite);
            }
            flat.extend_from_slice(b);
        }
        let interpolating = shifts.iter().all(|b| b == &shifts[0]);
        let minimizer = if interpolating {
            shifts[0].clone()
        } else {
            let mut m = vec![0.0; d];
            for b in &shifts {
                for (mj, bj) in m.iter_mut().zip(b) {
                    *mj += bj;
                }
            }
            m.iter_mut().for_each(|mj| *mj /= n as f64);
            m
        };
        let sigma_star_sq = shifts
            .iter()
            .map(|b| linalg::dist_sq(&minimizer, b))
            .sum::<f64>()
            / n as f64;
        let spread = shifts
            .iter()
            .map(|b| linalg::norm(b))
            .fold(0.0_f64, f64::max);
        Ok(Self {
            kind: ProblemKind::ShiftedQuadratic,
            n,
            d,
            s: 1,
            a: vec![1.0; n],
            lambda: 0.0,
            spread,
            shifts: flat,
            minimizer,
            f_star: 0.5 * sigma_star_sq,
            sigma_star_sq,
            interpolating,
            seed: None,
        })
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Power parameter of the power-norm families.
    pub fn s(&self) -> Option<u32> {
        match self.kind {
            ProblemKind::ShiftedQuadratic => None,
            _ => Some(self.s),
        }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }

    pub fn lambda(&self) -> Option<f64> {
        match self.kind {
            ProblemKind::RegularizedPowerNorm => Some(self.lambda),
            _ => None,
        }
    }

    pub fn shift(&self, i: usize) -> Option<&[f64]> {
        match self.kind {
            ProblemKind::ShiftedQuadratic if i < self.n => {
                Some(&self.shifts[i * self.d..(i + 1) * self.d])
            }
            _ => None,
        }
    }

    pub fn minimizer(&self) -> &[f64] {
        &self.minimizer
    }

    pub fn f_star(&self) -> f64 {
        self.f_star
    }

    pub fn is_interpolating(&self) -> bool {
        self.interpolating
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn known_constants(&self) -> ProblemConstants {
        let s = self.s as f64;
        match self.kind {
            ProblemKind::PowerNorm => ProblemConstants {
                l0: Some(2.0 * s),
                l1: Some(2.0 * s - 1.0),
                mu: None,
                sigma_star_sq: Some(0.0),
                delta_star: None,
            },
            ProblemKind::RegularizedPowerNorm => ProblemConstants {
                l0: Some(2.0 * s + 2.0 * self.lambda),
                l1: Some(2.0 * s - 1.0),
                mu: Some(self.lambda / self.n as f64),
                sigma_star_sq: Some(0.0),
                delta_star: None,
            },
            ProblemKind::ShiftedQuadratic => ProblemConstants {
                l0: Some(1.0),
                l1: Some(0.0),
                mu: Some(1.0),
                sigma_star_sq: Some(self.sigma_star_sq),
                delta_star: Some(0.0),
            },
        }
    }

    pub fn manifest_record(&self) -> ProblemRecord {
        ProblemRecord {
            kind: self.kind,
            n: self.n,
            d: self.d,
            s: self.s(),
            lambda: self.lambda(),
            spread: match self.kind {
                ProblemKind::ShiftedQuadratic => Some(self.spread),
                _ => None,
            },
            seed: self.seed,
            constants: self.known_constants(),
        }
    }

    pub fn check_point(&self, x: &[f64]) -> Result<(), ProblemError> {
        if x.len() != self.d {
            return Err(ProblemError::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        if !linalg::all_finite(x) {
            return Err(ProblemError::NonFinite);
        }
        Ok(())
    }

    pub fn check_index(&self, i: usize) -> Result<(), ProblemError> {
        if i >= self.n {
            return Err(ProblemError::IndexOutOfRange { index: i, n: self.n });
        }
        Ok(())
    }

    pub fn eval_component(&self, i: usize, x: &[f64]) -> Result<f64, ProblemError> {
        self.check_index(i)?;
        self.check_point(x)?;
        Ok(self.component_value(i, x))
    }

    pub fn grad_component(&self, i: usize, x: &[f64]) -> Result<Vec<f64>, ProblemError> {
        self.check_index(i)?;
        self.check_point(x)?;
        let mut g = vec![0.0; self.d];
        self.component_gradient(i, x, &mut g);
        Ok(g)
    }

    pub fn eval_full(&self, x: &[f64]) -> Result<f64, ProblemError> {
        self.check_point(x)?;
        Ok(self.value(x))
    }

    pub fn grad_full(&self, x: &[f64]) -> Result<Vec<f64>, ProblemError> {
        self.check_point(x)?;
        let mut g = vec![0.0; self.d];
        self.gradient(x, &mut g);
        Ok(g)
    }

    /// `‖x‖^{2s}` given `‖x‖²`.
    #[inline]
    fn power_term(&self, norm_sq: f64) -> f64 {
        powu(norm_sq, self.s)
    }

    /// `2s ‖x‖^{2s−2}` given `‖x‖²`. Exactly zero at the origin.
    #[inline]
    pub(crate) fn radial_gradient_scale(&self, norm_sq: f64) -> f64 {
        2.0 * self.s as f64 * powu(norm_sq, self.s - 1)
    }

    #[inline]
    fn component_value_with_norm(&self, i: usize, x: &[f64], norm_sq: f64) -> f64 {
        match self.kind {
            ProblemKind::PowerNorm => self.a[i] * self.power_term(norm_sq),
            ProblemKind::RegularizedPowerNorm => {
                self.a[i] * self.power_term(norm_sq) + self.lambda * x[i] * x[i]
            }
            ProblemKind::ShiftedQuadratic => 0.5 * linalg::dist_sq(x, self.shift_row(i)),
        }
    }

    #[inline]
    pub(crate) fn shift_row(&self, i: usize) -> &[f64] {
        &self.shifts[i * self.d..(i + 1) * self.d]
    }
}

impl FiniteSum for ProblemInstance {
    fn num_components(&self) -> usize {
        self.n
    }

    fn dim(&self) -> usize {
        self.d
    }

    fn component_value(&self, i: usize, x: &[f64]) -> f64 {
        let norm_sq = match self.kind {
            ProblemKind::ShiftedQuadratic => 0.0,
            _ => linalg::norm_sq(x),
        };
        self.component_value_with_norm(i, x, norm_sq)
    }

    fn component_gradient(&self, i: usize, x: &[f64], out: &mut [f64]) {
        match self.kind {
            ProblemKind::PowerNorm | ProblemKind::RegularizedPowerNorm => {
                let scale = self.a[i] * self.radial_gradient_scale(linalg::norm_sq(x));
                for (o, xj) in out.iter_mut().zip(x) {
                    *o = scale * xj;
                }
                if self.kind == ProblemKind::RegularizedPowerNorm {
                    out[i] += 2.0 * self.lambda * x[i];
                }
            }
            ProblemKind::ShiftedQuadratic => {
                for ((o, xj), bj) in out.iter_mut().zip(x).zip(self.shift_row(i)) {
                    *o = xj - bj;
                }
            }
        }
    }

    /// Same summation as the default loop, with `‖x‖` computed once.
    fn value(&self, x: &[f64]) -> f64 {
        let norm_sq = match self.kind {
            ProblemKind::ShiftedQuadratic => 0.0,
            _ => linalg::norm_sq(x),
        };
        (0..self.n)
            .map(|i| self.component_value_with_norm(i, x, norm_sq))
            .sum::<f64>()
            / self.n as f64
    }
}

fn check_sizes(n: usize, d: usize) -> Result<(), ProblemError> {
    if n == 0 {
        return Err(invalid("n", "must be at least 1"));
    }
    if d == 0 {
        return Err(invalid("d", "must be at least 1"));
    }
    Ok(())
}

fn check_power(s: u32) -> Result<(), ProblemError> {
    if s < 2 {
        return Err(invalid("s", "power parameter must be at least 2"));
    }
    Ok(())
}

fn check_coefficients(a: &[f64]) -> Result<(), ProblemError> {
    if a.iter().all(|&ai| ai > 0.0 && ai.is_finite()) {
        Ok(())
    } else {
        Err(invalid("a", "coefficients must be positive and finite"))
    }
}

fn draw_coefficients(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng::stream(seed, Stream::Coefficients);
    (0..n).map(|_| 1.0 - rng.random::<f64>()).collect()
}
