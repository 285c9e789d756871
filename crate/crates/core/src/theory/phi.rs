use alloc::vec;
use alloc::vec::Vec;

use super::TheoryError;

/// A smoothness function `φ(r, g)`, nonnegative and nondecreasing in both
/// arguments, bounding `‖∇f(x) − ∇f(y)‖ ≤ φ(‖x − y‖, ‖∇f(y)‖)·‖x − y‖`.
#[derive(Debug, Clone, PartialEq)]
pub enum PhiSpec {
    /// `(L0 + L1·g)·exp(L1·r)`, implied by `(L0, L1)`-smoothness.
    ExpL0L1 { l0: f64, l1: f64 },
    /// `K0 + K1·g^α + K2·r^{α/(1−α)}`, implied by α-symmetric generalized
    /// smoothness; see [`alpha_constants`].
    AlphaSymmetric { l0: f64, l1: f64, alpha: f64 },
    /// Step function tabulated from sampled pairs.
    Empirical(EmpiricalPhi),
}

impl PhiSpec {
    pub fn eval(&self, r: f64, g: f64) -> Result<f64, TheoryError> {
        phi_eval(self, r, g)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaConstants {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
}

/// ```text
/// K0 = L0 (2^{α²/(1−α)} + 1)
/// K1 = L1 · 2^{α²/(1−α)} · 3^α
/// K2 = L1^{1/(1−α)} · 2^{α²/(1−α)} · 3^α · (1−α)^{α/(1−α)}
/// ```
pub fn alpha_constants(l0: f64, l1: f64, alpha: f64) -> Result<AlphaConstants, TheoryError> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(TheoryError::AlphaOutOfRange(alpha));
    }
    let two_pow = libm::pow(2.0, alpha * alpha / (1.0 - alpha));
    let three_pow = libm::pow(3.0, alpha);
    Ok(AlphaConstants {
        k0: l0 * (two_pow + 1.0),
        k1: l1 * two_pow * three_pow,
        k2: libm::pow(l1, 1.0 / (1.0 - alpha))
            * two_pow
            * three_pow
            * libm::pow(1.0 - alpha, alpha / (1.0 - alpha)),
    })
}

pub fn phi_eval(spec: &PhiSpec, r: f64, g: f64) -> Result<f64, TheoryError> {
    if !(r >= 0.0 && g >= 0.0) {
        return Err(TheoryError::InvalidArgument("φ arguments must be nonnegative"));
    }
    match spec {
        PhiSpec::ExpL0L1 { l0, l1 } => Ok((l0 + l1 * g) * libm::exp(l1 * r)),
        PhiSpec::AlphaSymmetric { l0, l1, alpha } => {
            let k = alpha_constants(*l0, *l1, *alpha)?;
            Ok(k.k0
                + k.k1 * libm::pow(g, *alpha)
                + k.k2 * libm::pow(r, alpha / (1.0 - alpha)))
        }
        PhiSpec::Empirical(table) => Ok(table.eval(r, g)),
    }
}

/// Monotone step function on a rectangular grid.
///
/// Cell `(i, j)` holds the largest ratio observed among samples with
/// `r ≤ r_edges[i]` and `g ≤ g_edges[j]`; evaluation rounds `(r, g)` up to
/// the next edges. Arguments beyond the last edge evaluate to `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPhi {
    r_edges: Vec<f64>,
    g_edges: Vec<f64>,
    table: Vec<f64>,
}

impl EmpiricalPhi {
    /// `samples` are `(r, g, ratio)` triples.
    pub fn from_samples(
        r_edges: Vec<f64>,
        g_edges: Vec<f64>,
        samples: &[(f64, f64, f64)],
    ) -> Result<Self, TheoryError> {
        let increasing = |e: &[f64]| !e.is_empty() && e.windows(2).all(|w| w[0] < w[1]);
        if !increasing(&r_edges) || !increasing(&g_edges) {
            return Err(TheoryError::InvalidArgument(
                "grid edges must be nonempty and strictly increasing",
            ));
        }
        let (nr, ng) = (r_edges.len(), g_edges.len());
        let mut table = vec![0.0_f64; nr * ng];
        for &(r, g, ratio) in samples {
            if let (Some(i), Some(j)) = (upper_edge(&r_edges, r), upper_edge(&g_edges, g)) {
                let cell = &mut table[i * ng + j];
                *cell = cell.max(ratio);
            }
        }
        for i in 0..nr {
            for j in 0..ng {
                let mut v = table[i * ng + j];
                if i > 0 {
                    v = v.max(table[(i - 1) * ng + j]);
                }
                if j > 0 {
                    v = v.max(table[i * ng + j - 1]);
                }
                table[i * ng + j] = v;
            }
        }
        Ok(Self { r_edges, g_edges, table })
    }

    pub fn eval(&self, r: f64, g: f64) -> f64 {
        match (upper_edge(&self.r_edges, r), upper_edge(&self.g_edges, g)) {
            (Some(i), Some(j)) => self.table[i * self.g_edges.len() + j],
            _ => f64::INFINITY,
        }
    }
}

fn upper_edge(edges: &[f64], v: f64) -> Option<usize> {
    let i = edges.partition_point(|&e| e < v);
    (i < edges.len()).then_some(i)
}
