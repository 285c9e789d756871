use alloc::vec;
use alloc::vec::Vec;

use super::{phi_eval, PhiSpec, TheoryError};
use crate::linalg::{dist, dot, norm, norm_sq};
use crate::problems::FiniteSum;
use rand::Rng;

use crate::rng::{stream, unit_vector, Stream};

/// Points evaluated along each segment when approximating
/// `sup_{u ∈ [x, y]} ‖∇f_i(u)‖`.
const SEGMENT_POINTS: usize = 33;
/// `L1` is searched on multiples of this step.
const L1_STEP: f64 = 0.125;
const L1_MAX: f64 = 64.0;
/// `L0` is rounded up to a multiple of this step.
const L0_STEP: f64 = 1.0 / 64.0;
const L0_MAX: f64 = 1.0e6;
/// Relative slack on the φ-descent inequality.
const PHI_DESCENT_RTOL: f64 = 1e-10;

/// Bregman divergence `f_i(x) − f_i(y) − ⟨∇f_i(y), x − y⟩`.
pub fn bregman<P: FiniteSum + ?Sized>(p: &P, i: usize, x: &[f64], y: &[f64]) -> f64 {
    let mut gy = vec![0.0; p.dim()];
    p.component_gradient(i, y, &mut gy);
    let inner: f64 = gy.iter().zip(x.iter().zip(y)).map(|(g, (a, b))| g * (a - b)).sum();
    p.component_value(i, x) - p.component_value(i, y) - inner
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiDescentCheck {
    /// `D_{f_i}(x, y)`.
    pub lhs: f64,
    /// `φ(‖x − y‖, ‖∇f_i(y)‖)/2 · ‖x − y‖²`.
    pub rhs: f64,
    pub holds: bool,
}

/// Checks the descent inequality implied by φ-smoothness for component `i`.
///
/// The comparison allows a relative slack of `1e−10` on the right-hand side
/// plus the rounding error incurred when forming the Bregman divergence
/// from function values, which dominates when `x` and `y` are close.
pub fn check_phi_descent<P: FiniteSum + ?Sized>(
    p: &P,
    spec: &PhiSpec,
    i: usize,
    x: &[f64],
    y: &[f64],
) -> Result<PhiDescentCheck, TheoryError> {
    let mut gy = vec![0.0; p.dim()];
    p.component_gradient(i, y, &mut gy);
    let fx = p.component_value(i, x);
    let fy = p.component_value(i, y);
    let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let inner = dot(&gy, &diff);
    let lhs = fx - fy - inner;
    let r = norm(&diff);
    let rhs = phi_eval(spec, r, norm(&gy))? / 2.0 * r * r;
    let roundoff = 4.0 * f64::EPSILON * (fx.abs() + fy.abs() + inner.abs());
    let holds = lhs <= rhs * (1.0 + PHI_DESCENT_RTOL) + roundoff;
    Ok(PhiDescentCheck { lhs, rhs, holds })
}

/// `(1/n) Σ_i ‖∇f_i(x*)‖²`.
pub fn estimate_sigma_star<P: FiniteSum + ?Sized>(p: &P, x_star: &[f64]) -> f64 {
    let n = p.num_components();
    let mut g = vec![0.0; p.dim()];
    let mut total = 0.0;
    for i in 0..n {
        p.component_gradient(i, x_star, &mut g);
        total += norm_sq(&g);
    }
    total / n as f64
}

/// Largest sampled value of
/// `sqrt( mean_i ‖∇f_i(x) − ∇f(x) − ∇f_i(x*)‖² ) / ‖x − x*‖`.
///
/// Point `j` lies at distance `radius·(j+1)/num_points` from `x_star` in a
/// random direction.
pub fn estimate_delta_star<P: FiniteSum + ?Sized>(
    p: &P,
    x_star: &[f64],
    num_points: usize,
    radius: f64,
    seed: u64,
) -> f64 {
    let (n, d) = (p.num_components(), p.dim());
    if n <= 1 || num_points == 0 || !(radius > 0.0) {
        return 0.0;
    }
    let mut rng = stream(seed, Stream::Estimator);
    let mut star_grads = vec![0.0; n * d];
    for (i, row) in star_grads.chunks_exact_mut(d).enumerate() {
        p.component_gradient(i, x_star, row);
    }
    let (mut gi, mut full) = (vec![0.0; d], vec![0.0; d]);
    let mut x = vec![0.0; d];
    let mut best = 0.0_f64;
    for j in 0..num_points {
        let r = radius * (j + 1) as f64 / num_points as f64;
        let u = unit_vector(&mut rng, d);
        for ((xk, c), uk) in x.iter_mut().zip(x_star).zip(&u) {
            *xk = c + r * uk;
        }
        let r_sq = crate::linalg::dist_sq(&x, x_star);
        if r_sq == 0.0 {
            continue;
        }
        p.gradient(&x, &mut full);
        let mut total = 0.0;
        for i in 0..n {
            p.component_gradient(i, &x, &mut gi);
            let star = &star_grads[i * d..(i + 1) * d];
            total += gi
                .iter()
                .zip(&full)
                .zip(star)
                .map(|((a, b), c)| {
                    let e = a - b - c;
                    e * e
                })
                .sum::<f64>();
        }
        best = best.max(libm::sqrt(total / n as f64 / r_sq));
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L0L1Estimate {
    pub l0: f64,
    pub l1: f64,
    /// Largest amount by which a sampled pair exceeds the fitted constants;
    /// zero unless the search grid was exhausted.
    pub residual_violation: f64,
    pub pairs: usize,
}

/// One sampled pair: `‖∇f_i(x) − ∇f_i(y)‖ / ‖x − y‖` and the segment
/// supremum of the gradient norm.
#[derive(Debug, Clone, Copy)]
struct PairSample {
    ratio: f64,
    segment_sup: f64,
}

/// Pair separations span this many decades below `radius`.
const SEPARATION_DECADES: f64 = 4.0;

fn sample_pairs<P: FiniteSum + ?Sized>(
    p: &P,
    num_pairs: usize,
    radius: f64,
    center: &[f64],
    seed: u64,
) -> Vec<PairSample> {
    let (n, d) = (p.num_components(), p.dim());
    let mut rng = stream(seed, Stream::Estimator);
    let (mut gx, mut gy, mut gu) = (vec![0.0; d], vec![0.0; d], vec![0.0; d]);
    let mut u = vec![0.0; d];
    let mut out = Vec::with_capacity(num_pairs);
    for _ in 0..num_pairs {
        let i = rng.random_range(0..n);
        let x = point_at_random_distance(&mut rng, center, radius);
        let separation = radius * libm::pow(10.0, -SEPARATION_DECADES * rng.random::<f64>());
        let y = point_at_distance_from(&mut rng, &x, separation);
        let r = dist(&x, &y);
        if r == 0.0 {
            continue;
        }
        p.component_gradient(i, &x, &mut gx);
        p.component_gradient(i, &y, &mut gy);
        let mut segment_sup = norm(&gx).max(norm(&gy));
        for j in 1..SEGMENT_POINTS - 1 {
            let t = j as f64 / (SEGMENT_POINTS - 1) as f64;
            for ((uk, a), b) in u.iter_mut().zip(&x).zip(&y) {
                *uk = b + t * (a - b);
            }
            p.component_gradient(i, &u, &mut gu);
            segment_sup = segment_sup.max(norm(&gu));
        }
        out.push(PairSample { ratio: dist(&gx, &gy) / r, segment_sup });
    }
    out
}

/// `center + radius·U·u` with `U` uniform on `[0, 1)` and `u` a uniform unit
/// vector. Unlike uniform sampling in the ball, small distances keep their
/// weight in high dimension.
fn point_at_random_distance<R: Rng>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    let r = radius * rng.random::<f64>();
    point_at_distance_from(rng, center, r)
}

fn point_at_distance_from<R: Rng>(rng: &mut R, center: &[f64], r: f64) -> Vec<f64> {
    let u = unit_vector(rng, center.len());
    center.iter().zip(&u).map(|(c, ui)| c + r * ui).collect()
}

fn required_l0(samples: &[PairSample], l1: f64) -> f64 {
    samples
        .iter()
        .map(|s| s.ratio - l1 * s.segment_sup)
        .fold(0.0, f64::max)
}

/// Fits symmetric `(L0, L1)`-smoothness constants on sampled pairs.
///
/// Each pair takes `x` at a uniformly distributed distance up to `radius`
/// from `center` in a random direction, `y` at a log-uniform distance in
/// `[1e-4·radius, radius]` from `x`, and a uniformly drawn component. Short
/// pairs see the local curvature, long ones the growth of the gradient.
/// For every `L1` on the grid `{0, 1/8, …, 64}` the smallest admissible `L0` is computed and
/// rounded up to a multiple of `1/64`; the pair minimizing `L0 + L1` wins,
/// ties going to the smaller `L1`.
pub fn estimate_l0l1<P: FiniteSum + ?Sized>(
    p: &P,
    num_pairs: usize,
    radius: f64,
    center: &[f64],
    seed: u64,
) -> L0L1Estimate {
    let samples = sample_pairs(p, num_pairs, radius, center, seed);
    let steps = (L1_MAX / L1_STEP) as usize;
    let mut best: Option<(f64, f64)> = None;
    for j in 0..=steps {
        let l1 = j as f64 * L1_STEP;
        let l0 = libm::ceil(required_l0(&samples, l1) / L0_STEP) * L0_STEP;
        if l0 > L0_MAX {
            continue;
        }
        if best.is_none_or(|(b0, b1)| l0 + l1 < b0 + b1) {
            best = Some((l0, l1));
        }
    }
    let (l0, l1) = best.unwrap_or((L0_MAX, L1_MAX));
    let residual_violation = required_l0(&samples, l1) - l0;
    L0L1Estimate {
        l0,
        l1,
        residual_violation: residual_violation.max(0.0),
        pairs: samples.len(),
    }
}

/// Largest excess `‖∇f_i(x) − ∇f_i(y)‖/‖x − y‖ − (L0 + L1·sup‖∇f_i‖)` over
/// the same pairs [`estimate_l0l1`] would draw; nonpositive means the
/// constants are admissible on the sample.
pub fn l0l1_violation<P: FiniteSum + ?Sized>(
    p: &P,
    l0: f64,
    l1: f64,
    num_pairs: usize,
    radius: f64,
    center: &[f64],
    seed: u64,
) -> f64 {
    sample_pairs(p, num_pairs, radius, center, seed)
        .iter()
        .map(|s| s.ratio - l0 - l1 * s.segment_sup)
        .fold(f64::NEG_INFINITY, f64::max)
}
