//! Dense vector helpers on `&[f64]`.

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm_sq(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(norm_sq(a))
}

#[inline]
pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    libm::sqrt(dist_sq(a, b))
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// `out = x - t * g`
#[inline]
pub fn step_into(out: &mut [f64], x: &[f64], t: f64, g: &[f64]) {
    for ((o, xi), gi) in out.iter_mut().zip(x).zip(g) {
        *o = xi - t * gi;
    }
}

/// Integer power by repeated squaring.
#[inline]
pub fn powu(x: f64, e: u32) -> f64 {
    num_traits::pow(x, e as usize)
}
