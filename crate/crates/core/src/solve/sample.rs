use crate::error::{Error, Result};
use crate::matcore::{random, Vector};

#[derive(Clone, Debug)]
pub struct LocalCheck {
    /// `min φ(p + δ) − φ(p)` over the sampled perturbations.
    pub min_gap: f64,
    pub argmin: Vector,
    pub trials: usize,
}

/// Sample `trials` points uniformly from the ball of the given radius around
/// `point` and report the smallest change in objective.
///
/// A negative `min_gap` is a certificate that `point` is not a local minimum;
/// a non-negative one is only evidence.
pub fn sample_local_check(
    objective: &dyn Fn(&Vector) -> f64,
    point: &Vector,
    radius: f64,
    trials: usize,
    seed: u64,
) -> Result<LocalCheck> {
    if !(radius > 0.0 && radius.is_finite()) || trials == 0 {
        return Err(Error::InvalidArgument(
            "radius and trial count must be positive".into(),
        ));
    }
    let base = objective(point);
    if !base.is_finite() {
        return Err(Error::NonFinite("objective at sample center"));
    }
    let mut rng = random::rng(seed);
    let mut best = (f64::INFINITY, Vector::zeros(point.len()));
    for _ in 0..trials {
        let delta = random::in_ball(point.len(), radius, &mut rng);
        let gap = objective(&(point + &delta)) - base;
        if gap < best.0 {
            best = (gap, delta);
        }
    }
    Ok(LocalCheck {
        min_gap: best.0,
        argmin: best.1,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimum_has_no_descent_and_saddle_does() {
        let bowl = |v: &Vector| v.norm_squared();
        let r = sample_local_check(&bowl, &Vector::zeros(3), 1e-2, 500, 1).unwrap();
        assert!(r.min_gap >= 0.0);
        let saddle = |v: &Vector| v[0] * v[0] - v[1] * v[1];
        let r = sample_local_check(&saddle, &Vector::zeros(2), 1e-2, 500, 1).unwrap();
        assert!(r.min_gap < 0.0);
        assert!(r.argmin.norm() <= 1e-2);
    }
}
