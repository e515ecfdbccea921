use crate::error::{Error, Result};

/// Flat read/write view over a parameter set, used by [`grad_check`].
pub trait FlatParams {
    fn flat_len(&self) -> usize;
    fn flat_get(&self, i: usize) -> f64;
    fn flat_set(&mut self, i: usize, v: f64);
}

impl FlatParams for Vec<f64> {
    fn flat_len(&self) -> usize {
        self.len()
    }
    fn flat_get(&self, i: usize) -> f64 {
        self[i]
    }
    fn flat_set(&mut self, i: usize, v: f64) {
        self[i] = v;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Flat index of the worst parameter.
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error < tol
    }
}

const DENOM_FLOOR: f64 = 1e-8;

/// Compares `grads` against central differences of `loss` at `theta` for
/// every parameter. Relative error is `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn grad_check<P, F>(theta: &P, loss: F, grads: &P, eps: f64) -> Result<GradCheckReport>
where
    P: FlatParams + Clone,
    F: Fn(&P) -> f64,
{
    if !(1e-6..=1e-3).contains(&eps) {
        return Err(Error::Config(format!(
            "grad_check eps {eps} outside [1e-6, 1e-3]"
        )));
    }
    if theta.flat_len() != grads.flat_len() {
        return Err(Error::Shape(format!(
            "{} parameters but {} gradients",
            theta.flat_len(),
            grads.flat_len()
        )));
    }
    let base = loss(theta);
    if !base.is_finite() {
        return Err(Error::Numeric(format!("loss is {base} at the probe point")));
    }
    let mut probe = theta.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
        checked: theta.flat_len(),
    };
    for i in 0..theta.flat_len() {
        let orig = theta.flat_get(i);
        probe.flat_set(i, orig + eps);
        let up = loss(&probe);
        probe.flat_set(i, orig - eps);
        let down = loss(&probe);
        probe.flat_set(i, orig);
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::Numeric(format!(
                "non-finite loss perturbing parameter {i}"
            )));
        }
        let numeric = (up - down) / (2.0 * eps);
        let analytic = grads.flat_get(i);
        let denom = analytic.abs().max(numeric.abs()).max(DENOM_FLOOR);
        let rel = (analytic - numeric).abs() / denom;
        if rel > report.max_rel_error {
            report.max_rel_error = rel;
            report.worst_index = i;
            report.analytic = analytic;
            report.numeric = numeric;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_is_near_exact() {
        let theta = vec![0.3, -1.2, 2.5, 0.0];
        let grads: Vec<f64> = theta.iter().map(|t| 2.0 * t).collect();
        let r = grad_check(&theta, |p| p.iter().map(|x| x * x).sum(), &grads, 1e-5).unwrap();
        assert!(r.max_rel_error < 1e-9, "{r:?}");
    }

    #[test]
    fn constant_loss_passes_with_floor() {
        let theta = vec![1.0, 2.0];
        let r = grad_check(&theta, |_| 3.5, &vec![0.0, 0.0], 1e-5).unwrap();
        assert_eq!(r.max_rel_error, 0.0);
        assert!(r.passes(1e-4));
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let theta = vec![1.0];
        let r = grad_check(&theta, |p| p[0] * p[0], &vec![1.0], 1e-5).unwrap();
        assert!(r.max_rel_error > 0.4);
    }

    #[test]
    fn non_finite_loss_is_numeric_error() {
        let theta = vec![1.0];
        let err = grad_check(&theta, |_| f64::NAN, &vec![0.0], 1e-5).unwrap_err();
        assert!(matches!(err, Error::Numeric(_)));
    }

    #[test]
    fn eps_range_enforced() {
        let theta = vec![1.0];
        assert!(grad_check(&theta, |_| 0.0, &vec![0.0], 1e-2).is_err());
    }
}
