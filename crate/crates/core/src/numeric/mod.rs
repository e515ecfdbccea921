//! Dense row-major matrices, stable activation functions, a seeded
//! portable random number generator and a central-difference gradient
//! checker.

mod gradcheck;
mod matrix;
mod rng;

pub use gradcheck::{grad_check, FlatParams, GradCheckReport};
pub use matrix::Matrix;
pub use rng::Rng;

use crate::error::{Error, Result};

/// Logistic function, evaluated without overflow for large |x|.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn softmax(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::Shape("softmax of an empty vector".into()));
    }
    let mut out = v.to_vec();
    softmax_in_place(&mut out);
    Ok(out)
}

pub(crate) fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        sum += *x;
    }
    for x in v.iter_mut() {
        *x /= sum;
    }
}

/// Natural-log softmax computed as `v - logsumexp(v)`.
pub fn log_softmax(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::Shape("log_softmax of an empty vector".into()));
    }
    let lse = log_sum_exp(v);
    Ok(v.iter().map(|x| x - lse).collect())
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = v.iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Index of the largest entry; the first one wins ties.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::Rng;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn argmax_prefers_first_of_ties() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmax(&[0.0]), 0);
    }

    #[test]
    fn softmax_uniform_for_equal_inputs() {
        let p = softmax(&[0.0, 0.0, 0.0]).unwrap();
        for x in p {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_two_values() {
        let p = softmax(&[1.0, 2.0]).unwrap();
        let e = std::f64::consts::E;
        assert!((p[0] - 1.0 / (1.0 + e)).abs() < 1e-15);
        assert!((p[1] - e / (1.0 + e)).abs() < 1e-15);
        assert!((p[0] - 0.26894).abs() < 1e-5);
        assert!((p[1] - 0.73106).abs() < 1e-5);
    }

    #[test]
    fn softmax_empty_is_shape_error() {
        assert!(matches!(softmax(&[]), Err(Error::Shape(_))));
        assert!(matches!(log_softmax(&[]), Err(Error::Shape(_))));
    }

    #[test]
    fn softmax_survives_huge_logits() {
        let p = softmax(&[1000.0, 1000.0, -1000.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15);
        assert!(p.iter().all(|x| x.is_finite()));
        let lp = log_softmax(&[1000.0, 0.0]).unwrap();
        assert!(lp[1].is_finite());
    }

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(2.0) - 0.880_797_077_977_882_3).abs() < 1e-15);
        assert!(sigmoid(800.0) <= 1.0 && sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(-800.0).is_finite());
    }

    #[test]
    fn softmax_sums_to_one_at_lm_scale() {
        let mut rng = Rng::new(11);
        let v: Vec<f64> = (0..20_000).map(|_| rng.uniform(-30.0, 30.0)).collect();
        let s: f64 = softmax(&v).unwrap().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn softmax_shift_invariant(v in prop::collection::vec(-50.0f64..50.0, 1..40), c in -100.0f64..100.0) {
            let a = softmax(&v).unwrap();
            let shifted: Vec<f64> = v.iter().map(|x| x + c).collect();
            let b = softmax(&shifted).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
            let s: f64 = a.iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
            prop_assert!(a.iter().all(|&p| p > 0.0));
        }

        #[test]
        fn sigmoid_symmetric_and_monotone(x in -30.0f64..30.0, dx in 1e-3f64..5.0) {
            prop_assert!((sigmoid(-x) - (1.0 - sigmoid(x))).abs() < 1e-15);
            prop_assert!(sigmoid(x + dx) >= sigmoid(x));
            let s = sigmoid(x);
            prop_assert!(s > 0.0 && s < 1.0);
        }

        #[test]
        fn softplus_matches_naive(x in -30.0f64..30.0) {
            prop_assert!((softplus(x) - (1.0 + x.exp()).ln()).abs() < 1e-12);
        }
    }
}
