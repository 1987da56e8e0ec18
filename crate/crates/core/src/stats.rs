//! Compensated summation, sample moments and Kolmogorov-Smirnov distances.

use statrs::distribution::{ContinuousCDF, Normal};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut s = NeumaierSum::default();
    values.into_iter().for_each(|x| s.add(x));
    s.value()
}

/// Mean, unbiased variance and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let n = values.len();
    if n == 0 {
        return Summary {
            n,
            mean: f64::NAN,
            variance: f64::NAN,
            std_error: f64::NAN,
        };
    }
    let mean = neumaier_sum(values.iter().copied()) / n as f64;
    let variance = if n > 1 {
        neumaier_sum(values.iter().map(|x| (x - mean).powi(2))) / (n - 1) as f64
    } else {
        0.0
    };
    Summary {
        n,
        mean,
        variance,
        std_error: (variance / n as f64).sqrt(),
    }
}

/// Fraction of `sorted` samples not exceeding `x`.
pub fn empirical_cdf(sorted: &[f64], x: f64) -> f64 {
    sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64
}

/// `sup_x |F_n(x) - F(x)|` for ascending `sorted` samples and a continuous `F`.
pub fn ks_distance<F: Fn(f64) -> f64>(sorted: &[f64], cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let j = i + sorted[i..].partition_point(|&v| v <= x);
        let f = cdf(x);
        d = d
            .max((f - i as f64 / n).abs())
            .max((j as f64 / n - f).abs());
        i = j;
    }
    d
}

/// CDF of `N(mean, sd^2)`, degenerating to a unit step when `sd = 0`.
pub fn normal_cdf(mean: f64, sd: f64) -> impl Fn(f64) -> f64 {
    let dist = (sd > 0.0).then(|| Normal::new(mean, sd).expect("finite positive sd"));
    move |x| match &dist {
        Some(d) => d.cdf(x),
        None => {
            if x >= mean {
                1.0
            } else {
                0.0
            }
        }
    }
}

pub fn ks_normal(sorted: &[f64], mean: f64, sd: f64) -> f64 {
    if sd > 0.0 {
        return ks_distance(sorted, normal_cdf(mean, sd));
    }
    let n = sorted.len() as f64;
    let below = sorted.partition_point(|&v| v < mean) as f64 / n;
    let at_or_below = sorted.partition_point(|&v| v <= mean) as f64 / n;
    below.max(1.0 - at_or_below)
}

pub fn sort_floats(v: &mut [f64]) {
    v.sort_by(f64::total_cmp);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(neumaier_sum(v), 2.0);
    }

    #[test]
    fn summary_values() {
        let s = summarize(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((s.std_error - (5.0 / 12.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ks_of_normal_samples_is_small() {
        let mut rng = stream_rng(3, 0);
        let mut v: Vec<f64> = (0..20_000)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        sort_floats(&mut v);
        assert!(ks_normal(&v, 0.0, 1.0) < 0.015);
        assert!(ks_normal(&v, 0.5, 1.0) > 0.15);
        assert_eq!(empirical_cdf(&v, f64::INFINITY), 1.0);
    }

    #[test]
    fn ks_against_step() {
        let v = [1.0, 1.0, 1.0];
        assert_eq!(ks_normal(&v, 1.0, 0.0), 0.0);
        assert_eq!(ks_normal(&v, 2.0, 0.0), 1.0);
    }

    proptest! {
        #[test]
        fn ks_is_a_distance(mut v in proptest::collection::vec(-5.0f64..5.0, 1..200)) {
            sort_floats(&mut v);
            let d = ks_normal(&v, 0.0, 1.0);
            prop_assert!((0.0..=1.0).contains(&d));
        }

        #[test]
        fn compensated_sum_is_order_insensitive(mut v in proptest::collection::vec(-1e6f64..1e6, 1..300)) {
            let a = neumaier_sum(v.iter().copied());
            v.reverse();
            let b = neumaier_sum(v.iter().copied());
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }
}
