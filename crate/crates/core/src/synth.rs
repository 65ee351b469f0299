//! Synthetic ordinal datasets: label groups strung along one direction,
//! buried under a few high-variance distractor coordinates.
//!
//! Coordinates are laid out the way PCA output is: distractor coordinates
//! first, then the signal coordinates, then low-variance noise.

use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, Normal};
use rand_xoshiro::SplitMix64;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Group `t` is centred at `labels[t] * signal_gap * u`, where `u` is the
/// unit vector spread evenly over the `signal_dims` coordinates that follow
/// the `distractor_dims` distractor coordinates. Every
/// coordinate gets `N(0, noise_sigma^2)` noise, and the first
/// `distractor_dims` coordinates get an extra `N(0, distractor_sigma^2)`.
/// Each sample also slides along `u` by `U(-1/2, 1/2) * label_jitter *
/// signal_gap`, like a label binned from a continuous quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub labels: Vec<f64>,
    pub per_group: usize,
    pub dim: usize,
    pub signal_gap: f64,
    pub noise_sigma: f64,
    pub distractor_sigma: f64,
    pub distractor_dims: usize,
    pub signal_dims: usize,
    pub label_jitter: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// The benchmark used for method comparisons: labels 0, 1, 2 in
    /// `R^150`, 30 samples per label, on a pixel-like scale, with three
    /// distractor coordinates and within-label slide along the signal.
    pub fn benchmark(seed: u64) -> Self {
        Self {
            labels: vec![0.0, 1.0, 2.0],
            per_group: 30,
            dim: 150,
            signal_gap: 2000.0,
            noise_sigma: 10.0,
            distractor_sigma: 2500.0,
            distractor_dims: 3,
            signal_dims: 3,
            label_jitter: 0.6,
            seed,
        }
    }

    pub fn m(&self) -> usize {
        self.labels.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.labels.is_empty() || self.labels.iter().any(|l| !l.is_finite()) {
            return Err(Error::invalid(
                "labels must be a non-empty list of finite numbers",
            ));
        }
        if self.per_group == 0 {
            return Err(Error::invalid("per-group count must be >= 1"));
        }
        if self.signal_dims == 0 || self.distractor_dims + self.signal_dims > self.dim {
            return Err(Error::invalid(format!(
                "need 1 <= signal dimensions ({}) and distractor + signal dimensions <= ambient dimension ({})",
                self.signal_dims, self.dim
            )));
        }
        for (name, v) in [
            ("signal gap", self.signal_gap),
            ("noise sigma", self.noise_sigma),
            ("distractor sigma", self.distractor_sigma),
            ("label jitter", self.label_jitter),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// The fixed unit signal direction.
    pub fn direction(&self) -> Vec<f64> {
        let w = 1.0 / (self.signal_dims as f64).sqrt();
        let signal = self.distractor_dims..self.distractor_dims + self.signal_dims;
        (0..self.dim)
            .map(|j| if signal.contains(&j) { w } else { 0.0 })
            .collect()
    }

    pub fn group_center(&self, t: usize) -> Vec<f64> {
        let a = self.labels[t] * self.signal_gap;
        self.direction().into_iter().map(|u| a * u).collect()
    }
}

/// Samples a dataset; groups appear in the order of `spec.labels`, and the
/// result is grouped by ascending label.
pub fn synth<T: Scalar>(spec: &SynthSpec) -> Result<LabeledDataset<T>> {
    spec.validate()?;
    let mut rng = SplitMix64::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let distractor =
        Normal::new(0.0, spec.distractor_sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let n = spec.m() * spec.per_group;
    let mut data = Vec::with_capacity(n * spec.dim);
    let mut labels = Vec::with_capacity(n);
    let u = spec.direction();
    for t in 0..spec.m() {
        let c = spec.group_center(t);
        for _ in 0..spec.per_group {
            let slide = (rng.random::<f64>() - 0.5) * spec.label_jitter * spec.signal_gap;
            for (j, &cj) in c.iter().enumerate() {
                let mut v = cj + slide * u[j] + noise.sample(&mut rng);
                if j < spec.distractor_dims {
                    v += distractor.sample(&mut rng);
                }
                data.push(T::lit(v));
            }
            labels.push(T::lit(spec.labels[t]));
        }
    }
    let features = Matrix::from_vec(n, spec.dim, data)?;
    Ok(LabeledDataset::new(features, labels)?.grouped())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthSpec {
        SynthSpec {
            labels: vec![2.0, 0.0, 1.0],
            per_group: 4,
            dim: 6,
            signal_gap: 10.0,
            noise_sigma: 0.5,
            distractor_sigma: 20.0,
            distractor_dims: 2,
            signal_dims: 3,
            label_jitter: 0.5,
            seed: 3,
        }
    }

    #[test]
    fn seeded_and_grouped() {
        let a = synth::<f64>(&small()).unwrap();
        let b = synth::<f64>(&small()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 12);
        assert!(a.is_grouped());
        assert_eq!(a.distinct_labels(), vec![0.0, 1.0, 2.0]);
        let mut other = small();
        other.seed = 4;
        assert_ne!(synth::<f64>(&other).unwrap(), a);
    }

    #[test]
    fn direction_is_unit_and_skips_distractors() {
        let u = small().direction();
        assert_eq!(&u[..2], &[0.0, 0.0]);
        assert_eq!(u[5], 0.0);
        assert!((u.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_specs() {
        let mut s = small();
        s.distractor_dims = 4;
        assert!(synth::<f64>(&s).is_err());
        let mut s = small();
        s.signal_dims = 0;
        assert!(synth::<f64>(&s).is_err());
        let mut s = small();
        s.noise_sigma = -1.0;
        assert!(synth::<f64>(&s).is_err());
        let mut s = small();
        s.labels.clear();
        assert!(synth::<f64>(&s).is_err());
    }
}
