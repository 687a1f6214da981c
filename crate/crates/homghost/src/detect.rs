//! Shot-noise model: expected coincidence probabilities become Poisson counts
//! at λ = prob · pairRate · integration, drawn from counter-based streams so
//! every sample index is reproducible independently. Also the HOM-visibility
//! convex mixing of matched and delayed intensity images.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Image;
use crate::rng::stream_rng;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectionConfig {
    /// Detected pair rate in pairs/second.
    pub pair_rate: f64,
    /// Integration time per mask, seconds.
    pub integration: f64,
    pub seed: u64,
    /// Off: deterministic round(λ) instead of a Poisson draw.
    pub poisson: bool,
    /// HOM visibility V ∈ [0,1]; 1 = fully matched paths, 0 = fully delayed.
    pub visibility: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        DetectionConfig {
            pair_rate: 10_000.0,
            integration: 1.0,
            seed: 0,
            poisson: false,
            visibility: 1.0,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pair_rate < 0.0 {
            return Err(Error::invalid("pair_rate must be >= 0"));
        }
        if !(self.integration > 0.0) {
            return Err(Error::invalid("integration must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err(Error::invalid("visibility must be in [0,1]"));
        }
        Ok(())
    }
}

/// Count for sample `index`: Poisson(λ) with λ = prob·pairRate·integration,
/// deterministic per (seed, index); with Poisson off, round(λ).
pub fn sample_count(prob: f64, cfg: &DetectionConfig, index: u64) -> u64 {
    debug_assert!((0.0..=1.0 + 1e-9).contains(&prob), "prob out of range: {prob}");
    let lambda = prob.max(0.0) * cfg.pair_rate * cfg.integration;
    if !cfg.poisson {
        return lambda.round() as u64;
    }
    if lambda <= 0.0 {
        return 0;
    }
    let mut rng = stream_rng(cfg.seed, index);
    // Consistent stream usage whatever the distribution does internally.
    let dist = Poisson::new(lambda).expect("lambda > 0");
    let draw: f64 = dist.sample(&mut rng);
    let _ = rng.gen::<u64>();
    draw as u64
}

/// Pixelwise convex mix V·matched + (1−V)·delayed.
pub fn mix_visibility(matched: &Image, delayed: &Image, v: f64) -> Result<Image> {
    if !matched.grid().same_dims(delayed.grid()) {
        return Err(Error::invalid("visibility mix: grid mismatch"));
    }
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::invalid("visibility must be in [0,1]"));
    }
    let values = matched
        .values()
        .iter()
        .zip(delayed.values())
        .map(|(m, d)| v * m + (1.0 - v) * d)
        .collect();
    Image::new(matched.grid().clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::PixelGrid;

    #[test]
    fn zero_probability_gives_zero() {
        let cfg = DetectionConfig {
            poisson: true,
            ..DetectionConfig::default()
        };
        assert_eq!(sample_count(0.0, &cfg, 0), 0);
    }

    #[test]
    fn deterministic_rounding_without_poisson() {
        let cfg = DetectionConfig {
            pair_rate: 1000.0,
            integration: 1.0,
            poisson: false,
            ..DetectionConfig::default()
        };
        assert_eq!(sample_count(0.5, &cfg, 0), 500);
    }

    #[test]
    fn identical_seed_index_identical_count() {
        let cfg = DetectionConfig {
            pair_rate: 1e5,
            poisson: true,
            seed: 42,
            ..DetectionConfig::default()
        };
        for idx in [0u64, 1, 99] {
            assert_eq!(sample_count(0.3, &cfg, idx), sample_count(0.3, &cfg, idx));
        }
        assert_ne!(
            (0..32)
                .map(|i| sample_count(0.3, &cfg, i))
                .collect::<Vec<_>>(),
            vec![sample_count(0.3, &cfg, 0); 32]
        );
    }

    #[test]
    fn poisson_mean_converges() {
        // λ = 100, 10^4 draws: mean within 3 standard errors.
        let cfg = DetectionConfig {
            pair_rate: 100.0,
            integration: 1.0,
            poisson: true,
            seed: 7,
            ..DetectionConfig::default()
        };
        let n = 10_000u64;
        let mean = (0..n).map(|i| sample_count(1.0, &cfg, i) as f64).sum::<f64>() / n as f64;
        assert!((mean - 100.0).abs() < 3.0, "mean {mean}");
    }

    #[test]
    fn visibility_endpoints() {
        let g = PixelGrid::new(2, 2).unwrap();
        let m = Image::new(g.clone(), vec![1.0, 0.0, 0.5, 0.25]).unwrap();
        let d = Image::new(g, vec![0.0, 1.0, 0.5, 0.75]).unwrap();
        assert_eq!(mix_visibility(&m, &d, 1.0).unwrap(), m);
        assert_eq!(mix_visibility(&m, &d, 0.0).unwrap(), d);
        let half = mix_visibility(&m, &d, 0.5).unwrap();
        for (i, v) in half.values().iter().enumerate() {
            let lo = m.values()[i].min(d.values()[i]);
            let hi = m.values()[i].max(d.values()[i]);
            assert!(*v >= lo - 1e-15 && *v <= hi + 1e-15);
        }
    }

    #[test]
    fn grid_mismatch_rejected() {
        let m = Image::zeros(PixelGrid::new(2, 2).unwrap());
        let d = Image::zeros(PixelGrid::new(3, 2).unwrap());
        assert!(mix_visibility(&m, &d, 0.5).is_err());
    }
}
