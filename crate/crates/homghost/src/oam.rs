//! OAM-basis view of the symmetry filter.
//!
//! The SPDC state is Σ_ℓ a_ℓ |Ψ⁺_ℓ⟩ with |Ψ⁺_ℓ⟩ the symmetric combination of
//! |ℓ⟩_A|−ℓ⟩_B. A Dove-prism pair at relative angle θ imprints e^{i2ℓθ} on
//! path A, splitting each ℓ into a_ℓcos(2ℓθ)|Ψ⁺_ℓ⟩ + i·a_ℓsin(2ℓθ)|Ψ⁻_ℓ⟩.
//! Conditioned on coincidences the HOM filter passes only the anti-symmetric
//! part, so at θ=π/4 only odd ℓ survive. ℓ=0 is always symmetric (sin 0 = 0)
//! and therefore always blocked.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spiral spectrum a_ℓ for ℓ ∈ [−lmax, lmax], normalized to Σ|a_ℓ|² = 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpiralSpectrum {
    lmax: i32,
    amps: Vec<Complex64>,
}

impl SpiralSpectrum {
    pub fn new(lmax: i32, amps: Vec<Complex64>) -> Result<Self> {
        if lmax < 0 {
            return Err(Error::invalid("lmax must be >= 0"));
        }
        if amps.len() != (2 * lmax + 1) as usize {
            return Err(Error::invalid(format!(
                "expected {} amplitudes for lmax {lmax}, got {}",
                2 * lmax + 1,
                amps.len()
            )));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::empty("all-zero spiral spectrum"));
        }
        Ok(SpiralSpectrum {
            lmax,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        })
    }

    /// Lorentzian-like decay |a_ℓ|² ∝ 1/(1 + (ℓ/width)²), a standard SPDC
    /// phenomenology; the measured spectrum shape is not asserted anywhere.
    pub fn lorentzian(lmax: i32, width: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::invalid("spectrum width must be > 0"));
        }
        let amps = (-lmax..=lmax)
            .map(|l| {
                let p = 1.0 / (1.0 + (f64::from(l) / width).powi(2));
                Complex64::new(p.sqrt(), 0.0)
            })
            .collect();
        SpiralSpectrum::new(lmax, amps)
    }

    /// Flat spectrum, handy in tests.
    pub fn flat(lmax: i32) -> Result<Self> {
        SpiralSpectrum::new(lmax, vec![Complex64::new(1.0, 0.0); (2 * lmax + 1) as usize])
    }

    pub fn lmax(&self) -> i32 {
        self.lmax
    }

    pub fn amp(&self, l: i32) -> Complex64 {
        debug_assert!(l.abs() <= self.lmax);
        self.amps[(l + self.lmax) as usize]
    }

    pub fn ls(&self) -> impl Iterator<Item = i32> {
        -self.lmax..=self.lmax
    }
}

/// Per-ℓ symmetric/anti-symmetric coefficients after the Dove phase:
/// (a_ℓ cos 2ℓθ, i·a_ℓ sin 2ℓθ).
pub fn dove_phase_decomposition(
    spec: &SpiralSpectrum,
    theta: f64,
) -> Vec<(i32, Complex64, Complex64)> {
    spec.ls()
        .map(|l| {
            let phase = 2.0 * f64::from(l) * theta;
            let sym = spec.amp(l) * phase.cos();
            let anti = spec.amp(l) * Complex64::new(0.0, phase.sin());
            (l, sym, anti)
        })
        .collect()
}

/// Coincidence-conditioned HOM filter: keeps the anti-symmetric coefficients,
/// renormalized, along with the pass probability Σ|a_ℓ sin 2ℓθ|².
pub fn hom_filter_pass(spec: &SpiralSpectrum, theta: f64) -> Result<(SpiralSpectrum, f64)> {
    let decomp = dove_phase_decomposition(spec, theta);
    let pass: f64 = decomp.iter().map(|(_, _, anti)| anti.norm_sqr()).sum();
    let amps: Vec<Complex64> = decomp.into_iter().map(|(_, _, anti)| anti).collect();
    if pass < 1e-28 {
        return Err(Error::empty("no anti-symmetric component passes the filter"));
    }
    Ok((SpiralSpectrum::new(spec.lmax, amps)?, pass))
}

/// Joint coincidence rates over (ℓ_A, ℓ_B) ∈ [−lmax, lmax]².
#[derive(Clone, Debug, PartialEq)]
pub struct OamJointCoincidenceMap {
    lmax: i32,
    /// Row-major over (ℓ_A row, ℓ_B column), offset by lmax.
    rates: Vec<f64>,
}

impl OamJointCoincidenceMap {
    pub fn lmax(&self) -> i32 {
        self.lmax
    }

    pub fn rate(&self, l_a: i32, l_b: i32) -> f64 {
        let side = (2 * self.lmax + 1) as usize;
        self.rates[(l_a + self.lmax) as usize * side + (l_b + self.lmax) as usize]
    }

    pub fn max_rate(&self) -> f64 {
        self.rates.iter().cloned().fold(0.0, f64::max)
    }

    /// Rates scaled so the maximum is 1 (as plotted in the paper's maps).
    pub fn normalized_to_max(&self) -> OamJointCoincidenceMap {
        let max = self.max_rate();
        if max <= 0.0 {
            return self.clone();
        }
        OamJointCoincidenceMap {
            lmax: self.lmax,
            rates: self.rates.iter().map(|r| r / max).collect(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "lA,lB,rate")?;
        for l_a in -self.lmax..=self.lmax {
            for l_b in -self.lmax..=self.lmax {
                writeln!(w, "{l_a},{l_b},{}", self.rate(l_a, l_b))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Heatmap with linear 0-255 scaling relative to the map maximum.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let side = (2 * self.lmax + 1) as u32;
        let max = self.max_rate();
        let data: Vec<u8> = self
            .rates
            .iter()
            .map(|r| {
                if max > 0.0 {
                    (r / max * 255.0).round() as u8
                } else {
                    0
                }
            })
            .collect();
        crate::pgm::write_pgm(path, side, side, &data)
    }
}

/// Simulated spiral-bandwidth coincidence map. Filter off: the SPDC
/// anti-diagonal rate(ℓ, −ℓ) = |a_ℓ|². Filter on at angle θ: the
/// anti-diagonal weighted by sin²(2ℓθ). Off-anti-diagonal entries are
/// exactly zero in both cases (perfect OAM anticorrelation).
pub fn spiral_bandwidth_map(
    spec: &SpiralSpectrum,
    theta: f64,
    filter_on: bool,
) -> Result<OamJointCoincidenceMap> {
    if spec.lmax > 64 {
        return Err(Error::invalid("lmax above the practical bound of 64"));
    }
    let side = (2 * spec.lmax + 1) as usize;
    let mut rates = vec![0.0; side * side];
    for l in spec.ls() {
        let base = spec.amp(l).norm_sqr();
        let weight = if filter_on {
            (2.0 * f64::from(l) * theta).sin().powi(2)
        } else {
            1.0
        };
        rates[(l + spec.lmax) as usize * side + (-l + spec.lmax) as usize] = base * weight;
    }
    Ok(OamJointCoincidenceMap {
        lmax: spec.lmax,
        rates,
    })
}
