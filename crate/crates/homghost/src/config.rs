//! Run configuration: one JSON document per run, CLI flags taking precedence
//! over file fields. The resolved config is echoed into every sidecar JSON so
//! a run can be replayed from its outputs alone.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::detect::DetectionConfig;
use crate::error::{Error, Result};
use crate::grid::PixelGrid;
use crate::imaging::{MeasureMask, ObjectMask, ProjectionMode, random_masks, raster_masks};
use crate::objects::builtin_object;
use crate::state::SpdcProfile;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    /// Dove rotation only, no beamsplitter (Fig. 5(b,c) style runs).
    NoBs,
    /// Rotation, 50:50-style beamsplitter, coincidence post-selection.
    Hom,
    /// Same, with path B delayed beyond the coherence length first.
    BsDelayed,
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pipeline::NoBs => "no_bs",
            Pipeline::Hom => "hom",
            Pipeline::BsDelayed => "bs_delayed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectSource {
    Builtin { name: String },
    Pgm { path: PathBuf },
}

impl ObjectSource {
    pub fn load(&self, grid: &PixelGrid) -> Result<ObjectMask> {
        match self {
            ObjectSource::Builtin { name } => builtin_object(name, grid),
            ObjectSource::Pgm { path } => {
                let obj = ObjectMask::from_pgm(path)?;
                if !obj.grid().same_dims(grid) {
                    return Err(Error::invalid(format!(
                        "object {} is {}x{}, config grid is {}x{}",
                        path.display(),
                        obj.grid().width(),
                        obj.grid().height(),
                        grid.width(),
                        grid.height()
                    )));
                }
                // Rebuild on the run grid so a custom rotation center applies.
                ObjectMask::from_bits(grid.clone(), obj.bits().to_vec())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScanConfig {
    /// Block-raster single-pixel scan; block must divide both grid dims.
    Raster { block: u32 },
    /// `n` random masks at the given white-pixel fill fraction.
    Random { n: usize, fill: f64, seed: u64 },
}

impl ScanConfig {
    pub fn masks(&self, grid: &PixelGrid) -> Result<Vec<MeasureMask>> {
        match *self {
            ScanConfig::Raster { block } => raster_masks(grid, block),
            ScanConfig::Random { n, fill, seed } => random_masks(grid, n, fill, seed),
        }
    }

    fn tag(&self) -> String {
        match *self {
            ScanConfig::Raster { block } => format!("raster{block}"),
            ScanConfig::Random { n, fill, seed } => {
                format!("random{n}f{}m{seed}", (fill * 100.0).round() as i64)
            }
        }
    }
}

/// Beamsplitter intensity split t²:r².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BsRatio {
    pub t_sq: f64,
    pub r_sq: f64,
}

impl Default for BsRatio {
    fn default() -> Self {
        BsRatio {
            t_sq: 0.5,
            r_sq: 0.5,
        }
    }
}

impl BsRatio {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_sq > 0.0) || !(self.r_sq > 0.0) {
            return Err(Error::invalid("beamsplitter t², r² must be > 0"));
        }
        if (self.t_sq + self.r_sq - 1.0).abs() > 1e-13 {
            return Err(Error::invalid(format!(
                "beamsplitter split must satisfy t² + r² = 1, got {}",
                self.t_sq + self.r_sq
            )));
        }
        Ok(())
    }

    pub fn amplitudes(&self) -> (f64, f64) {
        // Both roots taken directly so a 50:50 split yields bit-identical
        // t and r (the exact-cancellation cases depend on that).
        (self.t_sq.sqrt(), self.r_sq.sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub width: u32,
    pub height: u32,
    /// Dove rotation axis; defaults to the grid center ((w-1)/2, (h-1)/2).
    pub rotation_center: Option<(f64, f64)>,
    pub object: ObjectSource,
    /// Dove-prism half-angle θ in radians; the image rotation is 2θ.
    pub theta: f64,
    pub pipeline: Pipeline,
    pub scan: ScanConfig,
    pub detection: DetectionConfig,
    pub beamsplitter: BsRatio,
    pub profile: SpdcProfile,
    pub projection: ProjectionMode,
    pub output_dir: PathBuf,
    /// Worker threads for the mask sweep; 0 = library default.
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            width: 48,
            height: 48,
            rotation_center: None,
            object: ObjectSource::Builtin {
                name: "lambda".to_string(),
            },
            theta: FRAC_PI_4,
            pipeline: Pipeline::Hom,
            scan: ScanConfig::Random {
                n: 4000,
                fill: 0.5,
                seed: 1,
            },
            detection: DetectionConfig::default(),
            beamsplitter: BsRatio::default(),
            profile: SpdcProfile::Uniform,
            projection: ProjectionMode::Coherent,
            output_dir: PathBuf::from("out"),
            threads: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let cfg: ExperimentConfig = serde_json::from_reader(std::io::BufReader::new(file))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta must be finite"));
        }
        match self.scan {
            ScanConfig::Raster { block } => {
                if block == 0 || self.width % block != 0 || self.height % block != 0 {
                    return Err(Error::invalid(format!(
                        "raster block {block} must divide {}x{}",
                        self.width, self.height
                    )));
                }
            }
            ScanConfig::Random { n, fill, .. } => {
                if n == 0 {
                    return Err(Error::invalid("random scan needs n > 0"));
                }
                if !(fill > 0.0 && fill <= 1.0) {
                    return Err(Error::invalid("fill must be in (0, 1]"));
                }
            }
        }
        self.detection.validate()?;
        self.beamsplitter.validate()?;
        self.profile.validate()?;
        match &self.object {
            ObjectSource::Builtin { name } => {
                if !crate::objects::BUILTIN_NAMES.contains(&name.as_str()) {
                    return Err(Error::invalid(format!(
                        "unknown built-in object {name:?}; available: {:?}",
                        crate::objects::BUILTIN_NAMES
                    )));
                }
            }
            ObjectSource::Pgm { path } => {
                if !path.exists() {
                    return Err(Error::invalid(format!(
                        "object file not found: {}",
                        path.display()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<PixelGrid> {
        match self.rotation_center {
            Some(c) => PixelGrid::with_center(self.width, self.height, c),
            None => PixelGrid::new(self.width, self.height),
        }
    }

    /// Output stem encoding pipeline, angle (mrad), scan shape, and seed, so
    /// distinct runs never overwrite each other silently.
    pub fn file_stem(&self) -> String {
        format!(
            "ghost_{}_{}mrad_{}_s{}",
            self.pipeline,
            (self.theta * 1000.0).round() as i64,
            self.scan.tag(),
            self.detection.seed
        )
    }
}

/// Spiral-bandwidth map run: Lorentzian-like spectrum over ℓ ∈ [−lmax, lmax],
/// optional HOM filter at angle theta.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpiralConfig {
    pub lmax: i32,
    /// Spectrum width w in |a_ℓ|² ∝ 1/(1 + (ℓ/w)²).
    pub width: f64,
    pub theta: f64,
    pub filter: bool,
    /// Scale the written map so its maximum is 1.
    pub normalize: bool,
    pub output_dir: PathBuf,
}

impl Default for SpiralConfig {
    fn default() -> Self {
        SpiralConfig {
            lmax: 15,
            width: 7.0,
            theta: FRAC_PI_4,
            filter: false,
            normalize: true,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl SpiralConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let cfg: SpiralConfig = serde_json::from_reader(std::io::BufReader::new(file))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lmax < 0 {
            return Err(Error::invalid("lmax must be >= 0"));
        }
        if !(self.width > 0.0) {
            return Err(Error::invalid("spectrum width must be > 0"));
        }
        if !self.theta.is_finite() {
            return Err(Error::invalid("theta must be finite"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        ExperimentConfig::default().validate().unwrap();
    }

    #[test]
    fn json_round_trip() {
        let cfg = ExperimentConfig {
            theta: 0.1,
            pipeline: Pipeline::BsDelayed,
            scan: ScanConfig::Raster { block: 4 },
            rotation_center: Some((10.0, 12.5)),
            ..ExperimentConfig::default()
        };
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_json_uses_defaults() {
        let cfg: ExperimentConfig =
            serde_json::from_str(r#"{"theta": 0.0, "pipeline": "no_bs"}"#).unwrap();
        assert_eq!(cfg.pipeline, Pipeline::NoBs);
        assert_eq!(cfg.width, 48);
        assert!(matches!(cfg.scan, ScanConfig::Random { n: 4000, .. }));
    }

    #[test]
    fn unknown_field_rejected() {
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"thetaa": 0.0}"#).is_err());
    }

    #[test]
    fn bad_raster_block_rejected() {
        let cfg = ExperimentConfig {
            scan: ScanConfig::Raster { block: 5 },
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn unbalanced_bs_rejected() {
        let cfg = ExperimentConfig {
            beamsplitter: BsRatio {
                t_sq: 0.7,
                r_sq: 0.4,
            },
            ..ExperimentConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn file_stem_is_distinctive() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.theta = -std::f64::consts::FRAC_PI_8;
        assert_ne!(a.file_stem(), b.file_stem());
        assert!(a.file_stem().starts_with("ghost_hom_785mrad_random4000f50m1"));
    }

    #[test]
    fn bs_amplitudes_unitary() {
        let (t, r) = BsRatio::default().amplitudes();
        assert!((t * t + r * r - 1.0).abs() < 1e-15);
    }
}
