//! Object/measurement masks and the two reconstruction protocols: the
//! single-pixel raster scan, Image = Σ (c_i/n) P_i, and the random-mask scan,
//! Image ≈ Σ ((c_i − c̄)/n) M_i with c̄ the mean count.
//!
//! Expected coincidence rates use the coherent mask projection ⟨M| = w Σ_s
//! M(s)⟨s| — amplitudes are summed before squaring, w absorbing the fill
//! normalization. An incoherent per-pixel-sum mode is available for
//! comparison; it is not the default.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Image, PixelCoord, PixelGrid, RotationOp};
use crate::rng::stream_rng;
use crate::state::SinglePhotonState;

/// Binary object O(r): true = white = transmits, false = black = blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectMask {
    grid: PixelGrid,
    bits: Vec<bool>,
}

impl ObjectMask {
    pub fn from_bits(grid: PixelGrid, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != grid.num_pixels() {
            return Err(Error::invalid("mask bits do not match grid size"));
        }
        Ok(ObjectMask { grid, bits })
    }

    pub fn from_fn<F: Fn(PixelCoord) -> bool>(grid: PixelGrid, f: F) -> Self {
        let bits = grid.pixels().map(&f).collect();
        ObjectMask { grid, bits }
    }

    pub fn from_pgm(path: &Path) -> Result<Self> {
        let (w, h, data) = crate::pgm::read_pgm(path)?;
        let grid = PixelGrid::new(w, h)?;
        Ok(ObjectMask {
            grid,
            bits: data.iter().map(|&v| v >= 128).collect(),
        })
    }

    pub fn to_pgm(&self, path: &Path) -> Result<()> {
        let data: Vec<u8> = self.bits.iter().map(|&b| if b { 255 } else { 0 }).collect();
        crate::pgm::write_pgm(path, self.grid.width(), self.grid.height(), &data)
    }

    pub fn grid(&self) -> &PixelGrid {
        &self.grid
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, c: PixelCoord) -> bool {
        self.bits[self.grid.index_of(c)]
    }

    pub fn white_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// O(Rr) with nearest-pixel sampling; out-of-grid reads as blocked.
    pub fn sample_rotated(&self, op: &RotationOp, r: PixelCoord) -> bool {
        crate::grid::sample_rotated(&self.grid, |c| self.get(c), op, r)
    }

    /// The image r ↦ O(Rr) as a binary image.
    pub fn rotated_image(&self, op: &RotationOp) -> Image {
        let values = self
            .grid
            .pixels()
            .map(|r| if self.sample_rotated(op, r) { 1.0 } else { 0.0 })
            .collect();
        Image::new(self.grid.clone(), values).expect("size")
    }
}

/// Measurement mask M_i(r) with its white-pixel fill fraction.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureMask {
    grid: PixelGrid,
    bits: Vec<bool>,
    fill: f64,
}

impl MeasureMask {
    pub fn new(grid: PixelGrid, bits: Vec<bool>, fill: f64) -> Result<Self> {
        if bits.len() != grid.num_pixels() {
            return Err(Error::invalid("mask bits do not match grid size"));
        }
        if !(fill > 0.0 && fill <= 1.0) {
            return Err(Error::invalid(format!("fill must be in (0,1], got {fill}")));
        }
        let white = bits.iter().filter(|&&b| b).count() as f64;
        if (white - fill * bits.len() as f64).abs() > 1.0 {
            return Err(Error::invalid(format!(
                "white count {white} inconsistent with fill {fill}"
            )));
        }
        Ok(MeasureMask { grid, bits, fill })
    }

    pub fn grid(&self) -> &PixelGrid {
        &self.grid
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, c: PixelCoord) -> bool {
        self.bits[self.grid.index_of(c)]
    }

    pub fn fill(&self) -> f64 {
        self.fill
    }

    pub fn white_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

/// One mask per block position, exactly one block of pixels white. `block`
/// must divide both grid dimensions. Order is row-major over block positions.
pub fn raster_masks(grid: &PixelGrid, block: u32) -> Result<Vec<MeasureMask>> {
    if block == 0 || grid.width() % block != 0 || grid.height() % block != 0 {
        return Err(Error::invalid(format!(
            "block {block} does not divide {}x{}",
            grid.width(),
            grid.height()
        )));
    }
    let bw = grid.width() / block;
    let bh = grid.height() / block;
    let total = grid.num_pixels() as f64;
    let fill = f64::from(block * block) / total;
    let mut masks = Vec::with_capacity((bw * bh) as usize);
    for by in 0..bh {
        for bx in 0..bw {
            let bits = grid
                .pixels()
                .map(|c| {
                    (c.x as u32) / block == bx && (c.y as u32) / block == by
                })
                .collect();
            masks.push(MeasureMask::new(grid.clone(), bits, fill)?);
        }
    }
    Ok(masks)
}

/// N random binary masks with ⌊fill·total⌉ white pixels each, placed by a
/// seeded shuffle. Mask i draws from its own counter-based stream, so it is
/// reproducible independently of the rest of the set.
pub fn random_masks(grid: &PixelGrid, n: usize, fill: f64, seed: u64) -> Result<Vec<MeasureMask>> {
    if n == 0 {
        return Err(Error::invalid("need at least one mask"));
    }
    if !(fill > 0.0 && fill <= 1.0) {
        return Err(Error::invalid(format!("fill must be in (0,1], got {fill}")));
    }
    let total = grid.num_pixels();
    let white = ((fill * total as f64).round() as usize).clamp(1, total);
    let mut masks = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = stream_rng(seed, i as u64);
        let chosen = rand::seq::index::sample(&mut rng, total, white);
        let mut bits = vec![false; total];
        for idx in chosen.iter() {
            bits[idx] = true;
        }
        masks.push(MeasureMask::new(grid.clone(), bits, fill)?);
    }
    Ok(masks)
}

/// How multi-pixel masks combine the photon-B amplitudes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMode {
    /// Sum amplitudes over the mask, then square (the m_i observables).
    #[default]
    Coherent,
    /// Sum per-pixel intensities over the mask; comparison mode only.
    Incoherent,
}

/// Expected coincidence probability |⟨M|ψ_B⟩|² with ⟨M| = w Σ_s M(s)⟨s|,
/// w = 1/√(white count). Time-bin branches add incoherently.
pub fn expected_coincidence(
    sp: &SinglePhotonState,
    mask: &MeasureMask,
    mode: ProjectionMode,
) -> f64 {
    debug_assert!(sp.grid().same_dims(mask.grid()));
    let white = mask.white_count();
    if white == 0 {
        return 0.0;
    }
    let w2 = 1.0 / white as f64;
    match mode {
        ProjectionMode::Coherent => {
            let mut total = 0.0;
            for (_, amps) in sp.branches() {
                let mut acc = Complex64::default();
                for (i, &b) in mask.bits().iter().enumerate() {
                    if b {
                        acc += amps[i];
                    }
                }
                total += acc.norm_sqr();
            }
            total * w2
        }
        ProjectionMode::Incoherent => {
            let intensity = sp.intensity();
            let sum: f64 = mask
                .bits()
                .iter()
                .zip(&intensity)
                .filter(|(&b, _)| b)
                .map(|(_, v)| v)
                .sum();
            sum * w2
        }
    }
}

/// One measurement row: expected rate (probability × rate constant) and,
/// when shot noise is on, the sampled count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceRecord {
    pub mask_id: usize,
    pub expected_rate: f64,
    pub sampled_count: Option<u64>,
}

impl CoincidenceRecord {
    /// The c_i entering a reconstruction: the sampled count when present,
    /// otherwise the noiseless expected rate.
    pub fn value(&self) -> f64 {
        self.sampled_count
            .map(|c| c as f64)
            .unwrap_or(self.expected_rate)
    }
}

pub fn write_records_csv(path: &Path, records: &[CoincidenceRecord]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "maskId,expectedRate,sampledCount")?;
    for r in records {
        match r.sampled_count {
            Some(c) => writeln!(w, "{},{},{}", r.mask_id, r.expected_rate, c)?,
            None => writeln!(w, "{},{},", r.mask_id, r.expected_rate)?,
        }
    }
    w.flush()?;
    Ok(())
}

/// Reconstruction with raw signed values plus the normalization metadata.
#[derive(Clone, Debug)]
pub struct ReconstructedImage {
    grid: PixelGrid,
    /// Signed values after dividing by `norm`; max magnitude 1.
    raw: Vec<f64>,
    /// The n of Image = Σ (c_i/n)·mask_i (max-normalization).
    pub norm: f64,
    /// Mean count c̄ subtracted in the random-mask protocol (0 for raster).
    pub cbar: f64,
}

impl ReconstructedImage {
    pub fn grid(&self) -> &PixelGrid {
        &self.grid
    }

    pub fn raw_values(&self) -> &[f64] {
        &self.raw
    }

    /// Display view, negatives clamped to 0.
    pub fn clamped(&self) -> Image {
        let values = self.raw.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Image::new(self.grid.clone(), values).expect("size")
    }
}

/// Eq.-(17)-style raster reconstruction: Image = Σ_i (c_i/n) P_i with
/// n = max_i c_i, so values land in [0,1].
pub fn reconstruct_single_pixel(
    records: &[CoincidenceRecord],
    masks: &[MeasureMask],
) -> Result<ReconstructedImage> {
    if records.len() != masks.len() {
        return Err(Error::invalid(format!(
            "{} records vs {} masks",
            records.len(),
            masks.len()
        )));
    }
    if masks.is_empty() {
        return Err(Error::invalid("no masks"));
    }
    let grid = masks[0].grid().clone();
    let n = records.iter().map(|r| r.value()).fold(0.0_f64, f64::max);
    let mut values = vec![0.0; grid.num_pixels()];
    if n > 0.0 {
        for (rec, mask) in records.iter().zip(masks) {
            let w = rec.value() / n;
            if w == 0.0 {
                continue;
            }
            for (i, &b) in mask.bits().iter().enumerate() {
                if b {
                    values[i] += w;
                }
            }
        }
    }
    Ok(ReconstructedImage {
        grid,
        raw: values,
        norm: if n > 0.0 { n } else { 1.0 },
        cbar: 0.0,
    })
}

/// Eq.-(18)-style random-mask reconstruction: Image ≈ Σ_i ((c_i − c̄)/n) M_i
/// with c̄ the mean count and n fixed so max |value| = 1. Negative values are
/// preserved in the raw view and clamped for display.
pub fn reconstruct_random_mask(
    records: &[CoincidenceRecord],
    masks: &[MeasureMask],
) -> Result<ReconstructedImage> {
    if records.len() != masks.len() {
        return Err(Error::invalid(format!(
            "{} records vs {} masks",
            records.len(),
            masks.len()
        )));
    }
    if masks.is_empty() {
        return Err(Error::invalid("no masks"));
    }
    let fill = masks[0].fill();
    if masks.iter().any(|m| (m.fill() - fill).abs() > 1e-12) {
        return Err(Error::invalid(
            "all masks must share one fill fraction".to_string(),
        ));
    }
    let grid = masks[0].grid().clone();
    let cbar = records.iter().map(|r| r.value()).sum::<f64>() / records.len() as f64;
    let mut values = vec![0.0; grid.num_pixels()];
    for (rec, mask) in records.iter().zip(masks) {
        let w = rec.value() - cbar;
        if w == 0.0 {
            continue;
        }
        for (i, &b) in mask.bits().iter().enumerate() {
            if b {
                values[i] += w;
            }
        }
    }
    let n = values.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
    let norm = if n > 0.0 { n } else { 1.0 };
    for v in values.iter_mut() {
        *v /= norm;
    }
    Ok(ReconstructedImage {
        grid,
        raw: values,
        norm,
        cbar,
    })
}

/// Pearson correlation between two equally sized value slices; 0 when either
/// side is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va.sqrt() * vb.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid48() -> PixelGrid {
        PixelGrid::new(48, 48).unwrap()
    }

    #[test]
    fn raster_mask_counts() {
        let g = grid48();
        assert_eq!(raster_masks(&g, 1).unwrap().len(), 2304);
        let g960 = PixelGrid::new(960, 960).unwrap();
        assert_eq!(raster_masks(&g960, 20).unwrap().len(), 2304);
        let g2 = PixelGrid::new(2, 2).unwrap();
        let m = raster_masks(&g2, 2).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].white_count(), 4);
    }

    #[test]
    fn raster_masks_cover_every_pixel_once() {
        let g = PixelGrid::new(12, 8).unwrap();
        for block in [1u32, 2, 4] {
            let masks = raster_masks(&g, block).unwrap();
            let mut cover = vec![0u32; g.num_pixels()];
            for m in &masks {
                for (i, &b) in m.bits().iter().enumerate() {
                    if b {
                        cover[i] += 1;
                    }
                }
            }
            assert!(cover.iter().all(|&c| c == 1));
        }
    }

    #[test]
    fn raster_block_must_divide() {
        let g = grid48();
        assert!(raster_masks(&g, 5).is_err());
        assert!(raster_masks(&g, 0).is_err());
    }

    #[test]
    fn random_masks_fill_and_determinism() {
        let g = grid48();
        let a = random_masks(&g, 16, 0.5, 99).unwrap();
        let b = random_masks(&g, 16, 0.5, 99).unwrap();
        assert_eq!(a, b);
        for m in &a {
            assert_eq!(m.white_count(), 1152);
        }
        let c = random_masks(&g, 16, 0.5, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_masks_prefix_stable() {
        // Counter-based streams: mask i does not depend on how many masks
        // are requested.
        let g = PixelGrid::new(8, 8).unwrap();
        let long = random_masks(&g, 10, 0.25, 5).unwrap();
        let short = random_masks(&g, 3, 0.25, 5).unwrap();
        assert_eq!(&long[..3], &short[..]);
    }

    #[test]
    fn random_masks_fill_one_is_all_white() {
        let g = PixelGrid::new(4, 4).unwrap();
        let masks = random_masks(&g, 2, 1.0, 1).unwrap();
        assert!(masks.iter().all(|m| m.white_count() == 16));
    }

    #[test]
    fn all_equal_records_give_zero_random_reconstruction() {
        let g = PixelGrid::new(4, 4).unwrap();
        let masks = random_masks(&g, 8, 0.5, 3).unwrap();
        let records: Vec<CoincidenceRecord> = (0..8)
            .map(|i| CoincidenceRecord {
                mask_id: i,
                expected_rate: 7.5,
                sampled_count: None,
            })
            .collect();
        let rec = reconstruct_random_mask(&records, &masks).unwrap();
        assert!(rec.raw_values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn random_reconstruction_offset_and_scale_invariant() {
        let g = PixelGrid::new(8, 8).unwrap();
        let masks = random_masks(&g, 32, 0.5, 11).unwrap();
        let base: Vec<CoincidenceRecord> = (0..32)
            .map(|i| CoincidenceRecord {
                mask_id: i,
                expected_rate: (i as f64 * 0.37).sin().abs(),
                sampled_count: None,
            })
            .collect();
        let r0 = reconstruct_random_mask(&base, &masks).unwrap();
        let shifted: Vec<CoincidenceRecord> = base
            .iter()
            .map(|r| CoincidenceRecord {
                expected_rate: r.expected_rate * 3.25 + 10.0,
                ..*r
            })
            .collect();
        let r1 = reconstruct_random_mask(&shifted, &masks).unwrap();
        for (a, b) in r0.raw_values().iter().zip(r1.raw_values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_fill_rejected() {
        let g = PixelGrid::new(4, 4).unwrap();
        let mut masks = random_masks(&g, 2, 0.5, 3).unwrap();
        masks.extend(random_masks(&g, 1, 0.25, 3).unwrap());
        let records: Vec<CoincidenceRecord> = (0..3)
            .map(|i| CoincidenceRecord {
                mask_id: i,
                expected_rate: 1.0,
                sampled_count: None,
            })
            .collect();
        assert!(reconstruct_random_mask(&records, &masks).is_err());
    }

    #[test]
    fn record_length_mismatch_rejected() {
        let g = PixelGrid::new(4, 4).unwrap();
        let masks = raster_masks(&g, 1).unwrap();
        assert!(reconstruct_single_pixel(&[], &masks).is_err());
    }

    #[test]
    fn all_black_mask_rate_is_zero() {
        use crate::state::{project_object, spdc_position_state, SpdcProfile};
        let g = PixelGrid::new(4, 4).unwrap();
        let obj = ObjectMask::from_fn(g.clone(), |_| true);
        let sp = project_object(
            &spdc_position_state(&g, &SpdcProfile::Uniform).unwrap(),
            &obj,
        )
        .unwrap();
        // A mask cannot have zero white pixels by construction; check the
        // operation's definition through an empty-overlap mask instead.
        let masks = raster_masks(&g, 1).unwrap();
        let r = expected_coincidence(&sp, &masks[0], ProjectionMode::Coherent);
        assert!(r > 0.0);
    }

    #[test]
    fn pearson_basics() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [2.0, 4.0, 6.0, 8.0];
        assert!((pearson(&a, &b) - 1.0).abs() < 1e-12);
        let c = [4.0, 3.0, 2.0, 1.0];
        assert!((pearson(&a, &c) + 1.0).abs() < 1e-12);
        assert_eq!(pearson(&a, &[5.0; 4]), 0.0);
    }
}
