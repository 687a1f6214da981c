//! Batch orchestration: each entry point takes a resolved config, runs one
//! pipeline sweep, and writes PGM/CSV outputs plus a JSON sidecar carrying the
//! full config so the run can be replayed from its artifacts.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::json;

use crate::config::{ExperimentConfig, Pipeline, ScanConfig, SpiralConfig};
use crate::detect::sample_count;
use crate::error::{Error, Result};
use crate::grid::PixelGrid;
use crate::imaging::{
    CoincidenceRecord, MeasureMask, ObjectMask, ReconstructedImage,
    expected_coincidence, reconstruct_random_mask, reconstruct_single_pixel, write_records_csv,
};
use crate::oam::{SpiralSpectrum, spiral_bandwidth_map};
use crate::state::{
    BiphotonState, SinglePhotonState, intensity_image, project_object, spdc_position_state,
};

/// Port-B state after the configured optical chain, with the coincidence
/// probability mass the post-selection kept (1 when there is no post-selection).
pub struct PipelineResult {
    pub single_photon: SinglePhotonState,
    pub retained: f64,
}

pub fn pipeline_single_photon(
    cfg: &ExperimentConfig,
    grid: &PixelGrid,
    obj: &ObjectMask,
) -> Result<PipelineResult> {
    let rotated = rotated_source(cfg, grid)?;
    let (state, retained) = match cfg.pipeline {
        Pipeline::NoBs => (Some(rotated), 1.0),
        Pipeline::Hom => postselect_through_bs(cfg, rotated)?,
        Pipeline::BsDelayed => postselect_through_bs(cfg, rotated.apply_path_delay())?,
    };
    let single_photon = match state {
        Some(s) => project_object(&s, obj)?,
        // HOM null: nothing survives post-selection, so the remote arm sees
        // a dark field rather than an error.
        None => SinglePhotonState::zero(grid.clone()),
    };
    Ok(PipelineResult {
        single_photon,
        retained,
    })
}

fn rotated_source(cfg: &ExperimentConfig, grid: &PixelGrid) -> Result<BiphotonState> {
    Ok(spdc_position_state(grid, &cfg.profile)?.apply_dove_rotation(cfg.theta))
}

fn postselect_through_bs(
    cfg: &ExperimentConfig,
    state: BiphotonState,
) -> Result<(Option<BiphotonState>, f64)> {
    let (t, r) = cfg.beamsplitter.amplitudes();
    let ps = state.apply_beamsplitter(t, r)?.postselect_coincidences();
    Ok((ps.state, ps.retained_probability))
}

/// Expected coincidence probability per mask, in mask order. For the `hom`
/// pipeline with visibility V < 1, mixes in the delayed (distinguishable)
/// rates: p = V·p_matched + (1−V)·p_delayed.
pub fn mask_probabilities(
    cfg: &ExperimentConfig,
    grid: &PixelGrid,
    obj: &ObjectMask,
    masks: &[MeasureMask],
) -> Result<Vec<f64>> {
    let matched = pipeline_single_photon(cfg, grid, obj)?;
    let v = cfg.detection.visibility;
    let mixed = if cfg.pipeline == Pipeline::Hom && v < 1.0 {
        let delayed_cfg = ExperimentConfig {
            pipeline: Pipeline::BsDelayed,
            ..cfg.clone()
        };
        Some(pipeline_single_photon(&delayed_cfg, grid, obj)?)
    } else {
        None
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let prob_of = |sp: &PipelineResult, m: &MeasureMask| {
        expected_coincidence(&sp.single_photon, m, cfg.projection) * sp.retained
    };
    // par_iter + ordered collect: the reduction is a plain indexed map, so the
    // result is independent of worker count.
    Ok(pool.install(|| {
        masks
            .par_iter()
            .map(|m| match &mixed {
                Some(d) => v * prob_of(&matched, m) + (1.0 - v) * prob_of(d, m),
                None => prob_of(&matched, m),
            })
            .collect()
    }))
}

pub fn records_from_probabilities(cfg: &ExperimentConfig, probs: &[f64]) -> Vec<CoincidenceRecord> {
    probs
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let expected_rate = p * cfg.detection.pair_rate * cfg.detection.integration;
            let sampled_count = cfg
                .detection
                .poisson
                .then(|| sample_count(p, &cfg.detection, i as u64));
            CoincidenceRecord {
                mask_id: i,
                expected_rate,
                sampled_count,
            }
        })
        .collect()
}

pub fn reconstruct(
    scan: &ScanConfig,
    records: &[CoincidenceRecord],
    masks: &[MeasureMask],
) -> Result<ReconstructedImage> {
    match scan {
        ScanConfig::Raster { .. } => reconstruct_single_pixel(records, masks),
        ScanConfig::Random { .. } => reconstruct_random_mask(records, masks),
    }
}

pub struct GhostOutputs {
    pub reconstruction: ReconstructedImage,
    pub records: Vec<CoincidenceRecord>,
    pub image_path: PathBuf,
    pub records_path: PathBuf,
    pub sidecar_path: PathBuf,
}

pub fn run_ghost(cfg: &ExperimentConfig) -> Result<GhostOutputs> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let obj = cfg.object.load(&grid)?;
    let masks = cfg.scan.masks(&grid)?;
    let probs = mask_probabilities(cfg, &grid, &obj, &masks)?;
    let records = records_from_probabilities(cfg, &probs);
    let reconstruction = reconstruct(&cfg.scan, &records, &masks)?;

    std::fs::create_dir_all(&cfg.output_dir)?;
    let stem = cfg.file_stem();
    let image_path = cfg.output_dir.join(format!("{stem}.pgm"));
    let records_path = cfg.output_dir.join(format!("{stem}.csv"));
    let sidecar_path = cfg.output_dir.join(format!("{stem}.json"));
    reconstruction.clamped().write_pgm(&image_path)?;
    write_records_csv(&records_path, &records)?;
    write_sidecar(
        &sidecar_path,
        json!({
            "schema": "homghost/ghost-run/1",
            "config": cfg,
            "numMasks": masks.len(),
            "normalization": { "n": reconstruction.norm, "cbar": reconstruction.cbar },
            "outputs": {
                "image": image_path,
                "records": records_path,
            },
        }),
    )?;
    Ok(GhostOutputs {
        reconstruction,
        records,
        image_path,
        records_path,
        sidecar_path,
    })
}

pub fn run_spiral(cfg: &SpiralConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let spec = SpiralSpectrum::lorentzian(cfg.lmax, cfg.width)?;
    let mut map = spiral_bandwidth_map(&spec, cfg.theta, cfg.filter)?;
    if cfg.normalize && map.max_rate() > 0.0 {
        map = map.normalized_to_max();
    }
    std::fs::create_dir_all(&cfg.output_dir)?;
    let stem = format!(
        "spiral_{}_{}mrad_l{}",
        if cfg.filter { "filtered" } else { "unfiltered" },
        (cfg.theta * 1000.0).round() as i64,
        cfg.lmax
    );
    let csv = cfg.output_dir.join(format!("{stem}.csv"));
    let pgm = cfg.output_dir.join(format!("{stem}.pgm"));
    let sidecar = cfg.output_dir.join(format!("{stem}.json"));
    map.write_csv(&csv)?;
    map.write_pgm(&pgm)?;
    write_sidecar(
        &sidecar,
        json!({
            "schema": "homghost/spiral-run/1",
            "config": cfg,
            "outputs": { "table": csv, "heatmap": pgm },
        }),
    )?;
    Ok(vec![csv, pgm, sidecar])
}

/// Five-panel summary: (a) the object, then noiseless intensity images for
/// (b) θ=0 no-BS, (c) θ no-BS, (d) θ HOM, (e) θ delayed-path BS.
pub fn run_summary(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let grid = cfg.grid()?;
    let obj = cfg.object.load(&grid)?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let mrad = (cfg.theta * 1000.0).round() as i64;
    let prefix = format!("summary_{mrad}mrad");

    let mut paths = Vec::new();
    let a = cfg.output_dir.join(format!("{prefix}_a_object.pgm"));
    obj.to_pgm(&a)?;
    paths.push(a);

    let panels: [(&str, Pipeline, f64); 4] = [
        ("b_identity", Pipeline::NoBs, 0.0),
        ("c_rotated", Pipeline::NoBs, cfg.theta),
        ("d_hom", Pipeline::Hom, cfg.theta),
        ("e_delayed", Pipeline::BsDelayed, cfg.theta),
    ];
    for (tag, pipeline, theta) in panels {
        let panel_cfg = ExperimentConfig {
            pipeline,
            theta,
            ..cfg.clone()
        };
        let result = pipeline_single_photon(&panel_cfg, &grid, &obj)?;
        let path = cfg.output_dir.join(format!("{prefix}_{tag}.pgm"));
        intensity_image(&result.single_photon).write_pgm(&path)?;
        paths.push(path);
    }

    let sidecar = cfg.output_dir.join(format!("{prefix}.json"));
    write_sidecar(
        &sidecar,
        json!({
            "schema": "homghost/summary-run/1",
            "config": cfg,
            "outputs": paths,
        }),
    )?;
    paths.push(sidecar);
    Ok(paths)
}

/// Frame j = reconstruction from the first j·k masks of a random scan.
pub fn run_animation(cfg: &ExperimentConfig, stride: usize) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    let ScanConfig::Random { n, .. } = cfg.scan else {
        return Err(Error::invalid("animation requires a random-mask scan"));
    };
    if stride == 0 || stride > n {
        return Err(Error::invalid(format!(
            "frame stride must be in 1..={n}, got {stride}"
        )));
    }
    let grid = cfg.grid()?;
    let obj = cfg.object.load(&grid)?;
    let masks = cfg.scan.masks(&grid)?;
    let probs = mask_probabilities(cfg, &grid, &obj, &masks)?;
    let records = records_from_probabilities(cfg, &probs);

    std::fs::create_dir_all(&cfg.output_dir)?;
    let stem = cfg.file_stem();
    let frames = n / stride;
    let mut paths = Vec::with_capacity(frames + 1);
    for j in 1..=frames {
        let upto = j * stride;
        let recon = reconstruct_random_mask(&records[..upto], &masks[..upto])?;
        let path = cfg
            .output_dir
            .join(format!("{stem}_frame{j:04}_{upto}masks.pgm"));
        recon.clamped().write_pgm(&path)?;
        paths.push(path);
    }
    let sidecar = cfg.output_dir.join(format!("{stem}_frames.json"));
    write_sidecar(
        &sidecar,
        json!({
            "schema": "homghost/animation-run/1",
            "config": cfg,
            "stride": stride,
            "frames": paths,
        }),
    )?;
    paths.push(sidecar);
    Ok(paths)
}

fn write_sidecar(path: &Path, value: serde_json::Value) -> Result<()> {
    let file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), &value)?;
    Ok(())
}
