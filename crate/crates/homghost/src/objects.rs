//! Procedurally generated binary test objects, available at any resolution.
//! The shapes sit in the upper part of the frame, displaced from the grid
//! center, so the ±2θ-rotated copies produced by the HOM filter land in
//! separate regions of the image. `pi-symmetric-bar` is built to be exactly
//! invariant under a π rotation about the default grid center at the pixel
//! level.

use crate::error::{Error, Result};
use crate::grid::{PixelCoord, PixelGrid};
use crate::imaging::ObjectMask;

pub const BUILTIN_NAMES: [&str; 3] = ["lambda", "arrow", "pi-symmetric-bar"];

pub fn builtin_object(name: &str, grid: &PixelGrid) -> Result<ObjectMask> {
    match name {
        "lambda" => Ok(ObjectMask::from_fn(grid.clone(), |c| {
            lambda_shape(norm(grid, c))
        })),
        "arrow" => Ok(ObjectMask::from_fn(grid.clone(), |c| {
            arrow_shape(norm(grid, c))
        })),
        "pi-symmetric-bar" => {
            let w = grid.width() as i32;
            let h = grid.height() as i32;
            // Evaluate the half-shape at the pixel and at its exact π-rotated
            // partner so the mask is bit-invariant under the pixel rotation
            // (x, y) -> (w-1-x, h-1-y).
            Ok(ObjectMask::from_fn(grid.clone(), |c| {
                bar_half(norm(grid, c))
                    || bar_half(norm(grid, PixelCoord::new(w - 1 - c.x, h - 1 - c.y)))
            }))
        }
        other => Err(Error::invalid(format!(
            "unknown built-in object {other:?}; available: {BUILTIN_NAMES:?}"
        ))),
    }
}

/// Pixel center in unit coordinates: u right, v down, both in (0,1).
fn norm(grid: &PixelGrid, c: PixelCoord) -> (f64, f64) {
    (
        (f64::from(c.x) + 0.5) / f64::from(grid.width()),
        (f64::from(c.y) + 0.5) / f64::from(grid.height()),
    )
}

fn dist_to_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (px, py) = (p.0 - a.0, p.1 - a.1);
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        ((px * dx + py * dy) / len2).clamp(0.0, 1.0)
    };
    let (ex, ey) = (px - t * dx, py - t * dy);
    (ex * ex + ey * ey).sqrt()
}

/// Λ: two strokes meeting at an apex, upper-middle of the frame.
fn lambda_shape(p: (f64, f64)) -> bool {
    let apex = (0.5, 0.08);
    let left = (0.33, 0.42);
    let right = (0.67, 0.42);
    let t = 0.035;
    dist_to_segment(p, apex, left) <= t || dist_to_segment(p, apex, right) <= t
}

/// Upward arrow: shaft plus a filled triangular head, upper-middle.
fn arrow_shape(p: (f64, f64)) -> bool {
    let shaft = dist_to_segment(p, (0.5, 0.20), (0.5, 0.42)) <= 0.030;
    // Head: apex (0.5, 0.06), base corners (0.40, 0.22) and (0.60, 0.22).
    let head = in_triangle(p, (0.5, 0.06), (0.40, 0.22), (0.60, 0.22));
    shaft || head
}

fn in_triangle(p: (f64, f64), a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> bool {
    let sign = |p: (f64, f64), q: (f64, f64), r: (f64, f64)| {
        (p.0 - r.0) * (q.1 - r.1) - (q.0 - r.0) * (p.1 - r.1)
    };
    let d1 = sign(p, a, b);
    let d2 = sign(p, b, c);
    let d3 = sign(p, c, a);
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(has_neg && has_pos)
}

/// Top half of the π-symmetric object: one horizontal bar.
fn bar_half(p: (f64, f64)) -> bool {
    (0.30..=0.70).contains(&p.0) && (0.14..=0.24).contains(&p.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::RotationOp;
    use std::f64::consts::PI;

    #[test]
    fn builtins_have_white_pixels() {
        let g = PixelGrid::new(48, 48).unwrap();
        for name in BUILTIN_NAMES {
            let obj = builtin_object(name, &g).unwrap();
            assert!(obj.white_count() > 0, "{name} is empty");
            assert!(obj.white_count() < g.num_pixels(), "{name} is all white");
        }
    }

    #[test]
    fn unknown_name_rejected() {
        let g = PixelGrid::new(8, 8).unwrap();
        assert!(builtin_object("pacman", &g).is_err());
    }

    #[test]
    fn pi_symmetric_bar_is_exactly_pi_invariant() {
        let g = PixelGrid::new(48, 48).unwrap();
        let obj = builtin_object("pi-symmetric-bar", &g).unwrap();
        let op = RotationOp::about_grid_center(&g, PI);
        for r in g.pixels() {
            assert_eq!(obj.sample_rotated(&op, r), obj.get(r), "at {r:?}");
        }
    }

    #[test]
    fn displaced_objects_have_disjoint_rotated_copies() {
        // The ±π/2 copies must not overlap, the geometry the double-image
        // experiments rely on.
        let g = PixelGrid::new(48, 48).unwrap();
        for name in ["lambda", "arrow"] {
            let obj = builtin_object(name, &g).unwrap();
            let fwd = RotationOp::about_grid_center(&g, PI / 2.0);
            let bwd = fwd.inverse();
            for r in g.pixels() {
                assert!(
                    !(obj.sample_rotated(&fwd, r) && obj.sample_rotated(&bwd, r)),
                    "{name}: copies overlap at {r:?}"
                );
            }
        }
    }

    #[test]
    fn resolution_independent() {
        for size in [48u32, 96, 960] {
            let g = PixelGrid::new(size, size).unwrap();
            let obj = builtin_object("lambda", &g).unwrap();
            let frac = obj.white_count() as f64 / g.num_pixels() as f64;
            assert!(frac > 0.005 && frac < 0.2, "size {size}: fill {frac}");
        }
    }
}
