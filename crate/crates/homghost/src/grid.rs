//! Discrete transverse pixel plane and the rotation operator acting on it.
//!
//! Everything downstream (states, objects, masks, reconstructions) lives on a
//! [`PixelGrid`]. A Dove-prism pair at relative angle θ rotates the transverse
//! plane by 2θ; that rotation is represented here by [`RotationOp`], which
//! acts exactly on continuous coordinates and by nearest-pixel sampling on the
//! grid. At multiples of π/2 about a symmetric center the nearest-pixel map is
//! an exact permutation of the grid; elsewhere [`permutation_map`] reports
//! (rather than assumes) whether the map is bijective.
//!
//! Conventions, fixed once so golden images are bit-exact: row-major indexing,
//! pixel (0,0) at top-left, y increasing downward. A rotated sample that lands
//! outside the grid reads as 0 (blocked by the aperture).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Integer pixel coordinate. Out-of-grid values are representable; use
/// [`PixelGrid::contains`] to flag them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PixelCoord {
    pub x: i32,
    pub y: i32,
}

impl PixelCoord {
    pub fn new(x: i32, y: i32) -> Self {
        PixelCoord { x, y }
    }
}

/// Discrete transverse plane: width × height pixels plus a continuous
/// rotation origin in pixel units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PixelGrid {
    width: u32,
    height: u32,
    center: (f64, f64),
}

impl PixelGrid {
    /// Grid with the default center `((width-1)/2, (height-1)/2)`, the
    /// geometric center of the pixel lattice.
    pub fn new(width: u32, height: u32) -> Result<Self> {
        let center = (f64::from(width) - 1.0) / 2.0;
        let cy = (f64::from(height) - 1.0) / 2.0;
        Self::with_center(width, height, (center, cy))
    }

    /// Grid with an explicit rotation center (the beam axis need not coincide
    /// with the object).
    pub fn with_center(width: u32, height: u32, center: (f64, f64)) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "grid dimensions must be >= 1, got {width}x{height}"
            )));
        }
        let (cx, cy) = center;
        if !(0.0..=f64::from(width)).contains(&cx) || !(0.0..=f64::from(height)).contains(&cy) {
            return Err(Error::invalid(format!(
                "center ({cx}, {cy}) outside [0,{width}]x[0,{height}]"
            )));
        }
        Ok(PixelGrid {
            width,
            height,
            center,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn center(&self) -> (f64, f64) {
        self.center
    }

    pub fn num_pixels(&self) -> usize {
        self.width as usize * self.height as usize
    }

    pub fn contains(&self, c: PixelCoord) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as u32) < self.width && (c.y as u32) < self.height
    }

    /// Row-major linear index. Caller must ensure `c` is in-grid.
    pub fn index_of(&self, c: PixelCoord) -> usize {
        debug_assert!(self.contains(c));
        c.y as usize * self.width as usize + c.x as usize
    }

    pub fn coord_of(&self, index: usize) -> PixelCoord {
        let w = self.width as usize;
        PixelCoord::new((index % w) as i32, (index / w) as i32)
    }

    /// Row-major iteration over all in-grid pixels.
    pub fn pixels(&self) -> impl Iterator<Item = PixelCoord> + '_ {
        let w = self.width as i32;
        let h = self.height as i32;
        (0..h).flat_map(move |y| (0..w).map(move |x| PixelCoord::new(x, y)))
    }

    /// True when both grids have the same dimensions (centers may differ).
    pub fn same_dims(&self, other: &PixelGrid) -> bool {
        self.width == other.width && self.height == other.height
    }
}

/// Rotation of the transverse plane by `angle` radians about `center`.
/// For a Dove-prism pair at relative angle θ the plane rotation is 2θ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationOp {
    pub angle: f64,
    pub center: (f64, f64),
}

impl RotationOp {
    pub fn new(angle: f64, center: (f64, f64)) -> Self {
        RotationOp { angle, center }
    }

    pub fn about_grid_center(grid: &PixelGrid, angle: f64) -> Self {
        RotationOp {
            angle,
            center: grid.center(),
        }
    }

    pub fn inverse(&self) -> Self {
        RotationOp {
            angle: -self.angle,
            center: self.center,
        }
    }

    /// Exact rotation of a continuous point.
    pub fn rotate(&self, p: (f64, f64)) -> (f64, f64) {
        let (cx, cy) = self.center;
        let (s, c) = self.angle.sin_cos();
        let dx = p.0 - cx;
        let dy = p.1 - cy;
        (cx + dx * c - dy * s, cy + dx * s + dy * c)
    }

    /// Nearest pixel to the rotated image of a pixel. May be out of grid.
    pub fn nearest(&self, p: PixelCoord) -> PixelCoord {
        let (x, y) = self.rotate((f64::from(p.x), f64::from(p.y)));
        PixelCoord::new(x.round() as i32, y.round() as i32)
    }
}

/// Free-function form of [`RotationOp::rotate`].
pub fn rotate_continuous(op: &RotationOp, p: (f64, f64)) -> (f64, f64) {
    op.rotate(p)
}

/// Evaluates a binary pixel function at the rotated position `O(Rr)`, with
/// nearest-pixel sampling. A rotated point outside the grid reads as 0.
pub fn sample_rotated<F>(grid: &PixelGrid, mask: F, op: &RotationOp, r: PixelCoord) -> bool
where
    F: Fn(PixelCoord) -> bool,
{
    let target = op.nearest(r);
    grid.contains(target) && mask(target)
}

/// Nearest-pixel image of every in-grid pixel under a rotation, with a flag
/// recording whether the assignment is a permutation of the in-grid pixels.
#[derive(Clone, Debug)]
pub struct PermutationMap {
    /// Target pixel per source pixel (row-major); `None` when the rotated
    /// point leaves the grid.
    pub targets: Vec<Option<PixelCoord>>,
    /// True iff the assignment is total and injective on in-grid pixels.
    pub bijective: bool,
}

impl PermutationMap {
    pub fn target(&self, grid: &PixelGrid, src: PixelCoord) -> Option<PixelCoord> {
        self.targets[grid.index_of(src)]
    }
}

/// Builds the nearest-pixel assignment for `op` and checks bijectivity by
/// enumeration. Guaranteed bijective for multiples of π/2 about a symmetric
/// center; checked, not assumed, for every angle.
pub fn permutation_map(grid: &PixelGrid, op: &RotationOp) -> PermutationMap {
    let mut targets = Vec::with_capacity(grid.num_pixels());
    let mut hit = vec![false; grid.num_pixels()];
    let mut bijective = true;
    for src in grid.pixels() {
        let t = op.nearest(src);
        if grid.contains(t) {
            let idx = grid.index_of(t);
            if hit[idx] {
                bijective = false; // collision
            }
            hit[idx] = true;
            targets.push(Some(t));
        } else {
            bijective = false;
            targets.push(None);
        }
    }
    PermutationMap { targets, bijective }
}

/// Grid-indexed real-valued image, values conventionally in [0,1].
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    grid: PixelGrid,
    values: Vec<f64>,
}

impl Image {
    pub fn new(grid: PixelGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_pixels() {
            return Err(Error::invalid(format!(
                "image has {} values for a {}x{} grid",
                values.len(),
                grid.width(),
                grid.height()
            )));
        }
        Ok(Image { grid, values })
    }

    pub fn zeros(grid: PixelGrid) -> Self {
        let n = grid.num_pixels();
        Image {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &PixelGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, c: PixelCoord) -> f64 {
        self.values[self.grid.index_of(c)]
    }

    /// Scales so the maximum value is 1; an all-zero image stays all-zero.
    pub fn max_normalized(&self) -> Image {
        let max = self.values.iter().cloned().fold(0.0_f64, f64::max);
        if max <= 0.0 {
            return self.clone();
        }
        Image {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v / max).collect(),
        }
    }

    /// 8-bit view with values clamped to [0,1] and scaled to 0-255.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.values
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect()
    }

    pub fn write_pgm(&self, path: &std::path::Path) -> Result<()> {
        crate::pgm::write_pgm(path, self.grid.width(), self.grid.height(), &self.to_bytes())
    }
}
