//! Two-photon state engineering in the discrete position basis.
//!
//! The pipeline mirrors the optical table: SPDC creates the diagonal state
//! Σ_r c(r)|r⟩_A|r⟩_B, the Dove-prism pair rotates photon A's transverse
//! position by 2θ, a beamsplitter mixes the ports, and coincidence
//! post-selection keeps the anti-symmetric component (the HOM filter). A
//! closed-form constructor for the post-selected state is provided as an
//! independent route for cross-checking the beamsplitter algebra.
//!
//! States are tables from unordered mode pairs to complex amplitudes. A mode
//! is (port, pixel, time-bin); the time-bin is a binary distinguishability
//! tag used to model a path-length mismatch larger than the coherence length.
//! Bunched pairs (both photons in one port) are kept in the table until
//! post-selection so the retained coincidence probability is physical; a
//! double-occupied mode pair stores the amplitude of the *normalized*
//! two-photon ket, which keeps every transformation unitary.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Image, PixelCoord, PixelGrid, RotationOp};

const PRUNE_EPS: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Port {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TimeBin {
    Prompt,
    Delayed,
}

/// Single-photon basis mode: output port, transverse pixel, time-bin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub port: Port,
    pub pixel: PixelCoord,
    pub timebin: TimeBin,
}

impl Mode {
    pub fn prompt(port: Port, pixel: PixelCoord) -> Self {
        Mode {
            port,
            pixel,
            timebin: TimeBin::Prompt,
        }
    }
}

/// Unordered pair of modes; the constructor sorts so each two-photon term is
/// stored exactly once (bosonic exchange symmetry).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModePair(Mode, Mode);

impl ModePair {
    pub fn new(a: Mode, b: Mode) -> Self {
        if a <= b {
            ModePair(a, b)
        } else {
            ModePair(b, a)
        }
    }

    pub fn first(&self) -> Mode {
        self.0
    }

    pub fn second(&self) -> Mode {
        self.1
    }

    /// `Some((mode_in_a, mode_in_b))` when the pair has one photon per port.
    pub fn coincidence(&self) -> Option<(Mode, Mode)> {
        match (self.0.port, self.1.port) {
            (Port::A, Port::B) => Some((self.0, self.1)),
            (Port::B, Port::A) => Some((self.1, self.0)),
            _ => None,
        }
    }

    fn is_bunched_double(&self) -> bool {
        self.0 == self.1
    }
}

/// Crystal-plane amplitude profile c(r).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpdcProfile {
    Uniform,
    /// c(r) ∝ exp(−|r−center|²/waist²), waist in pixels.
    Gaussian { waist: f64 },
}

impl SpdcProfile {
    pub fn validate(&self) -> Result<()> {
        if let SpdcProfile::Gaussian { waist } = self {
            if !(*waist > 0.0) {
                return Err(Error::invalid(format!("waist must be > 0, got {waist}")));
            }
        }
        Ok(())
    }

    /// Unnormalized weight at a pixel, relative to the grid center.
    pub fn weight(&self, grid: &PixelGrid, r: PixelCoord) -> f64 {
        match self {
            SpdcProfile::Uniform => 1.0,
            SpdcProfile::Gaussian { waist } => {
                let (cx, cy) = grid.center();
                let d2 = (f64::from(r.x) - cx).powi(2) + (f64::from(r.y) - cy).powi(2);
                (-d2 / (waist * waist)).exp()
            }
        }
    }

    /// Normalized c(r) over the whole grid, row-major.
    pub fn weights(&self, grid: &PixelGrid) -> Vec<Complex64> {
        let raw: Vec<f64> = grid.pixels().map(|r| self.weight(grid, r)).collect();
        let norm = raw.iter().map(|w| w * w).sum::<f64>().sqrt();
        raw.iter()
            .map(|w| Complex64::new(w / norm, 0.0))
            .collect()
    }
}

/// Two-photon amplitude table over unordered (port, pixel, time-bin) pairs.
#[derive(Clone, Debug)]
pub struct BiphotonState {
    grid: PixelGrid,
    terms: BTreeMap<ModePair, Complex64>,
}

/// Result of coincidence post-selection: the surviving normalized state (if
/// any) plus the pre-normalization probability mass it carried.
#[derive(Clone, Debug)]
pub struct PostSelected {
    pub state: Option<BiphotonState>,
    pub retained_probability: f64,
}

impl BiphotonState {
    pub fn from_terms(grid: PixelGrid, terms: BTreeMap<ModePair, Complex64>) -> Self {
        let mut s = BiphotonState { grid, terms };
        s.prune();
        s
    }

    pub fn grid(&self) -> &PixelGrid {
        &self.grid
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ModePair, &Complex64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn amplitude(&self, a: Mode, b: Mode) -> Complex64 {
        self.terms
            .get(&ModePair::new(a, b))
            .copied()
            .unwrap_or_default()
    }

    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_EPS);
    }

    fn normalize(&mut self) {
        let n = self.norm_sq().sqrt();
        if n > 0.0 {
            for a in self.terms.values_mut() {
                *a /= n;
            }
        }
        self.prune();
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Rotates every port-A pixel by R(2θ) about the grid center (the Dove
    /// prisms sit in path A). Terms whose rotated pixel leaves the grid are
    /// dropped and the state renormalized (aperture loss).
    pub fn apply_dove_rotation(&self, theta: f64) -> BiphotonState {
        self.apply_dove_rotation_about(theta, self.grid.center())
    }

    pub fn apply_dove_rotation_about(&self, theta: f64, center: (f64, f64)) -> BiphotonState {
        let rot = RotationOp::new(2.0 * theta, center);
        let mut terms: BTreeMap<ModePair, Complex64> = BTreeMap::new();
        'term: for (pair, amp) in &self.terms {
            let mut modes = [pair.first(), pair.second()];
            for m in modes.iter_mut() {
                if m.port == Port::A {
                    let p = rot.nearest(m.pixel);
                    if !self.grid.contains(p) {
                        continue 'term;
                    }
                    m.pixel = p;
                }
            }
            *terms
                .entry(ModePair::new(modes[0], modes[1]))
                .or_default() += amp;
        }
        let mut out = BiphotonState::from_terms(self.grid.clone(), terms);
        out.normalize();
        out
    }

    /// Tags every port-B mode as delayed (path B lengthened past the
    /// coherence length). Applied before the beamsplitter; the distinct
    /// time-bins then prevent HOM cancellation.
    pub fn apply_path_delay(&self) -> BiphotonState {
        let mut terms = BTreeMap::new();
        for (pair, amp) in &self.terms {
            let mut modes = [pair.first(), pair.second()];
            for m in modes.iter_mut() {
                if m.port == Port::B {
                    m.timebin = TimeBin::Delayed;
                }
            }
            *terms
                .entry(ModePair::new(modes[0], modes[1]))
                .or_default() += amp;
        }
        BiphotonState::from_terms(self.grid.clone(), terms)
    }

    /// Beamsplitter with amplitude transmission/reflection (t, r):
    /// |r⟩_A → t|r⟩_A + r|r⟩_B and |r⟩_B → t|r⟩_B − r|r⟩_A, pixel and
    /// time-bin carried through. The 50:50 case is t = r = 1/√2.
    pub fn apply_beamsplitter(&self, t_amp: f64, r_amp: f64) -> Result<BiphotonState> {
        if (t_amp * t_amp + r_amp * r_amp - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "non-unitary beamsplitter: t^2 + r^2 = {}",
                t_amp * t_amp + r_amp * r_amp
            )));
        }
        let split = |m: Mode| -> [(Mode, f64); 2] {
            let other = |p: Port| Mode {
                port: p,
                pixel: m.pixel,
                timebin: m.timebin,
            };
            match m.port {
                Port::A => [(m, t_amp), (other(Port::B), r_amp)],
                Port::B => [(m, t_amp), (other(Port::A), -r_amp)],
            }
        };
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut terms: BTreeMap<ModePair, Complex64> = BTreeMap::new();
        for (pair, amp) in &self.terms {
            if pair.is_bunched_double() {
                // amp multiplies the normalized ket |2_m⟩ = a†(m)²|0⟩ / √2.
                let m = pair.first();
                for (n1, w1) in split(m) {
                    for (n2, w2) in split(m) {
                        let key = ModePair::new(n1, n2);
                        // Each unordered {n1≠n2} pair is visited twice here,
                        // supplying the factor 2/√2 = √2 of a†a† → distinct
                        // modes; the diagonal picks up √2·(1/√2) = 1.
                        let w = if n1 == n2 {
                            w1 * w2 / sqrt2 * sqrt2
                        } else {
                            w1 * w2 / sqrt2
                        };
                        *terms.entry(key).or_default() += amp * w;
                    }
                }
            } else {
                let (ma, mb) = (pair.first(), pair.second());
                for (n1, w1) in split(ma) {
                    for (n2, w2) in split(mb) {
                        let key = ModePair::new(n1, n2);
                        let w = if n1 == n2 { w1 * w2 * sqrt2 } else { w1 * w2 };
                        *terms.entry(key).or_default() += amp * w;
                    }
                }
            }
        }
        let mut out = BiphotonState::from_terms(self.grid.clone(), terms);
        // A unitary mixing preserves the norm; normalize anyway to absorb
        // rounding in long chains.
        out.normalize();
        Ok(out)
    }

    /// Keeps only terms with exactly one photon per output port, reporting
    /// the probability mass they carried before renormalization.
    pub fn postselect_coincidences(&self) -> PostSelected {
        let mut terms = BTreeMap::new();
        let mut retained = 0.0;
        for (pair, amp) in &self.terms {
            if pair.coincidence().is_some() {
                retained += amp.norm_sqr();
                terms.insert(*pair, *amp);
            }
        }
        if terms.is_empty() {
            return PostSelected {
                state: None,
                retained_probability: 0.0,
            };
        }
        let mut state = BiphotonState::from_terms(self.grid.clone(), terms);
        state.normalize();
        PostSelected {
            state: Some(state),
            retained_probability: retained,
        }
    }

    /// Debug/regression snapshot; versioned, not a public wire contract.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct TermDoc {
            mode_a: Mode,
            mode_b: Mode,
            re: f64,
            im: f64,
        }
        #[derive(Serialize)]
        struct StateDoc {
            version: u32,
            width: u32,
            height: u32,
            center: (f64, f64),
            terms: Vec<TermDoc>,
        }
        let doc = StateDoc {
            version: 1,
            width: self.grid.width(),
            height: self.grid.height(),
            center: self.grid.center(),
            terms: self
                .terms
                .iter()
                .map(|(p, a)| TermDoc {
                    mode_a: p.first(),
                    mode_b: p.second(),
                    re: a.re,
                    im: a.im,
                })
                .collect(),
        };
        serde_json::to_value(doc).expect("state serialization")
    }
}

/// SPDC state at the crystal plane: Σ_r c(r)|r⟩_A|r⟩_B, normalized. Both
/// photons share a pixel because they originate at the same crystal point.
pub fn spdc_position_state(grid: &PixelGrid, profile: &SpdcProfile) -> Result<BiphotonState> {
    profile.validate()?;
    diagonal_state(grid, &profile.weights(grid))
}

/// Diagonal two-photon state with arbitrary complex pixel weights
/// (row-major, one per pixel). Weights are normalized; zeros are skipped.
pub fn diagonal_state(grid: &PixelGrid, weights: &[Complex64]) -> Result<BiphotonState> {
    if weights.len() != grid.num_pixels() {
        return Err(Error::invalid(format!(
            "{} weights for a {}x{} grid",
            weights.len(),
            grid.width(),
            grid.height()
        )));
    }
    let norm = weights.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::empty("all-zero crystal profile"));
    }
    let mut terms = BTreeMap::new();
    for (idx, c) in weights.iter().enumerate() {
        if c.norm() < PRUNE_EPS {
            continue;
        }
        let r = grid.coord_of(idx);
        let pair = ModePair::new(Mode::prompt(Port::A, r), Mode::prompt(Port::B, r));
        terms.insert(pair, c / norm);
    }
    Ok(BiphotonState::from_terms(grid.clone(), terms))
}

/// Closed form of the HOM-filtered state, Σ_r c(r)|r⟩_A(|R⁻¹r⟩_B − |Rr⟩_B)
/// up to normalization, built directly from the nearest-pixel rotation map
/// without expanding the beamsplitter. `None` when everything cancels (θ=0).
///
/// The construction re-indexes the first post-selected term through the same
/// pixel map σ = nearest(R·) the Dove rotation uses, so it agrees with the
/// full pipeline even at angles where σ is not a true permutation.
pub fn hom_state_closed_form(
    grid: &PixelGrid,
    profile: &SpdcProfile,
    theta: f64,
) -> Result<Option<BiphotonState>> {
    profile.validate()?;
    hom_closed_form_from_weights(grid, &profile.weights(grid), theta, grid.center())
}

pub fn hom_closed_form_from_weights(
    grid: &PixelGrid,
    weights: &[Complex64],
    theta: f64,
    center: (f64, f64),
) -> Result<Option<BiphotonState>> {
    if weights.len() != grid.num_pixels() {
        return Err(Error::invalid("weight/grid size mismatch".to_string()));
    }
    let norm = weights.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::empty("all-zero crystal profile"));
    }
    let rot = RotationOp::new(2.0 * theta, center);
    let mut terms: BTreeMap<ModePair, Complex64> = BTreeMap::new();
    for (idx, c) in weights.iter().enumerate() {
        if c.norm() < PRUNE_EPS {
            continue;
        }
        let u = grid.coord_of(idx);
        let t = rot.nearest(u);
        if !grid.contains(t) {
            continue; // the rotated photon left the aperture
        }
        let amp = c / norm;
        // + c(u)|σ(u)⟩_A|u⟩_B  (first term of Eq-style post-selected state,
        //   regrouped per A-pixel: equivalently |r⟩_A|σ⁻¹r⟩_B)
        *terms
            .entry(ModePair::new(
                Mode::prompt(Port::A, t),
                Mode::prompt(Port::B, u),
            ))
            .or_default() += amp;
        // − c(u)|u⟩_A|σ(u)⟩_B
        *terms
            .entry(ModePair::new(
                Mode::prompt(Port::A, u),
                Mode::prompt(Port::B, t),
            ))
            .or_default() -= amp;
    }
    let mut state = BiphotonState::from_terms(grid.clone(), terms);
    state.normalize();
    if state.is_empty() {
        Ok(None)
    } else {
        Ok(Some(state))
    }
}

/// Port-B single-photon amplitudes after projecting the object onto port A.
/// Amplitudes are grouped by the (A, B) time-bin pair: kets in different
/// time-bins are orthogonal, so coherence only holds within a group.
#[derive(Clone, Debug)]
pub struct SinglePhotonState {
    grid: PixelGrid,
    branches: BTreeMap<(TimeBin, TimeBin), Vec<Complex64>>,
}

impl SinglePhotonState {
    pub fn zero(grid: PixelGrid) -> Self {
        SinglePhotonState {
            grid,
            branches: BTreeMap::new(),
        }
    }

    pub fn grid(&self) -> &PixelGrid {
        &self.grid
    }

    pub fn branches(&self) -> impl Iterator<Item = (&(TimeBin, TimeBin), &Vec<Complex64>)> {
        self.branches.iter()
    }

    pub fn norm_sq(&self) -> f64 {
        self.branches
            .values()
            .flat_map(|v| v.iter())
            .map(|a| a.norm_sqr())
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.norm_sq() < PRUNE_EPS * PRUNE_EPS
    }

    /// Raw per-pixel intensity, incoherent across time-bin branches.
    pub fn intensity(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.num_pixels()];
        for amps in self.branches.values() {
            for (i, a) in amps.iter().enumerate() {
                out[i] += a.norm_sqr();
            }
        }
        out
    }
}

/// Projects a binary object onto port A: ⟨O|_A = Σ_r O(r)⟨r|_A (the
/// normalization constant is left to the caller's rate scaling). Requires a
/// state with one photon per port; bunched pairs are rejected.
pub fn project_object(
    state: &BiphotonState,
    obj: &crate::imaging::ObjectMask,
) -> Result<SinglePhotonState> {
    if !state.grid().same_dims(obj.grid()) {
        return Err(Error::invalid("object grid does not match state grid"));
    }
    if obj.white_count() == 0 {
        return Err(Error::empty("object mask is all black"));
    }
    let grid = state.grid().clone();
    let n = grid.num_pixels();
    let mut branches: BTreeMap<(TimeBin, TimeBin), Vec<Complex64>> = BTreeMap::new();
    for (pair, amp) in state.terms() {
        let (ma, mb) = pair.coincidence().ok_or_else(|| {
            Error::invalid("project_object requires one photon per port; post-select first")
        })?;
        if !obj.get(ma.pixel) {
            continue;
        }
        let branch = branches
            .entry((ma.timebin, mb.timebin))
            .or_insert_with(|| vec![Complex64::default(); n]);
        branch[grid.index_of(mb.pixel)] += amp;
    }
    Ok(SinglePhotonState { grid, branches })
}

/// Per-pixel |amplitude|², max-normalized to [0,1]; a zero state yields an
/// all-zero image.
pub fn intensity_image(sp: &SinglePhotonState) -> Image {
    let raw = Image::new(sp.grid.clone(), sp.intensity()).expect("intensity size");
    raw.max_normalized()
}

/// Largest per-amplitude difference between two states after aligning the
/// global phase on `a`'s largest term. Returns infinity when the supports
/// are incompatible.
pub fn phase_aligned_max_diff(a: &BiphotonState, b: &BiphotonState) -> f64 {
    let Some((key, amp)) = a
        .terms()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .map(|(k, v)| (*k, *v))
    else {
        return if b.is_empty() { 0.0 } else { f64::INFINITY };
    };
    let other = b.amplitude(key.first(), key.second());
    if other.norm() < PRUNE_EPS {
        return f64::INFINITY;
    }
    let phase = (other / amp) / (other / amp).norm();
    let keys: std::collections::BTreeSet<ModePair> = a
        .terms()
        .map(|(k, _)| *k)
        .chain(b.terms().map(|(k, _)| *k))
        .collect();
    keys.into_iter()
        .map(|k| {
            let va = a.amplitude(k.first(), k.second()) * phase;
            let vb = b.amplitude(k.first(), k.second());
            (va - vb).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::ObjectMask;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};

    fn uniform(grid: &PixelGrid) -> BiphotonState {
        spdc_position_state(grid, &SpdcProfile::Uniform).unwrap()
    }

    #[test]
    fn spdc_two_pixel_amplitudes() {
        let g = PixelGrid::new(2, 1).unwrap();
        let s = uniform(&g);
        assert_eq!(s.num_terms(), 2);
        for (_, amp) in s.terms() {
            assert!((amp.norm() - FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn spdc_terms_are_diagonal() {
        let g = PixelGrid::new(5, 3).unwrap();
        for profile in [SpdcProfile::Uniform, SpdcProfile::Gaussian { waist: 2.0 }] {
            let s = spdc_position_state(&g, &profile).unwrap();
            assert!((s.norm_sq() - 1.0).abs() < 1e-10);
            for (pair, _) in s.terms() {
                let (ma, mb) = pair.coincidence().unwrap();
                assert_eq!(ma.pixel, mb.pixel);
            }
        }
    }

    #[test]
    fn gaussian_profile_weights_peak_at_center() {
        let g = PixelGrid::new(48, 48).unwrap();
        let s = spdc_position_state(&g, &SpdcProfile::Gaussian { waist: 24.0 }).unwrap();
        let center_pix = PixelCoord::new(24, 24);
        let edge_pix = PixelCoord::new(0, 0);
        let a_c = s.amplitude(
            Mode::prompt(Port::A, center_pix),
            Mode::prompt(Port::B, center_pix),
        );
        let a_e = s.amplitude(
            Mode::prompt(Port::A, edge_pix),
            Mode::prompt(Port::B, edge_pix),
        );
        assert!(a_c.norm() > a_e.norm());
    }

    #[test]
    fn invalid_gaussian_waist() {
        let g = PixelGrid::new(4, 4).unwrap();
        assert!(spdc_position_state(&g, &SpdcProfile::Gaussian { waist: 0.0 }).is_err());
    }

    #[test]
    fn dove_rotation_theta_zero_is_identity() {
        let g = PixelGrid::new(8, 8).unwrap();
        let s = uniform(&g);
        let r = s.apply_dove_rotation(0.0);
        assert!(phase_aligned_max_diff(&s, &r) < 1e-12);
    }

    #[test]
    fn dove_rotation_matches_enumeration_oracle() {
        // θ = π/2 rotates the A pixel by π; check every term against the
        // direct trigonometric map.
        let g = PixelGrid::new(8, 8).unwrap();
        let s = uniform(&g).apply_dove_rotation(PI / 2.0);
        let rot = RotationOp::about_grid_center(&g, PI);
        assert!((s.norm_sq() - 1.0).abs() < 1e-10);
        for r in g.pixels() {
            let amp = s.amplitude(
                Mode::prompt(Port::A, rot.nearest(r)),
                Mode::prompt(Port::B, r),
            );
            assert!((amp.norm() - 1.0 / 8.0).abs() < 1e-12, "missing term at {r:?}");
        }
    }

    #[test]
    fn dove_rotation_quarter_turn() {
        let g = PixelGrid::new(6, 6).unwrap();
        let s = uniform(&g).apply_dove_rotation(FRAC_PI_4);
        let rot = RotationOp::about_grid_center(&g, PI / 2.0);
        for r in g.pixels() {
            let amp = s.amplitude(
                Mode::prompt(Port::A, rot.nearest(r)),
                Mode::prompt(Port::B, r),
            );
            assert!(amp.norm() > 0.0);
        }
    }

    #[test]
    fn beamsplitter_rejects_non_unitary() {
        let g = PixelGrid::new(2, 2).unwrap();
        assert!(uniform(&g).apply_beamsplitter(0.9, 0.6).is_err());
    }

    #[test]
    fn hom_bunching_on_identical_inputs() {
        // Photons identical in every DoF: zero coincidence weight at 50:50.
        let g = PixelGrid::new(2, 2).unwrap();
        let s = uniform(&g)
            .apply_beamsplitter(FRAC_1_SQRT_2, FRAC_1_SQRT_2)
            .unwrap();
        assert!((s.norm_sq() - 1.0).abs() < 1e-10, "BS must be unitary");
        let post = s.postselect_coincidences();
        assert!(post.state.is_none());
        assert_eq!(post.retained_probability, 0.0);
    }

    #[test]
    fn beamsplitter_expansion_matches_symbolic_oracle() {
        // Four-pixel grid, θ=π/4 (plane rotation π/2, an exact permutation of
        // the 2x2 grid): the expansion must match the four-term line of the
        // rotated-input algebra, term by term.
        let g = PixelGrid::new(2, 2).unwrap();
        let rotated = uniform(&g).apply_dove_rotation(FRAC_PI_4);
        let s = rotated
            .apply_beamsplitter(FRAC_1_SQRT_2, FRAC_1_SQRT_2)
            .unwrap();
        let rot = RotationOp::about_grid_center(&g, PI / 2.0);
        let c = 0.5; // uniform weight on 4 pixels
        for r in g.pixels() {
            let rr = rot.nearest(r);
            assert_ne!(rr, r);
            let a = |p: Port, q: PixelCoord| Mode::prompt(p, q);
            // c/2 [ |Rr⟩_A|r⟩_B − |r⟩_A|Rr⟩_B + |Rr,r⟩_B − |Rr,r⟩_A ]
            let checks = [
                (a(Port::A, rr), a(Port::B, r), c / 2.0),
                (a(Port::A, r), a(Port::B, rr), -c / 2.0),
                (a(Port::B, rr), a(Port::B, r), c / 2.0),
                (a(Port::A, rr), a(Port::A, r), -c / 2.0),
            ];
            for (m1, m2, expect) in checks {
                let amp = s.amplitude(m1, m2);
                assert!(
                    (amp - Complex64::new(expect, 0.0)).norm() < 1e-12,
                    "pair {m1:?},{m2:?}: got {amp}, want {expect}"
                );
            }
        }
    }

    #[test]
    fn postselect_generic_theta_two_terms_per_pixel() {
        let g = PixelGrid::new(8, 8).unwrap();
        let post = uniform(&g)
            .apply_dove_rotation(FRAC_PI_4)
            .apply_beamsplitter(FRAC_1_SQRT_2, FRAC_1_SQRT_2)
            .unwrap()
            .postselect_coincidences();
        let s = post.state.expect("generic theta passes the filter");
        // Retained mass: t⁴ + r⁴ = 1/2 for fully off-diagonal rotated input.
        assert!((post.retained_probability - 0.5).abs() < 1e-10);
        let rot = RotationOp::about_grid_center(&g, PI / 2.0);
        for r in g.pixels() {
            let plus = s.amplitude(
                Mode::prompt(Port::A, rot.nearest(r)),
                Mode::prompt(Port::B, r),
            );
            let minus = s.amplitude(
                Mode::prompt(Port::A, r),
                Mode::prompt(Port::B, rot.nearest(r)),
            );
            assert!((plus + minus).norm() < 1e-12, "Eq-8 sign structure at {r:?}");
            assert!(plus.norm() > 0.0);
        }
    }

    #[test]
    fn postselect_bunched_only_input_is_empty() {
        let g = PixelGrid::new(2, 2).unwrap();
        let m1 = Mode::prompt(Port::B, PixelCoord::new(0, 0));
        let m2 = Mode::prompt(Port::B, PixelCoord::new(1, 0));
        let mut terms = BTreeMap::new();
        terms.insert(ModePair::new(m1, m2), Complex64::new(1.0, 0.0));
        let s = BiphotonState::from_terms(g, terms);
        let post = s.postselect_coincidences();
        assert!(post.state.is_none());
    }

    #[test]
    fn closed_form_theta_zero_cancels() {
        let g = PixelGrid::new(8, 8).unwrap();
        let s = hom_state_closed_form(&g, &SpdcProfile::Uniform, 0.0).unwrap();
        assert!(s.is_none());
    }

    #[test]
    fn closed_form_quarter_angle_partners() {
        // θ=π/4: every A pixel pairs with its ±π/2-rotated B partners.
        let g = PixelGrid::new(8, 8).unwrap();
        let s = hom_state_closed_form(&g, &SpdcProfile::Uniform, FRAC_PI_4)
            .unwrap()
            .unwrap();
        let fwd = RotationOp::about_grid_center(&g, PI / 2.0);
        let bwd = fwd.inverse();
        for r in g.pixels() {
            let plus = s.amplitude(Mode::prompt(Port::A, r), Mode::prompt(Port::B, bwd.nearest(r)));
            let minus = s.amplitude(Mode::prompt(Port::A, r), Mode::prompt(Port::B, fwd.nearest(r)));
            assert!((plus + minus).norm() < 1e-12);
            assert!(plus.norm() > 0.0);
        }
    }

    #[test]
    fn delayed_pipeline_survives_at_theta_zero() {
        let g = PixelGrid::new(8, 8).unwrap();
        let post = uniform(&g)
            .apply_path_delay()
            .apply_beamsplitter(FRAC_1_SQRT_2, FRAC_1_SQRT_2)
            .unwrap()
            .postselect_coincidences();
        assert!(post.retained_probability > 0.4); // distinguishable photons: 1/2
        assert!(post.state.is_some());
    }

    #[test]
    fn project_object_rejects_all_black() {
        let g = PixelGrid::new(4, 4).unwrap();
        let obj = ObjectMask::from_bits(g.clone(), vec![false; 16]).unwrap();
        let s = uniform(&g);
        assert!(matches!(
            project_object(&s, &obj),
            Err(Error::EmptyState(_))
        ));
    }

    #[test]
    fn no_bs_projection_gives_rotated_object_intensity() {
        let g = PixelGrid::new(8, 8).unwrap();
        let bits: Vec<bool> = g.pixels().map(|c| c.y < 3 && c.x >= 3 && c.x < 6).collect();
        let obj = ObjectMask::from_bits(g.clone(), bits).unwrap();
        let theta = FRAC_PI_4;
        let sp = project_object(&uniform(&g).apply_dove_rotation(theta), &obj).unwrap();
        let img = intensity_image(&sp);
        let rot = RotationOp::about_grid_center(&g, 2.0 * theta);
        for r in g.pixels() {
            let expect = if crate::grid::sample_rotated(&g, |c| obj.get(c), &rot, r) {
                1.0
            } else {
                0.0
            };
            assert!((img.get(r) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn hom_intensity_is_xor_of_rotated_copies() {
        // Uniform c, binary O: |O(Rr) − O(R⁻¹r)|² is the XOR of the two
        // copies and vanishes exactly on their overlap.
        let g = PixelGrid::new(12, 12).unwrap();
        // Object overlapping the center so the copies intersect.
        let bits: Vec<bool> = g
            .pixels()
            .map(|c| (3..9).contains(&c.x) && (4..8).contains(&c.y))
            .collect();
        let obj = ObjectMask::from_bits(g.clone(), bits).unwrap();
        let theta = FRAC_PI_4;
        let state = hom_state_closed_form(&g, &SpdcProfile::Uniform, theta)
            .unwrap()
            .unwrap();
        let img = intensity_image(&project_object(&state, &obj).unwrap());
        let fwd = RotationOp::about_grid_center(&g, 2.0 * theta);
        let bwd = fwd.inverse();
        let mut saw_overlap = false;
        for r in g.pixels() {
            let o_fwd = crate::grid::sample_rotated(&g, |c| obj.get(c), &fwd, r);
            let o_bwd = crate::grid::sample_rotated(&g, |c| obj.get(c), &bwd, r);
            let expect = if o_fwd != o_bwd { 1.0 } else { 0.0 };
            if o_fwd && o_bwd {
                saw_overlap = true;
            }
            assert!((img.get(r) - expect).abs() < 1e-12, "at {r:?}");
        }
        assert!(saw_overlap, "test object must produce overlapping copies");
    }

    #[test]
    fn phase_alignment_ignores_global_phase() {
        let g = PixelGrid::new(4, 4).unwrap();
        let s = uniform(&g).apply_dove_rotation(FRAC_PI_4);
        let phase = Complex64::from_polar(1.0, 1.234);
        let mut terms = BTreeMap::new();
        for (k, v) in s.terms() {
            terms.insert(*k, v * phase);
        }
        let t = BiphotonState::from_terms(g, terms);
        assert!(phase_aligned_max_diff(&s, &t) < 1e-12);
    }
}
