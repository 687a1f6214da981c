//! Exchange-symmetry kernel: the particle-exchange operator P on joint
//! vectors, symmetric/anti-symmetric decomposition, and the invariance of the
//! exchange eigenvalue under any same-unitary change of basis U ⊗ U. The
//! invariance is asserted only for U₁ = U₂; with U₁ ≠ U₂ it genuinely fails.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const EIGEN_TOL: f64 = 1e-9;

/// Two-particle amplitude table over basis-index pairs (i, j) with i, j in
/// [0, n): a dense n² vector in ℋ ⊗ ℋ.
#[derive(Clone, Debug, PartialEq)]
pub struct JointVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl JointVector {
    pub fn new(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("subsystem dimension must be >= 1"));
        }
        if amps.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} amplitudes, got {}",
                n * n,
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::invalid("non-finite amplitude"));
        }
        Ok(JointVector { n, amps })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn amp(&self, i: usize, j: usize) -> Complex64 {
        self.amps[i * self.n + j]
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<JointVector> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::empty("cannot normalize the zero vector"));
        }
        Ok(JointVector {
            n: self.n,
            amps: self.amps.iter().map(|a| a / n).collect(),
        })
    }
}

/// P|i,j⟩ = |j,i⟩: swaps the amplitude table across its diagonal.
pub fn exchange_apply(v: &JointVector) -> JointVector {
    let n = v.n;
    let mut amps = vec![Complex64::default(); n * n];
    for i in 0..n {
        for j in 0..n {
            amps[i * n + j] = v.amps[j * n + i];
        }
    }
    JointVector { n, amps }
}

/// (v + Pv)/2 and (v − Pv)/2; their sum reproduces v exactly.
pub fn symmetry_decompose(v: &JointVector) -> (JointVector, JointVector) {
    let p = exchange_apply(v);
    let half = |sign: f64| JointVector {
        n: v.n,
        amps: v
            .amps
            .iter()
            .zip(&p.amps)
            .map(|(a, b)| (a + sign * b) / 2.0)
            .collect(),
    };
    (half(1.0), half(-1.0))
}

/// n×n complex matrix validated to satisfy U†U = 𝕀 within 1e-10.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl UnitaryMatrix {
    pub fn new(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::invalid("matrix size mismatch"));
        }
        let u = UnitaryMatrix { n, entries };
        for i in 0..n {
            for j in 0..n {
                let mut dot = Complex64::default();
                for k in 0..n {
                    dot += u.get(k, i).conj() * u.get(k, j);
                }
                let expect = if i == j { 1.0 } else { 0.0 };
                if (dot - expect).norm() > 1e-10 {
                    return Err(Error::invalid("matrix is not unitary"));
                }
            }
        }
        Ok(u)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![Complex64::default(); n * n];
        for i in 0..n {
            entries[i * n + i] = Complex64::new(1.0, 0.0);
        }
        UnitaryMatrix { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.n + j]
    }
}

/// Applies U ⊗ U (the same unitary on both subsystems).
pub fn change_basis(v: &JointVector, u: &UnitaryMatrix) -> Result<JointVector> {
    change_basis_pair(v, u, u)
}

/// Applies U₁ ⊗ U₂; exposed so tests can exhibit the U₁ ≠ U₂ counterexample.
pub fn change_basis_pair(
    v: &JointVector,
    u1: &UnitaryMatrix,
    u2: &UnitaryMatrix,
) -> Result<JointVector> {
    if u1.n != v.n || u2.n != v.n {
        return Err(Error::invalid("dimension mismatch"));
    }
    let n = v.n;
    // Two passes: left factor on index i, then right factor on index j.
    let mut mid = vec![Complex64::default(); n * n];
    for i in 0..n {
        for k in 0..n {
            let w = u1.get(i, k);
            if w.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..n {
                mid[i * n + j] += w * v.amps[k * n + j];
            }
        }
    }
    let mut out = vec![Complex64::default(); n * n];
    for j in 0..n {
        for k in 0..n {
            let w = u2.get(j, k);
            if w.norm_sqr() == 0.0 {
                continue;
            }
            for i in 0..n {
                out[i * n + j] += w * mid[i * n + k];
            }
        }
    }
    Ok(JointVector { n, amps: out })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExchangeSymmetry {
    Symmetric,
    AntiSymmetric,
    Indefinite,
}

/// Classifies the exchange eigenvalue of a normalized vector: +1 when
/// ‖Pv − v‖ < 1e-9, −1 when ‖Pv + v‖ < 1e-9, indefinite otherwise.
pub fn symmetry_eigenvalue(v: &JointVector) -> Result<ExchangeSymmetry> {
    if v.norm() == 0.0 {
        return Err(Error::invalid("zero vector has no exchange symmetry"));
    }
    let p = exchange_apply(v);
    let dist = |sign: f64| -> f64 {
        v.amps
            .iter()
            .zip(&p.amps)
            .map(|(a, b)| (a - sign * b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    if dist(1.0) < EIGEN_TOL {
        Ok(ExchangeSymmetry::Symmetric)
    } else if dist(-1.0) < EIGEN_TOL {
        Ok(ExchangeSymmetry::AntiSymmetric)
    } else {
        Ok(ExchangeSymmetry::Indefinite)
    }
}

/// Haar-adequate random unitary: orthonormalizes a complex Gaussian matrix
/// column by column (Gram-Schmidt QR).
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> UnitaryMatrix {
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| {
            (0..n)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        })
        .collect();
    for j in 0..n {
        for k in 0..j {
            let proj: Complex64 = (0..n).map(|i| cols[k][i].conj() * cols[j][i]).sum();
            for i in 0..n {
                let sub = proj * cols[k][i];
                cols[j][i] -= sub;
            }
        }
        let norm = cols[j].iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in cols[j].iter_mut() {
            *a /= norm;
        }
    }
    let mut entries = vec![Complex64::default(); n * n];
    for j in 0..n {
        for i in 0..n {
            entries[i * n + j] = cols[j][i];
        }
    }
    UnitaryMatrix::new(n, entries).expect("Gram-Schmidt output is unitary")
}

/// Random normalized vector of definite exchange symmetry (ν = ±1).
pub fn random_definite_vector<R: Rng>(n: usize, nu: f64, rng: &mut R) -> JointVector {
    loop {
        let amps: Vec<Complex64> = (0..n * n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let v = JointVector::new(n, amps).unwrap();
        let (sym, anti) = symmetry_decompose(&v);
        let part = if nu > 0.0 { sym } else { anti };
        if let Ok(unit) = part.normalized() {
            return unit;
        }
    }
}

/// Trial report for the CLI `verify-symmetry` subcommand.
#[derive(Clone, Copy, Debug)]
pub struct InvarianceReport {
    pub trials: usize,
    pub preserved: usize,
}

/// Runs seeded random (v, U) trials over the given subsystem dimensions and
/// counts how many preserve the exchange eigenvalue under U ⊗ U.
pub fn verify_invariance(dims: &[usize], trials_per_dim: usize, seed: u64) -> InvarianceReport {
    let mut total = 0;
    let mut preserved = 0;
    for (di, &n) in dims.iter().enumerate() {
        let mut rng = crate::rng::stream_rng(seed, di as u64);
        for t in 0..trials_per_dim {
            let nu = if t % 2 == 0 { 1.0 } else { -1.0 };
            let v = random_definite_vector(n, nu, &mut rng);
            let u = random_unitary(n, &mut rng);
            let w = change_basis(&v, &u).expect("dims match");
            let before = symmetry_eigenvalue(&v).expect("nonzero");
            let after = symmetry_eigenvalue(&w).expect("nonzero");
            total += 1;
            if before == after {
                preserved += 1;
            }
        }
    }
    InvarianceReport {
        trials: total,
        preserved,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell(n: usize, sign: f64) -> JointVector {
        // (|01⟩ ± |10⟩)/√2 embedded in dimension n.
        let mut amps = vec![Complex64::default(); n * n];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        amps[1] = Complex64::new(s, 0.0);
        amps[n] = Complex64::new(sign * s, 0.0);
        JointVector::new(n, amps).unwrap()
    }

    #[test]
    fn exchange_on_bell_states() {
        let sym = bell(2, 1.0);
        assert_eq!(exchange_apply(&sym), sym);
        let anti = bell(2, -1.0);
        let p = exchange_apply(&anti);
        for (a, b) in anti.amps().iter().zip(p.amps()) {
            assert_eq!(*a, -b);
        }
    }

    #[test]
    fn exchange_is_involution() {
        let mut rng = crate::rng::stream_rng(1, 0);
        for n in [2usize, 3, 5] {
            let amps = (0..n * n)
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let v = JointVector::new(n, amps).unwrap();
            assert_eq!(exchange_apply(&exchange_apply(&v)), v);
        }
    }

    #[test]
    fn decompose_product_state() {
        // |00⟩ is already symmetric.
        let mut amps = vec![Complex64::default(); 4];
        amps[0] = Complex64::new(1.0, 0.0);
        let v = JointVector::new(2, amps).unwrap();
        let (sym, anti) = symmetry_decompose(&v);
        assert_eq!(sym, v);
        assert!(anti.norm() < 1e-15);
    }

    #[test]
    fn decompose_antisymmetric_input() {
        let v = bell(2, -1.0);
        let (sym, anti) = symmetry_decompose(&v);
        assert!(sym.norm() < 1e-15);
        assert!((anti.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn decompose_pythagorean_identity() {
        let mut rng = crate::rng::stream_rng(2, 0);
        let n = 4;
        let amps = (0..n * n)
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let v = JointVector::new(n, amps).unwrap();
        let (sym, anti) = symmetry_decompose(&v);
        let lhs = sym.norm().powi(2) + anti.norm().powi(2);
        assert!((lhs - v.norm().powi(2)).abs() < 1e-12);
        // Parts are P-eigenvectors.
        assert_eq!(
            symmetry_eigenvalue(&sym).unwrap(),
            ExchangeSymmetry::Symmetric
        );
        assert_eq!(
            symmetry_eigenvalue(&anti).unwrap(),
            ExchangeSymmetry::AntiSymmetric
        );
    }

    #[test]
    fn eigenvalue_classification() {
        assert_eq!(
            symmetry_eigenvalue(&bell(2, 1.0)).unwrap(),
            ExchangeSymmetry::Symmetric
        );
        assert_eq!(
            symmetry_eigenvalue(&bell(2, -1.0)).unwrap(),
            ExchangeSymmetry::AntiSymmetric
        );
        // |01⟩ alone has no definite symmetry.
        let mut amps = vec![Complex64::default(); 4];
        amps[1] = Complex64::new(1.0, 0.0);
        let v = JointVector::new(2, amps).unwrap();
        assert_eq!(
            symmetry_eigenvalue(&v).unwrap(),
            ExchangeSymmetry::Indefinite
        );
        let zero = JointVector::new(2, vec![Complex64::default(); 4]).unwrap();
        assert!(symmetry_eigenvalue(&zero).is_err());
    }

    #[test]
    fn identity_change_of_basis() {
        let v = bell(3, -1.0);
        let u = UnitaryMatrix::identity(3);
        assert_eq!(change_basis(&v, &u).unwrap(), v);
    }

    #[test]
    fn non_unitary_rejected() {
        let entries = vec![Complex64::new(1.0, 0.0); 4];
        assert!(UnitaryMatrix::new(2, entries).is_err());
    }

    #[test]
    fn same_unitary_preserves_symmetry() {
        let report = verify_invariance(&[2, 3, 4], 50, 123);
        assert_eq!(report.preserved, report.trials);
    }

    #[test]
    fn different_unitaries_break_invariance() {
        // U₁ ≠ U₂ as U₁⊗U₂: find a trial where the eigenvalue is lost.
        let mut rng = crate::rng::stream_rng(77, 0);
        let mut broken = false;
        for _ in 0..50 {
            let v = random_definite_vector(3, -1.0, &mut rng);
            let u1 = random_unitary(3, &mut rng);
            let u2 = random_unitary(3, &mut rng);
            let w = change_basis_pair(&v, &u1, &u2).unwrap();
            if symmetry_eigenvalue(&w).unwrap() != ExchangeSymmetry::AntiSymmetric {
                broken = true;
                break;
            }
        }
        assert!(broken, "U1 != U2 should not preserve symmetry in general");
    }
}
