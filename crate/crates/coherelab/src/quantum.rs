//! Domain objects of the interferometer model: density matrices, diagonal
//! phase unitaries, POVMs, dephasing, and strictly incoherent channels.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    eig_hermitian, psd_sqrt, von_neumann_entropy_bits, ComplexMatrix, EigenSystem, C64,
    HERMITICITY_TOL, PSD_CLAMP,
};

/// d x d complex Hermitian PSD unit-trace operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_finite() {
            return Err(Error::InvalidInput("non-finite state entries".into()));
        }
        let tol = HERMITICITY_TOL * mat.max_abs().max(1.0);
        if mat.hermiticity_defect() > tol {
            return Err(Error::InvalidInput(
                "density matrix is not Hermitian".into(),
            ));
        }
        let mat = mat.symmetrized();
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "density matrix trace is {tr}, expected 1"
            )));
        }
        let eig = eig_hermitian(&mat)?;
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < PSD_CLAMP {
            return Err(Error::NotPsd(min));
        }
        Ok(DensityMatrix { mat })
    }

    /// Construction path for states produced by already-validated arithmetic
    /// (phase conjugation, Kraus branches). Skips the eigenvalue check.
    pub(crate) fn from_trusted(mat: ComplexMatrix) -> Self {
        DensityMatrix { mat: mat.symmetrized() }
    }

    pub fn from_pure(amplitudes: &[C64]) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidInput("pure state has zero norm".into()));
        }
        let v: Vec<C64> = amplitudes.iter().map(|z| z / norm.sqrt()).collect();
        Ok(DensityMatrix { mat: ComplexMatrix::outer(&v) })
    }

    /// Pure state with all density-matrix entries 1/d.
    pub fn maximally_coherent(dim: usize) -> Self {
        DensityMatrix {
            mat: ComplexMatrix::from_fn(dim, |_, _| Complex64::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::diag_real(probs))
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn entry(&self, j: usize, k: usize) -> C64 {
        self.mat[(j, k)]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.mat[(j, j)].re).collect()
    }

    /// Delta(rho): projection onto the diagonal in the path basis.
    pub fn dephase(&self) -> DensityMatrix {
        DensityMatrix {
            mat: ComplexMatrix::diag_real(&self.diagonal()),
        }
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let d = self.dim();
        for j in 0..d {
            for k in 0..d {
                if j != k && self.mat[(j, k)].norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// rho(alpha) = U(alpha) rho U(alpha)^dagger.
    pub fn apply_phases(&self, alpha: &PhaseVector) -> Result<DensityMatrix> {
        if alpha.dim() != self.dim() {
            return Err(Error::InvalidInput(format!(
                "phase vector has dim {}, state has dim {}",
                alpha.dim(),
                self.dim()
            )));
        }
        let a = alpha.as_slice();
        let mat = ComplexMatrix::from_fn(self.dim(), |j, k| {
            if j == k {
                self.mat[(j, k)]
            } else {
                Complex64::from_polar(1.0, a[j] - a[k]) * self.mat[(j, k)]
            }
        });
        Ok(DensityMatrix { mat })
    }

    pub fn eig(&self) -> Result<EigenSystem> {
        eig_hermitian(&self.mat)
    }

    pub fn sqrt(&self) -> Result<ComplexMatrix> {
        psd_sqrt(&self.mat)
    }

    pub fn entropy_bits(&self) -> Result<f64> {
        von_neumann_entropy_bits(&self.mat)
    }
}

/// Phase configuration alpha in [0, 2pi)^d.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseVector {
    components: Vec<f64>,
}

impl PhaseVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite phase component".into()));
        }
        Ok(PhaseVector {
            components: components.into_iter().map(|x| x.rem_euclid(TAU)).collect(),
        })
    }

    pub fn zero(dim: usize) -> Self {
        PhaseVector { components: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.components
    }

    pub fn shifted(&self, c: f64) -> Self {
        PhaseVector {
            components: self.components.iter().map(|x| (x + c).rem_euclid(TAU)).collect(),
        }
    }

    pub fn add(&self, other: &PhaseVector) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidInput("phase vector dimension mismatch".into()));
        }
        PhaseVector::new(
            self.components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn scaled(&self, c: f64) -> Self {
        PhaseVector {
            components: self.components.iter().map(|x| (x * c).rem_euclid(TAU)).collect(),
        }
    }

    /// Generating vector of uniformly accelerating phases
    /// h_pi = (2pi/d)(pi(1), ..., pi(d)) for a permutation pi of {1..d}.
    pub fn equidistributed_generator(perm: &[usize]) -> Result<Self> {
        let d = perm.len();
        validate_permutation(perm)?;
        PhaseVector::new(
            perm.iter()
                .map(|&p| TAU / d as f64 * (p + 1) as f64)
                .collect(),
        )
    }
}

fn validate_permutation(perm: &[usize]) -> Result<()> {
    let d = perm.len();
    let mut seen = vec![false; d];
    for &p in perm {
        if p >= d || seen[p] {
            return Err(Error::InvalidInput("not a permutation".into()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Finite outcome-indexed family of PSD effects summing to the identity.
#[derive(Clone, Debug)]
pub struct Povm {
    labels: Vec<String>,
    elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn new(labels: Vec<String>, elements: Vec<ComplexMatrix>) -> Result<Self> {
        if labels.len() != elements.len() || elements.is_empty() {
            return Err(Error::InvalidInput("POVM labels/elements mismatch".into()));
        }
        let d = elements[0].dim();
        let mut sum = ComplexMatrix::zeros(d);
        for m in &elements {
            if m.dim() != d {
                return Err(Error::InvalidInput("POVM element dimension mismatch".into()));
            }
            let tol = HERMITICITY_TOL * m.max_abs().max(1.0);
            if m.hermiticity_defect() > tol {
                return Err(Error::InvalidInput("POVM element is not Hermitian".into()));
            }
            let eig = eig_hermitian(m)?;
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < PSD_CLAMP {
                return Err(Error::NotPsd(min));
            }
            sum = sum.add(m);
        }
        if sum.sub(&ComplexMatrix::identity(d)).max_abs() > 1e-9 {
            return Err(Error::InvalidInput("POVM elements do not sum to identity".into()));
        }
        Ok(Povm { labels, elements })
    }

    /// Projective measurement onto a given orthonormal basis.
    pub fn from_basis(vectors: &[Vec<C64>]) -> Result<Self> {
        let labels = (0..vectors.len()).map(|i| i.to_string()).collect();
        let elements = vectors.iter().map(|v| ComplexMatrix::outer(v)).collect();
        Self::new(labels, elements)
    }

    /// Fourier-basis measurement: the symmetric multi-port beam splitter.
    pub fn fourier(dim: usize) -> Self {
        let vectors: Vec<Vec<C64>> = (0..dim)
            .map(|t| {
                (0..dim)
                    .map(|j| {
                        Complex64::from_polar(
                            1.0 / (dim as f64).sqrt(),
                            TAU * (t * j) as f64 / dim as f64,
                        )
                    })
                    .collect()
            })
            .collect();
        Self::from_basis(&vectors).expect("Fourier basis is orthonormal")
    }

    pub fn computational(dim: usize) -> Self {
        let labels = (0..dim).map(|j| j.to_string()).collect();
        let elements = (0..dim)
            .map(|j| {
                let mut v = vec![Complex64::new(0.0, 0.0); dim];
                v[j] = Complex64::new(1.0, 0.0);
                ComplexMatrix::outer(&v)
            })
            .collect();
        Povm { labels, elements }
    }

    /// (M0, 1 - M0) from a single effect.
    pub fn two_outcome(effect: ComplexMatrix) -> Result<Self> {
        let complement = ComplexMatrix::identity(effect.dim()).sub(&effect);
        Self::new(vec!["0".into(), "1".into()], vec![effect, complement])
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn element(&self, i: usize) -> &ComplexMatrix {
        &self.elements[i]
    }

    pub fn relabeled(&self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.elements.len() {
            return Err(Error::InvalidInput("label count mismatch".into()));
        }
        Ok(Povm { labels, elements: self.elements.clone() })
    }
}

/// Born distribution P(omega | alpha) = tr[rho(alpha) M_omega].
pub fn born_distribution(rho: &DensityMatrix, alpha: &PhaseVector, povm: &Povm) -> Result<Vec<f64>> {
    if povm.dim() != rho.dim() {
        return Err(Error::InvalidInput("POVM dimension mismatch".into()));
    }
    let rotated = rho.apply_phases(alpha)?;
    let mut probs = Vec::with_capacity(povm.len());
    for i in 0..povm.len() {
        let p = rotated.matrix().mul(povm.element(i)).trace().re;
        if p < -1e-10 {
            return Err(Error::InvalidInput(format!(
                "negative Born probability {p} for outcome {}",
                povm.labels()[i]
            )));
        }
        probs.push(p.max(0.0));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "Born probabilities sum to {total}"
        )));
    }
    Ok(probs)
}

/// One strictly incoherent Kraus operator K = pi . diag(c):
/// K |j> = c_j |perm(j)>.
#[derive(Clone, Debug)]
pub struct SioKraus {
    pub permutation: Vec<usize>,
    pub amplitudes: Vec<C64>,
}

impl SioKraus {
    pub fn matrix(&self) -> ComplexMatrix {
        let d = self.permutation.len();
        let mut m = ComplexMatrix::zeros(d);
        for j in 0..d {
            m[(self.permutation[j], j)] = self.amplitudes[j];
        }
        m
    }
}

/// Strictly incoherent channel built from permutation-diagonal Kraus operators.
#[derive(Clone, Debug)]
pub struct SioChannel {
    kraus: Vec<SioKraus>,
}

impl SioChannel {
    pub fn new(kraus: Vec<SioKraus>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidInput("empty Kraus set".into()));
        }
        let d = kraus[0].permutation.len();
        for k in &kraus {
            if k.permutation.len() != d || k.amplitudes.len() != d {
                return Err(Error::InvalidInput("Kraus operator dimension mismatch".into()));
            }
            validate_permutation(&k.permutation)?;
        }
        for j in 0..d {
            let total: f64 = kraus.iter().map(|k| k.amplitudes[j].norm_sqr()).sum();
            if (total - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidInput(format!(
                    "Kraus completeness fails on column {j}: sum |c|^2 = {total}"
                )));
            }
        }
        Ok(SioChannel { kraus })
    }

    pub fn identity(dim: usize) -> Self {
        SioChannel {
            kraus: vec![SioKraus {
                permutation: (0..dim).collect(),
                amplitudes: vec![Complex64::new(1.0, 0.0); dim],
            }],
        }
    }

    /// Full dephasing: one projector Kraus operator per path.
    pub fn dephasing(dim: usize) -> Self {
        let kraus = (0..dim)
            .map(|j| {
                let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
                amplitudes[j] = Complex64::new(1.0, 0.0);
                SioKraus { permutation: (0..dim).collect(), amplitudes }
            })
            .collect();
        SioChannel { kraus }
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].permutation.len()
    }

    pub fn kraus(&self) -> &[SioKraus] {
        &self.kraus
    }

    /// Selective application: branch probabilities and normalized post states.
    /// Branches with q <= 1e-12 are dropped.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<Vec<(f64, DensityMatrix)>> {
        if self.dim() != rho.dim() {
            return Err(Error::InvalidInput("channel dimension mismatch".into()));
        }
        let d = self.dim();
        let mut out = Vec::new();
        let mut total = 0.0;
        for k in &self.kraus {
            let mut branch = ComplexMatrix::zeros(d);
            for j in 0..d {
                for l in 0..d {
                    branch[(k.permutation[j], k.permutation[l])] +=
                        k.amplitudes[j] * k.amplitudes[l].conj() * rho.entry(j, l);
                }
            }
            let q = branch.trace().re;
            total += q;
            if q > 1e-12 {
                out.push((q, DensityMatrix::from_trusted(branch.scale_re(1.0 / q))));
            }
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "Kraus branch probabilities sum to {total}"
            )));
        }
        Ok(out)
    }
}

/// Incoherent (IO, not necessarily strictly incoherent) channel:
/// K = sum_j c_j |k(j)><j| with an arbitrary basis map k. Used only by the
/// exploratory mode of the monotonicity harness.
#[derive(Clone, Debug)]
pub struct IoChannel {
    kraus: Vec<(Vec<usize>, Vec<C64>)>,
}

impl IoChannel {
    pub fn new(kraus: Vec<(Vec<usize>, Vec<C64>)>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::InvalidInput("empty Kraus set".into()));
        }
        let d = kraus[0].0.len();
        for (map, amps) in &kraus {
            if map.len() != d || amps.len() != d || map.iter().any(|&t| t >= d) {
                return Err(Error::InvalidInput("IO Kraus operator malformed".into()));
            }
        }
        for j in 0..d {
            let total: f64 = kraus.iter().map(|(_, a)| a[j].norm_sqr()).sum();
            if (total - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidInput("IO Kraus completeness fails".into()));
            }
        }
        Ok(IoChannel { kraus })
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].0.len()
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<Vec<(f64, DensityMatrix)>> {
        if self.dim() != rho.dim() {
            return Err(Error::InvalidInput("channel dimension mismatch".into()));
        }
        let d = self.dim();
        let mut out = Vec::new();
        for (map, amps) in &self.kraus {
            let mut branch = ComplexMatrix::zeros(d);
            for j in 0..d {
                for l in 0..d {
                    branch[(map[j], map[l])] += amps[j] * amps[l].conj() * rho.entry(j, l);
                }
            }
            let q = branch.trace().re;
            if q > 1e-12 {
                out.push((q, DensityMatrix::from_trusted(branch.scale_re(1.0 / q))));
            }
        }
        Ok(out)
    }
}

/// Diagonal Hamiltonian H = diag(h).
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalHamiltonian {
    h: Vec<f64>,
}

impl DiagonalHamiltonian {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if h.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite Hamiltonian entry".into()));
        }
        Ok(DiagonalHamiltonian { h })
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    pub fn entries(&self) -> &[f64] {
        &self.h
    }

    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::diag_real(&self.h)
    }

    pub fn norm2(&self) -> f64 {
        self.h.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.h.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

fn standard_complex_normal(rng: &mut ChaCha8Rng) -> C64 {
    // Box-Muller
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    Complex64::from_polar(r / 2f64.sqrt(), TAU * u2)
}

fn random_permutation(rng: &mut ChaCha8Rng, d: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..d).collect();
    for j in (1..d).rev() {
        let k = rng.gen_range(0..=j);
        perm.swap(j, k);
    }
    perm
}

/// Haar-style random state: rho = G G^dagger / tr with G a d x rank complex
/// Gaussian matrix. Deterministic per seed.
pub fn random_density(d: usize, rank: usize, seed: u64) -> Result<DensityMatrix> {
    if rank == 0 || rank > d {
        return Err(Error::InvalidInput(format!(
            "rank {rank} out of range for dimension {d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<Vec<C64>> = (0..d)
        .map(|_| (0..rank).map(|_| standard_complex_normal(&mut rng)).collect())
        .collect();
    let mut mat = ComplexMatrix::zeros(d);
    for j in 0..d {
        for k in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..rank {
                acc += g[j][r] * g[k][r].conj();
            }
            mat[(j, k)] = acc;
        }
    }
    let tr = mat.trace().re;
    Ok(DensityMatrix::from_trusted(mat.scale_re(1.0 / tr)))
}

/// Random SIO channel: uniform permutations, complex-normal amplitude columns
/// normalized to satisfy completeness. Deterministic per seed.
pub fn random_sio(d: usize, n_kraus: usize, seed: u64) -> Result<SioChannel> {
    if n_kraus == 0 {
        return Err(Error::InvalidInput("need at least one Kraus operator".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perms: Vec<Vec<usize>> = (0..n_kraus).map(|_| random_permutation(&mut rng, d)).collect();
    let mut amps: Vec<Vec<C64>> = (0..n_kraus)
        .map(|_| (0..d).map(|_| standard_complex_normal(&mut rng)).collect())
        .collect();
    for j in 0..d {
        let total: f64 = amps.iter().map(|a| a[j].norm_sqr()).sum();
        let scale = 1.0 / total.sqrt();
        for a in amps.iter_mut() {
            a[j] *= scale;
        }
    }
    SioChannel::new(
        perms
            .into_iter()
            .zip(amps)
            .map(|(permutation, amplitudes)| SioKraus { permutation, amplitudes })
            .collect(),
    )
}

/// Random IO channel whose basis maps are generally non-injective.
pub fn random_io(d: usize, n_kraus: usize, seed: u64) -> Result<IoChannel> {
    if n_kraus == 0 {
        return Err(Error::InvalidInput("need at least one Kraus operator".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let maps: Vec<Vec<usize>> = (0..n_kraus)
        .map(|_| (0..d).map(|_| rng.gen_range(0..d)).collect())
        .collect();
    let mut amps: Vec<Vec<C64>> = (0..n_kraus)
        .map(|_| (0..d).map(|_| standard_complex_normal(&mut rng)).collect())
        .collect();
    for j in 0..d {
        let total: f64 = amps.iter().map(|a| a[j].norm_sqr()).sum();
        let scale = 1.0 / total.sqrt();
        for a in amps.iter_mut() {
            a[j] *= scale;
        }
    }
    IoChannel::new(maps.into_iter().zip(amps).collect())
}

/// JSON state schema shared with the CLI:
/// `{"dim": d, "matrix": [[[re, im], ...], ...]}`, row-major.
#[derive(Serialize, Deserialize)]
pub struct StateJson {
    pub dim: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

impl DensityMatrix {
    pub fn to_state_json(&self) -> StateJson {
        let d = self.dim();
        StateJson {
            dim: d,
            matrix: (0..d)
                .map(|j| (0..d).map(|k| [self.entry(j, k).re, self.entry(j, k).im]).collect())
                .collect(),
        }
    }

    pub fn from_state_json(state: &StateJson) -> Result<Self> {
        let d = state.dim;
        if d == 0 {
            return Err(Error::InvalidInput("state dimension must be positive".into()));
        }
        if state.matrix.len() != d {
            return Err(Error::InvalidInput(format!(
                "matrix has {} rows, expected {d}",
                state.matrix.len()
            )));
        }
        let mut mat = ComplexMatrix::zeros(d);
        for (j, row) in state.matrix.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidInput(format!(
                    "row {j} has {} columns, expected {d}",
                    row.len()
                )));
            }
            for (k, &[re, im]) in row.iter().enumerate() {
                if !re.is_finite() || !im.is_finite() {
                    return Err(Error::InvalidInput(format!(
                        "non-finite entry at row {j}, column {k}"
                    )));
                }
                mat[(j, k)] = Complex64::new(re, im);
            }
        }
        Self::new(mat)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_state_json()).expect("state serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let state: StateJson = serde_json::from_str(s)
            .map_err(|e| Error::InvalidInput(format!("state JSON parse error: {e}")))?;
        Self::from_state_json(&state)
    }
}

/// The worked qutrit example: rho = 1/3 (|1>+|2>)(<1|+<2|) + 1/3 |3><3|.
pub fn qutrit_example_state() -> DensityMatrix {
    let third = Complex64::new(1.0 / 3.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mat = ComplexMatrix::from_rows(&[
        vec![third, third, zero],
        vec![third, third, zero],
        vec![zero, zero, third],
    ])
    .unwrap();
    DensityMatrix::new(mat).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        Complex64::new(re, im)
    }

    fn qubit_plus() -> DensityMatrix {
        DensityMatrix::from_pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn dephase_cases() {
        let diag = DensityMatrix::from_diagonal(&[0.2, 0.8]).unwrap();
        assert_eq!(diag.dephase(), diag);

        let plus = qubit_plus();
        let deph = plus.dephase();
        assert!((deph.entry(0, 0).re - 0.5).abs() < 1e-12);
        assert!(deph.entry(0, 1).norm() < 1e-15);

        let q = qutrit_example_state().dephase();
        for j in 0..3 {
            assert!((q.entry(j, j).re - 1.0 / 3.0).abs() < 1e-12);
        }
        assert!(q.is_diagonal(1e-15));
    }

    #[test]
    fn apply_phases_cases() {
        let plus = qubit_plus();
        assert_eq!(plus.apply_phases(&PhaseVector::zero(2)).unwrap(), plus);

        let flipped = plus
            .apply_phases(&PhaseVector::new(vec![PI, 0.0]).unwrap())
            .unwrap();
        assert!((flipped.entry(0, 1).re + 0.5).abs() < 1e-12);

        // global shift invariance
        let alpha = PhaseVector::new(vec![0.3, 1.1]).unwrap();
        let a = plus.apply_phases(&alpha).unwrap();
        let b = plus.apply_phases(&alpha.shifted(0.77)).unwrap();
        assert!(a.matrix().sub(b.matrix()).max_abs() < 1e-12);
    }

    fn qutrit_m0() -> Povm {
        let s = 1.0 / 2f64.sqrt();
        Povm::from_basis(&[
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(s, 0.0), c(s, 0.0)],
            vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0)],
        ])
        .unwrap()
    }

    fn qutrit_m1() -> Povm {
        let s = 1.0 / 2f64.sqrt();
        Povm::from_basis(&[
            vec![c(s, 0.0), c(s, 0.0), c(0.0, 0.0)],
            vec![c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap()
    }

    #[test]
    fn born_qutrit_m0_constant() {
        let rho = qutrit_example_state();
        for i in 0..7 {
            let alpha = PhaseVector::new(vec![0.0, i as f64, 0.0]).unwrap();
            let p = born_distribution(&rho, &alpha, &qutrit_m0()).unwrap();
            for &x in &p {
                assert!((x - 1.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn born_qutrit_m1_fringes() {
        let rho = qutrit_example_state();
        for i in 0..9 {
            let alpha = 0.7 * i as f64;
            let p = born_distribution(
                &rho,
                &PhaseVector::new(vec![0.0, alpha, 0.0]).unwrap(),
                &qutrit_m1(),
            )
            .unwrap();
            assert!((p[0] - 2.0 / 3.0 * (alpha / 2.0).cos().powi(2)).abs() < 1e-12);
            assert!((p[1] - 2.0 / 3.0 * (alpha / 2.0).sin().powi(2)).abs() < 1e-12);
            assert!((p[2] - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn born_qutrit_fourier_fringes() {
        let rho = qutrit_example_state();
        let fourier = Povm::fourier(3);
        for i in 0..9 {
            let alpha = 0.7 * i as f64;
            let p = born_distribution(
                &rho,
                &PhaseVector::new(vec![0.0, alpha, 0.0]).unwrap(),
                &fourier,
            )
            .unwrap();
            for t in 0..3 {
                let expect =
                    1.0 / 9.0 + 4.0 / 9.0 * (alpha / 2.0 - t as f64 * PI / 3.0).cos().powi(2);
                assert!((p[t] - expect).abs() < 1e-12, "t={t} alpha={alpha}");
            }
        }
    }

    #[test]
    fn apply_sio_identity_and_dephasing() {
        let plus = qubit_plus();
        let id = SioChannel::identity(2);
        let out = id.apply(&plus).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].0 - 1.0).abs() < 1e-12);
        assert!(out[0].1.matrix().sub(plus.matrix()).max_abs() < 1e-12);

        let deph = SioChannel::dephasing(2);
        let out = deph.apply(&plus).unwrap();
        assert_eq!(out.len(), 2);
        for (q, state) in &out {
            assert!((q - 0.5).abs() < 1e-12);
            assert!(state.is_diagonal(1e-12));
        }
    }

    #[test]
    fn apply_sio_random_channel_valid_output() {
        let rho = random_density(3, 3, 11).unwrap();
        let channel = random_sio(3, 3, 5).unwrap();
        let out = channel.apply(&rho).unwrap();
        let total: f64 = out.iter().map(|(q, _)| q).sum();
        assert!((total - 1.0).abs() < 1e-9);
        for (_, state) in &out {
            // revalidate through the strict constructor
            DensityMatrix::new(state.matrix().clone()).unwrap();
        }
    }

    #[test]
    fn random_density_properties() {
        let pure = random_density(2, 1, 42).unwrap();
        assert!(pure.entropy_bits().unwrap().abs() < 1e-9);

        let full = random_density(3, 3, 7).unwrap();
        let eig = full.eig().unwrap();
        assert!(eig.eigenvalues.iter().all(|&l| l > 0.0));

        let again = random_density(3, 3, 7).unwrap();
        assert_eq!(full, again);
    }

    #[test]
    fn random_sio_properties() {
        // single Kraus operator means a permutation times diagonal unitary
        let unitary = random_sio(3, 1, 9).unwrap();
        for j in 0..3 {
            assert!((unitary.kraus()[0].amplitudes[j].norm() - 1.0).abs() < 1e-12);
        }

        for seed in 0..20 {
            let channel = random_sio(4, 3, seed).unwrap();
            let rho = random_density(4, 4, 1000 + seed).unwrap();
            let total: f64 = channel.apply(&rho).unwrap().iter().map(|(q, _)| q).sum();
            assert!((total - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn state_json_round_trip() {
        let rho = random_density(3, 2, 3).unwrap();
        let back = DensityMatrix::from_json_str(&rho.to_json_string()).unwrap();
        assert!(rho.matrix().sub(back.matrix()).max_abs() < 1e-12);
    }

    #[test]
    fn state_json_reports_bad_row() {
        let text = r#"{"dim": 2, "matrix": [[[0.5,0.0],[0.0,0.0]], [[0.0,0.0]]]}"#;
        let err = DensityMatrix::from_json_str(text).unwrap_err();
        assert!(err.to_string().contains("row 1"));
    }
}
