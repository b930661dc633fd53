//! Dense complex linear algebra for small Hermitian problems.
//!
//! Everything here is sized for interferometer dimensions (d up to ~32):
//! a cyclic Jacobi eigensolver for complex Hermitian matrices, PSD matrix
//! square roots, Schatten norms, and entropies. No external solver is used.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute hermiticity tolerance applied before symmetrization.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Eigenvalues of a PSD matrix are clamped to zero above this drift.
pub const PSD_CLAMP: f64 = -1e-10;

/// Dense square complex matrix in row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            m[(j, j)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for j in 0..dim {
            for k in 0..dim {
                m[(j, k)] = f(j, k);
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        for (j, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidInput(format!(
                    "row {j} has {} entries, expected {dim}",
                    row.len()
                )));
            }
        }
        Ok(Self::from_fn(dim, |j, k| rows[j][k]))
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (j, &e) in entries.iter().enumerate() {
            m[(j, j)] = e;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        Self::diag(&entries.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>())
    }

    /// Rank-one projector |v><v|.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |j, k| v[j] * v[k].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |j, k| self[(k, j)].conj())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in matrix product");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for j in 0..n {
            for l in 0..n {
                let a = self[(j, l)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for k in 0..n {
                    out[(j, k)] += a * other[(l, k)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_fn(self.dim, |j, k| self[(j, k)] + other[(j, k)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self::from_fn(self.dim, |j, k| self[(j, k)] - other[(j, k)])
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_fn(self.dim, |j, k| c * self[(j, k)])
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|j| self[(j, j)]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation from A = A^dagger.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..self.dim {
            for k in j..self.dim {
                worst = worst.max((self[(j, k)] - self[(k, j)].conj()).norm());
            }
        }
        worst
    }

    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.dim, |j, k| (self[(j, k)] + self[(k, j)].conj()) * 0.5)
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    pub fn column(&self, k: usize) -> Vec<C64> {
        (0..self.dim).map(|j| self[(j, k)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (j, k): (usize, usize)) -> &C64 {
        &self.data[j * self.dim + k]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (j, k): (usize, usize)) -> &mut C64 {
        &mut self.data[j * self.dim + k]
    }
}

/// Validated Hermitian matrix (stored exactly symmetrized).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::InvalidInput("non-finite matrix entries".into()));
        }
        let tol = HERMITICITY_TOL * m.max_abs().max(1.0);
        let defect = m.hermiticity_defect();
        if defect > tol {
            return Err(Error::InvalidInput(format!(
                "matrix is not Hermitian (defect {defect:.3e} > {tol:.3e})"
            )));
        }
        Ok(HermitianMatrix(m.symmetrized()))
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }
}

impl std::ops::Deref for HermitianMatrix {
    type Target = ComplexMatrix;
    fn deref(&self) -> &ComplexMatrix {
        &self.0
    }
}

/// Result of a Hermitian eigendecomposition, eigenvalues sorted descending.
/// Columns of `eigenvectors` are the corresponding orthonormal eigenvectors.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenSystem {
    /// V diag(f(lambda)) V^dagger.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n);
        for (idx, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for j in 0..n {
                for k in 0..n {
                    out[(j, k)] += C64::new(w, 0.0) * v[(j, idx)] * v[(k, idx)].conj();
                }
            }
        }
        out
    }
}

/// Cyclic Jacobi eigensolver for complex Hermitian matrices.
///
/// Each rotation absorbs the phase of the pivot a_pq into a diagonal unitary
/// and then applies the standard real Jacobi rotation to the 2x2 pivot block.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<EigenSystem> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("non-finite matrix entries".into()));
    }
    let tol = HERMITICITY_TOL * a.max_abs().max(1.0);
    if a.hermiticity_defect() > tol {
        return Err(Error::InvalidInput("matrix is not Hermitian".into()));
    }
    let n = a.dim();
    let mut a = a.symmetrized();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius().max(1.0);
    let stop = 1e-14 * scale;

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let b = apq.norm();
                if b <= 1e-300 {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // u rotates a_pq onto the positive real axis
                let u = apq.conj() / b;
                let theta = (aqq - app) / (2.0 * b);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- U^dagger A U with U = diag(1, u) * R(c, s) on (p, q)
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - u * akq * s;
                    a[(k, q)] = akp * s + u * akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - u.conj() * aqk * s;
                    a[(q, k)] = apk * s + u.conj() * aqk * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - u * vkq * s;
                    v[(k, q)] = vkp * s + u * vkq * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |j, k| v[(j, order[k])]);
    Ok(EigenSystem { eigenvalues, eigenvectors })
}

/// PSD square root via eigendecomposition; eigenvalues in [-1e-10, 0) are
/// clamped to zero, anything below that is rejected. Eigenvalues within
/// 1e-13 of zero relative to the largest are also treated as exact zeros,
/// which keeps sqrt noise of rank-deficient inputs at the eigensolver level
/// instead of amplifying it by the infinite slope of sqrt at 0.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(a)?;
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < PSD_CLAMP {
        return Err(Error::NotPsd(min));
    }
    let cutoff = 1e-13 * eig.eigenvalues.first().cloned().unwrap_or(0.0).max(0.0);
    Ok(eig
        .apply_fn(|lam| if lam <= cutoff { 0.0 } else { lam.sqrt() })
        .symmetrized())
}

/// Schatten-1 norm (sum of singular values). Hermitian inputs take the
/// cheaper sum-of-|eigenvalue| route.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::InvalidInput("non-finite matrix entries".into()));
    }
    let tol = HERMITICITY_TOL * a.max_abs().max(1.0);
    if a.hermiticity_defect() <= tol {
        let eig = eig_hermitian(a)?;
        return Ok(eig.eigenvalues.iter().map(|l| l.abs()).sum());
    }
    let gram = a.adjoint().mul(a);
    let eig = eig_hermitian(&gram)?;
    Ok(eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum())
}

/// Spectral norm (largest singular value).
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    let gram = a.adjoint().mul(a);
    let eig = eig_hermitian(&gram)?;
    Ok(eig.eigenvalues.iter().cloned().fold(0.0, f64::max).max(0.0).sqrt())
}

/// -sum p log2 p with the 0 log 0 = 0 convention; small negative inputs
/// from eigensolver drift are treated as zero.
pub fn shannon_entropy_bits(p: &[f64]) -> f64 {
    p.iter()
        .filter(|&&x| x > 0.0)
        .map(|&x| -x * x.log2())
        .sum()
}

pub fn binary_entropy_bits(p: f64) -> f64 {
    shannon_entropy_bits(&[p.clamp(0.0, 1.0), (1.0 - p).clamp(0.0, 1.0)])
}

/// Von Neumann entropy in bits of a Hermitian PSD unit-trace matrix.
pub fn von_neumann_entropy_bits(a: &ComplexMatrix) -> Result<f64> {
    let eig = eig_hermitian(a)?;
    let clamped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    Ok(shannon_entropy_bits(&clamped))
}

/// Gaussian elimination with partial pivoting for small real systems.
pub fn solve_real(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().cloned().collect();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col].abs() < 1e-300 {
            return Err(Error::NumericalFailure("singular linear system".into()));
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            rhs[row] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..n {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn reconstruction_error(a: &ComplexMatrix, eig: &EigenSystem) -> f64 {
        eig.apply_fn(|l| l).sub(a).frobenius()
    }

    #[test]
    fn eig_diagonal() {
        let a = ComplexMatrix::diag_real(&[1.0, 0.0]);
        let eig = eig_hermitian(&a).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-14);
        assert!(eig.eigenvalues[1].abs() < 1e-14);
        assert!((eig.eigenvectors[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_rank_one_projector() {
        let a = ComplexMatrix::from_fn(2, |_, _| c(0.5, 0.0));
        let eig = eig_hermitian(&a).unwrap();
        assert!((eig.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!(eig.eigenvalues[1].abs() < 1e-12);
        let top = eig.eigenvectors.column(0);
        // |<top | (1,1)/sqrt(2)>| = 1 up to phase
        let overlap = (top[0] + top[1]).norm() / 2f64.sqrt();
        assert!((overlap - 1.0).abs() < 1e-10);
    }

    // Characteristic polynomial of a Hermitian matrix via Newton's identities,
    // rooted by dense scan + bisection. Independent of the Jacobi path.
    fn charpoly_eigenvalues(a: &ComplexMatrix) -> Vec<f64> {
        let n = a.dim();
        // power sums p_k = tr A^k
        let mut powers = vec![1.0; 1];
        let mut acc = ComplexMatrix::identity(n);
        for _ in 0..n {
            acc = acc.mul(a);
            powers.push(acc.trace().re);
        }
        // elementary symmetric polynomials e_k
        let mut e = vec![0.0; n + 1];
        e[0] = 1.0;
        for k in 1..=n {
            let mut s = 0.0;
            for i in 1..=k {
                s += (-1.0f64).powi((i - 1) as i32) * e[k - i] * powers[i];
            }
            e[k] = s / k as f64;
        }
        // char poly: lambda^n - e1 lambda^{n-1} + e2 lambda^{n-2} - ...
        let eval = |x: f64| -> f64 {
            let mut v = 0.0;
            for k in 0..=n {
                v += (-1.0f64).powi(k as i32) * e[k] * x.powi((n - k) as i32);
            }
            v
        };
        let bound = a.max_abs() * n as f64 + 1.0;
        let steps = 200_000;
        let mut roots = Vec::new();
        let mut prev_x = -bound;
        let mut prev_f = eval(prev_x);
        for i in 1..=steps {
            let x = -bound + 2.0 * bound * i as f64 / steps as f64;
            let f = eval(x);
            if prev_f == 0.0 {
                roots.push(prev_x);
            } else if prev_f * f < 0.0 {
                let (mut lo, mut hi) = (prev_x, x);
                let (mut flo, _) = (prev_f, f);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fm = eval(mid);
                    if flo * fm <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
            prev_x = x;
            prev_f = f;
        }
        roots.sort_by(|x, y| y.partial_cmp(x).unwrap());
        roots
    }

    #[test]
    fn eig_random_4x4_matches_charpoly_oracle() {
        // fixed pseudo-random Hermitian matrix
        let raw = [
            [c(0.7, 0.0), c(0.2, 0.1), c(-0.3, 0.4), c(0.05, -0.2)],
            [c(0.2, -0.1), c(-0.4, 0.0), c(0.1, 0.3), c(0.25, 0.15)],
            [c(-0.3, -0.4), c(0.1, -0.3), c(1.1, 0.0), c(-0.2, 0.1)],
            [c(0.05, 0.2), c(0.25, -0.15), c(-0.2, -0.1), c(0.3, 0.0)],
        ];
        let a = ComplexMatrix::from_fn(4, |j, k| raw[j][k]);
        let eig = eig_hermitian(&a).unwrap();
        assert!(reconstruction_error(&a, &eig) <= 1e-10 * a.frobenius().max(1.0));
        let oracle = charpoly_eigenvalues(&a);
        assert_eq!(oracle.len(), 4);
        for (got, want) in eig.eigenvalues.iter().zip(oracle.iter()) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
        // column orthonormality
        let v = &eig.eigenvectors;
        let gram = v.adjoint().mul(v);
        assert!(gram.sub(&ComplexMatrix::identity(4)).max_abs() < 1e-10);
    }

    #[test]
    fn psd_sqrt_trivial_cases() {
        let id = ComplexMatrix::identity(3);
        assert!(psd_sqrt(&id).unwrap().sub(&id).max_abs() < 1e-12);

        let a = ComplexMatrix::diag_real(&[4.0, 9.0]);
        let r = psd_sqrt(&a).unwrap();
        assert!((r[(0, 0)].re - 2.0).abs() < 1e-10);
        assert!((r[(1, 1)].re - 3.0).abs() < 1e-10);

        // projector: sqrt(rho) = rho
        let p = ComplexMatrix::from_fn(2, |_, _| c(0.5, 0.0));
        assert!(psd_sqrt(&p).unwrap().sub(&p).max_abs() < 1e-10);
    }

    #[test]
    fn psd_sqrt_rejects_negative() {
        let a = ComplexMatrix::diag_real(&[1.0, -0.5]);
        assert!(matches!(psd_sqrt(&a), Err(Error::NotPsd(_))));
    }

    #[test]
    fn trace_norm_cases() {
        let a = ComplexMatrix::diag_real(&[1.0, -1.0]);
        assert!((trace_norm(&a).unwrap() - 2.0).abs() < 1e-12);

        let z = c(0.3, -0.4);
        let b = ComplexMatrix::from_fn(2, |j, k| {
            if j == 0 && k == 1 {
                z
            } else if j == 1 && k == 0 {
                z.conj()
            } else {
                c(0.0, 0.0)
            }
        });
        assert!((trace_norm(&b).unwrap() - 2.0 * z.norm()).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_matches_gram_route() {
        let raw = [
            [c(0.2, 0.5), c(-0.1, 0.3), c(0.7, 0.0)],
            [c(0.4, -0.2), c(0.0, 0.1), c(-0.6, 0.2)],
            [c(0.3, 0.3), c(0.9, -0.4), c(0.1, 0.0)],
        ];
        let a = ComplexMatrix::from_fn(3, |j, k| raw[j][k]);
        let direct = trace_norm(&a).unwrap();
        let gram = a.adjoint().mul(&a);
        let eig = eig_hermitian(&gram).unwrap();
        let oracle: f64 = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).sum();
        assert!((direct - oracle).abs() < 1e-10);
    }

    #[test]
    fn entropy_values() {
        assert!(shannon_entropy_bits(&[1.0, 0.0]).abs() < 1e-15);
        assert!((shannon_entropy_bits(&[0.5, 0.5]) - 1.0).abs() < 1e-12);
        let s = shannon_entropy_bits(&[0.75, 0.25]);
        assert!((s - 0.8112781244591328).abs() < 1e-9);
    }

    #[test]
    fn solve_real_small_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve_real(&a, &[3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12);
        assert!((x[1] - 1.4).abs() < 1e-12);
    }
}
