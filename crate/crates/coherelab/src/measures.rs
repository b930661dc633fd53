//! State-level coherence measures: the baselines (l1, relative entropy,
//! trace distance) and the visibility-derived family obtained by explicit
//! optimization over phases, partitions, and diagonal Hamiltonians.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{
    eig_hermitian, shannon_entropy_bits, solve_real, spectral_norm, trace_norm, ComplexMatrix,
    HermitianMatrix, C64,
};
use crate::optim::{golden_section_max, nelder_mead};
use crate::quantum::{born_distribution, DensityMatrix, DiagonalHamiltonian, PhaseVector, Povm};

/// Eigenvalue pairs with lambda_j + lambda_k below this contribute zero to
/// the Fisher quotient (the numerator vanishes on the kernel-kernel block).
pub const FISHER_KERNEL_CUTOFF: f64 = 1e-12;

const NABLA2_RESTARTS: usize = 20;

/// Bipartition of the path labels {1..d} with derived diagonal projectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Partition {
    pub s_plus: Vec<usize>,
    pub s_minus: Vec<usize>,
}

impl Partition {
    pub fn new(s_plus: Vec<usize>, s_minus: Vec<usize>) -> Result<Self> {
        if s_plus.iter().any(|j| s_minus.contains(j)) {
            return Err(Error::InvalidInput("partition subsets overlap".into()));
        }
        Ok(Partition { s_plus, s_minus })
    }

    pub fn projector_plus(&self, dim: usize) -> ComplexMatrix {
        Self::projector(&self.s_plus, dim)
    }

    pub fn projector_minus(&self, dim: usize) -> ComplexMatrix {
        Self::projector(&self.s_minus, dim)
    }

    fn projector(set: &[usize], dim: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim);
        for &j in set {
            m[(j, j)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Sign vector of H = Pi_plus - Pi_minus.
    pub fn sign_vector(&self, dim: usize) -> Vec<f64> {
        let mut h = vec![0.0; dim];
        for &j in &self.s_plus {
            h[j] = 1.0;
        }
        for &j in &self.s_minus {
            h[j] = -1.0;
        }
        h
    }
}

/// Optimizer witness attached to a measure value so it can be re-evaluated.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    None,
    Phases { alpha: Vec<f64> },
    Partition { s_plus: Vec<usize>, s_minus: Vec<usize> },
    Hamiltonian { h: Vec<f64> },
    DiagonalState { probs: Vec<f64> },
    ProjectorPair { j: usize, k: usize, t: f64 },
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub restarts: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureResult {
    pub value: f64,
    pub witness: Witness,
    pub diagnostics: Diagnostics,
}

/// C_l1(rho) = sum_{j != k} |rho_jk|.
pub fn c_l1(rho: &DensityMatrix) -> f64 {
    let d = rho.dim();
    let mut total = 0.0;
    for j in 0..d {
        for k in 0..d {
            if j != k {
                total += rho.entry(j, k).norm();
            }
        }
    }
    total
}

/// Relative entropy of coherence C_r(rho) = S(Delta(rho)) - S(rho), in bits.
pub fn c_rel_ent(rho: &DensityMatrix) -> Result<f64> {
    let diag = shannon_entropy_bits(
        &rho.diagonal().iter().map(|&p| p.max(0.0)).collect::<Vec<_>>(),
    );
    Ok((diag - rho.entropy_bits()?).max(0.0))
}

fn half_trace_distance(rho: &DensityMatrix, diag: &[f64]) -> f64 {
    let delta = rho.matrix().sub(&ComplexMatrix::diag_real(diag));
    0.5 * trace_norm(&delta).expect("Hermitian difference")
}

fn softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|&v| (v - m).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Trace distance of coherence C_tr(rho) = min over diagonal states sigma of
/// half the trace norm of rho - sigma, by multi-start downhill simplex on the
/// probability simplex (softmax parameterization).
pub fn c_trace_dist(rho: &DensityMatrix) -> MeasureResult {
    c_trace_dist_with(rho, 10)
}

pub fn c_trace_dist_with(rho: &DensityMatrix, starts: usize) -> MeasureResult {
    let d = rho.dim();
    let objective = |x: &[f64]| half_trace_distance(rho, &softmax(x));

    let mut rng = ChaCha8Rng::seed_from_u64(0x7aced157);
    let mut best_x: Vec<f64> = rho.diagonal().iter().map(|&p| (p + 1e-9).ln()).collect();
    let mut best_f = objective(&best_x);
    let mut total_iters = 0usize;
    for start in 0..starts {
        let x0: Vec<f64> = if start == 0 {
            best_x.clone()
        } else {
            (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()
        };
        let (x, f, iters) = nelder_mead(objective, &x0, 0.5, 2000, 1e-14);
        total_iters += iters;
        if f < best_f {
            best_f = f;
            best_x = x;
        }
    }
    // polish from the best point with a tight simplex
    let (x, f, iters) = nelder_mead(objective, &best_x, 1e-3, 2000, 1e-15);
    total_iters += iters;
    if f < best_f {
        best_f = f;
        best_x = x;
    }
    let sigma = softmax(&best_x);
    MeasureResult {
        value: best_f,
        witness: Witness::DiagonalState { probs: sigma },
        diagnostics: Diagnostics { iterations: total_iters, restarts: starts, residual: 0.0 },
    }
}

fn phase_displacement(rho: &DensityMatrix, free: &[f64]) -> f64 {
    let d = rho.dim();
    let mut alpha = free.to_vec();
    alpha.push(0.0);
    debug_assert_eq!(alpha.len(), d);
    let rotated = rho
        .apply_phases(&PhaseVector::new(alpha).expect("finite phases"))
        .expect("dims match");
    0.5 * trace_norm(&rotated.matrix().sub(rho.matrix())).expect("Hermitian difference")
}

/// C_max(rho) = max over alpha of half the trace norm of rho(alpha) - rho.
/// Coarse torus grid followed by downhill-simplex refinement from the best
/// grid points; the last phase is gauge-fixed to zero.
pub fn c_max(rho: &DensityMatrix) -> MeasureResult {
    c_max_with(rho, 1)
}

pub fn c_max_with(rho: &DensityMatrix, effort: u32) -> MeasureResult {
    let d = rho.dim();
    if d == 1 {
        return MeasureResult {
            value: 0.0,
            witness: Witness::Phases { alpha: vec![0.0] },
            diagnostics: Diagnostics::default(),
        };
    }
    let free = d - 1;
    let per_dim: usize = if d <= 3 || effort > 1 { 33 } else { 9 };
    let total = per_dim.pow(free as u32);

    // coarse scan, keeping the best few points as refinement seeds
    let n_seeds = (5 * effort as usize).min(total);
    let mut scored: Vec<(f64, Vec<f64>)> = Vec::with_capacity(total);
    for idx in 0..total {
        let mut point = vec![0.0; free];
        let mut rest = idx;
        for comp in point.iter_mut() {
            *comp = TAU * (rest % per_dim) as f64 / per_dim as f64;
            rest /= per_dim;
        }
        scored.push((phase_displacement(rho, &point), point));
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    scored.truncate(n_seeds);

    let mut best_val = scored[0].0;
    let mut best_point = scored[0].1.clone();
    let mut total_iters = 0usize;
    let step = TAU / (2.0 * per_dim as f64);
    for (_, seed) in &scored {
        let (x, neg, iters) =
            nelder_mead(|v| -phase_displacement(rho, v), seed, step, 800, 1e-13);
        total_iters += iters;
        if -neg > best_val {
            best_val = -neg;
            best_point = x;
        }
    }
    let mut alpha = best_point;
    alpha.push(0.0);
    MeasureResult {
        value: best_val,
        witness: Witness::Phases { alpha },
        diagnostics: Diagnostics {
            iterations: total_iters,
            restarts: n_seeds,
            residual: 0.0,
        },
    }
}

/// Robustness of coherence via the primal log-barrier method:
/// 1 + C_R(rho) = min sum_j t_j s.t. diag(t) >= rho.
pub fn robustness(rho: &DensityMatrix) -> Result<MeasureResult> {
    let d = rho.dim();
    let offdiag = rho.matrix().sub(&ComplexMatrix::diag_real(&rho.diagonal()));
    let lam_max = eig_hermitian(&offdiag)?
        .eigenvalues
        .first()
        .cloned()
        .unwrap_or(0.0)
        .max(0.0);
    let mut t: Vec<f64> = rho.diagonal().iter().map(|&r| r + lam_max + 0.1).collect();

    let slack = |t: &[f64]| ComplexMatrix::diag_real(t).sub(rho.matrix());
    let barrier = |t: &[f64]| -> Result<(f64, f64)> {
        // (objective value, min slack eigenvalue)
        let eig = eig_hermitian(&slack(t))?;
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let logdet: f64 = eig.eigenvalues.iter().map(|&l| l.max(1e-300).ln()).sum();
        Ok((t.iter().sum::<f64>() - logdet, min))
    };

    let mut mu = 1.0f64;
    let mut newton_total = 0usize;
    loop {
        for _ in 0..60 {
            newton_total += 1;
            let eig = eig_hermitian(&slack(&t))?;
            let v = &eig.eigenvectors;
            // S^{-1} = V diag(1/lambda) V^dagger
            let sinv = ComplexMatrix::from_fn(d, |j, k| {
                let mut acc = C64::new(0.0, 0.0);
                for (idx, &lam) in eig.eigenvalues.iter().enumerate() {
                    acc += v[(j, idx)] * v[(k, idx)].conj() / lam;
                }
                acc
            });
            let grad: Vec<f64> = (0..d).map(|j| 1.0 - mu * sinv[(j, j)].re).collect();
            let hess: Vec<Vec<f64>> = (0..d)
                .map(|j| (0..d).map(|k| mu * sinv[(j, k)].norm_sqr()).collect())
                .collect();
            let dir: Vec<f64> = solve_real(&hess, &grad)?.iter().map(|&x| -x).collect();
            let decrement: f64 = -grad.iter().zip(&dir).map(|(g, s)| g * s).sum::<f64>();
            if decrement * 0.5 < 1e-11 {
                break;
            }
            // backtracking line search on the barrier objective
            let (phi0, _) = barrier_scaled(&barrier, &t, mu)?;
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<f64> = t.iter().zip(&dir).map(|(x, s)| x + step * s).collect();
                if let Ok((phi, min)) = barrier_scaled(&barrier, &trial, mu) {
                    if min > 0.0 && phi < phi0 - 1e-4 * step * decrement {
                        t = trial;
                        accepted = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if (d as f64) * mu < 1e-8 {
            break;
        }
        mu *= 0.1;
        if newton_total > 5000 {
            return Err(Error::NumericalFailure(format!(
                "robustness barrier did not converge after {newton_total} Newton steps"
            )));
        }
    }

    let value = (t.iter().sum::<f64>() - 1.0).max(0.0);
    Ok(MeasureResult {
        value,
        witness: Witness::DiagonalState { probs: t },
        diagnostics: Diagnostics {
            iterations: newton_total,
            restarts: 0,
            residual: d as f64 * mu,
        },
    })
}

fn barrier_scaled(
    barrier: &impl Fn(&[f64]) -> Result<(f64, f64)>,
    t: &[f64],
    mu: f64,
) -> Result<(f64, f64)> {
    let (raw, min) = barrier(t)?;
    // objective + mu-scaled log-barrier: sum t - mu logdet S
    let logdet_part = t.iter().sum::<f64>() - raw; // = logdet S
    Ok((t.iter().sum::<f64>() - mu * logdet_part, min))
}

/// C_guess(rho) = C_R(rho) / d.
pub fn c_guess(rho: &DensityMatrix) -> Result<MeasureResult> {
    let mut r = robustness(rho)?;
    r.value /= rho.dim() as f64;
    Ok(r)
}

fn enumerate_full_partitions(d: usize) -> impl Iterator<Item = Partition> {
    // fix path 0 in S_plus; global sign flip leaves both objectives invariant
    (0..(1usize << (d - 1))).map(move |mask| {
        let mut s_plus = vec![0];
        let mut s_minus = Vec::new();
        for j in 1..d {
            if mask & (1 << (j - 1)) != 0 {
                s_plus.push(j);
            } else {
                s_minus.push(j);
            }
        }
        Partition { s_plus, s_minus }
    })
}

/// C_nabla^inf(rho) = max over full partitions of 2 ||Pi_+ rho Pi_-||_1.
pub fn c_nabla_inf(rho: &DensityMatrix) -> Result<MeasureResult> {
    let d = rho.dim();
    if d > 20 {
        return Err(Error::Unsupported(format!(
            "partition enumeration not supported for d = {d} > 20"
        )));
    }
    let mut best = 0.0f64;
    let mut best_partition = Partition { s_plus: (0..d).collect(), s_minus: vec![] };
    for partition in enumerate_full_partitions(d) {
        let block = partition
            .projector_plus(d)
            .mul(rho.matrix())
            .mul(&partition.projector_minus(d));
        let value = 2.0 * trace_norm(&block)?;
        if value > best {
            best = value;
            best_partition = partition;
        }
    }
    Ok(MeasureResult {
        value: best,
        witness: Witness::Partition {
            s_plus: best_partition.s_plus,
            s_minus: best_partition.s_minus,
        },
        diagnostics: Diagnostics::default(),
    })
}

/// Objective of C_nabla: half the trace norm of [rho, diag(h)], degree-1
/// homogeneous in h, evaluated on the normalized direction.
fn nabla_objective(rho: &DensityMatrix, h: &[f64]) -> f64 {
    let norm: f64 = h.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < 1e-12 {
        return 0.0;
    }
    let scaled: Vec<f64> = h.iter().map(|x| x / norm).collect();
    let comm = rho.matrix().commutator(&ComplexMatrix::diag_real(&scaled));
    0.5 * trace_norm(&comm).expect("commutator is finite")
}

/// C_nabla^2(rho): maximize half ||[rho, diag(h)]||_1 over the unit sphere
/// ||h||_2 = 1 by multi-restart downhill simplex.
pub fn c_nabla_2(rho: &DensityMatrix) -> Result<MeasureResult> {
    c_nabla_2_with(rho, NABLA2_RESTARTS)
}

pub fn c_nabla_2_with(rho: &DensityMatrix, restarts: usize) -> Result<MeasureResult> {
    let d = rho.dim();
    let inf = c_nabla_inf(rho)?;
    let sign_seed = match &inf.witness {
        Witness::Partition { s_plus, s_minus } => {
            Partition { s_plus: s_plus.clone(), s_minus: s_minus.clone() }
                .sign_vector(d)
                .iter()
                .map(|x| x / (d as f64).sqrt())
                .collect()
        }
        _ => vec![1.0 / (d as f64).sqrt(); d],
    };

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ab1e);
    let mut best_h: Vec<f64> = sign_seed;
    let mut best = nabla_objective(rho, &best_h);
    let mut total_iters = 0usize;
    for start in 0..restarts {
        let x0: Vec<f64> = if start == 0 {
            best_h.clone()
        } else {
            let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-6);
            v.into_iter().map(|x| x / n).collect()
        };
        let (x, neg, iters) = nelder_mead(|v| -nabla_objective(rho, v), &x0, 0.3, 600, 1e-13);
        total_iters += iters;
        if -neg > best {
            best = -neg;
            best_h = x;
        }
    }
    let (x, neg, iters) = nelder_mead(|v| -nabla_objective(rho, v), &best_h, 1e-3, 600, 1e-14);
    total_iters += iters;
    if -neg > best {
        best = -neg;
        best_h = x;
    }
    let norm = best_h.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    Ok(MeasureResult {
        value: best,
        witness: Witness::Hamiltonian { h: best_h.iter().map(|x| x / norm).collect() },
        diagnostics: Diagnostics { iterations: total_iters, restarts, residual: 0.0 },
    })
}

/// Measurement-optimized Fisher information for the phase family
/// exp(-itH) rho exp(itH) with diagonal H:
/// F = 2 sum_{j<k} (lambda_j - lambda_k)^2 / (lambda_j + lambda_k) |<e_j|H|e_k>|^2,
/// the normalization in which a mixed qubit with H = sigma_z gives
/// 8 |rho_12|^2 and a pure state gives twice the variance of H.
pub fn fisher_info(rho: &DensityMatrix, h: &DiagonalHamiltonian) -> Result<f64> {
    if h.dim() != rho.dim() {
        return Err(Error::InvalidInput("Hamiltonian dimension mismatch".into()));
    }
    let eig = rho.eig()?;
    let d = rho.dim();
    let lam: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let v = &eig.eigenvectors;
    let mut total = 0.0;
    for j in 0..d {
        for k in 0..d {
            let denom = lam[j] + lam[k];
            if denom <= FISHER_KERNEL_CUTOFF {
                continue;
            }
            let mut elem = C64::new(0.0, 0.0);
            for m in 0..d {
                elem += v[(m, j)].conj() * h.entries()[m] * v[(m, k)];
            }
            total += (lam[j] - lam[k]).powi(2) / denom * elem.norm_sqr();
        }
    }
    Ok(total)
}

fn enumerate_sign_patterns(d: usize) -> Vec<Vec<f64>> {
    // {+1, -1, 0}^d minus the zero vector, up to global sign
    let mut out = Vec::new();
    let total = 3usize.pow(d as u32);
    'outer: for idx in 0..total {
        let mut rest = idx;
        let mut h = vec![0.0; d];
        for comp in h.iter_mut() {
            *comp = match rest % 3 {
                0 => 0.0,
                1 => 1.0,
                _ => -1.0,
            };
            rest /= 3;
        }
        for &x in &h {
            if x != 0.0 {
                if x < 0.0 {
                    continue 'outer; // global-sign duplicate
                }
                break;
            }
        }
        if h.iter().any(|&x| x != 0.0) {
            out.push(h);
        }
    }
    out
}

/// C_F^inf(rho): brute force over H = Pi_+ - Pi_- for disjoint subsets.
pub fn c_fisher_inf(rho: &DensityMatrix) -> Result<MeasureResult> {
    let d = rho.dim();
    if d > 12 {
        return Err(Error::Unsupported(format!(
            "sign-pattern enumeration not supported for d = {d} > 12"
        )));
    }
    let mut best = 0.0f64;
    let mut best_h = vec![0.0; d];
    for h in enumerate_sign_patterns(d) {
        let value = fisher_info(rho, &DiagonalHamiltonian::new(h.clone())?)?;
        if value > best {
            best = value;
            best_h = h;
        }
    }
    let s_plus: Vec<usize> = (0..d).filter(|&j| best_h[j] > 0.0).collect();
    let s_minus: Vec<usize> = (0..d).filter(|&j| best_h[j] < 0.0).collect();
    Ok(MeasureResult {
        value: best,
        witness: Witness::Partition { s_plus, s_minus },
        diagnostics: Diagnostics::default(),
    })
}

/// Quadratic form of the Fisher objective in the diagonal of H:
/// F(h) = h^T Q h.
fn fisher_quadratic_form(rho: &DensityMatrix) -> Result<Vec<Vec<f64>>> {
    let eig = rho.eig()?;
    let d = rho.dim();
    let lam: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    let v = &eig.eigenvectors;
    let mut q = vec![vec![0.0; d]; d];
    for j in 0..d {
        for k in 0..d {
            let denom = lam[j] + lam[k];
            if denom <= FISHER_KERNEL_CUTOFF {
                continue;
            }
            let coeff = (lam[j] - lam[k]).powi(2) / denom;
            if coeff == 0.0 {
                continue;
            }
            let w: Vec<C64> = (0..d).map(|m| v[(m, j)].conj() * v[(m, k)]).collect();
            for m in 0..d {
                for n in 0..d {
                    q[m][n] += coeff * (w[m] * w[n].conj()).re;
                }
            }
        }
    }
    Ok(q)
}

fn top_eigenpair_real(q: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let d = q.len();
    let m = ComplexMatrix::from_fn(d, |j, k| C64::new(0.5 * (q[j][k] + q[k][j]), 0.0));
    let eig = eig_hermitian(&m)?;
    let vec: Vec<f64> = (0..d).map(|j| eig.eigenvectors[(j, 0)].re).collect();
    let norm = vec.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    Ok((eig.eigenvalues[0], vec.into_iter().map(|x| x / norm).collect()))
}

/// C_F^2(rho): the Fisher objective is a quadratic form in h, so the maximum
/// over ||h||_2 = 1 is its top eigenvalue.
pub fn c_fisher_2(rho: &DensityMatrix) -> Result<MeasureResult> {
    let q = fisher_quadratic_form(rho)?;
    let (value, h) = top_eigenpair_real(&q)?;
    Ok(MeasureResult {
        value: value.max(0.0),
        witness: Witness::Hamiltonian { h },
        diagnostics: Diagnostics::default(),
    })
}

/// Wigner-Yanase skew information I_WY(rho, H) = tr rho H^2 - tr sqrt(rho) H sqrt(rho) H
/// for diagonal H, via the scalar form
/// sum_m rho_mm h_m^2 - sum_mn |(sqrt rho)_mn|^2 h_m h_n.
pub fn wigner_yanase(rho: &DensityMatrix, h: &DiagonalHamiltonian) -> Result<f64> {
    if h.dim() != rho.dim() {
        return Err(Error::InvalidInput("Hamiltonian dimension mismatch".into()));
    }
    let root = rho.sqrt()?;
    let d = rho.dim();
    let hv = h.entries();
    let mut value = 0.0;
    for m in 0..d {
        value += rho.entry(m, m).re * hv[m] * hv[m];
        for n in 0..d {
            value -= root[(m, n)].norm_sqr() * hv[m] * hv[n];
        }
    }
    Ok(if value > -1e-12 { value.max(0.0) } else { value })
}

/// C_dxi^inf(rho) = max over full partitions of 4 tr sqrt(rho) Pi_+ sqrt(rho) Pi_-.
pub fn c_chernoff_inf(rho: &DensityMatrix) -> Result<MeasureResult> {
    let d = rho.dim();
    if d > 20 {
        return Err(Error::Unsupported(format!(
            "partition enumeration not supported for d = {d} > 20"
        )));
    }
    let root = rho.sqrt()?;
    let mut best = 0.0f64;
    let mut best_partition = Partition { s_plus: (0..d).collect(), s_minus: vec![] };
    for partition in enumerate_full_partitions(d) {
        let mut value = 0.0;
        for &m in &partition.s_plus {
            for &n in &partition.s_minus {
                value += 4.0 * root[(m, n)].norm_sqr();
            }
        }
        if value > best {
            best = value;
            best_partition = partition;
        }
    }
    Ok(MeasureResult {
        value: best,
        witness: Witness::Partition {
            s_plus: best_partition.s_plus,
            s_minus: best_partition.s_minus,
        },
        diagnostics: Diagnostics::default(),
    })
}

/// Quadratic form of I_WY(rho, diag(h)) in h.
fn wigner_yanase_quadratic_form(rho: &DensityMatrix) -> Result<Vec<Vec<f64>>> {
    let root = rho.sqrt()?;
    let d = rho.dim();
    let mut q = vec![vec![0.0; d]; d];
    for m in 0..d {
        q[m][m] += rho.entry(m, m).re;
        for n in 0..d {
            q[m][n] -= root[(m, n)].norm_sqr();
        }
    }
    Ok(q)
}

/// C_dxi^2(rho) = max of I_WY(rho, diag(h)) over ||h||_2 = 1. The objective
/// is exactly quadratic in h, so the maximum is the top eigenvalue of its
/// quadratic form. A search over rank-one projector pairs
/// H = sqrt(t) |j><j| - sqrt(1-t) |k><k| runs alongside as a lower bound;
/// for qubits it is tight, but for d >= 3 the sphere optimum can have a
/// higher-rank positive part and strictly beat every pair. The gap is
/// reported in diagnostics.residual.
pub fn c_chernoff_2(rho: &DensityMatrix) -> Result<MeasureResult> {
    let root = rho.sqrt()?;
    let d = rho.dim();
    let a: Vec<f64> = (0..d)
        .map(|m| rho.entry(m, m).re - root[(m, m)].norm_sqr())
        .collect();

    let pair_value = |j: usize, k: usize, t: f64| -> f64 {
        t * a[j] + (1.0 - t) * a[k] + 2.0 * (t * (1.0 - t)).sqrt() * root[(j, k)].norm_sqr()
    };

    let mut best = 0.0f64;
    let mut witness = Witness::ProjectorPair { j: 0, k: 0, t: 1.0 };
    // single-projector candidates (t in {0, 1})
    for j in 0..d {
        if a[j] > best {
            best = a[j];
            witness = Witness::ProjectorPair { j, k: j, t: 1.0 };
        }
    }
    for j in 0..d {
        for k in 0..d {
            if j == k {
                continue;
            }
            let (t_gold, v_gold) = golden_section_max(|t| pair_value(j, k, t), 0.0, 1.0, 1e-10);
            let mut local_best = (v_gold, t_gold);
            // safeguard grid in case the profile is not unimodal
            for step in 0..=100 {
                let t = step as f64 / 100.0;
                let v = pair_value(j, k, t);
                if v > local_best.0 {
                    local_best = (v, t);
                }
            }
            if local_best.0 > best {
                best = local_best.0;
                witness = Witness::ProjectorPair { j, k, t: local_best.1 };
            }
        }
    }

    let q = wigner_yanase_quadratic_form(rho)?;
    let (eig_value, eig_h) = top_eigenpair_real(&q)?;
    let eig_value = eig_value.max(0.0);
    let pair_gap = eig_value - best;
    if pair_gap > 1e-9 {
        return Ok(MeasureResult {
            value: eig_value,
            witness: Witness::Hamiltonian { h: eig_h },
            diagnostics: Diagnostics { iterations: 0, restarts: 0, residual: pair_gap },
        });
    }
    Ok(MeasureResult {
        value: best.max(eig_value),
        witness,
        diagnostics: Diagnostics {
            iterations: 0,
            restarts: 0,
            residual: pair_gap.max(0.0),
        },
    })
}

/// Holevo upper bound on C_I: the relative entropy of coherence.
pub fn c_i_upper(rho: &DensityMatrix) -> Result<f64> {
    c_rel_ent(rho)
}

/// Ensemble of phase-orbit states {(weight, rho_i)}.
#[derive(Clone, Debug)]
pub struct Ensemble {
    entries: Vec<(f64, DensityMatrix)>,
}

impl Ensemble {
    pub fn new(entries: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("empty ensemble".into()));
        }
        let total: f64 = entries.iter().map(|(w, _)| w).sum();
        if entries.iter().any(|(w, _)| *w < -1e-12) || (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput("ensemble weights must sum to 1".into()));
        }
        let dim = entries[0].1.dim();
        let reference = entries[0].1.diagonal();
        for (_, state) in &entries {
            if state.dim() != dim {
                return Err(Error::InvalidInput("ensemble dimension mismatch".into()));
            }
            // phase-orbit members share the diagonal
            for (a, b) in state.diagonal().iter().zip(&reference) {
                if (a - b).abs() > 1e-8 {
                    return Err(Error::InvalidInput(
                        "ensemble states are not phase-orbit members (diagonals differ)".into(),
                    ));
                }
            }
        }
        Ok(Ensemble { entries })
    }

    pub fn entries(&self) -> &[(f64, DensityMatrix)] {
        &self.entries
    }
}

fn mutual_information_bits(joint: &[Vec<f64>]) -> f64 {
    let rows: Vec<f64> = joint.iter().map(|r| r.iter().sum()).collect();
    let cols_len = joint[0].len();
    let cols: Vec<f64> = (0..cols_len)
        .map(|k| joint.iter().map(|r| r[k]).sum())
        .collect();
    let mut info = 0.0;
    for (i, row) in joint.iter().enumerate() {
        for (k, &p) in row.iter().enumerate() {
            if p > 1e-300 {
                info += p * (p / (rows[i] * cols[k])).log2();
            }
        }
    }
    info.max(0.0)
}

/// Certified lower bound on C_I: Shannon mutual information of the given
/// ensemble measured with the given POVM.
pub fn c_i_lower(rho: &DensityMatrix, ensemble: &Ensemble, povm: &Povm) -> Result<f64> {
    if povm.dim() != rho.dim() {
        return Err(Error::InvalidInput("POVM dimension mismatch".into()));
    }
    let joint: Vec<Vec<f64>> = ensemble
        .entries()
        .iter()
        .map(|(w, state)| {
            let probs = born_distribution(state, &PhaseVector::zero(rho.dim()), povm)?;
            Ok(probs.into_iter().map(|p| w * p).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(mutual_information_bits(&joint))
}

/// Default ensemble and measurement for the C_I lower bound.
///
/// For qubits: the binary ensemble {(1/2, rho), (1/2, sigma_z rho sigma_z)}
/// measured in the eigenbasis of rho_0 - rho_1. For larger d: the phase
/// orbit at the d equidistributed settings, measured in the Fourier basis.
pub fn default_lower_bound_setup(rho: &DensityMatrix) -> Result<(Ensemble, Povm)> {
    let d = rho.dim();
    if d == 2 {
        let flipped = rho.apply_phases(&PhaseVector::new(vec![0.0, std::f64::consts::PI])?)?;
        let diff = rho.matrix().sub(flipped.matrix());
        let eig = eig_hermitian(&diff)?;
        let basis: Vec<Vec<C64>> = (0..2).map(|k| eig.eigenvectors.column(k)).collect();
        let povm = Povm::from_basis(&basis)?;
        let ensemble = Ensemble::new(vec![(0.5, rho.clone()), (0.5, flipped)])?;
        Ok((ensemble, povm))
    } else {
        let perm: Vec<usize> = (0..d).collect();
        let h = PhaseVector::equidistributed_generator(&perm)?;
        let entries = (1..=d)
            .map(|j| Ok((1.0 / d as f64, rho.apply_phases(&h.scaled(j as f64))?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((Ensemble::new(entries)?, Povm::fourier(d)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormSelector {
    Two,
    Inf,
}

/// Report of the necessary-condition checks for membership in the commutator
/// set C_p = { (1/2i)[H, B] : H diagonal, ||H||_p <= 1, -1 <= B <= 1 }.
/// A pass does not certify membership.
#[derive(Clone, Debug, Serialize)]
pub struct CommutatorSetReport {
    pub zero_diagonal: bool,
    pub max_diagonal_abs: f64,
    pub norm_within_bound: bool,
    pub norm_value: f64,
    pub norm: NormSelector,
}

pub fn commutator_set_membership_check(
    x: &HermitianMatrix,
    norm: NormSelector,
) -> Result<CommutatorSetReport> {
    let d = x.dim();
    let max_diagonal_abs = (0..d).map(|j| x[(j, j)].norm()).fold(0.0, f64::max);
    let norm_value = match norm {
        NormSelector::Two => x.frobenius(),
        NormSelector::Inf => spectral_norm(x)?,
    };
    Ok(CommutatorSetReport {
        zero_diagonal: max_diagonal_abs <= 1e-10,
        max_diagonal_abs,
        norm_within_bound: norm_value <= 1.0 + 1e-10,
        norm_value,
        norm,
    })
}
