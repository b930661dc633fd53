//! Interference-pattern grids P(omega | alpha) and visibility functionals
//! evaluated at the distribution level.

use std::f64::consts::TAU;
use std::io::Write;

use crate::error::{Error, Result};
use crate::numerics::{eig_hermitian, ComplexMatrix};
use crate::quantum::{born_distribution, DensityMatrix, DiagonalHamiltonian, PhaseVector, Povm};

/// Central finite-difference step for derivative cross-checks.
pub const FD_STEP: f64 = 1e-5;

/// Sampling grid over the phase torus. The last phase is gauge-fixed to zero;
/// only differences of phases are observable.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGrid {
    dim: usize,
    points: Vec<PhaseVector>,
}

impl PhaseGrid {
    pub fn from_points(dim: usize, points: Vec<PhaseVector>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidInput("empty phase grid".into()));
        }
        if points.iter().any(|p| p.dim() != dim) {
            return Err(Error::InvalidInput("grid point dimension mismatch".into()));
        }
        Ok(PhaseGrid { dim, points })
    }

    /// Uniform Cartesian grid over the (d-1)-torus with alpha_d = 0.
    pub fn cartesian(dim: usize, per_dim: usize) -> Result<Self> {
        if dim == 0 || per_dim == 0 {
            return Err(Error::InvalidInput("grid parameters must be positive".into()));
        }
        let free = dim - 1;
        let total = per_dim.pow(free as u32);
        let mut points = Vec::with_capacity(total);
        for idx in 0..total {
            let mut components = vec![0.0; dim];
            let mut rest = idx;
            for comp in components.iter_mut().take(free) {
                *comp = TAU * (rest % per_dim) as f64 / per_dim as f64;
                rest /= per_dim;
            }
            points.push(PhaseVector::new(components)?);
        }
        Ok(PhaseGrid { dim, points })
    }

    /// One-parameter sweep of a single phase component, all others zero.
    pub fn axis_sweep(dim: usize, axis: usize, n: usize) -> Result<Self> {
        if axis >= dim {
            return Err(Error::InvalidInput(format!(
                "sweep axis {axis} out of range for dimension {dim}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidInput("grid must be nonempty".into()));
        }
        let points = (0..n)
            .map(|i| {
                let mut components = vec![0.0; dim];
                components[axis] = TAU * i as f64 / n as f64;
                PhaseVector::new(components)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PhaseGrid { dim, points })
    }

    /// 33 points per free dimension for d <= 3, 9 points for larger d.
    pub fn default_for_dim(dim: usize) -> Result<Self> {
        let per_dim = if dim <= 3 { 33 } else { 9 };
        Self::cartesian(dim, per_dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[PhaseVector] {
        &self.points
    }

    pub fn translated(&self, shift: &PhaseVector) -> Result<Self> {
        let points = self
            .points
            .iter()
            .map(|p| p.add(shift))
            .collect::<Result<Vec<_>>>()?;
        PhaseGrid::from_points(self.dim, points)
    }
}

/// Sampled conditional distribution P(omega | alpha) over a phase grid.
#[derive(Clone, Debug)]
pub struct PatternGrid {
    pub grid: PhaseGrid,
    pub labels: Vec<String>,
    pub table: Vec<Vec<f64>>,
}

impl PatternGrid {
    /// CSV export: `alpha_1,...,alpha_d,p_omega1,...` with 12 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        let d = self.grid.dim();
        let mut header: Vec<String> = (1..=d).map(|j| format!("alpha_{j}")).collect();
        header.extend(self.labels.iter().map(|l| format!("p_{l}")));
        writeln!(w, "{}", header.join(","))?;
        for (point, row) in self.grid.points().iter().zip(&self.table) {
            let mut fields: Vec<String> =
                point.as_slice().iter().map(|x| format!("{x:.11e}")).collect();
            fields.extend(row.iter().map(|x| format!("{x:.11e}")));
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

/// Evaluate the Born response at every grid point.
pub fn sample_pattern(rho: &DensityMatrix, povm: &Povm, grid: &PhaseGrid) -> Result<PatternGrid> {
    if grid.dim() != rho.dim() {
        return Err(Error::InvalidInput("grid dimension mismatch".into()));
    }
    let table = grid
        .points()
        .iter()
        .map(|alpha| born_distribution(rho, alpha, povm))
        .collect::<Result<Vec<_>>>()?;
    Ok(PatternGrid {
        grid: grid.clone(),
        labels: povm.labels().to_vec(),
        table,
    })
}

/// V_max on a sampled pattern: largest total-variation distance between the
/// responses at two grid points.
pub fn v_max_on_grid(pattern: &PatternGrid) -> f64 {
    let rows = &pattern.table;
    let mut best = 0.0f64;
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            let tv: f64 = rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                * 0.5;
            best = best.max(tv);
        }
    }
    best
}

/// Guessing bias for equidistributed phases with explicit settings.
///
/// `assignment[i]` is the class j in 1..=d that outcome i of the POVM votes
/// for; the bias is -1/d + (1/d) sum_j P(Omega_j | alpha_0 + j h_perm).
pub fn v_guess_on_settings(
    rho: &DensityMatrix,
    povm: &Povm,
    alpha0: &PhaseVector,
    perm: &[usize],
    assignment: &[usize],
) -> Result<f64> {
    let d = rho.dim();
    if assignment.len() != povm.len() {
        return Err(Error::InvalidInput(
            "assignment length must match POVM outcome count".into(),
        ));
    }
    if assignment.iter().any(|&j| j == 0 || j > d) {
        return Err(Error::InvalidInput(format!(
            "assignment classes must lie in 1..={d}"
        )));
    }
    let h = PhaseVector::equidistributed_generator(perm)?;
    let mut total = 0.0;
    for j in 1..=d {
        let setting = alpha0.add(&h.scaled(j as f64))?;
        let probs = born_distribution(rho, &setting, povm)?;
        let class_prob: f64 = probs
            .iter()
            .zip(assignment)
            .filter(|(_, &cls)| cls == j)
            .map(|(p, _)| p)
            .sum();
        total += class_prob;
    }
    Ok(-1.0 / d as f64 + total / d as f64)
}

fn check_effect(m0: &ComplexMatrix) -> Result<()> {
    let eig = eig_hermitian(m0)?;
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min < -1e-9 || max > 1.0 + 1e-9 {
        return Err(Error::InvalidInput(format!(
            "effect eigenvalues [{min}, {max}] outside [0, 1]"
        )));
    }
    Ok(())
}

/// Analytic derivative of I(alpha + t h) at t = 0 via the commutator formula
/// dI/dt = -i tr([rho(alpha), H] M0).
pub fn directional_derivative(
    rho: &DensityMatrix,
    m0: &ComplexMatrix,
    alpha: &PhaseVector,
    h: &DiagonalHamiltonian,
) -> Result<f64> {
    if m0.dim() != rho.dim() || h.dim() != rho.dim() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    check_effect(m0)?;
    let rotated = rho.apply_phases(alpha)?;
    let comm = rotated.matrix().commutator(&h.matrix());
    let val = comm.mul(m0).trace();
    // -i * (purely imaginary trace) is real
    Ok(val.im)
}

/// Central finite-difference estimate of the same derivative.
pub fn directional_derivative_fd(
    rho: &DensityMatrix,
    m0: &ComplexMatrix,
    alpha: &PhaseVector,
    h: &DiagonalHamiltonian,
) -> Result<f64> {
    if m0.dim() != rho.dim() || h.dim() != rho.dim() {
        return Err(Error::InvalidInput("dimension mismatch".into()));
    }
    check_effect(m0)?;
    let intensity = |t: f64| -> Result<f64> {
        let step = PhaseVector::new(h.entries().iter().map(|&x| x * t).collect())?;
        let point = alpha.add(&step)?;
        Ok(rho.apply_phases(&point)?.matrix().mul(m0).trace().re)
    };
    Ok((intensity(FD_STEP)? - intensity(-FD_STEP)?) / (2.0 * FD_STEP))
}

/// Disjoint-outcome mixture of patterns on the same grid: rows q_i P_i
/// concatenated along the outcome axis.
pub fn mix_patterns(patterns: &[PatternGrid], weights: &[f64]) -> Result<PatternGrid> {
    if patterns.is_empty() || patterns.len() != weights.len() {
        return Err(Error::InvalidInput("patterns/weights mismatch".into()));
    }
    let total: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < -1e-12) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput("weights must form a probability vector".into()));
    }
    let grid = &patterns[0].grid;
    let mut labels: Vec<String> = Vec::new();
    for p in patterns {
        if &p.grid != grid {
            return Err(Error::InvalidInput("patterns must share one phase grid".into()));
        }
        for l in &p.labels {
            if labels.contains(l) {
                return Err(Error::InvalidInput(format!(
                    "outcome label '{l}' appears in more than one pattern"
                )));
            }
            labels.push(l.clone());
        }
    }
    let rows = grid.points().len();
    let mut table = vec![Vec::new(); rows];
    for (p, &w) in patterns.iter().zip(weights) {
        for (r, row) in p.table.iter().enumerate() {
            table[r].extend(row.iter().map(|x| w * x));
        }
    }
    Ok(PatternGrid { grid: grid.clone(), labels, table })
}
