//! Potential → PMS → Hamiltonian → eigenpairs, plus centred blocks for
//! high levels and convergence tables against a larger reference run.

use std::ops::Range;

use rayon::prelude::*;

use crate::eigen::{diagonalize, EigenSolution};
use crate::error::{Error, Result};
use crate::oscbasis::{assemble_hamiltonian, BasisConfig};
use crate::pms::{pms_optimize, PmsOptions, PmsResult};
use crate::potential::PolynomialPotential;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions<T> {
    pub pms: PmsOptions<T>,
}

impl<T: Real> Default for SolveOptions<T> {
    fn default() -> Self {
        Self {
            pms: PmsOptions::default(),
        }
    }
}

impl<T: Real> SolveOptions<T> {
    pub fn with_sigma(mut self, on: bool) -> Self {
        self.pms.optimize_sigma = on;
        self
    }

    pub fn with_pms(mut self, pms: PmsOptions<T>) -> Self {
        self.pms = pms;
        self
    }
}

/// One line of a convergence table: level `level` computed with a block of
/// dimension `dim`, compared with the reference run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow<T> {
    pub dim: usize,
    pub level: usize,
    pub energy: T,
    pub reference: T,
    pub delta: T,
    pub omega: T,
}

#[derive(Debug, Clone)]
pub struct SpectrumReport<T> {
    pub pms: PmsResult<T>,
    pub solution: EigenSolution<T>,
    /// Global quantum numbers the caller asked for.
    pub requested_levels: Range<usize>,
    pub convergence: Option<Vec<ConvergenceRow<T>>>,
}

impl<T: Real> SpectrumReport<T> {
    /// Global quantum numbers covered by the diagonalised block.
    pub fn levels(&self) -> Range<usize> {
        self.solution.config().indices()
    }

    /// Energy of global level n, if the block contains it.
    pub fn energy(&self, n: usize) -> Option<T> {
        let c = self.solution.config().center;
        n.checked_sub(c)
            .and_then(|k| self.solution.energies().get(k).copied())
    }

    /// (level, energy) pairs for the requested range.
    pub fn requested(&self) -> Vec<(usize, T)> {
        self.requested_levels
            .clone()
            .filter_map(|n| self.energy(n).map(|e| (n, e)))
            .collect()
    }
}

fn solve_block<T: Real>(
    pot: &PolynomialPotential<T>,
    dim: usize,
    opts: &SolveOptions<T>,
) -> Result<(PmsResult<T>, EigenSolution<T>)> {
    let pms = pms_optimize(pot, dim, &opts.pms)?;
    let cfg = BasisConfig::new(dim, pms.omega)?
        .with_sigma(pms.sigma)
        .with_center(opts.pms.center);
    let h = assemble_hamiltonian(pot, &cfg)?;
    Ok((pms, diagonalize(&h)?))
}

/// The first N levels (or the block starting at `opts.pms.center`).
pub fn solve_spectrum<T: Real>(
    pot: &PolynomialPotential<T>,
    dim: usize,
    opts: &SolveOptions<T>,
) -> Result<SpectrumReport<T>> {
    let (pms, solution) = solve_block(pot, dim, opts)?;
    Ok(SpectrumReport {
        pms,
        requested_levels: solution.config().indices(),
        solution,
        convergence: None,
    })
}

/// Block of N basis states starting at max(0, target − N/2), with PMS on
/// that block's own trace. The k-th eigenvalue is labelled center + k.
pub fn solve_centered<T: Real>(
    pot: &PolynomialPotential<T>,
    target: usize,
    dim: usize,
    opts: &SolveOptions<T>,
) -> Result<SpectrumReport<T>> {
    if dim == 0 {
        return Err(Error::InvalidBasis("dimension must be at least 1".into()));
    }
    let mut o = *opts;
    o.pms.center = target.saturating_sub(dim / 2);
    let (pms, solution) = solve_block(pot, dim, &o)?;
    Ok(SpectrumReport {
        pms,
        solution,
        requested_levels: target..target + 1,
        convergence: None,
    })
}

/// Δ(N) = |E_n^{(N)} − E_n^{(N_ref)}| for every level and every N with
/// level < N. `n_ref` defaults to 2.5× the largest N. The returned report
/// carries the reference run.
pub fn convergence_study<T: Real>(
    pot: &PolynomialPotential<T>,
    levels: &[usize],
    dims: &[usize],
    n_ref: Option<usize>,
    opts: &SolveOptions<T>,
) -> Result<SpectrumReport<T>> {
    let largest = dims
        .iter()
        .copied()
        .max()
        .ok_or_else(|| Error::InvalidArgument("empty list of dimensions".into()))?;
    let n_ref = n_ref.unwrap_or((largest * 5).div_ceil(2));
    if n_ref < largest {
        return Err(Error::InvalidArgument(format!(
            "reference dimension {n_ref} is below the largest dimension {largest}"
        )));
    }
    if let Some(&bad) = levels.iter().find(|&&l| l >= n_ref) {
        return Err(Error::InvalidArgument(format!(
            "level {bad} lies outside the reference block of {n_ref}"
        )));
    }
    let reference = solve_spectrum(pot, n_ref, opts)?;
    let runs: Vec<(usize, PmsResult<T>, EigenSolution<T>)> = dims
        .par_iter()
        .map(|&n| solve_block(pot, n, opts).map(|(p, s)| (n, p, s)))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (n, pms, sol) in &runs {
        for &level in levels {
            if level >= *n {
                continue;
            }
            let energy = sol.energies()[level];
            let reference_energy = reference.solution.energies()[level];
            rows.push(ConvergenceRow {
                dim: *n,
                level,
                energy,
                reference: reference_energy,
                delta: (energy - reference_energy).abs(),
                omega: pms.omega,
            });
        }
    }
    let lo = levels.iter().copied().min().unwrap_or(0);
    let hi = levels.iter().copied().max().map_or(0, |l| l + 1);
    Ok(SpectrumReport {
        requested_levels: lo..hi,
        convergence: Some(rows),
        ..reference
    })
}
