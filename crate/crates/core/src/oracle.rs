//! Brute-force scattering solvers used to check the closed forms.
//!
//! Three routes, none of which touches the Chebyshev evaluator:
//!
//! * [`solve_full_system`] keeps the atomic amplitudes d_a, d_e as unknowns
//!   next to the photon amplitudes u_j, r and t (3N + 2 unknowns).
//! * [`solve_reduced_system`] eliminates the atoms into ε̃(E) first (N + 2 unknowns).
//! * [`solve_transfer_matrix`] multiplies the N real 2×2 cell matrices.
//!
//! The lead ansatz u_j = e^{ikj} + r e^{−ikj} (j ≤ 0), u_j = t e^{ikj}
//! (j > N) is substituted into the lead equations at j = 0 and j = N + 1,
//! which closes each system.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TransportError};
use crate::model::{effective_energy, ModelParams};

/// Systems whose 1-norm condition estimate exceeds this are reported singular.
pub const MAX_CONDITION: f64 = 1e14;

const RESCALE_NORM: f64 = 1e100;

/// Every amplitude of the one-excitation stationary state inside the doped region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InternalState {
    pub u: Vec<Complex64>,
    pub d_a: Vec<Complex64>,
    pub d_e: Vec<Complex64>,
    pub r: Complex64,
    pub t: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSolution {
    pub r: Complex64,
    pub t: Complex64,
    pub u: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferSolution {
    pub r: Complex64,
    pub t: Complex64,
    /// Determinant of the (rescaled) cell product.
    pub determinant: f64,
    /// Natural log of the factor divided out of the product to avoid overflow.
    pub log_scale: f64,
}

fn lead_wavenumber(energy: f64, params: &ModelParams) -> Result<f64> {
    let c = (energy - params.omega_c()) / (2.0 * params.v());
    if !(c.abs() < 1.0) {
        return Err(TransportError::LeadBandEdge { energy });
    }
    Ok(c.acos())
}

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Dense LU solve with partial pivoting and a 1-norm condition check.
fn solve_dense(a: DMatrix<Complex64>, b: DVector<Complex64>) -> Result<DVector<Complex64>> {
    let norm = one_norm(&a);
    let lu = a.lu();
    let inverse = lu.try_inverse().ok_or_else(|| TransportError::SingularSystem {
        reason: "zero pivot".into(),
    })?;
    let condition = norm * one_norm(&inverse);
    if !condition.is_finite() || condition > MAX_CONDITION {
        return Err(TransportError::SingularSystem {
            reason: format!("condition estimate {condition:.3e} exceeds {MAX_CONDITION:.0e}"),
        });
    }
    let x = lu.solve(&b).ok_or_else(|| TransportError::SingularSystem {
        reason: "LU solve failed".into(),
    })?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(TransportError::SingularSystem { reason: "non-finite solution".into() });
    }
    Ok(x)
}

/// Rows shared by both linear systems: lead matching at j = 0 and j = N + 1.
///
/// `col_u1`, `col_un`, `col_r`, `col_t` are the unknown indices involved.
fn add_lead_rows(
    a: &mut DMatrix<Complex64>,
    b: &mut DVector<Complex64>,
    energy: f64,
    k: f64,
    params: &ModelParams,
    cols: (usize, usize, usize, usize),
) {
    let (col_u1, col_un, col_r, col_t) = cols;
    let n = params.n_cells() as f64;
    let v = Complex64::new(params.v(), 0.0);
    let de = Complex64::new(energy - params.omega_c(), 0.0);
    let e = |phase: f64| Complex64::from_polar(1.0, phase);

    // j = 0: (E − ω)(1 + r) = v (u_1 + e^{−ik} + r e^{ik})
    a[(0, col_r)] = de - v * e(k);
    a[(0, col_u1)] = -v;
    b[0] = -de + v * e(-k);

    // j = N + 1: (E − ω) t e^{ik(N+1)} = v (t e^{ik(N+2)} + u_N)
    a[(1, col_t)] = de * e(k * (n + 1.0)) - v * e(k * (n + 2.0));
    a[(1, col_un)] = -v;
}

/// Solves the photon/atom difference equations with all 3N + 2 amplitudes unknown.
pub fn solve_full_system(energy: f64, params: &ModelParams) -> Result<InternalState> {
    let k = lead_wavenumber(energy, params)?;
    let n = params.n_cells();
    let size = 3 * n + 2;
    let (col_r, col_t) = (3 * n, 3 * n + 1);
    let col_u = |j: usize| j - 1;
    let col_a = |j: usize| n + j - 1;
    let col_e = |j: usize| 2 * n + j - 1;

    let zero = Complex64::new(0.0, 0.0);
    let mut a = DMatrix::from_element(size, size, zero);
    let mut b = DVector::from_element(size, zero);
    add_lead_rows(&mut a, &mut b, energy, k, params, (col_u(1), col_u(n), col_r, col_t));

    let v = params.v();
    let g = params.g();
    let exit_phase = Complex64::from_polar(1.0, k * (n as f64 + 1.0));
    let mut row = 2;
    for j in 1..=n {
        // (E − ω) u_j − v (u_{j+1} + u_{j−1}) − g (d_{a,j} + d_{e,j}) = 0
        a[(row, col_u(j))] += Complex64::new(energy - params.omega_c(), 0.0);
        if j < n {
            a[(row, col_u(j + 1))] -= v;
        } else {
            a[(row, col_t)] -= v * exit_phase;
        }
        if j > 1 {
            a[(row, col_u(j - 1))] -= v;
        } else {
            // u_0 = 1 + r
            a[(row, col_r)] -= v;
            b[row] += v;
        }
        a[(row, col_a(j))] = Complex64::new(-g, 0.0);
        a[(row, col_e(j))] = Complex64::new(-g, 0.0);
        row += 1;

        // (E − ω′_a) d_{a,j} = g u_j
        a[(row, col_a(j))] = Complex64::new(energy - params.level_a(), 0.0);
        a[(row, col_u(j))] = Complex64::new(-g, 0.0);
        row += 1;

        // (E − ω′_e) d_{e,j} = g u_j
        a[(row, col_e(j))] = Complex64::new(energy - params.level_e(), 0.0);
        a[(row, col_u(j))] = Complex64::new(-g, 0.0);
        row += 1;
    }

    let x = solve_dense(a, b)?;
    Ok(InternalState {
        u: (1..=n).map(|j| x[col_u(j)]).collect(),
        d_a: (1..=n).map(|j| x[col_a(j)]).collect(),
        d_e: (1..=n).map(|j| x[col_e(j)]).collect(),
        r: x[col_r],
        t: x[col_t],
    })
}

fn site_shift(energy: f64, params: &ModelParams) -> Result<f64> {
    effective_energy(energy, params).map_err(|_| TransportError::SingularSystem {
        reason: format!("renormalized energy diverges at E = {energy}"),
    })
}

/// Solves the reduced chain (atoms folded into ε̃) with N + 2 unknowns.
pub fn solve_reduced_system(energy: f64, params: &ModelParams) -> Result<ReducedSolution> {
    let k = lead_wavenumber(energy, params)?;
    let eps = site_shift(energy, params)?;
    let n = params.n_cells();
    let size = n + 2;
    let (col_r, col_t) = (n, n + 1);

    let zero = Complex64::new(0.0, 0.0);
    let mut a = DMatrix::from_element(size, size, zero);
    let mut b = DVector::from_element(size, zero);
    add_lead_rows(&mut a, &mut b, energy, k, params, (0, n - 1, col_r, col_t));

    let v = params.v();
    let exit_phase = Complex64::from_polar(1.0, k * (n as f64 + 1.0));
    for j in 1..=n {
        let row = j + 1;
        // (E − ω − ε̃) u_j − v (u_{j+1} + u_{j−1}) = 0
        a[(row, j - 1)] += Complex64::new(energy - params.omega_c() - eps, 0.0);
        if j < n {
            a[(row, j)] -= v;
        } else {
            a[(row, col_t)] -= v * exit_phase;
        }
        if j > 1 {
            a[(row, j - 2)] -= v;
        } else {
            a[(row, col_r)] -= v;
            b[row] += v;
        }
    }

    let x = solve_dense(a, b)?;
    Ok(ReducedSolution { r: x[col_r], t: x[col_t], u: x.iter().take(n).copied().collect() })
}

/// Product of the N cell matrices [[(E − ω − ε̃)/v, −1], [1, 0]] mapping
/// (u_1, u_0) to (u_{N+1}, u_N), then matched to the lead ansatz.
pub fn solve_transfer_matrix(energy: f64, params: &ModelParams) -> Result<TransferSolution> {
    let k = lead_wavenumber(energy, params)?;
    let eps = site_shift(energy, params)?;
    let diag = (energy - params.omega_c() - eps) / params.v();

    let mut p = [[1.0, 0.0], [0.0, 1.0]];
    let mut log_scale = 0.0;
    for _ in 0..params.n_cells() {
        p = [
            [diag * p[0][0] - p[1][0], diag * p[0][1] - p[1][1]],
            [p[0][0], p[0][1]],
        ];
        let norm = p.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
        if norm > RESCALE_NORM {
            p.iter_mut().flatten().for_each(|x| *x /= norm);
            log_scale += norm.ln();
        }
    }
    let determinant = p[0][0] * p[1][1] - p[0][1] * p[1][0];

    let e = |phase: f64| Complex64::from_polar(1.0, phase);
    // u_{N+1} = e^{ik} u_N eliminates t: A u_1 + B u_0 = 0.
    let coef_a = p[0][0] - e(k) * p[1][0];
    let coef_b = p[0][1] - e(k) * p[1][1];
    let r = -(coef_a * e(k) + coef_b) / (coef_a * e(-k) + coef_b);
    // Inverting the unimodular product and using u_1 − e^{−ik} u_0 = 2i sin k
    // gives t without cancelling the growing evanescent solution.
    let n = params.n_cells() as f64;
    let denominator = p[1][1] * e(k) - p[0][1] - p[0][0] * e(-k) + p[1][0];
    let t = Complex64::new(0.0, 2.0 * k.sin()) * e(-k * n) / denominator * (-log_scale).exp();

    if !(r.re.is_finite() && r.im.is_finite() && t.re.is_finite() && t.im.is_finite()) {
        return Err(TransportError::SingularSystem { reason: "transfer matrix matching failed".into() });
    }
    Ok(TransferSolution { r, t, determinant, log_scale })
}
