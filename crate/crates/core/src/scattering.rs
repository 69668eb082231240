//! Closed-form scattering amplitudes of the doped region.
//!
//! Inside the doped region the photon amplitude obeys a three-term
//! recurrence with Bloch cosine x, so the N-cell transfer matrix is built
//! from Chebyshev polynomials of the second kind U_n(x). With
//!
//! ```text
//! Δ = e^{−ik} U_N(x) + 2 U_{N−1}(x) + e^{ik} U_{N−2}(x)
//! t = (−1)^{N+1} 2i e^{−ikN} sin k / Δ
//! r = −e^{ik} (U_N(x) + 2 cos k U_{N−1}(x) + U_{N−2}(x)) / Δ
//! ```
//!
//! one evaluator covers the propagating (|x| ≤ 1) and evanescent (|x| > 1)
//! branches alike. The trigonometric/hyperbolic probability formulas are
//! kept in [`probabilities_closed_form`] as an independent validation path.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TransportError};
use crate::model::{classify, EnergyPoint, ModelParams, Regime};

const RESCALE_THRESHOLD: f64 = 1e150;

/// Chebyshev polynomial of the second kind, U_n(x), for n ≥ −1.
///
/// Uses the three-term recurrence on every branch; it is forward stable for
/// |x| ≤ 1 and follows the dominant solution for |x| > 1.
pub fn chebyshev_u(n: i64, x: f64) -> f64 {
    match n {
        i64::MIN..=-2 => -chebyshev_u(-n - 2, x),
        -1 => 0.0,
        0 => 1.0,
        _ => {
            let (mut prev, mut cur) = (1.0, 2.0 * x);
            for _ in 1..n {
                let next = 2.0 * x * cur - prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// (U_n, U_{n−1}, U_{n−2}) divided by `RESCALE_THRESHOLD^scale`, for n ≥ 1.
fn scaled_triplet(n: usize, x: f64) -> ([f64; 3], i32) {
    let (mut u2, mut u1, mut u0) = (0.0, 1.0, 2.0 * x);
    let mut scale = 0;
    for _ in 1..n {
        let next = 2.0 * x * u0 - u1;
        u2 = u1;
        u1 = u0;
        u0 = next;
        if u0.abs() > RESCALE_THRESHOLD {
            u0 /= RESCALE_THRESHOLD;
            u1 /= RESCALE_THRESHOLD;
            u2 /= RESCALE_THRESHOLD;
            scale += 1;
        }
    }
    ([u0, u1, u2], scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatteringAmplitudes {
    pub r: Complex64,
    pub t: Complex64,
    /// R = |r|².
    pub big_r: f64,
    /// T = |t|².
    pub big_t: f64,
    pub regime: Regime,
}

impl ScatteringAmplitudes {
    fn from_amplitudes(r: Complex64, t: Complex64, regime: Regime) -> Self {
        Self { r, t, big_r: r.norm_sqr(), big_t: t.norm_sqr(), regime }
    }
}

fn scattering_inputs(point: &EnergyPoint) -> Result<(f64, f64)> {
    match point.regime {
        Regime::Propagating | Regime::Evanescent => {}
        Regime::LeadBandEdge => return Err(TransportError::LeadBandEdge { energy: point.energy }),
        Regime::AtomPole => return Err(TransportError::AtomPole { energy: point.energy }),
    }
    match (point.wavenumber, point.bloch_cosine) {
        (Some(k), Some(x)) => Ok((k, x)),
        _ => unreachable!("scattering regimes always carry k and x"),
    }
}

/// Transmission denominator Δ for the point's Bloch cosine and wavenumber.
pub fn denominator_delta(point: &EnergyPoint, params: &ModelParams) -> Result<Complex64> {
    let (k, x) = scattering_inputs(point)?;
    let n = params.n_cells() as i64;
    let phase = Complex64::from_polar(1.0, k);
    Ok(phase.conj() * chebyshev_u(n, x) + 2.0 * chebyshev_u(n - 1, x) + phase * chebyshev_u(n - 2, x))
}

/// Reflection and transmission amplitudes at a classified energy.
///
/// On an atomic level the doped region acts as a hard wall at the first
/// cell: t = 0 and r = −e^{2ik}.
pub fn transmission_amplitude(point: &EnergyPoint, params: &ModelParams) -> Result<ScatteringAmplitudes> {
    if point.regime == Regime::AtomPole {
        let k = point.wavenumber.expect("atom-pole points lie inside the lead band");
        let r = -Complex64::from_polar(1.0, 2.0 * k);
        return Ok(ScatteringAmplitudes {
            r,
            t: Complex64::new(0.0, 0.0),
            big_r: 1.0,
            big_t: 0.0,
            regime: Regime::AtomPole,
        });
    }
    let (k, x) = scattering_inputs(point)?;
    let n = params.n_cells();
    let (cos_k, sin_k) = (k.cos(), k.sin());
    let phase = Complex64::from_polar(1.0, k);

    let ([u_n, u_n1, u_n2], scale) = scaled_triplet(n, x);
    let delta = phase.conj() * u_n + 2.0 * u_n1 + phase * u_n2;

    let r = -phase * (u_n + 2.0 * cos_k * u_n1 + u_n2) / delta;

    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let numerator = Complex64::new(0.0, 2.0 * sign * sin_k) * Complex64::from_polar(1.0, -k * n as f64);
    let t = numerator / delta * RESCALE_THRESHOLD.powi(-scale);

    Ok(ScatteringAmplitudes::from_amplitudes(r, t, point.regime))
}

/// Classify `energy` and evaluate the amplitudes there.
pub fn scatter(energy: f64, params: &ModelParams) -> Result<ScatteringAmplitudes> {
    transmission_amplitude(&classify(energy, params), params)
}

/// R and T from the real-valued trigonometric (|x| ≤ 1) and hyperbolic
/// (|x| > 1) formulas.
///
/// The hyperbolic branch replaces cosh κ by x itself, so the x ≤ −1 tail
/// carries the correct sign in the (1 + x cos k) and (x + cos k) factors.
pub fn probabilities_closed_form(point: &EnergyPoint, params: &ModelParams) -> Result<(f64, f64)> {
    if point.regime == Regime::AtomPole {
        return Ok((1.0, 0.0));
    }
    let (k, x) = scattering_inputs(point)?;
    let n = params.n_cells() as f64;
    let (cos_k, sin_k) = (k.cos(), k.sin());

    if x.abs() <= 1.0 {
        let q = x.acos();
        let sin_q = q.sin();
        if point.chebyshev_limit || sin_q == 0.0 {
            // sin(Nq)/sin q → ±N and cos²(Nq) → 1 at q ∈ {0, π}.
            let n2 = n * n;
            let big_r = n2 * (x + cos_k).powi(2) / (n2 * (cos_k * x + 1.0).powi(2) + sin_k * sin_k);
            let big_t = 1.0 / (1.0 + (n * (1.0 + x * cos_k) / sin_k).powi(2));
            return Ok((big_r, big_t));
        }
        let (sin_nq, cos_nq) = (n * q).sin_cos();
        let cos_q = x;
        let big_r = sin_nq.powi(2) * (cos_q + cos_k).powi(2)
            / (sin_nq.powi(2) * (cos_k * cos_q + 1.0).powi(2) + (sin_k * sin_q * cos_nq).powi(2));
        let big_t =
            1.0 / (cos_nq.powi(2) + (sin_nq * (1.0 + cos_q * cos_k) / (sin_q * sin_k)).powi(2));
        Ok((big_r, big_t))
    } else {
        let kappa = x.abs().acosh();
        let cosh_k = x;
        let sinh_k = kappa.sinh();
        let (sinh_nk, cosh_nk) = ((n * kappa).sinh(), (n * kappa).cosh());
        let big_t =
            1.0 / (cosh_nk.powi(2) + (sinh_nk * (1.0 + cosh_k * cos_k) / (sinh_k * sin_k)).powi(2));
        let big_r = if sinh_nk.is_finite() && (sinh_nk * sinh_nk).is_finite() {
            sinh_nk.powi(2) * (cosh_k + cos_k).powi(2)
                / (sinh_nk.powi(2) * (cos_k * cosh_k + 1.0).powi(2)
                    + (sin_k * sinh_k * cosh_nk).powi(2))
        } else {
            // coth(Nκ) → 1
            (cosh_k + cos_k).powi(2) / ((cos_k * cosh_k + 1.0).powi(2) + (sin_k * sinh_k).powi(2))
        };
        Ok((big_r, big_t))
    }
}
