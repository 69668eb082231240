//! Lorentzian and Fano line shapes for the single-atom and small-detuning limits.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TransportError};
use crate::model::ModelParams;

/// Wide-band semi-width of the single-atom reflection peak in units of γ.
///
/// Pinned by a half-maximum sweep of the numeric oracle (see the
/// `broad_width_matches_oracle_sweep` test): the exact N = 1, Δω = 0 peak has
/// semi-width g²/v = 2γ as v/γ → ∞.
pub const BROAD_WIDTH_OVER_GAMMA: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineShapeKind {
    BreitWignerR,
    FanoT,
    DickeR,
    DickeT,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineShapeParams {
    pub kind: LineShapeKind,
    pub center: f64,
    pub broad_width: f64,
    /// δ = Δω²/2γ.
    pub narrow_width: f64,
}

impl LineShapeParams {
    pub fn new(kind: LineShapeKind, center: f64, broad_width: f64, narrow_width: f64) -> Result<Self> {
        if !(broad_width > 0.0) || !broad_width.is_finite() {
            return Err(TransportError::InvalidParameter {
                field: "broad_width",
                reason: format!("must be positive, got {broad_width}"),
            });
        }
        if !(narrow_width >= 0.0) || narrow_width > broad_width {
            return Err(TransportError::InvalidParameter {
                field: "narrow_width",
                reason: format!("must lie in [0, {broad_width}], got {narrow_width}"),
            });
        }
        Ok(Self { kind, center, broad_width, narrow_width })
    }

    /// Widths derived from the model: broad = 2γ (= g²/v), narrow = Δω²/2γ.
    pub fn from_model(kind: LineShapeKind, params: &ModelParams) -> Result<Self> {
        let gamma = params.gamma();
        if gamma <= 0.0 {
            return Err(TransportError::InvalidParameter {
                field: "g",
                reason: "line shapes need a coupled atom (γ > 0)".into(),
            });
        }
        let narrow = params.delta_omega().powi(2) / (2.0 * gamma);
        Self::new(kind, params.omega0(), BROAD_WIDTH_OVER_GAMMA * gamma, narrow)
    }

    pub fn evaluate(&self, energy: f64) -> f64 {
        let s = energy - self.center;
        match self.kind {
            LineShapeKind::BreitWignerR => lorentzian(s, self.broad_width),
            LineShapeKind::FanoT => fano_symmetric(s, self.broad_width),
            LineShapeKind::DickeR => lorentzian(s, self.broad_width) - lorentzian(s, self.narrow_width),
            LineShapeKind::DickeT => fano_symmetric(s, self.broad_width) + lorentzian(s, self.narrow_width),
        }
    }
}

/// w²/(s² + w²); a zero width collapses to an indicator of s = 0.
fn lorentzian(s: f64, width: f64) -> f64 {
    if width == 0.0 {
        return if s == 0.0 { 1.0 } else { 0.0 };
    }
    width * width / (s * s + width * width)
}

/// (ε + q)²/(ε² + 1) with q = 0 and ε = s/w.
fn fano_symmetric(s: f64, width: f64) -> f64 {
    let eps = s / width;
    eps * eps / (eps * eps + 1.0)
}

pub fn breit_wigner_reflection(energy: f64, params: &ModelParams) -> Result<f64> {
    Ok(LineShapeParams::from_model(LineShapeKind::BreitWignerR, params)?.evaluate(energy))
}

pub fn fano_transmission(energy: f64, params: &ModelParams) -> Result<f64> {
    Ok(LineShapeParams::from_model(LineShapeKind::FanoT, params)?.evaluate(energy))
}

/// Small-detuning approximations (R, T): a broad Lorentzian minus/plus a narrow one.
pub fn dicke_line_shapes(energy: f64, params: &ModelParams) -> Result<(f64, f64)> {
    let r = LineShapeParams::from_model(LineShapeKind::DickeR, params)?;
    let t = LineShapeParams { kind: LineShapeKind::DickeT, ..r };
    Ok((r.evaluate(energy), t.evaluate(energy)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::scatter;
    use approx::assert_relative_eq;

    fn wide(delta_omega: f64) -> ModelParams {
        ModelParams::in_gamma_units(10.0, delta_omega, 1).unwrap()
    }

    #[test]
    fn breit_wigner_examples() {
        let p = wide(0.0);
        let w = BROAD_WIDTH_OVER_GAMMA * p.gamma();
        assert_eq!(breit_wigner_reflection(0.0, &p).unwrap(), 1.0);
        assert_relative_eq!(breit_wigner_reflection(w, &p).unwrap(), 0.5, epsilon = 1e-15);
        assert_relative_eq!(breit_wigner_reflection(-w, &p).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn fano_examples() {
        let p = wide(0.0);
        let w = BROAD_WIDTH_OVER_GAMMA * p.gamma();
        assert_eq!(fano_transmission(0.0, &p).unwrap(), 0.0);
        assert_relative_eq!(fano_transmission(w, &p).unwrap(), 0.5, epsilon = 1e-15);
        assert!(fano_transmission(1e8, &p).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn dicke_examples() {
        let p = wide(0.1);
        let (r, t) = dicke_line_shapes(0.0, &p).unwrap();
        assert_eq!(r, 0.0);
        assert_eq!(t, 1.0);
        let (_, far) = dicke_line_shapes(1e6, &p).unwrap();
        assert!((far - 1.0).abs() < 1e-9);
    }

    #[test]
    fn dicke_approximation_tracks_exact_transmission() {
        let p = wide(0.1);
        let max_dev = (0..2001)
            .map(|i| -6.0 + 12.0 * i as f64 / 2000.0)
            .map(|s| {
                let exact = scatter(s, &p).unwrap().big_t;
                (exact - dicke_line_shapes(s, &p).unwrap().1).abs()
            })
            .fold(0.0, f64::max);
        assert!(max_dev <= 0.05, "max deviation {max_dev}");
    }

    #[test]
    fn invalid_line_shape_params() {
        assert!(LineShapeParams::new(LineShapeKind::FanoT, 0.0, 0.0, 0.0).is_err());
        assert!(LineShapeParams::new(LineShapeKind::DickeT, 0.0, 1.0, 2.0).is_err());
        let uncoupled = wide(0.0).with_coupling(0.0).unwrap();
        assert!(breit_wigner_reflection(0.0, &uncoupled).is_err());
        // Δω = 3γ gives δ = 4.5γ > 2γ.
        assert!(dicke_line_shapes(0.0, &wide(3.0)).is_err());
    }

    /// Half-maximum of R found by bisection on the reduced-chain oracle.
    fn oracle_reflection_semi_width(v_over_gamma: f64) -> f64 {
        let p = ModelParams::in_gamma_units(v_over_gamma, 0.0, 1).unwrap();
        let reflection = |s: f64| crate::oracle::solve_reduced_system(s, &p).unwrap().r.norm_sqr();
        let (mut lo, mut hi) = (1e-6, v_over_gamma);
        assert!(reflection(lo) > 0.5 && reflection(hi) < 0.5);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if reflection(mid) > 0.5 { lo = mid } else { hi = mid }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn broad_width_matches_oracle_sweep() {
        // Exact crossing at v = 10γ solves s²(1 − s²/400) = 4.
        let frozen_v10 = 2.010_179_240_104_164;
        assert_relative_eq!(oracle_reflection_semi_width(10.0), frozen_v10, max_relative = 1e-9);
        assert_relative_eq!(
            oracle_reflection_semi_width(1000.0),
            BROAD_WIDTH_OVER_GAMMA,
            max_relative = 1e-5
        );
    }
}
