//! Model parameters and the scalar quantities derived from them.
//!
//! The doped region is a tight-binding chain of `n_cells` cavities, each
//! hosting a V-type atom with excited levels at `omega0 ± delta_omega`
//! (ω′_a = ω₀ + Δω, ω′_e = ω₀ − Δω), both coupled to the cavity mode with
//! strength `g`. Eliminating the atomic amplitudes leaves a chain with the
//! energy-dependent site shift
//!
//! ```text
//! ε̃(E) = g² (2E − ω′_a − ω′_e) / ((E − ω′_a)(E − ω′_e))
//! ```
//!
//! Everything downstream is expressed through ε̃, the lead wavenumber k
//! (E = ω + 2v cos k) and the Bloch cosine x = −(E − ω − ε̃)/2v.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TransportError};

/// Relative distance to an atomic level below which an energy counts as a pole.
pub const POLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    omega_c: f64,
    v: f64,
    g: f64,
    omega0: f64,
    delta_omega: f64,
    n_cells: usize,
}

impl ModelParams {
    pub fn new(
        omega_c: f64,
        v: f64,
        g: f64,
        omega0: f64,
        delta_omega: f64,
        n_cells: usize,
    ) -> Result<Self> {
        let finite = |field: &'static str, value: f64| {
            if value.is_finite() {
                Ok(())
            } else {
                Err(TransportError::InvalidParameter {
                    field,
                    reason: format!("must be finite, got {value}"),
                })
            }
        };
        finite("omega_c", omega_c)?;
        finite("v", v)?;
        finite("g", g)?;
        finite("omega0", omega0)?;
        finite("delta_omega", delta_omega)?;
        if v <= 0.0 {
            return Err(TransportError::InvalidParameter {
                field: "v",
                reason: format!("hopping must be positive, got {v}"),
            });
        }
        if g < 0.0 {
            return Err(TransportError::InvalidParameter {
                field: "g",
                reason: format!("coupling must be non-negative, got {g}"),
            });
        }
        if delta_omega < 0.0 {
            return Err(TransportError::InvalidParameter {
                field: "delta_omega",
                reason: format!("detuning must be non-negative, got {delta_omega}"),
            });
        }
        if n_cells == 0 {
            return Err(TransportError::InvalidParameter {
                field: "n_cells",
                reason: "at least one doped cavity is required".into(),
            });
        }
        let params = Self { omega_c, v, g, omega0, delta_omega, n_cells };
        if !params.gamma().is_finite() {
            return Err(TransportError::InvalidParameter {
                field: "g",
                reason: "g²/2v overflows".into(),
            });
        }
        Ok(params)
    }

    /// Parameters expressed in units of γ: γ = 1, so g = √(2v).
    ///
    /// The cavity mode and the atomic centre both sit at zero energy.
    pub fn in_gamma_units(v_over_gamma: f64, delta_omega_over_gamma: f64, n_cells: usize) -> Result<Self> {
        if !(v_over_gamma > 0.0) {
            return Err(TransportError::InvalidParameter {
                field: "v_over_gamma",
                reason: format!("must be positive, got {v_over_gamma}"),
            });
        }
        let g = (2.0 * v_over_gamma).sqrt();
        Self::new(0.0, v_over_gamma, g, 0.0, delta_omega_over_gamma, n_cells)
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn delta_omega(&self) -> f64 {
        self.delta_omega
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    /// Upper excited level ω′_a = ω₀ + Δω.
    pub fn level_a(&self) -> f64 {
        self.omega0 + self.delta_omega
    }

    /// Lower excited level ω′_e = ω₀ − Δω.
    pub fn level_e(&self) -> f64 {
        self.omega0 - self.delta_omega
    }

    /// γ = g²/2v, the natural energy unit of the line shapes.
    pub fn gamma(&self) -> f64 {
        self.g * self.g / (2.0 * self.v)
    }

    pub fn with_n_cells(self, n_cells: usize) -> Result<Self> {
        Self::new(self.omega_c, self.v, self.g, self.omega0, self.delta_omega, n_cells)
    }

    pub fn with_delta_omega(self, delta_omega: f64) -> Result<Self> {
        Self::new(self.omega_c, self.v, self.g, self.omega0, delta_omega, self.n_cells)
    }

    pub fn with_coupling(self, g: f64) -> Result<Self> {
        Self::new(self.omega_c, self.v, g, self.omega0, self.delta_omega, self.n_cells)
    }

    /// Converts an energy measured in model units into units of γ.
    ///
    /// Returns `None` for an uncoupled chain, where γ vanishes.
    pub fn to_gamma_units(&self, energy: f64) -> Option<f64> {
        let gamma = self.gamma();
        (gamma > 0.0).then(|| energy / gamma)
    }

    pub fn from_gamma_units(&self, energy_over_gamma: f64) -> f64 {
        energy_over_gamma * self.gamma()
    }

    /// True when `energy` is within [`POLE_TOLERANCE`] of either atomic level.
    ///
    /// A decoupled atom (g = 0) has no pole.
    pub fn is_pole(&self, energy: f64) -> bool {
        self.g > 0.0
            && [self.level_a(), self.level_e()]
            .iter()
            .any(|&level| (energy - level).abs() <= POLE_TOLERANCE * level.abs().max(1.0))
    }
}

pub fn gamma(params: &ModelParams) -> f64 {
    params.gamma()
}

/// Renormalized site energy ε̃(E) produced by eliminating both atomic amplitudes.
pub fn effective_energy(energy: f64, params: &ModelParams) -> Result<f64> {
    if params.is_pole(energy) {
        return Err(TransportError::AtomPole { energy });
    }
    let g2 = params.g * params.g;
    if g2 == 0.0 {
        return Ok(0.0);
    }
    let da = energy - params.level_a();
    let de = energy - params.level_e();
    Ok(g2 * (da + de) / (da * de))
}

/// Lead wavenumber k ∈ (0, π) from E = ω + 2v cos k.
pub fn incident_wavenumber(energy: f64, params: &ModelParams) -> Result<f64> {
    let c = (energy - params.omega_c) / (2.0 * params.v);
    if c.abs() >= 1.0 || c.is_nan() {
        return Err(TransportError::LeadBandEdge { energy });
    }
    Ok(c.acos())
}

/// Bloch cosine x = −(E − ω − ε̃)/2v of the doped region.
pub fn bloch_cosine(energy: f64, params: &ModelParams) -> Result<f64> {
    let eps = effective_energy(energy, params)?;
    Ok(-(energy - params.omega_c - eps) / (2.0 * params.v))
}

/// Decay rate κ = arccosh|x| inside the doped region.
pub fn decay_rate(energy: f64, params: &ModelParams) -> Result<f64> {
    let point = classify(energy, params);
    match (point.regime, point.bloch_cosine) {
        (Regime::Evanescent, Some(x)) => Ok(x.abs().acosh()),
        _ => Err(TransportError::NotEvanescent { energy }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Incident photon propagates and the doped region supports a Bloch wave (|x| ≤ 1).
    Propagating,
    /// Incident photon propagates but decays inside the doped region (|x| > 1).
    Evanescent,
    /// |E − ω| ≥ 2v: no propagating incident photon.
    LeadBandEdge,
    /// E sits on an atomic level.
    AtomPole,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::Propagating => "propagating",
            Regime::Evanescent => "evanescent",
            Regime::LeadBandEdge => "lead_band_edge",
            Regime::AtomPole => "atom_pole",
        }
    }

    pub fn is_scattering(&self) -> bool {
        matches!(self, Regime::Propagating | Regime::Evanescent)
    }
}

impl std::str::FromStr for Regime {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "propagating" => Ok(Regime::Propagating),
            "evanescent" => Ok(Regime::Evanescent),
            "lead_band_edge" => Ok(Regime::LeadBandEdge),
            "atom_pole" => Ok(Regime::AtomPole),
            other => Err(format!("unknown regime `{other}`")),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A photon energy together with everything the scattering formulas need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPoint {
    pub energy: f64,
    /// E − ω₀.
    pub detuning_from_atom: f64,
    /// Lead wavenumber k, absent outside the lead band.
    pub wavenumber: Option<f64>,
    /// Bloch cosine x, absent on an atomic level.
    pub bloch_cosine: Option<f64>,
    pub regime: Regime,
    /// Set when |x| = 1 exactly and the Chebyshev ratios take their polynomial limit.
    pub chebyshev_limit: bool,
}

/// Classifies an energy. Lead-band exclusion takes precedence over the atomic poles.
pub fn classify(energy: f64, params: &ModelParams) -> EnergyPoint {
    let detuning_from_atom = energy - params.omega0;
    let bloch_cosine = bloch_cosine(energy, params).ok();
    let wavenumber = incident_wavenumber(energy, params).ok();
    let mut chebyshev_limit = false;
    let regime = if wavenumber.is_none() {
        Regime::LeadBandEdge
    } else {
        match bloch_cosine {
            None => Regime::AtomPole,
            Some(x) if x.abs() < 1.0 => Regime::Propagating,
            Some(x) if x.abs() == 1.0 => {
                chebyshev_limit = true;
                Regime::Propagating
            }
            Some(_) => Regime::Evanescent,
        }
    };
    EnergyPoint { energy, detuning_from_atom, wavenumber, bloch_cosine, regime, chebyshev_limit }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn params(g: f64, v: f64, delta_omega: f64) -> ModelParams {
        ModelParams::new(0.0, v, g, 0.0, delta_omega, 1).unwrap()
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(&params(1.0, 1.0, 0.0)), 0.5);
        assert_eq!(gamma(&params(0.0, 1.0, 0.0)), 0.0);
        assert_eq!(gamma(&params(2.0, 1.0, 0.0)), 2.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            ModelParams::new(0.0, 0.0, 1.0, 0.0, 0.0, 1),
            Err(TransportError::InvalidParameter { field: "v", .. })
        ));
        assert!(matches!(
            ModelParams::new(0.0, 1.0, -1.0, 0.0, 0.0, 1),
            Err(TransportError::InvalidParameter { field: "g", .. })
        ));
        assert!(matches!(
            ModelParams::new(0.0, 1.0, 1.0, 0.0, -0.1, 1),
            Err(TransportError::InvalidParameter { field: "delta_omega", .. })
        ));
        assert!(matches!(
            ModelParams::new(0.0, 1.0, 1.0, 0.0, 0.0, 0),
            Err(TransportError::InvalidParameter { field: "n_cells", .. })
        ));
        assert!(ModelParams::new(f64::NAN, 1.0, 1.0, 0.0, 0.0, 1).is_err());
    }

    #[test]
    fn effective_energy_examples() {
        assert_eq!(effective_energy(0.3, &params(0.0, 1.0, 0.5)).unwrap(), 0.0);
        assert_eq!(effective_energy(0.0, &params(1.0, 1.0, 0.5)).unwrap(), 0.0);
        assert_relative_eq!(
            effective_energy(1.0, &params(1.0, 1.0, 0.5)).unwrap(),
            8.0 / 3.0,
            max_relative = 1e-15
        );
        assert!(matches!(
            effective_energy(0.5, &params(1.0, 1.0, 0.5)),
            Err(TransportError::AtomPole { .. })
        ));
        assert_eq!(effective_energy(0.5, &params(0.0, 1.0, 0.5)).unwrap(), 0.0);
    }

    #[test]
    fn degenerate_levels_give_simple_pole() {
        let p = params(1.3, 1.0, 0.0);
        for s in [-1.5, -0.2, 0.01, 0.7] {
            let expected = 2.0 * 1.3 * 1.3 / s;
            assert_relative_eq!(effective_energy(s, &p).unwrap(), expected, max_relative = 1e-14);
        }
    }

    #[test]
    fn wavenumber_examples() {
        let p = params(1.0, 1.0, 0.0);
        assert_relative_eq!(incident_wavenumber(0.0, &p).unwrap(), PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(incident_wavenumber(1.0, &p).unwrap(), PI / 3.0, epsilon = 1e-15);
        assert!(matches!(incident_wavenumber(2.0, &p), Err(TransportError::LeadBandEdge { .. })));
        assert!(matches!(incident_wavenumber(-2.5, &p), Err(TransportError::LeadBandEdge { .. })));
    }

    #[test]
    fn classify_examples() {
        let bare = classify(0.0, &params(0.0, 1.0, 0.0));
        assert_eq!(bare.regime, Regime::Propagating);
        assert_eq!(bare.bloch_cosine, Some(0.0));
        assert_relative_eq!(bare.wavenumber.unwrap(), PI / 2.0);

        // Wide band, degenerate levels: the window around ω₀ is a gap.
        let wide = ModelParams::in_gamma_units(10.0, 0.0, 1).unwrap();
        for s in [-1.5, -0.5, 0.3, 1.2] {
            assert_eq!(classify(s, &wide).regime, Regime::Evanescent);
        }

        let p = params(1.0, 1.0, 0.5);
        assert_eq!(classify(p.level_a(), &p).regime, Regime::AtomPole);
        assert_eq!(classify(p.level_e(), &p).regime, Regime::AtomPole);
        assert_eq!(classify(2.0, &p).regime, Regime::LeadBandEdge);
    }

    #[test]
    fn exact_unit_bloch_cosine_is_propagating_limit() {
        // v = 1.75, g = 1, ω = ω₀ = 0: E − 2g²/E at E = ±0.5 is ∓3.5 = ∓2v exactly.
        let p = ModelParams::new(0.0, 1.75, 1.0, 0.0, 0.0, 2).unwrap();
        let upper = classify(0.5, &p);
        assert_eq!(upper.bloch_cosine, Some(1.0));
        assert_eq!(upper.regime, Regime::Propagating);
        assert!(upper.chebyshev_limit);
        let lower = classify(-0.5, &p);
        assert_eq!(lower.bloch_cosine, Some(-1.0));
        assert!(lower.chebyshev_limit);
        assert!(!classify(0.6, &p).chebyshev_limit);
    }

    #[test]
    fn unit_conversion_round_trip() {
        let p = ModelParams::in_gamma_units(10.0, 0.5, 3).unwrap();
        assert_relative_eq!(p.gamma(), 1.0, epsilon = 1e-15);
        let q = p.with_coupling(2.0).unwrap();
        let e = q.from_gamma_units(1.7);
        assert_relative_eq!(q.to_gamma_units(e).unwrap(), 1.7, epsilon = 1e-15);
        assert_eq!(q.with_coupling(0.0).unwrap().to_gamma_units(1.0), None);
    }

    #[test]
    fn decay_rate_requires_gap() {
        let p = ModelParams::in_gamma_units(10.0, 0.0, 3).unwrap();
        let kappa = decay_rate(1.0, &p).unwrap();
        // x = −(1 − 40)/20 = 1.95
        assert_relative_eq!(kappa, 1.95f64.acosh(), epsilon = 1e-14);
        assert!(matches!(decay_rate(5.0, &p), Err(TransportError::NotEvanescent { .. })));
    }
}
