//! Detuning sweeps and the measurements built on them: band edges,
//! half-widths and gap attenuation.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TransportError};
use crate::model::{classify, decay_rate, ModelParams, Regime};
use crate::scattering::{scatter, transmission_amplitude, ScatteringAmplitudes};

/// Number of uniform samples used to bracket a crossing before bisection.
const SCAN_SAMPLES: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    /// E − ω₀ in model energy units.
    pub detuning: f64,
    pub energy: f64,
    pub r: Complex64,
    pub t: Complex64,
    pub big_r: f64,
    pub big_t: f64,
    pub regime: Regime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub params: ModelParams,
    pub points: Vec<SpectrumPoint>,
    pub metadata: BTreeMap<String, String>,
}

impl Spectrum {
    pub fn detunings(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.detuning)
    }

    pub fn transmission(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.big_t)
    }

    /// Grid in units of γ; `None` for an uncoupled chain.
    pub fn grid_over_gamma(&self) -> Option<Vec<f64>> {
        self.points.iter().map(|p| self.params.to_gamma_units(p.detuning)).collect()
    }
}

fn evaluate_point(detuning: f64, params: &ModelParams) -> SpectrumPoint {
    let energy = params.omega0() + detuning;
    let point = classify(energy, params);
    let amps = transmission_amplitude(&point, params).unwrap_or(ScatteringAmplitudes {
        r: Complex64::new(f64::NAN, f64::NAN),
        t: Complex64::new(f64::NAN, f64::NAN),
        big_r: f64::NAN,
        big_t: f64::NAN,
        regime: point.regime,
    });
    SpectrumPoint {
        detuning,
        energy,
        r: amps.r,
        t: amps.t,
        big_r: amps.big_r,
        big_t: amps.big_t,
        regime: amps.regime,
    }
}

/// Evaluates the closed-form amplitudes at each detuning E − ω₀.
///
/// Points on an atomic level carry T = 0, R = 1; points outside the lead
/// band carry NaN probabilities and the `LeadBandEdge` tag.
pub fn sweep(params: &ModelParams, detunings: &[f64]) -> Result<Spectrum> {
    if detunings.is_empty() {
        return Err(TransportError::InvalidParameter { field: "grid", reason: "grid is empty".into() });
    }
    if let Some(w) = detunings.windows(2).find(|w| !(w[0] < w[1])) {
        return Err(TransportError::InvalidParameter {
            field: "grid",
            reason: format!("grid must be strictly increasing ({} then {})", w[0], w[1]),
        });
    }
    let points: Vec<SpectrumPoint> =
        detunings.par_iter().map(|&d| evaluate_point(d, params)).collect();

    let mut metadata = BTreeMap::new();
    let gamma = params.gamma();
    metadata.insert("gamma".to_string(), format!("{gamma:e}"));
    metadata.insert("v_over_gamma".to_string(), format!("{:e}", params.v() / gamma));
    metadata.insert("n_cells".to_string(), params.n_cells().to_string());
    metadata.insert("delta_omega".to_string(), format!("{:e}", params.delta_omega()));
    Ok(Spectrum { params: *params, points, metadata })
}

/// `count` evenly spaced points on [min, max], endpoints included.
pub fn uniform_grid(min: f64, max: f64, count: usize) -> Vec<f64> {
    let step = (max - min) / (count - 1) as f64;
    (0..count)
        .map(|i| if i + 1 == count { max } else { min + step * i as f64 })
        .collect()
}

/// Bisection for a sign change of `f` on [lo, hi]; runs to machine resolution.
pub fn bisect<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut f_lo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Walks from `start` towards `end` and returns the first bracketing
/// interval over which `f` changes sign.
fn first_sign_change<F: Fn(f64) -> f64>(f: &F, start: f64, end: f64) -> Option<(f64, f64)> {
    let step = (end - start) / SCAN_SAMPLES as f64;
    let mut prev = start;
    let mut f_prev = f(prev);
    for i in 1..=SCAN_SAMPLES {
        let cur = if i == SCAN_SAMPLES { end } else { start + step * i as f64 };
        let f_cur = f(cur);
        if f_prev.is_finite() && f_cur.is_finite() && (f_prev > 0.0) != (f_cur > 0.0) {
            return Some((prev, cur));
        }
        prev = cur;
        f_prev = f_cur;
    }
    None
}

/// |x(E)| − 1; positive inside a gap, infinite on an atomic level.
fn gap_indicator(energy: f64, params: &ModelParams) -> f64 {
    match classify(energy, params).bloch_cosine {
        Some(x) => x.abs() - 1.0,
        None => f64::INFINITY,
    }
}

/// Energies where |x| = 1, nearest ω₀ on each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandEdges {
    pub lower: f64,
    pub upper: f64,
    /// True when ω₀ itself lies in an allowed band (split levels), so the
    /// edges bound that central band rather than a gap.
    pub central_band: bool,
    /// For a central band: the outer gap edges beyond the atomic levels.
    pub outer: Option<(f64, f64)>,
}

fn edge_between(params: &ModelParams, start: f64, end: f64) -> Option<f64> {
    let f = |e: f64| gap_indicator(e, params);
    first_sign_change(&f, start, end).map(|(a, b)| bisect(f, a, b))
}

/// Locates the band edges closest to ω₀ by scanning outwards and bisecting.
pub fn find_band_edges(params: &ModelParams) -> Result<BandEdges> {
    if params.g() == 0.0 {
        return Err(TransportError::NoGap);
    }
    let center = params.omega0();
    let lead_lo = params.omega_c() - 2.0 * params.v();
    let lead_hi = params.omega_c() + 2.0 * params.v();
    let shrink = |e: f64| e - (e - center) * 1e-12;

    let center_allowed = gap_indicator(center, params) <= 0.0;
    if center_allowed && params.delta_omega() > 0.0 {
        let (pole_lo, pole_hi) = (params.level_e(), params.level_a());
        let lower = edge_between(params, center, shrink(pole_lo)).ok_or(TransportError::NoGap)?;
        let upper = edge_between(params, center, shrink(pole_hi)).ok_or(TransportError::NoGap)?;
        let outer_lo = edge_between(params, pole_lo - 1e-12 * pole_lo.abs().max(1.0), lead_lo);
        let outer_hi = edge_between(params, pole_hi + 1e-12 * pole_hi.abs().max(1.0), lead_hi);
        return Ok(BandEdges {
            lower,
            upper,
            central_band: true,
            outer: outer_lo.zip(outer_hi),
        });
    }
    if center_allowed {
        return Err(TransportError::NoGap);
    }
    let lower = edge_between(params, center, lead_lo).ok_or(TransportError::NoGap)?;
    let upper = edge_between(params, center, lead_hi).ok_or(TransportError::NoGap)?;
    Ok(BandEdges { lower, upper, central_band: false, outer: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    /// Transmission peak at ω₀ (the narrow allowed band for split levels).
    CentralPeak,
    /// Reflection dip at ω₀; same crossing as the central peak.
    ReflectionDip,
    /// Reflection maximum at ω₀ (degenerate levels).
    ReflectionPeak,
}

impl std::str::FromStr for Feature {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "central_peak" => Ok(Feature::CentralPeak),
            "reflection_dip" => Ok(Feature::ReflectionDip),
            "reflection_peak" => Ok(Feature::ReflectionPeak),
            other => Err(format!("unknown feature `{other}`")),
        }
    }
}

fn probability(energy: f64, params: &ModelParams, reflection: bool) -> f64 {
    match scatter(energy, params) {
        Ok(a) if reflection => a.big_r,
        Ok(a) => a.big_t,
        Err(_) => f64::NAN,
    }
}

/// Semi-width (half the full width at half maximum) of a feature centred on ω₀.
pub fn measure_halfwidth(params: &ModelParams, feature: Feature) -> Result<f64> {
    let center = params.omega0();
    let reflection = !matches!(feature, Feature::CentralPeak);
    let value_at_center = probability(center, params, reflection);
    if !value_at_center.is_finite() {
        return Err(TransportError::FeatureAbsent(format!(
            "ω₀ = {center} is not a scattering energy"
        )));
    }

    let (level, limits) = match feature {
        Feature::CentralPeak | Feature::ReflectionDip => {
            if params.delta_omega() == 0.0 || params.g() == 0.0 {
                return Err(TransportError::FeatureAbsent(
                    "no central allowed band without split, coupled levels".into(),
                ));
            }
            // Peak in T falls to 0 at each level; dip in R rises to 1 there.
            let level = if reflection { 0.5 * (value_at_center + 1.0) } else { 0.5 * value_at_center };
            (level, (params.level_e(), params.level_a()))
        }
        Feature::ReflectionPeak => {
            let lead = (params.omega_c() - 2.0 * params.v(), params.omega_c() + 2.0 * params.v());
            (0.5 * value_at_center, lead)
        }
    };
    let peak_like = matches!(feature, Feature::CentralPeak | Feature::ReflectionPeak);
    if peak_like && value_at_center <= 0.5 {
        return Err(TransportError::FeatureAbsent(format!(
            "value {value_at_center} at ω₀ is not a maximum"
        )));
    }
    if !peak_like && value_at_center >= 0.5 {
        return Err(TransportError::FeatureAbsent(format!(
            "value {value_at_center} at ω₀ is not a minimum"
        )));
    }

    let f = |e: f64| probability(e, params, reflection) - level;
    let crossing = |end: f64| -> Result<f64> {
        let end = end - (end - center) * 1e-12;
        let (a, b) = first_sign_change(&f, center, end).ok_or_else(|| {
            TransportError::FeatureAbsent("no half-maximum crossing found".into())
        })?;
        Ok(bisect(f, a, b))
    };
    let upper = crossing(limits.1)?;
    let lower = crossing(limits.0)?;
    Ok(0.5 * (upper - lower))
}

/// Least-squares slope of ln T versus N at a fixed gap energy.
pub fn gap_attenuation(params: &ModelParams, probe_energy: f64, n_range: &[usize]) -> Result<f64> {
    decay_rate(probe_energy, params)?;
    if n_range.len() < 2 {
        return Err(TransportError::InvalidParameter {
            field: "n_range",
            reason: "need at least two cell counts".into(),
        });
    }
    let samples: Vec<(f64, f64)> = n_range
        .iter()
        .map(|&n| {
            let p = params.with_n_cells(n)?;
            Ok((n as f64, scatter(probe_energy, &p)?.big_t.ln()))
        })
        .collect::<Result<_>>()?;
    Ok(least_squares_slope(&samples))
}

pub fn least_squares_slope(samples: &[(f64, f64)]) -> f64 {
    let m = samples.len() as f64;
    let mean_x = samples.iter().map(|s| s.0).sum::<f64>() / m;
    let mean_y = samples.iter().map(|s| s.1).sum::<f64>() / m;
    let sxy: f64 = samples.iter().map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = samples.iter().map(|(x, _)| (x - mean_x).powi(2)).sum();
    sxy / sxx
}

/// Aggregated band-structure measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandReport {
    /// `None` when no gap can be bracketed.
    pub gap_edges: Option<(f64, f64)>,
    pub nominal_gap: (f64, f64),
    pub dicke_halfwidth: Option<f64>,
    pub dicke_nominal: f64,
    pub attenuation_slope: Option<f64>,
    pub kappa_reference: Option<f64>,
}

/// Builds a [`BandReport`]; measurements that do not apply are left empty.
pub fn band_report(params: &ModelParams, probe_energy: f64, n_range: &[usize]) -> BandReport {
    let gamma = params.gamma();
    let w0 = params.omega0();
    let gap_edges = find_band_edges(params).ok().map(|e| match (e.central_band, e.outer) {
        (true, Some(outer)) => outer,
        _ => (e.lower, e.upper),
    });
    let dicke_halfwidth = measure_halfwidth(params, Feature::CentralPeak).ok();
    let dicke_nominal = if gamma > 0.0 { params.delta_omega().powi(2) / (2.0 * gamma) } else { 0.0 };
    let kappa_reference = decay_rate(probe_energy, params).ok();
    let attenuation_slope = gap_attenuation(params, probe_energy, n_range).ok();
    BandReport {
        gap_edges,
        nominal_gap: (w0 - 2.0 * gamma, w0 + 2.0 * gamma),
        dicke_halfwidth,
        dicke_nominal,
        attenuation_slope,
        kappa_reference,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn uncoupled_sweep_is_transparent() {
        let p = ModelParams::new(0.0, 1.0, 0.0, 0.0, 0.0, 4).unwrap();
        let s = sweep(&p, &uniform_grid(-1.9, 1.9, 101)).unwrap();
        assert!(s.transmission().all(|t| (t - 1.0).abs() < 1e-12));
        assert_eq!(s.grid_over_gamma(), None);
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let p = ModelParams::in_gamma_units(10.0, 0.0, 1).unwrap();
        assert!(sweep(&p, &[]).is_err());
        assert!(sweep(&p, &[0.0, 0.0]).is_err());
        assert!(sweep(&p, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn sweep_tags_poles_and_lead_edges() {
        let p = ModelParams::in_gamma_units(10.0, 0.5, 3).unwrap();
        let s = sweep(&p, &[-25.0, -0.5, 0.0, 0.5]).unwrap();
        assert_eq!(s.points[0].regime, Regime::LeadBandEdge);
        assert!(s.points[0].big_t.is_nan());
        assert_eq!(s.points[1].regime, Regime::AtomPole);
        assert_eq!((s.points[1].big_t, s.points[1].big_r), (0.0, 1.0));
        assert!((s.points[2].big_t - 1.0).abs() < 1e-12);
        assert_eq!(s.points[3].regime, Regime::AtomPole);
    }

    #[test]
    fn sweep_is_deterministic() {
        let p = ModelParams::in_gamma_units(10.0, 0.25, 7).unwrap();
        let grid = uniform_grid(-6.0, 6.0, 2001);
        let a = sweep(&p, &grid).unwrap();
        let b = sweep(&p, &grid).unwrap();
        for (x, y) in a.points.iter().zip(&b.points) {
            assert_eq!(x.big_t.to_bits(), y.big_t.to_bits());
            assert_eq!(x.r.re.to_bits(), y.r.re.to_bits());
        }
    }

    #[test]
    fn mirror_window_for_seven_cells() {
        let p = ModelParams::in_gamma_units(10.0, 0.0, 7).unwrap();
        let s = sweep(&p, &uniform_grid(-6.0, 6.0, 2001)).unwrap();
        let worst = s
            .points
            .iter()
            .filter(|pt| pt.detuning.abs() <= 1.8)
            .map(|pt| pt.big_t)
            .fold(0.0, f64::max);
        assert!(worst < 0.01, "max in-gap T = {worst}");
    }

    #[test]
    fn degenerate_band_edges_match_quadratic_roots() {
        // x = ±1 with Δω = 0, ω = ω₀: s² ∓ 2v s − 2g² = 0, nearest roots ±(√(v² + 2g²) − v).
        let p = ModelParams::in_gamma_units(10.0, 0.0, 7).unwrap();
        let edges = find_band_edges(&p).unwrap();
        let expected = (p.v().powi(2) + 2.0 * p.g().powi(2)).sqrt() - p.v();
        assert!(!edges.central_band);
        assert_relative_eq!(edges.upper, expected, max_relative = 1e-10);
        assert_relative_eq!(edges.lower, -expected, max_relative = 1e-10);
        for e in [edges.lower, edges.upper] {
            let x = classify(e, &p).bloch_cosine.unwrap();
            assert!((x.abs() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn uncoupled_chain_has_no_gap() {
        let p = ModelParams::new(0.0, 1.0, 0.0, 0.0, 0.0, 3).unwrap();
        assert_eq!(find_band_edges(&p), Err(TransportError::NoGap));
    }

    #[test]
    fn central_band_edges_match_dense_scan() {
        let p = ModelParams::in_gamma_units(10.0, 0.5, 5).unwrap();
        let edges = find_band_edges(&p).unwrap();
        assert!(edges.central_band);
        assert!(p.level_e() < edges.lower && edges.lower < 0.0);
        assert!(0.0 < edges.upper && edges.upper < p.level_a());
        // Independent scan: the last allowed grid point before the first gap point.
        let grid = uniform_grid(0.0, 0.5, 200_001);
        let scan_edge = grid
            .windows(2)
            .find(|w| {
                let x = |e: f64| classify(e, &p).bloch_cosine.map_or(f64::INFINITY, f64::abs);
                x(w[0]) <= 1.0 && x(w[1]) > 1.0
            })
            .unwrap()[0];
        assert!((edges.upper - scan_edge).abs() < 1e-5);
        let (outer_lo, outer_hi) = edges.outer.unwrap();
        assert!(outer_lo < p.level_e() && outer_hi > p.level_a());
    }

    #[test]
    fn central_peak_absent_without_detuning() {
        let p = ModelParams::in_gamma_units(10.0, 0.0, 1).unwrap();
        assert!(matches!(
            measure_halfwidth(&p, Feature::CentralPeak),
            Err(TransportError::FeatureAbsent(_))
        ));
        let split = p.with_delta_omega(0.5).unwrap();
        assert!(matches!(
            measure_halfwidth(&split, Feature::ReflectionPeak),
            Err(TransportError::FeatureAbsent(_))
        ));
    }

    #[test]
    fn halfwidths_re_evaluate_to_half_maximum() {
        for dw in [0.05, 0.1, 0.2, 0.5] {
            let p = ModelParams::in_gamma_units(10.0, dw, 1).unwrap();
            let w = measure_halfwidth(&p, Feature::CentralPeak).unwrap();
            for e in [w, -w] {
                assert!((scatter(e, &p).unwrap().big_t - 0.5).abs() < 1e-8, "dw={dw}");
            }
            let dip = measure_halfwidth(&p, Feature::ReflectionDip).unwrap();
            assert_relative_eq!(dip, w, max_relative = 1e-9);
        }
    }

    #[test]
    fn reflection_peak_width_is_broad_width() {
        // Exact crossing at v = 10γ solves s²(1 − s²/400) = 4.
        let p = ModelParams::in_gamma_units(10.0, 0.0, 1).unwrap();
        let w = measure_halfwidth(&p, Feature::ReflectionPeak).unwrap();
        assert_relative_eq!(w, 2.010_179_240_104_164, max_relative = 1e-9);
    }

    #[test]
    fn narrow_width_follows_quadratic_law() {
        // Wide-band single cell (sin k → 1): half maximum solves s² + 2γ s − Δω² = 0.
        let p = ModelParams::in_gamma_units(1e4, 0.1, 1).unwrap();
        let w = measure_halfwidth(&p, Feature::CentralPeak).unwrap();
        let expected = -1.0 + (1.0f64 + 0.01).sqrt();
        assert_relative_eq!(w, expected, max_relative = 1e-6);
        assert_relative_eq!(w, 0.1f64.powi(2) / 2.0, max_relative = 0.01);
    }

    #[test]
    fn attenuation_matches_decay_rate() {
        let p = ModelParams::in_gamma_units(10.0, 0.0, 5).unwrap();
        let n_range: Vec<usize> = (5..=20).collect();
        let slope = gap_attenuation(&p, 1.0, &n_range).unwrap();
        let kappa = decay_rate(1.0, &p).unwrap();
        assert_relative_eq!(slope, -2.0 * kappa, max_relative = 1e-6);
        assert!(matches!(
            gap_attenuation(&p, 8.0, &n_range),
            Err(TransportError::NotEvanescent { .. })
        ));
    }

    #[test]
    fn report_for_uncoupled_chain_marks_no_gap() {
        let p = ModelParams::new(0.0, 10.0, 0.0, 0.0, 0.0, 1).unwrap();
        let r = band_report(&p, 1.0, &[5, 6, 7]);
        assert_eq!(r.gap_edges, None);
        assert_eq!(r.attenuation_slope, None);
    }

    #[test]
    fn least_squares_on_exact_line() {
        let samples: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 - 0.7 * i as f64)).collect();
        assert_relative_eq!(least_squares_slope(&samples), -0.7, epsilon = 1e-14);
    }
}
