//! Randomized cross-check of the closed forms against the three oracles.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::TransportError;
use crate::model::{classify, ModelParams};
use crate::oracle::{solve_full_system, solve_reduced_system, solve_transfer_matrix};
use crate::scattering::{probabilities_closed_form, transmission_amplitude};

pub const AGREEMENT_TOLERANCE: f64 = 1e-10;
pub const UNITARITY_TOLERANCE: f64 = 1e-12;
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-10;

/// Draws closer than this to an atomic level are rejected and redrawn.
const POLE_EXCLUSION: f64 = 1e-6;

/// One random parameter set and energy, with v = 1 and ω = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Draw {
    pub index: usize,
    pub n_cells: usize,
    pub g: f64,
    pub delta_omega_over_gamma: f64,
    pub omega0: f64,
    pub energy: f64,
}

impl Draw {
    pub fn params(&self) -> ModelParams {
        let gamma = self.g * self.g / 2.0;
        ModelParams::new(0.0, 1.0, self.g, self.omega0, self.delta_omega_over_gamma * gamma, self.n_cells)
            .expect("draw ranges are valid model parameters")
    }
}

/// Deterministic stream of draws: N ∈ 1..=10, g ∈ [0, 2], Δω/γ ∈ [0, 3],
/// ω₀ ∈ [−0.5, 0.5], E ∈ [−1.998, 1.998].
pub struct DrawGenerator {
    rng: ChaCha8Rng,
    next_index: usize,
}

impl DrawGenerator {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), next_index: 0 }
    }
}

impl Iterator for DrawGenerator {
    type Item = Draw;

    fn next(&mut self) -> Option<Draw> {
        loop {
            let draw = Draw {
                index: self.next_index,
                n_cells: self.rng.gen_range(1..=10),
                g: self.rng.gen_range(0.0..=2.0),
                delta_omega_over_gamma: self.rng.gen_range(0.0..=3.0),
                omega0: self.rng.gen_range(-0.5..=0.5),
                energy: self.rng.gen_range(-1.998..=1.998),
            };
            let p = draw.params();
            if p.g() > 0.0
                && [p.level_a(), p.level_e()].iter().any(|l| (draw.energy - l).abs() < POLE_EXCLUSION)
            {
                continue;
            }
            self.next_index += 1;
            return Some(draw);
        }
    }
}

/// Deviations measured for one draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DrawCheck {
    pub draw: Draw,
    /// Largest |Δr|, |Δt| between the closed form and any oracle.
    pub oracle_deviation: f64,
    pub unitarity_deviation: f64,
    pub closed_form_deviation: f64,
}

impl DrawCheck {
    pub fn passes(&self) -> bool {
        self.oracle_deviation <= AGREEMENT_TOLERANCE
            && self.unitarity_deviation <= UNITARITY_TOLERANCE
            && self.closed_form_deviation <= CLOSED_FORM_TOLERANCE
    }
}

fn max_dev(reference: (Complex64, Complex64), other: (Complex64, Complex64)) -> f64 {
    (reference.0 - other.0).norm().max((reference.1 - other.1).norm())
}

/// Compares every route at one draw; `Ok(None)` when an oracle system is singular.
///
/// `fault` scales the closed-form t by (1 + fault) to exercise the failure path.
pub fn check_draw(draw: &Draw, fault: f64) -> crate::Result<Option<DrawCheck>> {
    let params = draw.params();
    let point = classify(draw.energy, &params);
    let amps = transmission_amplitude(&point, &params)?;
    let analytic = (amps.r, amps.t * (1.0 + fault));

    let skip_singular = |e: TransportError| match e {
        TransportError::SingularSystem { .. } => Ok(None),
        other => Err(other),
    };
    let full = match solve_full_system(draw.energy, &params) {
        Ok(s) => (s.r, s.t),
        Err(e) => return skip_singular(e),
    };
    let reduced = match solve_reduced_system(draw.energy, &params) {
        Ok(s) => (s.r, s.t),
        Err(e) => return skip_singular(e),
    };
    let transfer = match solve_transfer_matrix(draw.energy, &params) {
        Ok(s) => (s.r, s.t),
        Err(e) => return skip_singular(e),
    };

    let oracle_deviation = max_dev(analytic, full).max(max_dev(analytic, reduced)).max(max_dev(analytic, transfer));
    let unitarity_deviation = (analytic.0.norm_sqr() + analytic.1.norm_sqr() - 1.0).abs();
    let (big_r, big_t) = probabilities_closed_form(&point, &params)?;
    let closed_form_deviation =
        (big_r - analytic.0.norm_sqr()).abs().max((big_t - analytic.1.norm_sqr()).abs());

    Ok(Some(DrawCheck { draw: *draw, oracle_deviation, unitarity_deviation, closed_form_deviation }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestSummary {
    pub seed: u64,
    pub checked: usize,
    pub skipped: usize,
    pub max_oracle_deviation: f64,
    pub max_unitarity_deviation: f64,
    pub max_closed_form_deviation: f64,
    pub first_failure: Option<DrawCheck>,
}

impl SelftestSummary {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Checks draws until `draws` of them have been compared (singular systems
/// are skipped and replaced), stopping at the first failure.
pub fn run(seed: u64, draws: usize, fault: f64) -> crate::Result<SelftestSummary> {
    let mut summary = SelftestSummary {
        seed,
        checked: 0,
        skipped: 0,
        max_oracle_deviation: 0.0,
        max_unitarity_deviation: 0.0,
        max_closed_form_deviation: 0.0,
        first_failure: None,
    };
    let mut generator = DrawGenerator::new(seed);
    while summary.checked < draws {
        let draw = generator.next().expect("generator is infinite");
        let Some(check) = check_draw(&draw, fault)? else {
            summary.skipped += 1;
            continue;
        };
        summary.checked += 1;
        summary.max_oracle_deviation = summary.max_oracle_deviation.max(check.oracle_deviation);
        summary.max_unitarity_deviation = summary.max_unitarity_deviation.max(check.unitarity_deviation);
        summary.max_closed_form_deviation = summary.max_closed_form_deviation.max(check.closed_form_deviation);
        if !check.passes() {
            summary.first_failure = Some(check);
            break;
        }
    }
    Ok(summary)
}
