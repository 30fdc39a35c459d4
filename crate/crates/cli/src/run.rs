//! Executes one resolved configuration.

use giant_sse::correlation::{default_omega_floor, SqueezeProfile};
use giant_sse::dynamics::{ensemble_average, initial_density, lindblad_solve, master_equation_solve, subsample};
use giant_sse::noise::NoiseSampler;
use giant_sse::oracle::{solve_double_excitation, solve_single_excitation};
use giant_sse::osolver::evolve_matrix_field;
use giant_sse::thermal::{evolve_dual_field_squeezed, evolve_dual_field_thermal, thermal_master_solve};
use giant_sse::{
    CorrelationKernel, DensitySeries, EnsembleSettings, ModeCouplings, ModeGrid, QubitOperator, SamplingMeasure,
    SqueezedKernelPair, ThermalKernelPair,
};
use std::time::{Duration, Instant};

use crate::config::{BathSpec, Method, Resolved};
use crate::Result;

/// Result of one cell.
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Reduced density matrices at the output stride.
    pub series: DensitySeries<f64>,
    pub excluded: usize,
    pub trajectories: usize,
    pub elapsed: Duration,
}

impl RunOutput {
    pub fn concurrence(&self) -> Result<Vec<f64>> {
        Ok(self.series.concurrence()?)
    }
}

pub fn couplings(r: &Resolved) -> Result<ModeCouplings<f64>> {
    let grid = ModeGrid::new(r.k_max, r.modes, r.config.time.t_max)?;
    Ok(ModeCouplings::new(&r.a, &r.b, grid, r.config.omega))
}

pub fn kernel(r: &Resolved) -> Result<CorrelationKernel<f64>> {
    let mc = couplings(r)?;
    Ok(CorrelationKernel::from_modes(&mc, r.dt, r.config.time.t_max)?)
}

fn squeeze_profile(r: f64, center: Option<f64>, width: Option<f64>) -> SqueezeProfile<f64> {
    match (center, width) {
        (Some(center), Some(width)) => SqueezeProfile::Band { r, center, width },
        _ => SqueezeProfile::Constant(r),
    }
}

pub fn run(r: &Resolved) -> Result<RunOutput> {
    let start = Instant::now();
    let cfg = &r.config;
    let t = cfg.time.t_max;
    let dt = r.dt;
    let stride = cfg.time.output_stride;
    let mc = couplings(r)?;
    let h = QubitOperator::atomic_hamiltonian(cfg.omega[0], cfg.omega[1]);
    let rho0 = initial_density(&r.initial)?;
    let bath = cfg.bath.clone().unwrap_or(BathSpec::Vacuum);
    let mut excluded = 0;
    let mut trajectories = 0;

    let series = match cfg.method {
        Method::Master => match bath {
            BathSpec::Vacuum => {
                let k = CorrelationKernel::from_modes(&mc, dt, t)?;
                let field = evolve_matrix_field(&k, cfg.omega, dt, t)?;
                subsample(&master_equation_solve(&rho0, &field, field.hamiltonian(), dt, t)?, stride)
            }
            BathSpec::Thermal { beta, omega_floor } => {
                let floor = omega_floor.unwrap_or_else(|| default_omega_floor(&mc));
                let pair = ThermalKernelPair::from_modes(&mc, beta, floor, dt, t)?;
                let dual = evolve_dual_field_thermal(&pair, h, dt, t)?;
                subsample(&thermal_master_solve(&rho0, &dual, dt, t)?, stride)
            }
            BathSpec::Squeezed { .. } => unreachable!("rejected by validation"),
        },
        Method::Sse => {
            let e = cfg.ensemble.clone().unwrap_or_default();
            let mut settings = EnsembleSettings::new(e.trajectories, e.seed);
            settings.stride = stride;
            let res = match bath {
                BathSpec::Vacuum => {
                    let k = CorrelationKernel::from_modes(&mc, dt, t)?;
                    let field = evolve_matrix_field(&k, cfg.omega, dt, t)?;
                    let sampler = NoiseSampler::vacuum(&mc, dt, t)?;
                    ensemble_average(&r.initial, &sampler, &field, t, &settings)?
                }
                BathSpec::Thermal { beta, omega_floor } => {
                    let floor = omega_floor.unwrap_or_else(|| default_omega_floor(&mc));
                    let pair = ThermalKernelPair::from_modes(&mc, beta, floor, dt, t)?;
                    let dual = evolve_dual_field_thermal(&pair, h, dt, t)?;
                    let sampler = NoiseSampler::thermal(&mc, &pair, dt, t)?;
                    ensemble_average(&r.initial, &sampler, &dual.field, t, &settings)?
                }
                BathSpec::Squeezed { r: sq, band_center, band_width } => {
                    let profile = squeeze_profile(sq, band_center, band_width);
                    let pair = SqueezedKernelPair::from_modes(&mc, profile, dt, t)?;
                    let dual = evolve_dual_field_squeezed(&pair, h, dt, t)?;
                    let sampler = NoiseSampler::squeezed(&mc, profile, SamplingMeasure::Bargmann, dt, t)?;
                    ensemble_average(&r.initial, &sampler, &dual.field, t, &settings)?
                }
            };
            excluded = res.excluded;
            trajectories = res.total;
            res.series
        }
        Method::Lindblad => {
            let gamma = r.a.markov_rate(cfg.omega[0]);
            subsample(&lindblad_solve(gamma, cfg.omega, &rho0, dt, t)?, stride)
        }
        Method::Dressed1 => subsample(&solve_single_excitation(&mc, &r.initial, dt, t, usize::MAX)?.reduced, stride),
        Method::Dressed2 => subsample(&solve_double_excitation(&mc, dt, t, usize::MAX, cfg.mode_cap)?.reduced, stride),
    };
    Ok(RunOutput { series, excluded, trajectories, elapsed: start.elapsed() })
}
