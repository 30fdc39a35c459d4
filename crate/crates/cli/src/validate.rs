//! Cross-checks between independent solvers, run by `giant-sse validate`.

use giant_sse::correlation::default_omega_floor;
use giant_sse::dynamics::{initial_density, master_equation_solve};
use giant_sse::hilbert::trace_distance;
use giant_sse::oracle::{short_time_curvature, solve_double_excitation, solve_single_excitation, total_coupling_weight};
use giant_sse::osolver::evolve_matrix_field;
use giant_sse::thermal::{evolve_dual_field_thermal, thermal_master_solve};
use giant_sse::{C, CorrelationKernel, QubitOperator, StateVector, ThermalKernelPair};

use crate::config::Method;
use crate::run::couplings;
use crate::scenario;
use crate::Result;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Largest absolute difference of populations and concurrence between the
/// master equation and the single-excitation oracle on the `comb2` grid.
pub fn master_vs_single_oracle() -> Result<Check> {
    let mut cfg = scenario::builtin("comb2")?;
    cfg.method = Method::Master;
    let r = cfg.resolve(Default::default())?;
    let mc = couplings(&r)?;
    let (dt, t) = (r.dt, cfg.time.t_max);
    let k = CorrelationKernel::from_modes(&mc, dt, t)?;
    let field = evolve_matrix_field(&k, cfg.omega, dt, t)?;
    let me = master_equation_solve(&initial_density(&r.initial)?, &field, field.hamiltonian(), dt, t)?;
    let or = solve_single_excitation(&mc, &r.initial, dt, t, usize::MAX)?.reduced;
    let mut worst = 0.0f64;
    for (x, y) in me.states.iter().zip(or.states.iter()) {
        let (p, q) = (x.populations(), y.populations());
        for d in [p.ee - q.ee, p.eg - q.eg, p.ge - q.ge, p.gg - q.gg, x.concurrence()? - y.concurrence()?] {
            worst = worst.max(d.abs());
        }
    }
    Ok(Check { name: "master equation vs single-excitation oracle", passed: worst < 1e-2, detail: format!("max |Δ| = {worst:.2e} (limit 1e-2)") })
}

/// Short-time curvature of `|C_ee(t)|²` against `Σ|G|²`.
pub fn double_oracle_short_time() -> Result<Check> {
    let mut cfg = scenario::builtin("comb2")?;
    cfg.method = Method::Dressed2;
    cfg.initial = crate::config::Initial::Ee;
    cfg.time.t_max = 0.1;
    cfg.time.dt = Some(1e-3);
    let r = cfg.resolve(Default::default())?;
    let mc = couplings(&r)?;
    let run = solve_double_excitation(&mc, 1e-3, 0.1, 1, cfg.mode_cap)?;
    let samples: Vec<(f64, f64)> = run.states.iter().skip(1).map(|s| (s.time, 1.0 - s.both.norm_sqr())).collect();
    let got = short_time_curvature(&samples);
    let want = total_coupling_weight(&mc);
    let rel = (got / want - 1.0).abs();
    Ok(Check { name: "two-excitation short-time expansion", passed: rel < 1e-2, detail: format!("curvature {got:.6} vs Σ|G|² {want:.6} (rel {rel:.2e})") })
}

/// Thermal machinery at a very cold bath against the vacuum path.
pub fn cold_thermal_vs_vacuum() -> Result<Check> {
    let mut cfg = scenario::builtin("comb2")?;
    cfg.method = Method::Master;
    cfg.time.t_max = 4.0;
    let r = cfg.resolve(Default::default())?;
    let mc = couplings(&r)?;
    let (dt, t) = (r.dt, cfg.time.t_max);
    let rho0 = initial_density(&StateVector::eg())?;
    let k = CorrelationKernel::from_modes(&mc, dt, t)?;
    let field = evolve_matrix_field(&k, cfg.omega, dt, t)?;
    let vac = master_equation_solve(&rho0, &field, field.hamiltonian(), dt, t)?;
    let pair = ThermalKernelPair::from_modes(&mc, 1000.0, default_omega_floor(&mc), dt, t)?;
    let h = QubitOperator::atomic_hamiltonian(cfg.omega[0], cfg.omega[1]);
    let dual = evolve_dual_field_thermal(&pair, h, dt, t)?;
    let th = thermal_master_solve(&rho0, &dual, dt, t)?;
    let worst = vac.states.iter().zip(th.states.iter()).map(|(a, b)| trace_distance(a, b)).fold(0.0, f64::max);
    Ok(Check { name: "cold thermal bath vs vacuum", passed: worst <= 1e-6, detail: format!("max trace distance {worst:.2e} (limit 1e-6)") })
}

/// Near-delta kernel: singlet stationarity and the |ee⟩ decay rate.
pub fn markov_limit() -> Result<Check> {
    let (gamma, dt, t) = (1.0, 2e-3, 3.0);
    let k = CorrelationKernel::near_delta([C::new(gamma, 0.0); 4], 200.0, dt, t)?;
    let field = evolve_matrix_field(&k, [1.0, 1.0], dt, t)?;
    let singlet = initial_density(&StateVector::bell(-1.0))?;
    let s = master_equation_solve(&singlet, &field, field.hamiltonian(), dt, t)?;
    let drift = s.states.iter().map(|r| (r.populations().eg + r.populations().ge - 1.0f64).abs()).fold(0.0, f64::max);
    let ee = master_equation_solve(&initial_density(&StateVector::ee())?, &field, field.hamiltonian(), dt, t)?;
    let rate = decay_rate(&ee.times(), &ee.states.iter().map(|r| r.populations().ee).collect::<Vec<_>>(), 0.5, 2.5) / 2.0;
    let rel = (rate / gamma - 1.0).abs();
    Ok(Check {
        name: "Markov limit",
        passed: drift < 1e-3 && rel < 2e-2,
        detail: format!("singlet drift {drift:.2e} (limit 1e-3), rate {rate:.4} vs Γ = {gamma} (rel {rel:.2e}, limit 2e-2)"),
    })
}

/// Least-squares slope of `−ln p` over `t ∈ [lo, hi]`.
pub fn decay_rate(times: &[f64], p: &[f64], lo: f64, hi: f64) -> f64 {
    let pts: Vec<(f64, f64)> = times.iter().zip(p).filter(|(t, _)| **t >= lo && **t <= hi).map(|(t, p)| (*t, -p.ln())).collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx).powi(2)));
    num / den
}

pub fn all() -> Vec<Result<Check>> {
    vec![master_vs_single_oracle(), double_oracle_short_time(), markov_limit(), cold_thermal_vs_vacuum()]
}
