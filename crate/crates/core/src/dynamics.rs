//! Linear stochastic trajectories, their ensemble average, and the
//! deterministic master equation built from the same Ō tables.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{Atom, DensityMatrix, QubitOperator, StateVector};
use crate::noise::{NoiseRealization, NoiseSampler};
use crate::osolver::{OField, ObarSource};
use crate::scalar::{c, cr, Real, C};
use crate::stats::ComplexMoments;

type Op<T> = QubitOperator<T>;

/// Trace drift that aborts a deterministic solve.
pub const TRACE_DRIFT_LIMIT: f64 = 1e-6;

/// Time series of density matrices on `t_n = n·dt`, optionally with
/// per-entry standard errors (real and imaginary parts stored separately).
#[derive(Debug, Clone)]
pub struct DensitySeries<T: Real> {
    pub dt: T,
    pub states: Vec<DensityMatrix<T>>,
    pub std_errors: Option<Vec<Op<T>>>,
}

impl<T: Real> DensitySeries<T> {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn times(&self) -> Vec<T> {
        self.states.iter().map(|r| r.time).collect()
    }

    pub fn last(&self) -> &DensityMatrix<T> {
        self.states.last().expect("non-empty series")
    }

    /// State at the grid point nearest to `t`.
    pub fn at_time(&self, t: T) -> &DensityMatrix<T> {
        let n = (t / self.dt).round().to_usize().unwrap_or(0).min(self.states.len() - 1);
        &self.states[n]
    }

    /// Concurrence at every time.
    pub fn concurrence(&self) -> Result<Vec<T>> {
        self.states.iter().map(|r| r.concurrence()).collect()
    }
}

/// `−i[H, ρ] + Σ ([L, ρŌ†] + h.c.)`.
fn master_rhs<T: Real>(h: &Op<T>, rho: &Op<T>, terms: &[(Op<T>, Op<T>)]) -> Op<T> {
    let mi = c(T::zero(), -T::one());
    let mut out = h.commutator(rho).scale_c(mi);
    for (l, ob) in terms {
        let x = l.commutator(&(*rho * ob.dagger()));
        out += x + x.dagger();
    }
    out
}

fn time_steps<T: Real>(dt: T, t_max: T) -> Result<usize> {
    if !(dt > T::zero()) || !(t_max >= T::zero()) || !t_max.is_finite() {
        return Err(Error::Config("integration needs dt > 0 and finite t_max >= 0".into()));
    }
    Ok((t_max / dt).round().to_usize().unwrap_or(0))
}

/// Generic RK4 driver for `dρ/dt = f(t, ρ)` with Hermitian re-symmetrization
/// and a trace-drift guard.
fn integrate_density<T: Real>(
    initial: &DensityMatrix<T>,
    dt: T,
    t_max: T,
    mut f: impl FnMut(T, &Op<T>) -> Op<T>,
) -> Result<DensitySeries<T>> {
    initial.validate(T::lit(1e-8))?;
    let steps = time_steps(dt, t_max)?;
    let half = T::lit(0.5);
    let sixth = T::one() / T::lit(6.0);
    let tr0 = initial.trace();
    let t0 = initial.time;
    let mut rho = initial.op;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(DensityMatrix::from_operator(rho, t0));
    for n in 0..steps {
        let t = t0 + dt * T::from_usize_lossy(n);
        let k1 = f(t, &rho);
        let k2 = f(t + dt * half, &(rho + k1.scale(dt * half)));
        let k3 = f(t + dt * half, &(rho + k2.scale(dt * half)));
        let k4 = f(t + dt, &(rho + k3.scale(dt)));
        rho = rho + (k1 + k2.scale(T::lit(2.0)) + k3.scale(T::lit(2.0)) + k4).scale(dt * sixth);
        rho = rho.hermitian_part();
        let t_next = t0 + dt * T::from_usize_lossy(n + 1);
        if !rho.is_finite() {
            return Err(Error::Integrator { t: t_next.to_f64_lossy(), reason: "non-finite density matrix".into() });
        }
        let drift = (rho.trace().re - tr0).abs();
        if drift > T::lit(TRACE_DRIFT_LIMIT) {
            return Err(Error::TraceDrift { t: t_next.to_f64_lossy(), drift: drift.to_f64_lossy() });
        }
        states.push(DensityMatrix::from_operator(rho, t_next));
    }
    Ok(DensitySeries { dt, states, std_errors: None })
}

/// RK4 solution of `dρ/dt = −i[H_A, ρ] + Σ ([L, ρŌ†] + h.c.)`, with Ō taken
/// from `source` (linearly interpolated at half steps).
pub fn master_equation_solve<T: Real, S: ObarSource<T> + ?Sized>(
    initial: &DensityMatrix<T>,
    source: &S,
    hamiltonian: &Op<T>,
    dt: T,
    t_max: T,
) -> Result<DensitySeries<T>> {
    source.check_master_form()?;
    let mut terms = Vec::new();
    integrate_density(initial, dt, t_max, |t, rho| {
        source.master_terms(t, &mut terms);
        master_rhs(hamiltonian, rho, &terms)
    })
}

/// Collective decay `dρ/dt = −i[H_A, ρ] + Γ(JρJ† − ½{J†J, ρ})`, `J = σ_a⁻ + σ_b⁻`.
pub fn lindblad_solve<T: Real>(
    gamma: T,
    omega: [T; 2],
    initial: &DensityMatrix<T>,
    dt: T,
    t_max: T,
) -> Result<DensitySeries<T>> {
    let h = Op::atomic_hamiltonian(omega[0], omega[1]);
    let j = Op::sigma_minus(Atom::A) + Op::sigma_minus(Atom::B);
    let jd = j.dagger();
    let jdj = jd * j;
    let mi = c(T::zero(), -T::one());
    let half = T::lit(0.5);
    integrate_density(initial, dt, t_max, |_, rho| {
        let anti = jdj * *rho + *rho * jdj;
        h.commutator(rho).scale_c(mi) + (j * *rho * jd - anti.scale(half)).scale(gamma)
    })
}

/// Closed-form collective decay from |eg⟩ at equal frequencies:
/// `(P_eg, P_ge, ρ_{eg,ge})`.
pub fn collective_decay_from_eg<T: Real>(gamma: T, t: T) -> (T, T, T) {
    let e = (-gamma * t).exp();
    let q = T::lit(0.25);
    (q * (T::one() + e).powi(2), q * (T::one() - e).powi(2), q * (e * e - T::one()))
}

/// Generator pieces shared by every trajectory on one grid.
pub struct TrajectoryPropagator<'a, T: Real> {
    field: &'a OField<T>,
    dt: T,
    steps: usize,
    /// `−iH_A − drift` at grid points and midpoints.
    base: Vec<Op<T>>,
    base_mid: Vec<Op<T>>,
    noise_ops: Vec<[Op<T>; 2]>,
}

/// Trajectories whose norm passes this are treated as diverged.
pub const DIVERGENCE_NORM: f64 = 1e12;

impl<'a, T: Real> TrajectoryPropagator<'a, T> {
    pub fn new(field: &'a OField<T>, t_max: T) -> Result<Self> {
        let dt = field.dt();
        let steps = time_steps(dt, t_max)?;
        if steps > field.steps() {
            return Err(Error::Config("O-field does not cover the trajectory horizon".into()));
        }
        let mi = c(T::zero(), -T::one());
        let h = field.hamiltonian().scale_c(mi);
        let half = T::lit(0.5);
        let base = (0..=steps).map(|n| h - field.drift(dt * T::from_usize_lossy(n))).collect();
        let base_mid = (0..steps)
            .map(|n| h - field.drift(dt * (T::from_usize_lossy(n) + half)))
            .collect();
        let noise_ops = field.channels().iter().map(|ch| ch.initial).collect();
        Ok(Self { field, dt, steps, base, base_mid, noise_ops })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn field(&self) -> &OField<T> {
        self.field
    }

    fn generator(&self, base: &Op<T>, noise: &[[C<T>; 2]]) -> Op<T> {
        let mut g = *base;
        for (ops, z) in self.noise_ops.iter().zip(noise.iter()) {
            for m in 0..2 {
                if z[m].norm_sqr() > T::zero() {
                    g.axpy(z[m], &ops[m]);
                }
            }
        }
        g
    }

    /// RK4 propagation of one linear trajectory; noise is interpolated
    /// linearly to half steps. Returns the state at every grid time.
    pub fn propagate(&self, initial: &StateVector<T>, noise: &NoiseRealization<T>) -> Result<Vec<StateVector<T>>> {
        if noise.channels.len() != self.noise_ops.len() {
            return Err(Error::DimensionMismatch(format!(
                "noise has {} channels, field has {}",
                noise.channels.len(),
                self.noise_ops.len()
            )));
        }
        if noise.len() < self.steps + 1 || (noise.dt - self.dt).abs() > self.dt * T::lit(1e-9) {
            return Err(Error::DimensionMismatch("noise and O-field grids differ".into()));
        }
        let half = T::lit(0.5);
        let sixth = T::one() / T::lit(6.0);
        let at = |n: usize| -> Vec<[C<T>; 2]> { noise.channels.iter().map(|ch| [ch[0][n], ch[1][n]]).collect() };
        let mut psi = *initial;
        let mut out = Vec::with_capacity(self.steps + 1);
        out.push(psi);
        let mut z_now = at(0);
        for n in 0..self.steps {
            let z_next = at(n + 1);
            let z_mid: Vec<[C<T>; 2]> = z_now
                .iter()
                .zip(z_next.iter())
                .map(|(a, b)| [(a[0] + b[0]) * half, (a[1] + b[1]) * half])
                .collect();
            let g0 = self.generator(&self.base[n], &z_now);
            let gm = self.generator(&self.base_mid[n], &z_mid);
            let g1 = self.generator(&self.base[n + 1], &z_next);
            let k1 = g0.apply(&psi);
            let k2 = gm.apply(&psi.add_scaled(self.dt * half, &k1));
            let k3 = gm.apply(&psi.add_scaled(self.dt * half, &k2));
            let k4 = g1.apply(&psi.add_scaled(self.dt, &k3));
            let mut next = psi;
            for i in 0..4 {
                next.amps[i] += (k1.amps[i] + (k2.amps[i] + k3.amps[i]) * T::lit(2.0) + k4.amps[i]) * (self.dt * sixth);
            }
            psi = next;
            if !psi.is_finite() || psi.norm_sqr() > T::lit(DIVERGENCE_NORM) {
                return Err(Error::Integrator {
                    t: (self.dt * T::from_usize_lossy(n + 1)).to_f64_lossy(),
                    reason: "trajectory diverged".into(),
                });
            }
            out.push(psi);
            z_now = z_next;
        }
        Ok(out)
    }
}

/// Convenience wrapper around [`TrajectoryPropagator::propagate`].
pub fn propagate_trajectory<T: Real>(
    initial: &StateVector<T>,
    noise: &NoiseRealization<T>,
    field: &OField<T>,
    t_max: T,
) -> Result<Vec<StateVector<T>>> {
    TrajectoryPropagator::new(field, t_max)?.propagate(initial, noise)
}

/// Ensemble parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleSettings {
    pub trajectories: usize,
    pub seed: u64,
    /// Keep every `stride`-th grid time.
    pub stride: usize,
    /// Trajectories per work unit. The reduction is over chunks in index
    /// order, so results do not depend on the thread count.
    pub chunk: usize,
}

impl EnsembleSettings {
    pub fn new(trajectories: usize, seed: u64) -> Self {
        Self { trajectories, seed, stride: 1, chunk: 32 }
    }
}

/// Ensemble-averaged density matrices with error bars.
#[derive(Debug, Clone)]
pub struct EnsembleResult<T: Real> {
    pub series: DensitySeries<T>,
    pub excluded: usize,
    pub total: usize,
    /// Trajectory-averaged ⟨ψ|ψ⟩ and its standard error at each kept time.
    pub norm: Vec<(T, T)>,
}

struct Accumulator<T: Real> {
    entries: Vec<[ComplexMoments<T>; 16]>,
    excluded: usize,
}

impl<T: Real> Accumulator<T> {
    fn new(times: usize) -> Self {
        Self { entries: vec![[ComplexMoments::default(); 16]; times], excluded: 0 }
    }

    fn merge(&mut self, other: &Self) {
        for (a, b) in self.entries.iter_mut().zip(other.entries.iter()) {
            for k in 0..16 {
                a[k].merge(&b[k]);
            }
        }
        self.excluded += other.excluded;
    }
}

/// Averages `|ψ(t)⟩⟨ψ(t)|` over `settings.trajectories` noise draws.
/// Diverged trajectories are dropped; more than 0.1% drops is an error.
pub fn ensemble_average<T: Real>(
    initial: &StateVector<T>,
    sampler: &NoiseSampler<T>,
    field: &OField<T>,
    t_max: T,
    settings: &EnsembleSettings,
) -> Result<EnsembleResult<T>> {
    if settings.trajectories < 2 {
        return Err(Error::Config("an ensemble needs at least two trajectories".into()));
    }
    if settings.stride == 0 || settings.chunk == 0 {
        return Err(Error::Config("stride and chunk must be positive".into()));
    }
    if !initial.is_finite() {
        return Err(Error::InvalidState("initial state has non-finite amplitudes".into()));
    }
    let prop = TrajectoryPropagator::new(field, t_max)?;
    if sampler.steps() < prop.steps() {
        return Err(Error::Config("noise grid shorter than the horizon".into()));
    }
    let kept: Vec<usize> = (0..=prop.steps()).step_by(settings.stride).collect();
    let n_chunks = settings.trajectories.div_ceil(settings.chunk);
    let partials: Vec<Accumulator<T>> = (0..n_chunks)
        .into_par_iter()
        .map(|ci| {
            let mut acc = Accumulator::new(kept.len());
            let lo = ci * settings.chunk;
            let hi = (lo + settings.chunk).min(settings.trajectories);
            for idx in lo..hi {
                let noise = sampler.sample(settings.seed, idx as u64);
                match prop.propagate(initial, &noise) {
                    Ok(path) => {
                        for (slot, &n) in acc.entries.iter_mut().zip(kept.iter()) {
                            let psi = &path[n];
                            for i in 0..4 {
                                for j in 0..4 {
                                    slot[4 * i + j].push(psi.amps[i] * psi.amps[j].conj());
                                }
                            }
                        }
                    }
                    Err(_) => acc.excluded += 1,
                }
            }
            acc
        })
        .collect();
    let mut total = Accumulator::new(kept.len());
    for p in &partials {
        total.merge(p);
    }
    let n = settings.trajectories;
    if total.excluded * 1000 > n {
        return Err(Error::Exclusions { excluded: total.excluded, total: n });
    }
    let dt = field.dt();
    let mut states = Vec::with_capacity(kept.len());
    let mut errors = Vec::with_capacity(kept.len());
    let mut norm = Vec::with_capacity(kept.len());
    for (slot, &step) in total.entries.iter().zip(kept.iter()) {
        let mut op = Op::zero();
        let mut se = Op::zero();
        for i in 0..4 {
            for j in 0..4 {
                op[(i, j)] = slot[4 * i + j].mean();
                se[(i, j)] = slot[4 * i + j].std_error();
            }
        }
        let tr = op.trace().re;
        let tr_se = (0..4).fold(T::zero(), |a, i| a + se[(i, i)].re.powi(2)).sqrt();
        norm.push((tr, tr_se));
        states.push(DensityMatrix::from_operator(op.hermitian_part(), dt * T::from_usize_lossy(step)));
        errors.push(se);
    }
    Ok(EnsembleResult {
        series: DensitySeries { dt: dt * T::from_usize_lossy(settings.stride), states, std_errors: Some(errors) },
        excluded: total.excluded,
        total: n,
        norm,
    })
}

/// Largest trace distance between two series sampled at the same times.
pub fn max_trace_distance<T: Real>(a: &DensitySeries<T>, b: &DensitySeries<T>) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("series lengths {} and {}", a.len(), b.len())));
    }
    Ok(a.states
        .iter()
        .zip(b.states.iter())
        .fold(T::zero(), |m, (x, y)| m.max(crate::hilbert::trace_distance(x, y))))
}

/// Every `stride`-th entry of a series.
pub fn subsample<T: Real>(s: &DensitySeries<T>, stride: usize) -> DensitySeries<T> {
    DensitySeries {
        dt: s.dt * T::from_usize_lossy(stride),
        states: s.states.iter().step_by(stride).copied().collect(),
        std_errors: s.std_errors.as_ref().map(|e| e.iter().step_by(stride).copied().collect()),
    }
}

/// Pure state as a density matrix at t = 0, normalized.
pub fn initial_density<T: Real>(psi: &StateVector<T>) -> Result<DensityMatrix<T>> {
    let n = psi.norm_sqr();
    if !(n > T::zero()) || !n.is_finite() {
        return Err(Error::InvalidState("initial state must have positive finite norm".into()));
    }
    Ok(DensityMatrix::pure(&psi.scale(cr(T::one() / n.sqrt())), T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::CorrelationKernel;
    use crate::coupling::{CouplingDistribution, ModeCouplings, ModeGrid};
    use crate::hilbert::{EG, GE};
    use crate::osolver::evolve_matrix_field;
    use approx::assert_abs_diff_eq;

    fn delta_field(gamma: f64, dt: f64, t: f64) -> OField<f64> {
        let k = CorrelationKernel::delta([cr(gamma); 4], dt, t).unwrap();
        evolve_matrix_field(&k, [1.0, 1.0], dt, t).unwrap()
    }

    #[test]
    fn free_evolution_keeps_populations() {
        let k = CorrelationKernel::<f64>::zero(0.01, 2.0).unwrap();
        let f = evolve_matrix_field(&k, [1.0, 1.0], 0.01, 2.0).unwrap();
        let rho0 = initial_density(&StateVector::bell(1.0)).unwrap();
        let s = master_equation_solve(&rho0, &f, f.hamiltonian(), 0.01, 2.0).unwrap();
        let p = s.last().populations();
        assert_abs_diff_eq!(p.eg, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(p.ge, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn delta_kernel_matches_collective_decay() {
        let (gamma, dt, t) = (1.0, 0.01, 5.0);
        let f = delta_field(gamma, dt, t);
        let rho0 = initial_density(&StateVector::eg()).unwrap();
        let me = master_equation_solve(&rho0, &f, f.hamiltonian(), dt, t).unwrap();
        let lb = lindblad_solve(gamma, [1.0, 1.0], &rho0, dt, t).unwrap();
        for (x, y) in me.states.iter().zip(lb.states.iter()) {
            assert!(crate::hilbert::trace_distance(x, y) < 1e-10);
            let (peg, pge, coh) = collective_decay_from_eg(gamma, x.time);
            let p = x.populations();
            assert_abs_diff_eq!(p.eg, peg, epsilon = 1e-8);
            assert_abs_diff_eq!(p.ge, pge, epsilon = 1e-8);
            assert_abs_diff_eq!(x.op[(EG, GE)].re, coh, epsilon = 1e-8);
        }
    }

    #[test]
    fn singlet_is_stationary() {
        let rho0 = initial_density(&StateVector::<f64>::bell(-1.0)).unwrap();
        let lb = lindblad_solve(1.0, [1.0, 1.0], &rho0, 0.01, 4.0).unwrap();
        assert!(crate::hilbert::trace_distance(lb.last(), &rho0) < 1e-12);
    }

    #[test]
    fn double_excitation_decays_monotonically() {
        let rho0 = initial_density(&StateVector::<f64>::ee()).unwrap();
        let lb = lindblad_solve(1.0, [1.0, 1.0], &rho0, 0.01, 4.0).unwrap();
        let ex: Vec<f64> = lb.states.iter().map(|r| r.populations().excitation()).collect();
        assert!(ex.windows(2).all(|w| w[1] <= w[0] + 1e-14));
        assert_abs_diff_eq!(lb.at_time(1.0).populations().ee, (-2.0f64).exp(), epsilon = 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order_with_fixed_obar() {
        // Smooth, prescribed Ō makes the master equation a plain linear ODE.
        let src = |t: f64| -> Vec<(Op<f64>, Op<f64>)> {
            let s = 0.3 * (1.0 + 0.5 * (2.0 * t).sin());
            Atom::BOTH
                .iter()
                .map(|&a| (Op::sigma_minus(a), (Op::sigma_minus(Atom::A) + Op::sigma_minus(Atom::B)).scale(s)))
                .collect()
        };
        let h = Op::atomic_hamiltonian(1.0, 1.2);
        let rho0 = initial_density(&StateVector::ee()).unwrap();
        let run = |dt: f64| *master_equation_solve(&rho0, &src, &h, dt, 2.0).unwrap().last();
        let r1 = run(0.1);
        let r2 = run(0.05);
        let r3 = run(0.025);
        let e1 = (r1.op - r2.op).max_abs();
        let e2 = (r2.op - r3.op).max_abs();
        assert!((e1 / e2).log2() > 3.7, "order {}", (e1 / e2).log2());
    }

    #[test]
    fn zero_noise_trajectory_solves_damped_equation() {
        let (gamma, dt, t) = (1.0, 0.01, 3.0);
        let f = delta_field(gamma, dt, t);
        let noise = NoiseRealization::zeros(dt, f.steps(), 1);
        let path = propagate_trajectory(&StateVector::eg(), &noise, &f, t).unwrap();
        // Drift (Γ/2)J†J: the symmetric combination (J†J = 2) decays at Γ,
        // the antisymmetric one is frozen up to the free phase.
        for (n, psi) in path.iter().enumerate().step_by(50) {
            let tt = dt * n as f64;
            let ph = C::new(0.0, -tt).exp();
            let e = (-gamma * tt).exp();
            let a = ph * 0.5 * (e + 1.0);
            let b = ph * 0.5 * (e - 1.0);
            assert!((psi.amps[EG] - a).norm() < 1e-9);
            assert!((psi.amps[GE] - b).norm() < 1e-9);
        }
    }

    #[test]
    fn trajectory_is_linear_in_initial_state() {
        let dt = 0.01;
        let a = CouplingDistribution::comb(vec![0.0, 1.0], 0.7).unwrap();
        let b = a.translated(0.5);
        let mc = ModeCouplings::new(&a, &b, ModeGrid::new(8.0, 100, 2.0).unwrap(), [1.0, 1.0]);
        let k = CorrelationKernel::from_modes(&mc, dt, 2.0).unwrap();
        let f = evolve_matrix_field(&k, [1.0, 1.0], dt, 2.0).unwrap();
        let sampler = NoiseSampler::vacuum(&mc, dt, 2.0).unwrap();
        let noise = sampler.sample(9, 4);
        let psi = StateVector::new([C::new(0.3, 0.1), C::new(0.5, 0.0), C::new(-0.2, 0.4), C::new(0.1, 0.1)]);
        let s = C::new(1.7, -0.6);
        let p1 = propagate_trajectory(&psi.scale(s), &noise, &f, 2.0).unwrap();
        let p2 = propagate_trajectory(&psi, &noise, &f, 2.0).unwrap();
        for (x, y) in p1.iter().zip(p2.iter()) {
            for i in 0..4 {
                assert!((x.amps[i] - y.amps[i] * s).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn ensemble_starts_exact_and_is_thread_independent() {
        let dt = 0.02;
        let a = CouplingDistribution::point(0.0, 0.7).unwrap();
        let b = CouplingDistribution::point(0.7, 0.7).unwrap();
        let mc = ModeCouplings::new(&a, &b, ModeGrid::new(5.0, 60, 2.0).unwrap(), [1.0, 1.0]);
        let k = CorrelationKernel::from_modes(&mc, dt, 2.0).unwrap();
        let f = evolve_matrix_field(&k, [1.0, 1.0], dt, 2.0).unwrap();
        let sampler = NoiseSampler::vacuum(&mc, dt, 2.0).unwrap();
        let settings = EnsembleSettings::new(100, 3);
        let r1 = ensemble_average(&StateVector::eg(), &sampler, &f, 2.0, &settings).unwrap();
        let p0 = r1.series.states[0].populations();
        assert_eq!((p0.ee, p0.eg, p0.ge, p0.gg), (0.0, 1.0, 0.0, 0.0));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let r2 = pool.install(|| ensemble_average(&StateVector::eg(), &sampler, &f, 2.0, &settings).unwrap());
        for (x, y) in r1.series.states.iter().zip(r2.series.states.iter()) {
            assert_eq!(x.op, y.op);
        }
        assert!(ensemble_average(&StateVector::eg(), &sampler, &f, 2.0, &EnsembleSettings::new(1, 3)).is_err());
    }
}
