//! Thermal and squeezed baths: two noise channels, a jointly marched pair of
//! O-fields, and the finite-temperature master equation.
//!
//! Thermal: channel `z` (noise on σ⁻, kernel α built from `√(n̄+1) G`) and
//! channel `w` (noise on σ⁺, kernel α′ built from `√n̄ G`). Both drift terms
//! enter the shared generator, so the O-fields are coupled.
//!
//! Squeezed (experimental): channel `w` lives on `s ∈ [−t, 0]`; it is stored
//! reflected, `u = −s`, so its convolution samples `β(t + u)`. The partner
//! drift is `+σ⁺Ō_w`, which has no master-equation form, only trajectories.

use crate::correlation::{SqueezedKernelPair, ThermalKernelPair};
use crate::dynamics::{master_equation_solve, DensitySeries};
use crate::error::{Error, Result};
use crate::hilbert::{Atom, DensityMatrix, QubitOperator};
use crate::noise::NoiseRealization;
use crate::osolver::{evolve_channels, Channel, OField, ObarSource};
use crate::scalar::{c, Real};

type Op<T> = QubitOperator<T>;

/// O-fields of a two-channel bath. Channel 0 is `z`, channel 1 is `w`.
#[derive(Debug, Clone)]
pub struct DualOField<T: Real> {
    pub field: OField<T>,
}

impl<T: Real> DualOField<T> {
    pub fn obar_z(&self, atom: Atom, t: T) -> Op<T> {
        self.field.obar_channel(0, atom, t)
    }

    pub fn obar_w(&self, atom: Atom, t: T) -> Op<T> {
        self.field.obar_channel(1, atom, t)
    }

    pub fn dt(&self) -> T {
        self.field.dt()
    }

    pub fn steps(&self) -> usize {
        self.field.steps()
    }
}

/// Joint march of `O_z` (born σ⁻) and `O_w` (born σ⁺) for a thermal bath.
pub fn evolve_dual_field_thermal<T: Real>(
    pair: &ThermalKernelPair<T>,
    hamiltonian: Op<T>,
    dt: T,
    t_max: T,
) -> Result<DualOField<T>> {
    let channels = vec![Channel::emission(pair.alpha.clone()), Channel::absorption(pair.alpha_prime.clone())];
    Ok(DualOField { field: evolve_channels(channels, hamiltonian, dt, t_max)? })
}

/// Joint march for a squeezed vacuum, `O_w` on the reflected domain.
pub fn evolve_dual_field_squeezed<T: Real>(
    pair: &SqueezedKernelPair<T>,
    hamiltonian: Op<T>,
    dt: T,
    t_max: T,
) -> Result<DualOField<T>> {
    let channels = vec![Channel::emission(pair.alpha.clone()), Channel::squeezed(pair.beta.clone())];
    Ok(DualOField { field: evolve_channels(channels, hamiltonian, dt, t_max)? })
}

/// `dρ/dt = −i[H_A, ρ] + Σ_μ ([σ_μ⁻, ρŌ_{zμ}†] + [σ_μ⁺, ρŌ_{wμ}†] + h.c.)`.
pub fn thermal_master_solve<T: Real>(
    initial: &DensityMatrix<T>,
    dual: &DualOField<T>,
    dt: T,
    t_max: T,
) -> Result<DensitySeries<T>> {
    master_equation_solve(initial, &dual.field, dual.field.hamiltonian(), dt, t_max)
}

/// Trajectory generator at grid step `n`:
/// `−iH_A + Σ_μ (z*_μ σ_μ⁻ + w*_μ σ_μ⁺) − Σ_c Σ_μ K_{c,μ} Ō_{c,μ}`.
pub fn squeezed_generator_terms<T: Real>(noise: &NoiseRealization<T>, dual: &DualOField<T>, n: usize) -> Result<Op<T>> {
    let field = &dual.field;
    if noise.channels.len() != field.channels().len() {
        return Err(Error::Config(format!(
            "noise has {} channels, the O-field expects {}",
            noise.channels.len(),
            field.channels().len()
        )));
    }
    if n >= noise.len() || n > field.steps() {
        return Err(Error::DimensionMismatch(format!("step {n} outside the noise or O-field grid")));
    }
    let t = field.dt() * T::from_usize_lossy(n);
    let mut g = field.hamiltonian().scale_c(c(T::zero(), -T::one())) - field.drift(t);
    for (ch, z) in field.channels().iter().zip(noise.channels.iter()) {
        for a in Atom::BOTH {
            g.axpy(z[a.index()][n], &ch.initial[a.index()]);
        }
    }
    Ok(g)
}

/// Excited population of one atom starting in its ground state under
/// thermal Lindblad dynamics: `n̄/(2n̄+1) · (1 − e^{−Γ(2n̄+1)t})`.
pub fn single_atom_heating<T: Real>(gamma: T, nbar: T, t: T) -> T {
    let s = T::lit(2.0) * nbar + T::one();
    nbar / s * (T::one() - (-gamma * s * t).exp())
}

/// Whether every channel of `dual` admits the master-equation form.
pub fn has_master_form<T: Real>(dual: &DualOField<T>) -> bool {
    dual.field.check_master_form().is_ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlation::{default_omega_floor, CorrelationKernel, SqueezeProfile};
    use crate::coupling::{CouplingDistribution, ModeCouplings, ModeGrid};
    use crate::dynamics::initial_density;
    use crate::hilbert::StateVector;
    use crate::noise::{NoiseSampler, SamplingMeasure};
    use crate::osolver::evolve_matrix_field;
    use crate::scalar::C;
    use approx::assert_abs_diff_eq;

    fn couplings() -> ModeCouplings<f64> {
        let a = CouplingDistribution::comb(vec![0.0, 1.0], 0.5).unwrap();
        let b = CouplingDistribution::point(0.6, 0.5).unwrap();
        ModeCouplings::new(&a, &b, ModeGrid::new(6.0, 120, 4.0).unwrap(), [1.0, 1.0])
    }

    #[test]
    fn cold_bath_reduces_to_vacuum() {
        let m = couplings();
        let (dt, t) = (0.01, 3.0);
        let h = Op::atomic_hamiltonian(1.0, 1.0);
        let pair = ThermalKernelPair::from_modes(&m, 1000.0, default_omega_floor(&m), dt, t).unwrap();
        let dual = evolve_dual_field_thermal(&pair, h, dt, t).unwrap();
        let vac = evolve_matrix_field(&CorrelationKernel::from_modes(&m, dt, t).unwrap(), [1.0, 1.0], dt, t).unwrap();
        for n in [0, 50, 300] {
            let tt = dt * n as f64;
            for a in Atom::BOTH {
                assert!(dual.obar_w(a, tt).max_abs() < 1e-6);
                assert!((dual.obar_z(a, tt) - *vac.obar_step(0, a, n)).max_abs() < 1e-6);
            }
        }
        let rho0 = initial_density(&StateVector::eg()).unwrap();
        let th = thermal_master_solve(&rho0, &dual, dt, t).unwrap();
        let v = master_equation_solve(&rho0, &vac, &h, dt, t).unwrap();
        assert!(crate::dynamics::max_trace_distance(&th, &v).unwrap() < 1e-6);
    }

    #[test]
    fn zero_kernels_give_free_rotation() {
        let (dt, t) = (0.01, 2.0);
        let z = CorrelationKernel::zero(dt, t).unwrap();
        let pair = ThermalKernelPair { alpha: z.clone(), alpha_prime: z, beta: 1.0, occupations: vec![] };
        let dual = evolve_dual_field_thermal(&pair, Op::atomic_hamiltonian(1.0, 1.3), dt, t).unwrap();
        let f = &dual.field;
        for a in Atom::BOTH {
            let w = if a == Atom::A { 1.0 } else { 1.3 };
            for (n, (oz, ow)) in f.first_column(0, a).iter().zip(f.first_column(1, a)).enumerate() {
                let ph = C::new(0.0, w * dt * n as f64).exp();
                assert!((*oz - Op::sigma_minus(a).scale_c(ph)).max_abs() < 1e-12);
                assert!((*ow - Op::sigma_plus(a).scale_c(ph.conj())).max_abs() < 1e-12);
            }
        }
    }

    fn heated(beta: f64, t: f64) -> (f64, f64) {
        let (gamma, dt) = (1.0, 0.01);
        let pair = ThermalKernelPair::near_delta_local(gamma, beta, 1.0, 40.0, dt, t).unwrap();
        let dual = evolve_dual_field_thermal(&pair, Op::atomic_hamiltonian(1.0, 1.0), dt, t).unwrap();
        let rho0 = initial_density(&StateVector::gg()).unwrap();
        let s = thermal_master_solve(&rho0, &dual, dt, t).unwrap();
        let p = s.last().populations();
        (p.ee + p.eg, pair.occupations[0])
    }

    #[test]
    fn ground_state_heats_like_single_atom_lindblad() {
        let (pe, nbar) = heated(2.0, 5.0);
        let expect = single_atom_heating(1.0, nbar, 5.0);
        assert!(pe > 1e-3);
        assert!((pe / expect - 1.0).abs() < 0.05, "{pe} vs {expect}");
    }

    #[test]
    fn heating_increases_with_temperature() {
        let p: Vec<f64> = [10.0, 5.0, 2.0].iter().map(|&b| heated(b, 20.0).0).collect();
        assert!(p[0] < p[1] && p[1] < p[2], "{p:?}");
    }

    #[test]
    fn thermal_trace_is_preserved() {
        let m = couplings();
        let (dt, t) = (0.01, 3.0);
        let pair = ThermalKernelPair::from_modes(&m, 1.5, default_omega_floor(&m), dt, t).unwrap();
        let dual = evolve_dual_field_thermal(&pair, Op::atomic_hamiltonian(1.0, 1.0), dt, t).unwrap();
        let rho0 = initial_density(&StateVector::bell(1.0)).unwrap();
        let s = thermal_master_solve(&rho0, &dual, dt, t).unwrap();
        for r in &s.states {
            assert_abs_diff_eq!(r.trace(), 1.0, epsilon = 1e-8);
            assert!(r.op.hermiticity_error() < 1e-12);
        }
    }

    #[test]
    fn unsqueezed_generator_equals_vacuum_generator() {
        let m = couplings();
        let (dt, t) = (0.01, 1.0);
        let h = Op::atomic_hamiltonian(1.0, 1.0);
        let prof = SqueezeProfile::Constant(0.0);
        let pair = SqueezedKernelPair::from_modes(&m, prof, dt, t).unwrap();
        let dual = evolve_dual_field_squeezed(&pair, h, dt, t).unwrap();
        assert!(!has_master_form(&dual));
        let vac = evolve_matrix_field(&pair.alpha, [1.0, 1.0], dt, t).unwrap();
        let sq_noise = NoiseSampler::squeezed(&m, prof, SamplingMeasure::Bargmann, dt, t).unwrap().sample(1, 2);
        let vac_noise = NoiseSampler::vacuum(&m, dt, t).unwrap().sample(1, 2);
        for n in [0, 30, 100] {
            let g = squeezed_generator_terms(&sq_noise, &dual, n).unwrap();
            let tt = dt * n as f64;
            let mut v = h.scale_c(C::new(0.0, -1.0)) - vac.drift(tt);
            for a in Atom::BOTH {
                v.axpy(vac_noise.z_star(a)[n], &Op::sigma_minus(a));
            }
            assert!((g - v).max_abs() < 1e-12);
        }
    }

    #[test]
    fn squeezed_drift_scales_with_tanh_r() {
        let m = couplings();
        let (dt, t) = (0.01, 0.5);
        let h = Op::atomic_hamiltonian(1.0, 1.0);
        let drift_w = |r: f64| {
            let pair = SqueezedKernelPair::from_modes(&m, SqueezeProfile::Constant(r), dt, t).unwrap();
            let dual = evolve_dual_field_squeezed(&pair, h, dt, t).unwrap();
            dual.obar_w(Atom::A, 0.2)
        };
        // To first order in the coupling Ō_w is linear in β ∝ tanh r.
        let (a, b) = (drift_w(0.01), drift_w(0.02));
        let ratio = (b.frobenius_norm()) / (a.frobenius_norm());
        assert_abs_diff_eq!(ratio, 0.02f64.tanh() / 0.01f64.tanh(), epsilon = 1e-3);
    }

    #[test]
    fn squeezed_ensemble_keeps_unit_trace() {
        let a = CouplingDistribution::point(0.0, 0.3).unwrap();
        let b = CouplingDistribution::point(0.5, 0.3).unwrap();
        let m = ModeCouplings::new(&a, &b, ModeGrid::new(5.0, 60, 2.0).unwrap(), [1.0, 1.0]);
        let (dt, t) = (0.02, 2.0);
        let prof = SqueezeProfile::Constant(0.3);
        let pair = SqueezedKernelPair::from_modes(&m, prof, dt, t).unwrap();
        let dual = evolve_dual_field_squeezed(&pair, Op::atomic_hamiltonian(1.0, 1.0), dt, t).unwrap();
        let sampler = NoiseSampler::squeezed(&m, prof, SamplingMeasure::Bargmann, dt, t).unwrap();
        let settings = crate::dynamics::EnsembleSettings::new(400, 8);
        let r = crate::dynamics::ensemble_average(&StateVector::eg(), &sampler, &dual.field, t, &settings).unwrap();
        for &(tr, se) in &r.norm {
            assert!((tr - 1.0f64).abs() <= 3.0 * se + 1e-9, "{tr} ± {se}");
        }
    }

    #[test]
    fn channel_count_mismatch_is_config_error() {
        let m = couplings();
        let (dt, t) = (0.01, 0.5);
        let pair = SqueezedKernelPair::from_modes(&m, SqueezeProfile::Constant(0.2), dt, t).unwrap();
        let dual = evolve_dual_field_squeezed(&pair, Op::atomic_hamiltonian(1.0, 1.0), dt, t).unwrap();
        let noise = NoiseRealization::zeros(dt, 50, 1);
        assert!(matches!(squeezed_generator_terms(&noise, &dual, 3), Err(Error::Config(_))));
    }
}
