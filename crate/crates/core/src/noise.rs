//! Colored Gaussian noises built as mode superpositions,
//! `z*_{μt} = −i Σ_k G_{μk} z*_k e^{iω_k t}`, and their thermal and squeezed
//! partners.
//!
//! Every trajectory owns a ChaCha8 stream keyed by `(seed, index)`, so a
//! realization depends only on those two numbers and not on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::correlation::{SqueezeProfile, ThermalKernelPair};
use crate::coupling::ModeCouplings;
use crate::error::{Error, Result};
use crate::hilbert::Atom;
use crate::scalar::{c, cis, czero, Real, C};
use crate::stats::ComplexMoments;

/// Gaussian measure the mode amplitudes `z_k` are drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMeasure {
    /// `e^{-|z|²}/π`: real and imaginary parts independent with variance ½.
    #[default]
    Bargmann,
    /// Bargmann measure tilted by a squeezed vacuum with `tanh r_k`: the real
    /// part has variance `1/(2(1+tanh r))`, the imaginary `1/(2(1−tanh r))`.
    Squeezed,
}

/// Sampled noise sequences on the time grid `t_n = nΔt`.
///
/// Channel 0 is `z*_{μt}`; channel 1, when present, is the partner `w*`
/// (for squeezed runs it is stored already reflected, `w*_{μ,−t}`).
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseRealization<T: Real> {
    pub dt: T,
    pub seed: u64,
    pub index: u64,
    pub channels: Vec<[Vec<C<T>>; 2]>,
}

impl<T: Real> NoiseRealization<T> {
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, |c| c[0].len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn z_star(&self, atom: Atom) -> &[C<T>] {
        &self.channels[0][atom.index()]
    }

    pub fn w_star(&self, atom: Atom) -> Option<&[C<T>]> {
        self.channels.get(1).map(|c| c[atom.index()].as_slice())
    }

    /// All-zero noise with the given channel count.
    pub fn zeros(dt: T, steps: usize, channels: usize) -> Self {
        let ch = (0..channels).map(|_| [vec![czero(); steps + 1], vec![czero(); steps + 1]]).collect();
        Self { dt, seed: 0, index: 0, channels: ch }
    }
}

/// One noise channel: `Σ_m e^{sign·iω_m t} Σ_{j∈pair m} coef_{μj} x_j`,
/// with `x_j` the conjugated draw of stream `draw`.
#[derive(Debug, Clone)]
struct ChannelSpec<T: Real> {
    draw: usize,
    conj_phase: bool,
    /// Per frequency pair: coefficients for (atom, member of the pair).
    coef: Vec<[[C<T>; 2]; 2]>,
}

/// Default cap on cached phase-table entries (ω × t).
pub const DEFAULT_PHASE_TABLE_CAP: usize = 1 << 24;

/// Precomputed sampler for one kind of bath on one time grid.
#[derive(Debug, Clone)]
pub struct NoiseSampler<T: Real> {
    dt: T,
    steps: usize,
    omegas: Vec<T>,
    draws: usize,
    tanh_r: Option<Vec<[T; 2]>>,
    measure: SamplingMeasure,
    channels: Vec<ChannelSpec<T>>,
    phases: Option<Vec<C<T>>>,
}

impl<T: Real> NoiseSampler<T> {
    fn build(
        couplings: &ModeCouplings<T>,
        dt: T,
        t_max: T,
        draws: usize,
        channels: Vec<ChannelSpec<T>>,
    ) -> Result<Self> {
        if !(dt > T::zero()) || !(t_max >= T::zero()) {
            return Err(Error::Config("noise grid needs dt > 0 and t_max >= 0".into()));
        }
        let steps = (t_max / dt).round().to_usize().unwrap_or(0);
        let omegas: Vec<T> = couplings.grid.mirror_pairs().map(|(i, _)| couplings.grid.frequency(i)).collect();
        let mut s = Self {
            dt,
            steps,
            omegas,
            draws,
            tanh_r: None,
            measure: SamplingMeasure::Bargmann,
            channels,
            phases: None,
        };
        s.set_phase_table_cap(DEFAULT_PHASE_TABLE_CAP);
        Ok(s)
    }

    fn pair_coef(couplings: &ModeCouplings<T>, f: impl Fn(usize, usize) -> C<T>) -> Vec<[[C<T>; 2]; 2]> {
        couplings
            .grid
            .mirror_pairs()
            .map(|(i, j)| [[f(0, i), f(0, j)], [f(1, i), f(1, j)]])
            .collect()
    }

    /// Vacuum noise `z*_{μt}` for both atoms from one draw.
    pub fn vacuum(couplings: &ModeCouplings<T>, dt: T, t_max: T) -> Result<Self> {
        let mi = c(T::zero(), -T::one());
        let coef = Self::pair_coef(couplings, |mu, j| mi * couplings.g[mu][j]);
        Self::build(couplings, dt, t_max, 1, vec![ChannelSpec { draw: 0, conj_phase: false, coef }])
    }

    /// Thermal pair: `z*` from `√(n̄+1) G` and an independent
    /// `w*_{μt} = −i Σ √n̄ G*_{μk} w*_k e^{-iω_k t}`.
    pub fn thermal(couplings: &ModeCouplings<T>, pair: &ThermalKernelPair<T>, dt: T, t_max: T) -> Result<Self> {
        let occ = &pair.occupations;
        if occ.len() != couplings.grid.len() {
            return Err(Error::DimensionMismatch("thermal occupations do not match the mode grid".into()));
        }
        let mi = c(T::zero(), -T::one());
        let z = Self::pair_coef(couplings, |mu, j| mi * couplings.g[mu][j] * (occ[j] + T::one()).sqrt());
        let w = Self::pair_coef(couplings, |mu, j| mi * couplings.g[mu][j].conj() * occ[j].sqrt());
        Self::build(
            couplings,
            dt,
            t_max,
            2,
            vec![
                ChannelSpec { draw: 0, conj_phase: false, coef: z },
                ChannelSpec { draw: 1, conj_phase: true, coef: w },
            ],
        )
    }

    /// Squeezed pair from one draw: `z*` as in vacuum and the reflected
    /// partner `w*_{μ,−t} = i Σ G*_{μk} tanh(r_k) z*_k e^{-iω_k t}`.
    pub fn squeezed(
        couplings: &ModeCouplings<T>,
        profile: SqueezeProfile<T>,
        measure: SamplingMeasure,
        dt: T,
        t_max: T,
    ) -> Result<Self> {
        let th: Vec<T> = couplings.grid.wavevectors().iter().map(|&k| profile.at(k).tanh()).collect();
        let mi = c(T::zero(), -T::one());
        let pi = c(T::zero(), T::one());
        let z = Self::pair_coef(couplings, |mu, j| mi * couplings.g[mu][j]);
        let w = Self::pair_coef(couplings, |mu, j| pi * couplings.g[mu][j].conj() * th[j]);
        let mut s = Self::build(
            couplings,
            dt,
            t_max,
            1,
            vec![
                ChannelSpec { draw: 0, conj_phase: false, coef: z },
                ChannelSpec { draw: 0, conj_phase: true, coef: w },
            ],
        )?;
        s.tanh_r = Some(couplings.grid.mirror_pairs().map(|(i, j)| [th[i], th[j]]).collect());
        s.measure = measure;
        Ok(s)
    }

    /// Caches `e^{iω_m t_n}` when it fits in `cap` entries; otherwise phases
    /// are advanced by recurrence with periodic resynchronization.
    pub fn set_phase_table_cap(&mut self, cap: usize) {
        let entries = self.omegas.len() * (self.steps + 1);
        self.phases = if entries <= cap {
            let mut table = Vec::with_capacity(entries);
            for n in 0..=self.steps {
                let t = self.dt * T::from_usize_lossy(n);
                table.extend(self.omegas.iter().map(|&w| cis(w * t)));
            }
            Some(table)
        } else {
            None
        };
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Conjugated draws `x_j = z*_j` for every pair member and stream.
    fn draw(&self, seed: u64, index: u64) -> Vec<[[C<T>; 2]; 2]> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
        let half = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = vec![[[czero(); 2]; 2]; self.omegas.len()];
        for d in 0..self.draws {
            for (m, slot) in out.iter_mut().enumerate() {
                for (member, x) in slot[d].iter_mut().enumerate() {
                    let (sx, sy) = match (self.measure, &self.tanh_r) {
                        (SamplingMeasure::Squeezed, Some(th)) => {
                            let t = th[m][member].to_f64_lossy();
                            (half / (1.0 + t).sqrt(), half / (1.0 - t).sqrt())
                        }
                        _ => (half, half),
                    };
                    let re = normal() * sx;
                    let im = normal() * sy;
                    *x = c(T::lit(re), T::lit(-im));
                }
            }
        }
        out
    }

    /// Mode amplitudes `a_{c,μ,m}` multiplying `e^{±iω_m t}`.
    fn amplitudes(&self, seed: u64, index: u64) -> Vec<[Vec<C<T>>; 2]> {
        let x = self.draw(seed, index);
        self.channels
            .iter()
            .map(|ch| {
                [0, 1].map(|mu| {
                    ch.coef
                        .iter()
                        .zip(x.iter())
                        .map(|(cf, xm)| cf[mu][0] * xm[ch.draw][0] + cf[mu][1] * xm[ch.draw][1])
                        .collect()
                })
            })
            .collect()
    }

    /// Full realization for trajectory `index`.
    pub fn sample(&self, seed: u64, index: u64) -> NoiseRealization<T> {
        let amps = self.amplitudes(seed, index);
        let n_t = self.steps + 1;
        let n_w = self.omegas.len();
        let mut channels: Vec<[Vec<C<T>>; 2]> =
            amps.iter().map(|_| [vec![czero(); n_t], vec![czero(); n_t]]).collect();
        let mut accumulate = |n: usize, ph: &[C<T>]| {
            for (ci, ch) in self.channels.iter().enumerate() {
                for mu in 0..2 {
                    let a = &amps[ci][mu];
                    let mut s = czero();
                    if ch.conj_phase {
                        for m in 0..n_w {
                            s += a[m] * ph[m].conj();
                        }
                    } else {
                        for m in 0..n_w {
                            s += a[m] * ph[m];
                        }
                    }
                    channels[ci][mu][n] = s;
                }
            }
        };
        match &self.phases {
            Some(table) => {
                for n in 0..n_t {
                    accumulate(n, &table[n * n_w..(n + 1) * n_w]);
                }
            }
            None => {
                let step: Vec<C<T>> = self.omegas.iter().map(|&w| cis(w * self.dt)).collect();
                let mut ph = vec![C::new(T::one(), T::zero()); n_w];
                for n in 0..n_t {
                    if n % 64 == 0 {
                        let t = self.dt * T::from_usize_lossy(n);
                        for (p, &w) in ph.iter_mut().zip(self.omegas.iter()) {
                            *p = cis(w * t);
                        }
                    }
                    accumulate(n, &ph);
                    for (p, s) in ph.iter_mut().zip(step.iter()) {
                        *p *= *s;
                    }
                }
            }
        }
        NoiseRealization { dt: self.dt, seed, index, channels }
    }

    /// Noise values at selected grid indices only: `[channel][atom][probe]`.
    pub fn sample_points(&self, seed: u64, index: u64, steps: &[usize]) -> Vec<[Vec<C<T>>; 2]> {
        let amps = self.amplitudes(seed, index);
        self.channels
            .iter()
            .enumerate()
            .map(|(ci, ch)| {
                [0, 1].map(|mu| {
                    steps
                        .iter()
                        .map(|&n| {
                            let t = self.dt * T::from_usize_lossy(n);
                            let sign = if ch.conj_phase { -T::one() } else { T::one() };
                            amps[ci][mu]
                                .iter()
                                .zip(self.omegas.iter())
                                .fold(czero(), |acc, (a, &w)| acc + *a * cis(sign * w * t))
                        })
                        .collect()
                })
            })
            .collect()
    }
}

/// Empirical moments at one probe pair `(t, s)` for atoms `(μ, ν)`.
#[derive(Debug, Clone)]
pub struct ProbeStatistics<T: Real> {
    pub t_step: usize,
    pub s_step: usize,
    pub mu: Atom,
    pub nu: Atom,
    /// M[z_{μt}].
    pub mean: ComplexMoments<T>,
    /// M[z_{μt} z_{νs}].
    pub pair: ComplexMoments<T>,
    /// M[z_{μt} z*_{νs}].
    pub covariance: ComplexMoments<T>,
    /// Reference value for the covariance.
    pub expected: C<T>,
}

impl<T: Real> ProbeStatistics<T> {
    /// All three moments within `k` standard errors of their targets.
    pub fn passes(&self, k: T) -> bool {
        self.mean.consistent_with(czero(), k)
            && self.pair.consistent_with(czero(), k)
            && self.covariance.consistent_with(self.expected, k)
    }
}

/// Probe definition: grid steps `(t, s)` and atoms `(μ, ν)`.
pub type Probe = (usize, usize, Atom, Atom);

/// Draws `samples` vacuum realizations (channel 0) and accumulates the
/// moments at each probe. `expected` supplies `α_{μν}(t − s)`.
pub fn vacuum_statistics<T: Real>(
    sampler: &NoiseSampler<T>,
    seed: u64,
    samples: usize,
    probes: &[Probe],
    expected: impl Fn(&Probe) -> C<T>,
) -> Vec<ProbeStatistics<T>> {
    let mut steps: Vec<usize> = probes.iter().flat_map(|p| [p.0, p.1]).collect();
    steps.sort_unstable();
    steps.dedup();
    let pos = |n: usize| steps.binary_search(&n).expect("probe step present");
    let mut out: Vec<ProbeStatistics<T>> = probes
        .iter()
        .map(|p| ProbeStatistics {
            t_step: p.0,
            s_step: p.1,
            mu: p.2,
            nu: p.3,
            mean: ComplexMoments::default(),
            pair: ComplexMoments::default(),
            covariance: ComplexMoments::default(),
            expected: expected(p),
        })
        .collect();
    for i in 0..samples {
        let v = sampler.sample_points(seed, i as u64, &steps);
        for st in out.iter_mut() {
            let zt = v[0][st.mu.index()][pos(st.t_step)].conj();
            let zs = v[0][st.nu.index()][pos(st.s_step)].conj();
            st.mean.push(zt);
            st.pair.push(zt * zs);
            st.covariance.push(zt * zs.conj());
        }
    }
    out
}
