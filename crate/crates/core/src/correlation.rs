//! Bath correlation kernels `α_{μν}(τ) = Σ_k G*_{μk} G_{νk} e^{-iω_k τ}`
//! tabulated on `τ_i = iΔt`, plus their thermal and squeezed partners.

use crate::coupling::ModeCouplings;
use crate::error::{Error, Result};
use crate::hilbert::Atom;
use crate::scalar::{cis, cr, czero, Real, C};

/// How a channel's kernel is evaluated inside the two-time convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelArgument {
    /// `∫_0^t α(t − s) O(t, s) ds`.
    Difference,
    /// `∫_0^t β(t + u) O(t, u) du`, the reflected squeezed domain.
    Sum,
}

#[inline]
pub fn pair_index(mu: Atom, nu: Atom) -> usize {
    2 * mu.index() + nu.index()
}

/// Stationary two-time kernel tabulated on a uniform τ grid, with an
/// optional singular part `d_{μν} δ(τ)` carried separately.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationKernel<T: Real> {
    dt: T,
    values: [Vec<C<T>>; 4],
    delta: [C<T>; 4],
}

/// Largest τ step accepted for a mode grid: 0.1 / ω_max.
pub fn max_kernel_step<T: Real>(couplings: &ModeCouplings<T>) -> T {
    T::lit(0.1) / couplings.grid.max_frequency()
}

fn table_len<T: Real>(dt: T, t_max: T) -> Result<usize> {
    if !(dt > T::zero()) || !dt.is_finite() {
        return Err(Error::Config("time step must be positive".into()));
    }
    if !(t_max >= T::zero()) || !t_max.is_finite() {
        return Err(Error::Config("t_max must be non-negative".into()));
    }
    let steps = (t_max / dt).round().to_usize().unwrap_or(0);
    Ok(steps + 1)
}

/// Σ_j w_p(j) e^{sign·iω_j τ_i} for the four pairs, folding the two modes of
/// each frequency together before the time loop.
fn mode_sum<T: Real>(
    couplings: &ModeCouplings<T>,
    weight: impl Fn(usize, usize) -> C<T>,
    sign: T,
    dt: T,
    n_tau: usize,
) -> [Vec<C<T>>; 4] {
    let grid = &couplings.grid;
    let pairs: Vec<(T, [C<T>; 4])> = grid
        .mirror_pairs()
        .map(|(i, j)| {
            let w = [0, 1, 2, 3].map(|p| weight(p, i) + weight(p, j));
            (grid.frequency(i), w)
        })
        .collect();
    let mut out = [0, 1, 2, 3].map(|_| vec![czero(); n_tau]);
    for (omega, w) in pairs {
        if w.iter().all(|z| z.norm_sqr() == T::zero()) {
            continue;
        }
        for i in 0..n_tau {
            let ph = cis(sign * omega * dt * T::from_usize_lossy(i));
            for p in 0..4 {
                out[p][i] += w[p] * ph;
            }
        }
    }
    out
}

impl<T: Real> CorrelationKernel<T> {
    /// Vacuum kernel from mode couplings on `[0, t_max]`.
    pub fn from_modes(couplings: &ModeCouplings<T>, dt: T, t_max: T) -> Result<Self> {
        check_step(couplings, dt)?;
        Self::from_modes_unchecked(couplings, dt, t_max)
    }

    /// As [`CorrelationKernel::from_modes`] without the Δt resolution check.
    pub fn from_modes_unchecked(couplings: &ModeCouplings<T>, dt: T, t_max: T) -> Result<Self> {
        let n = table_len(dt, t_max)?;
        let g = &couplings.g;
        let values = mode_sum(
            couplings,
            |p, j| g[p / 2][j].conj() * g[p % 2][j],
            -T::one(),
            dt,
            n,
        );
        Ok(Self { dt, values, delta: [czero(); 4] })
    }

    /// Tabulates an arbitrary kernel `f(μ, ν, τ)` on `[0, t_max]`.
    pub fn from_fn(dt: T, t_max: T, f: impl Fn(Atom, Atom, T) -> C<T>) -> Result<Self> {
        let n = table_len(dt, t_max)?;
        let mut values = [0, 1, 2, 3].map(|_| Vec::with_capacity(n));
        for mu in Atom::BOTH {
            for nu in Atom::BOTH {
                let p = pair_index(mu, nu);
                values[p] = (0..n).map(|i| f(mu, nu, dt * T::from_usize_lossy(i))).collect();
            }
        }
        Ok(Self { dt, values, delta: [czero(); 4] })
    }

    pub fn zero(dt: T, t_max: T) -> Result<Self> {
        Self::from_fn(dt, t_max, |_, _, _| czero())
    }

    /// Pure `Γ_{μν} δ(τ)` kernel; the rates are indexed by [`pair_index`].
    pub fn delta(rates: [C<T>; 4], dt: T, t_max: T) -> Result<Self> {
        Ok(Self::zero(dt, t_max)?.with_delta(rates))
    }

    /// Gaussian stand-in for `Γ_{μν} δ(τ)` of bandwidth `b`:
    /// `Γ b/√(2π) e^{-b²τ²/2}`, whose half-line integral is Γ/2.
    pub fn near_delta(rates: [C<T>; 4], bandwidth: T, dt: T, t_max: T) -> Result<Self> {
        if !(bandwidth > T::zero()) {
            return Err(Error::Config("bandwidth must be positive".into()));
        }
        let norm = bandwidth / (T::lit(2.0) * T::PI()).sqrt();
        Self::from_fn(dt, t_max, |mu, nu, tau| {
            rates[pair_index(mu, nu)] * (norm * (-(bandwidth * tau).powi(2) * T::lit(0.5)).exp())
        })
    }

    /// Adds a singular part `d_{μν} δ(τ)`.
    pub fn with_delta(mut self, delta: [C<T>; 4]) -> Self {
        self.delta = delta;
        self
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.values[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.values[0].is_empty()
    }

    /// Largest tabulated τ.
    pub fn horizon(&self) -> T {
        self.dt * T::from_usize_lossy(self.len().saturating_sub(1))
    }

    pub fn delta_weight(&self, mu: Atom, nu: Atom) -> C<T> {
        self.delta[pair_index(mu, nu)]
    }

    pub fn series(&self, mu: Atom, nu: Atom) -> &[C<T>] {
        &self.values[pair_index(mu, nu)]
    }

    /// Tabulated value at `τ_i`; the singular part is not included.
    #[inline]
    pub fn at(&self, mu: Atom, nu: Atom, i: usize) -> C<T> {
        self.values[pair_index(mu, nu)][i]
    }

    /// Value at arbitrary τ by linear interpolation. Negative τ uses
    /// `α_{μν}(−τ) = conj(α_{νμ}(τ))`. Returns `None` beyond the table.
    pub fn value(&self, mu: Atom, nu: Atom, tau: T) -> Option<C<T>> {
        if tau < T::zero() {
            return self.value(nu, mu, -tau).map(|z| z.conj());
        }
        let x = tau / self.dt;
        let i = x.floor().to_usize()?;
        let s = &self.values[pair_index(mu, nu)];
        if i + 1 >= s.len() {
            return if i + 1 == s.len() && x - T::from_usize_lossy(i) <= T::lit(1e-9) {
                s.last().copied()
            } else {
                None
            };
        }
        let f = x - T::from_usize_lossy(i);
        Some(s[i] * (T::one() - f) + s[i + 1] * f)
    }

    /// Largest |value| over the table for a pair.
    pub fn max_abs(&self, mu: Atom, nu: Atom) -> T {
        self.series(mu, nu).iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    /// Indices of strict local maxima of |α_{μν}| with value above
    /// `threshold · max|α_{μν}|`; index 0 counts when it exceeds index 1.
    pub fn peak_indices(&self, mu: Atom, nu: Atom, threshold: T) -> Vec<usize> {
        let a: Vec<T> = self.series(mu, nu).iter().map(|z| z.norm()).collect();
        let cut = threshold * a.iter().fold(T::zero(), |m, &x| m.max(x));
        let mut peaks = Vec::new();
        for i in 0..a.len() {
            let left = if i == 0 { T::neg_infinity() } else { a[i - 1] };
            let right = if i + 1 == a.len() { T::neg_infinity() } else { a[i + 1] };
            if a[i] > left && a[i] >= right && a[i] >= cut {
                peaks.push(i);
            }
        }
        peaks
    }

    /// Pointwise `self · s`.
    pub fn scaled(&self, s: C<T>) -> Self {
        let values = [0, 1, 2, 3].map(|p| self.values[p].iter().map(|z| *z * s).collect());
        Self { dt: self.dt, values, delta: self.delta.map(|d| d * s) }
    }
}

fn check_step<T: Real>(couplings: &ModeCouplings<T>, dt: T) -> Result<()> {
    let limit = max_kernel_step(couplings);
    if dt > limit * T::lit(1.0 + 1e-12) {
        return Err(Error::Config(format!(
            "time step {dt} under-resolves the fastest mode; need dt <= {limit}"
        )));
    }
    Ok(())
}

/// Bose occupation `1/(e^{βω} − 1)` with ω clamped from below at `floor`.
pub fn occupation<T: Real>(beta: T, omega: T, floor: T) -> T {
    T::one() / (beta * omega.max(floor)).exp_m1()
}

/// Kernels of a thermal bath after the Bogoliubov mapping:
/// `α` from `√(n̄+1) G` and `α′_{μν}(τ) = Σ_k n̄_k G_{μk} G*_{νk} e^{+iω_k τ}`.
#[derive(Debug, Clone)]
pub struct ThermalKernelPair<T: Real> {
    pub alpha: CorrelationKernel<T>,
    pub alpha_prime: CorrelationKernel<T>,
    pub beta: T,
    pub occupations: Vec<T>,
}

/// Default occupation floor Δk/2.
pub fn default_omega_floor<T: Real>(couplings: &ModeCouplings<T>) -> T {
    couplings.grid.spacing() * T::lit(0.5)
}

impl<T: Real> ThermalKernelPair<T> {
    pub fn from_modes(
        couplings: &ModeCouplings<T>,
        beta: T,
        omega_floor: T,
        dt: T,
        t_max: T,
    ) -> Result<Self> {
        if !(beta > T::zero()) {
            return Err(Error::Config(format!("inverse temperature must be positive, got {beta}")));
        }
        check_step(couplings, dt)?;
        let n = table_len(dt, t_max)?;
        let occupations: Vec<T> = couplings
            .grid
            .frequencies()
            .iter()
            .map(|&w| occupation(beta, w, omega_floor))
            .collect();
        let g = &couplings.g;
        let occ = &occupations;
        let alpha = mode_sum(
            couplings,
            |p, j| g[p / 2][j].conj() * g[p % 2][j] * (occ[j] + T::one()),
            -T::one(),
            dt,
            n,
        );
        let alpha_prime = mode_sum(
            couplings,
            |p, j| g[p / 2][j] * g[p % 2][j].conj() * occ[j],
            T::one(),
            dt,
            n,
        );
        Ok(Self {
            alpha: CorrelationKernel { dt, values: alpha, delta: [czero(); 4] },
            alpha_prime: CorrelationKernel { dt, values: alpha_prime, delta: [czero(); 4] },
            beta,
            occupations,
        })
    }

    /// Near-delta stand-ins with local rates `Γ(n̄+1)` and `Γn̄` and no
    /// cross terms, the broadband limit of a thermal bath at frequency ω.
    pub fn near_delta_local(
        gamma: T,
        beta: T,
        omega: T,
        bandwidth: T,
        dt: T,
        t_max: T,
    ) -> Result<Self> {
        if !(beta > T::zero()) {
            return Err(Error::Config(format!("inverse temperature must be positive, got {beta}")));
        }
        let nbar = occupation(beta, omega, T::zero());
        let local = |r: T| [cr(r), czero(), czero(), cr(r)];
        Ok(Self {
            alpha: CorrelationKernel::near_delta(local(gamma * (nbar + T::one())), bandwidth, dt, t_max)?,
            alpha_prime: CorrelationKernel::near_delta(local(gamma * nbar), bandwidth, dt, t_max)?,
            beta,
            occupations: vec![nbar],
        })
    }
}

/// Squeezing parameter per mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SqueezeProfile<T> {
    Constant(T),
    /// `r · [e^{-(k−k_c)²/2w²} + e^{-(k+k_c)²/2w²}]`.
    Band { r: T, center: T, width: T },
}

impl<T: Real> SqueezeProfile<T> {
    pub fn at(&self, k: T) -> T {
        match *self {
            SqueezeProfile::Constant(r) => r,
            SqueezeProfile::Band { r, center, width } => {
                let g = |x: T| (-(x * x) / (T::lit(2.0) * width * width)).exp();
                r * (g(k - center) + g(k + center))
            }
        }
    }
}

/// Kernels of a squeezed vacuum: `α` as in vacuum and
/// `β_{μν}(τ) = Σ_k G*_{μk} G*_{νk} tanh(r_k) e^{-iω_k τ}`, tabulated to
/// `2 t_max` because the reflected convolution samples `t + u`.
#[derive(Debug, Clone)]
pub struct SqueezedKernelPair<T: Real> {
    pub alpha: CorrelationKernel<T>,
    pub beta: CorrelationKernel<T>,
    pub squeeze: Vec<T>,
}

impl<T: Real> SqueezedKernelPair<T> {
    pub fn from_modes(
        couplings: &ModeCouplings<T>,
        profile: SqueezeProfile<T>,
        dt: T,
        t_max: T,
    ) -> Result<Self> {
        check_step(couplings, dt)?;
        let squeeze: Vec<T> = couplings.grid.wavevectors().iter().map(|&k| profile.at(k)).collect();
        if squeeze.iter().any(|r| !r.is_finite()) {
            return Err(Error::Config("squeeze parameters must be finite".into()));
        }
        let alpha = CorrelationKernel::from_modes_unchecked(couplings, dt, t_max)?;
        let n = table_len(dt, T::lit(2.0) * t_max)?;
        let g = &couplings.g;
        let sq = &squeeze;
        let beta = mode_sum(
            couplings,
            |p, j| g[p / 2][j].conj() * g[p % 2][j].conj() * sq[j].tanh(),
            -T::one(),
            dt,
            n,
        );
        Ok(Self {
            alpha,
            beta: CorrelationKernel { dt, values: beta, delta: [czero(); 4] },
            squeeze,
        })
    }
}
