//! Dressed-state wavefunction solvers in the one- and two-excitation sectors.
//!
//! Both share the interaction `Σ_{μk} (G*_{μk} σ_μ⁺ b_k + G_{μk} σ_μ⁻ b_k†)`
//! on the same [`ModeCouplings`] table as the stochastic path, so the
//! eliminated photon amplitudes reproduce `α_{μν}(τ) = Σ_k G*_{μk} G_{νk}
//! e^{−iω_kτ}` exactly. Free phases are integrated exactly and the coupling
//! by a Lawson (integrating-factor) RK4 step.

use crate::coupling::ModeCouplings;
use crate::dynamics::DensitySeries;
use crate::error::{Error, Result};
use crate::hilbert::{Atom, DensityMatrix, QubitOperator, StateVector, EE, EG, GE, GG};
use crate::scalar::{c, cis, czero, Real, C};

/// Norm drift that aborts an oracle run.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

/// Default largest mode count accepted by the two-excitation solver.
pub const DEFAULT_DOUBLE_MODE_CAP: usize = 200;

trait Dressed<T: Real> {
    fn energies(&self) -> &[T];
    /// `out = V u` for the Hermitian coupling `V`.
    fn couple(&self, u: &[C<T>], out: &mut [C<T>]);
    /// Inner-product weight of each stored amplitude.
    fn weight(&self, _i: usize) -> T {
        T::one()
    }
}

fn weighted_norm<T: Real, S: Dressed<T>>(sys: &S, u: &[C<T>]) -> T {
    u.iter().enumerate().fold(T::zero(), |a, (i, z)| a + sys.weight(i) * z.norm_sqr())
}

/// Lawson RK4 for `i du/dt = (D + V) u`. Calls `visit(n, u)` at every grid
/// point, including `n = 0`.
fn integrate<T: Real, S: Dressed<T>>(
    sys: &S,
    u0: Vec<C<T>>,
    dt: T,
    steps: usize,
    mut visit: impl FnMut(usize, &[C<T>]),
) -> Result<()> {
    let n = u0.len();
    let half = T::lit(0.5);
    let e_half: Vec<C<T>> = sys.energies().iter().map(|&w| cis(-w * dt * half)).collect();
    let mi = c(T::zero(), -T::one());
    let rhs = |u: &[C<T>], out: &mut [C<T>]| {
        sys.couple(u, out);
        for z in out.iter_mut() {
            *z *= mi;
        }
    };
    let mut u = u0;
    let norm0 = weighted_norm(sys, &u);
    let (mut k1, mut k2, mut k3, mut k4) = (vec![czero(); n], vec![czero(); n], vec![czero(); n], vec![czero(); n]);
    let mut tmp = vec![czero(); n];
    let h = dt;
    let h2 = dt * half;
    let h6 = dt / T::lit(6.0);
    visit(0, &u);
    for step in 0..steps {
        rhs(&u, &mut k1);
        for i in 0..n {
            tmp[i] = e_half[i] * (u[i] + k1[i] * h2);
        }
        rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = e_half[i] * u[i] + k2[i] * h2;
        }
        rhs(&tmp, &mut k3);
        for i in 0..n {
            let e = e_half[i];
            tmp[i] = e * e * u[i] + e * k3[i] * h;
        }
        rhs(&tmp, &mut k4);
        for i in 0..n {
            let e = e_half[i];
            let e2 = e * e;
            u[i] = e2 * u[i] + (e2 * k1[i] + e * (k2[i] + k3[i]) * T::lit(2.0) + k4[i]) * h6;
        }
        let drift = (weighted_norm(sys, &u) - norm0).abs();
        if !(drift <= T::lit(NORM_DRIFT_LIMIT)) {
            return Err(Error::Integrator {
                t: (dt * T::from_usize_lossy(step + 1)).to_f64_lossy(),
                reason: format!("dressed-state norm drifted by {:e}", drift.to_f64_lossy()),
            });
        }
        visit(step + 1, &u);
    }
    Ok(())
}

fn steps_for<T: Real>(couplings: &ModeCouplings<T>, dt: T, t_max: T) -> Result<usize> {
    if !(dt > T::zero()) || !(t_max >= T::zero()) || !t_max.is_finite() {
        return Err(Error::Config("oracle needs dt > 0 and finite t_max >= 0".into()));
    }
    let limit = couplings.grid.max_horizon();
    if t_max >= limit {
        return Err(Error::HorizonTooLong { t_max: t_max.to_f64_lossy(), max_allowed: limit.to_f64_lossy() });
    }
    Ok((t_max / dt).round().to_usize().unwrap_or(0))
}

struct Single<'a, T: Real> {
    g: &'a [Vec<C<T>>; 2],
    energies: Vec<T>,
}

impl<T: Real> Dressed<T> for Single<'_, T> {
    fn energies(&self) -> &[T] {
        &self.energies
    }

    fn couple(&self, u: &[C<T>], out: &mut [C<T>]) {
        let (a, b) = u.split_at(2);
        let (oa, ob) = out.split_at_mut(2);
        oa[0] = czero();
        oa[1] = czero();
        for (k, (bk, obk)) in b.iter().zip(ob.iter_mut()).enumerate() {
            oa[0] += self.g[0][k].conj() * *bk;
            oa[1] += self.g[1][k].conj() * *bk;
            *obk = self.g[0][k] * a[0] + self.g[1][k] * a[1];
        }
    }
}

/// Amplitudes of the one-excitation sector at one time:
/// `A_a|eg,0⟩ + A_b|ge,0⟩ + Σ_k B_k|gg,1_k⟩ + c_g|gg,0⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationState<T: Real> {
    pub time: T,
    pub atoms: [C<T>; 2],
    pub photons: Vec<C<T>>,
    pub ground: C<T>,
}

impl<T: Real> SingleExcitationState<T> {
    pub fn norm_sqr(&self) -> T {
        self.atoms[0].norm_sqr()
            + self.atoms[1].norm_sqr()
            + self.ground.norm_sqr()
            + self.photons.iter().fold(T::zero(), |a, z| a + z.norm_sqr())
    }

    pub fn photon_population(&self) -> T {
        self.photons.iter().fold(T::zero(), |a, z| a + z.norm_sqr())
    }

    /// Two-atom state after tracing out the field.
    pub fn reduced(&self) -> DensityMatrix<T> {
        let mut psi = StateVector::new([czero(); 4]);
        psi.amps[EG] = self.atoms[0];
        psi.amps[GE] = self.atoms[1];
        psi.amps[GG] = self.ground;
        let mut op = psi.projector();
        op[(GG, GG)] += c(self.photon_population(), T::zero());
        DensityMatrix::from_operator(op, self.time)
    }
}

/// Result of a dressed-state run.
#[derive(Debug, Clone)]
pub struct DressedRun<S, T: Real> {
    /// Amplitudes every `stride` steps.
    pub states: Vec<S>,
    /// Reduced density matrix at every grid time.
    pub reduced: DensitySeries<T>,
}

/// Exact evolution from a state with no |ee⟩ component. The |gg, 0⟩
/// amplitude is decoupled and stays constant.
pub fn solve_single_excitation<T: Real>(
    couplings: &ModeCouplings<T>,
    initial: &StateVector<T>,
    dt: T,
    t_max: T,
    stride: usize,
) -> Result<DressedRun<SingleExcitationState<T>, T>> {
    if initial.amps[EE].norm_sqr() > T::zero() {
        return Err(Error::InvalidState("single-excitation solver needs a zero |ee⟩ amplitude".into()));
    }
    let norm = initial.norm_sqr();
    if !((norm - T::one()).abs() < T::lit(1e-8)) {
        return Err(Error::InvalidState(format!("initial state norm {norm} is not 1")));
    }
    let steps = steps_for(couplings, dt, t_max)?;
    let stride = stride.max(1);
    let mut energies = vec![couplings.omega[0], couplings.omega[1]];
    energies.extend(couplings.grid.frequencies());
    let sys = Single { g: &couplings.g, energies };
    let mut u0 = vec![initial.amps[EG], initial.amps[GE]];
    u0.resize(2 + couplings.grid.len(), czero());
    let ground = initial.amps[GG];
    let mut states = Vec::new();
    let mut reduced = Vec::with_capacity(steps + 1);
    integrate(&sys, u0, dt, steps, |n, u| {
        let full = SingleExcitationState {
            time: dt * T::from_usize_lossy(n),
            atoms: [u[0], u[1]],
            photons: u[2..].to_vec(),
            ground,
        };
        reduced.push(full.reduced());
        if n % stride == 0 {
            states.push(full);
        }
    })?;
    Ok(DressedRun { states, reduced: DensitySeries { dt, states: reduced, std_errors: None } })
}

/// Two-excitation sector:
/// `C|ee,0⟩ + Σ_k B_{ak}|eg,1_k⟩ + Σ_k B_{bk}|ge,1_k⟩
///  + (1/√2) Σ_{kk'} F_{kk'} b_k†b_{k'}†|gg,0⟩`, `F` symmetric.
/// The upper triangle `k ≤ k'` is stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubleExcitationState<T: Real> {
    pub time: T,
    pub both: C<T>,
    pub one_photon: [Vec<C<T>>; 2],
    pub two_photon: Vec<C<T>>,
    modes: usize,
}

fn tri_index(n: usize, p: usize, q: usize) -> usize {
    let (p, q) = if p <= q { (p, q) } else { (q, p) };
    p * n - p * (p + 1) / 2 + q
}

impl<T: Real> DoubleExcitationState<T> {
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// `F_{pq}` for any ordering of the two modes.
    pub fn pair(&self, p: usize, q: usize) -> C<T> {
        self.two_photon[tri_index(self.modes, p, q)]
    }

    pub fn two_photon_population(&self) -> T {
        let n = self.modes;
        let mut s = T::zero();
        for p in 0..n {
            for q in p..n {
                let w = if p == q { T::one() } else { T::lit(2.0) };
                s += w * self.pair(p, q).norm_sqr();
            }
        }
        s
    }

    pub fn norm_sqr(&self) -> T {
        let one = |v: &Vec<C<T>>| v.iter().fold(T::zero(), |a, z| a + z.norm_sqr());
        self.both.norm_sqr() + one(&self.one_photon[0]) + one(&self.one_photon[1]) + self.two_photon_population()
    }

    /// Two-atom state after tracing out the field.
    pub fn reduced(&self) -> DensityMatrix<T> {
        let mut op = QubitOperator::zero();
        op[(EE, EE)] = c(self.both.norm_sqr(), T::zero());
        let mut cross = czero();
        let (mut pa, mut pb) = (T::zero(), T::zero());
        for (x, y) in self.one_photon[0].iter().zip(self.one_photon[1].iter()) {
            pa += x.norm_sqr();
            pb += y.norm_sqr();
            cross += *x * y.conj();
        }
        op[(EG, EG)] = c(pa, T::zero());
        op[(GE, GE)] = c(pb, T::zero());
        op[(EG, GE)] = cross;
        op[(GE, EG)] = cross.conj();
        op[(GG, GG)] = c(self.two_photon_population(), T::zero());
        DensityMatrix::from_operator(op, self.time)
    }
}

struct Double<'a, T: Real> {
    g: &'a [Vec<C<T>>; 2],
    n: usize,
    energies: Vec<T>,
    /// Off-diagonal photon pairs stand for both orderings.
    weights: Vec<T>,
}

impl<T: Real> Double<'_, T> {
    fn b_offset(&self, atom: usize) -> usize {
        1 + atom * self.n
    }

    fn f_offset(&self) -> usize {
        1 + 2 * self.n
    }
}

impl<T: Real> Dressed<T> for Double<'_, T> {
    fn energies(&self) -> &[T] {
        &self.energies
    }

    fn weight(&self, i: usize) -> T {
        self.weights[i]
    }

    fn couple(&self, u: &[C<T>], out: &mut [C<T>]) {
        let n = self.n;
        let s2 = T::lit(2.0).sqrt();
        let inv_s2 = T::one() / s2;
        let cc = u[0];
        let b = [&u[self.b_offset(0)..self.b_offset(0) + n], &u[self.b_offset(1)..self.b_offset(1) + n]];
        let f = &u[self.f_offset()..];
        let fo = self.f_offset();
        // i dC: Σ_{ν,k} G*_{ν̄k} B_{νk}.
        let mut dc = czero();
        for k in 0..n {
            dc += self.g[1][k].conj() * b[0][k] + self.g[0][k].conj() * b[1][k];
        }
        out[0] = dc;
        // i dB_{νk}: G_{ν̄k} C + √2 Σ_p G*_{νp} F_{pk}.
        for nu in 0..2 {
            let other = 1 - nu;
            let off = self.b_offset(nu);
            for k in 0..n {
                out[off + k] = self.g[other][k] * cc;
            }
        }
        for p in 0..n {
            let base = tri_index(n, p, p);
            let gp = [self.g[0][p].conj() * s2, self.g[1][p].conj() * s2];
            for q in p..n {
                let fpq = f[base + q - p];
                if fpq.norm_sqr() == T::zero() {
                    continue;
                }
                for nu in 0..2 {
                    let off = self.b_offset(nu);
                    out[off + q] += gp[nu] * fpq;
                    if q != p {
                        out[off + p] += self.g[nu][q].conj() * s2 * fpq;
                    }
                }
            }
        }
        // i dF_{pq}: (1/√2) Σ_ν (G_{νp} B_{νq} + G_{νq} B_{νp}).
        for p in 0..n {
            let base = tri_index(n, p, p);
            let gp = [self.g[0][p], self.g[1][p]];
            let bp = [b[0][p], b[1][p]];
            for q in p..n {
                let v = gp[0] * b[0][q] + gp[1] * b[1][q] + self.g[0][q] * bp[0] + self.g[1][q] * bp[1];
                out[fo + base + q - p] = v * inv_s2;
            }
        }
    }
}

/// Exact evolution from |ee, 0⟩. Refuses grids with more than `mode_cap`
/// modes, since storage grows as N²/2.
pub fn solve_double_excitation<T: Real>(
    couplings: &ModeCouplings<T>,
    dt: T,
    t_max: T,
    stride: usize,
    mode_cap: usize,
) -> Result<DressedRun<DoubleExcitationState<T>, T>> {
    let n = couplings.grid.len();
    if n > mode_cap {
        return Err(Error::MemoryCap { needed: n * (n + 1) / 2, cap: mode_cap * (mode_cap + 1) / 2 });
    }
    let steps = steps_for(couplings, dt, t_max)?;
    let stride = stride.max(1);
    let w = couplings.grid.frequencies();
    let [wa, wb] = couplings.omega;
    let mut energies = vec![wa + wb];
    energies.extend(w.iter().map(|&x| wa + x));
    energies.extend(w.iter().map(|&x| wb + x));
    let mut weights = vec![T::one(); energies.len()];
    for p in 0..n {
        for q in p..n {
            energies.push(w[p] + w[q]);
            weights.push(if p == q { T::one() } else { T::lit(2.0) });
        }
    }
    let sys = Double { g: &couplings.g, n, energies, weights };
    let mut u0 = vec![czero(); sys.energies.len()];
    u0[0] = c(T::one(), T::zero());
    let mut states = Vec::new();
    let mut reduced = Vec::with_capacity(steps + 1);
    let fo = sys.f_offset();
    integrate(&sys, u0, dt, steps, |step, u| {
        let s = DoubleExcitationState {
            time: dt * T::from_usize_lossy(step),
            both: u[0],
            one_photon: [u[1..1 + n].to_vec(), u[1 + n..fo].to_vec()],
            two_photon: u[fo..].to_vec(),
            modes: n,
        };
        reduced.push(s.reduced());
        if step % stride == 0 {
            states.push(s);
        }
    })?;
    Ok(DressedRun { states, reduced: DensitySeries { dt, states: reduced, std_errors: None } })
}

/// `Σ_μ Σ_k |G_{μk}|²`, the initial curvature of `|C(t)|²` from |ee⟩.
pub fn total_coupling_weight<T: Real>(couplings: &ModeCouplings<T>) -> T {
    Atom::BOTH
        .iter()
        .flat_map(|&a| couplings.atom(a).iter())
        .fold(T::zero(), |s, g| s + g.norm_sqr())
}

/// Leading coefficient `w` of `1 − |C(t)|² = w t² + O(t⁴)`, from a least
/// squares fit of `(1 − |C|²)/t²` against `t²` over the given samples.
pub fn short_time_curvature<T: Real>(samples: &[(T, T)]) -> T {
    let n = T::from_usize_lossy(samples.len());
    let (mut sx, mut sy, mut sxx, mut sxy) = (T::zero(), T::zero(), T::zero(), T::zero());
    for &(t, loss) in samples {
        let x = t * t;
        let y = loss / x;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (sy - slope * sx) / n
}
