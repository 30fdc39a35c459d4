//! Noise-free O-operators on the two-time grid and their kernel
//! convolutions Ō.
//!
//! Each channel `c` carries operators `O_{c,μ}(t, s)` born at `s = t` as the
//! operator that multiplies its noise in the stochastic generator. All
//! channels evolve by `∂_t O = [A(t), O]` with the shared generator
//! `A = −iH_A − Σ_c Σ_μ K_{c,μ} Ō_{c,μ}(t)`, where `K` is the channel's drift
//! partner (σ⁺ for vacuum emission).
//!
//! Only the current row `{O(t_n, s_j)}_j` is needed to advance, so memory is
//! linear in the number of steps. Each step uses a predictor–corrector on the
//! generator and the exact propagation `O ← e^{ΔtĀ} O e^{−ΔtĀ}`.

use crate::correlation::{CorrelationKernel, KernelArgument};
use crate::error::{Error, Result};
use crate::hilbert::{Atom, QubitOperator, EE, EG, GE, GG};
use crate::linalg::{self, Mat4};
use crate::scalar::{c, cr, czero, Real, C};

type Op<T> = QubitOperator<T>;

/// Entries of |O| beyond this abort the march.
pub const INSTABILITY_THRESHOLD: f64 = 1e6;

/// One noise channel of the stochastic generator.
#[derive(Debug, Clone)]
pub struct Channel<T: Real> {
    pub kernel: CorrelationKernel<T>,
    pub argument: KernelArgument,
    /// Operator multiplying the noise; also `O_{c,μ}(t, t)`.
    pub initial: [Op<T>; 2],
    /// Drift partner `K_{c,μ}` in `−Σ K Ō`.
    pub partner: [Op<T>; 2],
}

impl<T: Real> Channel<T> {
    /// Vacuum emission: noise on σ⁻, drift −σ⁺Ō.
    pub fn emission(kernel: CorrelationKernel<T>) -> Self {
        let sm = Atom::BOTH.map(Op::sigma_minus);
        let sp = Atom::BOTH.map(Op::sigma_plus);
        Self { kernel, argument: KernelArgument::Difference, initial: sm, partner: sp }
    }

    /// Thermal absorption partner: noise on σ⁺, drift −σ⁻Ō_w.
    pub fn absorption(kernel: CorrelationKernel<T>) -> Self {
        let sm = Atom::BOTH.map(Op::sigma_minus);
        let sp = Atom::BOTH.map(Op::sigma_plus);
        Self { kernel, argument: KernelArgument::Difference, initial: sp, partner: sm }
    }

    /// Squeezed partner on the reflected domain: noise on σ⁺, drift +σ⁺Ō_w.
    pub fn squeezed(kernel: CorrelationKernel<T>) -> Self {
        let sp = Atom::BOTH.map(Op::sigma_plus);
        let neg = Atom::BOTH.map(|a| -Op::sigma_plus(a));
        Self { kernel, argument: KernelArgument::Sum, initial: sp, partner: neg }
    }

    /// True when the drift partner is the adjoint of the noise operator, the
    /// condition under which the master-equation form applies.
    pub fn is_adjoint_pair(&self) -> bool {
        (0..2).all(|m| self.partner[m] == self.initial[m].dagger())
    }

    fn required_len(&self, steps: usize) -> usize {
        match self.argument {
            KernelArgument::Difference => steps + 1,
            KernelArgument::Sum => 2 * steps + 1,
        }
    }
}

/// Diagnostics gathered while marching.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldReport {
    /// Largest |entry| of any O seen.
    pub max_entry: f64,
    /// Largest relative norm of O outside the four-operator lowering span
    /// (emission channels only).
    pub max_span_residual: f64,
}

/// Solution of the O-operator march.
#[derive(Debug, Clone)]
pub struct OField<T: Real> {
    dt: T,
    steps: usize,
    hamiltonian: Op<T>,
    channels: Vec<Channel<T>>,
    /// `obar[c][μ][n] = Ō_{c,μ}(t_n)`.
    obar: Vec<[Vec<Op<T>>; 2]>,
    /// `O_{c,μ}(t_n, 0)`.
    first_column: Vec<[Vec<Op<T>>; 2]>,
    /// `O_{c,μ}(t_max, s_j)`.
    final_row: Vec<[Vec<Op<T>>; 2]>,
    pub report: FieldReport,
}

fn lowering_span_residual<T: Real>(o: &Op<T>) -> T {
    let total = o.frobenius_norm();
    if total == T::zero() {
        return T::zero();
    }
    let inside = [(GE, EE), (GG, EG), (EG, EE), (GG, GE)];
    let mut out = T::zero();
    for i in 0..4 {
        for j in 0..4 {
            if !inside.contains(&(i, j)) {
                out += o[(i, j)].norm_sqr();
            }
        }
    }
    out.sqrt() / total
}

fn horizon_steps<T: Real>(dt: T, t_max: T) -> Result<usize> {
    if !(dt > T::zero()) || !(t_max >= T::zero()) || !t_max.is_finite() {
        return Err(Error::Config("O-field needs dt > 0 and finite t_max >= 0".into()));
    }
    Ok((t_max / dt).round().to_usize().unwrap_or(0))
}

struct Marcher<'a, T: Real> {
    dt: T,
    h: Op<T>,
    channels: &'a [Channel<T>],
}

impl<T: Real> Marcher<'_, T> {
    /// Ō for every channel and atom from the row at step `n`.
    fn convolve(&self, n: usize, rows: &[[Vec<Op<T>>; 2]]) -> Vec<[Op<T>; 2]> {
        let half = T::lit(0.5);
        self.channels
            .iter()
            .zip(rows.iter())
            .map(|(ch, row)| {
                Atom::BOTH.map(|mu| {
                    let mut acc = Op::zero();
                    for nu in Atom::BOTH {
                        let r = &row[nu.index()];
                        let series = ch.kernel.series(mu, nu);
                        for (j, o) in r.iter().enumerate() {
                            let idx = match ch.argument {
                                KernelArgument::Difference => n - j,
                                KernelArgument::Sum => n + j,
                            };
                            let mut w = self.dt;
                            if j == 0 || j == n {
                                w *= half;
                            }
                            if n == 0 {
                                w = T::zero();
                            }
                            let k = series[idx] * w;
                            if k.re != T::zero() || k.im != T::zero() {
                                acc.axpy(k, o);
                            }
                        }
                        if ch.argument == KernelArgument::Difference {
                            let d = ch.kernel.delta_weight(mu, nu);
                            if d.norm_sqr() > T::zero() {
                                acc.axpy(d * half, &r[n]);
                            }
                        }
                    }
                    acc
                })
            })
            .collect()
    }

    fn generator(&self, obar: &[[Op<T>; 2]]) -> Op<T> {
        let mut a = self.h.scale_c(c(T::zero(), -T::one()));
        for (ch, ob) in self.channels.iter().zip(obar.iter()) {
            for m in 0..2 {
                a = a - ch.partner[m] * ob[m];
            }
        }
        a
    }

    /// Row at step n+1 from the row at n under the constant generator `a`.
    fn advance(&self, a: &Op<T>, rows: &[[Vec<Op<T>>; 2]]) -> Vec<[Vec<Op<T>>; 2]> {
        let e = a.scale(self.dt).exp();
        let einv = a.scale(-self.dt).exp();
        rows.iter()
            .zip(self.channels.iter())
            .map(|(row, ch)| {
                [0, 1].map(|m| {
                    let mut next: Vec<Op<T>> = row[m].iter().map(|o| e * *o * einv).collect();
                    next.push(ch.initial[m]);
                    next
                })
            })
            .collect()
    }
}

/// Marches all channels jointly to `t_max`.
pub fn evolve_channels<T: Real>(channels: Vec<Channel<T>>, hamiltonian: Op<T>, dt: T, t_max: T) -> Result<OField<T>> {
    let steps = horizon_steps(dt, t_max)?;
    for ch in &channels {
        if ch.kernel.len() < ch.required_len(steps) {
            return Err(Error::Config(format!(
                "kernel table of length {} does not cover {} steps",
                ch.kernel.len(),
                steps
            )));
        }
        if (ch.kernel.dt() - dt).abs() > dt * T::lit(1e-9) {
            return Err(Error::Config("kernel and O-field time steps differ".into()));
        }
    }
    let nc = channels.len();
    let marcher = Marcher { dt, h: hamiltonian, channels: &channels };
    let mut rows: Vec<[Vec<Op<T>>; 2]> = channels.iter().map(|ch| [vec![ch.initial[0]], vec![ch.initial[1]]]).collect();
    let mut obar_now = marcher.convolve(0, &rows);
    let mut obar: Vec<[Vec<Op<T>>; 2]> = (0..nc).map(|_| [Vec::with_capacity(steps + 1), Vec::with_capacity(steps + 1)]).collect();
    let mut first: Vec<[Vec<Op<T>>; 2]> = obar.clone();
    let record = |obar: &mut Vec<[Vec<Op<T>>; 2]>, first: &mut Vec<[Vec<Op<T>>; 2]>, ob: &[[Op<T>; 2]], rows: &[[Vec<Op<T>>; 2]]| {
        for c in 0..nc {
            for m in 0..2 {
                obar[c][m].push(ob[c][m]);
                first[c][m].push(rows[c][m][0]);
            }
        }
    };
    record(&mut obar, &mut first, &obar_now, &rows);
    let mut report = FieldReport { max_entry: 1.0, max_span_residual: 0.0 };
    let emission: Vec<bool> = channels
        .iter()
        .map(|ch| ch.initial == Atom::BOTH.map(Op::sigma_minus))
        .collect();
    let limit = T::lit(INSTABILITY_THRESHOLD);
    for n in 0..steps {
        let a_n = marcher.generator(&obar_now);
        let predicted = marcher.advance(&a_n, &rows);
        let ob_pred = marcher.convolve(n + 1, &predicted);
        let a_pred = marcher.generator(&ob_pred);
        let a_mid = (a_n + a_pred).scale(T::lit(0.5));
        rows = marcher.advance(&a_mid, &rows);
        let t = dt * T::from_usize_lossy(n + 1);
        for (ci, row) in rows.iter().enumerate() {
            for r in row.iter() {
                for o in r.iter() {
                    let m = o.max_abs();
                    if !(m <= limit) {
                        return Err(Error::Integrator {
                            t: t.to_f64_lossy(),
                            reason: format!("O-operator entry reached {}", m.to_f64_lossy()),
                        });
                    }
                    report.max_entry = report.max_entry.max(m.to_f64_lossy());
                    if emission[ci] {
                        report.max_span_residual =
                            report.max_span_residual.max(lowering_span_residual(o).to_f64_lossy());
                    }
                }
            }
        }
        obar_now = marcher.convolve(n + 1, &rows);
        record(&mut obar, &mut first, &obar_now, &rows);
    }
    Ok(OField {
        dt,
        steps,
        hamiltonian,
        channels,
        obar,
        first_column: first,
        final_row: rows,
        report,
    })
}

/// Vacuum O-field for one emission kernel.
pub fn evolve_matrix_field<T: Real>(kernel: &CorrelationKernel<T>, omega: [T; 2], dt: T, t_max: T) -> Result<OField<T>> {
    let h = Op::atomic_hamiltonian(omega[0], omega[1]);
    evolve_channels(vec![Channel::emission(kernel.clone())], h, dt, t_max)
}

impl<T: Real> OField<T> {
    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn horizon(&self) -> T {
        self.dt * T::from_usize_lossy(self.steps)
    }

    pub fn hamiltonian(&self) -> &Op<T> {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[Channel<T>] {
        &self.channels
    }

    /// `Ō_{c,μ}(t_n)`.
    pub fn obar_step(&self, channel: usize, atom: Atom, n: usize) -> &Op<T> {
        &self.obar[channel][atom.index()][n]
    }

    pub fn obar_series(&self, channel: usize, atom: Atom) -> &[Op<T>] {
        &self.obar[channel][atom.index()]
    }

    /// `O_{c,μ}(t_n, 0)`.
    pub fn first_column(&self, channel: usize, atom: Atom) -> &[Op<T>] {
        &self.first_column[channel][atom.index()]
    }

    /// `O_{c,μ}(t_max, s_j)`.
    pub fn final_row(&self, channel: usize, atom: Atom) -> &[Op<T>] {
        &self.final_row[channel][atom.index()]
    }

    fn locate(&self, t: T) -> (usize, T) {
        let x = (t / self.dt).max(T::zero());
        let i = x.floor().to_usize().unwrap_or(0);
        if i >= self.steps {
            return (self.steps, T::zero());
        }
        (i, x - T::from_usize_lossy(i))
    }

    /// `Ō_{c,μ}(t)` with linear interpolation between grid times; clamped
    /// to the field horizon.
    pub fn obar_channel(&self, channel: usize, atom: Atom, t: T) -> Op<T> {
        let s = &self.obar[channel][atom.index()];
        let (i, f) = self.locate(t);
        if f == T::zero() {
            return s[i];
        }
        s[i].scale(T::one() - f) + s[i + 1].scale(f)
    }

    /// `(Ō_a(t), Ō_b(t))` of the first channel.
    pub fn obar_at(&self, t: T) -> [Op<T>; 2] {
        Atom::BOTH.map(|a| self.obar_channel(0, a, t))
    }

    /// Drift `Σ_c Σ_μ K_{c,μ} Ō_{c,μ}(t)` entering the trajectory generator.
    pub fn drift(&self, t: T) -> Op<T> {
        let mut d = Op::zero();
        for (ci, ch) in self.channels.iter().enumerate() {
            for a in Atom::BOTH {
                d += ch.partner[a.index()] * self.obar_channel(ci, a, t);
            }
        }
        d
    }
}

/// Supplies `(L, Ō)` pairs for `dρ/dt = −i[H_A, ρ] + Σ ([L, ρŌ†] + h.c.)`.
pub trait ObarSource<T: Real> {
    fn master_terms(&self, t: T, out: &mut Vec<(Op<T>, Op<T>)>);

    /// Errors when the source cannot be written in master-equation form.
    fn check_master_form(&self) -> Result<()> {
        Ok(())
    }
}

impl<T: Real> ObarSource<T> for OField<T> {
    fn master_terms(&self, t: T, out: &mut Vec<(Op<T>, Op<T>)>) {
        out.clear();
        for (ci, ch) in self.channels.iter().enumerate() {
            for a in Atom::BOTH {
                out.push((ch.initial[a.index()], self.obar_channel(ci, a, t)));
            }
        }
    }

    fn check_master_form(&self) -> Result<()> {
        if self.channels.iter().all(Channel::is_adjoint_pair) {
            Ok(())
        } else {
            Err(Error::Config("channel drift is not the adjoint of its noise operator; no master-equation form".into()))
        }
    }
}

impl<T: Real, F> ObarSource<T> for F
where
    F: Fn(T) -> Vec<(Op<T>, Op<T>)>,
{
    fn master_terms(&self, t: T, out: &mut Vec<(Op<T>, Op<T>)>) {
        *out = self(t);
    }
}

/// Basis `O_{μ1..4} = σ_μ⁻, σ_μᶻσ_ν⁻, σ_ν⁻, σ_νᶻσ_μ⁻` of the lowering sector.
pub fn coefficient_basis<T: Real>(mu: Atom) -> [Op<T>; 4] {
    let nu = mu.other();
    [
        Op::sigma_minus(mu),
        Op::sigma_z(mu) * Op::sigma_minus(nu),
        Op::sigma_minus(nu),
        Op::sigma_z(nu) * Op::sigma_minus(mu),
    ]
}

/// Coordinates of a lowering-sector operator in [`coefficient_basis`].
pub fn project_onto_basis<T: Real>(mu: Atom, o: &Op<T>) -> [C<T>; 4] {
    coefficient_basis::<T>(mu).map(|b| b.inner(o) / b.inner(&b))
}

/// Scalar form of the vacuum O-field: `O_μ(t,s) = Σ_j p_{μj}(t,s) O_{μj}`.
#[derive(Debug, Clone)]
pub struct CoefficientField<T: Real> {
    dt: T,
    /// `p[μ][n] = p_{μ·}(t_n, 0)`.
    first_column: [Vec<[C<T>; 4]>; 2],
    /// `p_{μ·}(t_max, s_j)`.
    final_row: [Vec<[C<T>; 4]>; 2],
    /// `P_{μj}(t_n)`, `Q_{μj}(t_n)`.
    p_conv: [Vec<[C<T>; 4]>; 2],
    q_conv: [Vec<[C<T>; 4]>; 2],
}

struct CoefMarcher<'a, T: Real> {
    dt: T,
    omega: [T; 2],
    kernel: &'a CorrelationKernel<T>,
}

type CoefRows<T> = [Vec<[C<T>; 4]>; 2];

impl<T: Real> CoefMarcher<'_, T> {
    /// `(P, Q)` per atom from the row at step `n`.
    fn convolve(&self, n: usize, rows: &CoefRows<T>) -> ([[C<T>; 4]; 2], [[C<T>; 4]; 2]) {
        let half = T::lit(0.5);
        let mut p = [[czero(); 4]; 2];
        let mut q = [[czero(); 4]; 2];
        for mu in Atom::BOTH {
            let nu = mu.other();
            let m = mu.index();
            let self_k = self.kernel.series(mu, mu);
            let cross_k = self.kernel.series(nu, mu);
            for (j, coef) in rows[m].iter().enumerate() {
                let mut w = self.dt;
                if j == 0 || j == n {
                    w *= half;
                }
                if n == 0 {
                    w = T::zero();
                }
                let ks = self_k[n - j] * w;
                let kc = cross_k[n - j] * w;
                for b in 0..4 {
                    p[m][b] += ks * coef[b];
                    q[m][b] += kc * coef[b];
                }
            }
            let ds = self.kernel.delta_weight(mu, mu) * half;
            let dc = self.kernel.delta_weight(nu, mu) * half;
            for b in 0..4 {
                p[m][b] += ds * rows[m][n][b];
                q[m][b] += dc * rows[m][n][b];
            }
        }
        (p, q)
    }

    /// Coefficient generator `L_μ` with `∂_t p_μ = L_μ p_μ`.
    fn generator(&self, mu: Atom, p: &[[C<T>; 4]; 2], q: &[[C<T>; 4]; 2]) -> Mat4<T> {
        let (m, n) = (mu.index(), mu.other().index());
        let pm = |j: usize| p[m][j - 1];
        let pn = |j: usize| p[n][j - 1];
        let qm = |j: usize| q[m][j - 1];
        let qn = |j: usize| q[n][j - 1];
        let iw_mu = c(T::zero(), self.omega[m]);
        let iw_nu = c(T::zero(), self.omega[n]);
        let diag_mu = iw_mu + pm(1) + qn(3) + qm(2) + pn(4);
        let diag_nu_2 = iw_nu + pm(4) + qn(2) + qm(3) + pn(1);
        let mix = pm(4) + qn(2) + qm(2) + pn(4);
        let flip_mu = -qm(1) + qm(4) + pn(2) - pn(3);
        let flip_nu = pm(2) - pm(3) - qn(1) + qn(4);
        let mut l = linalg::zeros();
        l[0][0] = diag_mu;
        l[0][1] = flip_mu;
        l[0][3] = mix;
        l[1][1] = diag_nu_2;
        l[1][0] = flip_nu;
        l[1][2] = mix;
        l[2][2] = diag_nu_2;
        l[2][3] = flip_nu;
        l[2][1] = mix;
        l[3][3] = diag_mu;
        l[3][0] = mix;
        l[3][2] = flip_mu;
        l
    }

    fn advance(&self, gens: &[Mat4<T>; 2], rows: &CoefRows<T>) -> CoefRows<T> {
        let props = gens.map(|g| {
            let mut s = g;
            for row in s.iter_mut() {
                for z in row.iter_mut() {
                    *z *= self.dt;
                }
            }
            linalg::expm(&s)
        });
        [0, 1].map(|m| {
            let e = &props[m];
            let mut next: Vec<[C<T>; 4]> = rows[m]
                .iter()
                .map(|v| {
                    let mut out = [czero(); 4];
                    for (i, o) in out.iter_mut().enumerate() {
                        for j in 0..4 {
                            *o += e[i][j] * v[j];
                        }
                    }
                    out
                })
                .collect();
            next.push(unit());
            next
        })
    }
}

fn unit<T: Real>() -> [C<T>; 4] {
    [cr(T::one()), czero(), czero(), czero()]
}

fn average<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    let mut out = *a;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = (a[i][j] + b[i][j]) * T::lit(0.5);
        }
    }
    out
}

/// Marches the eight coefficient functions with the same scheme as the
/// matrix form.
pub fn evolve_coefficient_field<T: Real>(kernel: &CorrelationKernel<T>, omega: [T; 2], dt: T, t_max: T) -> Result<CoefficientField<T>> {
    let steps = horizon_steps(dt, t_max)?;
    if kernel.len() < steps + 1 {
        return Err(Error::Config("kernel table does not cover the horizon".into()));
    }
    let mk = CoefMarcher { dt, omega, kernel };
    let mut rows: CoefRows<T> = [vec![unit()], vec![unit()]];
    let (mut p, mut q) = mk.convolve(0, &rows);
    let mut out = CoefficientField {
        dt,
        first_column: [vec![rows[0][0]], vec![rows[1][0]]],
        final_row: [vec![], vec![]],
        p_conv: [vec![p[0]], vec![p[1]]],
        q_conv: [vec![q[0]], vec![q[1]]],
    };
    let limit = T::lit(INSTABILITY_THRESHOLD);
    for n in 0..steps {
        let g_n = Atom::BOTH.map(|mu| mk.generator(mu, &p, &q));
        let pred = mk.advance(&g_n, &rows);
        let (pp, qp) = mk.convolve(n + 1, &pred);
        let g_p = Atom::BOTH.map(|mu| mk.generator(mu, &pp, &qp));
        let g_mid = [average(&g_n[0], &g_p[0]), average(&g_n[1], &g_p[1])];
        rows = mk.advance(&g_mid, &rows);
        for r in rows.iter() {
            for v in r.iter() {
                if v.iter().any(|z| !(z.norm() <= limit)) {
                    return Err(Error::Integrator {
                        t: (dt * T::from_usize_lossy(n + 1)).to_f64_lossy(),
                        reason: "coefficient grew beyond threshold".into(),
                    });
                }
            }
        }
        (p, q) = mk.convolve(n + 1, &rows);
        for m in 0..2 {
            out.first_column[m].push(rows[m][0]);
            out.p_conv[m].push(p[m]);
            out.q_conv[m].push(q[m]);
        }
    }
    out.final_row = rows;
    Ok(out)
}

impl<T: Real> CoefficientField<T> {
    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.p_conv[0].len() - 1
    }

    /// `P_{μj}(t_n)` for j = 1..4 (stored at 0..3).
    pub fn p_convolution(&self, atom: Atom, n: usize) -> [C<T>; 4] {
        self.p_conv[atom.index()][n]
    }

    pub fn q_convolution(&self, atom: Atom, n: usize) -> [C<T>; 4] {
        self.q_conv[atom.index()][n]
    }

    pub fn first_column(&self, atom: Atom) -> &[[C<T>; 4]] {
        &self.first_column[atom.index()]
    }

    pub fn final_row(&self, atom: Atom) -> &[[C<T>; 4]] {
        &self.final_row[atom.index()]
    }

    /// `Σ_j p_j O_{μj}`.
    pub fn reconstruct(atom: Atom, p: &[C<T>; 4]) -> Op<T> {
        let basis = coefficient_basis::<T>(atom);
        let mut o = Op::zero();
        for (b, z) in basis.iter().zip(p.iter()) {
            o.axpy(*z, b);
        }
        o
    }

    /// `Ō_μ(t_n) = Σ_j P_{μj} O_{μj} + Σ_j Q_{νj} O_{νj}`.
    pub fn obar_step(&self, atom: Atom, n: usize) -> Op<T> {
        let other = atom.other();
        Self::reconstruct(atom, &self.p_conv[atom.index()][n]) + Self::reconstruct(other, &self.q_conv[other.index()][n])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cis;

    fn comb_kernel(dt: f64, t_max: f64) -> CorrelationKernel<f64> {
        use crate::coupling::{CouplingDistribution, ModeCouplings, ModeGrid};
        let a = CouplingDistribution::comb(vec![0.0, 1.0], 0.5).unwrap();
        let b = CouplingDistribution::comb(vec![0.4, 1.7], 0.5).unwrap();
        let mc = ModeCouplings::new(&a, &b, ModeGrid::new(6.0, 240, t_max).unwrap(), [1.0, 1.0]);
        CorrelationKernel::from_modes(&mc, dt, t_max).unwrap()
    }

    #[test]
    fn zero_kernel_gives_free_rotation() {
        let k = CorrelationKernel::<f64>::zero(0.01, 2.0).unwrap();
        let f = evolve_matrix_field(&k, [1.0, 1.3], 0.01, 2.0).unwrap();
        for (mu, w) in [(Atom::A, 1.0), (Atom::B, 1.3)] {
            for (n, o) in f.first_column(0, mu).iter().enumerate() {
                let expect = Op::sigma_minus(mu).scale_c(cis(w * 0.01 * n as f64));
                assert!((*o - expect).max_abs() < 1e-12);
            }
            assert_eq!(f.obar_at(1.0)[mu.index()], Op::zero());
        }
        let cf = evolve_coefficient_field(&k, [1.0, 1.3], 0.01, 2.0).unwrap();
        let p = cf.first_column(Atom::B)[150];
        assert!((p[0] - cis(1.3 * 1.5)).norm() < 1e-12);
        assert!(p[1..].iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn delta_kernel_gives_half_rate() {
        let g = 0.8;
        let k = CorrelationKernel::<f64>::delta([cr(g); 4], 0.01, 1.0).unwrap();
        let f = evolve_matrix_field(&k, [1.0, 1.0], 0.01, 1.0).unwrap();
        let expect = (Op::sigma_minus(Atom::A) + Op::sigma_minus(Atom::B)).scale(g / 2.0);
        for t in [0.0, 0.37, 1.0] {
            for o in f.obar_at(t) {
                assert!((o - expect).max_abs() < 1e-14);
            }
        }
        let cf = evolve_coefficient_field(&k, [1.0, 1.0], 0.01, 1.0).unwrap();
        for n in [0, 50, 100] {
            let p = cf.p_convolution(Atom::A, n);
            let q = cf.q_convolution(Atom::A, n);
            assert!((p[0] - cr(g / 2.0)).norm() < 1e-14 && (q[0] - cr(g / 2.0)).norm() < 1e-14);
            assert!(p[1..].iter().chain(q[1..].iter()).all(|z| z.norm() < 1e-14));
        }
    }

    #[test]
    fn representations_agree() {
        let (dt, t) = (0.005, 1.5);
        let k = comb_kernel(dt, t);
        let f = evolve_matrix_field(&k, [1.0, 1.0], dt, t).unwrap();
        let cf = evolve_coefficient_field(&k, [1.0, 1.0], dt, t).unwrap();
        let mut worst: f64 = 0.0;
        for mu in Atom::BOTH {
            for n in 0..=f.steps() {
                worst = worst.max((*f.obar_step(0, mu, n) - cf.obar_step(mu, n)).max_abs());
                let o = CoefficientField::reconstruct(mu, &cf.first_column(mu)[n]);
                worst = worst.max((f.first_column(0, mu)[n] - o).max_abs());
            }
            for (o, p) in f.final_row(0, mu).iter().zip(cf.final_row(mu)) {
                worst = worst.max((*o - CoefficientField::reconstruct(mu, p)).max_abs());
            }
        }
        assert!(worst < 1e-10, "max deviation {worst}");
        assert!(f.report.max_span_residual < 1e-12);
    }

    #[test]
    fn obar_annihilates_ground_state() {
        let k = comb_kernel(0.01, 1.0);
        let f = evolve_matrix_field(&k, [1.0, 1.0], 0.01, 1.0).unwrap();
        let gg = crate::hilbert::StateVector::gg();
        for n in 0..=f.steps() {
            for mu in Atom::BOTH {
                let v = f.obar_step(0, mu, n).apply(&gg);
                assert!(v.amps.iter().all(|z| z.norm() == 0.0));
            }
        }
    }

    #[test]
    fn obar_matches_direct_double_sum() {
        // Ō at the first step is a two-point trapezoid over O(t1, 0) and σ⁻.
        let dt = 0.01;
        let k = comb_kernel(dt, 0.5);
        let f = evolve_matrix_field(&k, [1.0, 1.0], dt, 0.5).unwrap();
        let n = 1;
        for mu in Atom::BOTH {
            let mut expect = Op::zero();
            for nu in Atom::BOTH {
                expect.axpy(k.at(mu, nu, 1) * (dt / 2.0), &f.first_column(0, nu)[n]);
                expect.axpy(k.at(mu, nu, 0) * (dt / 2.0), &Op::sigma_minus(nu));
            }
            assert!((*f.obar_step(0, mu, n) - expect).max_abs() < 1e-14);
        }
    }

    #[test]
    fn second_order_in_dt() {
        let t = 1.0;
        let run = |dt: f64| {
            let k = CorrelationKernel::near_delta([cr(1.0), cr(0.3), cr(0.3), cr(1.0)], 6.0, dt, t).unwrap();
            evolve_matrix_field(&k, [1.0, 1.0], dt, t).unwrap().obar_at(t)[0]
        };
        let e1 = (run(0.02) - run(0.01)).max_abs();
        let e2 = (run(0.01) - run(0.005)).max_abs();
        let order = (e1 / e2).log2();
        assert!(order > 1.7, "observed order {order}");
    }

    #[test]
    fn instability_is_reported() {
        let k = CorrelationKernel::<f64>::from_fn(0.05, 20.0, |_, _, _| cr(40.0)).unwrap();
        match evolve_matrix_field(&k, [1.0, 1.0], 0.05, 20.0) {
            Err(Error::Integrator { .. }) => {}
            other => panic!("expected integrator error, got {:?}", other.map(|f| f.report)),
        }
    }

    #[test]
    fn short_kernel_rejected() {
        let k = CorrelationKernel::<f64>::zero(0.01, 0.5).unwrap();
        assert!(evolve_matrix_field(&k, [1.0, 1.0], 0.01, 1.0).is_err());
    }
}
