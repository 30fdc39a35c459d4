//! Two-qubit algebra in the fixed product basis `{|ee⟩, |eg⟩, |ge⟩, |gg⟩}`.
//!
//! The first tensor factor is atom `a`, the second atom `b`. Every module in
//! the crate shares this ordering.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat4};
use crate::scalar::{c, cr, czero, is_finite_c, Real, C};

/// Basis index of `|ee⟩`.
pub const EE: usize = 0;
/// Basis index of `|eg⟩` (atom a excited).
pub const EG: usize = 1;
/// Basis index of `|ge⟩` (atom b excited).
pub const GE: usize = 2;
/// Basis index of `|gg⟩`.
pub const GG: usize = 3;

/// One of the two giant atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    A,
    B,
}

impl Atom {
    pub const BOTH: [Atom; 2] = [Atom::A, Atom::B];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Atom::A => 0,
            Atom::B => 1,
        }
    }

    #[inline]
    pub fn other(self) -> Atom {
        match self {
            Atom::A => Atom::B,
            Atom::B => Atom::A,
        }
    }
}

/// A 4×4 complex operator on the two-qubit space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitOperator<T: Real> {
    m: Mat4<T>,
}

impl<T: Real> Default for QubitOperator<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real> QubitOperator<T> {
    pub fn zero() -> Self {
        Self { m: linalg::zeros() }
    }

    pub fn identity() -> Self {
        Self { m: linalg::identity() }
    }

    pub fn from_rows(m: [[C<T>; 4]; 4]) -> Self {
        Self { m }
    }

    pub fn rows(&self) -> &[[C<T>; 4]; 4] {
        &self.m
    }

    /// Lowering operator σ_μ⁻.
    pub fn sigma_minus(atom: Atom) -> Self {
        let mut m = linalg::zeros();
        let one = cr(T::one());
        match atom {
            Atom::A => {
                m[GE][EE] = one;
                m[GG][EG] = one;
            }
            Atom::B => {
                m[EG][EE] = one;
                m[GG][GE] = one;
            }
        }
        Self { m }
    }

    /// Raising operator σ_μ⁺.
    pub fn sigma_plus(atom: Atom) -> Self {
        Self::sigma_minus(atom).dagger()
    }

    /// σ_μᶻ = |e⟩⟨e| − |g⟩⟨g| on atom μ.
    pub fn sigma_z(atom: Atom) -> Self {
        let mut m = linalg::zeros();
        let (p, n) = (cr(T::one()), cr(-T::one()));
        match atom {
            Atom::A => {
                m[EE][EE] = p;
                m[EG][EG] = p;
                m[GE][GE] = n;
                m[GG][GG] = n;
            }
            Atom::B => {
                m[EE][EE] = p;
                m[EG][EG] = n;
                m[GE][GE] = p;
                m[GG][GG] = n;
            }
        }
        Self { m }
    }

    /// Excitation number σ_μ⁺σ_μ⁻.
    pub fn number(atom: Atom) -> Self {
        Self::sigma_plus(atom) * Self::sigma_minus(atom)
    }

    /// Bare atomic Hamiltonian Σ_μ ω_μ σ_μ⁺σ_μ⁻.
    pub fn atomic_hamiltonian(omega_a: T, omega_b: T) -> Self {
        Self::number(Atom::A).scale(omega_a) + Self::number(Atom::B).scale(omega_b)
    }

    /// Exchanges the roles of the two atoms.
    pub fn swap_atoms(&self) -> Self {
        let perm = [EE, GE, EG, GG];
        let mut m = linalg::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[perm[i]][perm[j]] = self.m[i][j];
            }
        }
        Self { m }
    }

    pub fn dagger(&self) -> Self {
        let mut m = linalg::zeros();
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = self.m[j][i].conj();
            }
        }
        Self { m }
    }

    pub fn conj(&self) -> Self {
        let mut m = self.m;
        for row in m.iter_mut() {
            for z in row.iter_mut() {
                *z = z.conj();
            }
        }
        Self { m }
    }

    pub fn trace(&self) -> C<T> {
        (0..4).fold(czero(), |acc, i| acc + self.m[i][i])
    }

    pub fn scale(&self, s: T) -> Self {
        self.scale_c(cr(s))
    }

    pub fn scale_c(&self, s: C<T>) -> Self {
        let mut m = self.m;
        for row in m.iter_mut() {
            for z in row.iter_mut() {
                *z *= s;
            }
        }
        Self { m }
    }

    /// `self += s · other`.
    #[inline]
    pub fn axpy(&mut self, s: C<T>, other: &Self) {
        for i in 0..4 {
            for j in 0..4 {
                self.m[i][j] += s * other.m[i][j];
            }
        }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    /// Frobenius inner product tr(self† other).
    pub fn inner(&self, other: &Self) -> C<T> {
        let mut acc = czero();
        for i in 0..4 {
            for j in 0..4 {
                acc += self.m[i][j].conj() * other.m[i][j];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> T {
        self.inner(self).re.sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.m
            .iter()
            .flat_map(|r| r.iter())
            .fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flat_map(|r| r.iter()).all(|z| is_finite_c(*z))
    }

    /// Largest deviation from Hermiticity, max |A_ij − conj(A_ji)|.
    pub fn hermiticity_error(&self) -> T {
        let mut err = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                err = err.max((self.m[i][j] - self.m[j][i].conj()).norm());
            }
        }
        err
    }

    /// (A + A†)/2.
    pub fn hermitian_part(&self) -> Self {
        (*self + self.dagger()).scale(T::lit(0.5))
    }

    /// Matrix exponential.
    pub fn exp(&self) -> Self {
        Self { m: linalg::expm(&self.m) }
    }

    pub fn apply(&self, v: &StateVector<T>) -> StateVector<T> {
        let mut out = [czero(); 4];
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..4 {
                *o += self.m[i][j] * v.amps[j];
            }
        }
        StateVector { amps: out }
    }

    /// Eigenvalues and eigenvectors of a Hermitian operator (columns of the
    /// returned operator), sorted by decreasing eigenvalue.
    pub fn hermitian_eigen(&self) -> ([T; 4], Self) {
        let (vals, vecs) = linalg::hermitian_eigen(&self.m);
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&x, &y| vals[y].partial_cmp(&vals[x]).unwrap_or(std::cmp::Ordering::Equal));
        let mut sorted_vals = [T::zero(); 4];
        let mut sorted_vecs = linalg::zeros();
        for (dst, &src) in order.iter().enumerate() {
            sorted_vals[dst] = vals[src];
            for i in 0..4 {
                sorted_vecs[i][dst] = vecs[i][src];
            }
        }
        (sorted_vals, Self { m: sorted_vecs })
    }

    /// Applies a real function to the spectrum of a Hermitian operator.
    pub fn hermitian_map(&self, f: impl Fn(T) -> T) -> Self {
        let (vals, vecs) = linalg::hermitian_eigen(&self.m);
        Self { m: linalg::spectral_map(&vals, &vecs, f) }
    }
}

impl<T: Real> Index<(usize, usize)> for QubitOperator<T> {
    type Output = C<T>;
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.m[i][j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for QubitOperator<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.m[i][j]
    }
}

impl<T: Real> Add for QubitOperator<T> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<T: Real> AddAssign for QubitOperator<T> {
    fn add_assign(&mut self, rhs: Self) {
        for i in 0..4 {
            for j in 0..4 {
                self.m[i][j] += rhs.m[i][j];
            }
        }
    }
}

impl<T: Real> Sub for QubitOperator<T> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for i in 0..4 {
            for j in 0..4 {
                self.m[i][j] -= rhs.m[i][j];
            }
        }
        self
    }
}

impl<T: Real> Neg for QubitOperator<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul for QubitOperator<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self { m: linalg::matmul(&self.m, &rhs.m) }
    }
}

/// Four complex amplitudes in the shared basis. Trajectories of the linear
/// stochastic equation are not normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector<T: Real> {
    pub amps: [C<T>; 4],
}

impl<T: Real> StateVector<T> {
    pub fn new(amps: [C<T>; 4]) -> Self {
        Self { amps }
    }

    pub fn basis(index: usize) -> Self {
        let mut amps = [czero(); 4];
        amps[index] = cr(T::one());
        Self { amps }
    }

    pub fn ee() -> Self {
        Self::basis(EE)
    }
    pub fn eg() -> Self {
        Self::basis(EG)
    }
    pub fn ge() -> Self {
        Self::basis(GE)
    }
    pub fn gg() -> Self {
        Self::basis(GG)
    }

    /// (|eg⟩ ± |ge⟩)/√2.
    pub fn bell(sign: T) -> Self {
        let h = T::one() / T::lit(2.0).sqrt();
        let mut amps = [czero(); 4];
        amps[EG] = cr(h);
        amps[GE] = cr(h * sign.signum());
        Self { amps }
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|z| is_finite_c(*z))
    }

    pub fn scale(&self, s: C<T>) -> Self {
        let mut amps = self.amps;
        for a in amps.iter_mut() {
            *a *= s;
        }
        Self { amps }
    }

    /// `self + s · other`.
    pub fn add_scaled(&self, s: T, other: &Self) -> Self {
        let mut amps = self.amps;
        for (a, b) in amps.iter_mut().zip(other.amps.iter()) {
            *a += *b * s;
        }
        Self { amps }
    }

    /// |self⟩⟨self|.
    pub fn projector(&self) -> QubitOperator<T> {
        let mut op = QubitOperator::zero();
        for i in 0..4 {
            for j in 0..4 {
                op[(i, j)] = self.amps[i] * self.amps[j].conj();
            }
        }
        op
    }
}

/// Diagonal populations of a two-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Populations<T> {
    pub ee: T,
    pub eg: T,
    pub ge: T,
    pub gg: T,
}

impl<T: Real> Populations<T> {
    pub fn total(&self) -> T {
        self.ee + self.eg + self.ge + self.gg
    }

    /// ⟨σ_a⁺σ_a⁻⟩ + ⟨σ_b⁺σ_b⁻⟩.
    pub fn excitation(&self) -> T {
        T::lit(2.0) * self.ee + self.eg + self.ge
    }
}

/// Two-qubit density matrix at dimensionless time ωt.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix<T: Real> {
    pub op: QubitOperator<T>,
    pub time: T,
}

/// Hermiticity tolerance for validated construction.
pub const HERMITICITY_TOL: f64 = 1e-8;

impl<T: Real> DensityMatrix<T> {
    /// Wraps an operator without checks; used by the integrators.
    pub fn from_operator(op: QubitOperator<T>, time: T) -> Self {
        Self { op, time }
    }

    /// Validating constructor: finite, Hermitian within [`HERMITICITY_TOL`].
    pub fn new(op: QubitOperator<T>, time: T) -> Result<Self> {
        let rho = Self { op, time };
        rho.validate(T::lit(HERMITICITY_TOL))?;
        Ok(rho)
    }

    pub fn pure(psi: &StateVector<T>, time: T) -> Self {
        Self { op: psi.projector(), time }
    }

    /// Maximally mixed state I/4.
    pub fn maximally_mixed(time: T) -> Self {
        Self { op: QubitOperator::identity().scale(T::lit(0.25)), time }
    }

    pub fn validate(&self, herm_tol: T) -> Result<()> {
        if !self.op.is_finite() {
            return Err(Error::InvalidState("density matrix has non-finite entries".into()));
        }
        let err = self.op.hermiticity_error();
        if err > herm_tol {
            return Err(Error::InvalidState(format!(
                "density matrix not Hermitian (deviation {:e})", err.to_f64_lossy()
            )));
        }
        Ok(())
    }

    pub fn trace(&self) -> T {
        self.op.trace().re
    }

    pub fn populations(&self) -> Populations<T> {
        Populations {
            ee: self.op[(EE, EE)].re,
            eg: self.op[(EG, EG)].re,
            ge: self.op[(GE, GE)].re,
            gg: self.op[(GG, GG)].re,
        }
    }

    /// Eigenvalues in decreasing order.
    pub fn eigenvalues(&self) -> [T; 4] {
        self.op.hermitian_eigen().0
    }

    pub fn swap_atoms(&self) -> Self {
        Self { op: self.op.swap_atoms(), time: self.time }
    }

    /// Wootters concurrence, clipping negative eigenvalues of ρ at zero first.
    pub fn concurrence(&self) -> Result<T> {
        self.validate(T::lit(1e-6))?;
        let rho = self.op.hermitian_part().hermitian_map(|x| x.max(T::zero()));
        let flip = spin_flip::<T>();
        let rho_tilde = flip * rho.conj() * flip;
        let sqrt_rho = rho.hermitian_map(|x| x.max(T::zero()).sqrt());
        let m = (sqrt_rho * rho_tilde * sqrt_rho).hermitian_part();
        let (vals, _) = m.hermitian_eigen();
        let l: Vec<T> = vals.iter().map(|&v| v.max(T::zero()).sqrt()).collect();
        Ok((l[0] - l[1] - l[2] - l[3]).max(T::zero()))
    }
}

/// σ_y ⊗ σ_y in the shared basis.
fn spin_flip<T: Real>() -> QubitOperator<T> {
    let mut m = QubitOperator::zero();
    m[(EE, GG)] = c(-T::one(), T::zero());
    m[(GG, EE)] = c(-T::one(), T::zero());
    m[(EG, GE)] = cr(T::one());
    m[(GE, EG)] = cr(T::one());
    m
}

/// Concurrence of a density matrix.
pub fn concurrence<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    rho.concurrence()
}

/// Diagonal populations.
pub fn populations<T: Real>(rho: &DensityMatrix<T>) -> Populations<T> {
    rho.populations()
}

/// Trace distance ½‖a − b‖₁.
pub fn trace_distance<T: Real>(a: &DensityMatrix<T>, b: &DensityMatrix<T>) -> T {
    let diff = (a.op - b.op).hermitian_part();
    let (vals, _) = diff.hermitian_eigen();
    vals.iter().fold(T::zero(), |acc, v| acc + v.abs()) * T::lit(0.5)
}
