//! Spatial coupling profiles, the discretized waveguide, and the per-mode
//! couplings `G_{μk} = ∫ g_μ(x) e^{-ikx} dx`.

use crate::error::{Error, Result};
use crate::hilbert::Atom;
use crate::scalar::{cis, czero, Real, C};

/// Shape of one atom's coupling profile. Positions are in units of λ.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape<T> {
    /// `g(x) = (1/Ñ) Σ_i δ(x − x_i)`.
    Comb { points: Vec<T>, normalization: T },
    /// Unit-area Gaussian centered at `center` with standard deviation `width`.
    Gaussian { center: T, width: T },
    /// Sum of two unit-area Gaussians sharing one width.
    DoubleGaussian { centers: [T; 2], width: T },
}

/// Coupling profile `g_μ(x)` scaled by a global strength `g₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingDistribution<T> {
    pub shape: Shape<T>,
    pub strength: T,
}

/// Strength that makes a single point coupling decay at rate Γ = 1.
pub fn unit_rate_strength<T: Real>() -> T {
    T::one() / T::lit(2.0).sqrt()
}

impl<T: Real> CouplingDistribution<T> {
    /// Comb with Ñ = m so the point weights sum to `strength`.
    pub fn comb(points: Vec<T>, strength: T) -> Result<Self> {
        let m = T::from_usize_lossy(points.len());
        Self::comb_normalized(points, m, strength)
    }

    pub fn comb_normalized(points: Vec<T>, normalization: T, strength: T) -> Result<Self> {
        let d = Self { shape: Shape::Comb { points, normalization }, strength };
        d.validate()?;
        Ok(d)
    }

    /// Single coupling point.
    pub fn point(x: T, strength: T) -> Result<Self> {
        Self::comb(vec![x], strength)
    }

    pub fn gaussian(center: T, width: T, strength: T) -> Result<Self> {
        let d = Self { shape: Shape::Gaussian { center, width }, strength };
        d.validate()?;
        Ok(d)
    }

    pub fn double_gaussian(centers: [T; 2], width: T, strength: T) -> Result<Self> {
        let d = Self { shape: Shape::DoubleGaussian { centers, width }, strength };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.strength.is_finite() {
            return Err(Error::Config("coupling strength must be finite".into()));
        }
        match &self.shape {
            Shape::Comb { points, normalization } => {
                if points.is_empty() {
                    return Err(Error::Config("comb needs at least one point".into()));
                }
                if !(*normalization > T::zero()) {
                    return Err(Error::Config("comb normalization must be positive".into()));
                }
                if points.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Config("comb positions must be finite".into()));
                }
            }
            Shape::Gaussian { center, width } => {
                if !(*width > T::zero()) || !center.is_finite() {
                    return Err(Error::Config("gaussian width must be positive".into()));
                }
            }
            Shape::DoubleGaussian { centers, width } => {
                if !(*width > T::zero()) || centers.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Config("double gaussian width must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Unscaled Fourier transform `∫ shape(x) e^{-ikx} dx`.
    pub fn form_factor(&self, k: T) -> C<T> {
        let half = T::lit(0.5);
        match &self.shape {
            Shape::Comb { points, normalization } => {
                let s = points.iter().fold(czero(), |acc, &x| acc + cis(-k * x));
                s / *normalization
            }
            Shape::Gaussian { center, width } => {
                cis(-k * *center) * (-(k * *width).powi(2) * half).exp()
            }
            Shape::DoubleGaussian { centers, width } => {
                let env = (-(k * *width).powi(2) * half).exp();
                (cis(-k * centers[0]) + cis(-k * centers[1])) * env
            }
        }
    }

    /// Markovian decay rate `g₀² (|ĝ(ω)|² + |ĝ(−ω)|²)` of an isolated atom,
    /// i.e. 2π times the spectral density at ω.
    pub fn markov_rate(&self, omega: T) -> T {
        let s2 = self.strength * self.strength;
        s2 * (self.form_factor(omega).norm_sqr() + self.form_factor(-omega).norm_sqr())
    }

    /// Same profile moved by `delta`.
    pub fn translated(&self, delta: T) -> Self {
        let shape = match &self.shape {
            Shape::Comb { points, normalization } => Shape::Comb {
                points: points.iter().map(|&x| x + delta).collect(),
                normalization: *normalization,
            },
            Shape::Gaussian { center, width } => {
                Shape::Gaussian { center: *center + delta, width: *width }
            }
            Shape::DoubleGaussian { centers, width } => Shape::DoubleGaussian {
                centers: [centers[0] + delta, centers[1] + delta],
                width: *width,
            },
        };
        Self { shape, strength: self.strength }
    }

    /// Centers of the coupling regions (comb points, or Gaussian centers).
    pub fn centers(&self) -> Vec<T> {
        match &self.shape {
            Shape::Comb { points, .. } => points.clone(),
            Shape::Gaussian { center, .. } => vec![*center],
            Shape::DoubleGaussian { centers, .. } => centers.to_vec(),
        }
    }
}

/// Separation Δx̄_ab between corresponding centers of the two atoms. Errors
/// when the profiles are not translates of each other region by region.
pub fn separation<T: Real>(a: &CouplingDistribution<T>, b: &CouplingDistribution<T>) -> Result<T> {
    let ca = a.centers();
    let cb = b.centers();
    if ca.len() != cb.len() {
        return Err(Error::DimensionMismatch(format!(
            "atoms have {} and {} coupling regions",
            ca.len(),
            cb.len()
        )));
    }
    let d = cb[0] - ca[0];
    let tol = T::lit(1e-9) * (T::one() + d.abs());
    for (xa, xb) in ca.iter().zip(cb.iter()) {
        if ((*xb - *xa) - d).abs() > tol {
            return Err(Error::Config("coupling regions are not uniformly separated".into()));
        }
    }
    Ok(d)
}

/// Uniform symmetric wavevector grid with linear dispersion ω = |k|.
///
/// `N` is even and the grid has no `k = 0` point: the positive half is
/// `(j + ½)Δk` for `j < N/2` and the negative half is its exact mirror, so
/// `|k_j| == |k_{N−1−j}|` holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid<T> {
    k: Vec<T>,
    dk: T,
    k_max: T,
}

impl<T: Real> ModeGrid<T> {
    /// Builds the grid and checks `t_max < t_rec / 2`, `t_rec = 2π/Δk`.
    pub fn new(k_max: T, n: usize, t_max: T) -> Result<Self> {
        if !(k_max > T::zero()) || !k_max.is_finite() {
            return Err(Error::Config("k_max must be positive".into()));
        }
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::Config(format!("mode count must be even and at least 2, got {n}")));
        }
        let dk = T::lit(2.0) * k_max / T::from_usize_lossy(n - 1);
        let half = n / 2;
        let pos: Vec<T> = (0..half)
            .map(|j| (T::from_usize_lossy(j) + T::lit(0.5)) * dk)
            .collect();
        let mut k = Vec::with_capacity(n);
        k.extend(pos.iter().rev().map(|&x| -x));
        k.extend(pos.iter().copied());
        let grid = Self { k, dk, k_max };
        let max_allowed = grid.max_horizon();
        if !(t_max < max_allowed) {
            return Err(Error::HorizonTooLong {
                t_max: t_max.to_f64_lossy(),
                max_allowed: max_allowed.to_f64_lossy(),
            });
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn wavevectors(&self) -> &[T] {
        &self.k
    }

    #[inline]
    pub fn frequency(&self, j: usize) -> T {
        self.k[j].abs()
    }

    pub fn frequencies(&self) -> Vec<T> {
        self.k.iter().map(|k| k.abs()).collect()
    }

    pub fn spacing(&self) -> T {
        self.dk
    }

    pub fn k_max(&self) -> T {
        self.k_max
    }

    /// Largest mode frequency on the grid.
    pub fn max_frequency(&self) -> T {
        self.k_max
    }

    /// Revival time 2π/Δk of the discretized continuum.
    pub fn recurrence_time(&self) -> T {
        T::lit(2.0) * T::PI() / self.dk
    }

    /// Longest horizon accepted by [`ModeGrid::new`].
    pub fn max_horizon(&self) -> T {
        T::lit(0.5) * self.recurrence_time()
    }

    /// Quadrature factor √(Δk/2π) folded into every `G_{μk}`.
    pub fn weight(&self) -> T {
        (self.dk / (T::lit(2.0) * T::PI())).sqrt()
    }

    /// Index pairs `(j, N−1−j)` with `j < N/2`: the two modes sharing one
    /// frequency.
    pub fn mirror_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.k.len();
        (0..n / 2).map(move |j| (j, n - 1 - j))
    }
}

/// `G_{μk}` on the grid, including the quadrature weight √(Δk/2π).
pub fn fourier_coupling<T: Real>(dist: &CouplingDistribution<T>, grid: &ModeGrid<T>) -> Vec<C<T>> {
    let w = grid.weight() * dist.strength;
    grid.wavevectors()
        .iter()
        .map(|&k| dist.form_factor(k) * w)
        .collect()
}

/// Both atoms' couplings on one shared grid, plus their bare frequencies.
#[derive(Debug, Clone)]
pub struct ModeCouplings<T: Real> {
    pub grid: ModeGrid<T>,
    pub g: [Vec<C<T>>; 2],
    pub omega: [T; 2],
}

impl<T: Real> ModeCouplings<T> {
    pub fn new(
        a: &CouplingDistribution<T>,
        b: &CouplingDistribution<T>,
        grid: ModeGrid<T>,
        omega: [T; 2],
    ) -> Self {
        let ga = fourier_coupling(a, &grid);
        let gb = fourier_coupling(b, &grid);
        Self { grid, g: [ga, gb], omega }
    }

    /// Wraps precomputed couplings (e.g. a toy two-mode model).
    pub fn from_raw(grid: ModeGrid<T>, g: [Vec<C<T>>; 2], omega: [T; 2]) -> Result<Self> {
        let n = grid.len();
        if g[0].len() != n || g[1].len() != n {
            return Err(Error::DimensionMismatch(format!(
                "couplings have lengths {} and {}, grid has {n} modes",
                g[0].len(),
                g[1].len()
            )));
        }
        Ok(Self { grid, g, omega })
    }

    pub fn atom(&self, atom: Atom) -> &[C<T>] {
        &self.g[atom.index()]
    }

    /// Σ_{μ,k} |G_{μk}|².
    pub fn total_weight(&self) -> T {
        self.g
            .iter()
            .flat_map(|g| g.iter())
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
    }

    /// Same grid and frequencies with every coupling replaced by `f(k, G)`.
    pub fn map(&self, f: impl Fn(usize, C<T>) -> C<T>) -> Self {
        let g = [0, 1].map(|m| self.g[m].iter().enumerate().map(|(j, &z)| f(j, z)).collect());
        Self { grid: self.grid.clone(), g, omega: self.omega }
    }

    /// All couplings set to zero.
    pub fn decoupled(&self) -> Self {
        self.map(|_, _| czero())
    }
}
