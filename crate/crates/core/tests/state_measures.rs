//! Concurrence and trace distance against nalgebra-based references.

use giant_sse::hilbert::trace_distance;
use giant_sse::{DensityMatrix, QubitOperator, StateVector, C};
use nalgebra::{Complex, Matrix4};
use proptest::prelude::*;

type M = Matrix4<Complex<f64>>;

fn to_na(rho: &DensityMatrix<f64>) -> M {
    M::from_fn(|i, j| rho.op[(i, j)])
}

fn from_na(m: &M) -> DensityMatrix<f64> {
    let mut op = QubitOperator::zero();
    for i in 0..4 {
        for j in 0..4 {
            op[(i, j)] = m[(i, j)];
        }
    }
    DensityMatrix::new(op, 0.0).unwrap()
}

fn hermitian_sqrt(m: &M) -> M {
    let eig = m.symmetric_eigen();
    let d = eig.eigenvalues.map(|x| Complex::new(x.max(0.0).sqrt(), 0.0));
    let u = eig.eigenvectors;
    u * M::from_diagonal(&d) * u.adjoint()
}

/// Wootters' formula evaluated with nalgebra's Hermitian eigensolver.
fn reference_concurrence(rho: &M) -> f64 {
    let mut yy = M::zeros();
    yy[(0, 3)] = Complex::new(-1.0, 0.0);
    yy[(3, 0)] = Complex::new(-1.0, 0.0);
    yy[(1, 2)] = Complex::new(1.0, 0.0);
    yy[(2, 1)] = Complex::new(1.0, 0.0);
    let tilde = yy * rho.conjugate() * yy;
    let s = hermitian_sqrt(rho);
    let r = s * tilde * s;
    let r = (r + r.adjoint()) * Complex::new(0.5, 0.0);
    let mut l: Vec<f64> = r.symmetric_eigen().eigenvalues.iter().map(|x| x.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

fn random_density(entries: &[(f64, f64)]) -> M {
    let a = M::from_fn(|i, j| {
        let (re, im) = entries[4 * i + j];
        Complex::new(re, im)
    });
    let rho = a * a.adjoint();
    let tr = rho.trace();
    rho / tr
}

#[test]
fn werner_state_closed_form() {
    for p in [0.0, 0.2, 1.0 / 3.0, 0.5, 0.8, 1.0] {
        let bell = DensityMatrix::pure(&StateVector::bell(1.0), 0.0);
        let mixed = DensityMatrix::<f64>::maximally_mixed(0.0);
        let op = bell.op.scale(p) + mixed.op.scale(1.0 - p);
        let rho = DensityMatrix::new(op, 0.0).unwrap();
        let want = ((3.0 * p - 1.0) / 2.0).max(0.0);
        assert!((rho.concurrence().unwrap() - want).abs() < 1e-9, "p = {p}");
        assert!((reference_concurrence(&to_na(&rho)) - want).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pure_state_concurrence(v in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)) {
        let amps: Vec<C<f64>> = v.iter().map(|&(a, b)| C::new(a, b)).collect();
        let n = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(n > 1e-3);
        let psi = StateVector::new([amps[0] / n, amps[1] / n, amps[2] / n, amps[3] / n]);
        let want = 2.0 * (psi.amps[0] * psi.amps[3] - psi.amps[1] * psi.amps[2]).norm();
        let rho = DensityMatrix::pure(&psi, 0.0);
        prop_assert!((rho.concurrence().unwrap() - want).abs() < 1e-6);
    }

    #[test]
    fn mixed_state_concurrence(e in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16)) {
        let m = random_density(&e);
        let rho = from_na(&m);
        let got = rho.concurrence().unwrap();
        prop_assert!((got - reference_concurrence(&m)).abs() < 1e-7);
        prop_assert!((0.0..=1.0).contains(&got));
        prop_assert!((rho.swap_atoms().concurrence().unwrap() - got).abs() < 1e-7);
    }

    #[test]
    fn trace_distance_is_half_nuclear_norm(
        e in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        f in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
    ) {
        let (x, y) = (random_density(&e), random_density(&f));
        let want = 0.5 * (x - y).singular_values().sum();
        let got = trace_distance(&from_na(&x), &from_na(&y));
        prop_assert!((got - want).abs() < 1e-10);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&got));
        prop_assert!(trace_distance(&from_na(&x), &from_na(&x)) < 1e-12);
    }
}
