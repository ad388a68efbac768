use std::sync::OnceLock;

use nalgebra::Complex;
use proptest::prelude::*;
use symspectra::block::{canonical_structure_matrix, BlockDims};
use symspectra::boundary::{green_identity_residual, BoundaryPair, MaximalPair};
use symspectra::builtin;
use symspectra::fourier::fourier_transform;
use symspectra::grid::GridFunction;
use symspectra::io::{parse_json, SystemSpec};
use symspectra::linalg::{hermitian_eigenvalues, imag_part, max_abs_diff};
use symspectra::poly::{MatrixPoly, PiecewiseMatrixPoly, DEFAULT_MAX_DEGREE};
use symspectra::propagator::{lagrange_bilinear_check, propagate_forced};
use symspectra::scalar::{cplx, creal};
use symspectra::spectral::{build_spectral_function, default_eps_seq};
use symspectra::weyl::{characteristic_matrix, weyl_function};
use symspectra::{Matrix, Spectral, System, Vector};

fn c(re: f64, im: f64) -> Complex<f64> {
    cplx(re, im)
}

fn upper_half() -> impl Strategy<Value = Complex<f64>> {
    (-3.0..3.0f64, 0.1..3.0f64).prop_map(|(x, y)| c(x, y))
}

fn any_builtin() -> impl Strategy<Value = &'static str> {
    prop::sample::select(builtin::BUILTIN_NAMES.to_vec())
}

/// `(diag(cos θ) Q, diag(sin θ) Q)` with `Q` a real rotation in the first
/// two coordinates: always a self-adjoint constant pair.
fn rotated_pair(n: usize, thetas: &[f64], phi: f64) -> BoundaryPair<f64> {
    let mut q = Matrix::identity(n, n);
    q[(0, 0)] = creal(phi.cos());
    q[(0, 1)] = creal(-phi.sin());
    q[(1, 0)] = creal(phi.sin());
    q[(1, 1)] = creal(phi.cos());
    let diag = |f: fn(f64) -> f64| Matrix::from_diagonal(&Vector::from_iterator(n, thetas.iter().take(n).map(|&t| creal(f(t)))));
    BoundaryPair::constant(diag(f64::cos) * &q, diag(f64::sin) * &q).unwrap()
}

fn free1_sigma() -> &'static Spectral {
    static SIGMA: OnceLock<Spectral> = OnceLock::new();
    SIGMA.get_or_init(|| build_spectral_function(&builtin::free1(), &BoundaryPair::zeroth(2), (-6.0, 6.0), &default_eps_seq()).unwrap())
}

fn polynomial_forcing(sys: &System, coeffs: &[f64]) -> GridFunction<f64> {
    let n = sys.dims().total();
    GridFunction::sample(sys.mesh_for(5.0), |t| {
        Vector::from_fn(n, |i, _| c(coeffs[i] + coeffs[i + 3] * t, coeffs[i + 6] * t * t))
    })
}

fn member(sys: &System, lambda: Complex<f64>, g: &GridFunction<f64>, start: &[f64]) -> MaximalPair<f64> {
    let n = sys.dims().total();
    let prop = propagate_forced(sys, lambda, g.mesh().clone(), g).unwrap();
    let mut full = Vector::zeros(n + 1);
    for i in 0..n {
        full[i] = c(start[2 * i], start[2 * i + 1]);
    }
    full[n] = creal(1.0);
    let y = GridFunction::from_values(prop.mesh().clone(), prop.node_values().iter().map(|m| m * &full).collect()).unwrap();
    let f = y.scale(lambda).add_scaled(creal(1.0), g);
    MaximalPair { y, f }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn structure_matrix_is_skew_and_squares_to_minus_identity(h in 1usize..4, hhat in 0usize..3) {
        let dims = BlockDims::new(h, hhat).unwrap();
        let j = canonical_structure_matrix::<f64>(dims).j;
        let n = dims.total();
        prop_assert_eq!(j.adjoint(), -&j);
        prop_assert_eq!(&j * &j, -Matrix::identity(n, n));
    }

    #[test]
    fn weyl_function_is_nevanlinna(name in any_builtin(), l in upper_half()) {
        let sys = builtin::builtin::<f64>(name).unwrap();
        let m = weyl_function(&sys, l).unwrap().m;
        prop_assert!(hermitian_eigenvalues(&imag_part(&m))[0] >= -1e-9);
        let mc = weyl_function(&sys, l.conj()).unwrap().m;
        prop_assert!(max_abs_diff(&mc, &m.adjoint()) <= 1e-8);
    }

    #[test]
    fn characteristic_matrix_is_nevanlinna(
        name in prop::sample::select(vec!["FREE1", "POT1", "SMOKE3"]),
        thetas in prop::collection::vec(0.0..std::f64::consts::PI, 3),
        phi in 0.0..std::f64::consts::TAU,
        l in upper_half(),
    ) {
        let sys = builtin::builtin::<f64>(name).unwrap();
        let tau = rotated_pair(sys.dims().total(), &thetas, phi);
        let up = characteristic_matrix(&sys, &tau, l).unwrap();
        let down = characteristic_matrix(&sys, &tau, l.conj()).unwrap();
        let scale = 1.0 + up.norm();
        prop_assert!(max_abs_diff(&down, &up.adjoint()) <= 1e-8 * scale);
        prop_assert!(hermitian_eigenvalues(&imag_part(&up))[0] >= -1e-8 * scale);
    }

    #[test]
    fn symplectic_identity_holds_to_roundoff(name in any_builtin(), re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let sys = builtin::builtin::<f64>(name).unwrap();
        prop_assert!(lagrange_bilinear_check(&sys, c(re, im)).unwrap().relative <= 1e-12);
    }

    #[test]
    fn green_identity_on_maximal_pairs(
        name in any_builtin(),
        l1 in upper_half(),
        l2 in upper_half(),
        g1 in prop::collection::vec(-1.0..1.0f64, 9),
        g2 in prop::collection::vec(-1.0..1.0f64, 9),
        s1 in prop::collection::vec(-1.0..1.0f64, 6),
        s2 in prop::collection::vec(-1.0..1.0f64, 6),
    ) {
        let sys = builtin::builtin::<f64>(name).unwrap();
        let first = member(&sys, l1, &polynomial_forcing(&sys, &g1), &s1);
        let second = member(&sys, -l2, &polynomial_forcing(&sys, &g2), &s2);
        prop_assert!(green_identity_residual(&sys, &first, &second).unwrap().residual <= 1e-8);
    }

    #[test]
    fn spectral_function_is_monotone_and_left_continuous(a in -6.0..6.0f64, w in 0.0..6.0f64, k in 0usize..12) {
        let sf = free1_sigma();
        let b = (a + w).min(6.0);
        prop_assert!(hermitian_eigenvalues(&(sf.eval(b) - sf.eval(a)))[0] >= -1e-12);
        prop_assert_eq!(sf.eval(0.0), Matrix::zeros(2, 2));
        let s = sf.jumps[k].s;
        prop_assert_eq!(sf.eval(s), sf.eval(s - 1e-9));
        prop_assert!(max_abs_diff(&(sf.eval(s + 1e-9) - sf.eval(s)), &sf.jumps[k].mass) <= 1e-15);
    }

    #[test]
    fn fourier_transform_is_linear(alpha_re in -2.0..2.0f64, alpha_im in -2.0..2.0f64, p in 0.0..3.0f64) {
        let sys = builtin::deg1::<f64>();
        let mesh = sys.mesh_for(4.0);
        let f = GridFunction::sample(mesh.clone(), |t| Vector::from_vec(vec![c(t.sin(), 0.0), c(1.0, t)]));
        let g = GridFunction::sample(mesh, |t| Vector::from_vec(vec![c(0.0, (p * t).cos()), c(t * t, 0.0)]));
        let alpha = c(alpha_re, alpha_im);
        let grid = [-3.0, -0.5, 0.0, 1.25, 4.0];
        let lhs = fourier_transform(&sys, &f.scale(alpha).add_scaled(creal(1.0), &g), &grid).unwrap().values;
        let fh = fourier_transform(&sys, &f, &grid).unwrap().values;
        let gh = fourier_transform(&sys, &g, &grid).unwrap().values;
        for k in 0..grid.len() {
            let rhs = &fh[k] * alpha + &gh[k];
            prop_assert!((&lhs[k] - rhs).norm() <= 1e-10 * (1.0 + lhs[k].norm()));
        }
    }

    #[test]
    fn system_files_round_trip(
        b in prop::collection::vec(-2.0..2.0f64, 8),
        d in prop::collection::vec(-1.0..1.0f64, 8),
        split in 0.2..0.8f64,
    ) {
        let herm = |v: &[f64]| Matrix::from_row_slice(2, 2, &[c(v[0], 0.0), c(v[1], v[2]), c(v[1], -v[2]), c(v[3], 0.0)]);
        let raw = Matrix::from_row_slice(2, 2, &[c(d[0], d[1]), c(d[2], d[3]), c(d[4], d[5]), c(d[6], d[7])]);
        let psd = raw.adjoint() * &raw;
        let sys = System::new(
            BlockDims::new(1, 0).unwrap(),
            (0.0, 1.0),
            PiecewiseMatrixPoly::new(vec![0.0, split, 1.0], vec![MatrixPoly::constant(herm(&b[..4])), MatrixPoly::new(vec![herm(&b[4..]), herm(&b[..4])]).unwrap()], DEFAULT_MAX_DEGREE).unwrap(),
            PiecewiseMatrixPoly::constant(0.0, 1.0, psd),
        ).unwrap();
        let spec = SystemSpec::from_system(&sys);
        let text = serde_json::to_string(&spec).unwrap();
        let back: SystemSpec = parse_json(&text, "system").unwrap();
        prop_assert_eq!(&back, &spec);
        let rebuilt: System = back.build().unwrap();
        // The constructor may re-symmetrize, so allow the last ulp to move.
        for (x, y) in [(rebuilt.coeff_b(), sys.coeff_b()), (rebuilt.coeff_delta(), sys.coeff_delta())] {
            prop_assert_eq!(x.breaks(), y.breaks());
            for (p, q) in x.pieces().iter().zip(y.pieces()) {
                prop_assert_eq!(p.degree(), q.degree());
                for (u, v) in p.coeffs().iter().zip(q.coeffs()) {
                    prop_assert!(max_abs_diff(u, v) <= 1e-15 * (1.0 + v.norm()));
                }
            }
        }
    }
}
