use std::path::PathBuf;

use symspectra::boundary::BoundaryPair;
use symspectra::builtin;
use symspectra::io::{load_function, load_pair, load_system, SystemSpec};
use symspectra::linalg::max_abs_diff;
use symspectra::propagator::lagrange_bilinear_check;
use symspectra::scalar::{cplx, to_f64};
use symspectra::weyl::weyl_function;
use symspectra::{Pair, System, System32};

fn systems_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../systems")
}

#[test]
fn shipped_systems_match_builtins() {
    for name in builtin::BUILTIN_NAMES {
        let path = systems_dir().join(format!("{}.json", name.to_lowercase()));
        let loaded: System = load_system(&path).unwrap();
        let reference: System = builtin::builtin(name).unwrap();
        assert_eq!(SystemSpec::from_system(&loaded), SystemSpec::from_system(&reference), "{name}");
        assert_eq!(loaded.name.as_deref(), Some(name));
    }
}

#[test]
fn shipped_pairs_and_functions_load() {
    let dir = systems_dir();
    let pairs: Vec<(&str, Pair)> = vec![
        ("tau_dirichlet", BoundaryPair::zeroth(2)),
        ("tau_neumann", BoundaryPair::first(2)),
        ("tau_mixed", BoundaryPair::diagonal(&[1.0, 0.0], &[0.0, 1.0]).unwrap()),
    ];
    for (file, want) in pairs {
        let got: Pair = load_pair(&dir.join(format!("{file}.json"))).unwrap();
        assert_eq!(got, want, "{file}");
    }
    let free = builtin::free1::<f64>();
    let e1 = load_function(&dir.join("f_e1_free1.json"), &free).unwrap();
    assert!(e1.values().iter().all(|v| v[0] == cplx(1.0, 0.0) && v[1] == cplx(0.0, 0.0)));
    let pot = builtin::pot1::<f64>();
    let lin = load_function(&dir.join("f_linear_unit.json"), &pot).unwrap();
    let v = lin.eval(0.25);
    assert!((v[0] - cplx(0.25, 0.0)).norm() < 1e-13 && (v[1] - cplx(1.0, 0.0)).norm() < 1e-13);
}

#[test]
fn single_precision_free_system() {
    let sys: System32 = builtin::free1();
    let check = lagrange_bilinear_check(&sys, cplx(0.5f32, 1.0)).unwrap();
    assert!(check.relative < 1e-5, "relative symplectic defect {}", check.relative);
    let l = cplx(0.25f32, 1.0);
    let m = weyl_function(&sys, l).unwrap().m;
    let err = to_f64(max_abs_diff(&m, &builtin::reference::free1_weyl(l)));
    assert!(err < 1e-4, "Weyl function error {err}");
}
