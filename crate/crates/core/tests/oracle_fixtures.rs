use std::path::Path;

use levy_moduli::oracles::{brownian_theorem_constant, local_time_diff_second_moment, local_time_moment, Fixtures};
use levy_moduli::spectral::sigma0_sq;
use levy_moduli::{Exponent, Query};

fn fixtures() -> Fixtures {
    Fixtures::load(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/oracles.v1.json")).unwrap()
}

fn computed() -> Vec<(String, f64)> {
    let bh = Exponent::brownian_half;
    let st = |b: f64| Exponent::canonical_stable(b).unwrap();
    let mut out = vec![];
    for q in [
        Query::new(bh(), 1, 1.0),
        Query::new(bh(), 1, 1.0).at(0.3),
        Query::new(bh(), 2, 1.0).at(0.3),
        Query::new(st(2.0), 2, 1.0),
        Query::new(st(1.5), 2, 1.0),
        Query::new(st(1.5), 3, 1.0),
    ] {
        out.push((q.descriptor(), local_time_moment(&q).unwrap()));
    }
    out.push((
        "local_time_diff_second_moment[brownian-half;t=1;x=0;y=0.1]".into(),
        local_time_diff_second_moment(&bh(), 1.0, 0.0, 0.1, 1e-10).unwrap(),
    ));
    out.push(("brownian_theorem_constant[p=3]".into(), brownian_theorem_constant(3.0).unwrap()));
    out.push(("sigma0_sq[stable(beta=1.5);h=1]".into(), sigma0_sq(&st(1.5), 1.0, 1e-10).unwrap()));
    out
}

#[test]
fn golden_values_reproduce() {
    let f = fixtures();
    for (desc, value) in computed() {
        let want = f.get(&desc).unwrap_or_else(|| panic!("no fixture for {desc}"));
        assert_eq!(f.matches(&desc, value), Some(true), "{desc}: {value} vs {}", want.value);
    }
}

#[test]
fn every_fixture_is_exercised() {
    let keys: Vec<String> = computed().into_iter().map(|(d, _)| d).collect();
    let f = fixtures();
    for k in f.0.keys() {
        assert!(keys.contains(k), "stale fixture {k}");
    }
    assert_eq!(f.len(), keys.len());
}

#[test]
fn round_trip() {
    let f = fixtures();
    assert_eq!(Fixtures::from_json_str(&f.to_json_string().unwrap()).unwrap(), f);
}
