//! Frozen values for N = 1, k = 0.5. Regenerate only after the three-route
//! agreement passes: `cargo test -p dunkl --test golden -- --ignored`.

use std::path::PathBuf;

use dunkl::kernel::IntertwiningMeasure;
use dunkl::riesz::KernelField;
use dunkl::rootsys::ReflectionSetup;

const XS: [f64; 5] = [-2.3, -0.7, 0.4, 1.1, 3.0];
const YS: [f64; 6] = [-1.9, -0.35, 0.0, 0.6, 1.6, 2.7];

fn path(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "tests", "golden", name].iter().collect()
}

fn setup() -> ReflectionSetup {
    ReflectionSetup::new(vec![0.5]).unwrap()
}

fn kernel_table() -> String {
    let field = KernelField::new(&setup(), 64);
    let mut out = String::from("x,y,k_full\n");
    for &x in &XS {
        for &y in &YS {
            let v = field.full(0, &[x], &[y]).unwrap();
            out.push_str(&format!("{x},{y},{v:.17e}\n"));
        }
    }
    out
}

fn measure_dump() -> String {
    IntertwiningMeasure::new(&setup(), &[0.7], 8).unwrap().to_text()
}

#[test]
#[ignore]
fn regenerate() {
    std::fs::write(path("kernel_n1_k05.csv"), kernel_table()).unwrap();
    std::fs::write(path("measure_n1_k05_x07.txt"), measure_dump()).unwrap();
}

#[test]
fn kernel_matches_frozen_values() {
    let frozen = std::fs::read_to_string(path("kernel_n1_k05.csv")).unwrap();
    let now = kernel_table();
    let mut rows = 0;
    for (a, b) in frozen.lines().zip(now.lines()).skip(1) {
        let fa: Vec<&str> = a.split(',').collect();
        let fb: Vec<&str> = b.split(',').collect();
        assert_eq!(fa[..2], fb[..2]);
        let (va, vb): (f64, f64) = (fa[2].parse().unwrap(), fb[2].parse().unwrap());
        assert!((va - vb).abs() <= 1e-12 * va.abs().max(1.0), "{a} vs {b}");
        rows += 1;
    }
    assert_eq!(rows, XS.len() * YS.len());
}

#[test]
fn measure_dump_is_frozen() {
    let frozen = std::fs::read_to_string(path("measure_n1_k05_x07.txt")).unwrap();
    let now = measure_dump();
    assert_eq!(frozen.lines().count(), now.lines().count());
    for (a, b) in frozen.lines().zip(now.lines()) {
        for (u, v) in a.split(' ').zip(b.split(' ')) {
            let (u, v): (f64, f64) = (u.parse().unwrap(), v.parse().unwrap());
            assert!((u - v).abs() <= 1e-14, "{a} vs {b}");
        }
    }
}
