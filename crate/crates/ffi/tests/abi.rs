use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use stepwave_ffi::*;

const HEAT: &str = r#"{"l": 3.141592653589793, "T": 1, "time_partition": [0, 1],
 "space_partition": [-3.141592653589793, 3.141592653589793], "order": 2,
 "coefficients": [[[0, 0, 1]]], "initial": {"half_c0": 0, "modes": [{"k": 1, "c": 0, "d": 1}]}}"#;

fn fixture(name: &str) -> CString {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name);
    CString::new(std::fs::read_to_string(path).unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(sw_last_error_message()) }.to_string_lossy().into_owned()
}

fn load(json: &CString) -> *mut SwProblem {
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { sw_problem_from_json(json.as_ptr(), &mut p) }, SwStatus::Ok, "{}", last_error());
    p
}

#[test]
fn heat_round_trip() {
    unsafe {
        let p = load(&CString::new(HEAT).unwrap());
        let mut k = 0usize;
        assert_eq!(sw_problem_truncation(p, &mut k), SwStatus::Ok);
        assert_eq!(k, 1);

        let mut s = ptr::null_mut();
        assert_eq!(sw_solution_build(p, &mut s), SwStatus::Ok);
        let mut v = 0.0;
        assert_eq!(sw_solution_evaluate(s, 0.5, 1.0, &mut v), SwStatus::Ok);
        assert!((v - (-0.5f64).exp() * 1f64.sin()).abs() < 1e-14);

        let (mut a, mut fd) = (0.0, 0.0);
        assert_eq!(sw_solution_residual(s, 0.5, 1.0, 1e-4, &mut a, &mut fd), SwStatus::Ok);
        assert!(a.abs() < 1e-12);

        let mut grid = vec![0.0; 4 * 5];
        let mut ts = vec![0.0; 4];
        assert_eq!(
            sw_solution_grid(s, 4, 5, grid.as_mut_ptr(), ts.as_mut_ptr(), ptr::null_mut()),
            SwStatus::Ok
        );
        assert_eq!(ts, vec![0.0, 0.25, 0.5, 0.75]);
        assert!(grid.iter().all(|v| v.is_finite()));

        let mut csv = ptr::null_mut();
        assert_eq!(sw_solution_csv(s, 4, 5, &mut csv), SwStatus::Ok);
        let text = CStr::from_ptr(csv).to_str().unwrap().to_owned();
        sw_string_free(csv);
        assert!(text.starts_with("t,x,psi\n"));
        assert_eq!(text.lines().count(), 21);

        let mut json = ptr::null_mut();
        assert_eq!(sw_problem_to_json(p, &mut json), SwStatus::Ok);
        let again = load(&CStr::from_ptr(json).to_owned());
        sw_string_free(json);
        sw_problem_free(again);

        sw_solution_free(s);
        sw_problem_free(p);
    }
}

#[test]
fn status_codes() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(sw_problem_from_json(ptr::null(), &mut p), SwStatus::NullPointer);
        assert!(last_error().contains("null"));

        let bad = CString::new("{").unwrap();
        assert_eq!(sw_problem_from_json(bad.as_ptr(), &mut p), SwStatus::Syntax);
        assert!(!last_error().is_empty());

        let invalid = CString::new(HEAT.replace("\"order\": 2", "\"order\": 3")).unwrap();
        assert_eq!(sw_problem_from_json(invalid.as_ptr(), &mut p), SwStatus::Validation);

        let utf8 = [0xffu8, 0];
        assert_eq!(sw_problem_from_json(utf8.as_ptr().cast(), &mut p), SwStatus::InvalidUtf8);

        let heat = load(&CString::new(HEAT).unwrap());
        let mut s = ptr::null_mut();
        sw_solution_build(heat, &mut s);
        let mut v = 0.0;
        assert_eq!(sw_solution_evaluate(s, 5.0, 0.0, &mut v), SwStatus::Domain);
        assert_eq!(sw_solution_evaluate(s, 0.5, 0.0, ptr::null_mut()), SwStatus::NullPointer);
        assert_eq!(sw_solution_evaluate(s, 0.5, 0.0, &mut v), SwStatus::Ok);
        assert_eq!(last_error(), "");
        sw_solution_free(s);
        sw_problem_free(heat);

        sw_problem_free(ptr::null_mut());
        sw_solution_free(ptr::null_mut());
        sw_string_free(ptr::null_mut());
    }
}

#[test]
fn divergence_notes_for_overflowing_fixture() {
    unsafe {
        let p = load(&fixture("ex3_5.json"));
        let mut total = 0usize;
        assert_eq!(sw_problem_check_divergence(p, ptr::null_mut(), 0, &mut total), SwStatus::Ok);
        assert!(total > 0);
        let mut notes = vec![
            SwDivergenceNote { row: 0, strip: 0, k: 0, sigma: 0.0, max_exponent: 0.0, overflow: false };
            total
        ];
        let mut n = 0usize;
        sw_problem_check_divergence(p, notes.as_mut_ptr(), total, &mut n);
        assert_eq!(n, total);
        assert!(notes.iter().any(|n| n.overflow));
        assert!(notes.iter().any(|n| !n.overflow && (n.row, n.strip, n.k) == (1, 0, 1) && n.sigma == 1.0));

        let mut s = ptr::null_mut();
        assert_eq!(sw_solution_build(p, &mut s), SwStatus::Ok);
        let mut built = 0usize;
        assert_eq!(sw_solution_notes(s, ptr::null_mut(), 0, &mut built), SwStatus::Ok);
        assert!(built > 0);
        sw_solution_free(s);
        sw_problem_free(p);
    }
}

#[test]
fn primitives() {
    unsafe {
        let a = [1.0, 0.0, 1.0];
        let (mut sigma, mut omega) = (0.0, 0.0);
        assert_eq!(
            sw_spectral_pair(a.as_ptr(), 3, std::f64::consts::PI, 2, &mut sigma, &mut omega),
            SwStatus::Ok
        );
        assert_eq!((sigma, omega), (-3.0, 0.0));
        assert_eq!(
            sw_spectral_pair(a.as_ptr(), 2, 1.0, 1, &mut sigma, &mut omega),
            SwStatus::InvalidInput
        );

        let mut m = [0.0; 4];
        assert_eq!(sw_block_exp(0.0, std::f64::consts::FRAC_PI_2, 1.0, m.as_mut_ptr()), SwStatus::Ok);
        assert!((m[0]).abs() < 1e-15 && (m[1] - 1.0).abs() < 1e-15 && (m[2] + 1.0).abs() < 1e-15);
        assert_eq!(sw_block_exp(800.0, 0.0, 1.0, m.as_mut_ptr()), SwStatus::Overflow);

        let v = CStr::from_ptr(sw_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}

#[test]
fn header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/stepwave.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for name in ["sw_problem_from_json", "sw_solution_grid", "SW_STATUS_OVERFLOW", "SwDivergenceNote"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{}\"\nint main(void) {{ SwProblem *p = 0; return sw_problem_from_json(\"{{}}\", &p) == SW_STATUS_OK; }}\n",
            header.display()
        ),
    )
    .unwrap();
    match Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"]).arg(&src).status() {
        Ok(status) => assert!(status.success(), "header failed to compile"),
        Err(_) => eprintln!("cc not available; skipping compile check"),
    }
}
