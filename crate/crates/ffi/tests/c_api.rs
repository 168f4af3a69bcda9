use std::ffi::{CStr, CString};
use std::ptr;

use polyconv_ffi::*;

fn parse(text: &str) -> *mut PcDistribution {
    let c = CString::new(text).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { pc_distribution_parse(c.as_ptr(), &mut out) }, PcStatus::Ok);
    out
}

fn last_error() -> String {
    let p = pc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

const RADEMACHER: &str = "dim 1\n-1 0.5\n1 0.5\n";

#[test]
fn round_trip_and_accessors() {
    let f = parse(RADEMACHER);
    unsafe {
        assert_eq!(pc_distribution_dim(f), 1);
        assert_eq!(pc_distribution_len(f), 2);
        let mut s = ptr::null_mut();
        assert_eq!(pc_distribution_format(f, &mut s), PcStatus::Ok);
        let text = CStr::from_ptr(s).to_str().unwrap().to_string();
        pc_string_free(s);
        let g = parse(&text);
        let mut tv = 1.0;
        assert_eq!(pc_total_variation(f, g, &mut tv), PcStatus::Ok);
        assert_eq!(tv, 0.0);
        let mut m = 0.0;
        assert_eq!(pc_distribution_mass_at(f, [1.0].as_ptr(), 1, &mut m), PcStatus::Ok);
        assert_eq!(m, 0.5);
        pc_distribution_free(f);
        pc_distribution_free(g);
    }
}

#[test]
fn operations() {
    let f = parse(RADEMACHER);
    unsafe {
        let mut f2 = ptr::null_mut();
        assert_eq!(pc_convolve(f, f, &mut f2), PcStatus::Ok);
        let mut p2 = ptr::null_mut();
        assert_eq!(pc_power(f, 2, &mut p2), PcStatus::Ok);
        let mut tv = 1.0;
        assert_eq!(pc_total_variation(f2, p2, &mut tv), PcStatus::Ok);
        assert!(tv < 1e-15);
        let mut m = 0.0;
        pc_distribution_mass_at(p2, [0.0].as_ptr(), 1, &mut m);
        assert!((m - 0.5).abs() < 1e-15);

        let one = parse("dim 1\n1 1\n");
        let mut cp = ptr::null_mut();
        let mut err = -1.0;
        assert_eq!(pc_compound_poisson(1.0, one, 1e-12, &mut cp, &mut err), PcStatus::Ok);
        assert!((0.0..=1e-12).contains(&err));
        pc_distribution_mass_at(cp, [0.0].as_ptr(), 1, &mut m);
        assert!((m - (-1.0f64).exp()).abs() < 1e-12);

        let mut mix = ptr::null_mut();
        assert_eq!(pc_mixture(0.25, one, &mut mix), PcStatus::Ok);
        pc_distribution_mass_at(mix, [0.0].as_ptr(), 1, &mut m);
        assert_eq!(m, 0.75);

        let (mut re, mut im) = (0.0, 1.0);
        assert_eq!(pc_char_fn(f, [0.3].as_ptr(), 1, &mut re, &mut im), PcStatus::Ok);
        assert!((re - 0.3f64.cos()).abs() < 1e-15 && im.abs() < 1e-15);

        let zero = parse("dim 1\n0 1\n");
        let mut k = 0.0;
        assert_eq!(pc_kolmogorov(f, zero, &mut k), PcStatus::Ok);
        assert_eq!(k, 0.5);

        let lit = CString::new("m 1\n1 0.5\n").unwrap();
        let mut poly = ptr::null_mut();
        assert_eq!(pc_polyhedron_parse(lit.as_ptr(), &mut poly), PcStatus::Ok);
        let mut mu = 0.0;
        assert_eq!(pc_measure(f, poly, &mut mu), PcStatus::Ok);
        assert_eq!(mu, 0.5);

        for d in [f, f2, p2, one, cp, mix, zero] {
            pc_distribution_free(d);
        }
        pc_polyhedron_free(poly);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut out = ptr::null_mut();
        let bad = CString::new("dim 1\n0 0.5\n").unwrap();
        assert_eq!(pc_distribution_parse(bad.as_ptr(), &mut out), PcStatus::Parse);
        assert!(out.is_null());
        assert!(!last_error().is_empty());

        let bad = CString::new("dim 1\nx 1\n").unwrap();
        assert_eq!(pc_distribution_parse(bad.as_ptr(), &mut out), PcStatus::Parse);
        assert!(last_error().contains("line 2"));

        assert_eq!(pc_distribution_parse(ptr::null(), &mut out), PcStatus::NullPointer);
        assert_eq!(pc_power(ptr::null(), 3, &mut out), PcStatus::NullPointer);

        let f = parse(RADEMACHER);
        let g = parse("dim 2\n0 0 1\n");
        let mut v = 0.0;
        assert_eq!(pc_kolmogorov(f, g, &mut v), PcStatus::InvalidInput);
        assert_eq!(pc_mixture(1.5, f, &mut out), PcStatus::InvalidInput);
        assert_eq!(pc_power(f, 2, ptr::null_mut()), PcStatus::NullPointer);

        pc_distribution_free(f);
        pc_distribution_free(g);
        pc_distribution_free(ptr::null_mut());
        pc_polyhedron_free(ptr::null_mut());
        pc_string_free(ptr::null_mut());
    }
}

#[test]
fn from_atoms() {
    let coords = [0.0, 0.0, 1.0, -1.0];
    let masses = [0.25, 0.75];
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(pc_distribution_from_atoms(2, coords.as_ptr(), masses.as_ptr(), 2, &mut out), PcStatus::Ok);
        assert_eq!(pc_distribution_dim(out), 2);
        let mut m = 0.0;
        pc_distribution_mass_at(out, [1.0, -1.0].as_ptr(), 2, &mut m);
        assert_eq!(m, 0.75);
        pc_distribution_free(out);
    }
}
