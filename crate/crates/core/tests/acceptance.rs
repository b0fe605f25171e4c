//! Full-size acceptance run, one test per criterion. Add `--nocapture` to see
//! the measured values next to each PASS/FAIL line.

use crpoint::selftest::{self, Config, Outcome};

fn check(run: fn(&Config) -> Outcome) {
    let outcome = run(&Config::default());
    println!("{outcome}");
    assert!(outcome.pass, "{outcome}");
}

#[test]
fn criterion_1_sign_classifier_oracle() {
    check(selftest::sign_oracle);
}

#[test]
fn criterion_2_determinant_polynomials() {
    check(selftest::det_formulas);
}

#[test]
fn criterion_3_group_invariance() {
    check(selftest::group_invariance);
}

#[test]
fn criterion_4_normal_form_soundness() {
    check(selftest::normal_form_soundness);
}

#[test]
fn criterion_5_homotopy_certification() {
    check(selftest::homotopy_certification);
}

#[test]
fn criterion_6_no_new_complex_points() {
    check(selftest::radial_construction);
}

#[test]
fn criterion_7_levi_forms() {
    check(selftest::levi_forms);
}

#[test]
fn criterion_8_growth_bounds() {
    check(selftest::growth);
}
