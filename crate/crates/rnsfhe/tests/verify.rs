use rnsfhe::verify::{run, Fault, Scope, Size};

#[test]
fn kernel_suites_pass() {
    let s = run(Scope::Kernels, Size::Toy, 1, Fault::None);
    assert!(s.passed, "{:?}", s.suites);
    assert!(s.total_comparisons > 10_000);
}

#[test]
fn ckks_suites_pass() {
    let s = run(Scope::Ckks, Size::Toy, 2, Fault::None);
    assert!(s.passed, "{:?}", s.suites);
}

#[test]
fn injected_fault_is_caught() {
    let s = run(Scope::Kernels, Size::Toy, 1, Fault::ShuffleOffByOne);
    assert!(!s.passed);
    let bad: Vec<_> = s.suites.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    assert_eq!(bad, ["automorphism_shuffle_vs_oracle"]);
}

#[test]
fn summary_serializes_with_schema() {
    let s = run(Scope::Kernels, Size::Toy, 3, Fault::None);
    let v = serde_json::to_value(&s).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["scope"], "kernels");
}
