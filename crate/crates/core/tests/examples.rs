#[path = "../examples/walk_sums.rs"]
mod walk_sums;
#[path = "../examples/closed_forms.rs"]
mod closed_forms;
#[path = "../examples/spectrum.rs"]
mod spectrum;
#[path = "../examples/basis_profile.rs"]
mod basis_profile;
#[path = "../examples/verdict.rs"]
mod verdict;
#[path = "../examples/report.rs"]
mod report;

#[test]
fn walk_sums_example_runs() {
    let out = walk_sums::run_example().unwrap();
    assert!(out.starts_with("3 fwd [2,2,-2,2,2] 16 4096 -> 1/256\n3 fwd [2,2,2] 8 64 -> 1/8\n"), "{out}");
    assert!(out.contains("class 0 (1 walks)"));
}

#[test]
fn closed_forms_example_runs() {
    let out = closed_forms::run_example().unwrap();
    assert!(out.contains("forward walk counts 1 2 3 5 8"), "{out}");
    assert!(out.contains("catalan 1 1 2 5 14 42 132"));
}

#[test]
fn spectrum_example_runs() {
    let out = spectrum::run_example().unwrap();
    assert!(out.contains("n=8"), "{out}");
}

#[test]
fn basis_profile_example_runs() {
    let out = basis_profile::run_example().unwrap();
    assert_eq!(out.lines().count(), 5, "{out}");
}

#[test]
fn verdict_example_runs() {
    let out = verdict::run_example().unwrap();
    assert!(out.contains("NotBasis"));
    assert!(out.contains("Basis"));
    assert!(out.contains("NotCovered"));
}

#[test]
fn report_example_runs() {
    let out = report::run_example().unwrap();
    assert!(out.starts_with("Basis on per-"), "{out}");
}
