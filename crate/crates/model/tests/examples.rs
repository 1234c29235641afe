#[allow(dead_code)]
#[path = "../examples/gradcheck.rs"]
mod gradcheck;

#[allow(dead_code)]
#[path = "../examples/txt2pi_forward.rs"]
mod txt2pi_forward;

#[test]
fn gradcheck_example_runs() {
    gradcheck::run_example().unwrap();
}

#[test]
fn forward_example_runs() {
    txt2pi_forward::run_example().unwrap();
}
