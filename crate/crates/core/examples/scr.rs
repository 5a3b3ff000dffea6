use logshrink::solver::*;
use logshrink::{PenaltySpec, PenaltyFamily, SolverConfig};
fn main() {
    let d = [1.0, 1.0];
    let p = PenaltySpec::new(PenaltyFamily::ShapeKl).unwrap();
    for eta in [1.0, 100.0, 3766.847743001155] {
    let r = solve_generic(&d, eta, &p, &SolverConfig::default()).unwrap();
    println!("eta {eta} ref {:?} it {} g {:e}", r.a_hat.as_slice(), r.iterations, r.final_grad_norm);
    for s in [[-6.0, 6.0], [6.0, -6.0], [3.0, -1.0], [-5.0, -5.5], [5.0, 4.0]] {
        match solve_generic_from(&d, eta, &p, &SolverConfig::default(), &s) {
            Ok(o) => println!("  {:?} -> {:?} it {} g {:e} conv {}", s, o.a_hat.as_slice(), o.iterations, o.final_grad_norm, o.converged),
            Err(e) => println!("  {:?} -> err {e}", s),
        }
    }}
}
