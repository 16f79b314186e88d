// temporary probe: solved-vortex energy identity numbers
use num_complex::Complex64;
use vortexlab_pde::grid::TorusGrid;
use vortexlab_pde::vortex::{energy_identity_check, solve_vortex};

fn main() {
    let grid = TorusGrid::unit(64).unwrap();
    let tau = 9.0;
    let (cfg, _) = solve_vortex(&grid, 1, &[1], &[vec![Complex64::new(0.5, 0.25)]], tau, 1e-10).unwrap();
    let rep = energy_identity_check(&cfg, tau).unwrap();
    println!("E={:.8} top={:.8} res={:.3e} gap={:.3e} rhs={:.8}", rep.energy, rep.topological_term, rep.residual_term, rep.gap, rep.rhs);
}
