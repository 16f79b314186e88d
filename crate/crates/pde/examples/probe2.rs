// temporary probe: multiweight dbar residual scale
use num_complex::Complex64;
use vortexlab_pde::grid::TorusGrid;
use vortexlab_pde::vortex::solve_vortex;

fn main() {
    for n in [32usize, 64] {
        let grid = TorusGrid::unit(n).unwrap();
        let z1 = Complex64::new(0.25, 0.4);
        let d2 = vec![Complex64::new(0.25, 0.15), Complex64::new(0.25, 0.65)];
        let (_, rep) = solve_vortex(&grid, 1, &[1, 2], &[vec![z1], d2], 12.0, 1e-10).unwrap();
        println!(
            "n={n}: dbar={:.4e} moment={:.4e} idgap={:.3e} kw_iters={}",
            rep.dbar_residual_sup, rep.moment_residual_sup, rep.integrated_identity_gap, rep.kw.newton_iters
        );
    }
}
