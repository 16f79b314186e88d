// temporary probe: gap scaling for twisted configs
use num_complex::Complex64;
use vortexlab_pde::grid::{TorusGrid, TWO_PI};
use vortexlab_pde::connection::LatticeConnection;
use vortexlab_pde::theta::build_background;
use vortexlab_pde::vortex::*;

fn main() {
    for n in [32usize, 64, 128] {
        let grid = TorusGrid::unit(n).unwrap();
        let tau = 0.6;
        let bg = build_background(&grid, 1, &[Complex64::new(0.3, 0.6)], (0, 0)).unwrap();
        // smooth modulation of the theta background
        let mut s1 = bg.section.clone();
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let (x, y) = (grid.x(i), grid.y(j));
                let m = Complex64::new(0.3 + 0.08 * (TWO_PI * x).cos(), 0.05 * (TWO_PI * y).sin());
                s1.data[grid.idx(i, j)] *= m;
            }
        }
        let reference = LatticeConnection::reference_u1(&grid, 1);
        let (rx, ry) = reference.u1_components();
        let ax = rx.zip(&grid.sample(|x, y| 0.1 * (TWO_PI * y).sin() + 0.05 * (TWO_PI * x).cos()), |a, b| a + b + bg.delta_x);
        let ay = ry.zip(&grid.sample(|x, _| -0.08 * (TWO_PI * x).sin()), |a, b| a + b + bg.delta_y);
        let cfg = VortexConfig {
            grid,
            action: LinearAction::new(vec![1], tau).unwrap(),
            connection: LatticeConnection::U1 { degree: 1, ax, ay },
            sections: vec![s1],
            perturbation: None,
        };
        let rep = energy_identity_check(&cfg, tau).unwrap();
        println!("n={n}: E={:.8} rhs={:.8} gap={:.3e} top={:.6}", rep.energy, rep.rhs, rep.gap, rep.topological_term);
    }
}
