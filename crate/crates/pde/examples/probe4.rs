// temporary probe: su2 gauge-fix residual traces
use rand::Rng;
use rand::SeedableRng;
use vortexlab_pde::connection::{gauge_apply, GaugeTransform, LatticeConnection, Su2Field};
use vortexlab_pde::gauge_fix::coulomb_fix;
use vortexlab_pde::grid::{TorusGrid, TWO_PI};

fn band(grid: &TorusGrid, rng: &mut impl Rng, amp: f64) -> Su2Field {
    let mut xi = Su2Field::zeros(grid);
    let mut coeffs = [[0.0f64; 5]; 3];
    for row in coeffs.iter_mut() { for v in row.iter_mut() { *v = rng.gen_range(-1.0..1.0); } }
    for i in 0..grid.nx { for j in 0..grid.ny {
        let (x, y) = (grid.x(i), grid.y(j));
        for c in 0..3 {
            let k = &coeffs[c];
            xi.data[grid.idx(i, j)][c] = amp * (k[0]*(TWO_PI*x).cos() + k[1]*(TWO_PI*x).sin() + k[2]*(TWO_PI*y).cos() + k[3]*(TWO_PI*y).sin() + k[4]*(TWO_PI*(x+y)).cos());
        }
    }}
    xi
}

fn main() {
    let grid = TorusGrid::unit(24).unwrap();
    let a0 = LatticeConnection::zero_su2(&grid);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
    for s in 0..4 {
        let amp = 0.05 + 0.1 * s as f64;
        let xi = band(&grid, &mut rng, amp);
        let g = GaugeTransform::from_su2_exponent(&grid, &xi);
        let a = gauge_apply(&grid, &g, &a0).unwrap();
        let res = coulomb_fix(&grid, &a, &a0, 1e-10, 20).unwrap();
        println!("amp={amp}: lq0={:.4} residuals {:?}", res.trace.lq_norms[0], res.trace.slice_residuals);
    }
}
