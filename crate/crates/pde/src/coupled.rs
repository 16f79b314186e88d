//! The coupled Kazdan-Warner equation on a product Sigma x S of two flat
//! tori:
//!
//!   d*_Sigma d_Sigma u_Sigma + d*_S d_S u + e^u h = f,
//!   u_Sigma(z) = (1/Vol S) int_S u(z, .)
//!
//! solved by the nested scheme of the existence proof: reduce f to its
//! mean `a` by two linear solves, then run an outer Newton iteration on
//! u_Sigma where each evaluation solves the mean-constrained fibre
//! problem and the outer derivative is the exact variational slope of the
//! fibre response (never a finite difference). Fibre solves at distinct
//! base points are independent and run in parallel with a deterministic
//! (index-ordered) assembly.

use rayon::prelude::*;

use crate::grid::{laplacian, poisson_solve, GridError, ScalarField, TorusGrid};
use crate::kazdan_warner::{exp_times, fiber_response_with_slope, DiagLaplace, KwError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoupledError {
    #[error("hypothesis violated: h must be nonnegative (min {min:e})")]
    NegativeH { min: f64 },
    #[error("hypothesis violated: int h <= 0 over the product")]
    NonpositiveHIntegral,
    #[error("hypothesis violated: int f <= 0 over the product")]
    NonpositiveFIntegral,
    #[error("outer Newton did not converge: residual {residual:e} after {iters} iterations")]
    NoConvergence { residual: f64, iters: usize },
    #[error("fibre solve failed at base node {z}: {source}")]
    Fiber { z: usize, source: KwError },
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Product of two torus grids; fields are stored as
/// (sigma nodes) x (s nodes), row-major in the sigma index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductGrid {
    pub sigma: TorusGrid,
    pub s: TorusGrid,
}

impl ProductGrid {
    pub fn new(sigma: TorusGrid, s: TorusGrid) -> Self {
        ProductGrid { sigma, s }
    }

    pub fn len(&self) -> usize {
        self.sigma.len() * self.s.len()
    }

    pub fn volume(&self) -> f64 {
        self.sigma.volume() * self.s.volume()
    }
}

/// Scalar field on the product.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductField {
    pub n_sigma: usize,
    pub n_s: usize,
    pub data: Vec<f64>,
}

impl ProductField {
    pub fn zeros(grid: &ProductGrid) -> Self {
        ProductField {
            n_sigma: grid.sigma.len(),
            n_s: grid.s.len(),
            data: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &ProductGrid, c: f64) -> Self {
        ProductField {
            n_sigma: grid.sigma.len(),
            n_s: grid.s.len(),
            data: vec![c; grid.len()],
        }
    }

    /// Sample f(z_x, z_y, x, y) over Sigma x S.
    pub fn sample(
        grid: &ProductGrid,
        mut f: impl FnMut(f64, f64, f64, f64) -> f64,
    ) -> Self {
        let mut out = Self::zeros(grid);
        for zi in 0..grid.sigma.nx {
            for zj in 0..grid.sigma.ny {
                let z = grid.sigma.idx(zi, zj);
                for xi in 0..grid.s.nx {
                    for xj in 0..grid.s.ny {
                        out.data[z * grid.s.len() + grid.s.idx(xi, xj)] = f(
                            grid.sigma.x(zi),
                            grid.sigma.y(zj),
                            grid.s.x(xi),
                            grid.s.y(xj),
                        );
                    }
                }
            }
        }
        out
    }

    pub fn fiber(&self, z: usize) -> ScalarField {
        ScalarField {
            nx: 0, // reshaped below by the caller's grid
            ny: 0,
            data: self.data[z * self.n_s..(z + 1) * self.n_s].to_vec(),
        }
    }

    pub fn fiber_on(&self, grid: &ProductGrid, z: usize) -> ScalarField {
        ScalarField {
            nx: grid.s.nx,
            ny: grid.s.ny,
            data: self.data[z * self.n_s..(z + 1) * self.n_s].to_vec(),
        }
    }

    pub fn set_fiber(&mut self, z: usize, f: &ScalarField) {
        self.data[z * self.n_s..(z + 1) * self.n_s].copy_from_slice(&f.data);
    }

    /// Fibre mean over S as a field on Sigma.
    pub fn sigma_mean(&self, grid: &ProductGrid) -> ScalarField {
        let mut out = ScalarField::zeros(&grid.sigma);
        for z in 0..self.n_sigma {
            out.data[z] = self.data[z * self.n_s..(z + 1) * self.n_s]
                .iter()
                .sum::<f64>()
                / self.n_s as f64;
        }
        out
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn integral(&self, grid: &ProductGrid) -> f64 {
        self.data.iter().sum::<f64>() * grid.sigma.cell() * grid.s.cell()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn linf(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        ProductField {
            n_sigma: self.n_sigma,
            n_s: self.n_s,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

/// d*_Sigma d_Sigma acting on the Sigma dependence of a product field
/// (applied fibre-component-wise).
pub fn laplacian_sigma(grid: &ProductGrid, u: &ProductField) -> ProductField {
    let ns = grid.s.len();
    let mut out = ProductField::zeros(grid);
    // reorganise: for each S node, apply the Sigma Laplacian over z
    let mut slice = ScalarField::zeros(&grid.sigma);
    for k in 0..ns {
        for z in 0..grid.sigma.len() {
            slice.data[z] = u.data[z * ns + k];
        }
        let ls = laplacian(&grid.sigma, &slice);
        for z in 0..grid.sigma.len() {
            out.data[z * ns + k] = ls.data[z];
        }
    }
    out
}

/// d*_S d_S acting fibre-wise.
pub fn laplacian_s(grid: &ProductGrid, u: &ProductField) -> ProductField {
    let mut out = ProductField::zeros(grid);
    for z in 0..grid.sigma.len() {
        let f = u.fiber_on(grid, z);
        let lf = laplacian(&grid.s, &f);
        out.set_fiber(z, &lf);
    }
    out
}

/// Full coupled residual d*_Sigma d_Sigma u_Sigma + d*_S d_S u + e^u h - f.
pub fn coupled_residual(
    grid: &ProductGrid,
    u: &ProductField,
    h: &ProductField,
    f: &ProductField,
) -> ProductField {
    let u_sigma = u.sigma_mean(grid);
    let lsig = laplacian(&grid.sigma, &u_sigma);
    let ls = laplacian_s(grid, u);
    let ns = grid.s.len();
    let mut out = ProductField::zeros(grid);
    for z in 0..grid.sigma.len() {
        for k in 0..ns {
            let idx = z * ns + k;
            out.data[idx] =
                lsig.data[z] + ls.data[idx] + exp_times(u.data[idx], h.data[idx]) - f.data[idx];
        }
    }
    out
}

/// Step 1 of the existence proof: split f into its product mean `a` plus
/// d*_Sigma d_Sigma v_Sigma + d*_S d_S v, with mean_S v = v_Sigma.
/// Solving with h replaced by e^v h and adding v afterwards recovers the
/// original problem.
pub fn reduce_to_constant(
    grid: &ProductGrid,
    f: &ProductField,
) -> Result<(f64, ProductField), CoupledError> {
    let a = f.mean();
    let f_sigma = f.sigma_mean(grid);
    // the means below vanish analytically; project off rounding noise so
    // the Poisson precondition is met
    let mut rhs_sigma = f_sigma.map(|v| v - a);
    let m = rhs_sigma.mean();
    rhs_sigma.add_scalar_mut(-m);
    let v_sigma = poisson_solve(&grid.sigma, &rhs_sigma)?;
    let mut v = ProductField::zeros(grid);
    for z in 0..grid.sigma.len() {
        let mut rhs = f.fiber_on(grid, z);
        let fs = f_sigma.data[z];
        for r in rhs.data.iter_mut() {
            *r -= fs;
        }
        let m = rhs.mean();
        rhs.add_scalar_mut(-m);
        let mut vf = poisson_solve(&grid.s, &rhs)?;
        vf.add_scalar_mut(v_sigma.data[z]);
        v.set_fiber(z, &vf);
    }
    Ok((a, v))
}

/// Report from the coupled solver.
#[derive(Debug, Clone)]
pub struct CoupledReport {
    pub u: ProductField,
    pub u_sigma: ScalarField,
    pub a: f64,
    pub residual_sup: f64,
    pub outer_iters: usize,
    pub outer_history: Vec<f64>,
}

const OUTER_MAX_ITERS: usize = 40;
const ARMIJO_MIN_STEP: f64 = 1.0 / (1 << 20) as f64;

/// Solve the coupled equation with general data (h >= 0, int h > 0,
/// int f > 0) to a 4D sup-norm residual of `tol`.
pub fn solve_coupled(
    grid: &ProductGrid,
    h: &ProductField,
    f: &ProductField,
    tol: f64,
) -> Result<CoupledReport, CoupledError> {
    let hmin = h.min();
    if hmin < 0.0 {
        return Err(CoupledError::NegativeH { min: hmin });
    }
    if h.integral(grid) <= 0.0 {
        return Err(CoupledError::NonpositiveHIntegral);
    }
    if f.integral(grid) <= 0.0 {
        return Err(CoupledError::NonpositiveFIntegral);
    }

    let (a, v) = reduce_to_constant(grid, f)?;
    let h_eff = ProductField {
        n_sigma: h.n_sigma,
        n_s: h.n_s,
        data: h
            .data
            .iter()
            .zip(&v.data)
            .map(|(&hv, &vv)| exp_times(vv, hv))
            .collect(),
    };
    let inner = solve_coupled_constant(grid, &h_eff, a, tol * 0.5)?;
    let u = inner.u.zip(&v, |p, q| p + q);
    let residual = coupled_residual(grid, &u, h, f);
    let residual_sup = residual.linf();
    if residual_sup > tol {
        return Err(CoupledError::NoConvergence {
            residual: residual_sup,
            iters: inner.outer_iters,
        });
    }
    Ok(CoupledReport {
        u_sigma: u.sigma_mean(grid),
        u,
        a,
        residual_sup,
        outer_iters: inner.outer_iters,
        outer_history: inner.outer_history,
    })
}

/// Core nested solver for constant right-hand side f = a.
pub fn solve_coupled_constant(
    grid: &ProductGrid,
    h: &ProductField,
    a: f64,
    tol: f64,
) -> Result<CoupledReport, CoupledError> {
    if a <= 0.0 {
        return Err(CoupledError::NonpositiveFIntegral);
    }
    let nz = grid.sigma.len();
    let ns = grid.s.len();
    let fiber_tol = (tol * 0.25).min(1e-11);

    let fibers_h: Vec<ScalarField> = (0..nz).map(|z| h.fiber_on(grid, z)).collect();
    let h_mean_total = h.mean().max(1e-12);
    let t0 = (a / h_mean_total).max(1e-8).ln();
    let mut u_sigma = ScalarField::constant(&grid.sigma, t0);

    // warm-start cache of fibre solutions (mean-zero parts)
    let mut warm: Vec<Option<ScalarField>> = vec![None; nz];

    // evaluate the outer map and its diagonal derivative at u_sigma
    let evaluate = |u_sigma: &ScalarField,
                    warm: &Vec<Option<ScalarField>>|
     -> Result<(ScalarField, Vec<f64>, Vec<ScalarField>), CoupledError> {
        let results: Vec<Result<(f64, f64, ScalarField), CoupledError>> = (0..nz)
            .into_par_iter()
            .map(|z| {
                fiber_response_with_slope(
                    &grid.s,
                    &fibers_h[z],
                    u_sigma.data[z],
                    fiber_tol,
                    warm[z].as_ref(),
                )
                .map_err(|e| CoupledError::Fiber { z, source: e })
            })
            .collect();
        let mut values = ScalarField::zeros(&grid.sigma);
        let mut slopes = vec![0.0; nz];
        let mut fields = Vec::with_capacity(nz);
        for (z, r) in results.into_iter().enumerate() {
            let (val, slope, uf) = r?;
            values.data[z] = val;
            slopes[z] = slope;
            fields.push(uf);
        }
        Ok((values, slopes, fields))
    };

    let outer_residual = |u_sigma: &ScalarField, values: &ScalarField| -> ScalarField {
        let mut r = laplacian(&grid.sigma, u_sigma);
        for (rv, vv) in r.data.iter_mut().zip(&values.data) {
            *rv += vv - a;
        }
        r
    };

    let (values0, mut slopes, mut fields) = evaluate(&u_sigma, &warm)?;
    let mut r = outer_residual(&u_sigma, &values0);
    let mut history = vec![r.linf()];
    let mut iters = 0;
    while *history.last().unwrap() > tol * 0.5 && iters < OUTER_MAX_ITERS {
        // refresh warm starts from the latest fibre solves
        for (w, fu) in warm.iter_mut().zip(&fields) {
            let t = fu.mean();
            *w = Some(fu.map(|v| v - t));
        }
        let diag = ScalarField {
            nx: grid.sigma.nx,
            ny: grid.sigma.ny,
            data: slopes.clone(),
        };
        let system = DiagLaplace {
            grid: &grid.sigma,
            diag: &diag,
            mean_zero: false,
        };
        let rhs = r.map(|v| -v);
        let (delta, _) = system.solve(&rhs, 1e-12, 4000);

        let f0 = r.l2(&grid.sigma);
        let mut step = 1.0;
        loop {
            let mut trial = u_sigma.clone();
            trial.axpy(step, &delta);
            let (tv, ts, tf) = evaluate(&trial, &warm)?;
            let tr = outer_residual(&trial, &tv);
            let ft = tr.l2(&grid.sigma);
            if ft.is_finite() && ft <= (1.0 - 1e-4 * step) * f0 {
                u_sigma = trial;
                slopes = ts;
                fields = tf;
                r = tr;
                break;
            }
            step *= 0.5;
            if step < ARMIJO_MIN_STEP {
                u_sigma.axpy(ARMIJO_MIN_STEP, &delta);
                let (tv, ts, tf) = evaluate(&u_sigma, &warm)?;
                slopes = ts;
                fields = tf;
                r = outer_residual(&u_sigma, &tv);
                break;
            }
        }
        history.push(r.linf());
        iters += 1;
    }
    if *history.last().unwrap() > tol * 0.5 {
        return Err(CoupledError::NoConvergence {
            residual: *history.last().unwrap(),
            iters,
        });
    }

    // assemble the 4D solution from the fibre solves
    let mut u = ProductField::zeros(grid);
    for z in 0..nz {
        u.data[z * ns..(z + 1) * ns].copy_from_slice(&fields[z].data);
    }
    let residual_sup = {
        let f_const = ProductField::constant(grid, a);
        coupled_residual(grid, &u, h, &f_const).linf()
    };
    Ok(CoupledReport {
        u_sigma,
        u,
        a,
        residual_sup,
        outer_iters: iters,
        outer_history: history,
    })
}

/// Certificate from the a-priori bounds of the constant-f problem:
/// a - d*_Sigma d_Sigma u_Sigma must be nonnegative (it equals the fibre
/// average of e^u h), and the empirical delta envelope is reported.
#[derive(Debug, Clone, Copy)]
pub struct KwCertificate {
    pub nonneg_ok: bool,
    pub min_gap: f64,
    pub delta: f64,
}

pub fn prop_kw_certificate(
    grid: &ProductGrid,
    u: &ProductField,
    h: &ProductField,
    a: f64,
) -> KwCertificate {
    let u_sigma = u.sigma_mean(grid);
    let lsig = laplacian(&grid.sigma, &u_sigma);
    let gap = lsig.map(|v| a - v);
    let min_gap = gap.min();
    let nonneg_ok = min_gap >= -1e-8 * (1.0 + a.abs());

    // empirical delta: largest delta with
    // delta h_Sigma <= a - L u_Sigma <= delta^{-1} sup_S h  and
    // delta <= e^u <= delta^{-1}
    let h_sigma = h.sigma_mean(grid);
    let mut delta = f64::INFINITY;
    for (k, &uv) in u.data.iter().enumerate() {
        let e = uv.exp();
        delta = delta.min(e).min(1.0 / e);
        let _ = k;
    }
    let ns = grid.s.len();
    for z in 0..grid.sigma.len() {
        let g = gap.data[z].max(0.0);
        if h_sigma.data[z] > 0.0 {
            delta = delta.min(g / h_sigma.data[z]);
        }
        let sup_h = h.data[z * ns..(z + 1) * ns]
            .iter()
            .fold(0.0f64, |m, v| m.max(*v));
        if g > 0.0 && sup_h > 0.0 {
            delta = delta.min(sup_h / g);
        }
    }
    if !delta.is_finite() {
        delta = 0.0;
    }
    KwCertificate {
        nonneg_ok,
        min_gap,
        delta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TWO_PI;
    use crate::kazdan_warner::solve_kws;

    fn small_product(n_sigma: usize, n_s: usize) -> ProductGrid {
        ProductGrid::new(
            TorusGrid::unit(n_sigma).unwrap(),
            TorusGrid::unit(n_s).unwrap(),
        )
    }

    #[test]
    fn reduce_constant_f_gives_zero_v() {
        let grid = small_product(8, 8);
        let f = ProductField::constant(&grid, 1.7);
        let (a, v) = reduce_to_constant(&grid, &f).unwrap();
        assert!((a - 1.7).abs() < 1e-12);
        assert!(v.linf() < 1e-12);
    }

    #[test]
    fn reduce_sigma_mode_matches_poisson_oracle() {
        // f = a + cos mode on Sigma only: v is the Sigma Poisson solve,
        // constant along S
        let grid = small_product(16, 8);
        let a = 2.0;
        let f = ProductField::sample(&grid, |zx, _, _, _| a + (TWO_PI * zx).cos());
        let (a_out, v) = reduce_to_constant(&grid, &f).unwrap();
        assert!((a_out - a).abs() < 1e-13);
        let mode = grid.sigma.sample(|zx, _| (TWO_PI * zx).cos());
        let oracle = poisson_solve(&grid.sigma, &mode).unwrap();
        let ns = grid.s.len();
        let mut worst = 0.0f64;
        for z in 0..grid.sigma.len() {
            for k in 0..ns {
                worst = worst.max((v.data[z * ns + k] - oracle.data[z]).abs());
            }
        }
        assert!(worst < 1e-11, "defect {worst}");
    }

    #[test]
    fn reduce_residual_identity() {
        let grid = small_product(8, 12);
        let f = ProductField::sample(&grid, |zx, zy, x, y| {
            0.9 + 0.3 * (TWO_PI * (zx + y)).cos() + 0.2 * (TWO_PI * (zy + x)).sin()
        });
        let (a, v) = reduce_to_constant(&grid, &f).unwrap();
        // d*_Sigma d_Sigma v_Sigma + d*_S d_S v = f - a
        let v_sigma = v.sigma_mean(&grid);
        let lsig = laplacian(&grid.sigma, &v_sigma);
        let ls = laplacian_s(&grid, &v);
        let ns = grid.s.len();
        let mut worst = 0.0f64;
        for z in 0..grid.sigma.len() {
            for k in 0..ns {
                let lhs = lsig.data[z] + ls.data[z * ns + k];
                let rhs = f.data[z * ns + k] - a;
                worst = worst.max((lhs - rhs).abs());
            }
        }
        assert!(worst <= 1e-10, "identity defect {worst}");
        // mean_S v = v_Sigma holds by construction; check it anyway
        let check = v.sigma_mean(&grid);
        assert!(check.zip(&v_sigma, |p, q| p - q).linf() < 1e-14);
    }

    #[test]
    fn constant_data_gives_logarithm() {
        let grid = small_product(8, 8);
        let h = ProductField::constant(&grid, 1.0);
        let f = ProductField::constant(&grid, 3.0);
        let rep = solve_coupled(&grid, &h, &f, 1e-9).unwrap();
        let err = rep
            .u
            .zip(&ProductField::constant(&grid, 3.0f64.ln()), |p, q| p - q)
            .linf();
        assert!(err < 1e-9, "error {err}");
    }

    #[test]
    fn hypothesis_checks() {
        let grid = small_product(8, 8);
        let h = ProductField::constant(&grid, 1.0);
        let f = ProductField::constant(&grid, -1.0);
        assert!(matches!(
            solve_coupled(&grid, &h, &f, 1e-8),
            Err(CoupledError::NonpositiveFIntegral)
        ));
        let zero = ProductField::zeros(&grid);
        let fpos = ProductField::constant(&grid, 1.0);
        assert!(matches!(
            solve_coupled(&grid, &zero, &fpos, 1e-8),
            Err(CoupledError::NonpositiveHIntegral)
        ));
    }

    #[test]
    fn separable_bump_soloch_uniqueness_and_nesting() {
        let grid = small_product(12, 12);
        let h = ProductField::sample(&grid, |zx, zy, x, y| {
            let b1 = (-8.0 * ((zx - 0.5).powi(2) + (zy - 0.5).powi(2))).exp();
            let b2 = (-6.0 * ((x - 0.3).powi(2) + (y - 0.7).powi(2))).exp();
            b1 * b2
        });
        let f = ProductField::constant(&grid, 1.3);
        let tol = 1e-9;
        let rep = solve_coupled(&grid, &h, &f, tol).unwrap();
        assert!(rep.residual_sup <= tol);

        // nesting consistency: re-solving any fibre at t = u_Sigma(z)
        // reproduces u(z, .)
        let ns = grid.s.len();
        for z in [0usize, 37, grid.sigma.len() - 1] {
            let hz = h.fiber_on(&grid, z);
            let t = rep.u_sigma.data[z];
            let fz = solve_kws(&grid.s, &hz, t, 1e-12, None).unwrap();
            let mut worst = 0.0f64;
            for k in 0..ns {
                worst = worst.max((fz.u.data[k] - rep.u.data[z * ns + k]).abs());
            }
            assert!(worst <= 10.0 * tol, "fibre {z} defect {worst}");
        }

        // monotone outer map at sampled base points
        for z in [3usize, 50] {
            let hz = h.fiber_on(&grid, z);
            let (_, slope, _) =
                fiber_response_with_slope(&grid.s, &hz, rep.u_sigma.data[z], 1e-12, None)
                    .unwrap();
            assert!(slope >= 0.0);
        }

        // certificate on the reduced constant problem
        let (a, v) = reduce_to_constant(&grid, &f).unwrap();
        assert!(v.linf() < 1e-12);
        let cert = prop_kw_certificate(&grid, &rep.u, &h, a);
        assert!(cert.nonneg_ok);
        assert!(cert.delta >= 0.0);
    }

    #[test]
    fn reduction_correctness_composition() {
        // solve_coupled(h, f) = v + solve_coupled_constant(e^v h, a)
        let grid = small_product(8, 8);
        let h = ProductField::sample(&grid, |zx, _, x, _| {
            1.0 + 0.5 * (TWO_PI * zx).cos() * (TWO_PI * x).sin()
        });
        let f = ProductField::sample(&grid, |zx, zy, x, y| {
            1.1 + 0.2 * (TWO_PI * (zx + zy)).sin() + 0.1 * (TWO_PI * (x + y)).cos()
        });
        let tol = 1e-9;
        let full = solve_coupled(&grid, &h, &f, tol).unwrap();
        let (a, v) = reduce_to_constant(&grid, &f).unwrap();
        let h_eff = h.zip(&v, |hv, vv| exp_times(vv, hv));
        let reduced = solve_coupled_constant(&grid, &h_eff, a, tol * 0.5).unwrap();
        let recomposed = reduced.u.zip(&v, |p, q| p + q);
        let d = full.u.zip(&recomposed, |p, q| p - q).linf();
        assert!(d <= 10.0 * tol, "composition defect {d}");
    }

    #[test]
    fn certificate_rejects_perturbed_non_solution() {
        let grid = small_product(8, 8);
        let h = ProductField::constant(&grid, 1.0);
        let a = 2.0f64;
        // u = log a solves; a strong Sigma-dependent perturbation breaks
        // the nonnegativity of a - L u_Sigma
        let bad = ProductField::sample(&grid, |zx, _, _, _| {
            a.ln() + 30.0 * (TWO_PI * zx).cos()
        });
        let cert = prop_kw_certificate(&grid, &bad, &h, a);
        assert!(!cert.nonneg_ok);

        // constants: gap = a > 0, delta = min(e^u, e^-u)
        let good = ProductField::constant(&grid, a.ln());
        let cert = prop_kw_certificate(&grid, &good, &h, a);
        assert!(cert.nonneg_ok);
        assert!((cert.min_gap - a).abs() < 1e-12);
    }
}
