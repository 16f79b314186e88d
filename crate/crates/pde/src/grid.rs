//! Flat 2-torus grids and the discrete calculus used by every solver.
//!
//! Conventions, fixed once:
//!   - nodes (i, j) with i = 0..nx along x (period lx) and j = 0..ny along
//!     y (period ly); row-major storage index i*ny + j; spacings
//!     hx = lx/nx, hy = ly/ny; cell area hx*hy.
//!   - `laplacian` is the 5-point d*d (positive semidefinite, kernel =
//!     constants); its eigenvalue on the mode cos(2 pi k x / lx) is
//!     (2/hx^2)(1 - cos(2 pi k hx / lx)).
//!   - first derivatives are central differences; the pair (d, d*) is an
//!     exact discrete adjoint pair.
//!   - a `TwistedSection` of degree k is a complex nodal field with plain
//!     periodicity in x and the y-wrap rule
//!     u(x, y + ly) = exp(-2 pi i k x / lx) u(x, y).

use num_complex::Complex64;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("grid sides must be even and at least 4, got {nx} x {ny}")]
    BadDimensions { nx: usize, ny: usize },
    #[error("periods must be positive, got {lx} x {ly}")]
    BadPeriods { lx: f64, ly: f64 },
    #[error("field size {got} does not match grid {expect}")]
    SizeMismatch { got: usize, expect: usize },
    #[error("poisson_solve requires a mean-zero right-hand side (|mean| = {mean:e})")]
    NonzeroMean { mean: f64 },
    #[error("non-finite entry in field")]
    NonFinite,
}

/// Uniform periodic grid on a flat 2-torus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusGrid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl TorusGrid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self, GridError> {
        if nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0 {
            return Err(GridError::BadDimensions { nx, ny });
        }
        if !(lx > 0.0) || !(ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(GridError::BadPeriods { lx, ly });
        }
        Ok(TorusGrid { nx, ny, lx, ly })
    }

    pub fn unit(n: usize) -> Result<Self, GridError> {
        Self::new(n, n, 1.0, 1.0)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn cell(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn volume(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy()
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Build a scalar field by sampling a function of (x, y).
    pub fn sample(&self, mut f: impl FnMut(f64, f64) -> f64) -> ScalarField {
        let mut data = vec![0.0; self.len()];
        for i in 0..self.nx {
            for j in 0..self.ny {
                data[self.idx(i, j)] = f(self.x(i), self.y(j));
            }
        }
        ScalarField {
            nx: self.nx,
            ny: self.ny,
            data,
        }
    }

    pub fn sample_complex(
        &self,
        degree: i64,
        mut f: impl FnMut(f64, f64) -> Complex64,
    ) -> TwistedSection {
        let mut data = vec![Complex64::default(); self.len()];
        for i in 0..self.nx {
            for j in 0..self.ny {
                data[self.idx(i, j)] = f(self.x(i), self.y(j));
            }
        }
        TwistedSection {
            nx: self.nx,
            ny: self.ny,
            degree,
            data,
        }
    }
}

/// Real nodal field.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub nx: usize,
    pub ny: usize,
    pub data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &TorusGrid) -> Self {
        ScalarField {
            nx: grid.nx,
            ny: grid.ny,
            data: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: &TorusGrid, c: f64) -> Self {
        ScalarField {
            nx: grid.nx,
            ny: grid.ny,
            data: vec![c; grid.len()],
        }
    }

    pub fn matches(&self, grid: &TorusGrid) -> Result<(), GridError> {
        if self.nx != grid.nx || self.ny != grid.ny {
            return Err(GridError::SizeMismatch {
                got: self.data.len(),
                expect: grid.len(),
            });
        }
        Ok(())
    }

    pub fn assert_finite(&self) -> Result<(), GridError> {
        if self.data.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(GridError::NonFinite)
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.ny + j]
    }

    #[inline]
    pub fn wrapped(&self, i: isize, j: isize) -> f64 {
        let nx = self.nx as isize;
        let ny = self.ny as isize;
        let iw = i.rem_euclid(nx) as usize;
        let jw = j.rem_euclid(ny) as usize;
        self.data[iw * self.ny + jw]
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    /// Discrete integral: node sum times cell area.
    pub fn integral(&self, grid: &TorusGrid) -> f64 {
        self.data.iter().sum::<f64>() * grid.cell()
    }

    pub fn linf(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn l2(&self, grid: &TorusGrid) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * grid.cell()).sqrt()
    }

    pub fn lp(&self, grid: &TorusGrid, p: f64) -> f64 {
        (self
            .data
            .iter()
            .map(|v| v.abs().powf(p))
            .sum::<f64>()
            * grid.cell())
        .powf(1.0 / p)
    }

    pub fn dot(&self, other: &Self, grid: &TorusGrid) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * grid.cell()
    }

    pub fn min(&self) -> f64 {
        self.data.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            nx: self.nx,
            ny: self.ny,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        ScalarField {
            nx: self.nx,
            ny: self.ny,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.data.iter_mut().zip(&x.data) {
            *s += a * v;
        }
    }

    pub fn scale_mut(&mut self, a: f64) {
        for s in self.data.iter_mut() {
            *s *= a;
        }
    }

    pub fn add_scalar_mut(&mut self, a: f64) {
        for s in self.data.iter_mut() {
            *s += a;
        }
    }

    /// Central x-derivative (plain periodic).
    pub fn dx_c(&self, grid: &TorusGrid) -> Self {
        let inv = 1.0 / (2.0 * grid.hx());
        let mut out = Self::zeros(grid);
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                out.data[grid.idx(i, j)] = inv
                    * (self.wrapped(i as isize + 1, j as isize)
                        - self.wrapped(i as isize - 1, j as isize));
            }
        }
        out
    }

    /// Central y-derivative (plain periodic).
    pub fn dy_c(&self, grid: &TorusGrid) -> Self {
        let inv = 1.0 / (2.0 * grid.hy());
        let mut out = Self::zeros(grid);
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                out.data[grid.idx(i, j)] = inv
                    * (self.wrapped(i as isize, j as isize + 1)
                        - self.wrapped(i as isize, j as isize - 1));
            }
        }
        out
    }
}

/// 5-point discrete d*d (positive semidefinite, kernel = constants).
pub fn laplacian(grid: &TorusGrid, u: &ScalarField) -> ScalarField {
    let ivx = 1.0 / (grid.hx() * grid.hx());
    let ivy = 1.0 / (grid.hy() * grid.hy());
    let mut out = ScalarField::zeros(grid);
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            let c = u.at(i, j);
            let xp = u.wrapped(i as isize + 1, j as isize);
            let xm = u.wrapped(i as isize - 1, j as isize);
            let yp = u.wrapped(i as isize, j as isize + 1);
            let ym = u.wrapped(i as isize, j as isize - 1);
            out.data[grid.idx(i, j)] = (2.0 * c - xp - xm) * ivx + (2.0 * c - yp - ym) * ivy;
        }
    }
    out
}

/// Spectral solve of laplacian(u) = rhs with mean-zero data; returns the
/// mean-zero solution.
pub fn poisson_solve(grid: &TorusGrid, rhs: &ScalarField) -> Result<ScalarField, GridError> {
    rhs.matches(grid)?;
    rhs.assert_finite()?;
    let mean = rhs.mean();
    let scale = rhs.l2(grid).max(f64::MIN_POSITIVE);
    if mean.abs() > 1e-12 * scale / grid.volume().sqrt() + 1e-300 {
        return Err(GridError::NonzeroMean { mean });
    }
    let mut buf: Vec<Complex64> = rhs.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    crate::fft::apply_inverse_symbol(
        &mut buf,
        grid.nx,
        grid.ny,
        grid.hx(),
        grid.hy(),
        false,
        0.0,
        1e-300,
    );
    let mut out = ScalarField {
        nx: grid.nx,
        ny: grid.ny,
        data: buf.iter().map(|c| c.re).collect(),
    };
    let m = out.mean();
    out.add_scalar_mut(-m);
    Ok(out)
}

/// Complex nodal field with the quasi-periodic twist of a degree-k line
/// bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct TwistedSection {
    pub nx: usize,
    pub ny: usize,
    pub degree: i64,
    pub data: Vec<Complex64>,
}

impl TwistedSection {
    pub fn zeros(grid: &TorusGrid, degree: i64) -> Self {
        TwistedSection {
            nx: grid.nx,
            ny: grid.ny,
            degree,
            data: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn constant(grid: &TorusGrid, c: Complex64) -> Self {
        TwistedSection {
            nx: grid.nx,
            ny: grid.ny,
            degree: 0,
            data: vec![c; grid.len()],
        }
    }

    pub fn matches(&self, grid: &TorusGrid) -> Result<(), GridError> {
        if self.nx != grid.nx || self.ny != grid.ny {
            return Err(GridError::SizeMismatch {
                got: self.data.len(),
                expect: grid.len(),
            });
        }
        Ok(())
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.ny + j]
    }

    /// Twist phase picked up when wrapping once upward in y at column i:
    /// exp(-2 pi i k x_i / lx).
    fn twist_phase(&self, grid: &TorusGrid, i: usize) -> Complex64 {
        let arg = -TWO_PI * self.degree as f64 * grid.x(i) / grid.lx;
        Complex64::new(arg.cos(), arg.sin())
    }

    /// Twist-aware access: plain periodic in x, degree-k phase on y wraps.
    pub fn wrapped(&self, grid: &TorusGrid, i: isize, j: isize) -> Complex64 {
        let nx = self.nx as isize;
        let ny = self.ny as isize;
        let iw = i.rem_euclid(nx) as usize;
        let wraps = j.div_euclid(ny);
        let jw = j.rem_euclid(ny) as usize;
        let mut v = self.data[iw * self.ny + jw];
        if wraps != 0 {
            let arg = -TWO_PI * self.degree as f64 * grid.x(iw) / grid.lx * wraps as f64;
            v *= Complex64::new(arg.cos(), arg.sin());
        }
        v
    }

    /// Consistency of the twist under double wrap (cocycle condition);
    /// returns the largest relative defect.
    pub fn cocycle_defect(&self, grid: &TorusGrid) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.nx {
            let t = self.twist_phase(grid, i);
            let double = t * t;
            let arg = -TWO_PI * self.degree as f64 * grid.x(i) / grid.lx * 2.0;
            let direct = Complex64::new(arg.cos(), arg.sin());
            worst = worst.max((double - direct).norm());
        }
        worst
    }

    /// Central x-derivative, twist-aware (no connection).
    pub fn dx_c(&self, grid: &TorusGrid) -> Self {
        let inv = 1.0 / (2.0 * grid.hx());
        let mut out = Self::zeros(grid, self.degree);
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                out.data[grid.idx(i, j)] = inv
                    * (self.wrapped(grid, i as isize + 1, j as isize)
                        - self.wrapped(grid, i as isize - 1, j as isize));
            }
        }
        out
    }

    /// Central y-derivative, twist-aware (no connection).
    pub fn dy_c(&self, grid: &TorusGrid) -> Self {
        let inv = 1.0 / (2.0 * grid.hy());
        let mut out = Self::zeros(grid, self.degree);
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                out.data[grid.idx(i, j)] = inv
                    * (self.wrapped(grid, i as isize, j as isize + 1)
                        - self.wrapped(grid, i as isize, j as isize - 1));
            }
        }
        out
    }

    pub fn abs2(&self) -> ScalarField {
        ScalarField {
            nx: self.nx,
            ny: self.ny,
            data: self.data.iter().map(|c| c.norm_sqr()).collect(),
        }
    }

    pub fn linf(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.norm()))
    }

    pub fn l2(&self, grid: &TorusGrid) -> f64 {
        (self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.cell()).sqrt()
    }

    /// Real L2 inner product Re<a, b> with the cell measure.
    pub fn dot_re(&self, other: &Self, grid: &TorusGrid) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a.conj() * b).re)
            .sum::<f64>()
            * grid.cell()
    }

    pub fn scale_mut(&mut self, c: Complex64) {
        for v in self.data.iter_mut() {
            *v *= c;
        }
    }

    /// Biquadratic (9-point tensor) interpolation at an arbitrary point,
    /// twist-aware. Third-order accurate; used for point evaluations such
    /// as divisor checks.
    pub fn interp2(&self, grid: &TorusGrid, x: f64, y: f64) -> Complex64 {
        let fx = x / grid.hx();
        let fy = y / grid.hy();
        let ic = fx.round() as isize;
        let jc = fy.round() as isize;
        let sx = fx - ic as f64;
        let sy = fy - jc as f64;
        let wx = [sx * (sx - 1.0) / 2.0, 1.0 - sx * sx, sx * (sx + 1.0) / 2.0];
        let wy = [sy * (sy - 1.0) / 2.0, 1.0 - sy * sy, sy * (sy + 1.0) / 2.0];
        let mut out = Complex64::default();
        for (dx, wxx) in (-1isize..=1).zip(wx) {
            for (dy, wyy) in (-1isize..=1).zip(wy) {
                out += self.wrapped(grid, ic + dx, jc + dy) * (wxx * wyy);
            }
        }
        out
    }

    /// Bilinear interpolation at an arbitrary point, twist-aware.
    pub fn interp(&self, grid: &TorusGrid, x: f64, y: f64) -> Complex64 {
        let fx = x / grid.hx();
        let fy = y / grid.hy();
        let i0 = fx.floor() as isize;
        let j0 = fy.floor() as isize;
        let tx = fx - i0 as f64;
        let ty = fy - j0 as f64;
        let v00 = self.wrapped(grid, i0, j0);
        let v10 = self.wrapped(grid, i0 + 1, j0);
        let v01 = self.wrapped(grid, i0, j0 + 1);
        let v11 = self.wrapped(grid, i0 + 1, j0 + 1);
        v00 * ((1.0 - tx) * (1.0 - ty))
            + v10 * (tx * (1.0 - ty))
            + v01 * ((1.0 - tx) * ty)
            + v11 * (tx * ty)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(4, 4, 1.0, 1.0).is_ok());
        assert!(matches!(
            TorusGrid::new(3, 8, 1.0, 1.0),
            Err(GridError::BadDimensions { .. })
        ));
        assert!(matches!(
            TorusGrid::new(8, 6, 1.0, -1.0),
            Err(GridError::BadPeriods { .. })
        ));
        assert!(matches!(
            TorusGrid::new(8, 5, 1.0, 1.0),
            Err(GridError::BadDimensions { .. })
        ));
    }

    #[test]
    fn constant_integrates_to_volume() {
        let grid = TorusGrid::new(8, 12, 2.0, 3.0).unwrap();
        let one = ScalarField::constant(&grid, 1.0);
        assert!((one.integral(&grid) - grid.volume()).abs() < 1e-12);
    }

    #[test]
    fn laplacian_kills_constants() {
        let grid = TorusGrid::unit(16).unwrap();
        let c = ScalarField::constant(&grid, 3.7);
        assert!(laplacian(&grid, &c).linf() < 1e-12);
    }

    #[test]
    fn laplacian_stencil_eigenvalue_exact() {
        // cos(2 pi x / lx) is an exact eigenvector with eigenvalue
        // (2/hx^2)(1 - cos(2 pi hx / lx))
        let grid = TorusGrid::new(16, 16, 2.0, 1.0).unwrap();
        let u = grid.sample(|x, _| (TWO_PI * x / grid.lx).cos());
        let lu = laplacian(&grid, &u);
        let lam = (2.0 / (grid.hx() * grid.hx())) * (1.0 - (TWO_PI * grid.hx() / grid.lx).cos());
        for k in 0..grid.len() {
            assert!((lu.data[k] - lam * u.data[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn laplacian_symmetry_random() {
        let grid = TorusGrid::new(12, 8, 1.0, 2.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let u = grid.sample(|_, _| rng.gen_range(-1.0..1.0));
            let v = grid.sample(|_, _| rng.gen_range(-1.0..1.0));
            let a = laplacian(&grid, &u).dot(&v, &grid);
            let b = u.dot(&laplacian(&grid, &v), &grid);
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn laplacian_second_order_convergence() {
        // smooth multi-mode test field against the analytic Laplacian
        let f = |x: f64, y: f64| (TWO_PI * x).sin().exp() * (2.0 * TWO_PI * y).cos();
        let lap_f = |x: f64, y: f64| {
            let s = (TWO_PI * x).sin();
            let c = (TWO_PI * x).cos();
            let e = s.exp();
            let cy = (2.0 * TWO_PI * y).cos();
            // -d^2/dx^2 - d^2/dy^2 of f
            let fxx = e * cy * (TWO_PI * TWO_PI) * (c * c - s);
            let fyy = -e * cy * (2.0 * TWO_PI) * (2.0 * TWO_PI);
            -(fxx + fyy)
        };
        let mut errs = Vec::new();
        for n in [32usize, 64, 128] {
            let grid = TorusGrid::unit(n).unwrap();
            let u = grid.sample(f);
            let lu = laplacian(&grid, &u);
            let exact = grid.sample(lap_f);
            let err = lu
                .data
                .iter()
                .zip(&exact.data)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            errs.push(err);
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        assert!(
            (1.9..=2.1).contains(&order1) && (1.9..=2.1).contains(&order2),
            "orders {order1} {order2}"
        );
    }

    #[test]
    fn poisson_roundtrip_and_modes() {
        let grid = TorusGrid::new(32, 16, 1.0, 2.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut u0 = grid.sample(|_, _| rng.gen_range(-1.0..1.0));
        let m = u0.mean();
        u0.add_scalar_mut(-m);
        let rhs = laplacian(&grid, &u0);
        let u = poisson_solve(&grid, &rhs).unwrap();
        let diff = u.zip(&u0, |a, b| a - b);
        assert!(diff.linf() < 1e-10);

        // zero maps to zero
        let z = poisson_solve(&grid, &ScalarField::zeros(&grid)).unwrap();
        assert!(z.linf() == 0.0);

        // cos mode scales by the stencil eigenvalue
        let mode = grid.sample(|x, _| (TWO_PI * x / grid.lx).cos());
        let lam = (2.0 / (grid.hx() * grid.hx())) * (1.0 - (TWO_PI * grid.hx() / grid.lx).cos());
        let sol = poisson_solve(&grid, &mode).unwrap();
        let expect = mode.map(|v| v / lam);
        assert!(sol.zip(&expect, |a, b| a - b).linf() < 1e-12);

        // nonzero mean rejected
        let bad = ScalarField::constant(&grid, 1.0);
        assert!(matches!(
            poisson_solve(&grid, &bad),
            Err(GridError::NonzeroMean { .. })
        ));
    }

    #[test]
    fn twisted_wrap_rules() {
        let grid = TorusGrid::unit(8).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let u = grid.sample_complex(3, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        // x wrap is plain periodic
        for j in 0..grid.ny {
            let a = u.wrapped(&grid, grid.nx as isize, j as isize);
            assert!((a - u.at(0, j)).norm() < 1e-15);
        }
        // y wrap picks the phase exp(-2 pi i k x / lx)
        for i in 0..grid.nx {
            let a = u.wrapped(&grid, i as isize, grid.ny as isize);
            let arg = -TWO_PI * 3.0 * grid.x(i) / grid.lx;
            let expect = u.at(i, 0) * Complex64::new(arg.cos(), arg.sin());
            assert!((a - expect).norm() < 1e-14);
            // downward wrap is the inverse phase
            let b = u.wrapped(&grid, i as isize, -1);
            let arg2 = TWO_PI * 3.0 * grid.x(i) / grid.lx;
            let expect2 = u.at(i, grid.ny - 1) * Complex64::new(arg2.cos(), arg2.sin());
            assert!((b - expect2).norm() < 1e-14);
        }
        assert!(u.cocycle_defect(&grid) < 1e-12);
    }

    #[test]
    fn central_pair_is_exactly_adjoint() {
        // <d u, w> = -<u, d w> for the central difference on sections
        let grid = TorusGrid::new(8, 12, 1.0, 1.5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for degree in [0i64, 2, -1] {
            let u = grid.sample_complex(degree, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let w = grid.sample_complex(degree, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            for (du, dw) in [
                (u.dx_c(&grid), w.dx_c(&grid)),
                (u.dy_c(&grid), w.dy_c(&grid)),
            ] {
                let a = du.dot_re(&w, &grid);
                let b = u.dot_re(&dw, &grid);
                assert!((a + b).abs() < 1e-12, "degree {degree}: {a} vs {b}");
            }
        }
    }
}
