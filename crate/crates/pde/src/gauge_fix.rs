//! Coulomb gauge fixing by Newton iteration: given A near A0, find a
//! gauge transformation g with d_{A0}^*(g^*A - A0) = 0.
//!
//! Each step solves
//!     d_{A0}^* d_{A0} xi = d_{A0}^*(A0 - A_nu),
//! sets g_nu = exp(xi) and A_{nu+1} = g_nu^* A_nu. The operator uses the
//! composite central-difference pair (exact discrete adjoint), so its
//! spectral symbol is sin^2-shaped and vanishes on the four DC/Nyquist
//! modes; the divergence of any 1-form has no content there, which makes
//! the u1 solve exact in one step. For su2 the operator is inverted by
//! conjugate gradients with a spectral preconditioner, deflating the
//! covariant-constant directions when they are in the kernel.

use num_complex::Complex64;

use crate::connection::{
    covariant_d_star_su2, covariant_d_su2, gauge_apply, slice_residual_field, GaugeError,
    GaugeTransform, LatticeConnection, Su2Field,
};
use crate::fft;
use crate::grid::{GridError, ScalarField, TorusGrid};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GaugeFixError {
    #[error("iteration diverged: slice residual {residual:e} after {iters} steps")]
    Diverged { residual: f64, iters: usize },
    #[error("no convergence to {tol:e} within {max_iter} steps (residual {residual:e})")]
    MaxIterations {
        residual: f64,
        tol: f64,
        max_iter: usize,
    },
    #[error(transparent)]
    Gauge(#[from] GaugeError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Per-iteration record of the Newton gauge-fixing run.
#[derive(Debug, Clone)]
pub struct IterationTrace {
    /// Slice residuals r_nu = ||d_{A0}^*(A_nu - A0)||_inf, including the
    /// starting value.
    pub slice_residuals: Vec<f64>,
    /// Discrete L^4 norms of A_nu - A0.
    pub lq_norms: Vec<f64>,
    /// Discrete W^{1,2} surrogate norms of A_nu - A0.
    pub w1p_norms: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl IterationTrace {
    /// Least-squares exponent p in r_{k+1} ~ C r_k^p over the contracting
    /// phase (decreasing steps with r_k < 1, above the linear-solve
    /// floor), or None when too few points.
    pub fn terminal_contraction_exponent(&self) -> Option<f64> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for w in self.slice_residuals.windows(2) {
            if w[0] < 1.0 && w[1] > 1e-13 && w[0] > w[1] {
                xs.push(w[0].ln());
                ys.push(w[1].ln());
            }
        }
        if xs.len() < 2 {
            return None;
        }
        let n = xs.len() as f64;
        let sx: f64 = xs.iter().sum();
        let sy: f64 = ys.iter().sum();
        let sxx: f64 = xs.iter().map(|v| v * v).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
        let denom = n * sxx - sx * sx;
        if denom.abs() < 1e-30 {
            return None;
        }
        Some((n * sxy - sx * sy) / denom)
    }
}

/// Result of a Coulomb gauge fix.
#[derive(Debug, Clone)]
pub struct CoulombResult {
    pub g: GaugeTransform,
    pub fixed: LatticeConnection,
    pub trace: IterationTrace,
}

fn norms_of_difference(
    grid: &TorusGrid,
    a: &LatticeConnection,
    a0: &LatticeConnection,
) -> Result<(f64, f64), GaugeError> {
    let (pair, su2) = a.sub(a0)?;
    match su2 {
        None => {
            let mag = pair.x.zip(&pair.y, |x, y| (x * x + y * y).sqrt());
            let lq = mag.lp(grid, 4.0);
            let gx1 = pair.x.dx_c(grid);
            let gx2 = pair.x.dy_c(grid);
            let gy1 = pair.y.dx_c(grid);
            let gy2 = pair.y.dy_c(grid);
            let w1p = (mag.l2(grid).powi(2)
                + gx1.l2(grid).powi(2)
                + gx2.l2(grid).powi(2)
                + gy1.l2(grid).powi(2)
                + gy2.l2(grid).powi(2))
            .sqrt();
            Ok((lq, w1p))
        }
        Some(pair) => {
            let mag = ScalarField {
                nx: grid.nx,
                ny: grid.ny,
                data: pair
                    .x
                    .data
                    .iter()
                    .zip(&pair.y.data)
                    .map(|(vx, vy)| {
                        (crate::connection::su2_dot(*vx, *vx)
                            + crate::connection::su2_dot(*vy, *vy))
                        .sqrt()
                    })
                    .collect(),
            };
            let lq = mag.lp(grid, 4.0);
            let mut grad_sq = 0.0;
            for f in [&pair.x, &pair.y] {
                for g2 in [f.dx_c(grid), f.dy_c(grid)] {
                    grad_sq += g2.dot(&g2, grid);
                }
            }
            let w1p = (mag.l2(grid).powi(2) + grad_sq).sqrt();
            Ok((lq, w1p))
        }
    }
}

/// Spectral solve of the u1 slice system (exact: the composite
/// central-difference operator is diagonalised and the divergence has no
/// content on its null modes).
fn solve_u1(grid: &TorusGrid, rhs: &ScalarField) -> ScalarField {
    let mut buf: Vec<Complex64> = rhs.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::apply_inverse_symbol(
        &mut buf,
        grid.nx,
        grid.ny,
        grid.hx(),
        grid.hy(),
        true,
        0.0,
        1e-14,
    );
    ScalarField {
        nx: grid.nx,
        ny: grid.ny,
        data: buf.iter().map(|c| c.re).collect(),
    }
}

/// PCG for the su2 slice operator d_{A0}^* d_{A0} with deflation of the
/// constant generators lying in the kernel.
fn solve_su2(
    grid: &TorusGrid,
    a0: &LatticeConnection,
    rhs: &Su2Field,
    rtol: f64,
    max_iter: usize,
) -> Su2Field {
    let apply = |xi: &Su2Field| -> Su2Field {
        let (dx, dy) = covariant_d_su2(grid, a0, xi);
        covariant_d_star_su2(grid, a0, &dx, &dy)
    };
    // constant generators in the kernel?
    let mut deflate: Vec<Su2Field> = Vec::new();
    for c in 0..3 {
        let mut e = Su2Field::zeros(grid);
        for v in e.data.iter_mut() {
            v[c] = 1.0;
        }
        let (dx, dy) = covariant_d_su2(grid, a0, &e);
        if dx.linf().max(dy.linf()) < 1e-12 {
            let norm = e.dot(&e, grid).sqrt();
            e.scale_mut(1.0 / norm);
            deflate.push(e);
        }
    }
    let project = |f: &mut Su2Field| {
        for e in &deflate {
            let c = f.dot(e, grid);
            f.axpy(-c, e);
        }
    };
    // preconditioner: per-component spectral inverse of the wide symbol
    // plus a shift at the bracket scale
    let (a0x, a0y) = a0.su2_components();
    let mut shift = 0.0;
    for (vx, vy) in a0x.data.iter().zip(&a0y.data) {
        shift += crate::connection::su2_dot(*vx, *vx) + crate::connection::su2_dot(*vy, *vy);
    }
    shift = 4.0 * shift / grid.len() as f64;
    let precondition = |r: &Su2Field| -> Su2Field {
        let mut out = Su2Field::zeros(grid);
        for c in 0..3 {
            let mut buf: Vec<Complex64> = r
                .data
                .iter()
                .map(|v| Complex64::new(v[c], 0.0))
                .collect();
            fft::apply_inverse_symbol(
                &mut buf,
                grid.nx,
                grid.ny,
                grid.hx(),
                grid.hy(),
                true,
                shift,
                if shift > 0.0 { 0.0 } else { 1e-14 },
            );
            for (o, b) in out.data.iter_mut().zip(&buf) {
                o[c] = b.re;
            }
        }
        let mut out = out;
        project(&mut out);
        out
    };

    let mut b = rhs.clone();
    project(&mut b);
    let bnorm = b.dot(&b, grid).sqrt();
    let mut x = Su2Field::zeros(grid);
    if bnorm == 0.0 {
        return x;
    }
    let mut r = b.clone();
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = r.dot(&z, grid);
    for _ in 0..max_iter {
        let ap = apply(&p);
        let pap = p.dot(&ap, grid);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        x.axpy(alpha, &p);
        r.axpy(-alpha, &ap);
        if r.dot(&r, grid).sqrt() <= rtol * bnorm {
            break;
        }
        z = precondition(&r);
        let rz_new = r.dot(&z, grid);
        let beta = rz_new / rz;
        rz = rz_new;
        let mut pnew = z.clone();
        pnew.axpy(beta, &p);
        p = pnew;
    }
    project(&mut x);
    x
}

/// Newton iteration for the Coulomb slice. Returns the accumulated gauge
/// transformation, the fixed connection and the iteration trace.
pub fn coulomb_fix(
    grid: &TorusGrid,
    a: &LatticeConnection,
    a0: &LatticeConnection,
    tol: f64,
    max_iter: usize,
) -> Result<CoulombResult, GaugeFixError> {
    let mut current = a.clone();
    let mut g_total = match a {
        LatticeConnection::U1 { .. } => GaugeTransform::identity_u1(grid),
        LatticeConnection::Su2 { .. } => GaugeTransform::identity_su2(grid),
    };
    let mut trace = IterationTrace {
        slice_residuals: Vec::new(),
        lq_norms: Vec::new(),
        w1p_norms: Vec::new(),
        iterations: 0,
        converged: false,
    };
    let record =
        |trace: &mut IterationTrace, cur: &LatticeConnection| -> Result<f64, GaugeFixError> {
            let (r, _, _) = slice_residual_field(grid, cur, a0)?;
            let (lq, w1p) = norms_of_difference(grid, cur, a0)?;
            trace.slice_residuals.push(r);
            trace.lq_norms.push(lq);
            trace.w1p_norms.push(w1p);
            Ok(r)
        };
    let mut r = record(&mut trace, &current)?;
    let mut bad_steps = 0usize;
    while r > tol {
        if trace.iterations >= max_iter {
            return Err(GaugeFixError::MaxIterations {
                residual: r,
                tol,
                max_iter,
            });
        }
        let g_step = match (&current, a0) {
            (LatticeConnection::U1 { .. }, LatticeConnection::U1 { .. }) => {
                // rhs = d_{A0}^*(A0 - A) = -divergence of (A - A0)
                let (_, div, _) = slice_residual_field(grid, &current, a0)?;
                let rhs = div.unwrap().map(|v| -v);
                let chi = solve_u1(grid, &rhs);
                GaugeTransform::U1 { chi }
            }
            (LatticeConnection::Su2 { .. }, LatticeConnection::Su2 { .. }) => {
                let (_, _, div) = slice_residual_field(grid, &current, a0)?;
                let mut rhs = div.unwrap();
                rhs.scale_mut(-1.0);
                let xi = solve_su2(grid, a0, &rhs, 1e-13, 2000);
                GaugeTransform::from_su2_exponent(grid, &xi)
            }
            _ => return Err(GaugeError::GroupMismatch.into()),
        };
        current = gauge_apply(grid, &g_step, &current)?;
        g_total = g_total
            .compose(&g_step)
            .map_err(GaugeFixError::Gauge)?;
        trace.iterations += 1;
        let r_new = record(&mut trace, &current)?;
        if r_new > 1.5 * r {
            bad_steps += 1;
            if bad_steps >= 3 {
                return Err(GaugeFixError::Diverged {
                    residual: r_new,
                    iters: trace.iterations,
                });
            }
        } else {
            bad_steps = 0;
        }
        r = r_new;
    }
    trace.converged = true;
    Ok(CoulombResult {
        g: g_total,
        fixed: current,
        trace,
    })
}
