//! Abelian symplectic vortex equations on the flat torus for weighted
//! circle actions on C^n:
//!
//!   dbar_A u_nu = 0,      *iF_A + sum_nu l_nu |u_nu|^2 / 2 = tau,
//!
//! with u_nu a section of L^{l_nu} and A a connection on the degree-d
//! bundle L. All u(1)-valued quantities are stored as real numbers with
//! the factor i removed: the moment value is m(u) = sum l_nu |u_nu|^2 / 2,
//! the real curvature scalar is Fr = *iF_A = -(dx ay - dy ax), and the
//! moment residual is Fr + m - tau.
//!
//! Solutions are produced by the complex-gauge reduction: with
//! theta-function backgrounds Theta_nu (zeros prescribed) the conformal
//! exponent u solves the multi-weight Kazdan-Warner equation
//!   d*d u + sum_nu l_nu e^{l_nu u} |Theta_nu|^2 = 2 (tau - 2 pi d / Vol),
//! and the configuration is reconstructed as
//!   u_nu = e^{l_nu u / 2} Theta_nu,  A = A_bg + (i/2) * du.
//! Feasibility requires tau Vol > 2 pi d; integrating the moment equation
//! gives sum_nu l_nu int |u_nu|^2 / 2 = tau Vol - 2 pi d, which holds for
//! the discrete solution up to the solver tolerance.

use num_complex::Complex64;

use crate::connection::{covariant_d_section, curvature_u1, LatticeConnection};
use crate::grid::{GridError, ScalarField, TorusGrid, TwistedSection, TWO_PI};
use crate::kazdan_warner::{solve_kw_multiweight, KwError, SolveReport};
use crate::theta::{build_background, SectionBackground, ThetaError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VortexError {
    #[error("infeasible tau: need tau * Vol > 2 pi d, got tau*Vol = {got:.6} <= {threshold:.6}")]
    InfeasibleTau { got: f64, threshold: f64 },
    #[error("section {nu}: {source}")]
    Background { nu: usize, source: ThetaError },
    #[error(
        "incompatible divisors: section {nu} determines a harmonic offset \
         differing from section 0 by {mismatch:e}; the divisor sums must \
         define the same bundle point"
    )]
    IncompatibleDivisors { nu: usize, mismatch: f64 },
    #[error("weights must be positive")]
    BadWeights,
    #[error("section {nu} has twist degree {got}, expected degree*weight = {expect}")]
    SectionDegree { nu: usize, got: i64, expect: i64 },
    #[error(transparent)]
    Kw(#[from] KwError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Weighted linear circle action on C^n with central parameter tau.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearAction {
    pub weights: Vec<u32>,
    pub tau: f64,
}

impl LinearAction {
    pub fn new(weights: Vec<u32>, tau: f64) -> Result<Self, VortexError> {
        if weights.is_empty() || weights.iter().any(|&l| l == 0) {
            return Err(VortexError::BadWeights);
        }
        Ok(LinearAction { weights, tau })
    }
}

/// Real moment value (1/2) sum_nu l_nu |x_nu|^2; the paper's mu is -i
/// times this.
pub fn moment_map(action: &LinearAction, x: &[Complex64]) -> f64 {
    0.5 * action
        .weights
        .iter()
        .zip(x)
        .map(|(&l, v)| l as f64 * v.norm_sqr())
        .sum::<f64>()
}

/// Convexity witness <mu(x), mu(x) - tau> in the real convention;
/// nonnegative whenever |mu(x)| >= |tau|.
pub fn convexity_witness(action: &LinearAction, x: &[Complex64], tau: f64) -> f64 {
    let m = moment_map(action, x);
    m * (m - tau)
}

/// S^1-invariant polynomial in the radial coordinates rho_nu = |x_nu|^2.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantPolynomial {
    /// terms (coefficient, powers per coordinate)
    pub terms: Vec<(f64, Vec<u32>)>,
}

impl InvariantPolynomial {
    pub fn zero() -> Self {
        InvariantPolynomial { terms: Vec::new() }
    }

    pub fn eval(&self, rho: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, pows)| {
                c * pows
                    .iter()
                    .zip(rho)
                    .map(|(&p, &r)| r.powi(p as i32))
                    .product::<f64>()
            })
            .sum()
    }

    /// Partial derivative with respect to rho_nu.
    pub fn d_rho(&self, nu: usize, rho: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, pows)| {
                let p = *pows.get(nu).unwrap_or(&0);
                if p == 0 {
                    return 0.0;
                }
                let mut v = c * p as f64;
                for (j, (&pw, &r)) in pows.iter().zip(rho).enumerate() {
                    let e = if j == nu { pw - 1 } else { pw };
                    v *= r.powi(e as i32);
                }
                v
            })
            .sum()
    }
}

/// Hamiltonian perturbation H = F ds + G dt with S^1-invariant components
/// F = f_profile(z) * f_poly(rho), G = g_profile(z) * g_poly(rho).
/// For this invariant class the Poisson bracket {F, G} vanishes
/// identically (the rho_nu generate a commuting torus action), so the
/// curvature is Omega_H = d_s G - d_t F.
#[derive(Debug, Clone)]
pub struct HamiltonianPerturbation {
    pub f_profile: ScalarField,
    pub f_poly: InvariantPolynomial,
    pub g_profile: ScalarField,
    pub g_poly: InvariantPolynomial,
    /// Compact sampling range: rho_nu in [0, rho_max[nu]].
    pub rho_max: Vec<f64>,
}

impl HamiltonianPerturbation {
    /// Circle-invariance check by sampling: F and G must be unchanged
    /// under x_nu -> e^{i l_nu theta} x_nu. True by construction for the
    /// radial class; the check guards table-driven data.
    pub fn invariance_defect(&self, action: &LinearAction) -> f64 {
        let n = action.weights.len();
        let mut worst = 0.0f64;
        for s in 0..8 {
            let theta = s as f64 * 0.7;
            let x: Vec<Complex64> = (0..n)
                .map(|k| Complex64::new(0.3 + 0.2 * k as f64, 0.1 * k as f64))
                .collect();
            let xr: Vec<Complex64> = x
                .iter()
                .zip(&action.weights)
                .map(|(v, &l)| {
                    let a = l as f64 * theta;
                    v * Complex64::new(a.cos(), a.sin())
                })
                .collect();
            let rho: Vec<f64> = x.iter().map(|v| v.norm_sqr()).collect();
            let rho_r: Vec<f64> = xr.iter().map(|v| v.norm_sqr()).collect();
            worst = worst.max((self.f_poly.eval(&rho) - self.f_poly.eval(&rho_r)).abs());
            worst = worst.max((self.g_poly.eval(&rho) - self.g_poly.eval(&rho_r)).abs());
        }
        worst
    }

    /// X_F(x)_nu = -2 i (dF/drho_nu) x_nu at a grid node.
    fn hamiltonian_field(
        &self,
        poly: &InvariantPolynomial,
        profile: f64,
        x: &[Complex64],
        out: &mut [Complex64],
    ) {
        let rho: Vec<f64> = x.iter().map(|v| v.norm_sqr()).collect();
        for (nu, o) in out.iter_mut().enumerate() {
            let c = profile * poly.d_rho(nu, &rho);
            *o = Complex64::new(0.0, -2.0 * c) * x[nu];
        }
    }
}

/// A vortex configuration: connection plus weighted sections and an
/// optional Hamiltonian perturbation.
#[derive(Debug, Clone)]
pub struct VortexConfig {
    pub grid: TorusGrid,
    pub action: LinearAction,
    pub connection: LatticeConnection,
    pub sections: Vec<TwistedSection>,
    pub perturbation: Option<HamiltonianPerturbation>,
}

impl VortexConfig {
    pub fn validate(&self) -> Result<(), VortexError> {
        let d = self.connection.degree();
        for (nu, (s, &l)) in self
            .sections
            .iter()
            .zip(&self.action.weights)
            .enumerate()
        {
            let expect = d * l as i64;
            if s.degree != expect {
                return Err(VortexError::SectionDegree {
                    nu,
                    got: s.degree,
                    expect,
                });
            }
        }
        Ok(())
    }

    /// m(u) = (1/2) sum l_nu |u_nu|^2 as a field.
    pub fn moment_density(&self) -> ScalarField {
        let mut m = ScalarField::zeros(&self.grid);
        for (s, &l) in self.sections.iter().zip(&self.action.weights) {
            let w = 0.5 * l as f64;
            for (mv, uv) in m.data.iter_mut().zip(&s.data) {
                *mv += w * uv.norm_sqr();
            }
        }
        m
    }
}

/// Covariant derivative components of every section, with the Hamiltonian
/// vector fields added when a perturbation is present:
/// v_x = d_A u + X_F(u), v_y = d_A u + X_G(u).
fn perturbed_derivatives(
    cfg: &VortexConfig,
) -> (Vec<TwistedSection>, Vec<TwistedSection>) {
    let n = cfg.sections.len();
    let mut vx = Vec::with_capacity(n);
    let mut vy = Vec::with_capacity(n);
    for (s, &l) in cfg.sections.iter().zip(&cfg.action.weights) {
        let (dx, dy) = covariant_d_section(&cfg.grid, &cfg.connection, l, s);
        vx.push(dx);
        vy.push(dy);
    }
    if let Some(h) = &cfg.perturbation {
        let mut xvec = vec![Complex64::default(); n];
        let mut fout = vec![Complex64::default(); n];
        for k in 0..cfg.grid.len() {
            for nu in 0..n {
                xvec[nu] = cfg.sections[nu].data[k];
            }
            h.hamiltonian_field(&h.f_poly, h.f_profile.data[k], &xvec, &mut fout);
            for nu in 0..n {
                vx[nu].data[k] += fout[nu];
            }
            h.hamiltonian_field(&h.g_poly, h.g_profile.data[k], &xvec, &mut fout);
            for nu in 0..n {
                vy[nu].data[k] += fout[nu];
            }
        }
    }
    (vx, vy)
}

/// Residuals of the (perturbed) vortex equations: one complex dbar field
/// per section, r_nu = v_x,nu + i v_y,nu, and the real moment residual
/// Fr + m - tau.
pub fn vortex_residual(
    cfg: &VortexConfig,
    tau: f64,
) -> Result<(Vec<TwistedSection>, ScalarField), VortexError> {
    cfg.validate()?;
    let (vx, vy) = perturbed_derivatives(cfg);
    let i = Complex64::new(0.0, 1.0);
    let dbar: Vec<TwistedSection> = vx
        .into_iter()
        .zip(vy)
        .map(|(mut x, y)| {
            for (a, b) in x.data.iter_mut().zip(&y.data) {
                *a += i * b;
            }
            x
        })
        .collect();
    let phi = curvature_u1(&cfg.grid, &cfg.connection);
    let m = cfg.moment_density();
    let moment = phi.zip(&m, |p, mm| -p + mm - tau);
    Ok((dbar, moment))
}

/// Report of a vortex solve.
#[derive(Debug, Clone)]
pub struct VortexSolveReport {
    pub kw: SolveReport,
    pub dbar_residual_sup: f64,
    pub moment_residual_sup: f64,
    /// | sum_nu l_nu int |u_nu|^2 / 2 - (tau Vol - 2 pi d) |
    pub integrated_identity_gap: f64,
    pub bradlow_margin: f64,
    pub section_l2: Vec<f64>,
}

/// Solve the vortex equations for prescribed divisors via the
/// Kazdan-Warner reduction.
pub fn solve_vortex(
    grid: &TorusGrid,
    degree: i64,
    weights: &[u32],
    divisors: &[Vec<Complex64>],
    tau: f64,
    tol: f64,
) -> Result<(VortexConfig, VortexSolveReport), VortexError> {
    let action = LinearAction::new(weights.to_vec(), tau)?;
    assert_eq!(divisors.len(), weights.len());
    let vol = grid.volume();
    let threshold = TWO_PI * degree as f64;
    if tau * vol <= threshold {
        return Err(VortexError::InfeasibleTau {
            got: tau * vol,
            threshold,
        });
    }

    // backgrounds with a common harmonic offset eta = delta_nu / l_nu
    let mut backgrounds: Vec<SectionBackground> = Vec::with_capacity(weights.len());
    let mut eta = (0.0, 0.0);
    for (nu, (&l, zeros)) in weights.iter().zip(divisors).enumerate() {
        let k = degree * l as i64;
        let base = build_background(grid, k, zeros, (0, 0))
            .map_err(|source| VortexError::Background { nu, source })?;
        if nu == 0 {
            eta = (base.delta_x / l as f64, base.delta_y / l as f64);
            backgrounds.push(base);
            continue;
        }
        // re-branch (a, b) by lattice steps to align delta_nu with l_nu*eta
        let lf = l as f64;
        let p = ((base.delta_x - lf * eta.0) * grid.lx / TWO_PI).round();
        let q = ((base.delta_y - lf * eta.1) * grid.ly / TWO_PI).round();
        let rebranched = build_background(grid, k, zeros, (p as i64, q as i64))
            .map_err(|source| VortexError::Background { nu, source })?;
        let mismatch = ((rebranched.delta_x / lf - eta.0).powi(2)
            + (rebranched.delta_y / lf - eta.1).powi(2))
        .sqrt();
        if mismatch > 1e-10 * (1.0 + eta.0.abs() + eta.1.abs()) {
            return Err(VortexError::IncompatibleDivisors { nu, mismatch });
        }
        backgrounds.push(rebranched);
    }

    // multi-weight Kazdan-Warner solve for the conformal exponent
    let hs: Vec<ScalarField> = backgrounds.iter().map(|b| b.section.abs2()).collect();
    let f_const = 2.0 * (tau - threshold / vol);
    let f = ScalarField::constant(grid, f_const);
    let kw = solve_kw_multiweight(grid, &hs, weights, &f, tol, true)?;

    // reconstruct the configuration
    let reference = LatticeConnection::reference_u1(grid, degree);
    let (rx, ry) = reference.u1_components();
    let du_x = kw.u.dx_c(grid);
    let du_y = kw.u.dy_c(grid);
    let mut ax = rx.clone();
    let mut ay = ry.clone();
    for k in 0..grid.len() {
        ax.data[k] += eta.0 - 0.5 * du_y.data[k];
        ay.data[k] += eta.1 + 0.5 * du_x.data[k];
    }
    let connection = LatticeConnection::U1 {
        degree,
        ax,
        ay,
    };
    let sections: Vec<TwistedSection> = backgrounds
        .iter()
        .zip(weights)
        .map(|(b, &l)| {
            let mut s = b.section.clone();
            for (sv, uv) in s.data.iter_mut().zip(&kw.u.data) {
                *sv *= (0.5 * l as f64 * uv).exp();
            }
            s
        })
        .collect();
    let cfg = VortexConfig {
        grid: *grid,
        action,
        connection,
        sections,
        perturbation: None,
    };

    let (dbar, moment) = vortex_residual(&cfg, tau)?;
    let dbar_sup = dbar.iter().fold(0.0f64, |m, r| m.max(r.linf()));
    let section_l2: Vec<f64> = cfg.sections.iter().map(|s| s.l2(grid)).collect();
    let lhs: f64 = cfg
        .sections
        .iter()
        .zip(weights)
        .map(|(s, &l)| 0.5 * l as f64 * s.abs2().integral(grid))
        .sum();
    let report = VortexSolveReport {
        dbar_residual_sup: dbar_sup,
        moment_residual_sup: moment.linf(),
        integrated_identity_gap: (lhs - (tau * vol - threshold)).abs(),
        bradlow_margin: tau * vol - threshold,
        section_l2,
        kw,
    };
    Ok((cfg, report))
}

// ---------------------------------------------------------------------------
// Energy and the energy identity
// ---------------------------------------------------------------------------

/// Decomposition of the energy identity. `gap` is the defect between the
/// energy and the right-hand side; it vanishes in the continuum and
/// decreases at second order under grid refinement.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub energy: f64,
    pub residual_term: f64,
    pub topological_term: f64,
    pub curvature_term: f64,
    pub rhs: f64,
    pub gap: f64,
    pub hofer_norm: f64,
    /// top + ||Omega_H|| - E; nonnegative (up to the gap) on solutions.
    pub bound_slack: f64,
}

/// E(u, A) = (1/2) int (|d_{H,A} u|^2 + |F_A|^2 + |mu(u) - tau|^2).
pub fn energy(cfg: &VortexConfig, tau: f64) -> Result<f64, VortexError> {
    cfg.validate()?;
    let (vx, vy) = perturbed_derivatives(cfg);
    let phi = curvature_u1(&cfg.grid, &cfg.connection);
    let m = cfg.moment_density();
    let mut total = 0.0;
    for k in 0..cfg.grid.len() {
        let mut kinetic = 0.0;
        for nu in 0..cfg.sections.len() {
            kinetic += vx[nu].data[k].norm_sqr() + vy[nu].data[k].norm_sqr();
        }
        let fr = -phi.data[k];
        let md = m.data[k] - tau;
        total += 0.5 * (kinetic + fr * fr + md * md);
    }
    Ok(total * cfg.grid.cell())
}

/// Evaluate both sides of the energy identity. The right-hand side is
/// int (|dbar|^2 + (1/2)|*iF + mu - tau|^2) plus the topological pairing
/// int (u^* omega - d<mu - tau, A>) plus int Omega_H(u).
pub fn energy_identity_check(cfg: &VortexConfig, tau: f64) -> Result<EnergyReport, VortexError> {
    cfg.validate()?;
    let grid = &cfg.grid;
    let energy_val = energy(cfg, tau)?;
    let (dbar, moment) = vortex_residual(cfg, tau)?;

    let mut residual_term = 0.0;
    for k in 0..grid.len() {
        let mut r2 = 0.0;
        for r in &dbar {
            r2 += r.data[k].norm_sqr();
        }
        residual_term += 0.5 * r2 + 0.5 * moment.data[k] * moment.data[k];
    }
    residual_term *= grid.cell();

    // topological pairing: omega(d_x u, d_y u) - d_x T_y + d_y T_x with
    // T_x = F(u) - (m - tau) ax, T_y = G(u) - (m - tau) ay; only the
    // wrap jump of ax contributes after summation.
    let m = cfg.moment_density();
    let (ax, ay) = cfg.connection.u1_components();
    let n = cfg.sections.len();
    let eval_fg = |k: usize| -> (f64, f64) {
        match &cfg.perturbation {
            None => (0.0, 0.0),
            Some(h) => {
                let rho: Vec<f64> = (0..n)
                    .map(|nu| cfg.sections[nu].data[k].norm_sqr())
                    .collect();
                (
                    h.f_profile.data[k] * h.f_poly.eval(&rho),
                    h.g_profile.data[k] * h.g_poly.eval(&rho),
                )
            }
        }
    };
    let t_x_at = |i: isize, j: isize| -> f64 {
        let iw = i.rem_euclid(grid.nx as isize) as usize;
        let jw = j.rem_euclid(grid.ny as isize) as usize;
        let k = iw * grid.ny + jw;
        let (f_val, _) = eval_fg(k);
        let ax_w = cfg.connection.u1_ax_wrapped(grid, i, j);
        f_val - (m.data[k] - tau) * ax_w
    };
    let t_y_at = |i: isize, j: isize| -> f64 {
        let iw = i.rem_euclid(grid.nx as isize) as usize;
        let jw = j.rem_euclid(grid.ny as isize) as usize;
        let k = iw * grid.ny + jw;
        let (_, g_val) = eval_fg(k);
        g_val - (m.data[k] - tau) * ay.data[k]
    };
    let _ = ax;

    let mut topological = 0.0;
    for i in 0..grid.nx {
        for j in 0..grid.ny {
            // u^* omega with plain twist-aware derivatives
            let mut uomega = 0.0;
            for (s, &_l) in cfg.sections.iter().zip(&cfg.action.weights) {
                let dx = (s.wrapped(grid, i as isize + 1, j as isize)
                    - s.wrapped(grid, i as isize - 1, j as isize))
                    / (2.0 * grid.hx());
                let dy = (s.wrapped(grid, i as isize, j as isize + 1)
                    - s.wrapped(grid, i as isize, j as isize - 1))
                    / (2.0 * grid.hy());
                uomega += (dx.conj() * dy).im;
            }
            let dxty = (t_y_at(i as isize + 1, j as isize)
                - t_y_at(i as isize - 1, j as isize))
                / (2.0 * grid.hx());
            let dytx = (t_x_at(i as isize, j as isize + 1)
                - t_x_at(i as isize, j as isize - 1))
                / (2.0 * grid.hy());
            topological += uomega - dxty + dytx;
        }
    }
    topological *= grid.cell();

    // curvature integral int Omega_H(u) and the Hofer norm
    let (curvature_term, hofer) = match &cfg.perturbation {
        None => (0.0, 0.0),
        Some(h) => {
            let dg = h.g_profile.dx_c(grid);
            let df = h.f_profile.dy_c(grid);
            let mut integral = 0.0;
            for k in 0..grid.len() {
                let rho: Vec<f64> = (0..n)
                    .map(|nu| cfg.sections[nu].data[k].norm_sqr())
                    .collect();
                integral += dg.data[k] * h.g_poly.eval(&rho)
                    - df.data[k] * h.f_poly.eval(&rho);
            }
            (integral * grid.cell(), hofer_norm(h, grid))
        }
    };

    let rhs = residual_term + topological + curvature_term;
    Ok(EnergyReport {
        energy: energy_val,
        residual_term,
        topological_term: topological,
        curvature_term,
        rhs,
        gap: (energy_val - rhs).abs(),
        hofer_norm: hofer,
        bound_slack: topological + hofer - energy_val,
    })
}

/// Hofer norm of the curvature of H: the integral over the surface of the
/// pointwise oscillation of Omega_H(z, .) over the sampled compact range
/// of the radial coordinates. For the S^1-invariant polynomial class
/// {F, G} = 0, so Omega_H = d_s G - d_t F.
pub fn hofer_norm(h: &HamiltonianPerturbation, grid: &TorusGrid) -> f64 {
    let n = h.rho_max.len().max(1);
    let samples_per_dim = match n {
        1 => 257usize,
        2 => 65,
        _ => (4096f64.powf(1.0 / n as f64)).floor().max(2.0) as usize,
    };
    // enumerate the sample box in rho-space
    let mut rho_samples: Vec<Vec<f64>> = vec![Vec::new()];
    for nu in 0..n {
        let top = h.rho_max.get(nu).copied().unwrap_or(1.0);
        let mut next = Vec::with_capacity(rho_samples.len() * samples_per_dim);
        for base in &rho_samples {
            for s in 0..samples_per_dim {
                let mut r = base.clone();
                r.push(top * s as f64 / (samples_per_dim - 1) as f64);
                next.push(r);
            }
        }
        rho_samples = next;
    }
    let gvals: Vec<f64> = rho_samples.iter().map(|r| h.g_poly.eval(r)).collect();
    let fvals: Vec<f64> = rho_samples.iter().map(|r| h.f_poly.eval(r)).collect();

    let dg = h.g_profile.dx_c(grid);
    let df = h.f_profile.dy_c(grid);
    let mut total = 0.0;
    for k in 0..grid.len() {
        let (a, b) = (dg.data[k], df.data[k]);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (gv, fv) in gvals.iter().zip(&fvals) {
            let v = a * gv - b * fv;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        total += hi - lo;
    }
    total * grid.cell()
}
