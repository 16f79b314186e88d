//! Cached 2D FFTs and spectral inverses of the discrete Laplacian symbols.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

struct PlanPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plan(n: usize) -> Arc<PlanPair> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<PlanPair>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(PlanPair {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// In-place 2D FFT over a row-major nx x ny buffer (index i*ny + j).
pub fn fft2(data: &mut [Complex64], nx: usize, ny: usize, inverse: bool) {
    assert_eq!(data.len(), nx * ny);
    let py = plan(ny);
    let px = plan(nx);
    let fy = if inverse { &py.inverse } else { &py.forward };
    let fx = if inverse { &px.inverse } else { &px.forward };
    // rows (contiguous)
    for row in data.chunks_exact_mut(ny) {
        fy.process(row);
    }
    // columns
    let mut col = vec![Complex64::default(); nx];
    for j in 0..ny {
        for i in 0..nx {
            col[i] = data[i * ny + j];
        }
        fx.process(&mut col);
        for i in 0..nx {
            data[i * ny + j] = col[i];
        }
    }
    if inverse {
        let scale = 1.0 / (nx * ny) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Eigenvalue of the 5-point d*d stencil at mode (kx, ky):
/// (2 - 2 cos(2 pi kx / nx)) / hx^2 + (2 - 2 cos(2 pi ky / ny)) / hy^2.
pub fn symbol_5pt(kx: usize, ky: usize, nx: usize, ny: usize, hx: f64, hy: f64) -> f64 {
    let tx = 2.0 * std::f64::consts::PI * kx as f64 / nx as f64;
    let ty = 2.0 * std::f64::consts::PI * ky as f64 / ny as f64;
    (2.0 - 2.0 * tx.cos()) / (hx * hx) + (2.0 - 2.0 * ty.cos()) / (hy * hy)
}

/// Eigenvalue of the composite central-difference d* d (wide stencil):
/// (sin(2 pi kx / nx)/hx)^2 + (sin(2 pi ky / ny)/hy)^2.
pub fn symbol_wide(kx: usize, ky: usize, nx: usize, ny: usize, hx: f64, hy: f64) -> f64 {
    let tx = 2.0 * std::f64::consts::PI * kx as f64 / nx as f64;
    let ty = 2.0 * std::f64::consts::PI * ky as f64 / ny as f64;
    let sx = tx.sin() / hx;
    let sy = ty.sin() / hy;
    sx * sx + sy * sy
}

/// Divide by a spectral symbol, zeroing modes where |symbol| <= floor.
/// `shift` is added to the symbol (used by preconditioners).
pub fn apply_inverse_symbol(
    data: &mut [Complex64],
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    wide: bool,
    shift: f64,
    floor: f64,
) {
    fft2(data, nx, ny, false);
    for kx in 0..nx {
        for ky in 0..ny {
            let s = if wide {
                symbol_wide(kx, ky, nx, ny, hx, hy)
            } else {
                symbol_5pt(kx, ky, nx, ny, hx, hy)
            } + shift;
            let v = &mut data[kx * ny + ky];
            if s.abs() <= floor {
                *v = Complex64::default();
            } else {
                *v /= s;
            }
        }
    }
    fft2(data, nx, ny, true);
}
