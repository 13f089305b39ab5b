//! Independent numerical evaluations of the joint probability `P_mn`.
//!
//! Two routes that share no arithmetic with the closed form in
//! [`crate::analytic`]:
//!
//! * [`pmn_series`] expands the generating function geometrically and walks
//!   the raw `(i, j, k)` index triple of the binomial expansion, before any
//!   re-indexing collapses it to the closed-form sum.
//! * [`pmn_contour`] extracts the Taylor coefficient by discrete Fourier
//!   transform of the generating function sampled on a bi-circle.
//!
//! Agreement of the three routes is the correctness argument for all of them.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::analytic::{CountPair, ThermalParams};
use crate::error::{Error, Result};

/// Radius and grid resolution for coefficient extraction on the bi-circle
/// `u = r e^{i a}`, `v = r e^{i b}`.
#[derive(Debug, Clone, Copy)]
pub struct ContourConfig {
    /// Contour radius, in (0, 1). Must keep `|a(u+v) - b u v| < 1` on the
    /// bi-circle so the geometric expansion of the integrand converges.
    pub radius: f64,
    /// FFT points per dimension; power of two.
    pub gridsize: usize,
}

impl Default for ContourConfig {
    fn default() -> Self {
        Self {
            radius: 0.25,
            gridsize: 256,
        }
    }
}

impl ContourConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0 < self.radius && self.radius < 1.0) {
            return Err(Error::ContourConfig(format!(
                "radius must lie in (0, 1), got {}",
                self.radius
            )));
        }
        if self.gridsize < 4 || !self.gridsize.is_power_of_two() {
            return Err(Error::ContourConfig(format!(
                "gridsize must be a power of two >= 4, got {}",
                self.gridsize
            )));
        }
        Ok(())
    }
}

/// Largest safe contour radius for the given parameters.
///
/// On the bi-circle the expansion argument satisfies
/// `max |a(u+v) - b uv| = 2 a r + b r^2` (attained at `u = v = -r`); this
/// picks `r` so that bound equals 0.9, capped at 0.8. Larger radii reduce
/// the `r^{-(m+n)}` amplification of FFT round-off when extracting
/// high-order coefficients.
pub fn adaptive_radius(params: ThermalParams) -> f64 {
    let k = params.constants();
    let a = k.d / k.c;
    let b = k.e / k.c;
    let r = if b > 0.0 {
        (-a + (a * a + 0.9 * b).sqrt()) / b
    } else if a > 0.0 {
        0.45 / a
    } else {
        0.8
    };
    r.min(0.8)
}

/// Coefficient of `u^m v^n` in `M(u, v)` via 2-D DFT over the bi-circle.
///
/// `M(u, v) = (1/C) / (1 - a(u+v) + b u v)` with `a = D/C`, `b = E/C`; the
/// convergence condition `|a(u+v) - b u v| < 1` is checked on the sampled
/// grid before extraction.
pub fn pmn_contour(params: ThermalParams, pair: CountPair, cfg: &ContourConfig) -> Result<f64> {
    let grid = contour_grid(params, cfg)?;
    grid.coefficient(pair)
}

/// The transformed bi-circle samples, reusable to extract many `(m, n)`
/// coefficients for one parameter set.
pub struct ContourGrid {
    data: Vec<Complex64>,
    gridsize: usize,
    radius: f64,
}

/// Sample `M(u, v)` on the bi-circle and Fourier-transform the grid.
pub fn contour_grid(params: ThermalParams, cfg: &ContourConfig) -> Result<ContourGrid> {
    cfg.validate()?;
    let n = cfg.gridsize;
    let r = cfg.radius;
    let k = params.constants();
    let a = k.d / k.c;
    let b = k.e / k.c;

    let unit: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * i as f64 / n as f64))
        .collect();

    let mut data = vec![Complex64::default(); n * n];
    let mut wmax = 0.0f64;
    for p in 0..n {
        let u = r * unit[p];
        for q in 0..n {
            let v = r * unit[q];
            let w = a * (u + v) - b * u * v;
            wmax = wmax.max(w.norm());
            data[p * n + q] = w;
        }
    }
    if wmax >= 1.0 {
        return Err(Error::ContourConfig(format!(
            "convergence condition violated: max |a(u+v) - b uv| = {wmax:.4} >= 1 \
             at radius {r}; use a smaller radius"
        )));
    }
    for w in &mut data {
        *w = (k.c * (Complex64::new(1.0, 0.0) - *w)).inv();
    }

    // 2-D DFT: rows, transpose, rows again.
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    for row in data.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }
    transpose(&mut data, n);
    for row in data.chunks_exact_mut(n) {
        fft.process_with_scratch(row, &mut scratch);
    }

    Ok(ContourGrid {
        data,
        gridsize: n,
        radius: r,
    })
}

impl ContourGrid {
    pub fn coefficient(&self, pair: CountPair) -> Result<f64> {
        let n = self.gridsize;
        let (m, q) = (pair.m as usize, pair.n as usize);
        if m >= n || q >= n {
            return Err(Error::ContourConfig(format!(
                "count ({m},{q}) exceeds gridsize {n}"
            )));
        }
        // After the transpose the first FFT index is the original column.
        let c = self.data[q * n + m];
        let scale = (n * n) as f64 * self.radius.powi((m + q) as i32);
        Ok(c.re / scale)
    }
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Taylor coefficient of `u^m v^n` by the raw geometric/binomial triple sum:
///
/// ```text
/// 1 / (1 - a(u+v) + b uv) = sum_k [a(u+v) - b uv]^k
/// [a(u+v) - b uv]^k = sum_j sum_i C(k,j) C(k-j,i) a^{k-j} (-b)^j u^{i+j} v^{k-i}
/// ```
///
/// collecting every `(i, j, k)` with `i + j = m` and `k - i = n`. The index
/// constraints confine `k` to `[max(m,n), m+n]`, so the outer sum is finite.
pub fn pmn_series(params: ThermalParams, pair: CountPair) -> f64 {
    let (m, n) = (pair.m as i64, pair.n as i64);
    if params.nbar() == 0.0 {
        return if m == 0 && n == 0 { 1.0 } else { 0.0 };
    }
    let k = params.constants();
    let a = k.d / k.c;
    let b = k.e / k.c;
    let mut acc = 0.0f64;
    for kk in 0..=(m + n) {
        for j in 0..=kk {
            for i in 0..=(kk - j) {
                if i + j == m && kk - i == n {
                    acc += binom(kk, j) * binom(kk - j, i) * a.powi((kk - j) as i32)
                        * neg_pow(b, j as i32);
                }
            }
        }
    }
    acc / k.c
}

fn binom(n: i64, k: i64) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn neg_pow(b: f64, j: i32) -> f64 {
    if j == 0 {
        1.0
    } else {
        (-b).powi(j)
    }
}
