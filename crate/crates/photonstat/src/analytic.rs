//! Closed-form joint photon-number statistics of thermal light in a
//! Hanbury Brown-Twiss interferometer.
//!
//! The joint probability generating function of the two detected photon
//! numbers is
//!
//! ```text
//! M(x, y) = 1 / [1 - n(x-1) - n(y-1) + (1-mu) n^2 (x-1)(y-1)]
//! ```
//!
//! with `n` the mean detected photon number per bin per detector and `mu`
//! the squared modulus of the first-order field coherence between the two
//! detection points. Extracting Taylor coefficients gives the joint
//! probability `P_mn` of detecting exactly `m` photons at detector 1 and
//! `n` at detector 2, and the normalized correlation
//! `g_mn = P_mn / (P_m P_n)`.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Mean photon number and squared first-order coherence, the pair that
/// parameterizes every closed form in this module.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ThermalParams {
    nbar: f64,
    mu: f64,
}

impl ThermalParams {
    pub fn new(nbar: f64, mu: f64) -> Result<Self> {
        if !nbar.is_finite() || nbar < 0.0 {
            return Err(Error::InvalidParams(format!(
                "nbar must be finite and >= 0, got {nbar}"
            )));
        }
        if !mu.is_finite() || !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidParams(format!(
                "mu must lie in [0, 1], got {mu}"
            )));
        }
        Ok(Self { nbar, mu })
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn constants(&self) -> PgfConstants {
        PgfConstants::from_params(*self)
    }
}

/// The constants C, D, E that the denominator of `M` factors into after the
/// substitution `u = x`, `v = y` around the expansion point:
///
/// ```text
/// C = 1 + 2n + (1-mu) n^2
/// D = n [1 + (1-mu) n]
/// E = (1-mu) n^2
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgfConstants {
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

impl PgfConstants {
    pub fn from_params(p: ThermalParams) -> Self {
        let e = (1.0 - p.mu) * p.nbar * p.nbar;
        Self {
            c: 1.0 + 2.0 * p.nbar + e,
            d: p.nbar + e,
            e,
        }
    }
}

/// A pair of exact photon counts, `m` at detector 1 and `n` at detector 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CountPair {
    pub m: u32,
    pub n: u32,
}

impl CountPair {
    pub fn new(m: u32, n: u32) -> Self {
        Self { m, n }
    }

    pub fn swapped(self) -> Self {
        Self {
            m: self.n,
            n: self.m,
        }
    }
}

/// Truncated materialization of the joint distribution over a count grid.
#[derive(Debug, Clone)]
pub struct JointPmnTable {
    pub mmax: u32,
    pub nmax: u32,
    /// `values[m][n] = P_mn`, `(mmax+1) x (nmax+1)`.
    pub values: Vec<Vec<f64>>,
    /// `1 - sum of the table`; bounded by the geometric marginal tails.
    pub tail_mass: f64,
    /// True when any entry needed the contour fallback for full precision.
    pub degraded: bool,
}

impl JointPmnTable {
    pub fn row_sum(&self, m: u32) -> f64 {
        self.values[m as usize].iter().sum()
    }
}

const LN_FACT_TABLE_LEN: usize = 4096;

fn ln_factorial(n: u32) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; LN_FACT_TABLE_LEN];
        for i in 2..LN_FACT_TABLE_LEN {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    table[n as usize]
}

/// Evaluate the joint probability generating function `M(x, y)`.
///
/// `M(1, 1) = 1` exactly; the function has a pole surface where the
/// denominator vanishes and evaluation beyond it is a domain error.
pub fn joint_pgf(params: ThermalParams, x: f64, y: f64) -> Result<f64> {
    let n = params.nbar;
    let denom =
        1.0 - n * (x - 1.0) - n * (y - 1.0) + (1.0 - params.mu) * n * n * (x - 1.0) * (y - 1.0);
    if denom <= 0.0 {
        return Err(Error::PgfPole { x, y, denom });
    }
    Ok(1.0 / denom)
}

/// Bose-Einstein marginal `P_q = nbar^q / (1 + nbar)^{q+1}`.
pub fn marginal_pq(params: ThermalParams, q: u32) -> f64 {
    let n = params.nbar;
    if n == 0.0 {
        return if q == 0 { 1.0 } else { 0.0 };
    }
    // log-space for large q
    let ln_p = q as f64 * n.ln() - (q as f64 + 1.0) * (1.0 + n).ln();
    ln_p.exp()
}

/// Closed-form `P_mn` evaluated by the alternating sum over `k`:
///
/// ```text
/// P_mn = sum_{k=0}^{min(m,n)} (m+n-k)! / [(m-k)! (n-k)! k!]
///        * D^{m+n-2k} (-E)^k / C^{m+n-k+1}
/// ```
///
/// Returns the value and a degradation flag: true when the alternating-sum
/// cancellation exceeded six decimal digits (largest term magnitude above
/// `1e6 * |result|`), in which case the caller should prefer the stable
/// recurrence ([`pmn_recurrence`]).
pub fn joint_pmn_closed_form(params: ThermalParams, pair: CountPair) -> (f64, bool) {
    // canonical order makes the m <-> n symmetry bit-exact
    let (m, n) = (pair.m.min(pair.n), pair.m.max(pair.n));
    if params.nbar == 0.0 {
        return (if m == 0 && n == 0 { 1.0 } else { 0.0 }, false);
    }
    // mu = 0 factorizes exactly into the product of marginals.
    if params.mu == 0.0 {
        return (marginal_pq(params, m) * marginal_pq(params, n), false);
    }
    let k = params.constants();
    // mu = 1: E = 0, only the k = 0 term survives.
    if k.e == 0.0 {
        let ln_t = ln_factorial(m + n) - ln_factorial(m) - ln_factorial(n)
            + (m + n) as f64 * k.d.ln()
            - (m + n + 1) as f64 * k.c.ln();
        return (ln_t.exp(), false);
    }
    let kmax = m.min(n);
    let ln_c = k.c.ln();
    let ln_d = k.d.ln();
    let ln_e = k.e.ln();
    // Term magnitudes in log space, scaled by the largest before summing.
    let mut ln_terms = Vec::with_capacity(kmax as usize + 1);
    let mut ln_max = f64::NEG_INFINITY;
    for kk in 0..=kmax {
        let ln_t = ln_factorial(m + n - kk)
            - ln_factorial(m - kk)
            - ln_factorial(n - kk)
            - ln_factorial(kk)
            + (m + n - 2 * kk) as f64 * ln_d
            + kk as f64 * ln_e
            - (m + n - kk + 1) as f64 * ln_c;
        ln_max = ln_max.max(ln_t);
        ln_terms.push(ln_t);
    }
    // Kahan summation of the sign-alternating scaled terms.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for (kk, ln_t) in ln_terms.iter().enumerate() {
        let sign = if kk % 2 == 0 { 1.0 } else { -1.0 };
        let term = sign * (ln_t - ln_max).exp();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let value = sum * ln_max.exp();
    // Largest term magnitude is exp(ln_max); round-off there is what limits
    // the result, so flag once more than six digits have cancelled
    // (absolute error ~ 1e-16 * exp(ln_max) ~ 1e-10 * |value|).
    let degraded = !(sum.abs() >= 1e-6) || value < 0.0;
    (value, degraded)
}

/// Stable evaluation of `P_mn` by the two-index recurrence implied by
/// `(1 - a(u+v) + b uv) M(u, v) = 1/C`:
///
/// ```text
/// c_{m,n} = a (c_{m-1,n} + c_{m,n-1}) - b c_{m-1,n-1},   c_{0,0} = 1/C
/// ```
///
/// The Taylor series of `M` converges beyond `(1, 1)`, so perturbations
/// injected along the way decay geometrically instead of amplifying; this
/// stays accurate at large `m + n` where the alternating closed-form sum
/// cancels catastrophically.
pub fn pmn_recurrence(params: ThermalParams, pair: CountPair) -> f64 {
    if params.nbar == 0.0 {
        return if pair.m == 0 && pair.n == 0 { 1.0 } else { 0.0 };
    }
    let k = params.constants();
    let a = k.d / k.c;
    let b = k.e / k.c;
    let n = pair.n as usize;
    // rolling rows over m
    let mut prev = vec![0.0f64; n + 1];
    let mut row = vec![0.0f64; n + 1];
    row[0] = 1.0 / k.c;
    for j in 1..=n {
        row[j] = a * row[j - 1];
    }
    for _ in 1..=pair.m {
        std::mem::swap(&mut prev, &mut row);
        row[0] = a * prev[0];
        for j in 1..=n {
            row[j] = a * (prev[j] + row[j - 1]) - b * prev[j - 1];
        }
    }
    row[n]
}

/// Joint probability `P_mn`, falling back to the stable recurrence when the
/// closed-form alternating sum loses too much precision.
pub fn joint_pmn(params: ThermalParams, pair: CountPair) -> f64 {
    let (value, degraded) = joint_pmn_closed_form(params, pair);
    if degraded {
        return pmn_recurrence(params, pair).max(0.0);
    }
    value.max(0.0)
}

/// Normalized correlation `g_mn = P_mn / (P_m P_n)`.
///
/// Dispatches to the simplified closed forms where they exist (`n = 0`,
/// `m = 0`, and `(1, 1)`), which are exact to the last bit; the generic
/// ratio of `P_mn` to the marginals covers everything else.
pub fn g_mn(params: ThermalParams, pair: CountPair) -> Result<f64> {
    if pair.n == 0 {
        return g_m0(params, pair.m);
    }
    if pair.m == 0 {
        return g_m0(params, pair.n);
    }
    if pair.m == 1 && pair.n == 1 {
        return g11(params);
    }
    let pm = marginal_pq(params, pair.m);
    let pn = marginal_pq(params, pair.n);
    if pm <= 0.0 || pn <= 0.0 {
        return Err(Error::UndefinedCorrelation(format!(
            "marginal vanishes at nbar={}, (m,n)=({},{})",
            params.nbar, pair.m, pair.n
        )));
    }
    Ok(joint_pmn(params, pair) / (pm * pn))
}

/// Closed form for `g_m0`:
///
/// ```text
/// g_m0 = (1+n)^{m+2} [1 + (1-mu) n]^m / [1 + 2n + (1-mu) n^2]^{m+1}
/// ```
pub fn g_m0(params: ThermalParams, m: u32) -> Result<f64> {
    let n = params.nbar;
    if n == 0.0 && m > 0 {
        return Err(Error::UndefinedCorrelation(format!(
            "marginal vanishes at nbar=0, m={m}"
        )));
    }
    let c = params.constants().c;
    let ln_g = (m as f64 + 2.0) * (1.0 + n).ln() + m as f64 * (1.0 + (1.0 - params.mu) * n).ln()
        - (m as f64 + 1.0) * c.ln();
    Ok(ln_g.exp())
}

/// Simplified `P_11 = n^2 [(1+mu) + 2(1-mu)n + (1-mu)^2 n^2] / C^3`.
pub fn p11(params: ThermalParams) -> f64 {
    let n = params.nbar;
    let om = 1.0 - params.mu;
    let c = params.constants().c;
    n * n * ((1.0 + params.mu) + 2.0 * om * n + om * om * n * n) / (c * c * c)
}

/// Closed form `g_11 = (1+n)^4 [(1+mu) + 2(1-mu)n + (1-mu)^2 n^2] / C^3`.
pub fn g11(params: ThermalParams) -> Result<f64> {
    let n = params.nbar;
    if n == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "marginal vanishes at nbar=0 for m=n=1".into(),
        ));
    }
    let om = 1.0 - params.mu;
    let c = params.constants().c;
    Ok((1.0 + n).powi(4) * ((1.0 + params.mu) + 2.0 * om * n + om * om * n * n) / (c * c * c))
}

/// Degree of second-order coherence of partially coherent thermal light,
/// `g2(0) = 1 + mu`, used as the reference line in parameter sweeps.
pub fn reference_g2(mu: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::InvalidParams(format!(
            "mu must lie in [0, 1], got {mu}"
        )));
    }
    Ok(1.0 + mu)
}

/// Smallest truncation order K with marginal tail
/// `(nbar / (1+nbar))^{K+1} < 1e-12`.
pub fn truncation_order(nbar: f64) -> u32 {
    if nbar <= 0.0 {
        return 0;
    }
    let r = nbar / (1.0 + nbar);
    // (K+1) ln r < ln 1e-12, then nudge against float rounding
    let mut k = (((-12.0 * std::f64::consts::LN_10) / r.ln()) - 1.0).floor().max(0.0) as u32;
    while marginal_tail_bound(nbar, k) >= 1e-12 {
        k += 1;
    }
    while k > 0 && marginal_tail_bound(nbar, k - 1) < 1e-12 {
        k -= 1;
    }
    k.max(1)
}

/// Geometric upper bound on the marginal tail mass beyond count `k`.
pub fn marginal_tail_bound(nbar: f64, k: u32) -> f64 {
    if nbar <= 0.0 {
        return 0.0;
    }
    let r = nbar / (1.0 + nbar);
    r.powi(k as i32 + 1)
}

/// Full `P_mn` grid by the stable recurrence (see [`pmn_recurrence`]).
fn recurrence_grid(params: ThermalParams, mmax: u32, nmax: u32) -> Vec<Vec<f64>> {
    let k = params.constants();
    let a = k.d / k.c;
    let b = k.e / k.c;
    let (mm, nn) = (mmax as usize, nmax as usize);
    let mut grid = vec![vec![0.0f64; nn + 1]; mm + 1];
    grid[0][0] = 1.0 / k.c;
    for j in 1..=nn {
        grid[0][j] = a * grid[0][j - 1];
    }
    for i in 1..=mm {
        grid[i][0] = a * grid[i - 1][0];
        for j in 1..=nn {
            grid[i][j] = a * (grid[i - 1][j] + grid[i][j - 1]) - b * grid[i - 1][j - 1];
        }
    }
    grid
}

/// Materialize `P_mn` over `[0, mmax] x [0, nmax]`.
pub fn pmn_table(params: ThermalParams, mmax: u32, nmax: u32) -> JointPmnTable {
    let mut values = vec![vec![0.0; nmax as usize + 1]; mmax as usize + 1];
    let mut degraded = false;
    let mut sum = 0.0;
    // One recurrence grid serves every degraded entry.
    let mut rec_grid: Option<Vec<Vec<f64>>> = None;
    for m in 0..=mmax {
        for n in 0..=nmax {
            // Symmetric entries share one evaluation.
            let v = if n < m && n <= mmax && m <= nmax {
                values[n as usize][m as usize]
            } else {
                let (v, d) = joint_pmn_closed_form(params, CountPair::new(m, n));
                if d {
                    degraded = true;
                    let grid = rec_grid
                        .get_or_insert_with(|| recurrence_grid(params, mmax, nmax));
                    grid[m as usize][n as usize].max(0.0)
                } else {
                    v
                }
            };
            values[m as usize][n as usize] = v;
            sum += v;
        }
    }
    JointPmnTable {
        mmax,
        nmax,
        values,
        tail_mass: 1.0 - sum,
        degraded,
    }
}
