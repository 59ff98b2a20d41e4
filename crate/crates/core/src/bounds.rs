// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Numeric side of the running-time bound.
//!
//! Witness trees with `n` internal nodes have total weight `Q_n`, where an
//! internal node on a `2k`-cycle weighs `w_k = (1/γ) q^(2k-3)` with
//! `q = 1 - e^(-1/γ)`. The generating function `W(z) = Σ_{n≥1} Q_n z^n`
//! solves `W = z·φ(W)` with
//!
//! ```text
//! φ(x) = Σ_{k≥3} w_k (1+x)^(2k-2) = (1/γ) q³ (1+x)⁴ / (1 - q² (1+x)²)
//! ```
//!
//! so `Q_n ≤ ρ^n` where `ρ = min_{x>0} φ(x)/x`. The expected running time is
//! polynomial whenever `ρ < 1`, and [`gamma_threshold`] locates the smallest
//! `γ` with that property.

use crate::error::{BoundsError, ColoringError};
use crate::palette::{num_colors, quota};

/// Points in the coarse scan of [`rho`].
pub const RHO_GRID: usize = 1000;
/// Absolute tolerance on the minimizer returned by [`rho`].
pub const RHO_XTOL: f64 = 1e-10;
/// Initial bisection bracket of [`gamma_threshold`].
pub const THRESHOLD_BRACKET: (f64, f64) = (1.0, 3.0);

fn check_gamma(gamma: f64) -> Result<(), BoundsError> {
    if gamma.is_finite() && gamma > 0.0 {
        Ok(())
    } else {
        Err(BoundsError::InvalidGamma(gamma))
    }
}

/// `1 - e^(-1/γ)`, always in `(0, 1)`.
pub fn base_q(gamma: f64) -> Result<f64, BoundsError> {
    check_gamma(gamma)?;
    Ok(-(-1.0 / gamma).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub gamma: f64,
    pub delta: usize,
    pub num_colors: usize,
    pub quota: usize,
    pub q: f64,
}

impl BoundParams {
    pub fn new(gamma: f64, delta: usize) -> Result<Self, ColoringError> {
        let n = num_colors(gamma, delta)?;
        let k = quota(gamma, delta)?;
        Ok(BoundParams {
            gamma,
            delta,
            num_colors: n,
            quota: k,
            q: base_q(gamma).map_err(|_| ColoringError::InvalidGamma(gamma))?,
        })
    }

    /// Colors always available to an uncolored edge: `N - 2(Δ-1)`.
    pub fn guaranteed_available(&self) -> usize {
        self.num_colors - 2 * (self.delta - 1)
    }
}

/// Weight `w_k` of an internal witness node on a `2k`-cycle.
pub fn weight_wk(gamma: f64, k: usize) -> Result<f64, BoundsError> {
    if k < 3 {
        return Err(BoundsError::InvalidK(k));
    }
    let q = base_q(gamma)?;
    Ok(q.powi(2 * k as i32 - 3) / gamma)
}

/// Largest `x` for which the series defining φ converges.
pub fn phi_domain_limit(gamma: f64) -> Result<f64, BoundsError> {
    Ok(1.0 / base_q(gamma)? - 1.0)
}

/// Closed form of φ at `x >= 0`.
pub fn phi_e(gamma: f64, x: f64) -> Result<f64, BoundsError> {
    let q = base_q(gamma)?;
    let limit = 1.0 / q - 1.0;
    if !(x >= 0.0 && x < limit) || q * (1.0 + x) >= 1.0 {
        return Err(BoundsError::Domain { x, limit });
    }
    let p = 1.0 + x;
    let p2 = p * p;
    Ok(q.powi(3) * p2 * p2 / (gamma * (1.0 - q * q * p2)))
}

/// φ by direct summation of the first `terms` terms (`k = 3..3+terms`).
pub fn phi_e_series(gamma: f64, x: f64, terms: usize) -> Result<f64, BoundsError> {
    let limit = phi_domain_limit(gamma)?;
    if !(x >= 0.0 && x < limit) {
        return Err(BoundsError::Domain { x, limit });
    }
    let p = 1.0 + x;
    let mut sum = 0.0;
    for k in 3..3 + terms {
        sum += weight_wk(gamma, k)? * p.powi(2 * k as i32 - 2);
    }
    Ok(sum)
}

fn ratio(gamma: f64, x: f64) -> f64 {
    phi_e(gamma, x).map_or(f64::INFINITY, |v| v / x)
}

/// `ρ = min φ(x)/x` over `0 < x < 1/q - 1`, with its minimizer.
///
/// A uniform scan locates the best grid cell; golden-section search then
/// refines inside the two neighbouring cells.
pub fn rho(gamma: f64) -> Result<(f64, f64), BoundsError> {
    let limit = phi_domain_limit(gamma)?;
    let h = limit / (RHO_GRID + 1) as f64;
    let mut best = (f64::INFINITY, 1);
    for i in 1..=RHO_GRID {
        let r = ratio(gamma, i as f64 * h);
        if r < best.0 {
            best = (r, i);
        }
    }
    let (mut a, mut b) = ((best.1 - 1) as f64 * h, (best.1 + 1) as f64 * h);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (ratio(gamma, c), ratio(gamma, d));
    while b - a > RHO_XTOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = ratio(gamma, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = ratio(gamma, d);
        }
    }
    let x = (a + b) / 2.0;
    let r = ratio(gamma, x);
    // Never report worse than the scan.
    if r <= best.0 {
        Ok((r, x))
    } else {
        Ok((best.0, best.1 as f64 * h))
    }
}

/// Smallest `γ` (to width `tol`) with `ρ(γ) < 1`, by bisection on
/// [`THRESHOLD_BRACKET`]. Returns the upper end of the final interval, so
/// the result always satisfies the predicate.
pub fn gamma_threshold(tol: f64) -> Result<f64, BoundsError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(BoundsError::InvalidTolerance(tol));
    }
    let (mut lo, mut hi) = THRESHOLD_BRACKET;
    let (rho_lo, rho_hi) = (rho(lo)?.0, rho(hi)?.0);
    if rho_lo < 1.0 || rho_hi >= 1.0 {
        return Err(BoundsError::Bracket {
            lo,
            hi,
            rho_lo,
            rho_hi,
        });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if rho(mid)?.0 < 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn mul_truncated(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b[..n - i].iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `a / b` as truncated power series; requires `b[0] != 0`.
fn div_truncated(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for i in 0..n {
        let mut s = a[i];
        for j in 1..=i {
            s -= b[j] * out[i - j];
        }
        out[i] = s / b[0];
    }
    out
}

/// Tree weights `Q_0..=Q_nmax`.
///
/// Iterates `W ← z·φ(W)` on power series truncated at degree `nmax`, with φ
/// evaluated through its closed form; the degree-`n` coefficient is final
/// after `n` rounds, and iteration stops at the first round that changes
/// nothing. `Q_0 = 1` and `Q_n` is the degree-`n` coefficient of `W`.
pub fn q_sequence(gamma: f64, nmax: usize) -> Result<Vec<f64>, BoundsError> {
    let q = base_q(gamma)?;
    let len = nmax + 1;
    let mut w = vec![0.0; len];
    loop {
        let mut p = w.clone();
        p[0] += 1.0;
        let p2 = mul_truncated(&p, &p);
        let num: Vec<f64> = mul_truncated(&p2, &p2)
            .iter()
            .map(|c| c * q.powi(3) / gamma)
            .collect();
        let den: Vec<f64> = p2
            .iter()
            .enumerate()
            .map(|(i, c)| if i == 0 { 1.0 - q * q * c } else { -q * q * c })
            .collect();
        let phi = div_truncated(&num, &den);
        let mut next = vec![0.0; len];
        next[1..].copy_from_slice(&phi[..len - 1]);
        if let Some(index) = next.iter().position(|c| !c.is_finite()) {
            return Err(BoundsError::Overflow { index });
        }
        if next == w {
            break;
        }
        w = next;
    }
    w[0] = 1.0;
    Ok(w)
}

/// `Q_0..=Q_nmax` together with `ρ` and its minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesBound {
    pub qn: Vec<f64>,
    pub rho: f64,
    pub xstar: f64,
}

impl SeriesBound {
    pub fn compute(gamma: f64, nmax: usize) -> Result<Self, BoundsError> {
        let (rho, xstar) = rho(gamma)?;
        let qn = q_sequence(gamma, nmax)?;
        Ok(SeriesBound { qn, rho, xstar })
    }

    /// Indices `n` with `Q_n > ρ^n`, allowing a relative slack of `rel_tol`.
    pub fn violations(&self, rel_tol: f64) -> Vec<usize> {
        self.qn
            .iter()
            .enumerate()
            .filter(|&(n, &q)| q > self.rho.powi(n as i32) * (1.0 + rel_tol))
            .map(|(n, _)| n)
            .collect()
    }
}
