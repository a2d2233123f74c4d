//! Random-matrix side of the vanishing statistics.
//!
//! Twisted central values of a fixed curve are modeled by values of
//! characteristic polynomials of Haar-random unitaries of size N = 2·ln X.
//! The moments E|det(A−I)|^s have the closed product form
//!
//!   M_U(s, N) = ∏_{j=1}^{N} Γ(j)·Γ(j+s) / Γ(j+s/2)²,   Re(s) > −1,
//!
//! whose first pole at s = −1 controls the small-x value density
//! p(x) ∼ G(1/2)²·N^{1/4}.  Combined with the lattice discretisation
//! (a nonzero algebraic invariant has some conjugate of size ≫ 1/√m),
//! this yields the per-class vanishing probability
//!
//!   P(k, m) = (C_E·(ln m)^{1/4} / √m)^{(k−1)/2},
//!
//! with C_E = 2^{1/4}·a_E(−1/2)·G(1/2)².  Summing P over all characters of
//! conductor ≤ X separates three regimes: power growth for k = 3, a
//! borderline-divergent log power for k = 5, and a convergent series —
//! bounded vanishing count — for every k ≥ 7.
//!
//! A Monte-Carlo sampler of Haar unitaries (Ginibre matrices orthonormalized
//! with the positive-diagonal convention) provides an independent oracle for
//! the moment product.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use crate::dirichlet::admissible_conductors;
use crate::error::Error;
use crate::Result;

/// Euler–Mascheroni constant, used only in the Barnes product oracle.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Compensated summation; the moment product cancels thousands of digits
/// of log-gamma magnitude down to a few, so naive accumulation is not
/// accurate enough.
#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

/// ln Γ(x) for x > 0 by the Stirling–Bernoulli expansion after shifting the
/// argument above 12; good to ≈10⁻¹³ relative over the range used here.
fn ln_gamma(mut x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma needs a positive argument, got {x}");
    let mut shift = 0.0;
    while x < 12.0 {
        shift -= x.ln();
        x += 1.0;
    }
    // B_{2i} / (2i·(2i−1)) for 2i = 2, …, 14.
    const COEFFS: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        7.0 / 1092.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut power = inv;
    for c in COEFFS {
        series += c * power;
        power *= inv2;
    }
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + series
}

/// Keating–Snaith moment M_U(s, N) = E|det(A − I)|^s over Haar-random N×N
/// unitaries, evaluated by log-gamma summation.
pub fn moment_product(s: f64, n: u64) -> Result<f64> {
    if !(s > -1.0) {
        return Err(Error::OutsideAnalyticity(format!(
            "moment exponent s = {s} lies outside the analyticity half-plane Re(s) > −1"
        )));
    }
    if n == 0 {
        return Err(Error::Config("matrix size must be positive".into()));
    }
    let mut acc = KahanSum::default();
    for j in 1..=n {
        let j = j as f64;
        acc.add(ln_gamma(j) + ln_gamma(j + s) - 2.0 * ln_gamma(j + 0.5 * s));
    }
    Ok(acc.value().exp())
}

/// ln A (Glaisher–Kinkelin) from the Euler–Maclaurin expansion of
/// Σ_{j≤n} j·ln j; the omitted terms are O(10⁻⁴·n⁻⁸).
///
/// Summing j·ln(j/n) instead of j·ln j keeps every intermediate O(n²/4)
/// rather than O(n²·ln n/2), so the cancellation down to a constant of
/// size 1/4 costs only a few ulp.
fn glaisher_log(n: u64) -> f64 {
    let nf = n as f64;
    let mut sum = KahanSum::default();
    for j in 1..=n {
        let j = j as f64;
        sum.add(j * (j / nf).ln());
    }
    sum.add(nf * nf / 4.0);
    sum.value() - nf.ln() / 12.0 - 1.0 / (720.0 * nf * nf) + 1.0 / (5040.0 * nf.powi(4))
        - 1.0 / (10_080.0 * nf.powi(6))
}

/// ζ′(−1) = 1/12 − ln A.
pub fn zeta_prime_minus_one() -> f64 {
    1.0 / 12.0 - glaisher_log(20)
}

/// The Barnes special value G(1/2) = exp(3/2·ζ′(−1) − 1/4·ln π + 1/24·ln 2).
pub fn barnes_g_half() -> f64 {
    (1.5 * zeta_prime_minus_one() - 0.25 * std::f64::consts::PI.ln()
        + std::f64::consts::LN_2 / 24.0)
        .exp()
}

/// Direct Weierstrass-product evaluation of G(1+z), truncated at `factors`
/// terms with the analytic tail Σ_{j≥3} (−1)^{j+1} z^j/j · Σ_{n>M} n^{1−j}
/// restored; an independent cross-check for [`barnes_g_half`].
pub fn barnes_g_product_at(z: f64, factors: u64) -> f64 {
    let mut log_product = KahanSum::default();
    for n in 1..=factors {
        let nf = n as f64;
        log_product.add(nf * (1.0 + z / nf).ln() - z + z * z / (2.0 * nf));
    }
    // Σ_{n>M} n^{−p} by Euler–Maclaurin, good to O(M^{−p−3}).
    let m = factors as f64;
    let zeta_tail = |p: f64| {
        1.0 / ((p - 1.0) * m.powf(p - 1.0)) - 1.0 / (2.0 * m.powf(p)) + p / (12.0 * m.powf(p + 1.0))
    };
    let mut tail = 0.0;
    let mut z_power = z * z * z;
    for j in 3..=6u32 {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        tail += sign * z_power / j as f64 * zeta_tail(j as f64 - 1.0);
        z_power *= z;
    }
    (0.5 * z * (2.0 * std::f64::consts::PI).ln() - 0.5 * (z + z * z * (1.0 + EULER_GAMMA))
        + log_product.value()
        + tail)
        .exp()
}

/// Small-x asymptote of the value density of |det(A−I)| over U(N):
/// p(x) ∼ G(1/2)²·N^{1/4}, governed by the first pole of the moments.
pub fn small_x_density(n: u64) -> f64 {
    assert!(n > 0, "density needs a positive matrix size");
    let g = barnes_g_half();
    g * g * (n as f64).powf(0.25)
}

/// Parameters tying the unitary family to a conductor range.
#[derive(Debug, Clone, Copy)]
pub struct RmtModel {
    /// Order of the twisting characters.
    pub k: u64,
    /// Conductor bound X; the matrix size is N = 2·ln X.
    pub x_bound: f64,
    /// The curve constant a_E(−1/2); not derivable from the matrix model,
    /// defaults to 1 and only rescales C_E.
    pub ae_half: f64,
    /// C_E = 2^{1/4}·a_E(−1/2)·G(1/2)².
    pub c_e: f64,
}

impl RmtModel {
    pub fn new(k: u64, x_bound: f64, ae_half: f64) -> Result<Self> {
        crate::dirichlet::validate_order(k)?;
        if !(x_bound > 1.0) {
            return Err(Error::Config(format!(
                "conductor bound must exceed 1 for a positive matrix size, got {x_bound}"
            )));
        }
        if !(ae_half > 0.0) {
            return Err(Error::Config(format!(
                "a_E(−1/2) must be positive, got {ae_half}"
            )));
        }
        let g = barnes_g_half();
        Ok(RmtModel {
            k,
            x_bound,
            ae_half,
            c_e: 2.0f64.powf(0.25) * ae_half * g * g,
        })
    }

    /// N = 2·ln X, the matrix size matching conductors of height X.
    pub fn matrix_size(&self) -> f64 {
        2.0 * self.x_bound.ln()
    }

    /// Nearest discrete matrix size, for consumers that need an integer N.
    pub fn discrete_matrix_size(&self) -> u64 {
        self.matrix_size().round().max(1.0) as u64
    }
}

/// Density constant of the twisted values near zero: p_E(x) ∼ C_E·(ln X)^{1/4}.
pub fn twist_density_constant(model: &RmtModel) -> f64 {
    model.c_e * model.x_bound.ln().powf(0.25)
}

/// Probability that one Galois class of order-k twists of conductor m
/// vanishes: each of the (k−1)/2 independent conjugates must land in the
/// discretisation box of width ≍ 1/√m, and each does so with probability
/// ≈ C_E·(ln m)^{1/4}/√m.
pub fn class_vanishing_probability(k: u64, m: u64, model: &RmtModel) -> f64 {
    assert!(m >= 3, "vanishing probability needs m ≥ 3, got {m}");
    let base = model.c_e * (m as f64).ln().powf(0.25) / (m as f64).sqrt();
    base.powi(((k - 1) / 2) as i32).clamp(0.0, 1.0)
}

/// Growth regime of the expected number of vanishing twists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    /// k = 3: log of the sum grows like ½·log X.
    PowerGrowth,
    /// k = 5: unbounded but slower than any power, ∝ (ln X)^{3/2}.
    Subpolynomial,
    /// k ≥ 7: the series converges; finitely many vanishing twists expected.
    Bounded,
}

impl Classification {
    pub fn for_order(k: u64) -> Self {
        match k {
            3 => Classification::PowerGrowth,
            5 => Classification::Subpolynomial,
            _ => Classification::Bounded,
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let text = match self {
            Classification::PowerGrowth => "power growth (exponent 1/2)",
            Classification::Subpolynomial => "unbounded, subpolynomial",
            Classification::Bounded => "bounded",
        };
        f.write_str(text)
    }
}

/// Expected number of vanishing order-k twists of conductor ≤ x: the
/// class-vanishing probability summed over every primitive character, i.e.
/// with weight (k−1)^{#factors} per admissible conductor.
pub fn heuristic_sum(k: u64, x: u64, model: &RmtModel) -> Result<(f64, Classification)> {
    if x < 10 {
        return Err(Error::Config(format!("heuristic sums need a bound ≥ 10, got {x}")));
    }
    let mut sum = KahanSum::default();
    for conductor in admissible_conductors(k, x)? {
        let characters = (k - 1).pow(conductor.factors.len() as u32) as f64;
        sum.add(characters * class_vanishing_probability(k, conductor.m, model));
    }
    Ok((sum.value(), Classification::for_order(k)))
}

/// One standard complex Gaussian via Box–Muller on 53-bit uniforms.
fn standard_complex_gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0); // (0, 1]
    let u2 = (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0); // [0, 1)
    let radius = (-2.0 * u1.ln()).sqrt();
    let angle = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(radius * angle.cos(), radius * angle.sin())
}

/// ln|det(A − I)| for one Haar-random A: a Ginibre matrix is orthonormalized
/// column by column (modified Gram–Schmidt; the positive column norms are
/// exactly the diagonal convention that makes Q unique and Haar), then the
/// shifted matrix is LU-factored with partial pivoting.
fn sample_log_abs_det(n: usize, rng: &mut ChaCha8Rng) -> f64 {
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| (0..n).map(|_| standard_complex_gaussian(rng)).collect())
        .collect();
    for j in 0..n {
        let (done, rest) = cols.split_at_mut(j);
        let v = &mut rest[0];
        for q in done.iter() {
            let proj: Complex64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            for (x, &qi) in v.iter_mut().zip(q.iter()) {
                *x -= proj * qi;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    // rows of Q − I
    let mut rows: Vec<Vec<Complex64>> = (0..n)
        .map(|i| (0..n).map(|j| cols[j][i]).collect())
        .collect();
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] -= 1.0;
    }
    let mut log_abs = 0.0;
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| {
                rows[a][col]
                    .norm_sqr()
                    .partial_cmp(&rows[b][col].norm_sqr())
                    .unwrap()
            })
            .unwrap();
        rows.swap(col, pivot_row);
        let pivot = rows[col][col];
        if pivot.norm_sqr() == 0.0 {
            return f64::NEG_INFINITY;
        }
        log_abs += 0.5 * pivot.norm_sqr().ln();
        let (upper, lower) = rows.split_at_mut(col + 1);
        let pivot_row = &upper[col];
        for row in lower.iter_mut() {
            let factor = row[col] / pivot;
            for (x, &p) in row.iter_mut().zip(pivot_row.iter()).skip(col) {
                *x -= factor * p;
            }
        }
    }
    log_abs
}

/// Samples drawn per independent RNG stream; chunked streams keep the
/// estimate bit-identical no matter how rayon schedules the work.
const MC_CHUNK: u64 = 4096;

/// Monte-Carlo estimate of E|det(A−I)|^s over Haar-random N×N unitaries:
/// returns (mean, standard error).  Deterministic in `seed` — chunk c uses
/// ChaCha stream c, and partial sums are folded in chunk order.
pub fn mc_haar_moment(n: usize, s: f64, samples: u64, seed: u64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Config("matrix size must be positive".into()));
    }
    if samples < 100 {
        return Err(Error::Config(format!(
            "standard errors need at least 100 samples, got {samples}"
        )));
    }
    let chunks = samples.div_ceil(MC_CHUNK);
    let partials: Vec<(f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let count = MC_CHUNK.min(samples - chunk * MC_CHUNK);
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..count {
                let value = (s * sample_log_abs_det(n, &mut rng)).exp();
                sum += value;
                sum_sq += value * value;
            }
            (sum, sum_sq)
        })
        .collect();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (a, b) in partials {
        sum += a;
        sum_sq += b;
    }
    let count = samples as f64;
    let mean = sum / count;
    let variance = ((sum_sq - sum * sum / count) / (count - 1.0)).max(0.0);
    Ok((mean, (variance / count).sqrt()))
}
