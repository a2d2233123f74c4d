//! Elliptic curves E/ℚ: coefficients aₙ, real periods, root numbers.
//!
//! A curve is given by a globally minimal Weierstrass model
//! y² + a₁xy + a₃y = x³ + a₂x² + a₄x + a₆ together with its conductor N.
//! From that, this module computes everything the twisting pipeline needs:
//!
//! * Dirichlet coefficients a_n by counting points over 𝔽_p.  Completing
//!   the square turns the affine count into a quadratic-character sum
//!   Σ_x χ_p(g(x)) with g = 4x³ + b₂x² + 2b₄x + b₆, and the same sum gives
//!   a_p at good *and* bad odd primes: at a bad prime the unique singular
//!   point sits at a root of g, so removing it exactly cancels the +1 it
//!   contributed to the count.
//! * The real period Ω_E = ∫_{E(ℝ)} |ω| via the arithmetic–geometric mean,
//!   covering both lattice shapes (Δ > 0: rectangular, two components and
//!   Ω_E doubles; Δ < 0: one component).
//! * The root number w_E, *detected* rather than assumed: the smoothed
//!   central-value formula is invariant under its split parameter only for
//!   the true sign, so evaluating two splits for each sign singles it out.

use rayon::prelude::*;

use crate::error::Error;
use crate::lvalue::truncation_length;
use crate::primes;
use crate::Result;

/// Point counting is Θ(p); refuse primes that would make a single a_p
/// take more than a fraction of a second.
pub const PRIME_LIMIT: u64 = 1 << 26;

/// Coefficient bound keeping every b-invariant product inside i128.
const A_INVARIANT_BOUND: u64 = 10_000;

/// Internal precision for root-number detection.
const DETECTION_EPS: f64 = 1e-9;

/// Second split value used to probe the functional equation.
const DETECTION_SPLIT: f64 = 1.3;

/// A rational elliptic curve with the analytic data the pipeline needs.
///
/// Construction always verifies the model (nonzero discriminant whose
/// prime support matches the conductor's) and always *detects* the root
/// number from the functional equation, so a stored sign can never drift
/// out of sync with the curve it belongs to.
#[derive(Debug, Clone)]
pub struct CurveData {
    pub label: String,
    /// (a₁, a₂, a₃, a₄, a₆).
    pub a_invariants: [i64; 5],
    pub conductor: u64,
    /// Sign of the functional equation, detected during construction.
    pub root_number: i8,
    /// Ω_E = ∫_{E(ℝ)} |ω|, both components when Δ > 0.
    pub real_period: f64,
    /// Discriminant of the model.
    pub discriminant: i128,
}

impl CurveData {
    /// Build a curve from its minimal model.  `root_number`, when given,
    /// is cross-checked against the detected sign and a mismatch is an
    /// error — it never overrides detection.
    pub fn new(
        label: &str,
        a: [i64; 5],
        conductor: u64,
        root_number: Option<i8>,
    ) -> Result<CurveData> {
        for &ai in &a {
            if ai.unsigned_abs() > A_INVARIANT_BOUND {
                return Err(Error::Catalogue(format!(
                    "{label}: coefficient {ai} out of range (|aᵢ| ≤ {A_INVARIANT_BOUND})"
                )));
            }
        }
        if conductor == 0 {
            return Err(Error::Catalogue(format!(
                "{label}: conductor must be positive"
            )));
        }
        if let Some(w) = root_number {
            if w != 1 && w != -1 {
                return Err(Error::InvalidRootNumber(w as i64));
            }
        }
        let discriminant = discriminant_of(a);
        if discriminant == 0 {
            return Err(Error::SingularCurve(label.to_string()));
        }
        let disc_abs = discriminant.unsigned_abs();
        if disc_abs > u64::MAX as u128 {
            return Err(Error::Catalogue(format!(
                "{label}: discriminant magnitude exceeds the validation range"
            )));
        }
        // For a minimal model the discriminant and the conductor share
        // exactly the same prime support; anything else means the model
        // (or the conductor) is wrong, and bad-prime a_p would come out
        // silently wrong downstream.
        let disc_primes: Vec<u64> = primes::factorize(disc_abs as u64)
            .into_iter()
            .map(|(p, _)| p)
            .collect();
        let cond_primes: Vec<u64> = primes::factorize(conductor)
            .into_iter()
            .map(|(p, _)| p)
            .collect();
        if disc_primes != cond_primes {
            return Err(Error::Catalogue(format!(
                "{label}: discriminant primes {disc_primes:?} disagree with conductor primes \
                 {cond_primes:?}; the model must be minimal"
            )));
        }

        let real_period = real_period_of(a, discriminant > 0)?;

        let sqrt_n = (conductor as f64).sqrt();
        let needed = truncation_length(sqrt_n, DETECTION_EPS, DETECTION_SPLIT);
        let table = coefficient_table(a, conductor, needed)?;
        let detected = detect_root_number(label, conductor, &table)?;
        if let Some(w) = root_number {
            if w != detected {
                return Err(Error::RootNumberMismatch {
                    label: label.to_string(),
                    supplied: w,
                    detected,
                });
            }
        }

        Ok(CurveData {
            label: label.to_string(),
            a_invariants: a,
            conductor,
            root_number: detected,
            real_period,
            discriminant,
        })
    }

    /// Dirichlet coefficients a₁ … a_{n_max}, prime values in parallel.
    pub fn coefficients(&self, n_max: u64) -> Result<CoefficientTable> {
        coefficient_table(self.a_invariants, self.conductor, n_max)
    }

    /// a_p for a single prime p.
    pub fn ap(&self, p: u64) -> Result<i64> {
        if p > PRIME_LIMIT {
            return Err(Error::PrimeTooLarge(p, PRIME_LIMIT));
        }
        Ok(ap_at_prime(self.a_invariants, self.conductor, p))
    }
}

/// Coefficient table: `values()[n]` is a_n, with a slot 0 fixed at zero.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    values: Vec<i64>,
}

impl CoefficientTable {
    pub fn n_max(&self) -> u64 {
        self.values.len() as u64 - 1
    }

    pub fn get(&self, n: u64) -> Result<i64> {
        self.values
            .get(n as usize)
            .copied()
            .ok_or(Error::InsufficientCoefficients {
                needed: n,
                have: self.n_max(),
            })
    }

    /// Raw slice for hot loops; index n holds a_n.
    pub fn values(&self) -> &[i64] {
        &self.values
    }
}

/// b-invariants of the model, in i64 (safe given `A_INVARIANT_BOUND`).
fn b_invariants(a: [i64; 5]) -> (i64, i64, i64, i64) {
    let [a1, a2, a3, a4, a6] = a;
    let b2 = a1 * a1 + 4 * a2;
    let b4 = 2 * a4 + a1 * a3;
    let b6 = a3 * a3 + 4 * a6;
    let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    (b2, b4, b6, b8)
}

fn discriminant_of(a: [i64; 5]) -> i128 {
    let (b2, b4, b6, b8) = b_invariants(a);
    let (b2, b4, b6, b8) = (b2 as i128, b4 as i128, b6 as i128, b8 as i128);
    -b2 * b2 * b8 - 8 * b4 * b4 * b4 - 27 * b6 * b6 + 9 * b2 * b4 * b6
}

fn coefficient_table(a: [i64; 5], conductor: u64, n_max: u64) -> Result<CoefficientTable> {
    if n_max > PRIME_LIMIT {
        return Err(Error::PrimeTooLarge(n_max, PRIME_LIMIT));
    }
    let mut values = vec![0i64; n_max as usize + 1];
    if n_max >= 1 {
        values[1] = 1;
    }
    let prime_values: Vec<(u64, i64)> = primes::sieve(n_max)
        .into_par_iter()
        .map(|p| (p, ap_at_prime(a, conductor, p)))
        .collect();
    for &(p, ap) in &prime_values {
        values[p as usize] = ap;
    }
    let spf = primes::spf_sieve(n_max);
    for n in 2..=n_max as usize {
        let p = spf[n] as usize;
        if p == n {
            continue; // prime, already placed
        }
        let mut q = p;
        let mut rest = n / p;
        while rest % p == 0 {
            q *= p;
            rest /= p;
        }
        values[n] = if rest > 1 {
            // coprime split n = q·rest; both factors already filled
            values[q] * values[rest]
        } else if conductor % p as u64 == 0 {
            // bad prime: a_{p^e} = a_p^e
            values[n / p] * values[p]
        } else {
            // Hecke recursion at a good prime
            values[n / p] * values[p] - p as i64 * values[n / (p * p)]
        };
    }
    Ok(CoefficientTable { values })
}

/// a_p at a single prime (good or bad), p ≤ `PRIME_LIMIT`.
fn ap_at_prime(a: [i64; 5], conductor: u64, p: u64) -> i64 {
    if p == 2 {
        return a2_by_enumeration(a, conductor);
    }
    let pm = p as i64;
    let (b2, b4, b6, _) = b_invariants(a);
    let c3 = 4 % p;
    let c2 = b2.rem_euclid(pm) as u64;
    let c1 = (2 * b4).rem_euclid(pm) as u64;
    let c0 = b6.rem_euclid(pm) as u64;

    // Bitmap of squares mod p (bit 0 marks zero as well; χ(0) is handled
    // separately below).
    let words = (p as usize + 63) / 64;
    let mut squares = vec![0u64; words];
    for x in 0..=p / 2 {
        let s = x * x % p;
        squares[(s / 64) as usize] |= 1 << (s % 64);
    }

    // a_p = −Σ_x χ(g(x)) with g = 4x³ + b₂x² + 2b₄x + b₆: counting the
    // solutions of u² = g(x) with u = 2y + a₁x + a₃.  At a bad prime the
    // singular point is the unique point over its x (u = 0 there), so the
    // same sum also yields p − #E^sm(𝔽_p).
    let mut sum: i64 = 0;
    for x in 0..p {
        let mut g = (c3 * x + c2) % p;
        g = (g * x + c1) % p;
        g = (g * x + c0) % p;
        if g != 0 {
            if squares[(g / 64) as usize] >> (g % 64) & 1 == 1 {
                sum += 1;
            } else {
                sum -= 1;
            }
        }
    }
    -sum
}

/// p = 2 by enumeration: four affine candidates, with the smoothness test
/// needed when the reduction is bad.
fn a2_by_enumeration(a: [i64; 5], conductor: u64) -> i64 {
    let [a1, a2, a3, a4, a6] = a;
    let mut affine = 0i64;
    let mut smooth = 0i64;
    for x in 0..2i64 {
        for y in 0..2i64 {
            let f = y * y + a1 * x * y + a3 * y - (((x + a2) * x + a4) * x + a6);
            if f.rem_euclid(2) == 0 {
                affine += 1;
                // mod 2 the partials collapse to F_y = a₁x + a₃ and
                // F_x = a₁y + x² + a₄
                let fy = (a1 * x + a3).rem_euclid(2);
                let fx = (a1 * y + x * x + a4).rem_euclid(2);
                if fy != 0 || fx != 0 {
                    smooth += 1;
                }
            }
        }
    }
    if conductor % 2 == 0 {
        2 - (1 + smooth) // p − #E^sm
    } else {
        2 + 1 - (1 + affine) // p + 1 − #E
    }
}

/// Arithmetic–geometric mean of two positive reals.
pub(crate) fn agm(mut a: f64, mut b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::AgmNoConvergence);
    }
    for _ in 0..80 {
        if (a - b).abs() <= 1e-15 * a.max(b) {
            return Ok(0.5 * (a + b));
        }
        let (na, nb) = (0.5 * (a + b), (a * b).sqrt());
        a = na;
        b = nb;
    }
    Err(Error::AgmNoConvergence)
}

/// Ω_E from the roots of the 2-division polynomial g(x)/4 = x³ + (b₂/4)x²
/// + (b₄/2)x + b₆/4.
///
/// Δ > 0, roots e₁ > e₂ > e₃:  Ω = 2π / agm(√(e₁−e₂), √(e₁−e₃)),
/// already counting both real components.
/// Δ < 0, real root e₁ and x² + sx + t irreducible:  with c = e₁ + s/2,
/// γ² = t − s²/4 and r = √(c² + γ²),  Ω = π / agm(√r, √((r+c)/2)).
fn real_period_of(a: [i64; 5], disc_positive: bool) -> Result<f64> {
    let (b2, b4, b6, _) = b_invariants(a);
    let c2 = b2 as f64 / 4.0;
    let c1 = b4 as f64 / 2.0;
    let c0 = b6 as f64 / 4.0;
    let h = |x: f64| ((x + c2) * x + c1) * x + c0;
    let dh = |x: f64| (3.0 * x + 2.0 * c2) * x + c1;
    let polish = |mut r: f64| {
        for _ in 0..3 {
            let d = dh(r);
            if d != 0.0 {
                r -= h(r) / d;
            }
        }
        r
    };

    // depressed cubic y³ + py + q via x = y − c₂/3
    let p = c1 - c2 * c2 / 3.0;
    let q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
    let shift = -c2 / 3.0;
    let pi = std::f64::consts::PI;

    if disc_positive {
        // three real roots, delivered in descending order by the cosine
        // parametrisation
        let m = 2.0 * (-p / 3.0).sqrt();
        let theta = (3.0 * q / (p * m)).clamp(-1.0, 1.0).acos() / 3.0;
        let tau = 2.0 * pi / 3.0;
        let e1 = polish(m * theta.cos() + shift);
        let e2 = polish(m * (theta - tau).cos() + shift);
        let e3 = polish(m * (theta - 2.0 * tau).cos() + shift);
        let mean = agm((e1 - e2).sqrt(), (e1 - e3).sqrt())?;
        Ok(2.0 * pi / mean)
    } else {
        // one real root by Cardano, the cancellation-free branch
        let half_q = -q / 2.0;
        let s = (q * q / 4.0 + p * p * p / 27.0).sqrt();
        let u = if half_q >= 0.0 {
            (half_q + s).cbrt()
        } else {
            (half_q - s).cbrt()
        };
        let y = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        let e1 = polish(y + shift);
        let s_lin = c2 + e1;
        let t_quad = c1 + e1 * s_lin;
        let c = e1 + s_lin / 2.0;
        let gamma2 = t_quad - s_lin * s_lin / 4.0;
        let r = (c * c + gamma2).sqrt();
        let mean = agm(r.sqrt(), ((r + c) / 2.0).sqrt())?;
        Ok(pi / mean)
    }
}

/// Decide w_E from the functional equation itself.
///
/// The smoothed central-value formula
/// L(1) = Σ (a_n/n)·e^{−n/(a·s)} + w · Σ (a_n/n)·e^{−na/s},  s = √N/2π,
/// holds for every split a > 0 — but only with the true sign.  Evaluating
/// at a = 1 and a = 1.3 for both candidate signs, exactly one difference
/// lands at roundoff level; anything else is reported, not guessed.
pub fn detect_root_number(label: &str, conductor: u64, table: &CoefficientTable) -> Result<i8> {
    let sqrt_n = (conductor as f64).sqrt();
    let scale = sqrt_n / (2.0 * std::f64::consts::PI);
    let needed = truncation_length(sqrt_n, DETECTION_EPS, DETECTION_SPLIT);
    if table.n_max() < needed {
        return Err(Error::InsufficientCoefficients {
            needed,
            have: table.n_max(),
        });
    }
    let smoothed = |sigma: f64| -> f64 {
        let v = table.values();
        let mut acc = 0.0;
        for n in 1..=needed as usize {
            acc += v[n] as f64 / n as f64 * (-(n as f64) / sigma).exp();
        }
        acc
    };
    let s_plain = smoothed(scale);
    let s_wide = smoothed(scale * DETECTION_SPLIT);
    let s_narrow = smoothed(scale / DETECTION_SPLIT);
    let diff = |w: f64| ((s_plain + w * s_plain) - (s_wide + w * s_narrow)).abs();
    let plus = diff(1.0);
    let minus = diff(-1.0);
    let tol = 10.0 * DETECTION_EPS;
    match (plus < tol, minus < tol) {
        (true, false) => Ok(1),
        (false, true) => Ok(-1),
        _ => Err(Error::IndeterminateRootNumber {
            label: label.to_string(),
            plus,
            minus,
        }),
    }
}
