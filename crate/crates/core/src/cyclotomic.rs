//! The real cyclotomic lattice ℤ[θ], θ = 2cos(2π/k), and its embedding.
//!
//! For odd prime k the ring ℤ[θ] (the ring of integers of ℚ(ζ_k)⁺) has
//! rank d = (k−1)/2 with power basis {1, θ, …, θ^{d−1}}.  Its archimedean
//! embedding sends x to (σ₁(x), …, σ_d(x)) with σ_t(θ) = 2cos(2πt/k);
//! the image is a full lattice in ℝ^d, spanned by the columns of the
//! Vandermonde-type matrix M_{tj} = σ_t(θ)^j, |det M|² = k^{(k−3)/2}.
//!
//! The vanishing decision rests on this lattice: an approximate embedding
//! vector is pulled back through M⁻¹, rounded to integer coordinates, and
//! the ∞-norm distance to that rounding — the *residual* — certifies the
//! identification.  The nested regions R ⊆ R₂ ⊆ R′ describe where in ℝ^d
//! a vector may land while still rounding unambiguously: R is the closed
//! fundamental cell of ℤ[α] (α the golden ratio, k = 5 only) spanned by
//! the embeddings of α and its conjugate, R₂ is the open box |vᵢ| < √5
//! (again k = 5), and R′ is the all-k box |vᵢ| ≤ B with B the largest
//! absolute row sum of M.

use crate::dirichlet::validate_order;
use crate::error::Error;
use crate::Result;

/// Element of ℤ[θ] in the power basis; `coords[j]` multiplies θ^j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealCycloElement {
    pub k: u64,
    pub coords: Vec<i64>,
}

impl RealCycloElement {
    pub fn zero(k: u64) -> RealCycloElement {
        RealCycloElement {
            k,
            coords: vec![0; degree(k)],
        }
    }

    pub fn from_coords(k: u64, coords: Vec<i64>) -> RealCycloElement {
        assert_eq!(coords.len(), degree(k));
        RealCycloElement { k, coords }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &RealCycloElement) -> RealCycloElement {
        assert_eq!(self.k, other.k);
        RealCycloElement {
            k: self.k,
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Product in ℤ[θ]: schoolbook product reduced modulo the (monic)
    /// minimal polynomial of θ.
    pub fn mul(&self, other: &RealCycloElement) -> RealCycloElement {
        assert_eq!(self.k, other.k);
        let d = degree(self.k);
        let mut full = vec![0i64; 2 * d - 1];
        for (i, &a) in self.coords.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coords.iter().enumerate() {
                full[i + j] += a * b;
            }
        }
        let psi = minimal_polynomial(self.k);
        for deg in (d..full.len()).rev() {
            let c = full[deg];
            if c != 0 {
                full[deg] = 0;
                for (j, &pj) in psi.iter().enumerate().take(d) {
                    full[deg - d + j] -= c * pj;
                }
            }
        }
        full.truncate(d);
        RealCycloElement {
            k: self.k,
            coords: full,
        }
    }
}

/// d = (k−1)/2, the degree of ℚ(θ)/ℚ.
pub fn degree(k: u64) -> usize {
    ((k - 1) / 2) as usize
}

/// Minimal polynomial ψ_k of θ = 2cos(2π/k), ascending coefficients,
/// monic of degree d.  Built from 1 + Σ_{j=1}^{d} v_j where the v_j
/// satisfy v_{j+1} = x·v_j − v_{j−1}, v₀ = 2, v₁ = x — so that
/// v_j(2cos φ) = 2cos(jφ) and ψ_k(σ_t(θ)) resums the k-th roots of
/// unity to zero.
pub fn minimal_polynomial(k: u64) -> Vec<i64> {
    let d = degree(k);
    let mut prev = vec![0i64; d + 1]; // v₀ = 2
    prev[0] = 2;
    let mut cur = vec![0i64; d + 1]; // v₁ = x
    cur[1] = 1;
    let mut psi = vec![0i64; d + 1];
    psi[0] = 1;
    for j in 1..=d {
        if j > 1 {
            // v_{j} = x·v_{j−1} − v_{j−2}
            let mut next = vec![0i64; d + 1];
            for (i, &c) in cur.iter().enumerate().take(d) {
                next[i + 1] = c;
            }
            for (i, &c) in prev.iter().enumerate() {
                next[i] -= c;
            }
            prev = std::mem::replace(&mut cur, next);
        }
        for (s, &c) in psi.iter_mut().zip(&cur) {
            *s += c;
        }
    }
    psi
}

/// σ_t(θ) = 2cos(2πt/k) for t = 1 … d.
pub fn theta_values(k: u64) -> Vec<f64> {
    (1..=degree(k) as u64)
        .map(|t| 2.0 * (2.0 * std::f64::consts::PI * t as f64 / k as f64).cos())
        .collect()
}

/// Largest absolute row sum of the embedding matrix: the box R′ has
/// half-width B, and every embedding of an element with coefficients in
/// [−1, 1] lands inside it.
pub fn embedding_bound(k: u64) -> f64 {
    let d = degree(k);
    theta_values(k)
        .iter()
        .map(|&t| {
            (0..d)
                .map(|j| t.abs().powi(j as i32))
                .sum::<f64>()
        })
        .fold(0.0f64, f64::max)
}

/// The embedding matrix M and its inverse, for rounding embedding
/// vectors back to lattice coordinates.
#[derive(Debug, Clone)]
pub struct EmbeddingMatrix {
    pub k: u64,
    pub dim: usize,
    matrix: Vec<f64>, // row-major d×d
    inverse: Vec<f64>,
    pub det: f64,
}

impl EmbeddingMatrix {
    pub fn new(k: u64) -> Result<EmbeddingMatrix> {
        validate_order(k)?;
        let d = degree(k);
        let mut matrix = vec![0.0; d * d];
        for (t, &theta) in theta_values(k).iter().enumerate() {
            for j in 0..d {
                matrix[t * d + j] = theta.powi(j as i32);
            }
        }
        let (inverse, det) = invert(&matrix, d)?;
        Ok(EmbeddingMatrix {
            k,
            dim: d,
            matrix,
            inverse,
            det,
        })
    }

    /// (σ₁(x), …, σ_d(x)).
    pub fn embed(&self, x: &RealCycloElement) -> Vec<f64> {
        assert_eq!(x.k, self.k);
        (0..self.dim)
            .map(|i| {
                x.coords
                    .iter()
                    .enumerate()
                    .map(|(j, &c)| self.matrix[i * self.dim + j] * c as f64)
                    .sum()
            })
            .collect()
    }

    /// Exact (floating) power-basis coefficients M⁻¹·v of an embedding
    /// vector.
    pub fn coefficients_from(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                v.iter()
                    .enumerate()
                    .map(|(j, &x)| self.inverse[i * self.dim + j] * x)
                    .sum()
            })
            .collect()
    }

    /// Round an approximate embedding vector to the nearest lattice
    /// element; the residual is the ∞-norm distance of the coefficient
    /// vector to the integers, the certificate of the identification.
    pub fn round_to_lattice(&self, v: &[f64]) -> (RealCycloElement, f64) {
        let coeffs = self.coefficients_from(v);
        let mut coords = Vec::with_capacity(self.dim);
        let mut residual = 0.0f64;
        for c in coeffs {
            let r = c.round();
            residual = residual.max((c - r).abs());
            coords.push(r as i64);
        }
        (
            RealCycloElement {
                k: self.k,
                coords,
            },
            residual,
        )
    }
}

/// Gauss–Jordan with partial pivoting; returns (inverse, determinant).
fn invert(matrix: &[f64], d: usize) -> Result<(Vec<f64>, f64)> {
    let mut a = matrix.to_vec();
    let mut inv = vec![0.0; d * d];
    for i in 0..d {
        inv[i * d + i] = 1.0;
    }
    let mut det = 1.0;
    for col in 0..d {
        let pivot_row = (col..d)
            .max_by(|&r, &s| {
                a[r * d + col]
                    .abs()
                    .total_cmp(&a[s * d + col].abs())
            })
            .unwrap();
        if a[pivot_row * d + col].abs() < 1e-12 {
            return Err(Error::Config(format!(
                "embedding matrix is numerically singular at column {col}"
            )));
        }
        if pivot_row != col {
            for j in 0..d {
                a.swap(col * d + j, pivot_row * d + j);
                inv.swap(col * d + j, pivot_row * d + j);
            }
            det = -det;
        }
        let pivot = a[col * d + col];
        det *= pivot;
        for j in 0..d {
            a[col * d + j] /= pivot;
            inv[col * d + j] /= pivot;
        }
        for row in 0..d {
            if row != col {
                let factor = a[row * d + col];
                if factor != 0.0 {
                    for j in 0..d {
                        a[row * d + j] -= factor * a[col * d + j];
                        inv[row * d + j] -= factor * inv[col * d + j];
                    }
                }
            }
        }
    }
    Ok((inv, det))
}

/// Certification regions in embedding space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// R: closed fundamental cell of ℤ[α] spanned by the embeddings of
    /// the golden ratio α and its conjugate; k = 5 only.
    LatticeCell,
    /// R₁: open unit box |vᵢ| < 1, any k.
    InnerBox,
    /// R₂: open box |vᵢ| < √5; k = 5 only.
    OuterBox,
    /// R′: closed box |vᵢ| ≤ B(k) with B the largest row sum of |M|.
    RowSumBox,
}

impl Region {
    pub fn contains(&self, k: u64, v: &[f64]) -> Result<bool> {
        validate_order(k)?;
        if v.len() != degree(k) {
            return Err(Error::Config(format!(
                "embedding vector has dimension {}, expected {}",
                v.len(),
                degree(k)
            )));
        }
        match self {
            Region::LatticeCell => {
                if k != 5 {
                    return Err(Error::RegionUndefined {
                        region: "R (lattice cell)".into(),
                        k,
                    });
                }
                // coefficients over the basis {φ(α), φ(ᾱ)} with
                // α = (1+√5)/2: unimodular over the power basis, and
                // the cell is |a|, |b| ≤ 1/2
                let s5 = 5.0f64.sqrt();
                let alpha = (1.0 + s5) / 2.0;
                let alpha_bar = (1.0 - s5) / 2.0;
                let a = (alpha * v[0] - alpha_bar * v[1]) / s5;
                let b = (alpha * v[1] - alpha_bar * v[0]) / s5;
                Ok(a.abs() <= 0.5 && b.abs() <= 0.5)
            }
            Region::InnerBox => Ok(v.iter().all(|x| x.abs() < 1.0)),
            Region::OuterBox => {
                if k != 5 {
                    return Err(Error::RegionUndefined {
                        region: "R₂ (outer box)".into(),
                        k,
                    });
                }
                Ok(v.iter().all(|x| x.abs() < 5.0f64.sqrt()))
            }
            Region::RowSumBox => {
                let b = embedding_bound(k);
                Ok(v.iter().all(|x| x.abs() <= b))
            }
        }
    }
}
