//! Dirichlet characters of odd prime order k.
//!
//! A primitive character of order k exists modulo m exactly when every
//! prime-power factor of m carries one: m must be a squarefree product of
//! primes p ≡ 1 (mod k), times an optional factor k² (never k¹, never k³).
//! Such characters come in Galois orbits {χᵘ : 1 ≤ u ≤ k−1} of size k−1,
//! and all central values inside one orbit are algebraically conjugate —
//! so the survey works orbit by orbit, (k−1)^{r−1} orbits for an m with
//! r factors.
//!
//! Each factor p^e gets a discrete-log-mod-k table over a fixed generator
//! (the smallest one, so everything is deterministic), and
//!     χ(a) = ξ_k^{Σ_f t_f·dlog_f(a)},   ξ_k = e^{2πi/k},
//! with exponents t_f ∈ {1, …, k−1}.  The canonical orbit representative
//! has t = 1 on the first factor; the class id is the lexicographic rank
//! of the remaining exponents.  Because 2 ∤ k, every such χ is even.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Error;
use crate::primes;
use crate::Result;

/// Largest supported character order; rounding certification in the
/// cyclotomic lattice loses ground as (k−1)/2 grows, and surveys live at
/// k ∈ {3, 5, 7} anyway.
pub const MAX_ORDER: u64 = 31;

pub(crate) fn validate_order(k: u64) -> Result<()> {
    if k < 3 || k > MAX_ORDER || !primes::is_prime(k) || k % 2 == 0 {
        return Err(Error::Config(format!(
            "order k must be an odd prime in [3, {MAX_ORDER}], got {k}"
        )));
    }
    Ok(())
}

/// A conductor admissible for order k, with its factorisation
/// (ascending primes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConductorFactorization {
    pub m: u64,
    pub factors: Vec<(u64, u32)>,
}

/// All admissible conductors m ≤ x_max for order k, ascending.
pub fn admissible_conductors(k: u64, x_max: u64) -> Result<Vec<ConductorFactorization>> {
    validate_order(k)?;
    let split_primes: Vec<u64> = primes::sieve(x_max)
        .into_iter()
        .filter(|&p| p % k == 1)
        .collect();

    // squarefree products of split primes, empty product included
    let mut products: Vec<(u64, Vec<(u64, u32)>)> = Vec::new();
    let mut stack: Vec<(u64, u32)> = Vec::new();
    fn rec(
        primes: &[u64],
        start: usize,
        prod: u64,
        cap: u64,
        stack: &mut Vec<(u64, u32)>,
        out: &mut Vec<(u64, Vec<(u64, u32)>)>,
    ) {
        out.push((prod, stack.clone()));
        for (i, &p) in primes.iter().enumerate().skip(start) {
            if prod > cap / p {
                break; // primes ascend, so every later product only grows
            }
            stack.push((p, 1));
            rec(primes, i + 1, prod * p, cap, stack, out);
            stack.pop();
        }
    }
    rec(&split_primes, 0, 1, x_max, &mut stack, &mut products);

    let k2 = k * k;
    let mut out: Vec<ConductorFactorization> = Vec::new();
    for (m0, factors) in products {
        if m0 > 1 {
            out.push(ConductorFactorization {
                m: m0,
                factors: factors.clone(),
            });
        }
        if k2 <= x_max / m0 {
            let mut with_k2 = factors.clone();
            with_k2.push((k, 2));
            with_k2.sort_unstable();
            out.push(ConductorFactorization {
                m: m0 * k2,
                factors: with_k2,
            });
        }
    }
    out.sort_unstable_by_key(|c| c.m);
    Ok(out)
}

/// Validate and factor a single conductor for order k.
pub fn factor_conductor(k: u64, m: u64) -> Result<ConductorFactorization> {
    validate_order(k)?;
    let factors = primes::factorize(m);
    let admissible = m > 1
        && factors
            .iter()
            .all(|&(p, e)| (p % k == 1 && e == 1) || (p == k && e == 2));
    if !admissible {
        return Err(Error::NoPrimitiveCharacter { k, m });
    }
    Ok(ConductorFactorization { m, factors })
}

/// Discrete logarithms mod k over one prime-power factor.
#[derive(Debug)]
pub struct FactorTable {
    pub prime: u64,
    pub exponent: u32,
    pub modulus: u64,
    pub generator: u64,
    /// dlog_mod_k[a] for a in [0, p^e), −1 at non-units.
    dlog_mod_k: Vec<i8>,
}

impl FactorTable {
    fn build(k: u64, p: u64, e: u32) -> Arc<FactorTable> {
        let modulus = p.pow(e);
        let phi = primes::totient_prime_power(p, e);
        let generator = smallest_generator(p, e);
        let mut dlog_mod_k = vec![-1i8; modulus as usize];
        let mut x = 1u64;
        for i in 0..phi {
            dlog_mod_k[x as usize] = (i % k) as i8;
            x = x * generator % modulus;
        }
        assert_eq!(x, 1, "generator order mismatch at {p}^{e}");
        Arc::new(FactorTable {
            prime: p,
            exponent: e,
            modulus,
            generator,
            dlog_mod_k,
        })
    }

    fn dlog(&self, a: u64) -> i8 {
        self.dlog_mod_k[(a % self.modulus) as usize]
    }
}

/// Smallest generator of (ℤ/p^e)^×, p odd, by direct order testing.
fn smallest_generator(p: u64, e: u32) -> u64 {
    let modulus = p.pow(e);
    let phi = primes::totient_prime_power(p, e);
    let phi_primes: Vec<u64> = primes::factorize(phi).into_iter().map(|(q, _)| q).collect();
    (2..modulus)
        .find(|&g| {
            g % p != 0
                && phi_primes
                    .iter()
                    .all(|&q| primes::pow_mod(g, phi / q, modulus) != 1)
        })
        .expect("cyclic group has a generator")
}

/// One character of order dividing k: exponents t_f over shared factor
/// tables.  `trivial()` gives the order-1 character of modulus 1, which
/// makes the untwisted L-value just another run of the same machinery.
#[derive(Debug, Clone)]
pub struct CharacterSpec {
    pub k: u64,
    pub modulus: u64,
    pub factors: Vec<(u64, u32)>,
    pub exponents: Vec<u8>,
    tables: Vec<Arc<FactorTable>>,
}

impl CharacterSpec {
    pub fn trivial(k: u64) -> CharacterSpec {
        CharacterSpec {
            k,
            modulus: 1,
            factors: Vec::new(),
            exponents: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn order(&self) -> u64 {
        if self.exponents.iter().any(|&t| t != 0) {
            self.k
        } else {
            1
        }
    }

    /// Exponent j with χ(a) = ξ_k^j, or None when gcd(a, m) > 1.
    pub fn exponent_of(&self, a: u64) -> Option<u8> {
        let mut acc = 0u64;
        for (table, &t) in self.tables.iter().zip(&self.exponents) {
            let d = table.dlog(a);
            if d < 0 {
                return None;
            }
            acc = (acc + t as u64 * d as u64) % self.k;
        }
        Some(acc as u8)
    }

    pub fn eval(&self, a: u64) -> Complex64 {
        match self.exponent_of(a) {
            None => Complex64::new(0.0, 0.0),
            Some(j) => root_of_unity(self.k, j as u64),
        }
    }

    /// χᵘ, sharing the factor tables.
    pub fn power(&self, u: u64) -> CharacterSpec {
        let exponents = self
            .exponents
            .iter()
            .map(|&t| ((t as u64 * u) % self.k) as u8)
            .collect();
        CharacterSpec {
            k: self.k,
            modulus: self.modulus,
            factors: self.factors.clone(),
            exponents,
            tables: self.tables.clone(),
        }
    }

    /// Exponent of χ(a) for every residue a mod m; −1 at non-units.
    /// `[0]` for the trivial character, so χ(n) = 1 for all n ≥ 1.
    pub fn exponent_table(&self) -> Vec<i8> {
        let m = self.modulus as usize;
        let mut out = vec![0i8; m];
        for (table, &t) in self.tables.iter().zip(&self.exponents) {
            for (a, slot) in out.iter_mut().enumerate() {
                if *slot < 0 {
                    continue;
                }
                let d = table.dlog(a as u64);
                *slot = if d < 0 {
                    -1
                } else {
                    ((*slot as u64 + t as u64 * d as u64) % self.k) as i8
                };
            }
        }
        out
    }

    /// Class descriptor, e.g. `m=63;factors=3^2*7^1;t=1,2`.
    pub fn spec_string(&self) -> String {
        let factors = self
            .factors
            .iter()
            .map(|(p, e)| format!("{p}^{e}"))
            .collect::<Vec<_>>()
            .join("*");
        let ts = self
            .exponents
            .iter()
            .map(|t| t.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!("m={};factors={factors};t={ts}", self.modulus)
    }
}

pub(crate) fn root_of_unity(k: u64, j: u64) -> Complex64 {
    let angle = 2.0 * std::f64::consts::PI * (j % k) as f64 / k as f64;
    Complex64::new(angle.cos(), angle.sin())
}

/// ξ_k^e for a signed exponent.
pub(crate) fn root_of_unity_signed(k: u64, e: i64) -> Complex64 {
    root_of_unity(k, e.rem_euclid(k as i64) as u64)
}

/// One Galois orbit of primitive order-k characters.
#[derive(Debug, Clone)]
pub struct ConjugacyClass {
    pub representative: CharacterSpec,
    pub class_id: u64,
}

impl ConjugacyClass {
    pub fn class_size(&self) -> u64 {
        self.representative.k - 1
    }
}

/// All conjugacy classes of primitive order-k characters mod m, ordered
/// by class id (lexicographic in the non-leading exponents).
pub fn conjugacy_classes(k: u64, conductor: &ConductorFactorization) -> Result<Vec<ConjugacyClass>> {
    validate_order(k)?;
    let tables: Vec<Arc<FactorTable>> = conductor
        .factors
        .iter()
        .map(|&(p, e)| FactorTable::build(k, p, e))
        .collect();
    let r = conductor.factors.len();
    if r == 0 {
        return Err(Error::NoPrimitiveCharacter { k, m: conductor.m });
    }
    let class_count = (k - 1).pow(r as u32 - 1);
    let mut out = Vec::with_capacity(class_count as usize);
    for class_id in 0..class_count {
        // decode lexicographic rank into exponents t₂…t_r ∈ {1…k−1}
        let mut exponents = vec![1u8];
        let mut rank = class_id;
        let mut place = class_count;
        for _ in 1..r {
            place /= k - 1;
            exponents.push((rank / place + 1) as u8);
            rank %= place;
        }
        out.push(ConjugacyClass {
            representative: CharacterSpec {
                k,
                modulus: conductor.m,
                factors: conductor.factors.clone(),
                exponents,
                tables: tables.clone(),
            },
            class_id,
        });
    }
    Ok(out)
}

/// Gauss sums τ(χᵘ) for u = 0 … k−1, all from one pass over the residues:
/// bucket the additive exponentials by the dlog exponent,
/// G_j = Σ_{χ(a) = ξ^j} e^{2πia/m}, then τ(χᵘ) = Σ_j ξ^{uj} G_j.
pub fn gauss_sums(spec: &CharacterSpec) -> Vec<Complex64> {
    let k = spec.k;
    let m = spec.modulus;
    let table = spec.exponent_table();
    let mut buckets = vec![Complex64::new(0.0, 0.0); k as usize];
    for (a, &j) in table.iter().enumerate() {
        if j >= 0 {
            let angle = 2.0 * std::f64::consts::PI * a as f64 / m as f64;
            buckets[j as usize] += Complex64::new(angle.cos(), angle.sin());
        }
    }
    (0..k)
        .map(|u| {
            (0..k)
                .map(|j| root_of_unity(k, u * j % k) * buckets[j as usize])
                .sum()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::gcd;

    #[test]
    fn order_validation() {
        for bad in [0, 1, 2, 4, 9, 15, 33, 37] {
            // 37 > MAX_ORDER; the rest are not odd primes
            assert!(validate_order(bad).is_err(), "{bad}");
        }
        for good in [3, 5, 7, 11, 13, 31] {
            assert!(validate_order(good).is_ok(), "{good}");
        }
    }

    #[test]
    fn admissible_conductor_lists() {
        let ms = |k, x| {
            admissible_conductors(k, x)
                .unwrap()
                .into_iter()
                .map(|c| c.m)
                .collect::<Vec<_>>()
        };
        // hand-enumerated: primes ≡ 1 (k), their squarefree products, and k²·(the same)
        assert_eq!(
            ms(3, 100),
            [7, 9, 13, 19, 31, 37, 43, 61, 63, 67, 73, 79, 91, 97]
        );
        assert_eq!(ms(5, 100), [11, 25, 31, 41, 61, 71]);
        assert_eq!(ms(7, 150), [29, 43, 49, 71, 113, 127]);
        // factorisations come back sorted by prime
        let c63 = admissible_conductors(3, 63)
            .unwrap()
            .into_iter()
            .find(|c| c.m == 63)
            .unwrap();
        assert_eq!(c63.factors, [(3, 2), (7, 1)]);
    }

    #[test]
    fn conductor_admissibility() {
        for (k, m) in [(3, 63), (3, 9), (3, 91), (5, 25), (5, 11), (7, 49), (7, 29)] {
            assert!(factor_conductor(k, m).is_ok(), "{k},{m}");
        }
        for (k, m) in [
            (3, 21), // 3¹·7: k to the first power
            (3, 27), // k³
            (3, 49), // square of a split prime
            (3, 11), // 11 ≡ 2 (mod 3)
            (3, 1),
            (5, 7),
            (3, 14), // even
        ] {
            assert!(
                matches!(
                    factor_conductor(k, m),
                    Err(Error::NoPrimitiveCharacter { .. })
                ),
                "{k},{m}"
            );
        }
    }

    #[test]
    fn smallest_generators() {
        // classical smallest primitive roots
        assert_eq!(smallest_generator(7, 1), 3);
        assert_eq!(smallest_generator(13, 1), 2);
        assert_eq!(smallest_generator(3, 2), 2);
        assert_eq!(smallest_generator(11, 1), 2);
    }

    /// Everything at once against brute force: multiplicativity as a
    /// function, exact order, primitivity, orbit structure, and the
    /// character count (k−1)^r with (k−1)^{r−1} canonical classes.
    #[test]
    fn classes_survive_brute_force_audit() {
        for (k, m) in [(3u64, 63u64), (3, 91), (3, 9), (5, 11), (7, 29)] {
            let conductor = factor_conductor(k, m).unwrap();
            let r = conductor.factors.len();
            let classes = conjugacy_classes(k, &conductor).unwrap();
            assert_eq!(classes.len(), (k - 1).pow(r as u32 - 1) as usize);

            let value_vector = |spec: &CharacterSpec| -> Vec<Option<u8>> {
                (0..m).map(|a| spec.exponent_of(a)).collect()
            };

            let mut all_seen: Vec<Vec<Option<u8>>> = Vec::new();
            for (idx, class) in classes.iter().enumerate() {
                let rep = &class.representative;
                assert_eq!(class.class_id, idx as u64);
                assert_eq!(rep.exponents[0], 1, "canonical rep leads with t=1");
                assert_eq!(rep.order(), k);

                // χ(ab) = χ(a)χ(b) for every coprime pair, as exponents mod k
                for a in 1..m {
                    if gcd(a, m) != 1 {
                        assert_eq!(rep.exponent_of(a), None);
                        continue;
                    }
                    for b in a..m {
                        if gcd(b, m) == 1 {
                            let lhs = rep.exponent_of(a * b % m).unwrap() as u64;
                            let rhs =
                                (rep.exponent_of(a).unwrap() as u64 + rep.exponent_of(b).unwrap() as u64) % k;
                            assert_eq!(lhs, rhs, "k={k} m={m} a={a} b={b}");
                        }
                    }
                }

                // primitivity: on each factor there is a ≡ 1 (mod m/p^e)
                // with χ(a) ≠ 1
                for &(p, e) in &conductor.factors {
                    let cofactor = m / p.pow(e);
                    let witness = (1..m).any(|a| {
                        a % cofactor == 1 % cofactor
                            && gcd(a, m) == 1
                            && rep.exponent_of(a) != Some(0)
                    });
                    assert!(witness, "k={k} m={m}: trivial on factor {p}^{e}");
                }

                // the orbit: k−1 distinct functions, exactly one canonical
                let mut canonical_in_orbit = 0;
                for u in 1..k {
                    let pow = rep.power(u);
                    let vv = value_vector(&pow);
                    assert!(!all_seen.contains(&vv), "orbits overlap");
                    if pow.exponents[0] == 1 {
                        canonical_in_orbit += 1;
                        assert_eq!(pow.exponents, rep.exponents);
                    }
                    all_seen.push(vv);
                }
                assert_eq!(canonical_in_orbit, 1);
            }
            assert_eq!(all_seen.len(), (k - 1).pow(r as u32) as usize);

            // χ(−1) = 1: order-k characters are even
            for class in &classes {
                assert_eq!(class.representative.exponent_of(m - 1), Some(0));
            }
        }
    }

    #[test]
    fn exponent_table_matches_pointwise() {
        let conductor = factor_conductor(3, 63).unwrap();
        for class in conjugacy_classes(3, &conductor).unwrap() {
            let rep = class.representative;
            let table = rep.exponent_table();
            assert_eq!(table.len(), 63);
            for a in 0..63 {
                match rep.exponent_of(a) {
                    None => assert_eq!(table[a as usize], -1),
                    Some(j) => assert_eq!(table[a as usize], j as i8),
                }
            }
        }
    }

    #[test]
    fn gauss_sums_match_direct_sum_and_magnitude() {
        for (k, m) in [(3u64, 7u64), (3, 9), (3, 63), (5, 11), (7, 29)] {
            let conductor = factor_conductor(k, m).unwrap();
            for class in conjugacy_classes(k, &conductor).unwrap() {
                let rep = class.representative;
                let sums = gauss_sums(&rep);
                for u in 1..k {
                    // direct τ(χᵘ) through eval, no buckets involved
                    let direct: Complex64 = (0..m)
                        .map(|a| {
                            rep.power(u).eval(a)
                                * root_of_unity(m, a) // e^{2πia/m}: root_of_unity(m, a)
                        })
                        .sum();
                    let fast = sums[u as usize];
                    assert!(
                        (fast - direct).norm() < 1e-9,
                        "k={k} m={m} u={u}: {fast} vs {direct}"
                    );
                    // |τ(χᵘ)|² = m for primitive characters
                    assert!((fast.norm_sqr() - m as f64).abs() < 1e-9);
                    // τ(χ̄) = conj(τ(χ)) since χ is even
                    let conj_pair = sums[(k - u) as usize];
                    assert!((conj_pair - fast.conj()).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn trivial_character_is_the_unit() {
        let triv = CharacterSpec::trivial(5);
        assert_eq!(triv.modulus, 1);
        assert_eq!(triv.order(), 1);
        assert_eq!(triv.exponent_table(), vec![0]);
        for n in 1..20 {
            assert_eq!(triv.exponent_of(n), Some(0));
            assert!((triv.eval(n) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn spec_strings() {
        let conductor = factor_conductor(3, 63).unwrap();
        let classes = conjugacy_classes(3, &conductor).unwrap();
        assert_eq!(
            classes[0].representative.spec_string(),
            "m=63;factors=3^2*7^1;t=1,1"
        );
        assert_eq!(
            classes[1].representative.spec_string(),
            "m=63;factors=3^2*7^1;t=1,2"
        );
    }
}
