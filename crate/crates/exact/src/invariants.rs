//! Equivariant invariants of the weighted vortex problem via the family
//! index theorem and localization.
//!
//! Pipeline, all in exact rational arithmetic:
//!   c1(L^k) = k(sum_j alpha_j tau_j + d sigma)
//!   ch(Ind^k) = int_Sigma td(T Sigma) ch(L^k)        (fibre integration)
//!   ch -> c via Newton's identities                   (no shortcut assumed)
//!   c(Ind^k, eta) = sum_j eta^{rank-j} c_j            (Chern series)
//!   Phi = int_{T^{2g}} prod_nu c(Ind^{l_nu}, l_nu)^{-1}
//!
//! The closed form (sum l_nu)^g prod l_nu^{-d l_nu + g - 1} is kept as an
//! independent check, never substituted for the pipeline.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::cohomology::{
    c1_universal, rat_int, todd_t_sigma, CohomologyError, Rat, RingElement,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InvariantError {
    #[error("weights must be positive integers")]
    BadWeights,
    #[error("insertion count m = {m} is negative: outside the Theorem B chamber")]
    NegativeInsertions { m: i64 },
    #[error("Chern series requires eta != 0")]
    ZeroEta,
    #[error("fibre-integrated Chern character is not a polynomial in Omega")]
    NotOmegaPolynomial,
    #[error("rank mismatch in family index: expected {expected}, computed {computed}")]
    RankMismatch { expected: i64, computed: String },
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
}

/// Truncated polynomial in Q[Omega]/(Omega^{g+1}), coefficient of Omega^j at
/// index j.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OmegaSeries {
    genus: u32,
    coeffs: Vec<Rat>,
}

impl OmegaSeries {
    pub fn zero(genus: u32) -> Self {
        OmegaSeries {
            genus,
            coeffs: vec![Rat::zero(); genus as usize + 1],
        }
    }

    pub fn scalar(genus: u32, c: Rat) -> Self {
        let mut s = Self::zero(genus);
        s.coeffs[0] = c;
        s
    }

    pub fn one(genus: u32) -> Self {
        Self::scalar(genus, Rat::one())
    }

    pub fn from_coeffs(genus: u32, mut coeffs: Vec<Rat>) -> Self {
        coeffs.resize(genus as usize + 1, Rat::zero());
        OmegaSeries { genus, coeffs }
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn coeff(&self, j: usize) -> Rat {
        self.coeffs.get(j).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn scale(&self, c: &Rat) -> Self {
        OmegaSeries {
            genus: self.genus,
            coeffs: self.coeffs.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.genus, other.genus);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.clone() + b.clone())
            .collect();
        OmegaSeries {
            genus: self.genus,
            coeffs,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.genus, other.genus);
        let n = self.coeffs.len();
        let mut coeffs = vec![Rat::zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j >= n || b.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].clone() + a.clone() * b.clone();
            }
        }
        OmegaSeries {
            genus: self.genus,
            coeffs,
        }
    }

    /// Multiplicative inverse of a unit (nonzero scalar part).
    pub fn invert(&self) -> Result<Self, InvariantError> {
        let c0 = self.coeff(0);
        if c0.is_zero() {
            return Err(InvariantError::ZeroEta);
        }
        let n = self.coeffs.len();
        let mut inv = vec![Rat::zero(); n];
        inv[0] = Rat::one() / c0.clone();
        for j in 1..n {
            // c0 * inv_j = - sum_{i=1}^{j} coeff_i * inv_{j-i}
            let mut acc = Rat::zero();
            for i in 1..=j {
                acc = acc + self.coeff(i) * inv[j - i].clone();
            }
            inv[j] = -acc / c0.clone();
        }
        Ok(OmegaSeries {
            genus: self.genus,
            coeffs: inv,
        })
    }

    /// exp of a series with zero scalar part.
    pub fn exp(&self) -> Self {
        assert!(self.coeff(0).is_zero());
        let mut result = Self::one(self.genus);
        let mut term = Self::one(self.genus);
        for k in 1..=(self.genus as i64 + 1) {
            term = term.mul(self).scale(&(Rat::one() / rat_int(k)));
            if term.coeffs.iter().all(Rat::is_zero) {
                break;
            }
            result = result.add(&term);
        }
        result
    }

    /// Integral over T^{2g}: only Omega^g contributes, with int Omega^g = g!.
    pub fn integrate_torus(&self) -> Rat {
        self.coeff(self.genus as usize) * factorial(self.genus as i64)
    }

    /// Lift into the full ring H*(T^{2g}).
    pub fn to_ring_element(&self) -> RingElement {
        let g = self.genus;
        let omega = RingElement::omega(g);
        let mut out = RingElement::zero(g);
        let mut pow = RingElement::one(g);
        for c in &self.coeffs {
            out = out.add(&pow.scale(c)).unwrap();
            pow = pow.mul(&omega).unwrap();
        }
        out
    }
}

pub fn factorial(n: i64) -> Rat {
    let mut f = Rat::one();
    for j in 2..=n {
        f = f * rat_int(j);
    }
    f
}

/// Exact integer power of a rational, negative exponents allowed.
pub fn rational_pow(base: &Rat, exp: i64) -> Rat {
    if exp == 0 {
        return Rat::one();
    }
    let mut b = if exp > 0 {
        base.clone()
    } else {
        Rat::one() / base.clone()
    };
    let mut e = exp.unsigned_abs();
    let mut acc = Rat::one();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b.clone();
        }
        b = b.clone() * b;
        e >>= 1;
    }
    acc
}

/// Rank and Chern-class data of the family index Ind^k over T^{2g}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FamilyIndex {
    pub rank: i64,
    /// Total Chern class 1 + c_1 + ... in Q[Omega]/(Omega^{g+1}).
    pub chern: OmegaSeries,
    /// Chern character as computed by the fibre integration (kept for
    /// round-trip checks).
    pub ch: OmegaSeries,
}

/// Newton's identities, elementary-symmetric from power sums:
/// j e_j = sum_{i=1}^{j} (-1)^{i-1} e_{j-i} p_i, everything graded by
/// Omega-degree.
pub fn chern_from_character(genus: u32, rank: i64, ch: &OmegaSeries) -> OmegaSeries {
    let g = genus as usize;
    // p_i = i! ch_i as Omega^i coefficients
    let mut p = vec![Rat::zero(); g + 1];
    for i in 1..=g {
        p[i] = ch.coeff(i) * factorial(i as i64);
    }
    let mut e = vec![Rat::zero(); g + 1];
    e[0] = Rat::one();
    for j in 1..=g {
        let mut acc = Rat::zero();
        for i in 1..=j {
            let term = e[j - i].clone() * p[i].clone();
            if i % 2 == 1 {
                acc = acc + term;
            } else {
                acc = acc - term;
            }
        }
        e[j] = acc / rat_int(j as i64);
    }
    let _ = rank;
    OmegaSeries::from_coeffs(genus, e)
}

/// Inverse direction: power sums from elementary symmetric functions,
/// ch_0 = rank.
pub fn character_from_chern(genus: u32, rank: i64, chern: &OmegaSeries) -> OmegaSeries {
    let g = genus as usize;
    let mut p = vec![Rat::zero(); g + 1];
    for k in 1..=g {
        // p_k = sum_{i=1}^{k-1} (-1)^{i-1} e_i p_{k-i} + (-1)^{k-1} k e_k
        let mut acc = Rat::zero();
        for i in 1..k {
            let term = chern.coeff(i) * p[k - i].clone();
            if i % 2 == 1 {
                acc = acc + term;
            } else {
                acc = acc - term;
            }
        }
        let last = chern.coeff(k) * rat_int(k as i64);
        if k % 2 == 1 {
            acc = acc + last;
        } else {
            acc = acc - last;
        }
        p[k] = acc;
    }
    let mut ch = vec![rat_int(rank)];
    for k in 1..=g {
        ch.push(p[k].clone() / factorial(k as i64));
    }
    OmegaSeries::from_coeffs(genus, ch)
}

/// Family index of the Cauchy-Riemann operators on L^k over the Jacobian
/// torus, computed through the exterior algebra of T^{2g} x Sigma and
/// fibre integration, then converted to Chern classes by Newton's
/// identities.
pub fn family_index(k: i64, d: i64, genus: u32) -> Result<FamilyIndex, InvariantError> {
    let g = genus;
    let c1 = c1_universal(g, k, d);
    let ch_full = c1.exp_nilpotent()?;
    let td = todd_t_sigma(g, g as i64);
    let pushed = td.mul(&ch_full)?.integrate_fiber_sigma();

    let coeffs = pushed
        .omega_coefficients()
        .ok_or(InvariantError::NotOmegaPolynomial)?;
    let ch = OmegaSeries::from_coeffs(g, coeffs);

    let expected_rank = d * k + 1 - g as i64;
    let c0 = ch.coeff(0);
    if c0 != rat_int(expected_rank) {
        return Err(InvariantError::RankMismatch {
            expected: expected_rank,
            computed: format!("{c0}"),
        });
    }
    let chern = chern_from_character(g, expected_rank, &ch);
    Ok(FamilyIndex {
        rank: expected_rank,
        chern,
        ch,
    })
}

/// Chern series c(Ind, eta) = sum_j eta^{rank - j} c_j at a rational weight.
pub fn chern_series(index: &FamilyIndex, eta: &Rat) -> Result<OmegaSeries, InvariantError> {
    if eta.is_zero() {
        return Err(InvariantError::ZeroEta);
    }
    let g = index.chern.genus();
    let mut coeffs = Vec::with_capacity(g as usize + 1);
    for j in 0..=g as usize {
        coeffs.push(rational_pow(eta, index.rank - j as i64) * index.chern.coeff(j));
    }
    Ok(OmegaSeries::from_coeffs(g, coeffs))
}

/// Weighted circle-action problem: weights l_1..l_n, bundle degree d,
/// genus g, with the derived insertion count m.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedProblem {
    pub weights: Vec<u32>,
    pub degree: i64,
    pub genus: u32,
    pub insertions: i64,
}

impl WeightedProblem {
    pub fn new(weights: Vec<u32>, degree: i64, genus: u32) -> Result<Self, InvariantError> {
        if weights.is_empty() || weights.iter().any(|&l| l == 0) {
            return Err(InvariantError::BadWeights);
        }
        let m = insertion_count(&weights, degree, genus);
        Ok(WeightedProblem {
            weights,
            degree,
            genus,
            insertions: m,
        })
    }
}

/// m = sum_nu (d l_nu + 1 - g) + g - 1.
pub fn insertion_count(weights: &[u32], degree: i64, genus: u32) -> i64 {
    let g = genus as i64;
    weights
        .iter()
        .map(|&l| degree * l as i64 + 1 - g)
        .sum::<i64>()
        + g
        - 1
}

/// Virtual dimension 2(d sum l_nu - (n-1)(g-1)).
pub fn dimension_weighted(p: &WeightedProblem) -> i64 {
    let g = p.genus as i64;
    let n = p.weights.len() as i64;
    let lsum: i64 = p.weights.iter().map(|&l| l as i64).sum();
    2 * (p.degree * lsum - (n - 1) * (g - 1))
}

/// The localization integral int_{T^{2g}} prod c(Ind^{l_nu}, l_nu)^{-1},
/// evaluated exactly. Rejects problems outside the m >= 0 chamber.
pub fn invariant_weighted(p: &WeightedProblem) -> Result<Rat, InvariantError> {
    if p.insertions < 0 {
        return Err(InvariantError::NegativeInsertions { m: p.insertions });
    }
    let g = p.genus;
    let mut integrand = OmegaSeries::one(g);
    for &l in &p.weights {
        let index = family_index(l as i64, p.degree, g)?;
        let series = chern_series(&index, &rat_int(l as i64))?;
        integrand = integrand.mul(&series.invert()?);
    }
    Ok(integrand.integrate_torus())
}

/// Closed form of Theorem B: (sum l_nu)^g prod l_nu^{-d l_nu + g - 1}.
/// Kept separate from the pipeline as its verification target.
pub fn theorem_b_closed_form(weights: &[u32], degree: i64, genus: u32) -> Rat {
    let g = genus as i64;
    let lsum: i64 = weights.iter().map(|&l| l as i64).sum();
    let mut out = rational_pow(&rat_int(lsum), g);
    for &l in weights {
        let exp = -degree * l as i64 + g - 1;
        out = out * rational_pow(&rat_int(l as i64), exp);
    }
    out
}

/// Ruled-surface Seiberg-Witten number for Sigma x S^2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwRuled {
    pub value: Rat,
    /// m = d(1 - g) + (d+1) k.
    pub insertions: i64,
    /// True when m < 0, in which case both invariants vanish.
    pub vanishes_by_hypothesis: bool,
}

/// SW_{Sigma x S}(gamma_{k,d}) for S the sphere: computed as the weighted
/// invariant with n = d+1 unit weights and bundle degree k. For m < 0 both
/// invariants are zero.
pub fn sw_ruled(d: i64, k: i64, genus: u32) -> Result<SwRuled, InvariantError> {
    if d < 0 || k < 0 {
        return Err(InvariantError::BadWeights);
    }
    let g = genus as i64;
    let m = d * (1 - g) + (d + 1) * k;
    if m < 0 {
        return Ok(SwRuled {
            value: Rat::zero(),
            insertions: m,
            vanishes_by_hypothesis: true,
        });
    }
    let weights = vec![1u32; d as usize + 1];
    let p = WeightedProblem::new(weights, k, genus)?;
    debug_assert_eq!(p.insertions, m);
    let value = invariant_weighted(&p)?;
    Ok(SwRuled {
        value,
        insertions: m,
        vanishes_by_hypothesis: false,
    })
}

/// Render an exact rational as "p/q" (or "p" for integers).
pub fn rational_string(r: &Rat) -> String {
    if r.denom() == &BigInt::one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal approximation of an exact rational, for report readability.
pub fn rational_approx(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
