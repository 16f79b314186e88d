//! Exact arithmetic in H*(T^{2g} x Sigma; Q) and its subring H*(T^{2g}; Q).
//!
//! Generators and relations:
//!   tau_1..tau_{2g}   degree 1 on T^{2g}, pairwise anticommuting
//!   alpha_1..alpha_{2g} degree 1 on Sigma, alpha_j alpha_{g+j} = sigma,
//!                       alpha_{g+j} alpha_j = -sigma, alpha_i alpha_j = 0 otherwise
//!   sigma             degree 2 on Sigma, sigma^2 = 0, sigma alpha_j = 0
//! tau's anticommute with alpha's; sigma is central.
//!
//! A basis monomial is an ascending wedge of tau's (stored as a bitmask)
//! times a Sigma part in {1, alpha_j, sigma}. Elements are sparse maps from
//! monomials to `BigRational` with all stored coefficients nonzero, so
//! equality of elements is exact equality of maps.
//!
//! Orientation: the integral over T^{2g} of Omega^g/g! is one, where
//! Omega = sum_j tau_j tau_{g+j}.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact rational scalar used throughout the calculator.
pub type Rat = BigRational;

/// Convenience constructor for an exact rational from an integer pair.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Convenience constructor for an exact integer rational.
pub fn rat_int(num: i64) -> Rat {
    Rat::from(BigInt::from(num))
}

/// The Sigma-factor part of a basis monomial.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SigmaPart {
    /// Trivial Sigma part (degree 0).
    One,
    /// alpha_j, 1-based index in 1..=2g (degree 1).
    Alpha(u32),
    /// The positive degree-2 generator normalised so Sigma has volume one.
    Sigma,
}

impl SigmaPart {
    fn degree(self) -> u32 {
        match self {
            SigmaPart::One => 0,
            SigmaPart::Alpha(_) => 1,
            SigmaPart::Sigma => 2,
        }
    }

    fn parity(self) -> u32 {
        self.degree() % 2
    }
}

/// Basis monomial: ascending wedge of tau generators times a Sigma part.
///
/// Bit `j` of `tau_mask` (0-based) stands for tau_{j+1}.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Monomial {
    pub tau_mask: u64,
    pub sigma: SigmaPart,
}

impl Monomial {
    pub const ONE: Monomial = Monomial {
        tau_mask: 0,
        sigma: SigmaPart::One,
    };

    pub fn degree(&self) -> u32 {
        self.tau_mask.count_ones() + self.sigma.degree()
    }

    /// Human-readable key such as `t1.t3.a2` or `s.t2`, used for JSON dumps.
    pub fn key(&self) -> String {
        let mut parts = Vec::new();
        let mut mask = self.tau_mask;
        while mask != 0 {
            let j = mask.trailing_zeros();
            parts.push(format!("t{}", j + 1));
            mask &= mask - 1;
        }
        match self.sigma {
            SigmaPart::One => {}
            SigmaPart::Alpha(j) => parts.push(format!("a{j}")),
            SigmaPart::Sigma => parts.push("s".to_string()),
        }
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join(".")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CohomologyError {
    #[error("genus mismatch: {0} vs {1}")]
    GenusMismatch(u32, u32),
    #[error("generator index {index} out of range for genus {genus}")]
    IndexOutOfRange { index: u32, genus: u32 },
    #[error("exp_nilpotent requires zero scalar part")]
    NonzeroScalarPart,
    #[error("invert_unit requires nonzero scalar part")]
    ZeroScalarPart,
    #[error("integrate_torus requires an element of H*(T^{{2g}}) (no alpha/sigma tags)")]
    SigmaPartPresent,
}

/// Element of H*(T^{2g} x Sigma; Q) in canonical sparse form.
#[derive(Clone, PartialEq, Eq)]
pub struct RingElement {
    genus: u32,
    coeffs: BTreeMap<Monomial, Rat>,
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .map(|(m, c)| format!("{}*{}", c, m.key()))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Sign of merging two ascending tau masks by concatenation-then-sort.
///
/// Returns `None` when the masks overlap (the product vanishes); otherwise
/// the parity of the number of transpositions.
fn tau_merge(m1: u64, m2: u64) -> Option<(u64, bool)> {
    if m1 & m2 != 0 {
        return None;
    }
    let mut swaps = 0u32;
    let mut rest = m2;
    while rest != 0 {
        let b = rest.trailing_zeros();
        // bits of m1 strictly above b must cross this generator
        swaps += (m1 >> (b + 1)).count_ones();
        rest &= rest - 1;
    }
    Some((m1 | m2, swaps % 2 == 1))
}

/// Product of two Sigma parts per the intersection-form relations.
/// Returns `(part, negate)` or `None` when the product vanishes.
fn sigma_mul(g: u32, s1: SigmaPart, s2: SigmaPart) -> Option<(SigmaPart, bool)> {
    use SigmaPart::*;
    match (s1, s2) {
        (One, s) | (s, One) => Some((s, false)),
        (Alpha(i), Alpha(j)) => {
            if j == i + g {
                Some((Sigma, false))
            } else if i == j + g {
                Some((Sigma, true))
            } else {
                None
            }
        }
        (Sigma, _) | (_, Sigma) => None,
    }
}

impl RingElement {
    pub fn zero(genus: u32) -> Self {
        RingElement {
            genus,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(genus: u32) -> Self {
        Self::scalar(genus, Rat::one())
    }

    pub fn scalar(genus: u32, c: Rat) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(Monomial::ONE, c);
        }
        RingElement { genus, coeffs }
    }

    pub fn from_monomial(genus: u32, m: Monomial, c: Rat) -> Self {
        let mut coeffs = BTreeMap::new();
        if !c.is_zero() {
            coeffs.insert(m, c);
        }
        RingElement { genus, coeffs }
    }

    /// tau_j, 1-based, j in 1..=2g.
    pub fn tau(genus: u32, j: u32) -> Result<Self, CohomologyError> {
        if j == 0 || j > 2 * genus {
            return Err(CohomologyError::IndexOutOfRange {
                index: j,
                genus,
            });
        }
        Ok(Self::from_monomial(
            genus,
            Monomial {
                tau_mask: 1u64 << (j - 1),
                sigma: SigmaPart::One,
            },
            Rat::one(),
        ))
    }

    /// alpha_j, 1-based, j in 1..=2g.
    pub fn alpha(genus: u32, j: u32) -> Result<Self, CohomologyError> {
        if j == 0 || j > 2 * genus {
            return Err(CohomologyError::IndexOutOfRange {
                index: j,
                genus,
            });
        }
        Ok(Self::from_monomial(
            genus,
            Monomial {
                tau_mask: 0,
                sigma: SigmaPart::Alpha(j),
            },
            Rat::one(),
        ))
    }

    pub fn sigma(genus: u32) -> Self {
        Self::from_monomial(
            genus,
            Monomial {
                tau_mask: 0,
                sigma: SigmaPart::Sigma,
            },
            Rat::one(),
        )
    }

    /// Omega = sum_{j=1}^g tau_j tau_{g+j}, the standard symplectic class.
    pub fn omega(genus: u32) -> Self {
        let mut out = Self::zero(genus);
        for j in 1..=genus {
            let mask = (1u64 << (j - 1)) | (1u64 << (genus + j - 1));
            out.add_term(
                Monomial {
                    tau_mask: mask,
                    sigma: SigmaPart::One,
                },
                Rat::one(),
            );
        }
        out
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rat {
        self.coeffs.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn scalar_part(&self) -> Rat {
        self.coeff(&Monomial::ONE)
    }

    /// Maximum total degree among stored monomials (0 for the zero element).
    pub fn max_degree(&self) -> u32 {
        self.coeffs.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    /// The element is homogeneous of a single total degree.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.coeffs.keys();
        let d = it.next()?.degree();
        if it.all(|m| m.degree() == d) {
            Some(d)
        } else {
            None
        }
    }

    /// Homogeneous part of total degree `d`.
    pub fn degree_part(&self, d: u32) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(m, _)| m.degree() == d)
            .map(|(m, c)| (*m, c.clone()))
            .collect();
        RingElement {
            genus: self.genus,
            coeffs,
        }
    }

    fn add_term(&mut self, m: Monomial, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().clone() + c;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, CohomologyError> {
        if self.genus != other.genus {
            return Err(CohomologyError::GenusMismatch(self.genus, other.genus));
        }
        let mut out = self.clone();
        for (m, c) in &other.coeffs {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CohomologyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .map(|(m, c)| (*m, -c.clone()))
            .collect();
        RingElement {
            genus: self.genus,
            coeffs,
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.genus);
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|(m, k)| (*m, k.clone() * c.clone()))
            .collect();
        RingElement {
            genus: self.genus,
            coeffs,
        }
    }

    /// Graded-commutative product.
    pub fn mul(&self, other: &Self) -> Result<Self, CohomologyError> {
        if self.genus != other.genus {
            return Err(CohomologyError::GenusMismatch(self.genus, other.genus));
        }
        let g = self.genus;
        let mut out = Self::zero(g);
        for (m1, c1) in &self.coeffs {
            for (m2, c2) in &other.coeffs {
                let Some((mask, tau_neg)) = tau_merge(m1.tau_mask, m2.tau_mask) else {
                    continue;
                };
                let Some((sig, sig_neg)) = sigma_mul(g, m1.sigma, m2.sigma) else {
                    continue;
                };
                // moving the odd Sigma part of m1 past the tau block of m2
                let cross_neg =
                    (m1.sigma.parity() * m2.tau_mask.count_ones()) % 2 == 1;
                let mut coeff = c1.clone() * c2.clone();
                if tau_neg ^ sig_neg ^ cross_neg {
                    coeff = -coeff;
                }
                out.add_term(
                    Monomial {
                        tau_mask: mask,
                        sigma: sig,
                    },
                    coeff,
                );
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Result<Self, CohomologyError> {
        let mut out = Self::one(self.genus);
        for _ in 0..k {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// exp of a nilpotent element (zero scalar part), as a finite sum.
    pub fn exp_nilpotent(&self) -> Result<Self, CohomologyError> {
        if !self.scalar_part().is_zero() {
            return Err(CohomologyError::NonzeroScalarPart);
        }
        let mut result = Self::one(self.genus);
        let mut term = Self::one(self.genus);
        let mut k: u64 = 1;
        loop {
            term = term.mul(self)?;
            term = term.scale(&Rat::new(BigInt::one(), BigInt::from(k)));
            if term.is_zero() {
                break;
            }
            result = result.add(&term)?;
            k += 1;
        }
        Ok(result)
    }

    /// Inverse of a unit (nonzero scalar part), by geometric series in the
    /// nilpotent part.
    pub fn invert_unit(&self) -> Result<Self, CohomologyError> {
        let c = self.scalar_part();
        if c.is_zero() {
            return Err(CohomologyError::ZeroScalarPart);
        }
        let c_inv = Rat::one() / c.clone();
        // x = c(1 + y), y nilpotent; x^{-1} = c^{-1} sum (-y)^k
        let y = self
            .sub(&Self::scalar(self.genus, c))?
            .scale(&c_inv);
        let mut result = Self::one(self.genus);
        let mut term = Self::one(self.genus);
        loop {
            term = term.mul(&y)?.neg();
            if term.is_zero() {
                break;
            }
            result = result.add(&term)?;
        }
        Ok(result.scale(&c_inv))
    }

    /// Integration over the Sigma fibre: sigma-tagged monomials map to their
    /// tau part with the coefficient preserved, everything else to zero.
    pub fn integrate_fiber_sigma(&self) -> Self {
        let mut out = Self::zero(self.genus);
        for (m, c) in &self.coeffs {
            if m.sigma == SigmaPart::Sigma {
                out.add_term(
                    Monomial {
                        tau_mask: m.tau_mask,
                        sigma: SigmaPart::One,
                    },
                    c.clone(),
                );
            }
        }
        out
    }

    /// Integration over T^{2g}, normalised so the integral of Omega^g/g! is
    /// one. Requires an element of H*(T^{2g}).
    pub fn integrate_torus(&self) -> Result<Rat, CohomologyError> {
        if self
            .coeffs
            .keys()
            .any(|m| m.sigma != SigmaPart::One)
        {
            return Err(CohomologyError::SigmaPartPresent);
        }
        let g = self.genus;
        let full: u64 = if g == 0 { 0 } else { (1u64 << (2 * g)) - 1 };
        let c = self.coeff(&Monomial {
            tau_mask: full,
            sigma: SigmaPart::One,
        });
        // sign of the interleaved orientation monomial tau_1 tau_{g+1} ...
        // relative to ascending order: (-1)^{g(g-1)/2}
        if (g * (g.saturating_sub(1)) / 2) % 2 == 1 {
            Ok(-c)
        } else {
            Ok(c)
        }
    }

    /// Coefficients (c_0..c_g) with `self = sum_j c_j Omega^j`, or `None`
    /// when the element is not a polynomial in Omega.
    pub fn omega_coefficients(&self) -> Option<Vec<Rat>> {
        let g = self.genus;
        let omega = Self::omega(g);
        let mut coeffs = Vec::with_capacity(g as usize + 1);
        let mut pow = Self::one(g);
        let mut recomposed = Self::zero(g);
        for _ in 0..=g {
            // probe coefficient against any monomial present in Omega^j
            let c = match pow.coeffs.iter().next() {
                Some((m, pc)) => self.coeff(m) / pc.clone(),
                None => Rat::zero(),
            };
            if !c.is_zero() {
                recomposed = recomposed.add(&pow.scale(&c)).unwrap();
            }
            coeffs.push(c);
            pow = pow.mul(&omega).unwrap();
        }
        if &recomposed == self {
            Some(coeffs)
        } else {
            None
        }
    }

    /// Sparse JSON-style dump {monomial-key: "p/q"} for debugging.
    pub fn to_debug_map(&self) -> BTreeMap<String, String> {
        self.coeffs
            .iter()
            .map(|(m, c)| (m.key(), format!("{c}")))
            .collect()
    }
}

/// First Chern class of the universal bundle power L^k on T^{2g} x Sigma:
/// k (sum_j alpha_j tau_j + d sigma).
pub fn c1_universal(genus: u32, k: i64, d: i64) -> RingElement {
    let g = genus;
    let mut out = RingElement::zero(g);
    for j in 1..=2 * g {
        let alpha = RingElement::alpha(g, j).unwrap();
        let tau = RingElement::tau(g, j).unwrap();
        out = out.add(&alpha.mul(&tau).unwrap()).unwrap();
    }
    out = out.add(&RingElement::sigma(g).scale(&rat_int(d))).unwrap();
    out.scale(&rat_int(k))
}

/// Todd class of T Sigma for genus g: 1 + (1-g) sigma.
pub fn todd_t_sigma(genus: u32, surface_genus: i64) -> RingElement {
    RingElement::one(genus)
        .add(&RingElement::sigma(genus).scale(&rat_int(1 - surface_genus)))
        .unwrap()
}

/// Total absolute size of the coefficient map (for sanity checks in tests).
pub fn support_size(x: &RingElement) -> usize {
    x.coeffs.len()
}
