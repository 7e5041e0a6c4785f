//! Finite Blaschke products and disk automorphisms.
//!
//! A product is stored as its zero list (repeats encode multiplicity) and a
//! unimodular constant, so that `B(z) = c · Π (z − λ_j)/(1 − conj(λ_j) z)`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default distance kept between every zero and the unit circle.
pub const DEFAULT_BOUNDARY_GUARD: f64 = 1e-8;

/// Disk automorphism `b_a(z) = (z − a)/(1 − conj(a) z)`.
pub fn mobius(a: Complex64, z: Complex64) -> Result<Complex64> {
    let m = a.norm();
    if m >= 1.0 || !m.is_finite() {
        return Err(Error::InvalidAutomorphism(m));
    }
    Ok(mobius_unchecked(a, z))
}

#[inline]
pub(crate) fn mobius_unchecked(a: Complex64, z: Complex64) -> Complex64 {
    (z - a) / (Complex64::new(1.0, 0.0) - a.conj() * z)
}

/// `|b_a'(z)| = (1 − |a|²)/|1 − conj(a) z|²`.
#[inline]
pub(crate) fn mobius_derivative_modulus(a: Complex64, z: Complex64) -> f64 {
    (1.0 - a.norm_sqr()) / (Complex64::new(1.0, 0.0) - a.conj() * z).norm_sqr()
}

/// Finite Blaschke product with zeros strictly inside the guarded disk.
#[derive(Debug, Clone, PartialEq)]
pub struct BlaschkeProduct {
    zeros: Vec<Complex64>,
    unimodular: Complex64,
}

impl BlaschkeProduct {
    /// Product with an explicit unimodular constant.
    pub fn new(zeros: Vec<Complex64>, unimodular: Complex64, guard: f64) -> Result<Self> {
        check_guard(&zeros, guard)?;
        let m = unimodular.norm();
        if (m - 1.0).abs() > 1e-12 {
            return Err(Error::NotUnimodular(m));
        }
        Ok(Self {
            zeros,
            unimodular: unimodular / m,
        })
    }

    /// `B_n = Π (−|λ_j|/λ_j) b_{λ_j}`, with factor `−z` for a zero at the
    /// origin. The normalization makes `B_n(0) = Π |λ_j| ≥ 0`.
    pub fn normalized(zeros: &[Complex64]) -> Result<Self> {
        Self::normalized_with_guard(zeros, DEFAULT_BOUNDARY_GUARD)
    }

    pub fn normalized_with_guard(zeros: &[Complex64], guard: f64) -> Result<Self> {
        check_guard(zeros, guard)?;
        let mut c = Complex64::new(1.0, 0.0);
        for &l in zeros {
            let m = l.norm();
            c *= if m == 0.0 { Complex64::new(-1.0, 0.0) } else { -(m / l) };
        }
        Ok(Self {
            zeros: zeros.to_vec(),
            unimodular: c / c.norm(),
        })
    }

    pub fn degree(&self) -> usize {
        self.zeros.len()
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn unimodular_factor(&self) -> Complex64 {
        self.unimodular
    }

    pub fn max_zero_modulus(&self) -> f64 {
        self.zeros.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Index of a zero sitting at the origin, if any.
    pub fn origin_zero(&self) -> Option<usize> {
        self.zeros.iter().position(|z| z.norm() < 1e-15)
    }

    pub fn vanishes_at_origin(&self) -> bool {
        self.origin_zero().is_some()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.zeros
            .iter()
            .fold(self.unimodular, |acc, &l| acc * mobius_unchecked(l, z))
    }

    /// `B̂(z) = B(z)/z`, evaluated without dividing by `z`.
    pub fn eval_deflated(&self, z: Complex64) -> Result<Complex64> {
        let skip = self.origin_zero().ok_or(Error::NonVanishingAtOrigin)?;
        Ok(self
            .zeros
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != skip)
            .fold(self.unimodular, |acc, (_, &l)| acc * mobius_unchecked(l, z)))
    }

    /// `|B'(e^{it})| = Σ (1 − |λ_j|²)/|e^{it} − λ_j|²`, which is also the
    /// derivative of the boundary phase.
    pub fn boundary_derivative_modulus(&self, t: f64) -> f64 {
        let zeta = Complex64::from_polar(1.0, t);
        self.derivative_modulus_at(zeta)
    }

    /// Same sum evaluated at a boundary point given as a unimodular number.
    pub fn derivative_modulus_at(&self, zeta: Complex64) -> f64 {
        self.zeros
            .iter()
            .map(|&l| (1.0 - l.norm_sqr()) / (zeta - l).norm_sqr())
            .sum()
    }

    /// Continuous branch of `Arg B(e^{it})`, normalized so the value at `t = 0`
    /// lies in `[0, 2π)`.
    ///
    /// Each factor contributes `t + 2 arg(1 − λ e^{−it})`; the second argument
    /// has positive real part, so the principal branch is already continuous
    /// and no sampling is required.
    pub fn lifted_phase(&self, t: f64) -> f64 {
        self.raw_phase(t) - self.phase_offset()
    }

    fn raw_phase(&self, t: f64) -> f64 {
        let w = Complex64::from_polar(1.0, -t);
        let one = Complex64::new(1.0, 0.0);
        self.unimodular.arg() + self.zeros.iter().map(|&l| t + 2.0 * (one - l * w).arg()).sum::<f64>()
    }

    fn phase_offset(&self) -> f64 {
        TAU * (self.raw_phase(0.0) / TAU).floor()
    }

    /// `B^a = B ∘ b_a`, a product with zeros `b_{−a}(λ_j)`.
    pub fn compose_with_automorphism(&self, a: Complex64) -> Result<Self> {
        self.compose_with_automorphism_guarded(a, DEFAULT_BOUNDARY_GUARD)
    }

    pub fn compose_with_automorphism_guarded(&self, a: Complex64, guard: f64) -> Result<Self> {
        // validates |a| < 1
        mobius(a, Complex64::new(0.0, 0.0))?;
        if a == Complex64::new(0.0, 0.0) {
            return Ok(self.clone());
        }
        let zeros: Vec<Complex64> = self.zeros.iter().map(|&l| mobius_unchecked(-a, l)).collect();
        check_guard(&zeros, guard)?;
        // Match the constant at z = 1, where every factor is unimodular.
        let one = Complex64::new(1.0, 0.0);
        let target = self.eval(mobius_unchecked(a, one));
        let bare = zeros.iter().fold(one, |acc, &l| acc * mobius_unchecked(l, one));
        let c = target / bare;
        Ok(Self {
            zeros,
            unimodular: c / c.norm(),
        })
    }

    /// Product `B · v`: zero lists concatenated, constants multiplied.
    pub fn multiply(&self, other: &BlaschkeProduct) -> BlaschkeProduct {
        let mut zeros = self.zeros.clone();
        zeros.extend_from_slice(&other.zeros);
        BlaschkeProduct {
            zeros,
            unimodular: self.unimodular * other.unimodular,
        }
    }

    /// Lower bound `½ Σ (1 − |λ_j|)` for `|B'|` on the circle.
    pub fn derivative_lower_bound(&self) -> f64 {
        0.5 * self.zeros.iter().map(|l| 1.0 - l.norm()).sum::<f64>()
    }
}

fn check_guard(zeros: &[Complex64], guard: f64) -> Result<()> {
    for (index, z) in zeros.iter().enumerate() {
        let modulus = z.norm();
        if !modulus.is_finite() || modulus > 1.0 - guard {
            return Err(Error::BoundaryGuard { index, modulus, guard });
        }
    }
    Ok(())
}
