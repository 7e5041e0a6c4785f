//! Atomic Clark measures of finite Blaschke products.
//!
//! For `|α| = 1` the measure `μ_α^B` sits on the `N` solutions of `B(ζ) = α`
//! with weight `1/|B'(ζ)|` each. The solutions are located on the lifted
//! boundary phase, which is strictly increasing, so every root has its own
//! bracket.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::arg_2pi;
use crate::blaschke::{mobius_derivative_modulus, mobius_unchecked, BlaschkeProduct};
use crate::error::{Error, Result};

/// Phase tolerance for the root solve.
pub const PHASE_TOLERANCE: f64 = 1e-12;
/// Largest accepted `|B(ζ_k) − α|`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct ClarkMeasure {
    alpha: Complex64,
    atoms: Vec<Complex64>,
    weights: Vec<f64>,
}

pub(crate) fn check_unimodular(alpha: Complex64) -> Result<()> {
    let m = alpha.norm();
    if (m - 1.0).abs() > 1e-12 {
        return Err(Error::NotUnimodular(m));
    }
    Ok(())
}

/// Solutions of `B(ζ) = α` on the circle, sorted by argument in `[0, 2π)`.
pub fn level_set(product: &BlaschkeProduct, alpha: Complex64) -> Result<Vec<Complex64>> {
    check_unimodular(alpha)?;
    let n = product.degree();
    if n == 0 {
        return Err(Error::InvalidArgument("constant product has no level set".into()));
    }
    let phase0 = product.lifted_phase(0.0);
    let mut base = arg_2pi(alpha);
    if base < phase0 {
        base += TAU;
    }
    let mut atoms = Vec::with_capacity(n);
    let mut lo = 0.0;
    for k in 0..n {
        let target = base + TAU * k as f64;
        let t = solve_phase(product, target, lo, TAU)?;
        let zeta = polish(product, alpha, Complex64::from_polar(1.0, t));
        let residual = (product.eval(zeta) - alpha).norm();
        if residual > RESIDUAL_TOLERANCE {
            return Err(Error::LevelSet(format!("root {k} has residual {residual:e}")));
        }
        atoms.push(zeta);
        lo = t;
    }
    Ok(atoms)
}

/// Safeguarded Newton iteration on `Φ(t) − target` within `[lo, hi]`, using
/// `Φ' = |B'|`.
fn solve_phase(product: &BlaschkeProduct, target: f64, lo: f64, hi: f64) -> Result<f64> {
    let g = |t: f64| product.lifted_phase(t) - target;
    let (mut lo, mut hi) = (lo, hi);
    let (glo, ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        return Ok(lo);
    }
    if glo > 0.0 || ghi < 0.0 {
        return Err(Error::LevelSet(format!(
            "bracket [{lo}, {hi}] does not enclose phase {target}"
        )));
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..MAX_ITERATIONS {
        let val = g(t);
        if val.abs() <= PHASE_TOLERANCE {
            return Ok(t);
        }
        if val < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1e-300) {
            return Ok(t);
        }
        let step = t - val / product.boundary_derivative_modulus(t);
        t = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
    }
    // accept if the residual check downstream passes
    Ok(t)
}

/// Newton steps in the local coordinate `ζ₀ e^{iδ}`. Near `t = 2π` one ulp of
/// `t` moves the phase by `|B'| · 9e-16`, which is too coarse when zeros crowd
/// the circle; `δ` stays small and keeps full relative precision.
fn polish(product: &BlaschkeProduct, alpha: Complex64, zeta0: Complex64) -> Complex64 {
    let mut zeta = zeta0;
    for _ in 0..3 {
        let err = (product.eval(zeta) / alpha).arg();
        if err == 0.0 {
            break;
        }
        zeta *= Complex64::from_polar(1.0, -err / product.derivative_modulus_at(zeta));
        zeta /= zeta.norm();
    }
    zeta
}

/// `μ_α^B = Σ_k |B'(ζ_k)|^{-1} δ_{ζ_k}`.
pub fn clark_measure(product: &BlaschkeProduct, alpha: Complex64) -> Result<ClarkMeasure> {
    let atoms = level_set(product, alpha)?;
    let weights = atoms.iter().map(|&z| 1.0 / product.derivative_modulus_at(z)).collect();
    Ok(ClarkMeasure { alpha, atoms, weights })
}

/// `Re((α + B(z))/(α − B(z)))`, the Poisson integral of `μ_α^B` at `z`.
pub fn herglotz_real_part(product: &BlaschkeProduct, alpha: Complex64, z: Complex64) -> f64 {
    let b = product.eval(z);
    ((alpha + b) / (alpha - b)).re
}

/// `P_{re^{it}}(ζ) = (1 − r²)/|ζ − re^{it}|²`.
pub fn poisson_kernel(r: f64, t: f64, zeta: Complex64) -> f64 {
    (1.0 - r * r) / (zeta - Complex64::from_polar(r, t)).norm_sqr()
}

/// Midpoint nodes `e^{2πi(j + ½)/count}` for averaging over `α`.
pub fn alpha_nodes(count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|j| Complex64::from_polar(1.0, TAU * (j as f64 + 0.5) / count as f64))
        .collect()
}

/// Midpoint-rule average of `∫ f dμ_α` over `α`; approximates `∫ f dm`.
pub fn aleksandrov_average<F>(product: &BlaschkeProduct, count: usize, f: F) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    for alpha in alpha_nodes(count) {
        acc += clark_measure(product, alpha)?.integrate(&f);
    }
    Ok(acc / count as f64)
}

impl ClarkMeasure {
    /// Builds a measure from raw parts; atoms are re-sorted by argument.
    pub fn from_parts(alpha: Complex64, atoms: Vec<Complex64>, weights: Vec<f64>) -> Result<Self> {
        if atoms.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: atoms.len(),
                got: weights.len(),
            });
        }
        let mut pairs: Vec<(Complex64, f64)> = atoms.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| arg_2pi(a.0).total_cmp(&arg_2pi(b.0)));
        let (atoms, weights) = pairs.into_iter().unzip();
        Ok(Self { alpha, atoms, weights })
    }

    pub fn alpha(&self) -> Complex64 {
        self.alpha
    }

    pub fn atoms(&self) -> &[Complex64] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Complex64 {
        self.atoms.iter().zip(&self.weights).map(|(&z, &w)| f(z) * w).sum()
    }

    pub fn poisson_integral(&self, r: f64, t: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * poisson_kernel(r, t, z))
            .sum()
    }

    /// `(b_{−a})_*(|b'_{−a}| μ)`, which equals `μ_α^{B^a}`.
    pub fn pushforward(&self, a: Complex64) -> Result<ClarkMeasure> {
        crate::blaschke::mobius(-a, Complex64::new(0.0, 0.0))?;
        let atoms = self.atoms.iter().map(|&z| mobius_unchecked(-a, z)).collect();
        let weights = self
            .atoms
            .iter()
            .zip(&self.weights)
            .map(|(&z, &w)| w * mobius_derivative_modulus(-a, z))
            .collect();
        ClarkMeasure::from_parts(self.alpha, atoms, weights)
    }
}

/// Comparison target for [`weak_star_gap`].
#[derive(Debug, Clone, Copy)]
pub enum Reference<'a> {
    /// Normalized arc length, whose Poisson integral is identically 1.
    Lebesgue,
    Measure(&'a ClarkMeasure),
}

/// `|∫ P_{re^{it}} dμ − ∫ P_{re^{it}} d(reference)|`.
pub fn weak_star_gap(mu: &ClarkMeasure, reference: Reference<'_>, r: f64, t: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("radius {r} outside [0, 1)")));
    }
    let other = match reference {
        Reference::Lebesgue => 1.0,
        Reference::Measure(nu) => nu.poisson_integral(r, t),
    };
    Ok((mu.poisson_integral(r, t) - other).abs())
}
