//! Orthonormal Takenaka–Malmquist basis of `K_B`, reproducing kernels and
//! equal-weight quadrature on the circle.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::TAU;
use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::blaschke::{mobius_unchecked, BlaschkeProduct};
use crate::error::{Error, Result};
use crate::parallel::map_ordered;

/// Smallest quadrature size regardless of degree.
pub const MIN_QUADRATURE: usize = 1024;
/// Nodes per basis function.
pub const NODES_PER_DIMENSION: usize = 64;
/// Nodes per unit of `1/(1 − max|λ_j|)`.
pub const POLE_RESOLUTION: f64 = 40.0;
/// Largest tolerated `max |Gram − I|`.
pub const GRAM_TOLERANCE: f64 = 1e-8;

const CHUNK: usize = 2048;

/// Identifier shared by every matrix expressed in the same basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisTag(u64);

/// Orthonormal basis `e_0, …, e_{N−1}` of `K_B` with
/// `e_k(z) = √(1 − |λ_{k+1}|²)/(1 − conj(λ_{k+1}) z) · Π_{j≤k} b_{λ_j}(z)`.
///
/// When `B(0) = 0` a zero at the origin is placed first, so `e_0 ≡ 1` and
/// `e_1, …, e_{N−1}` span `zK_{B̂}`.
#[derive(Debug, Clone)]
pub struct ModelBasis {
    product: BlaschkeProduct,
    ordered: Vec<Complex64>,
    scales: Vec<f64>,
    quadrature_points: usize,
    tag: BasisTag,
}

/// Quadrature size used when none is supplied.
pub fn default_quadrature(product: &BlaschkeProduct) -> usize {
    let n = product.degree();
    let pole = (POLE_RESOLUTION / (1.0 - product.max_zero_modulus())).ceil() as usize;
    MIN_QUADRATURE.max(NODES_PER_DIMENSION * n).max(pole)
}

/// Builds the basis and checks its Gram matrix under the `m`-point rule.
pub fn tm_basis(product: &BlaschkeProduct, m: usize) -> Result<ModelBasis> {
    let basis = ModelBasis::unchecked(product, m)?;
    let gram = basis.gram();
    let dev = max_identity_deviation(&gram);
    if dev > GRAM_TOLERANCE {
        return Err(Error::Quadrature(format!(
            "Gram deviation {dev:e} with {m} nodes for degree {}",
            product.degree()
        )));
    }
    Ok(basis)
}

pub(crate) fn max_identity_deviation(a: &DMatrix<Complex64>) -> f64 {
    let mut dev: f64 = 0.0;
    for j in 0..a.nrows() {
        for k in 0..a.ncols() {
            let target = if j == k { 1.0 } else { 0.0 };
            dev = dev.max((a[(j, k)] - target).norm());
        }
    }
    dev
}

impl ModelBasis {
    /// Basis with the default quadrature size.
    pub fn new(product: &BlaschkeProduct) -> Result<Self> {
        tm_basis(product, default_quadrature(product))
    }

    /// Skips the Gram check; used where the caller controls resolution.
    pub fn unchecked(product: &BlaschkeProduct, m: usize) -> Result<Self> {
        let n = product.degree();
        if n == 0 {
            return Err(Error::InvalidArgument("model space of a constant".into()));
        }
        if m < 8 * n {
            return Err(Error::Quadrature(format!(
                "{m} nodes for dimension {n}; need at least {}",
                8 * n
            )));
        }
        let mut ordered = product.zeros().to_vec();
        if let Some(i) = product.origin_zero() {
            let z = ordered.remove(i);
            ordered.insert(0, z);
        }
        let scales = ordered.iter().map(|l| (1.0 - l.norm_sqr()).sqrt()).collect();
        let mut h = DefaultHasher::new();
        for z in &ordered {
            z.re.to_bits().hash(&mut h);
            z.im.to_bits().hash(&mut h);
        }
        m.hash(&mut h);
        Ok(Self {
            product: product.clone(),
            ordered,
            scales,
            quadrature_points: m,
            tag: BasisTag(h.finish()),
        })
    }

    pub fn product(&self) -> &BlaschkeProduct {
        &self.product
    }

    pub fn dimension(&self) -> usize {
        self.ordered.len()
    }

    pub fn quadrature_points(&self) -> usize {
        self.quadrature_points
    }

    pub fn tag(&self) -> BasisTag {
        self.tag
    }

    /// Zeros in basis order.
    pub fn ordered_zeros(&self) -> &[Complex64] {
        &self.ordered
    }

    pub fn node(&self, m: usize) -> Complex64 {
        Complex64::from_polar(1.0, TAU * m as f64 / self.quadrature_points as f64)
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        (0..self.quadrature_points).map(|m| self.node(m)).collect()
    }

    /// Samples of `f` on the quadrature nodes.
    pub fn sample<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        (0..self.quadrature_points).map(|m| f(self.node(m))).collect()
    }

    /// Writes `e_0(z), …, e_{N−1}(z)` into `out`.
    pub fn eval_into(&self, z: Complex64, out: &mut [Complex64]) {
        tm_values(&self.ordered, &self.scales, z, out);
    }

    pub fn eval(&self, z: Complex64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.dimension()];
        self.eval_into(z, &mut out);
        out
    }

    /// `Σ c_k e_k(z)`.
    pub fn eval_combination(&self, coefficients: &DVector<Complex64>, z: Complex64) -> Complex64 {
        self.eval(z).iter().zip(coefficients.iter()).map(|(e, c)| e * c).sum()
    }

    /// Coordinates of the reproducing kernel `k_w`: `conj(e_k(w))`.
    pub fn kernel_coefficients(&self, w: Complex64) -> DVector<Complex64> {
        DVector::from_iterator(self.dimension(), self.eval(w).into_iter().map(|e| e.conj()))
    }

    /// Gram matrix of the basis under the quadrature rule.
    pub fn gram(&self) -> DMatrix<Complex64> {
        self.weighted_form(|_| Complex64::new(1.0, 0.0))
    }

    /// `A_{jk} = (1/M) Σ_m w(ζ_m) e_k(ζ_m) conj(e_j(ζ_m))`.
    pub fn weighted_form<W>(&self, weight: W) -> DMatrix<Complex64>
    where
        W: Fn(Complex64) -> Complex64 + Sync + Send,
    {
        let n = self.dimension();
        quadrature_form(
            self.quadrature_points,
            n,
            n,
            |z, row| self.eval_into(z, row),
            |z, row| self.eval_into(z, row),
            weight,
        )
    }
}

/// Equal-weight pairing `(1/M) Σ_m w(ζ_m) R(ζ_m) conj(L(ζ_m))ᵀ` of two families
/// of boundary functions, accumulated chunk by chunk in a fixed order.
pub(crate) fn quadrature_form<L, R, W>(
    m: usize,
    left_dim: usize,
    right_dim: usize,
    left: L,
    right: R,
    weight: W,
) -> DMatrix<Complex64>
where
    L: Fn(Complex64, &mut [Complex64]) + Sync + Send,
    R: Fn(Complex64, &mut [Complex64]) + Sync + Send,
    W: Fn(Complex64) -> Complex64 + Sync + Send,
{
    let starts: Vec<usize> = (0..m).step_by(CHUNK).collect();
    let partials = map_ordered(starts, |start| {
        let end = (start + CHUNK).min(m);
        let rows = end - start;
        let mut lmat = DMatrix::<Complex64>::zeros(rows, left_dim);
        let mut rmat = DMatrix::<Complex64>::zeros(rows, right_dim);
        let mut lbuf = vec![Complex64::new(0.0, 0.0); left_dim];
        let mut rbuf = vec![Complex64::new(0.0, 0.0); right_dim];
        for (i, idx) in (start..end).enumerate() {
            let z = Complex64::from_polar(1.0, TAU * idx as f64 / m as f64);
            left(z, &mut lbuf);
            right(z, &mut rbuf);
            let w = weight(z);
            for (k, v) in lbuf.iter().enumerate() {
                lmat[(i, k)] = *v;
            }
            for (k, v) in rbuf.iter().enumerate() {
                rmat[(i, k)] = *v * w;
            }
        }
        lmat.ad_mul(&rmat)
    });
    let mut acc = DMatrix::<Complex64>::zeros(left_dim, right_dim);
    for p in partials {
        acc += p;
    }
    acc / Complex64::new(m as f64, 0.0)
}

pub(crate) fn tm_values(zeros: &[Complex64], scales: &[f64], z: Complex64, out: &mut [Complex64]) {
    let one = Complex64::new(1.0, 0.0);
    let mut partial = one;
    for ((&l, &s), slot) in zeros.iter().zip(scales).zip(out.iter_mut()) {
        *slot = partial * s / (one - l.conj() * z);
        partial *= mobius_unchecked(l, z);
    }
}

/// Reproducing kernel `k_w^B(z) = (1 − conj(B(w)) B(z))/(1 − conj(w) z)`.
///
/// Near the diagonal (`|1 − conj(w) z| < 1e-4`) the quotient is replaced by its
/// telescoped form `Σ_k conj(e_k(w)) e_k(z)`, which has no removable
/// singularity and gives `|B'(ζ)|` at `w = z = ζ` on the circle.
pub fn reproducing_kernel(product: &BlaschkeProduct, w: Complex64, z: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let denom = one - w.conj() * z;
    if denom.norm() >= 1e-4 {
        return (one - product.eval(w).conj() * product.eval(z)) / denom;
    }
    let zeros = product.zeros();
    let scales: Vec<f64> = zeros.iter().map(|l| (1.0 - l.norm_sqr()).sqrt()).collect();
    let mut ew = vec![Complex64::new(0.0, 0.0); zeros.len()];
    let mut ez = ew.clone();
    tm_values(zeros, &scales, w, &mut ew);
    tm_values(zeros, &scales, z, &mut ez);
    ew.iter().zip(&ez).map(|(a, b)| a.conj() * b).sum()
}

/// Equal-weight quadrature `(1/M) Σ f(ζ_m) conj(g(ζ_m))`.
pub fn inner_product(f: &[Complex64], g: &[Complex64]) -> Result<Complex64> {
    if f.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: f.len(),
            got: g.len(),
        });
    }
    if f.is_empty() {
        return Err(Error::InvalidArgument("empty sample vector".into()));
    }
    let s: Complex64 = f.iter().zip(g).map(|(a, b)| a * b.conj()).sum();
    Ok(s / f.len() as f64)
}

/// Coefficients of a boundary function together with the norm of what the
/// basis did not capture.
#[derive(Debug, Clone)]
pub struct Expansion {
    pub coefficients: DVector<Complex64>,
    pub residual: f64,
}

/// Projects boundary samples onto the basis: `c_k = ⟨f, e_k⟩`.
pub fn expand(samples: &[Complex64], basis: &ModelBasis) -> Result<Expansion> {
    let m = basis.quadrature_points();
    if samples.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: samples.len(),
        });
    }
    let n = basis.dimension();
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    let mut coefficients = DVector::<Complex64>::zeros(n);
    for (i, f) in samples.iter().enumerate() {
        basis.eval_into(basis.node(i), &mut e);
        for k in 0..n {
            coefficients[k] += f * e[k].conj();
        }
    }
    coefficients /= Complex64::new(m as f64, 0.0);
    let mut residual = 0.0;
    for (i, f) in samples.iter().enumerate() {
        basis.eval_into(basis.node(i), &mut e);
        let approx: Complex64 = e.iter().zip(coefficients.iter()).map(|(a, c)| a * c).sum();
        residual += (f - approx).norm_sqr();
    }
    Ok(Expansion {
        coefficients,
        residual: (residual / m as f64).sqrt(),
    })
}

impl ModelBasis {
    /// Samples `f` on the nodes and expands it.
    pub fn expand_fn<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Expansion {
        expand(&self.sample(f), self).expect("sample count matches quadrature")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_product(rng: &mut ChaCha8Rng, n: usize, rmax: f64) -> BlaschkeProduct {
        let zeros: Vec<_> = (0..n)
            .map(|_| Complex64::from_polar(rmax * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>()))
            .collect();
        BlaschkeProduct::normalized(&zeros).unwrap()
    }

    #[test]
    fn monomial_basis() {
        let b = BlaschkeProduct::normalized(&[c(0.0, 0.0); 5]).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        assert_eq!(basis.dimension(), 5);
        let z = c(0.3, -0.7);
        for (k, e) in basis.eval(z).iter().enumerate() {
            assert!((e - z.powu(k as u32)).norm() < 1e-15);
        }
    }

    #[test]
    fn gram_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for deg in [6, 12] {
            let b = random_product(&mut rng, deg, 0.95);
            let basis = ModelBasis::new(&b).unwrap();
            assert!(max_identity_deviation(&basis.gram()) < 1e-10);
        }
    }

    #[test]
    fn undersized_quadrature_is_rejected() {
        let b = BlaschkeProduct::normalized(&[c(0.999, 0.0), c(-0.5, 0.2)]).unwrap();
        assert!(matches!(tm_basis(&b, 16), Err(Error::Quadrature(_))));
        assert!(matches!(tm_basis(&b, 8), Err(Error::Quadrature(_))));
    }

    #[test]
    fn completeness_matches_kernel_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = random_product(&mut rng, 7, 0.9);
        let basis = ModelBasis::new(&b).unwrap();
        for _ in 0..20 {
            let w = Complex64::from_polar(0.95 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let s: f64 = basis.eval(w).iter().map(|e| e.norm_sqr()).sum();
            let k = reproducing_kernel(&b, w, w).re;
            assert!(((s - k) / k).abs() < 1e-9);
        }
    }

    #[test]
    fn kernel_at_origin_when_b_vanishes_there() {
        let b = BlaschkeProduct::normalized(&[c(0.0, 0.0), c(0.3, 0.4)]).unwrap();
        for z in [c(0.1, 0.2), c(-0.8, 0.0), c(0.0, 1.0)] {
            assert!((reproducing_kernel(&b, c(0.0, 0.0), z) - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn kernel_symmetry_and_branches_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = random_product(&mut rng, 6, 0.9);
        for _ in 0..50 {
            let w = Complex64::from_polar(rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let z = Complex64::from_polar(rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let kwz = reproducing_kernel(&b, w, z);
            assert!((kwz - reproducing_kernel(&b, z, w).conj()).norm() < 1e-12);
        }
        // the telescoped branch continues the closed form across the threshold
        let zeta = Complex64::from_polar(1.0, 0.7);
        let near = Complex64::from_polar(1.0, 0.7 + 2e-4);
        let closed = reproducing_kernel(&b, zeta, near);
        let tele = reproducing_kernel(&b, zeta, Complex64::from_polar(1.0, 0.7 + 9e-5));
        assert!((closed - tele).norm() < 1e-3 * closed.norm());
    }

    #[test]
    fn boundary_kernel_norm_is_derivative() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let b = random_product(&mut rng, 8, 0.9);
        let basis = ModelBasis::new(&b).unwrap();
        for _ in 0..16 {
            let t = TAU * rng.gen::<f64>();
            let zeta = Complex64::from_polar(1.0, t);
            let d = b.boundary_derivative_modulus(t);
            let diag = reproducing_kernel(&b, zeta, zeta);
            assert!((diag.re - d).abs() < 1e-8 * d && diag.im.abs() < 1e-12 * d);
            let samples = basis.sample(|z| reproducing_kernel(&b, zeta, z));
            let norm2 = inner_product(&samples, &samples).unwrap().re;
            assert!(((norm2 - d) / d).abs() < 1e-8);
        }
    }

    #[test]
    fn reproducing_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = random_product(&mut rng, 6, 0.85);
        let basis = ModelBasis::new(&b).unwrap();
        let coeffs = DVector::from_fn(6, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let f = basis.sample(|z| basis.eval_combination(&coeffs, z));
        let fnorm = coeffs.norm();
        for _ in 0..32 {
            let w = Complex64::from_polar(0.9 * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let k = basis.sample(|z| reproducing_kernel(&b, w, z));
            let ip = inner_product(&f, &k).unwrap();
            assert!((ip - basis.eval_combination(&coeffs, w)).norm() < 1e-10 * fnorm.max(1.0));
        }
        let w = c(0.3, 0.5);
        let k = basis.sample(|z| reproducing_kernel(&b, w, z));
        let kk = inner_product(&k, &k).unwrap();
        assert!((kk - reproducing_kernel(&b, w, w)).norm() < 1e-10);
    }

    #[test]
    fn inner_product_of_exponentials() {
        let m = 256;
        let nodes: Vec<_> = (0..m)
            .map(|i| Complex64::from_polar(1.0, TAU * i as f64 / m as f64))
            .collect();
        for j in 0..=8u32 {
            for k in 0..=8u32 {
                let f: Vec<_> = nodes.iter().map(|z| z.powu(j)).collect();
                let g: Vec<_> = nodes.iter().map(|z| z.powu(k)).collect();
                let ip = inner_product(&f, &g).unwrap();
                let target = if j == k { 1.0 } else { 0.0 };
                assert!((ip - target).norm() < 1e-14);
            }
        }
        let ones = vec![c(1.0, 0.0); 10];
        assert!((inner_product(&ones, &ones).unwrap() - 1.0).norm() < 1e-15);
        assert!(matches!(
            inner_product(&ones, &ones[..3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn expansions() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b = random_product(&mut rng, 5, 0.8);
        let basis = ModelBasis::new(&b).unwrap();
        for j in 0..5 {
            let ex = basis.expand_fn(|z| basis.eval(z)[j]);
            for k in 0..5 {
                let target = if j == k { 1.0 } else { 0.0 };
                assert!((ex.coefficients[k] - target).norm() < 1e-10);
            }
            assert!(ex.residual < 1e-10);
        }
        let w = c(-0.4, 0.3);
        let ex = basis.expand_fn(|z| reproducing_kernel(&b, w, z));
        for _ in 0..16 {
            let z = Complex64::from_polar(rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let v = basis.eval_combination(&ex.coefficients, z);
            assert!((v - reproducing_kernel(&b, w, z)).norm() < 1e-9);
        }
        let ex = basis.expand_fn(|z| b.eval(z) * z);
        assert!(ex.coefficients.norm() < 1e-10);
        assert!((ex.residual - 1.0).abs() < 1e-10);
    }

    #[test]
    fn origin_zero_is_placed_first() {
        let b = BlaschkeProduct::normalized(&[c(0.5, 0.1), c(0.0, 0.0), c(-0.2, 0.3)]).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        assert_eq!(basis.ordered_zeros()[0], c(0.0, 0.0));
        let z = c(0.4, -0.1);
        let e = basis.eval(z);
        assert!((e[0] - 1.0).norm() < 1e-15);
        for v in &basis.eval(c(0.0, 0.0))[1..] {
            assert!(v.norm() < 1e-15);
        }
    }
}
