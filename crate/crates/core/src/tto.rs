//! Operator matrices on `K_B`.
//!
//! Every matrix is expressed in a [`ModelBasis`] and carries its tag; entries of
//! truncated Toeplitz operators come from the basis quadrature,
//! `A_{jk} = ⟨ψ e_k, e_j⟩`. Operators built from Clark atoms (Sedlock spectral
//! forms, `D_ν`, `Δ_B^α`) use the exact kernel coordinates `conj(e_k(ζ))` and
//! need no quadrature.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::blaschke::{mobius, mobius_unchecked, BlaschkeProduct};
use crate::clark::{alpha_nodes, check_unimodular, clark_measure, level_set};
use crate::error::{Error, Result};
use crate::modelspace::{default_quadrature, quadrature_form, tm_basis, BasisTag, ModelBasis};
use crate::parallel::map_ordered;

/// Deviation from self-adjointness tolerated by [`functional_calculus`].
pub const SELF_ADJOINT_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    entries: DMatrix<Complex64>,
    basis_tag: BasisTag,
}

impl OperatorMatrix {
    pub fn new(entries: DMatrix<Complex64>, basis_tag: BasisTag) -> Self {
        Self { entries, basis_tag }
    }

    pub fn identity(basis: &ModelBasis) -> Self {
        let n = basis.dimension();
        Self::new(DMatrix::identity(n, n), basis.tag())
    }

    /// `x ⊗ y : f ↦ ⟨f, y⟩ x` from coordinate vectors.
    pub fn rank_one(x: &DVector<Complex64>, y: &DVector<Complex64>, basis_tag: BasisTag) -> Self {
        Self::new(x * y.adjoint(), basis_tag)
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn basis_tag(&self) -> BasisTag {
        self.basis_tag
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    fn same_basis(&self, other: &Self) -> Result<()> {
        if self.basis_tag != other.basis_tag {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.entries.adjoint(), self.basis_tag)
    }

    /// `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(Self::new(&self.entries * &other.entries, self.basis_tag))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(Self::new(&self.entries + &other.entries, self.basis_tag))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(Self::new(&self.entries - &other.entries, self.basis_tag))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(&self.entries * c, self.basis_tag)
    }

    pub fn power(&self, p: u32) -> Self {
        let n = self.dimension();
        let mut acc = DMatrix::<Complex64>::identity(n, n);
        for _ in 0..p {
            acc = &acc * &self.entries;
        }
        Self::new(acc, self.basis_tag)
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn frobenius_distance(&self, other: &Self) -> Result<f64> {
        self.same_basis(other)?;
        Ok((&self.entries - &other.entries).norm())
    }

    /// `max |A − A*|` entrywise.
    pub fn self_adjoint_deviation(&self) -> f64 {
        let d = &self.entries - self.entries.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `‖A*A − I‖` in the operator norm.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dimension();
        let d = self.entries.ad_mul(&self.entries) - DMatrix::<Complex64>::identity(n, n);
        d.svd(false, false).singular_values.max()
    }

    /// Eigenvalues from the complex Schur form.
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let (_, t) = nalgebra::Schur::new(self.entries.clone()).unpack();
        t.diagonal().iter().copied().collect()
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self
            .entries
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    /// Row-major CSV, one quoted `re,im` cell per entry.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        for j in 0..self.entries.nrows() {
            let row: Vec<String> = (0..self.entries.ncols())
                .map(|k| {
                    let z = self.entries[(j, k)];
                    format!("\"{:e},{:e}\"", z.re, z.im)
                })
                .collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// `ψ = ψ₊ + conj(B) ψ₋` with `ψ₊ ∈ K_B` and `ψ₋ ∈ zK_{B̂}`; requires `B(0) = 0`.
///
/// `plus_part` holds coordinates on `e_0, …, e_{N−1}` and `minus_part` on
/// `e_1, …, e_{N−1}`, which span `zK_{B̂}` because the origin zero comes first.
#[derive(Debug, Clone)]
pub struct StandardSymbol {
    basis: ModelBasis,
    plus_part: DVector<Complex64>,
    minus_part: DVector<Complex64>,
}

impl StandardSymbol {
    pub fn new(basis: &ModelBasis, plus_part: DVector<Complex64>, minus_part: DVector<Complex64>) -> Result<Self> {
        require_origin_zero(basis)?;
        let n = basis.dimension();
        if plus_part.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: plus_part.len(),
            });
        }
        if minus_part.len() != n - 1 {
            return Err(Error::DimensionMismatch {
                expected: n - 1,
                got: minus_part.len(),
            });
        }
        Ok(Self {
            basis: basis.clone(),
            plus_part,
            minus_part,
        })
    }

    /// Extracts the standard symbol of a boundary function by projection:
    /// `ψ₊ = P_B ψ`, `ψ₋ = P_B(B(ψ − ψ₊))`. Returns the RMS reconstruction
    /// residual alongside.
    pub fn from_boundary<F>(basis: &ModelBasis, f: F) -> Result<(Self, f64)>
    where
        F: Fn(Complex64) -> Complex64,
    {
        require_origin_zero(basis)?;
        let samples = basis.sample(&f);
        let plus = crate::modelspace::expand(&samples, basis)?.coefficients;
        let product = basis.product();
        let minus_full = basis
            .expand_fn(|z| product.eval(z) * (f(z) - basis.eval_combination(&plus, z)))
            .coefficients;
        let n = basis.dimension();
        let minus = minus_full.rows(1, n - 1).into_owned();
        let symbol = Self::new(basis, plus, minus)?;
        let mut err = 0.0;
        for (i, s) in samples.iter().enumerate() {
            err += (s - symbol.eval(basis.node(i))).norm_sqr();
        }
        let residual = (err / samples.len() as f64).sqrt();
        Ok((symbol, residual))
    }

    pub fn basis(&self) -> &ModelBasis {
        &self.basis
    }

    pub fn plus_part(&self) -> &DVector<Complex64> {
        &self.plus_part
    }

    pub fn minus_part(&self) -> &DVector<Complex64> {
        &self.minus_part
    }

    pub fn plus_eval(&self, z: Complex64) -> Complex64 {
        self.basis.eval_combination(&self.plus_part, z)
    }

    pub fn minus_eval(&self, z: Complex64) -> Complex64 {
        let e = self.basis.eval(z);
        e[1..].iter().zip(self.minus_part.iter()).map(|(a, b)| a * b).sum()
    }

    /// `ψ(ζ)` for `ζ` on the circle.
    pub fn eval(&self, zeta: Complex64) -> Complex64 {
        self.plus_eval(zeta) + self.basis.product().eval(zeta).conj() * self.minus_eval(zeta)
    }
}

fn require_origin_zero(basis: &ModelBasis) -> Result<()> {
    if basis.product().vanishes_at_origin() {
        Ok(())
    } else {
        Err(Error::NonVanishingAtOrigin)
    }
}

/// Matrix of `P_B M_ψ |K_B`.
pub fn build_tto<F>(basis: &ModelBasis, symbol: F) -> OperatorMatrix
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    OperatorMatrix::new(basis.weighted_form(symbol), basis.tag())
}

/// Modified compressed shift `S_B^α = S_B + α (1 ⊗ B̂)`.
pub fn modified_shift(basis: &ModelBasis, alpha: Complex64) -> Result<OperatorMatrix> {
    require_origin_zero(basis)?;
    check_unimodular(alpha)?;
    let shift = build_tto(basis, |z| z);
    let product = basis.product();
    let one = unit_vector(basis.dimension(), 0);
    let b_hat = basis
        .expand_fn(|z| product.eval_deflated(z).expect("origin zero checked"))
        .coefficients;
    let corner = OperatorMatrix::rank_one(&one, &b_hat, basis.tag()).scale(alpha);
    shift.add(&corner)
}

fn unit_vector(n: usize, k: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(n);
    v[k] = Complex64::new(1.0, 0.0);
    v
}

/// Sedlock-algebra element `T_B[φ + α conj(B)(φ − φ(0))]` for `φ ∈ K_B` given
/// by its coordinates.
pub fn sedlock_element(basis: &ModelBasis, alpha: Complex64, phi: &DVector<Complex64>) -> Result<OperatorMatrix> {
    require_origin_zero(basis)?;
    check_unimodular(alpha)?;
    if phi.len() != basis.dimension() {
        return Err(Error::DimensionMismatch {
            expected: basis.dimension(),
            got: phi.len(),
        });
    }
    let product = basis.product();
    let phi0 = basis.eval_combination(phi, Complex64::new(0.0, 0.0));
    Ok(build_tto(basis, |z| {
        let f = basis.eval_combination(phi, z);
        f + alpha * product.eval(z).conj() * (f - phi0)
    }))
}

/// Unit vectors `k_ζ/‖k_ζ‖` at the given boundary points.
pub fn normalized_kernels(basis: &ModelBasis, atoms: &[Complex64]) -> Vec<DVector<Complex64>> {
    atoms
        .iter()
        .map(|&z| {
            let k = basis.kernel_coefficients(z);
            let norm = k.norm();
            k / Complex64::new(norm, 0.0)
        })
        .collect()
}

fn spectral_sum(
    basis: &ModelBasis,
    kernels: &[DVector<Complex64>],
    values: impl Iterator<Item = Complex64>,
) -> OperatorMatrix {
    let n = basis.dimension();
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for (u, v) in kernels.iter().zip(values) {
        acc += (u * u.adjoint()) * v;
    }
    OperatorMatrix::new(acc, basis.tag())
}

/// `Σ_k φ(ζ_k^α) (k_{ζ_k}/‖k_{ζ_k}‖) ⊗ (k_{ζ_k}/‖k_{ζ_k}‖)`, i.e. `φ(S_B^α)`.
pub fn sedlock_spectral<F>(basis: &ModelBasis, alpha: Complex64, phi: F) -> Result<OperatorMatrix>
where
    F: Fn(Complex64) -> Complex64,
{
    require_origin_zero(basis)?;
    let atoms = level_set(basis.product(), alpha)?;
    let kernels = normalized_kernels(basis, &atoms);
    Ok(spectral_sum(basis, &kernels, atoms.iter().map(|&z| phi(z))))
}

/// `D_ν` for weights listed in Clark-atom order.
pub fn diag_operator(basis: &ModelBasis, alpha: Complex64, weights: &[f64]) -> Result<OperatorMatrix> {
    if weights.len() != basis.dimension() {
        return Err(Error::DimensionMismatch {
            expected: basis.dimension(),
            got: weights.len(),
        });
    }
    let atoms = level_set(basis.product(), alpha)?;
    let kernels = normalized_kernels(basis, &atoms);
    Ok(spectral_sum(
        basis,
        &kernels,
        weights.iter().map(|&w| Complex64::new(w, 0.0)),
    ))
}

/// `Δ_B^α = D_{μ_α^B}`.
pub fn delta_operator(basis: &ModelBasis, alpha: Complex64) -> Result<OperatorMatrix> {
    let mu = clark_measure(basis.product(), alpha)?;
    let kernels = normalized_kernels(basis, mu.atoms());
    Ok(spectral_sum(
        basis,
        &kernels,
        mu.weights().iter().map(|&w| Complex64::new(w, 0.0)),
    ))
}

/// Midpoint average of `Δ_B^α` over `count` equispaced `α`.
pub fn delta_average(basis: &ModelBasis, count: usize) -> Result<OperatorMatrix> {
    if count == 0 {
        return Err(Error::InvalidArgument("need at least one alpha node".into()));
    }
    let parts = map_ordered(alpha_nodes(count), |a| delta_operator(basis, a));
    let n = basis.dimension();
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for part in parts {
        acc += part?.into_entries();
    }
    Ok(OperatorMatrix::new(
        acc / Complex64::new(count as f64, 0.0),
        basis.tag(),
    ))
}

/// Matrix of `U_a f = √(b_a') · f ∘ b_a` from `K_B` to `K_{B^a}`.
#[derive(Debug, Clone)]
pub struct Transplant {
    entries: DMatrix<Complex64>,
    from_tag: BasisTag,
    to_tag: BasisTag,
}

impl Transplant {
    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// `U A U*`, carrying an operator on `K_B` to `K_{B^a}`.
    pub fn conjugate(&self, op: &OperatorMatrix) -> Result<OperatorMatrix> {
        if op.basis_tag() != self.from_tag {
            return Err(Error::BasisMismatch);
        }
        Ok(OperatorMatrix::new(
            &self.entries * op.entries() * self.entries.adjoint(),
            self.to_tag,
        ))
    }

    pub fn unitarity_defect(&self) -> f64 {
        OperatorMatrix::new(self.entries.clone(), self.to_tag).unitarity_defect()
    }
}

pub fn transplant_unitary(from: &ModelBasis, a: Complex64, to: &ModelBasis) -> Result<Transplant> {
    mobius(a, Complex64::new(0.0, 0.0))?;
    let expected = from.product().compose_with_automorphism_guarded(a, 0.0)?;
    if !same_zero_multiset(expected.zeros(), to.product().zeros(), 1e-10) {
        return Err(Error::BasisMismatch);
    }
    let n = from.dimension();
    let scale = (1.0 - a.norm_sqr()).sqrt();
    let one = Complex64::new(1.0, 0.0);
    let entries = quadrature_form(
        to.quadrature_points(),
        n,
        n,
        |z, row| to.eval_into(z, row),
        |z, row| {
            from.eval_into(mobius_unchecked(a, z), row);
            let s = scale / (one - a.conj() * z);
            for v in row.iter_mut() {
                *v *= s;
            }
        },
        |_| one,
    );
    Ok(Transplant {
        entries,
        from_tag: from.tag(),
        to_tag: to.tag(),
    })
}

fn same_zero_multiset(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter()
        .all(|x| match (0..b.len()).find(|&j| !used[j] && (b[j] - x).norm() <= tol) {
            Some(j) => {
                used[j] = true;
                true
            }
            None => false,
        })
}

/// Pieces of the circulant approximation on the enlarged space `K_u`, `u = Bv`.
#[derive(Debug, Clone)]
pub struct CirculantApproximant {
    pub basis: ModelBasis,
    /// `φ = ψ₊ + conj(α) v ψ₋` in the basis of `K_u`.
    pub phi: DVector<Complex64>,
    pub sedlock_op: OperatorMatrix,
    pub tto_op: OperatorMatrix,
    /// `T_u[v ψ₋]`.
    pub corner_minus: OperatorMatrix,
    /// `T_u[conj(u)(ψ₊ − ψ₊(0))]`.
    pub corner_plus: OperatorMatrix,
    pub alpha: Complex64,
}

impl CirculantApproximant {
    /// Frobenius norm of `sedlock − tto − (conj(α) corner₋ + α corner₊)`.
    pub fn identity_residual(&self) -> Result<f64> {
        let lhs = self.sedlock_op.sub(&self.tto_op)?;
        let rhs = self
            .corner_minus
            .scale(self.alpha.conj())
            .add(&self.corner_plus.scale(self.alpha))?;
        lhs.frobenius_distance(&rhs)
    }
}

pub fn circulant_approximant(
    v: &BlaschkeProduct,
    alpha: Complex64,
    symbol: &StandardSymbol,
) -> Result<CirculantApproximant> {
    check_unimodular(alpha)?;
    let b_basis = symbol.basis();
    let u = b_basis.product().multiply(v);
    let m = default_quadrature(&u).max(b_basis.quadrature_points());
    let basis = tm_basis(&u, m)?;
    let plus0 = symbol.plus_eval(Complex64::new(0.0, 0.0));
    let phi_fn = |z: Complex64| symbol.plus_eval(z) + alpha.conj() * v.eval(z) * symbol.minus_eval(z);
    let phi = basis.expand_fn(phi_fn).coefficients;
    let sedlock_op = sedlock_element(&basis, alpha, &phi)?;
    let tto_op = build_tto(&basis, |z| symbol.eval(z));
    let corner_minus = build_tto(&basis, |z| v.eval(z) * symbol.minus_eval(z));
    let corner_plus = build_tto(&basis, |z| u.eval(z).conj() * (symbol.plus_eval(z) - plus0));
    Ok(CirculantApproximant {
        basis,
        phi,
        sedlock_op,
        tto_op,
        corner_minus,
        corner_plus,
        alpha,
    })
}

/// Schatten `p`-norm; `p = f64::INFINITY` gives the operator norm.
pub fn schatten_norm(op: &OperatorMatrix, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.0 {
        return Err(Error::InvalidArgument(format!("Schatten order {p}")));
    }
    let s = op.singular_values();
    if p.is_infinite() {
        return Ok(s.first().copied().unwrap_or(0.0));
    }
    Ok(s.iter().map(|x| x.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// `g(A)` for self-adjoint `A`, through the eigendecomposition of `(A + A*)/2`.
pub fn functional_calculus<G>(op: &OperatorMatrix, g: G) -> Result<OperatorMatrix>
where
    G: Fn(f64) -> f64,
{
    let dev = op.self_adjoint_deviation();
    if dev > SELF_ADJOINT_TOLERANCE {
        return Err(Error::NotSelfAdjoint(dev));
    }
    let h = (op.entries() + op.entries().adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let vals = eig.eigenvalues.map(|x| Complex64::new(g(x), 0.0));
    let v = &eig.eigenvectors;
    let out = v * DMatrix::from_diagonal(&vals) * v.adjoint();
    Ok(OperatorMatrix::new(out, op.basis_tag()))
}

/// `T_B[B/z] = (B/z) ⊗ 1`, the rank-one operator `k̃₀ ⊗ k₀`.
pub fn rank_one_special(basis: &ModelBasis) -> Result<OperatorMatrix> {
    require_origin_zero(basis)?;
    let product = basis.product();
    let x = basis
        .expand_fn(|z| product.eval_deflated(z).expect("origin zero checked"))
        .coefficients;
    let one = unit_vector(basis.dimension(), 0);
    Ok(OperatorMatrix::rank_one(&x, &one, basis.tag()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_zeros(rng: &mut ChaCha8Rng, n: usize, rmax: f64) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::from_polar(rmax * rng.gen::<f64>().sqrt(), TAU * rng.gen::<f64>()))
            .collect()
    }

    fn origin_product(rng: &mut ChaCha8Rng, n: usize) -> BlaschkeProduct {
        let mut zeros = random_zeros(rng, n, 0.85);
        zeros[0] = c(0.0, 0.0);
        BlaschkeProduct::normalized(&zeros).unwrap()
    }

    fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<Complex64> {
        DVector::from_fn(n, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    #[test]
    fn constant_symbol_gives_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = BlaschkeProduct::normalized(&random_zeros(&mut rng, 6, 0.9)).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        let t = build_tto(&basis, |_| c(1.0, 0.0));
        assert!(t.frobenius_distance(&OperatorMatrix::identity(&basis)).unwrap() < 1e-10);
    }

    #[test]
    fn conjugate_symbol_gives_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = BlaschkeProduct::normalized(&random_zeros(&mut rng, 5, 0.9)).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        let psi = |z: Complex64| z * z + c(0.3, -0.2) * z.conj() + (z * 2.0).exp();
        let t = build_tto(&basis, psi);
        let ts = build_tto(&basis, |z| psi(z).conj());
        assert!(ts.frobenius_distance(&t.adjoint()).unwrap() < 1e-12);
    }

    #[test]
    fn shift_on_two_dimensional_space() {
        let b = BlaschkeProduct::normalized(&[c(0.0, 0.0); 2]).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        let s = modified_shift(&basis, c(1.0, 0.0)).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((s.entries() - expect).norm() < 1e-12);
    }

    #[test]
    fn modified_shift_requires_origin_zero() {
        let b = BlaschkeProduct::normalized(&[c(0.3, 0.0), c(0.1, 0.2)]).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        assert!(matches!(
            modified_shift(&basis, c(1.0, 0.0)),
            Err(Error::NonVanishingAtOrigin)
        ));
        assert!(matches!(rank_one_special(&basis), Err(Error::NonVanishingAtOrigin)));
    }

    #[test]
    fn modified_shift_unitary_with_clark_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = origin_product(&mut rng, 8);
        let basis = ModelBasis::new(&b).unwrap();
        let alpha = Complex64::from_polar(1.0, 0.9);
        let s = modified_shift(&basis, alpha).unwrap();
        assert!(s.unitarity_defect() < 1e-10);
        let atoms = level_set(&b, alpha).unwrap();
        let eig = s.eigenvalues();
        for z in &atoms {
            let best = eig.iter().map(|e| (e - z).norm()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8);
        }
    }

    #[test]
    fn sedlock_identity_shift_and_commutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = origin_product(&mut rng, 7);
        let basis = ModelBasis::new(&b).unwrap();
        let alpha = Complex64::from_polar(1.0, -2.1);
        let one = unit_vector(7, 0);
        let t = sedlock_element(&basis, alpha, &one).unwrap();
        assert!(t.frobenius_distance(&OperatorMatrix::identity(&basis)).unwrap() < 1e-10);

        let phi = random_vec(&mut rng, 7);
        let t = sedlock_element(&basis, alpha, &phi).unwrap();
        let s = modified_shift(&basis, alpha).unwrap();
        let comm = s.compose(&t).unwrap().sub(&t.compose(&s).unwrap()).unwrap();
        assert!(comm.frobenius_norm() < 1e-9);
    }

    #[test]
    fn alpha_circulant_in_classical_case() {
        let n = 6;
        let b = BlaschkeProduct::normalized(&vec![c(0.0, 0.0); n]).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        let alpha = Complex64::from_polar(1.0, 0.4);
        let z = unit_vector(n, 1);
        let t = sedlock_element(&basis, alpha, &z).unwrap();
        // (-z)^n has conj(B) = (-1)^n z^{-n}: the corner picks up that sign
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        let mut expect = DMatrix::<Complex64>::zeros(n, n);
        for j in 1..n {
            expect[(j, j - 1)] = c(1.0, 0.0);
        }
        expect[(0, n - 1)] = alpha * sign;
        assert!((t.entries() - expect).norm() < 1e-10);
    }

    #[test]
    fn sedlock_spectral_form_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [3, 6, 10] {
            let b = origin_product(&mut rng, n);
            let basis = ModelBasis::new(&b).unwrap();
            let alpha = Complex64::from_polar(1.0, TAU * rng.gen::<f64>());
            let phi = random_vec(&mut rng, n);
            let t = sedlock_element(&basis, alpha, &phi).unwrap();
            let spec = sedlock_spectral(&basis, alpha, |z| basis.eval_combination(&phi, z)).unwrap();
            assert!(t.frobenius_distance(&spec).unwrap() < 1e-8);
            let cst = sedlock_spectral(&basis, alpha, |_| c(2.0, 1.0)).unwrap();
            let expect = OperatorMatrix::identity(&basis).scale(c(2.0, 1.0));
            assert!(cst.frobenius_distance(&expect).unwrap() < 1e-10);
        }
    }

    #[test]
    fn diagonal_operators() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = BlaschkeProduct::normalized(&random_zeros(&mut rng, 6, 0.9)).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        let alpha = Complex64::from_polar(1.0, 1.3);
        let id = diag_operator(&basis, alpha, &[1.0; 6]).unwrap();
        assert!(id.frobenius_distance(&OperatorMatrix::identity(&basis)).unwrap() < 1e-10);
        let w = [0.5, 1.5, 2.0, 0.1, 0.7, 3.0];
        let d = diag_operator(&basis, alpha, &w).unwrap();
        assert!((d.trace().re - w.iter().sum::<f64>()).abs() < 1e-10);
        assert!(matches!(
            diag_operator(&basis, alpha, &w[..5]),
            Err(Error::DimensionMismatch { .. })
        ));
        let mu = clark_measure(&b, alpha).unwrap();
        let delta = delta_operator(&basis, alpha).unwrap();
        let via_diag = diag_operator(&basis, alpha, mu.weights()).unwrap();
        assert!(delta.frobenius_distance(&via_diag).unwrap() < 1e-14);
    }

    #[test]
    fn delta_of_power_is_scaled_identity() {
        for n in [3usize, 4] {
            let b = BlaschkeProduct::normalized(&vec![c(0.0, 0.0); n]).unwrap();
            let basis = ModelBasis::new(&b).unwrap();
            let alpha = if n % 2 == 0 { c(1.0, 0.0) } else { c(-1.0, 0.0) };
            let d = delta_operator(&basis, alpha).unwrap();
            let expect = OperatorMatrix::identity(&basis).scale(c(1.0 / n as f64, 0.0));
            assert!(d.frobenius_distance(&expect).unwrap() < 1e-12);
        }
    }

    #[test]
    fn delta_trace_norm_and_clark_trace_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let b = origin_product(&mut rng, 7);
        let basis = ModelBasis::new(&b).unwrap();
        let alpha = Complex64::from_polar(1.0, 0.3);
        let d = delta_operator(&basis, alpha).unwrap();
        assert!((schatten_norm(&d, 1.0).unwrap() - 1.0).abs() < 1e-9);
        assert!((d.trace() - 1.0).norm() < 1e-9);
        let phi = random_vec(&mut rng, 7);
        let t = sedlock_element(&basis, alpha, &phi).unwrap();
        let mu = clark_measure(&b, alpha).unwrap();
        for p in 1..=3 {
            let lhs = d.compose(&t.power(p)).unwrap().trace();
            let rhs = mu.integrate(|z| basis.eval_combination(&phi, z).powu(p));
            assert!((lhs - rhs).norm() < 1e-8);
        }
    }

    #[test]
    fn general_weight_trace_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let b = origin_product(&mut rng, 6);
        let basis = ModelBasis::new(&b).unwrap();
        let alpha = Complex64::from_polar(1.0, 2.5);
        let atoms = level_set(&b, alpha).unwrap();
        let weights: Vec<f64> = (0..6).map(|_| 0.1 + rng.gen::<f64>()).collect();
        let d = diag_operator(&basis, alpha, &weights).unwrap();
        let phi = random_vec(&mut rng, 6);
        let t = sedlock_element(&basis, alpha, &phi).unwrap();
        for p in 1..=3 {
            let lhs = d.compose(&t.power(p)).unwrap().trace();
            let rhs: Complex64 = atoms
                .iter()
                .zip(&weights)
                .map(|(&z, &w)| basis.eval_combination(&phi, z).powu(p) * w)
                .sum();
            assert!((lhs - rhs).norm() < 1e-8);
        }
    }

    #[test]
    fn alpha_average_of_delta_is_weight_tto() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b = BlaschkeProduct::normalized(&random_zeros(&mut rng, 5, 0.8)).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        let nodes = alpha_nodes(512);
        let mut acc = OperatorMatrix::new(DMatrix::zeros(5, 5), basis.tag());
        for &a in &nodes {
            acc = acc.add(&delta_operator(&basis, a).unwrap()).unwrap();
        }
        let avg = acc.scale(c(1.0 / nodes.len() as f64, 0.0));
        let w = build_tto(&basis, |z| c(1.0 / b.derivative_modulus_at(z), 0.0));
        assert!(avg.frobenius_distance(&w).unwrap() < 1e-6);
    }

    #[test]
    fn transplant_is_unitary_and_conjugates() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let b = BlaschkeProduct::normalized(&random_zeros(&mut rng, 5, 0.8)).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        let same = transplant_unitary(&basis, c(0.0, 0.0), &basis).unwrap();
        assert!((same.entries() - DMatrix::<Complex64>::identity(5, 5)).norm() < 1e-10);

        let a = c(-0.3, 0.4);
        let ba = b.compose_with_automorphism(a).unwrap();
        let to = ModelBasis::new(&ba).unwrap();
        let u = transplant_unitary(&basis, a, &to).unwrap();
        assert!(u.unitarity_defect() < 1e-9);
        let psi = |z: Complex64| z.conj() * 2.0 + z * z + c(0.5, 0.0);
        let t = build_tto(&basis, psi);
        let moved = build_tto(&to, |z| psi(mobius_unchecked(a, z)));
        assert!(u.conjugate(&t).unwrap().frobenius_distance(&moved).unwrap() < 1e-8);

        // U Δ U* = D over η_k = b_{-a}(ζ_k) carrying the original weights
        let alpha = Complex64::from_polar(1.0, 1.1);
        let delta = delta_operator(&basis, alpha).unwrap();
        let mu_a = clark_measure(&ba, alpha).unwrap();
        let scaled: Vec<f64> = mu_a
            .atoms()
            .iter()
            .zip(mu_a.weights())
            .map(|(&eta, &w)| w * crate::blaschke::mobius_derivative_modulus(a, eta))
            .collect();
        let d = diag_operator(&to, alpha, &scaled).unwrap();
        assert!(u.conjugate(&delta).unwrap().frobenius_distance(&d).unwrap() < 1e-8);

        let wrong = ModelBasis::new(&b).unwrap();
        assert!(matches!(
            transplant_unitary(&basis, a, &wrong),
            Err(Error::BasisMismatch)
        ));
    }

    #[test]
    fn basis_tags_are_enforced() {
        let b1 = BlaschkeProduct::normalized(&[c(0.1, 0.0), c(0.2, 0.0)]).unwrap();
        let b2 = BlaschkeProduct::normalized(&[c(0.3, 0.0), c(0.2, 0.0)]).unwrap();
        let i1 = OperatorMatrix::identity(&ModelBasis::new(&b1).unwrap());
        let i2 = OperatorMatrix::identity(&ModelBasis::new(&b2).unwrap());
        assert!(matches!(i1.compose(&i2), Err(Error::BasisMismatch)));
    }

    #[test]
    fn schatten_norms() {
        let b = BlaschkeProduct::normalized(&[c(0.0, 0.0); 4]).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        let id = OperatorMatrix::identity(&basis);
        assert!((schatten_norm(&id, 1.0).unwrap() - 4.0).abs() < 1e-12);
        let x = DVector::from_vec(vec![c(1.0, 2.0), c(0.0, -1.0), c(0.5, 0.0), c(0.0, 0.0)]);
        let r = OperatorMatrix::rank_one(&x, &x, basis.tag());
        for p in [0.5, 1.0, 2.0, 3.0, f64::INFINITY] {
            assert!((schatten_norm(&r, p).unwrap() - x.norm_squared()).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = OperatorMatrix::new(DMatrix::from_fn(4, 4, |_, _| c(rng.gen(), rng.gen())), basis.tag());
        assert!((schatten_norm(&a, 2.0).unwrap() - a.frobenius_norm()).abs() < 1e-12);
        assert!(schatten_norm(&a, 0.0).is_err());
    }

    #[test]
    fn functional_calculus_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let b = BlaschkeProduct::normalized(&random_zeros(&mut rng, 6, 0.8)).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        let t = build_tto(&basis, |z| c(2.0 * z.re + (3.0 * z.im).sin(), 0.0));
        let same = functional_calculus(&t, |x| x).unwrap();
        assert!(same.frobenius_distance(&t).unwrap() < 1e-10);
        let cst = functional_calculus(&t, |_| 1.5).unwrap();
        let expect = OperatorMatrix::identity(&basis).scale(c(1.5, 0.0));
        assert!(cst.frobenius_distance(&expect).unwrap() < 1e-10);
        let cube = functional_calculus(&t, |x| x * x * x).unwrap();
        assert!(cube.frobenius_distance(&t.power(3)).unwrap() < 1e-9);
        let skew = build_tto(&basis, |z| z);
        assert!(matches!(
            functional_calculus(&skew, |x| x),
            Err(Error::NotSelfAdjoint(_))
        ));
    }

    #[test]
    fn rank_one_special_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let b = origin_product(&mut rng, 6);
        let basis = ModelBasis::new(&b).unwrap();
        let r = rank_one_special(&basis).unwrap();
        let q = build_tto(&basis, |z| b.eval(z) * z.conj());
        assert!(r.frobenius_distance(&q).unwrap() < 1e-9);
        let s = r.singular_values();
        assert!(s[1] < 1e-10);
        // trace = ⟨B/z, 1⟩ = Taylor coefficient of z in B
        let h = 1e-3;
        let coeff: Complex64 = (0..64)
            .map(|k| {
                let z = Complex64::from_polar(h, TAU * k as f64 / 64.0);
                b.eval(z) / z
            })
            .sum::<Complex64>()
            / 64.0;
        assert!((r.trace() - coeff).norm() < 1e-9);
    }

    #[test]
    fn standard_symbol_extraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let b = origin_product(&mut rng, 5);
        let basis = ModelBasis::new(&b).unwrap();
        let plus = random_vec(&mut rng, 5);
        let mut minus = random_vec(&mut rng, 4);
        minus[0] *= 2.0;
        let sym = StandardSymbol::new(&basis, plus.clone(), minus.clone()).unwrap();
        let (back, residual) = StandardSymbol::from_boundary(&basis, |z| sym.eval(z)).unwrap();
        assert!(residual < 1e-9);
        assert!((back.plus_part() - &plus).norm() < 1e-9);
        assert!((back.minus_part() - &minus).norm() < 1e-9);
        assert!(sym.minus_eval(c(0.0, 0.0)).norm() < 1e-15);
        assert!(StandardSymbol::new(&basis, plus, random_vec(&mut rng, 5)).is_err());
    }

    #[test]
    fn circulant_approximation_identity_and_corner_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let b = origin_product(&mut rng, 3);
        let basis = ModelBasis::new(&b).unwrap();
        let sym = StandardSymbol::new(&basis, random_vec(&mut rng, 3), random_vec(&mut rng, 2)).unwrap();
        let alpha = Complex64::from_polar(1.0, 0.8);
        let v4 = BlaschkeProduct::normalized(&random_zeros(&mut rng, 4, 0.8)).unwrap();
        let v9 = BlaschkeProduct::normalized(&random_zeros(&mut rng, 9, 0.8)).unwrap();
        let a4 = circulant_approximant(&v4, alpha, &sym).unwrap();
        let a9 = circulant_approximant(&v9, alpha, &sym).unwrap();
        assert!(a4.identity_residual().unwrap() < 1e-9);
        assert!(a9.identity_residual().unwrap() < 1e-9);
        let n4 = schatten_norm(&a4.corner_minus, 1.0).unwrap();
        let n9 = schatten_norm(&a9.corner_minus, 1.0).unwrap();
        assert!((n4 - n9).abs() < 1e-8);
        let m4 = schatten_norm(&a4.corner_plus, 1.0).unwrap();
        let m9 = schatten_norm(&a9.corner_plus, 1.0).unwrap();
        assert!((m4 - m9).abs() < 1e-8);
        let direct = build_tto(&basis, |z| sym.minus_eval(z));
        assert!((schatten_norm(&direct, 1.0).unwrap() - n4).abs() < 1e-8);
    }

    #[test]
    fn tto_norm_bounded_by_sup() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let b = BlaschkeProduct::normalized(&random_zeros(&mut rng, 8, 0.9)).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        for _ in 0..5 {
            let (p, q) = (rng.gen::<f64>() * 3.0, rng.gen::<f64>() * 2.0);
            let psi = move |z: Complex64| c((p * z.re).cos(), (q * z.im).sin()) + z * 0.5;
            let sup = (0..4096)
                .map(|k| psi(Complex64::from_polar(1.0, TAU * k as f64 / 4096.0)).norm())
                .fold(0.0, f64::max);
            let t = build_tto(&basis, psi);
            assert!(schatten_norm(&t, f64::INFINITY).unwrap() <= sup * (1.0 + 1e-6));
        }
    }

    #[test]
    fn weight_tto_trace_norm_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let zeros = random_zeros(&mut rng, 6, 0.9);
            let b = BlaschkeProduct::normalized(&zeros).unwrap();
            let basis = ModelBasis::new(&b).unwrap();
            let w = build_tto(&basis, |z| c(1.0 / b.derivative_modulus_at(z), 0.0));
            let l1 = zeros[0].norm();
            assert!(schatten_norm(&w, 1.0).unwrap() <= (1.0 + l1) / (1.0 - l1) + 1e-9);
        }
    }

    #[test]
    fn csv_export() {
        let b = BlaschkeProduct::normalized(&[c(0.0, 0.0); 2]).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        let mut out = Vec::new();
        OperatorMatrix::identity(&basis).write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "\"1e0,0e0\",\"0e0,0e0\"\n\"0e0,0e0\",\"1e0,0e0\"\n"
        );
    }
}
