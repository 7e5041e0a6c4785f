//! Trace asymptotics for `B_n` built from a zero sequence.
//!
//! Every sweep evaluates, for each requested `n`, a weighted trace such as
//! `Tr(T_{B_n}[1/|B_n'|] · T_{B_n}[ψ]^p)` and compares it with its limit.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::blaschke::{mobius_unchecked, BlaschkeProduct};
use crate::clark::clark_measure;
use crate::error::{Error, Result};
use crate::modelspace::{default_quadrature, reproducing_kernel, tm_basis, ModelBasis};
use crate::parallel::map_ordered;
use crate::tto::{build_tto, delta_operator, functional_calculus, rank_one_special, OperatorMatrix};

/// Nodes used for limits of the form `∫ f dm`.
pub const LIMIT_QUADRATURE: usize = 1 << 16;
/// Largest `n` a sweep accepts.
pub const MAX_N: usize = 400;

fn golden_fraction() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Zero sequence `(λ_j)` generating `B_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ZeroSequence {
    /// Every zero at the origin, so `B_n = (−z)^n`.
    ConstantZero,
    /// `|λ_j| = 1 − 1/(j+1)` with golden-angle arguments `2πj(√5−1)/2`.
    RadialHarmonic,
    /// `m²` equispaced points on each circle of radius `1 − 1/m⁴`.
    Circles,
    /// `λ_1 = 0`, `λ_j = 1 − c q^j` for `j ≥ 2`.
    RealFast {
        c: f64,
        q: f64,
    },
    Explicit {
        zeros: Vec<[f64; 2]>,
    },
}

impl ZeroSequence {
    pub fn name(&self) -> &'static str {
        match self {
            ZeroSequence::ConstantZero => "constant_zero",
            ZeroSequence::RadialHarmonic => "radial_harmonic",
            ZeroSequence::Circles => "circles",
            ZeroSequence::RealFast { .. } => "real_fast",
            ZeroSequence::Explicit { .. } => "explicit",
        }
    }

    /// Whether `Σ (1 − |λ_j|) < ∞`, decided from the closed form of each kind.
    /// Finite explicit lists count as Blaschke.
    pub fn is_blaschke(&self) -> bool {
        !matches!(self, ZeroSequence::ConstantZero | ZeroSequence::RadialHarmonic)
    }

    /// The `j`-th zero, `j ≥ 1`.
    pub fn zero(&self, j: usize) -> Result<Complex64> {
        if j == 0 {
            return Err(Error::InvalidArgument("zero sequences are indexed from 1".into()));
        }
        Ok(match self {
            ZeroSequence::ConstantZero => Complex64::new(0.0, 0.0),
            ZeroSequence::RadialHarmonic => {
                let r = 1.0 - 1.0 / (j as f64 + 1.0);
                Complex64::from_polar(r, TAU * j as f64 * golden_fraction())
            }
            ZeroSequence::Circles => circle_zero(j),
            ZeroSequence::RealFast { c, q } => {
                if j == 1 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(1.0 - c * q.powi(j as i32), 0.0)
                }
            }
            ZeroSequence::Explicit { zeros } => {
                let z = zeros.get(j - 1).ok_or_else(|| {
                    Error::InvalidArgument(format!("explicit sequence has only {} zeros", zeros.len()))
                })?;
                Complex64::new(z[0], z[1])
            }
        })
    }

    pub fn prefix(&self, n: usize) -> Result<Vec<Complex64>> {
        (1..=n).map(|j| self.zero(j)).collect()
    }

    pub fn product(&self, n: usize) -> Result<BlaschkeProduct> {
        BlaschkeProduct::normalized(&self.prefix(n)?)
    }

    /// Partial sum `Σ_{j≤n} (1 − |λ_j|)`.
    pub fn blaschke_sum(&self, n: usize) -> Result<f64> {
        Ok(self.prefix(n)?.iter().map(|z| 1.0 - z.norm()).sum())
    }
}

/// Level `m` of the circle construction and the position within it.
fn circle_level(j: usize) -> (usize, usize) {
    let mut m = 1;
    let mut start = 1;
    while start + m * m <= j {
        start += m * m;
        m += 1;
    }
    (m, j - start)
}

fn circle_zero(j: usize) -> Complex64 {
    let (m, k) = circle_level(j);
    let mf = m as f64;
    let r = 1.0 - 1.0 / mf.powi(4);
    Complex64::from_polar(r, TAU * k as f64 / (mf * mf))
}

/// Number of zeros in the circle construction through level `m`.
pub fn circle_count(m: usize) -> usize {
    (1..=m).map(|k| k * k).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub trace_value: Complex64,
    pub limit_value: Complex64,
    pub abs_error: f64,
    /// `‖Δ^α_{B_n}‖`, reported by fixed-α sweeps.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta_norm: Option<f64>,
}

impl ConvergenceRow {
    pub fn new(n: usize, trace_value: Complex64, limit_value: Complex64) -> Self {
        Self {
            n,
            trace_value,
            limit_value,
            abs_error: (trace_value - limit_value).norm(),
            delta_norm: None,
        }
    }
}

/// Quadrature control shared by the sweeps.
#[derive(Debug, Clone, Copy, Default)]
pub struct SweepOptions {
    /// Fixed node count; the per-`n` default is used when absent.
    pub quadrature_points: Option<usize>,
}

impl SweepOptions {
    fn basis(&self, product: &BlaschkeProduct) -> Result<ModelBasis> {
        let m = self.quadrature_points.unwrap_or_else(|| default_quadrature(product));
        tm_basis(product, m)
    }
}

/// `T_B[1/|B'|]`.
pub fn weight_operator(basis: &ModelBasis) -> OperatorMatrix {
    let product = basis.product();
    build_tto(basis, |z| Complex64::new(1.0 / product.derivative_modulus_at(z), 0.0))
}

/// `∫ f dm` with [`LIMIT_QUADRATURE`] equispaced nodes.
pub fn circle_mean<F: Fn(Complex64) -> Complex64>(f: F) -> Complex64 {
    let m = LIMIT_QUADRATURE;
    (0..m)
        .map(|k| f(Complex64::from_polar(1.0, TAU * k as f64 / m as f64)))
        .sum::<Complex64>()
        / m as f64
}

fn check_ns(ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::InvalidArgument("empty list of n".into()));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("n values must be strictly increasing".into()));
    }
    if ns[0] == 0 || *ns.last().unwrap() > MAX_N {
        return Err(Error::InvalidArgument(format!("n must lie in 1..={MAX_N}")));
    }
    Ok(())
}

/// Rows of `Tr(T[1/|B_n'|] T[ψ]^p)` against `∫ ψ^p dm`.
pub fn szego_power_sweep<F>(
    seq: &ZeroSequence,
    symbol: F,
    p: u32,
    ns: &[usize],
    opts: SweepOptions,
) -> Result<Vec<ConvergenceRow>>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    check_ns(ns)?;
    let limit = circle_mean(|z| symbol(z).powu(p));
    let rows = map_ordered(ns.to_vec(), |n| -> Result<ConvergenceRow> {
        let product = seq.product(n)?;
        let basis = opts.basis(&product)?;
        let w = weight_operator(&basis);
        let t = build_tto(&basis, &symbol);
        let trace = w.compose(&t.power(p))?.trace();
        Ok(ConvergenceRow::new(n, trace, limit))
    });
    rows.into_iter().collect()
}

/// Rows of `Tr(T[1/|B_n'|] g(T[ψ]))` against `∫ g∘ψ dm` for real `ψ`.
pub fn szego_g_sweep<F, G>(
    seq: &ZeroSequence,
    symbol: F,
    g: G,
    ns: &[usize],
    opts: SweepOptions,
) -> Result<Vec<ConvergenceRow>>
where
    F: Fn(Complex64) -> f64 + Sync + Send,
    G: Fn(f64) -> f64 + Sync + Send,
{
    check_ns(ns)?;
    let limit = circle_mean(|z| Complex64::new(g(symbol(z)), 0.0));
    let rows = map_ordered(ns.to_vec(), |n| -> Result<ConvergenceRow> {
        let product = seq.product(n)?;
        let basis = opts.basis(&product)?;
        let w = weight_operator(&basis);
        let t = build_tto(&basis, |z| Complex64::new(symbol(z), 0.0));
        let gt = functional_calculus(&t, &g)?;
        let trace = w.compose(&gt)?.trace();
        Ok(ConvergenceRow::new(n, trace, limit))
    });
    rows.into_iter().collect()
}

/// Rows of `Tr(Δ^α_{B_n} T[ψ]^p)`, with `‖Δ^α_{B_n}‖` in every row.
///
/// The limit is `∫ ψ^p dm` for non-Blaschke sequences and `∫ ψ^p dμ_α`
/// of the largest `B_n` otherwise.
pub fn fixed_alpha_sweep<F>(
    seq: &ZeroSequence,
    alpha: Complex64,
    symbol: F,
    p: u32,
    ns: &[usize],
    opts: SweepOptions,
) -> Result<Vec<ConvergenceRow>>
where
    F: Fn(Complex64) -> Complex64 + Sync + Send,
{
    check_ns(ns)?;
    let limit = if seq.is_blaschke() {
        let last = seq.product(*ns.last().unwrap())?;
        clark_measure(&last, alpha)?.integrate(|z| symbol(z).powu(p))
    } else {
        circle_mean(|z| symbol(z).powu(p))
    };
    let rows = map_ordered(ns.to_vec(), |n| -> Result<ConvergenceRow> {
        let product = seq.product(n)?;
        let basis = opts.basis(&product)?;
        let mu = clark_measure(&product, alpha)?;
        let delta = delta_operator(&basis, alpha)?;
        let t = build_tto(&basis, &symbol);
        let trace = delta.compose(&t.power(p))?.trace();
        let mut row = ConvergenceRow::new(n, trace, limit);
        // eigenvalues of Δ are the Clark weights
        row.delta_norm = Some(mu.weights().iter().copied().fold(0.0, f64::max));
        Ok(row)
    });
    rows.into_iter().collect()
}

/// Real symbol `f∘b_{λ₁} + conj(f∘b_{λ₁})` with `f = Σ c_i k_{w_i}` the kernel
/// combination of `B_N^{−λ₁} = B_N ∘ b_{−λ₁}`.
#[derive(Debug, Clone)]
pub struct RestrictedSymbol {
    first_zero: Complex64,
    moved: BlaschkeProduct,
    terms: Vec<(Complex64, Complex64)>,
}

impl RestrictedSymbol {
    pub fn new(seq: &ZeroSequence, big_n: usize, terms: Vec<(Complex64, Complex64)>) -> Result<Self> {
        let first_zero = seq.zero(1)?;
        let moved = seq.product(big_n)?.compose_with_automorphism(-first_zero)?;
        Ok(Self {
            first_zero,
            moved,
            terms,
        })
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        let x = mobius_unchecked(self.first_zero, z);
        let f: Complex64 = self
            .terms
            .iter()
            .map(|&(w, c)| c * reproducing_kernel(&self.moved, w, x))
            .sum();
        2.0 * f.re
    }
}

/// One level of the circle construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircleLevel {
    pub level: usize,
    pub n: usize,
    pub min_derivative: f64,
    pub bound: f64,
    pub delta_norm: f64,
    pub blaschke_sum: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Example1Report {
    pub sequence: ZeroSequence,
    pub levels: Vec<CircleLevel>,
}

/// Circle sequence through level `m_max`, with `min_{T} |B_n'|` sampled on
/// the circle and `‖Δ^1_{B_n}‖` at the end of every level.
pub fn example1_zeros(m_max: usize) -> Result<Example1Report> {
    if m_max == 0 {
        return Err(Error::InvalidArgument("m_max must be at least 1".into()));
    }
    let seq = ZeroSequence::Circles;
    let mut levels = Vec::with_capacity(m_max);
    for level in 1..=m_max {
        let n = circle_count(level);
        let product = seq.product(n)?;
        let samples = (64 * n).max(1 << 14);
        let min_derivative = (0..samples)
            .map(|k| product.boundary_derivative_modulus(TAU * k as f64 / samples as f64))
            .fold(f64::INFINITY, f64::min);
        let mu = clark_measure(&product, Complex64::new(1.0, 0.0))?;
        levels.push(CircleLevel {
            level,
            n,
            min_derivative,
            bound: level as f64 / 100.0,
            delta_norm: mu.weights().iter().copied().fold(0.0, f64::max),
            blaschke_sum: seq.blaschke_sum(n)?,
        });
    }
    Ok(Example1Report { sequence: seq, levels })
}

/// Search parameters for the real, rapidly converging sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealFastSearch {
    pub c: f64,
    pub q_start: f64,
    pub shrink: f64,
    pub max_trials: usize,
}

impl Default for RealFastSearch {
    fn default() -> Self {
        Self {
            c: 1e-3,
            q_start: 0.9,
            shrink: 0.9,
            max_trials: 40,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Example2Report {
    pub sequence: ZeroSequence,
    pub n: usize,
    pub trials: usize,
    pub trace_direct: Complex64,
    pub trace_formula: Complex64,
    pub bound_ok: bool,
    pub b_prime_at_minus1: f64,
    /// Smallest `|B_n'(ζ_k)|` over the atoms `ζ_k ≠ −1` of `μ_1^{B_n}`.
    pub min_bprime_off_arc: f64,
    /// Largest sampled `|B'|` of the full product on the arc `J`.
    pub arc_max_bprime: f64,
}

/// Terms of the full sequence summed before the geometric tail bound.
const FULL_PRODUCT_TERMS: usize = 400;

/// `sup_J |B'|` for the infinite product, sampled on the arc `J` between
/// `e^{±i/10}` through `−1`, plus a bound for the terms beyond
/// [`FULL_PRODUCT_TERMS`].
fn arc_sup(c: f64, q: f64) -> f64 {
    let samples = 4096;
    let lo = 0.1;
    let hi = TAU - 0.1;
    // |ζ − λ| ≥ sin(1/10) on J for real λ ∈ [0, 1)
    let dist2 = (0.1f64).sin().powi(2);
    let tail = 2.0 * c * q.powi(FULL_PRODUCT_TERMS as i32 + 1) / (1.0 - q) / dist2;
    (0..=samples)
        .map(|k| {
            let t = lo + (hi - lo) * k as f64 / samples as f64;
            let zeta = Complex64::from_polar(1.0, t);
            let mut s = 1.0;
            for j in 2..=FULL_PRODUCT_TERMS {
                let d = c * q.powi(j as i32);
                let l = 1.0 - d;
                s += d * (1.0 + l) / (zeta - l).norm_sqr();
            }
            s
        })
        .fold(0.0, f64::max)
        + tail
}

/// Searches for an admissible real sequence and evaluates
/// `Tr(Δ^1_{B_n} T_{B_n}[B_n/z])` both by matrix arithmetic and through
/// `Σ conj(ζ_k)/|B_n'(ζ_k)|²`.
pub fn example2_run(search: RealFastSearch, n: usize) -> Result<Example2Report> {
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two zeros".into()));
    }
    let mut q = search.q_start;
    for trial in 1..=search.max_trials {
        let seq = ZeroSequence::RealFast { c: search.c, q };
        if let Some(report) = try_example2(&seq, search, q, n, trial)? {
            return Ok(report);
        }
        q *= search.shrink;
    }
    Err(Error::HypothesisSearch(format!(
        "no admissible q after {} trials starting from {}",
        search.max_trials, search.q_start
    )))
}

fn try_example2(
    seq: &ZeroSequence,
    search: RealFastSearch,
    q: f64,
    n: usize,
    trial: usize,
) -> Result<Option<Example2Report>> {
    let zeros = seq.prefix(n)?;
    if zeros[1..].iter().any(|z| z.re <= 0.5) {
        return Ok(None);
    }
    let product = match BlaschkeProduct::normalized(&zeros) {
        Ok(p) => p,
        Err(Error::BoundaryGuard { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let b_prime_at_minus1 = product.derivative_modulus_at(Complex64::new(-1.0, 0.0));
    if b_prime_at_minus1 > 1.5 {
        return Ok(None);
    }
    let arc_max_bprime = arc_sup(search.c, q);
    if arc_max_bprime > 1.1 {
        return Ok(None);
    }

    let basis = ModelBasis::new(&product)?;
    let one = Complex64::new(1.0, 0.0);
    let mu = clark_measure(&product, one)?;
    let delta = delta_operator(&basis, one)?;
    let special = rank_one_special(&basis)?;
    let trace_direct = delta.compose(&special)?.trace();
    let trace_formula: Complex64 = mu
        .atoms()
        .iter()
        .zip(mu.weights())
        .map(|(z, w)| z.conj() * (w * w))
        .sum();
    let min_bprime_off_arc = mu
        .atoms()
        .iter()
        .filter(|z| (*z + one).norm() > 1e-9)
        .map(|&z| product.derivative_modulus_at(z))
        .fold(f64::INFINITY, f64::min);
    Ok(Some(Example2Report {
        sequence: seq.clone(),
        n,
        trials: trial,
        trace_direct,
        trace_formula,
        bound_ok: trace_direct.norm() > 1.0 / 3.0,
        b_prime_at_minus1,
        min_bprime_off_arc,
        arc_max_bprime,
    }))
}
