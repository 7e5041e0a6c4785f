use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::szego::{RealFastSearch, RestrictedSymbol, ZeroSequence, MAX_N};

/// Tolerance on `|α| = 1` for configs.
pub const ALPHA_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    /// `Tr(T[1/|B_n'|] T[ψ]^p)` against `∫ ψ^p dm`.
    Power,
    /// `Tr(T[1/|B_n'|] g(T[ψ]))` against `∫ g∘ψ dm`.
    Functional,
    /// `Tr(Δ^α_{B_n} T[ψ]^p)`.
    FixedAlpha,
    /// Circle construction.
    Example1,
    /// Rank-one trace on the real, fast sequence.
    Example2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NamedSymbol {
    #[serde(rename = "2cos")]
    TwoCos,
    #[serde(rename = "2sin")]
    TwoSin,
    #[serde(rename = "z")]
    Z,
    #[serde(rename = "zbar")]
    ZBar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    /// `N` in `B_N^{−λ₁}`.
    pub big_n: usize,
    /// `[w_re, w_im, c_re, c_im]` per term of `Σ c k_w`.
    pub terms: Vec<[f64; 4]>,
}

/// Boundary symbol `ψ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SymbolSpec {
    Named(NamedSymbol),
    /// `[k, re, im]` triples of `Σ c_k z^k`.
    Fourier {
        fourier: Vec<[f64; 3]>,
    },
    Kernels {
        kernels: KernelSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedG {
    Identity,
    Square,
    Cube,
    Abs,
    Exp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GSpec {
    Named(NamedG),
    /// Coefficients `c_0, c_1, ...` of `Σ c_k x^k`.
    Poly {
        poly: Vec<f64>,
    },
}

impl GSpec {
    pub fn polynomial(&self) -> Option<Vec<f64>> {
        match self {
            GSpec::Named(NamedG::Identity) => Some(vec![0.0, 1.0]),
            GSpec::Named(NamedG::Square) => Some(vec![0.0, 0.0, 1.0]),
            GSpec::Named(NamedG::Cube) => Some(vec![0.0, 0.0, 0.0, 1.0]),
            GSpec::Named(_) => None,
            GSpec::Poly { poly } => Some(poly.clone()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            GSpec::Named(NamedG::Abs) => x.abs(),
            GSpec::Named(NamedG::Exp) => x.exp(),
            _ => self
                .polynomial()
                .unwrap_or_default()
                .iter()
                .rev()
                .fold(0.0, |acc, c| acc * x + c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Powers {
    One(u32),
    Many(Vec<u32>),
}

impl Powers {
    pub fn to_vec(&self) -> Vec<u32> {
        match self {
            Powers::One(p) => vec![*p],
            Powers::Many(v) => v.clone(),
        }
    }
}

/// One experiment, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub experiment: ExperimentKind,
    #[serde(default = "default_sequence")]
    pub sequence: ZeroSequence,
    #[serde(default = "default_symbol")]
    pub symbol: SymbolSpec,
    #[serde(default = "default_alpha")]
    pub alpha: [f64; 2],
    #[serde(default = "default_p")]
    pub p: Powers,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<GSpec>,
    #[serde(default)]
    pub ns: Vec<usize>,
    /// Fixed node count for every `n`; per-`n` default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature_points: Option<usize>,
    #[serde(default = "default_alpha_nodes")]
    pub alpha_nodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<String>,
    /// Number of circles for `example1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<RealFastSearch>,
}

fn default_sequence() -> ZeroSequence {
    ZeroSequence::RadialHarmonic
}

fn default_symbol() -> SymbolSpec {
    SymbolSpec::Named(NamedSymbol::TwoCos)
}

fn default_alpha() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_p() -> Powers {
    Powers::One(1)
}

fn default_alpha_nodes() -> usize {
    512
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.alpha[0], self.alpha[1])
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return bad(format!("name {:?} must be a non-empty [A-Za-z0-9_-] string", self.name));
        }
        let modulus = self.alpha().norm();
        if (modulus - 1.0).abs() > ALPHA_TOLERANCE {
            return bad(format!("alpha has modulus {modulus}, expected 1"));
        }
        if self.alpha_nodes == 0 {
            return bad("alpha_nodes must be positive".into());
        }
        match self.experiment {
            ExperimentKind::Example1 => {
                if self.levels == Some(0) {
                    return bad("levels must be at least 1".into());
                }
                return Ok(());
            }
            ExperimentKind::Example2 => {
                if self.ns.len() != 1 || self.ns[0] < 2 {
                    return bad("example2 takes a single n ≥ 2 in ns".into());
                }
                if let Some(s) = &self.search {
                    if !(s.c > 0.0 && s.q_start > 0.0 && s.q_start < 1.0 && s.shrink > 0.0 && s.shrink < 1.0) {
                        return bad("search needs c > 0 and q_start, shrink in (0, 1)".into());
                    }
                }
                return Ok(());
            }
            _ => {}
        }
        if self.ns.is_empty() {
            return bad("ns must not be empty".into());
        }
        if self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return bad("ns must be strictly increasing".into());
        }
        let max_n = *self.ns.last().unwrap();
        if self.ns[0] == 0 || max_n > MAX_N {
            return bad(format!("ns must lie in 1..={MAX_N}"));
        }
        if let Some(m) = self.quadrature_points {
            if m < 8 * max_n {
                return bad(format!("quadrature_points {m} is below 8·max(ns) = {}", 8 * max_n));
            }
        }
        if let ZeroSequence::Explicit { zeros } = &self.sequence {
            if zeros.len() < max_n {
                return bad(format!("explicit sequence has {} zeros, ns needs {max_n}", zeros.len()));
            }
        }
        if let ZeroSequence::RealFast { c, q } = self.sequence {
            if !(c > 0.0 && q > 0.0 && q < 1.0) {
                return bad("real_fast needs c > 0 and 0 < q < 1".into());
            }
        }
        match self.experiment {
            ExperimentKind::Functional => {
                if self.g.is_none() {
                    return bad("functional experiments need g".into());
                }
            }
            _ => {
                if self.p.to_vec().is_empty() || self.p.to_vec().contains(&0) {
                    return bad("p must be a positive integer or a list of them".into());
                }
            }
        }
        if let SymbolSpec::Kernels { kernels } = &self.symbol {
            if kernels.big_n == 0 || kernels.terms.is_empty() {
                return bad("kernel symbol needs big_n ≥ 1 and at least one term".into());
            }
            if kernels.terms.iter().any(|t| Complex64::new(t[0], t[1]).norm() >= 1.0) {
                return bad("kernel points must lie in the open disk".into());
            }
        }
        let symbol = self.symbol.build(&self.sequence)?;
        if self.experiment == ExperimentKind::Functional && !symbol.is_real() {
            return bad("functional experiments need a real symbol".into());
        }
        Ok(())
    }
}

/// Evaluable form of a [`SymbolSpec`].
#[derive(Debug, Clone)]
pub enum Symbol {
    Named(NamedSymbol),
    Fourier(Vec<(i32, Complex64)>),
    Kernels(RestrictedSymbol),
}

impl SymbolSpec {
    pub fn build(&self, seq: &ZeroSequence) -> Result<Symbol> {
        Ok(match self {
            SymbolSpec::Named(n) => Symbol::Named(*n),
            SymbolSpec::Fourier { fourier } => {
                let mut terms = Vec::with_capacity(fourier.len());
                for t in fourier {
                    if t[0].fract() != 0.0 || t[0].abs() > 1e6 {
                        return Err(Error::Config(format!("Fourier index {} is not an integer", t[0])));
                    }
                    terms.push((t[0] as i32, Complex64::new(t[1], t[2])));
                }
                Symbol::Fourier(terms)
            }
            SymbolSpec::Kernels { kernels } => Symbol::Kernels(RestrictedSymbol::new(
                seq,
                kernels.big_n,
                kernels
                    .terms
                    .iter()
                    .map(|t| (Complex64::new(t[0], t[1]), Complex64::new(t[2], t[3])))
                    .collect(),
            )?),
        })
    }
}

impl Symbol {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Symbol::Named(NamedSymbol::TwoCos) => Complex64::new(2.0 * z.re, 0.0),
            Symbol::Named(NamedSymbol::TwoSin) => Complex64::new(2.0 * z.im, 0.0),
            Symbol::Named(NamedSymbol::Z) => z,
            Symbol::Named(NamedSymbol::ZBar) => z.conj(),
            Symbol::Fourier(terms) => terms.iter().map(|&(k, c)| c * z.powi(k)).sum(),
            Symbol::Kernels(k) => Complex64::new(k.eval(z), 0.0),
        }
    }

    /// Whether the symbol is real on the circle, decided from its coefficients.
    pub fn is_real(&self) -> bool {
        match self {
            Symbol::Named(n) => matches!(n, NamedSymbol::TwoCos | NamedSymbol::TwoSin),
            Symbol::Kernels(_) => true,
            Symbol::Fourier(terms) => {
                let coeff = |k: i32| -> Complex64 { terms.iter().filter(|t| t.0 == k).map(|t| t.1).sum() };
                terms
                    .iter()
                    .all(|&(k, _)| (coeff(k) - coeff(-k).conj()).norm() <= 1e-14)
            }
        }
    }

    /// `∫ |ψ|^p dm`, the scale for relative errors.
    pub fn abs_moment(&self, p: u32) -> f64 {
        let m = 1 << 14;
        (0..m)
            .map(|k| {
                self.eval(Complex64::from_polar(1.0, TAU * k as f64 / m as f64))
                    .norm()
                    .powi(p as i32)
            })
            .sum::<f64>()
            / m as f64
    }
}

/// `∫ |2 cos t| dm = 4/π`.
pub const ABS_TWO_COS_MEAN: f64 = 4.0 / PI;
