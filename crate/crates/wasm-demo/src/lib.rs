//! Browser bindings for three operations: the Clark measure of a Blaschke
//! product, a Szegő trace sweep, and the spectrum of the modified compressed
//! shift next to the Clark atoms.
//!
//! Every export takes and returns JSON strings so the page needs no glue
//! beyond `JSON.parse`. The plain functions are usable natively as well.

use serde_json::{json, Value};
use tto_core::szego::{szego_power_sweep, SweepOptions, ZeroSequence};
use tto_core::tto::modified_shift;
use tto_core::{arg_2pi, clark_measure, BlaschkeProduct, Complex64, ModelBasis};
use wasm_bindgen::prelude::*;

/// Largest degree the page may request.
pub const MAX_DEGREE: usize = 64;
/// Largest `n` of a browser sweep.
pub const MAX_SWEEP_N: usize = 96;
const PHASE_SAMPLES: usize = 256;

fn parse_zeros(json: &str) -> Result<Vec<Complex64>, String> {
    let pairs: Vec<[f64; 2]> = serde_json::from_str(json).map_err(|e| format!("zeros: {e}"))?;
    if pairs.is_empty() || pairs.len() > MAX_DEGREE {
        return Err(format!("need between 1 and {MAX_DEGREE} zeros"));
    }
    Ok(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())
}

fn pair(z: Complex64) -> Value {
    json!([z.re, z.im])
}

/// Atoms as `[arg, weight]`, the lifted phase on `[0, 2π]` and the mass.
pub fn clark_json(zeros: &str, alpha_arg: f64) -> Result<String, String> {
    let b = BlaschkeProduct::normalized(&parse_zeros(zeros)?).map_err(|e| e.to_string())?;
    let alpha = Complex64::from_polar(1.0, alpha_arg);
    let mu = clark_measure(&b, alpha).map_err(|e| e.to_string())?;
    let atoms: Vec<Value> = mu
        .atoms()
        .iter()
        .zip(mu.weights())
        .map(|(z, w)| json!([arg_2pi(*z), w]))
        .collect();
    let phase: Vec<Value> = (0..=PHASE_SAMPLES)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / PHASE_SAMPLES as f64;
            json!([t, b.lifted_phase(t)])
        })
        .collect();
    Ok(json!({ "atoms": atoms, "phase": phase, "mass": mu.total_mass() }).to_string())
}

/// Rows of `Tr(T[1/|B_n'|] T[2cos t]^p)` for `constant_zero` or `radial_harmonic`.
pub fn sweep_json(sequence: &str, p: u32, ns: &str) -> Result<String, String> {
    let seq = match sequence {
        "constant_zero" => ZeroSequence::ConstantZero,
        "radial_harmonic" => ZeroSequence::RadialHarmonic,
        other => return Err(format!("unknown sequence {other:?}")),
    };
    if p == 0 || p > 6 {
        return Err("p must lie in 1..=6".into());
    }
    let ns: Vec<usize> = serde_json::from_str(ns).map_err(|e| format!("ns: {e}"))?;
    if ns.iter().any(|&n| n > MAX_SWEEP_N) {
        return Err(format!("n is capped at {MAX_SWEEP_N} in the browser"));
    }
    let rows = szego_power_sweep(
        &seq,
        |z| Complex64::new(2.0 * z.re, 0.0),
        p,
        &ns,
        SweepOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let rows: Vec<Value> = rows
        .iter()
        .map(|r| json!({ "n": r.n, "trace": pair(r.trace_value), "limit": pair(r.limit_value), "abs_error": r.abs_error }))
        .collect();
    Ok(Value::Array(rows).to_string())
}

/// Eigenvalues of `S_B^α` and the Clark atoms. A zero at the origin is
/// prepended when the given zeros miss it.
pub fn shift_json(zeros: &str, alpha_arg: f64) -> Result<String, String> {
    let mut z = parse_zeros(zeros)?;
    if !z.iter().any(|w| w.norm() < 1e-15) {
        if z.len() == MAX_DEGREE {
            return Err(format!("need at most {} zeros besides the origin", MAX_DEGREE - 1));
        }
        z.insert(0, Complex64::new(0.0, 0.0));
    }
    let b = BlaschkeProduct::normalized(&z).map_err(|e| e.to_string())?;
    let alpha = Complex64::from_polar(1.0, alpha_arg);
    let basis = ModelBasis::new(&b).map_err(|e| e.to_string())?;
    let shift = modified_shift(&basis, alpha).map_err(|e| e.to_string())?;
    let mut eig = shift.eigenvalues();
    eig.sort_by(|a, b| arg_2pi(*a).total_cmp(&arg_2pi(*b)));
    let mu = clark_measure(&b, alpha).map_err(|e| e.to_string())?;
    Ok(json!({
        "eigenvalues": eig.into_iter().map(pair).collect::<Vec<_>>(),
        "atoms": mu.atoms().iter().map(|&a| pair(a)).collect::<Vec<_>>(),
        "unitarity_defect": shift.unitarity_defect(),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn clark(zeros: &str, alpha_arg: f64) -> Result<String, JsValue> {
    clark_json(zeros, alpha_arg).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn sweep(sequence: &str, p: u32, ns: &str) -> Result<String, JsValue> {
    sweep_json(sequence, p, ns).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn shift_spectrum(zeros: &str, alpha_arg: f64) -> Result<String, JsValue> {
    shift_json(zeros, alpha_arg).map_err(|e| JsValue::from_str(&e))
}
