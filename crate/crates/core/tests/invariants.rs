use std::f64::consts::TAU;

use proptest::prelude::*;
use tto_core::tto::{build_tto, modified_shift};
use tto_core::{clark_measure, mobius, reproducing_kernel, BlaschkeProduct, Complex64, ModelBasis};

fn disk_point(rmax: f64) -> impl Strategy<Value = Complex64> {
    (0.0..rmax, 0.0..TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

fn zeros(max_len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(disk_point(0.9), 1..=max_len)
}

fn with_origin(mut z: Vec<Complex64>) -> Vec<Complex64> {
    z[0] = Complex64::new(0.0, 0.0);
    z
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn mobius_inverts_itself(a in disk_point(0.95), z in disk_point(0.99)) {
        let back = mobius(-a, mobius(a, z).unwrap()).unwrap();
        prop_assert!((back - z).norm() < 1e-12);
    }

    #[test]
    fn unimodular_on_the_circle(zs in zeros(12), t in 0.0..TAU) {
        let b = BlaschkeProduct::normalized(&zs).unwrap();
        prop_assert!((b.eval(Complex64::from_polar(1.0, t)).norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn phase_is_increasing_and_winds(zs in zeros(12), t in 0.0..TAU, h in 1e-6..0.5f64) {
        let b = BlaschkeProduct::normalized(&zs).unwrap();
        let s = (t + h).min(TAU);
        prop_assert!(b.lifted_phase(s) >= b.lifted_phase(t));
        let winding = b.lifted_phase(TAU) - b.lifted_phase(0.0);
        prop_assert!((winding - TAU * zs.len() as f64).abs() < 1e-9);
    }

    #[test]
    fn clark_mass_matches_poisson_value(zs in zeros(10), s in 0.0..TAU) {
        let b = BlaschkeProduct::normalized(&zs).unwrap();
        let alpha = Complex64::from_polar(1.0, s);
        let b0 = b.eval(Complex64::new(0.0, 0.0));
        let expect = ((alpha + b0) / (alpha - b0)).re;
        let mu = clark_measure(&b, alpha).unwrap();
        prop_assert_eq!(mu.atoms().len(), zs.len());
        prop_assert!((mu.total_mass() - expect).abs() < 1e-9 * expect.max(1.0));
    }

    #[test]
    fn basis_is_orthonormal(zs in zeros(10)) {
        let basis = ModelBasis::new(&BlaschkeProduct::normalized(&zs).unwrap()).unwrap();
        let n = basis.dimension();
        let gram = basis.gram();
        let worst = (0..n)
            .flat_map(|j| (0..n).map(move |k| (j, k)))
            .map(|(j, k)| (gram[(j, k)] - if j == k { 1.0 } else { 0.0 }).norm())
            .fold(0.0, f64::max);
        prop_assert!(worst < 1e-10);
    }

    #[test]
    fn kernel_coordinates_reproduce(zs in zeros(8), w in disk_point(0.8), z in disk_point(0.8)) {
        let b = BlaschkeProduct::normalized(&zs).unwrap();
        let basis = ModelBasis::new(&b).unwrap();
        let via_basis = basis.eval_combination(&basis.kernel_coefficients(w), z);
        prop_assert!((via_basis - reproducing_kernel(&b, w, z)).norm() < 1e-9);
    }

    #[test]
    fn modified_shift_is_unitary(zs in zeros(10), s in 0.0..TAU) {
        let basis = ModelBasis::new(&BlaschkeProduct::normalized(&with_origin(zs)).unwrap()).unwrap();
        let shift = modified_shift(&basis, Complex64::from_polar(1.0, s)).unwrap();
        prop_assert!(shift.unitarity_defect() < 1e-10);
    }

    #[test]
    fn real_symbols_give_self_adjoint_operators(zs in zeros(8), c in -2.0..2.0f64) {
        let basis = ModelBasis::new(&BlaschkeProduct::normalized(&zs).unwrap()).unwrap();
        let t = build_tto(&basis, |z| Complex64::new(z.re + c * z.im * z.im, 0.0));
        let m = t.entries();
        let gap = (m - m.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max);
        prop_assert!(gap < 1e-12);
    }
}
