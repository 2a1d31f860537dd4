use msfem::microshape::LaminationSpec;
use msfem::oracles::*;
use msfem::Complex64;

const SIGMA: f64 = 2.08e6;
const D: f64 = 0.5e-3;

fn mu() -> f64 {
    1000.0 * MU0
}

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[test]
fn skin_depth_of_benchmark_material() {
    let delta = skin_depth(SIGMA, mu(), 50.0);
    assert!((delta - 1.5606e-3).abs() < 5e-8, "{delta}");
    assert!(skin_depth(0.0, mu(), 50.0).is_infinite());
}

#[test]
fn lamination_profile_solves_the_ode() {
    let lam = Lamination1d::new(Complex64::new(1000.0, 300.0), D, SIGMA, mu(), 50.0).unwrap();
    for i in 0..=20 {
        let z = -0.5 * D + D * i as f64 / 20.0;
        assert!(lam.ode_residual(z) <= 1e-10, "z = {z}: {}", lam.ode_residual(z));
    }
    assert!((lam.h(0.5 * D) - lam.h0).norm() < 1e-9 * lam.h0.norm());
    assert!((lam.h(0.1e-3) - lam.h(-0.1e-3)).norm() < 1e-12 * lam.h0.norm());
}

#[test]
fn static_limit_has_uniform_field_and_no_loss() {
    let lam = Lamination1d::new(c(1000.0), D, SIGMA, mu(), 0.0).unwrap();
    assert_eq!(lam.h(0.1e-3), c(1000.0));
    assert_eq!(lam.loss_per_area(), 0.0);
}

#[test]
fn low_frequency_formula() {
    // value at 50 Hz, 1 T, 0.5 mm
    let at50 = low_frequency_loss_density(SIGMA, 50.0, 1.0, D);
    assert!((at50 - 2138.41).abs() < 0.01, "{at50}");
    // the exact solution approaches the formula as d/δ → 0
    for (f, tol) in [(5.0, 1e-2), (0.5, 1e-4)] {
        let lam = Lamination1d::new(c(1.0 / mu()), D, SIGMA, mu(), f).unwrap();
        let b = lam.mean_flux_density();
        let exact = lam.loss_per_area() / D / (b * b);
        let formula = low_frequency_loss_density(SIGMA, f, 1.0, D);
        assert!((exact / formula - 1.0).abs() < tol, "f = {f}: {exact} vs {formula}");
    }
}

fn xsection(width: f64, f: f64, h0: f64) -> CrossSectionProblem {
    CrossSectionProblem { width, thickness: D, sigma: SIGMA, mu: mu(), f, h0: c(h0) }
}

#[test]
fn cross_section_without_conductivity_is_trivial() {
    let sol = cross_section_fem(&CrossSectionProblem { sigma: 0.0, ..xsection(5e-3, 50.0, 1000.0) }, 16, 4).unwrap();
    assert!(sol.h.iter().all(|h| (h - c(1000.0)).norm() < 1e-9));
    assert!(sol.p.abs() < 1e-20 && sol.p_ee.abs() < 1e-20);
}

#[test]
fn cross_section_rejects_coarse_grids_and_bad_data() {
    assert!(cross_section_fem(&xsection(5e-3, 50.0, 1000.0), 3, 8).is_err());
    assert!(cross_section_fem(&xsection(-5e-3, 50.0, 1000.0), 8, 8).is_err());
}

#[test]
fn wide_strip_matches_the_lamination_profile_mid_strip() {
    let w = 20.0 * D;
    let sol = cross_section_fem(&xsection(w, 50.0, 1000.0), 200, 32).unwrap();
    let lam = Lamination1d::new(c(1000.0), D, SIGMA, mu(), 50.0).unwrap();
    for i in 0..=16 {
        let z = -0.5 * D + D * i as f64 / 16.0;
        let (got, want) = (sol.sample(0.5 * w, z).unwrap(), lam.h(z));
        assert!((got - want).norm() <= 0.01 * want.norm(), "z = {z}: {got} vs {want}");
    }
}

#[test]
fn cross_section_is_symmetric_in_z() {
    let sol = cross_section_fem(&xsection(4e-3, 50.0, 1000.0), 40, 10).unwrap();
    for x in [0.3e-3, 1.7e-3, 2.0e-3] {
        for z in [0.05e-3, 0.125e-3, 0.2e-3] {
            let (a, b) = (sol.sample(x, z).unwrap(), sol.sample(x, -z).unwrap());
            assert!((a - b).norm() <= 1e-12 * a.norm(), "({x}, {z}): {a} vs {b}");
        }
    }
}

#[test]
fn cross_section_converges_with_order_two() {
    let prob = xsection(4e-3, 50.0, 1000.0);
    let p: Vec<f64> = [(32, 8), (64, 16), (128, 32)].iter().map(|&(nx, nz)| cross_section_fem(&prob, nx, nz).unwrap().p).collect();
    let order = observed_order(p[0], p[1], p[2]);
    assert!((order - 2.0).abs() <= 0.3, "observed order {order} from {p:?}");
}

#[test]
fn cross_section_losses_grow_with_conductivity() {
    let mut last = 0.0;
    for sigma in [0.5e6, 1.0e6, 2.08e6] {
        let sol = cross_section_fem(&CrossSectionProblem { sigma, ..xsection(4e-3, 50.0, 1000.0) }, 40, 8).unwrap();
        assert!(sol.p > last && sol.p_ee >= 0.0 && sol.p_ee <= sol.p);
        last = sol.p;
    }
}

#[test]
fn strip_reference_scales_and_dilutes_the_edge_effect() {
    let lam = LaminationSpec::new(D, 0.95).unwrap();
    let a = strip_reference(10.0 * D, &lam, SIGMA, mu(), 50.0, c(1000.0), [40, 8]).unwrap();
    let b = strip_reference(10.0 * D, &lam, SIGMA, mu(), 50.0, c(2000.0), [40, 8]).unwrap();
    assert!((b.p_ref / a.p_ref - 4.0).abs() < 1e-9);
    assert!((b.p_ee_ref / a.p_ee_ref - 4.0).abs() < 1e-9);
    let wide = strip_reference(40.0 * D, &lam, SIGMA, mu(), 50.0, c(1000.0), [160, 8]).unwrap();
    assert!(wide.p_ee_ref / wide.p_ref < a.p_ee_ref / a.p_ref);
    assert!((a.delta - 1.5606e-3).abs() < 5e-8);
}
