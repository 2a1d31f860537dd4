use msfem::excitation::*;
use msfem::fem::{assemble, FeSpace, LinearTerm, RegionFilter, ScalarSpace, Source, Support};
use msfem::mesh::{make_rect_mesh, BoundaryTag, RectTags, SegmentGeometry};
use msfem::{Complex64, Execution};

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn pair() -> Vec<ConductorSpec> {
    vec![
        ConductorSpec::new([0.01, 0.0], 0.002, c(100.0)).unwrap(),
        ConductorSpec::new([-0.01, 0.004], 0.003, Complex64::new(-40.0, 25.0)).unwrap(),
    ]
}

#[test]
fn circulation_equals_enclosed_current() {
    let cs = pair();
    let around_first = circulation(&cs, &circle_path([0.01, 0.0], 0.005, 64)).unwrap();
    assert!((around_first - cs[0].current).norm() <= 1e-6 * cs[0].current.norm(), "{around_first}");
    let square = vec![[-0.02, -0.02], [0.02, -0.02], [0.02, 0.02], [-0.02, 0.02], [-0.02, -0.02]];
    let both = circulation(&cs, &square).unwrap();
    let total = cs[0].current + cs[1].current;
    assert!((both - total).norm() <= 1e-6 * total.norm(), "{both} vs {total}");
    let away = circulation(&cs, &circle_path([0.05, 0.05], 0.01, 32)).unwrap();
    assert!(away.norm() <= 1e-9, "{away}");
}

#[test]
fn reversed_path_flips_sign() {
    let cs = pair();
    let mut path = circle_path([0.01, 0.0], 0.004, 40);
    let fwd = circulation(&cs, &path).unwrap();
    path.reverse();
    let back = circulation(&cs, &path).unwrap();
    assert!((fwd + back).norm() <= 1e-9 * fwd.norm());
}

fn fd_curl_div(cs: &[ConductorSpec], p: [f64; 2], h: f64) -> (Complex64, Complex64) {
    let at = |dx: f64, dy: f64| biot_savart_h(cs, [p[0] + dx, p[1] + dy]);
    let (xp, xm, yp, ym) = (at(h, 0.0), at(-h, 0.0), at(0.0, h), at(0.0, -h));
    let curl = (xp[1] - xm[1]) / (2.0 * h) - (yp[0] - ym[0]) / (2.0 * h);
    let div = (xp[0] - xm[0]) / (2.0 * h) + (yp[1] - ym[1]) / (2.0 * h);
    (curl, div)
}

#[test]
fn field_is_curl_free_outside_and_curl_is_j0_inside() {
    let cs = pair();
    let outside = [[0.0, 0.0], [0.02, 0.01], [0.013, -0.001], [-0.01, 0.0085], [0.1, -0.2]];
    for p in outside {
        let h = biot_savart_h(&cs, p);
        let mag = (h[0].norm_sqr() + h[1].norm_sqr()).sqrt();
        let (curl, div) = fd_curl_div(&cs, p, 1e-7);
        assert!(curl.norm() <= 1e-6 * mag, "curl at {p:?}: {curl} (|H| = {mag})");
        assert!(div.norm() <= 1e-6 * mag, "div at {p:?}: {div}");
    }
    for p in [[0.0105, 0.0003], [-0.0105, 0.0045]] {
        let (curl, _) = fd_curl_div(&cs, p, 1e-7);
        let j0 = j0_density(&cs, p);
        assert!((curl - j0).norm() <= 1e-6 * j0.norm(), "{curl} vs {j0}");
    }
}

#[test]
fn field_magnitudes() {
    let one = [ConductorSpec::new([0.0, 0.0], 0.002, c(100.0)).unwrap()];
    let pi = std::f64::consts::PI;
    let h = biot_savart_h(&one, [0.01, 0.0]);
    assert!((h[1].re - 100.0 / (2.0 * pi * 0.01)).abs() < 1e-9);
    assert!(h[0].norm() < 1e-12);
    // linear growth inside, continuous at the surface
    let inside = biot_savart_h(&one, [0.001, 0.0])[1].re;
    let surface = biot_savart_h(&one, [0.002, 0.0])[1].re;
    assert!((inside - 0.5 * surface).abs() < 1e-9 * surface);
    assert_eq!(j0_density(&one, [0.003, 0.0]), c(0.0));
    assert!((j0_density(&one, [0.0, 0.001]).re - 100.0 / (pi * 4e-6)).abs() < 1e-6);
}

#[test]
fn invalid_inputs() {
    assert!(ConductorSpec::new([0.0, 0.0], 0.0, c(1.0)).is_err());
    assert!(ConductorSpec::new([f64::NAN, 0.0], 1.0, c(1.0)).is_err());
    let overlapping = [
        ConductorSpec::new([0.0, 0.0], 0.01, c(1.0)).unwrap(),
        ConductorSpec::new([0.015, 0.0], 0.01, c(1.0)).unwrap(),
    ];
    assert!(validate_conductors(&overlapping).is_err());
    let open = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    assert!(circulation(&overlapping, &open).is_err());
}

#[test]
fn antiperiodic_machine_matches_segment_symmetries() {
    let geo = SegmentGeometry::default();
    let cs = machine_conductors(&geo, true).unwrap();
    assert_eq!(cs.len(), 12 * geo.conductors.len());
    let net: Complex64 = cs.iter().map(|c| c.current).sum();
    assert!(net.norm() < 1e-9);
    let cut = (0.5 * geo.span_deg).to_radians();
    let (t, n) = ([cut.cos(), cut.sin()], [-cut.sin(), cut.cos()]);
    for r in [0.016, 0.025, 0.0305, 0.034, 0.044] {
        // tangential field vanishes on the cut at half the span
        let h = biot_savart_h(&cs, [r * t[0], r * t[1]]);
        let ht = h[0] * t[0] + h[1] * t[1];
        let hn = h[0] * n[0] + h[1] * n[1];
        assert!(ht.norm() <= 1e-9 * hn.norm().max(1.0), "r = {r}: H_t = {ht}");
        // normal field vanishes on the symmetry line θ = 0
        let h0 = biot_savart_h(&cs, [r, 0.0]);
        assert!(h0[1].norm() <= 1e-9 * h0[0].norm().max(1.0), "r = {r}: H_n = {}", h0[1]);
    }
    assert!(machine_conductors(&SegmentGeometry { span_deg: 25.0, ..geo.clone() }, true).is_err());
    assert!(machine_conductors(&SegmentGeometry { span_deg: 360.0 / 7.0, ..geo }, true).is_err());
}

/// `∫ J0 v` equals `-∫ H · (ẑ × ∇v)` for `v` vanishing on the boundary.
/// With `v = 1` on a patch covering the conductor and decaying to zero
/// across one ring of elements, the left side is exactly the current.
#[test]
fn weak_current_source_matches_field_source() {
    let mesh = make_rect_mesh(1.0, 1.0, 40, 40, 1, RectTags::uniform(BoundaryTag::GammaH)).unwrap();
    let cond = [ConductorSpec::new([0.5, 0.5], 0.05, Complex64::new(3.0, -2.0)).unwrap()];
    let space = ScalarSpace::new(&mesh, 1, Support::All).unwrap();
    let field = |p: [f64; 2]| biot_savart_h(&cond, p);
    let term = LinearTerm { row: 0, source: Source::VectorRotGrad(&field), regions: RegionFilter::All, coeff: c(-1.0) };
    let sys = assemble(&mesh, &[FeSpace::Scalar(space.clone())], &["v"], &[], &[term], Some(10), Execution::default()).unwrap();
    let mut sum = c(0.0);
    for (v, p) in mesh.vertices().iter().enumerate() {
        if (p[0] - 0.5).hypot(p[1] - 0.5) <= 0.2 {
            sum += sys.rhs[space.vertex_dof(v).unwrap()];
        }
    }
    let i = cond[0].current;
    assert!((sum - i).norm() <= 1e-6 * i.norm(), "{sum} vs {i}");
}
