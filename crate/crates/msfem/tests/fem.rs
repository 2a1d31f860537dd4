use msfem::fem::basis::{edge_basis, scalar_basis, REF_GRADS};
use msfem::fem::{
    apply_essential, assemble, edge_field_at, h1_eval, hcurl_eval, quadrature, scalar_field_at, BilinearTerm,
    EdgeSpace, EssentialBc, FeSpace, Integrand, LinearTerm, RegionFilter, ScalarSpace, Source, Support, TraceData,
};
use msfem::linsolve::SolveMethod;
use msfem::mesh::{make_rect_mesh, BoundaryTag, Mesh2D, RectTags};
use msfem::{Complex64, Execution};

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn square(n: usize) -> Mesh2D {
    make_rect_mesh(1.0, 1.0, n, n, 1, RectTags::uniform(BoundaryTag::GammaB)).unwrap()
}

/// Exact integral of x^a y^b over the reference triangle: a! b! / (a + b + 2)!
fn monomial(a: u32, b: u32) -> f64 {
    let f = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
    f(a) * f(b) / f(a + b + 2)
}

#[test]
fn quadrature_rules() {
    let q1 = quadrature(1).unwrap();
    assert_eq!(q1.len(), 1);
    assert_eq!(q1.weights[0], 0.5);
    for deg in 1..=10 {
        let q = quadrature(deg).unwrap();
        assert!((q.weights.iter().sum::<f64>() - 0.5).abs() < 1e-15);
        assert!((q.integrate(|x, _| x) - 1.0 / 6.0).abs() < 1e-15);
        for a in 0..=deg as u32 {
            for b in 0..=(deg as u32 - a) {
                let v = q.integrate(|x, y| x.powi(a as i32) * y.powi(b as i32));
                assert!((v - monomial(a, b)).abs() < 1e-15, "deg {deg}: x^{a} y^{b}");
            }
        }
    }
    let q4 = quadrature(4).unwrap();
    assert!((q4.integrate(|x, y| x * x * y * y) - 1.0 / 180.0).abs() < 1e-14);
    assert!(quadrature(0).is_err());
    assert!(quadrature(11).is_err());
}

#[test]
fn h1_lagrange_and_partition_of_unity() {
    let verts = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)];
    for (i, &(x, y)) in verts.iter().enumerate() {
        let b = h1_eval(1, x, y);
        for j in 0..3 {
            assert_eq!(b.val[j], if i == j { 1.0 } else { 0.0 });
        }
    }
    for &(x, y) in &[(0.2, 0.3), (0.6, 0.1), (1.0 / 3.0, 1.0 / 3.0)] {
        let b = h1_eval(1, x, y);
        assert!((b.val[..3].iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let gx: f64 = b.grad[..3].iter().map(|g| g[0]).sum();
        let gy: f64 = b.grad[..3].iter().map(|g| g[1]).sum();
        assert!(gx.abs() < 1e-15 && gy.abs() < 1e-15);
    }
    // quadratic edge bubbles: 1 at their own midpoint, 0 at vertices
    let mids = [(0.5, 0.0), (0.5, 0.5), (0.0, 0.5)];
    for (e, &(x, y)) in mids.iter().enumerate() {
        assert!((h1_eval(2, x, y).val[3 + e] - 1.0).abs() < 1e-15);
        for &(vx, vy) in &verts {
            assert_eq!(h1_eval(2, vx, vy).val[3 + e], 0.0);
        }
    }
}

#[test]
fn gradients_and_curls_match_finite_differences() {
    let h = 1e-6;
    let (x, y) = (0.23, 0.31);
    for m in 1..=3 {
        let b = h1_eval(m, x, y);
        let (bx, by) = (h1_eval(m, x + h, y), h1_eval(m, x, y + h));
        let (cx, cy) = (h1_eval(m, x - h, y), h1_eval(m, x, y - h));
        for i in 0..b.n {
            let gx = (bx.val[i] - cx.val[i]) / (2.0 * h);
            let gy = (by.val[i] - cy.val[i]) / (2.0 * h);
            assert!((gx - b.grad[i][0]).abs() < 1e-8 && (gy - b.grad[i][1]).abs() < 1e-8, "m={m} i={i}");
        }
    }
    for k in 0..=2 {
        let b = hcurl_eval(k, x, y);
        let (px, mx) = (hcurl_eval(k, x + h, y), hcurl_eval(k, x - h, y));
        let (py, my) = (hcurl_eval(k, x, y + h), hcurl_eval(k, x, y - h));
        for i in 0..b.n {
            let dvy_dx = (px.val[i][1] - mx.val[i][1]) / (2.0 * h);
            let dvx_dy = (py.val[i][0] - my.val[i][0]) / (2.0 * h);
            assert!((dvy_dx - dvx_dy - b.curl[i]).abs() < 1e-8, "k={k} i={i}");
        }
    }
}

#[test]
fn whitney_moments_and_stokes() {
    // reference edges (0,1), (1,2), (2,0) oriented low → high index
    let edges = [([0.0, 0.0], [1.0, 0.0]), ([1.0, 0.0], [0.0, 1.0]), ([0.0, 0.0], [0.0, 1.0])];
    let (s, w) = msfem::fem::quadrature::gauss_legendre_unit(4);
    for (i, (a, b)) in edges.iter().enumerate() {
        let t = [b[0] - a[0], b[1] - a[1]];
        for j in 0..3 {
            let mut integral = 0.0;
            for (sq, wq) in s.iter().zip(&w) {
                let p = [a[0] + sq * t[0], a[1] + sq * t[1]];
                let v = hcurl_eval(0, p[0], p[1]).val[j];
                integral += wq * (v[0] * t[0] + v[1] * t[1]);
            }
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((integral - expect).abs() < 1e-14, "edge {i} function {j}: {integral}");
        }
    }
    // curl is constant ±2 on the reference triangle (area 1/2); its integral is the
    // circulation: +1 for edges (0,1), (1,2), and -1 for edge (0,2), which runs
    // clockwise with respect to the triangle
    let q = quadrature(2).unwrap();
    for j in 0..3 {
        let sign = if j == 2 { -1.0 } else { 1.0 };
        let c = hcurl_eval(0, 0.2, 0.2).curl[j];
        assert!((c - 2.0 * sign).abs() < 1e-14);
        let integral = q.integrate(|x, y| hcurl_eval(0, x, y).curl[j]);
        assert!((integral - sign).abs() < 1e-14);
    }
    for k in 1..=2 {
        let b = hcurl_eval(k, 0.3, 0.4);
        // gradient-type functions: second slot of every edge block, and (k=2) the third slot plus cell gradient
        let per_edge = k + 1;
        for e in 0..3 {
            for j in 1..per_edge {
                assert!(b.curl[per_edge * e + j].abs() < 1e-13);
            }
        }
        if k == 2 {
            assert!(b.curl[3 * per_edge + 2].abs() < 1e-13);
        }
    }
}

/// Local edge bases are linearly independent and contain all vector polynomials of degree k.
#[test]
fn edge_basis_spans_full_polynomials() {
    let q = quadrature(8).unwrap();
    for k in 0..=2usize {
        let n = (k + 1) * (k + 3);
        // Gram matrix of the basis
        let vals: Vec<Vec<[f64; 2]>> = q.points.iter().map(|l| {
            let b = edge_basis(k, *l, REF_GRADS, [false, false, true]);
            b.val[..n].to_vec()
        }).collect();
        let mut gram = vec![vec![0.0; n]; n];
        for (p, w) in vals.iter().zip(&q.weights) {
            for i in 0..n {
                for j in 0..n {
                    gram[i][j] += w * (p[i][0] * p[j][0] + p[i][1] * p[j][1]);
                }
            }
        }
        let chol = cholesky(&gram).expect("basis functions must be independent");
        // project each monomial vector field of degree <= k and check the residual
        for a in 0..=k as i32 {
            for b in 0..=(k as i32 - a) {
                for comp in 0..2 {
                    let f = |x: f64, y: f64| x.powi(a) * y.powi(b);
                    let mut rhs = vec![0.0; n];
                    for ((l, p), w) in q.points.iter().zip(&vals).zip(&q.weights) {
                        let fv = f(l[1], l[2]);
                        for i in 0..n {
                            rhs[i] += w * fv * p[i][comp];
                        }
                    }
                    let c = chol_solve(&chol, &rhs);
                    let mut err = 0.0;
                    for ((l, p), w) in q.points.iter().zip(&vals).zip(&q.weights) {
                        let mut v = [0.0, 0.0];
                        for i in 0..n {
                            v[0] += c[i] * p[i][0];
                            v[1] += c[i] * p[i][1];
                        }
                        v[comp] -= f(l[1], l[2]);
                        err += w * (v[0] * v[0] + v[1] * v[1]);
                    }
                    assert!(err.sqrt() < 1e-11, "k={k} x^{a}y^{b} comp {comp}: {err}");
                }
            }
        }
    }
}

fn cholesky(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if s <= 1e-14 {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

fn chol_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * x[k]).sum::<f64>()) / l[i][i];
    }
    x
}

#[test]
fn dof_counts_follow_entity_formulas() {
    let m = square(3);
    let (v, e, f) = (m.n_vertices(), m.n_edges(), m.n_triangles());
    assert_eq!(ScalarSpace::new(&m, 1, Support::All).unwrap().n_dofs(), v);
    assert_eq!(ScalarSpace::new(&m, 2, Support::All).unwrap().n_dofs(), v + e);
    assert_eq!(ScalarSpace::new(&m, 3, Support::All).unwrap().n_dofs(), v + 2 * e + f);
    assert_eq!(EdgeSpace::new(&m, 0, Support::All).unwrap().n_dofs(), e);
    assert_eq!(EdgeSpace::new(&m, 1, Support::All).unwrap().n_dofs(), 2 * e + 2 * f);
    assert_eq!(EdgeSpace::new(&m, 2, Support::All).unwrap().n_dofs(), 3 * e + 6 * f);
    assert!(ScalarSpace::new(&m, 4, Support::All).is_err());
    assert!(EdgeSpace::new(&m, 0, Support::Regions(vec![99])).is_err());
}

#[test]
fn mass_and_stiffness_basic_identities() {
    let m = square(4);
    let spaces = [FeSpace::Scalar(ScalarSpace::new(&m, 1, Support::All).unwrap())];
    let terms = [BilinearTerm::new(0, 0, Integrand::Mass, RegionFilter::All, one())];
    let sys = assemble(&m, &spaces, &["u"], &terms, &[], None, Execution::Sequential).unwrap();
    let total: Complex64 = sys.matrix.values().iter().sum();
    assert!((total.re - 1.0).abs() < 1e-14);
    let terms = [BilinearTerm::new(0, 0, Integrand::Stiffness, RegionFilter::All, one())];
    let sys = assemble(&m, &spaces, &["u"], &terms, &[], None, Execution::Sequential).unwrap();
    for r in 0..sys.matrix.nrows() {
        let s: Complex64 = sys.matrix.row(r).map(|(_, v)| v).sum();
        assert!(s.norm() < 1e-13);
    }
    assert!(sys.matrix.is_symmetric());
}

#[test]
fn curlcurl_on_two_triangles_has_rank_two() {
    let m = square(1);
    let spaces = [FeSpace::Edge(EdgeSpace::new(&m, 0, Support::All).unwrap())];
    let terms = [BilinearTerm::new(0, 0, Integrand::CurlCurl, RegionFilter::All, one())];
    let sys = assemble(&m, &spaces, &["a"], &terms, &[], None, Execution::Sequential).unwrap();
    assert_eq!(sys.matrix.nrows(), 5);
    let dense: Vec<Vec<f64>> = (0..5).map(|i| (0..5).map(|j| sys.matrix.get(i, j).re).collect()).collect();
    assert_eq!(rank(dense, 1e-10), 2);
}

fn rank(mut a: Vec<Vec<f64>>, tol: f64) -> usize {
    let (n, m) = (a.len(), a[0].len());
    let mut r = 0;
    for c in 0..m {
        let Some(p) = (r..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())) else { break };
        if a[p][c].abs() < tol {
            continue;
        }
        a.swap(r, p);
        for i in 0..n {
            if i != r {
                let f = a[i][c] / a[r][c];
                for j in 0..m {
                    a[i][j] -= f * a[r][j];
                }
            }
        }
        r += 1;
        if r == n {
            break;
        }
    }
    r
}

#[test]
fn parallel_and_sequential_assembly_are_bitwise_equal() {
    let m = square(6);
    let spaces = [
        FeSpace::Edge(EdgeSpace::new(&m, 2, Support::All).unwrap()),
        FeSpace::Scalar(ScalarSpace::new(&m, 3, Support::All).unwrap()),
    ];
    let c = Complex64::new(0.7, -1.3);
    let terms = [
        BilinearTerm::new(0, 0, Integrand::CurlCurl, RegionFilter::All, one()),
        BilinearTerm::new(0, 0, Integrand::VecMass, RegionFilter::All, c),
        BilinearTerm::new(1, 0, Integrand::GradVec, RegionFilter::All, c),
        BilinearTerm::new(0, 1, Integrand::RotGradVec, RegionFilter::All, c),
        BilinearTerm::new(1, 1, Integrand::Stiffness, RegionFilter::All, one()),
    ];
    let f = |p: [f64; 2]| [Complex64::new(p[0], 1.0), Complex64::new(p[1] * p[1], 0.0)];
    let lin = [
        LinearTerm { row: 0, source: Source::Vector(&f), regions: RegionFilter::All, coeff: one() },
        LinearTerm { row: 1, source: Source::VectorRotGrad(&f), regions: RegionFilter::All, coeff: c },
    ];
    let a = assemble(&m, &spaces, &["a", "u"], &terms, &lin, None, Execution::Sequential).unwrap();
    let b = assemble(&m, &spaces, &["a", "u"], &terms, &lin, None, Execution::Parallel).unwrap();
    assert_eq!(a.matrix, b.matrix);
    assert_eq!(a.rhs, b.rhs);
    assert!(a.matrix.is_symmetric());
}

#[test]
fn mismatched_terms_are_rejected() {
    let m = square(1);
    let spaces = [FeSpace::Scalar(ScalarSpace::new(&m, 1, Support::All).unwrap())];
    let bad = [BilinearTerm::new(0, 0, Integrand::CurlCurl, RegionFilter::All, one())];
    assert!(assemble(&m, &spaces, &["u"], &bad, &[], None, Execution::Sequential).is_err());
    let bad = [BilinearTerm::new(0, 1, Integrand::Mass, RegionFilter::All, one())];
    assert!(assemble(&m, &spaces, &["u"], &bad, &[], None, Execution::Sequential).is_err());
}

/// Dirichlet Laplace with harmonic polynomial data is reproduced exactly.
#[test]
fn scalar_patch_test() {
    let m = square(5);
    let cases: [(usize, fn([f64; 2]) -> f64); 3] = [
        (1, |p| 1.0 + p[0] + 2.0 * p[1]),
        (2, |p| p[0] * p[0] - p[1] * p[1] + p[0] * p[1]),
        (3, |p| p[0].powi(3) - 3.0 * p[0] * p[1] * p[1]),
    ];
    for (order, exact) in cases {
        let space = ScalarSpace::new(&m, order, Support::All).unwrap();
        let spaces = [FeSpace::Scalar(space.clone())];
        let terms = [BilinearTerm::new(0, 0, Integrand::Stiffness, RegionFilter::All, one())];
        let mut sys = assemble(&m, &spaces, &["u"], &terms, &[], None, Execution::Sequential).unwrap();
        let data = move |p: [f64; 2]| Complex64::new(exact(p), 0.0);
        apply_essential(&mut sys, &spaces, &m, &[EssentialBc { block: 0, tag: BoundaryTag::GammaB, data: TraceData::Scalar(&data) }])
            .unwrap();
        let sol = sys.solve(SolveMethod::default()).unwrap();
        assert!(sol.relative_residual < 1e-12);
        for t in 0..m.n_triangles() {
            for l in [[0.2, 0.3, 0.5], [0.6, 0.2, 0.2]] {
                let (v, _) = scalar_field_at(&space, &m, &sol.x, t, l).unwrap();
                let p = msfem::fem::ElementGeometry::new(&m, t).point(l);
                assert!((v.re - exact(p)).abs() < 1e-11, "order {order}");
            }
        }
    }
}

#[test]
fn constant_boundary_value_gives_constant_solution() {
    let m = square(3);
    let spaces = [FeSpace::Scalar(ScalarSpace::new(&m, 2, Support::All).unwrap())];
    let terms = [BilinearTerm::new(0, 0, Integrand::Stiffness, RegionFilter::All, one())];
    let mut sys = assemble(&m, &spaces, &["u"], &terms, &[], None, Execution::Sequential).unwrap();
    let rhs_before = sys.rhs.clone();
    let g = |_: [f64; 2]| one();
    apply_essential(&mut sys, &spaces, &m, &[EssentialBc { block: 0, tag: BoundaryTag::GammaB, data: TraceData::Scalar(&g) }]).unwrap();
    assert_eq!(sys.rhs, rhs_before, "the stored system is not modified");
    let sol = sys.solve(SolveMethod::default()).unwrap();
    let vertex_values: Vec<Complex64> = sol.x[..m.n_vertices()].to_vec();
    assert!(vertex_values.iter().all(|v| (v - one()).norm() < 1e-12));
    assert!(sol.x[m.n_vertices()..].iter().all(|v| v.norm() < 1e-12));
}

#[test]
fn homogeneous_constraints_remove_rows() {
    let m = square(2);
    let spaces = [FeSpace::Scalar(ScalarSpace::new(&m, 1, Support::All).unwrap())];
    let terms = [
        BilinearTerm::new(0, 0, Integrand::Stiffness, RegionFilter::All, one()),
        BilinearTerm::new(0, 0, Integrand::Mass, RegionFilter::All, one()),
    ];
    let f = |_: [f64; 2]| one();
    let lin = [LinearTerm { row: 0, source: Source::Value(&f), regions: RegionFilter::All, coeff: one() }];
    let mut sys = assemble(&m, &spaces, &["u"], &terms, &lin, None, Execution::Sequential).unwrap();
    apply_essential(&mut sys, &spaces, &m, &[EssentialBc { block: 0, tag: BoundaryTag::GammaB, data: TraceData::Zero }]).unwrap();
    let red = sys.reduce();
    assert_eq!(red.free, vec![4]);
    assert_eq!(red.rhs, vec![sys.rhs[4]]);
    assert!(red.matrix.is_symmetric());
}

#[test]
fn uniform_tangential_trace_on_edges() {
    let m = make_rect_mesh(0.01, 0.001, 8, 2, 1, RectTags::uniform(BoundaryTag::GammaJ)).unwrap();
    let h0 = 1000.0;
    let field = move |_: [f64; 2]| [Complex64::new(0.0, 0.0), Complex64::new(h0, 0.0)];
    for k in 0..=2 {
        let space = EdgeSpace::new(&m, k, Support::All).unwrap();
        let spaces = [FeSpace::Edge(space.clone())];
        let terms = [BilinearTerm::new(0, 0, Integrand::VecMass, RegionFilter::All, one())];
        let mut sys = assemble(&m, &spaces, &["t"], &terms, &[], None, Execution::Sequential).unwrap();
        apply_essential(&mut sys, &spaces, &m, &[EssentialBc { block: 0, tag: BoundaryTag::GammaJ, data: TraceData::Vector(&field) }])
            .unwrap();
        for b in m.boundary_edges() {
            let e = m.find_edge(b.v[0], b.v[1]).unwrap();
            let [a, c] = m.edges()[e];
            let dy = m.vertices()[c][1] - m.vertices()[a][1];
            let dofs = space.edge_dofs(e);
            let v = sys.constraints()[&dofs[0]];
            assert!((v.re - h0 * dy).abs() < 1e-12 * h0, "k={k}");
            for d in &dofs[1..] {
                assert!(sys.constraints()[d].norm() < 1e-12 * h0);
            }
        }
    }
}

#[test]
fn essential_errors() {
    let m = square(2);
    let spaces = [FeSpace::Scalar(ScalarSpace::new(&m, 1, Support::All).unwrap())];
    let terms = [BilinearTerm::new(0, 0, Integrand::Stiffness, RegionFilter::All, one())];
    let mut sys = assemble(&m, &spaces, &["u"], &terms, &[], None, Execution::Sequential).unwrap();
    let bc = EssentialBc { block: 0, tag: BoundaryTag::GammaH, data: TraceData::Zero };
    assert!(apply_essential(&mut sys, &spaces, &m, &[bc]).is_err());
}

/// L2 projection onto edge space of order k reproduces vector polynomials of degree k.
#[test]
fn edge_projection_is_exact_for_polynomials() {
    let m = make_rect_mesh(1.0, 0.5, 3, 2, 1, RectTags::uniform(BoundaryTag::GammaB)).unwrap();
    let fields: [fn([f64; 2]) -> [f64; 2]; 3] =
        [|_| [1.0, -2.0], |p| [p[1], 2.0 * p[0] - p[1]], |p| [p[0] * p[1], p[1] * p[1] - p[0]]];
    for k in 0..=2 {
        let space = EdgeSpace::new(&m, k, Support::All).unwrap();
        let spaces = [FeSpace::Edge(space.clone())];
        let terms = [BilinearTerm::new(0, 0, Integrand::VecMass, RegionFilter::All, one())];
        let f = fields[k];
        let src = move |p: [f64; 2]| f(p).map(|v| Complex64::new(v, 0.0));
        let lin = [LinearTerm { row: 0, source: Source::Vector(&src), regions: RegionFilter::All, coeff: one() }];
        let sys = assemble(&m, &spaces, &["a"], &terms, &lin, None, Execution::Sequential).unwrap();
        let sol = sys.solve(SolveMethod::default()).unwrap();
        for t in 0..m.n_triangles() {
            let l = [0.15, 0.35, 0.5];
            let (v, c) = edge_field_at(&space, &m, &sol.x, t, l).unwrap();
            let p = msfem::fem::ElementGeometry::new(&m, t).point(l);
            let e = f(p);
            assert!((v[0].re - e[0]).abs() < 1e-10 && (v[1].re - e[1]).abs() < 1e-10, "k={k}");
            let _ = c;
        }
    }
}

#[test]
fn scalar_basis_orientation_is_conforming() {
    // cubic edge functions on a shared edge agree from both sides
    let m = square(1);
    let space = ScalarSpace::new(&m, 3, Support::All).unwrap();
    let x: Vec<Complex64> = (0..space.n_dofs()).map(|i| Complex64::new((i as f64 * 0.7).sin(), 0.0)).collect();
    // diagonal edge (0, 3) is shared by both triangles; sample its midpoint-ish point
    let p = [0.3, 0.3];
    let mut vals = Vec::new();
    for t in 0..2 {
        let l = m.barycentric(t, p);
        vals.push(scalar_field_at(&space, &m, &x, t, l).unwrap().0);
    }
    assert!((vals[0] - vals[1]).norm() < 1e-13);
    let _ = scalar_basis(1, [1.0, 0.0, 0.0], REF_GRADS, [false; 3]);
}
