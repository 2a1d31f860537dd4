use msfem::mesh::{
    make_rect_mesh, make_segment_mesh, read_msh, write_msh, write_vtk, BoundaryTag, PhysicalMap, PhysicalTarget,
    RectTags, SegmentGeometry, VtkData, VtkField, VtkLocation,
};
use msfem::Error;

fn rect(w: f64, h: f64, nx: usize, ny: usize) -> msfem::mesh::Mesh2D {
    make_rect_mesh(w, h, nx, ny, 1, RectTags::uniform(BoundaryTag::GammaJ)).unwrap()
}

fn phys_map() -> PhysicalMap {
    let mut m = PhysicalMap::new();
    m.insert(7, PhysicalTarget::Region(1));
    m.insert(3, PhysicalTarget::Boundary(BoundaryTag::GammaJ));
    m
}

#[test]
fn minimal_rectangle() {
    let m = rect(1.0, 1.0, 1, 1);
    assert_eq!((m.n_vertices(), m.n_triangles(), m.n_edges()), (4, 2, 5));
    assert_eq!(m.euler_characteristic(), 1);
}

#[test]
fn strip_counts_and_area() {
    let m = rect(0.01, 0.001, 40, 4);
    assert_eq!(m.n_vertices(), 205);
    assert_eq!(m.n_triangles(), 320);
    assert!((m.total_area() - 1e-5).abs() <= 1e-12 * 1e-5);
    assert_eq!(m.boundary_edges().len(), 2 * (40 + 4));
    assert_eq!(m.euler_characteristic(), 1);
}

#[test]
fn rectangle_rejects_bad_input() {
    let tags = RectTags::uniform(BoundaryTag::GammaB);
    assert!(matches!(make_rect_mesh(0.0, 1.0, 1, 1, 1, tags), Err(Error::InvalidArgument(_))));
    assert!(matches!(make_rect_mesh(1.0, 1.0, 0, 1, 1, tags), Err(Error::InvalidArgument(_))));
}

#[test]
fn msh_two_triangle_square_matches_rect() {
    let text = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 1 1 0\n$EndNodes\n\
$Elements\n7\n1 15 2 0 1 1\n2 1 2 3 1 1 2\n3 1 2 3 2 2 4\n4 1 2 3 3 4 3\n5 1 2 3 4 3 1\n6 2 2 7 1 1 2 4\n7 2 2 7 1 1 4 3\n$EndElements\n";
    let m = read_msh(text, &phys_map()).unwrap();
    let r = rect(1.0, 1.0, 1, 1);
    assert_eq!(m.vertices(), r.vertices());
    assert_eq!(m.triangles(), r.triangles());
    assert_eq!(m.edges(), r.edges());
}

#[test]
fn msh_quadrangle_is_rejected_with_line() {
    let text = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 1 1 0\n4 0 1 0\n$EndNodes\n\
$Elements\n1\n1 3 2 7 1 1 2 3 4\n$EndElements\n";
    match read_msh(text, &phys_map()) {
        Err(Error::Parse { line, msg }) => {
            assert_eq!(line, 13);
            assert!(msg.contains("quadrangle"), "{msg}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn msh_errors_name_problem() {
    let base = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n3\n1 0 0 0\n2 1 0 0\n3 0 1 0\n$EndNodes\n";
    let dangling = format!("{base}$Elements\n1\n1 2 2 7 1 1 2 9\n$EndElements\n");
    assert!(matches!(read_msh(&dangling, &phys_map()), Err(Error::Parse { line: 12, .. })));
    let unmapped = format!("{base}$Elements\n1\n1 2 2 99 1 1 2 3\n$EndElements\n");
    match read_msh(&unmapped, &phys_map()) {
        Err(Error::Parse { msg, .. }) => assert!(msg.contains("99")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn msh_gapped_ids_round_trip() {
    let m = rect(2.0, 1.0, 3, 2);
    let text = write_msh(&m, &phys_map()).unwrap();
    // renumber nodes with gaps: id k -> 10 * k + 5
    let mut out = String::new();
    let mut section = "";
    for line in text.lines() {
        if line.starts_with('$') {
            section = line;
            out.push_str(line);
            out.push('\n');
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        let remapped = match section {
            "$Nodes" if toks.len() == 4 => {
                format!("{} {} {} {}", 10 * toks[0].parse::<usize>().unwrap() + 5, toks[1], toks[2], toks[3])
            }
            "$Elements" if toks.len() > 3 => {
                let ntags: usize = toks[2].parse().unwrap();
                let mut t: Vec<String> = toks.iter().map(|s| s.to_string()).collect();
                for s in t.iter_mut().skip(3 + ntags) {
                    *s = (10 * s.parse::<usize>().unwrap() + 5).to_string();
                }
                t.join(" ")
            }
            _ => line.to_string(),
        };
        out.push_str(&remapped);
        out.push('\n');
    }
    let back = read_msh(&out, &phys_map()).unwrap();
    assert_eq!(back.vertices(), m.vertices());
    assert_eq!(back.triangles(), m.triangles());
    assert_eq!(back.edges(), m.edges());
    for (a, b) in back.boundary_edges().iter().zip(m.boundary_edges()) {
        assert_eq!((a.v, a.tag), (b.v, b.tag));
    }
}

fn parse_vtk_points(text: &str) -> Vec<[f64; 2]> {
    let mut lines = text.lines().skip_while(|l| !l.starts_with("POINTS"));
    let n: usize = lines.next().unwrap().split_whitespace().nth(1).unwrap().parse().unwrap();
    lines
        .take(n)
        .map(|l| {
            let v: Vec<f64> = l.split_whitespace().map(|t| t.parse().unwrap()).collect();
            [v[0], v[1]]
        })
        .collect()
}

#[test]
fn vtk_output() {
    let m = rect(0.01, 0.001, 5, 2);
    let bare = write_vtk(&m, "mesh", &[]).unwrap();
    assert!(bare.starts_with("# vtk DataFile Version 3.0\n"));
    assert!(bare.contains(&format!("CELL_TYPES {}", m.n_triangles())));
    let pts = parse_vtk_points(&bare);
    for (p, q) in pts.iter().zip(m.vertices()) {
        assert!((p[0] - q[0]).abs() <= 1e-12 && (p[1] - q[1]).abs() <= 1e-12);
    }
    let ones = VtkField::new("one", VtkLocation::Point, VtkData::Scalar(vec![1.0; m.n_vertices()]));
    let z = VtkField::new(
        "h",
        VtkLocation::Cell,
        VtkData::ComplexScalar(vec![msfem::Complex64::new(1.0, 2.0); m.n_triangles()]),
    );
    let text = write_vtk(&m, "fields", &[ones, z]).unwrap();
    let body: Vec<&str> = text.lines().skip_while(|l| !l.starts_with("LOOKUP_TABLE")).skip(1).take(m.n_vertices()).collect();
    assert!(body.iter().all(|l| l.trim().parse::<f64>().unwrap() == 1.0));
    assert!(text.contains("SCALARS h_re double 1") && text.contains("SCALARS h_im double 1"));
    let bad = VtkField::new("bad", VtkLocation::Point, VtkData::Scalar(vec![0.0; 3]));
    assert!(matches!(write_vtk(&m, "x", &[bad]), Err(Error::InvalidArgument(_))));
}

#[test]
fn segment_half_default() {
    let geo = SegmentGeometry::default();
    let seg = make_segment_mesh(&geo).unwrap();
    let m = &seg.mesh;
    assert_eq!(seg.meshed.len(), 1);
    assert_eq!(m.euler_characteristic(), 1);
    let expected = 0.5 * (15f64).to_radians() * (0.045f64.powi(2) - 0.015f64.powi(2));
    assert!((m.total_area() - expected).abs() < 5e-3 * expected);
    for tag in [BoundaryTag::GammaH, BoundaryTag::GammaB, BoundaryTag::GammaE] {
        assert!(m.has_tag(tag), "{tag}");
    }
    let ids = m.region_ids();
    assert!(ids.contains(&1) && ids.contains(&2) && ids.contains(&3) && ids.contains(&10));
    // the conductor disk area is close to pi r^2
    let disk: f64 = (0..m.n_triangles()).filter(|&t| m.triangles()[t].region == 10).map(|t| m.triangle_area(t)).sum();
    let exact = std::f64::consts::PI * 0.002f64.powi(2);
    assert!((disk - exact).abs() < 0.02 * exact);
}

#[test]
fn segment_full_and_rotation() {
    let geo = SegmentGeometry { full: true, ..SegmentGeometry::default() };
    let seg = make_segment_mesh(&geo).unwrap();
    let m = &seg.mesh;
    assert_eq!(seg.meshed.len(), 2);
    assert!(!m.has_tag(BoundaryTag::GammaE));
    assert_eq!(m.euler_characteristic(), 1);
    let expected = 0.5 * (30f64).to_radians() * (0.045f64.powi(2) - 0.015f64.powi(2));
    assert!((m.total_area() - expected).abs() < 5e-3 * expected);
    // vertices on the cut at +15 deg, rotated by 30 deg, must reappear at -15 deg
    let on = |p: &[f64; 2], deg: f64| (p[1].atan2(p[0]) - deg.to_radians()).abs() < 1e-9;
    let lower: Vec<[f64; 2]> = m.vertices().iter().copied().filter(|p| on(p, -15.0)).collect();
    let upper: Vec<[f64; 2]> = m.vertices().iter().copied().filter(|p| on(p, 15.0)).collect();
    assert_eq!(lower.len(), upper.len());
    let a = (-30f64).to_radians();
    for p in &upper {
        let q = [p[0] * a.cos() - p[1] * a.sin(), p[0] * a.sin() + p[1] * a.cos()];
        assert!(lower.iter().any(|l| (l[0] - q[0]).hypot(l[1] - q[1]) < 1e-9));
    }
    // twelve copies close the annulus: the last copy of the +15 deg cut is the -15 deg cut
    let full_turn = (360f64).to_radians();
    for p in &upper {
        let q = [p[0] * full_turn.cos() - p[1] * full_turn.sin(), p[0] * full_turn.sin() + p[1] * full_turn.cos()];
        assert!((q[0] - p[0]).hypot(q[1] - p[1]) < 1e-9);
    }
}

#[test]
fn segment_is_deterministic_and_validates() {
    let geo = SegmentGeometry::default();
    let a = make_segment_mesh(&geo).unwrap();
    let b = make_segment_mesh(&geo).unwrap();
    assert_eq!(a.mesh.canonical_bytes(), b.mesh.canonical_bytes());
    let mut bad = geo.clone();
    bad.stator_inner = 0.029;
    assert!(matches!(make_segment_mesh(&bad), Err(Error::InvalidArgument(_))));
    let mut overlap = geo.clone();
    overlap.conductors[1].theta_deg = 8.0;
    assert!(matches!(make_segment_mesh(&overlap), Err(Error::InvalidArgument(_))));
}

#[test]
fn segment_area_converges() {
    let exact = 0.5 * (15f64).to_radians() * (0.045f64.powi(2) - 0.015f64.powi(2));
    let coarse = make_segment_mesh(&SegmentGeometry { n_theta: 20, ..SegmentGeometry::default() }).unwrap();
    let fine = make_segment_mesh(&SegmentGeometry { n_theta: 80, ..SegmentGeometry::default() }).unwrap();
    let ec = (coarse.mesh.total_area() - exact).abs();
    let ef = (fine.mesh.total_area() - exact).abs();
    assert!(ef < ec);
}
