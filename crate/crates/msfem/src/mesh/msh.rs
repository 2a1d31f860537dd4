//! ASCII MSH 2.2 subset: `$Nodes`, and `$Elements` with 2-node lines
//! (type 1), 3-node triangles (type 2) and ignored 1-node points (type 15).
//! The first element tag is the physical id; it is mapped to a region or a
//! boundary tag through a [`PhysicalMap`]. Other sections are skipped.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use super::{signed_area, BoundaryEdge, BoundaryTag, Mesh2D, RegionId, SideLabel, Triangle};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhysicalTarget {
    Region(RegionId),
    Boundary(BoundaryTag),
}

pub type PhysicalMap = BTreeMap<i64, PhysicalTarget>;

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

pub fn read_msh(text: &str, map: &PhysicalMap) -> Result<Mesh2D> {
    let lines: Vec<&str> = text.lines().collect();
    let mut node_ids: HashMap<i64, usize> = HashMap::new();
    let mut vertices: Vec<[f64; 2]> = Vec::new();
    let mut triangles = Vec::new();
    let mut boundary = Vec::new();
    let mut seen_nodes = false;
    let mut i = 0;
    while i < lines.len() {
        let head = lines[i].trim();
        match head {
            "$MeshFormat" => {
                let ln = i + 2;
                let fmt = lines.get(i + 1).map(|s| s.trim()).unwrap_or("");
                let mut it = fmt.split_whitespace();
                if it.next() != Some("2.2") {
                    return perr(ln, format!("unsupported mesh format '{fmt}', expected version 2.2"));
                }
                if it.next() != Some("0") {
                    return perr(ln, "binary MSH files are not supported");
                }
                i = skip_to(&lines, i, "$EndMeshFormat")?;
            }
            "$Nodes" => {
                let count = parse_count(&lines, i + 1)?;
                for k in 0..count {
                    let ln = i + 2 + k;
                    let toks = tokens(&lines, ln)?;
                    if toks.len() < 3 {
                        return perr(ln + 1, "node line needs id, x, y[, z]");
                    }
                    let id = parse_int(toks[0], ln)?;
                    let x = parse_float(toks[1], ln)?;
                    let y = parse_float(toks[2], ln)?;
                    if node_ids.insert(id, vertices.len()).is_some() {
                        return perr(ln + 1, format!("duplicate node id {id}"));
                    }
                    vertices.push([x, y]);
                }
                seen_nodes = true;
                i = expect_end(&lines, i + 2 + count, "$EndNodes")?;
            }
            "$Elements" => {
                if !seen_nodes {
                    return perr(i + 1, "$Elements before $Nodes");
                }
                let count = parse_count(&lines, i + 1)?;
                for k in 0..count {
                    let ln = i + 2 + k;
                    let toks = tokens(&lines, ln)?;
                    if toks.len() < 3 {
                        return perr(ln + 1, "element line too short");
                    }
                    let etype = parse_int(toks[1], ln)?;
                    let ntags = parse_int(toks[2], ln)?;
                    let nnodes = match etype {
                        1 => 2,
                        2 => 3,
                        15 => 1,
                        3 => return perr(ln + 1, "unsupported element type 3 (4-node quadrangle)"),
                        other => return perr(ln + 1, format!("unsupported element type {other}")),
                    };
                    if ntags < 1 {
                        return perr(ln + 1, "element without physical tag");
                    }
                    let ntags = ntags as usize;
                    if toks.len() != 3 + ntags + nnodes {
                        return perr(ln + 1, format!("expected {} fields, found {}", 3 + ntags + nnodes, toks.len()));
                    }
                    if etype == 15 {
                        continue;
                    }
                    let phys = parse_int(toks[3], ln)?;
                    let mut v = Vec::with_capacity(nnodes);
                    for t in &toks[3 + ntags..] {
                        let id = parse_int(t, ln)?;
                        match node_ids.get(&id) {
                            Some(&idx) => v.push(idx),
                            None => return perr(ln + 1, format!("dangling node reference {id}")),
                        }
                    }
                    let target = match map.get(&phys) {
                        Some(t) => *t,
                        None => return perr(ln + 1, format!("physical id {phys} has no mapping")),
                    };
                    match (etype, target) {
                        (1, PhysicalTarget::Boundary(tag)) => {
                            boundary.push(BoundaryEdge { v: [v[0], v[1]], tag, label: SideLabel::None })
                        }
                        (2, PhysicalTarget::Region(region)) => {
                            let mut tv = [v[0], v[1], v[2]];
                            if signed_area(vertices[tv[0]], vertices[tv[1]], vertices[tv[2]]) < 0.0 {
                                tv.swap(1, 2);
                            }
                            triangles.push(Triangle { v: tv, region });
                        }
                        (1, _) => return perr(ln + 1, format!("line element with physical id {phys} mapped to a region")),
                        _ => return perr(ln + 1, format!("triangle with physical id {phys} mapped to a boundary tag")),
                    }
                }
                i = expect_end(&lines, i + 2 + count, "$EndElements")?;
            }
            s if s.starts_with('$') && !s.starts_with("$End") => {
                let end = format!("$End{}", &s[1..]);
                i = skip_to(&lines, i, &end)?;
            }
            "" => {}
            other => return perr(i + 1, format!("unexpected content '{other}'")),
        }
        i += 1;
    }
    if !seen_nodes {
        return perr(lines.len(), "no $Nodes section");
    }
    // drop nodes not used by any triangle while keeping file order
    let mut used = vec![false; vertices.len()];
    for t in &triangles {
        for &v in &t.v {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut compact = Vec::new();
    for (k, p) in vertices.iter().enumerate() {
        if used[k] {
            remap[k] = compact.len();
            compact.push(*p);
        }
    }
    for t in triangles.iter_mut() {
        t.v = t.v.map(|v| remap[v]);
    }
    for b in boundary.iter_mut() {
        if b.v.iter().any(|&v| remap[v] == usize::MAX) {
            return Err(Error::InvalidMesh("boundary line references a node outside the triangulation".into()));
        }
        b.v = b.v.map(|v| remap[v]);
    }
    Mesh2D::new(compact, triangles, boundary)
}

/// Write a mesh in the same subset (1-based ids).
///
/// `map` must contain a physical id for every region and every boundary
/// tag used by the mesh.
pub fn write_msh(mesh: &Mesh2D, map: &PhysicalMap) -> Result<String> {
    let mut region_id = BTreeMap::new();
    let mut tag_id = BTreeMap::new();
    for (&phys, target) in map {
        match *target {
            PhysicalTarget::Region(r) => {
                region_id.entry(r).or_insert(phys);
            }
            PhysicalTarget::Boundary(t) => {
                tag_id.entry(t).or_insert(phys);
            }
        }
    }
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.n_vertices());
    for (k, p) in mesh.vertices().iter().enumerate() {
        let _ = writeln!(s, "{} {} {} 0", k + 1, p[0], p[1]);
    }
    s.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(s, "{}", mesh.boundary_edges().len() + mesh.n_triangles());
    let mut id = 1;
    for b in mesh.boundary_edges() {
        let phys = tag_id
            .get(&b.tag)
            .ok_or_else(|| Error::InvalidArgument(format!("no physical id for tag {}", b.tag)))?;
        let _ = writeln!(s, "{id} 1 2 {phys} {phys} {} {}", b.v[0] + 1, b.v[1] + 1);
        id += 1;
    }
    for t in mesh.triangles() {
        let phys = region_id
            .get(&t.region)
            .ok_or_else(|| Error::InvalidArgument(format!("no physical id for region {}", t.region)))?;
        let _ = writeln!(s, "{id} 2 2 {phys} {phys} {} {} {}", t.v[0] + 1, t.v[1] + 1, t.v[2] + 1);
        id += 1;
    }
    s.push_str("$EndElements\n");
    Ok(s)
}

fn tokens<'a>(lines: &[&'a str], ln: usize) -> Result<Vec<&'a str>> {
    match lines.get(ln) {
        Some(l) => Ok(l.split_whitespace().collect()),
        None => perr(ln + 1, "unexpected end of file"),
    }
}

fn parse_count(lines: &[&str], ln: usize) -> Result<usize> {
    let toks = tokens(lines, ln)?;
    if toks.len() != 1 {
        return perr(ln + 1, "expected a single count");
    }
    toks[0].parse().or_else(|_| perr(ln + 1, format!("bad count '{}'", toks[0])))
}

fn parse_int(t: &str, ln: usize) -> Result<i64> {
    t.parse().or_else(|_| perr(ln + 1, format!("bad integer '{t}'")))
}

fn parse_float(t: &str, ln: usize) -> Result<f64> {
    t.parse().or_else(|_| perr(ln + 1, format!("bad number '{t}'")))
}

fn expect_end(lines: &[&str], ln: usize, end: &str) -> Result<usize> {
    match lines.get(ln) {
        Some(l) if l.trim() == end => Ok(ln),
        Some(l) => perr(ln + 1, format!("expected {end}, found '{}'", l.trim())),
        None => perr(ln + 1, format!("missing {end}")),
    }
}

fn skip_to(lines: &[&str], from: usize, end: &str) -> Result<usize> {
    (from..lines.len())
        .find(|&k| lines[k].trim() == end)
        .map_or_else(|| perr(from + 1, format!("missing {end}")), Ok)
}
