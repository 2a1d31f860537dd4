//! Hierarchical H1 and H(curl) shape functions on triangles.
//!
//! Everything is written in terms of barycentric coordinates `λ_i` and their
//! gradients, so the same code evaluates reference functions (reference
//! gradients) and physical functions (physical gradients, which makes the
//! covariant mapping of edge functions implicit).
//!
//! Local edges are `(0,1), (1,2), (2,0)`. For edge functions the edge is
//! traversed from its lower to its higher global vertex number, given by
//! `flip[e]` (`true` when the local order runs against the global one).
//!
//! Local numbering, scalar order `m`:
//! vertices `λ_0, λ_1, λ_2`; then (m ≥ 2) per edge `4 λ_a λ_b`; then
//! (m ≥ 3) per edge `4 λ_a λ_b (λ_b − λ_a)`; then (m ≥ 3) `27 λ_0 λ_1 λ_2`.
//!
//! Local numbering, edge order `k`: per edge the block
//! `[W_ab, ∇(4λ_aλ_b) (k≥1), ∇(4λ_aλ_b(λ_b−λ_a)) (k≥2)]`, then the cell block
//! `λ_2 W_01, λ_0 W_12` (k ≥ 1) and
//! `∇(27λ_0λ_1λ_2), λ_2² W_01, λ_0² W_12, λ_1² W_20` (k = 2),
//! with the Whitney function `W_ab = λ_a ∇λ_b − λ_b ∇λ_a`.

use crate::mesh::LOCAL_EDGES;

pub const MAX_SCALAR_ORDER: usize = 3;
pub const MAX_EDGE_ORDER: usize = 2;
pub const MAX_SCALAR_LOCAL: usize = 10;
pub const MAX_EDGE_LOCAL: usize = 15;

type V2 = [f64; 2];

#[inline]
fn cross(a: V2, b: V2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}
#[inline]
fn add(a: V2, b: V2) -> V2 {
    [a[0] + b[0], a[1] + b[1]]
}
#[inline]
fn sub(a: V2, b: V2) -> V2 {
    [a[0] - b[0], a[1] - b[1]]
}
#[inline]
fn scale(s: f64, a: V2) -> V2 {
    [s * a[0], s * a[1]]
}

/// Number of local scalar functions of order `m`.
pub fn scalar_local_count(m: usize) -> usize {
    (m + 1) * (m + 2) / 2
}

/// Number of local edge functions of order `k`.
pub fn edge_local_count(k: usize) -> usize {
    (k + 1) * (k + 3)
}

/// Interior (cell) functions per triangle.
pub fn scalar_cell_count(m: usize) -> usize {
    if m >= 3 {
        (m - 1) * (m - 2) / 2
    } else {
        0
    }
}

pub fn edge_cell_count(k: usize) -> usize {
    edge_local_count(k) - 3 * (k + 1)
}

/// Values and gradients of the local scalar basis at one point.
#[derive(Clone, Copy, Debug)]
pub struct ScalarValues {
    pub n: usize,
    pub val: [f64; MAX_SCALAR_LOCAL],
    pub grad: [V2; MAX_SCALAR_LOCAL],
}

/// Values and curls of the local edge basis at one point.
#[derive(Clone, Copy, Debug)]
pub struct VectorValues {
    pub n: usize,
    pub val: [V2; MAX_EDGE_LOCAL],
    pub curl: [f64; MAX_EDGE_LOCAL],
}

fn oriented(e: usize, flip: [bool; 3]) -> (usize, usize) {
    let [i, j] = LOCAL_EDGES[e];
    if flip[e] {
        (j, i)
    } else {
        (i, j)
    }
}

/// `4 λa λb` and its gradient.
fn bubble2(l: [f64; 3], g: [V2; 3], a: usize, b: usize) -> (f64, V2) {
    (4.0 * l[a] * l[b], scale(4.0, add(scale(l[a], g[b]), scale(l[b], g[a]))))
}

/// `4 λa λb (λb − λa)` and its gradient.
fn bubble3(l: [f64; 3], g: [V2; 3], a: usize, b: usize) -> (f64, V2) {
    let d = l[b] - l[a];
    let p = l[a] * l[b];
    let gp = add(scale(l[a], g[b]), scale(l[b], g[a]));
    (4.0 * p * d, scale(4.0, add(scale(d, gp), scale(p, sub(g[b], g[a])))))
}

fn cell_bubble(l: [f64; 3], g: [V2; 3]) -> (f64, V2) {
    let v = 27.0 * l[0] * l[1] * l[2];
    let gr = scale(
        27.0,
        add(add(scale(l[1] * l[2], g[0]), scale(l[0] * l[2], g[1])), scale(l[0] * l[1], g[2])),
    );
    (v, gr)
}

fn whitney(l: [f64; 3], g: [V2; 3], a: usize, b: usize) -> (V2, f64) {
    (sub(scale(l[a], g[b]), scale(l[b], g[a])), 2.0 * cross(g[a], g[b]))
}

/// Scalar basis of order `m` at barycentric point `l` with gradients `g`.
pub fn scalar_basis(m: usize, l: [f64; 3], g: [V2; 3], flip: [bool; 3]) -> ScalarValues {
    assert!((1..=MAX_SCALAR_ORDER).contains(&m), "scalar order {m} unsupported");
    let mut out = ScalarValues { n: scalar_local_count(m), val: [0.0; MAX_SCALAR_LOCAL], grad: [[0.0; 2]; MAX_SCALAR_LOCAL] };
    let mut k = 0;
    let mut push = |v: f64, gr: V2| {
        out.val[k] = v;
        out.grad[k] = gr;
        k += 1;
    };
    for i in 0..3 {
        push(l[i], g[i]);
    }
    if m >= 2 {
        for e in 0..3 {
            let (a, b) = oriented(e, flip);
            let (v, gr) = bubble2(l, g, a, b);
            push(v, gr);
        }
    }
    if m >= 3 {
        for e in 0..3 {
            let (a, b) = oriented(e, flip);
            let (v, gr) = bubble3(l, g, a, b);
            push(v, gr);
        }
        let (v, gr) = cell_bubble(l, g);
        push(v, gr);
    }
    debug_assert_eq!(k, out.n);
    out
}

/// Edge basis of order `k` at barycentric point `l` with gradients `g`.
pub fn edge_basis(k: usize, l: [f64; 3], g: [V2; 3], flip: [bool; 3]) -> VectorValues {
    assert!(k <= MAX_EDGE_ORDER, "edge order {k} unsupported");
    let mut out = VectorValues { n: edge_local_count(k), val: [[0.0; 2]; MAX_EDGE_LOCAL], curl: [0.0; MAX_EDGE_LOCAL] };
    let mut n = 0;
    let mut push = |v: V2, c: f64| {
        out.val[n] = v;
        out.curl[n] = c;
        n += 1;
    };
    for e in 0..3 {
        let (a, b) = oriented(e, flip);
        let (w, c) = whitney(l, g, a, b);
        push(w, c);
        if k >= 1 {
            push(bubble2(l, g, a, b).1, 0.0);
        }
        if k >= 2 {
            push(bubble3(l, g, a, b).1, 0.0);
        }
    }
    if k >= 1 {
        let (w01, c01) = whitney(l, g, 0, 1);
        let (w12, c12) = whitney(l, g, 1, 2);
        push(scale(l[2], w01), cross(g[2], w01) + l[2] * c01);
        push(scale(l[0], w12), cross(g[0], w12) + l[0] * c12);
        if k >= 2 {
            let (w20, c20) = whitney(l, g, 2, 0);
            push(cell_bubble(l, g).1, 0.0);
            push(scale(l[2] * l[2], w01), 2.0 * l[2] * cross(g[2], w01) + l[2] * l[2] * c01);
            push(scale(l[0] * l[0], w12), 2.0 * l[0] * cross(g[0], w12) + l[0] * l[0] * c12);
            push(scale(l[1] * l[1], w20), 2.0 * l[1] * cross(g[1], w20) + l[1] * l[1] * c20);
        }
    }
    debug_assert_eq!(n, out.n);
    out
}

/// Reference-triangle gradients of the barycentric coordinates.
pub const REF_GRADS: [V2; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];

/// Reference scalar basis at `(x, y)` (local orientation).
pub fn h1_eval(m: usize, x: f64, y: f64) -> ScalarValues {
    scalar_basis(m, [1.0 - x - y, x, y], REF_GRADS, [false, false, true])
}

/// Reference edge basis at `(x, y)` (local orientation).
pub fn hcurl_eval(k: usize, x: f64, y: f64) -> VectorValues {
    edge_basis(k, [1.0 - x - y, x, y], REF_GRADS, [false, false, true])
}

/// Gradients of the barycentric coordinates of a physical triangle and its area.
pub fn barycentric_gradients(p: [[f64; 2]; 3]) -> ([V2; 3], f64) {
    let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let inv = 1.0 / area2;
    let g = [
        [(p[1][1] - p[2][1]) * inv, (p[2][0] - p[1][0]) * inv],
        [(p[2][1] - p[0][1]) * inv, (p[0][0] - p[2][0]) * inv],
        [(p[0][1] - p[1][1]) * inv, (p[1][0] - p[0][0]) * inv],
    ];
    (g, 0.5 * area2)
}

/// Orientation flags of the local edges of a triangle with global vertices `v`.
pub fn edge_flips(v: [usize; 3]) -> [bool; 3] {
    let mut f = [false; 3];
    for (e, le) in LOCAL_EDGES.iter().enumerate() {
        f[e] = v[le[0]] > v[le[1]];
    }
    f
}
