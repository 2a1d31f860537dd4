//! Left-looking sparse LU (Gilbert–Peierls) with threshold partial pivoting.
//!
//! Columns are processed in a fill-reducing order (approximate minimum
//! degree on the pattern of `A + A^T`). For every column the sparse
//! triangular solve against the already computed part of `L` is restricted
//! to the nonzero reach found by a depth-first search, so the cost is
//! proportional to the arithmetic actually performed.
//!
//! The pivot rule prefers the diagonal entry of the permuted matrix whenever
//! it is within `pivot_tolerance` of the largest candidate. This keeps the
//! symmetric ordering intact for the complex-symmetric systems of the
//! eddy-current formulations while staying safe for general matrices.

use num_complex::Complex64;

use super::{CsrMatrix, SolverError};

/// Relative pivot size below which a column counts as dependent.
const SINGULAR_RTOL: f64 = 64.0 * f64::EPSILON;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnOrdering {
    Natural,
    Amd,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LuOptions {
    pub ordering: ColumnOrdering,
    /// In `(0, 1]`: the diagonal is accepted when `|a_kk| >= tol * max_i |a_ik|`.
    /// The small default keeps the AMD ordering for the equilibrated
    /// complex-symmetric systems; with the penalized T-family blocks a
    /// textbook 0.1 multiplies the fill several times over. Iterative
    /// refinement recovers the accuracy lost to pivot growth.
    pub pivot_tolerance: f64,
    /// Maximum number of iterative refinement steps in `solve_linear`.
    pub refinement_steps: usize,
    /// Symmetric diagonal equilibration before factorization in `solve_linear`.
    pub equilibrate: bool,
}

impl Default for LuOptions {
    fn default() -> Self {
        LuOptions { ordering: ColumnOrdering::Amd, pivot_tolerance: 1e-6, refinement_steps: 10, equilibrate: true }
    }
}

/// `P A Q = L U` with unit lower triangular `L`.
#[derive(Clone, Debug)]
pub struct LuFactors {
    n: usize,
    q: Vec<usize>,
    pinv: Vec<usize>,
    l_p: Vec<usize>,
    l_i: Vec<usize>,
    l_x: Vec<Complex64>,
    u_p: Vec<usize>,
    u_i: Vec<usize>,
    u_x: Vec<Complex64>,
}

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Off-diagonal nonzeros of `L` plus its unit diagonal.
    pub fn nnz_l(&self) -> usize {
        self.l_x.len()
    }

    pub fn nnz_u(&self) -> usize {
        self.u_x.len()
    }

    pub fn column_order(&self) -> &[usize] {
        &self.q
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>, SolverError> {
        let n = self.n;
        if b.len() != n {
            return Err(SolverError::DimensionMismatch { expected: n, found: b.len() });
        }
        let mut y = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            y[self.pinv[i]] = b[i];
        }
        for k in 0..n {
            let yk = y[k];
            if yk == Complex64::new(0.0, 0.0) {
                continue;
            }
            for p in self.l_p[k] + 1..self.l_p[k + 1] {
                y[self.l_i[p]] -= self.l_x[p] * yk;
            }
        }
        for k in (0..n).rev() {
            let last = self.u_p[k + 1] - 1;
            y[k] /= self.u_x[last];
            let yk = y[k];
            for p in self.u_p[k]..last {
                y[self.u_i[p]] -= self.u_x[p] * yk;
            }
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n {
            x[self.q[k]] = y[k];
        }
        Ok(x)
    }
}

fn amd_order(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    if n == 0 {
        return Vec::new();
    }
    let control = amd::Control::default();
    match amd::order::<usize>(n, a.row_ptr(), a.col_idx(), &control) {
        Ok((p, _, _)) => p,
        // the pattern comes from a valid CSR matrix, so failure would be a
        // bug in the ordering library; fall back to the natural order
        Err(_) => (0..n).collect(),
    }
}

pub fn factorize(a: &CsrMatrix, opts: &LuOptions) -> Result<LuFactors, SolverError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(SolverError::NotSquare { rows: n, cols: a.ncols() });
    }
    let tol = opts.pivot_tolerance.clamp(f64::MIN_POSITIVE, 1.0);
    let q = match opts.ordering {
        ColumnOrdering::Natural => (0..n).collect::<Vec<_>>(),
        ColumnOrdering::Amd => amd_order(a),
    };
    // column access: CSR of A^T is CSC of A
    let at = a.transpose();

    let zero = Complex64::new(0.0, 0.0);
    let mut pinv = vec![NONE; n];
    let mut l_p = Vec::with_capacity(n + 1);
    let mut l_i: Vec<usize> = Vec::new();
    let mut l_x: Vec<Complex64> = Vec::new();
    let mut u_p = Vec::with_capacity(n + 1);
    let mut u_i: Vec<usize> = Vec::new();
    let mut u_x: Vec<Complex64> = Vec::new();

    let mut x = vec![zero; n];
    let mut mark = vec![NONE; n];
    let mut reach: Vec<usize> = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for k in 0..n {
        l_p.push(l_i.len());
        u_p.push(u_i.len());
        let j = q[k];

        // symbolic: postorder of the nodes reachable from the pattern of A(:, j)
        reach.clear();
        for (i, _) in at.row(j) {
            if mark[i] == k {
                continue;
            }
            mark[i] = k;
            stack.push((i, start_of(&pinv, &l_p, i)));
            while let Some(&mut (node, ref mut ptr)) = stack.last_mut() {
                let col = pinv[node];
                let mut descended = false;
                if col != NONE {
                    let end = l_p[col + 1];
                    while *ptr < end {
                        let r = l_i[*ptr];
                        *ptr += 1;
                        if mark[r] != k {
                            mark[r] = k;
                            let s = start_of(&pinv, &l_p, r);
                            stack.push((r, s));
                            descended = true;
                            break;
                        }
                    }
                }
                if !descended {
                    stack.pop();
                    reach.push(node);
                }
            }
        }

        // numeric: sparse triangular solve in topological order
        let mut col_max = 0.0f64;
        for (i, v) in at.row(j) {
            x[i] = v;
            col_max = col_max.max(v.norm());
        }
        for &i in reach.iter().rev() {
            let col = pinv[i];
            if col == NONE {
                continue;
            }
            let xi = x[i];
            if xi == zero {
                continue;
            }
            for p in l_p[col] + 1..l_p[col + 1] {
                x[l_i[p]] -= l_x[p] * xi;
            }
        }

        // pivot choice among rows not yet pivotal
        let mut ipiv = NONE;
        let mut amax = -1.0f64;
        for &i in reach.iter().rev() {
            if pinv[i] == NONE {
                let t = x[i].norm();
                if t > amax {
                    amax = t;
                    ipiv = i;
                }
            }
        }
        // a pivot at rounding level relative to its column means the
        // remaining block is numerically rank deficient
        if ipiv == NONE || !(amax > SINGULAR_RTOL * col_max) || !amax.is_finite() {
            for &i in &reach {
                x[i] = zero;
            }
            return Err(SolverError::Singular { step: k, column: j });
        }
        if pinv[j] == NONE && mark[j] == k && x[j].norm() >= tol * amax {
            ipiv = j;
        }
        let pivot = x[ipiv];

        for &i in reach.iter().rev() {
            let col = pinv[i];
            if col != NONE {
                u_i.push(col);
                u_x.push(x[i]);
            }
        }
        u_i.push(k);
        u_x.push(pivot);

        pinv[ipiv] = k;
        l_i.push(ipiv);
        l_x.push(Complex64::new(1.0, 0.0));
        for &i in reach.iter().rev() {
            if pinv[i] == NONE {
                l_i.push(i);
                l_x.push(x[i] / pivot);
            }
        }
        for &i in &reach {
            x[i] = zero;
        }
    }
    l_p.push(l_i.len());
    u_p.push(u_i.len());
    for r in l_i.iter_mut() {
        *r = pinv[*r];
    }
    Ok(LuFactors { n, q, pinv, l_p, l_i, l_x, u_p, u_i, u_x })
}

fn start_of(pinv: &[usize], l_p: &[usize], node: usize) -> usize {
    match pinv[node] {
        NONE => 0,
        col => l_p[col],
    }
}
