use num_complex::Complex64;

use super::{norm2, CsrMatrix, SolverError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterativeOptions {
    /// Relative residual target `||r|| / ||b||`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for IterativeOptions {
    fn default() -> Self {
        IterativeOptions { tolerance: 1e-10, max_iterations: 10_000 }
    }
}

#[derive(Clone, Debug)]
pub struct IterativeReport {
    pub x: Vec<Complex64>,
    pub iterations: usize,
    /// Relative residual after every iteration (entry 0 is the initial guess).
    pub history: Vec<f64>,
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(u, v)| u.conj() * v).sum()
}

/// Jacobi-preconditioned BiCGSTAB.
///
/// Zero diagonal entries are treated as one in the preconditioner.
pub fn bicgstab(
    a: &CsrMatrix,
    b: &[Complex64],
    x0: Option<&[Complex64]>,
    opts: &IterativeOptions,
) -> Result<IterativeReport, SolverError> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(SolverError::NotSquare { rows: n, cols: a.ncols() });
    }
    if b.len() != n {
        return Err(SolverError::DimensionMismatch { expected: n, found: b.len() });
    }
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let dinv: Vec<Complex64> = (0..n)
        .map(|i| {
            let d = a.get(i, i);
            if d == zero {
                one
            } else {
                one / d
            }
        })
        .collect();
    let precond = |v: &[Complex64]| -> Vec<Complex64> { v.iter().zip(&dinv).map(|(u, d)| u * d).collect() };

    let mut x = match x0 {
        Some(x0) => {
            if x0.len() != n {
                return Err(SolverError::DimensionMismatch { expected: n, found: x0.len() });
            }
            x0.to_vec()
        }
        None => vec![zero; n],
    };
    let bnorm = norm2(b);
    let scale = if bnorm > 0.0 { bnorm } else { 1.0 };
    let ax = a.matvec(&x);
    let mut r: Vec<Complex64> = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
    let rhat = r.clone();
    let mut history = vec![norm2(&r) / scale];
    if history[0] <= opts.tolerance {
        return Ok(IterativeReport { x, iterations: 0, history });
    }
    let mut rho_old = one;
    let mut alpha = one;
    let mut omega = one;
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];

    for it in 1..=opts.max_iterations {
        let rho = cdot(&rhat, &r);
        if rho.norm() == 0.0 {
            return Err(SolverError::Breakdown { iteration: it });
        }
        let beta = (rho / rho_old) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let phat = precond(&p);
        v = a.matvec(&phat);
        let denom = cdot(&rhat, &v);
        if denom.norm() == 0.0 {
            return Err(SolverError::Breakdown { iteration: it });
        }
        alpha = rho / denom;
        let s: Vec<Complex64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        let snorm = norm2(&s) / scale;
        if snorm <= opts.tolerance {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            history.push(snorm);
            return Ok(IterativeReport { x, iterations: it, history });
        }
        let shat = precond(&s);
        let t = a.matvec(&shat);
        let tt = cdot(&t, &t);
        if tt.norm() == 0.0 {
            return Err(SolverError::Breakdown { iteration: it });
        }
        omega = cdot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        let rn = norm2(&r) / scale;
        history.push(rn);
        if rn <= opts.tolerance {
            return Ok(IterativeReport { x, iterations: it, history });
        }
        if omega.norm() == 0.0 || !rn.is_finite() {
            return Err(SolverError::Breakdown { iteration: it });
        }
        rho_old = rho;
    }
    Err(SolverError::NoConvergence {
        iterations: opts.max_iterations,
        residual: *history.last().unwrap(),
    })
}
