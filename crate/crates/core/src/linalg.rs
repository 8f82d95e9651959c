//! Dense complex linear algebra shared by the Tucker and DMD layers.
//!
//! The SVD is a one-sided Jacobi iteration; the complex Schur form comes from
//! nalgebra. Eigenvectors, ordering and phase conventions are fixed here so
//! results are deterministic.

use std::cmp::Ordering;

use nalgebra::linalg::Schur;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::{ComplexMatrix, ComplexVector};

/// Thin SVD `X = U diag(s) V^H` with descending singular values.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub v: ComplexMatrix,
}

/// Which factor carries the phase convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseAnchor {
    /// First non-negligible entry of every left singular vector is real-positive.
    LeftFirstNonzero,
    /// Largest-magnitude entry of every right singular vector is real-positive.
    RightLargest,
}

pub fn svd(x: &ComplexMatrix, anchor: PhaseAnchor) -> Result<Svd> {
    let raw = jacobi_svd(x)?;
    let mut out = raw;
    for j in 0..out.s.len() {
        let pivot = match anchor {
            PhaseAnchor::LeftFirstNonzero => first_nonzero(&out.u.column(j).into_owned()),
            PhaseAnchor::RightLargest => largest(&out.v.column(j).into_owned()),
        };
        if let Some(p) = pivot {
            // the same unit phase on u and v leaves u s v^H unchanged
            let phase = p.conj() / p.norm();
            let mut uc = out.u.column_mut(j);
            uc *= phase;
            let mut vc = out.v.column_mut(j);
            vc *= phase;
        }
    }
    Ok(out)
}

/// Left singular vectors and descending singular values, with the first
/// non-negligible entry of each vector made real-positive.
pub fn left_singular(x: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<f64>)> {
    let d = svd(x, PhaseAnchor::LeftFirstNonzero)?;
    Ok((d.u, d.s))
}

const JACOBI_MAX_SWEEPS: usize = 80;

/// Thin SVD by one-sided (Hestenes) Jacobi rotations, sorted descending.
///
/// Wide inputs are handled through their adjoint. Columns of `U` belonging to
/// exactly zero singular values are completed to an orthonormal set.
pub fn jacobi_svd(x: &ComplexMatrix) -> Result<Svd> {
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("SVD input has non-finite entries".into()));
    }
    let (m, n) = x.shape();
    let out = if m >= n {
        jacobi_tall(x.clone())?
    } else {
        let t = jacobi_tall(x.adjoint())?;
        Svd { u: t.v, s: t.s, v: t.u }
    };
    check_energy(x, &out.s)?;
    Ok(out)
}

fn jacobi_tall(mut a: ComplexMatrix) -> Result<Svd> {
    let (m, n) = a.shape();
    let mut v = ComplexMatrix::identity(n, n);
    let tol = f64::EPSILON * (m as f64).sqrt().max(1.0);
    // columns at rounding level are numerically zero and never rotated
    let floor_sq = (f64::EPSILON * (m.max(n) as f64) * a.norm()).powi(2);
    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let cp = a.column(p);
                    let cq = a.column(q);
                    (cp.norm_squared(), cq.norm_squared(), cp.dotc(&cq))
                };
                let g = gamma.norm();
                if alpha <= floor_sq || beta <= floor_sq || g <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g; // a_p^H (a_q conj(phase)) is real
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s, phase.conj());
                rotate(&mut v, p, q, c, s, phase.conj());
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::Numerical("Jacobi SVD did not converge".into()));
    }

    let norms: Vec<f64> = (0..n)
        .map(|j| a.column(j).norm_squared())
        .map(|sq| if sq <= floor_sq { 0.0 } else { sq.sqrt() })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(Ordering::Equal).then(i.cmp(&j)));

    let mut u = ComplexMatrix::zeros(m, n);
    let mut vs = ComplexMatrix::zeros(n, n);
    let mut s = Vec::with_capacity(n);
    let mut missing = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        s.push(sigma);
        vs.set_column(dst, &v.column(src));
        if sigma > 0.0 {
            u.set_column(dst, &(a.column(src) / Complex64::new(sigma, 0.0)));
        } else {
            missing.push(dst);
        }
    }
    complete_orthonormal(&mut u, &missing);
    Ok(Svd { u, s, v: vs })
}

/// `[x_p, x_q] <- [x_p, x_q~] [[c, s], [-s, c]]` with `x_q~ = x_q * phase`.
fn rotate(x: &mut ComplexMatrix, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    for i in 0..x.nrows() {
        let xp = x[(i, p)];
        let xq = x[(i, q)] * phase;
        x[(i, p)] = xp * c - xq * s;
        x[(i, q)] = xp * s + xq * c;
    }
}

/// Fills the listed columns with unit vectors orthogonal to all others.
fn complete_orthonormal(u: &mut ComplexMatrix, missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let m = u.nrows();
    let mut filled: Vec<bool> = (0..u.ncols()).map(|j| !missing.contains(&j)).collect();
    let mut candidate = 0;
    for &col in missing {
        while candidate < m {
            let mut e = ComplexVector::zeros(m);
            e[candidate] = Complex64::new(1.0, 0.0);
            candidate += 1;
            // two passes of Gram-Schmidt
            for _ in 0..2 {
                for j in (0..u.ncols()).filter(|&j| filled[j]) {
                    let proj = u.column(j).dotc(&e);
                    e -= u.column(j) * proj;
                }
            }
            let norm = e.norm();
            if norm > 1e-8 {
                u.set_column(col, &(e / Complex64::new(norm, 0.0)));
                filled[col] = true;
                break;
            }
        }
    }
}

/// Guards against silently wrong decompositions: the squared singular values
/// must carry the Frobenius energy of the input.
fn check_energy(x: &ComplexMatrix, s: &[f64]) -> Result<()> {
    let energy = x.norm_squared();
    let captured: f64 = s.iter().map(|v| v * v).sum();
    if s.iter().any(|v| !v.is_finite()) || (captured - energy).abs() > 1e-10 * energy.max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "SVD lost energy: sum s^2 = {captured:e}, |X|_F^2 = {energy:e}"
        )));
    }
    Ok(())
}

fn first_nonzero(col: &ComplexVector) -> Option<Complex64> {
    let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return None;
    }
    col.iter().copied().find(|z| z.norm() > 1e-12 * max)
}

fn largest(col: &ComplexVector) -> Option<Complex64> {
    let mut best: Option<Complex64> = None;
    for &z in col.iter() {
        if best.is_none_or(|b| z.norm() > b.norm()) {
            best = Some(z);
        }
    }
    best.filter(|b| b.norm() > 0.0)
}

/// Number of singular values with `s_i / s_1 >= threshold`, at least 1.
pub fn relative_rank(s: &[f64], threshold: f64) -> usize {
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().take_while(|&&v| v / top >= threshold).count().max(1),
        _ => 1,
    }
}

/// Eigen-decomposition of a general square complex matrix.
#[derive(Debug, Clone)]
pub struct Eigen {
    /// Sorted by descending magnitude, then descending real part.
    pub values: Vec<Complex64>,
    /// Unit-norm eigenvectors, one per column, matching `values`.
    pub vectors: ComplexMatrix,
}

pub fn eig(a: &ComplexMatrix) -> Result<Eigen> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!("eig of {}x{} matrix", n, a.ncols())));
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let resid = (&q * &t * q.adjoint() - a).norm();
    if resid.is_nan() || resid > 1e-10 * a.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!("Schur residual {resid:e}")));
    }
    let scale = t.norm().max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * scale;

    let mut pairs: Vec<(Complex64, ComplexVector)> = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        // back-substitute (T - lambda I) y = 0 with y_k = 1
        let mut y = ComplexVector::zeros(n);
        y[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in i + 1..=k {
                acc += t[(i, j)] * y[j];
            }
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < tiny {
                denom = Complex64::new(tiny, 0.0);
            }
            y[i] = -acc / denom;
        }
        let mut w = &q * y;
        let norm = w.norm();
        if norm > 0.0 {
            w /= Complex64::new(norm, 0.0);
        }
        pairs.push((lambda, w));
    }
    pairs.sort_by(|a, b| eig_order(&a.0, &b.0));

    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (col, (lambda, w)) in pairs.into_iter().enumerate() {
        vectors.set_column(col, &w);
        values.push(lambda);
    }
    Ok(Eigen { values, vectors })
}

/// Descending magnitude, then descending real part, then descending imaginary part.
pub fn eig_order(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .partial_cmp(&a.norm())
        .unwrap_or(Ordering::Equal)
        .then(b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal))
        .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
}

/// Largest distance after greedily pairing each value in `a` with its nearest
/// unused partner in `b`. Infinite when the multisets differ in size.
pub fn matched_eig_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let mut best = None;
        for (j, y) in b.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = (x - y).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.expect("sizes match");
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Minimum-norm least-squares solution of `a x = b`, plus the numerical rank
/// of `a` at relative tolerance `rcond`.
pub fn lstsq(a: &ComplexMatrix, b: &ComplexVector, rcond: f64) -> Result<(ComplexVector, usize)> {
    if a.nrows() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} system with right-hand side of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let d = jacobi_svd(a)?;
    let top = d.s.first().copied().unwrap_or(0.0);
    let rank = d.s.iter().take_while(|&&s| top > 0.0 && s > rcond * top).count();
    let mut x = ComplexVector::zeros(a.ncols());
    for k in 0..rank {
        let coeff = d.u.column(k).dotc(b) / Complex64::new(d.s[k], 0.0);
        x += d.v.column(k) * coeff;
    }
    Ok((x, rank))
}
