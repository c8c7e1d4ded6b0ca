//! Chebyshev series on `[-1, 1]` sampled at the Chebyshev-Lobatto points.

use crate::real::Real;

/// Lobatto points `-cos(pi j / n)`, `j = 0..=n`, ascending.
pub fn lobatto_points<T: Real>(n: usize) -> Vec<T> {
    let nf = T::from_usize(n).unwrap();
    (0..=n)
        .map(|j| -(T::PI() * T::from_usize(j).unwrap() / nf).cos())
        .collect()
}

/// Coefficients of the degree-`n` interpolant of `values` taken at
/// [`lobatto_points`].
pub fn values_to_coeffs<T: Real>(values: &[T]) -> Vec<T> {
    let n = values.len() - 1;
    let nf = T::from_usize(n).unwrap();
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    (0..=n)
        .map(|k| {
            let mut s = T::zero();
            for (j, &v) in values.iter().enumerate() {
                // T_k at -cos(pi j/n) is cos(pi k (n - j) / n); reduce mod 2n exactly
                let m = (k * (n - j)) % (2 * n);
                let w = if j == 0 || j == n { half } else { T::one() };
                s += w * v * (T::PI() * T::from_usize(m).unwrap() / nf).cos();
            }
            let c = two * s / nf;
            if k == 0 || k == n {
                c * half
            } else {
                c
            }
        })
        .collect()
}

/// Evaluates `sum c_k T_k(x)`.
pub fn clenshaw<T: Real>(coeffs: &[T], x: T) -> T {
    let two_x = x + x;
    let mut b1 = T::zero();
    let mut b2 = T::zero();
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + two_x * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + x * b1 - b2
}

/// Coefficients of the derivative series (one degree lower).
pub fn derivative<T: Real>(coeffs: &[T]) -> Vec<T> {
    let n = coeffs.len() - 1;
    if n == 0 {
        return vec![T::zero()];
    }
    let mut out = vec![T::zero(); n + 2];
    for k in (1..=n).rev() {
        out[k - 1] = out[k + 1] + T::from_usize(2 * k).unwrap() * coeffs[k];
    }
    out[0] *= T::lit(0.5);
    out.truncate(n);
    out
}

/// Antiderivative coefficients, normalized to vanish at `x = -1`.
pub fn antiderivative<T: Real>(coeffs: &[T]) -> Vec<T> {
    let n = coeffs.len() - 1;
    let c = |k: usize| if k <= n { coeffs[k] } else { T::zero() };
    let mut b = vec![T::zero(); n + 2];
    let two = T::lit(2.0);
    b[1] = c(0) - c(2) / two;
    for (k, bk) in b.iter_mut().enumerate().skip(2) {
        *bk = (c(k - 1) - c(k + 1)) / (two * T::from_usize(k).unwrap());
    }
    let mut at_minus_one = T::zero();
    for (k, &bk) in b.iter().enumerate().skip(1) {
        if k % 2 == 0 {
            at_minus_one += bk;
        } else {
            at_minus_one -= bk;
        }
    }
    b[0] = -at_minus_one;
    b
}

/// `S[i][j] = int_{-1}^{x_i} l_j(x) dx` for the Lagrange basis `l_j` on the
/// Lobatto points of degree `n`.
pub fn integration_matrix<T: Real>(n: usize) -> Vec<Vec<T>> {
    let pts = lobatto_points::<T>(n);
    let mut s = vec![vec![T::zero(); n + 1]; n + 1];
    for j in 0..=n {
        let mut e = vec![T::zero(); n + 1];
        e[j] = T::one();
        let anti = antiderivative(&values_to_coeffs(&e));
        for (i, &x) in pts.iter().enumerate() {
            s[i][j] = clenshaw(&anti, x);
        }
    }
    s
}
