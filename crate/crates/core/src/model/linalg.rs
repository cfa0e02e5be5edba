//! Thin safe wrappers over `matrixmultiply::dgemm` for row-major buffers.

/// `c (m x n) = a (m x k) * b (k x n) + beta * c`.
pub(crate) fn mm(c: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize, beta: f64) {
    gemm(c, a, b, m, k, n, beta, (k as isize, 1), (n as isize, 1));
}

/// `c (m x n) = a (m x k) * b^T + beta * c` where `b` is `n x k`.
pub(crate) fn mm_nt(c: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize, beta: f64) {
    gemm(c, a, b, m, k, n, beta, (k as isize, 1), (1, k as isize));
}

/// `c (m x n) = a^T * b (k x n) + beta * c` where `a` is `k x m`.
pub(crate) fn mm_tn(c: &mut [f64], a: &[f64], b: &[f64], m: usize, k: usize, n: usize, beta: f64) {
    gemm(c, a, b, m, k, n, beta, (1, m as isize), (n as isize, 1));
}

#[allow(clippy::too_many_arguments)]
fn gemm(
    c: &mut [f64],
    a: &[f64],
    b: &[f64],
    m: usize,
    k: usize,
    n: usize,
    beta: f64,
    (rsa, csa): (isize, isize),
    (rsb, csb): (isize, isize),
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n, "gemm operand too short");
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        c[..m * n].iter_mut().for_each(|v| *v *= beta);
        return;
    }
    // SAFETY: the strides describe dense row-major (or transposed) views
    // that lie inside the asserted slice lengths, and `c` does not alias
    // `a` or `b` because it is borrowed mutably.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

#[inline]
pub(crate) fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + libm::exp(-x))
}
