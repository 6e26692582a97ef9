use num_complex::Complex64;

/// Associated Laguerre polynomial `L_n^β(u)` by the three-term recurrence
///
/// `(k+1) L_{k+1} = (2k + 1 + β − u) L_k − (k + β) L_{k−1}`.
///
/// β may be any real number, including negative non-integers.
pub fn laguerre(n: usize, beta: f64, u: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    if n == 0 {
        return one;
    }
    let mut prev = one;
    let mut cur = one * (1.0 + beta) - u;
    for k in 1..n {
        let kf = k as f64;
        let next = (cur * (2.0 * kf + 1.0 + beta) - cur * u - prev * (kf + beta)) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `d/du L_n^β(u) = −L_{n−1}^{β+1}(u)`.
pub fn laguerre_prime(n: usize, beta: f64, u: Complex64) -> Complex64 {
    if n == 0 {
        Complex64::new(0.0, 0.0)
    } else {
        -laguerre(n - 1, beta + 1.0, u)
    }
}

/// `d²/du² L_n^β(u) = L_{n−2}^{β+2}(u)`.
pub fn laguerre_second(n: usize, beta: f64, u: Complex64) -> Complex64 {
    if n < 2 {
        Complex64::new(0.0, 0.0)
    } else {
        laguerre(n - 2, beta + 2.0, u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_zero_is_one() {
        assert_eq!(laguerre(0, -0.5, Complex64::new(2.0, 1.0)), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn degree_one_is_linear() {
        let u = Complex64::new(0.3, -1.2);
        let b = 0.7;
        assert!((laguerre(1, b, u) - (1.0 + b - u)).norm() < 1e-15);
    }

    #[test]
    fn derivative_matches_difference() {
        let u = Complex64::new(0.8, 0.2);
        let h = 1e-6;
        let fd = (laguerre(4, -1.5, u + h) - laguerre(4, -1.5, u - h)) / (2.0 * h);
        assert!((laguerre_prime(4, -1.5, u) - fd).norm() < 1e-8);
        let fd2 = (laguerre_prime(4, -1.5, u + h) - laguerre_prime(4, -1.5, u - h)) / (2.0 * h);
        assert!((laguerre_second(4, -1.5, u) - fd2).norm() < 1e-8);
    }
}
