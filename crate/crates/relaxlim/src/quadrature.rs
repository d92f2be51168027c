//! Adaptive Gauss-Legendre quadrature for constitutive antiderivatives.

/// 7-point Gauss-Legendre nodes/weights on [-1, 1].
const GL_NODES: [f64; 7] = [
    -0.949107912342758,
    -0.741531185599394,
    -0.405845151377397,
    0.0,
    0.405845151377397,
    0.741531185599394,
    0.949107912342758,
];
const GL_WEIGHTS: [f64; 7] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
    0.381830050505119,
    0.279705391489277,
    0.129484966168870,
];

fn gauss7(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

fn adapt(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, whole: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let left = gauss7(f, a, mid);
    let right = gauss7(f, mid, b);
    let err = (left + right - whole).abs();
    if err <= tol || depth >= 40 {
        left + right
    } else {
        adapt(f, a, mid, 0.5 * tol, left, depth + 1) + adapt(f, mid, b, 0.5 * tol, right, depth + 1)
    }
}

/// Adaptive composite Gauss quadrature of `f` on `[a, b]` (signed; `a > b` allowed).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let g: &dyn Fn(f64) -> f64 = &f;
    let whole = gauss7(g, a, b);
    adapt(g, a, b, tol, whole, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| 3.0 * x * x, 0.0, 2.0, 1e-12);
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let v = integrate(|x| x.cos(), 1.0, 0.0, 1e-12);
        assert!((v + 1.0f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn adaptive_handles_steep_integrand() {
        let v = integrate(|x| (-50.0 * x).exp(), 0.0, 1.0, 1e-12);
        let exact = (1.0 - (-50.0f64).exp()) / 50.0;
        assert!((v - exact).abs() < 1e-11);
    }
}
