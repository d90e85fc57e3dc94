//! Small numerical kernels shared by the solvers.

use libm::erfc;

pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal distribution function, accurate in both tails.
#[inline]
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Antiderivative of the normal distribution function: `z Φ(z) + φ(z)`.
#[inline]
pub fn normal_cdf_integral(z: f64) -> f64 {
    z * normal_cdf(z) + normal_pdf(z)
}

/// Five-point Gauss-Legendre nodes and weights on [-1, 1].
pub const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// Five-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    GL5.iter().map(|&(x, w)| w * f(c + r * x)).sum::<f64>() * r
}

/// Composite Gauss-Legendre rule with `panels` equal panels.
pub fn composite_gauss_legendre<F: FnMut(f64) -> f64>(a: f64, b: f64, panels: usize, mut f: F) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + k as f64 * h;
            gauss_legendre(lo, lo + h, &mut f)
        })
        .sum()
}

/// Root of `f` on `[a, b]` by bisection, assuming a sign change.
pub fn bisect<F: FnMut(f64) -> f64>(mut a: f64, mut b: f64, mut f: F, tol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (b - a) <= tol {
            return m;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Minimizer of a unimodal function on `[a, b]` by golden-section search.
pub fn golden_min<F: FnMut(f64) -> f64>(mut a: f64, mut b: f64, mut f: F, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Pre-factored general tridiagonal matrix (Thomas algorithm without
/// pivoting; intended for diagonally dominant matrices).
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    lower: Vec<f64>,
    c_prime: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl Tridiagonal {
    /// `lower[i]` multiplies `x[i-1]` and `upper[i]` multiplies `x[i+1]` in row `i`.
    pub fn new(lower: &[f64], diag: &[f64], upper: &[f64]) -> Self {
        let n = diag.len();
        assert!(lower.len() == n && upper.len() == n, "tridiagonal bands must have equal length");
        let mut c_prime = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        for i in 0..n {
            let pivot = if i == 0 { diag[0] } else { diag[i] - lower[i] * c_prime[i - 1] };
            inv_pivot[i] = 1.0 / pivot;
            c_prime[i] = upper[i] / pivot;
        }
        Self { lower: lower.to_vec(), c_prime, inv_pivot }
    }

    pub fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        x[0] *= self.inv_pivot[0];
        for i in 1..n {
            x[i] = (x[i] - self.lower[i] * x[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.c_prime[i] * x[i + 1];
        }
    }
}

/// Pre-factored tridiagonal operator `I - r D2` on `n` nodes, where `D2` is
/// the unscaled second difference and the two boundary rows are identity
/// (zero second derivative at the ends).
#[derive(Debug, Clone)]
pub struct ImplicitDiffusion {
    r: f64,
    // modified super-diagonal and inverse pivots of the Thomas elimination
    c_prime: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl ImplicitDiffusion {
    pub fn new(n: usize, r: f64) -> Self {
        let mut c_prime = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        // row 0: [1, 0]
        inv_pivot[0] = 1.0;
        c_prime[0] = 0.0;
        for i in 1..n {
            let (a, b, c) = if i == n - 1 { (0.0, 1.0, 0.0) } else { (-r, 1.0 + 2.0 * r, -r) };
            let pivot = b - a * c_prime[i - 1];
            inv_pivot[i] = 1.0 / pivot;
            c_prime[i] = c / pivot;
        }
        Self { r, c_prime, inv_pivot }
    }

    pub fn len(&self) -> usize {
        self.c_prime.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c_prime.is_empty()
    }

    /// Solve in place for a contiguous line.
    pub fn solve(&self, x: &mut [f64]) {
        let n = x.len();
        debug_assert_eq!(n, self.len());
        let a = -self.r;
        x[0] *= self.inv_pivot[0];
        for i in 1..n {
            let ai = if i == n - 1 { 0.0 } else { a };
            x[i] = (x[i] - ai * x[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.c_prime[i] * x[i + 1];
        }
    }

    /// Solve simultaneously for many interleaved lines: node `i` of line `j`
    /// lives at `data[i * stride + j]` for `j < stride`.
    pub fn solve_interleaved(&self, data: &mut [f64], stride: usize) {
        let n = self.len();
        debug_assert_eq!(data.len(), n * stride);
        let a = -self.r;
        {
            let p = self.inv_pivot[0];
            data[..stride].iter_mut().for_each(|v| *v *= p);
        }
        for i in 1..n {
            let ai = if i == n - 1 { 0.0 } else { a };
            let p = self.inv_pivot[i];
            let (prev, cur) = data[(i - 1) * stride..(i + 1) * stride].split_at_mut(stride);
            for (c, pv) in cur.iter_mut().zip(prev.iter()) {
                *c = (*c - ai * pv) * p;
            }
        }
        for i in (0..n - 1).rev() {
            let cp = self.c_prime[i];
            let (cur, next) = data[i * stride..(i + 2) * stride].split_at_mut(stride);
            for (c, nx) in cur.iter_mut().zip(next.iter()) {
                *c -= cp * nx;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_normal_cdf_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-14);
        assert!(normal_cdf(-40.0) >= 0.0);
    }

    #[test]
    fn test_cdf_integral_derivative() {
        for &z in &[-3.0, -0.5, 0.0, 1.2, 4.0] {
            let e = 1e-5;
            let d = (normal_cdf_integral(z + e) - normal_cdf_integral(z - e)) / (2.0 * e);
            assert!((d - normal_cdf(z)).abs() < 1e-9);
        }
    }

    #[test]
    fn test_gauss_legendre_exact_for_degree_nine() {
        let v = gauss_legendre(0.0, 2.0, |x| x.powi(9));
        assert!((v - 2f64.powi(10) / 10.0).abs() < 1e-10);
    }

    #[test]
    fn test_implicit_diffusion_matches_dense() {
        let n = 7;
        let r = 0.8;
        let op = ImplicitDiffusion::new(n, r);
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 2.0).collect();
        let mut x = rhs.clone();
        op.solve(&mut x);
        // apply the operator and compare
        for i in 0..n {
            let ax = if i == 0 || i == n - 1 { x[i] } else { x[i] - r * (x[i - 1] - 2.0 * x[i] + x[i + 1]) };
            assert!((ax - rhs[i]).abs() < 1e-12);
        }
        let stride = 3;
        let mut inter = vec![0.0; n * stride];
        for i in 0..n {
            for j in 0..stride {
                inter[i * stride + j] = rhs[i] * (j + 1) as f64;
            }
        }
        op.solve_interleaved(&mut inter, stride);
        for i in 0..n {
            for j in 0..stride {
                assert!((inter[i * stride + j] - x[i] * (j + 1) as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn test_golden_and_bisect() {
        let (x, _) = golden_min(-3.0, 5.0, |x| (x - 1.25) * (x - 1.25), 1e-10);
        assert!((x - 1.25).abs() < 1e-8);
        let r = bisect(0.0, 2.0, |x| x * x - 2.0, 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }
}
