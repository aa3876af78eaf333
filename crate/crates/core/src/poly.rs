//! Integer characteristic polynomials and their complex roots.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::transition::TransitionMatrix;

/// Monic integer polynomial, coefficients from the leading term down:
/// `[1, c_1, …, c_n]` is `x^n + c_1 x^{n-1} + … + c_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntPoly(pub Vec<BigInt>);

impl IntPoly {
    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.0
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c.to_f64().unwrap_or(f64::NAN))
    }

    fn derivative_complex(&self, z: Complex64) -> Complex64 {
        let n = self.degree();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, c) in self.0.iter().take(n).enumerate() {
            let power = (n - i) as f64;
            acc = acc * z + c.to_f64().unwrap_or(f64::NAN) * power;
        }
        acc
    }

    /// Divides by `(x - r)`; the caller guarantees `r` is a root.
    pub fn deflate(&self, r: &BigInt) -> IntPoly {
        let mut out = Vec::with_capacity(self.0.len() - 1);
        let mut acc = BigInt::zero();
        for c in &self.0[..self.0.len() - 1] {
            acc = acc * r + c;
            out.push(acc.clone());
        }
        IntPoly(out)
    }

    /// Integer roots, with multiplicity. A monic integer polynomial has only
    /// integer rational roots, and each divides the lowest non-zero coefficient.
    pub fn integer_roots(&self) -> Vec<BigInt> {
        let mut p = self.clone();
        let mut roots = Vec::new();
        while p.degree() > 0 && p.0.last().unwrap().is_zero() {
            roots.push(BigInt::zero());
            p.0.pop();
        }
        while p.degree() > 0 {
            let c = p.0.last().unwrap().magnitude().clone();
            let found = divisors(&c).into_iter().find_map(|d| {
                let d = BigInt::from(d);
                [d.clone(), -d].into_iter().find(|r| p.eval(r).is_zero())
            });
            match found {
                Some(r) => {
                    p = p.deflate(&r);
                    roots.push(r);
                }
                None => break,
            }
        }
        roots
    }

    /// Complex roots via the companion matrix, refined by Newton steps.
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let coeffs: Vec<f64> = self.0.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
        let mut companion = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            companion[(0, j)] = -coeffs[j + 1];
        }
        for i in 1..n {
            companion[(i, i - 1)] = 1.0;
        }
        let mut roots: Vec<Complex64> = companion.complex_eigenvalues().iter().copied().collect();
        for z in roots.iter_mut() {
            for _ in 0..8 {
                let d = self.derivative_complex(*z);
                if d.norm() == 0.0 {
                    break;
                }
                let next = *z - self.eval_complex(*z) / d;
                if !(next.re.is_finite() && next.im.is_finite())
                    || self.eval_complex(next).norm() >= self.eval_complex(*z).norm()
                {
                    break;
                }
                *z = next;
            }
        }
        roots
    }
}

fn divisors(n: &num_bigint::BigUint) -> Vec<u64> {
    // constant terms of shipped matrices are small; larger ones fall back to
    // the complex root finder
    let Some(n) = n.to_u64() else { return Vec::new() };
    if n == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            out.push(d);
            if d != n / d {
                out.push(n / d);
            }
        }
        d += 1;
        if d > 10_000_000 {
            break;
        }
    }
    out.sort_unstable();
    out
}

/// `det(xI − M)` by the Faddeev–LeVerrier recursion in exact integers.
pub fn char_poly(m: &TransitionMatrix) -> IntPoly {
    let n = m.rows();
    assert_eq!(n, m.cols(), "characteristic polynomial needs a square matrix");
    let a: Vec<BigInt> = m.entries().iter().map(|x| BigInt::from(x.clone())).collect();
    let mul = |x: &[BigInt], y: &[BigInt]| -> Vec<BigInt> {
        let mut out = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let xik = &x[i * n + k];
                if xik.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += xik * &y[k * n + j];
                }
            }
        }
        out
    };
    let mut coeffs = vec![BigInt::from(1)];
    let mut mk = vec![BigInt::zero(); n * n];
    let mut c_prev = BigInt::from(1);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I
        let mut next = mul(&a, &mk);
        for i in 0..n {
            next[i * n + i] += &c_prev;
        }
        let am = mul(&a, &next);
        let trace: BigInt = (0..n).map(|i| am[i * n + i].clone()).sum();
        let c = -(trace / BigInt::from(k));
        coeffs.push(c.clone());
        c_prev = c;
        mk = next;
    }
    IntPoly(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[i64]) -> IntPoly {
        IntPoly(c.iter().map(|&x| BigInt::from(x)).collect())
    }

    #[test]
    fn fibonacci_and_abb() {
        let m = TransitionMatrix::from_rows(&[vec![1, 1], vec![1, 0]]);
        assert_eq!(char_poly(&m), poly(&[1, -1, -1]));
        let m = TransitionMatrix::from_rows(&[vec![1, 3], vec![2, 0]]);
        assert_eq!(char_poly(&m), poly(&[1, -1, -6]));
        let mut roots = poly(&[1, -1, -6]).integer_roots();
        roots.sort();
        assert_eq!(roots, vec![BigInt::from(-2), BigInt::from(3)]);
    }

    #[test]
    fn three_by_three_against_cofactor_expansion() {
        let rows = [vec![2u64, 0, 1], vec![1, 3, 0], vec![0, 1, 1]];
        let m = TransitionMatrix::from_rows(&rows);
        // det(xI - A) expanded by hand: x^3 - 6x^2 + 11x - 7
        assert_eq!(char_poly(&m), poly(&[1, -6, 11, -7]));
    }

    #[test]
    fn roots_of_golden_polynomial() {
        let r = poly(&[1, -1, -1]).roots();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let mut re: Vec<f64> = r.iter().map(|z| z.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[1] - phi).abs() < 1e-14);
        assert!((re[0] + 1.0 / phi).abs() < 1e-14);
    }

    #[test]
    fn zero_roots_are_integer_roots() {
        assert_eq!(poly(&[1, -2, 0, 0]).integer_roots().len(), 3);
    }
}
