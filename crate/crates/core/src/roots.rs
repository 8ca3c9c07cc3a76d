//! Scalar root bracketing via Brent's method.
//!
//! Kept in-crate so every solver pins its own stopping rule: iterations run
//! until the bracket collapses to a few ulps, which the transcendental
//! eigenvalue equations need to push residuals below 1e-12.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RootError {
    #[error("no sign change on bracket [{a}, {b}]: f(a) = {fa}, f(b) = {fb}")]
    NoSignChange { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("root iteration produced a non-finite value")]
    NonFinite,
    #[error("root iteration did not converge within {0} iterations")]
    IterationLimit(usize),
}

/// Finds a root of `f` in `[a, b]` given `f(a)` and `f(b)` of opposite sign.
///
/// Converges to machine precision: the bracket is shrunk until its width is
/// below `4 eps |b| + 2^-1022`-scale, then the midpoint is returned. Standard
/// Brent-Dekker: inverse quadratic interpolation with bisection safeguards.
pub fn brent<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    max_iter: usize,
) -> Result<f64, RootError> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(RootError::NonFinite);
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoSignChange { a, b, fa, fb });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.abs() > fc.abs() {
            // Keep b as the best estimate.
            (a, b, c) = (b, c, b);
            (fa, fb, fc) = (fb, fc, fb);
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + f64::MIN_POSITIVE;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() < tol || fa.abs() <= fb.abs() {
            // Bisection.
            d = m;
            e = m;
        } else {
            let s = fb / fa;
            let (mut p, mut q) = if a == c {
                // Secant step.
                (2.0 * m * s, 1.0 - s)
            } else {
                // Inverse quadratic interpolation.
                let q = fa / fc;
                let r = fb / fc;
                (
                    s * (2.0 * m * q * (q - r) - (b - a) * (r - 1.0)),
                    (q - 1.0) * (r - 1.0) * (s - 1.0),
                )
            };
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(RootError::NonFinite);
        }
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    Err(RootError::IterationLimit(max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_simple_roots_to_machine_precision() {
        let r = brent(|x| x * x - 2.0, 0.0, 2.0, 200).unwrap();
        assert!((r - 2.0f64.sqrt()).abs() < 4.0 * f64::EPSILON);
        let r = brent(|x| x.cos() - x, 0.0, 1.0, 200).unwrap();
        assert!((r.cos() - r).abs() < 1e-15);
    }

    #[test]
    fn exact_endpoint_roots_are_returned() {
        assert_eq!(brent(|x| x, 0.0, 1.0, 100).unwrap(), 0.0);
        assert_eq!(brent(|x| x - 1.0, 0.0, 1.0, 100).unwrap(), 1.0);
    }

    #[test]
    fn missing_sign_change_is_an_error() {
        assert!(matches!(
            brent(|x| x * x + 1.0, -1.0, 1.0, 100),
            Err(RootError::NoSignChange { .. })
        ));
    }

    #[test]
    fn steep_roots_converge() {
        // f(y) = y tan(y/2) - 1 style stiffness: exp ramp crossing zero.
        let r = brent(|x| (1e6 * (x - 0.125)).tanh(), 0.0, 1.0, 300).unwrap();
        assert!((r - 0.125).abs() < 1e-12);
    }
}
