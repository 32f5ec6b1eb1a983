//! Bracketed scalar root finding (Brent–Dekker) over fallible functions.

#[derive(Debug, Clone, Copy)]
pub struct BrentOptions {
    pub xtol_abs: f64,
    pub xtol_rel: f64,
    /// Stop as soon as |f| <= ftol.
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for BrentOptions {
    fn default() -> Self {
        Self {
            xtol_abs: 0.0,
            xtol_rel: 4.0 * f64::EPSILON,
            ftol: 0.0,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BrentFailure<E> {
    NoBracket { fa: f64, fb: f64 },
    MaxIter { x: f64, fx: f64 },
    Eval(E),
}

impl<E> From<E> for BrentFailure<E> {
    fn from(e: E) -> Self {
        BrentFailure::Eval(e)
    }
}

pub fn brent<E, F>(f: F, a: f64, b: f64, opts: BrentOptions) -> Result<Root, BrentFailure<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut f = f;
    let fa = f(a)?;
    let fb = f(b)?;
    brent_with_values(f, (a, fa), (b, fb), opts)
}

/// Same as [`brent`] with the endpoint values already known.
pub fn brent_with_values<E, F>(
    mut f: F,
    (mut a, mut fa): (f64, f64),
    (mut b, mut fb): (f64, f64),
    opts: BrentOptions,
) -> Result<Root, BrentFailure<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    if fa == 0.0 {
        return Ok(Root { x: a, fx: fa, evaluations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: fb, evaluations: 0 });
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(BrentFailure::NoBracket { fa, fb });
    }

    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for evaluations in 0..opts.max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }

        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * (opts.xtol_abs + opts.xtol_rel * b.abs());
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 || fb.abs() <= opts.ftol {
            return Ok(Root { x: b, fx: fb, evaluations });
        }

        if e.abs() < tol || fa.abs() <= fb.abs() {
            d = m;
            e = m;
        } else {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
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
        fb = f(b)?;
    }
    Err(BrentFailure::MaxIter { x: b, fx: fb })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(x: f64) -> Result<f64, ()> {
        Ok(x * x * x - 2.0 * x - 5.0)
    }

    #[test]
    fn classic_cubic() {
        let r = brent(ok, 2.0, 3.0, BrentOptions::default()).unwrap();
        assert!((r.x - 2.094_551_481_542_326_5).abs() < 1e-14);
        assert!(r.evaluations < 15);
    }

    #[test]
    fn reports_missing_bracket() {
        let r = brent(|x: f64| Ok::<_, ()>(x * x + 1.0), -1.0, 1.0, BrentOptions::default());
        assert!(matches!(r, Err(BrentFailure::NoBracket { .. })));
    }

    #[test]
    fn propagates_evaluation_errors() {
        let r = brent(
            |x: f64| if x > 2.5 { Err("boom") } else { Ok(x - 2.7) },
            2.0,
            2.4,
            BrentOptions::default(),
        );
        assert!(matches!(r, Err(BrentFailure::NoBracket { .. })));
        let r = brent(
            |x: f64| if x > 2.5 && x < 3.0 { Err("boom") } else { Ok(x - 2.7) },
            2.0,
            3.0,
            BrentOptions::default(),
        );
        assert_eq!(r, Err(BrentFailure::Eval("boom")));
    }

    #[test]
    fn ftol_stops_early() {
        let opts = BrentOptions {
            ftol: 1e-3,
            ..Default::default()
        };
        let r = brent(|x: f64| Ok::<_, ()>(x - 0.3), 0.0, 1.0, opts).unwrap();
        assert!(r.fx.abs() <= 1e-3);
    }
}
