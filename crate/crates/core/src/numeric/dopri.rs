//! Dormand–Prince 5(4) step for autonomous planar systems.

use crate::model::Point;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// b - b*
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Step {
    pub y: Point,
    pub err: Point,
    /// Field at the new point (first stage of the next step).
    pub dy: Point,
}

#[inline]
fn axpy(y: Point, terms: &[(f64, Point)], h: f64) -> Point {
    let mut out = y;
    for &(c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// One step of size `h` from `y`, given `k1 = f(y)`.
pub(crate) fn step<F: FnMut(Point) -> Point>(f: &mut F, y: Point, k1: Point, h: f64) -> Step {
    let k2 = f(axpy(y, &[(A21, k1)], h));
    let k3 = f(axpy(y, &[(A31, k1), (A32, k2)], h));
    let k4 = f(axpy(y, &[(A41, k1), (A42, k2), (A43, k3)], h));
    let k5 = f(axpy(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], h));
    let k6 = f(axpy(y, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)], h));
    let y_new = axpy(y, &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)], h);
    let k7 = f(y_new);
    let err = axpy(
        [0.0, 0.0],
        &[(E1, k1), (E3, k3), (E4, k4), (E5, k5), (E6, k6), (E7, k7)],
        h,
    );
    Step { y: y_new, err, dy: k7 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fifth_order_convergence_on_rotation() {
        // x' = -y, y' = x from (1, 0); exact (cos t, sin t)
        let mut f = |p: Point| [-p[1], p[0]];
        let err_at = |h: f64, f: &mut dyn FnMut(Point) -> Point| {
            let mut y = [1.0, 0.0];
            let n = (1.0 / h).round() as usize;
            for _ in 0..n {
                let k1 = f(y);
                y = step(&mut |p| f(p), y, k1, h).y;
            }
            ((y[0] - 1f64.cos()).powi(2) + (y[1] - 1f64.sin()).powi(2)).sqrt()
        };
        let e1 = err_at(0.1, &mut f);
        let e2 = err_at(0.05, &mut f);
        let order = (e1 / e2).log2();
        assert!(order > 4.7 && order < 5.5, "observed order {order}");
    }
}
