//! Rindler ↔ instantaneous-inertial coordinate maps in 1+1 dimensions.
//!
//! Uses `u = g/c²` throughout and evaluates the hyperbolic expressions in a
//! form that stays accurate as `g → 0`.

use num_traits::Float;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartParams<F> {
    pub g: F,
    pub c: F,
    /// Slice time t̄′ at which both charts share T = 0.
    pub t_slice: F,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChartError {
    #[error("point x' = {x} lies beyond the Rindler horizon (1 + g x'/c^2 <= 0)")]
    Wedge { x: f64 },
    #[error("event (T = {t}, X = {x}) is outside the Rindler wedge")]
    OutsideWedge { t: f64, x: f64 },
}

fn f<F: Float>(v: f64) -> F {
    F::from(v).expect("representable constant")
}

fn small<F: Float>() -> F {
    F::epsilon().sqrt().sqrt()
}

/// sinh(a)/a.
pub fn sinhc<F: Float>(a: F) -> F {
    if a.abs() < small() {
        let a2 = a * a;
        F::one() + a2 / f(6.0) + a2 * a2 / f(120.0)
    } else {
        a.sinh() / a
    }
}

/// atanh(z)/z.
pub fn atanhc<F: Float>(z: F) -> F {
    if z.abs() < small() {
        let z2 = z * z;
        F::one() + z2 / f(3.0) + z2 * z2 / f(5.0)
    } else {
        z.atanh() / z
    }
}

impl<F: Float> ChartParams<F> {
    pub fn new(g: F, c: F, t_slice: F) -> Self {
        assert!(c > F::zero(), "c must be positive");
        Self { g, c, t_slice }
    }

    fn u(&self) -> F {
        self.g / (self.c * self.c)
    }
}

/// `(t′, x′) → (T, X)`.
pub fn rindler_to_inertial<F: Float>(t: F, x: F, p: &ChartParams<F>) -> Result<(F, F), ChartError> {
    let u = p.u();
    if F::one() + u * x <= F::zero() {
        return Err(ChartError::Wedge { x: x.to_f64().unwrap_or(f64::NAN) });
    }
    let tau = t - p.t_slice;
    let a = p.g * tau / p.c;
    let half = a / f(2.0);
    let sh = sinhc(half);
    // (cosh a − 1)/u = (g τ²/2)·sinhc²(a/2)
    let big_x = x * a.cosh() + p.g * tau * tau / f(2.0) * sh * sh;
    // cT = x sinh a + c τ sinhc(a)
    let ct = x * a.sinh() + p.c * tau * sinhc(a);
    Ok((ct / p.c, big_x))
}

/// `(T, X) → (t′, x′)`.
pub fn inertial_to_rindler<F: Float>(t: F, x: F, p: &ChartParams<F>) -> Result<(F, F), ChartError> {
    let u = p.u();
    let ct = p.c * t;
    let a = F::one() + u * x;
    let b = u * ct;
    if a <= b.abs() {
        return Err(ChartError::OutsideWedge { t: t.to_f64().unwrap_or(f64::NAN), x: x.to_f64().unwrap_or(f64::NAN) });
    }
    let s = (a * a - b * b).sqrt();
    // (s − 1)/u without cancellation
    let xr = (x * (f::<F>(2.0) + u * x) - u * ct * ct) / (s + F::one());
    let z = b / a;
    let tr = t / a * atanhc(z) + p.t_slice;
    Ok((tr, xr))
}

/// Closed-form Jacobian ∂(T, X)/∂(t′, x′) on the slice t′ = t̄′.
pub fn jacobian_at_slice<F: Float>(x: F, p: &ChartParams<F>) -> Result<[[F; 2]; 2], ChartError> {
    let k = killing_time_component(x, p);
    if k <= F::zero() {
        return Err(ChartError::Wedge { x: x.to_f64().unwrap_or(f64::NAN) });
    }
    Ok([[k, F::zero()], [F::zero(), F::one()]])
}

/// `1 + gX/c²`, the time component of the Rindler Killing vector.
pub fn killing_time_component<F: Float>(x: F, p: &ChartParams<F>) -> F {
    F::one() + p.u() * x
}

/// Central-difference Jacobian of `map` at `(a, b)` with Richardson
/// extrapolation; rows are outputs, columns inputs.
fn fd_jacobian<F: Float>(
    a: F,
    b: F,
    h: F,
    map: impl Fn(F, F) -> Result<(F, F), ChartError>,
) -> Result<[[F; 2]; 2], ChartError> {
    let two = f::<F>(2.0);
    let diff = |da: F, db: F, step: F| -> Result<(F, F), ChartError> {
        let (p0, p1) = map(a + da, b + db)?;
        let (m0, m1) = map(a - da, b - db)?;
        Ok(((p0 - m0) / (two * step), (p1 - m1) / (two * step)))
    };
    let col = |dir: usize| -> Result<(F, F), ChartError> {
        let unit = |s: F| if dir == 0 { (s, F::zero()) } else { (F::zero(), s) };
        let (da, db) = unit(h);
        let d1 = diff(da, db, h)?;
        let (da, db) = unit(h / two);
        let d2 = diff(da, db, h / two)?;
        let r = |x1: F, x2: F| (f::<F>(4.0) * x2 - x1) / f(3.0);
        Ok((r(d1.0, d2.0), r(d1.1, d2.1)))
    };
    let (c0, c1) = (col(0)?, col(1)?);
    Ok([[c0.0, c1.0], [c0.1, c1.1]])
}

/// Finite-difference Jacobian ∂(T, X)/∂(t′, x′) at an arbitrary point.
pub fn jacobian_fd<F: Float>(t: F, x: F, p: &ChartParams<F>, h: F) -> Result<[[F; 2]; 2], ChartError> {
    fd_jacobian(t, x, h, |a, b| rindler_to_inertial(a, b, p))
}

/// Evenly spaced wedge grid, `n × n` points of `(t′, x′)`.
pub fn wedge_grid<F: Float>(t_range: (F, F), x_range: (F, F), n: usize) -> Vec<(F, F)> {
    let step = |r: (F, F), i: usize| {
        if n < 2 {
            r.0
        } else {
            r.0 + (r.1 - r.0) * F::from(i).unwrap() / F::from(n - 1).unwrap()
        }
    };
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push((step(t_range, i), step(x_range, j)));
        }
    }
    out
}

/// Pulls back η = diag(−1, 1) in `(cT, X)` through the chart map using
/// finite-difference Jacobians in `(ct′, x′)` and returns the largest
/// absolute deviation from diag(−(1 + gx′/c²)², 1).
pub fn metric_pullback_check<F: Float>(grid: &[(F, F)], p: &ChartParams<F>) -> Result<F, ChartError> {
    let mut worst = F::zero();
    for &(t, x) in grid {
        let scale = F::one().max(x.abs()).max((p.c * t).abs());
        let h = f::<F>(1e-3) * scale;
        let j = fd_jacobian(p.c * t, x, h, |ctp, xp| {
            rindler_to_inertial(ctp / p.c, xp, p).map(|(tt, xx)| (p.c * tt, xx))
        })?;
        let k = killing_time_component(x, p);
        let m = |a: usize, b: usize| -j[0][a] * j[0][b] + j[1][a] * j[1][b];
        let dev = [(m(0, 0) + k * k).abs(), m(0, 1).abs(), m(1, 0).abs(), (m(1, 1) - F::one()).abs()];
        for d in dev {
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ChartParams<f64> {
        ChartParams::new(1.0, 10.0, 0.0)
    }

    #[test]
    fn slice_identity() {
        let p = ChartParams::new(1.0, 10.0, 3.0);
        assert_eq!(rindler_to_inertial(3.0, 2.5, &p).unwrap(), (0.0, 2.5));
    }

    #[test]
    fn closed_form_examples() {
        let p = params();
        let j = jacobian_at_slice(2.0, &p).unwrap();
        assert!((j[0][0] - 1.02).abs() < 1e-15 && j[1][1] == 1.0);
        assert_eq!(jacobian_at_slice(0.0, &p).unwrap(), [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(killing_time_component(0.0, &p), 1.0);
        assert_eq!(killing_time_component(2.0, &ChartParams::new(0.0, 10.0, 0.0)), 1.0);
        assert!((killing_time_component(2.0, &p) - 1.02).abs() < 1e-15);
    }

    #[test]
    fn matches_textbook_form() {
        let p = params();
        let (t, x) = (0.7, -3.0);
        let (tt, xx) = rindler_to_inertial(t, x, &p).unwrap();
        let r = x + 100.0;
        assert!((10.0 * tt - r * (t / 10.0).sinh()).abs() < 1e-12);
        assert!((xx - (r * (t / 10.0).cosh() - 100.0)).abs() < 1e-12);
    }

    #[test]
    fn flat_limit_and_zero_g() {
        let p = ChartParams::new(1e-9, 10.0, 0.0);
        let (t, x) = rindler_to_inertial(1.0, 2.0, &p).unwrap();
        assert!((x - 2.0).abs() < 1e-8 && (t - 1.0).abs() < 1e-8);
        let z = ChartParams::new(0.0, 10.0, 0.0);
        assert_eq!(rindler_to_inertial(1.0, 2.0, &z).unwrap(), (1.0, 2.0));
        assert_eq!(inertial_to_rindler(1.0, 2.0, &z).unwrap(), (1.0, 2.0));
    }

    #[test]
    fn domain_errors() {
        let p = params();
        assert!(matches!(rindler_to_inertial(0.0, -100.0, &p), Err(ChartError::Wedge { .. })));
        assert!(matches!(inertial_to_rindler(20.0, 0.0, &p), Err(ChartError::OutsideWedge { .. })));
    }

    #[test]
    fn single_precision_round_trip() {
        let p = ChartParams::<f32>::new(1.0, 10.0, 0.0);
        let (t, x) = rindler_to_inertial(0.5f32, 1.5, &p).unwrap();
        let (t2, x2) = inertial_to_rindler(t, x, &p).unwrap();
        assert!((t2 - 0.5).abs() < 1e-5 && (x2 - 1.5).abs() < 1e-5);
    }

    #[test]
    fn pullback_on_the_curve_and_flat() {
        let p = params();
        let r = metric_pullback_check(&[(0.0, 0.0)], &p).unwrap();
        assert!(r < 1e-10);
        let flat = ChartParams::new(0.0, 10.0, 0.0);
        let g = wedge_grid((-1.0, 1.0), (-1.0, 1.0), 5);
        assert!(metric_pullback_check(&g, &flat).unwrap() < 1e-10);
    }

    #[test]
    fn pullback_on_wedge_grid() {
        let p = params();
        let g = wedge_grid((-5.0, 5.0), (-50.0, 50.0), 50);
        let r = metric_pullback_check(&g, &p).unwrap();
        assert!(r <= 1e-8, "{r}");
    }
}
