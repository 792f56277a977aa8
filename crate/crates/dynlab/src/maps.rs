//! Map families: real polynomials on an invariant interval and complex
//! polynomials on the plane, with exact derivatives, critical data and
//! orbit utilities.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative tolerance used for "exact to scale" comparisons throughout.
pub const EPS_SCALE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MapError {
    #[error("point {point} outside domain [{lo}, {hi}]")]
    DomainViolation { point: f64, lo: f64, hi: f64 },
    #[error("orbit escaped after {steps} steps (|z| = {modulus:.3e} > {radius:.3e})")]
    Escape {
        steps: usize,
        modulus: f64,
        radius: f64,
    },
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("invalid map: {0}")]
    InvalidMap(String),
}

/// A point of the phase space: real interval or complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Real(f64),
    Complex(f64, f64),
}

impl Point {
    pub fn as_real(&self) -> f64 {
        match self {
            Point::Real(x) => *x,
            Point::Complex(re, _) => *re,
        }
    }
    pub fn as_complex(&self) -> Complex64 {
        match self {
            Point::Real(x) => Complex64::new(*x, 0.0),
            Point::Complex(re, im) => Complex64::new(*re, *im),
        }
    }
    pub fn dist(&self, other: &Point) -> f64 {
        (self.as_complex() - other.as_complex()).norm()
    }
}

/// A critical point with its local order and Julia-set membership flag.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub location: Point,
    /// Local degree of the map at the critical point (>= 2 for polynomials).
    pub order: u32,
    /// Whether the point belongs to the Julia set (member of Crit'(f)).
    pub in_julia: bool,
}

/// Real polynomial restricted to a forward-invariant compact interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RealPolynomial {
    /// Coefficients in ascending powers: c0 + c1 x + c2 x^2 + ...
    pub coeffs: Vec<f64>,
    pub domain: (f64, f64),
    pub critical: Vec<CriticalPoint>,
}

/// Complex polynomial on the plane with an escape radius.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexPolynomial {
    pub coeffs: Vec<Complex64>,
    pub escape_radius: f64,
    pub critical: Vec<CriticalPoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum MapSpec {
    Real(RealPolynomial),
    Complex(ComplexPolynomial),
}

fn horner_real(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

fn horner_complex(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
}

fn derivative_real(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect()
}

fn derivative_complex(coeffs: &[Complex64]) -> Vec<Complex64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * i as f64)
        .collect()
}

/// All roots of a real polynomial inside [lo, hi], found by the derivative
/// cascade: monotone pieces are delimited by roots of the derivative, and
/// each sign change is bisected. Tangential (even-order) roots at derivative
/// zeros are detected by value.
pub fn real_roots_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let deg = poly_degree_real(coeffs);
    let scale = coeffs.iter().map(|c| c.abs()).fold(1.0, f64::max);
    if deg == 0 {
        return vec![];
    }
    if deg == 1 {
        let r = -coeffs[0] / coeffs[1];
        if r >= lo - 1e-14 && r <= hi + 1e-14 {
            return vec![r.clamp(lo, hi)];
        }
        return vec![];
    }
    let dcoef = derivative_real(coeffs);
    let mut breaks = real_roots_in(&dcoef, lo, hi);
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-13 * scale.max(1.0));
    let mut roots = Vec::new();
    let f = |x: f64| horner_real(coeffs, x);
    let tol = 1e-14 * scale.max(1.0);
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (f(a), f(b));
        if fa.abs() <= tol {
            push_root(&mut roots, a, scale);
        }
        if fa * fb < 0.0 {
            let mut x0 = a;
            let mut x1 = b;
            let mut f0 = fa;
            for _ in 0..200 {
                let mid = 0.5 * (x0 + x1);
                let fm = f(mid);
                if fm == 0.0 || (x1 - x0) < 1e-16 * (1.0 + mid.abs()) {
                    x0 = mid;
                    x1 = mid;
                    break;
                }
                if f0 * fm < 0.0 {
                    x1 = mid;
                } else {
                    x0 = mid;
                    f0 = fm;
                }
            }
            push_root(&mut roots, 0.5 * (x0 + x1), scale);
        }
    }
    let fb = f(hi);
    if fb.abs() <= tol {
        push_root(&mut roots, hi, scale);
    }
    roots
}

fn push_root(roots: &mut Vec<f64>, r: f64, scale: f64) {
    if roots
        .iter()
        .all(|&q| (q - r).abs() > 1e-12 * scale.max(1.0))
    {
        roots.push(r);
    }
}

pub fn poly_degree_real(coeffs: &[f64]) -> usize {
    coeffs
        .iter()
        .rposition(|c| c.abs() > 0.0)
        .unwrap_or(0)
}

pub fn poly_degree_complex(coeffs: &[Complex64]) -> usize {
    coeffs
        .iter()
        .rposition(|c| c.norm() > 0.0)
        .unwrap_or(0)
}

/// All complex roots of a polynomial, with multiplicity, by the
/// Durand-Kerner simultaneous iteration.
pub fn complex_roots(coeffs: &[Complex64]) -> Vec<Complex64> {
    let deg = poly_degree_complex(coeffs);
    if deg == 0 {
        return vec![];
    }
    if deg == 1 {
        return vec![-coeffs[0] / coeffs[1]];
    }
    if deg == 2 {
        // closed form, stable for the quadratic families used everywhere
        let (a, b, c) = (coeffs[2], coeffs[1], coeffs[0]);
        let disc = (b * b - 4.0 * a * c).sqrt();
        let q = if (b + disc).norm() > (b - disc).norm() {
            -(b + disc) * 0.5
        } else {
            -(b - disc) * 0.5
        };
        if q.norm() == 0.0 {
            return vec![Complex64::new(0.0, 0.0), -b / a];
        }
        return vec![q / a, c / q];
    }
    let lead = coeffs[deg];
    let monic: Vec<Complex64> = coeffs[..=deg].iter().map(|c| c / lead).collect();
    let radius = 1.0
        + monic[..deg]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
    let mut zs: Vec<Complex64> = (0..deg)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.4;
            Complex64::from_polar(radius * 0.7, ang)
        })
        .collect();
    for _ in 0..300 {
        let mut delta = 0.0f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    denom *= zs[i] - zs[j];
                }
            }
            if denom.norm() == 0.0 {
                continue;
            }
            let step = horner_complex(&monic, zs[i]) / denom;
            zs[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-14 * radius.max(1.0) {
            break;
        }
    }
    zs
}

impl RealPolynomial {
    pub fn eval(&self, x: f64) -> f64 {
        horner_real(&self.coeffs, x)
    }
    pub fn deriv(&self, x: f64) -> f64 {
        horner_real(&derivative_real(&self.coeffs), x)
    }
    pub fn scale(&self) -> f64 {
        (self.domain.1 - self.domain.0).abs().max(1.0)
    }
    pub fn contains(&self, x: f64) -> bool {
        let slack = EPS_SCALE * self.scale();
        x >= self.domain.0 - slack && x <= self.domain.1 + slack
    }
}

impl ComplexPolynomial {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        horner_complex(&self.coeffs, z)
    }
    pub fn deriv(&self, z: Complex64) -> Complex64 {
        horner_complex(&derivative_complex(&self.coeffs), z)
    }
    pub fn degree(&self) -> usize {
        poly_degree_complex(&self.coeffs)
    }
}

impl MapSpec {
    /// Builds a real polynomial map; critical points and their Julia-set
    /// membership are derived from the coefficients.
    pub fn real(coeffs: Vec<f64>, domain: (f64, f64)) -> Result<MapSpec, MapError> {
        if domain.1 <= domain.0 {
            return Err(MapError::InvalidMap("empty domain".into()));
        }
        let scale = (domain.1 - domain.0).max(1.0);
        let f = |x: f64| horner_real(&coeffs, x);
        for &e in &[domain.0, domain.1] {
            let fe = f(e);
            let on_boundary = (fe - domain.0).abs() <= 1e-9 * scale
                || (fe - domain.1).abs() <= 1e-9 * scale;
            if !on_boundary {
                return Err(MapError::InvalidMap(format!(
                    "map is not boundary-anchored: f({e}) = {fe}"
                )));
            }
            let d = horner_real(&derivative_real(&coeffs), e);
            if d.abs() <= 1e-9 {
                return Err(MapError::InvalidMap(format!(
                    "vanishing derivative at domain boundary {e}"
                )));
            }
        }
        let dcoef = derivative_real(&coeffs);
        let crit_locs = real_roots_in(&dcoef, domain.0, domain.1);
        let mut critical = Vec::new();
        for c in crit_locs {
            let order = local_order_real(&coeffs, c);
            let in_julia = real_crit_in_julia(&coeffs, domain, c);
            critical.push(CriticalPoint {
                location: Point::Real(c),
                order,
                in_julia,
            });
        }
        Ok(MapSpec::Real(RealPolynomial {
            coeffs,
            domain,
            critical,
        }))
    }

    /// Builds a complex polynomial map of degree >= 2. The escape radius is
    /// the standard sufficient bound 2 max(1, sum |coeffs|).
    pub fn complex(coeffs: Vec<Complex64>) -> Result<MapSpec, MapError> {
        let deg = poly_degree_complex(&coeffs);
        if deg < 2 {
            return Err(MapError::InvalidMap(format!(
                "complex degree must be >= 2, got {deg}"
            )));
        }
        let escape_radius = 2.0 * coeffs.iter().map(|c| c.norm()).sum::<f64>().max(1.0);
        let dcoef = derivative_complex(&coeffs);
        let crit_locs = complex_roots(&dcoef);
        let mut clustered: Vec<(Complex64, u32)> = Vec::new();
        for z in crit_locs {
            if let Some(entry) = clustered
                .iter_mut()
                .find(|(w, _)| (*w - z).norm() < 1e-8 * escape_radius)
            {
                entry.1 += 1;
            } else {
                clustered.push((z, 1));
            }
        }
        let mut critical = Vec::new();
        for (z, mult) in clustered {
            let in_julia = complex_crit_in_julia(&coeffs, escape_radius, z);
            critical.push(CriticalPoint {
                location: Point::Complex(z.re, z.im),
                order: mult + 1,
                in_julia,
            });
        }
        Ok(MapSpec::Complex(ComplexPolynomial {
            coeffs,
            escape_radius,
            critical,
        }))
    }

    pub fn is_real(&self) -> bool {
        matches!(self, MapSpec::Real(_))
    }

    pub fn critical_points(&self) -> &[CriticalPoint] {
        match self {
            MapSpec::Real(m) => &m.critical,
            MapSpec::Complex(m) => &m.critical,
        }
    }

    /// Critical points in the Julia set (the set Crit'(f)).
    pub fn crit_in_julia(&self) -> Vec<CriticalPoint> {
        self.critical_points()
            .iter()
            .copied()
            .filter(|c| c.in_julia)
            .collect()
    }

    /// Maximal order over Crit'(f); returns None when Crit'(f) is empty.
    pub fn ell_max(&self) -> Option<u32> {
        self.crit_in_julia().iter().map(|c| c.order).max()
    }

    pub fn scale(&self) -> f64 {
        match self {
            MapSpec::Real(m) => m.scale(),
            MapSpec::Complex(m) => m.escape_radius,
        }
    }

    pub fn evaluate(&self, p: Point) -> Result<Point, MapError> {
        match self {
            MapSpec::Real(m) => {
                let x = p.as_real();
                if !m.contains(x) {
                    return Err(MapError::DomainViolation {
                        point: x,
                        lo: m.domain.0,
                        hi: m.domain.1,
                    });
                }
                Ok(Point::Real(m.eval(x)))
            }
            MapSpec::Complex(m) => {
                let z = m.eval(p.as_complex());
                Ok(Point::Complex(z.re, z.im))
            }
        }
    }

    pub fn differentiate(&self, p: Point) -> f64 {
        match self {
            MapSpec::Real(m) => m.deriv(p.as_real()).abs(),
            MapSpec::Complex(m) => m.deriv(p.as_complex()).norm(),
        }
    }

    /// Forward orbit of length `n` together with |Df^k| at the start point
    /// for k = 1..n (chain rule products).
    pub fn orbit(&self, start: Point, n: usize) -> Result<OrbitSegment, MapError> {
        let mut points = Vec::with_capacity(n + 1);
        let mut derivs = Vec::with_capacity(n);
        let mut x = start;
        let mut acc = 1.0f64;
        points.push(x);
        for step in 0..n {
            acc *= self.differentiate(x);
            x = self.evaluate(x)?;
            if let MapSpec::Complex(m) = self {
                let r = x.as_complex().norm();
                if r > m.escape_radius {
                    return Err(MapError::Escape {
                        steps: step + 1,
                        modulus: r,
                        radius: m.escape_radius,
                    });
                }
            }
            points.push(x);
            derivs.push(acc);
        }
        Ok(OrbitSegment {
            start,
            points,
            derivative_magnitudes: derivs,
        })
    }
}

/// A forward orbit with accumulated derivative magnitudes |Df^k(start)|.
#[derive(Debug, Clone)]
pub struct OrbitSegment {
    pub start: Point,
    pub points: Vec<Point>,
    pub derivative_magnitudes: Vec<f64>,
}

fn local_order_real(coeffs: &[f64], c: f64) -> u32 {
    // order = 1 + multiplicity of c as root of Df
    let mut order = 1u32;
    let mut d = derivative_real(coeffs);
    let scale = coeffs.iter().map(|x| x.abs()).fold(1.0, f64::max);
    while poly_degree_real(&d) > 0 && horner_real(&d, c).abs() < 1e-9 * scale {
        order += 1;
        d = derivative_real(&d);
    }
    order
}

/// Forward-orbit heuristic for Crit'(f) membership: the orbit is followed
/// until it settles on a cycle; the cycle multiplier decides Fatou vs Julia.
fn real_crit_in_julia(coeffs: &[f64], domain: (f64, f64), c: f64) -> bool {
    let df = derivative_real(coeffs);
    let scale = (domain.1 - domain.0).max(1.0);
    let mut orbit = vec![c];
    let mut x = c;
    for _ in 0..2000 {
        x = horner_real(coeffs, x);
        orbit.push(x);
    }
    cycle_is_repelling(&orbit, |a, b| (a - b).abs(), |x| {
        horner_real(&df, *x).abs()
    }, 1e-9 * scale)
}

fn complex_crit_in_julia(coeffs: &[Complex64], radius: f64, c: Complex64) -> bool {
    let dcoef = derivative_complex(coeffs);
    let mut orbit = vec![c];
    let mut z = c;
    for _ in 0..2000 {
        z = horner_complex(coeffs, z);
        if z.norm() > radius {
            return false; // escapes: attracted to infinity
        }
        orbit.push(z);
    }
    cycle_is_repelling(&orbit, |a, b| (a - b).norm(), |z| {
        horner_complex(&dcoef, *z).norm()
    }, 1e-9 * radius)
}

fn cycle_is_repelling<T: Copy>(
    orbit: &[T],
    dist: impl Fn(&T, &T) -> f64,
    deriv_mag: impl Fn(&T) -> f64,
    tol: f64,
) -> bool {
    let tail = &orbit[orbit.len().saturating_sub(64)..];
    for period in 1..=16usize {
        if tail.len() <= period {
            break;
        }
        let a = &tail[tail.len() - 1];
        let b = &tail[tail.len() - 1 - period];
        if dist(a, b) < tol {
            let start = tail.len() - 1 - period;
            let mult: f64 = tail[start..tail.len() - 1].iter().map(&deriv_mag).product();
            return mult >= 1.0 - 1e-9;
        }
    }
    // no cycle detected within the horizon: bounded and non-converging
    true
}

/// Per-critical-value derivative growth along the forward orbit, the
/// Large Derivatives diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct LargeDerivativesReport {
    pub per_value: Vec<CriticalValueGrowth>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalValueGrowth {
    pub critical_point: Point,
    pub critical_value: Point,
    pub derivatives: Vec<f64>,
    pub divergence_evidence: bool,
}

pub fn large_derivatives_report(
    map: &MapSpec,
    horizon: usize,
) -> Result<LargeDerivativesReport, MapError> {
    assert!(horizon >= 1, "horizon must be >= 1");
    let mut per_value = Vec::new();
    for c in map.crit_in_julia() {
        let v = map.evaluate(c.location)?;
        let orbit = map.orbit(v, horizon)?;
        let derivs = orbit.derivative_magnitudes;
        let evidence = derivs
            .last()
            .map(|&last| last > derivs[0] && last > 1.0)
            .unwrap_or(false);
        per_value.push(CriticalValueGrowth {
            critical_point: c.location,
            critical_value: v,
            derivatives: derivs,
            divergence_evidence: evidence,
        });
    }
    Ok(LargeDerivativesReport { per_value })
}

/// Newton refinement of a periodic point of the given period from a seed.
pub fn find_periodic_point(
    map: &MapSpec,
    period: usize,
    seed: Point,
) -> Result<(Point, f64), MapError> {
    assert!(period >= 1);
    let scale = map.scale();
    match map {
        MapSpec::Real(m) => {
            let mut x = seed.as_real();
            for _ in 0..200 {
                let (mut fx, mut dfx) = (x, 1.0);
                for _ in 0..period {
                    dfx *= m.deriv(fx);
                    fx = m.eval(fx);
                }
                let g = fx - x;
                let dg = dfx - 1.0;
                if g.abs() <= EPS_SCALE * scale {
                    let mut mult = 1.0;
                    let mut p = x;
                    for _ in 0..period {
                        mult *= m.deriv(p);
                        p = m.eval(p);
                    }
                    return Ok((Point::Real(x), mult));
                }
                if dg.abs() < 1e-300 {
                    break;
                }
                x -= g / dg;
            }
            Err(MapError::NoConvergence {
                iterations: 200,
                residual: {
                    let mut fx = x;
                    for _ in 0..period {
                        fx = m.eval(fx);
                    }
                    (fx - x).abs()
                },
            })
        }
        MapSpec::Complex(m) => {
            let mut z = seed.as_complex();
            for _ in 0..200 {
                let (mut fz, mut dfz) = (z, Complex64::new(1.0, 0.0));
                for _ in 0..period {
                    dfz *= m.deriv(fz);
                    fz = m.eval(fz);
                }
                let g = fz - z;
                let dg = dfz - 1.0;
                if g.norm() <= EPS_SCALE * scale {
                    let mut mult = Complex64::new(1.0, 0.0);
                    let mut p = z;
                    for _ in 0..period {
                        mult *= m.deriv(p);
                        p = m.eval(p);
                    }
                    return Ok((Point::Complex(z.re, z.im), mult.norm()));
                }
                if dg.norm() < 1e-300 {
                    break;
                }
                z -= g / dg;
            }
            Err(MapError::NoConvergence {
                iterations: 200,
                residual: {
                    let mut fz = z;
                    for _ in 0..period {
                        fz = m.eval(fz);
                    }
                    (fz - z).norm()
                },
            })
        }
    }
}

/// Convenience constructors for the maps used across the test corpus.
pub mod library {
    use super::*;

    /// Chebyshev-type logistic map f(x) = 4x(1-x) on [0, 1].
    pub fn logistic4() -> MapSpec {
        MapSpec::real(vec![0.0, 4.0, -4.0], (0.0, 1.0)).unwrap()
    }

    /// f(x) = x^2 - 2 on [-2, 2] (conjugate to the Chebyshev polynomial).
    pub fn chebyshev2() -> MapSpec {
        MapSpec::real(vec![-2.0, 0.0, 1.0], (-2.0, 2.0)).unwrap()
    }

    /// f(z) = z^2.
    pub fn squaring() -> MapSpec {
        MapSpec::complex(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
        ])
        .unwrap()
    }

    /// f(z) = z^2 + c.
    pub fn quadratic(c: Complex64) -> MapSpec {
        MapSpec::complex(vec![c, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap()
    }

    /// f(z) = z^2 - 1 (basilica).
    pub fn basilica() -> MapSpec {
        quadratic(Complex64::new(-1.0, 0.0))
    }

    /// f(z) = z^2 - 2 as a complex map.
    pub fn chebyshev2_complex() -> MapSpec {
        quadratic(Complex64::new(-2.0, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn evaluate_examples() {
        let log = library::logistic4();
        assert!((log.evaluate(Point::Real(0.5)).unwrap().as_real() - 1.0).abs() < 1e-15);
        let sq = library::squaring();
        let img = sq.evaluate(Point::Complex(0.0, 1.0)).unwrap().as_complex();
        assert!((img - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let cheb = library::chebyshev2();
        assert!((cheb.evaluate(Point::Real(-2.0)).unwrap().as_real() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn domain_violation_reported() {
        let log = library::logistic4();
        assert!(matches!(
            log.evaluate(Point::Real(1.5)),
            Err(MapError::DomainViolation { .. })
        ));
    }

    #[test]
    fn critical_points_detected_with_julia_flags() {
        let cheb = library::chebyshev2();
        let crit = cheb.critical_points();
        assert_eq!(crit.len(), 1);
        assert!((crit[0].location.as_real()).abs() < 1e-12);
        assert_eq!(crit[0].order, 2);
        assert!(crit[0].in_julia, "0 lands on the repelling fixed point 2");

        let sq = library::squaring();
        let crit = sq.critical_points();
        assert_eq!(crit.len(), 1);
        assert!(!crit[0].in_julia, "0 is superattracting for z^2");

        let bas = library::basilica();
        assert!(!bas.critical_points()[0].in_julia);

        let log = library::logistic4();
        assert!(log.critical_points()[0].in_julia);
        assert_eq!(log.ell_max(), Some(2));
    }

    #[test]
    fn large_derivatives_chebyshev() {
        // v = -2, orbit -2 -> 2 -> 2 -> ..., Df(x) = 2x
        let cheb = library::chebyshev2();
        let rep = large_derivatives_report(&cheb, 5).unwrap();
        assert_eq!(rep.per_value.len(), 1);
        let d = &rep.per_value[0].derivatives;
        let expect = [4.0, 16.0, 64.0, 256.0, 1024.0];
        for (a, b) in d.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
        assert!(rep.per_value[0].divergence_evidence);
    }

    #[test]
    fn large_derivatives_logistic() {
        // v = 1, orbit 1 -> 0 -> 0, |Df(0)| = 4, |Df(1)| = 4
        let log = library::logistic4();
        let rep = large_derivatives_report(&log, 3).unwrap();
        let d = &rep.per_value[0].derivatives;
        let expect = [4.0, 16.0, 64.0];
        for (a, b) in d.iter().zip(expect.iter()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn superattracting_no_divergence() {
        let sq = library::squaring();
        let rep = large_derivatives_report(&sq, 5).unwrap();
        // Crit'(f) empty: nothing to report, vacuously no divergence claims
        assert!(rep.per_value.is_empty());
    }

    #[test]
    fn periodic_points() {
        let log = library::logistic4();
        let (p, m) = find_periodic_point(&log, 1, Point::Real(0.7)).unwrap();
        assert!((p.as_real() - 0.75).abs() < 1e-10);
        assert!((m - (-2.0)).abs() < 1e-9);

        let sq = library::squaring();
        let (p, m) = find_periodic_point(&sq, 1, Point::Complex(0.9, 0.0)).unwrap();
        assert!((p.as_complex() - Complex64::new(1.0, 0.0)).norm() < 1e-10);
        assert!((m - 2.0).abs() < 1e-9);

        let cheb = library::chebyshev2();
        let (p, m) = find_periodic_point(&cheb, 1, Point::Real(1.9)).unwrap();
        assert!((p.as_real() - 2.0).abs() < 1e-10);
        assert!((m - 4.0).abs() < 1e-9);
    }

    #[test]
    fn chain_rule_identity_randomized() {
        let maps = [library::logistic4(), library::chebyshev2()];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let map = &maps[rng.gen_range(0..maps.len())];
            let (lo, hi) = match map {
                MapSpec::Real(m) => m.domain,
                _ => unreachable!(),
            };
            let x = rng.gen_range(lo..hi);
            let m = rng.gen_range(1..6usize);
            let n = rng.gen_range(1..6usize);
            let o = map.orbit(Point::Real(x), m + n).unwrap();
            let lhs = o.derivative_magnitudes[m + n - 1];
            let d_m = o.derivative_magnitudes[m - 1];
            let o2 = map.orbit(o.points[m], n).unwrap();
            let rhs = o2.derivative_magnitudes[n - 1] * d_m;
            let denom = lhs.abs().max(rhs.abs()).max(1e-300);
            assert!(
                (lhs - rhs).abs() / denom <= 1e-10,
                "chain rule violated: {lhs} vs {rhs}"
            );
        }
    }

    #[test]
    fn listed_critical_points_are_roots_of_df() {
        for map in [library::logistic4(), library::chebyshev2()] {
            for c in map.critical_points() {
                assert!(map.differentiate(c.location) < 1e-9);
            }
        }
        // complex: count with multiplicity equals degree - 1
        let sq = library::squaring();
        let total: u32 = sq.critical_points().iter().map(|c| c.order - 1).sum();
        assert_eq!(total as usize, 2 - 1);
    }

    #[test]
    fn escape_error_reports_time() {
        let sq = library::squaring();
        let err = sq.orbit(Point::Complex(3.0, 0.0), 10).unwrap_err();
        match err {
            MapError::Escape { steps, .. } => assert_eq!(steps, 1),
            other => panic!("expected escape, got {other:?}"),
        }
    }
}
