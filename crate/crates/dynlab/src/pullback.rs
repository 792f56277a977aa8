//! Pull-back components of balls and intervals: exact interval enumeration
//! in the real case, continuity-tracked boundary lifting in the complex
//! case, together with degrees, diameters, the backward-contraction probe
//! and the shrinking-exponent estimator.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::fitting;
use crate::maps::{complex_roots, poly_degree_complex, ComplexPolynomial, MapSpec, Point, RealPolynomial};

#[derive(Debug, Error)]
pub enum PullbackError {
    #[error("anchor does not land in target at the requested depth (dist {dist:.3e})")]
    AnchorMissesTarget { dist: f64 },
    #[error("branch-tracking ambiguity at depth {depth}: lifted path within {dist:.3e} of a critical point")]
    Ambiguity { depth: usize, dist: f64 },
    #[error("root solver failed: {0}")]
    Solver(String),
    #[error("enumeration budget of {budget} nodes exceeded at depth {depth}")]
    BudgetExceeded { budget: usize, depth: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Map(#[from] crate::maps::MapError),
}

/// Target region to pull back: a bounded open interval or a round disk.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum Target {
    Interval(f64, f64),
    Disk { center_re: f64, center_im: f64, radius: f64 },
}

impl Target {
    pub fn ball(center: Point, radius: f64) -> Target {
        match center {
            Point::Real(x) => Target::Interval(x - radius, x + radius),
            Point::Complex(re, im) => Target::Disk {
                center_re: re,
                center_im: im,
                radius,
            },
        }
    }
    pub fn diam(&self) -> f64 {
        match self {
            Target::Interval(a, b) => b - a,
            Target::Disk { radius, .. } => 2.0 * radius,
        }
    }
    /// Membership. Real intervals are relatively open in the domain: an
    /// endpoint lying on the domain boundary is included, so critical balls
    /// of boundary-anchored maps contain their critical point.
    pub fn contains_in(&self, map: &MapSpec, p: Point) -> bool {
        match self {
            Target::Interval(a, b) => {
                let x = p.as_real();
                let (dlo, dhi, tol) = match map {
                    MapSpec::Real(m) => (m.domain.0, m.domain.1, 1e-12 * m.scale()),
                    _ => (f64::NEG_INFINITY, f64::INFINITY, 0.0),
                };
                let lo_ok = if *a <= dlo + tol { x >= *a - tol } else { x > *a };
                let hi_ok = if *b >= dhi - tol { x <= *b + tol } else { x < *b };
                lo_ok && hi_ok
            }
            Target::Disk {
                center_re,
                center_im,
                radius,
            } => (p.as_complex() - Complex64::new(*center_re, *center_im)).norm() < *radius,
        }
    }
}

/// Geometry of a connected pull-back component.
#[derive(Debug, Clone)]
pub enum Region {
    /// Exact interval endpoints.
    Interval(f64, f64),
    /// Sampled boundary loop (closed polyline, possibly several wraps).
    Loop(Vec<Complex64>),
}

impl Region {
    pub fn diam(&self) -> f64 {
        match self {
            Region::Interval(a, b) => b - a,
            Region::Loop(samples) => {
                let mut d = 0.0f64;
                for i in 0..samples.len() {
                    for j in (i + 1)..samples.len() {
                        d = d.max((samples[i] - samples[j]).norm());
                    }
                }
                d
            }
        }
    }

    pub fn contains_point(&self, p: Point) -> bool {
        match self {
            Region::Interval(a, b) => {
                let x = p.as_real();
                x > *a && x < *b
            }
            Region::Loop(samples) => winding_number(samples, p.as_complex()) != 0,
        }
    }

    /// Domain-aware membership: interval ends on the domain boundary are
    /// closed, matching the relative topology of dom(f).
    pub fn contains_point_in(&self, map: &MapSpec, p: Point) -> bool {
        match (self, map) {
            (Region::Interval(a, b), MapSpec::Real(m)) => {
                let x = p.as_real();
                let tol = 1e-12 * m.scale();
                let lo_ok = if *a <= m.domain.0 + tol { x >= *a - tol } else { x > *a };
                let hi_ok = if *b >= m.domain.1 - tol { x <= *b + tol } else { x < *b };
                lo_ok && hi_ok
            }
            _ => self.contains_point(p),
        }
    }

    pub fn dist_to_point(&self, p: Point) -> f64 {
        match self {
            Region::Interval(a, b) => {
                let x = p.as_real();
                if x < *a {
                    a - x
                } else if x > *b {
                    x - b
                } else {
                    0.0
                }
            }
            Region::Loop(samples) => {
                if self.contains_point(p) {
                    0.0
                } else {
                    let z = p.as_complex();
                    samples
                        .iter()
                        .map(|s| (s - z).norm())
                        .fold(f64::INFINITY, f64::min)
                }
            }
        }
    }

    pub fn midpoint(&self) -> Point {
        match self {
            Region::Interval(a, b) => Point::Real(0.5 * (a + b)),
            Region::Loop(samples) => {
                let sum: Complex64 = samples.iter().sum();
                let c = sum / samples.len() as f64;
                Point::Complex(c.re, c.im)
            }
        }
    }
}

/// Winding number of a closed polyline around a point.
pub fn winding_number(samples: &[Complex64], z: Complex64) -> i64 {
    let mut total = 0.0f64;
    let n = samples.len();
    for i in 0..n {
        let a = samples[i] - z;
        let b = samples[(i + 1) % n] - z;
        total += (b * a.conj()).arg();
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

/// A connected component of f^{-m}(target) anchored at a point.
#[derive(Debug, Clone)]
pub struct PullbackComponent {
    pub depth: usize,
    pub anchor: Point,
    pub target: Target,
    pub region: Region,
    /// Number of chain components meeting Crit(f) (the N of the degree law).
    pub critical_hits: usize,
    /// 2^N in the real case; product of chain local degrees in the complex case.
    pub degree: u64,
    /// Whether f^depth maps the component diffeomorphically onto a full target.
    pub diffeomorphic: bool,
    pub diameter: f64,
}

// ---------------------------------------------------------------------------
// real one-step preimages
// ---------------------------------------------------------------------------

/// A one-step preimage component of an open interval, with the critical
/// points it contains.
#[derive(Debug, Clone)]
pub struct RealPreimage {
    pub lo: f64,
    pub hi: f64,
    pub crit_inside: Vec<f64>,
}

/// Exact components of f^{-1}((a, b)) inside the domain, by monotone-piece
/// bisection between consecutive critical points and domain endpoints.
pub fn real_preimage_components(m: &RealPolynomial, a: f64, b: f64) -> Vec<RealPreimage> {
    assert!(a < b);
    let (lo, hi) = m.domain;
    let mut breaks: Vec<f64> = vec![lo, hi];
    for c in &m.critical {
        let x = c.location.as_real();
        if x > lo && x < hi {
            breaks.push(x);
        }
    }
    breaks.sort_by(|p, q| p.partial_cmp(q).unwrap());
    breaks.dedup_by(|p, q| (*p - *q).abs() < 1e-15 * m.scale());

    // per monotone piece, the preimage of (a,b) is a single open interval
    let mut pieces: Vec<(f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        let (p, q) = (w[0], w[1]);
        if let Some(seg) = monotone_piece_preimage(m, p, q, a, b) {
            pieces.push(seg);
        }
    }
    // merge pieces sharing a critical endpoint whose value lies inside the
    // target; endpoints coinciding with the domain boundary count as inside
    // (real targets are relatively open in the domain)
    pieces.sort_by(|u, v| u.0.partial_cmp(&v.0).unwrap());
    let tol = 1e-12 * m.scale();
    let a_closed = a <= m.domain.0 + tol;
    let b_closed = b >= m.domain.1 - tol;
    let value_inside = |v: f64| -> bool {
        (v > a || (a_closed && (v - a).abs() <= tol))
            && (v < b || (b_closed && (v - b).abs() <= tol))
    };
    let mut comps: Vec<RealPreimage> = Vec::new();
    for (plo, phi) in pieces {
        if let Some(last) = comps.last_mut() {
            if plo - last.hi <= tol {
                let c = 0.5 * (last.hi + plo);
                if value_inside(m.eval(c)) {
                    last.hi = phi;
                    if last.crit_inside.iter().all(|&x| (x - c).abs() > tol) {
                        last.crit_inside.push(c);
                    }
                    continue;
                }
            }
        }
        comps.push(RealPreimage {
            lo: plo,
            hi: phi,
            crit_inside: vec![],
        });
    }
    // record interior critical points (degenerate case: piece boundary on domain edge)
    for comp in &mut comps {
        for c in &m.critical {
            let x = c.location.as_real();
            if x > comp.lo + tol && x < comp.hi - tol
                && comp.crit_inside.iter().all(|&y| (y - x).abs() > tol)
            {
                comp.crit_inside.push(x);
            }
        }
        comp.crit_inside.sort_by(|p, q| p.partial_cmp(q).unwrap());
    }
    comps
}

/// Preimage of (a,b) within one monotone piece [p,q], or None when empty.
fn monotone_piece_preimage(
    m: &RealPolynomial,
    p: f64,
    q: f64,
    a: f64,
    b: f64,
) -> Option<(f64, f64)> {
    let fp = m.eval(p);
    let fq = m.eval(q);
    let (vmin, vmax) = if fp <= fq { (fp, fq) } else { (fq, fp) };
    if vmax <= a || vmin >= b {
        return None;
    }
    let increasing = fp <= fq;
    let solve = |val: f64| -> f64 { monotone_solve(m, p, q, val, increasing) };
    let (xlo, xhi) = if increasing {
        (
            if vmin < a { solve(a) } else { p },
            if vmax > b { solve(b) } else { q },
        )
    } else {
        (
            if vmax > b { solve(b) } else { p },
            if vmin < a { solve(a) } else { q },
        )
    };
    if xhi <= xlo {
        return None;
    }
    Some((xlo, xhi))
}

/// Bisection + Newton polish for f(x) = val on a monotone piece.
fn monotone_solve(m: &RealPolynomial, p: f64, q: f64, val: f64, increasing: bool) -> f64 {
    let mut lo = p;
    let mut hi = q;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        let fm = m.eval(mid);
        let below = if increasing { fm < val } else { fm > val };
        if below {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = m.deriv(x);
        if d.abs() > 1e-14 {
            let step = (m.eval(x) - val) / d;
            let nx = x - step;
            if nx >= p && nx <= q {
                x = nx;
            }
        }
    }
    x
}

/// The image interval of [a, b] under f (exact via endpoints and interior
/// critical values).
pub fn real_image_interval(m: &RealPolynomial, a: f64, b: f64) -> (f64, f64) {
    let mut vmin = m.eval(a).min(m.eval(b));
    let mut vmax = m.eval(a).max(m.eval(b));
    for c in &m.critical {
        let x = c.location.as_real();
        if x > a && x < b {
            let v = m.eval(x);
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
    }
    (vmin, vmax)
}

// ---------------------------------------------------------------------------
// component_at
// ---------------------------------------------------------------------------

/// The connected component of f^{-depth}(target) containing `anchor`.
pub fn component_at(
    map: &MapSpec,
    target: Target,
    depth: usize,
    anchor: Point,
) -> Result<PullbackComponent, PullbackError> {
    let orbit = map.orbit(anchor, depth)?;
    if !target.contains_in(map, orbit.points[depth]) {
        let dist = match (&target, orbit.points[depth]) {
            (Target::Interval(a, b), p) => {
                let x = p.as_real();
                (a - x).max(x - b).max(0.0)
            }
            (
                Target::Disk {
                    center_re,
                    center_im,
                    radius,
                },
                p,
            ) => ((p.as_complex() - Complex64::new(*center_re, *center_im)).norm() - radius)
                .max(0.0),
        };
        return Err(PullbackError::AnchorMissesTarget { dist });
    }
    match map {
        MapSpec::Real(m) => real_component_at(m, target, depth, anchor, &orbit.points),
        MapSpec::Complex(m) => complex_component_at(m, target, depth, anchor, &orbit.points, 64),
    }
}

fn real_component_at(
    m: &RealPolynomial,
    target: Target,
    depth: usize,
    anchor: Point,
    orbit: &[Point],
) -> Result<PullbackComponent, PullbackError> {
    let (ta, tb) = match target {
        Target::Interval(a, b) => (a.max(m.domain.0), b.min(m.domain.1)),
        _ => return Err(PullbackError::Precondition("real map needs interval target".into())),
    };
    let mut cur = (ta, tb);
    let mut hits = 0usize;
    for j in (0..depth).rev() {
        let comps = real_preimage_components(m, cur.0, cur.1);
        let xj = orbit[j].as_real();
        let tol = 1e-12 * m.scale();
        let found = comps
            .iter()
            .find(|c| xj >= c.lo - tol && xj <= c.hi + tol)
            .ok_or_else(|| PullbackError::Solver(format!("orbit point {xj} lost at step {j}")))?;
        if !found.crit_inside.is_empty() {
            hits += 1;
        }
        cur = (found.lo, found.hi);
    }
    // onto check: march the image forward
    let mut img = cur;
    for _ in 0..depth {
        img = real_image_interval(m, img.0, img.1);
    }
    let tol = 1e-9 * m.scale();
    let onto = depth == 0 || ((img.0 - ta).abs() <= tol && (img.1 - tb).abs() <= tol);
    Ok(PullbackComponent {
        depth,
        anchor,
        target,
        region: Region::Interval(cur.0, cur.1),
        critical_hits: hits,
        degree: 1u64 << hits,
        diffeomorphic: hits == 0 && onto,
        diameter: cur.1 - cur.0,
    })
}

/// Roots of f(z) = w, reusing the closed form for quadratics.
fn complex_fiber(m: &ComplexPolynomial, w: Complex64) -> Vec<Complex64> {
    let mut coeffs = m.coeffs.clone();
    coeffs[0] -= w;
    complex_roots(&coeffs)
}

/// Continuity-tracked single lift step: the root of f(z) = w nearest to prev.
fn lift_step(
    m: &ComplexPolynomial,
    w: Complex64,
    prev: Complex64,
    depth_for_err: usize,
) -> Result<Complex64, PullbackError> {
    let roots = complex_fiber(m, w);
    if roots.is_empty() {
        return Err(PullbackError::Solver("empty fiber".into()));
    }
    let mut best = roots[0];
    let mut best_d = (roots[0] - prev).norm();
    for r in roots.iter().skip(1) {
        let d = (r - prev).norm();
        if d < best_d {
            best_d = d;
            best = *r;
        }
    }
    for c in &m.critical {
        let d = (best - c.location.as_complex()).norm();
        if d < 1e-9 * m.escape_radius {
            return Err(PullbackError::Ambiguity {
                depth: depth_for_err,
                dist: d,
            });
        }
    }
    Ok(best)
}

fn complex_component_at(
    m: &ComplexPolynomial,
    target: Target,
    depth: usize,
    anchor: Point,
    orbit: &[Point],
    nsamples: usize,
) -> Result<PullbackComponent, PullbackError> {
    let (center, radius) = match target {
        Target::Disk {
            center_re,
            center_im,
            radius,
        } => (Complex64::new(center_re, center_im), radius),
        _ => {
            return Err(PullbackError::Precondition(
                "complex map needs disk target".into(),
            ))
        }
    };
    let mut boundary: Vec<Complex64> = (0..nsamples)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / nsamples as f64;
            center + Complex64::from_polar(radius, ang)
        })
        .collect();
    let mut hits = 0usize;
    let mut degree: u64 = 1;
    if depth == 0 {
        let diam = 2.0 * radius;
        return Ok(PullbackComponent {
            depth,
            anchor,
            target,
            region: Region::Loop(boundary),
            critical_hits: 0,
            degree: 1,
            diffeomorphic: true,
            diameter: diam,
        });
    }
    for j in (0..depth).rev() {
        let zj = orbit[j].as_complex();
        let fz = orbit[j + 1].as_complex();
        // radial lift from f(z_j) out to the first boundary sample
        let steps = 16usize;
        let mut z = zj;
        for s in 1..=steps {
            let t = s as f64 / steps as f64;
            let w = fz + (boundary[0] - fz) * t;
            z = lift_step(m, w, z, j)?;
        }
        // traverse the loop, wrapping until the lift closes; closure is
        // decided against the separation of the fiber over boundary[0]
        let start = z;
        let fiber0 = complex_fiber(m, boundary[0]);
        let separation = fiber0
            .iter()
            .map(|r| (r - start).norm())
            .filter(|d| *d > 1e-9 * m.escape_radius)
            .fold(f64::INFINITY, f64::min);
        let close_tol = if separation.is_finite() {
            0.25 * separation
        } else {
            1e-6 * m.escape_radius
        };
        let n = boundary.len();
        let mut lifted: Vec<Complex64> = Vec::with_capacity(n);
        let max_wraps = poly_degree_complex(&m.coeffs).max(2);
        let mut wraps = 0usize;
        loop {
            wraps += 1;
            if wraps > max_wraps {
                return Err(PullbackError::Solver(format!(
                    "boundary lift failed to close at depth {j}"
                )));
            }
            for k in 0..n {
                lifted.push(z);
                z = lift_step(m, boundary[(k + 1) % n], z, j)?;
            }
            // z is the lift over boundary[0] after a full circuit
            if (z - start).norm() <= close_tol {
                break;
            }
        }
        if wraps > 1 {
            hits += 1;
        }
        degree *= wraps as u64;
        boundary = lifted;
    }
    let region = Region::Loop(boundary);
    let diameter = region.diam();
    Ok(PullbackComponent {
        depth,
        anchor,
        target,
        region,
        critical_hits: hits,
        degree,
        diffeomorphic: degree == 1,
        diameter,
    })
}

/// Pull back the eps-shrunk target along the same anchor (Koebe subcomponent).
pub fn shrink_component(
    map: &MapSpec,
    comp: &PullbackComponent,
    eps: f64,
) -> Result<PullbackComponent, PullbackError> {
    let target = match comp.target {
        Target::Interval(a, b) => {
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a) * eps;
            Target::Interval(mid - half, mid + half)
        }
        Target::Disk {
            center_re,
            center_im,
            radius,
        } => Target::Disk {
            center_re,
            center_im,
            radius: radius * eps,
        },
    };
    component_at(map, target, comp.depth, comp.anchor)
}

/// Sample points of a component for distortion measurements.
pub fn sample_component_points(comp: &PullbackComponent, n: usize) -> Vec<Point> {
    match &comp.region {
        Region::Interval(a, b) => (0..n)
            .map(|k| {
                let t = (k as f64 + 0.5) / n as f64;
                Point::Real(a + t * (b - a))
            })
            .collect(),
        Region::Loop(samples) => {
            let stride = (samples.len() / n).max(1);
            samples
                .iter()
                .step_by(stride)
                .map(|z| Point::Complex(z.re, z.im))
                .chain(std::iter::once(comp.anchor))
                .collect()
        }
    }
}

// ---------------------------------------------------------------------------
// preimages and full enumeration
// ---------------------------------------------------------------------------

/// All solutions of f(x) = w with multiplicity.
pub fn preimages(map: &MapSpec, w: Point) -> Result<Vec<(Point, u32)>, PullbackError> {
    match map {
        MapSpec::Real(m) => {
            let wv = w.as_real();
            if !m.contains(wv) {
                return Err(PullbackError::Precondition(format!(
                    "point {wv} outside domain"
                )));
            }
            let mut coeffs = m.coeffs.clone();
            coeffs[0] -= wv;
            let roots = crate::maps::real_roots_in(&coeffs, m.domain.0, m.domain.1);
            let scale = m.scale();
            Ok(roots
                .into_iter()
                .map(|r| {
                    let mult = m
                        .critical
                        .iter()
                        .find(|c| (c.location.as_real() - r).abs() < 1e-9 * scale)
                        .map(|c| c.order)
                        .unwrap_or(1);
                    (Point::Real(r), mult)
                })
                .collect())
        }
        MapSpec::Complex(m) => {
            let roots = complex_fiber(m, w.as_complex());
            let scale = m.escape_radius;
            for r in &roots {
                let res = (m.eval(*r) - w.as_complex()).norm();
                if res > 1e-10 * scale {
                    return Err(PullbackError::Solver(format!(
                        "fiber residual {res:.3e} too large"
                    )));
                }
            }
            // cluster multiple roots
            let mut out: Vec<(Point, u32)> = Vec::new();
            for r in roots {
                if let Some(entry) = out.iter_mut().find(|(p, _)| p.dist(&Point::Complex(r.re, r.im)) < 1e-8 * scale)
                {
                    entry.1 += 1;
                } else {
                    out.push((Point::Complex(r.re, r.im), 1));
                }
            }
            Ok(out)
        }
    }
}

/// Explicit accounting for capped enumerations.
#[derive(Debug, Clone, Default, Serialize)]
pub struct TruncationReport {
    pub budget: usize,
    pub nodes_visited: usize,
    pub truncated: bool,
    pub unexplored: usize,
}

/// All components of f^{-depth}(target), with truncation accounting.
pub fn all_components(
    map: &MapSpec,
    target: Target,
    depth: usize,
    budget: usize,
) -> Result<(Vec<PullbackComponent>, TruncationReport), PullbackError> {
    match map {
        MapSpec::Real(m) => real_all_components(m, map, target, depth, budget),
        MapSpec::Complex(m) => complex_all_components(m, map, target, depth, budget),
    }
}

fn real_all_components(
    m: &RealPolynomial,
    map: &MapSpec,
    target: Target,
    depth: usize,
    budget: usize,
) -> Result<(Vec<PullbackComponent>, TruncationReport), PullbackError> {
    let (ta, tb) = match target {
        Target::Interval(a, b) => (a.max(m.domain.0), b.min(m.domain.1)),
        _ => return Err(PullbackError::Precondition("interval target required".into())),
    };
    let mut level: Vec<((f64, f64), usize)> = vec![((ta, tb), 0)]; // (interval, hits)
    let mut trunc = TruncationReport {
        budget,
        ..Default::default()
    };
    for d in 0..depth {
        let mut next = Vec::new();
        for (iv, hits) in &level {
            trunc.nodes_visited += 1;
            if trunc.nodes_visited > budget {
                return Err(PullbackError::BudgetExceeded { budget, depth: d });
            }
            for pre in real_preimage_components(m, iv.0, iv.1) {
                let h = hits + usize::from(!pre.crit_inside.is_empty());
                next.push(((pre.lo, pre.hi), h));
            }
        }
        level = next;
    }
    let mut out = Vec::with_capacity(level.len());
    for (iv, hits) in level {
        let anchor = Point::Real(0.5 * (iv.0 + iv.1));
        // recompute onto via forward image
        let mut img = iv;
        for _ in 0..depth {
            img = real_image_interval(m, img.0, img.1);
        }
        let tol = 1e-9 * m.scale();
        let onto = depth == 0 || ((img.0 - ta).abs() <= tol && (img.1 - tb).abs() <= tol);
        let _ = map;
        out.push(PullbackComponent {
            depth,
            anchor,
            target,
            region: Region::Interval(iv.0, iv.1),
            critical_hits: hits,
            degree: 1u64 << hits,
            diffeomorphic: hits == 0 && onto,
            diameter: iv.1 - iv.0,
        });
    }
    Ok((out, trunc))
}

fn complex_all_components(
    m: &ComplexPolynomial,
    map: &MapSpec,
    target: Target,
    depth: usize,
    budget: usize,
) -> Result<(Vec<PullbackComponent>, TruncationReport), PullbackError> {
    let center = match target {
        Target::Disk {
            center_re,
            center_im,
            ..
        } => Complex64::new(center_re, center_im),
        _ => return Err(PullbackError::Precondition("disk target required".into())),
    };
    // preimage tree of the center
    let mut anchors = vec![center];
    let mut trunc = TruncationReport {
        budget,
        ..Default::default()
    };
    for d in 0..depth {
        let mut next = Vec::new();
        for a in &anchors {
            trunc.nodes_visited += 1;
            if trunc.nodes_visited > budget {
                return Err(PullbackError::BudgetExceeded { budget, depth: d });
            }
            for r in complex_fiber(m, *a) {
                next.push(r);
            }
        }
        // keep distinct points only; multiplicity is recovered by the degree law
        let scale = m.escape_radius;
        next.sort_by(|p, q| (p.re, p.im).partial_cmp(&(q.re, q.im)).unwrap());
        next.dedup_by(|p, q| (*p - *q).norm() < 1e-10 * scale);
        anchors = next;
    }
    let mut comps: Vec<PullbackComponent> = Vec::new();
    for a in anchors {
        let p = Point::Complex(a.re, a.im);
        if comps.iter().any(|c| c.region.contains_point(p)) {
            continue;
        }
        comps.push(component_at(map, target, depth, p)?);
    }
    Ok((comps, trunc))
}

// ---------------------------------------------------------------------------
// backward-contraction probe and shrinking exponent
// ---------------------------------------------------------------------------

/// The critical ball tB(c, delta): component of f^{-1}(B(f(c), delta))
/// containing c.
pub fn critical_ball(map: &MapSpec, c: Point, delta: f64) -> Result<PullbackComponent, PullbackError> {
    let v = map.evaluate(c)?;
    component_at(map, Target::ball(v, delta), 1, c)
}

#[derive(Debug, Clone, Serialize)]
pub struct BackwardContractionRow {
    pub delta: f64,
    pub critical_point: Point,
    pub components_checked: usize,
    pub worst_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BackwardContractionReport {
    pub r: f64,
    pub rows: Vec<BackwardContractionRow>,
    pub vacuous: bool,
    pub passes: bool,
    pub truncation: TruncationReport,
}

/// For each delta and each critical point in the Julia set, enumerates the
/// pull-backs of tB(c, r delta) near the critical values and reports the
/// worst diam(W)/delta. In the complex case the critical ball is replaced
/// by its circumscribed disk, which only enlarges components (the probe
/// stays conservative).
pub fn backward_contraction_probe(
    map: &MapSpec,
    r: f64,
    delta_grid: &[f64],
    depth: usize,
    budget: usize,
) -> Result<BackwardContractionReport, PullbackError> {
    if r <= 1.0 {
        return Err(PullbackError::Precondition("need r > 1".into()));
    }
    let crit = map.crit_in_julia();
    let crit_values: Vec<Point> = map
        .critical_points()
        .iter()
        .map(|c| map.evaluate(c.location))
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    let mut total_trunc = TruncationReport {
        budget,
        ..Default::default()
    };
    for &delta in delta_grid {
        for c in &crit {
            let tball = critical_ball(map, c.location, r * delta)?;
            let target = match &tball.region {
                Region::Interval(a, b) => Target::Interval(*a, *b),
                Region::Loop(samples) => {
                    let mid = tball.region.midpoint().as_complex();
                    let rad = samples
                        .iter()
                        .map(|z| (z - mid).norm())
                        .fold(0.0, f64::max);
                    Target::Disk {
                        center_re: mid.re,
                        center_im: mid.im,
                        radius: rad,
                    }
                }
            };
            let mut worst = 0.0f64;
            let mut checked = 0usize;
            for m_depth in 0..=depth {
                let (comps, tr) = all_components(map, target, m_depth, budget)?;
                total_trunc.nodes_visited += tr.nodes_visited;
                total_trunc.truncated |= tr.truncated;
                for w in comps {
                    let near = crit_values
                        .iter()
                        .any(|v| w.region.dist_to_point(*v) <= delta);
                    if near {
                        checked += 1;
                        worst = worst.max(w.diameter / delta);
                    }
                }
            }
            rows.push(BackwardContractionRow {
                delta,
                critical_point: c.location,
                components_checked: checked,
                worst_ratio: worst,
            });
        }
    }
    let vacuous = crit.is_empty() || rows.iter().all(|r| r.components_checked == 0);
    let passes = vacuous || rows.iter().all(|r| r.worst_ratio < 1.0);
    Ok(BackwardContractionReport {
        r,
        rows,
        vacuous,
        passes,
        truncation: total_trunc,
    })
}

/// Worst pull-back diameters theta_m over a base-point sample, and the
/// fitted polynomial shrinking exponent.
#[derive(Debug, Clone, Serialize)]
pub struct ShrinkingReport {
    pub rho: f64,
    pub depths: Vec<usize>,
    pub theta: Vec<f64>,
    pub fitted_beta: f64,
    pub fit_residual: f64,
    pub base_points: usize,
    pub excluded_ambiguities: usize,
}

pub fn shrinking_exponent(
    map: &MapSpec,
    rho: f64,
    depths: &[usize],
    base_points: &[Point],
) -> Result<ShrinkingReport, PullbackError> {
    let mut theta = Vec::with_capacity(depths.len());
    let mut excluded = 0usize;
    for &mdepth in depths {
        let mut worst: f64 = 0.0;
        for &x in base_points {
            let orbit = match map.orbit(x, mdepth) {
                Ok(o) => o,
                Err(_) => {
                    excluded += 1;
                    continue;
                }
            };
            let target = Target::ball(orbit.points[mdepth], rho);
            match component_at(map, target, mdepth, x) {
                Ok(comp) => worst = worst.max(comp.diameter),
                Err(PullbackError::Ambiguity { .. }) => excluded += 1,
                Err(e) => return Err(e),
            }
        }
        theta.push(worst);
    }
    let pts: Vec<(f64, f64)> = depths
        .iter()
        .zip(&theta)
        .map(|(&m, &t)| (m as f64, t))
        .collect();
    let (beta, resid) = fitting::log_log_decay_exponent(&pts)
        .ok_or_else(|| PullbackError::Solver("no positive theta values to fit".into()))?;
    Ok(ShrinkingReport {
        rho,
        depths: depths.to_vec(),
        theta,
        fitted_beta: beta,
        fit_residual: resid,
        base_points: base_points.len(),
        excluded_ambiguities: excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::library;

    #[test]
    fn preimages_examples() {
        let sq = library::squaring();
        let pre = preimages(&sq, Point::Real(1.0)).unwrap();
        assert_eq!(pre.len(), 2);

        let log = library::logistic4();
        let pre = preimages(&log, Point::Real(1.0)).unwrap();
        assert_eq!(pre.len(), 1);
        assert!((pre[0].0.as_real() - 0.5).abs() < 1e-10);
        assert_eq!(pre[0].1, 2, "critical value has a double preimage");

        let pre = preimages(&log, Point::Real(0.75)).unwrap();
        let mut xs: Vec<f64> = pre.iter().map(|p| p.0.as_real()).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((xs[0] - 0.25).abs() < 1e-10);
        assert!((xs[1] - 0.75).abs() < 1e-10);
    }

    #[test]
    fn depth_zero_component_is_target() {
        let log = library::logistic4();
        let comp = component_at(&log, Target::Interval(0.4, 0.6), 0, Point::Real(0.5)).unwrap();
        assert_eq!(comp.degree, 1);
        assert!(comp.diffeomorphic);
        assert!((comp.diameter - 0.2).abs() < 1e-12);
    }

    #[test]
    fn real_depth_one_linearization() {
        // f = 4x(1-x), |Df(0.75)| = 2; component of f^{-1}((0.75-e,0.75+e)) at 0.75
        let log = library::logistic4();
        let eps = 1e-3;
        let comp = component_at(
            &log,
            Target::Interval(0.75 - eps, 0.75 + eps),
            1,
            Point::Real(0.75),
        )
        .unwrap();
        assert!((comp.diameter - eps).abs() < 1e-5);
        assert!(comp.diffeomorphic);
    }

    #[test]
    fn complex_depth_one_linearization() {
        let sq = library::squaring();
        let comp = component_at(
            &sq,
            Target::Disk {
                center_re: 1.0,
                center_im: 0.0,
                radius: 0.1,
            },
            1,
            Point::Complex(1.0, 0.0),
        )
        .unwrap();
        // |Df(1)| = 2: component is close to B(1, 0.05)
        assert!((comp.diameter - 0.1).abs() < 5e-3);
        assert!(comp.diffeomorphic);
        assert_eq!(comp.degree, 1);
    }

    #[test]
    fn squaring_depth_two_components() {
        let sq = library::squaring();
        let (comps, _) = all_components(
            &sq,
            Target::Disk {
                center_re: 1.0,
                center_im: 0.0,
                radius: 0.1,
            },
            2,
            1_000_000,
        )
        .unwrap();
        assert_eq!(comps.len(), 4, "four components near the 4th roots of unity");
        let total: u64 = comps.iter().map(|c| c.degree).sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn logistic_critical_component() {
        // f^{-1}((0.9, 1.0)) has a single component containing 1/2 with degree 2
        let log = library::logistic4();
        let (comps, _) = all_components(&log, Target::Interval(0.9, 1.0), 1, 1000).unwrap();
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].degree, 2);
        assert_eq!(comps[0].critical_hits, 1);
        assert!(comps[0].region.contains_point(Point::Real(0.5)));
    }

    #[test]
    fn nesting_and_degree_law_real() {
        // every depth-(m+1) component maps into exactly one depth-m component
        let log = library::logistic4();
        let target = Target::Interval(0.9, 1.0);
        for depth in 1..5usize {
            let (deep, _) = all_components(&log, target, depth, 100_000).unwrap();
            let (shallow, _) = all_components(&log, target, depth - 1, 100_000).unwrap();
            for d in &deep {
                let mid = d.region.midpoint();
                let img = log.evaluate(mid).unwrap();
                let n = shallow
                    .iter()
                    .filter(|s| s.region.contains_point_in(&log, img))
                    .count();
                assert_eq!(n, 1);
            }
        }
    }

    #[test]
    fn complex_monodromy_closes_on_critical_component() {
        // pull back a disk around the critical value of z^2: degree 2 component
        let sq = library::squaring();
        let comp = component_at(
            &sq,
            Target::Disk {
                center_re: 0.0,
                center_im: 0.0,
                radius: 0.1,
            },
            1,
            Point::Complex(0.0, 0.0),
        )
        .unwrap();
        assert_eq!(comp.degree, 2);
        assert!(!comp.diffeomorphic);
    }

    #[test]
    fn bc_probe_misiurewicz_passes() {
        let cheb = library::chebyshev2();
        let rep = backward_contraction_probe(&cheb, 4.0, &[0.01], 10, 2_000_000).unwrap();
        assert!(!rep.vacuous);
        assert!(rep.passes, "x^2-2 is backward contracting: {rep:?}");
    }

    #[test]
    fn bc_probe_vacuous_for_squaring() {
        let sq = library::squaring();
        let rep = backward_contraction_probe(&sq, 2.0, &[0.01], 5, 100_000).unwrap();
        assert!(rep.vacuous);
        assert!(rep.passes);
    }

    #[test]
    fn shrinking_chebyshev_geometric() {
        let cheb = library::chebyshev2();
        // spread base points over the Julia set [-2, 2]
        let base: Vec<Point> = (0..64)
            .map(|k| Point::Real(-1.9 + 3.8 * (k as f64 + 0.5) / 64.0))
            .collect();
        let depths: Vec<usize> = (1..=12).collect();
        let rep = shrinking_exponent(&cheb, 0.1, &depths, &base).unwrap();
        for w in rep.theta.windows(2) {
            assert!(w[1] < w[0] * 0.9, "theta not decaying: {:?}", rep.theta);
        }
        assert!(rep.fitted_beta >= 3.0, "beta = {}", rep.fitted_beta);
    }
}
