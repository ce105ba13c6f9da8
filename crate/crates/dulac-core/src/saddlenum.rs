//! Double-precision path lifting for prepared saddles
//! `x dy + λ y (1 + xⁿ y K(x,y)) dx`, in the log chart `x = e^{-z}`, `y = e^{-w}`.
//!
//! Along a path `z = γ(t)` the quasi-first integral `φ = w + λz` obeys
//! `dφ/dz = -λ e^{-((n-λ)z + φ)} K`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64 as C64;

use crate::diffeo::DiffeoGerm;
use crate::error::{Error, Result};

const I: C64 = C64::new(0.0, 1.0);

fn two_pi_i() -> C64 {
    C64::new(0.0, 2.0 * PI)
}

/// `Σ c_ij x^i y^j`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BiPoly {
    pub terms: Vec<(u32, u32, C64)>,
}

impl BiPoly {
    pub fn new(terms: Vec<(u32, u32, C64)>) -> BiPoly {
        BiPoly { terms }
    }

    pub fn zero() -> BiPoly {
        BiPoly::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.2 == C64::new(0.0, 0.0))
    }

    pub fn eval(&self, x: C64, y: C64) -> C64 {
        self.terms.iter().fold(C64::new(0.0, 0.0), |acc, &(i, j, c)| acc + c * x.powu(i) * y.powu(j))
    }

    /// `Σ |c_ij| B^j`, an upper bound for `|K|` on `|x| ≤ 1, |y| ≤ B`.
    pub fn crude_bound(&self, b: f64) -> f64 {
        self.terms.iter().map(|&(_, j, c)| c.norm() * libm::pow(b, j as f64)).sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreparedSaddle {
    lambda: f64,
    n: u32,
    k: BiPoly,
    eps: f64,
    a: f64,
    b: f64,
    sigma: C64,
}

impl PreparedSaddle {
    /// Validates `λ > 0`, `n ≥ ⌊λ⌋`, `εB < 1`, and `|K| ≤ ε` on a sample grid of `U_{A,B}`.
    pub fn new(lambda: f64, n: u32, k: BiPoly, eps: f64, a: f64, b: f64) -> Result<PreparedSaddle> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::BadParameters("lambda must be a positive real"));
        }
        if n < 1 || (n as f64) < libm::floor(lambda) {
            return Err(Error::BadParameters("n must be a positive integer with n >= floor(lambda)"));
        }
        if !(a > 0.0) || !(b > 0.0) || !(eps >= 0.0) {
            return Err(Error::BadParameters("A, B must be positive and eps nonnegative"));
        }
        if eps * b >= 1.0 {
            return Err(Error::BadParameters("eps * B must be below 1"));
        }
        let s = PreparedSaddle { lambda, n, k, eps, a, b, sigma: C64::new(1.0, 0.0) };
        if s.sampled_sup() > eps * (1.0 + 1e-9) + 1e-300 {
            return Err(Error::BadParameters("|K| exceeds eps on the sample grid"));
        }
        Ok(s)
    }

    /// `K = 0`, `A = B = 2`.
    pub fn linear(lambda: f64) -> Result<PreparedSaddle> {
        let n = (libm::ceil(lambda) as u32).max(1);
        PreparedSaddle::new(lambda, n, BiPoly::zero(), 0.0, 2.0, 2.0)
    }

    /// Moves the floating transversal `Σ = {y = σ}`.
    pub fn with_sigma(mut self, sigma: C64) -> PreparedSaddle {
        self.sigma = sigma;
        self
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn k(&self) -> &BiPoly {
        &self.k
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn sigma(&self) -> C64 {
        self.sigma
    }

    fn sampled_sup(&self) -> f64 {
        if self.k.is_zero() {
            return 0.0;
        }
        let mut sup: f64 = 0.0;
        for ix in 0..=8 {
            let rx = ix as f64 / 8.0;
            for iy in 0..=8 {
                let ry = self.b * iy as f64 / 8.0;
                if ry * libm::pow(rx, self.lambda) > self.a {
                    continue;
                }
                for ax in 0..12 {
                    for ay in 0..12 {
                        let x = C64::from_polar(rx, 2.0 * PI * ax as f64 / 12.0);
                        let y = C64::from_polar(ry, 2.0 * PI * ay as f64 / 12.0);
                        sup = sup.max(self.k.eval(x, y).norm());
                    }
                }
            }
        }
        sup
    }

    /// Largest `|σ|` for which every exponential path lifts through `Σ`.
    pub fn sigma_bound(&self) -> f64 {
        let m = (1.0 / (self.a * (1.0 + PI))).max(1.0 / self.b);
        1.0 / (m + 2.0 * self.eps)
    }

    /// `dφ/dz` at `(z, φ)`.
    pub fn rhs(&self, z: C64, phi: C64) -> C64 {
        if self.k.is_zero() {
            return C64::new(0.0, 0.0);
        }
        let w = phi - z * self.lambda;
        let kk = self.k.eval((-z).exp(), (-w).exp());
        -(-(z * (self.n as f64 - self.lambda) + phi)).exp() * kk * self.lambda
    }

    /// `dψ/dw` for `ψ = z + w/λ` when lifting along `y`.
    fn rhs_vertical(&self, w: C64, psi: C64) -> C64 {
        if self.k.is_zero() {
            return C64::new(0.0, 0.0);
        }
        let z = psi - w / self.lambda;
        let (x, y) = ((-z).exp(), (-w).exp());
        let u = x.powu(self.n) * y * self.k.eval(x, y);
        u / ((C64::new(1.0, 0.0) + u) * self.lambda)
    }

    /// Which inequality of `U_{A,B}` fails at `(z, w)`, with the safety band.
    fn outside(&self, z: C64, w: C64, safety: f64) -> Option<ExitClause> {
        if z.re < -1e-12 {
            return Some(ExitClause::LeftHalfPlane);
        }
        let ry = libm::exp(-w.re);
        if ry > self.b / safety {
            return Some(ExitClause::Vertical);
        }
        if ry * libm::exp(-self.lambda * z.re) > self.a / safety {
            return Some(ExitClause::QuasiIntegral);
        }
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitClause {
    /// `Re z < 0`, i.e. `|x| > 1`.
    LeftHalfPlane,
    /// `|y| |x|^λ > A`.
    QuasiIntegral,
    /// `|y| > B`.
    Vertical,
    /// The length-based lower bound no longer guarantees the domain.
    Predicted,
}

impl ExitClause {
    pub fn name(self) -> &'static str {
        match self {
            ExitClause::LeftHalfPlane => "Re z >= 0",
            ExitClause::QuasiIntegral => "|y||x|^lambda <= A",
            ExitClause::Vertical => "|y| <= B",
            ExitClause::Predicted => "length bound",
        }
    }
}

impl fmt::Display for ExitClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Paths in the `z` chart.
#[derive(Clone, Debug, PartialEq)]
pub enum PathSpec {
    /// `z0 + t`, `t ∈ [0, T]`.
    Radial { z0: C64, t: f64 },
    /// `z0 + i t`, `t` from 0 to `T` (either sign).
    Circular { z0: C64, t: f64 },
    /// `ξ(t) = t + iC(e^{αt} - 1)` on `[0, T]`, optionally run from `ξ(T)` back to `0`.
    Exponential { alpha: f64, c: i8, t: f64, backward: bool },
    Polyline(Vec<C64>),
}

#[derive(Clone, Copy, Debug)]
enum Seg {
    Line { a: C64, b: C64 },
    Expo { alpha: f64, c: f64, t: f64, backward: bool },
}

impl Seg {
    fn span(&self) -> f64 {
        match *self {
            Seg::Line { .. } => 1.0,
            Seg::Expo { t, .. } => t,
        }
    }

    /// Point and velocity at parameter `s`.
    fn at(&self, s: f64) -> (C64, C64) {
        match *self {
            Seg::Line { a, b } => (a + (b - a) * s, b - a),
            Seg::Expo { alpha, c, t, backward } => {
                let u = if backward { t - s } else { s };
                let e = libm::exp(alpha * u);
                let p = C64::new(u, c * (e - 1.0));
                let v = C64::new(1.0, c * alpha * e);
                (p, if backward { -v } else { v })
            }
        }
    }
}

impl PathSpec {
    fn segments(&self, lambda: f64) -> Result<Vec<Seg>> {
        Ok(match self {
            PathSpec::Radial { z0, t } => alloc::vec![Seg::Line { a: *z0, b: *z0 + *t }],
            PathSpec::Circular { z0, t } => alloc::vec![Seg::Line { a: *z0, b: *z0 + I * *t }],
            PathSpec::Exponential { alpha, c, t, backward } => {
                if *c != 1 && *c != -1 {
                    return Err(Error::BadParameters("exponential path needs C = +1 or -1"));
                }
                if !(*alpha >= 0.0 && *alpha < lambda) {
                    return Err(Error::BadParameters("exponential path needs 0 <= alpha < lambda"));
                }
                if !(*t >= 0.0) {
                    return Err(Error::BadParameters("exponential path needs T >= 0"));
                }
                alloc::vec![Seg::Expo { alpha: *alpha, c: *c as f64, t: *t, backward: *backward }]
            }
            PathSpec::Polyline(pts) => {
                if pts.len() < 2 {
                    return Err(Error::BadParameters("polyline needs two points"));
                }
                pts.windows(2).map(|w| Seg::Line { a: w[0], b: w[1] }).collect()
            }
        })
    }

    pub fn start(&self) -> C64 {
        match self {
            PathSpec::Radial { z0, .. } | PathSpec::Circular { z0, .. } => *z0,
            PathSpec::Exponential { alpha, c, t, backward } => {
                if *backward {
                    C64::new(*t, *c as f64 * (libm::exp(alpha * t) - 1.0))
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            PathSpec::Polyline(p) => p.first().copied().unwrap_or_default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Step sizes below this raise `StepUnderflow`.
    pub h_min: f64,
    /// Band on the domain inequalities; exit is declared beyond `bound / safety`.
    pub safety: f64,
    /// Stop at the first failure of the length-based bound as well.
    pub predictive: bool,
    pub max_steps: usize,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions { rtol: 1e-10, atol: 1e-14, h_min: 1e-14, safety: 0.99, predictive: true, max_steps: 1_000_000 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub z: C64,
    pub phi: C64,
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExitInfo {
    pub clause: ExitClause,
    pub t: f64,
    pub z: C64,
}

/// Two-sided length estimate on `e^{Re φ}`, checked at every accepted step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateReport {
    /// The estimate is only claimed when `n ≥ λ`.
    pub applicable: bool,
    pub max_violation: f64,
    pub holds: bool,
    pub checked: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiftResult {
    pub samples: Vec<Sample>,
    pub length: f64,
    /// The exit that stopped the lift (reactive or predicted).
    pub exit: Option<ExitInfo>,
    /// First point where a domain inequality actually failed.
    pub reactive_exit: Option<ExitInfo>,
    /// First point where the length-based bound failed.
    pub predicted_exit: Option<ExitInfo>,
    /// Exactly one of the two exit tests fired.
    pub disagreement: bool,
    pub estimate: EstimateReport,
    pub rejected_steps: usize,
}

impl LiftResult {
    pub fn exited(&self) -> bool {
        self.exit.is_some()
    }

    pub fn end(&self) -> Sample {
        *self.samples.last().expect("lift has at least one sample")
    }

    /// Largest relative drift of `|y x^λ| = e^{-Re φ}` from its initial value.
    pub fn quasi_integral_drift(&self) -> f64 {
        let f0 = self.samples[0].phi.re;
        self.samples.iter().map(|s| libm::fabs(libm::expm1(f0 - s.phi.re))).fold(0.0, f64::max)
    }
}

pub(crate) type State = [C64; 2];

const DP_C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive Dormand–Prince 5(4) from `0` to `span`; `on_step` returns `false` to stop.
pub(crate) fn dopri<G, E>(g: G, span: f64, y0: State, opts: &LiftOptions, mut on_step: E) -> Result<(State, f64, usize)>
where
    G: Fn(f64, &State) -> State,
    E: FnMut(f64, &State) -> bool,
{
    let mut t = 0.0;
    let mut y = y0;
    let mut h = (span / 64.0).min(0.25);
    let mut rejected = 0;
    let mut k = [[C64::new(0.0, 0.0); 2]; 7];
    k[0] = g(t, &y);
    let mut steps = 0;
    while t < span {
        if steps >= opts.max_steps {
            return Err(Error::StepUnderflow { t, h });
        }
        steps += 1;
        h = h.min(span - t);
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                let a = DP_A[s][j];
                if a != 0.0 {
                    ys[0] += kj[0] * (h * a);
                    ys[1] += kj[1] * (h * a);
                }
            }
            k[s] = g(t + DP_C[s] * h, &ys);
        }
        let mut yn = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            let a = DP_A[6][j];
            yn[0] += kj[0] * (h * a);
            yn[1] += kj[1] * (h * a);
        }
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let mut e = C64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                e += kj[i] * (h * DP_E[j]);
            }
            let sc = opts.atol + opts.rtol * y[i].norm().max(yn[i].norm());
            err = err.max(e.norm() / sc);
        }
        if err <= 1.0 {
            t += h;
            y = yn;
            k[0] = k[6];
            if !on_step(t, &y) {
                return Ok((y, t, rejected));
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            rejected += 1;
            h *= (0.9 * libm::pow(err, -0.2)).clamp(0.1, 1.0);
            if h < opts.h_min {
                return Err(Error::StepUnderflow { t, h });
            }
        }
    }
    Ok((y, t, rejected))
}

/// Lifts `path` through `(γ(0), w0)` by integrating the quasi-first integral.
pub fn lift_path(s: &PreparedSaddle, path: &PathSpec, w0: C64, opts: &LiftOptions) -> Result<LiftResult> {
    let segs = path.segments(s.lambda)?;
    let z0 = path.start();
    let phi0 = w0 + z0 * s.lambda;
    let lam = s.lambda;
    if s.outside(z0, w0, 1.0).is_some() {
        return Err(Error::PreconditionFailed("initial point outside U_{A,B}"));
    }
    let e0 = libm::exp(phi0.re);
    let applicable = s.n as f64 >= lam;
    let mut est = EstimateReport { applicable, max_violation: 0.0, holds: true, checked: 0 };
    let mut samples = alloc::vec![Sample { t: 0.0, z: z0, phi: phi0, length: 0.0 }];
    let (mut reactive, mut predicted): (Option<ExitInfo>, Option<ExitInfo>) = (None, None);
    let mut stop_at: Option<usize> = None;
    let mut rejected = 0;
    let mut t_base = 0.0;
    let mut state: State = [phi0, C64::new(0.0, 0.0)];
    for seg in &segs {
        let g = |t: f64, y: &State| {
            let (z, v) = seg.at(t);
            [s.rhs(z, y[0]) * v, C64::new(v.norm(), 0.0)]
        };
        let on = |t: f64, y: &State| {
            let (z, _) = seg.at(t);
            let (phi, len) = (y[0], y[1].re);
            let w = phi - z * lam;
            let tt = t_base + t;
            samples.push(Sample { t: tt, z, phi, length: len });
            // two-sided length estimate
            let val = libm::exp(phi.re);
            let m = 10.0 * opts.rtol * val.max(1.0);
            let lo = e0 - lam * s.eps * len;
            let hi = e0 + lam * s.eps * len;
            let v = (lo - val - m).max(val - hi - m).max(0.0) / e0.max(1.0);
            est.checked += 1;
            if v > 0.0 {
                est.max_violation = est.max_violation.max(v);
                est.holds = false;
            }
            if predicted.is_none() {
                let need = (1.0 / s.a).max(libm::exp(lam * z.re) / s.b);
                if lo < need * (1.0 - 1e-12) {
                    predicted = Some(ExitInfo { clause: ExitClause::Predicted, t: tt, z });
                }
            }
            if reactive.is_none() {
                if let Some(c) = s.outside(z, w, opts.safety) {
                    reactive = Some(ExitInfo { clause: c, t: tt, z });
                }
            }
            let stop = reactive.is_some() || (opts.predictive && predicted.is_some());
            if stop && stop_at.is_none() {
                stop_at = Some(samples.len());
            }
            // keep integrating past a predicted failure to see whether it is real
            reactive.is_none()
        };
        let (y, _, rej) = dopri(g, seg.span(), state, opts, on)?;
        rejected += rej;
        state = y;
        t_base += seg.span();
        if reactive.is_some() {
            break;
        }
    }
    let exit = match (opts.predictive, predicted, reactive) {
        (true, Some(p), Some(r)) => Some(if p.t <= r.t { p } else { r }),
        (true, Some(p), None) => Some(p),
        (_, _, r) => r,
    };
    if let Some(n) = stop_at {
        samples.truncate(n);
    }
    let length = samples.last().map_or(0.0, |x| x.length);
    Ok(LiftResult {
        samples,
        length,
        exit,
        reactive_exit: reactive,
        predicted_exit: predicted,
        disagreement: predicted.is_some() != reactive.is_some(),
        estimate: est,
        rejected_steps: rejected,
    })
}

/// `(α, C, T)` of the exponential path through `z`.
pub fn exponential_path_through(z: C64, lambda: f64) -> Result<(f64, i8, f64)> {
    if !(z.re > 0.0) {
        return Err(Error::PreconditionFailed("corner sample needs Re z > 0"));
    }
    let alpha = libm::log1p(libm::fabs(z.im)) / z.re;
    if alpha >= lambda {
        return Err(Error::PreconditionFailed("sample outside the exponential-path domain"));
    }
    Ok((alpha, if z.im < 0.0 { -1 } else { 1 }, z.re))
}

/// Canonical lifted corner transition `d_0(z)` at one point.
pub fn corner_point(s: &PreparedSaddle, z: C64, opts: &LiftOptions) -> Result<C64> {
    if s.sigma.norm() > s.sigma_bound() * (1.0 + 1e-12) {
        return Err(Error::PreconditionFailed("base point of the floating transversal violates the sigma bound"));
    }
    let (alpha, c, t) = exponential_path_through(z, s.lambda)?;
    let w0 = -s.sigma.ln();
    let path = PathSpec::Exponential { alpha, c, t, backward: true };
    let lift = lift_path(s, &path, w0, opts)?;
    if let Some(e) = lift.exit {
        return Err(Error::LiftExited(e.clause.name()));
    }
    let d = lift.end().phi;
    let k = libm::round((d - z * s.lambda - w0).im / (2.0 * PI));
    Ok(d - two_pi_i() * k)
}

pub fn corner_map_numeric(s: &PreparedSaddle, zs: &[C64], opts: &LiftOptions) -> Result<Vec<(C64, C64)>> {
    zs.iter().map(|&z| corner_point(s, z, opts).map(|d| (z, d))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Transversal {
    Sigma,
    Omega,
}

/// Continuous log-chart endpoint after `laps` positive turns (negative turns for `laps < 0`).
///
/// `Omega`: start `w` on `{x = 1}`, turning `x` once around 0.
/// `Sigma`: start `z` on `{y = σ}`, turning `y` once around 0.
pub fn holonomy_lift(s: &PreparedSaddle, which: Transversal, start: C64, laps: i32, opts: &LiftOptions) -> Result<C64> {
    if laps == 0 {
        return Ok(start);
    }
    let dir = if laps > 0 { -1.0 } else { 1.0 };
    let span = 2.0 * PI * laps.unsigned_abs() as f64;
    let lam = s.lambda;
    match which {
        Transversal::Omega => {
            let path = PathSpec::Circular { z0: C64::new(0.0, 0.0), t: dir * span };
            let mut o = *opts;
            o.predictive = false;
            let lift = lift_path(s, &path, start, &o)?;
            if let Some(e) = lift.exit {
                return Err(Error::LiftExited(e.clause.name()));
            }
            let end = lift.end();
            Ok(end.phi - end.z * lam)
        }
        Transversal::Sigma => {
            let w0 = -s.sigma.ln();
            if s.outside(start, w0, 1.0).is_some() {
                return Err(Error::PreconditionFailed("initial point outside U_{A,B}"));
            }
            let psi0 = start + w0 / lam;
            let wv = I * dir;
            let mut bad = None;
            let g = |t: f64, y: &State| [s.rhs_vertical(w0 + wv * t, y[0]) * wv, C64::new(1.0, 0.0)];
            let on = |t: f64, y: &State| {
                let w = w0 + wv * t;
                let z = y[0] - w / lam;
                bad = s.outside(z, w, opts.safety);
                bad.is_none()
            };
            let (y, t, _) = dopri(g, span, [psi0, C64::new(0.0, 0.0)], opts, on)?;
            if let Some(c) = bad {
                return Err(Error::LiftExited(c.name()));
            }
            Ok(y[0] - (w0 + wv * t) / lam)
        }
    }
}

/// One positive lap on the transversal's own coordinate (`y` on `Ω`, `x` on `Σ`).
pub fn holonomy_numeric(s: &PreparedSaddle, which: Transversal, start: C64, opts: &LiftOptions) -> Result<C64> {
    let l = holonomy_lift(s, which, -start.ln(), 1, opts)?;
    Ok((-l).exp())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Determination {
    pub z: C64,
    /// `h_Ω^{-n} d_0 (z)`.
    pub via_omega: C64,
    /// `d_0 h_Σ^n (z)`.
    pub via_sigma: C64,
    pub residual: f64,
}

/// The `n`-th lifted determination, computed through both holonomies.
///
/// Lifts: `h_Ω(w) = w + 2πi(1-λ) + o(1)` and `h_Σ(z) = z + 2πi(1-1/λ) + o(1)`,
/// each the deck-shifted lift of the inverse lap.
pub fn determination_shift(s: &PreparedSaddle, n: i32, zs: &[C64], opts: &LiftOptions) -> Result<Vec<Determination>> {
    let shift = two_pi_i() * n as f64;
    zs.iter()
        .map(|&z| {
            let d0 = corner_point(s, z, opts)?;
            let via_omega = holonomy_lift(s, Transversal::Omega, d0, n, opts)? - shift;
            let zn = holonomy_lift(s, Transversal::Sigma, z, -n, opts)? + shift;
            let via_sigma = corner_point(s, zn, opts)?;
            let residual = (via_omega - via_sigma).norm() / via_omega.norm().max(1.0);
            Ok(Determination { z, via_omega, via_sigma, residual })
        })
        .collect()
}

/// `|d_0(z + 2πi) - h(d_0(z))|` with `h` one positive lap on `Ω`.
pub fn monodromy_residual(s: &PreparedSaddle, z: C64, opts: &LiftOptions) -> Result<f64> {
    let lhs = corner_point(s, z + two_pi_i(), opts)?;
    let rhs = holonomy_lift(s, Transversal::Omega, corner_point(s, z, opts)?, 1, opts)?;
    Ok((lhs - rhs).norm() / lhs.norm().max(1.0))
}

/// Radius where the last stored coefficient of `g` contributes below `tol` relative.
pub fn reliability_radius(g: &DiffeoGerm, tol: f64) -> f64 {
    if g.is_exact() {
        return f64::INFINITY;
    }
    let n = g.order();
    let c = g.coeffs();
    let Some(j) = (2..=n).rev().find(|&j| c.get(j - 1).is_some_and(|x| x.abs_f64() > 0.0)) else {
        return f64::INFINITY;
    };
    let cj = c[j - 1].abs_f64();
    let c1 = c[0].abs_f64();
    libm::pow(tol * c1 / cj, 1.0 / (j as f64 - 1.0))
}

/// `P(x) = R(D_0(x))` on the given samples.
pub fn poincare_numeric(
    s: &PreparedSaddle,
    r: &DiffeoGerm,
    xs: &[C64],
    radius: f64,
    opts: &LiftOptions,
) -> Result<Vec<(C64, C64)>> {
    xs.iter()
        .map(|&x| {
            let d = corner_point(s, -x.ln(), opts)?;
            let y = (-d).exp();
            if y.norm() > radius {
                return Err(Error::RadiusExceeded { radius });
            }
            let p = r.eval(crate::num::Cx::from_c64(y)).to_c64();
            Ok((x, p))
        })
        .collect()
}
