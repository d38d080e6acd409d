//! Adaptive rejection Metropolis sampling for univariate targets.
//!
//! The proposal is a piecewise-exponential envelope built from secants of the
//! log density, refined with every rejected point. Where the target is not
//! log-concave the envelope may dip below it; a Metropolis-Hastings step
//! against the chain's current value then restores the correct stationary law.

use rand::Rng;

use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmsOptions {
    /// Upper bound on envelope abscissae; beyond it rejected points are not added.
    pub max_points: usize,
    /// Apply the Metropolis correction. Switch off only for log-concave targets.
    pub metropolis: bool,
}

impl Default for ArmsOptions {
    fn default() -> Self {
        Self {
            max_points: 64,
            metropolis: true,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Line {
    x0: f64,
    h0: f64,
    slope: f64,
}

impl Line {
    fn through(x1: f64, h1: f64, x2: f64, h2: f64) -> Self {
        Line {
            x0: x1,
            h0: h1,
            slope: (h2 - h1) / (x2 - x1),
        }
    }
    fn at(&self, x: f64) -> f64 {
        self.h0 + self.slope * (x - self.x0)
    }
    fn intersect(&self, other: &Line) -> Option<f64> {
        let ds = self.slope - other.slope;
        if ds == 0.0 {
            return None;
        }
        // h0a + sa (x - xa) = h0b + sb (x - xb)
        let x = (other.h0 - self.h0 + self.slope * self.x0 - other.slope * other.x0) / ds;
        x.is_finite().then_some(x)
    }
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    line: Line,
    log_mass: f64,
}

/// Sampler state for one fixed target density.
#[derive(Debug, Clone)]
pub struct ArmsState {
    lo: f64,
    hi: f64,
    xs: Vec<f64>,
    hs: Vec<f64>,
    current: f64,
    h_current: f64,
    pieces: Vec<Piece>,
    cumulative: Vec<f64>,
    opts: ArmsOptions,
}

fn clean(h: f64) -> f64 {
    if h.is_nan() || h == f64::INFINITY {
        f64::NEG_INFINITY
    } else {
        h
    }
}

/// `log ∫_0^len exp(slope * u) du` for `len` possibly infinite.
fn log_exp_integral(slope: f64, len: f64) -> f64 {
    if len.is_infinite() {
        return -(-slope).ln();
    }
    let sl = slope * len;
    if sl.abs() < 1e-12 {
        len.ln()
    } else if slope > 0.0 {
        sl + (-(-sl).exp_m1()).ln() - slope.ln()
    } else {
        (-sl.exp_m1()).ln() - (-slope).ln()
    }
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

impl ArmsState {
    /// Builds the initial envelope from `abscissae` inside `support`.
    ///
    /// Abscissae where the log density is not finite are discarded. On an
    /// unbounded side, points are added by stepping outward until the tail
    /// secant decreases toward infinity.
    pub fn new<F>(
        logdensity: &F,
        support: (f64, f64),
        abscissae: &[f64],
        current: f64,
        opts: ArmsOptions,
    ) -> Result<Self, NumericsError>
    where
        F: Fn(f64) -> f64,
    {
        let (lo, hi) = support;
        if !(lo < hi) {
            return Err(NumericsError::ArmsInit(format!("empty support ({lo}, {hi})")));
        }
        let mut pts: Vec<(f64, f64)> = abscissae
            .iter()
            .copied()
            .filter(|x| *x > lo && *x < hi && x.is_finite())
            .map(|x| (x, clean(logdensity(x))))
            .collect();
        let tried = pts.len();
        pts.retain(|p| p.1.is_finite());
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        if pts.len() < 2 {
            return Err(NumericsError::ArmsInit(format!(
                "log density finite at {} of {} initial abscissae in ({lo}, {hi})",
                pts.len(),
                tried
            )));
        }
        // densify to at least four points
        while pts.len() < 4 {
            let mut widest = 0;
            for i in 0..pts.len() - 1 {
                if pts[i + 1].0 - pts[i].0 > pts[widest + 1].0 - pts[widest].0 {
                    widest = i;
                }
            }
            let mid = 0.5 * (pts[widest].0 + pts[widest + 1].0);
            let hm = clean(logdensity(mid));
            if !hm.is_finite() {
                return Err(NumericsError::ArmsInit(format!(
                    "log density not finite at interior point {mid}"
                )));
            }
            pts.insert(widest + 1, (mid, hm));
        }

        let mut lo_eff = lo;
        let mut hi_eff = hi;
        if lo.is_infinite() {
            for _ in 0..200 {
                let (x1, h1) = pts[0];
                let (x2, h2) = pts[1];
                if (h2 - h1) / (x2 - x1) > 0.0 {
                    break;
                }
                let span = (pts[pts.len() - 1].0 - x1).max(1.0);
                let xn = x1 - span;
                let hn = clean(logdensity(xn));
                if !hn.is_finite() {
                    lo_eff = xn;
                    break;
                }
                pts.insert(0, (xn, hn));
            }
            if lo_eff.is_infinite() && !((pts[1].1 - pts[0].1) > 0.0) {
                return Err(NumericsError::ArmsInit("left tail does not decay".into()));
            }
        }
        if hi.is_infinite() {
            for _ in 0..200 {
                let k = pts.len();
                let (x1, h1) = pts[k - 2];
                let (x2, h2) = pts[k - 1];
                if (h2 - h1) / (x2 - x1) < 0.0 {
                    break;
                }
                let span = (x2 - pts[0].0).max(1.0);
                let xn = x2 + span;
                let hn = clean(logdensity(xn));
                if !hn.is_finite() {
                    hi_eff = xn;
                    break;
                }
                pts.push((xn, hn));
            }
            let k = pts.len();
            if hi_eff.is_infinite() && !((pts[k - 1].1 - pts[k - 2].1) < 0.0) {
                return Err(NumericsError::ArmsInit("right tail does not decay".into()));
            }
        }

        let (xs, hs): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        let mut state = ArmsState {
            lo: lo_eff,
            hi: hi_eff,
            xs,
            hs,
            current,
            h_current: f64::NEG_INFINITY,
            pieces: Vec::new(),
            cumulative: Vec::new(),
            opts,
        };
        let hc = if current > lo && current < hi {
            clean(logdensity(current))
        } else {
            f64::NEG_INFINITY
        };
        if hc.is_finite() {
            state.h_current = hc;
        } else {
            let best = (0..state.xs.len())
                .max_by(|&a, &b| state.hs[a].total_cmp(&state.hs[b]))
                .expect("at least two abscissae");
            state.current = state.xs[best];
            state.h_current = state.hs[best];
        }
        state.rebuild();
        Ok(state)
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.xs
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn current(&self) -> f64 {
        self.current
    }

    fn chord(&self, i: usize) -> Line {
        Line::through(self.xs[i], self.hs[i], self.xs[i + 1], self.hs[i + 1])
    }

    fn rebuild(&mut self) {
        let k = self.xs.len();
        let mut pieces = Vec::with_capacity(3 * k);
        let left = self.chord(0);
        if self.lo < self.xs[0] {
            pieces.push(Piece {
                a: self.lo,
                b: self.xs[0],
                line: left,
                log_mass: 0.0,
            });
        }
        for i in 0..k - 1 {
            let (a, b) = (self.xs[i], self.xs[i + 1]);
            let c = self.chord(i);
            let la = (i >= 1).then(|| self.chord(i - 1));
            let lb = (i + 2 < k).then(|| self.chord(i + 1));
            let env = |x: f64| -> f64 {
                let m = match (la, lb) {
                    (Some(p), Some(q)) => p.at(x).min(q.at(x)),
                    (Some(p), None) => p.at(x),
                    (None, Some(q)) => q.at(x),
                    (None, None) => f64::NEG_INFINITY,
                };
                c.at(x).max(m)
            };
            let mut cuts = vec![a, b];
            let lines: Vec<Line> = [Some(c), la, lb].into_iter().flatten().collect();
            for p in 0..lines.len() {
                for q in p + 1..lines.len() {
                    if let Some(x) = lines[p].intersect(&lines[q]) {
                        if x > a && x < b {
                            cuts.push(x);
                        }
                    }
                }
            }
            cuts.sort_by(f64::total_cmp);
            for w in cuts.windows(2) {
                let (u, v) = (w[0], w[1]);
                if v <= u {
                    continue;
                }
                let mid = 0.5 * (u + v);
                let target = env(mid);
                let active = lines
                    .iter()
                    .min_by(|p, q| (p.at(mid) - target).abs().total_cmp(&(q.at(mid) - target).abs()))
                    .copied()
                    .expect("chord always present");
                pieces.push(Piece {
                    a: u,
                    b: v,
                    line: active,
                    log_mass: 0.0,
                });
            }
        }
        let right = self.chord(k - 2);
        if self.hi > self.xs[k - 1] {
            pieces.push(Piece {
                a: self.xs[k - 1],
                b: self.hi,
                line: right,
                log_mass: 0.0,
            });
        }
        let mut cumulative = Vec::with_capacity(pieces.len());
        let mut total = f64::NEG_INFINITY;
        for p in pieces.iter_mut() {
            p.log_mass = if p.a.is_infinite() {
                p.line.at(p.b) + log_exp_integral(-p.line.slope, f64::INFINITY)
            } else {
                p.line.at(p.a) + log_exp_integral(p.line.slope, p.b - p.a)
            };
            total = log_add(total, p.log_mass);
            cumulative.push(total);
        }
        self.pieces = pieces;
        self.cumulative = cumulative;
    }

    fn envelope(&self, x: f64) -> f64 {
        let idx = self.pieces.partition_point(|p| p.b < x).min(self.pieces.len() - 1);
        self.pieces[idx].line.at(x)
    }

    fn draw_envelope<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = *self.cumulative.last().expect("non-empty envelope");
        let target = total + rng.random::<f64>().ln();
        let idx = self.cumulative.partition_point(|c| *c < target).min(self.pieces.len() - 1);
        let p = &self.pieces[idx];
        let u: f64 = rng.random();
        let s = p.line.slope;
        let x = if p.a.is_infinite() {
            p.b + (1.0 - u).ln() / s
        } else if p.b.is_infinite() {
            p.a + (1.0 - u).ln() / s
        } else {
            let len = p.b - p.a;
            let sl = s * len;
            if sl.abs() < 1e-12 {
                p.a + u * len
            } else if s > 0.0 {
                p.b + (u + (1.0 - u) * (-sl).exp()).ln() / s
            } else {
                p.a + (1.0 - u + u * sl.exp()).ln() / s
            }
        };
        x.clamp(p.a, p.b)
    }

    fn insert(&mut self, x: f64, h: f64) {
        if self.xs.len() >= self.opts.max_points || !h.is_finite() {
            return;
        }
        let pos = self.xs.partition_point(|v| *v < x);
        if pos < self.xs.len() && self.xs[pos] == x {
            return;
        }
        self.xs.insert(pos, x);
        self.hs.insert(pos, h);
        self.rebuild();
    }
}

/// Draws one value from the chain targeting `exp(logdensity)` on the
/// state's support. The state's current point advances to the returned value.
pub fn arms_sample<F, R>(logdensity: &F, state: &mut ArmsState, rng: &mut R) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
    R: Rng + ?Sized,
{
    const MAX_TRIES: usize = 10_000;
    for _ in 0..MAX_TRIES {
        let x = state.draw_envelope(rng);
        if !(x > state.lo && x < state.hi) {
            continue;
        }
        let hx = clean(logdensity(x));
        let ex = state.envelope(x);
        let u: f64 = rng.random();
        if u.ln() > hx - ex {
            state.insert(x, hx);
            continue;
        }
        if !state.opts.metropolis {
            state.current = x;
            state.h_current = hx;
            return Ok(x);
        }
        let ec = state.envelope(state.current);
        let hc = state.h_current;
        let log_ratio = hx + hc.min(ec) - hc - hx.min(ex);
        let v: f64 = rng.random();
        if v.ln() <= log_ratio.min(0.0) {
            state.current = x;
            state.h_current = hx;
        }
        return Ok(state.current);
    }
    Err(NumericsError::ArmsInit(format!(
        "no proposal accepted in {MAX_TRIES} attempts"
    )))
}
