//! Box-constrained adaptive Nelder-Mead with restarts.

use rand::Rng;

#[derive(Clone, Copy, Debug)]
pub struct NelderMeadConfig {
    pub max_evals: usize,
    /// Stop a run when the simplex's objective spread drops below this.
    pub tol_f: f64,
    /// ... or its coordinate spread, in units of the initial steps.
    pub tol_x: f64,
    pub max_restarts: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self { max_evals: 5000, tol_f: 1e-10, tol_x: 1e-8, max_restarts: 20 }
    }
}

#[derive(Clone, Debug)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub restarts: usize,
    /// Best value at the end of each run.
    pub trace: Vec<f64>,
}

/// Coordinate map `x = lo + (hi - lo)(1 + sin u) / 2` onto a finite box;
/// unbounded or degenerate coordinates pass through.
struct BoxMap<'a> {
    lower: &'a [f64],
    upper: &'a [f64],
}

impl BoxMap<'_> {
    fn bounded(&self, i: usize) -> bool {
        self.lower[i].is_finite() && self.upper[i].is_finite() && self.upper[i] > self.lower[i]
    }

    fn to_x(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(i, &v)| {
                if self.bounded(i) {
                    let (lo, hi) = (self.lower[i], self.upper[i]);
                    (lo + 0.5 * (hi - lo) * (1.0 + v.sin())).clamp(lo, hi)
                } else {
                    v.clamp(self.lower[i], self.upper[i])
                }
            })
            .collect()
    }

    fn to_u(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                if self.bounded(i) {
                    let (lo, hi) = (self.lower[i], self.upper[i]);
                    (2.0 * (v.clamp(lo, hi) - lo) / (hi - lo) - 1.0).asin()
                } else {
                    v
                }
            })
            .collect()
    }

    /// Step in `u` moving `x` by about `h`.
    fn u_step(&self, i: usize, u: f64, h: f64) -> f64 {
        if !self.bounded(i) {
            return h;
        }
        let half = 0.5 * (self.upper[i] - self.lower[i]);
        let slope = half * u.cos().abs();
        // at a bound the map is flat; use the second-order step there
        let s = if slope * 0.5 > h { h / slope } else { (2.0 * h / half).sqrt() };
        s.min(0.5)
    }
}

struct Budgeted<'a, F> {
    f: &'a mut F,
    map: BoxMap<'a>,
    evals: usize,
    max: usize,
}

impl<F: FnMut(&[f64]) -> f64> Budgeted<'_, F> {
    fn call(&mut self, u: &[f64]) -> f64 {
        if self.exhausted() {
            return f64::INFINITY;
        }
        self.evals += 1;
        let v = (self.f)(&self.map.to_x(u));
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn exhausted(&self) -> bool {
        self.evals >= self.max
    }
}

/// Minimizes `f` over the box `[lower, upper]` starting at `x0`. Finite
/// boxes are handled by a sine reparametrization, so every trial point lies
/// in the box. `step` sets the initial simplex edge per coordinate. Restarts
/// rebuild the simplex around the incumbent with randomly signed edges until
/// a restart brings no improvement above `tol_f` or the budget is spent.
pub fn nelder_mead<F, R>(mut f: F, x0: &[f64], lower: &[f64], upper: &[f64], step: &[f64], cfg: &NelderMeadConfig, rng: &mut R) -> Minimum
where
    F: FnMut(&[f64]) -> f64,
    R: Rng + ?Sized,
{
    let n = x0.len();
    let map = BoxMap { lower, upper };
    let mut best_u = map.to_u(x0);
    let mut ev = Budgeted { f: &mut f, map, evals: 0, max: cfg.max_evals.max(1) };
    let mut best_f = ev.call(&best_u);
    let mut trace = Vec::new();
    if n == 0 {
        return Minimum { x: x0.to_vec(), f: best_f, evals: ev.evals, restarts: 0, trace: vec![best_f] };
    }
    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);
    let mut restarts = 0;
    let mut signs = vec![1.0; n];
    loop {
        let start_f = best_f;
        let u_steps: Vec<f64> = (0..n).map(|i| ev.map.u_step(i, best_u[i], step[i])).collect();
        let mut pts: Vec<Vec<f64>> = vec![best_u.clone()];
        let mut vals = vec![best_f];
        for i in 0..n {
            if ev.exhausted() {
                break;
            }
            let mut p = best_u.clone();
            p[i] += signs[i] * u_steps[i];
            vals.push(ev.call(&p));
            pts.push(p);
        }
        if pts.len() == n + 1 {
            run(&mut ev, &mut pts, &mut vals, &u_steps, cfg, (alpha, beta, gamma, delta));
        }
        for (p, v) in pts.iter().zip(&vals) {
            if *v < best_f {
                best_f = *v;
                best_u = p.clone();
            }
        }
        trace.push(best_f);
        let improved = start_f - best_f > cfg.tol_f;
        if ev.exhausted() || restarts >= cfg.max_restarts || (!improved && restarts > 0) {
            break;
        }
        restarts += 1;
        for s in signs.iter_mut() {
            *s = if rng.random::<bool>() { 1.0 } else { -1.0 };
        }
    }
    Minimum { x: ev.map.to_x(&best_u), f: best_f, evals: ev.evals, restarts, trace }
}

fn order(pts: &mut [Vec<f64>], vals: &mut [f64]) {
    let mut idx: Vec<usize> = (0..vals.len()).collect();
    idx.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let p: Vec<Vec<f64>> = idx.iter().map(|&i| pts[i].clone()).collect();
    let v: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
    pts.clone_from_slice(&p);
    vals.copy_from_slice(&v);
}

fn run<F: FnMut(&[f64]) -> f64>(
    ev: &mut Budgeted<F>,
    pts: &mut [Vec<f64>],
    vals: &mut [f64],
    step: &[f64],
    cfg: &NelderMeadConfig,
    (alpha, beta, gamma, delta): (f64, f64, f64, f64),
) {
    let n = pts.len() - 1;
    let combo = |c: &[f64], w: &[f64], t: f64| -> Vec<f64> { c.iter().zip(w).map(|(a, b)| a + t * (b - a)).collect() };
    loop {
        order(pts, vals);
        let spread_f = vals[n] - vals[0];
        let spread_x = (1..=n)
            .flat_map(|j| (0..n).map(move |i| (j, i)))
            .map(|(j, i)| ((pts[j][i] - pts[0][i]) / step[i]).abs())
            .fold(0.0, f64::max);
        if ev.exhausted() || (vals[0].is_finite() && spread_f.abs() <= cfg.tol_f) || spread_x <= cfg.tol_x {
            return;
        }
        let mut centroid = vec![0.0; n];
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let xr = combo(&centroid, &pts[n], -alpha);
        let fr = ev.call(&xr);
        if fr < vals[0] {
            let xe = combo(&centroid, &pts[n], -alpha * beta);
            let fe = ev.call(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, inside) = if fr < vals[n] { (combo(&centroid, &xr, gamma), false) } else { (combo(&centroid, &pts[n], gamma), true) };
        let fc = ev.call(&xc);
        let accept = if inside { fc < vals[n] } else { fc <= fr };
        if accept {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for j in 1..=n {
            if ev.exhausted() {
                return;
            }
            let p = combo(&pts[0], &pts[j], delta);
            vals[j] = ev.call(&p);
            pts[j] = p;
        }
    }
}
