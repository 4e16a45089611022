//! Exact simulation of `(Y, Sigma)`: compound Poisson jump times, exact OU
//! propagation between jumps and Gaussian increments with the exact
//! integrated covariance of each interval.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy::stream_rng;
use crate::matrix::{psd_sqrt, SymMat};
use crate::model::ModelParams;

#[derive(Clone, Debug, PartialEq)]
pub struct MCConfig {
    pub n_paths: usize,
    pub seed: u64,
    /// Pairs paths with negated Gaussian increments; pairs count as two paths.
    pub antithetic: bool,
    /// Times at which `Y` and `Sigma` are recorded.
    pub t_grid: Option<Vec<f64>>,
}

impl MCConfig {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self { n_paths, seed, antithetic: false, t_grid: None }
    }

    /// Number of independent samples (pairs count once).
    pub fn samples(&self) -> usize {
        if self.antithetic {
            self.n_paths.div_ceil(2)
        } else {
            self.n_paths
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub y: DVector<f64>,
    pub sigma: SymMat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathRecord {
    pub index: u64,
    pub jump_times: Vec<f64>,
    pub y_t: DVector<f64>,
    pub sigma_t: SymMat,
    pub sigma_plus_t: SymMat,
    /// Terminal value of the driving subordinator `L_T`.
    pub l_t: SymMat,
    /// `[Y^i, Y^j]_T`.
    pub realized_qcov: SymMat,
    pub snapshots: Vec<Snapshot>,
}

/// Realized quadratic covariation `[Y^i, Y^j]_T` of a simulated path.
pub fn realized_qcov(path: &PathRecord) -> &SymMat {
    &path.realized_qcov
}

#[derive(Clone, Debug)]
pub struct PathSet {
    pub records: Vec<PathRecord>,
    pub antithetic: bool,
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    /// Distance to `x` in standard errors.
    pub fn z_score(&self, x: f64) -> f64 {
        if self.stderr == 0.0 {
            if self.mean == x {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - x).abs() / self.stderr
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    Jump,
    Record,
    End,
}

pub struct Simulator {
    model: ModelParams,
    diag: Option<Vec<f64>>,
}

impl Simulator {
    pub fn new(model: &ModelParams) -> Result<Self> {
        model.validate()?;
        if let Some(j) = model.sub.jumps() {
            if j.n().fract() != 0.0 {
                return Err(Error::UnsupportedSampling(format!("non-integer degrees of freedom n = {}", j.n())));
            }
        }
        let diag = model.a.diagonal().map(|d| d.to_vec());
        Ok(Self { model: model.clone(), diag })
    }

    pub fn model(&self) -> &ModelParams {
        &self.model
    }

    /// `Sigma` after `dt` without jumps and `int Sigma ds` over the interval.
    fn propagate(&self, sigma: &DMatrix<f64>, dt: f64) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let gamma = self.model.sub.gamma().as_matrix();
        if let Some(a) = &self.diag {
            let d = a.len();
            let mut end = DMatrix::zeros(d, d);
            let mut int = DMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    let k = a[i] + a[j];
                    let phi = (k * dt).exp_m1() / k;
                    end[(i, j)] = sigma[(i, j)] * (k * dt).exp() + gamma[(i, j)] * phi;
                    int[(i, j)] = sigma[(i, j)] * phi + gamma[(i, j)] * (phi - dt) / k;
                }
            }
            return Ok((end, int));
        }
        let a = &self.model.a;
        let e = a.expm(dt)?;
        let et = e.transpose();
        let end = &e * sigma * &et + a.sylvester_solve(&(&e * gamma * &et - gamma), false)?;
        let int = a.sylvester_solve(&(&end - sigma - gamma * dt), false)?;
        Ok((end, int))
    }

    /// Simulates path `index` (and its antithetic partner when requested).
    pub fn path(&self, seed: u64, index: u64, t: f64, grid: &[f64], antithetic: bool) -> Result<Vec<PathRecord>> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("horizon must be positive, got {t}")));
        }
        let m = &self.model;
        let d = m.dim();
        let mut rng = stream_rng(seed, index);
        let lambda = m.sub.lambda();
        let n_jumps = if lambda > 0.0 {
            let pois = Poisson::new(lambda * t).map_err(|e| Error::Numeric(format!("Poisson: {e}")))?;
            pois.sample(&mut rng) as usize
        } else {
            0
        };
        let mut jump_times: Vec<f64> = (0..n_jumps).map(|_| rng.random::<f64>() * t).collect();
        jump_times.sort_by(f64::total_cmp);

        let mut events: Vec<(f64, Event)> = jump_times.iter().map(|&s| (s, Event::Jump)).collect();
        events.extend(grid.iter().filter(|&&g| (0.0..=t).contains(&g)).map(|&g| (g, Event::Record)));
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        events.dedup_by(|a, b| a == b && a.1 == Event::Record);
        events.push((t, Event::End));

        let copies = if antithetic { 2 } else { 1 };
        let gamma = m.sub.gamma().as_matrix().clone();
        let rho_gamma = m.rho.apply(&gamma);
        let mut sigma = m.sigma0.as_matrix().clone();
        let mut ys = vec![m.y0.clone(); copies];
        let mut sigma_plus = DMatrix::zeros(d, d);
        let mut l_t = DMatrix::zeros(d, d);
        let mut jump_qcov = DMatrix::zeros(d, d);
        let mut snaps: Vec<Vec<Snapshot>> = vec![Vec::new(); copies];
        let mut now = 0.0;
        for &(time, event) in &events {
            let dt = time - now;
            if dt > 0.0 {
                let (end, int) = self.propagate(&sigma, dt)?;
                let int_sym = SymMat::symmetrize(&int);
                let root = psd_sqrt(&int_sym)?;
                let z = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
                let shock = root.as_matrix() * &z;
                let drift = &m.mu * dt + m.beta.apply(int_sym.as_matrix()) + &rho_gamma * dt;
                for (c, y) in ys.iter_mut().enumerate() {
                    let sign = if c == 0 { 1.0 } else { -1.0 };
                    *y += &drift + &shock * sign;
                }
                sigma_plus += int_sym.as_matrix();
                l_t += &gamma * dt;
                sigma = end;
                now = time;
            }
            if event == Event::Jump {
                let jump = m.sub.sample_jump(&mut rng)?;
                let jm = jump.as_matrix();
                let lev = m.rho.apply(jm);
                for y in ys.iter_mut() {
                    *y += &lev;
                }
                sigma += jm;
                l_t += jm;
                jump_qcov += &lev * lev.transpose();
            } else if event == Event::Record {
                for (c, y) in ys.iter().enumerate() {
                    snaps[c].push(Snapshot { time, y: y.clone(), sigma: SymMat::symmetrize(&sigma) });
                }
            }
        }
        let sigma_plus = SymMat::symmetrize(&sigma_plus);
        let qcov = SymMat::symmetrize(&(sigma_plus.as_matrix() + &jump_qcov));
        Ok(ys
            .into_iter()
            .zip(snaps)
            .enumerate()
            .map(|(c, (y, snapshots))| PathRecord {
                index: index * copies as u64 + c as u64,
                jump_times: jump_times.clone(),
                y_t: y,
                sigma_t: SymMat::symmetrize(&sigma),
                sigma_plus_t: sigma_plus.clone(),
                l_t: SymMat::symmetrize(&l_t),
                realized_qcov: qcov.clone(),
                snapshots,
            })
            .collect())
    }
}

fn grid_of(cfg: &MCConfig) -> Vec<f64> {
    cfg.t_grid.clone().unwrap_or_default()
}

/// Simulates and stores all paths.
pub fn simulate(model: &ModelParams, t: f64, cfg: &MCConfig) -> Result<PathSet> {
    if cfg.n_paths == 0 {
        return Err(Error::Domain("n_paths must be at least 1".into()));
    }
    let sim = Simulator::new(model)?;
    let grid = grid_of(cfg);
    let chunks: Vec<Result<Vec<PathRecord>>> = (0..cfg.samples() as u64)
        .into_par_iter()
        .map(|i| sim.path(cfg.seed, i, t, &grid, cfg.antithetic))
        .collect();
    let mut records = Vec::with_capacity(cfg.n_paths);
    for c in chunks {
        records.extend(c?);
    }
    records.truncate(cfg.n_paths.max(if cfg.antithetic { 2 } else { 1 }));
    Ok(PathSet { records, antithetic: cfg.antithetic })
}

/// Discounted payoff mean and standard error over stored paths.
pub fn mc_price(paths: &PathSet, payoff: impl Fn(&DVector<f64>) -> f64, r_dom: f64, t: f64) -> (f64, f64) {
    let disc = (-r_dom * t).exp();
    let mut acc = Welford::new(1);
    if paths.antithetic {
        for pair in paths.records.chunks(2) {
            let v = pair.iter().map(|p| payoff(&p.y_t)).sum::<f64>() / pair.len() as f64;
            acc.push(&[disc * v]);
        }
    } else {
        for p in &paths.records {
            acc.push(&[disc * payoff(&p.y_t)]);
        }
    }
    let e = acc.estimates()[0];
    (e.mean, e.stderr)
}

/// Running mean and sum of squared deviations.
#[derive(Clone, Debug)]
struct Welford {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(k: usize) -> Self {
        Self { n: 0, mean: vec![0.0; k], m2: vec![0.0; k] }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((m, s), &v) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(x) {
            let delta = v - *m;
            *m += delta / n;
            *s += delta * (v - *m);
        }
    }

    fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        let (na, nb) = (self.n as f64, other.n as f64);
        let n = na + nb;
        for k in 0..self.mean.len() {
            let delta = other.mean[k] - self.mean[k];
            self.mean[k] += delta * nb / n;
            self.m2[k] += other.m2[k] + delta * delta * na * nb / n;
        }
        self.n += other.n;
    }

    fn estimates(&self) -> Vec<Estimate> {
        let n = self.n as f64;
        self.mean
            .iter()
            .zip(&self.m2)
            .map(|(&mean, &m2)| {
                let var = if self.n > 1 { m2 / (n - 1.0) } else { 0.0 };
                Estimate { mean, stderr: (var / n).sqrt(), n: self.n }
            })
            .collect()
    }
}

const BLOCK: u64 = 2048;

/// Means and standard errors of `k` path statistics without storing paths.
/// Blocks of paths are simulated concurrently and merged in a fixed order,
/// so results do not depend on the number of threads.
pub fn estimate<F>(model: &ModelParams, t: f64, cfg: &MCConfig, k: usize, stat: F) -> Result<Vec<Estimate>>
where
    F: Fn(&PathRecord, &mut [f64]) + Sync,
{
    if cfg.n_paths == 0 {
        return Err(Error::Domain("n_paths must be at least 1".into()));
    }
    let sim = Simulator::new(model)?;
    let grid = grid_of(cfg);
    let samples = cfg.samples() as u64;
    let n_blocks = samples.div_ceil(BLOCK);
    let blocks: Vec<Result<Welford>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = Welford::new(k);
            let mut buf = vec![0.0; k];
            let mut pair = vec![0.0; k];
            for i in b * BLOCK..((b + 1) * BLOCK).min(samples) {
                let recs = sim.path(cfg.seed, i, t, &grid, cfg.antithetic)?;
                pair.iter_mut().for_each(|v| *v = 0.0);
                for r in &recs {
                    stat(r, &mut buf);
                    for (p, v) in pair.iter_mut().zip(&buf) {
                        *p += v / recs.len() as f64;
                    }
                }
                acc.push(&pair);
            }
            Ok(acc)
        })
        .collect();
    let mut total = Welford::new(k);
    for b in blocks {
        total.merge(&b?);
    }
    Ok(total.estimates())
}

/// Writes snapshots as `path,time,Y1,...,Yd,Sigma11,Sigma12,...,Sigmadd`
/// (all `d^2` covariance entries, row-major).
pub fn write_paths_csv<W: Write>(paths: &PathSet, out: &mut W) -> Result<()> {
    let d = match paths.records.first() {
        Some(p) => p.y_t.len(),
        None => return Ok(()),
    };
    let mut header = vec!["path".to_string(), "time".to_string()];
    header.extend((1..=d).map(|i| format!("Y{i}")));
    for i in 1..=d {
        for j in 1..=d {
            header.push(format!("Sigma{i}{j}"));
        }
    }
    writeln!(out, "{}", header.join(","))?;
    for p in &paths.records {
        for s in &p.snapshots {
            let mut row = vec![p.index.to_string(), format!("{}", s.time)];
            row.extend(s.y.iter().map(|v| format!("{v}")));
            row.extend((0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| format!("{}", s.sigma.get(i, j))));
            writeln!(out, "{}", row.join(","))?;
        }
    }
    Ok(())
}

/// One row of a path dump.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRow {
    pub path: u64,
    pub time: f64,
    pub y: Vec<f64>,
    pub sigma: DMatrix<f64>,
}

pub fn read_paths_csv<R: BufRead>(input: R) -> Result<Vec<PathRow>> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse { line: 1, msg: "empty file".into() })?;
    let header = header?;
    let cols: Vec<&str> = header.split(',').collect();
    let d = cols.iter().filter(|c| c.starts_with('Y')).count();
    if cols.len() != 2 + d + d * d || cols[0] != "path" || cols[1] != "time" {
        return Err(Error::Parse { line: 1, msg: format!("unexpected header {header}") });
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != cols.len() {
            return Err(err(format!("expected {} fields, got {}", cols.len(), f.len())));
        }
        let path = f[0].trim().parse::<u64>().map_err(|e| err(format!("path: {e}")))?;
        let nums: Vec<f64> = f[1..]
            .iter()
            .map(|v| v.trim().parse::<f64>().map_err(|e| err(format!("{v}: {e}"))))
            .collect::<Result<_>>()?;
        rows.push(PathRow {
            path,
            time: nums[0],
            y: nums[1..1 + d].to_vec(),
            sigma: DMatrix::from_row_slice(d, d, &nums[1 + d..]),
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::SubordinatorSpec;
    use crate::matrix::MeanReversionMatrix;
    use crate::model::LinOpToVec;
    use crate::quad::QuadConfig;

    fn step_a() -> ModelParams {
        let gamma = SymMat::from_2x2(0.027, 0.0, 0.0);
        let sub = SubordinatorSpec::wishart(gamma, 0.774, 2.0, SymMat::from_2x2(0.011, 0.022, 0.063)).unwrap();
        let mut p = ModelParams::new(
            DVector::zeros(2),
            MeanReversionMatrix::from_diagonal(&[-2.392, -2.392]).unwrap(),
            LinOpToVec::martingale_beta(2),
            LinOpToVec::Diagonal(vec![-3.741, -0.494]),
            SymMat::from_2x2(0.019, 0.013, 0.017),
            DVector::zeros(2),
            sub,
        )
        .unwrap();
        p.mu = p.martingale_mu(0.00676, &[0.00604, 0.00344]).unwrap();
        p
    }

    fn nondiag() -> ModelParams {
        let mut p = step_a();
        p.a = MeanReversionMatrix::new(DMatrix::from_row_slice(2, 2, &[-1.5, 0.4, -0.2, -2.0])).unwrap();
        p.sub = SubordinatorSpec::wishart(SymMat::from_2x2(0.02, 0.005, 0.01), 0.9, 3.0, SymMat::from_2x2(0.01, 0.004, 0.02)).unwrap();
        p.mu = p.martingale_mu(0.00676, &[0.00604, 0.00344]).unwrap();
        p
    }

    #[test]
    fn no_jumps_without_intensity() {
        let mut p = step_a();
        p.sub = SubordinatorSpec::wishart(SymMat::zeros(2), 0.0, 2.0, SymMat::from_2x2(0.011, 0.022, 0.063)).unwrap();
        let paths = simulate(&p, 1.0, &MCConfig::new(200, 3)).unwrap();
        assert!(paths.records.iter().all(|r| r.jump_times.is_empty()));
        assert!(paths.records.iter().all(|r| r.realized_qcov == r.sigma_plus_t));
    }

    #[test]
    fn jump_count_mean() {
        let p = step_a();
        let est = estimate(&p, 1.5, &MCConfig::new(100_000, 11), 1, |r, out| out[0] = r.jump_times.len() as f64).unwrap();
        assert!(est[0].z_score(0.774 * 1.5) < 3.0, "{:?}", est[0]);
    }

    #[test]
    fn integrated_covariance_identity() {
        for p in [step_a(), nondiag()] {
            let paths = simulate(&p, 2.0, &MCConfig::new(20, 5)).unwrap();
            for r in &paths.records {
                let rhs = p.a.sylvester_solve(&(r.sigma_t.as_matrix() - p.sigma0.as_matrix() - r.l_t.as_matrix()), false).unwrap();
                assert!((r.sigma_plus_t.as_matrix() - rhs).norm() < 1e-12);
                assert!(r.sigma_t.is_psd() && r.sigma_plus_t.is_psd() && r.realized_qcov.is_psd());
            }
        }
    }

    #[test]
    fn integrated_covariance_by_quadrature() {
        // re-propagate between recorded jumps on a dense grid
        let p = nondiag();
        let t = 1.0;
        let grid: Vec<f64> = (1..=2000).map(|k| k as f64 * t / 2000.0).collect();
        let cfg = MCConfig { t_grid: Some(grid.clone()), ..MCConfig::new(10, 9) };
        let paths = simulate(&p, t, &cfg).unwrap();
        for r in &paths.records {
            // trapezoid on the snapshot grid (jumps make Sigma piecewise smooth)
            let mut prev = (0.0, p.sigma0.as_matrix().clone());
            let mut acc = DMatrix::zeros(2, 2);
            for s in &r.snapshots {
                acc += (&prev.1 + s.sigma.as_matrix()) * (0.5 * (s.time - prev.0));
                prev = (s.time, s.sigma.as_matrix().clone());
            }
            assert!((acc - r.sigma_plus_t.as_matrix()).norm() < 2e-3 * r.sigma_plus_t.as_matrix().norm());
        }
    }

    #[test]
    fn price_identities() {
        let p = step_a();
        let cfg = MCConfig::new(100_000, 1);
        let paths = simulate(&p, 1.0, &cfg).unwrap();
        let (v, se) = mc_price(&paths, |_| 1.0, 0.05, 1.0);
        assert!((v - (-0.05f64).exp()).abs() < 1e-15 && se == 0.0);
        let s0 = 1.3249;
        let (v, se) = mc_price(&paths, |y| s0 * y[0].exp(), 0.00676, 1.0);
        assert!((v - s0 * (-0.00604f64).exp()).abs() < 3.0 * se, "{v} {se}");
    }

    #[test]
    fn expected_sigma_and_cf() {
        let p = nondiag();
        let t = 0.8;
        let args = [[0.3, -0.7], [1.1, 0.4], [-2.0, 0.5], [0.05, 2.5], [3.0, -1.0]];
        let est = estimate(&p, t, &MCConfig::new(200_000, 2), 13, |r, out| {
            out[0] = r.sigma_t.get(0, 0);
            out[1] = r.sigma_t.get(0, 1);
            out[2] = r.sigma_t.get(1, 1);
            for (k, a) in args.iter().enumerate() {
                let x = a[0] * r.y_t[0] + a[1] * r.y_t[1];
                out[3 + 2 * k] = x.cos();
                out[4 + 2 * k] = x.sin();
            }
        })
        .unwrap();
        // E Sigma_T = e^{At} Sigma0 e^{A^T t} + A^{-1}(e^{At} EL e^{A^T t} - EL)
        let el = p.sub.mean();
        let e = p.a.expm(t).unwrap();
        let mean = &e * p.sigma0.as_matrix() * e.transpose()
            + p.a.sylvester_solve(&(&e * el.as_matrix() * e.transpose() - el.as_matrix()), false).unwrap();
        for (k, (i, j)) in [(0, 0), (0, 1), (1, 1)].iter().enumerate() {
            assert!(est[k].z_score(mean[(*i, *j)]) < 3.5, "{k}: {:?} {}", est[k], mean[(*i, *j)]);
        }
        let cfg = QuadConfig::default();
        for (k, a) in args.iter().enumerate() {
            let cf = p.joint_cf(a, &DMatrix::zeros(2, 2), t, &cfg).unwrap();
            assert!(est[3 + 2 * k].z_score(cf.re) < 3.5, "re {k}");
            assert!(est[4 + 2 * k].z_score(cf.im) < 3.5, "im {k}");
        }
    }

    #[test]
    fn reproducible_across_thread_counts() {
        let p = step_a();
        let cfg = MCConfig::new(5000, 77);
        let f = |r: &PathRecord, out: &mut [f64]| out[0] = r.y_t[0];
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| estimate(&p, 1.0, &cfg, 1, f).unwrap());
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| estimate(&p, 1.0, &cfg, 1, f).unwrap());
        assert_eq!(one, three);
        let a = simulate(&p, 1.0, &cfg).unwrap();
        let b = simulate(&p, 1.0, &cfg).unwrap();
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn antithetic_pairs() {
        let p = step_a();
        let cfg = MCConfig { antithetic: true, ..MCConfig::new(10, 4) };
        let paths = simulate(&p, 1.0, &cfg).unwrap();
        assert_eq!(paths.records.len(), 10);
        for pair in paths.records.chunks(2) {
            assert_eq!(pair[0].sigma_t, pair[1].sigma_t);
            assert_ne!(pair[0].y_t, pair[1].y_t);
        }
        // variance reduction on a monotone payoff
        let payoff = |r: &PathRecord, out: &mut [f64]| out[0] = (1.3249 * r.y_t[0].exp() - 1.3).max(0.0);
        let plain = estimate(&p, 1.0, &MCConfig::new(20_000, 4), 1, payoff).unwrap()[0];
        let anti = estimate(&p, 1.0, &MCConfig { antithetic: true, ..MCConfig::new(20_000, 4) }, 1, payoff).unwrap()[0];
        assert!(anti.stderr < plain.stderr);
    }

    #[test]
    fn csv_round_trip() {
        let p = step_a();
        let cfg = MCConfig { t_grid: Some(vec![0.25, 0.5, 1.0]), ..MCConfig::new(3, 8) };
        let paths = simulate(&p, 1.0, &cfg).unwrap();
        let mut buf = Vec::new();
        write_paths_csv(&paths, &mut buf).unwrap();
        let rows = read_paths_csv(&buf[..]).unwrap();
        assert_eq!(rows.len(), 9);
        assert_eq!(rows[8].time, 1.0);
        assert_eq!(rows[8].y, paths.records[2].y_t.as_slice().to_vec());
        assert!(String::from_utf8(buf).unwrap().starts_with("path,time,Y1,Y2,Sigma11,Sigma12,Sigma21,Sigma22\n"));
        assert!(matches!(read_paths_csv("path,time,Y1,Sigma11\n0,x,1,2\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn non_integer_degrees_rejected() {
        let mut p = step_a();
        p.sub = SubordinatorSpec::wishart(SymMat::zeros(2), 1.0, 2.5, SymMat::identity(2)).unwrap();
        assert!(matches!(Simulator::new(&p), Err(Error::UnsupportedSampling(_))));
    }
}
