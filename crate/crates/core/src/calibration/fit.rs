//! Model prices for FX quotes, the implied-volatility RMSE and the fit.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::black::{gk_vega, implied_vol};
use super::optimizer::{nelder_mead, NelderMeadConfig};
use super::params_io::{get_param, param_index, parse_key_values, parse_number, set_param, Market, PairKind, PARAM_NAMES};
use super::quotes::{screen_quotes, OptionQuote};
use crate::error::{Error, Result};
use crate::fourier::{price_calls, price_zero_strike_spreads, MgfEval, PriceResult, PricingConfig};
use crate::matrix::SymMat;
use crate::ou_wishart::OUW2Params;

const CALL_DAMPINGS: [f64; 4] = [1.5, 1.25, 1.1, 2.0];
const SPREAD_DAMPINGS: [f64; 3] = [1.5, 1.25, 2.0];

/// Quotes of one pair and maturity, priced together.
#[derive(Clone, Debug)]
struct Group {
    kind: PairKind,
    t: f64,
    idx: Vec<usize>,
    strikes: Vec<f64>,
}

fn group_quotes(market: &Market, quotes: &[OptionQuote]) -> Result<Vec<Group>> {
    let mut map: BTreeMap<(PairKind, u64), Group> = BTreeMap::new();
    for (i, q) in quotes.iter().enumerate() {
        let kind = market.kind(&q.pair)?;
        let g = map.entry((kind, q.t.to_bits())).or_insert_with(|| Group { kind, t: q.t, idx: Vec::new(), strikes: Vec::new() });
        g.idx.push(i);
        g.strikes.push(q.k);
    }
    Ok(map.into_values().collect())
}

fn with_dampings<T>(candidates: &[f64], mut f: impl FnMut(f64) -> Result<T>) -> Result<T> {
    let mut last = None;
    for &r in candidates {
        match f(r) {
            Err(Error::Damping(m)) => last = Some(Error::Damping(m)),
            other => return other,
        }
    }
    Err(last.unwrap_or_else(|| Error::Damping("no damping candidates".into())))
}

fn price_group(p: &OUW2Params, market: &Market, kind: PairKind, t: f64, strikes: &[f64], cfg: &PricingConfig) -> Result<Vec<PriceResult>> {
    match kind {
        PairKind::Asset(i) => {
            let mgf = MgfEval::ouw2_marginal(p, i, t)?;
            let s = -market.spots[i].ln();
            with_dampings(&CALL_DAMPINGS, |r| price_calls(&mgf, strikes, r, s, t, p.r_dom, cfg))
        }
        PairKind::Cross => {
            // (S1/S2 - K)^+ in units of asset 2 is (S1 - K S2)^+ / S2_0
            let mgf = MgfEval::ouw2_joint(p, t)?;
            let s1 = -market.spots[0].ln();
            let s2: Vec<f64> = strikes.iter().map(|k| -(k * market.spots[1]).ln()).collect();
            let v = with_dampings(&SPREAD_DAMPINGS, |r| price_zero_strike_spreads(&mgf, r, s1, &s2, t, p.r_dom, cfg))?;
            let scale = market.spots[1];
            Ok(v.into_iter().map(|x| PriceResult { price: x.price / scale, quad_error: x.quad_error / scale, ..x }).collect())
        }
    }
}

fn prices_for_groups(p: &OUW2Params, market: &Market, groups: &[Group], n: usize, cfg: &PricingConfig) -> Result<Vec<f64>> {
    let per_group: Vec<Result<Vec<PriceResult>>> = groups.par_iter().map(|g| price_group(p, market, g.kind, g.t, &g.strikes, cfg)).collect();
    let mut out = vec![f64::NAN; n];
    for (g, res) in groups.iter().zip(per_group) {
        for (&i, v) in g.idx.iter().zip(res?) {
            out[i] = v.price;
        }
    }
    Ok(out)
}

/// Price and error estimate of one call on `pair`, in the pair's domestic
/// currency.
pub fn price_option(p: &OUW2Params, market: &Market, pair: &str, k: f64, t: f64, cfg: &PricingConfig) -> Result<PriceResult> {
    let kind = market.kind(pair)?;
    Ok(price_group(p, market, kind, t, &[k], cfg)?.remove(0))
}

/// `(spot, r_dom, r_for)` of a pair under the model's rates.
pub fn pair_conventions(p: &OUW2Params, market: &Market, kind: PairKind) -> (f64, f64, f64) {
    match kind {
        PairKind::Asset(0) => (market.spots[0], p.r_dom, p.r_for1),
        PairKind::Asset(_) => (market.spots[1], p.r_dom, p.r_for2),
        PairKind::Cross => (market.cross_spot(), p.r_for2, p.r_for1),
    }
}

/// Model implied volatilities `(K, T, iv)` over a strike and maturity grid.
pub fn model_smile(p: &OUW2Params, market: &Market, pair: &str, strikes: &[f64], maturities: &[f64], cfg: &PricingConfig) -> Result<Vec<(f64, f64, f64)>> {
    let kind = market.kind(pair)?;
    let (spot, rd, rf) = pair_conventions(p, market, kind);
    let mut out = Vec::new();
    for &t in maturities {
        let prices = price_group(p, market, kind, t, strikes, cfg)?;
        for (&k, pr) in strikes.iter().zip(prices) {
            out.push((k, t, implied_vol(pr.price, spot, k, t, rd, rf)?));
        }
    }
    Ok(out)
}

/// Model prices of call quotes: direct pairs by the one-dimensional Fourier
/// call price, the cross pair as a zero-strike spread with second initial
/// value `K S^2_0`. Prices are in the quote's domestic currency.
pub fn model_prices(p: &OUW2Params, market: &Market, quotes: &[OptionQuote], cfg: &PricingConfig) -> Result<Vec<f64>> {
    let groups = group_quotes(market, quotes)?;
    prices_for_groups(p, market, &groups, quotes.len(), cfg)
}

pub fn model_price(p: &OUW2Params, market: &Market, quote: &OptionQuote, cfg: &PricingConfig) -> Result<f64> {
    Ok(model_prices(p, market, std::slice::from_ref(quote), cfg)?[0])
}

/// `sqrt(sum (a_i - b_i)^2 / N)`.
pub fn rmse_of(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

/// Implied-volatility RMSE; `+inf` if any quote fails to price or invert.
pub fn rmse(p: &OUW2Params, market: &Market, quotes: &[OptionQuote], cfg: &PricingConfig) -> f64 {
    match CalibrationData::new(market.clone(), quotes.to_vec()).and_then(|d| d.evaluate(p, Weighting::ImpliedVol, cfg)) {
        Ok(e) => e.objective,
        Err(e) => {
            log::debug!("rmse infeasible: {e}");
            f64::INFINITY
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weighting {
    /// Unweighted implied-volatility errors.
    ImpliedVol,
    /// Price errors divided by market vega.
    Vega,
}

/// Screened quotes with their market implied volatilities.
#[derive(Clone, Debug)]
pub struct CalibrationData {
    pub market: Market,
    pub quotes: Vec<OptionQuote>,
    pub market_iv: Vec<f64>,
    vega: Vec<f64>,
    groups: Vec<Group>,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub objective: f64,
    pub model_price: Vec<f64>,
    pub model_iv: Vec<f64>,
}

impl CalibrationData {
    pub fn new(market: Market, quotes: Vec<OptionQuote>) -> Result<Self> {
        let market_iv = quotes.iter().map(|q| q.market_iv()).collect::<Result<Vec<_>>>()?;
        let vega = quotes.iter().zip(&market_iv).map(|(q, &v)| gk_vega(q.spot, q.k, q.t, q.r_dom, q.r_for, v)).collect();
        let groups = group_quotes(&market, &quotes)?;
        Ok(Self { market, quotes, market_iv, vega, groups })
    }

    pub fn evaluate(&self, p: &OUW2Params, weighting: Weighting, cfg: &PricingConfig) -> Result<Evaluation> {
        let prices = prices_for_groups(p, &self.market, &self.groups, self.quotes.len(), cfg)?;
        let model_iv = self
            .quotes
            .iter()
            .zip(&prices)
            .map(|(q, &pr)| implied_vol(pr, q.spot, q.k, q.t, q.r_dom, q.r_for))
            .collect::<Result<Vec<_>>>()?;
        let objective = match weighting {
            Weighting::ImpliedVol => rmse_of(&model_iv, &self.market_iv),
            Weighting::Vega => {
                let scaled: Vec<f64> = prices.iter().zip(&self.quotes).zip(&self.vega).map(|((p, q), v)| (p - q.mid()) / v).collect();
                rmse_of(&scaled, &vec![0.0; scaled.len()])
            }
        };
        Ok(Evaluation { objective, model_price: prices, model_iv })
    }

    /// `[r_dom, r_for1, r_for2]` read off the quotes.
    pub fn rates(&self) -> Result<[f64; 3]> {
        let find = |kind: PairKind| self.quotes.iter().find(|q| self.market.kind(&q.pair).ok() == Some(kind));
        let q1 = find(PairKind::Asset(0)).ok_or_else(|| Error::Domain(format!("no {} quotes to read rates from", self.market.pairs[0])))?;
        let r_for2 = match find(PairKind::Asset(1)) {
            Some(q) => q.r_for,
            None => find(PairKind::Cross).map(|q| q.r_dom).ok_or_else(|| Error::Domain("no quotes carrying the second foreign rate".into()))?,
        };
        Ok([q1.r_dom, q1.r_for, r_for2])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variant {
    /// `a1 = a2`, `rho12 = rho21 = 0`
    A,
    /// `a1 = a2`
    B,
    /// `rho12 = rho21 = 0`
    C,
    D,
}

impl Variant {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Variant::A),
            "B" => Ok(Variant::B),
            "C" => Ok(Variant::C),
            "D" => Ok(Variant::D),
            _ => Err(Error::Validation(format!("unknown variant {s}"))),
        }
    }

    fn tie_a(self) -> bool {
        matches!(self, Variant::A | Variant::B)
    }

    fn zero_cross_leverage(self) -> bool {
        matches!(self, Variant::A | Variant::C)
    }

    /// Imposes the variant's equalities.
    pub fn enforce(self, p: &mut OUW2Params) {
        if self.tie_a() {
            p.a2 = p.a1;
        }
        if self.zero_cross_leverage() {
            p.rho12 = 0.0;
            p.rho21 = 0.0;
        }
    }
}

#[derive(Clone, Debug)]
pub struct CalibConfig {
    pub variant: Variant,
    pub initial: OUW2Params,
    pub lower: [f64; 15],
    pub upper: [f64; 15],
    pub fixed: [bool; 15],
    pub max_evals: usize,
    pub tol_obj: f64,
    pub seed: u64,
    pub max_restarts: usize,
    pub weighting: Weighting,
    pub pricing: PricingConfig,
}

/// The starting point used when none is given; rates are filled from quotes.
pub fn default_initial() -> OUW2Params {
    OUW2Params {
        a1: -2.5,
        a2: -2.5,
        rho1: -3.0,
        rho2: -0.5,
        rho12: 0.0,
        rho21: 0.0,
        gamma1: 0.020,
        gamma2: 0.011,
        lambda: 0.8,
        n: 2.0,
        theta: SymMat::from_2x2(0.010, 0.010, 0.030),
        sigma0: SymMat::from_2x2(0.020, 0.010, 0.015),
        r_dom: 0.0,
        r_for1: 0.0,
        r_for2: 0.0,
        mu: None,
    }
}

fn default_bounds() -> ([f64; 15], [f64; 15]) {
    let lower = [1e-6, -50.0, -50.0, -20.0, -20.0, -20.0, -20.0, 0.0, 0.0, 0.0, -5.0, 0.0, 1e-8, -5.0, 1e-8];
    let upper = [10.0, -0.01, -0.01, 20.0, 20.0, 20.0, 20.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0, 5.0];
    (lower, upper)
}

impl CalibConfig {
    pub fn new(variant: Variant, initial: OUW2Params) -> Self {
        let (lower, upper) = default_bounds();
        Self {
            variant,
            initial,
            lower,
            upper,
            fixed: [false; 15],
            max_evals: 5000,
            tol_obj: 1e-10,
            seed: 0,
            max_restarts: 20,
            weighting: Weighting::ImpliedVol,
            pricing: PricingConfig { tol: 1e-8, ..PricingConfig::default() },
        }
    }

    /// Reads `variant`, `init.<p>`, `lb.<p>`, `ub.<p>`, `fix.<p>`,
    /// `max_evals`, `tol_obj`, `seed`, `max_restarts` and `weighting`
    /// (`iv` or `vega`). `init.a` sets both mean reversions.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::new(Variant::A, default_initial());
        for (line, k, v) in parse_key_values(text)? {
            let perr = |msg: String| Error::Parse { line, msg };
            let num = || parse_number(line, &k, &v);
            match k.as_str() {
                "variant" => cfg.variant = Variant::parse(&v).map_err(|e| perr(e.to_string()))?,
                "max_evals" => cfg.max_evals = v.parse().map_err(|e| perr(format!("max_evals: {e}")))?,
                "max_restarts" => cfg.max_restarts = v.parse().map_err(|e| perr(format!("max_restarts: {e}")))?,
                "seed" => cfg.seed = v.parse().map_err(|e| perr(format!("seed: {e}")))?,
                "tol_obj" => cfg.tol_obj = num()?,
                "weighting" => {
                    cfg.weighting = match v.as_str() {
                        "iv" => Weighting::ImpliedVol,
                        "vega" => Weighting::Vega,
                        _ => return Err(perr(format!("weighting must be iv or vega, got {v}"))),
                    }
                }
                "init.a" => {
                    let x = num()?;
                    cfg.initial.a1 = x;
                    cfg.initial.a2 = x;
                }
                _ => {
                    let (prefix, name) = k.split_once('.').ok_or_else(|| perr(format!("unknown key {k}")))?;
                    let idx = param_index(name).ok_or_else(|| perr(format!("unknown parameter {name}")))?;
                    match prefix {
                        "init" => set_param(&mut cfg.initial, idx, num()?),
                        "lb" => cfg.lower[idx] = num()?,
                        "ub" => cfg.upper[idx] = num()?,
                        "fix" => {
                            cfg.fixed[idx] = match v.as_str() {
                                "true" | "1" | "yes" => true,
                                "false" | "0" | "no" => false,
                                _ => return Err(perr(format!("fix.{name} must be true or false"))),
                            }
                        }
                        _ => return Err(perr(format!("unknown key {k}"))),
                    }
                }
            }
        }
        for i in 0..15 {
            if !(cfg.lower[i] <= cfg.upper[i]) {
                return Err(Error::Validation(format!("bounds for {} are empty", PARAM_NAMES[i])));
            }
        }
        Ok(cfg)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Coord {
    Scalar(usize),
    /// Cholesky factor entry `(l11, l21, l22)[k]` of Theta (base 9) or Sigma0 (base 12).
    Chol { base: usize, k: usize },
}

/// Map between free optimizer coordinates and parameter records.
struct Layout {
    coords: Vec<Coord>,
    base: OUW2Params,
    variant: Variant,
}

fn chol(m: &SymMat) -> [f64; 3] {
    let l11 = m.get(0, 0).max(0.0).sqrt();
    let l21 = if l11 > 0.0 { m.get(0, 1) / l11 } else { 0.0 };
    let l22 = (m.get(1, 1) - l21 * l21).max(0.0).sqrt();
    [l11, l21, l22]
}

impl Layout {
    fn new(cfg: &CalibConfig) -> Self {
        let mut base = cfg.initial.clone();
        cfg.variant.enforce(&mut base);
        let tied = |i: usize| (cfg.variant.tie_a() && i == 2) || (cfg.variant.zero_cross_leverage() && (i == 5 || i == 6));
        let mut coords = Vec::new();
        for i in 0..15 {
            if cfg.fixed[i] || tied(i) {
                continue;
            }
            let block = if (9..12).contains(&i) { Some(9) } else if (12..15).contains(&i) { Some(12) } else { None };
            match block {
                Some(b) if (b..b + 3).all(|j| !cfg.fixed[j]) => {
                    if i == b {
                        coords.extend((0..3).map(|k| Coord::Chol { base: b, k }));
                    }
                }
                _ => coords.push(Coord::Scalar(i)),
            }
        }
        Self { coords, base, variant: cfg.variant }
    }

    fn encode(&self, p: &OUW2Params) -> Vec<f64> {
        self.coords
            .iter()
            .map(|c| match *c {
                Coord::Scalar(i) => get_param(p, i),
                Coord::Chol { base, k } => chol(if base == 9 { &p.theta } else { &p.sigma0 })[k],
            })
            .collect()
    }

    fn decode(&self, z: &[f64]) -> OUW2Params {
        let mut p = self.base.clone();
        let mut l = [[f64::NAN; 3]; 2];
        for (c, &v) in self.coords.iter().zip(z) {
            match *c {
                Coord::Scalar(i) => set_param(&mut p, i, v),
                Coord::Chol { base, k } => l[(base - 9) / 3][k] = v,
            }
        }
        for (b, f) in l.iter().enumerate() {
            if f[0].is_nan() {
                continue;
            }
            let m = SymMat::from_2x2(f[0] * f[0], f[0] * f[1], f[1] * f[1] + f[2] * f[2]);
            if b == 0 {
                p.theta = m;
            } else {
                p.sigma0 = m;
            }
        }
        self.variant.enforce(&mut p);
        p
    }

    fn boxes(&self, cfg: &CalibConfig) -> (Vec<f64>, Vec<f64>) {
        self.coords
            .iter()
            .map(|c| match *c {
                Coord::Scalar(i) => (cfg.lower[i], cfg.upper[i]),
                Coord::Chol { base, k } => {
                    let floor = if base == 9 { 0.0 } else { 1e-6 };
                    let u11 = cfg.upper[base].max(0.0).sqrt();
                    let u22 = cfg.upper[base + 2].max(0.0).sqrt();
                    match k {
                        0 => (cfg.lower[base].max(0.0).sqrt().max(floor), u11),
                        1 => (-u22, u22),
                        _ => (floor, u22),
                    }
                }
            })
            .unzip()
    }

    fn steps(&self, z0: &[f64]) -> Vec<f64> {
        self.coords
            .iter()
            .zip(z0)
            .map(|(c, v)| {
                let floor = match *c {
                    Coord::Scalar(0) => 0.05,
                    Coord::Scalar(7) | Coord::Scalar(8) => 0.005,
                    Coord::Scalar(i) if i >= 9 => 0.002,
                    Coord::Scalar(_) => 0.1,
                    Coord::Chol { .. } => 0.01,
                };
                (0.1 * v.abs()).max(floor)
            })
            .collect()
    }
}

fn in_bounds(p: &OUW2Params, cfg: &CalibConfig) -> bool {
    (0..15).all(|i| {
        let v = get_param(p, i);
        v >= cfg.lower[i] - 1e-12 && v <= cfg.upper[i] + 1e-12
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub pair: String,
    pub t: f64,
    pub k: f64,
    pub market_iv: f64,
    pub model_iv: f64,
    pub abs_err: f64,
}

#[derive(Clone, Debug)]
pub struct CalibrationReport {
    pub params: OUW2Params,
    pub variant: Variant,
    pub objective: f64,
    pub rmse: f64,
    /// `(pair, rmse, count)`
    pub per_pair: Vec<(String, f64, usize)>,
    pub rows: Vec<ReportRow>,
    pub evaluations: usize,
    pub restarts: usize,
    pub trace: Vec<f64>,
    pub wall_clock: Duration,
    pub dropped: Vec<(OptionQuote, String)>,
}

impl CalibrationReport {
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "pair,T,K,market_iv,model_iv,abs_err")?;
        for r in &self.rows {
            writeln!(out, "{},{},{},{},{},{}", r.pair, r.t, r.k, r.market_iv, r.model_iv, r.abs_err)?;
        }
        Ok(())
    }
}

/// Report rows and the per-pair split for a parameter set.
pub fn assess(p: &OUW2Params, data: &CalibrationData, cfg: &PricingConfig) -> Result<(Vec<ReportRow>, Vec<(String, f64, usize)>, f64)> {
    let e = data.evaluate(p, Weighting::ImpliedVol, cfg)?;
    let rows: Vec<ReportRow> = data
        .quotes
        .iter()
        .zip(data.market_iv.iter().zip(&e.model_iv))
        .map(|(q, (&m, &v))| ReportRow { pair: q.pair.clone(), t: q.t, k: q.k, market_iv: m, model_iv: v, abs_err: (v - m).abs() })
        .collect();
    let per_pair = data
        .market
        .pairs
        .iter()
        .filter_map(|name| {
            let errs: Vec<f64> = rows.iter().filter(|r| &r.pair == name).map(|r| r.abs_err).collect();
            (!errs.is_empty()).then(|| (name.clone(), rmse_of(&errs, &vec![0.0; errs.len()]), errs.len()))
        })
        .collect();
    Ok((rows, per_pair, e.objective))
}

/// Fits the model to the quotes by minimizing the RMSE under the variant's
/// restrictions. Quotes failing no-arbitrage screening are dropped. Model
/// rates are read from the quotes.
pub fn calibrate(cfg: &CalibConfig, market: &Market, quotes: Vec<OptionQuote>) -> Result<CalibrationReport> {
    let started = Instant::now();
    let (kept, dropped) = screen_quotes(quotes);
    if kept.is_empty() {
        return Err(Error::CalibrationFailure("no quotes left after screening".into()));
    }
    let data = CalibrationData::new(market.clone(), kept)?;
    let [r_dom, r_for1, r_for2] = data.rates()?;
    let mut cfg = cfg.clone();
    cfg.initial.r_dom = r_dom;
    cfg.initial.r_for1 = r_for1;
    cfg.initial.r_for2 = r_for2;
    cfg.initial.mu = None;
    let layout = Layout::new(&cfg);
    let z0 = layout.encode(&layout.base);
    let (lower, upper) = layout.boxes(&cfg);
    let step = layout.steps(&z0);
    let objective = |z: &[f64]| -> f64 {
        let p = layout.decode(z);
        if !in_bounds(&p, &cfg) || p.validate().is_err() {
            return f64::INFINITY;
        }
        match data.evaluate(&p, cfg.weighting, &cfg.pricing) {
            Ok(e) => e.objective,
            Err(e) => {
                log::debug!("infeasible parameters: {e}");
                f64::INFINITY
            }
        }
    };
    let nm = NelderMeadConfig { max_evals: cfg.max_evals, tol_f: cfg.tol_obj, tol_x: 1e-9, max_restarts: cfg.max_restarts };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = nelder_mead(objective, &z0, &lower, &upper, &step, &nm, &mut rng);
    if !m.f.is_finite() {
        return Err(Error::CalibrationFailure(format!("no feasible parameter set found in {} evaluations; trace {:?}", m.evals, m.trace)));
    }
    let params = layout.decode(&m.x);
    let (rows, per_pair, rmse) = assess(&params, &data, &cfg.pricing)?;
    log::info!("variant {:?}: objective {:.6e} after {} evaluations, {} restarts", cfg.variant, m.f, m.evals, m.restarts);
    Ok(CalibrationReport {
        params,
        variant: cfg.variant,
        objective: m.f,
        rmse,
        per_pair,
        rows,
        evaluations: m.evals,
        restarts: m.restarts,
        trace: m.trace,
        wall_clock: started.elapsed(),
        dropped,
    })
}

/// Quotes generated from a model at mid prices with a symmetric relative
/// spread. Strikes sit at `F exp(0.1 z sqrt T)` for each `z`.
pub fn synthetic_quotes(p: &OUW2Params, market: &Market, maturities: &[f64], z: &[f64], spread: f64, cfg: &PricingConfig) -> Result<Vec<OptionQuote>> {
    let mut quotes = Vec::new();
    for pair in &market.pairs {
        let (spot, rd, rf) = pair_conventions(p, market, market.kind(pair)?);
        for &t in maturities {
            let fwd = spot * ((rd - rf) * t).exp();
            for &zz in z {
                let k = fwd * (zz * 0.1 * t.sqrt()).exp();
                quotes.push(OptionQuote { pair: pair.clone(), t, k, bid: 0.0, ask: 0.0, spot, r_dom: rd, r_for: rf });
            }
        }
    }
    let prices = model_prices(p, market, &quotes, cfg)?;
    for (q, pr) in quotes.iter_mut().zip(prices) {
        q.bid = pr * (1.0 - spread);
        q.ask = pr * (1.0 + spread);
    }
    Ok(quotes)
}
