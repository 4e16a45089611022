//! Flat `key = value` files for model parameters and market data.

use std::collections::BTreeMap;
use std::path::Path;

use super::quotes::OptionQuote;
use crate::error::{Error, Result};
use crate::matrix::SymMat;
use crate::ou_wishart::OUW2Params;

/// Spots of the two dollar pairs and the names used in quote files.
#[derive(Clone, Debug, PartialEq)]
pub struct Market {
    /// `[asset 1, asset 2, cross = asset 1 / asset 2]`
    pub pairs: [String; 3],
    pub spots: [f64; 2],
}

impl Market {
    pub fn new(pairs: [&str; 3], spots: [f64; 2]) -> Result<Self> {
        if !spots.iter().all(|s| *s > 0.0 && s.is_finite()) {
            return Err(Error::Validation(format!("spots must be positive, got {spots:?}")));
        }
        Ok(Self { pairs: pairs.map(String::from), spots })
    }

    pub fn eur_gbp_usd(spots: [f64; 2]) -> Result<Self> {
        Self::new(["EURUSD", "GBPUSD", "EURGBP"], spots)
    }

    /// Spots read off direct-pair quotes; a missing second spot is implied
    /// from a cross quote.
    pub fn from_quotes(pairs: [&str; 3], quotes: &[OptionQuote]) -> Result<Self> {
        let spot = |name: &str| quotes.iter().find(|q| q.pair == name).map(|q| q.spot);
        let s1 = spot(pairs[0]).ok_or_else(|| Error::Domain(format!("no {} quote to read its spot from", pairs[0])))?;
        let s2 = match spot(pairs[1]) {
            Some(s) => s,
            None => s1 / spot(pairs[2]).ok_or_else(|| Error::Domain(format!("no {} or {} quote for the second spot", pairs[1], pairs[2])))?,
        };
        Self::new(pairs, [s1, s2])
    }

    pub fn cross_spot(&self) -> f64 {
        self.spots[0] / self.spots[1]
    }

    pub fn kind(&self, pair: &str) -> Result<PairKind> {
        match self.pairs.iter().position(|p| p == pair) {
            Some(0) => Ok(PairKind::Asset(0)),
            Some(1) => Ok(PairKind::Asset(1)),
            Some(_) => Ok(PairKind::Cross),
            None => Err(Error::Domain(format!("unknown pair {pair}; expected one of {:?}", self.pairs))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairKind {
    Asset(usize),
    Cross,
}

/// A parameter file: the model plus optional market data.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    pub params: OUW2Params,
    pub market: Option<Market>,
}

/// `(line number, key, value)` triples; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected key = value, got {line:?}") })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(Error::Parse { line: i + 1, msg: "empty key or value".into() });
        }
        out.push((i + 1, k.to_string(), v.to_string()));
    }
    Ok(out)
}

pub fn parse_number(line: usize, key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>().map_err(|e| Error::Parse { line, msg: format!("{key}: {e}") })
}

/// Canonical names of the fifteen model coordinates.
pub const PARAM_NAMES: [&str; 15] = [
    "lambda", "a1", "a2", "rho1", "rho2", "rho12", "rho21", "gamma1", "gamma2", "theta11", "theta12", "theta22", "sigma0_11", "sigma0_12",
    "sigma0_22",
];

pub fn param_index(name: &str) -> Option<usize> {
    PARAM_NAMES.iter().position(|p| *p == name)
}

pub fn get_param(p: &OUW2Params, idx: usize) -> f64 {
    match idx {
        0 => p.lambda,
        1 => p.a1,
        2 => p.a2,
        3 => p.rho1,
        4 => p.rho2,
        5 => p.rho12,
        6 => p.rho21,
        7 => p.gamma1,
        8 => p.gamma2,
        9 => p.theta.get(0, 0),
        10 => p.theta.get(0, 1),
        11 => p.theta.get(1, 1),
        12 => p.sigma0.get(0, 0),
        13 => p.sigma0.get(0, 1),
        14 => p.sigma0.get(1, 1),
        _ => panic!("parameter index {idx} out of range"),
    }
}

pub fn set_param(p: &mut OUW2Params, idx: usize, v: f64) {
    let with = |m: &SymMat, i: usize, j: usize| {
        let mut e = [m.get(0, 0), m.get(0, 1), m.get(1, 1)];
        e[i + j] = v;
        SymMat::from_2x2(e[0], e[1], e[2])
    };
    match idx {
        0 => p.lambda = v,
        1 => p.a1 = v,
        2 => p.a2 = v,
        3 => p.rho1 = v,
        4 => p.rho2 = v,
        5 => p.rho12 = v,
        6 => p.rho21 = v,
        7 => p.gamma1 = v,
        8 => p.gamma2 = v,
        9 => p.theta = with(&p.theta, 0, 0),
        10 => p.theta = with(&p.theta, 0, 1),
        11 => p.theta = with(&p.theta, 1, 1),
        12 => p.sigma0 = with(&p.sigma0, 0, 0),
        13 => p.sigma0 = with(&p.sigma0, 0, 1),
        14 => p.sigma0 = with(&p.sigma0, 1, 1),
        _ => panic!("parameter index {idx} out of range"),
    }
}

fn blank_params() -> OUW2Params {
    OUW2Params {
        a1: f64::NAN,
        a2: f64::NAN,
        rho1: 0.0,
        rho2: 0.0,
        rho12: 0.0,
        rho21: 0.0,
        gamma1: 0.0,
        gamma2: 0.0,
        lambda: f64::NAN,
        n: 2.0,
        theta: SymMat::from_2x2(f64::NAN, f64::NAN, f64::NAN),
        sigma0: SymMat::from_2x2(f64::NAN, f64::NAN, f64::NAN),
        r_dom: 0.0,
        r_for1: 0.0,
        r_for2: 0.0,
        mu: None,
    }
}

/// Parses a parameter file. `a` sets both mean reversions; `rho12`, `rho21`,
/// `gamma*` and the rates default to zero, `n` to 2. Drifts are risk neutral
/// unless both `mu1` and `mu2` are given.
pub fn parse_model(text: &str) -> Result<ModelFile> {
    let mut p = blank_params();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let (mut mu1, mut mu2) = (None, None);
    let mut spots = [None, None];
    let mut pairs = [String::from("EURUSD"), String::from("GBPUSD"), String::from("EURGBP")];
    for (line, k, v) in parse_key_values(text)? {
        if let Some(prev) = seen.insert(k.clone(), line) {
            return Err(Error::Parse { line, msg: format!("duplicate key {k} (first on line {prev})") });
        }
        match k.as_str() {
            "pair1" => pairs[0] = v,
            "pair2" => pairs[1] = v,
            "cross" => pairs[2] = v,
            _ => {
                let x = parse_number(line, &k, &v)?;
                match k.as_str() {
                    "a" => {
                        p.a1 = x;
                        p.a2 = x;
                    }
                    "n" => p.n = x,
                    "r_dom" => p.r_dom = x,
                    "r_for1" => p.r_for1 = x,
                    "r_for2" => p.r_for2 = x,
                    "mu1" => mu1 = Some(x),
                    "mu2" => mu2 = Some(x),
                    "spot1" => spots[0] = Some(x),
                    "spot2" => spots[1] = Some(x),
                    name => match param_index(name) {
                        Some(i) => set_param(&mut p, i, x),
                        None => return Err(Error::Parse { line, msg: format!("unknown key {name}") }),
                    },
                }
            }
        }
    }
    if seen.contains_key("a") && (seen.contains_key("a1") || seen.contains_key("a2")) {
        return Err(Error::Parse { line: seen["a"], msg: "a conflicts with a1/a2".into() });
    }
    for req in ["lambda", "theta11", "theta12", "theta22", "sigma0_11", "sigma0_12", "sigma0_22"] {
        if !seen.contains_key(req) {
            return Err(Error::Parse { line: 0, msg: format!("missing key {req}") });
        }
    }
    if !(seen.contains_key("a") || seen.contains_key("a1") && seen.contains_key("a2")) {
        return Err(Error::Parse { line: 0, msg: "missing key a (or a1 and a2)".into() });
    }
    p.mu = match (mu1, mu2) {
        (Some(a), Some(b)) => Some([a, b]),
        (None, None) => None,
        _ => return Err(Error::Parse { line: seen.get("mu1").or(seen.get("mu2")).copied().unwrap_or(0), msg: "mu1 and mu2 must be given together".into() }),
    };
    p.validate()?;
    if p.mu.is_none() {
        p.fx_drifts()?;
    }
    let market = match spots {
        [Some(a), Some(b)] => Some(Market::new([&pairs[0], &pairs[1], &pairs[2]], [a, b])?),
        [None, None] => None,
        _ => return Err(Error::Parse { line: 0, msg: "spot1 and spot2 must be given together".into() }),
    };
    Ok(ModelFile { params: p, market })
}

pub fn format_model(m: &ModelFile) -> String {
    let p = &m.params;
    let mut s = String::new();
    for (i, name) in PARAM_NAMES.iter().enumerate() {
        s.push_str(&format!("{name} = {}\n", get_param(p, i)));
    }
    s.push_str(&format!("n = {}\nr_dom = {}\nr_for1 = {}\nr_for2 = {}\n", p.n, p.r_dom, p.r_for1, p.r_for2));
    if let Some(mu) = p.mu {
        s.push_str(&format!("mu1 = {}\nmu2 = {}\n", mu[0], mu[1]));
    }
    if let Some(mk) = &m.market {
        s.push_str(&format!(
            "spot1 = {}\nspot2 = {}\npair1 = {}\npair2 = {}\ncross = {}\n",
            mk.spots[0], mk.spots[1], mk.pairs[0], mk.pairs[1], mk.pairs[2]
        ));
    }
    s
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_model(&text)
}

pub fn save_model(m: &ModelFile, path: &Path) -> Result<()> {
    std::fs::write(path, format_model(m)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}
