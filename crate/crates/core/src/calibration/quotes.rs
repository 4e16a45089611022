//! Option quotes: CSV input/output and no-arbitrage screening.

use std::io::{BufRead, Write};

use super::black::{call_bounds, implied_vol};
use crate::error::{Error, Result};

pub const QUOTE_HEADER: &str = "pair,maturity_years,strike,type,bid,ask,spot,r_dom,r_for";

#[derive(Clone, Debug, PartialEq)]
pub struct OptionQuote {
    pub pair: String,
    pub t: f64,
    pub k: f64,
    pub bid: f64,
    pub ask: f64,
    pub spot: f64,
    pub r_dom: f64,
    pub r_for: f64,
}

impl OptionQuote {
    pub fn mid(&self) -> f64 {
        0.5 * (self.bid + self.ask)
    }

    pub fn market_iv(&self) -> Result<f64> {
        implied_vol(self.mid(), self.spot, self.k, self.t, self.r_dom, self.r_for)
    }

    /// Reason the quote fails screening, if any.
    pub fn screen(&self) -> Option<String> {
        if self.bid > self.ask {
            return Some(format!("crossed market bid {} > ask {}", self.bid, self.ask));
        }
        let (lo, hi) = call_bounds(self.spot, self.k, self.t, self.r_dom, self.r_for);
        let mid = self.mid();
        if !(mid > lo && mid < hi) {
            return Some(format!("mid {mid} outside no-arbitrage band ({lo}, {hi})"));
        }
        None
    }
}

pub fn read_quotes_csv<R: BufRead>(input: R) -> Result<Vec<OptionQuote>> {
    let mut out = Vec::new();
    let mut header_seen = false;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        if !header_seen {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.join(",") != QUOTE_HEADER {
                return Err(err(format!("expected header {QUOTE_HEADER}")));
            }
            header_seen = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 9 {
            return Err(err(format!("expected 9 fields, got {}", f.len())));
        }
        if !f[3].eq_ignore_ascii_case("call") {
            return Err(err(format!("unsupported option type {}", f[3])));
        }
        let num = |j: usize, name: &str| f[j].parse::<f64>().map_err(|e| err(format!("{name}: {e}")));
        let q = OptionQuote {
            pair: f[0].to_string(),
            t: num(1, "maturity_years")?,
            k: num(2, "strike")?,
            bid: num(4, "bid")?,
            ask: num(5, "ask")?,
            spot: num(6, "spot")?,
            r_dom: num(7, "r_dom")?,
            r_for: num(8, "r_for")?,
        };
        if !(q.t > 0.0 && q.k > 0.0 && q.spot > 0.0) {
            return Err(err("maturity, strike and spot must be positive".into()));
        }
        out.push(q);
    }
    if !header_seen {
        return Err(Error::Parse { line: 1, msg: "missing header".into() });
    }
    Ok(out)
}

pub fn write_quotes_csv<W: Write>(quotes: &[OptionQuote], out: &mut W) -> Result<()> {
    writeln!(out, "{QUOTE_HEADER}")?;
    for q in quotes {
        writeln!(out, "{},{},{},call,{},{},{},{},{}", q.pair, q.t, q.k, q.bid, q.ask, q.spot, q.r_dom, q.r_for)?;
    }
    Ok(())
}

/// Splits quotes into those passing screening and the rejected ones, logging
/// a warning for each rejection.
pub fn screen_quotes(quotes: Vec<OptionQuote>) -> (Vec<OptionQuote>, Vec<(OptionQuote, String)>) {
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for q in quotes {
        match q.screen() {
            None => kept.push(q),
            Some(why) => {
                log::warn!("dropping {} T={} K={}: {why}", q.pair, q.t, q.k);
                dropped.push((q, why));
            }
        }
    }
    (kept, dropped)
}
