//! Argument parsing for momenta, energy lists, ranges and couplings.

use std::f64::consts::PI;
use std::str::FromStr;

use friedrichs::lattice::{wrap, TorusPoint};

use crate::Failure;

/// A decimal, or `pi` with optional sign and factor: `pi`, `-pi`, `0.5pi`.
fn angle(tok: &str) -> Option<f64> {
    let t = tok.trim().to_ascii_lowercase();
    match t.strip_suffix("pi") {
        Some(f) => {
            let f = f.trim_end_matches('*');
            match f {
                "" | "+" => Some(PI),
                "-" => Some(-PI),
                _ => f.parse::<f64>().ok().map(|x| x * PI),
            }
        }
        None => t.parse().ok(),
    }
}

pub fn parse_k(s: &str) -> Result<TorusPoint, Failure> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || Failure::Usage(format!("--k expects three comma separated angles, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let mut v = [0.0; 3];
    for (slot, p) in v.iter_mut().zip(&parts) {
        *slot = angle(p).ok_or_else(bad)?;
    }
    Ok(wrap(v)?)
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("not a number: `{t}`"))))
        .collect()
}

/// `v` or `start:end`.
pub fn parse_range<T: Copy>(s: &str, item: impl Fn(&str) -> Option<T>) -> Result<(T, T), Failure> {
    let bad = || Failure::Usage(format!("expected `v` or `start:end`, got `{s}`"));
    match s.split_once(':') {
        Some((a, b)) => Ok((item(a).ok_or_else(bad)?, item(b).ok_or_else(bad)?)),
        None => {
            let v = item(s).ok_or_else(bad)?;
            Ok((v, v))
        }
    }
}

/// A coupling constant, either absolute or as a multiple of μ₀.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Coupling {
    Value(f64),
    TimesMu0(f64),
}

impl Coupling {
    pub fn parse(s: &str) -> Option<Coupling> {
        let t = s.trim().to_ascii_lowercase();
        match t.strip_suffix("mu0") {
            Some("") => Some(Coupling::TimesMu0(1.0)),
            Some(f) => f.trim_end_matches('*').parse().ok().map(Coupling::TimesMu0),
            None => t.parse().ok().map(Coupling::Value),
        }
    }

    pub fn needs_mu0(&self) -> bool {
        matches!(self, Coupling::TimesMu0(_))
    }

    pub fn resolve<E>(self, mu0: impl FnOnce() -> Result<f64, E>) -> Result<f64, E> {
        match self {
            Coupling::Value(v) => Ok(v),
            Coupling::TimesMu0(f) => Ok(f * mu0()?),
        }
    }
}

impl FromStr for Coupling {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Coupling::parse(s).ok_or_else(|| format!("expected a number or a multiple of mu0, got `{s}`"))
    }
}
