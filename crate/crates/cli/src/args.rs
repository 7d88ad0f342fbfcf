//! Value parsers for command-line arguments.

use num_bigint::BigUint;
use scengen::HorizonSpec;

/// `H`, `LO..HI` (inclusive) or a comma-separated list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Horizons {
    One(usize),
    Range(usize, usize),
    List(Vec<usize>),
}

impl Horizons {
    pub fn values(&self) -> Vec<usize> {
        match self {
            Horizons::One(h) => vec![*h],
            Horizons::Range(lo, hi) => (*lo..=*hi).collect(),
            Horizons::List(v) => v.clone(),
        }
    }

    pub fn max(&self) -> usize {
        self.values().into_iter().max().unwrap_or(0)
    }

    pub fn to_spec(&self) -> Result<HorizonSpec, String> {
        match self {
            Horizons::One(h) => Ok(HorizonSpec::Fixed(*h)),
            Horizons::Range(lo, hi) => Ok(HorizonSpec::Range(*lo, *hi)),
            Horizons::List(_) => Err("sampling takes one horizon or a range LO..HI".into()),
        }
    }
}

fn number(s: &str) -> Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))
}

pub fn horizons(s: &str) -> Result<Horizons, String> {
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (number(lo)?, number(hi.trim_start_matches('='))?);
        if lo > hi {
            return Err(format!("empty horizon range {lo}..{hi}"));
        }
        return Ok(Horizons::Range(lo, hi));
    }
    if s.contains(',') {
        let v = s.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
        return Ok(Horizons::List(v));
    }
    number(s).map(Horizons::One)
}

pub fn big(s: &str) -> Result<BigUint, String> {
    s.parse()
        .map_err(|_| format!("`{s}` is not a non-negative decimal integer"))
}

/// Byte count with an optional `K`, `M` or `G` suffix (powers of 1024).
pub fn bytes(s: &str) -> Result<usize, String> {
    let t = s.trim();
    let (digits, shift) = match t.chars().last().map(|c| c.to_ascii_uppercase()) {
        Some('K') => (&t[..t.len() - 1], 10),
        Some('M') => (&t[..t.len() - 1], 20),
        Some('G') => (&t[..t.len() - 1], 30),
        _ => (t, 0),
    };
    let n = number(digits)?;
    n.checked_mul(1usize << shift)
        .ok_or_else(|| format!("`{s}` is too large"))
}

/// `J/K`: part `J` (0-based) of `K` equal index ranges.
pub fn shard(s: &str) -> Result<(usize, usize), String> {
    let (j, k) = s
        .split_once('/')
        .ok_or_else(|| format!("`{s}` is not of the form J/K"))?;
    let (j, k) = (number(j)?, number(k)?);
    if k == 0 || j >= k {
        return Err(format!("shard {j}/{k} does not exist"));
    }
    Ok((j, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizon_forms() {
        assert_eq!(horizons("7"), Ok(Horizons::One(7)));
        assert_eq!(horizons("2..4").unwrap().values(), [2, 3, 4]);
        assert_eq!(horizons("2..=4"), Ok(Horizons::Range(2, 4)));
        assert_eq!(horizons("10,30,20").unwrap().max(), 30);
        assert!(horizons("5..1").is_err());
        assert!(horizons("x").is_err());
        assert!(Horizons::List(vec![1]).to_spec().is_err());
    }

    #[test]
    fn byte_sizes() {
        assert_eq!(bytes("512"), Ok(512));
        assert_eq!(bytes("2k"), Ok(2048));
        assert_eq!(bytes("1G"), Ok(1 << 30));
        assert!(bytes("M").is_err());
    }

    #[test]
    fn shards() {
        assert_eq!(shard("1/4"), Ok((1, 4)));
        assert!(shard("4/4").is_err());
        assert!(shard("1").is_err());
    }
}
