//! Run configuration: command-line flags layered over an optional
//! `key = value` file, then built-in defaults.

use anyhow::{anyhow, bail, Context, Result};
use flagcert::flags::{enumerate_types, parse_type};
use flagcert::rational::parse_rational;
use flagcert::sdp::{ObjectiveSpec, ParitySelection};
use flagcert::{Rational, TypeSigma};
use num_bigint::BigInt;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const THREADS_ENV: &str = "FLAGCERT_THREADS";

/// Keys accepted in a config file.
const KNOWN_KEYS: &[&str] = &[
    "preset",
    "t",
    "ell",
    "types",
    "parity",
    "complement_sharing",
    "tol",
    "denominators",
    "bound",
    "snap",
    "cache_dir",
    "no_cache",
    "threads",
];

/// Raw settings from any source, before defaults are applied.
#[derive(Clone, Debug, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key = value`", n + 1))?;
            let k = k.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&k.as_str()) {
                bail!("line {}: unknown key `{k}`", n + 1);
            }
            values.insert(k, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn set(&mut self, key: &str, value: Option<impl ToString>) {
        if let Some(v) = value {
            self.values.insert(key.to_string(), v.to_string());
        }
    }

    /// `self` wins over `base`.
    pub fn over(mut self, base: &Settings) -> Settings {
        for (k, v) in &base.values {
            self.values.entry(k.clone()).or_insert_with(|| v.clone());
        }
        self
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| anyhow!("`{key}`: {e}")))
            .transpose()
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub spec: ObjectiveSpec,
    pub tol: f64,
    pub denominators: Vec<BigInt>,
    pub bound: Rational,
    pub snap: Rational,
    pub cache_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn resolve(s: &Settings) -> Result<Self> {
        let preset = s.get("preset").unwrap_or("m4");
        let (mut spec, default_bound) = match preset {
            "m4" => (ObjectiveSpec::m4(), "1/35"),
            "goodman" => (ObjectiveSpec::goodman(), "1/4"),
            other => bail!("unknown preset `{other}` (expected m4 or goodman)"),
        };
        if let Some(t) = s.parsed("t")? {
            spec.t = t;
        }
        if let Some(ell) = s.parsed("ell")? {
            spec.ell = ell;
        }
        if let Some(types) = s.get("types") {
            spec.types = parse_type_selector(types)?;
            spec.parity = vec![
                spec.parity
                    .first()
                    .copied()
                    .unwrap_or(ParitySelection::BOTH);
                spec.types.len()
            ];
        }
        if let Some(p) = s.get("parity") {
            let sel = ParitySelection::from_code(p)?;
            spec.parity = vec![sel; spec.types.len()];
        }
        if let Some(share) = s.parsed("complement_sharing")? {
            spec.complement_sharing = share;
        }
        spec.validate()?;

        let denominators = match s.get("denominators") {
            Some(list) => list
                .split(',')
                .map(|d| parse_denominator(d.trim()))
                .collect::<Result<Vec<_>>>()?,
            None => flagcert::certify::default_denominators(),
        };
        if denominators.is_empty() {
            bail!("`denominators` is empty");
        }
        let bound = parse_quotient(s.get("bound").unwrap_or(default_bound))
            .map_err(|e| anyhow!("`bound`: {e}"))?;
        let snap = parse_rational(s.get("snap").unwrap_or("1/1000000"))
            .map_err(|e| anyhow!("`snap`: {e}"))?;
        let no_cache: bool = s.parsed("no_cache")?.unwrap_or(false);
        let cache_dir = if no_cache {
            None
        } else {
            Some(PathBuf::from(
                s.get("cache_dir").unwrap_or(".flagcert-cache"),
            ))
        };
        let threads = match s.parsed::<usize>("threads")? {
            Some(n) => Some(n),
            None => match std::env::var(THREADS_ENV) {
                Ok(v) => Some(
                    v.trim()
                        .parse()
                        .map_err(|e| anyhow!("{THREADS_ENV}: {e}"))?,
                ),
                Err(_) => None,
            },
        };
        Ok(Self {
            spec,
            tol: s.parsed("tol")?.unwrap_or(1e-9),
            denominators,
            bound,
            snap,
            cache_dir,
            threads,
        })
    }
}

/// `all:<k>` for every type of order `k`, otherwise `;`-separated type descriptors.
pub fn parse_type_selector(text: &str) -> Result<Vec<TypeSigma>> {
    if let Some(k) = text.trim().strip_prefix("all:") {
        let k: usize = k
            .trim()
            .parse()
            .map_err(|e| anyhow!("type selector `{text}`: {e}"))?;
        return Ok(enumerate_types(k)?);
    }
    text.split(';')
        .map(|t| parse_type(t.trim()).map_err(|e| anyhow!("type `{}`: {e}", t.trim())))
        .collect()
}

/// A rational, or a quotient of decimals such as `1/34.7858`.
pub fn parse_quotient(text: &str) -> Result<Rational> {
    if let Ok(r) = parse_rational(text) {
        return Ok(r);
    }
    let (n, d) = text
        .split_once('/')
        .ok_or_else(|| anyhow!("bad number `{text}`"))?;
    let n = parse_rational(n)?;
    let d = parse_rational(d)?;
    if d == Rational::from_integer(0.into()) {
        bail!("zero denominator in `{text}`");
    }
    Ok(n / d)
}

/// A positive integer, or `10^e`.
pub fn parse_denominator(text: &str) -> Result<BigInt> {
    let d: BigInt = match text.strip_prefix("10^") {
        Some(e) => num_traits::pow(BigInt::from(10), e.parse::<usize>()?),
        None => text
            .parse()
            .map_err(|_| anyhow!("bad denominator `{text}`"))?,
    };
    if d <= BigInt::from(0) {
        bail!("denominator must be positive");
    }
    Ok(d)
}
