//! Text formats for channels and datasets.
//!
//! Channel files carry a `kind:` tag followed by kind-specific lines:
//!
//! ```text
//! kind: discrete
//! emission: + -
//! Ill 0.9 0.1
//! Healthy 0.1 0.9
//! ```
//!
//! `kind: gaussian` takes a `gaussian:` section of `state mu sigma` lines,
//! `kind: identity` a `states:` line, and `kind: binary_test` the two
//! error rates `eps1:` and `eps2:`. Blank lines and `#` comments are ignored.
//!
//! Datasets start with `#kind: discrete` or `#kind: continuous` and hold
//! one observation per line.

use std::fmt;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use latent_idm::{
    binary_test_channel, Channel, DiscreteChannel, GaussianChannel, IdentityChannel,
    ManifestDataset, Observation, ObservationKind,
};
use serde::Serialize;

/// A channel together with the names of its latent states and symbols.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedChannel {
    pub states: Vec<String>,
    /// Empty for continuous channels.
    pub symbols: Vec<String>,
    pub channel: Channel,
}

impl NamedChannel {
    pub fn k(&self) -> usize {
        self.channel.k()
    }

    pub fn identity(k: usize) -> Result<Self> {
        let names: Vec<String> = (1..=k).map(|i| i.to_string()).collect();
        Ok(Self {
            states: names.clone(),
            symbols: names,
            channel: Channel::Identity(IdentityChannel::new(k)?),
        })
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }
}

#[derive(Debug)]
struct LineError {
    line: usize,
    message: String,
}

impl fmt::Display for LineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for LineError {}

fn at(line: usize, message: impl Into<String>) -> anyhow::Error {
    LineError {
        line,
        message: message.into(),
    }
    .into()
}

/// Non-blank, non-comment lines with their 1-based numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(line: usize, word: &str) -> Result<f64> {
    word.parse::<f64>()
        .map_err(|_| at(line, format!("expected a number, found `{word}`")))
}

fn split_key(line: &str) -> Option<(&str, &str)> {
    let (key, rest) = line.split_once(':')?;
    let key = key.trim();
    if key.is_empty() || key.contains(char::is_whitespace) {
        return None;
    }
    Some((key, rest.trim()))
}

pub fn parse_channel(text: &str) -> Result<NamedChannel> {
    let mut lines = content_lines(text);
    let (first, head) = lines
        .next()
        .ok_or_else(|| anyhow!("channel file is empty"))?;
    let kind = match split_key(head) {
        Some(("kind", kind)) => kind.to_string(),
        _ => return Err(at(first, "expected `kind:` tag")),
    };
    let body: Vec<(usize, &str)> = lines.collect();
    match kind.as_str() {
        "discrete" => parse_discrete(first, &body),
        "gaussian" => parse_gaussian(first, &body),
        "identity" => parse_identity(first, &body),
        "binary_test" => parse_binary_test(first, &body),
        other => Err(at(
            first,
            format!("unknown channel kind `{other}` (discrete, gaussian, identity, binary_test)"),
        )),
    }
}

fn parse_states_line(body: &[(usize, &str)]) -> Option<(usize, Vec<String>)> {
    body.iter().find_map(|&(n, l)| match split_key(l) {
        Some(("states", rest)) => Some((n, rest.split_whitespace().map(String::from).collect())),
        _ => None,
    })
}

fn parse_discrete(kind_line: usize, body: &[(usize, &str)]) -> Result<NamedChannel> {
    let (header_at, symbols) = body
        .iter()
        .find_map(|&(n, l)| match split_key(l) {
            Some(("emission", rest)) => Some((
                n,
                rest.split_whitespace()
                    .map(String::from)
                    .collect::<Vec<_>>(),
            )),
            _ => None,
        })
        .ok_or_else(|| at(kind_line, "discrete channel needs an `emission:` header"))?;
    if symbols.is_empty() {
        return Err(at(header_at, "`emission:` header lists no symbols"));
    }
    check_unique(header_at, &symbols, "symbol")?;
    let mut states = Vec::new();
    let mut rows = Vec::new();
    for &(n, l) in body.iter().filter(|(n, _)| *n > header_at) {
        let words: Vec<&str> = l.split_whitespace().collect();
        if words.len() != symbols.len() + 1 {
            return Err(at(
                n,
                format!(
                    "expected a state name and {} probabilities, found {} fields",
                    symbols.len(),
                    words.len()
                ),
            ));
        }
        states.push(words[0].to_string());
        rows.push(
            words[1..]
                .iter()
                .map(|w| parse_f64(n, w))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    if let Some(&(n, l)) = body.iter().find(|(n, _)| *n < header_at) {
        return Err(at(
            n,
            format!("unexpected line before `emission:` header: `{l}`"),
        ));
    }
    check_unique(header_at, &states, "state")?;
    let channel =
        DiscreteChannel::new(rows).with_context(|| format!("line {header_at}: emission matrix"))?;
    Ok(NamedChannel {
        states,
        symbols,
        channel: Channel::Discrete(channel),
    })
}

fn parse_gaussian(kind_line: usize, body: &[(usize, &str)]) -> Result<NamedChannel> {
    let mut states = Vec::new();
    let mut params = Vec::new();
    let mut in_section = false;
    for &(n, l) in body {
        let row = match split_key(l) {
            Some(("gaussian", rest)) => {
                in_section = true;
                if rest.is_empty() {
                    continue;
                }
                rest
            }
            _ if in_section => l,
            _ => return Err(at(n, format!("expected `gaussian:` lines, found `{l}`"))),
        };
        let words: Vec<&str> = row.split_whitespace().collect();
        if words.len() != 3 {
            return Err(at(n, "expected `state mu sigma`"));
        }
        states.push(words[0].to_string());
        params.push((parse_f64(n, words[1])?, parse_f64(n, words[2])?));
    }
    if params.is_empty() {
        return Err(at(kind_line, "gaussian channel lists no states"));
    }
    check_unique(kind_line, &states, "state")?;
    let channel = GaussianChannel::new(params)
        .with_context(|| format!("line {kind_line}: gaussian channel"))?;
    Ok(NamedChannel {
        states,
        symbols: Vec::new(),
        channel: Channel::Gaussian(channel),
    })
}

fn parse_identity(kind_line: usize, body: &[(usize, &str)]) -> Result<NamedChannel> {
    let (n, states) = parse_states_line(body)
        .ok_or_else(|| at(kind_line, "identity channel needs a `states:` line"))?;
    check_unique(n, &states, "state")?;
    let channel = IdentityChannel::new(states.len()).with_context(|| format!("line {n}"))?;
    Ok(NamedChannel {
        symbols: states.clone(),
        states,
        channel: Channel::Identity(channel),
    })
}

fn parse_binary_test(kind_line: usize, body: &[(usize, &str)]) -> Result<NamedChannel> {
    let mut eps = [None, None];
    for &(n, l) in body {
        match split_key(l) {
            Some(("eps1", v)) => eps[0] = Some(parse_f64(n, v)?),
            Some(("eps2", v)) => eps[1] = Some(parse_f64(n, v)?),
            _ => return Err(at(n, format!("expected `eps1:` or `eps2:`, found `{l}`"))),
        }
    }
    let [Some(eps1), Some(eps2)] = eps else {
        return Err(at(
            kind_line,
            "binary_test channel needs both `eps1:` and `eps2:`",
        ));
    };
    Ok(NamedChannel {
        states: vec!["Ill".into(), "Healthy".into()],
        symbols: vec!["+".into(), "-".into()],
        channel: Channel::Discrete(binary_test_channel(eps1, eps2)?),
    })
}

fn check_unique(line: usize, names: &[String], what: &str) -> Result<()> {
    for (i, a) in names.iter().enumerate() {
        if names[..i].contains(a) {
            return Err(at(line, format!("duplicate {what} name `{a}`")));
        }
    }
    Ok(())
}

/// Parses a dataset, resolving discrete symbols through the channel.
pub fn parse_dataset(text: &str, channel: &NamedChannel) -> Result<ManifestDataset> {
    let mut kind = None;
    let mut observations = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let l = raw.trim();
        if l.is_empty() {
            continue;
        }
        if let Some(rest) = l.strip_prefix('#') {
            if kind.is_none() {
                if let Some(("kind", v)) = split_key(rest.trim()) {
                    kind = Some(match v {
                        "discrete" => ObservationKind::Discrete,
                        "continuous" => ObservationKind::Continuous,
                        other => return Err(at(n, format!("unknown dataset kind `{other}`"))),
                    });
                }
            }
            continue;
        }
        let kind =
            kind.ok_or_else(|| at(n, "missing `#kind:` header before the first observation"))?;
        if kind != channel.channel.kind() {
            bail!(
                "dataset is {kind:?} but the channel expects {:?} observations",
                channel.channel.kind()
            );
        }
        observations.push(match kind {
            ObservationKind::Discrete => {
                Observation::Symbol(channel.symbol_index(l).ok_or_else(|| {
                    at(
                        n,
                        format!(
                            "unknown symbol `{l}` (alphabet: {})",
                            channel.symbols.join(" ")
                        ),
                    )
                })?)
            }
            ObservationKind::Continuous => Observation::Real(parse_f64(n, l)?),
        });
    }
    let kind = kind.ok_or_else(|| anyhow!("dataset has no `#kind:` header"))?;
    Ok(ManifestDataset::new(kind, observations)?)
}

pub fn read_channel(path: &Path) -> Result<NamedChannel> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_channel(&text).with_context(|| format!("in channel file {}", path.display()))
}

pub fn read_dataset(path: &Path, channel: &NamedChannel) -> Result<ManifestDataset> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_dataset(&text, channel).with_context(|| format!("in dataset file {}", path.display()))
}

/// Renders a dataset in the format read by [`parse_dataset`].
pub fn render_dataset(data: &ManifestDataset, channel: &NamedChannel) -> String {
    let mut out = String::new();
    out.push_str(match data.kind() {
        ObservationKind::Discrete => "#kind: discrete\n",
        ObservationKind::Continuous => "#kind: continuous\n",
    });
    for obs in data.observations() {
        match *obs {
            Observation::Symbol(o) => out.push_str(&channel.symbols[o]),
            Observation::Real(x) => out.push_str(&format!("{x:?}")),
        }
        out.push('\n');
    }
    out
}

/// `i:j:k` count vectors.
pub fn parse_counts(spec: &str) -> Result<Vec<u64>> {
    spec.split(':')
        .map(|w| {
            w.trim()
                .parse::<u64>()
                .map_err(|_| anyhow!("invalid count `{w}` in `{spec}` (expected i:j:k)"))
        })
        .collect()
}

/// `a:b:c` real vectors.
pub fn parse_reals(spec: &str) -> Result<Vec<f64>> {
    spec.split(':')
        .map(|w| {
            w.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("invalid number `{w}` in `{spec}`"))
        })
        .collect()
}
