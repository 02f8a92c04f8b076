//! Observed realisations of the manifest variables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationKind {
    Discrete,
    Continuous,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Observation {
    /// Symbol id in `[0, m)`.
    Symbol(usize),
    Real(f64),
}

impl Observation {
    pub fn kind(&self) -> ObservationKind {
        match self {
            Observation::Symbol(_) => ObservationKind::Discrete,
            Observation::Real(_) => ObservationKind::Continuous,
        }
    }
}

/// A homogeneous sequence of manifest observations `s_1, ..., s_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestDataset {
    kind: ObservationKind,
    observations: Vec<Observation>,
}

impl ManifestDataset {
    pub fn new(kind: ObservationKind, observations: Vec<Observation>) -> Result<Self> {
        for o in &observations {
            if o.kind() != kind {
                return Err(Error::KindMismatch {
                    expected: kind,
                    observed: o.kind(),
                });
            }
            if let Observation::Real(x) = o {
                if !x.is_finite() {
                    return Err(Error::NonFinite);
                }
            }
        }
        Ok(Self { kind, observations })
    }

    pub fn empty(kind: ObservationKind) -> Self {
        Self {
            kind,
            observations: Vec::new(),
        }
    }

    pub fn discrete(symbols: impl IntoIterator<Item = usize>) -> Self {
        Self {
            kind: ObservationKind::Discrete,
            observations: symbols.into_iter().map(Observation::Symbol).collect(),
        }
    }

    pub fn continuous(values: impl IntoIterator<Item = f64>) -> Result<Self> {
        Self::new(
            ObservationKind::Continuous,
            values.into_iter().map(Observation::Real).collect(),
        )
    }

    /// `counts[o]` repetitions of each symbol `o`, in symbol order.
    pub fn from_symbol_counts(counts: &[u64]) -> Self {
        Self::discrete(
            counts
                .iter()
                .enumerate()
                .flat_map(|(o, &n)| std::iter::repeat_n(o, n as usize)),
        )
    }

    pub fn kind(&self) -> ObservationKind {
        self.kind
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Histogram of discrete symbols over an alphabet of size `m`.
    pub fn symbol_counts(&self, m: usize) -> Result<Vec<u64>> {
        let mut counts = vec![0u64; m];
        for o in &self.observations {
            match *o {
                Observation::Symbol(s) if s < m => counts[s] += 1,
                Observation::Symbol(s) => {
                    return Err(Error::UnknownSymbol {
                        symbol: s,
                        alphabet: m,
                    })
                }
                Observation::Real(_) => {
                    return Err(Error::KindMismatch {
                        expected: ObservationKind::Discrete,
                        observed: ObservationKind::Continuous,
                    })
                }
            }
        }
        Ok(counts)
    }
}
