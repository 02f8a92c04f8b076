//! Lower and upper predictive probabilities for categorical latent
//! variables under Dirichlet near-ignorance prior sets.
//!
//! The latent process `X_1, X_2, ...` is IID categorical with unknown
//! chances `theta`; only manifest variables `S_i`, linked to `X_i` by a known
//! [`channels::Channel`], are observed. The prior is the set of Dirichlet
//! densities `dir_{s,t}` with fixed strength `s` and free mean `t`
//! ([`dirichlet::PriorSet`]). Lower and upper predictive probabilities of a
//! future dataset are the infimum and supremum over that set of the
//! posterior expectation of `prod_i theta_i^{n_i}`.
//!
//! [`inference::vacuity_check`] tests whether observing the manifest data
//! can move those bounds at all: when the likelihood is strictly positive
//! where the monomial peaks, they stay vacuous.

pub mod channels;
pub mod data;
pub mod dirichlet;
pub mod error;
pub mod estimate;
pub mod exec;
pub mod inference;
pub mod quadrature;
pub mod simplex;

pub use channels::{
    binary_test_channel, Channel, DiscreteChannel, GaussianChannel, IdentityChannel,
};
pub use data::{ManifestDataset, Observation, ObservationKind};
pub use dirichlet::{DirichletSpec, PriorSet};
pub use error::{Error, Result};
pub use estimate::{BoundPair, Estimate, Method};
pub use exec::Execution;
pub use quadrature::{Estimator, QuadratureConfig};
pub use simplex::{Chances, CountVector, RelativeFrequencies, SimplexVertex};
