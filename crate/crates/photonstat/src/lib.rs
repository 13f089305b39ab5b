//! Joint photon-number statistics of thermal and laser light in a
//! Hanbury Brown-Twiss interferometer.
//!
//! Treating single-photon detectors as photon-number-resolving detectors
//! and post-selecting time bins on exact counts `(m, n)` turns the ordinary
//! intensity correlation into a family of normalized correlations
//! `g_mn = P_mn / (P_m P_n)`. For thermal light these can drop below 1
//! (antibunching, e.g. `g_10 = 0.84375` at `nbar = 0.5`, `mu = 1`) and
//! cross back into bunching as the mean photon number grows.
//!
//! The crate provides:
//!
//! * [`analytic`] — exact closed forms for `P_mn`, the marginals, and every
//!   `g_mn`, derived from the joint probability generating function.
//! * [`oracle`] — two independent numerical evaluations of `P_mn`
//!   (geometric-series coefficient walk and FFT contour extraction) used to
//!   validate the closed forms.
//! * [`coherence`] — a Gaussian-Schell style profile `mu(dx, tau)`.
//! * [`simulate`] — Monte Carlo streams (Gaussian fields + Poisson
//!   detection) whose joint count statistics realize the generating
//!   function exactly, for thermal and laser sources.
//! * [`correlate`] — a bounded-memory streaming correlator estimating
//!   `g_mn` versus lag or versus detector separation.
//! * [`ptag`] — a small seekable binary time-tag format.
//! * [`cli`] — the `photonstat` command-line frontend.
//!
//! See the crate examples for one runnable program per capability.

pub mod analytic;
pub mod cli;
pub mod coherence;
pub mod correlate;
mod error;
pub mod manifest;
pub mod oracle;
pub mod ptag;
pub mod simulate;

pub use error::{Error, Result};
