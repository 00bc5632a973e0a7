//! Certification of prepare-and-measure (PAM) nonclassicality for qubit
//! preparations.
//!
//! * [`qubit`]: kets, density matrices, Bloch vectors, binary measurements.
//! * [`criterion`]: the closed-form violability test for three pure states
//!   and two measurements.
//! * [`witness`]: arbitrary linear witnesses, classical bounds by strategy
//!   enumeration and quantum maxima for fixed states.
//! * [`optics`]: waveplate model of the photonic setup and a shot-noise
//!   simulator.
//! * [`scan`] and [`scenario`]: region scans, global search and canned runs
//!   used by the `pamcert` binary.

pub mod criterion;
pub mod error;
pub mod optics;
pub mod qubit;
pub mod scan;
pub mod scenario;
pub mod schema;
pub mod tolerance;
pub mod witness;

pub use error::{PamError, Result};
