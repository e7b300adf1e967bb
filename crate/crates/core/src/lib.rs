//! A workbench for a chaos-based image cipher built from two Chebyshev
//! maps, and for the attacks that break it.
//!
//! * [`chaos`]: the maps, the compound generator and the quantizers.
//! * [`cipher`]: keystream derivation, encryption and decryption.
//! * [`attack`]: keystream recovery from three chosen plaintexts.
//! * [`analysis`]: weak keys, equivalent keys and plaintext sensitivity.
//! * [`randomness`]: FIPS 140-2 and SP 800-22 style test batteries.
//! * [`experiment`]: seeded key sampling and a reference bit source.

pub mod analysis;
pub mod attack;
pub mod chaos;
pub mod cipher;
pub mod error;
pub mod experiment;
pub mod randomness;

pub use chaos::{Branch, ChaosState, CompoundSample, SecretKey};
pub use cipher::{decrypt, derive_keystreams, encrypt, Image, Keystreams};
pub use error::{AnalysisError, AttackError, ChaosError, CipherError, KeyError, RandomnessError};
