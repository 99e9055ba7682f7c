//! Synthetic instances and dataset files.
//!
//! Measurement points and actuators sit at evenly spaced angles around a circular cross-section.
//! Each displacement column is a smooth bump built from the first `k` cosine harmonics centred
//! on its actuator, so the family is band-limited by construction. The deviation field draws its
//! harmonic coefficients from normals whose spread follows the same Hann taper, so low orders
//! dominate.

mod dataset;
mod synth;

pub use dataset::{
    dataset_from_str, dataset_to_string, load_dataset, save_dataset, Dataset, DATASET_VERSION,
};
pub use synth::{generate_dataset, generate_instance, generate_with_angles, GenSpec};
