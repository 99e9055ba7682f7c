use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gen::synth::GenSpec;
use crate::model::Instance;

pub const DATASET_VERSION: u32 = 1;

/// A list of instances plus the generator settings that produced them, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub gen_spec: Option<GenSpec>,
    pub instances: Vec<Instance>,
}

#[derive(Serialize, Deserialize)]
struct RawInstance {
    n: usize,
    m: usize,
    psi: Vec<f64>,
    #[serde(rename = "U")]
    u: Vec<Vec<f64>>,
    f_lower: Vec<f64>,
    f_upper: Vec<f64>,
}

#[derive(Deserialize)]
struct RawDataset {
    version: u32,
    gen_spec: Option<GenSpec>,
    instances: Vec<RawInstance>,
}

impl RawInstance {
    fn from_instance(inst: &Instance) -> Self {
        let u = inst.displacement();
        Self {
            n: inst.n(),
            m: inst.m(),
            psi: inst.psi().iter().copied().collect(),
            u: (0..u.nrows())
                .map(|i| u.row(i).iter().copied().collect())
                .collect(),
            f_lower: inst.f_lower().iter().copied().collect(),
            f_upper: inst.f_upper().iter().copied().collect(),
        }
    }

    fn into_instance(self, index: usize) -> Result<Instance> {
        let field = |name: &str| format!("instances[{index}].{name}");
        let invalid = |name: &str, message: String| Error::Validation {
            field: field(name),
            message,
        };
        let (n, m) = (self.n, self.m);
        if self.psi.len() != n {
            return Err(invalid("psi", format!("expected {n} entries, found {}", self.psi.len())));
        }
        if self.u.len() != n {
            return Err(invalid("U", format!("expected {n} rows, found {}", self.u.len())));
        }
        if let Some((i, row)) = self.u.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(invalid(
                &format!("U[{i}]"),
                format!("expected {m} columns, found {}", row.len()),
            ));
        }
        for (name, v) in [("f_lower", &self.f_lower), ("f_upper", &self.f_upper)] {
            if v.len() != m {
                return Err(invalid(name, format!("expected {m} entries, found {}", v.len())));
            }
        }
        let u = DMatrix::from_fn(n, m, |i, j| self.u[i][j]);
        Instance::new(
            DVector::from_vec(self.psi),
            u,
            DVector::from_vec(self.f_lower),
            DVector::from_vec(self.f_upper),
        )
        .map_err(|e| Error::Validation {
            field: format!("instances[{index}]"),
            message: e.to_string(),
        })
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| Error::Config(format!("serialisation failed: {e}")))
}

/// Renders the dataset as JSON with one instance per line. Floats use the shortest decimal that
/// parses back to the same bits.
pub fn dataset_to_string(dataset: &Dataset) -> Result<String> {
    let mut out = String::new();
    write!(
        out,
        "{{\"version\":{DATASET_VERSION},\"gen_spec\":{},\"instances\":[",
        to_json(&dataset.gen_spec)?
    )
    .expect("writing to a String");
    for (i, inst) in dataset.instances.iter().enumerate() {
        out.push_str(if i == 0 { "\n" } else { ",\n" });
        out.push_str(&to_json(&RawInstance::from_instance(inst))?);
    }
    out.push_str("\n]}\n");
    Ok(out)
}

pub fn dataset_from_str(text: &str) -> Result<Dataset> {
    let raw: RawDataset = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if raw.version != DATASET_VERSION {
        return Err(Error::Validation {
            field: "version".into(),
            message: format!("unsupported version {} (expected {DATASET_VERSION})", raw.version),
        });
    }
    let instances = raw
        .instances
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.into_instance(i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        gen_spec: raw.gen_spec,
        instances,
    })
}

pub fn save_dataset(path: &Path, dataset: &Dataset) -> Result<()> {
    fs::write(path, dataset_to_string(dataset)?)?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    dataset_from_str(&fs::read_to_string(path)?)
}
