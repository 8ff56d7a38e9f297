//! Instance files: an algebra descriptor plus named matrices and series.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, AlgebraDescriptor};
use crate::error::{Error, Result};
use crate::linalg::{SkewMatrix, SkewMatrixRecord};
use crate::series::{SkewRing, SkewSeries, SkewSeriesRecord};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedMatrix {
    pub name: String,
    pub matrix: SkewMatrixRecord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedSeries {
    pub name: String,
    pub series: SkewSeriesRecord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub descriptor: AlgebraDescriptor,
    pub prec_x: usize,
    #[serde(default)]
    pub matrices: Vec<NamedMatrix>,
    #[serde(default)]
    pub series: Vec<NamedSeries>,
}

/// Precision overrides; each may only lower the precision of the file.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Overrides {
    pub prec_p: Option<u32>,
    pub prec_x: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub ring: SkewRing,
    pub matrices: BTreeMap<String, SkewMatrix>,
    pub series: BTreeMap<String, SkewSeries>,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<InstanceFile> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance files serialise")
    }
}

impl Instance {
    pub fn load(file: &InstanceFile, ov: Overrides) -> Result<Instance> {
        let mut names = BTreeSet::new();
        for n in file.matrices.iter().map(|m| &m.name).chain(file.series.iter().map(|s| &s.name)) {
            if !names.insert(n) {
                return Err(Error::Parse(format!("duplicate name {n:?}")));
            }
        }
        let mut desc = file.descriptor.clone();
        if let Some(n) = ov.prec_p {
            if n == 0 || n > desc.tower.n {
                return Err(Error::BadParameters(format!("--prec-p {n} must lie in 1..={}", desc.tower.n)));
            }
            desc.tower.n = n;
        }
        let alg = Algebra::from_descriptor(&desc)?;
        let file_ring = SkewRing::new(&alg, file.prec_x)?;
        let ring = match ov.prec_x {
            Some(m) if m > file.prec_x => {
                return Err(Error::BadParameters(format!("--prec-x {m} exceeds the file precision {}", file.prec_x)))
            }
            Some(m) => SkewRing::new(&alg, m)?,
            None => file_ring.clone(),
        };
        let mut matrices = BTreeMap::new();
        for nm in &file.matrices {
            let a = SkewMatrix::from_record(&file_ring, &nm.matrix)?;
            matrices.insert(nm.name.clone(), a.to_ring(&ring));
        }
        let mut series = BTreeMap::new();
        for ns in &file.series {
            series.insert(ns.name.clone(), file_ring.from_record(&ns.series)?.to_ring(&ring));
        }
        Ok(Instance { ring, matrices, series })
    }

    pub fn from_json(text: &str, ov: Overrides) -> Result<Instance> {
        Instance::load(&InstanceFile::from_json(text)?, ov)
    }

    pub fn matrix(&self, name: &str) -> Result<&SkewMatrix> {
        self.matrices.get(name).ok_or_else(|| Error::BadParameters(format!("no matrix named {name:?}")))
    }

    pub fn series(&self, name: &str) -> Result<&SkewSeries> {
        self.series.get(name).ok_or_else(|| Error::BadParameters(format!("no series named {name:?}")))
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            descriptor: self.ring.algebra().descriptor().clone(),
            prec_x: self.ring.prec_x(),
            matrices: self
                .matrices
                .iter()
                .map(|(n, m)| NamedMatrix { name: n.clone(), matrix: m.to_record() })
                .collect(),
            series: self.series.iter().map(|(n, s)| NamedSeries { name: n.clone(), series: s.to_record() }).collect(),
        }
    }
}
