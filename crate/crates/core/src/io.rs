//! JSON interchange for clusters.
//!
//! `{"space":"S","n":2,"q":3,"centers":[[…],…],"curvatures":[…],"meta":{…}}`
//!
//! Loading never re-centres: parameters that violate the zero-sum convention are
//! rejected. More than `n + 2` cells are accepted only with `"meta":{"unrestricted":true}`.

use std::path::Path;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::cluster::Cluster;
use crate::error::{Error, Result};

/// On-disk form of a cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterFile {
    pub space: String,
    pub n: usize,
    pub q: usize,
    pub centers: Vec<Vec<f64>>,
    pub curvatures: Vec<f64>,
    #[serde(default)]
    pub meta: Map<String, Value>,
}

impl ClusterFile {
    pub fn from_cluster(cluster: &Cluster, mut meta: Map<String, Value>) -> Self {
        if cluster.q() > cluster.n() + 2 {
            meta.insert("unrestricted".into(), Value::Bool(true));
        }
        Self {
            space: "S".into(),
            n: cluster.n(),
            q: cluster.q(),
            centers: cluster.centers().iter().map(|c| c.iter().copied().collect()).collect(),
            curvatures: cluster.curvatures().to_vec(),
            meta,
        }
    }

    pub fn to_cluster(&self) -> Result<Cluster> {
        if self.space != "S" {
            return Err(Error::Schema(format!("space must be \"S\", found {:?}", self.space)));
        }
        if self.centers.len() != self.q || self.curvatures.len() != self.q {
            return Err(Error::Schema(format!(
                "q = {} but {} centers and {} curvatures",
                self.q,
                self.centers.len(),
                self.curvatures.len()
            )));
        }
        let centers: Vec<DVector<f64>> = self.centers.iter().map(|c| DVector::from_column_slice(c)).collect();
        let unrestricted = self.meta.get("unrestricted").and_then(Value::as_bool).unwrap_or(false);
        if unrestricted {
            Cluster::new_unrestricted(self.n, centers, self.curvatures.clone())
        } else {
            Cluster::new(self.n, centers, self.curvatures.clone())
        }
    }
}

/// Pretty JSON for a cluster with extra metadata.
pub fn to_json(cluster: &Cluster, meta: Map<String, Value>) -> String {
    serde_json::to_string_pretty(&ClusterFile::from_cluster(cluster, meta)).expect("plain data serialises")
}

/// Parses a cluster and returns it with its metadata.
pub fn from_json(text: &str) -> Result<(Cluster, Map<String, Value>)> {
    let file: ClusterFile = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    Ok((file.to_cluster()?, file.meta))
}

pub fn save(path: &Path, cluster: &Cluster, meta: Map<String, Value>) -> Result<()> {
    let mut text = to_json(cluster, meta);
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn load(path: &Path) -> Result<(Cluster, Map<String, Value>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    from_json(&text)
}
