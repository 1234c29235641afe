//! Versioned JSON checkpoints: named arrays with shapes, plus the token
//! vocabulary they were trained against.

use serde::{Deserialize, Serialize};

use crate::params::ParamStore;
use crate::tensor::Tensor;
use crate::ModelError;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedArray {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub params: Vec<NamedArray>,
}

impl Checkpoint {
    pub fn from_store(store: &ParamStore) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            params: store
                .iter()
                .map(|(_, name, t)| NamedArray {
                    name: name.to_string(),
                    shape: t.shape.clone(),
                    values: t.data.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("checkpoint serialises")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let ck: Checkpoint = serde_json::from_str(text).map_err(|e| ModelError::Checkpoint(e.to_string()))?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(ModelError::Checkpoint(format!("unsupported version {}", ck.version)));
        }
        Ok(ck)
    }

    /// Copies every array into `store`; names, order and shapes must match.
    pub fn load_into(&self, store: &mut ParamStore) -> Result<(), ModelError> {
        if self.params.len() != store.len() {
            return Err(ModelError::Checkpoint(format!(
                "{} arrays for {} parameters",
                self.params.len(),
                store.len()
            )));
        }
        let ids: Vec<_> = store
            .iter()
            .map(|(id, name, t)| (id, name.to_string(), t.shape.clone()))
            .collect();
        for ((id, name, shape), arr) in ids.into_iter().zip(&self.params) {
            if arr.name != name || arr.shape != shape {
                return Err(ModelError::Checkpoint(format!(
                    "expected {name} {shape:?}, found {} {:?}",
                    arr.name, arr.shape
                )));
            }
            *store.get_mut(id) = Tensor::new(arr.shape.clone(), arr.values.clone())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelConfig, Txt2Pi};

    #[test]
    fn round_trip_restores_parameters() {
        let a = Txt2Pi::new(ModelConfig::tiny(12, 5), 1).unwrap();
        let mut b = Txt2Pi::new(ModelConfig::tiny(12, 5), 2).unwrap();
        assert_ne!(a.params, b.params);
        let text = Checkpoint::from_store(&a.params).to_json();
        Checkpoint::from_json(&text).unwrap().load_into(&mut b.params).unwrap();
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn rejects_other_versions_and_layouts() {
        let a = Txt2Pi::new(ModelConfig::tiny(12, 5), 1).unwrap();
        let mut ck = Checkpoint::from_store(&a.params);
        ck.version = 7;
        assert!(Checkpoint::from_json(&ck.to_json()).is_err());
        let mut other = Txt2Pi::new(ModelConfig::tiny(13, 5), 1).unwrap();
        let ck = Checkpoint::from_store(&a.params);
        assert!(ck.load_into(&mut other.params).is_err());
    }
}
