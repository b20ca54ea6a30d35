//! Trained risk-model container: feature normalization, the five per-layer
//! attention models, and the stacked metamodel. Serialized as versioned
//! JSON; floats round-trip bit-exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::boost::GbdtModel;
use crate::domain::FEATURE_DIM;
use crate::error::{Error, Result};
use crate::gat::GatParams;

pub const MODEL_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RiskModel {
    pub version: u32,
    pub config_hash: String,
    /// Feature standardization applied before the attention layers.
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    /// One weak learner per interaction layer, canonical layer order.
    pub layer_models: Vec<GatParams>,
    pub stacker: GbdtModel,
}

impl RiskModel {
    pub fn validate(&self) -> Result<()> {
        if self.version != MODEL_VERSION {
            return Err(Error::Model(format!(
                "model version {} unsupported (expected {MODEL_VERSION})",
                self.version
            )));
        }
        if self.feature_mean.len() != FEATURE_DIM || self.feature_std.len() != FEATURE_DIM {
            return Err(Error::Model("normalization block has wrong dimension".into()));
        }
        if self.layer_models.len() != 5 {
            return Err(Error::Model(format!(
                "expected 5 layer models, found {}",
                self.layer_models.len()
            )));
        }
        for m in &self.layer_models {
            m.validate()?;
        }
        Ok(())
    }

    pub fn normalize(&self, raw: &[f64; FEATURE_DIM]) -> [f64; FEATURE_DIM] {
        let mut out = [0.0; FEATURE_DIM];
        for i in 0..FEATURE_DIM {
            out[i] = (raw[i] - self.feature_mean[i]) / self.feature_std[i];
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tmp");
        let json = serde_json::to_string(self).map_err(|e| Error::Model(e.to_string()))?;
        std::fs::write(&tmp, json)?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<RiskModel> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)?;
        let model: RiskModel =
            serde_json::from_str(&text).map_err(|e| Error::Model(format!("{path:?}: {e}")))?;
        model.validate()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boost::{train_gbdt, FeatureMatrix, GbdtHyper};
    use crate::seeded::{stream, StreamKind};

    fn sample_model() -> RiskModel {
        let mut rng = stream(1, StreamKind::ModelInit, 0, 0);
        let layer_models: Vec<GatParams> =
            (0..5).map(|_| GatParams::init(FEATURE_DIM, 4, 2, &mut rng)).collect();
        let mut m = FeatureMatrix::new(3);
        for i in 0..60 {
            m.push_row(&[i as f64, (i % 7) as f64 / 3.0, ((i * 31) % 11) as f64]);
        }
        let labels: Vec<bool> = (0..60).map(|i| i % 3 == 0).collect();
        let (stacker, _) = train_gbdt(
            &m,
            &labels,
            &GbdtHyper { rounds: 5, min_leaf: 2, ..Default::default() },
        )
        .unwrap();
        RiskModel {
            version: MODEL_VERSION,
            config_hash: "deadbeef".into(),
            feature_mean: vec![0.1; FEATURE_DIM],
            feature_std: vec![1.3; FEATURE_DIM],
            layer_models,
            stacker,
        }
    }

    #[test]
    fn save_load_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = sample_model();
        model.save(&path).unwrap();
        let back = RiskModel::load(&path).unwrap();
        for (a, b) in model.layer_models.iter().zip(&back.layer_models) {
            assert_eq!(a.to_flat(), b.to_flat());
        }
        assert_eq!(model.feature_mean, back.feature_mean);
        assert_eq!(model.stacker.base_score, back.stacker.base_score);
        assert_eq!(model.stacker.trees.len(), back.stacker.trees.len());
        for (x, y) in model.stacker.trees.iter().zip(&back.stacker.trees) {
            assert_eq!(x, y);
        }
        // second save of the loaded model is byte-identical
        let path2 = dir.path().join("model2.json");
        back.save(&path2).unwrap();
        assert_eq!(
            std::fs::read(&path).unwrap(),
            std::fs::read(&path2).unwrap()
        );
    }

    #[test]
    fn missing_file_is_missing_input() {
        let err = RiskModel::load(Path::new("/nonexistent/model.json")).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
