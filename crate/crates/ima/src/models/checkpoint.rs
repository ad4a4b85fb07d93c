//! Self-describing JSON model checkpoints.
//!
//! Layout: `{"magic":"IMA1","kind":...,"backbone":...,shape fields...,
//! parameter arrays...}`. Floats are serialized with shortest
//! round-trip notation, so `load(save(m))` reproduces outputs
//! bit-exactly.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::augment::BackboneTag;
use crate::numerics::Rng;

use super::{DLinearForecaster, Imputer, ModelError};

pub const MAGIC: &str = "IMA1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForecasterCheckpoint {
    magic: String,
    kind: String,
    backbone: String,
    seq_len: usize,
    pred_len: usize,
    kernel_size: usize,
    params: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImputerCheckpoint {
    magic: String,
    kind: String,
    backbone: String,
    seq_len: usize,
    hidden: usize,
    params: Vec<f64>,
}

fn write_json(path: &Path, json: &str) -> Result<(), ModelError> {
    std::fs::write(path, json).map_err(|e| ModelError::Checkpoint {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn read_json(path: &Path) -> Result<String, ModelError> {
    std::fs::read_to_string(path).map_err(|e| ModelError::Checkpoint {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn save_forecaster(m: &DLinearForecaster, path: &Path) -> Result<(), ModelError> {
    let ckpt = ForecasterCheckpoint {
        magic: MAGIC.to_string(),
        kind: "forecaster".to_string(),
        backbone: "dlinear".to_string(),
        seq_len: m.seq_len,
        pred_len: m.pred_len,
        kernel_size: m.kernel_size,
        params: m.params_flat(),
    };
    write_json(path, &serde_json::to_string(&ckpt).expect("serializable"))
}

pub fn forecaster_from_json(json: &str) -> Result<DLinearForecaster, ModelError> {
    let ckpt: ForecasterCheckpoint =
        serde_json::from_str(json).map_err(|e| ModelError::Checkpoint {
            path: "<json>".to_string(),
            message: e.to_string(),
        })?;
    if ckpt.magic != MAGIC || ckpt.kind != "forecaster" || ckpt.backbone != "dlinear" {
        return Err(ModelError::Checkpoint {
            path: "<json>".to_string(),
            message: format!(
                "bad header (magic {:?}, kind {:?}, backbone {:?})",
                ckpt.magic, ckpt.kind, ckpt.backbone
            ),
        });
    }
    let mut m = DLinearForecaster::new(ckpt.seq_len, ckpt.pred_len, ckpt.kernel_size, &mut Rng::new(0))?;
    let expected = m.param_block_sizes().iter().sum::<usize>();
    if ckpt.params.len() != expected {
        return Err(ModelError::Checkpoint {
            path: "<json>".to_string(),
            message: format!("expected {expected} params, got {}", ckpt.params.len()),
        });
    }
    if ckpt.params.iter().any(|p| !p.is_finite()) {
        return Err(ModelError::Checkpoint {
            path: "<json>".to_string(),
            message: "non-finite parameter".to_string(),
        });
    }
    m.set_params_flat(&ckpt.params);
    Ok(m)
}

pub fn load_forecaster(path: &Path) -> Result<DLinearForecaster, ModelError> {
    forecaster_from_json(&read_json(path)?).map_err(|e| match e {
        ModelError::Checkpoint { message, .. } => ModelError::Checkpoint {
            path: path.display().to_string(),
            message,
        },
        other => other,
    })
}

pub fn save_imputer(m: &Imputer, path: &Path) -> Result<(), ModelError> {
    let hidden = match m {
        Imputer::Linear(_) => 0,
        Imputer::Mlp(mlp) => mlp.hidden,
    };
    let ckpt = ImputerCheckpoint {
        magic: MAGIC.to_string(),
        kind: "imputer".to_string(),
        backbone: m.backbone().as_str().to_string(),
        seq_len: m.seq_len(),
        hidden,
        params: m.params_flat(),
    };
    write_json(path, &serde_json::to_string(&ckpt).expect("serializable"))
}

pub fn imputer_from_json(json: &str) -> Result<Imputer, ModelError> {
    let ckpt: ImputerCheckpoint =
        serde_json::from_str(json).map_err(|e| ModelError::Checkpoint {
            path: "<json>".to_string(),
            message: e.to_string(),
        })?;
    if ckpt.magic != MAGIC || ckpt.kind != "imputer" {
        return Err(ModelError::Checkpoint {
            path: "<json>".to_string(),
            message: format!("bad header (magic {:?}, kind {:?})", ckpt.magic, ckpt.kind),
        });
    }
    let mut m = match ckpt.backbone.as_str() {
        "linear" => Imputer::Linear(super::LinearImputer::new(ckpt.seq_len, &mut Rng::new(0))?),
        "mlp" => {
            if ckpt.hidden < 1 {
                return Err(ModelError::Checkpoint {
                    path: "<json>".to_string(),
                    message: "mlp checkpoint needs hidden >= 1".to_string(),
                });
            }
            Imputer::Mlp(super::MlpImputer::new(
                ckpt.seq_len,
                ckpt.hidden,
                &mut Rng::new(0),
            )?)
        }
        other => {
            return Err(ModelError::Checkpoint {
                path: "<json>".to_string(),
                message: format!("unknown backbone {other:?}"),
            })
        }
    };
    debug_assert!(matches!(m.backbone(), BackboneTag::Linear | BackboneTag::Mlp));
    let expected = m.param_block_sizes().iter().sum::<usize>();
    if ckpt.params.len() != expected {
        return Err(ModelError::Checkpoint {
            path: "<json>".to_string(),
            message: format!("expected {expected} params, got {}", ckpt.params.len()),
        });
    }
    if ckpt.params.iter().any(|p| !p.is_finite()) {
        return Err(ModelError::Checkpoint {
            path: "<json>".to_string(),
            message: "non-finite parameter".to_string(),
        });
    }
    m.set_params_flat(&ckpt.params);
    Ok(m)
}

pub fn load_imputer(path: &Path) -> Result<Imputer, ModelError> {
    imputer_from_json(&read_json(path)?).map_err(|e| match e {
        ModelError::Checkpoint { message, .. } => ModelError::Checkpoint {
            path: path.display().to_string(),
            message,
        },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Tensor3;

    fn random_tensor(b: usize, t: usize, n: usize, seed: u64) -> Tensor3 {
        let mut rng = Rng::new(seed);
        Tensor3::from_vec(
            b,
            t,
            n,
            (0..b * t * n).map(|_| rng.sample_uniform() * 2.0 - 1.0).collect(),
        )
        .unwrap()
    }

    #[test]
    fn forecaster_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.bin");
        let m = DLinearForecaster::new(8, 4, 3, &mut Rng::new(1)).unwrap();
        save_forecaster(&m, &path).unwrap();
        let loaded = load_forecaster(&path).unwrap();
        let x = random_tensor(2, 8, 2, 2);
        assert_eq!(
            m.forward(&x).unwrap().values(),
            loaded.forward(&x).unwrap().values()
        );
    }

    #[test]
    fn imputer_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        for backbone in [BackboneTag::Linear, BackboneTag::Mlp] {
            let path = dir.path().join(format!("{}.bin", backbone.as_str()));
            let m = Imputer::new(backbone, 6, &mut Rng::new(3)).unwrap();
            save_imputer(&m, &path).unwrap();
            let loaded = load_imputer(&path).unwrap();
            let x = random_tensor(2, 6, 2, 4);
            assert_eq!(
                m.forward(&x).unwrap().values(),
                loaded.forward(&x).unwrap().values()
            );
        }
    }

    #[test]
    fn bad_magic_is_rejected() {
        let json = r#"{"magic":"NOPE","kind":"imputer","backbone":"linear","seq_len":2,"hidden":0,"params":[0,0,0,0,0,0]}"#;
        assert!(imputer_from_json(json).is_err());
    }

    #[test]
    fn wrong_param_count_is_rejected() {
        let json = r#"{"magic":"IMA1","kind":"imputer","backbone":"linear","seq_len":2,"hidden":0,"params":[0,0]}"#;
        assert!(imputer_from_json(json).is_err());
    }
}
