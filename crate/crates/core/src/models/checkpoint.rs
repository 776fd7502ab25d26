//! Binary checkpoint layout (all integers and floats little-endian):
//!
//! ```text
//! offset  size      field
//! 0       4         magic "VCKP"
//! 4       4         u32 format version (currently 1)
//! 8       4         u32 model kind: 1 lstm, 2 mlp, 3 arima, 4 gpr, 5 krr
//! 12      4         u32 n_shape
//! 16      4·n_shape u32 shape values
//! ..      8         u64 n_values
//! ..      8·n       f64 values
//! ```
//!
//! Shapes and values per kind:
//! - lstm: `[K, H, D]`, the flat LSTM parameter vector.
//! - mlp: the layer sizes `[input, hidden…, output]`, the flat weights.
//! - arima: `[]`, `[mean, φ1, φ2, θ, projected (0/1)]`.
//! - gpr / krr: `[n, d]`, `[σ², ℓ, λ, offset, X (n × d row-major), α (n)]`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::models::arima::ArimaCoefficients;
use crate::models::kernel::{KernelModel, RbfKernel};
use crate::models::lstm::LstmParams;
use crate::models::mlp::MlpParams;
use crate::numerics::Matrix;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"VCKP";
pub const CHECKPOINT_VERSION: u32 = 1;

/// Any fitted model that can be checkpointed.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    Lstm(LstmParams),
    Mlp(MlpParams),
    Arima(ArimaCoefficients),
    Gpr(KernelModel),
    Krr(KernelModel),
}

impl ModelParams {
    pub fn kind_tag(&self) -> u32 {
        match self {
            ModelParams::Lstm(_) => 1,
            ModelParams::Mlp(_) => 2,
            ModelParams::Arima(_) => 3,
            ModelParams::Gpr(_) => 4,
            ModelParams::Krr(_) => 5,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelParams::Lstm(_) => "lstm",
            ModelParams::Mlp(_) => "mlp",
            ModelParams::Arima(_) => "arima",
            ModelParams::Gpr(_) => "gpr",
            ModelParams::Krr(_) => "krr",
        }
    }

    fn shape_and_values(&self) -> (Vec<u32>, Vec<f64>) {
        match self {
            ModelParams::Lstm(p) => (
                alloc::vec![p.input_size() as u32, p.hidden_size() as u32, p.output_size() as u32],
                p.values().to_vec(),
            ),
            ModelParams::Mlp(p) => (p.sizes().iter().map(|&s| s as u32).collect(), p.values().to_vec()),
            ModelParams::Arima(c) => (
                Vec::new(),
                alloc::vec![c.mean, c.ar[0], c.ar[1], c.ma, if c.projected { 1.0 } else { 0.0 }],
            ),
            ModelParams::Gpr(m) | ModelParams::Krr(m) => {
                let mut v = alloc::vec![m.kernel.variance, m.kernel.length_scale, m.noise, m.offset];
                v.extend_from_slice(m.inputs.as_slice());
                v.extend_from_slice(&m.alpha);
                (alloc::vec![m.inputs.rows() as u32, m.inputs.cols() as u32], v)
            }
        }
    }
}

/// Serialize `params` to the checkpoint byte layout.
pub fn encode(params: &ModelParams) -> Vec<u8> {
    let (shape, values) = params.shape_and_values();
    let mut out = Vec::with_capacity(24 + 4 * shape.len() + 8 * values.len());
    out.extend_from_slice(&CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&params.kind_tag().to_le_bytes());
    out.extend_from_slice(&(shape.len() as u32).to_le_bytes());
    for s in &shape {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in &values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or_else(|| {
            Error::Checkpoint(alloc::format!("truncated checkpoint while reading {what} at byte {}", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().expect("8 bytes")))
    }
}

fn bad(msg: impl Into<alloc::string::String>) -> Error {
    Error::Checkpoint(msg.into())
}

/// Parse a checkpoint, checking magic, version, kind, shape and length.
pub fn decode(bytes: &[u8]) -> Result<ModelParams> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4, "magic")? != CHECKPOINT_MAGIC {
        return Err(bad("not a checkpoint file (bad magic bytes)"));
    }
    let version = r.u32("version")?;
    if version != CHECKPOINT_VERSION {
        return Err(bad(alloc::format!(
            "unsupported checkpoint version {version} (expected {CHECKPOINT_VERSION})"
        )));
    }
    let kind = r.u32("model kind")?;
    let n_shape = r.u32("shape length")? as usize;
    if n_shape > 64 {
        return Err(bad(alloc::format!("implausible shape header length {n_shape}")));
    }
    let mut shape = Vec::with_capacity(n_shape);
    for _ in 0..n_shape {
        shape.push(r.u32("shape")? as usize);
    }
    let n_values = r.u64("value count")?;
    let remaining = (bytes.len() - r.pos) as u64;
    if n_values.checked_mul(8) != Some(remaining) {
        return Err(bad(alloc::format!(
            "checkpoint declares {n_values} values but carries {remaining} payload bytes"
        )));
    }
    let values: Vec<f64> = r
        .take(remaining as usize, "values")?
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let wrap = |e: Error| bad(alloc::format!("inconsistent checkpoint: {e}"));
    match kind {
        1 => {
            let [k, h, d] = shape[..] else {
                return Err(bad("lstm checkpoint needs a 3-entry shape"));
            };
            Ok(ModelParams::Lstm(LstmParams::from_values(k, h, d, values).map_err(wrap)?))
        }
        2 => Ok(ModelParams::Mlp(MlpParams::from_values(&shape, values).map_err(wrap)?)),
        3 => {
            if !shape.is_empty() {
                return Err(bad("arima checkpoint must have an empty shape"));
            }
            let [mean, p1, p2, ma, projected] = values[..] else {
                return Err(bad("arima checkpoint needs exactly 5 values"));
            };
            Ok(ModelParams::Arima(ArimaCoefficients {
                mean,
                ar: [p1, p2],
                ma,
                projected: projected != 0.0,
            }))
        }
        4 | 5 => {
            let [n, d] = shape[..] else {
                return Err(bad("kernel checkpoint needs a 2-entry shape"));
            };
            let expected = n.checked_mul(d).and_then(|nd| nd.checked_add(n + 4));
            if expected != Some(values.len()) {
                return Err(bad(alloc::format!(
                    "kernel checkpoint with n={n}, d={d} needs {} values, found {}",
                    n * d + n + 4,
                    values.len()
                )));
            }
            let kernel = RbfKernel::new(values[0], values[1]).map_err(wrap)?;
            let inputs = Matrix::from_vec(n, d, values[4..4 + n * d].to_vec()).map_err(wrap)?;
            let model = KernelModel {
                kernel,
                noise: values[2],
                offset: values[3],
                inputs,
                alpha: values[4 + n * d..].to_vec(),
            };
            Ok(if kind == 4 { ModelParams::Gpr(model) } else { ModelParams::Krr(model) })
        }
        other => Err(bad(alloc::format!("unknown model kind tag {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::kernel::Centering;
    use crate::models::{Predictor, SupervisedSet};
    use crate::numerics::Rng;

    fn samples() -> Vec<ModelParams> {
        let mut rng = Rng::new(11);
        let lstm = LstmParams::init(7, 2, 1, &mut rng);
        let mlp = MlpParams::init(&[6, 3, 2], &mut rng).unwrap();
        let xs = rng.uniform_vec(12);
        let ys = rng.uniform_vec(4);
        let data = SupervisedSet::new(&xs, 3, &ys, 1).unwrap();
        let k = KernelModel::fit(&data, RbfKernel::new(0.7, 0.3).unwrap(), 1e-3, Centering::Mean).unwrap();
        alloc::vec![
            ModelParams::Lstm(lstm),
            ModelParams::Mlp(mlp),
            ModelParams::Arima(ArimaCoefficients {
                mean: 72.5,
                ar: [0.4, -0.1],
                ma: 0.25,
                projected: true
            }),
            ModelParams::Gpr(k.clone()),
            ModelParams::Krr(k),
        ]
    }

    #[test]
    fn round_trip_is_bit_identical() {
        for p in samples() {
            let bytes = encode(&p);
            let back = decode(&bytes).unwrap();
            assert_eq!(back, p, "{}", p.kind_name());
            assert_eq!(encode(&back), bytes);
        }
    }

    #[test]
    fn header_layout() {
        let bytes = encode(&ModelParams::Lstm(LstmParams::zeros(1, 1, 1)));
        assert_eq!(&bytes[..4], b"VCKP");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 3);
        // shape header then 4·1 + 4·1 + 4 + 1 + 1 = 14 values
        assert_eq!(u64::from_le_bytes(bytes[28..36].try_into().unwrap()), 14);
        assert_eq!(bytes.len(), 36 + 14 * 8);
    }

    #[test]
    fn wrong_magic_rejected() {
        let mut bytes = encode(&samples()[0]);
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::Checkpoint(m)) if m.contains("magic")));
    }

    #[test]
    fn version_mismatch_rejected() {
        let mut bytes = encode(&samples()[2]);
        bytes[4..8].copy_from_slice(&7u32.to_le_bytes());
        assert!(matches!(decode(&bytes), Err(Error::Checkpoint(m)) if m.contains("version 7")));
    }

    #[test]
    fn truncated_and_corrupt_rejected() {
        let bytes = encode(&samples()[0]);
        for cut in [0, 3, 10, 20, bytes.len() - 1] {
            assert!(decode(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        let mut bad_kind = bytes.clone();
        bad_kind[8..12].copy_from_slice(&9u32.to_le_bytes());
        assert!(decode(&bad_kind).is_err());
        let mut extra = bytes;
        extra.extend_from_slice(&[0u8; 8]);
        assert!(decode(&extra).is_err());
    }

    #[test]
    fn mismatched_shape_fails_at_predict() {
        let p = decode(&encode(&ModelParams::Lstm(LstmParams::zeros(4, 2, 1)))).unwrap();
        let ModelParams::Lstm(lstm) = p else { unreachable!() };
        assert!(lstm.predict(&Matrix::zeros(20, 7)).is_err());
        assert!(lstm.predict(&Matrix::zeros(20, 4)).is_ok());
    }
}
