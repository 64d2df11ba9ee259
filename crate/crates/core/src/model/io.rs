//! Weight file.
//!
//! Layout (little-endian): magic `CFMW`, u32 version, u8 mode (0 offline,
//! 1 online), u32 K, u32 N_enc, u32 N_dec, u32 kernel, u32 tensor count;
//! then per tensor: u32 name length + UTF-8 name, u32 ndim, u32 dims,
//! u8 has-mask, f64 values, and (if masked) one byte per value (1 = keep).

use std::path::Path;

use super::{Mode, ModelConfig, ModelWeights, NamedParam};
use crate::binio::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::nn::Tensor;
use crate::scalar::Real;

const MAGIC: &[u8; 4] = b"CFMW";
const VERSION: u32 = 1;

pub fn save_weights<T: Real>(path: &Path, w: &ModelWeights<T>) -> Result<()> {
    let mut b = ByteWriter::default();
    b.bytes(MAGIC);
    b.u32(VERSION);
    b.u8(match w.config.mode {
        Mode::Offline => 0,
        Mode::Online => 1,
    });
    for v in [w.config.k_blocks, w.config.n_enc, w.config.n_dec, w.config.kernel] {
        b.u32(v as u32);
    }
    b.u32(w.params.len() as u32);
    for p in &w.params {
        b.string(&p.name);
        b.u32(p.tensor.shape().len() as u32);
        for d in p.tensor.shape() {
            b.u32(*d as u32);
        }
        b.u8(p.mask.is_some() as u8);
        for v in p.tensor.data() {
            b.f64(v.as_f64());
        }
        if let Some(m) = &p.mask {
            for k in m {
                b.u8(*k as u8);
            }
        }
    }
    b.write_to(path)
}

pub fn load_weights<T: Real>(path: &Path) -> Result<ModelWeights<T>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = ByteReader::new(&bytes, "weights");
    if r.take(4)? != MAGIC {
        return Err(Error::format("weights", "bad magic"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Version {
            what: "weights",
            found: version,
            expected: VERSION,
        });
    }
    let mode = match r.u8()? {
        0 => Mode::Offline,
        1 => Mode::Online,
        m => return Err(Error::format("weights", format!("unknown mode byte {m}"))),
    };
    let mut config = ModelConfig::for_mode(mode);
    config.k_blocks = r.u32()? as usize;
    config.n_enc = r.u32()? as usize;
    config.n_dec = r.u32()? as usize;
    config.kernel = r.u32()? as usize;
    config.validate()?;
    let count = r.u32()? as usize;
    let mut params = Vec::with_capacity(count.min(256));
    for _ in 0..count {
        let name = r.string()?;
        let ndim = r.u32()? as usize;
        if ndim > 8 {
            return Err(Error::format("weights", format!("{name}: rank {ndim}")));
        }
        let shape = (0..ndim)
            .map(|_| r.u32().map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        let has_mask = r.u8()?;
        let n: usize = shape.iter().product();
        let data = (0..n).map(|_| r.f64().map(T::lit)).collect::<Result<Vec<_>>>()?;
        let mask = match has_mask {
            0 => None,
            1 => Some((0..n).map(|_| r.u8().map(|v| v != 0)).collect::<Result<Vec<_>>>()?),
            m => return Err(Error::format("weights", format!("{name}: mask flag {m}"))),
        };
        params.push(NamedParam {
            name,
            tensor: Tensor::new(&shape, data)?,
            mask,
        });
    }
    r.finish()?;
    let w = ModelWeights { config, params };
    w.check_layout().map_err(|e| Error::format("weights", e.to_string()))?;
    Ok(w)
}
