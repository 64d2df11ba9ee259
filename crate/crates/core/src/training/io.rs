//! Dataset file.
//!
//! Layout (little-endian): magic `CFDS`, u32 version, u8 mode (0 offline,
//! 1 online), u64 train count, u64 validation count, u32 feature rows,
//! u32 label rows; then per sample (training first): f64 SNR dB, f64 Doppler
//! Hz, u64 seed, u32 length + UTF-8 profile name, feature values, label
//! values (row-major `rows x 2` f64).

use std::path::Path;

use super::{Dataset, SampleMeta, TrainingSample};
use crate::binio::{ByteReader, ByteWriter};
use crate::error::{Error, Result};
use crate::model::Mode;
use crate::nn::Tensor;

const MAGIC: &[u8; 4] = b"CFDS";
const VERSION: u32 = 1;

fn rows_of(samples: &[TrainingSample], f: impl Fn(&TrainingSample) -> &Tensor<f64>) -> Result<u32> {
    let Some(first) = samples.first() else {
        return Ok(0);
    };
    let rows = f(first).shape()[0];
    if samples.iter().any(|s| f(s).shape() != [rows, 2]) {
        return Err(Error::invalid("dataset samples have inconsistent shapes"));
    }
    Ok(rows as u32)
}

pub fn save_dataset(path: &Path, d: &Dataset) -> Result<()> {
    let all: Vec<TrainingSample> = d.train.iter().chain(&d.val).cloned().collect();
    let mut b = ByteWriter::default();
    b.bytes(MAGIC);
    b.u32(VERSION);
    b.u8(match d.mode {
        Mode::Offline => 0,
        Mode::Online => 1,
    });
    b.u64(d.train.len() as u64);
    b.u64(d.val.len() as u64);
    b.u32(rows_of(&all, |s| &s.feature)?);
    b.u32(rows_of(&all, |s| &s.label)?);
    for s in &all {
        b.f64(s.meta.snr_db);
        b.f64(s.meta.doppler_hz);
        b.u64(s.meta.seed);
        b.string(&s.meta.profile);
        for v in s.feature.data().iter().chain(s.label.data()) {
            b.f64(*v);
        }
    }
    b.write_to(path)
}

pub fn load_dataset(path: &Path) -> Result<Dataset> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut r = ByteReader::new(&bytes, "dataset");
    if r.take(4)? != MAGIC {
        return Err(Error::format("dataset", "bad magic"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Version {
            what: "dataset",
            found: version,
            expected: VERSION,
        });
    }
    let mode = match r.u8()? {
        0 => Mode::Offline,
        1 => Mode::Online,
        m => return Err(Error::format("dataset", format!("unknown mode byte {m}"))),
    };
    let n_train = r.u64()? as usize;
    let n_val = r.u64()? as usize;
    let f_rows = r.u32()? as usize;
    let l_rows = r.u32()? as usize;
    // reject absurd counts before allocating
    let per_sample = 8 * (3 + 2 * (f_rows + l_rows));
    if (n_train + n_val).saturating_mul(per_sample) > bytes.len() {
        return Err(Error::format("dataset", "sample count exceeds file size"));
    }
    let mut read = |n: usize| -> Result<Vec<TrainingSample>> {
        (0..n)
            .map(|_| {
                let snr_db = r.f64()?;
                let doppler_hz = r.f64()?;
                let seed = r.u64()?;
                let profile = r.string()?;
                let feature = (0..2 * f_rows).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
                let label = (0..2 * l_rows).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
                Ok(TrainingSample {
                    feature: Tensor::new(&[f_rows, 2], feature)?,
                    label: Tensor::new(&[l_rows, 2], label)?,
                    meta: SampleMeta {
                        snr_db,
                        doppler_hz,
                        profile,
                        seed,
                    },
                })
            })
            .collect()
    };
    let train = read(n_train)?;
    let val = read(n_val)?;
    r.finish()?;
    Ok(Dataset { mode, train, val })
}
