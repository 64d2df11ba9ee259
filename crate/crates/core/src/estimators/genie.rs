use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::cache::{load_matrices, save_matrices};
use crate::channel::{ChannelSpec, Numerology};
use crate::error::{Error, Result};
use crate::rng::{rng_for, streams};

/// Ensemble second-order statistics of the noise-free channel, one full
/// subcarrier correlation matrix per OFDM symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct GenieCorrelations {
    pub per_symbol: Vec<DMatrix<Complex64>>,
    pub n_mc: usize,
}

impl GenieCorrelations {
    pub fn symbol(&self, l: usize) -> Result<&DMatrix<Complex64>> {
        self.per_symbol
            .get(l)
            .ok_or_else(|| Error::invalid(format!("no correlation for symbol {l}")))
    }

    /// (R_h,hp, R_hp,hp) for an observation subset of symbol `l`.
    pub fn pilot_blocks(&self, l: usize, pilots: &[usize]) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
        let r = self.symbol(l)?;
        let cross = r.select_columns(pilots);
        let obs = cross.select_rows(pilots);
        Ok((cross, obs))
    }
}

/// Sample-mean outer products E[h_l h_l^H] over `n_mc` fresh realizations.
pub fn genie_correlations(spec: &ChannelSpec, n_symbols: usize, n_mc: usize, seed: u64) -> Result<GenieCorrelations> {
    if n_mc == 0 {
        return Err(Error::invalid("genie_correlations: n_mc must be positive"));
    }
    let num = Numerology::default();
    let n = num.n_subcarriers;
    let mut rng = rng_for(seed, streams::GENIE);
    // upper triangle, row-major, per symbol
    let tri = n * (n + 1) / 2;
    let mut acc = vec![vec![Complex64::new(0.0, 0.0); tri]; n_symbols];
    for _ in 0..n_mc {
        let ch = spec.draw(n_symbols, &num, &mut rng)?;
        for (l, a) in acc.iter_mut().enumerate() {
            let col = ch.h.column(l);
            let mut idx = 0;
            for i in 0..n {
                let hi = col[i];
                for j in i..n {
                    a[idx] += hi * col[j].conj();
                    idx += 1;
                }
            }
        }
    }
    let inv = 1.0 / n_mc as f64;
    let per_symbol = acc
        .into_iter()
        .map(|a| {
            let mut m = DMatrix::zeros(n, n);
            let mut idx = 0;
            for i in 0..n {
                for j in i..n {
                    let v = a[idx] * inv;
                    m[(i, j)] = v;
                    m[(j, i)] = v.conj();
                    idx += 1;
                }
                m[(i, i)].im = 0.0;
            }
            m
        })
        .collect();
    Ok(GenieCorrelations { per_symbol, n_mc })
}

/// As [`genie_correlations`], reading/writing a cache file in `dir` keyed
/// by (profile, Doppler, n_mc, seed).
pub fn genie_correlations_cached(
    spec: &ChannelSpec,
    n_symbols: usize,
    n_mc: usize,
    seed: u64,
    dir: &Path,
) -> Result<GenieCorrelations> {
    let key = format!(
        "genie_{}_{}_{}_{}_{}.cfcm",
        spec.profile.name(),
        spec.doppler.label(),
        n_symbols,
        n_mc,
        seed
    );
    let path = dir.join(key);
    if path.exists() {
        let per_symbol = load_matrices(&path)?;
        if per_symbol.len() == n_symbols {
            return Ok(GenieCorrelations { per_symbol, n_mc });
        }
        log::warn!("ignoring stale correlation cache {}", path.display());
    }
    let g = genie_correlations(spec, n_symbols, n_mc, seed)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    save_matrices(&path, &g.per_symbol)?;
    Ok(g)
}
