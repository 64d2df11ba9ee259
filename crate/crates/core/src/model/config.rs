use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// predicts the whole slot
    Offline,
    /// predicts the pilot symbols only
    Online,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Offline => "offline",
            Mode::Online => "online",
        }
    }
}

/// Network hyper-structure plus the frame constants it is tied to.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    pub mode: Mode,
    /// residual blocks in the decoder
    pub k_blocks: usize,
    pub n_enc: usize,
    pub n_dec: usize,
    pub kernel: usize,
    pub n_heads: usize,
    pub n_subcarriers: usize,
    pub pilots_per_symbol: usize,
    pub n_symbols: usize,
}

impl ModelConfig {
    pub fn offline() -> Self {
        ModelConfig {
            mode: Mode::Offline,
            k_blocks: 3,
            n_enc: 5,
            n_dec: 12,
            kernel: 5,
            n_heads: 2,
            n_subcarriers: 72,
            pilots_per_symbol: 36,
            n_symbols: 14,
        }
    }

    pub fn online() -> Self {
        ModelConfig {
            mode: Mode::Online,
            k_blocks: 1,
            n_dec: 2,
            kernel: 2,
            ..Self::offline()
        }
    }

    pub fn for_mode(mode: Mode) -> Self {
        match mode {
            Mode::Offline => Self::offline(),
            Mode::Online => Self::online(),
        }
    }

    /// Rows of the marshalled input (pilots of all pilot symbols stacked).
    pub fn input_rows(&self) -> usize {
        self.n_heads * self.pilots_per_symbol
    }

    pub fn out_rows(&self) -> usize {
        match self.mode {
            Mode::Offline => self.n_symbols * self.n_subcarriers,
            Mode::Online => self.n_heads * self.n_subcarriers,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.k_blocks,
            self.n_enc,
            self.n_dec,
            self.kernel,
            self.n_heads,
            self.n_subcarriers,
            self.pilots_per_symbol,
            self.n_symbols,
        ];
        if positive.contains(&0) {
            return Err(Error::invalid(format!("model config has a zero dimension: {self:?}")));
        }
        if self.pilots_per_symbol < 2 {
            return Err(Error::invalid("model config: need at least 2 pilots per symbol"));
        }
        Ok(())
    }
}
