//! The Channelformer network: attention encoder, residual convolutional
//! decoder, parameter layout, persistence and I/O marshalling.

mod config;
mod estimate;
mod forward;
mod io;
mod marshal;
mod probe;
mod weights;

pub use config::{Mode, ModelConfig};
pub use forward::{forward_graph, Forward};
pub use io::{load_weights, save_weights};
pub use marshal::{channel_to_tensor, input_from_ls, output_to_channel, tensor_to_pilot_estimate};
pub use probe::{attention_probe_run, AttentionProbe};
pub use weights::{ModelWeights, NamedParam};
