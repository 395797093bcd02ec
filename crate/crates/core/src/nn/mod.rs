//! Small dense neural-network toolkit: embeddings, LSTMs, pooling, output
//! heads, optimizers, gradient checking and model files.
//!
//! Everything runs on `f64` with hand-written backward passes.

pub mod checkpoint;
pub mod dense;
pub mod dropout;
pub mod embedding;
pub mod gradcheck;
pub mod lstm;
pub mod optim;
pub mod params;
pub mod pool;
pub mod tensor;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, restore_blocks, save_checkpoint, write_checkpoint,
    Checkpoint, CheckpointHeader, NamedBlocks,
};
pub use dense::{bce_loss, sigmoid_bce, softmax, softmax_ce, Dense};
pub use dropout::{apply_dropout, dropout_mask_with};
pub use embedding::Embedding;
pub use gradcheck::{gradient_check, BlockCheck};
pub use lstm::{DropoutCtx, LstmGrads, LstmLayer, LstmStack, LstmTrace, StackState, StackTrace};
pub use optim::{Adam, AdamConfig, Optimizer, RmsProp, RmsPropConfig};
pub use params::Parameterized;
pub use pool::{pool, pool_backward, Pooling};
pub use tensor::{sigmoid, Matrix};
