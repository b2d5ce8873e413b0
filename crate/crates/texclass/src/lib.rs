//! Texture classification from block-DCT features.
//!
//! Grayscale images are split into square blocks, each block is transformed
//! with an orthonormal 2D DCT, and nine low-frequency coefficients per block
//! form the feature vector. Two trainable classifiers consume the features:
//! an evolving fuzzy rule-node model that learns in one pass and exposes its
//! knowledge as if-then rules, and a backpropagation MLP baseline.

pub mod cli;
pub mod dct;
pub mod efunn;
pub mod fuzzy;
pub mod harness;
pub mod imaging;
pub mod mlp;
