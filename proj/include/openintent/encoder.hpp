#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "openintent/data.hpp"
#include "openintent/matrix.hpp"
#include "openintent/rng.hpp"

namespace openintent {

// Bag-of-embeddings sentence encoder: token lookup -> mean pooling over
// non-PAD tokens -> linear + ReLU -> L2 normalization.
struct EncoderModel {
    std::size_t vocab_size = 0;
    std::size_t d_tok = 0;
    std::size_t hidden = 0;
    std::uint64_t seed = 0;

    Matrix token_embeddings;  // [vocab_size x d_tok]
    Matrix w1;                // [hidden x d_tok]
    std::vector<double> b1;   // [hidden]

    static EncoderModel init(std::size_t vocab_size, std::size_t d_tok, std::size_t hidden,
                             std::uint64_t seed);
};

struct EmbeddingBatch {
    Matrix z;                   // [n x hidden], unit-norm rows
    Matrix pre_norm;            // h = ReLU(W1 o + b1), kept for backward
    Matrix pooled;              // o, mean-pooled token embeddings [n x d_tok]
    std::vector<double> norms;  // ||h|| per row
};

struct EncoderGradients {
    Matrix token_embeddings;
    Matrix w1;
    std::vector<double> b1;
};

EmbeddingBatch encode(const EncoderModel& model, const std::vector<LabeledInstance>& batch);

// Chain rule from dL/dZ back to every parameter. `forward` must be the result
// of encode(model, batch).
EncoderGradients encode_backward(const EncoderModel& model,
                                 const std::vector<LabeledInstance>& batch,
                                 const EmbeddingBatch& forward, const Matrix& upstream);

// Checkpoint: one JSON header line {vocab_size, d_tok, H, seed} followed by
// the parameter tensors as flat little-endian float32 arrays, in declared
// order (token_embeddings, W1, b1).
void save_checkpoint(const EncoderModel& model, const std::string& path);
EncoderModel load_checkpoint(const std::string& path);

// Loads one H-dimensional vector per instance id from a headerless CSV and
// re-normalizes each row to unit length.
Matrix load_precomputed(const std::string& path, std::size_t hidden);

}  // namespace openintent
