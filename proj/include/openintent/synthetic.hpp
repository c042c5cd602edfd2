#pragma once

#include <cstdint>
#include <string>

namespace openintent {

// Desk-scale stand-in for the benchmark corpora: each class is a Gaussian
// cluster on the unit sphere, rendered as token sequences by sampling from a
// shared codebook of token directions with probability proportional to
// exp(concentration * <token, instance>).
struct SyntheticConfig {
    int classes = 12;
    int per_class = 200;  // instances per class across train+valid+test
    int dim = 6;          // latent sphere dimension
    double spread = 0.35; // cluster spread before re-normalization
    int tokens_per_instance = 12;
    int vocab_tokens = 600;
    double concentration = 8.0;
    double train_frac = 0.6;
    double valid_frac = 0.15;
    std::uint64_t seed = 13;

    void validate() const;
};

// Writes train.tsv, valid.tsv and test.tsv into out_dir.
void generate_synthetic(const SyntheticConfig& config, const std::string& out_dir);

}  // namespace openintent
