#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "openintent/matrix.hpp"
#include "openintent/rng.hpp"

namespace openintent {

enum class BoundaryMode { kAdb, kAdbes };

BoundaryMode parse_boundary_mode(const std::string& name);
const char* boundary_mode_name(BoundaryMode m);

// Per-class spherical decision boundary: fixed center, learnable radius.
struct BoundaryModel {
    Matrix centers;             // [k_known x hidden], fixed after construction
    std::vector<double> radii;  // [k_known], >= 0
};

struct Stage2Config {
    double eta = 0.5;  // weight of the expand/shrink term
    double e = 0.8;    // expansion margin
    double s = 0.2;    // shrink margin
    double learning_rate = 0.05;
    int batch_size = 32;
    int epochs = 50;
    std::uint64_t seed = 1;
    BoundaryMode mode = BoundaryMode::kAdbes;

    void validate() const;
};

// c_k = mean embedding of the class-k instances; errors on an empty class.
Matrix compute_centers(const Matrix& z, const std::vector<int>& labels, int k_known);

struct RadiusGrad {
    double value = 0.0;
    std::vector<double> d_radii;
};

// Mean of gamma*(d - delta) + (1-gamma)*(delta - d), gamma = 1 iff d > delta
// (inside at equality).
RadiusGrad adb_loss(const BoundaryModel& model, const Matrix& z, const std::vector<int>& labels);

// ADB plus the expand/shrink term driven by one negative per instance:
// expansion when the negative is beyond delta+e, shrinking when it is within
// delta+s, nothing in between. negatives[i] is the embedding of instance i's
// negative sample and must carry a different label.
RadiusGrad adbes_loss(const BoundaryModel& model, const Matrix& z, const std::vector<int>& labels,
                      const Matrix& negatives, const std::vector<int>& negative_labels,
                      const Stage2Config& config);

struct BoundaryTrainResult {
    BoundaryModel model;
    std::vector<std::vector<double>> radius_trace;  // per epoch: radii snapshot
};

// Centers are computed once from the frozen embeddings; each radius starts at
// the mean distance of its class and is updated by adaptive-moment SGD with a
// post-step clamp at zero.
BoundaryTrainResult train_boundary(const Matrix& z, const std::vector<int>& labels, int k_known,
                                   const Stage2Config& config);

void save_boundary(const BoundaryModel& model, const std::vector<std::string>& labels,
                   const std::string& path);
BoundaryModel load_boundary(const std::string& path, std::vector<std::string>* labels = nullptr);

void save_radius_trace(const std::vector<std::vector<double>>& trace,
                       const std::vector<std::string>& labels, const std::string& path);

}  // namespace openintent
