#pragma once

// Serial reference implementations of the hot kernels. These follow the
// textbook formulas directly (no log-sum-exp rewriting, no parallel phase
// split) and exist so the OpenMP kernels can be checked against an
// independent code path and timed against a serial baseline. They assume
// moderate logits and are not meant for production use.

#include <vector>

#include "openintent/boundary.hpp"
#include "openintent/encoder.hpp"
#include "openintent/eval.hpp"
#include "openintent/losses.hpp"
#include "openintent/matrix.hpp"

namespace openintent::ref {

EmbeddingBatch encode(const EncoderModel& model, const std::vector<LabeledInstance>& batch);

EncoderGradients encode_backward(const EncoderModel& model,
                                 const std::vector<LabeledInstance>& batch,
                                 const EmbeddingBatch& forward, const Matrix& upstream);

LossGrad cl_loss(const Matrix& z, const std::vector<ContrastiveSample>& samples, double tau);
LossGrad kccl_loss(const Matrix& z, const std::vector<ContrastiveSample>& samples, double tau);
LossGrad kcl_loss(const Matrix& z, const std::vector<ContrastiveSample>& samples, double tau);
CeGrad ce_loss(const Matrix& z, const ClassifierHead& head, const std::vector<int>& labels);

Matrix compute_centers(const Matrix& z, const std::vector<int>& labels, int k_known);
RadiusGrad adb_loss(const BoundaryModel& model, const Matrix& z, const std::vector<int>& labels);
RadiusGrad adbes_loss(const BoundaryModel& model, const Matrix& z, const std::vector<int>& labels,
                      const Matrix& negatives, const std::vector<int>& negative_labels,
                      const Stage2Config& config);

EvalReport evaluate(const BoundaryModel& model, const Matrix& z, const std::vector<int>& labels,
                    double ratio = 1.0);

// All-pairs means, no per-class sampling.
std::pair<double, double> similarity_curves(const Matrix& z, const std::vector<int>& labels);

}  // namespace openintent::ref
