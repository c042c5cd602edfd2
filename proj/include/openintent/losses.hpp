#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "openintent/data.hpp"
#include "openintent/encoder.hpp"
#include "openintent/matrix.hpp"
#include "openintent/rng.hpp"

namespace openintent {

struct Stage1Config {
    double tau = 0.07;          // contrastive temperature
    double lambda = 0.25;       // weight on the contrastive term
    int k_positives = 4;        // K
    int m_negatives = 1;        // M
    double learning_rate = 1e-2;
    int batch_size = 32;
    int epochs = 15;
    std::uint64_t seed = 1;

    void validate() const;
};

// Which contrastive term joins the cross-entropy loss during stage 1.
// kCeOnly drops the contrastive term entirely (the "w/o KCCL" ablation).
enum class LossVariant { kCeOnly, kCl, kKcl, kKccl };

LossVariant parse_loss_variant(const std::string& name);
const char* loss_variant_name(LossVariant v);

struct ClassifierHead {
    Matrix w2;               // [k_known x hidden]
    std::vector<double> b2;  // [k_known]

    static ClassifierHead init(std::size_t k_known, std::size_t hidden, Rng& rng);
};

struct ContrastiveSample {
    std::size_t anchor = 0;
    std::vector<std::size_t> positives;  // K indices, same label as anchor
    std::vector<std::size_t> negatives;  // M indices, different labels
};

// Per-class member lists for sampling; the dataset view the samplers work on.
struct ClassIndex {
    std::vector<int> labels;
    std::vector<std::vector<std::size_t>> members;

    ClassIndex() = default;
    ClassIndex(const std::vector<int>& instance_labels, int class_count);
    std::size_t class_count() const { return members.size(); }
};

// Positives come uniformly from the anchor's class excluding the anchor
// (with replacement once the class is too small); negatives are
// class-balanced: uniform class != y, then uniform member.
ContrastiveSample sample_contrastive(const ClassIndex& index, std::size_t anchor, int k, int m,
                                     Rng& rng);

struct LossGrad {
    double value = 0.0;
    Matrix dz;  // same shape as Z
};

// Supervised contrastive loss over (anchor, first positive, M negatives).
LossGrad cl_loss(const Matrix& z, const std::vector<ContrastiveSample>& samples, double tau);

// K-center contrastive loss: all ordered pairs within {anchor} + positives,
// each contrasted against the anchor's shared negatives through both pair
// members.
LossGrad kccl_loss(const Matrix& z, const std::vector<ContrastiveSample>& samples, double tau);

// K-positive baseline: anchor-to-each-positive terms only.
LossGrad kcl_loss(const Matrix& z, const std::vector<ContrastiveSample>& samples, double tau);

struct CeGrad {
    double value = 0.0;
    Matrix dz;
    Matrix dw2;
    std::vector<double> db2;
};

// Cross entropy over every row of Z.
CeGrad ce_loss(const Matrix& z, const ClassifierHead& head, const std::vector<int>& labels);

// Cross entropy over selected rows (rows[i] is paired with labels[i]).
CeGrad ce_loss_rows(const Matrix& z, const ClassifierHead& head,
                    const std::vector<std::size_t>& rows, const std::vector<int>& labels);

struct Stage1Grad {
    double value = 0.0;
    double contrastive_value = 0.0;
    double ce_value = 0.0;
    Matrix dz;
    Matrix dw2;
    std::vector<double> db2;
};

// lambda * L_contrastive + (1 - lambda) * L_CE; cross entropy runs on the
// anchor rows. anchor_labels[i] pairs with samples[i].
Stage1Grad stage1_loss(const Matrix& z, const std::vector<ContrastiveSample>& samples,
                       const ClassifierHead& head, const std::vector<int>& anchor_labels,
                       const Stage1Config& config, LossVariant variant = LossVariant::kKccl);

// Adaptive-moment SGD, one state per parameter tensor.
class Adam {
public:
    Adam(std::size_t n, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
    void step(double* params, const double* grads, std::size_t n);

private:
    std::vector<double> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
};

struct TraceRow {
    int epoch = 0;
    double loss = 0.0;
    double intra_class_cos = 0.0;
    double inter_class_cos = 0.0;
};

struct Stage1Result {
    EncoderModel model;
    ClassifierHead head;
    std::vector<TraceRow> trace;
};

// Mini-batch training of the encoder + classifier head on the combined
// stage-1 objective. Aborts with the offending step index if the loss stops
// being finite.
Stage1Result train_stage1(const std::vector<LabeledInstance>& instances, int k_known,
                          std::size_t vocab_size, std::size_t d_tok, std::size_t hidden,
                          const Stage1Config& config, LossVariant variant = LossVariant::kKccl);

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

}  // namespace openintent
