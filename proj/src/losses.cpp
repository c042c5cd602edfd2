#include "openintent/losses.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "openintent/eval.hpp"
#include "openintent/util.hpp"

namespace openintent {

void Stage1Config::validate() const {
    if (tau <= 0.0) throw std::invalid_argument("stage1: tau must be positive");
    if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("stage1: lambda must be in [0, 1]");
    if (k_positives < 1) throw std::invalid_argument("stage1: K must be >= 1");
    if (m_negatives < 1) throw std::invalid_argument("stage1: M must be >= 1");
    if (learning_rate <= 0.0) throw std::invalid_argument("stage1: learning rate must be positive");
    if (batch_size < 1) throw std::invalid_argument("stage1: batch size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("stage1: epochs must be >= 1");
}

LossVariant parse_loss_variant(const std::string& name) {
    if (name == "ce") return LossVariant::kCeOnly;
    if (name == "cl") return LossVariant::kCl;
    if (name == "kcl") return LossVariant::kKcl;
    if (name == "kccl") return LossVariant::kKccl;
    throw std::invalid_argument("unknown loss variant: " + name + " (expected ce|cl|kcl|kccl)");
}

const char* loss_variant_name(LossVariant v) {
    switch (v) {
        case LossVariant::kCeOnly: return "ce";
        case LossVariant::kCl: return "cl";
        case LossVariant::kKcl: return "kcl";
        case LossVariant::kKccl: return "kccl";
    }
    return "?";
}

ClassifierHead ClassifierHead::init(std::size_t k_known, std::size_t hidden, Rng& rng) {
    ClassifierHead head;
    head.w2 = Matrix(k_known, hidden);
    head.b2.assign(k_known, 0.0);
    for (double& v : head.w2.data) v = rng.uniform(-0.1, 0.1);
    for (double& v : head.b2) v = rng.uniform(-0.1, 0.1);
    return head;
}

ClassIndex::ClassIndex(const std::vector<int>& instance_labels, int class_count)
    : labels(instance_labels), members(class_count) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int y = labels[i];
        if (y < 0 || y >= class_count)
            throw std::invalid_argument("ClassIndex: label out of range");
        members[y].push_back(i);
    }
}

ContrastiveSample sample_contrastive(const ClassIndex& index, std::size_t anchor, int k, int m,
                                     Rng& rng) {
    if (anchor >= index.labels.size()) throw std::invalid_argument("sample_contrastive: bad anchor");
    const int y = index.labels[anchor];

    ContrastiveSample sample;
    sample.anchor = anchor;

    // Positives: the anchor's class without the anchor itself.
    std::vector<std::size_t> pool;
    pool.reserve(index.members[y].size());
    for (std::size_t idx : index.members[y]) {
        if (idx != anchor) pool.push_back(idx);
    }
    sample.positives.reserve(k);
    if (pool.empty()) {
        // Singleton class: the anchor is its own only positive.
        sample.positives.assign(k, anchor);
    } else if (static_cast<int>(pool.size()) >= k) {
        // Without replacement via partial Fisher-Yates.
        for (int i = 0; i < k; ++i) {
            const std::size_t j = i + rng.uniform_index(pool.size() - i);
            std::swap(pool[i], pool[j]);
            sample.positives.push_back(pool[i]);
        }
    } else {
        for (int i = 0; i < k; ++i) sample.positives.push_back(pool[rng.uniform_index(pool.size())]);
    }

    // Negatives: uniform over the other non-empty classes, then uniform member.
    std::vector<int> other_classes;
    for (std::size_t c = 0; c < index.class_count(); ++c) {
        if (static_cast<int>(c) != y && !index.members[c].empty()) other_classes.push_back(static_cast<int>(c));
    }
    if (other_classes.empty())
        throw std::runtime_error("sample_contrastive: no negative class available");
    sample.negatives.reserve(m);
    for (int i = 0; i < m; ++i) {
        const int c = other_classes[rng.uniform_index(other_classes.size())];
        sample.negatives.push_back(index.members[c][rng.uniform_index(index.members[c].size())]);
    }
    return sample;
}

namespace {

double log_sum_exp(const double* logits, std::size_t n) {
    double mx = logits[0];
    for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(logits[i] - mx);
    return mx + std::log(s);
}

void check_samples(const Matrix& z, const std::vector<ContrastiveSample>& samples) {
    for (const auto& s : samples) {
        if (s.anchor >= z.rows) throw std::invalid_argument("contrastive sample row out of range");
        for (std::size_t p : s.positives)
            if (p >= z.rows) throw std::invalid_argument("contrastive sample row out of range");
        for (std::size_t q : s.negatives)
            if (q >= z.rows) throw std::invalid_argument("contrastive sample row out of range");
        if (s.positives.empty() || s.negatives.empty())
            throw std::invalid_argument("contrastive sample needs positives and negatives");
    }
}

}  // namespace

LossGrad cl_loss(const Matrix& z, const std::vector<ContrastiveSample>& samples, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("cl_loss: tau must be positive");
    check_samples(z, samples);
    const std::size_t n_anchors = samples.size();
    const std::size_t h = z.cols;

    std::vector<double> values(n_anchors, 0.0);
    // Row layout per anchor: [anchor, positive, neg_0 .. neg_{M-1}].
    std::vector<Matrix> contrib(n_anchors);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n_anchors); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto& s = samples[i];
        const std::size_t m = s.negatives.size();
        const double* za = z[s.anchor];
        const double* zp = z[s.positives[0]];

        std::vector<double> logits(1 + m);
        logits[0] = dot(za, zp, h) / tau;
        for (std::size_t j = 0; j < m; ++j) logits[1 + j] = dot(za, z[s.negatives[j]], h) / tau;

        const double lse = log_sum_exp(logits.data(), logits.size());
        values[i] = lse - logits[0];

        Matrix& c = contrib[i];
        c = Matrix(2 + m, h);
        const double inv_tau = 1.0 / tau;
        for (std::size_t t = 0; t < logits.size(); ++t) {
            double dlogit = std::exp(logits[t] - lse);
            if (t == 0) dlogit -= 1.0;
            const double* other = t == 0 ? zp : z[s.negatives[t - 1]];
            axpy(dlogit * inv_tau, other, c[0], h);                 // d / d z_anchor
            axpy(dlogit * inv_tau, za, c[t == 0 ? 1 : 1 + t], h);   // d / d z_other
        }
    }

    LossGrad out;
    out.dz = Matrix(z.rows, h);
    const double scale = n_anchors ? 1.0 / static_cast<double>(n_anchors) : 0.0;
    for (std::size_t i = 0; i < n_anchors; ++i) {
        out.value += values[i] * scale;
        const auto& s = samples[i];
        const Matrix& c = contrib[i];
        axpy(scale, c[0], out.dz[s.anchor], h);
        axpy(scale, c[1], out.dz[s.positives[0]], h);
        for (std::size_t j = 0; j < s.negatives.size(); ++j)
            axpy(scale, c[2 + j], out.dz[s.negatives[j]], h);
    }
    return out;
}

LossGrad kccl_loss(const Matrix& z, const std::vector<ContrastiveSample>& samples, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("kccl_loss: tau must be positive");
    check_samples(z, samples);
    const std::size_t n_anchors = samples.size();
    const std::size_t h = z.cols;

    std::vector<double> values(n_anchors, 0.0);
    // Row layout per anchor: [anchor, pos_0 .. pos_{K-1}, neg_0 .. neg_{M-1}].
    std::vector<Matrix> contrib(n_anchors);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n_anchors); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto& s = samples[i];
        const std::size_t k = s.positives.size();
        const std::size_t m = s.negatives.size();
        const std::size_t set_size = k + 1;  // anchor + positives

        std::vector<const double*> member(set_size);
        member[0] = z[s.anchor];
        for (std::size_t p = 0; p < k; ++p) member[1 + p] = z[s.positives[p]];

        // Similarity caches.
        Matrix pair_sim(set_size, set_size);
        for (std::size_t a = 0; a < set_size; ++a)
            for (std::size_t b = a + 1; b < set_size; ++b)
                pair_sim[a][b] = pair_sim[b][a] = dot(member[a], member[b], h) / tau;
        Matrix neg_sim(set_size, m);
        for (std::size_t a = 0; a < set_size; ++a)
            for (std::size_t j = 0; j < m; ++j)
                neg_sim[a][j] = dot(member[a], z[s.negatives[j]], h) / tau;

        Matrix& c = contrib[i];
        c = Matrix(set_size + m, h);
        const double inv_tau = 1.0 / tau;
        std::vector<double> logits(1 + 2 * m);
        double value = 0.0;

        for (std::size_t a = 0; a < set_size; ++a) {
            for (std::size_t b = 0; b < set_size; ++b) {
                if (a == b) continue;
                logits[0] = pair_sim[a][b];
                for (std::size_t j = 0; j < m; ++j) {
                    logits[1 + j] = neg_sim[a][j];
                    logits[1 + m + j] = neg_sim[b][j];
                }
                const double lse = log_sum_exp(logits.data(), logits.size());
                value += lse - logits[0];

                const double q0 = std::exp(logits[0] - lse) - 1.0;
                axpy(q0 * inv_tau, member[b], c[a], h);
                axpy(q0 * inv_tau, member[a], c[b], h);
                for (std::size_t j = 0; j < m; ++j) {
                    const double qa = std::exp(logits[1 + j] - lse);
                    const double qb = std::exp(logits[1 + m + j] - lse);
                    const double* zn = z[s.negatives[j]];
                    axpy(qa * inv_tau, zn, c[a], h);
                    axpy(qa * inv_tau, member[a], c[set_size + j], h);
                    axpy(qb * inv_tau, zn, c[b], h);
                    axpy(qb * inv_tau, member[b], c[set_size + j], h);
                }
            }
        }
        // Per-anchor normalization K * (K + 1); the 1/N factor is applied at
        // the merge below.
        values[i] = value / static_cast<double>(k * (k + 1));
        const double local = 1.0 / static_cast<double>(k * (k + 1));
        for (double& g : c.data) g *= local;
    }

    LossGrad out;
    out.dz = Matrix(z.rows, h);
    const double scale = n_anchors ? 1.0 / static_cast<double>(n_anchors) : 0.0;
    for (std::size_t i = 0; i < n_anchors; ++i) {
        out.value += values[i] * scale;
        const auto& s = samples[i];
        const Matrix& c = contrib[i];
        axpy(scale, c[0], out.dz[s.anchor], h);
        for (std::size_t p = 0; p < s.positives.size(); ++p)
            axpy(scale, c[1 + p], out.dz[s.positives[p]], h);
        const std::size_t set_size = s.positives.size() + 1;
        for (std::size_t j = 0; j < s.negatives.size(); ++j)
            axpy(scale, c[set_size + j], out.dz[s.negatives[j]], h);
    }
    return out;
}

LossGrad kcl_loss(const Matrix& z, const std::vector<ContrastiveSample>& samples, double tau) {
    if (tau <= 0.0) throw std::invalid_argument("kcl_loss: tau must be positive");
    check_samples(z, samples);
    const std::size_t n_anchors = samples.size();
    const std::size_t h = z.cols;

    std::vector<double> values(n_anchors, 0.0);
    // Row layout per anchor: [anchor, pos_0 .. pos_{K-1}, neg_0 .. neg_{M-1}].
    std::vector<Matrix> contrib(n_anchors);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n_anchors); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto& s = samples[i];
        const std::size_t k = s.positives.size();
        const std::size_t m = s.negatives.size();
        const double* za = z[s.anchor];

        std::vector<double> neg_logits(m);
        for (std::size_t j = 0; j < m; ++j) neg_logits[j] = dot(za, z[s.negatives[j]], h) / tau;

        Matrix& c = contrib[i];
        c = Matrix(1 + k + m, h);
        const double inv_tau = 1.0 / tau;
        std::vector<double> logits(1 + m);
        double value = 0.0;

        for (std::size_t p = 0; p < k; ++p) {
            const double* zp = z[s.positives[p]];
            logits[0] = dot(za, zp, h) / tau;
            for (std::size_t j = 0; j < m; ++j) logits[1 + j] = neg_logits[j];
            const double lse = log_sum_exp(logits.data(), logits.size());
            value += lse - logits[0];

            const double q0 = std::exp(logits[0] - lse) - 1.0;
            axpy(q0 * inv_tau, zp, c[0], h);
            axpy(q0 * inv_tau, za, c[1 + p], h);
            for (std::size_t j = 0; j < m; ++j) {
                const double qj = std::exp(logits[1 + j] - lse);
                axpy(qj * inv_tau, z[s.negatives[j]], c[0], h);
                axpy(qj * inv_tau, za, c[1 + k + j], h);
            }
        }
        values[i] = value / static_cast<double>(k);
        const double local = 1.0 / static_cast<double>(k);
        for (double& g : c.data) g *= local;
    }

    LossGrad out;
    out.dz = Matrix(z.rows, h);
    const double scale = n_anchors ? 1.0 / static_cast<double>(n_anchors) : 0.0;
    for (std::size_t i = 0; i < n_anchors; ++i) {
        out.value += values[i] * scale;
        const auto& s = samples[i];
        const Matrix& c = contrib[i];
        axpy(scale, c[0], out.dz[s.anchor], h);
        for (std::size_t p = 0; p < s.positives.size(); ++p)
            axpy(scale, c[1 + p], out.dz[s.positives[p]], h);
        for (std::size_t j = 0; j < s.negatives.size(); ++j)
            axpy(scale, c[1 + s.positives.size() + j], out.dz[s.negatives[j]], h);
    }
    return out;
}

CeGrad ce_loss_rows(const Matrix& z, const ClassifierHead& head,
                    const std::vector<std::size_t>& rows, const std::vector<int>& labels) {
    if (rows.size() != labels.size())
        throw std::invalid_argument("ce_loss: rows/labels size mismatch");
    const std::size_t n = rows.size();
    const std::size_t h = z.cols;
    const std::size_t k = head.w2.rows;
    if (head.w2.cols != h) throw std::invalid_argument("ce_loss: head width mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || labels[i] >= static_cast<int>(k))
            throw std::invalid_argument("ce_loss: label out of range");
        if (rows[i] >= z.rows) throw std::invalid_argument("ce_loss: row out of range");
    }

    CeGrad out;
    out.dz = Matrix(z.rows, h);
    out.dw2 = Matrix(k, h);
    out.db2.assign(k, 0.0);
    if (n == 0) return out;

    std::vector<double> values(n, 0.0);
    Matrix dlogits(n, k);
    const double scale = 1.0 / static_cast<double>(n);

    // Rows are distinct in every caller, so dz writes are disjoint.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* zr = z[rows[i]];
        std::vector<double> logits(k);
        for (std::size_t c = 0; c < k; ++c) logits[c] = dot(head.w2[c], zr, h) + head.b2[c];
        const double lse = log_sum_exp(logits.data(), k);
        values[i] = lse - logits[static_cast<std::size_t>(labels[i])];

        double* dl = dlogits[i];
        for (std::size_t c = 0; c < k; ++c) dl[c] = std::exp(logits[c] - lse) * scale;
        dl[static_cast<std::size_t>(labels[i])] -= scale;

        double* dz_row = out.dz[rows[i]];
        for (std::size_t c = 0; c < k; ++c) {
            if (dl[c] != 0.0) axpy(dl[c], head.w2[c], dz_row, h);
        }
    }

    for (std::size_t i = 0; i < n; ++i) out.value += values[i] * scale;

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t cc = 0; cc < static_cast<std::ptrdiff_t>(k); ++cc) {
        const auto c = static_cast<std::size_t>(cc);
        double* w_row = out.dw2[c];
        double bsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double g = dlogits[i][c];
            if (g == 0.0) continue;
            axpy(g, z[rows[i]], w_row, h);
            bsum += g;
        }
        out.db2[c] = bsum;
    }
    return out;
}

CeGrad ce_loss(const Matrix& z, const ClassifierHead& head, const std::vector<int>& labels) {
    std::vector<std::size_t> rows(z.rows);
    for (std::size_t i = 0; i < z.rows; ++i) rows[i] = i;
    return ce_loss_rows(z, head, rows, labels);
}

Stage1Grad stage1_loss(const Matrix& z, const std::vector<ContrastiveSample>& samples,
                       const ClassifierHead& head, const std::vector<int>& anchor_labels,
                       const Stage1Config& config, LossVariant variant) {
    if (samples.size() != anchor_labels.size())
        throw std::invalid_argument("stage1_loss: samples/labels size mismatch");

    std::vector<std::size_t> anchor_rows(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) anchor_rows[i] = samples[i].anchor;
    CeGrad ce = ce_loss_rows(z, head, anchor_rows, anchor_labels);

    Stage1Grad out;
    out.ce_value = ce.value;

    if (variant == LossVariant::kCeOnly) {
        out.value = ce.value;
        out.dz = std::move(ce.dz);
        out.dw2 = std::move(ce.dw2);
        out.db2 = std::move(ce.db2);
        return out;
    }

    LossGrad contrastive;
    switch (variant) {
        case LossVariant::kCl: contrastive = cl_loss(z, samples, config.tau); break;
        case LossVariant::kKcl: contrastive = kcl_loss(z, samples, config.tau); break;
        default: contrastive = kccl_loss(z, samples, config.tau); break;
    }

    const double lam = config.lambda;
    out.contrastive_value = contrastive.value;
    out.value = lam * contrastive.value + (1.0 - lam) * ce.value;
    out.dz = Matrix(z.rows, z.cols);
    for (std::size_t i = 0; i < out.dz.size(); ++i)
        out.dz.data[i] = lam * contrastive.dz.data[i] + (1.0 - lam) * ce.dz.data[i];
    out.dw2 = std::move(ce.dw2);
    for (double& g : out.dw2.data) g *= (1.0 - lam);
    out.db2 = std::move(ce.db2);
    for (double& g : out.db2) g *= (1.0 - lam);
    return out;
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : m_(n, 0.0), v_(n, 0.0), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void Adam::step(double* params, const double* grads, std::size_t n) {
    if (n != m_.size()) throw std::invalid_argument("Adam: size mismatch");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grads[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grads[i] * grads[i];
        const double mhat = m_[i] / bc1;
        const double vhat = v_[i] / bc2;
        params[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
}

Stage1Result train_stage1(const std::vector<LabeledInstance>& instances, int k_known,
                          std::size_t vocab_size, std::size_t d_tok, std::size_t hidden,
                          const Stage1Config& config, LossVariant variant) {
    config.validate();
    if (instances.empty()) throw std::invalid_argument("train_stage1: no instances");
    if (k_known < 2) throw std::invalid_argument("train_stage1: need at least 2 known classes");

    std::vector<int> labels(instances.size());
    for (std::size_t i = 0; i < instances.size(); ++i) labels[i] = instances[i].label_id;
    ClassIndex index(labels, k_known);

    Rng root(config.seed);
    Rng head_rng = root.child(1);
    Rng train_rng = root.child(2);
    Rng trace_rng = root.child(3);

    Stage1Result result;
    result.model = EncoderModel::init(vocab_size, d_tok, hidden, config.seed);
    result.head = ClassifierHead::init(static_cast<std::size_t>(k_known), hidden, head_rng);
    EncoderModel& model = result.model;
    ClassifierHead& head = result.head;

    Adam opt_emb(model.token_embeddings.size(), config.learning_rate);
    Adam opt_w1(model.w1.size(), config.learning_rate);
    Adam opt_b1(model.b1.size(), config.learning_rate);
    Adam opt_w2(head.w2.size(), config.learning_rate);
    Adam opt_b2(head.b2.size(), config.learning_rate);

    const std::size_t n = instances.size();
    const int k = config.k_positives;
    const int m = config.m_negatives;
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    long step_index = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        train_rng.shuffle(order);
        double loss_sum = 0.0;
        long steps = 0;

        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            const std::size_t b = stop - start;

            // Gather anchors plus their sampled positives/negatives into one
            // forward batch; local row layout is anchors, then positives, then
            // negatives, blocked per anchor.
            std::vector<LabeledInstance> gathered;
            gathered.reserve(b * (1 + k + m));
            std::vector<ContrastiveSample> local(b);
            std::vector<int> anchor_labels(b);

            for (std::size_t j = 0; j < b; ++j) {
                const std::size_t global = order[start + j];
                gathered.push_back(instances[global]);
                anchor_labels[j] = labels[global];
                local[j].anchor = j;
            }
            for (std::size_t j = 0; j < b; ++j) {
                const std::size_t global = order[start + j];
                const ContrastiveSample s = sample_contrastive(index, global, k, m, train_rng);
                local[j].positives.reserve(k);
                for (std::size_t p : s.positives) {
                    local[j].positives.push_back(gathered.size());
                    gathered.push_back(instances[p]);
                }
                local[j].negatives.reserve(m);
                for (std::size_t q : s.negatives) {
                    local[j].negatives.push_back(gathered.size());
                    gathered.push_back(instances[q]);
                }
            }

            const EmbeddingBatch fwd = encode(model, gathered);
            const Stage1Grad grad = stage1_loss(fwd.z, local, head, anchor_labels, config, variant);
            if (!std::isfinite(grad.value))
                throw std::runtime_error("stage-1 loss diverged at step " + std::to_string(step_index));

            const EncoderGradients eg = encode_backward(model, gathered, fwd, grad.dz);
            opt_emb.step(model.token_embeddings.data.data(), eg.token_embeddings.data.data(),
                         eg.token_embeddings.size());
            opt_w1.step(model.w1.data.data(), eg.w1.data.data(), eg.w1.size());
            opt_b1.step(model.b1.data(), eg.b1.data(), eg.b1.size());
            opt_w2.step(head.w2.data.data(), grad.dw2.data.data(), grad.dw2.size());
            opt_b2.step(head.b2.data(), grad.db2.data(), grad.db2.size());

            loss_sum += grad.value;
            ++steps;
            ++step_index;
        }

        const EmbeddingBatch all = encode(model, instances);
        Rng epoch_rng = trace_rng.child(static_cast<std::uint64_t>(epoch));
        const auto [intra, inter] = similarity_curves(all.z, labels, epoch_rng);
        result.trace.push_back({epoch, loss_sum / static_cast<double>(steps), intra, inter});
    }
    return result;
}

void save_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trace: " + path);
    out << "epoch,loss,intra_class_cos,inter_class_cos\n";
    for (const auto& row : trace) {
        out << row.epoch << "," << fmt_double(row.loss) << "," << fmt_double(row.intra_class_cos)
            << "," << fmt_double(row.inter_class_cos) << "\n";
    }
}

}  // namespace openintent
