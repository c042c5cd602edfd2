#include "openintent/reference.hpp"

#include <cmath>
#include <stdexcept>

namespace openintent::ref {

EmbeddingBatch encode(const EncoderModel& model, const std::vector<LabeledInstance>& batch) {
    const std::size_t n = batch.size();
    const std::size_t d = model.d_tok;
    const std::size_t h = model.hidden;

    EmbeddingBatch out;
    out.z = Matrix(n, h);
    out.pre_norm = Matrix(n, h);
    out.pooled = Matrix(n, d);
    out.norms.assign(n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        std::size_t count = 0;
        for (std::int32_t t : batch[i].token_ids) {
            if (t == Vocabulary::kPad) continue;
            for (std::size_t c = 0; c < d; ++c) out.pooled[i][c] += model.token_embeddings[t][c];
            ++count;
        }
        if (count == 0) throw std::runtime_error("ref::encode: instance without content tokens");
        for (std::size_t c = 0; c < d; ++c) out.pooled[i][c] /= static_cast<double>(count);

        for (std::size_t r = 0; r < h; ++r) {
            double a = model.b1[r];
            for (std::size_t c = 0; c < d; ++c) a += model.w1[r][c] * out.pooled[i][c];
            out.pre_norm[i][r] = a > 0.0 ? a : 0.0;
        }
        double nrm = 0.0;
        for (std::size_t r = 0; r < h; ++r) nrm += out.pre_norm[i][r] * out.pre_norm[i][r];
        nrm = std::sqrt(nrm);
        out.norms[i] = nrm;
        if (nrm == 0.0) throw std::runtime_error("ref::encode: zero pre-norm vector");
        for (std::size_t r = 0; r < h; ++r) out.z[i][r] = out.pre_norm[i][r] / nrm;
    }
    return out;
}

EncoderGradients encode_backward(const EncoderModel& model,
                                 const std::vector<LabeledInstance>& batch,
                                 const EmbeddingBatch& forward, const Matrix& upstream) {
    const std::size_t n = batch.size();
    const std::size_t d = model.d_tok;
    const std::size_t h = model.hidden;

    EncoderGradients grads;
    grads.token_embeddings = Matrix(model.vocab_size, d);
    grads.w1 = Matrix(h, d);
    grads.b1.assign(h, 0.0);

    std::vector<double> da(h), dо(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double inv_norm = 1.0 / (forward.norms[i] + 1e-12);
        double radial = 0.0;
        for (std::size_t r = 0; r < h; ++r) radial += upstream[i][r] * forward.z[i][r];
        for (std::size_t r = 0; r < h; ++r) {
            const double dh = (upstream[i][r] - radial * forward.z[i][r]) * inv_norm;
            da[r] = forward.pre_norm[i][r] > 0.0 ? dh : 0.0;
        }
        std::fill(dо.begin(), dо.end(), 0.0);
        for (std::size_t r = 0; r < h; ++r) {
            grads.b1[r] += da[r];
            for (std::size_t c = 0; c < d; ++c) {
                grads.w1[r][c] += da[r] * forward.pooled[i][c];
                dо[c] += da[r] * model.w1[r][c];
            }
        }
        std::size_t count = 0;
        for (std::int32_t t : batch[i].token_ids)
            if (t != Vocabulary::kPad) ++count;
        const double inv = count ? 1.0 / static_cast<double>(count) : 0.0;
        for (std::int32_t t : batch[i].token_ids) {
            if (t == Vocabulary::kPad) continue;
            for (std::size_t c = 0; c < d; ++c) grads.token_embeddings[t][c] += inv * dо[c];
        }
    }
    return grads;
}

LossGrad cl_loss(const Matrix& z, const std::vector<ContrastiveSample>& samples, double tau) {
    const std::size_t h = z.cols;
    LossGrad out;
    out.dz = Matrix(z.rows, h);
    const double scale = samples.empty() ? 0.0 : 1.0 / static_cast<double>(samples.size());

    for (const auto& s : samples) {
        const double* za = z[s.anchor];
        const double* zp = z[s.positives.at(0)];
        const double ep = std::exp(dot(za, zp, h) / tau);
        double denom = ep;
        for (std::size_t q : s.negatives) denom += std::exp(dot(za, z[q], h) / tau);
        out.value += -std::log(ep / denom) * scale;

        const double d_pos = (ep / denom - 1.0) / tau * scale;
        axpy(d_pos, zp, out.dz[s.anchor], h);
        axpy(d_pos, za, out.dz[s.positives[0]], h);
        for (std::size_t q : s.negatives) {
            const double eq = std::exp(dot(za, z[q], h) / tau);
            const double d_neg = eq / denom / tau * scale;
            axpy(d_neg, z[q], out.dz[s.anchor], h);
            axpy(d_neg, za, out.dz[q], h);
        }
    }
    return out;
}

LossGrad kccl_loss(const Matrix& z, const std::vector<ContrastiveSample>& samples, double tau) {
    const std::size_t h = z.cols;
    LossGrad out;
    out.dz = Matrix(z.rows, h);
    if (samples.empty()) return out;

    const std::size_t n = samples.size();
    for (const auto& s : samples) {
        const std::size_t k = s.positives.size();
        std::vector<std::size_t> set;
        set.push_back(s.anchor);
        set.insert(set.end(), s.positives.begin(), s.positives.end());
        const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(k) *
                                    static_cast<double>(k + 1));

        for (std::size_t m = 0; m < set.size(); ++m) {
            for (std::size_t q = 0; q < set.size(); ++q) {
                if (m == q) continue;
                const double* zm = z[set[m]];
                const double* zq = z[set[q]];
                const double e_pair = std::exp(dot(zm, zq, h) / tau);
                double denom = e_pair;
                for (std::size_t neg : s.negatives) {
                    denom += std::exp(dot(zm, z[neg], h) / tau);
                    denom += std::exp(dot(zq, z[neg], h) / tau);
                }
                out.value += -std::log(e_pair / denom) * scale;

                const double d_pair = (e_pair / denom - 1.0) / tau * scale;
                axpy(d_pair, zq, out.dz[set[m]], h);
                axpy(d_pair, zm, out.dz[set[q]], h);
                for (std::size_t neg : s.negatives) {
                    const double em = std::exp(dot(zm, z[neg], h) / tau) / denom / tau * scale;
                    const double eq = std::exp(dot(zq, z[neg], h) / tau) / denom / tau * scale;
                    axpy(em, z[neg], out.dz[set[m]], h);
                    axpy(em, zm, out.dz[neg], h);
                    axpy(eq, z[neg], out.dz[set[q]], h);
                    axpy(eq, zq, out.dz[neg], h);
                }
            }
        }
    }
    return out;
}

LossGrad kcl_loss(const Matrix& z, const std::vector<ContrastiveSample>& samples, double tau) {
    const std::size_t h = z.cols;
    LossGrad out;
    out.dz = Matrix(z.rows, h);
    if (samples.empty()) return out;

    const double anchor_scale = 1.0 / static_cast<double>(samples.size());
    for (const auto& s : samples) {
        const double* za = z[s.anchor];
        const double scale = anchor_scale / static_cast<double>(s.positives.size());
        for (std::size_t p : s.positives) {
            const double* zp = z[p];
            const double ep = std::exp(dot(za, zp, h) / tau);
            double denom = ep;
            for (std::size_t q : s.negatives) denom += std::exp(dot(za, z[q], h) / tau);
            out.value += -std::log(ep / denom) * scale;

            const double d_pos = (ep / denom - 1.0) / tau * scale;
            axpy(d_pos, zp, out.dz[s.anchor], h);
            axpy(d_pos, za, out.dz[p], h);
            for (std::size_t q : s.negatives) {
                const double eq = std::exp(dot(za, z[q], h) / tau);
                const double d_neg = eq / denom / tau * scale;
                axpy(d_neg, z[q], out.dz[s.anchor], h);
                axpy(d_neg, za, out.dz[q], h);
            }
        }
    }
    return out;
}

CeGrad ce_loss(const Matrix& z, const ClassifierHead& head, const std::vector<int>& labels) {
    const std::size_t n = z.rows;
    const std::size_t h = z.cols;
    const std::size_t k = head.w2.rows;

    CeGrad out;
    out.dz = Matrix(n, h);
    out.dw2 = Matrix(k, h);
    out.db2.assign(k, 0.0);
    const double scale = n ? 1.0 / static_cast<double>(n) : 0.0;

    std::vector<double> probs(k);
    for (std::size_t i = 0; i < n; ++i) {
        double total = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            probs[c] = std::exp(dot(head.w2[c], z[i], h) + head.b2[c]);
            total += probs[c];
        }
        for (std::size_t c = 0; c < k; ++c) probs[c] /= total;
        out.value += -std::log(probs[static_cast<std::size_t>(labels[i])]) * scale;

        for (std::size_t c = 0; c < k; ++c) {
            double g = probs[c];
            if (c == static_cast<std::size_t>(labels[i])) g -= 1.0;
            g *= scale;
            axpy(g, head.w2[c], out.dz[i], h);
            axpy(g, z[i], out.dw2[c], h);
            out.db2[c] += g;
        }
    }
    return out;
}

Matrix compute_centers(const Matrix& z, const std::vector<int>& labels, int k_known) {
    Matrix centers(k_known, z.cols);
    std::vector<long> counts(k_known, 0);
    for (std::size_t i = 0; i < z.rows; ++i) {
        for (std::size_t c = 0; c < z.cols; ++c) centers[labels[i]][c] += z[i][c];
        ++counts[labels[i]];
    }
    for (int g = 0; g < k_known; ++g) {
        if (counts[g] == 0) throw std::runtime_error("ref::compute_centers: empty class");
        for (std::size_t c = 0; c < z.cols; ++c) centers[g][c] /= static_cast<double>(counts[g]);
    }
    return centers;
}

RadiusGrad adb_loss(const BoundaryModel& model, const Matrix& z, const std::vector<int>& labels) {
    RadiusGrad out;
    out.d_radii.assign(model.radii.size(), 0.0);
    const double scale = z.rows ? 1.0 / static_cast<double>(z.rows) : 0.0;
    for (std::size_t i = 0; i < z.rows; ++i) {
        const auto y = static_cast<std::size_t>(labels[i]);
        const double d = euclidean(z[i], model.centers[y], z.cols);
        const double delta = model.radii[y];
        if (d > delta) {
            out.value += (d - delta) * scale;
            out.d_radii[y] -= scale;
        } else {
            out.value += (delta - d) * scale;
            out.d_radii[y] += scale;
        }
    }
    return out;
}

RadiusGrad adbes_loss(const BoundaryModel& model, const Matrix& z, const std::vector<int>& labels,
                      const Matrix& negatives, const std::vector<int>& negative_labels,
                      const Stage2Config& config) {
    RadiusGrad out = adb_loss(model, z, labels);
    const double scale = z.rows ? 1.0 / static_cast<double>(z.rows) : 0.0;
    for (std::size_t i = 0; i < z.rows; ++i) {
        if (negative_labels[i] == labels[i])
            throw std::runtime_error("ref::adbes_loss: negative shares the anchor's label");
        const auto y = static_cast<std::size_t>(labels[i]);
        const double d_neg = euclidean(negatives[i], model.centers[y], z.cols);
        const double delta = model.radii[y];
        if (d_neg > delta + config.e) {
            out.value += config.eta * (d_neg - (delta + config.e)) * scale;
            out.d_radii[y] -= config.eta * scale;
        } else if (d_neg < delta + config.s) {
            out.value += config.eta * ((delta + config.s) - d_neg) * scale;
            out.d_radii[y] += config.eta * scale;
        }
    }
    return out;
}

EvalReport evaluate(const BoundaryModel& model, const Matrix& z, const std::vector<int>& labels,
                    double ratio) {
    const int k_known = static_cast<int>(model.radii.size());
    const int n_classes = k_known + 1;

    EvalReport report;
    report.confusion.assign(n_classes, std::vector<long>(n_classes, 0));
    long correct = 0;
    for (std::size_t i = 0; i < z.rows; ++i) {
        int pred = k_known;
        double best = 1e300;
        int nearest = 0;
        for (int c = 0; c < k_known; ++c) {
            const double d = euclidean(z[i], model.centers[c], z.cols);
            if (d <= ratio * model.radii[c]) pred = 0;  // provisional: inside at least one
            if (d < best) {
                best = d;
                nearest = c;
            }
        }
        if (pred != k_known) pred = nearest;
        ++report.confusion[labels[i]][pred];
        if (pred == labels[i]) ++correct;
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(z.rows);

    report.per_class.resize(n_classes);
    double sum_known = 0.0;
    for (int c = 0; c < n_classes; ++c) {
        long tp = report.confusion[c][c], fp = 0, fn = 0;
        for (int o = 0; o < n_classes; ++o) {
            if (o == c) continue;
            fp += report.confusion[o][c];
            fn += report.confusion[c][o];
        }
        auto& m = report.per_class[c];
        m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        m.f1 = m.precision + m.recall == 0.0 ? 0.0
                                             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
        if (c < k_known) sum_known += m.f1;
    }
    report.macro_f1_known = k_known ? sum_known / k_known : 0.0;
    report.f1_unknown = report.per_class[k_known].f1;
    report.macro_f1_all = (sum_known + report.f1_unknown) / n_classes;
    return report;
}

std::pair<double, double> similarity_curves(const Matrix& z, const std::vector<int>& labels) {
    double intra = 0.0, inter = 0.0;
    long n_intra = 0, n_inter = 0;
    for (std::size_t i = 0; i < z.rows; ++i) {
        for (std::size_t j = i + 1; j < z.rows; ++j) {
            const double denom = norm2(z[i], z.cols) * norm2(z[j], z.cols);
            const double cos = denom == 0.0 ? 0.0 : dot(z[i], z[j], z.cols) / denom;
            if (labels[i] == labels[j]) {
                intra += cos;
                ++n_intra;
            } else {
                inter += cos;
                ++n_inter;
            }
        }
    }
    return {n_intra ? intra / n_intra : 0.0, n_inter ? inter / n_inter : 0.0};
}

}  // namespace openintent::ref
