#include "openintent/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "openintent/losses.hpp"
#include "openintent/util.hpp"

namespace openintent {

BoundaryMode parse_boundary_mode(const std::string& name) {
    if (name == "adb") return BoundaryMode::kAdb;
    if (name == "adbes") return BoundaryMode::kAdbes;
    throw std::invalid_argument("unknown boundary mode: " + name + " (expected adb|adbes)");
}

const char* boundary_mode_name(BoundaryMode m) {
    return m == BoundaryMode::kAdb ? "adb" : "adbes";
}

void Stage2Config::validate() const {
    if (s < 0.0) throw std::invalid_argument("stage2: s must be >= 0");
    if (e <= s) throw std::invalid_argument("stage2: e must be greater than s");
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("stage2: eta must be in [0, 1]");
    if (learning_rate <= 0.0) throw std::invalid_argument("stage2: learning rate must be positive");
    if (batch_size < 1) throw std::invalid_argument("stage2: batch size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("stage2: epochs must be >= 1");
}

Matrix compute_centers(const Matrix& z, const std::vector<int>& labels, int k_known) {
    if (labels.size() != z.rows) throw std::invalid_argument("compute_centers: labels/Z mismatch");
    const std::size_t h = z.cols;

    std::vector<std::vector<std::size_t>> members(k_known);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= k_known)
            throw std::invalid_argument("compute_centers: label out of range");
        members[labels[i]].push_back(i);
    }
    for (int c = 0; c < k_known; ++c) {
        if (members[c].empty())
            throw std::runtime_error("compute_centers: class " + std::to_string(c) +
                                     " has no instances");
    }

    Matrix centers(k_known, h);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t cc = 0; cc < static_cast<std::ptrdiff_t>(k_known); ++cc) {
        const auto c = static_cast<std::size_t>(cc);
        double* row = centers[c];
        for (std::size_t i : members[c]) axpy(1.0, z[i], row, h);
        const double inv = 1.0 / static_cast<double>(members[c].size());
        for (std::size_t d = 0; d < h; ++d) row[d] *= inv;
    }
    return centers;
}

RadiusGrad adb_loss(const BoundaryModel& model, const Matrix& z, const std::vector<int>& labels) {
    if (labels.size() != z.rows) throw std::invalid_argument("adb_loss: labels/Z mismatch");
    const std::size_t n = z.rows;
    const std::size_t h = z.cols;
    const int k_known = static_cast<int>(model.radii.size());

    std::vector<double> values(n, 0.0);
    std::vector<double> signs(n, 0.0);  // dL/d(delta_{y_i}) per instance

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const int y = labels[i];
        if (y < 0 || y >= k_known) continue;  // validated below
        const double d = euclidean(z[i], model.centers[static_cast<std::size_t>(y)], h);
        const double delta = model.radii[static_cast<std::size_t>(y)];
        if (d > delta) {
            values[i] = d - delta;
            signs[i] = -1.0;
        } else {
            values[i] = delta - d;
            signs[i] = 1.0;
        }
    }
    for (int y : labels) {
        if (y < 0 || y >= k_known) throw std::invalid_argument("adb_loss: label out of range");
    }

    RadiusGrad out;
    out.d_radii.assign(model.radii.size(), 0.0);
    const double scale = n ? 1.0 / static_cast<double>(n) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.value += values[i] * scale;
        out.d_radii[static_cast<std::size_t>(labels[i])] += signs[i] * scale;
    }
    return out;
}

RadiusGrad adbes_loss(const BoundaryModel& model, const Matrix& z, const std::vector<int>& labels,
                      const Matrix& negatives, const std::vector<int>& negative_labels,
                      const Stage2Config& config) {
    config.validate();
    if (negatives.rows != z.rows || negatives.cols != z.cols)
        throw std::invalid_argument("adbes_loss: one negative per instance required");
    if (negative_labels.size() != z.rows)
        throw std::invalid_argument("adbes_loss: negative labels size mismatch");
    for (std::size_t i = 0; i < z.rows; ++i) {
        if (negative_labels[i] == labels[i])
            throw std::invalid_argument("adbes_loss: negative shares the anchor's label at row " +
                                        std::to_string(i));
    }

    RadiusGrad out = adb_loss(model, z, labels);

    const std::size_t n = z.rows;
    const std::size_t h = z.cols;
    std::vector<double> es_values(n, 0.0);
    std::vector<double> es_signs(n, 0.0);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto y = static_cast<std::size_t>(labels[i]);
        const double d_neg = euclidean(negatives[i], model.centers[y], h);
        const double delta = model.radii[y];
        if (d_neg > delta + config.e) {
            es_values[i] = config.eta * (d_neg - (delta + config.e));
            es_signs[i] = -config.eta;  // expand
        } else if (d_neg < delta + config.s) {
            es_values[i] = config.eta * ((delta + config.s) - d_neg);
            es_signs[i] = config.eta;  // shrink
        }
    }

    const double scale = n ? 1.0 / static_cast<double>(n) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.value += es_values[i] * scale;
        out.d_radii[static_cast<std::size_t>(labels[i])] += es_signs[i] * scale;
    }
    return out;
}

BoundaryTrainResult train_boundary(const Matrix& z, const std::vector<int>& labels, int k_known,
                                   const Stage2Config& config) {
    config.validate();
    if (z.rows == 0) throw std::invalid_argument("train_boundary: no embeddings");

    BoundaryTrainResult result;
    result.model.centers = compute_centers(z, labels, k_known);
    BoundaryModel& model = result.model;

    // Radii start at the mean in-class distance so both branches of the ADB
    // loss are active from the first step.
    const std::size_t h = z.cols;
    std::vector<double> dist_sum(k_known, 0.0);
    std::vector<long> counts(k_known, 0);
    for (std::size_t i = 0; i < z.rows; ++i) {
        const auto y = static_cast<std::size_t>(labels[i]);
        dist_sum[y] += euclidean(z[i], model.centers[y], h);
        ++counts[y];
    }
    model.radii.assign(k_known, 0.0);
    for (int c = 0; c < k_known; ++c)
        model.radii[c] = dist_sum[c] / static_cast<double>(counts[c]);

    ClassIndex index(labels, k_known);
    Rng rng(config.seed);
    Adam opt(model.radii.size(), config.learning_rate);

    std::vector<std::size_t> order(z.rows);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    long step_index = 0;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);

            // The batch is expressed as row indices into the frozen Z.
            Matrix zb(stop - start, h);
            std::vector<int> yb(stop - start);
            for (std::size_t j = start; j < stop; ++j) {
                std::copy(z[order[j]], z[order[j]] + h, zb[j - start]);
                yb[j - start] = labels[order[j]];
            }

            RadiusGrad grad;
            if (config.mode == BoundaryMode::kAdb) {
                grad = adb_loss(model, zb, yb);
            } else {
                // One class-balanced negative per anchor, drawn from the known
                // classes ("unknown" instances are never available here).
                const std::size_t b = stop - start;
                Matrix zneg(b, h);
                std::vector<int> yneg(b);
                for (std::size_t j = 0; j < b; ++j) {
                    const ContrastiveSample s =
                        sample_contrastive(index, order[start + j], 1, 1, rng);
                    const std::size_t neg = s.negatives[0];
                    std::copy(z[neg], z[neg] + h, zneg[j]);
                    yneg[j] = labels[neg];
                }
                grad = adbes_loss(model, zb, yb, zneg, yneg, config);
            }

            if (!std::isfinite(grad.value))
                throw std::runtime_error("stage-2 loss diverged at step " + std::to_string(step_index));
            opt.step(model.radii.data(), grad.d_radii.data(), model.radii.size());
            for (double& r : model.radii) r = std::max(0.0, r);
            ++step_index;
        }
        result.radius_trace.push_back(model.radii);
    }
    return result;
}

void save_boundary(const BoundaryModel& model, const std::vector<std::string>& labels,
                   const std::string& path) {
    nlohmann::json j;
    j["H"] = model.centers.cols;
    j["labels"] = labels;
    auto centers = nlohmann::json::array();
    for (std::size_t c = 0; c < model.centers.rows; ++c) {
        auto row = nlohmann::json::array();
        for (std::size_t d = 0; d < model.centers.cols; ++d) row.push_back(model.centers[c][d]);
        centers.push_back(std::move(row));
    }
    j["centers"] = std::move(centers);
    j["radii"] = model.radii;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write boundary model: " + path);
    out << j.dump(2) << "\n";
}

BoundaryModel load_boundary(const std::string& path, std::vector<std::string>* labels) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open boundary model: " + path);
    nlohmann::json j;
    in >> j;

    BoundaryModel model;
    const auto h = j.at("H").get<std::size_t>();
    const auto& centers = j.at("centers");
    model.centers = Matrix(centers.size(), h);
    for (std::size_t c = 0; c < centers.size(); ++c) {
        const auto row = centers[c].get<std::vector<double>>();
        if (row.size() != h) throw std::runtime_error("boundary model row width mismatch: " + path);
        std::copy(row.begin(), row.end(), model.centers[c]);
    }
    model.radii = j.at("radii").get<std::vector<double>>();
    if (model.radii.size() != model.centers.rows)
        throw std::runtime_error("boundary model radii/centers mismatch: " + path);
    if (labels) *labels = j.at("labels").get<std::vector<std::string>>();
    return model;
}

void save_radius_trace(const std::vector<std::vector<double>>& trace,
                       const std::vector<std::string>& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write radius trace: " + path);
    out << "epoch";
    for (const auto& label : labels) out << "," << label;
    out << "\n";
    for (std::size_t e = 0; e < trace.size(); ++e) {
        out << (e + 1);
        for (double r : trace[e]) out << "," << fmt_double(r);
        out << "\n";
    }
}

}  // namespace openintent
