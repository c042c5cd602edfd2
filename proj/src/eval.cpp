#include "openintent/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "openintent/util.hpp"

namespace openintent {

Prediction predict(const BoundaryModel& model, const double* z, double ratio) {
    if (ratio <= 0.0) throw std::invalid_argument("predict: ratio must be positive");
    const std::size_t k = model.radii.size();
    const std::size_t h = model.centers.cols;

    Prediction pred;
    pred.distances.resize(k);
    bool inside_any = false;
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
        const double d = euclidean(z, model.centers[c], h);
        pred.distances[c] = d;
        if (d <= ratio * model.radii[c]) inside_any = true;
        if (d < best) {
            best = d;
            nearest = c;
        }
    }
    pred.label = inside_any ? static_cast<int>(nearest) : static_cast<int>(k);
    return pred;
}

EvalReport evaluate(const BoundaryModel& model, const Matrix& z, const std::vector<int>& labels,
                    double ratio) {
    if (z.rows == 0) throw std::invalid_argument("evaluate: empty test set");
    if (labels.size() != z.rows) throw std::invalid_argument("evaluate: labels/Z mismatch");
    const int k_known = static_cast<int>(model.radii.size());
    const int n_classes = k_known + 1;
    for (int y : labels) {
        if (y < 0 || y > k_known) throw std::invalid_argument("evaluate: label out of range");
    }

    std::vector<int> predicted(z.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(z.rows); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        predicted[i] = predict(model, z[i], ratio).label;
    }

    EvalReport report;
    report.confusion.assign(n_classes, std::vector<long>(n_classes, 0));
    long correct = 0;
    for (std::size_t i = 0; i < z.rows; ++i) {
        ++report.confusion[labels[i]][predicted[i]];
        if (labels[i] == predicted[i]) ++correct;
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(z.rows);

    report.per_class.resize(n_classes);
    for (int c = 0; c < n_classes; ++c) {
        long tp = report.confusion[c][c];
        long fp = 0, fn = 0;
        for (int o = 0; o < n_classes; ++o) {
            if (o == c) continue;
            fp += report.confusion[o][c];
            fn += report.confusion[c][o];
        }
        auto& m = report.per_class[c];
        m.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        m.f1 = m.precision + m.recall == 0.0
                   ? 0.0
                   : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    }

    double sum_known = 0.0;
    for (int c = 0; c < k_known; ++c) sum_known += report.per_class[c].f1;
    report.macro_f1_known = k_known ? sum_known / k_known : 0.0;
    report.f1_unknown = report.per_class[k_known].f1;
    report.macro_f1_all = (sum_known + report.f1_unknown) / n_classes;
    return report;
}

std::vector<std::pair<double, double>> boundary_sweep(const BoundaryModel& model, const Matrix& z,
                                                      const std::vector<int>& labels,
                                                      const std::vector<double>& ratios) {
    std::vector<std::pair<double, double>> table;
    table.reserve(ratios.size());
    for (double r : ratios) table.push_back({r, evaluate(model, z, labels, r).macro_f1_all});
    return table;
}

std::vector<double> default_sweep_ratios() {
    std::vector<double> ratios;
    for (int i = 0; i <= 8; ++i) ratios.push_back(0.80 + 0.05 * i);
    return ratios;
}

void export_distances(const BoundaryModel& model, const Matrix& z, const std::vector<int>& labels,
                      const std::vector<std::string>& label_names, const std::string& path) {
    if (labels.size() != z.rows) throw std::invalid_argument("export_distances: labels/Z mismatch");
    const int k_known = static_cast<int>(model.radii.size());

    std::vector<Prediction> preds(z.rows);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(z.rows); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        preds[i] = predict(model, z[i]);
    }

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write distance table: " + path);
    out << "# distances are raw euclidean values; no clipping is applied\n";
    out << "instance_id,true_label,assigned_center,distance,radius_of_that_center,is_open_truth\n";
    for (std::size_t i = 0; i < z.rows; ++i) {
        std::size_t nearest = 0;
        for (std::size_t c = 1; c < preds[i].distances.size(); ++c) {
            if (preds[i].distances[c] < preds[i].distances[nearest]) nearest = c;
        }
        out << i << "," << label_names.at(labels[i]) << "," << label_names.at(nearest) << ","
            << fmt_double(preds[i].distances[nearest]) << "," << fmt_double(model.radii[nearest])
            << "," << (labels[i] == k_known ? 1 : 0) << "\n";
    }
}

std::pair<double, double> similarity_curves(const Matrix& z, const std::vector<int>& labels,
                                            Rng& rng, int per_class_cap) {
    if (labels.size() != z.rows) throw std::invalid_argument("similarity_curves: labels/Z mismatch");
    int max_label = -1;
    for (int y : labels) max_label = std::max(max_label, y);

    std::vector<std::vector<std::size_t>> members(max_label + 1);
    for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);

    // Sample up to per_class_cap instances per class, then take all pairs.
    std::vector<std::size_t> chosen;
    std::vector<int> chosen_labels;
    for (int c = 0; c <= max_label; ++c) {
        auto& pool = members[c];
        if (static_cast<int>(pool.size()) > per_class_cap) {
            for (int i = 0; i < per_class_cap; ++i) {
                const std::size_t j = i + rng.uniform_index(pool.size() - i);
                std::swap(pool[i], pool[j]);
            }
            pool.resize(per_class_cap);
        }
        for (std::size_t idx : pool) {
            chosen.push_back(idx);
            chosen_labels.push_back(c);
        }
    }

    const std::size_t n = chosen.size();
    const std::size_t h = z.cols;
    std::vector<double> intra_sum(n, 0.0), inter_sum(n, 0.0);
    std::vector<long> intra_cnt(n, 0), inter_cnt(n, 0);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* zi = z[chosen[i]];
        const double ni = norm2(zi, h);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double* zj = z[chosen[j]];
            const double denom = ni * norm2(zj, h);
            const double cos = denom == 0.0 ? 0.0 : dot(zi, zj, h) / denom;
            if (chosen_labels[i] == chosen_labels[j]) {
                intra_sum[i] += cos;
                ++intra_cnt[i];
            } else {
                inter_sum[i] += cos;
                ++inter_cnt[i];
            }
        }
    }

    double intra = 0.0, inter = 0.0;
    long n_intra = 0, n_inter = 0;
    for (std::size_t i = 0; i < n; ++i) {
        intra += intra_sum[i];
        inter += inter_sum[i];
        n_intra += intra_cnt[i];
        n_inter += inter_cnt[i];
    }
    return {n_intra ? intra / n_intra : 0.0, n_inter ? inter / n_inter : 0.0};
}

void save_report_json(const EvalReport& report, const std::vector<std::string>& label_names,
                      const std::string& path) {
    nlohmann::json j;
    j["accuracy"] = report.accuracy;
    j["macro_f1_all"] = report.macro_f1_all;
    j["macro_f1_known"] = report.macro_f1_known;
    j["f1_unknown"] = report.f1_unknown;
    auto per_class = nlohmann::json::array();
    for (std::size_t c = 0; c < report.per_class.size(); ++c) {
        per_class.push_back({{"label", label_names.at(c)},
                             {"precision", report.per_class[c].precision},
                             {"recall", report.per_class[c].recall},
                             {"f1", report.per_class[c].f1}});
    }
    j["per_class"] = std::move(per_class);
    j["confusion"] = report.confusion;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << j.dump(2) << "\n";
}

void save_sweep_csv(const std::vector<std::pair<double, double>>& sweep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write sweep: " + path);
    out << "ratio,macro_f1_all\n";
    for (const auto& [ratio, f1] : sweep)
        out << fmt_double(ratio) << "," << fmt_double(f1) << "\n";
}

}  // namespace openintent
