#pragma once

#include <string>
#include <utility>
#include <vector>

#include "openintent/boundary.hpp"
#include "openintent/matrix.hpp"
#include "openintent/rng.hpp"

namespace openintent {

struct Prediction {
    int label = 0;                   // in [0, k_known]; k_known is the open label
    std::vector<double> distances;   // to each known center
};

struct PerClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalReport {
    double accuracy = 0.0;
    double macro_f1_all = 0.0;
    double macro_f1_known = 0.0;
    double f1_unknown = 0.0;
    std::vector<PerClassMetrics> per_class;       // k_known + 1 entries, open last
    std::vector<std::vector<long>> confusion;     // [true][predicted]
};

// Open iff z lies outside every scaled boundary; otherwise the nearest known
// center wins, whether or not its boundary contains z.
Prediction predict(const BoundaryModel& model, const double* z, double ratio = 1.0);

// True labels use the dense convention from apply_split: open class == k_known.
EvalReport evaluate(const BoundaryModel& model, const Matrix& z, const std::vector<int>& labels,
                    double ratio = 1.0);

std::vector<std::pair<double, double>> boundary_sweep(const BoundaryModel& model, const Matrix& z,
                                                      const std::vector<int>& labels,
                                                      const std::vector<double>& ratios);

// Default ratio grid 0.80, 0.85, ..., 1.20.
std::vector<double> default_sweep_ratios();

// Per-instance distance to the nearest known center, as CSV.
void export_distances(const BoundaryModel& model, const Matrix& z, const std::vector<int>& labels,
                      const std::vector<std::string>& label_names, const std::string& path);

// Mean pairwise cosine similarity within and across classes, sampling at most
// per_class_cap instances per class.
std::pair<double, double> similarity_curves(const Matrix& z, const std::vector<int>& labels,
                                            Rng& rng, int per_class_cap = 10);

void save_report_json(const EvalReport& report, const std::vector<std::string>& label_names,
                      const std::string& path);
void save_sweep_csv(const std::vector<std::pair<double, double>>& sweep, const std::string& path);

}  // namespace openintent
