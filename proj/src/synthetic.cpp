#include "openintent/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "openintent/matrix.hpp"
#include "openintent/rng.hpp"
#include "openintent/util.hpp"

namespace openintent {

void SyntheticConfig::validate() const {
    if (classes < 2) throw std::invalid_argument("synthetic: need at least 2 classes");
    if (per_class < 3) throw std::invalid_argument("synthetic: need at least 3 instances per class");
    if (dim < 2) throw std::invalid_argument("synthetic: dim must be >= 2");
    if (spread <= 0.0) throw std::invalid_argument("synthetic: spread must be positive");
    if (tokens_per_instance < 1) throw std::invalid_argument("synthetic: tokens_per_instance >= 1");
    if (vocab_tokens < 2) throw std::invalid_argument("synthetic: vocab_tokens >= 2");
    if (concentration <= 0.0) throw std::invalid_argument("synthetic: concentration must be positive");
    if (train_frac <= 0.0 || valid_frac < 0.0 || train_frac + valid_frac >= 1.0)
        throw std::invalid_argument("synthetic: split fractions must leave room for a test share");
}

namespace {

void random_direction(Rng& rng, double* v, int dim) {
    double nrm = 0.0;
    do {
        for (int d = 0; d < dim; ++d) v[d] = rng.normal();
        nrm = norm2(v, dim);
    } while (nrm < 1e-9);
    for (int d = 0; d < dim; ++d) v[d] /= nrm;
}

std::string padded(const char* prefix, int value, int width) {
    std::string digits = std::to_string(value);
    std::string out(prefix);
    for (int i = static_cast<int>(digits.size()); i < width; ++i) out.push_back('0');
    return out + digits;
}

}  // namespace

void generate_synthetic(const SyntheticConfig& config, const std::string& out_dir) {
    config.validate();
    ensure_dir(out_dir);

    Rng rng(config.seed);
    Matrix class_dirs(config.classes, config.dim);
    for (int g = 0; g < config.classes; ++g) random_direction(rng, class_dirs[g], config.dim);
    Matrix codebook(config.vocab_tokens, config.dim);
    for (int t = 0; t < config.vocab_tokens; ++t) random_direction(rng, codebook[t], config.dim);

    const int n_train = static_cast<int>(std::lround(config.train_frac * config.per_class));
    const int n_valid = static_cast<int>(std::lround(config.valid_frac * config.per_class));
    const int n_test = config.per_class - n_train - n_valid;
    if (n_train < 1 || n_test < 1)
        throw std::invalid_argument("synthetic: split fractions leave an empty split");

    std::vector<double> x(config.dim);
    std::vector<double> cumulative(config.vocab_tokens);

    auto emit_instance = [&](std::ofstream& out, int g) {
        // Latent point near the class direction, back on the sphere.
        for (int d = 0; d < config.dim; ++d)
            x[d] = class_dirs[g][d] + config.spread * rng.normal();
        const double nrm = norm2(x.data(), config.dim);
        for (int d = 0; d < config.dim; ++d) x[d] /= nrm;

        // Token weights ~ exp(concentration * <u_t, x>), sampled by inverse CDF.
        double mx = -1e30;
        for (int t = 0; t < config.vocab_tokens; ++t) {
            cumulative[t] = config.concentration * dot(codebook[t], x.data(), config.dim);
            mx = std::max(mx, cumulative[t]);
        }
        double total = 0.0;
        for (int t = 0; t < config.vocab_tokens; ++t) {
            total += std::exp(cumulative[t] - mx);
            cumulative[t] = total;
        }
        for (int n = 0; n < config.tokens_per_instance; ++n) {
            const double r = rng.next_double() * total;
            const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
            const int t = static_cast<int>(std::min<std::ptrdiff_t>(
                it - cumulative.begin(), config.vocab_tokens - 1));
            if (n > 0) out << ' ';
            out << padded("w", t, 3);
        }
        out << '\t' << padded("c", g, 2) << '\n';
    };

    const struct {
        const char* name;
        int count;
    } splits[] = {{"train.tsv", n_train}, {"valid.tsv", n_valid}, {"test.tsv", n_test}};

    for (const auto& split : splits) {
        if (split.count == 0) continue;
        const std::string path = out_dir + "/" + split.name;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write " + path);
        for (int g = 0; g < config.classes; ++g) {
            for (int i = 0; i < split.count; ++i) emit_instance(out, g);
        }
    }
}

}  // namespace openintent
