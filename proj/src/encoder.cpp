#include "openintent/encoder.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace openintent {

EncoderModel EncoderModel::init(std::size_t vocab_size, std::size_t d_tok, std::size_t hidden,
                                std::uint64_t seed) {
    EncoderModel m;
    m.vocab_size = vocab_size;
    m.d_tok = d_tok;
    m.hidden = hidden;
    m.seed = seed;
    m.token_embeddings = Matrix(vocab_size, d_tok);
    m.w1 = Matrix(hidden, d_tok);
    m.b1.assign(hidden, 0.0);

    Rng rng(seed);
    for (double& v : m.token_embeddings.data) v = rng.uniform(-0.1, 0.1);
    for (double& v : m.w1.data) v = rng.uniform(-0.1, 0.1);
    for (double& v : m.b1) v = rng.uniform(-0.1, 0.1);
    return m;
}

namespace {

void check_model(const EncoderModel& model) {
    if (!model.token_embeddings.all_finite() || !model.w1.all_finite())
        throw std::runtime_error("encoder parameters contain non-finite values");
    for (double v : model.b1) {
        if (!std::isfinite(v)) throw std::runtime_error("encoder parameters contain non-finite values");
    }
}

}  // namespace

EmbeddingBatch encode(const EncoderModel& model, const std::vector<LabeledInstance>& batch) {
    check_model(model);
    const std::size_t n = batch.size();
    const std::size_t d = model.d_tok;
    const std::size_t h = model.hidden;

    EmbeddingBatch out;
    out.z = Matrix(n, h);
    out.pre_norm = Matrix(n, h);
    out.pooled = Matrix(n, d);
    out.norms.assign(n, 0.0);

    // -1: ok, -2: no content tokens, otherwise: zero pre-norm vector.
    std::vector<int> status(n, -1);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const auto& ids = batch[i].token_ids;
        double* o = out.pooled[i];
        std::size_t count = 0;
        for (std::int32_t t : ids) {
            if (t == Vocabulary::kPad) continue;
            axpy(1.0, model.token_embeddings[static_cast<std::size_t>(t)], o, d);
            ++count;
        }
        if (count == 0) {
            status[i] = -2;
            continue;
        }
        const double inv = 1.0 / static_cast<double>(count);
        for (std::size_t c = 0; c < d; ++c) o[c] *= inv;

        double* hrow = out.pre_norm[i];
        for (std::size_t r = 0; r < h; ++r) {
            const double a = dot(model.w1[r], o, d) + model.b1[r];
            hrow[r] = a > 0.0 ? a : 0.0;
        }
        const double nrm = norm2(hrow, h);
        out.norms[i] = nrm;
        if (nrm == 0.0) {
            status[i] = 0;
            continue;
        }
        double* zrow = out.z[i];
        for (std::size_t r = 0; r < h; ++r) zrow[r] = hrow[r] / nrm;
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (status[i] == -2)
            throw std::runtime_error("instance " + std::to_string(i) + " has no content tokens");
        if (status[i] == 0)
            throw std::runtime_error("instance " + std::to_string(i) +
                                     " encodes to the zero vector (all ReLU units dead)");
    }
    return out;
}

EncoderGradients encode_backward(const EncoderModel& model,
                                 const std::vector<LabeledInstance>& batch,
                                 const EmbeddingBatch& forward, const Matrix& upstream) {
    const std::size_t n = batch.size();
    const std::size_t d = model.d_tok;
    const std::size_t h = model.hidden;
    if (upstream.rows != n || upstream.cols != h)
        throw std::invalid_argument("encode_backward: upstream shape mismatch");

    // Per-instance intermediates first (parallel, disjoint rows), then
    // reductions with a fixed summation order so results do not depend on the
    // thread count.
    Matrix da(n, h);  // dL/d(pre-activation)
    Matrix dpool(n, d);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* g = upstream[i];
        const double* zrow = forward.z[i];
        const double* hrow = forward.pre_norm[i];
        // 1e-12 keeps the division bounded just above the zero-norm error case.
        const double inv_norm = 1.0 / (forward.norms[i] + 1e-12);
        const double radial = dot(g, zrow, h);
        double* da_row = da[i];
        for (std::size_t r = 0; r < h; ++r) {
            const double dh = (g[r] - radial * zrow[r]) * inv_norm;
            da_row[r] = hrow[r] > 0.0 ? dh : 0.0;  // ReLU mask
        }
        double* do_row = dpool[i];
        for (std::size_t r = 0; r < h; ++r) {
            if (da_row[r] != 0.0) axpy(da_row[r], model.w1[r], do_row, d);
        }
    }

    EncoderGradients grads;
    grads.token_embeddings = Matrix(model.vocab_size, d);
    grads.w1 = Matrix(h, d);
    grads.b1.assign(h, 0.0);

    // dW1[r] = sum_i da[i][r] * o_i; each output row is owned by one thread.
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t rr = 0; rr < static_cast<std::ptrdiff_t>(h); ++rr) {
        const auto r = static_cast<std::size_t>(rr);
        double* w_row = grads.w1[r];
        double bsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = da[i][r];
            if (a == 0.0) continue;
            axpy(a, forward.pooled[i], w_row, d);
            bsum += a;
        }
        grads.b1[r] = bsum;
    }

    // Token scatter: postings are built serially (index bookkeeping only),
    // then each distinct token row is accumulated by a single thread in
    // instance order.
    std::vector<std::vector<std::pair<std::size_t, double>>> postings(model.vocab_size);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t count = 0;
        for (std::int32_t t : batch[i].token_ids) {
            if (t != Vocabulary::kPad) ++count;
        }
        if (count == 0) continue;
        const double inv = 1.0 / static_cast<double>(count);
        for (std::int32_t t : batch[i].token_ids) {
            if (t == Vocabulary::kPad) continue;
            postings[static_cast<std::size_t>(t)].push_back({i, inv});
        }
    }
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t tt = 0; tt < static_cast<std::ptrdiff_t>(model.vocab_size); ++tt) {
        const auto t = static_cast<std::size_t>(tt);
        double* e_row = grads.token_embeddings[t];
        for (const auto& [i, weight] : postings[t]) {
            axpy(weight, dpool[i], e_row, d);
        }
    }
    return grads;
}

namespace {

void write_f32_le(std::ofstream& out, const double* values, std::size_t n) {
    std::vector<unsigned char> buf(n * 4);
    for (std::size_t i = 0; i < n; ++i) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
        buf[i * 4 + 0] = static_cast<unsigned char>(bits & 0xFF);
        buf[i * 4 + 1] = static_cast<unsigned char>((bits >> 8) & 0xFF);
        buf[i * 4 + 2] = static_cast<unsigned char>((bits >> 16) & 0xFF);
        buf[i * 4 + 3] = static_cast<unsigned char>((bits >> 24) & 0xFF);
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

void read_f32_le(std::ifstream& in, double* values, std::size_t n, const std::string& path) {
    std::vector<unsigned char> buf(n * 4);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
        throw std::runtime_error("checkpoint truncated: " + path);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t bits = static_cast<std::uint32_t>(buf[i * 4 + 0]) |
                                   (static_cast<std::uint32_t>(buf[i * 4 + 1]) << 8) |
                                   (static_cast<std::uint32_t>(buf[i * 4 + 2]) << 16) |
                                   (static_cast<std::uint32_t>(buf[i * 4 + 3]) << 24);
        values[i] = static_cast<double>(std::bit_cast<float>(bits));
    }
}

}  // namespace

void save_checkpoint(const EncoderModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    nlohmann::json header;
    header["vocab_size"] = model.vocab_size;
    header["d_tok"] = model.d_tok;
    header["H"] = model.hidden;
    header["seed"] = model.seed;
    out << header.dump() << "\n";
    write_f32_le(out, model.token_embeddings.data.data(), model.token_embeddings.size());
    write_f32_le(out, model.w1.data.data(), model.w1.size());
    write_f32_le(out, model.b1.data(), model.b1.size());
}

EncoderModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string header_line;
    if (!std::getline(in, header_line)) throw std::runtime_error("checkpoint missing header: " + path);
    const auto header = nlohmann::json::parse(header_line);

    EncoderModel m;
    m.vocab_size = header.at("vocab_size").get<std::size_t>();
    m.d_tok = header.at("d_tok").get<std::size_t>();
    m.hidden = header.at("H").get<std::size_t>();
    m.seed = header.at("seed").get<std::uint64_t>();
    m.token_embeddings = Matrix(m.vocab_size, m.d_tok);
    m.w1 = Matrix(m.hidden, m.d_tok);
    m.b1.assign(m.hidden, 0.0);
    read_f32_le(in, m.token_embeddings.data.data(), m.token_embeddings.size(), path);
    read_f32_le(in, m.w1.data.data(), m.w1.size(), path);
    read_f32_le(in, m.b1.data(), m.b1.size(), path);
    return m;
}

Matrix load_precomputed(const std::string& path, std::size_t hidden) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p < end) {
            while (p < end && (*p == ',' || *p == ' ')) ++p;
            if (p >= end) break;
            double v = 0.0;
            const auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc{})
                throw std::runtime_error(path + ": bad number on line " + std::to_string(line_no));
            if (!std::isfinite(v))
                throw std::runtime_error(path + ": non-finite value on line " + std::to_string(line_no));
            row.push_back(v);
            p = next;
        }
        if (row.size() != hidden)
            throw std::runtime_error(path + ": line " + std::to_string(line_no) + " has " +
                                     std::to_string(row.size()) + " values, expected " +
                                     std::to_string(hidden));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": no embedding rows");

    Matrix z(rows.size(), hidden);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const double nrm = norm2(rows[i].data(), hidden);
        if (nrm == 0.0)
            throw std::runtime_error(path + ": zero vector at row " + std::to_string(i));
        for (std::size_t c = 0; c < hidden; ++c) z[i][c] = rows[i][c] / nrm;
    }
    return z;
}

}  // namespace openintent
