#include "openintent/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "openintent/rng.hpp"

namespace openintent {

const char* split_name(Split s) {
    switch (s) {
        case Split::kTrain: return "train";
        case Split::kValid: return "valid";
        case Split::kTest: return "test";
    }
    return "?";
}

RawCorpus load_corpus(const std::string& path, Split split) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);

    RawCorpus corpus;
    corpus.split = split;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 == line.size()) {
            throw std::runtime_error(path + ": malformed line " + std::to_string(line_no) +
                                     " (expected text<TAB>label)");
        }
        corpus.records.push_back({line.substr(0, tab), line.substr(tab + 1)});
    }
    if (corpus.records.empty()) throw std::runtime_error(path + ": empty corpus");
    return corpus;
}

std::vector<std::string> tokenize_text(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : text) {
        const auto uc = static_cast<unsigned char>(ch);
        if (std::isspace(uc)) {
            if (!current.empty()) {
                tokens.push_back(current);
                current.clear();
            }
        } else if (!std::ispunct(uc)) {
            current.push_back(static_cast<char>(std::tolower(uc)));
        }
    }
    if (!current.empty()) tokens.push_back(current);
    return tokens;
}

Vocabulary build_vocabulary(const RawCorpus& corpus, int min_freq) {
    if (corpus.records.empty()) throw std::invalid_argument("build_vocabulary: empty corpus");

    std::unordered_map<std::string, std::int64_t> freq;
    for (const auto& rec : corpus.records) {
        for (auto& tok : tokenize_text(rec.text)) ++freq[tok];
    }

    std::vector<std::pair<std::string, std::int64_t>> entries(freq.begin(), freq.end());
    std::erase_if(entries, [&](const auto& e) { return e.second < min_freq; });
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary vocab;
    vocab.id_to_token = {"<pad>", "<unk>"};
    vocab.token_to_id["<pad>"] = Vocabulary::kPad;
    vocab.token_to_id["<unk>"] = Vocabulary::kUnk;
    for (const auto& [tok, _] : entries) {
        vocab.token_to_id[tok] = vocab.size();
        vocab.id_to_token.push_back(tok);
    }
    return vocab;
}

std::vector<std::string> label_universe(const RawCorpus& corpus) {
    std::set<std::string> labels;
    for (const auto& rec : corpus.records) labels.insert(rec.label);
    return {labels.begin(), labels.end()};
}

SplitPlan make_split_plan(int class_count, double proportion, std::uint64_t seed) {
    if (class_count < 2) throw std::invalid_argument("make_split_plan: need at least 2 classes");
    if (proportion <= 0.0 || proportion > 1.0)
        throw std::invalid_argument("make_split_plan: proportion must be in (0, 1]");

    const int known = static_cast<int>(std::lround(proportion * class_count));
    if (known < 1) throw std::invalid_argument("make_split_plan: proportion yields 0 known classes");

    std::vector<int> ids(class_count);
    for (int i = 0; i < class_count; ++i) ids[i] = i;

    // Partial Fisher-Yates: the first `known` slots are a uniform sample
    // without replacement.
    Rng rng(seed);
    for (int i = 0; i < known; ++i) {
        const std::size_t j = i + rng.uniform_index(ids.size() - i);
        std::swap(ids[i], ids[j]);
    }
    ids.resize(known);
    std::sort(ids.begin(), ids.end());

    SplitPlan plan;
    plan.proportion = proportion;
    plan.seed = seed;
    plan.known_ids = std::move(ids);
    return plan;
}

void resolve_plan(SplitPlan& plan, const std::vector<std::string>& universe) {
    if (!plan.known_labels.empty()) {
        // Persisted plan: map label strings back onto this universe.
        plan.known_ids.clear();
        for (const auto& label : plan.known_labels) {
            const auto it = std::lower_bound(universe.begin(), universe.end(), label);
            if (it == universe.end() || *it != label)
                throw std::runtime_error("split plan label not in corpus: " + label);
            plan.known_ids.push_back(static_cast<int>(it - universe.begin()));
        }
        std::sort(plan.known_ids.begin(), plan.known_ids.end());
        return;
    }
    plan.known_labels.reserve(plan.known_ids.size());
    for (int id : plan.known_ids) {
        if (id < 0 || id >= static_cast<int>(universe.size()))
            throw std::runtime_error("split plan id out of range for label universe");
        plan.known_labels.push_back(universe[id]);
    }
}

void save_plan(const SplitPlan& plan, const std::string& path) {
    nlohmann::json j;
    j["proportion"] = plan.proportion;
    j["seed"] = plan.seed;
    j["known_labels"] = plan.known_labels;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write split plan: " + path);
    out << j.dump(2) << "\n";
}

SplitPlan load_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open split plan: " + path);
    nlohmann::json j;
    in >> j;
    SplitPlan plan;
    plan.proportion = j.at("proportion").get<double>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.known_labels = j.at("known_labels").get<std::vector<std::string>>();
    std::sort(plan.known_labels.begin(), plan.known_labels.end());
    return plan;
}

RawCorpus known_subset(const RawCorpus& corpus, const SplitPlan& plan) {
    std::set<std::string> known(plan.known_labels.begin(), plan.known_labels.end());
    RawCorpus out;
    out.split = corpus.split;
    for (const auto& rec : corpus.records) {
        if (known.count(rec.label)) out.records.push_back(rec);
    }
    return out;
}

namespace {

std::vector<std::int32_t> encode_tokens(const Vocabulary& vocab, const std::string& text, int max_len) {
    std::vector<std::int32_t> ids;
    for (const auto& tok : tokenize_text(text)) {
        if (static_cast<int>(ids.size()) >= max_len) break;
        ids.push_back(vocab.lookup(tok));
    }
    return ids;
}

}  // namespace

SplitResult apply_split(const RawCorpus& corpus, const SplitPlan& plan, const Vocabulary& vocab,
                        int max_len) {
    if (max_len < 1) throw std::invalid_argument("apply_split: max_len must be positive");
    if (plan.known_labels.empty()) throw std::invalid_argument("apply_split: unresolved plan");

    const auto universe = label_universe(corpus);
    for (const auto& label : plan.known_labels) {
        if (!std::binary_search(universe.begin(), universe.end(), label))
            throw std::runtime_error(std::string(split_name(corpus.split)) +
                                     " corpus is missing known class: " + label);
    }

    std::unordered_map<std::string, int> dense;  // known label -> [0, K)
    for (const auto& label : plan.known_labels) {
        const int id = static_cast<int>(dense.size());
        dense[label] = id;
    }
    const int k_known = static_cast<int>(dense.size());
    const bool is_test = corpus.split == Split::kTest;

    SplitResult result;
    result.known_count = k_known;
    result.label_names = plan.known_labels;
    if (is_test) result.label_names.push_back(kOpenLabelName);

    std::size_t line_no = 0;
    for (const auto& rec : corpus.records) {
        ++line_no;
        const auto it = dense.find(rec.label);
        int label_id;
        if (it != dense.end()) {
            label_id = it->second;
        } else if (is_test) {
            label_id = k_known;  // the single open label
        } else {
            continue;  // unknown classes never reach training or validation
        }
        auto ids = encode_tokens(vocab, rec.text, max_len);
        if (ids.empty())
            throw std::runtime_error(std::string(split_name(corpus.split)) + " record " +
                                     std::to_string(line_no) + " has no tokens after tokenization");
        result.instances.push_back({std::move(ids), label_id});
    }

    if (corpus.split == Split::kTrain) {
        std::vector<int> counts(k_known, 0);
        for (const auto& inst : result.instances) ++counts[inst.label_id];
        for (int k = 0; k < k_known; ++k) {
            if (counts[k] == 0)
                throw std::runtime_error("known class has no training instances: " +
                                         plan.known_labels[k]);
        }
    }
    return result;
}

}  // namespace openintent
