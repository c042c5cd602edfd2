#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace openintent {

enum class Split { kTrain, kValid, kTest };

const char* split_name(Split s);

struct RawRecord {
    std::string text;
    std::string label;
};

struct RawCorpus {
    std::vector<RawRecord> records;
    Split split = Split::kTrain;
};

// Token ids are dense; PAD and UNK are reserved. Content tokens start at 2 and
// are ordered by (frequency desc, token asc) so rebuilding is deterministic.
struct Vocabulary {
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    std::unordered_map<std::string, int> token_to_id;
    std::vector<std::string> id_to_token;  // dense, id_to_token[0] == "<pad>"

    int size() const { return static_cast<int>(id_to_token.size()); }
    int lookup(const std::string& token) const {
        auto it = token_to_id.find(token);
        return it == token_to_id.end() ? kUnk : it->second;
    }
};

struct LabeledInstance {
    std::vector<std::int32_t> token_ids;  // never empty, never >= vocab size
    int label_id = -1;

    bool operator==(const LabeledInstance&) const = default;
};

struct SplitPlan {
    double proportion = 0.0;
    std::uint64_t seed = 0;
    std::vector<int> known_ids;                // sorted ids into the label universe
    std::vector<std::string> known_labels;     // resolved label strings, sorted
};

struct SplitResult {
    std::vector<LabeledInstance> instances;
    std::vector<std::string> label_names;  // dense label id -> name; open class last on test
    int known_count = 0;
};

// Label reserved for the open (unknown) class when test instances are relabeled.
inline constexpr const char* kOpenLabelName = "<open>";

// Reads a UTF-8 TSV of `text<TAB>label` lines. Blank lines are skipped;
// a line without a tab, with empty text or with an empty label is malformed.
RawCorpus load_corpus(const std::string& path, Split split);

// Lowercased whitespace tokenization with ASCII punctuation stripped.
std::vector<std::string> tokenize_text(const std::string& text);

Vocabulary build_vocabulary(const RawCorpus& corpus, int min_freq);

// Sorted unique labels of a corpus; this ordering defines the label universe
// that SplitPlan ids index into.
std::vector<std::string> label_universe(const RawCorpus& corpus);

SplitPlan make_split_plan(int class_count, double proportion, std::uint64_t seed);

// Fills known_labels from universe (and known_ids when loading a persisted plan).
void resolve_plan(SplitPlan& plan, const std::vector<std::string>& universe);

void save_plan(const SplitPlan& plan, const std::string& path);
SplitPlan load_plan(const std::string& path);

// Records of known classes only; used to build the vocabulary without leakage
// from classes that are withheld until test time.
RawCorpus known_subset(const RawCorpus& corpus, const SplitPlan& plan);

// Tokenizes and relabels a corpus under a plan. Train/valid drop unknown-class
// instances; test keeps everything and maps unknown classes to the single open
// id K (known labels get dense ids [0, K) in sorted order).
SplitResult apply_split(const RawCorpus& corpus, const SplitPlan& plan, const Vocabulary& vocab,
                        int max_len);

}  // namespace openintent
