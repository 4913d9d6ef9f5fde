#pragma once
// Reference text embedders: signed feature hashing over word unigrams,
// boundary-marked character n-grams, and adjacent word bigrams.
//
// The embedder is a pure function of its input text. Identical text always
// produces the bit-identical embedding, which the inversion search relies on.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace convinv::embed {

struct EmptyTextError : std::runtime_error {
    EmptyTextError() : std::runtime_error("empty text cannot be embedded") {}
};

// Unit-norm dense vector in the shared retrieval space.
struct Embedding {
    std::vector<double> values;

    std::size_t dim() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

// Configuration of the reference embedder family.
struct FeatureSpec {
    std::uint32_t dimension = 256;
    std::vector<int> char_ngram_orders = {3};  // subset of {2,3,4}
    bool use_word_unigrams = true;
    bool use_word_bigrams = true;
    std::uint64_t hash_seed = 0x5EED;

    // Throws std::invalid_argument if dimension < 8 or an order is outside {2,3,4}.
    void validate() const;

    bool operator==(const FeatureSpec&) const = default;
};

// Sparse accumulation of signed feature counts, sorted by bucket.
// Counts are exact integers, so incremental edits compose without rounding.
using SparseCounts = std::vector<std::pair<std::uint32_t, std::int64_t>>;

struct HashedFeature {
    std::uint32_t bucket;
    int sign;  // +1 or -1
};

std::uint64_t fnv1a64(std::string_view bytes);

// Whitespace tokenizer with ASCII lowercasing. Non-ASCII bytes pass through.
std::vector<std::string> tokenize(std::string_view text);

// Collapses runs of whitespace to single spaces and trims the ends.
std::string normalize_whitespace(std::string_view text);

// Stands in for both the ad-hoc query encoder and the passage encoder.
class HashingEmbedder {
public:
    explicit HashingEmbedder(FeatureSpec spec = {});

    const FeatureSpec& spec() const { return spec_; }

    // Tokenize, hash features, accumulate signed counts, L2-normalize.
    // Throws EmptyTextError if no tokens survive normalization.
    Embedding embed(std::string_view text) const;

    // The un-normalized accumulation behind embed():
    //   embed(text) == embed_counts(raw_features(text))
    SparseCounts raw_features(std::string_view text) const;

    // Canonical densify + normalize of a count vector. This is the single
    // normalization path in the project; the inversion search goes through it
    // so that incrementally maintained counts re-embed bit-identically.
    Embedding embed_counts(const SparseCounts& counts) const;

    // Features of one (already lowercased) word: unigram + char n-grams.
    SparseCounts word_counts(const std::string& word) const;

    HashedFeature bigram_feature(const std::string& w1, const std::string& w2) const;
    HashedFeature hash_feature(std::string_view feature) const;

private:
    FeatureSpec spec_;
};

// Standard cosine; for unit vectors it reduces to the dot product.
// Throws std::invalid_argument on dimension mismatch, std::domain_error on a
// zero vector.
double cosine(const Embedding& a, const Embedding& b);

// Adds delta counts into base (both sorted); zero-count entries are dropped.
SparseCounts merge_counts(const SparseCounts& base, const SparseCounts& delta);

// --- embedding matrix file ---
// Little-endian binary: magic "CVNV", u32 version, u32 dim, u64 count,
// then count*dim float32. Row ids live in a sidecar "<path>.ids", one per line.

struct EmbeddingMatrix {
    std::uint32_t dim = 0;
    std::vector<std::string> ids;
    std::vector<float> data;  // row-major, ids.size() * dim

    std::size_t rows() const { return ids.size(); }
};

void save_matrix(const std::string& path, const std::vector<std::string>& ids,
                 const std::vector<Embedding>& rows);
EmbeddingMatrix load_matrix(const std::string& path);

}  // namespace convinv::embed
