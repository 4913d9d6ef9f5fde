#pragma once
// Two-phase embedding inversion. A nearest-neighbor index over (embedding,
// text) pairs produces the initial hypothesis; residual-guided beam search
// over word edits then corrects it toward the target embedding. Seeding the
// correction with an external query rewrite replaces the first phase.
//
// The index and the search operate purely against the ad-hoc query embedder;
// session embeddings are handled as points of that shared space.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "convinv/embed.hpp"

namespace convinv::invert {

struct CorrectionConfig {
    std::size_t beam_width = 10;
    std::size_t max_steps = 30;
    std::size_t candidates_per_hypothesis = 384;
    std::size_t max_words = 48;
    double stop_similarity = 0.9999;
    std::size_t patience = 5;
    std::vector<std::string> vocabulary;

    // Test mode: after every admission, rebuild counts and embedding from the
    // hypothesis text and require bit-identical agreement with the
    // incrementally maintained state.
    bool verify_incremental = false;

    void validate() const;
};

// A candidate text with its exact raw feature counts and embedding. The
// embedding always equals the re-embedding of the text; counts are integers,
// so incremental edits stay exact.
struct Hypothesis {
    std::vector<std::string> words;
    embed::SparseCounts counts;
    embed::Embedding embedding;
    double score = 0.0;  // cosine(embedding, target)

    std::string text() const;
};

struct TraceStep {
    std::string text;
    double score;
};

struct InversionResult {
    std::string text;
    double final_score = 0.0;
    bool seeded = false;
    std::size_t steps = 0;
    // trace[0] is the seed; each later entry is the best-so-far hypothesis
    // after a step, so scores are non-decreasing.
    std::vector<TraceStep> trace;
};

class InversionIndex {
public:
    // Deterministic index over the query embedder. Duplicate texts are
    // dropped, keeping the first occurrence.
    static InversionIndex build(const std::vector<std::string>& texts,
                                const embed::HashingEmbedder& query_embedder);

    std::size_t size() const { return texts_.size(); }
    const std::vector<std::string>& texts() const { return texts_; }
    const embed::Embedding& embedding(std::size_t i) const { return embeddings_[i]; }

private:
    std::vector<std::string> texts_;
    std::vector<embed::Embedding> embeddings_;
};

// The index text whose embedding has maximal cosine with the target; ties go
// to the lexicographically smallest text.
std::string initial_inversion(const InversionIndex& index, const embed::Embedding& target);

// Beam search from seed_text toward the target. Each step ranks vocabulary
// words by the dot product of their raw features with the residual
// (target - hypothesis embedding) and tries substitutions, insertions,
// deletions, and adjacent swaps; every surviving hypothesis is re-scored by
// exact re-embedding via an incremental raw-feature update. Returns the
// best hypothesis ever seen, which never scores below the seed.
InversionResult correct(const embed::Embedding& target, const std::string& seed_text,
                        const CorrectionConfig& cfg,
                        const embed::HashingEmbedder& query_embedder);

// Full inversion of one session embedding: the seed is the rewrite when one
// is provided (seeded=true), otherwise the initial inversion from the index.
InversionResult invert_session(const embed::Embedding& session_emb,
                               const std::optional<std::string>& rewrite,
                               const InversionIndex& index, const CorrectionConfig& cfg,
                               const embed::HashingEmbedder& query_embedder);

// Token-level F1 between lowercased word multisets; the mechanical stand-in
// for a human interpretability rating.
double interpretability_proxy(const std::string& transformed,
                              const std::string& human_rewrite);

}  // namespace convinv::invert
