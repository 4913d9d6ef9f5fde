#include "convinv/invert.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace convinv::invert {

namespace {

using embed::Embedding;
using embed::HashingEmbedder;
using embed::SparseCounts;

std::string join_words(const std::vector<std::string>& words) {
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out.push_back(' ');
        out += w;
    }
    return out;
}

// Signed feature delta of one edit, accumulated sparsely.
class DeltaBuilder {
public:
    void add(const SparseCounts& counts, std::int64_t sign) {
        for (const auto& [bucket, c] : counts) buckets_[bucket] += sign * c;
    }
    void add(embed::HashedFeature f, std::int64_t sign) { buckets_[f.bucket] += sign * f.sign; }

    SparseCounts take() const {
        SparseCounts out;
        out.reserve(buckets_.size());
        for (const auto& [bucket, c] : buckets_) {
            if (c != 0) out.push_back({bucket, c});
        }
        return out;
    }

private:
    std::map<std::uint32_t, std::int64_t> buckets_;
};

struct Candidate {
    std::vector<std::string> words;
    SparseCounts counts;
    std::string text;
    double selection_score;  // sparse cosine proxy, canonicalized on admission
    bool from_beam;          // carried-over hypotheses already have embeddings
    std::size_t beam_slot;   // index into the previous beam when from_beam
};

// Deterministic candidate ordering: score, then fewer words, then text.
bool candidate_better(const Candidate& a, const Candidate& b) {
    if (a.selection_score != b.selection_score) return a.selection_score > b.selection_score;
    if (a.words.size() != b.words.size()) return a.words.size() < b.words.size();
    return a.text < b.text;
}

class Corrector {
public:
    Corrector(const Embedding& target, const CorrectionConfig& cfg, const HashingEmbedder& eq)
        : target_(target), cfg_(cfg), eq_(eq) {
        double sumsq = 0.0;
        for (double v : target_.values) sumsq += v * v;
        target_norm_ = std::sqrt(sumsq);
        if (target_norm_ == 0.0) throw std::domain_error("correct: zero target embedding");

        // Canonical vocabulary: lowercased single words, deduplicated, sorted.
        std::unordered_set<std::string> seen;
        for (const auto& entry : cfg_.vocabulary) {
            for (auto& w : embed::tokenize(entry)) {
                if (seen.insert(w).second) vocab_.push_back(std::move(w));
            }
        }
        std::sort(vocab_.begin(), vocab_.end());
        if (vocab_.empty()) throw std::invalid_argument("correct: empty vocabulary");
        vocab_counts_.reserve(vocab_.size());
        for (const auto& w : vocab_) vocab_counts_.push_back(word_counts(w));
    }

    InversionResult run(const std::string& seed_text) {
        Hypothesis seed = make_from_text(seed_text);
        InversionResult result;
        result.trace.push_back({seed.text(), seed.score});

        Hypothesis best = seed;
        std::vector<Hypothesis> beam;
        beam.push_back(std::move(seed));

        std::size_t stale_steps = 0;
        for (std::size_t step = 1; step <= cfg_.max_steps; ++step) {
            if (best.score >= cfg_.stop_similarity) break;

            auto pool = expand(beam);
            if (pool.empty()) break;
            const std::size_t keep = std::min(cfg_.beam_width, pool.size());
            std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(keep),
                              pool.end(), candidate_better);
            pool.resize(keep);

            std::vector<Hypothesis> next;
            next.reserve(keep);
            for (auto& cand : pool) next.push_back(admit(std::move(cand), beam));
            std::sort(next.begin(), next.end(), [](const Hypothesis& a, const Hypothesis& b) {
                if (a.score != b.score) return a.score > b.score;
                if (a.words.size() != b.words.size()) return a.words.size() < b.words.size();
                return a.words < b.words;
            });
            beam = std::move(next);

            result.steps = step;
            if (beam.front().score > best.score) {
                best = beam.front();
                stale_steps = 0;
            } else {
                ++stale_steps;
            }
            result.trace.push_back({best.text(), best.score});

            if (best.score >= cfg_.stop_similarity) break;
            if (stale_steps >= cfg_.patience) break;
        }

        result.text = best.text();
        result.final_score = best.score;
        return result;
    }

    Hypothesis make_from_text(const std::string& text) {
        Hypothesis h;
        h.words = embed::tokenize(text);
        if (h.words.empty()) throw embed::EmptyTextError();
        h.counts = eq_.raw_features(text);
        h.embedding = eq_.embed_counts(h.counts);
        h.score = embed::cosine(h.embedding, target_);
        return h;
    }

private:
    const SparseCounts& word_counts(const std::string& word) {
        auto it = word_cache_.find(word);
        if (it == word_cache_.end()) {
            it = word_cache_.emplace(word, eq_.word_counts(word)).first;
        }
        return it->second;
    }

    // Selection proxy: cosine computed straight from the integer counts.
    double selection_score(const SparseCounts& counts) const {
        double dot = 0.0;
        std::int64_t sumsq = 0;
        for (const auto& [bucket, c] : counts) {
            dot += static_cast<double>(c) * target_.values[bucket];
            sumsq += c * c;
        }
        if (sumsq == 0) return -2.0;  // cancelled-out text, never competitive
        return dot / (std::sqrt(static_cast<double>(sumsq)) * target_norm_);
    }

    void push_edit(std::vector<Candidate>& pool, std::unordered_set<std::string>& seen,
                   const Hypothesis& h, std::vector<std::string> words,
                   const DeltaBuilder& delta) {
        std::string text = join_words(words);
        if (!seen.insert(text).second) return;
        Candidate cand;
        cand.counts = embed::merge_counts(h.counts, delta.take());
        cand.selection_score = selection_score(cand.counts);
        if (cand.selection_score <= -2.0) return;
        cand.words = std::move(words);
        cand.text = std::move(text);
        cand.from_beam = false;
        cand.beam_slot = 0;
        pool.push_back(std::move(cand));
    }

    std::vector<Candidate> expand(const std::vector<Hypothesis>& beam) {
        std::vector<Candidate> pool;
        std::unordered_set<std::string> seen;

        // Current beam members stay in contention.
        for (std::size_t slot = 0; slot < beam.size(); ++slot) {
            Candidate keep;
            keep.words = beam[slot].words;
            keep.counts = beam[slot].counts;
            keep.text = beam[slot].text();
            keep.selection_score = selection_score(keep.counts);
            keep.from_beam = true;
            keep.beam_slot = slot;
            if (seen.insert(keep.text).second) pool.push_back(std::move(keep));
        }

        const bool bigrams = eq_.spec().use_word_bigrams;
        for (const auto& h : beam) {
            const auto& w = h.words;
            const std::size_t len = w.size();
            std::size_t budget = cfg_.candidates_per_hypothesis;

            // Residual-ranked vocabulary: under-represented words first.
            std::vector<double> wordscore(vocab_.size());
            for (std::size_t v = 0; v < vocab_.size(); ++v) {
                double s = 0.0;
                for (const auto& [bucket, c] : vocab_counts_[v]) {
                    s += static_cast<double>(c) *
                         (target_.values[bucket] - h.embedding.values[bucket]);
                }
                wordscore[v] = s;
            }
            std::vector<std::size_t> ranked(vocab_.size());
            for (std::size_t v = 0; v < vocab_.size(); ++v) ranked[v] = v;
            std::sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
                if (wordscore[a] != wordscore[b]) return wordscore[a] > wordscore[b];
                return vocab_[a] < vocab_[b];
            });

            // Swaps of adjacent words.
            for (std::size_t k = 0; k + 1 < len && budget > 0; ++k) {
                if (w[k] == w[k + 1]) continue;
                DeltaBuilder delta;
                if (bigrams) {
                    delta.add(eq_.bigram_feature(w[k], w[k + 1]), -1);
                    delta.add(eq_.bigram_feature(w[k + 1], w[k]), +1);
                    if (k > 0) {
                        delta.add(eq_.bigram_feature(w[k - 1], w[k]), -1);
                        delta.add(eq_.bigram_feature(w[k - 1], w[k + 1]), +1);
                    }
                    if (k + 2 < len) {
                        delta.add(eq_.bigram_feature(w[k + 1], w[k + 2]), -1);
                        delta.add(eq_.bigram_feature(w[k], w[k + 2]), +1);
                    }
                }
                auto edited = w;
                std::swap(edited[k], edited[k + 1]);
                push_edit(pool, seen, h, std::move(edited), delta);
                --budget;
            }

            // Deletions.
            if (len > 1) {
                for (std::size_t k = 0; k < len && budget > 0; ++k) {
                    DeltaBuilder delta;
                    delta.add(word_counts(w[k]), -1);
                    if (bigrams) {
                        if (k > 0) delta.add(eq_.bigram_feature(w[k - 1], w[k]), -1);
                        if (k + 1 < len) delta.add(eq_.bigram_feature(w[k], w[k + 1]), -1);
                        if (k > 0 && k + 1 < len) {
                            delta.add(eq_.bigram_feature(w[k - 1], w[k + 1]), +1);
                        }
                    }
                    auto edited = w;
                    edited.erase(edited.begin() + static_cast<std::ptrdiff_t>(k));
                    push_edit(pool, seen, h, std::move(edited), delta);
                    --budget;
                }
            }

            // Insertions and substitutions, best-aligned words first.
            for (std::size_t m = 0; m < ranked.size() && budget > 0; ++m) {
                const std::string& v = vocab_[ranked[m]];
                const SparseCounts& vc = vocab_counts_[ranked[m]];

                if (len < cfg_.max_words) {
                    for (std::size_t g = 0; g <= len && budget > 0; ++g) {
                        DeltaBuilder delta;
                        delta.add(vc, +1);
                        if (bigrams) {
                            if (g > 0 && g < len) delta.add(eq_.bigram_feature(w[g - 1], w[g]), -1);
                            if (g > 0) delta.add(eq_.bigram_feature(w[g - 1], v), +1);
                            if (g < len) delta.add(eq_.bigram_feature(v, w[g]), +1);
                        }
                        auto edited = w;
                        edited.insert(edited.begin() + static_cast<std::ptrdiff_t>(g), v);
                        push_edit(pool, seen, h, std::move(edited), delta);
                        --budget;
                    }
                }
                for (std::size_t k = 0; k < len && budget > 0; ++k) {
                    if (w[k] == v) continue;
                    DeltaBuilder delta;
                    delta.add(word_counts(w[k]), -1);
                    delta.add(vc, +1);
                    if (bigrams) {
                        if (k > 0) {
                            delta.add(eq_.bigram_feature(w[k - 1], w[k]), -1);
                            delta.add(eq_.bigram_feature(w[k - 1], v), +1);
                        }
                        if (k + 1 < len) {
                            delta.add(eq_.bigram_feature(w[k], w[k + 1]), -1);
                            delta.add(eq_.bigram_feature(v, w[k + 1]), +1);
                        }
                    }
                    auto edited = w;
                    edited[k] = v;
                    push_edit(pool, seen, h, std::move(edited), delta);
                    --budget;
                }
            }
        }
        return pool;
    }

    Hypothesis admit(Candidate&& cand, const std::vector<Hypothesis>& beam) {
        if (cand.from_beam) return beam[cand.beam_slot];
        Hypothesis h;
        h.words = std::move(cand.words);
        h.counts = std::move(cand.counts);
        h.embedding = eq_.embed_counts(h.counts);
        h.score = embed::cosine(h.embedding, target_);
        if (cfg_.verify_incremental) {
            const SparseCounts full_counts = eq_.raw_features(h.text());
            const Embedding full = eq_.embed_counts(full_counts);
            if (full_counts != h.counts ||
                std::memcmp(full.values.data(), h.embedding.values.data(),
                            sizeof(double) * full.values.size()) != 0) {
                throw std::logic_error("correct: incremental feature update diverged for '" +
                                       h.text() + "'");
            }
        }
        return h;
    }

    const Embedding& target_;
    const CorrectionConfig& cfg_;
    const HashingEmbedder& eq_;
    double target_norm_ = 0.0;
    std::vector<std::string> vocab_;
    std::vector<SparseCounts> vocab_counts_;
    std::unordered_map<std::string, SparseCounts> word_cache_;
};

}  // namespace

void CorrectionConfig::validate() const {
    if (beam_width < 1) throw std::invalid_argument("CorrectionConfig: beam_width must be >= 1");
    if (max_words < 1) throw std::invalid_argument("CorrectionConfig: max_words must be >= 1");
    if (stop_similarity > 1.0) {
        throw std::invalid_argument("CorrectionConfig: stop_similarity must be <= 1");
    }
}

std::string Hypothesis::text() const { return join_words(words); }

InversionIndex InversionIndex::build(const std::vector<std::string>& texts,
                                     const embed::HashingEmbedder& query_embedder) {
    if (texts.empty()) throw std::invalid_argument("inversion index: no texts");
    InversionIndex index;
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (!seen.insert(texts[i]).second) continue;
        try {
            index.embeddings_.push_back(query_embedder.embed(texts[i]));
        } catch (const embed::EmptyTextError&) {
            throw std::runtime_error("inversion index: empty text at entry " + std::to_string(i));
        }
        index.texts_.push_back(texts[i]);
    }
    return index;
}

std::string initial_inversion(const InversionIndex& index, const embed::Embedding& target) {
    if (index.size() == 0) throw std::invalid_argument("initial_inversion: empty index");
    std::size_t best = 0;
    double best_score = embed::cosine(index.embedding(0), target);
    for (std::size_t i = 1; i < index.size(); ++i) {
        const double s = embed::cosine(index.embedding(i), target);
        if (s > best_score || (s == best_score && index.texts()[i] < index.texts()[best])) {
            best = i;
            best_score = s;
        }
    }
    return index.texts()[best];
}

InversionResult correct(const embed::Embedding& target, const std::string& seed_text,
                        const CorrectionConfig& cfg,
                        const embed::HashingEmbedder& query_embedder) {
    cfg.validate();
    Corrector corrector(target, cfg, query_embedder);
    return corrector.run(seed_text);
}

InversionResult invert_session(const embed::Embedding& session_emb,
                               const std::optional<std::string>& rewrite,
                               const InversionIndex& index, const CorrectionConfig& cfg,
                               const embed::HashingEmbedder& query_embedder) {
    std::string seed;
    if (rewrite) {
        if (embed::tokenize(*rewrite).empty()) {
            throw std::invalid_argument("invert_session: empty rewrite");
        }
        seed = *rewrite;
    } else {
        seed = initial_inversion(index, session_emb);
    }
    InversionResult result = correct(session_emb, seed, cfg, query_embedder);
    result.seeded = rewrite.has_value();
    return result;
}

double interpretability_proxy(const std::string& transformed,
                              const std::string& human_rewrite) {
    const auto a = embed::tokenize(transformed);
    const auto b = embed::tokenize(human_rewrite);
    if (a.empty() || b.empty()) {
        throw std::invalid_argument("interpretability_proxy: empty input");
    }
    std::map<std::string, std::size_t> counts;
    for (const auto& w : b) ++counts[w];
    std::size_t overlap = 0;
    for (const auto& w : a) {
        auto it = counts.find(w);
        if (it != counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(a.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(b.size());
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace convinv::invert
