#pragma once
// Exact dense retrieval over passage embeddings plus the rank metrics used to
// compare runs: MRR, NDCG@3, Recall@100, restoration similarity, and
// per-metric deltas.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "convinv/corpus.hpp"
#include "convinv/embed.hpp"

namespace convinv::retrieval {

struct SearchResult {
    std::string doc_id;
    double score;
};

// Immutable matrix of unit-norm passage embeddings.
class DenseIndex {
public:
    // Embeds every passage with the frozen passage embedder. An empty passage
    // text raises an error naming the doc id.
    static DenseIndex build(const std::vector<corpus::Passage>& passages,
                            const embed::HashingEmbedder& passage_embedder);

    std::size_t rows() const { return doc_ids_.size(); }
    std::uint32_t dim() const { return dim_; }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }

    // Cosine of the query against one row.
    double score(const embed::Embedding& query, std::size_t row) const;

    // Exact top-k by cosine; ties broken by ascending doc id. k is clamped to
    // the collection size.
    std::vector<SearchResult> search(const embed::Embedding& query, std::size_t k) const;

    void save(const std::string& path) const;

private:
    std::vector<std::string> doc_ids_;
    std::vector<double> matrix_;  // row-major
    std::vector<double> row_norms_;
    std::uint32_t dim_ = 0;
};

struct QueryMetrics {
    double mrr = 0.0;
    double ndcg_at_3 = 0.0;
    double recall_at_100 = 0.0;
};

struct MetricsReport {
    double mrr = 0.0;
    double ndcg_at_3 = 0.0;
    double recall_at_100 = 0.0;
    std::size_t num_queries = 0;
    std::vector<std::string> flagged;  // run queries absent from the qrels
    std::map<std::string, QueryMetrics> per_query;
};

// Rank metrics over the run's queries. MRR is the reciprocal rank of the
// first doc with grade >= rel_threshold over the full retrieved list;
// NDCG@3 uses gain 2^grade - 1 with a log2(rank+1) discount; Recall@100 is
// the judged-relevant fraction found in the top 100. Queries missing from the
// qrels count as zero and are flagged. Throws on empty qrels.
MetricsReport evaluate(const corpus::RunFile& run, const corpus::Qrels& qrels,
                       int rel_threshold = 1);

struct SimilarityReport {
    double mean = 0.0;
    std::vector<double> per_query;
};

// Mean cosine between original session embeddings and the embeddings of their
// transformed texts under the ad-hoc query embedder.
SimilarityReport restoration_similarity(const std::vector<embed::Embedding>& session_embs,
                                        const std::vector<std::string>& transformed_texts,
                                        const embed::HashingEmbedder& query_embedder);

struct MetricsDelta {
    double mrr = 0.0;
    double ndcg_at_3 = 0.0;
    double recall_at_100 = 0.0;
};

// Elementwise absolute differences between two reports.
MetricsDelta retrieval_delta(const MetricsReport& a, const MetricsReport& b);

}  // namespace convinv::retrieval
