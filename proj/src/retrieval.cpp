#include "convinv/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace convinv::retrieval {

DenseIndex DenseIndex::build(const std::vector<corpus::Passage>& passages,
                             const embed::HashingEmbedder& passage_embedder) {
    if (passages.empty()) throw std::invalid_argument("build_index: no passages");
    DenseIndex index;
    index.dim_ = passage_embedder.spec().dimension;
    index.matrix_.reserve(passages.size() * index.dim_);
    for (const auto& p : passages) {
        embed::Embedding e;
        try {
            e = passage_embedder.embed(p.text);
        } catch (const embed::EmptyTextError&) {
            throw std::runtime_error("build_index: empty text for passage " + p.doc_id);
        }
        index.doc_ids_.push_back(p.doc_id);
        double sumsq = 0.0;
        for (double v : e.values) sumsq += v * v;
        index.row_norms_.push_back(std::sqrt(sumsq));
        index.matrix_.insert(index.matrix_.end(), e.values.begin(), e.values.end());
    }
    return index;
}

double DenseIndex::score(const embed::Embedding& query, std::size_t row) const {
    double qs = 0.0;
    for (double v : query.values) qs += v * v;
    const double qnorm = std::sqrt(qs);
    const double* r = matrix_.data() + row * dim_;
    double dot = 0.0;
    for (std::uint32_t i = 0; i < dim_; ++i) dot += query.values[i] * r[i];
    return dot / (qnorm * row_norms_[row]);
}

std::vector<SearchResult> DenseIndex::search(const embed::Embedding& query,
                                             std::size_t k) const {
    if (query.dim() != dim_) throw std::invalid_argument("search: dimension mismatch");
    if (k < 1) throw std::invalid_argument("search: k must be >= 1");

    double qs = 0.0;
    for (double v : query.values) qs += v * v;
    const double qnorm = std::sqrt(qs);
    if (qnorm == 0.0) throw std::domain_error("search: zero query vector");

    std::vector<double> scores(rows());
    for (std::size_t r = 0; r < rows(); ++r) {
        const double* row = matrix_.data() + r * dim_;
        double dot = 0.0;
        for (std::uint32_t i = 0; i < dim_; ++i) dot += query.values[i] * row[i];
        scores[r] = dot / (qnorm * row_norms_[r]);
    }

    std::vector<std::size_t> order(rows());
    std::iota(order.begin(), order.end(), 0);
    const auto better = [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return doc_ids_[a] < doc_ids_[b];
    };
    k = std::min(k, rows());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      better);

    std::vector<SearchResult> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back({doc_ids_[order[i]], scores[order[i]]});
    return out;
}

void DenseIndex::save(const std::string& path) const {
    std::vector<embed::Embedding> rows_vec(rows());
    for (std::size_t r = 0; r < rows(); ++r) {
        rows_vec[r].values.assign(matrix_.begin() + static_cast<std::ptrdiff_t>(r * dim_),
                                  matrix_.begin() + static_cast<std::ptrdiff_t>((r + 1) * dim_));
    }
    embed::save_matrix(path, doc_ids_, rows_vec);
}

namespace {

double gain(int grade) { return std::pow(2.0, grade) - 1.0; }

double discount(std::size_t rank) { return std::log2(static_cast<double>(rank) + 1.0); }

}  // namespace

MetricsReport evaluate(const corpus::RunFile& run, const corpus::Qrels& qrels,
                       int rel_threshold) {
    if (qrels.empty()) throw std::invalid_argument("evaluate: empty qrels");
    run.validate();

    MetricsReport report;
    for (const auto& [qid, ranking] : run.results) {
        QueryMetrics qm;
        const auto* judgments = qrels.judgments(qid);
        if (!judgments) {
            report.flagged.push_back(qid);
            report.per_query.emplace(qid, qm);
            ++report.num_queries;
            continue;
        }

        for (std::size_t r = 0; r < ranking.size(); ++r) {
            if (qrels.grade(qid, ranking[r].doc_id) >= rel_threshold) {
                qm.mrr = 1.0 / static_cast<double>(r + 1);
                break;
            }
        }

        double dcg = 0.0;
        for (std::size_t r = 0; r < std::min<std::size_t>(3, ranking.size()); ++r) {
            dcg += gain(qrels.grade(qid, ranking[r].doc_id)) / discount(r + 1);
        }
        std::vector<int> grades;
        grades.reserve(judgments->size());
        for (const auto& [doc, g] : *judgments) grades.push_back(g);
        std::sort(grades.begin(), grades.end(), std::greater<int>());
        double idcg = 0.0;
        for (std::size_t r = 0; r < std::min<std::size_t>(3, grades.size()); ++r) {
            idcg += gain(grades[r]) / discount(r + 1);
        }
        qm.ndcg_at_3 = idcg > 0.0 ? dcg / idcg : 0.0;

        std::size_t relevant = 0;
        for (const auto& [doc, g] : *judgments) relevant += g >= rel_threshold ? 1 : 0;
        if (relevant > 0) {
            std::size_t hits = 0;
            for (std::size_t r = 0; r < std::min<std::size_t>(100, ranking.size()); ++r) {
                if (qrels.grade(qid, ranking[r].doc_id) >= rel_threshold) ++hits;
            }
            qm.recall_at_100 = static_cast<double>(hits) / static_cast<double>(relevant);
        }

        report.per_query.emplace(qid, qm);
        ++report.num_queries;
    }

    for (const auto& [qid, qm] : report.per_query) {
        report.mrr += qm.mrr;
        report.ndcg_at_3 += qm.ndcg_at_3;
        report.recall_at_100 += qm.recall_at_100;
    }
    if (report.num_queries > 0) {
        const double n = static_cast<double>(report.num_queries);
        report.mrr /= n;
        report.ndcg_at_3 /= n;
        report.recall_at_100 /= n;
    }
    return report;
}

SimilarityReport restoration_similarity(const std::vector<embed::Embedding>& session_embs,
                                        const std::vector<std::string>& transformed_texts,
                                        const embed::HashingEmbedder& query_embedder) {
    if (session_embs.size() != transformed_texts.size()) {
        throw std::invalid_argument("restoration_similarity: length mismatch");
    }
    SimilarityReport report;
    for (std::size_t i = 0; i < session_embs.size(); ++i) {
        const double c = embed::cosine(session_embs[i], query_embedder.embed(transformed_texts[i]));
        report.per_query.push_back(c);
        report.mean += c;
    }
    if (!report.per_query.empty()) {
        report.mean /= static_cast<double>(report.per_query.size());
    }
    return report;
}

MetricsDelta retrieval_delta(const MetricsReport& a, const MetricsReport& b) {
    return {std::abs(a.mrr - b.mrr), std::abs(a.ndcg_at_3 - b.ndcg_at_3),
            std::abs(a.recall_at_100 - b.recall_at_100)};
}

}  // namespace convinv::retrieval
