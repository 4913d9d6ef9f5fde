#pragma once
// Data model and ingestion: conversations, passages, qrels, run files, and
// the deterministic synthetic corpus generator used for desk-scale runs.
//
// All loaded structures are immutable after construction and safe to read
// concurrently. Text fields are whitespace-normalized at ingestion so that
// embeddings are reproducible across input formatting.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace convinv::corpus {

struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct DuplicateKeyError : std::runtime_error {
    explicit DuplicateKeyError(const std::string& what) : std::runtime_error(what) {}
};

struct Turn {
    std::string turn_id;
    std::string query;
    std::optional<std::string> response;
    std::optional<std::string> human_rewrite;
};

struct Conversation {
    std::string conv_id;
    std::vector<Turn> turns;

    // Query id of a turn, "<conv_id>_<turn_id>".
    std::string query_id(std::size_t turn_index) const {
        return conv_id + "_" + turns.at(turn_index).turn_id;
    }
};

struct Passage {
    std::string doc_id;
    std::string text;
};

// Graded relevance judgments. At most one grade per (query, doc) pair.
class Qrels {
public:
    void add(const std::string& query_id, const std::string& doc_id, int grade);

    // Grade for a pair, or 0 if unjudged.
    int grade(const std::string& query_id, const std::string& doc_id) const;
    bool has_query(const std::string& query_id) const;
    const std::map<std::string, int>* judgments(const std::string& query_id) const;
    const std::map<std::string, std::map<std::string, int>>& all() const { return grades_; }
    bool empty() const { return grades_.empty(); }

private:
    std::map<std::string, std::map<std::string, int>> grades_;  // qid -> doc -> grade
};

struct RunEntry {
    std::string doc_id;
    double score;
};

// TREC-style ranked results. Within a query, scores are non-increasing with
// rank, ranks are contiguous from 1, and doc ids are unique.
struct RunFile {
    std::string tag = "run";
    std::map<std::string, std::vector<RunEntry>> results;  // qid -> ranked list

    // Appends at the next rank; enforces the per-query invariants.
    void add(const std::string& query_id, const std::string& doc_id, double score);
    void validate() const;
};

// --- loaders / writers ---
// Conversations: JSONL, one object per line:
//   {"conv_id":"c1","turns":[{"turn_id":"1","query":"...","response":"...","human_rewrite":"..."}]}
// Passages: TSV "docid<TAB>text". Qrels: "qid 0 docid rel".
// Run: "qid Q0 docid rank score tag" with scores printed at 6 decimals.

std::vector<Conversation> load_conversations(const std::string& path);
void write_conversations(const std::vector<Conversation>& convs, const std::string& path);

std::vector<Passage> load_passages(const std::string& path);
void write_passages(const std::vector<Passage>& passages, const std::string& path);

Qrels load_qrels(const std::string& path);
void write_qrels(const Qrels& qrels, const std::string& path);

RunFile load_run(const std::string& path);
void write_run(const RunFile& run, const std::string& path);

// --- synthetic corpus ---

struct SynthCorpus {
    std::vector<Conversation> conversations;
    std::vector<Passage> passages;
    Qrels qrels;
    std::map<std::string, std::string> rewrites;  // qid -> gold rewrite
};

// Deterministic templated generator: multi-turn conversations with pronoun
// coreference to earlier entities, gold rewrites with pronouns resolved, and
// qrels giving every turn at least one relevant passage that contains the
// rewrite's content words. If n_passages is smaller than the number of turns
// the passage count grows to fit one relevant passage per turn.
SynthCorpus synth_corpus(std::uint64_t seed, std::size_t n_conversations,
                         std::size_t n_passages);

}  // namespace convinv::corpus
