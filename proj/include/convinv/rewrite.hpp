#pragma once
// Standalone query rewriting: a deterministic heuristic resolver for
// self-contained runs, plus ingestion of externally generated rewrites.

#include <map>
#include <string>
#include <vector>

#include "convinv/corpus.hpp"

namespace convinv::rewrite {

enum class RewriteSourceKind { external_file, heuristic, human_gold };

struct RewriteSource {
    RewriteSourceKind kind = RewriteSourceKind::heuristic;
    std::string path;  // required for external_file
};

// Rewrites never exceed this many words, matching the inverter's budget.
inline constexpr std::size_t kMaxRewriteWords = 48;

// The fixed stopword list used for noun-phrase detection (30 words). Shipped
// as resources/stopwords.txt as well; the embedded copy is authoritative.
const std::vector<std::string>& stopwords();

bool is_stopword(const std::string& lowercased);
bool is_pronoun(const std::string& lowercased);

struct RewriteResult {
    std::string text;
    bool unresolved = false;  // pronoun present but no antecedent available
};

// Deterministic rule-based rewrite of turn `turn_index` (0-based):
//  1. each pronoun is replaced by the most recent multi-word or capitalized
//     noun phrase from the history (longest run, nearest turn first);
//  2. a query sharing no content word with the history gets the first turn's
//     salient noun phrase appended after "in the context of";
//  3. output is lowercased except preserved proper nouns, and truncated to
//     kMaxRewriteWords.
// Idempotent: rewriting an already-resolved query returns it unchanged.
RewriteResult heuristic_rewrite(const corpus::Conversation& conv, std::size_t turn_index);

// TSV "qid<TAB>rewrite". Duplicate qids and empty rewrites are errors.
std::map<std::string, std::string> load_rewrites(const std::string& path);
void write_rewrites(const std::map<std::string, std::string>& rewrites,
                    const std::string& path);

}  // namespace convinv::rewrite
