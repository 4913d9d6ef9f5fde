#include "convinv/rewrite.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "convinv/embed.hpp"

namespace convinv::rewrite {

namespace {

const std::unordered_set<std::string> kPronouns = {
    "it", "its", "they", "them", "their", "he", "she", "this", "that"};

const std::vector<std::string> kStopwords = {
    "a",    "an",   "the",  "is",    "are",  "was",  "were", "be",    "what", "which",
    "how",  "why",  "when", "where", "do",   "does", "did",  "can",   "could", "of",
    "in",   "on",   "for",  "to",    "and",  "or",   "about", "there", "this", "that"};

bool is_punct(char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; }

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

// A raw whitespace token split into leading punctuation, core, and trailing
// punctuation, remembering where it sat in its source text.
struct Token {
    std::string lead;
    std::string core;
    std::string trail;
    std::size_t index = 0;  // position within the source token list

    std::string core_lower() const { return lower(core); }
};

std::vector<Token> split_tokens(const std::string& text) {
    std::vector<Token> tokens;
    std::istringstream ss(text);
    std::string raw;
    std::size_t index = 0;
    while (ss >> raw) {
        Token t;
        std::size_t begin = 0, end = raw.size();
        while (begin < end && is_punct(raw[begin])) ++begin;
        while (end > begin && is_punct(raw[end - 1])) --end;
        t.lead = raw.substr(0, begin);
        t.core = raw.substr(begin, end - begin);
        t.trail = raw.substr(end);
        t.index = index++;
        tokens.push_back(std::move(t));
    }
    return tokens;
}

bool has_upper(const std::string& s, std::size_t from) {
    for (std::size_t i = from; i < s.size(); ++i) {
        if (std::isupper(static_cast<unsigned char>(s[i]))) return true;
    }
    return false;
}

// Proper nouns keep their casing; everything else is lowercased. A token
// counts as proper when it is capitalized away from sentence-initial position
// or carries internal uppercase ("D.C.").
std::string render_core(const Token& t) {
    if (t.core.empty()) return t.core;
    const bool cap_first = std::isupper(static_cast<unsigned char>(t.core[0])) != 0;
    if ((cap_first && t.index > 0) || has_upper(t.core, 1)) return t.core;
    return lower(t.core);
}

bool is_content(const Token& t) {
    const std::string c = t.core_lower();
    return !c.empty() && !is_stopword(c) && !is_pronoun(c);
}

struct NounPhrase {
    std::vector<Token> tokens;
    std::size_t start = 0;  // start position in the scanned token stream
    bool capitalized = false;

    bool qualifying() const { return tokens.size() >= 2 || capitalized; }
    std::string rendered() const {
        std::string out;
        for (const auto& t : tokens) {
            if (!out.empty()) out.push_back(' ');
            out += render_core(t);
        }
        return out;
    }
};

// Maximal runs of content tokens in a turn's query followed by its response.
std::vector<NounPhrase> noun_phrases(const corpus::Turn& turn) {
    std::vector<Token> stream = split_tokens(turn.query);
    if (turn.response) {
        auto resp = split_tokens(*turn.response);
        const std::size_t offset = stream.size();
        for (auto& t : resp) {
            t.index += offset;
            stream.push_back(std::move(t));
        }
    }
    std::vector<NounPhrase> phrases;
    NounPhrase current;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        if (is_content(stream[i])) {
            if (current.tokens.empty()) current.start = i;
            if (std::isupper(static_cast<unsigned char>(stream[i].core[0])) &&
                stream[i].index > 0) {
                current.capitalized = true;
            }
            current.tokens.push_back(stream[i]);
        } else if (!current.tokens.empty()) {
            phrases.push_back(std::move(current));
            current = {};
        }
    }
    if (!current.tokens.empty()) phrases.push_back(std::move(current));
    return phrases;
}

// Longest phrase wins; ties go to the latest occurrence.
const NounPhrase* choose(const std::vector<NounPhrase>& phrases, bool require_qualifying) {
    const NounPhrase* best = nullptr;
    for (const auto& p : phrases) {
        if (require_qualifying && !p.qualifying()) continue;
        if (!best || p.tokens.size() >= best->tokens.size()) best = &p;
    }
    return best;
}

std::string truncate_words(const std::string& text, std::size_t max_words) {
    std::istringstream ss(text);
    std::string word, out;
    std::size_t n = 0;
    while (n < max_words && (ss >> word)) {
        if (!out.empty()) out.push_back(' ');
        out += word;
        ++n;
    }
    return out;
}

}  // namespace

const std::vector<std::string>& stopwords() { return kStopwords; }

bool is_stopword(const std::string& lowercased) {
    return std::find(kStopwords.begin(), kStopwords.end(), lowercased) != kStopwords.end();
}

bool is_pronoun(const std::string& lowercased) { return kPronouns.count(lowercased) > 0; }

RewriteResult heuristic_rewrite(const corpus::Conversation& conv, std::size_t turn_index) {
    if (turn_index >= conv.turns.size()) {
        throw std::out_of_range("heuristic_rewrite: turn index out of range");
    }
    const corpus::Turn& turn = conv.turns[turn_index];
    std::vector<Token> tokens = split_tokens(turn.query);

    bool any_pronoun = false;
    for (const auto& t : tokens) {
        if (is_pronoun(t.core_lower())) any_pronoun = true;
    }

    RewriteResult result;

    // Rule 1: resolve pronouns against the nearest history turn that has a
    // multi-word or capitalized noun phrase.
    std::string antecedent;
    if (any_pronoun && turn_index > 0) {
        for (std::size_t j = turn_index; j-- > 0;) {
            auto phrases = noun_phrases(conv.turns[j]);
            if (const NounPhrase* np = choose(phrases, /*require_qualifying=*/true)) {
                antecedent = np->rendered();
                break;
            }
        }
    }
    if (any_pronoun && antecedent.empty()) result.unresolved = true;

    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t.lead;
        if (!antecedent.empty() && is_pronoun(t.core_lower())) {
            out += antecedent;
        } else {
            out += render_core(t);
        }
        out += t.trail;
    }

    // Rule 2: anchor topic-less queries to the opening turn's salient phrase.
    if (turn_index > 0) {
        std::unordered_set<std::string> history_content;
        for (std::size_t j = 0; j < turn_index; ++j) {
            for (const auto& p : noun_phrases(conv.turns[j])) {
                for (const auto& t : p.tokens) history_content.insert(t.core_lower());
            }
        }
        bool shares = false;
        for (const auto& t : split_tokens(out)) {
            if (is_content(t) && history_content.count(t.core_lower())) {
                shares = true;
                break;
            }
        }
        if (!shares) {
            auto phrases = noun_phrases(conv.turns[0]);
            const NounPhrase* salient = choose(phrases, /*require_qualifying=*/false);
            if (salient) out += " in the context of " + salient->rendered();
        }
    }

    result.text = truncate_words(out, kMaxRewriteWords);
    return result;
}

std::map<std::string, std::string> load_rewrites(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_rewrites: cannot open " + path);
    std::map<std::string, std::string> rewrites;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw corpus::ParseError("rewrites line " + std::to_string(line_no) +
                                     ": missing tab");
        }
        const std::string qid = line.substr(0, tab);
        const std::string text = embed::normalize_whitespace(line.substr(tab + 1));
        if (text.empty()) {
            throw corpus::ParseError("rewrites line " + std::to_string(line_no) +
                                     ": empty rewrite for " + qid);
        }
        if (!rewrites.emplace(qid, text).second) {
            throw corpus::DuplicateKeyError("rewrites: duplicate qid " + qid);
        }
    }
    return rewrites;
}

void write_rewrites(const std::map<std::string, std::string>& rewrites,
                    const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_rewrites: cannot open " + path);
    for (const auto& [qid, text] : rewrites) out << qid << '\t' << text << '\n';
}

}  // namespace convinv::rewrite
