#include "convinv/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "convinv/embed.hpp"

namespace convinv::corpus {

using embed::normalize_whitespace;

namespace {

std::ifstream open_input(const std::string& path, const char* op) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(std::string(op) + ": cannot open " + path);
    return in;
}

std::ofstream open_output(const std::string& path, const char* op) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error(std::string(op) + ": cannot open " + path);
    return out;
}

std::string format_score(double score) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", score);
    return buf;
}

}  // namespace

void Qrels::add(const std::string& query_id, const std::string& doc_id, int grade) {
    if (grade < 0) throw ParseError("qrels: negative relevance for " + query_id + " " + doc_id);
    auto& docs = grades_[query_id];
    if (!docs.emplace(doc_id, grade).second) {
        throw DuplicateKeyError("qrels: duplicate judgment for " + query_id + " " + doc_id);
    }
}

int Qrels::grade(const std::string& query_id, const std::string& doc_id) const {
    auto it = grades_.find(query_id);
    if (it == grades_.end()) return 0;
    auto jt = it->second.find(doc_id);
    return jt == it->second.end() ? 0 : jt->second;
}

bool Qrels::has_query(const std::string& query_id) const {
    return grades_.count(query_id) > 0;
}

const std::map<std::string, int>* Qrels::judgments(const std::string& query_id) const {
    auto it = grades_.find(query_id);
    return it == grades_.end() ? nullptr : &it->second;
}

void RunFile::add(const std::string& query_id, const std::string& doc_id, double score) {
    auto& list = results[query_id];
    if (!list.empty() && score > list.back().score) {
        throw std::invalid_argument("run: scores must be non-increasing with rank (query " +
                                    query_id + ")");
    }
    for (const auto& e : list) {
        if (e.doc_id == doc_id) {
            throw DuplicateKeyError("run: duplicate doc " + doc_id + " for query " + query_id);
        }
    }
    list.push_back({doc_id, score});
}

void RunFile::validate() const {
    for (const auto& [qid, list] : results) {
        std::unordered_set<std::string> seen;
        double prev = 0.0;
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (i > 0 && list[i].score > prev) {
                throw std::invalid_argument("run: scores must be non-increasing (query " + qid +
                                            ")");
            }
            prev = list[i].score;
            if (!seen.insert(list[i].doc_id).second) {
                throw DuplicateKeyError("run: duplicate doc " + list[i].doc_id + " for query " +
                                        qid);
            }
        }
    }
}

std::vector<Conversation> load_conversations(const std::string& path) {
    auto in = open_input(path, "load_conversations");
    std::vector<Conversation> convs;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError("conversations line " + std::to_string(line_no) + ": " + e.what());
        }
        const auto fail = [&](const std::string& msg) {
            throw ParseError("conversations line " + std::to_string(line_no) + ": " + msg);
        };
        if (!rec.is_object() || !rec.contains("conv_id") || !rec.contains("turns")) {
            fail("record must have conv_id and turns");
        }
        Conversation conv;
        conv.conv_id = rec["conv_id"].get<std::string>();
        if (!seen_ids.insert(conv.conv_id).second) {
            throw DuplicateKeyError("conversations line " + std::to_string(line_no) +
                                    ": duplicate conv_id " + conv.conv_id);
        }
        if (!rec["turns"].is_array() || rec["turns"].empty()) fail("turns must be non-empty");
        std::unordered_set<std::string> turn_ids;
        for (const auto& t : rec["turns"]) {
            Turn turn;
            if (!t.contains("turn_id") || !t.contains("query")) {
                fail("turn must have turn_id and query");
            }
            turn.turn_id = t["turn_id"].get<std::string>();
            if (!turn_ids.insert(turn.turn_id).second) {
                fail("duplicate turn_id " + turn.turn_id + " in " + conv.conv_id);
            }
            turn.query = normalize_whitespace(t["query"].get<std::string>());
            if (turn.query.empty()) fail("empty query in turn " + turn.turn_id);
            if (t.contains("response") && !t["response"].is_null()) {
                turn.response = normalize_whitespace(t["response"].get<std::string>());
            }
            if (t.contains("human_rewrite") && !t["human_rewrite"].is_null()) {
                turn.human_rewrite = normalize_whitespace(t["human_rewrite"].get<std::string>());
            }
            conv.turns.push_back(std::move(turn));
        }
        convs.push_back(std::move(conv));
    }
    return convs;
}

void write_conversations(const std::vector<Conversation>& convs, const std::string& path) {
    auto out = open_output(path, "write_conversations");
    for (const auto& conv : convs) {
        nlohmann::ordered_json rec;
        rec["conv_id"] = conv.conv_id;
        rec["turns"] = nlohmann::ordered_json::array();
        for (const auto& t : conv.turns) {
            nlohmann::ordered_json jt;
            jt["turn_id"] = t.turn_id;
            jt["query"] = t.query;
            if (t.response) jt["response"] = *t.response;
            if (t.human_rewrite) jt["human_rewrite"] = *t.human_rewrite;
            rec["turns"].push_back(std::move(jt));
        }
        out << rec.dump() << '\n';
    }
}

std::vector<Passage> load_passages(const std::string& path) {
    auto in = open_input(path, "load_passages");
    std::vector<Passage> passages;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw ParseError("passages line " + std::to_string(line_no) + ": missing tab");
        }
        Passage p;
        p.doc_id = line.substr(0, tab);
        p.text = normalize_whitespace(line.substr(tab + 1));
        if (p.doc_id.empty() || p.text.empty()) {
            throw ParseError("passages line " + std::to_string(line_no) + ": empty field");
        }
        if (!seen.insert(p.doc_id).second) {
            throw DuplicateKeyError("passages line " + std::to_string(line_no) +
                                    ": duplicate doc_id " + p.doc_id);
        }
        passages.push_back(std::move(p));
    }
    return passages;
}

void write_passages(const std::vector<Passage>& passages, const std::string& path) {
    auto out = open_output(path, "write_passages");
    for (const auto& p : passages) out << p.doc_id << '\t' << p.text << '\n';
}

Qrels load_qrels(const std::string& path) {
    auto in = open_input(path, "load_qrels");
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string qid, zero, docid;
        long long rel = 0;
        if (!(ss >> qid >> zero >> docid >> rel)) {
            throw ParseError("qrels line " + std::to_string(line_no) + ": expected 4 fields");
        }
        if (rel < 0) {
            throw ParseError("qrels line " + std::to_string(line_no) + ": negative relevance");
        }
        qrels.add(qid, docid, static_cast<int>(rel));
    }
    return qrels;
}

void write_qrels(const Qrels& qrels, const std::string& path) {
    auto out = open_output(path, "write_qrels");
    for (const auto& [qid, docs] : qrels.all()) {
        for (const auto& [docid, grade] : docs) {
            out << qid << " 0 " << docid << ' ' << grade << '\n';
        }
    }
}

RunFile load_run(const std::string& path) {
    auto in = open_input(path, "load_run");
    RunFile run;
    bool tag_set = false;
    std::string line;
    std::size_t line_no = 0;
    std::map<std::string, std::size_t> expected_rank;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string qid, q0, docid, tag;
        std::size_t rank = 0;
        double score = 0.0;
        if (!(ss >> qid >> q0 >> docid >> rank >> score >> tag)) {
            throw ParseError("run line " + std::to_string(line_no) + ": expected 6 fields");
        }
        if (rank != ++expected_rank[qid]) {
            throw std::invalid_argument("run line " + std::to_string(line_no) +
                                        ": ranks must be contiguous from 1 (query " + qid + ")");
        }
        if (!tag_set) {
            run.tag = tag;
            tag_set = true;
        }
        run.add(qid, docid, score);
    }
    return run;
}

void write_run(const RunFile& run, const std::string& path) {
    run.validate();
    auto out = open_output(path, "write_run");
    for (const auto& [qid, list] : run.results) {
        for (std::size_t i = 0; i < list.size(); ++i) {
            out << qid << " Q0 " << list[i].doc_id << ' ' << (i + 1) << ' '
                << format_score(list[i].score) << ' ' << run.tag << '\n';
        }
    }
}

// --- synthetic corpus ---

namespace {

// Deterministic sampling helpers. Only the raw mt19937_64 stream is used so
// output bytes do not depend on the standard library's distribution choices.
struct Rng {
    std::mt19937_64 gen;

    explicit Rng(std::uint64_t seed) : gen(seed) {}

    std::uint64_t below(std::uint64_t n) { return gen() % n; }
    bool chance(double p) { return static_cast<double>(gen() >> 11) * 0x1.0p-53 < p; }

    template <typename T>
    const T& pick(const std::vector<T>& pool) {
        return pool[below(pool.size())];
    }
};

const std::vector<std::string> kModifiers = {
    "throat", "lung",   "tiger",  "solar",    "coral",  "polar",  "ancient",
    "electric", "baroque", "alpine", "desert", "arctic", "tropical", "urban",
    "wooden", "roman",  "lunar",  "hybrid",   "wild",   "glacial"};

const std::vector<std::string> kHeads = {
    "cancer",   "sharks",  "panels",  "reefs",    "bears",    "volcanoes", "music",
    "engines",  "bridges", "meadows", "turbines", "glaciers", "orchids",   "temples",
    "rovers",   "batteries", "falcons", "canyons", "mosses",   "pipelines"};

// First-turn templates: self-contained, the entity is the only multi-word
// content run.
const std::vector<std::string> kOpeners = {
    "what is @", "what is known about @", "how do @ work", "where are @ found",
    "what is the history of @"};

// Follow-ups carry exactly one pronoun and no multi-word content runs, so the
// nearest qualifying noun phrase is always the active entity.
const std::vector<std::string> kFollowUps = {
    "is it dangerous", "what causes it",     "is it treatable",  "how common is it",
    "can it spread",   "what do they eat",   "where do they live", "are they endangered",
    "how big do they get", "why do they matter"};

// Topic shifts introduce a fresh entity and share no content word with the
// history, which makes the rewrite append the opening topic as context.
const std::vector<std::string> kShifts = {"what about @", "and what of @"};

// Responses mention the active entity last so it stays the most recent
// qualifying noun phrase.
const std::vector<std::string> kResponses = {
    "there is a lot to learn about @", "experts can share an overview of @",
    "this is a guide to the study of @", "here is what is known about @"};

const std::vector<std::string> kFillers = {
    "report",   "survey",   "analysis", "summary",  "review",   "notes",    "facts",
    "figures",  "trends",   "sources",  "records",  "methods",  "results",  "background",
    "details",  "examples", "insights", "patterns", "evidence", "findings", "charts",
    "tables",   "remarks",  "comments", "updates",  "archive",  "digest",   "briefing",
    "primer",   "outline",  "glossary", "appendix", "excerpt",  "chapter",  "section",
    "volume",   "edition",  "article",  "column",   "story",    "essay",    "journal",
    "bulletin", "gazette",  "register", "ledger",   "manual",   "handbook", "reference",
    "catalog"};

std::string fill(const std::string& tmpl, const std::string& entity) {
    std::string out = tmpl;
    const auto pos = out.find('@');
    out.replace(pos, 1, entity);
    return out;
}

std::string resolve_follow_up(const std::string& tmpl, const std::string& entity) {
    // Replace the single pronoun token ("it" or "they") with the entity.
    std::string out;
    std::istringstream ss(tmpl);
    std::string word;
    while (ss >> word) {
        if (!out.empty()) out.push_back(' ');
        if (word == "it" || word == "they") {
            out += entity;
        } else {
            out += word;
        }
    }
    return out;
}

std::string filler_words(Rng& rng, std::size_t count) {
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        if (!out.empty()) out.push_back(' ');
        out += rng.pick(kFillers);
    }
    return out;
}

std::string doc_id_for(std::size_t index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "d%06zu", index + 1);
    return buf;
}

}  // namespace

SynthCorpus synth_corpus(std::uint64_t seed, std::size_t n_conversations,
                         std::size_t n_passages) {
    if (n_conversations < 1 || n_passages < 1) {
        throw std::invalid_argument("synth_corpus: counts must be >= 1");
    }
    Rng rng(seed);
    SynthCorpus corpus;

    struct TurnPlan {
        std::string qid;
        std::string rewrite;
        std::string entity;  // active topic at this turn
    };
    std::vector<TurnPlan> plans;

    for (std::size_t c = 0; c < n_conversations; ++c) {
        char cid[16];
        std::snprintf(cid, sizeof cid, "c%04zu", c + 1);
        Conversation conv;
        conv.conv_id = cid;

        const std::string mod1 = rng.pick(kModifiers);
        const std::string head1 = rng.pick(kHeads);
        const std::string entity1 = mod1 + " " + head1;

        const std::size_t n_turns = 3 + rng.below(3);  // 3..5
        std::size_t shift_at = 0;                      // 0 = no shift
        if (n_turns >= 4 && rng.chance(0.35)) shift_at = 2 + rng.below(n_turns - 3);

        const bool query_only = rng.chance(1.0 / 3.0);
        std::string active_entity = entity1;

        for (std::size_t t = 0; t < n_turns; ++t) {
            Turn turn;
            turn.turn_id = std::to_string(t + 1);
            std::string rewrite;

            if (t == 0) {
                const std::string& tmpl = rng.pick(kOpeners);
                turn.query = fill(tmpl, entity1);
                rewrite = turn.query;
            } else if (t == shift_at && shift_at != 0) {
                std::string mod2 = rng.pick(kModifiers);
                std::string head2 = rng.pick(kHeads);
                while (mod2 == mod1) mod2 = rng.pick(kModifiers);
                while (head2 == head1) head2 = rng.pick(kHeads);
                active_entity = mod2 + " " + head2;
                const std::string& tmpl = rng.pick(kShifts);
                turn.query = fill(tmpl, active_entity);
                rewrite = turn.query + " in the context of " + entity1;
            } else {
                const std::string& tmpl = rng.pick(kFollowUps);
                turn.query = tmpl;
                rewrite = resolve_follow_up(tmpl, active_entity);
            }

            if (!query_only && rng.chance(0.7)) {
                turn.response = fill(rng.pick(kResponses), active_entity);
            }
            turn.human_rewrite = rewrite;
            conv.turns.push_back(turn);
            plans.push_back({conv.conv_id + "_" + turn.turn_id, rewrite, active_entity});
            corpus.rewrites[plans.back().qid] = rewrite;
        }
        corpus.conversations.push_back(std::move(conv));
    }

    // One dedicated relevant passage per turn, then distractors up to the
    // requested collection size.
    const std::size_t total = std::max(n_passages, plans.size());
    std::vector<std::string> turn_doc(plans.size());
    for (std::size_t i = 0; i < plans.size(); ++i) {
        const auto& plan = plans[i];
        Passage p;
        p.doc_id = doc_id_for(i);
        p.text = "passage on " + plan.entity + " answering " + plan.rewrite + " " +
                 filler_words(rng, 8 + rng.below(10));
        corpus.passages.push_back(std::move(p));
        turn_doc[i] = doc_id_for(i);
        corpus.qrels.add(plan.qid, turn_doc[i], 2);
    }
    for (std::size_t i = plans.size(); i < total; ++i) {
        Passage p;
        p.doc_id = doc_id_for(i);
        const std::string entity = rng.pick(kModifiers) + " " + rng.pick(kHeads);
        p.text = "general notes on " + entity + " " + filler_words(rng, 10 + rng.below(12));
        corpus.passages.push_back(std::move(p));
    }

    // Same-topic passages from sibling turns get a secondary grade.
    std::size_t base = 0;
    for (const auto& conv : corpus.conversations) {
        const std::size_t n = conv.turns.size();
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) {
                if (a == b || plans[base + a].entity != plans[base + b].entity) continue;
                corpus.qrels.add(plans[base + a].qid, turn_doc[base + b], 1);
            }
        }
        base += n;
    }
    return corpus;
}

}  // namespace convinv::corpus
