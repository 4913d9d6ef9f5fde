#include "convinv/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "convinv/toml_lite.hpp"

namespace convinv::harness {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

template <typename Fn>
auto stage(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw std::runtime_error("stage " + name + ": " + e.what());
    }
}

double median(std::vector<double> values) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) return values[mid];
    return 0.5 * (values[mid - 1] + values[mid]);
}

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace

const std::vector<Arm>& all_arms() {
    static const std::vector<Arm> arms = {Arm::session_oracle, Arm::convinv, Arm::tx_inversion,
                                          Arm::tx_human, Arm::rewrite_only};
    return arms;
}

std::string arm_name(Arm arm) {
    switch (arm) {
        case Arm::session_oracle: return "session_oracle";
        case Arm::convinv: return "convinv";
        case Arm::tx_inversion: return "tx_inversion";
        case Arm::tx_human: return "tx_human";
        case Arm::rewrite_only: return "rewrite_only";
    }
    return "unknown";
}

Arm arm_from_name(const std::string& name) {
    for (Arm arm : all_arms()) {
        if (arm_name(arm) == name) return arm;
    }
    throw std::invalid_argument("unknown arm: " + name);
}

std::size_t train_split_count(std::size_t n_conversations, double fraction) {
    if (n_conversations <= 1) return n_conversations;
    auto n = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n_conversations)));
    n = std::max<std::size_t>(1, std::min(n, n_conversations - 1));
    return n;
}

std::vector<std::string> inversion_text_pool(const std::vector<corpus::Passage>& passages,
                                             const std::vector<corpus::Conversation>& train_convs,
                                             std::size_t max_words) {
    std::vector<std::string> texts;
    texts.reserve(passages.size() + train_convs.size() * 4);
    for (const auto& p : passages) texts.push_back(encoder::truncate_head(p.text, max_words));
    for (const auto& conv : train_convs) {
        for (std::size_t t = 0; t < conv.turns.size(); ++t) {
            texts.push_back(rewrite::heuristic_rewrite(conv, t).text);
        }
    }
    return texts;
}

void ExperimentConfig::validate() const {
    if (arms.empty()) throw std::invalid_argument("experiment: at least one arm is required");
    if (train_fraction <= 0.0 || train_fraction > 1.0) {
        throw std::invalid_argument("experiment: train_fraction must be in (0, 1]");
    }
    if (top_k < 1) throw std::invalid_argument("experiment: top_k must be >= 1");
    feature_spec.validate();
    train.validate();
    correction.validate();
    if (rewrite_source.kind == rewrite::RewriteSourceKind::external_file &&
        rewrite_source.path.empty()) {
        throw std::invalid_argument("experiment: external rewrite source needs a path");
    }
}

std::string resolve_data_path(const std::string& path) {
    if (path.empty() || fs::path(path).is_absolute()) return path;
    const char* base = std::getenv("CONVINV_DATA_DIR");
    if (!base || !*base) return path;
    return (fs::path(base) / path).string();
}

ExperimentConfig load_config(const std::string& path) {
    const toml::Table t = toml::parse_file(path);
    ExperimentConfig cfg;

    cfg.conversations_path =
        resolve_data_path(toml::get_string(t, "corpus.conversations", "conversations.jsonl"));
    cfg.passages_path = resolve_data_path(toml::get_string(t, "corpus.passages", "passages.tsv"));
    cfg.qrels_path = resolve_data_path(toml::get_string(t, "corpus.qrels", "qrels.txt"));
    cfg.rewrites_path = resolve_data_path(toml::get_string(t, "corpus.rewrites", ""));

    cfg.feature_spec.dimension =
        static_cast<std::uint32_t>(toml::get_int(t, "embedder.dim", cfg.feature_spec.dimension));
    {
        std::vector<long long> fallback(cfg.feature_spec.char_ngram_orders.begin(),
                                        cfg.feature_spec.char_ngram_orders.end());
        cfg.feature_spec.char_ngram_orders.clear();
        for (long long n : toml::get_int_array(t, "embedder.char_ngram_orders", fallback)) {
            cfg.feature_spec.char_ngram_orders.push_back(static_cast<int>(n));
        }
    }
    cfg.feature_spec.use_word_unigrams =
        toml::get_bool(t, "embedder.word_unigrams", cfg.feature_spec.use_word_unigrams);
    cfg.feature_spec.use_word_bigrams =
        toml::get_bool(t, "embedder.word_bigrams", cfg.feature_spec.use_word_bigrams);
    cfg.feature_spec.hash_seed = static_cast<std::uint64_t>(
        toml::get_int(t, "embedder.hash_seed", static_cast<long long>(cfg.feature_spec.hash_seed)));

    cfg.seed = static_cast<std::uint64_t>(
        toml::get_int(t, "experiment.seed", static_cast<long long>(cfg.seed)));

    const std::string paradigm = toml::get_string(t, "train.paradigm", "kd");
    if (paradigm == "kd") {
        cfg.train.paradigm = encoder::Paradigm::kd;
    } else if (paradigm == "conv") {
        cfg.train.paradigm = encoder::Paradigm::conv;
    } else {
        throw std::runtime_error("config: train.paradigm must be \"kd\" or \"conv\"");
    }
    cfg.train.epochs = static_cast<std::size_t>(
        toml::get_int(t, "train.epochs", static_cast<long long>(cfg.train.epochs)));
    cfg.train.batch_size = static_cast<std::size_t>(
        toml::get_int(t, "train.batch_size", static_cast<long long>(cfg.train.batch_size)));
    cfg.train.learning_rate = toml::get_double(t, "train.learning_rate", cfg.train.learning_rate);
    cfg.train.temperature = toml::get_double(t, "train.temperature", cfg.train.temperature);
    cfg.train.momentum = toml::get_double(t, "train.momentum", cfg.train.momentum);
    cfg.train.seed = static_cast<std::uint64_t>(
        toml::get_int(t, "train.seed", static_cast<long long>(cfg.seed)));
    cfg.train.max_session_words = static_cast<std::size_t>(toml::get_int(
        t, "train.max_session_words", static_cast<long long>(cfg.train.max_session_words)));
    cfg.train.max_passage_words = static_cast<std::size_t>(toml::get_int(
        t, "train.max_passage_words", static_cast<long long>(cfg.train.max_passage_words)));

    cfg.correction.beam_width = static_cast<std::size_t>(toml::get_int(
        t, "correction.beam_width", static_cast<long long>(cfg.correction.beam_width)));
    cfg.correction.max_steps = static_cast<std::size_t>(toml::get_int(
        t, "correction.max_steps", static_cast<long long>(cfg.correction.max_steps)));
    cfg.correction.candidates_per_hypothesis = static_cast<std::size_t>(
        toml::get_int(t, "correction.candidates_per_hypothesis",
                      static_cast<long long>(cfg.correction.candidates_per_hypothesis)));
    cfg.correction.max_words = static_cast<std::size_t>(toml::get_int(
        t, "correction.max_words", static_cast<long long>(cfg.correction.max_words)));
    cfg.correction.stop_similarity =
        toml::get_double(t, "correction.stop_similarity", cfg.correction.stop_similarity);
    cfg.correction.patience = static_cast<std::size_t>(toml::get_int(
        t, "correction.patience", static_cast<long long>(cfg.correction.patience)));

    const std::string source = toml::get_string(t, "rewrite.source", "heuristic");
    if (source == "heuristic") {
        cfg.rewrite_source.kind = rewrite::RewriteSourceKind::heuristic;
    } else if (source == "external_file") {
        cfg.rewrite_source.kind = rewrite::RewriteSourceKind::external_file;
    } else if (source == "human_gold") {
        cfg.rewrite_source.kind = rewrite::RewriteSourceKind::human_gold;
    } else {
        throw std::runtime_error("config: rewrite.source must be heuristic, external_file, "
                                 "or human_gold");
    }
    cfg.rewrite_source.path = resolve_data_path(toml::get_string(t, "rewrite.path", ""));
    if (cfg.rewrite_source.kind == rewrite::RewriteSourceKind::external_file &&
        cfg.rewrite_source.path.empty() && !cfg.rewrites_path.empty()) {
        cfg.rewrite_source.path = cfg.rewrites_path;
    }

    std::vector<std::string> arm_names;
    for (Arm arm : cfg.arms) arm_names.push_back(arm_name(arm));
    cfg.arms.clear();
    for (const auto& name : toml::get_string_array(t, "experiment.arms", arm_names)) {
        cfg.arms.push_back(arm_from_name(name));
    }
    cfg.output_dir = toml::get_string(t, "experiment.output_dir", cfg.output_dir);
    cfg.top_k = static_cast<std::size_t>(
        toml::get_int(t, "experiment.top_k", static_cast<long long>(cfg.top_k)));
    cfg.rel_threshold = static_cast<int>(
        toml::get_int(t, "experiment.rel_threshold", cfg.rel_threshold));
    cfg.train_fraction = toml::get_double(t, "experiment.train_fraction", cfg.train_fraction);
    return cfg;
}

namespace {

struct EvalTurn {
    const corpus::Conversation* conv;
    std::size_t turn_index;
    std::string qid;
    embed::Embedding session;
    std::optional<std::string> gold;
    std::string configured_rewrite;
};

std::optional<std::string> pick_rewrite(const corpus::Conversation& conv, std::size_t t,
                                        const rewrite::RewriteSource& source,
                                        const std::map<std::string, std::string>& external) {
    switch (source.kind) {
        case rewrite::RewriteSourceKind::heuristic:
            return rewrite::heuristic_rewrite(conv, t).text;
        case rewrite::RewriteSourceKind::human_gold:
            return conv.turns[t].human_rewrite;
        case rewrite::RewriteSourceKind::external_file: {
            auto it = external.find(conv.query_id(t));
            if (it == external.end()) return std::nullopt;
            return it->second;
        }
    }
    return std::nullopt;
}

void write_inversion_jsonl(const std::string& path, const std::vector<InversionRecord>& records,
                           bool emit_trace) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    for (const auto& r : records) {
        nlohmann::ordered_json line;
        line["qid"] = r.qid;
        line["text"] = r.text;
        line["score"] = r.score;
        line["seeded"] = r.seeded;
        line["steps"] = r.steps;
        if (emit_trace) {
            line["trace"] = nlohmann::ordered_json::array();
            for (const auto& step : r.trace) {
                line["trace"].push_back({{"text", step.text}, {"score", step.score}});
            }
        }
        out << line.dump() << '\n';
    }
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t_total = Clock::now();
    fs::create_directories(cfg.output_dir);

    // Ingest.
    const auto conversations =
        stage("load_conversations", [&] { return corpus::load_conversations(cfg.conversations_path); });
    const auto passages = stage("load_passages", [&] { return corpus::load_passages(cfg.passages_path); });
    const auto qrels = stage("load_qrels", [&] { return corpus::load_qrels(cfg.qrels_path); });
    std::map<std::string, std::string> external;
    if (cfg.rewrite_source.kind == rewrite::RewriteSourceKind::external_file) {
        external = stage("load_rewrites", [&] { return rewrite::load_rewrites(cfg.rewrite_source.path); });
    }
    if (conversations.empty()) throw std::runtime_error("stage load_conversations: no conversations");

    const std::size_t n_train = train_split(conversations.size(), cfg.train_fraction);
    std::vector<corpus::Conversation> train_convs(conversations.begin(),
                                                  conversations.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<corpus::Conversation> eval_convs(
        conversations.begin() + static_cast<std::ptrdiff_t>(n_train == conversations.size() ? 0 : n_train),
        conversations.end());

    const embed::HashingEmbedder embedder(cfg.feature_spec);

    // Train the session encoder.
    const auto t_train = Clock::now();
    encoder::SessionEncoder enc(embedder);
    ExperimentReport report;
    report.train = stage("train", [&] {
        return cfg.train.paradigm == encoder::Paradigm::kd
                   ? encoder::train_kd(enc, train_convs, cfg.train)
                   : encoder::train_conv(enc, train_convs, passages, qrels, cfg.train);
    });
    const double train_seconds = seconds_since(t_train);
    enc.save((fs::path(cfg.output_dir) / "encoder.cvwt").string());

    // Passage index under the frozen passage embedder.
    const auto t_index = Clock::now();
    std::vector<corpus::Passage> truncated = passages;
    for (auto& p : truncated) p.text = encoder::truncate_head(p.text, cfg.train.max_passage_words);
    const auto index = stage("build_index", [&] { return retrieval::DenseIndex::build(truncated, embedder); });
    const double index_seconds = seconds_since(t_index);

    // Inversion index: the generic text pool is the passage collection plus
    // heuristic rewrites of the training conversations.
    const auto t_inv_index = Clock::now();
    std::vector<std::string> inversion_texts;
    inversion_texts.reserve(passages.size() + train_convs.size() * 4);
    for (const auto& p : passages) {
        inversion_texts.push_back(encoder::truncate_head(p.text, cfg.correction.max_words));
    }
    for (const auto& conv : train_convs) {
        for (std::size_t t = 0; t < conv.turns.size(); ++t) {
            inversion_texts.push_back(rewrite::heuristic_rewrite(conv, t).text);
        }
    }
    const auto inv_index =
        stage("build_inversion_index", [&] { return invert::InversionIndex::build(inversion_texts, embedder); });

    invert::CorrectionConfig correction = cfg.correction;
    if (correction.vocabulary.empty()) correction.vocabulary = inv_index.texts();
    const double inv_index_seconds = seconds_since(t_inv_index);

    // Evaluation turns.
    std::vector<EvalTurn> turns;
    for (const auto& conv : eval_convs) {
        for (std::size_t t = 0; t < conv.turns.size(); ++t) {
            EvalTurn turn;
            turn.conv = &conv;
            turn.turn_index = t;
            turn.qid = conv.query_id(t);
            turn.session = stage("encode_session (" + turn.qid + ")", [&] {
                return enc.encode_session(conv, t, cfg.train.max_session_words);
            });
            turn.gold = conv.turns[t].human_rewrite;
            if (auto r = pick_rewrite(conv, t, cfg.rewrite_source, external)) {
                turn.configured_rewrite = *r;
            }
            turns.push_back(std::move(turn));
        }
    }
    report.train_conversations = train_convs.size();
    report.eval_conversations = eval_convs.size();
    report.eval_turns = turns.size();

    // Arms in canonical order; the oracle always runs for the deltas.
    std::vector<Arm> requested = cfg.arms;
    if (std::find(requested.begin(), requested.end(), Arm::session_oracle) == requested.end()) {
        requested.push_back(Arm::session_oracle);
    }
    std::map<std::string, double> timings = {{"train", train_seconds},
                                             {"passage_index", index_seconds},
                                             {"inversion_index", inv_index_seconds}};

    std::map<Arm, ArmReport> arm_reports;
    for (Arm arm : all_arms()) {
        if (std::find(requested.begin(), requested.end(), arm) == requested.end()) continue;
        const auto t_arm = Clock::now();
        ArmReport ar;
        corpus::RunFile run;
        run.tag = arm_name(arm);
        std::vector<double> sims, steps;
        double proxy_sum = 0.0;
        std::size_t proxy_n = 0;

        for (const auto& turn : turns) {
            embed::Embedding query_emb;
            std::string text;
            double similarity = 1.0;
            InversionRecord rec;
            rec.qid = turn.qid;

            const auto fail_ctx = "arm " + arm_name(arm) + " (" + turn.qid + ")";
            try {
                switch (arm) {
                    case Arm::session_oracle:
                        query_emb = turn.session;
                        break;
                    case Arm::convinv:
                    case Arm::tx_inversion:
                    case Arm::tx_human: {
                        std::optional<std::string> seed;
                        if (arm == Arm::convinv) {
                            if (turn.configured_rewrite.empty()) {
                                throw std::runtime_error("no configured rewrite");
                            }
                            seed = turn.configured_rewrite;
                        } else if (arm == Arm::tx_human) {
                            if (!turn.gold) throw std::runtime_error("no human rewrite");
                            seed = *turn.gold;
                        }
                        auto result =
                            invert::invert_session(turn.session, seed, inv_index, correction, embedder);
                        text = result.text;
                        similarity = result.final_score;
                        rec.text = result.text;
                        rec.score = result.final_score;
                        rec.seeded = result.seeded;
                        rec.steps = result.steps;
                        rec.trace = std::move(result.trace);
                        query_emb = embedder.embed(text);
                        break;
                    }
                    case Arm::rewrite_only: {
                        if (turn.configured_rewrite.empty()) {
                            throw std::runtime_error("no configured rewrite");
                        }
                        text = turn.configured_rewrite;
                        query_emb = embedder.embed(text);
                        similarity = embed::cosine(query_emb, turn.session);
                        rec.text = text;
                        rec.score = similarity;
                        rec.seeded = false;
                        rec.steps = 0;
                        break;
                    }
                }
                for (const auto& hit : index.search(query_emb, cfg.top_k)) {
                    run.add(turn.qid, hit.doc_id, hit.score);
                }
            } catch (const std::exception& e) {
                throw std::runtime_error("stage " + fail_ctx + ": " + e.what());
            }

            sims.push_back(similarity);
            if (arm != Arm::session_oracle) {
                steps.push_back(static_cast<double>(rec.steps));
                ar.records.push_back(std::move(rec));
                if (turn.gold && !text.empty()) {
                    proxy_sum += invert::interpretability_proxy(text, *turn.gold);
                    ++proxy_n;
                }
            }
        }

        ar.metrics = retrieval::evaluate(run, qrels, cfg.rel_threshold);
        double sim_total = 0.0;
        for (double s : sims) sim_total += s;
        ar.similarity_mean = sims.empty() ? 0.0 : sim_total / static_cast<double>(sims.size());
        if (proxy_n > 0) ar.proxy_f1 = proxy_sum / static_cast<double>(proxy_n);
        ar.median_steps = median(steps);
        ar.seconds = seconds_since(t_arm);
        timings["arm_" + arm_name(arm)] = ar.seconds;

        corpus::write_run(run, (fs::path(cfg.output_dir) / ("run_" + arm_name(arm) + ".txt")).string());
        if (arm != Arm::session_oracle) {
            write_inversion_jsonl(
                (fs::path(cfg.output_dir) / ("inverted_" + arm_name(arm) + ".jsonl")).string(),
                ar.records, cfg.emit_trace);
        }
        arm_reports.emplace(arm, std::move(ar));
    }

    // Deltas against the oracle.
    const auto& oracle_metrics = arm_reports.at(Arm::session_oracle).metrics;
    for (auto& [arm, ar] : arm_reports) {
        ar.delta_vs_oracle = retrieval::retrieval_delta(ar.metrics, oracle_metrics);
    }
    for (Arm arm : all_arms()) {
        auto it = arm_reports.find(arm);
        if (it != arm_reports.end()) report.arms.emplace_back(arm, std::move(it->second));
    }
    report.total_seconds = seconds_since(t_total);
    timings["total"] = report.total_seconds;

    // Reports on disk.
    nlohmann::ordered_json json = report_to_json(report, false);
    nlohmann::ordered_json meta;
    meta["timestamp_utc"] = utc_timestamp();
    meta["timings_seconds"] = nlohmann::ordered_json();
    for (const auto& [name, secs] : timings) meta["timings_seconds"][name] = secs;
    json["meta"] = std::move(meta);
    {
        std::ofstream out((fs::path(cfg.output_dir) / "report.json").string(), std::ios::binary);
        out << json.dump(2) << '\n';
    }
    {
        std::ofstream out((fs::path(cfg.output_dir) / "tables.txt").string(), std::ios::binary);
        out << render_tables(json);
    }
    return report;
}

nlohmann::ordered_json metrics_to_json(const retrieval::MetricsReport& metrics) {
    nlohmann::ordered_json j;
    j["mrr"] = metrics.mrr;
    j["ndcg_at_3"] = metrics.ndcg_at_3;
    j["recall_at_100"] = metrics.recall_at_100;
    j["num_queries"] = metrics.num_queries;
    j["flagged"] = metrics.flagged;
    return j;
}

nlohmann::ordered_json report_to_json(const ExperimentReport& report, bool include_meta) {
    nlohmann::ordered_json j;
    j["data"] = {{"train_conversations", report.train_conversations},
                 {"eval_conversations", report.eval_conversations},
                 {"eval_turns", report.eval_turns}};
    j["train"] = {{"epoch_loss", report.train.epoch_loss},
                  {"epoch_teacher_similarity", report.train.epoch_teacher_similarity},
                  {"final_metric", report.train.final_metric},
                  {"skipped_turns", report.train.skipped_turns}};
    j["arms"] = nlohmann::ordered_json();
    for (const auto& [arm, ar] : report.arms) {
        nlohmann::ordered_json a;
        a["metrics"] = metrics_to_json(ar.metrics);
        a["delta_vs_session_oracle"] = {{"mrr", ar.delta_vs_oracle.mrr},
                                        {"ndcg_at_3", ar.delta_vs_oracle.ndcg_at_3},
                                        {"recall_at_100", ar.delta_vs_oracle.recall_at_100}};
        a["similarity"] = ar.similarity_mean;
        if (ar.proxy_f1) {
            a["interpretability_proxy"] = *ar.proxy_f1;
        } else {
            a["interpretability_proxy"] = nullptr;
        }
        a["median_steps"] = ar.median_steps;
        j["arms"][arm_name(arm)] = std::move(a);
    }
    j["notes"] = {{"interpretability_proxy",
                   "token-F1 overlap with gold rewrites; mechanical proxy, not a human "
                   "interpretability rating"}};
    if (include_meta) {
        j["meta"] = {{"timestamp_utc", utc_timestamp()}};
    }
    return j;
}

std::string render_tables(const nlohmann::ordered_json& report_json) {
    char buf[64];
    std::string out;
    const auto pct = [&buf](double v) {
        std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
        return std::string(buf);
    };

    const auto& arms = report_json.at("arms");
    const bool have_oracle = arms.contains("session_oracle");
    const auto oracle = [&](const char* key) {
        return have_oracle ? arms.at("session_oracle").at("metrics").at(key).get<double>() : 0.0;
    };
    const double o_mrr = oracle("mrr"), o_ndcg = oracle("ndcg_at_3"), o_rec = oracle("recall_at_100");

    std::snprintf(buf, sizeof buf, "%-16s %-14s %-14s %-14s %-8s %-8s\n", "arm", "MRR",
                  "NDCG@3", "R@100", "sim", "F1*");
    out += buf;
    out += std::string(78, '-') + "\n";
    for (const auto& [name, a] : arms.items()) {
        const auto& m = a.at("metrics");
        const auto cell = [&](double v, double base) {
            std::string s = pct(v);
            if (have_oracle) {
                char d[32];
                std::snprintf(d, sizeof d, " (%+.1f)", (v - base) * 100.0);
                s += d;
            }
            return s;
        };
        const std::string sim = pct(a.at("similarity").get<double>());
        std::string f1 = "-";
        if (!a.at("interpretability_proxy").is_null()) {
            std::snprintf(buf, sizeof buf, "%.3f", a.at("interpretability_proxy").get<double>());
            f1 = buf;
        }
        std::snprintf(buf, sizeof buf, "%-16s %-14s %-14s %-14s %-8s %-8s\n", name.c_str(),
                      cell(m.at("mrr").get<double>(), o_mrr).c_str(),
                      cell(m.at("ndcg_at_3").get<double>(), o_ndcg).c_str(),
                      cell(m.at("recall_at_100").get<double>(), o_rec).c_str(), sim.c_str(),
                      f1.c_str());
        out += buf;
    }
    out += "\nmetrics and similarity are x100; deltas in parentheses are vs session_oracle\n";
    out += "* token-F1 overlap with gold rewrites; mechanical proxy, not a human rating\n";
    return out;
}

}  // namespace convinv::harness
