#pragma once
// Experiment pipelines: train a session encoder, invert held-out session
// embeddings under several arms, retrieve, evaluate, and report fidelity
// against the session-embedding oracle.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "convinv/corpus.hpp"
#include "convinv/embed.hpp"
#include "convinv/encoder.hpp"
#include "convinv/invert.hpp"
#include "convinv/retrieval.hpp"
#include "convinv/rewrite.hpp"

namespace convinv::harness {

enum class Arm { session_oracle, convinv, tx_inversion, tx_human, rewrite_only };

// Canonical arm order used everywhere (reports, file names).
const std::vector<Arm>& all_arms();
std::string arm_name(Arm arm);
Arm arm_from_name(const std::string& name);

struct ExperimentConfig {
    std::string conversations_path;
    std::string passages_path;
    std::string qrels_path;
    std::string rewrites_path;  // external rewrites, optional

    embed::FeatureSpec feature_spec;
    encoder::TrainConfig train;
    invert::CorrectionConfig correction;  // empty vocabulary = derive from index texts
    rewrite::RewriteSource rewrite_source;

    std::vector<Arm> arms = {Arm::session_oracle, Arm::convinv};
    std::string output_dir = "out";
    std::uint64_t seed = 7;
    std::size_t top_k = 1000;
    int rel_threshold = 1;
    // Leading fraction of conversations used for encoder training; the rest
    // are the evaluation turns.
    double train_fraction = 0.8;
    bool emit_trace = false;

    void validate() const;
};

// Parses the TOML schema (see README) and resolves relative corpus paths
// against CONVINV_DATA_DIR when that variable is set.
ExperimentConfig load_config(const std::string& path);
std::string resolve_data_path(const std::string& path);

// Number of leading conversations used for training. Always leaves at least
// one conversation on each side when two or more exist; a single conversation
// serves as both splits.
std::size_t train_split_count(std::size_t n_conversations, double fraction);

// The generic text pool behind the inversion index: passage texts truncated
// to the correction budget plus heuristic rewrites of the training turns.
std::vector<std::string> inversion_text_pool(const std::vector<corpus::Passage>& passages,
                                             const std::vector<corpus::Conversation>& train_convs,
                                             std::size_t max_words);

struct InversionRecord {
    std::string qid;
    std::string text;
    double score = 0.0;
    bool seeded = false;
    std::size_t steps = 0;
    std::vector<invert::TraceStep> trace;
};

struct ArmReport {
    retrieval::MetricsReport metrics;
    retrieval::MetricsDelta delta_vs_oracle;
    double similarity_mean = 0.0;
    // Token-F1 against gold rewrites; unset for the oracle arm.
    std::optional<double> proxy_f1;
    double median_steps = 0.0;
    std::vector<InversionRecord> records;  // empty for the oracle arm
    double seconds = 0.0;
};

struct ExperimentReport {
    std::vector<std::pair<Arm, ArmReport>> arms;  // canonical order
    encoder::TrainReport train;
    std::size_t train_conversations = 0;
    std::size_t eval_conversations = 0;
    std::size_t eval_turns = 0;
    double total_seconds = 0.0;
};

// Runs every configured arm (the session oracle is always included), writes
// run files, per-arm inversion JSONL, the encoder checkpoint, report.json,
// and tables.txt under output_dir, and returns the in-memory report.
// Failures abort with the stage name and query id in the message.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

// JSON rendering with a stable key order. Timings and timestamps are
// confined to the "meta" block so reports stay byte-comparable without it.
nlohmann::ordered_json report_to_json(const ExperimentReport& report, bool include_meta);

// Human-readable tables derived from the JSON form.
std::string render_tables(const nlohmann::ordered_json& report_json);

nlohmann::ordered_json metrics_to_json(const retrieval::MetricsReport& metrics);

}  // namespace convinv::harness
