#pragma once
// Session encoder: a frozen base embedder plus a trainable linear transform,
//   s = normalize(W * embed(session_text) + b)
// trained either by knowledge distillation against rewrite embeddings (MSE)
// or by an in-batch-negative contrastive loss against passage embeddings.
// The base embedder and the passage embedder are never modified by training.

#include <cstdint>
#include <string>
#include <vector>

#include "convinv/corpus.hpp"
#include "convinv/embed.hpp"

namespace convinv::encoder {

enum class Paradigm { kd, conv };

struct TrainConfig {
    Paradigm paradigm = Paradigm::kd;
    std::size_t epochs = 20;
    std::size_t batch_size = 16;
    double learning_rate = 0.05;
    double temperature = 0.05;  // conv only
    double momentum = 0.9;
    std::uint64_t seed = 7;
    std::size_t max_session_words = 512;
    std::size_t max_passage_words = 384;

    void validate() const;
};

struct TrainReport {
    std::vector<double> epoch_loss;
    // kd: mean cos(s_i, teacher_i) after each epoch; conv: left empty.
    std::vector<double> epoch_teacher_similarity;
    // kd: final teacher similarity; conv: mean reciprocal rank of the positive
    // passage over the training collection.
    double final_metric = 0.0;
    std::size_t skipped_turns = 0;  // conv: turns without a relevant passage
};

// History turns and the current query joined with "[SEP]", truncated to
// max_session_words by dropping the oldest words (the tail is kept). Absent
// responses are simply omitted.
std::string build_session_text(const corpus::Conversation& conv, std::size_t turn_index,
                               std::size_t max_session_words);

// First max_words words; passages keep their head when truncated.
std::string truncate_head(const std::string& text, std::size_t max_words);

class SessionEncoder {
public:
    // Starts as the identity transform (W = I, b = 0), i.e. the base embedder.
    explicit SessionEncoder(embed::HashingEmbedder base);

    const embed::HashingEmbedder& base() const { return base_; }
    std::uint32_t dim() const { return base_.spec().dimension; }

    const std::vector<double>& weight() const { return weight_; }  // D*D row-major
    const std::vector<double>& bias() const { return bias_; }
    void set_parameters(std::vector<double> weight, std::vector<double> bias);

    // normalize(W * embed(text) + b). When the affine map fixes the input
    // embedding (identity initialization) the base embedding is returned
    // bit-exactly.
    embed::Embedding encode_text(const std::string& session_text) const;

    embed::Embedding encode_session(const corpus::Conversation& conv, std::size_t turn_index,
                                    std::size_t max_session_words) const;

    // Checkpoint: magic "CVWT", u32 dim, row-major f32 W, f32 b, then the
    // FeatureSpec as a JSON footer.
    void save(const std::string& path) const;
    static SessionEncoder load(const std::string& path);

private:
    embed::HashingEmbedder base_;
    std::vector<double> weight_;
    std::vector<double> bias_;
};

// Mini-batch SGD with momentum minimizing mean ||s_i - E_q(rewrite_i)||^2.
// Every training turn must carry a human rewrite. Deterministic per seed.
TrainReport train_kd(SessionEncoder& enc, const std::vector<corpus::Conversation>& convs,
                     const TrainConfig& cfg);

// InfoNCE over in-batch negatives with frozen passage embeddings. Turns with
// no relevant passage in the qrels are skipped and counted in the report.
TrainReport train_conv(SessionEncoder& enc, const std::vector<corpus::Conversation>& convs,
                       const std::vector<corpus::Passage>& passages,
                       const corpus::Qrels& qrels, const TrainConfig& cfg);

// --- exposed for gradient verification in tests ---

struct KdBatch {
    std::vector<embed::Embedding> inputs;    // base embeddings of session texts
    std::vector<embed::Embedding> teachers;  // embeddings of rewrites
};

struct ConvBatch {
    std::vector<embed::Embedding> inputs;
    std::vector<embed::Embedding> positives;  // frozen passage embeddings
};

// Loss at (weight, bias); gradients are accumulated into grad_w/grad_b when
// non-null. Gradients flow exactly through the L2 normalization.
double kd_loss(const std::vector<double>& weight, const std::vector<double>& bias,
               const KdBatch& batch, std::vector<double>* grad_w, std::vector<double>* grad_b);

double conv_loss(const std::vector<double>& weight, const std::vector<double>& bias,
                 const ConvBatch& batch, double temperature, std::vector<double>* grad_w,
                 std::vector<double>* grad_b);

}  // namespace convinv::encoder
