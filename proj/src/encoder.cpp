#include "convinv/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace convinv::encoder {

namespace {

struct Example {
    embed::Embedding input;
    embed::Embedding target;
};

// Forward pass z = W e + b, s = z / ||z||. Returns s and fills z and the norm.
embed::Embedding forward(const std::vector<double>& weight, const std::vector<double>& bias,
                         const embed::Embedding& e, std::vector<double>& z, double& norm) {
    const std::size_t d = bias.size();
    z.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        double acc = 0.0;
        const double* row = weight.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) acc += row[j] * e.values[j];
        z[i] = acc + bias[i];
    }
    double sumsq = 0.0;
    for (double v : z) sumsq += v * v;
    norm = std::sqrt(sumsq);
    if (norm == 0.0) throw std::domain_error("session encoder produced a zero vector");
    embed::Embedding s;
    s.values.resize(d);
    for (std::size_t i = 0; i < d; ++i) s.values[i] = z[i] / norm;
    return s;
}

// Backprop of dL/ds through the normalization and affine map:
//   dL/dz = (dL/ds - (s . dL/ds) s) / ||z||
//   dL/dW_ij += dL/dz_i * e_j,   dL/db_i += dL/dz_i
void backward(const embed::Embedding& e, const embed::Embedding& s, double norm,
              const std::vector<double>& grad_s, std::vector<double>* grad_w,
              std::vector<double>* grad_b) {
    const std::size_t d = s.dim();
    double s_dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) s_dot += s.values[i] * grad_s[i];
    for (std::size_t i = 0; i < d; ++i) {
        const double gz = (grad_s[i] - s_dot * s.values[i]) / norm;
        if (grad_b) (*grad_b)[i] += gz;
        if (grad_w) {
            double* row = grad_w->data() + i * d;
            for (std::size_t j = 0; j < d; ++j) row[j] += gz * e.values[j];
        }
    }
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::mt19937_64& gen) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = gen() % i;
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

}  // namespace

void TrainConfig::validate() const {
    if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be > 0");
    if (temperature <= 0.0) throw std::invalid_argument("TrainConfig: temperature must be > 0");
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    if (paradigm == Paradigm::conv && batch_size < 2) {
        throw std::invalid_argument("TrainConfig: contrastive training needs batch_size >= 2");
    }
    if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
}

std::string build_session_text(const corpus::Conversation& conv, std::size_t turn_index,
                               std::size_t max_session_words) {
    if (turn_index >= conv.turns.size()) {
        throw std::out_of_range("build_session_text: turn index out of range");
    }
    std::string text;
    const auto append = [&text](const std::string& part) {
        if (!text.empty()) text += " [SEP] ";
        text += part;
    };
    for (std::size_t j = 0; j < turn_index; ++j) {
        append(conv.turns[j].query);
        if (conv.turns[j].response) append(*conv.turns[j].response);
    }
    append(conv.turns[turn_index].query);

    std::istringstream ss(text);
    std::vector<std::string> words;
    std::string w;
    while (ss >> w) words.push_back(std::move(w));
    if (words.size() <= max_session_words) return text;

    std::string out;
    for (std::size_t i = words.size() - max_session_words; i < words.size(); ++i) {
        if (!out.empty()) out.push_back(' ');
        out += words[i];
    }
    return out;
}

std::string truncate_head(const std::string& text, std::size_t max_words) {
    std::istringstream ss(text);
    std::string w, out;
    std::size_t n = 0;
    while (n < max_words && (ss >> w)) {
        if (!out.empty()) out.push_back(' ');
        out += w;
        ++n;
    }
    return out;
}

SessionEncoder::SessionEncoder(embed::HashingEmbedder base) : base_(std::move(base)) {
    const std::size_t d = base_.spec().dimension;
    weight_.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) weight_[i * d + i] = 1.0;
    bias_.assign(d, 0.0);
}

void SessionEncoder::set_parameters(std::vector<double> weight, std::vector<double> bias) {
    const std::size_t d = base_.spec().dimension;
    if (weight.size() != d * d || bias.size() != d) {
        throw std::invalid_argument("SessionEncoder: parameter size mismatch");
    }
    weight_ = std::move(weight);
    bias_ = std::move(bias);
}

embed::Embedding SessionEncoder::encode_text(const std::string& session_text) const {
    const embed::Embedding e = base_.embed(session_text);
    std::vector<double> z;
    double norm = 0.0;
    embed::Embedding s = forward(weight_, bias_, e, z, norm);
    // An affine map that fixes the (already unit) input adds no information;
    // return the input to keep the identity encoder bit-exact.
    if (z == e.values) return e;
    return s;
}

embed::Embedding SessionEncoder::encode_session(const corpus::Conversation& conv,
                                                std::size_t turn_index,
                                                std::size_t max_session_words) const {
    return encode_text(build_session_text(conv, turn_index, max_session_words));
}

void SessionEncoder::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("SessionEncoder::save: cannot open " + path);
    const char magic[4] = {'C', 'V', 'W', 'T'};
    const std::uint32_t d = dim();
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&d), sizeof d);
    std::vector<float> buf(weight_.size());
    for (std::size_t i = 0; i < weight_.size(); ++i) buf[i] = static_cast<float>(weight_[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(sizeof(float) * buf.size()));
    buf.resize(bias_.size());
    for (std::size_t i = 0; i < bias_.size(); ++i) buf[i] = static_cast<float>(bias_[i]);
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(sizeof(float) * buf.size()));

    nlohmann::ordered_json spec;
    const auto& fs = base_.spec();
    spec["dimension"] = fs.dimension;
    spec["char_ngram_orders"] = fs.char_ngram_orders;
    spec["use_word_unigrams"] = fs.use_word_unigrams;
    spec["use_word_bigrams"] = fs.use_word_bigrams;
    spec["hash_seed"] = fs.hash_seed;
    out << spec.dump();
    if (!out) throw std::runtime_error("SessionEncoder::save: write failed for " + path);
}

SessionEncoder SessionEncoder::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("SessionEncoder::load: cannot open " + path);
    char magic[4];
    std::uint32_t d = 0;
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "CVWT", 4) != 0) {
        throw std::runtime_error("SessionEncoder::load: bad magic in " + path);
    }
    in.read(reinterpret_cast<char*>(&d), sizeof d);
    std::vector<float> wbuf(static_cast<std::size_t>(d) * d), bbuf(d);
    in.read(reinterpret_cast<char*>(wbuf.data()),
            static_cast<std::streamsize>(sizeof(float) * wbuf.size()));
    in.read(reinterpret_cast<char*>(bbuf.data()),
            static_cast<std::streamsize>(sizeof(float) * bbuf.size()));
    if (!in) throw std::runtime_error("SessionEncoder::load: truncated checkpoint " + path);
    std::stringstream footer;
    footer << in.rdbuf();
    nlohmann::json spec;
    try {
        spec = nlohmann::json::parse(footer.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("SessionEncoder::load: bad footer in " + path + ": " + e.what());
    }
    embed::FeatureSpec fs;
    fs.dimension = spec.at("dimension").get<std::uint32_t>();
    fs.char_ngram_orders = spec.at("char_ngram_orders").get<std::vector<int>>();
    fs.use_word_unigrams = spec.at("use_word_unigrams").get<bool>();
    fs.use_word_bigrams = spec.at("use_word_bigrams").get<bool>();
    fs.hash_seed = spec.at("hash_seed").get<std::uint64_t>();
    if (fs.dimension != d) {
        throw std::runtime_error("SessionEncoder::load: footer dimension mismatch in " + path);
    }

    SessionEncoder enc((embed::HashingEmbedder(fs)));
    std::vector<double> w(wbuf.begin(), wbuf.end());
    std::vector<double> b(bbuf.begin(), bbuf.end());
    enc.set_parameters(std::move(w), std::move(b));
    return enc;
}

double kd_loss(const std::vector<double>& weight, const std::vector<double>& bias,
               const KdBatch& batch, std::vector<double>* grad_w, std::vector<double>* grad_b) {
    const std::size_t n = batch.inputs.size();
    const std::size_t d = bias.size();
    if (n == 0) return 0.0;
    double total = 0.0;
    std::vector<double> z, grad_s(d);
    for (std::size_t k = 0; k < n; ++k) {
        double norm = 0.0;
        const embed::Embedding s = forward(weight, bias, batch.inputs[k], z, norm);
        const auto& t = batch.teachers[k];
        double loss = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double diff = s.values[i] - t.values[i];
            loss += diff * diff;
            grad_s[i] = 2.0 * diff / static_cast<double>(n);
        }
        total += loss;
        if (grad_w || grad_b) backward(batch.inputs[k], s, norm, grad_s, grad_w, grad_b);
    }
    return total / static_cast<double>(n);
}

double conv_loss(const std::vector<double>& weight, const std::vector<double>& bias,
                 const ConvBatch& batch, double temperature, std::vector<double>* grad_w,
                 std::vector<double>* grad_b) {
    const std::size_t n = batch.inputs.size();
    const std::size_t d = bias.size();
    if (n == 0) return 0.0;

    std::vector<embed::Embedding> s(n);
    std::vector<std::vector<double>> zs(n);
    std::vector<double> norms(n);
    for (std::size_t k = 0; k < n; ++k) {
        s[k] = forward(weight, bias, batch.inputs[k], zs[k], norms[k]);
    }

    double total = 0.0;
    std::vector<double> logits(n), softmax(n), grad_s(d);
    for (std::size_t k = 0; k < n; ++k) {
        double max_logit = -1e300;
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t i = 0; i < d; ++i) dot += s[k].values[i] * batch.positives[j].values[i];
            logits[j] = dot / temperature;
            max_logit = std::max(max_logit, logits[j]);
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            softmax[j] = std::exp(logits[j] - max_logit);
            denom += softmax[j];
        }
        for (std::size_t j = 0; j < n; ++j) softmax[j] /= denom;
        total += -std::log(softmax[k]);

        if (grad_w || grad_b) {
            std::fill(grad_s.begin(), grad_s.end(), 0.0);
            for (std::size_t j = 0; j < n; ++j) {
                const double coeff =
                    (softmax[j] - (j == k ? 1.0 : 0.0)) / (temperature * static_cast<double>(n));
                for (std::size_t i = 0; i < d; ++i) {
                    grad_s[i] += coeff * batch.positives[j].values[i];
                }
            }
            backward(batch.inputs[k], s[k], norms[k], grad_s, grad_w, grad_b);
        }
    }
    return total / static_cast<double>(n);
}

namespace {

// Shared SGD-with-momentum loop over pre-embedded examples.
template <typename LossFn>
TrainReport run_sgd(SessionEncoder& enc, std::vector<Example>& examples, const TrainConfig& cfg,
                    LossFn&& batch_loss, bool track_teacher_similarity) {
    TrainReport report;
    const std::size_t d = enc.dim();
    std::vector<double> weight = enc.weight();
    std::vector<double> bias = enc.bias();
    std::vector<double> vel_w(weight.size(), 0.0), vel_b(bias.size(), 0.0);
    std::vector<double> grad_w(weight.size()), grad_b(bias.size());
    std::mt19937_64 gen(cfg.seed);

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto order = shuffled_indices(examples.size(), gen);
        double epoch_total = 0.0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::vector<const Example*> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) batch.push_back(&examples[order[i]]);

            std::fill(grad_w.begin(), grad_w.end(), 0.0);
            std::fill(grad_b.begin(), grad_b.end(), 0.0);
            const double loss = batch_loss(weight, bias, batch, &grad_w, &grad_b);
            epoch_total += loss * static_cast<double>(batch.size());
            seen += batch.size();

            for (std::size_t i = 0; i < weight.size(); ++i) {
                vel_w[i] = cfg.momentum * vel_w[i] - cfg.learning_rate * grad_w[i];
                weight[i] += vel_w[i];
            }
            for (std::size_t i = 0; i < bias.size(); ++i) {
                vel_b[i] = cfg.momentum * vel_b[i] - cfg.learning_rate * grad_b[i];
                bias[i] += vel_b[i];
            }
        }
        report.epoch_loss.push_back(epoch_total / static_cast<double>(seen));

        if (track_teacher_similarity) {
            double sim = 0.0;
            std::vector<double> z;
            for (const auto& ex : examples) {
                double norm = 0.0;
                const embed::Embedding s = forward(weight, bias, ex.input, z, norm);
                double dot = 0.0;
                for (std::size_t i = 0; i < d; ++i) dot += s.values[i] * ex.target.values[i];
                sim += dot;
            }
            report.epoch_teacher_similarity.push_back(sim / static_cast<double>(examples.size()));
        }
    }
    enc.set_parameters(std::move(weight), std::move(bias));
    return report;
}

}  // namespace

TrainReport train_kd(SessionEncoder& enc, const std::vector<corpus::Conversation>& convs,
                     const TrainConfig& cfg) {
    cfg.validate();
    const auto& base = enc.base();

    std::vector<Example> examples;
    for (const auto& conv : convs) {
        for (std::size_t t = 0; t < conv.turns.size(); ++t) {
            if (!conv.turns[t].human_rewrite) {
                throw std::invalid_argument("train_kd: turn " + conv.query_id(t) +
                                            " has no human rewrite");
            }
            Example ex;
            ex.input = base.embed(build_session_text(conv, t, cfg.max_session_words));
            ex.target = base.embed(*conv.turns[t].human_rewrite);
            examples.push_back(std::move(ex));
        }
    }

    auto batch_loss = [](const std::vector<double>& w, const std::vector<double>& b,
                         const std::vector<const Example*>& batch, std::vector<double>* gw,
                         std::vector<double>* gb) {
        KdBatch kb;
        for (const Example* ex : batch) {
            kb.inputs.push_back(ex->input);
            kb.teachers.push_back(ex->target);
        }
        return kd_loss(w, b, kb, gw, gb);
    };
    TrainReport report = run_sgd(enc, examples, cfg, batch_loss, true);
    report.final_metric =
        report.epoch_teacher_similarity.empty() ? 0.0 : report.epoch_teacher_similarity.back();
    return report;
}

TrainReport train_conv(SessionEncoder& enc, const std::vector<corpus::Conversation>& convs,
                       const std::vector<corpus::Passage>& passages, const corpus::Qrels& qrels,
                       const TrainConfig& cfg) {
    cfg.validate();
    const auto& base = enc.base();

    // Frozen passage embeddings, truncated to the passage budget.
    std::map<std::string, embed::Embedding> passage_emb;
    for (const auto& p : passages) {
        passage_emb.emplace(p.doc_id, base.embed(truncate_head(p.text, cfg.max_passage_words)));
    }

    std::size_t skipped = 0;
    std::vector<Example> examples;
    for (const auto& conv : convs) {
        for (std::size_t t = 0; t < conv.turns.size(); ++t) {
            const std::string qid = conv.query_id(t);
            const auto* judgments = qrels.judgments(qid);
            // Positive = highest grade, ties to the lexicographically smallest
            // doc id that we actually have an embedding for.
            const embed::Embedding* positive = nullptr;
            int best_grade = 0;
            if (judgments) {
                for (const auto& [docid, grade] : *judgments) {
                    if (grade < 1 || grade <= best_grade) continue;
                    auto it = passage_emb.find(docid);
                    if (it == passage_emb.end()) continue;
                    positive = &it->second;
                    best_grade = grade;
                }
            }
            if (!positive) {
                ++skipped;
                continue;
            }
            Example ex;
            ex.input = base.embed(build_session_text(conv, t, cfg.max_session_words));
            ex.target = *positive;
            examples.push_back(std::move(ex));
        }
    }
    if (examples.empty()) {
        throw std::invalid_argument("train_conv: no training turn has a relevant passage");
    }

    const double tau = cfg.temperature;
    auto batch_loss = [tau](const std::vector<double>& w, const std::vector<double>& b,
                            const std::vector<const Example*>& batch, std::vector<double>* gw,
                            std::vector<double>* gb) {
        ConvBatch cb;
        for (const Example* ex : batch) {
            cb.inputs.push_back(ex->input);
            cb.positives.push_back(ex->target);
        }
        return conv_loss(w, b, cb, tau, gw, gb);
    };
    TrainReport report = run_sgd(enc, examples, cfg, batch_loss, false);
    report.skipped_turns = skipped;

    // Retrieval proxy: mean reciprocal rank of each example's positive among
    // all passages under the trained encoder.
    double mrr = 0.0;
    std::vector<double> z;
    for (const auto& ex : examples) {
        double norm = 0.0;
        const embed::Embedding s = forward(enc.weight(), enc.bias(), ex.input, z, norm);
        double pos_score = 0.0;
        for (std::size_t i = 0; i < s.dim(); ++i) pos_score += s.values[i] * ex.target.values[i];
        std::size_t better = 0;
        for (const auto& [docid, pe] : passage_emb) {
            double score = 0.0;
            for (std::size_t i = 0; i < s.dim(); ++i) score += s.values[i] * pe.values[i];
            if (score > pos_score) ++better;
        }
        mrr += 1.0 / static_cast<double>(better + 1);
    }
    report.final_metric = mrr / static_cast<double>(examples.size());
    return report;
}

}  // namespace convinv::encoder
