#include "convinv/embed.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>

namespace convinv::embed {

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 32) : c;
}

bool is_space(char c) {
    return std::isspace(static_cast<unsigned char>(c)) != 0;
}

void add_count(SparseCounts& counts, std::uint32_t bucket, std::int64_t delta) {
    auto it = std::lower_bound(
        counts.begin(), counts.end(), bucket,
        [](const auto& entry, std::uint32_t b) { return entry.first < b; });
    if (it != counts.end() && it->first == bucket) {
        it->second += delta;
        if (it->second == 0) counts.erase(it);
    } else {
        counts.insert(it, {bucket, delta});
    }
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = kFnvOffset;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> words;
    std::string current;
    for (char c : text) {
        if (is_space(c)) {
            if (!current.empty()) {
                words.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(ascii_lower(c));
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
        } else {
            if (pending_space) out.push_back(' ');
            pending_space = false;
            out.push_back(c);
        }
    }
    return out;
}

void FeatureSpec::validate() const {
    if (dimension < 8) {
        throw std::invalid_argument("FeatureSpec: dimension must be >= 8");
    }
    for (int n : char_ngram_orders) {
        if (n < 2 || n > 4) {
            throw std::invalid_argument("FeatureSpec: char n-gram orders must be in {2,3,4}");
        }
    }
}

HashingEmbedder::HashingEmbedder(FeatureSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
}

HashedFeature HashingEmbedder::hash_feature(std::string_view feature) const {
    const std::uint64_t h = fnv1a64(feature) ^ spec_.hash_seed;
    return {static_cast<std::uint32_t>(h % spec_.dimension), (h >> 63) ? -1 : +1};
}

SparseCounts HashingEmbedder::word_counts(const std::string& word) const {
    SparseCounts counts;
    if (spec_.use_word_unigrams) {
        auto f = hash_feature(word);
        add_count(counts, f.bucket, f.sign);
    }
    for (int n : spec_.char_ngram_orders) {
        const auto len = static_cast<std::size_t>(n);
        if (word.size() < len) continue;
        const std::size_t last = word.size() - len;
        std::string marked;
        for (std::size_t i = 0; i <= last; ++i) {
            marked.clear();
            if (i == 0) marked.push_back('^');
            marked.append(word, i, len);
            if (i == last) marked.push_back('$');
            auto f = hash_feature(marked);
            add_count(counts, f.bucket, f.sign);
        }
    }
    return counts;
}

HashedFeature HashingEmbedder::bigram_feature(const std::string& w1,
                                              const std::string& w2) const {
    std::string joined;
    joined.reserve(w1.size() + 1 + w2.size());
    joined.append(w1);
    joined.push_back(' ');
    joined.append(w2);
    return hash_feature(joined);
}

SparseCounts HashingEmbedder::raw_features(std::string_view text) const {
    const auto words = tokenize(text);
    if (words.empty()) throw EmptyTextError();

    SparseCounts counts;
    for (const auto& w : words) {
        for (const auto& [bucket, c] : word_counts(w)) {
            add_count(counts, bucket, c);
        }
    }
    if (spec_.use_word_bigrams) {
        for (std::size_t i = 0; i + 1 < words.size(); ++i) {
            auto f = bigram_feature(words[i], words[i + 1]);
            add_count(counts, f.bucket, f.sign);
        }
    }
    return counts;
}

Embedding HashingEmbedder::embed_counts(const SparseCounts& counts) const {
    std::int64_t sumsq = 0;
    for (const auto& [bucket, c] : counts) sumsq += c * c;
    if (sumsq == 0) {
        throw std::domain_error("all feature counts cancelled; cannot normalize");
    }
    const double norm = std::sqrt(static_cast<double>(sumsq));

    Embedding e;
    e.values.assign(spec_.dimension, 0.0);
    for (const auto& [bucket, c] : counts) {
        e.values[bucket] = static_cast<double>(c) / norm;
    }
    return e;
}

Embedding HashingEmbedder::embed(std::string_view text) const {
    return embed_counts(raw_features(text));
}

double cosine(const Embedding& a, const Embedding& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("cosine: dimension mismatch");
    }
    double dot = 0.0, sa = 0.0, sb = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        dot += a.values[i] * b.values[i];
        sa += a.values[i] * a.values[i];
        sb += b.values[i] * b.values[i];
    }
    if (sa == 0.0 || sb == 0.0) {
        throw std::domain_error("cosine: zero vector");
    }
    return dot / (std::sqrt(sa) * std::sqrt(sb));
}

SparseCounts merge_counts(const SparseCounts& base, const SparseCounts& delta) {
    SparseCounts out;
    out.reserve(base.size() + delta.size());
    std::size_t i = 0, j = 0;
    while (i < base.size() && j < delta.size()) {
        if (base[i].first < delta[j].first) {
            out.push_back(base[i++]);
        } else if (base[i].first > delta[j].first) {
            out.push_back(delta[j++]);
        } else {
            const std::int64_t c = base[i].second + delta[j].second;
            if (c != 0) out.push_back({base[i].first, c});
            ++i;
            ++j;
        }
    }
    while (i < base.size()) out.push_back(base[i++]);
    while (j < delta.size()) out.push_back(delta[j++]);
    return out;
}

void save_matrix(const std::string& path, const std::vector<std::string>& ids,
                 const std::vector<Embedding>& rows) {
    if (ids.size() != rows.size()) {
        throw std::invalid_argument("save_matrix: ids/rows size mismatch");
    }
    const std::uint32_t dim = rows.empty() ? 0 : static_cast<std::uint32_t>(rows[0].dim());
    for (const auto& r : rows) {
        if (r.dim() != dim) throw std::invalid_argument("save_matrix: ragged rows");
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_matrix: cannot open " + path);
    const char magic[4] = {'C', 'V', 'N', 'V'};
    const std::uint32_t version = 1;
    const std::uint64_t count = rows.size();
    out.write(magic, 4);
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
    out.write(reinterpret_cast<const char*>(&count), sizeof count);
    std::vector<float> row(dim);
    for (const auto& r : rows) {
        for (std::uint32_t i = 0; i < dim; ++i) row[i] = static_cast<float>(r.values[i]);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(sizeof(float) * dim));
    }
    if (!out) throw std::runtime_error("save_matrix: write failed for " + path);

    std::ofstream ids_out(path + ".ids", std::ios::binary);
    if (!ids_out) throw std::runtime_error("save_matrix: cannot open " + path + ".ids");
    for (const auto& id : ids) ids_out << id << '\n';
}

EmbeddingMatrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_matrix: cannot open " + path);
    char magic[4];
    std::uint32_t version = 0;
    EmbeddingMatrix m;
    std::uint64_t count = 0;
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "CVNV", 4) != 0) {
        throw std::runtime_error("load_matrix: bad magic in " + path);
    }
    in.read(reinterpret_cast<char*>(&version), sizeof version);
    in.read(reinterpret_cast<char*>(&m.dim), sizeof m.dim);
    in.read(reinterpret_cast<char*>(&count), sizeof count);
    if (!in || version != 1) throw std::runtime_error("load_matrix: bad header in " + path);
    m.data.resize(count * m.dim);
    in.read(reinterpret_cast<char*>(m.data.data()),
            static_cast<std::streamsize>(sizeof(float) * m.data.size()));
    if (!in) throw std::runtime_error("load_matrix: truncated data in " + path);

    std::ifstream ids_in(path + ".ids");
    if (!ids_in) throw std::runtime_error("load_matrix: missing sidecar " + path + ".ids");
    std::string line;
    while (std::getline(ids_in, line)) m.ids.push_back(line);
    if (m.ids.size() != count) {
        throw std::runtime_error("load_matrix: sidecar row count mismatch for " + path);
    }
    return m;
}

}  // namespace convinv::embed
