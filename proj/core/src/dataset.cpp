#include <sfec/dataset.hpp>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sfec {

const std::vector<std::string>& canonical_labels() {
    static const std::vector<std::string> labels = {"anger", "happiness", "neutral", "sadness"};
    return labels;
}

std::size_t label_index(const std::string& label) {
    const auto& labels = canonical_labels();
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) return i;
    throw std::invalid_argument("label_index: unknown label \"" + label + "\"");
}

std::string merge_labels(const std::string& raw) {
    if (raw == "excitement") return "happiness";
    for (const auto& l : canonical_labels())
        if (l == raw) return raw;
    throw std::invalid_argument("merge_labels: unknown label \"" + raw + "\"");
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    auto alnum = [](unsigned char c) { return std::isalnum(c) != 0; };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else if (alnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (c == '\'' && !cur.empty() && i + 1 < text.size() &&
                   alnum(static_cast<unsigned char>(text[i + 1]))) {
            cur.push_back('\'');
        }
        // every other punctuation mark is dropped
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

std::size_t EmbeddingTable::lookup(const std::string& word) const {
    auto it = index.find(word);
    return it == index.end() ? oov : it->second;
}

EmbeddingTable load_embeddings(const std::string& path, std::size_t dim) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("embeddings: cannot open " + path);
    if (dim == 0) throw std::invalid_argument("embeddings: dim must be positive");

    EmbeddingTable out;
    out.dim = dim;
    std::vector<float> flat(dim, 0.0f);  // pad row
    std::vector<std::string> order;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        std::vector<float> row;
        row.reserve(dim);
        double v;
        while (ls >> v) row.push_back(static_cast<float>(v));
        if (row.size() != dim || !(ls >> std::ws).eof())
            throw std::runtime_error("embeddings: line " + std::to_string(line_no) + " has " +
                                     std::to_string(row.size()) + " values, expected " +
                                     std::to_string(dim));
        if (out.index.count(word)) {
            ++out.duplicate_warnings;  // first occurrence wins
            continue;
        }
        out.index[word] = 1 + order.size();
        order.push_back(word);
        flat.insert(flat.end(), row.begin(), row.end());
    }
    flat.insert(flat.end(), dim, 0.0f);  // OOV row
    out.oov = 1 + order.size();
    out.table = Tensor<float>({out.oov + 1, dim}, flat);
    return out;
}

std::vector<std::size_t> tokenize_and_pad(const std::string& transcript,
                                          const EmbeddingTable& vocab, std::size_t max_tokens) {
    std::vector<std::size_t> ids;
    ids.reserve(max_tokens);
    for (const auto& tok : tokenize(transcript)) {
        if (ids.size() == max_tokens) break;
        ids.push_back(vocab.lookup(tok));
    }
    ids.resize(max_tokens, 0);
    return ids;
}

std::vector<UtteranceRecord> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("manifest: cannot open " + path);
    std::vector<UtteranceRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw std::runtime_error("manifest: line " + std::to_string(line_no) +
                                     " is not a JSON object");
        for (const char* key : {"id", "audio", "transcript", "label"})
            if (!j.contains(key) || !j[key].is_string())
                throw std::runtime_error("manifest: line " + std::to_string(line_no) +
                                         " is missing string key \"" + key + "\"");
        UtteranceRecord rec;
        rec.id = j["id"].get<std::string>();
        rec.audio_path = j["audio"].get<std::string>();
        if (std::filesystem::path(rec.audio_path).is_relative())
            rec.audio_path = (std::filesystem::path(path).parent_path() / rec.audio_path).string();
        rec.transcript = j["transcript"].get<std::string>();
        rec.label = merge_labels(j["label"].get<std::string>());
        out.push_back(std::move(rec));
    }
    return out;
}

void write_manifest(const std::string& path, const std::vector<UtteranceRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("manifest: cannot write " + path);
    for (const auto& rec : records) {
        nlohmann::json j;
        j["id"] = rec.id;
        j["audio"] = rec.audio_path;
        j["transcript"] = rec.transcript;
        j["label"] = rec.label;
        out << j.dump() << "\n";
    }
    if (!out) throw std::runtime_error("manifest: short write to " + path);
}

std::vector<FoldSplit> split_folds(const std::vector<std::string>& ids, std::uint64_t seed) {
    if (ids.size() < 10)
        throw std::invalid_argument("split_folds: need at least 10 records, got " +
                                    std::to_string(ids.size()));
    std::vector<std::string> shuffled = ids;
    std::mt19937_64 rng(seed);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    std::vector<std::vector<std::string>> folds(10);
    for (std::size_t i = 0; i < shuffled.size(); ++i) folds[i % 10].push_back(shuffled[i]);

    std::vector<FoldSplit> out(10);
    for (std::size_t k = 0; k < 10; ++k) {
        out[k].fold = k;
        out[k].test = folds[k];
        out[k].validation = folds[(k + 1) % 10];
        for (std::size_t f = 0; f < 10; ++f)
            if (f != k && f != (k + 1) % 10)
                out[k].train.insert(out[k].train.end(), folds[f].begin(), folds[f].end());
    }
    return out;
}

}  // namespace sfec
