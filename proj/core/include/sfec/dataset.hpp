#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "sfec/tensor.hpp"

namespace sfec {

struct UtteranceRecord {
    std::string id;
    std::string audio_path;
    std::string transcript;
    std::string label;
};

/// Canonical class order: anger, happiness, neutral, sadness.
const std::vector<std::string>& canonical_labels();
std::size_t label_index(const std::string& label);

/// Folds excitement into happiness; the four canonical labels pass through.
std::string merge_labels(const std::string& raw);

/// Lowercases, drops punctuation except apostrophes inside a word, splits on
/// whitespace.
std::vector<std::string> tokenize(const std::string& text);

struct EmbeddingTable {
    Tensor<float> table;  // row 0 is the pad row, the last row the OOV row, both zero
    std::unordered_map<std::string, std::size_t> index;
    std::size_t oov = 0;
    std::size_t dim = 0;
    std::size_t duplicate_warnings = 0;

    std::size_t lookup(const std::string& word) const;
};

/// One entry per line: word followed by `dim` decimal floats. Duplicate words
/// keep the first occurrence and bump duplicate_warnings.
EmbeddingTable load_embeddings(const std::string& path, std::size_t dim = 300);

/// Always returns exactly max_tokens indices: first max_tokens tokens kept,
/// the rest right-padded with the pad index 0.
std::vector<std::size_t> tokenize_and_pad(const std::string& transcript,
                                          const EmbeddingTable& vocab,
                                          std::size_t max_tokens = 100);

/// Manifest rows are JSON objects, one per line, keys id/audio/transcript/label.
/// Reading applies merge_labels, so raw excitement rows load as happiness.
/// Relative audio paths are resolved against the manifest's own directory.
std::vector<UtteranceRecord> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<UtteranceRecord>& records);

struct FoldSplit {
    std::size_t fold = 0;
    std::vector<std::string> train;
    std::vector<std::string> validation;
    std::vector<std::string> test;
};

/// Shuffles ids by seed, deals them round-robin into 10 folds; split k tests on
/// fold k and validates on fold (k+1) mod 10.
std::vector<FoldSplit> split_folds(const std::vector<std::string>& ids, std::uint64_t seed);

}  // namespace sfec
