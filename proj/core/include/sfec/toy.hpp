#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sfec/dataset.hpp"

namespace sfec {

/// Desk-scale stand-in corpus: each class is a pure tone plus noise on the
/// audio side and a keyword among filler words on the text side, so both
/// modalities are separable by construction.
struct ToyCorpusSpec {
    std::vector<double> tones = {440.0, 880.0, 1320.0, 1760.0};  // Hz, one per class
    std::vector<std::string> keywords = {"furious", "delighted", "okay", "gloomy"};
    double duration = 1.0;  // seconds at 16 kHz
    double noise_amplitude = 0.1;
    std::size_t per_class = 50;
    std::uint64_t seed = 1;
};

const std::vector<std::string>& toy_filler_words();

/// Writes one WAV per record plus manifest.jsonl into out_dir and returns the
/// records. Byte-identical output for equal spec + out_dir.
std::vector<UtteranceRecord> generate_toy_corpus(const ToyCorpusSpec& spec,
                                                 const std::string& out_dir);

/// Embeddings for the toy vocabulary (keywords + fillers). Drawn from a fixed
/// internal seed so corpora generated with different corpus seeds share one
/// identical embedding file.
void write_toy_embeddings(const std::string& path, std::size_t dim,
                          const std::vector<std::string>& keywords = ToyCorpusSpec{}.keywords);

}  // namespace sfec
