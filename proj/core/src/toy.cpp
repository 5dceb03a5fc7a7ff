#include <sfec/toy.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

#include <sfec/wav.hpp>

namespace sfec {

const std::vector<std::string>& toy_filler_words() {
    static const std::vector<std::string> words = {"the",  "a",     "and",   "it",    "so",
                                                   "very", "well",  "now",   "then",  "today",
                                                   "maybe", "quite", "rather", "just"};
    return words;
}

std::vector<UtteranceRecord> generate_toy_corpus(const ToyCorpusSpec& spec,
                                                 const std::string& out_dir) {
    const auto& labels = canonical_labels();
    if (spec.tones.size() != labels.size() || spec.keywords.size() != labels.size())
        throw std::invalid_argument("toy corpus: need one tone and one keyword per class, got " +
                                    std::to_string(spec.tones.size()) + " tones and " +
                                    std::to_string(spec.keywords.size()) + " keywords");
    if (spec.per_class == 0 || spec.duration <= 0)
        throw std::invalid_argument("toy corpus: per_class and duration must be positive");

    std::filesystem::create_directories(out_dir);
    const std::size_t samples = static_cast<std::size_t>(std::lround(spec.duration * 16000.0));
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> phase_dist(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> noise_dist(-spec.noise_amplitude, spec.noise_amplitude);
    const auto& fillers = toy_filler_words();
    std::uniform_int_distribution<std::size_t> filler_dist(0, fillers.size() - 1);
    std::uniform_int_distribution<std::size_t> words_dist(4, 9);

    std::vector<UtteranceRecord> records;
    records.reserve(labels.size() * spec.per_class);
    std::vector<float> wave(samples);
    for (std::size_t c = 0; c < labels.size(); ++c) {
        for (std::size_t i = 0; i < spec.per_class; ++i) {
            const double phase = phase_dist(rng);
            const double omega = 2.0 * std::numbers::pi * spec.tones[c] / 16000.0;
            double peak = 0.0;
            for (std::size_t n = 0; n < samples; ++n) {
                double v = std::sin(omega * static_cast<double>(n) + phase);
                if (spec.noise_amplitude > 0) v += noise_dist(rng);
                wave[n] = static_cast<float>(v);
                peak = std::max(peak, std::abs(v));
            }
            if (peak > 0)
                for (auto& v : wave) v = static_cast<float>(v / peak);

            const std::size_t words = words_dist(rng);
            std::uniform_int_distribution<std::size_t> pos_dist(0, words - 1);
            const std::size_t keyword_at = pos_dist(rng);
            std::string transcript;
            for (std::size_t w = 0; w < words; ++w) {
                if (w) transcript += ' ';
                transcript += w == keyword_at ? spec.keywords[c] : fillers[filler_dist(rng)];
            }

            char tag[32];
            std::snprintf(tag, sizeof tag, "%s_%03zu", labels[c].c_str(), i);
            UtteranceRecord rec;
            rec.id = tag;
            rec.audio_path = rec.id + ".wav";  // keeps the manifest relocatable
            rec.transcript = transcript;
            rec.label = labels[c];
            write_wav((std::filesystem::path(out_dir) / rec.audio_path).string(), wave);
            records.push_back(std::move(rec));
        }
    }
    write_manifest((std::filesystem::path(out_dir) / "manifest.jsonl").string(), records);
    for (auto& rec : records)
        rec.audio_path = (std::filesystem::path(out_dir) / rec.audio_path).string();
    return records;
}

void write_toy_embeddings(const std::string& path, std::size_t dim,
                          const std::vector<std::string>& keywords) {
    if (dim == 0) throw std::invalid_argument("toy embeddings: dim must be positive");
    std::vector<std::string> vocab = keywords;
    vocab.insert(vocab.end(), toy_filler_words().begin(), toy_filler_words().end());

    // fixed seed: train and test corpora generated with different corpus seeds
    // must still agree on every word vector
    std::mt19937_64 rng(0xe3bedd1);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("toy embeddings: cannot write " + path);
    char num[32];
    for (const auto& word : vocab) {
        out << word;
        for (std::size_t d = 0; d < dim; ++d) {
            std::snprintf(num, sizeof num, " %.6f", dist(rng));
            out << num;
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("toy embeddings: short write to " + path);
}

}  // namespace sfec
