#include <doctest.h>

#include <sfec/toy.hpp>
#include <sfec/wav.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

using namespace sfec;

namespace {

std::string tmp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(p);
    return p.string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

// Goertzel-style single-bin magnitude, the oracle for tone detection
double dft_mag(const std::vector<float>& x, double freq) {
    double re = 0, im = 0;
    const double w = 2.0 * std::numbers::pi * freq / 16000.0;
    for (std::size_t n = 0; n < x.size(); ++n) {
        re += x[n] * std::cos(w * double(n));
        im -= x[n] * std::sin(w * double(n));
    }
    return std::sqrt(re * re + im * im);
}

}  // namespace

TEST_CASE("toy corpus writes the advertised files") {
    ToyCorpusSpec spec;
    spec.per_class = 3;
    spec.seed = 5;
    const std::string dir = tmp_dir("sfec_toy_files");
    const auto records = generate_toy_corpus(spec, dir);

    REQUIRE(records.size() == 12);
    std::size_t wavs = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.path().extension() == ".wav") ++wavs;
    CHECK(wavs == 12);
    CHECK(std::filesystem::exists(std::filesystem::path(dir) / "manifest.jsonl"));

    const auto loaded = read_manifest((std::filesystem::path(dir) / "manifest.jsonl").string());
    REQUIRE(loaded.size() == 12);
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        CHECK(loaded[i].id == records[i].id);
        CHECK(loaded[i].label == records[i].label);
        const auto wav = read_wav(loaded[i].audio_path);
        CHECK(wav.samples.size() == 16000);
        // the keyword for the class appears in the transcript
        const auto toks = tokenize(loaded[i].transcript);
        const auto& kw = spec.keywords[label_index(loaded[i].label)];
        CHECK(std::find(toks.begin(), toks.end(), kw) != toks.end());
        CHECK(toks.size() >= 4);
        CHECK(toks.size() <= 9);
    }
}

TEST_CASE("noise-free toy audio peaks at the class tone") {
    ToyCorpusSpec spec;
    spec.per_class = 2;
    spec.noise_amplitude = 0.0;
    spec.seed = 9;
    const std::string dir = tmp_dir("sfec_toy_pure");
    const auto records = generate_toy_corpus(spec, dir);

    for (const auto& rec : records) {
        const auto wav = read_wav(rec.audio_path);
        const std::size_t cls = label_index(rec.label);
        const double own = dft_mag(wav.samples, spec.tones[cls]);
        for (std::size_t other = 0; other < spec.tones.size(); ++other) {
            if (other == cls) continue;
            CHECK(own > 50.0 * dft_mag(wav.samples, spec.tones[other]));
        }
        // a pure unit tone of length N has single-bin magnitude N/2
        CHECK(own == doctest::Approx(8000.0).epsilon(0.01));
    }
}

TEST_CASE("toy classes stay separable in tone space under default noise") {
    ToyCorpusSpec spec;
    spec.per_class = 10;
    spec.seed = 21;
    const std::string dir = tmp_dir("sfec_toy_sep");
    const auto records = generate_toy_corpus(spec, dir);

    for (const auto& rec : records) {
        const auto wav = read_wav(rec.audio_path);
        std::size_t best = 0;
        double best_mag = -1;
        for (std::size_t c = 0; c < spec.tones.size(); ++c) {
            const double m = dft_mag(wav.samples, spec.tones[c]);
            if (m > best_mag) {
                best_mag = m;
                best = c;
            }
        }
        CHECK(best == label_index(rec.label));
    }
}

TEST_CASE("equal seeds generate byte-identical corpora") {
    ToyCorpusSpec spec;
    spec.per_class = 2;
    spec.seed = 77;
    const std::string a = tmp_dir("sfec_toy_det_a");
    const std::string b = tmp_dir("sfec_toy_det_b");
    const auto ra = generate_toy_corpus(spec, a);
    const auto rb = generate_toy_corpus(spec, b);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) {
        CHECK(ra[i].id == rb[i].id);
        CHECK(ra[i].transcript == rb[i].transcript);
        CHECK(slurp(ra[i].audio_path) == slurp(rb[i].audio_path));
    }
    // manifests store bare filenames, so trees in different places match exactly
    CHECK(slurp((std::filesystem::path(a) / "manifest.jsonl").string()) ==
          slurp((std::filesystem::path(b) / "manifest.jsonl").string()));

    spec.seed = 78;
    const std::string c = tmp_dir("sfec_toy_det_c");
    const auto rc = generate_toy_corpus(spec, c);
    CHECK(slurp(rc[0].audio_path) != slurp(ra[0].audio_path));
}

TEST_CASE("toy embeddings ignore the corpus seed and cover the vocabulary") {
    const std::string p1 = tmp_dir("sfec_toy_emb") + "_1.txt";
    const std::string p2 = tmp_dir("sfec_toy_emb") + "_2.txt";
    write_toy_embeddings(p1, 16);
    write_toy_embeddings(p2, 16);
    CHECK(slurp(p1) == slurp(p2));

    const auto table = load_embeddings(p1, 16);
    for (const auto& kw : ToyCorpusSpec{}.keywords) CHECK(table.lookup(kw) != table.oov);
    for (const auto& w : toy_filler_words()) CHECK(table.lookup(w) != table.oov);
    CHECK(table.duplicate_warnings == 0);
}

TEST_CASE("toy corpus rejects inconsistent class setups") {
    ToyCorpusSpec spec;
    spec.tones = {440.0, 880.0};
    CHECK_THROWS_WITH_AS(generate_toy_corpus(spec, tmp_dir("sfec_toy_bad")),
                         doctest::Contains("2 tones"), std::invalid_argument);
    ToyCorpusSpec zero;
    zero.per_class = 0;
    CHECK_THROWS_AS(generate_toy_corpus(zero, tmp_dir("sfec_toy_bad")), std::invalid_argument);
}
