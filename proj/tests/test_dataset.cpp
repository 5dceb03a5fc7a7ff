#include <doctest.h>

#include <sfec/dataset.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace sfec;

namespace {

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::trunc);
    f << content;
}

}  // namespace

TEST_CASE("label merging folds excitement into happiness") {
    CHECK(merge_labels("excitement") == "happiness");
    CHECK(merge_labels("anger") == "anger");
    CHECK(merge_labels("happiness") == "happiness");
    CHECK(merge_labels("neutral") == "neutral");
    CHECK(merge_labels("sadness") == "sadness");
    CHECK_THROWS_WITH_AS(merge_labels("frustration"), doctest::Contains("frustration"),
                         std::invalid_argument);
    CHECK_THROWS_AS(merge_labels(""), std::invalid_argument);

    CHECK(label_index("anger") == 0);
    CHECK(label_index("happiness") == 1);
    CHECK(label_index("neutral") == 2);
    CHECK(label_index("sadness") == 3);
    CHECK_THROWS_AS(label_index("excitement"), std::invalid_argument);
}

TEST_CASE("reference class counts load to the full corpus size") {
    // raw counts before the merge: happiness is itself plus excitement
    const std::vector<std::pair<std::string, std::size_t>> raw = {
        {"anger", 1103}, {"happiness", 595}, {"excitement", 1041}, {"neutral", 1708},
        {"sadness", 1084}};
    std::ostringstream body;
    std::size_t k = 0;
    for (const auto& [label, count] : raw)
        for (std::size_t i = 0; i < count; ++i, ++k)
            body << "{\"id\":\"u" << k << "\",\"audio\":\"u" << k
                 << ".wav\",\"transcript\":\"x\",\"label\":\"" << label << "\"}\n";
    const std::string path = tmp_path("sfec_manifest_counts.jsonl");
    write_text(path, body.str());

    const auto records = read_manifest(path);
    CHECK(records.size() == 5531);
    std::size_t per_class[4] = {0, 0, 0, 0};
    for (const auto& r : records) ++per_class[label_index(r.label)];
    CHECK(per_class[0] == 1103);
    CHECK(per_class[1] == 1636);
    CHECK(per_class[2] == 1708);
    CHECK(per_class[3] == 1084);
}

TEST_CASE("manifest round trip and malformed rows") {
    std::vector<UtteranceRecord> recs = {{"a1", "x/a1.wav", "so happy today", "happiness"},
                                         {"b2", "/abs/b2.wav", "", "anger"}};
    const std::string path = tmp_path("sfec_manifest_rt.jsonl");
    write_manifest(path, recs);
    const auto back = read_manifest(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == "a1");
    const auto parent = std::filesystem::path(path).parent_path();
    CHECK(back[0].audio_path == (parent / "x/a1.wav").string());
    CHECK(back[0].transcript == "so happy today");
    CHECK(back[1].audio_path == "/abs/b2.wav");
    CHECK(back[1].label == "anger");
    CHECK(back[1].transcript == "");

    write_text(path, "{\"id\":\"a\",\"audio\":\"a.wav\",\"label\":\"anger\"}\n");
    CHECK_THROWS_WITH_AS(read_manifest(path), doctest::Contains("transcript"),
                         std::runtime_error);
    write_text(path, "not json\n");
    CHECK_THROWS_WITH_AS(read_manifest(path), doctest::Contains("line 1"), std::runtime_error);
    CHECK_THROWS_AS(read_manifest(tmp_path("sfec_manifest_nope.jsonl")), std::runtime_error);
}

TEST_CASE("tokenizer lowercases and strips punctuation") {
    CHECK(tokenize("I am HAPPY!") == std::vector<std::string>{"i", "am", "happy"});
    CHECK(tokenize("don't stop") == std::vector<std::string>{"don't", "stop"});
    CHECK(tokenize("'quoted' words, yes.") == std::vector<std::string>{"quoted", "words", "yes"});
    CHECK(tokenize("well-known fact") == std::vector<std::string>{"wellknown", "fact"});
    CHECK(tokenize("  spaced\tout\nlines ") == std::vector<std::string>{"spaced", "out", "lines"});
    CHECK(tokenize("") == std::vector<std::string>{});
    CHECK(tokenize("?!.,") == std::vector<std::string>{});
    CHECK(tokenize("A2 b3") == std::vector<std::string>{"a2", "b3"});
}

TEST_CASE("token padding always yields exactly the maximum length") {
    const std::string path = tmp_path("sfec_emb_small.txt");
    write_text(path, "i 0.1 0.2\nam 0.3 0.4\nhappy 0.5 0.6\n");
    const auto table = load_embeddings(path, 2);

    auto ids = tokenize_and_pad("I am HAPPY!", table, 100);
    REQUIRE(ids.size() == 100);
    CHECK(ids[0] == table.lookup("i"));
    CHECK(ids[1] == table.lookup("am"));
    CHECK(ids[2] == table.lookup("happy"));
    for (std::size_t i = 3; i < 100; ++i) CHECK(ids[i] == 0);

    CHECK(tokenize_and_pad("", table, 100) == std::vector<std::size_t>(100, 0));

    std::string long_text = "happy";
    for (int i = 0; i < 119; ++i) long_text += " am";
    auto truncated = tokenize_and_pad(long_text, table, 100);
    REQUIRE(truncated.size() == 100);
    CHECK(truncated[0] == table.lookup("happy"));  // kept from the front, no pads
    for (std::size_t i = 1; i < 100; ++i) CHECK(truncated[i] == table.lookup("am"));

    // property: arbitrary junk still comes back at length 100
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::string s;
        std::uniform_int_distribution<int> len(0, 400);
        std::uniform_int_distribution<int> ch(32, 126);
        const int n = len(rng);
        for (int i = 0; i < n; ++i) s.push_back(char(ch(rng)));
        CHECK(tokenize_and_pad(s, table, 100).size() == 100);
    }
}

TEST_CASE("embedding table parses rows and zeroes the pad and oov rows") {
    const std::string path = tmp_path("sfec_emb_ok.txt");
    write_text(path, "hello 0.5 -1.25 3\nworld 1 2 3\nhello 9 9 9\n");
    const auto table = load_embeddings(path, 3);

    CHECK(table.dim == 3);
    CHECK(table.duplicate_warnings == 1);
    CHECK(table.table.dim(0) == 4);  // pad + 2 words + oov
    const std::size_t h = table.lookup("hello");
    CHECK(h == 1);
    CHECK(table.table.at2(h, 0) == 0.5f);  // first occurrence won
    CHECK(table.table.at2(h, 1) == -1.25f);
    CHECK(table.lookup("world") == 2);
    CHECK(table.lookup("unseen") == table.oov);
    CHECK(table.oov == 3);
    for (std::size_t d = 0; d < 3; ++d) {
        CHECK(table.table.at2(0, d) == 0.0f);
        CHECK(table.table.at2(table.oov, d) == 0.0f);
    }
}

TEST_CASE("embedding loader rejects malformed lines with their line number") {
    const std::string path = tmp_path("sfec_emb_bad.txt");
    write_text(path, "good 1 2 3\nshort 1 2\n");
    CHECK_THROWS_WITH_AS(load_embeddings(path, 3), doctest::Contains("line 2"),
                         std::runtime_error);
    write_text(path, "long 1 2 3 4\n");
    CHECK_THROWS_WITH_AS(load_embeddings(path, 3), doctest::Contains("line 1"),
                         std::runtime_error);
    write_text(path, "word 1 2 notanumber\n");
    CHECK_THROWS_AS(load_embeddings(path, 3), std::runtime_error);
    CHECK_THROWS_AS(load_embeddings(tmp_path("sfec_emb_nope.txt"), 3), std::runtime_error);
}

TEST_CASE("fold splitting deals a shuffled partition") {
    std::vector<std::string> ids;
    for (int i = 0; i < 100; ++i) ids.push_back("u" + std::to_string(i));

    const auto splits = split_folds(ids, 42);
    REQUIRE(splits.size() == 10);
    for (const auto& s : splits) {
        CHECK(s.test.size() == 10);
        CHECK(s.validation.size() == 10);
        CHECK(s.train.size() == 80);
        std::set<std::string> all(s.train.begin(), s.train.end());
        all.insert(s.validation.begin(), s.validation.end());
        all.insert(s.test.begin(), s.test.end());
        CHECK(all.size() == 100);  // pairwise disjoint and covering
    }
    // neighbouring folds rotate: split k tests on what split k-1 validated on
    CHECK(splits[0].validation == splits[1].test);

    const auto again = split_folds(ids, 42);
    for (std::size_t k = 0; k < 10; ++k) {
        CHECK(again[k].train == splits[k].train);
        CHECK(again[k].validation == splits[k].validation);
        CHECK(again[k].test == splits[k].test);
    }
    const auto other = split_folds(ids, 43);
    CHECK(other[0].test != splits[0].test);
}

TEST_CASE("fold splitting handles uneven sizes and rejects tiny corpora") {
    std::vector<std::string> ids;
    for (int i = 0; i < 47; ++i) ids.push_back(std::to_string(i));
    const auto splits = split_folds(ids, 7);
    std::size_t total = 0;
    for (const auto& s : splits[3].train) (void)s, ++total;
    total += splits[3].validation.size() + splits[3].test.size();
    CHECK(total == 47);
    // 47 = 7 folds of 5 and 3 folds of 4
    for (const auto& s : splits) {
        CHECK(s.test.size() >= 4);
        CHECK(s.test.size() <= 5);
    }

    ids.resize(9);
    CHECK_THROWS_WITH_AS(split_folds(ids, 1), doctest::Contains("9"), std::invalid_argument);
}
