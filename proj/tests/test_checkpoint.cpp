#include <doctest.h>

#include <sfec/checkpoint.hpp>
#include <sfec/fusion.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

using namespace sfec;

namespace {

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return std::string((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::string& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), std::streamsize(bytes.size()));
}

FusionNet<float> make_net(std::uint64_t seed) {
    FusionConfig cfg;
    cfg.mode = FusionMode::F3;
    cfg.acoustic_width = 6;
    cfg.text_width = 4;
    cfg.hidden = 5;
    std::mt19937_64 rng(seed);
    return FusionNet<float>(cfg, rng);
}

}  // namespace

TEST_CASE("checkpoint round-trips every tensor bit-exactly") {
    auto a = make_net(1);
    ParamList<float> pa;
    a.collect("fusion", pa);
    const std::string path = tmp_path("sfec_ckpt_rt.bin");
    save_checkpoint(path, "toy", {{"lr", "0.001"}, {"fusion", "F3"}}, pa);

    auto b = make_net(2);  // different init, then overwritten by the load
    ParamList<float> pb;
    b.collect("fusion", pb);
    const auto meta = load_checkpoint(path, "toy", pb);
    CHECK(meta.at("lr") == "0.001");
    CHECK(meta.at("fusion") == "F3");
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const auto& va = pa[i].tensor->values();
        const auto& vb = pb[i].tensor->values();
        REQUIRE(va.size() == vb.size());
        CHECK(std::memcmp(va.data(), vb.data(), 4 * va.size()) == 0);
    }

    // saving the loaded model reproduces the file byte for byte
    const std::string again = tmp_path("sfec_ckpt_rt2.bin");
    save_checkpoint(again, "toy", meta, pb);
    CHECK(slurp(path) == slurp(again));
}

TEST_CASE("checkpoint header lists contiguous offsets") {
    auto net = make_net(3);
    ParamList<float> ps;
    net.collect("fusion", ps);
    const std::string path = tmp_path("sfec_ckpt_info.bin");
    save_checkpoint(path, "toy", {}, ps);

    const auto info = read_checkpoint_info(path);
    CHECK(info.version == kCheckpointVersion);
    CHECK(info.preset == "toy");
    REQUIRE(info.tensors.size() == ps.size());
    std::uint64_t expect = 0;
    for (std::size_t i = 0; i < info.tensors.size(); ++i) {
        CHECK(info.tensors[i].name == ps[i].name);
        CHECK(info.tensors[i].shape == ps[i].tensor->shape());
        CHECK(info.tensors[i].offset == expect);
        expect += 4 * ps[i].tensor->size();
    }
}

TEST_CASE("checkpoint validation names the specific inconsistency") {
    auto net = make_net(4);
    ParamList<float> ps;
    net.collect("fusion", ps);
    const std::string good = tmp_path("sfec_ckpt_good.bin");
    save_checkpoint(good, "toy", {}, ps);
    const std::string bytes = slurp(good);
    const std::string bad = tmp_path("sfec_ckpt_bad.bin");

    SUBCASE("truncated payload cites expected vs actual byte counts") {
        spit(bad, bytes.substr(0, bytes.size() - 10));
        std::uint64_t payload = 0;
        for (const auto& p : ps) payload += 4 * p.tensor->size();
        const std::string actual = std::to_string(payload - 10);
        const std::string expected = std::to_string(payload);
        CHECK_THROWS_WITH_AS(load_checkpoint(bad, "toy", ps), doctest::Contains(actual.c_str()),
                             std::runtime_error);
        CHECK_THROWS_WITH_AS(load_checkpoint(bad, "toy", ps), doctest::Contains(expected.c_str()),
                             std::runtime_error);
    }
    SUBCASE("bad magic") {
        std::string b = bytes;
        b[0] = 'X';
        spit(bad, b);
        CHECK_THROWS_WITH_AS(load_checkpoint(bad, "toy", ps), doctest::Contains("magic"),
                             std::runtime_error);
    }
    SUBCASE("unsupported version") {
        std::string b = bytes;
        b[4] = 9;
        spit(bad, b);
        CHECK_THROWS_WITH_AS(load_checkpoint(bad, "toy", ps), doctest::Contains("version 9"),
                             std::runtime_error);
    }
    SUBCASE("preset mismatch") {
        CHECK_THROWS_WITH_AS(load_checkpoint(good, "paper", ps), doctest::Contains("toy"),
                             std::runtime_error);
    }
    SUBCASE("architecture mismatch through tensor names") {
        std::mt19937_64 rng(5);
        FusionConfig cfg;  // F1: no gate tensors, so the manifest cannot line up
        cfg.acoustic_width = 6;
        cfg.text_width = 4;
        cfg.hidden = 5;
        FusionNet<float> f1(cfg, rng);
        ParamList<float> pf;
        f1.collect("fusion", pf);
        CHECK_THROWS_AS(load_checkpoint(good, "toy", pf), std::runtime_error);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_WITH_AS(load_checkpoint(tmp_path("sfec_ckpt_nope.bin"), "toy", ps),
                             doctest::Contains("cannot open"), std::runtime_error);
    }
}
