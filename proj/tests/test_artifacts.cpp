#include <doctest.h>

#include <sfec/artifacts.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

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

}  // namespace

TEST_CASE("atomic writes land complete and leave no temp file") {
    const std::string path = tmp_path("sfec_artifact_atomic.txt");
    atomic_write_file(path, "first\n");
    CHECK(slurp(path) == "first\n");
    atomic_write_file(path, "second\n");
    CHECK(slurp(path) == "second\n");
    CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
}

TEST_CASE("metrics serialize with all report fields") {
    const auto r = report_from_confusion({{9, 1}, {2, 2}});
    const auto j = nlohmann::json::parse(metrics_to_json(r));
    CHECK(j["n"] == 14);
    CHECK(j["wa"].get<double>() == r.wa);
    CHECK(j["ua"].get<double>() == r.ua);
    CHECK(j["confusion"][0][1] == 1);
    CHECK(j["confusion"][1][0] == 2);
    REQUIRE(j["per_class_recall"].size() == 2);
    CHECK(j["per_class_recall"][0].get<double>() == r.per_class_recall[0]);
}

TEST_CASE("confusion csv is header-labeled on both axes") {
    const auto r = report_from_confusion({{9, 1}, {2, 2}});
    const auto csv = confusion_to_csv(r, {"anger", "happiness"});
    CHECK(csv ==
          "true\\predicted,anger,happiness\n"
          "anger,9,1\n"
          "happiness,2,2\n");
    CHECK_THROWS_AS(confusion_to_csv(r, {"one"}), std::invalid_argument);
}

TEST_CASE("confusion svg is a pure function of the csv text") {
    const auto r = report_from_confusion({{40, 2, 1, 0}, {3, 35, 0, 5}, {2, 2, 30, 1},
                                          {0, 4, 2, 38}});
    const auto csv = confusion_to_csv(r, {"anger", "happiness", "neutral", "sadness"});
    const auto svg1 = confusion_svg_from_csv(csv);
    const auto svg2 = confusion_svg_from_csv(csv);
    CHECK(svg1 == svg2);

    // a rewritten csv with the same cells yields the identical plot
    const auto reparsed = confusion_to_csv(r, {"anger", "happiness", "neutral", "sadness"});
    CHECK(confusion_svg_from_csv(reparsed) == svg1);

    CHECK(svg1.find("<svg") == 0);
    CHECK(svg1.find(">40<") != std::string::npos);   // counts are printed
    CHECK(svg1.find("anger") != std::string::npos);  // labels are printed
    CHECK(svg1.find("rgb(") != std::string::npos);

    // different counts shade differently
    const auto other = report_from_confusion({{1, 41, 1, 0}, {3, 35, 0, 5}, {2, 2, 30, 1},
                                              {0, 4, 2, 38}});
    CHECK(confusion_svg_from_csv(
              confusion_to_csv(other, {"anger", "happiness", "neutral", "sadness"})) != svg1);

    CHECK_THROWS_AS(confusion_svg_from_csv(""), std::invalid_argument);
    CHECK_THROWS_AS(confusion_svg_from_csv("true\\predicted,a,b\na,1,2\n"),
                    std::invalid_argument);
    CHECK_THROWS_AS(confusion_svg_from_csv("true\\predicted,a\na,1,2\n"), std::invalid_argument);
}

TEST_CASE("filter table lists mel-ordered bands with full responses") {
    SincLayer<float> sinc(8, 101, 16000.0f);
    const auto csv = filters_to_csv(sinc);

    std::istringstream in(csv);
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line.rfind("index,f1_hz,f2_hz,mag_0,", 0) == 0);
    CHECK(line.find("mag_256") != std::string::npos);

    double prev_f1 = -1;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        REQUIRE(cells.size() == 3 + 257);
        CHECK(std::stoul(cells[0]) == rows);
        const double f1 = std::stod(cells[1]);
        const double f2 = std::stod(cells[2]);
        CHECK(f1 > prev_f1);  // mel init keeps the bank ordered
        CHECK(f2 > f1);
        CHECK(f2 <= 8000.0);
        prev_f1 = f1;
        ++rows;
    }
    CHECK(rows == 8);
}
