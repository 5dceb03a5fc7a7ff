#include <sfec/artifacts.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sfec {

void atomic_write_file(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("artifact: cannot write " + tmp);
        f.write(content.data(), std::streamsize(content.size()));
        if (!f) throw std::runtime_error("artifact: short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("artifact: cannot rename " + tmp + " to " + path + ": " +
                                     ec.message());
}

std::string metrics_to_json(const EvalReport& report) {
    nlohmann::json j;
    j["confusion"] = report.confusion;
    j["wa"] = report.wa;
    j["ua"] = report.ua;
    j["per_class_recall"] = report.per_class_recall;
    j["n"] = report.n;
    return j.dump(2) + "\n";
}

std::string confusion_to_csv(const EvalReport& report, const std::vector<std::string>& labels) {
    if (labels.size() != report.confusion.size())
        throw std::invalid_argument("confusion csv: " + std::to_string(labels.size()) +
                                    " labels for " + std::to_string(report.confusion.size()) +
                                    " classes");
    std::ostringstream out;
    out << "true\\predicted";
    for (const auto& l : labels) out << "," << l;
    out << "\n";
    for (std::size_t r = 0; r < labels.size(); ++r) {
        out << labels[r];
        for (long v : report.confusion[r]) out << "," << v;
        out << "\n";
    }
    return out.str();
}

std::string confusion_svg_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("confusion svg: empty csv");

    auto split = [](const std::string& s) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(s);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        return cells;
    };
    const auto header = split(line);
    if (header.size() < 2) throw std::invalid_argument("confusion svg: malformed header");
    const std::size_t classes = header.size() - 1;
    std::vector<std::string> labels(header.begin() + 1, header.end());
    std::vector<std::vector<long>> counts;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != classes + 1)
            throw std::invalid_argument("confusion svg: row with " +
                                        std::to_string(cells.size() - 1) + " cells, expected " +
                                        std::to_string(classes));
        std::vector<long> row;
        for (std::size_t c = 1; c < cells.size(); ++c) row.push_back(std::stol(cells[c]));
        counts.push_back(std::move(row));
    }
    if (counts.size() != classes)
        throw std::invalid_argument("confusion svg: " + std::to_string(counts.size()) +
                                    " rows for " + std::to_string(classes) + " columns");

    const int cell = 84, left = 120, top = 60;
    const int width = left + cell * int(classes) + 24;
    const int height = top + cell * int(classes) + 24;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"monospace\" font-size=\"13\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    char buf[160];
    for (std::size_t c = 0; c < classes; ++c) {
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%d\" y=\"%d\" text-anchor=\"middle\">%s</text>\n",
                      left + cell * int(c) + cell / 2, top - 14, labels[c].c_str());
        out << buf;
        std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\" text-anchor=\"end\">%s</text>\n",
                      left - 10, top + cell * int(c) + cell / 2 + 4, labels[c].c_str());
        out << buf;
    }
    for (std::size_t r = 0; r < classes; ++r) {
        long total = 0;
        for (long v : counts[r]) total += v;
        for (std::size_t c = 0; c < classes; ++c) {
            const double share = total ? double(counts[r][c]) / double(total) : 0.0;
            // white through steel blue, share deciding the blend
            const int red = int(255 - share * (255 - 70) + 0.5);
            const int green = int(255 - share * (255 - 130) + 0.5);
            const int blue = int(255 - share * (255 - 180) + 0.5);
            std::snprintf(buf, sizeof buf,
                          "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"rgb(%d,%d,%d)\" "
                          "stroke=\"gray\"/>\n",
                          left + cell * int(c), top + cell * int(r), cell, cell, red, green, blue);
            out << buf;
            std::snprintf(buf, sizeof buf,
                          "<text x=\"%d\" y=\"%d\" text-anchor=\"middle\" fill=\"%s\">%ld</text>\n",
                          left + cell * int(c) + cell / 2, top + cell * int(r) + cell / 2 + 4,
                          share > 0.6 ? "white" : "black", counts[r][c]);
            out << buf;
        }
    }
    out << "</svg>\n";
    return out.str();
}

std::string filters_to_csv(const SincLayer<float>& sinc) {
    const std::size_t points = 257;
    std::ostringstream out;
    out << "index,f1_hz,f2_hz";
    for (std::size_t p = 0; p < points; ++p) out << ",mag_" << p;
    out << "\n";
    const auto bands = sinc.effective_cutoffs();
    char num[32];
    for (std::size_t f = 0; f < bands.size(); ++f) {
        out << f;
        std::snprintf(num, sizeof num, ",%.6f,%.6f", double(bands[f].first),
                      double(bands[f].second));
        out << num;
        for (float m : sinc.magnitude_response(f, points)) {
            std::snprintf(num, sizeof num, ",%.6g", double(m));
            out << num;
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace sfec
