#include <sfec/checkpoint.hpp>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace sfec {

namespace {

void push_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(char(v >> 8 * i & 0xff));
}

void push_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(char(v >> 8 * i & 0xff));
}

std::uint64_t read_le(const std::string& buf, std::size_t at, std::size_t bytes) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bytes; ++i)
        v |= std::uint64_t(static_cast<unsigned char>(buf[at + i])) << 8 * i;
    return v;
}

std::string load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct Parsed {
    CheckpointInfo info;
    std::size_t payload_at = 0;
    std::uint64_t payload_expected = 0;  // bytes the manifest accounts for
    std::string bytes;
};

Parsed parse(const std::string& path) {
    Parsed p;
    p.bytes = load_file(path);
    const auto& buf = p.bytes;
    if (buf.size() < 16 || std::memcmp(buf.data(), "SFEC", 4) != 0)
        throw std::runtime_error("checkpoint: " + path + " has bad magic (expected SFEC)");
    p.info.version = std::uint32_t(read_le(buf, 4, 4));
    if (p.info.version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: " + path + " has format version " +
                                 std::to_string(p.info.version) + ", this build reads version " +
                                 std::to_string(kCheckpointVersion));
    const std::uint64_t header_len = read_le(buf, 8, 8);
    if (16 + header_len > buf.size())
        throw std::runtime_error("checkpoint: " + path + " header claims " +
                                 std::to_string(header_len) + " bytes but only " +
                                 std::to_string(buf.size() - 16) + " remain");
    const auto j = nlohmann::json::parse(buf.substr(16, header_len), nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("preset") || !j.contains("tensors"))
        throw std::runtime_error("checkpoint: " + path + " has a malformed JSON header");
    p.info.preset = j["preset"].get<std::string>();
    if (j.contains("hyperparameters"))
        for (const auto& [k, v] : j["hyperparameters"].items())
            p.info.meta[k] = v.get<std::string>();

    std::uint64_t expect_offset = 0;
    for (const auto& t : j["tensors"]) {
        TensorEntry e;
        e.name = t.at("name").get<std::string>();
        e.shape = t.at("shape").get<Shape>();
        e.offset = t.at("offset").get<std::uint64_t>();
        if (e.offset != expect_offset)
            throw std::runtime_error("checkpoint: tensor " + e.name + " at offset " +
                                     std::to_string(e.offset) + ", expected " +
                                     std::to_string(expect_offset) +
                                     " (offsets must be contiguous and increasing)");
        expect_offset += 4 * shape_numel(e.shape);
        p.info.tensors.push_back(std::move(e));
    }
    p.payload_at = 16 + header_len;
    p.payload_expected = expect_offset;
    const std::uint64_t actual = buf.size() - p.payload_at;
    if (actual != p.payload_expected)
        throw std::runtime_error("checkpoint: " + path + " payload holds " +
                                 std::to_string(actual) + " bytes, manifest expects " +
                                 std::to_string(p.payload_expected));
    return p;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& preset,
                     const std::map<std::string, std::string>& meta,
                     const ParamList<float>& params) {
    nlohmann::json header;
    header["preset"] = preset;
    header["hyperparameters"] = nlohmann::json::object();
    for (const auto& [k, v] : meta) header["hyperparameters"][k] = v;
    header["tensors"] = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& p : params) {
        nlohmann::json t;
        t["name"] = p.name;
        t["shape"] = p.tensor->shape();
        t["offset"] = offset;
        header["tensors"].push_back(std::move(t));
        offset += 4 * p.tensor->size();
    }
    const std::string hs = header.dump();

    std::string out;
    out.reserve(16 + hs.size() + offset);
    out.append("SFEC");
    push_u32(out, kCheckpointVersion);
    push_u64(out, hs.size());
    out.append(hs);
    static_assert(sizeof(float) == 4);
    for (const auto& p : params) {
        const auto& vals = p.tensor->values();
        const std::size_t at = out.size();
        out.resize(at + 4 * vals.size());
        std::memcpy(out.data() + at, vals.data(), 4 * vals.size());
    }

    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("checkpoint: cannot write " + tmp);
        f.write(out.data(), std::streamsize(out.size()));
        if (!f) throw std::runtime_error("checkpoint: short write to " + tmp);
    }
    std::rename(tmp.c_str(), path.c_str());
}

CheckpointInfo read_checkpoint_info(const std::string& path) { return parse(path).info; }

std::map<std::string, std::string> load_checkpoint(const std::string& path,
                                                   const std::string& expected_preset,
                                                   const ParamList<float>& params) {
    Parsed p = parse(path);
    if (p.info.preset != expected_preset)
        throw std::runtime_error("checkpoint: " + path + " was saved with preset \"" +
                                 p.info.preset + "\", requested architecture is \"" +
                                 expected_preset + "\"");
    if (p.info.tensors.size() != params.size())
        throw std::runtime_error("checkpoint: " + path + " holds " +
                                 std::to_string(p.info.tensors.size()) + " tensors, model has " +
                                 std::to_string(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto& e = p.info.tensors[i];
        if (e.name != params[i].name)
            throw std::runtime_error("checkpoint: tensor " + std::to_string(i) + " is " + e.name +
                                     ", model expects " + params[i].name);
        if (e.shape != params[i].tensor->shape())
            throw std::runtime_error("checkpoint: " + e.name + " has shape " + shape_str(e.shape) +
                                     ", model expects " + shape_str(params[i].tensor->shape()));
        auto& vals = params[i].tensor->mutable_values();
        std::memcpy(vals.data(), p.bytes.data() + p.payload_at + e.offset, 4 * vals.size());
    }
    return p.info.meta;
}

}  // namespace sfec
