#include <sfec/wav.hpp>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sfec {

namespace {

std::uint32_t read_u32(const std::vector<unsigned char>& buf, std::size_t at) {
    return std::uint32_t(buf[at]) | std::uint32_t(buf[at + 1]) << 8 |
           std::uint32_t(buf[at + 2]) << 16 | std::uint32_t(buf[at + 3]) << 24;
}

std::uint16_t read_u16(const std::vector<unsigned char>& buf, std::size_t at) {
    return std::uint16_t(buf[at] | buf[at + 1] << 8);
}

bool tag_is(const std::vector<unsigned char>& buf, std::size_t at, const char* tag) {
    return std::memcmp(buf.data() + at, tag, 4) == 0;
}

void push_u32(std::string& out, std::uint32_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char(v >> 8 & 0xff));
    out.push_back(char(v >> 16 & 0xff));
    out.push_back(char(v >> 24 & 0xff));
}

void push_u16(std::string& out, std::uint16_t v) {
    out.push_back(char(v & 0xff));
    out.push_back(char(v >> 8 & 0xff));
}

}  // namespace

WavData read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("wav: cannot open " + path);
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < 12 || !tag_is(buf, 0, "RIFF") || !tag_is(buf, 8, "WAVE"))
        throw std::runtime_error("wav: " + path + " is not a RIFF/WAVE file");

    bool have_fmt = false;
    std::uint16_t format = 0, channels = 0, bits = 0;
    std::uint32_t rate = 0;
    std::size_t data_at = 0, data_len = 0;

    std::size_t at = 12;
    while (at + 8 <= buf.size()) {
        const std::uint32_t len = read_u32(buf, at + 4);
        if (at + 8 + len > buf.size())
            throw std::runtime_error("wav: " + path + " chunk overruns the file");
        if (tag_is(buf, at, "fmt ")) {
            if (len < 16) throw std::runtime_error("wav: " + path + " fmt chunk too short");
            format = read_u16(buf, at + 8);
            channels = read_u16(buf, at + 10);
            rate = read_u32(buf, at + 12);
            bits = read_u16(buf, at + 22);
            have_fmt = true;
        } else if (tag_is(buf, at, "data")) {
            data_at = at + 8;
            data_len = len;
        }
        at += 8 + len + (len & 1);  // chunks are word-aligned
    }
    if (!have_fmt) throw std::runtime_error("wav: " + path + " has no fmt chunk");
    if (data_at == 0) throw std::runtime_error("wav: " + path + " has no data chunk");
    if (format != 1)
        throw std::runtime_error("wav: " + path + " rejected: format=" +
                                 std::to_string(format) + " (only PCM is supported)");
    if (bits != 16)
        throw std::runtime_error("wav: " + path + " rejected: bits=" + std::to_string(bits) +
                                 " (only 16-bit is supported)");
    if (channels != 1)
        throw std::runtime_error("wav: " + path + " rejected: channels=" +
                                 std::to_string(channels) + " (only mono is supported)");
    if (rate != 16000)
        throw std::runtime_error("wav: " + path + " rejected: fs=" + std::to_string(rate) +
                                 " (the pipeline is fixed at fs=16000)");
    if (data_len % 2 != 0)
        throw std::runtime_error("wav: " + path + " has an odd PCM16 payload length");

    WavData out;
    out.sample_rate = rate;
    out.samples.resize(data_len / 2);
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const std::uint16_t raw = read_u16(buf, data_at + 2 * i);
        out.samples[i] = float(std::int16_t(raw)) / 32768.0f;
    }
    return out;
}

void write_wav(const std::string& path, const std::vector<float>& samples,
               std::uint32_t sample_rate) {
    const std::uint32_t data_len = std::uint32_t(samples.size() * 2);
    std::string out;
    out.reserve(44 + data_len);
    out.append("RIFF");
    push_u32(out, 36 + data_len);
    out.append("WAVE");
    out.append("fmt ");
    push_u32(out, 16);
    push_u16(out, 1);  // PCM
    push_u16(out, 1);  // mono
    push_u32(out, sample_rate);
    push_u32(out, sample_rate * 2);
    push_u16(out, 2);
    push_u16(out, 16);
    out.append("data");
    push_u32(out, data_len);
    for (float v : samples) {
        long q = std::lrintf(v * 32768.0f);
        if (q > 32767) q = 32767;
        if (q < -32768) q = -32768;
        push_u16(out, std::uint16_t(std::int16_t(q)));
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("wav: cannot write " + path);
    f.write(out.data(), std::streamsize(out.size()));
    if (!f) throw std::runtime_error("wav: short write to " + path);
}

}  // namespace sfec
