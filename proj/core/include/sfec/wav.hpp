#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sfec {

struct WavData {
    std::uint32_t sample_rate = 0;
    std::vector<float> samples;  // int16 payload scaled by 1/32768
};

// Strict reader for the one format the pipeline speaks: RIFF/WAVE, PCM,
// 16-bit, mono, 16 kHz. Anything else is rejected naming the offending
// property; there is no resampling or channel mixdown.
WavData read_wav(const std::string& path);

// Serializes samples as PCM16 mono at the given rate, clamping to [-1, 1].
void write_wav(const std::string& path, const std::vector<float>& samples,
               std::uint32_t sample_rate = 16000);

}  // namespace sfec
