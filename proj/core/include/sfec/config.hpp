#pragma once

#include <cstdint>
#include <string>

#include "sfec/acoustic.hpp"
#include "sfec/fusion.hpp"
#include "sfec/text.hpp"

namespace sfec {

/// Flat run settings shared by all commands. Epoch fields of 0 fall back to
/// the preset cap.
struct RunConfig {
    std::string preset = "toy";  // "paper" or "toy"
    std::uint64_t seed = 1;
    double lr = 0.001;
    std::size_t batch = 64;
    std::size_t epochs_audio = 0;
    std::size_t epochs_text = 0;
    std::size_t epochs_fusion = 0;
    std::string fusion = "F1";
    std::string manifest;
    std::string embeddings;
    std::string out_dir = ".";
    std::size_t fold = 0;
    bool single_thread = false;
    bool fine_tune = false;
};

/// Strict JSON load: every key must be known and of the right type.
RunConfig load_run_config(const std::string& path);

AcousticConfig acoustic_preset(const std::string& preset);
TextConfig text_preset(const std::string& preset);
FusionConfig fusion_preset(const std::string& preset, FusionMode mode);
std::size_t preset_embed_dim(const std::string& preset);
std::size_t preset_epoch_cap(const std::string& preset);
std::size_t preset_patience(const std::string& preset);

}  // namespace sfec
