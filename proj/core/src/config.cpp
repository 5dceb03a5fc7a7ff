#include <sfec/config.hpp>

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace sfec {

namespace {

void require_preset(const std::string& preset) {
    if (preset != "paper" && preset != "toy")
        throw std::invalid_argument("config: unknown preset \"" + preset +
                                    "\" (expected paper or toy)");
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("config: " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("config: " + path + " must hold a JSON object");

    RunConfig c;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "preset") c.preset = value.get<std::string>();
            else if (key == "seed") c.seed = value.get<std::uint64_t>();
            else if (key == "lr") c.lr = value.get<double>();
            else if (key == "batch") c.batch = value.get<std::size_t>();
            else if (key == "epochs_audio") c.epochs_audio = value.get<std::size_t>();
            else if (key == "epochs_text") c.epochs_text = value.get<std::size_t>();
            else if (key == "epochs_fusion") c.epochs_fusion = value.get<std::size_t>();
            else if (key == "fusion") c.fusion = value.get<std::string>();
            else if (key == "manifest") c.manifest = value.get<std::string>();
            else if (key == "embeddings") c.embeddings = value.get<std::string>();
            else if (key == "out_dir") c.out_dir = value.get<std::string>();
            else if (key == "fold") c.fold = value.get<std::size_t>();
            else if (key == "single_thread") c.single_thread = value.get<bool>();
            else if (key == "fine_tune") c.fine_tune = value.get<bool>();
            else
                throw std::runtime_error("config: unknown key \"" + key + "\" in " + path);
        } catch (const nlohmann::json::type_error&) {
            throw std::runtime_error("config: key \"" + key + "\" in " + path +
                                     " has the wrong type");
        }
    }
    require_preset(c.preset);
    fusion_mode_from_string(c.fusion);  // reject bad modes at load time
    if (c.batch == 0) throw std::runtime_error("config: batch must be positive");
    if (c.fold >= 10) throw std::runtime_error("config: fold must be in [0,10)");
    return c;
}

AcousticConfig acoustic_preset(const std::string& preset) {
    require_preset(preset);
    AcousticConfig c;  // defaults are the full-scale network
    if (preset == "toy") {
        c.sinc_filters = 16;
        c.sinc_length = 101;
        c.conv_blocks = 1;
        c.conv_filters = 8;
        c.feature_width = 64;
        c.hop = 2000;  // 1 s toy clips need only a handful of analysis windows
    }
    return c;
}

TextConfig text_preset(const std::string& preset) {
    require_preset(preset);
    TextConfig c;
    if (preset == "toy") {
        c.embed_dim = 16;
        c.lstm_hidden = 8;
        c.conv_filters = 4;
        c.tdnn_hidden = 32;
        c.feature_width = 32;
        c.dropout = 0.0;
    }
    return c;
}

FusionConfig fusion_preset(const std::string& preset, FusionMode mode) {
    FusionConfig c;
    c.mode = mode;
    c.acoustic_width = acoustic_preset(preset).feature_width;
    c.text_width = text_preset(preset).feature_width;
    if (preset == "toy") c.hidden = 32;
    return c;
}

std::size_t preset_embed_dim(const std::string& preset) {
    return text_preset(preset).embed_dim;
}

std::size_t preset_epoch_cap(const std::string& preset) {
    require_preset(preset);
    return preset == "toy" ? 30 : 100;
}

std::size_t preset_patience(const std::string& preset) {
    require_preset(preset);
    return 10;
}

}  // namespace sfec
