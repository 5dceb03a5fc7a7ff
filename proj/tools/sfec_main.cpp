// Command-line front end: toy corpus generation, the three training stages,
// evaluation reports, per-utterance prediction, and filterbank inspection.
#include <cstdio>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <sfec/artifacts.hpp>
#include <sfec/checkpoint.hpp>
#include <sfec/config.hpp>
#include <sfec/dataset.hpp>
#include <sfec/metrics.hpp>
#include <sfec/toy.hpp>
#include <sfec/trainer.hpp>
#include <sfec/version.hpp>

namespace fs = std::filesystem;
using sfec::RunConfig;

namespace {

struct RunArgs {
    std::string config, preset, fusion, manifest, embeddings, out_dir;
    std::uint64_t seed = 0;
    double lr = 0;
    std::size_t batch = 0, epochs = 0, fold = 0;
    bool single_thread = false, fine_tune = false;
    CLI::Option *o_config = nullptr, *o_preset = nullptr, *o_seed = nullptr, *o_lr = nullptr,
                *o_batch = nullptr, *o_epochs = nullptr, *o_fusion = nullptr,
                *o_manifest = nullptr, *o_embeddings = nullptr, *o_out = nullptr,
                *o_fold = nullptr, *o_fine = nullptr;
};

void add_run_options(CLI::App* cmd, RunArgs& a, bool training) {
    a.o_config = cmd->add_option("--config", a.config, "JSON run configuration file");
    a.o_preset = cmd->add_option("--preset", a.preset, "model size preset: paper or toy");
    a.o_seed = cmd->add_option("--seed", a.seed, "master RNG seed");
    a.o_manifest = cmd->add_option("--manifest", a.manifest, "JSONL utterance manifest");
    a.o_embeddings = cmd->add_option("--embeddings", a.embeddings, "word embedding text file");
    a.o_out = cmd->add_option("--out", a.out_dir, "directory for checkpoints and reports");
    a.o_fold = cmd->add_option("--fold", a.fold, "cross-validation fold index, 0 to 9");
    cmd->add_flag("--single-thread", a.single_thread,
                  "accepted for compatibility; execution is single-threaded regardless");
    if (training) {
        a.o_lr = cmd->add_option("--lr", a.lr, "Adam learning rate");
        a.o_batch = cmd->add_option("--batch", a.batch, "batch size");
        a.o_epochs =
            cmd->add_option("--epochs", a.epochs, "epoch cap for this stage, 0 = preset default");
    }
    a.o_fusion = cmd->add_option("--fusion", a.fusion, "fusion strategy: F1, F2 or F3");
    a.o_fine = cmd->add_flag("--fine-tune", a.fine_tune,
                             "unfreeze both encoders during fusion training");
}

enum class Stage { audio, text, fusion, none };

RunConfig resolve_config(const RunArgs& a, Stage stage) {
    RunConfig c;
    if (a.o_config->count()) c = sfec::load_run_config(a.config);
    if (a.o_preset->count()) {
        sfec::preset_epoch_cap(a.preset);  // rejects unknown presets
        c.preset = a.preset;
    }
    if (a.o_seed->count()) c.seed = a.seed;
    if (a.o_lr && a.o_lr->count()) c.lr = a.lr;
    if (a.o_batch && a.o_batch->count()) {
        if (a.batch == 0) throw std::invalid_argument("batch must be positive");
        c.batch = a.batch;
    }
    if (a.o_epochs && a.o_epochs->count()) {
        if (stage == Stage::audio) c.epochs_audio = a.epochs;
        if (stage == Stage::text) c.epochs_text = a.epochs;
        if (stage == Stage::fusion) c.epochs_fusion = a.epochs;
    }
    if (a.o_fusion->count()) {
        sfec::fusion_mode_from_string(a.fusion);
        c.fusion = a.fusion;
    }
    if (a.o_manifest->count()) c.manifest = a.manifest;
    if (a.o_embeddings->count()) c.embeddings = a.embeddings;
    if (a.o_out->count()) c.out_dir = a.out_dir;
    if (a.o_fold->count()) {
        if (a.fold >= 10) throw std::invalid_argument("fold must be in [0, 9]");
        c.fold = a.fold;
    }
    if (a.o_fine->count()) c.fine_tune = a.fine_tune;
    if (a.single_thread) c.single_thread = true;
    return c;
}

sfec::TrainOptions train_options(const RunConfig& cfg, std::size_t stage_epochs) {
    sfec::TrainOptions opt;
    opt.lr = cfg.lr;
    opt.batch = cfg.batch;
    opt.max_epochs = stage_epochs ? stage_epochs : sfec::preset_epoch_cap(cfg.preset);
    opt.patience = sfec::preset_patience(cfg.preset);
    opt.seed = cfg.seed;
    return opt;
}

struct StageData {
    std::vector<sfec::UtteranceRecord> records;
    sfec::FoldSplit split;
    sfec::EmbeddingTable table;
    std::size_t max_tokens = 0;
};

StageData load_stage_data(const RunConfig& cfg, bool need_embeddings) {
    if (cfg.manifest.empty())
        throw std::runtime_error("no manifest given (use --manifest or the config file)");
    StageData d;
    d.records = sfec::read_manifest(cfg.manifest);
    std::vector<std::string> ids;
    ids.reserve(d.records.size());
    for (const auto& r : d.records) ids.push_back(r.id);
    d.split = sfec::split_folds(ids, cfg.seed).at(cfg.fold);
    d.max_tokens = sfec::text_preset(cfg.preset).max_tokens;
    if (need_embeddings) {
        if (cfg.embeddings.empty())
            throw std::runtime_error("no embeddings given (use --embeddings or the config file)");
        d.table = sfec::load_embeddings(cfg.embeddings, sfec::preset_embed_dim(cfg.preset));
        if (d.table.duplicate_warnings)
            std::fprintf(stderr, "warning: %zu duplicate embedding rows ignored\n",
                         d.table.duplicate_warnings);
    }
    return d;
}

std::vector<sfec::LoadedSample<float>> load_split(const StageData& d,
                                                  const std::vector<std::string>& ids) {
    return sfec::load_samples<float>(sfec::filter_records(d.records, ids), d.table, d.max_tokens);
}

sfec::AcousticNet<float> make_acoustic(const RunConfig& cfg) {
    std::mt19937_64 rng(cfg.seed);
    return sfec::AcousticNet<float>(sfec::acoustic_preset(cfg.preset), rng);
}

sfec::TextNet<float> make_text(const RunConfig& cfg, const sfec::EmbeddingTable& table) {
    std::mt19937_64 rng(cfg.seed + 1);
    return sfec::TextNet<float>(sfec::text_preset(cfg.preset), table.table, rng);
}

sfec::FusionNet<float> make_fusion(const RunConfig& cfg, sfec::FusionMode mode) {
    std::mt19937_64 rng(cfg.seed + 2);
    return sfec::FusionNet<float>(sfec::fusion_preset(cfg.preset, mode), rng);
}

sfec::ParamList<float> acoustic_state(sfec::AcousticNet<float>& net) {
    sfec::ParamList<float> ps;
    net.collect("acoustic", ps);
    net.collect_buffers("acoustic", ps);  // batchnorm running stats persist too
    return ps;
}

sfec::ParamList<float> text_state(sfec::TextNet<float>& net) {
    sfec::ParamList<float> ps;
    net.collect("text", ps);  // the frozen embedding table stays external
    return ps;
}

sfec::ParamList<float> fusion_state(sfec::FusionNet<float>& net) {
    sfec::ParamList<float> ps;
    net.collect("fusion", ps);
    return ps;
}

std::string ckpt_path(const RunConfig& cfg, const char* name) {
    return (fs::path(cfg.out_dir) / name).string();
}

void require_checkpoint(const std::string& path, const char* produced_by) {
    if (!fs::exists(path))
        throw std::runtime_error("missing prerequisite checkpoint " + path + "; run " +
                                 produced_by + " first");
}

char fmt_buf[64];

std::string fmt(const char* spec, double v) {
    std::snprintf(fmt_buf, sizeof fmt_buf, spec, v);
    return fmt_buf;
}

std::map<std::string, std::string> run_meta(const RunConfig& cfg,
                                            const sfec::TrainLog<float>& log) {
    return {{"seed", std::to_string(cfg.seed)},
            {"lr", fmt("%g", cfg.lr)},
            {"batch", std::to_string(cfg.batch)},
            {"fold", std::to_string(cfg.fold)},
            {"epochs_run", std::to_string(log.epochs_run())},
            {"best_epoch", std::to_string(log.best_epoch)},
            {"best_val_wa", fmt("%.6f", log.best_val_wa)}};
}

void report_training(const sfec::TrainLog<float>& log, const sfec::TrainOptions& opt) {
    for (std::size_t e = 0; e < log.epochs_run(); ++e)
        std::printf("epoch %3zu/%zu  loss %.6f  val_wa %.4f\n", e + 1, opt.max_epochs,
                    static_cast<double>(log.epoch_loss[e]), log.val_wa[e]);
    std::printf("best epoch %zu  val_wa %.4f\n", log.best_epoch + 1, log.best_val_wa);
}

void write_train_log(const RunConfig& cfg, const char* name, const sfec::TrainLog<float>& log) {
    nlohmann::json j;
    j["epoch_loss"] = log.epoch_loss;
    j["val_wa"] = log.val_wa;
    j["best_epoch"] = log.best_epoch;
    j["best_val_wa"] = log.best_val_wa;
    sfec::atomic_write_file((fs::path(cfg.out_dir) / name).string(), j.dump(2) + "\n");
}

int cmd_gen_toy(const std::string& out, std::uint64_t seed, std::size_t per_class, double noise,
                std::size_t embed_dim) {
    sfec::ToyCorpusSpec spec;
    spec.seed = seed;
    spec.per_class = per_class;
    spec.noise_amplitude = noise;
    const auto records = sfec::generate_toy_corpus(spec, out);
    const std::string emb = (fs::path(out) / "embeddings.txt").string();
    sfec::write_toy_embeddings(emb, embed_dim, spec.keywords);
    std::printf("wrote %zu utterances (%zu per class) under %s\n", records.size(), per_class,
                out.c_str());
    std::printf("wrote %zu-dimensional embeddings to %s\n", embed_dim, emb.c_str());
    return 0;
}

int cmd_train_audio(const RunArgs& args) {
    const RunConfig cfg = resolve_config(args, Stage::audio);
    const StageData d = load_stage_data(cfg, true);
    const auto train = load_split(d, d.split.train);
    const auto val = load_split(d, d.split.validation);
    std::printf("train-audio: preset %s, fold %zu, %zu train / %zu val utterances\n",
                cfg.preset.c_str(), cfg.fold, train.size(), val.size());

    auto net = make_acoustic(cfg);
    const auto opt = train_options(cfg, cfg.epochs_audio);
    const auto log = sfec::train_acoustic(net, train, val, opt);
    report_training(log, opt);

    fs::create_directories(cfg.out_dir);
    const std::string path = ckpt_path(cfg, "acoustic.ckpt");
    sfec::save_checkpoint(path, cfg.preset, run_meta(cfg, log), acoustic_state(net));
    write_train_log(cfg, "acoustic_train.json", log);
    std::printf("saved %s\n", path.c_str());
    return 0;
}

int cmd_train_text(const RunArgs& args) {
    const RunConfig cfg = resolve_config(args, Stage::text);
    const StageData d = load_stage_data(cfg, true);
    const auto train = load_split(d, d.split.train);
    const auto val = load_split(d, d.split.validation);
    std::printf("train-text: preset %s, fold %zu, %zu train / %zu val utterances\n",
                cfg.preset.c_str(), cfg.fold, train.size(), val.size());

    auto net = make_text(cfg, d.table);
    const auto opt = train_options(cfg, cfg.epochs_text);
    const auto log = sfec::train_text(net, train, val, opt);
    report_training(log, opt);

    fs::create_directories(cfg.out_dir);
    const std::string path = ckpt_path(cfg, "text.ckpt");
    sfec::save_checkpoint(path, cfg.preset, run_meta(cfg, log), text_state(net));
    write_train_log(cfg, "text_train.json", log);
    std::printf("saved %s\n", path.c_str());
    return 0;
}

int cmd_train_fusion(const RunArgs& args) {
    const RunConfig cfg = resolve_config(args, Stage::fusion);
    const std::string apath = ckpt_path(cfg, "acoustic.ckpt");
    const std::string tpath = ckpt_path(cfg, "text.ckpt");
    require_checkpoint(apath, "train-audio");
    require_checkpoint(tpath, "train-text");

    const StageData d = load_stage_data(cfg, true);
    const auto train = load_split(d, d.split.train);
    const auto val = load_split(d, d.split.validation);
    const sfec::FusionMode mode = sfec::fusion_mode_from_string(cfg.fusion);
    std::printf("train-fusion: preset %s, mode %s, %s encoders, fold %zu, %zu train / %zu val\n",
                cfg.preset.c_str(), cfg.fusion.c_str(), cfg.fine_tune ? "fine-tuned" : "frozen",
                cfg.fold, train.size(), val.size());

    auto anet = make_acoustic(cfg);
    auto tnet = make_text(cfg, d.table);
    sfec::load_checkpoint(apath, cfg.preset, acoustic_state(anet));
    sfec::load_checkpoint(tpath, cfg.preset, text_state(tnet));
    auto fnet = make_fusion(cfg, mode);

    const auto opt = train_options(cfg, cfg.epochs_fusion);
    sfec::TrainLog<float> log;
    if (cfg.fine_tune) {
        log = sfec::train_fusion_joint(fnet, anet, tnet, train, val, opt);
    } else {
        const auto train_feats = sfec::precompute_features(anet, tnet, train);
        const auto val_feats = sfec::precompute_features(anet, tnet, val);
        log = sfec::train_fusion(fnet, train_feats, train, val_feats, val, opt);
    }
    report_training(log, opt);

    auto meta = run_meta(cfg, log);
    meta["fusion"] = cfg.fusion;
    meta["fine_tune"] = cfg.fine_tune ? "1" : "0";
    const std::string fpath = ckpt_path(cfg, "fusion.ckpt");
    sfec::save_checkpoint(fpath, cfg.preset, meta, fusion_state(fnet));
    if (cfg.fine_tune) {
        // the encoders moved, so the saved triple must stay mutually consistent
        sfec::save_checkpoint(apath, cfg.preset, meta, acoustic_state(anet));
        sfec::save_checkpoint(tpath, cfg.preset, meta, text_state(tnet));
        std::printf("updated %s and %s\n", apath.c_str(), tpath.c_str());
    }
    write_train_log(cfg, "fusion_train.json", log);
    std::printf("saved %s\n", fpath.c_str());
    return 0;
}

sfec::FusionMode recorded_fusion_mode(const RunConfig& cfg, const RunArgs& args,
                                      const std::string& fpath) {
    const auto info = sfec::read_checkpoint_info(fpath);
    const auto it = info.meta.find("fusion");
    if (it == info.meta.end())
        throw std::runtime_error(fpath + " does not record a fusion mode");
    if (args.o_fusion->count() && cfg.fusion != it->second)
        throw std::runtime_error("requested fusion mode " + cfg.fusion + " but " + fpath +
                                 " was trained as " + it->second);
    return sfec::fusion_mode_from_string(it->second);
}

int cmd_evaluate(const RunArgs& args, const std::string& model, const std::string& split_name) {
    const RunConfig cfg = resolve_config(args, Stage::none);
    const StageData d = load_stage_data(cfg, model != "audio" || !cfg.embeddings.empty());
    const auto& ids = split_name == "train"        ? d.split.train
                      : split_name == "validation" ? d.split.validation
                                                   : d.split.test;
    const auto samples = load_split(d, ids);

    sfec::EvalReport report;
    if (model == "audio") {
        auto net = make_acoustic(cfg);
        sfec::load_checkpoint(ckpt_path(cfg, "acoustic.ckpt"), cfg.preset, acoustic_state(net));
        report = sfec::evaluate_acoustic(net, samples);
    } else if (model == "text") {
        auto net = make_text(cfg, d.table);
        sfec::load_checkpoint(ckpt_path(cfg, "text.ckpt"), cfg.preset, text_state(net));
        report = sfec::evaluate_text(net, samples);
    } else {
        const std::string fpath = ckpt_path(cfg, "fusion.ckpt");
        require_checkpoint(ckpt_path(cfg, "acoustic.ckpt"), "train-audio");
        require_checkpoint(ckpt_path(cfg, "text.ckpt"), "train-text");
        require_checkpoint(fpath, "train-fusion");
        auto anet = make_acoustic(cfg);
        auto tnet = make_text(cfg, d.table);
        auto fnet = make_fusion(cfg, recorded_fusion_mode(cfg, args, fpath));
        sfec::load_checkpoint(ckpt_path(cfg, "acoustic.ckpt"), cfg.preset, acoustic_state(anet));
        sfec::load_checkpoint(ckpt_path(cfg, "text.ckpt"), cfg.preset, text_state(tnet));
        sfec::load_checkpoint(fpath, cfg.preset, fusion_state(fnet));
        report = sfec::evaluate_fusion(fnet, anet, tnet, samples);
    }

    fs::create_directories(cfg.out_dir);
    const auto& labels = sfec::canonical_labels();
    const std::string csv = sfec::confusion_to_csv(report, labels);
    sfec::atomic_write_file((fs::path(cfg.out_dir) / "metrics.json").string(),
                            sfec::metrics_to_json(report));
    sfec::atomic_write_file((fs::path(cfg.out_dir) / "confusion.csv").string(), csv);
    sfec::atomic_write_file((fs::path(cfg.out_dir) / "confusion.svg").string(),
                            sfec::confusion_svg_from_csv(csv));
    std::printf("%s %s split: wa %.4f  ua %.4f  n %zu\n", model.c_str(), split_name.c_str(),
                report.wa, report.ua, report.n);
    std::printf("reports written under %s\n", cfg.out_dir.c_str());
    return 0;
}

int cmd_predict(const RunArgs& args, const std::string& model) {
    const RunConfig cfg = resolve_config(args, Stage::none);
    if (cfg.manifest.empty())
        throw std::runtime_error("no manifest given (use --manifest or the config file)");
    const auto records = sfec::read_manifest(cfg.manifest);
    sfec::EmbeddingTable table;
    if (model != "audio" || !cfg.embeddings.empty()) {
        if (cfg.embeddings.empty())
            throw std::runtime_error("no embeddings given (use --embeddings or the config file)");
        table = sfec::load_embeddings(cfg.embeddings, sfec::preset_embed_dim(cfg.preset));
    }
    const std::size_t max_tokens = sfec::text_preset(cfg.preset).max_tokens;
    const auto samples = sfec::load_samples<float>(records, table, max_tokens);
    const auto& labels = sfec::canonical_labels();

    auto emit = [&](const sfec::LoadedSample<float>& s, const std::vector<float>& scores) {
        double sum = 0;
        for (float v : scores) sum += v;
        nlohmann::json j;
        j["id"] = s.id;
        j["label"] = labels[sfec::argmax(scores)];
        for (std::size_t c = 0; c < labels.size(); ++c)
            j["scores"][labels[c]] = scores[c] / sum;
        std::printf("%s\n", j.dump().c_str());
    };

    if (model == "audio") {
        auto net = make_acoustic(cfg);
        sfec::load_checkpoint(ckpt_path(cfg, "acoustic.ckpt"), cfg.preset, acoustic_state(net));
        const sfec::ChunkPlan plan{net.cfg.window, net.cfg.hop};
        for (const auto& s : samples)
            emit(s, sfec::utterance_predict(s.wave, net, plan).values());
    } else if (model == "text") {
        auto net = make_text(cfg, table);
        sfec::load_checkpoint(ckpt_path(cfg, "text.ckpt"), cfg.preset, text_state(net));
        sfec::NoGradGuard ng;
        std::mt19937_64 rng(0);
        for (const auto& s : samples)
            emit(s, sfec::softmax(sfec::text_forward(s.tokens, net, false, rng).logits).values());
    } else {
        const std::string fpath = ckpt_path(cfg, "fusion.ckpt");
        require_checkpoint(ckpt_path(cfg, "acoustic.ckpt"), "train-audio");
        require_checkpoint(ckpt_path(cfg, "text.ckpt"), "train-text");
        require_checkpoint(fpath, "train-fusion");
        auto anet = make_acoustic(cfg);
        auto tnet = make_text(cfg, table);
        auto fnet = make_fusion(cfg, recorded_fusion_mode(cfg, args, fpath));
        sfec::load_checkpoint(ckpt_path(cfg, "acoustic.ckpt"), cfg.preset, acoustic_state(anet));
        sfec::load_checkpoint(ckpt_path(cfg, "text.ckpt"), cfg.preset, text_state(tnet));
        sfec::load_checkpoint(fpath, cfg.preset, fusion_state(fnet));
        sfec::NoGradGuard ng;
        const sfec::ChunkPlan plan{anet.cfg.window, anet.cfg.hop};
        std::mt19937_64 rng(0);
        for (const auto& s : samples) {
            const auto af = sfec::utterance_feature(s.wave, anet, plan);
            const auto tf = sfec::text_forward(s.tokens, tnet, false, rng).feature;
            emit(s, sfec::softmax(sfec::fuse_and_classify(af, tf, fnet)).values());
        }
    }
    return 0;
}

int cmd_inspect_filters(const RunArgs& args, const std::string& ckpt) {
    RunConfig cfg = resolve_config(args, Stage::none);
    if (!ckpt.empty()) {
        const auto info = sfec::read_checkpoint_info(ckpt);
        if (args.o_preset->count() && cfg.preset != info.preset)
            throw std::runtime_error("requested preset " + cfg.preset + " but " + ckpt +
                                     " was saved with preset " + info.preset);
        cfg.preset = info.preset;
    }
    auto net = make_acoustic(cfg);
    if (!ckpt.empty()) sfec::load_checkpoint(ckpt, cfg.preset, acoustic_state(net));
    fs::create_directories(cfg.out_dir);
    const std::string path = (fs::path(cfg.out_dir) / "filters.csv").string();
    sfec::atomic_write_file(path, sfec::filters_to_csv(net.sinc));
    std::printf("wrote %zu bands (%s) to %s\n", net.cfg.sinc_filters,
                ckpt.empty() ? "fresh mel initialization" : ckpt.c_str(), path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"speech and text emotion classifier"};
    app.set_version_flag("--version", sfec::version());
    app.require_subcommand(1);

    auto* gen = app.add_subcommand("gen-toy", "generate a synthetic tone-plus-keyword corpus");
    std::string gen_out;
    std::uint64_t gen_seed = 1;
    std::size_t gen_per_class = 50;
    double gen_noise = 0.1;
    std::size_t gen_embed_dim = sfec::preset_embed_dim("toy");
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--seed", gen_seed, "corpus RNG seed");
    gen->add_option("--per-class", gen_per_class, "utterances per emotion class");
    gen->add_option("--noise", gen_noise, "additive noise amplitude");
    gen->add_option("--embed-dim", gen_embed_dim, "dimension of the written embeddings");
    gen->callback([&] { cmd_gen_toy(gen_out, gen_seed, gen_per_class, gen_noise, gen_embed_dim); });

    auto* ta = app.add_subcommand("train-audio", "stage 1: train the acoustic classifier");
    RunArgs ta_args;
    add_run_options(ta, ta_args, true);
    ta->callback([&] { cmd_train_audio(ta_args); });

    auto* tt = app.add_subcommand("train-text", "stage 2: train the text classifier");
    RunArgs tt_args;
    add_run_options(tt, tt_args, true);
    tt->callback([&] { cmd_train_text(tt_args); });

    auto* tf = app.add_subcommand("train-fusion", "stage 3: train the fusion classifier");
    RunArgs tf_args;
    add_run_options(tf, tf_args, true);
    tf->callback([&] { cmd_train_fusion(tf_args); });

    auto* ev = app.add_subcommand("evaluate", "score a trained model on one fold split");
    RunArgs ev_args;
    std::string ev_model = "fusion", ev_split = "test";
    add_run_options(ev, ev_args, false);
    ev->add_option("--model", ev_model, "audio, text or fusion")
        ->check(CLI::IsMember({"audio", "text", "fusion"}));
    ev->add_option("--split", ev_split, "train, validation or test")
        ->check(CLI::IsMember({"train", "validation", "test"}));
    ev->callback([&] { cmd_evaluate(ev_args, ev_model, ev_split); });

    auto* pr = app.add_subcommand("predict", "print one JSON line per manifest utterance");
    RunArgs pr_args;
    std::string pr_model = "fusion";
    add_run_options(pr, pr_args, false);
    pr->add_option("--model", pr_model, "audio, text or fusion")
        ->check(CLI::IsMember({"audio", "text", "fusion"}));
    pr->callback([&] { cmd_predict(pr_args, pr_model); });

    auto* insp = app.add_subcommand("inspect-filters", "dump the learned sinc band table");
    RunArgs insp_args;
    std::string insp_ckpt;
    add_run_options(insp, insp_args, false);
    insp->add_option("--ckpt", insp_ckpt, "acoustic checkpoint; omitted = fresh initialization");
    insp->callback([&] { cmd_inspect_filters(insp_args, insp_ckpt); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::fflush(stdout);
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
