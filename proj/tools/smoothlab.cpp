#include "smoothlab/errors.hpp"
#include "smoothlab/lab.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <optional>

using smoothlab::Error;
using smoothlab::ErrorKind;
namespace lab = smoothlab::lab;

namespace {

// Flags mirror the config keys; only flags actually given end up in the overrides.
struct Flags {
    std::string config;
    std::optional<std::int64_t> seed, n, d, n_min, d_min, depth, record_every, trials, eligible_target;
    std::optional<bool> residual, renormalize;
    bool no_residual = false;
    std::optional<std::string> ln_mode, mode, h_source, psi_source, x0_kind, campaign, out, a_path, h_path, x0_path;

    void attach(CLI::App* app) {
        app->add_option("--config", config, "JSON config file");
        app->add_option("--seed", seed);
        app->add_option("--n", n, "token count (upper end of the range in campaigns)");
        app->add_option("--d", d, "feature dimension (upper end of the range in campaigns)");
        app->add_option("--n-min", n_min);
        app->add_option("--d-min", d_min);
        app->add_option("--depth", depth);
        app->add_option("--record-every", record_every);
        app->add_option("--trials", trials);
        app->add_option("--eligible-target", eligible_target);
        app->add_option("--residual", residual, "true or false");
        app->add_flag("--no-residual", no_residual, "same as --residual false");
        app->add_option("--renormalize", renormalize, "true or false");
        app->add_option("--ln-mode", ln_mode, "none, pre_ln or post_ln");
        app->add_option("--mode", mode, "smooth or sharpen");
        app->add_option("--h-source", h_source, "raw or reparam");
        app->add_option("--psi-source", psi_source, "init or uniform");
        app->add_option("--x0-kind", x0_kind, "random or smooth");
        app->add_option("--campaign", campaign, "convergence, reparam or no_residual");
        app->add_option("--out", out, "output file or directory");
        app->add_option("--a-path", a_path, "attention matrix JSON");
        app->add_option("--h-path", h_path, "H matrix JSON");
        app->add_option("--x0-path", x0_path, "initial tokens JSON");
    }

    lab::json overrides() const {
        lab::json j = lab::json::object();
        auto put = [&j](const char* key, const auto& v) {
            if (v)
                j[key] = *v;
        };
        put("seed", seed);
        put("n", n);
        put("d", d);
        put("n_min", n_min);
        put("d_min", d_min);
        put("depth", depth);
        put("record_every", record_every);
        put("trials", trials);
        put("eligible_target", eligible_target);
        put("residual", residual);
        if (no_residual)
            j["residual"] = false;
        put("renormalize", renormalize);
        put("ln_mode", ln_mode);
        put("mode", mode);
        put("h_source", h_source);
        put("psi_source", psi_source);
        put("x0_kind", x0_kind);
        put("campaign", campaign);
        put("output_path", out);
        put("a_path", a_path);
        put("h_path", h_path);
        put("x0_path", x0_path);
        return j;
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"smoothlab: spectral analysis of residual attention smoothing"};
    app.require_subcommand(1);
    const std::map<std::string, lab::CommandKind> commands = {
        {"spectrum", lab::CommandKind::spectrum},
        {"simulate", lab::CommandKind::simulate},
        {"classify", lab::CommandKind::classify},
        {"verify", lab::CommandKind::verify},
        {"ln-impact", lab::CommandKind::ln_impact},
        {"reparam-demo", lab::CommandKind::reparam_demo}};
    const std::map<std::string, std::string> help = {
        {"spectrum", "check the combined spectrum against brute force over sampled (A, H)"},
        {"simulate", "iterate one layer and write the metric trajectory CSV"},
        {"classify", "dominance, verdict and limit for A and H given as files"},
        {"verify", "iterate to depth and compare against the predicted limit"},
        {"ln-impact", "pre/post LayerNorm runs with positive and negative gains"},
        {"reparam-demo", "smooth vs sharpen reparameterized H side by side"}};

    Flags flags;
    std::map<CLI::App*, lab::CommandKind> subs;
    for (const auto& [name, kind] : commands) {
        auto* sub = app.add_subcommand(name, help.at(name));
        flags.attach(sub);
        subs[sub] = kind;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    lab::CommandKind kind{};
    for (const auto& [sub, k] : subs)
        if (sub->parsed())
            kind = k;

    lab::ExperimentConfig cfg;
    try {
        const lab::json file = flags.config.empty() ? lab::json() : lab::read_json(flags.config);
        cfg = lab::make_config(kind, file, flags.overrides());
    } catch (const Error& e) {
        std::cerr << "smoothlab: " << e.what() << "\n";
        return 2;
    }

    try {
        return lab::execute(cfg);
    } catch (const Error& e) {
        std::cerr << "smoothlab: " << e.what() << "\n";
        switch (e.kind()) {
        case ErrorKind::InvalidConfig:
        case ErrorKind::InvalidArgument:
        case ErrorKind::Io: return 2;
        default: return 3;
        }
    } catch (const std::exception& e) {
        std::cerr << "smoothlab: " << e.what() << "\n";
        return 3;
    }
}
