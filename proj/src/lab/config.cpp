#include "smoothlab/errors.hpp"
#include "smoothlab/lab.hpp"

#include <map>
#include <limits>

namespace smoothlab::lab {

namespace {

template <class E>
E parse_enum(const json& v, const char* key, const std::map<std::string, E>& names) {
    if (!v.is_string())
        raise(ErrorKind::InvalidConfig, std::string(key) + " must be a string");
    const auto it = names.find(v.get<std::string>());
    if (it == names.end()) {
        std::string allowed;
        for (const auto& [name, _] : names)
            allowed += (allowed.empty() ? "" : ", ") + name;
        raise(ErrorKind::InvalidConfig, std::string(key) + " must be one of: " + allowed);
    }
    return it->second;
}

template <class E>
std::string enum_name(E value, const std::map<std::string, E>& names) {
    for (const auto& [name, e] : names)
        if (e == value)
            return name;
    return "?";
}

const std::map<std::string, CommandKind> kKinds = {
    {"spectrum", CommandKind::spectrum}, {"simulate", CommandKind::simulate},
    {"classify", CommandKind::classify}, {"verify", CommandKind::verify},
    {"ln-impact", CommandKind::ln_impact}, {"reparam-demo", CommandKind::reparam_demo}};
const std::map<std::string, Campaign> kCampaigns = {
    {"convergence", Campaign::convergence}, {"reparam", Campaign::reparam}, {"no_residual", Campaign::no_residual}};
const std::map<std::string, LnMode> kLnModes = {
    {"none", LnMode::none}, {"pre_ln", LnMode::pre_ln}, {"post_ln", LnMode::post_ln}};
const std::map<std::string, ReparamMode> kModes = {{"smooth", ReparamMode::smooth}, {"sharpen", ReparamMode::sharpen}};
const std::map<std::string, HSource> kHSources = {{"raw", HSource::raw}, {"reparam", HSource::reparam}};
const std::map<std::string, PsiSource> kPsiSources = {{"init", PsiSource::init}, {"uniform", PsiSource::uniform}};
const std::map<std::string, X0Kind> kX0Kinds = {{"random", X0Kind::random}, {"smooth", X0Kind::smooth}};

std::int64_t integer(const json& v, const char* key) {
    if (!v.is_number_integer())
        raise(ErrorKind::InvalidConfig, std::string(key) + " must be an integer");
    return v.get<std::int64_t>();
}

bool boolean(const json& v, const char* key) {
    if (!v.is_boolean())
        raise(ErrorKind::InvalidConfig, std::string(key) + " must be true or false");
    return v.get<bool>();
}

std::string text(const json& v, const char* key) {
    if (!v.is_string())
        raise(ErrorKind::InvalidConfig, std::string(key) + " must be a string");
    return v.get<std::string>();
}

int bounded_int(const json& v, const char* key) {
    const auto x = integer(v, key);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        raise(ErrorKind::InvalidConfig, std::string(key) + " out of range");
    return static_cast<int>(x);
}

using ToleranceField = double Tolerances::*;

const std::map<std::string, ToleranceField> kToleranceFields = {
    {"eig_residual", &Tolerances::eig_residual},
    {"svd_residual", &Tolerances::svd_residual},
    {"solve_pivot", &Tolerances::solve_pivot},
    {"solve_residual", &Tolerances::solve_residual},
    {"realness", &Tolerances::realness},
    {"row_sum", &Tolerances::row_sum},
    {"perron_value", &Tolerances::perron_value},
    {"perron_vector", &Tolerances::perron_vector},
    {"tie", &Tolerances::tie},
    {"oscillation", &Tolerances::oscillation},
    {"phase", &Tolerances::phase},
    {"imag_residue", &Tolerances::imag_residue},
    {"zero_coefficient", &Tolerances::zero_coefficient},
    {"rank_cutoff", &Tolerances::rank_cutoff},
    {"multiplicity", &Tolerances::multiplicity},
    {"diagonalizable_condition", &Tolerances::diagonalizable_condition},
};

void apply_tolerances(Tolerances& tol, const json& v) {
    if (!v.is_object())
        raise(ErrorKind::InvalidConfig, "tolerances must be an object");
    for (const auto& [key, value] : v.items()) {
        const auto it = kToleranceFields.find(key);
        if (it == kToleranceFields.end())
            raise(ErrorKind::InvalidConfig, "unknown tolerance: " + key);
        if (!value.is_number() || !(value.get<double>() > 0.0))
            raise(ErrorKind::InvalidConfig, "tolerance " + key + " must be a positive number");
        tol.*(it->second) = value.get<double>();
    }
}

void apply(ExperimentConfig& cfg, const json& src) {
    if (src.is_null())
        return;
    if (!src.is_object())
        raise(ErrorKind::InvalidConfig, "config must be a JSON object");
    for (const auto& [key, v] : src.items()) {
        const char* k = key.c_str();
        if (key == "kind") {
            if (parse_enum(v, k, kKinds) != cfg.kind)
                raise(ErrorKind::InvalidConfig, "config kind " + v.dump() + " does not match the command");
        } else if (key == "seed") {
            const auto s = integer(v, k);
            if (s < 0)
                raise(ErrorKind::InvalidConfig, "seed must be nonnegative");
            cfg.seed = static_cast<std::uint64_t>(s);
        } else if (key == "n") {
            cfg.n = integer(v, k);
        } else if (key == "d") {
            cfg.d = integer(v, k);
        } else if (key == "n_min") {
            cfg.n_min = integer(v, k);
        } else if (key == "d_min") {
            cfg.d_min = integer(v, k);
        } else if (key == "depth") {
            cfg.depth = bounded_int(v, k);
        } else if (key == "record_every") {
            cfg.record_every = bounded_int(v, k);
        } else if (key == "residual") {
            cfg.residual = boolean(v, k);
        } else if (key == "ln_mode") {
            cfg.ln_mode = parse_enum(v, k, kLnModes);
        } else if (key == "renormalize") {
            cfg.renormalize = boolean(v, k);
        } else if (key == "mode") {
            cfg.mode = parse_enum(v, k, kModes);
        } else if (key == "h_source") {
            cfg.h_source = parse_enum(v, k, kHSources);
        } else if (key == "psi_source") {
            cfg.psi_source = parse_enum(v, k, kPsiSources);
        } else if (key == "x0_kind") {
            cfg.x0_kind = parse_enum(v, k, kX0Kinds);
        } else if (key == "trials") {
            cfg.trials = bounded_int(v, k);
        } else if (key == "eligible_target") {
            cfg.eligible_target = bounded_int(v, k);
        } else if (key == "campaign") {
            cfg.campaign = parse_enum(v, k, kCampaigns);
        } else if (key == "output_path" || key == "out") {
            cfg.output_path = text(v, k);
        } else if (key == "a_path") {
            cfg.a_path = text(v, k);
        } else if (key == "h_path") {
            cfg.h_path = text(v, k);
        } else if (key == "x0_path") {
            cfg.x0_path = text(v, k);
        } else if (key == "tolerances") {
            apply_tolerances(cfg.tol, v);
        } else {
            raise(ErrorKind::InvalidConfig, "unknown config key: " + key);
        }
    }
}

ExperimentConfig defaults(CommandKind kind) {
    ExperimentConfig cfg;
    cfg.kind = kind;
    cfg.tol = tolerances_from_environment();
    switch (kind) {
    case CommandKind::spectrum:
        cfg.n = cfg.d = 8;
        cfg.trials = 200;
        cfg.output_path = "spectrum_report.json";
        break;
    case CommandKind::simulate:
        cfg.output_path = "trajectory.csv";
        break;
    case CommandKind::classify:
        break;
    case CommandKind::verify:
        cfg.n = cfg.d = 8;
        cfg.output_path = "verify_report.json";
        break;
    case CommandKind::ln_impact:
        cfg.n = cfg.d = 8;
        cfg.depth = 128;
        cfg.record_every = 1;
        cfg.renormalize = false;
        cfg.psi_source = PsiSource::uniform;
        cfg.x0_kind = X0Kind::smooth;
        cfg.output_path = "ln_impact";
        break;
    case CommandKind::reparam_demo:
        cfg.output_path = "reparam_demo";
        break;
    }
    return cfg;
}

} // namespace

const char* to_string(CommandKind k) noexcept {
    switch (k) {
    case CommandKind::spectrum: return "spectrum";
    case CommandKind::simulate: return "simulate";
    case CommandKind::classify: return "classify";
    case CommandKind::verify: return "verify";
    case CommandKind::ln_impact: return "ln-impact";
    case CommandKind::reparam_demo: return "reparam-demo";
    }
    return "?";
}

const char* to_string(Campaign c) noexcept {
    switch (c) {
    case Campaign::convergence: return "convergence";
    case Campaign::reparam: return "reparam";
    case Campaign::no_residual: return "no_residual";
    }
    return "?";
}

ExperimentConfig make_config(CommandKind kind, const json& file, const json& overrides) {
    ExperimentConfig cfg = defaults(kind);
    apply(cfg, file);
    apply(cfg, overrides);
    validate(cfg);
    return cfg;
}

void validate(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& msg) { raise(ErrorKind::InvalidConfig, msg); };
    if (cfg.n < 1 || cfg.d < 1)
        fail("n and d must be at least 1");
    if (cfg.n * cfg.d > cfg.tol.max_eigen_size && cfg.kind != CommandKind::simulate)
        fail("n·d must not exceed " + std::to_string(cfg.tol.max_eigen_size));
    if (cfg.depth < 1)
        fail("depth must be at least 1");
    if (cfg.record_every < 1)
        fail("record_every must be at least 1");
    if (cfg.trials < 1)
        fail("trials must be at least 1");
    if (cfg.eligible_target < 0)
        fail("eligible_target must be nonnegative");

    const bool campaign = cfg.kind == CommandKind::spectrum || cfg.kind == CommandKind::verify;
    if (campaign) {
        if (cfg.n_min < 1 || cfg.d_min < 1 || cfg.n_min > cfg.n || cfg.d_min > cfg.d)
            fail("need 1 ≤ n_min ≤ n and 1 ≤ d_min ≤ d");
        if (cfg.kind == CommandKind::verify && cfg.campaign != Campaign::no_residual && !cfg.residual)
            fail(std::string(to_string(cfg.campaign)) + " campaign needs the residual connection");
    }
    if (cfg.kind == CommandKind::classify && (cfg.a_path.empty() || cfg.h_path.empty()))
        fail("classify needs a_path and h_path");
    if (cfg.kind == CommandKind::simulate || cfg.kind == CommandKind::ln_impact) {
        if (cfg.ln_mode != LnMode::none && cfg.renormalize)
            fail("LayerNorm runs cannot be renormalized; set renormalize to false");
        if (cfg.ln_mode != LnMode::none && !cfg.residual)
            fail("LayerNorm variants are defined with the residual connection");
    }
    if (cfg.kind != CommandKind::classify && cfg.output_path.empty())
        fail("output_path is empty");
}

json to_json(const ExperimentConfig& cfg) {
    json tol = json::object();
    for (const auto& [name, field] : kToleranceFields)
        tol[name] = cfg.tol.*field;
    return json{{"kind", to_string(cfg.kind)},
                {"seed", cfg.seed},
                {"n", cfg.n},
                {"d", cfg.d},
                {"n_min", cfg.n_min},
                {"d_min", cfg.d_min},
                {"depth", cfg.depth},
                {"record_every", cfg.record_every},
                {"residual", cfg.residual},
                {"ln_mode", enum_name(cfg.ln_mode, kLnModes)},
                {"renormalize", cfg.renormalize},
                {"mode", enum_name(cfg.mode, kModes)},
                {"h_source", enum_name(cfg.h_source, kHSources)},
                {"psi_source", enum_name(cfg.psi_source, kPsiSources)},
                {"x0_kind", enum_name(cfg.x0_kind, kX0Kinds)},
                {"trials", cfg.trials},
                {"eligible_target", cfg.eligible_target},
                {"campaign", to_string(cfg.campaign)},
                {"a_path", cfg.a_path},
                {"h_path", cfg.h_path},
                {"x0_path", cfg.x0_path},
                {"tolerances", tol}};
}

} // namespace smoothlab::lab
