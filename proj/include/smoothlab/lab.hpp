#pragma once

#include "smoothlab/dynamics.hpp"
#include "smoothlab/reparam.hpp"
#include "smoothlab/spectral.hpp"
#include "smoothlab/tolerances.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace smoothlab::lab {

using json = nlohmann::json;

enum class CommandKind { spectrum, simulate, classify, verify, ln_impact, reparam_demo };
enum class Campaign { convergence, reparam, no_residual };
enum class HSource { raw, reparam };
enum class PsiSource { init, uniform };
enum class X0Kind { random, smooth };

const char* to_string(CommandKind k) noexcept;
const char* to_string(Campaign c) noexcept;

struct ExperimentConfig {
    CommandKind kind = CommandKind::simulate;
    std::uint64_t seed = 0;
    Index n = 4;        ///< token count, or the upper end of the sampled range in campaigns
    Index d = 4;
    Index n_min = 2;
    Index d_min = 2;
    int depth = 2000;
    int record_every = 10;
    bool residual = true;
    LnMode ln_mode = LnMode::none;
    bool renormalize = true;
    ReparamMode mode = ReparamMode::smooth;
    HSource h_source = HSource::raw;
    PsiSource psi_source = PsiSource::init;
    X0Kind x0_kind = X0Kind::random;
    int trials = 100;
    int eligible_target = 0;   ///< verify: stop once this many trials were eligible (0 = run all)
    Campaign campaign = Campaign::convergence;
    std::string output_path;
    std::string a_path;
    std::string h_path;
    std::string x0_path;
    Tolerances tol;
};

// Defaults for `kind`, then `file` keys, then `overrides` keys (same names).
// Unknown keys and invalid values raise InvalidConfig.
ExperimentConfig make_config(CommandKind kind, const json& file, const json& overrides);
void validate(const ExperimentConfig& cfg);
json to_json(const ExperimentConfig& cfg);

// ---- io ----

extern const char* const kTrajectoryHeader;

std::string format_double(double x);
json number(double x);   ///< finite → number, otherwise "inf" / "-inf" / "nan"
double number_from(const json& j);
json matrix_to_json(const RealMatrix& m);
RealMatrix matrix_from_json(const json& j);
json complex_to_json(Complex z);

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
std::string trajectory_csv(const Trajectory& traj);
std::vector<TrajectoryRecord> read_trajectory_csv(const std::filesystem::path& path);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& j);
void write_text(const std::filesystem::path& path, const std::string& text);
RealMatrix read_matrix(const std::filesystem::path& path);

// ---- campaigns ----

enum class TrialStatus { pass, fail, skipped, errored };

const char* to_string(TrialStatus s) noexcept;

struct TrialResult {
    std::uint64_t trial = 0;
    Index n = 0;
    Index d = 0;
    TrialStatus status = TrialStatus::pass;
    std::string reason;        ///< skip reason, failed checks, or the error message
    std::string error_kind;    ///< set when errored
    double max_discrepancy = 0.0;
    json detail = json::object();
};

struct CampaignReport {
    std::string command;
    json header = json::object();
    std::vector<TrialResult> trials;
    json summary = json::object();

    int count(TrialStatus s) const;
    int exit_code() const;
};

json to_json(const CampaignReport& report);

CampaignReport run_spectrum(const ExperimentConfig& cfg);
CampaignReport run_verify(const ExperimentConfig& cfg);

struct Simulation {
    Trajectory trajectory;
    json report;
};

Simulation run_simulate(const ExperimentConfig& cfg);
json run_classify(const ExperimentConfig& cfg);

// Writes the CSVs into cfg.output_path and returns the summary.
json run_ln_impact(const ExperimentConfig& cfg);
json run_reparam_demo(const ExperimentConfig& cfg);

double ln_ratio_slope(const Trajectory& traj);

// ---- commands ----

// Runs one command end to end (outputs written), returning the process exit code.
int execute(const ExperimentConfig& cfg);

} // namespace smoothlab::lab
