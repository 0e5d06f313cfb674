#include "smoothlab/errors.hpp"
#include "smoothlab/lab.hpp"

#include <iostream>

namespace smoothlab::lab {

namespace {

void print_counts(const CampaignReport& r, const std::string& path) {
    std::cout << r.command << ": " << r.trials.size() << " trials, " << r.count(TrialStatus::pass) << " pass, "
              << r.count(TrialStatus::fail) << " fail, " << r.count(TrialStatus::skipped) << " skipped, "
              << r.count(TrialStatus::errored) << " errored -> " << path << "\n";
}

int campaign(const CampaignReport& report, const ExperimentConfig& cfg) {
    write_json(cfg.output_path, to_json(report));
    print_counts(report, cfg.output_path);
    return report.exit_code();
}

} // namespace

int execute(const ExperimentConfig& cfg) {
    switch (cfg.kind) {
    case CommandKind::spectrum:
        return campaign(run_spectrum(cfg), cfg);
    case CommandKind::verify:
        return campaign(run_verify(cfg), cfg);
    case CommandKind::simulate: {
        const auto sim = run_simulate(cfg);
        write_trajectory_csv(cfg.output_path, sim.trajectory);
        std::cout << sim.report.dump() << "\n";
        return 0;
    }
    case CommandKind::classify: {
        const json out = run_classify(cfg);
        if (!cfg.output_path.empty())
            write_json(cfg.output_path, out);
        std::cout << out.dump(2) << "\n";
        return 0;
    }
    case CommandKind::ln_impact: {
        const json summary = run_ln_impact(cfg);
        std::cout << summary.dump() << "\n";
        return 0;
    }
    case CommandKind::reparam_demo: {
        const json report = run_reparam_demo(cfg);
        std::cout << "reparam-demo: smooth " << (report["smooth"]["pass"].get<bool>() ? "pass" : "fail")
                  << ", sharpen " << (report["sharpen"]["pass"].get<bool>() ? "pass" : "fail") << " -> "
                  << cfg.output_path << "\n";
        return report["pass"].get<bool>() ? 0 : 1;
    }
    }
    raise(ErrorKind::InvalidConfig, "unknown command");
}

} // namespace smoothlab::lab
