#include "support.hpp"

#include "smoothlab/lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

using namespace smoothlab;
using namespace smoothlab::lab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "smoothlab_test_lab";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int cli(const std::string& args) {
    const std::string cmd = std::string(SMOOTHLAB_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

ExperimentConfig config(CommandKind kind, const json& overrides) { return make_config(kind, json(), overrides); }

} // namespace

TEST_SUITE("config") {
    TEST_CASE("defaults, file, then flags") {
        const auto cfg = make_config(CommandKind::verify, json{{"seed", 3}, {"trials", 7}, {"n", 5}},
                                     json{{"trials", 9}});
        CHECK(cfg.seed == 3);
        CHECK(cfg.trials == 9);
        CHECK(cfg.n == 5);
        CHECK(cfg.d == 8);
        CHECK(cfg.depth == 2000);
        const auto ln = config(CommandKind::ln_impact, json::object());
        CHECK(ln.depth == 128);
        CHECK(ln.record_every == 1);
        CHECK_FALSE(ln.renormalize);
    }

    TEST_CASE("rejections") {
        auto kind = [](CommandKind k, const json& j) {
            return test::kind_of([&] { config(k, j); });
        };
        CHECK(kind(CommandKind::spectrum, {{"d", 0}}) == ErrorKind::InvalidConfig);
        CHECK(kind(CommandKind::spectrum, {{"n", 0}}) == ErrorKind::InvalidConfig);
        CHECK(kind(CommandKind::spectrum, {{"trials", 0}}) == ErrorKind::InvalidConfig);
        CHECK(kind(CommandKind::spectrum, {{"n_min", 9}}) == ErrorKind::InvalidConfig);
        CHECK(kind(CommandKind::spectrum, {{"n", 9}}) == ErrorKind::InvalidConfig);
        CHECK(kind(CommandKind::simulate, {{"depth", 0}}) == ErrorKind::InvalidConfig);
        CHECK(kind(CommandKind::simulate, {{"unknown_key", 1}}) == ErrorKind::InvalidConfig);
        CHECK(kind(CommandKind::simulate, {{"ln_mode", "mid_ln"}}) == ErrorKind::InvalidConfig);
        CHECK(kind(CommandKind::simulate, {{"ln_mode", "pre_ln"}}) == ErrorKind::InvalidConfig);
        CHECK(kind(CommandKind::simulate, {{"seed", "abc"}}) == ErrorKind::InvalidConfig);
        CHECK(kind(CommandKind::simulate, {{"kind", "spectrum"}}) == ErrorKind::InvalidConfig);
        CHECK(kind(CommandKind::classify, json::object()) == ErrorKind::InvalidConfig);
        CHECK(kind(CommandKind::verify, {{"residual", false}}) == ErrorKind::InvalidConfig);
        CHECK(kind(CommandKind::simulate, {{"tolerances", {{"tie", -1}}}}) == ErrorKind::InvalidConfig);
        CHECK(kind(CommandKind::simulate, {{"tolerances", {{"nope", 1e-3}}}}) == ErrorKind::InvalidConfig);
    }

    TEST_CASE("tolerance overrides and environment scale") {
        CHECK(config(CommandKind::simulate, {{"tolerances", {{"tie", 1e-6}}}}).tol.tie == 1e-6);
        ::setenv("SMOOTHLAB_TOL_SCALE", "10", 1);
        const auto scaled = config(CommandKind::simulate, json::object());
        CHECK(scaled.tol.eig_residual == doctest::Approx(1e-9));
        CHECK(scaled.tol.diagonalizable_condition == 1e12);
        ::setenv("SMOOTHLAB_TOL_SCALE", "ten", 1);
        CHECK(test::kind_of([] { config(CommandKind::simulate, json::object()); }) == ErrorKind::InvalidConfig);
        ::unsetenv("SMOOTHLAB_TOL_SCALE");
    }
}

TEST_SUITE("io") {
    TEST_CASE("numbers") {
        CHECK(format_double(0.1) == "0.10000000000000001");
        CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
        CHECK(number(std::numeric_limits<double>::infinity()) == json("inf"));
        CHECK(number(-std::numeric_limits<double>::infinity()) == json("-inf"));
        CHECK(std::isnan(number_from(number(std::nan("")))));
        CHECK(number_from(json(2.5)) == 2.5);
        CHECK(test::kind_of([] { number_from(json("x")); }) == ErrorKind::InvalidArgument);
    }

    TEST_CASE("matrix JSON") {
        RealMatrix m(2, 3);
        m << 1, 2, 3, 4, 5, std::numeric_limits<double>::infinity();
        const json j = matrix_to_json(m);
        CHECK(j["rows"] == 2);
        CHECK(j["cols"] == 3);
        CHECK(j["data"][1] == 2.0);   // row-major
        CHECK(matrix_from_json(j) == m);
        CHECK(matrix_from_json(json::parse("[[1,2,3],[4,5,\"inf\"]]")) == m);
        CHECK(test::kind_of([] { matrix_from_json(json::parse("[[1,2],[3]]")); }) == ErrorKind::InvalidArgument);
        CHECK(test::kind_of([] { matrix_from_json(json::parse(R"({"rows":2,"cols":2,"data":[1]})")); }) ==
              ErrorKind::InvalidArgument);
    }

    TEST_CASE("trajectory CSV round trip") {
        Trajectory t;
        Rng rng(4);
        for (int k = 1; k <= 5; ++k) {
            const RealMatrix r = normal_matrix(1, 5, 1.0, rng);
            t.records.push_back({10 * k, {r(0, 0) * 1e-7, r(0, 1), 1.0 + std::abs(r(0, 2))}, r(0, 3) * 1e3, r(0, 4)});
        }
        t.records[2].metrics.hfc_lfc = std::numeric_limits<double>::infinity();
        const auto path = scratch("roundtrip.csv");
        write_trajectory_csv(path, t);
        const std::string text = slurp(path);
        CHECK(text.substr(0, text.find('\n')) == "layer,hfc_lfc,mean_cosine,effective_rank,frobenius_log,direction_delta");
        CHECK(text.find(",inf,") != std::string::npos);
        const auto back = read_trajectory_csv(path);
        REQUIRE(back.size() == t.records.size());
        for (std::size_t k = 0; k < back.size(); ++k) {
            CHECK(back[k].layer == t.records[k].layer);
            CHECK(back[k].metrics.hfc_lfc == t.records[k].metrics.hfc_lfc);
            CHECK(std::abs(back[k].metrics.mean_cosine - t.records[k].metrics.mean_cosine) <= 1e-15);
            CHECK(back[k].metrics.effective_rank == t.records[k].metrics.effective_rank);
            CHECK(back[k].frobenius_log == t.records[k].frobenius_log);
            CHECK(back[k].direction_delta == t.records[k].direction_delta);
        }
    }

    TEST_CASE("CSV with a foreign header is rejected") {
        const auto path = scratch("foreign.csv");
        write_text(path, "layer,ratio\n1,2\n");
        CHECK(test::kind_of([&] { read_trajectory_csv(path); }) == ErrorKind::InvalidArgument);
        CHECK(test::kind_of([] { read_trajectory_csv(scratch("does_not_exist.csv")); }) == ErrorKind::Io);
    }
}

TEST_SUITE("campaigns") {
    TEST_CASE("spectrum accounting and determinism") {
        const auto cfg = config(CommandKind::spectrum, {{"trials", 25}, {"seed", 5}});
        const auto a = run_spectrum(cfg), b = run_spectrum(cfg);
        const json ja = to_json(a);
        CHECK(ja.dump() == to_json(b).dump());
        const auto& s = ja["summary"];
        CHECK(s["pass"].get<int>() + s["fail"].get<int>() + s["skipped"].get<int>() + s["errored"].get<int>() == 25);
        CHECK(s["pass"] == 25);
        for (const auto& t : ja["trials"]) {
            CHECK(t["n"].get<int>() >= 2);
            CHECK(t["n"].get<int>() <= 8);
            CHECK(number_from(t["detail"]["multiset_distance"]) <= 1e-8);
        }
        const auto other = run_spectrum(config(CommandKind::spectrum, {{"trials", 25}, {"seed", 6}}));
        CHECK(to_json(other).dump() != ja.dump());
    }

    TEST_CASE("trial results do not depend on the trial count") {
        const auto small = run_spectrum(config(CommandKind::spectrum, {{"trials", 3}}));
        const auto large = run_spectrum(config(CommandKind::spectrum, {{"trials", 6}}));
        for (std::size_t k = 0; k < 3; ++k)
            CHECK(small.trials[k].detail.dump() == large.trials[k].detail.dump());
    }

    TEST_CASE("verify accounting with an eligibility target") {
        const auto cfg = config(CommandKind::verify,
                                {{"campaign", "convergence"}, {"trials", 60}, {"eligible_target", 5}, {"depth", 400}});
        const auto r = run_verify(cfg);
        const json j = to_json(r);
        const auto& s = j["summary"];
        CHECK(s["eligible"] == 5);
        CHECK(s["target_met"] == true);
        CHECK(s["pass"].get<int>() + s["fail"].get<int>() + s["skipped"].get<int>() + s["errored"].get<int>() ==
              s["trials"].get<int>());
        CHECK(s["trials"].get<int>() < 60);
        for (const auto& t : j["trials"]) {
            if (t["status"] == "skipped") {
                CHECK_FALSE(t["reason"].get<std::string>().empty());
            } else if (t["status"] != "errored") {
                CHECK(t["detail"].contains("empirical_metrics_at_depth"));
                CHECK(t["detail"].contains("predicted_metrics_of_limit"));
                CHECK(t["detail"]["agreement"] == (t["status"] == "pass"));
                CHECK(number_from(t["detail"]["discrepancy"]["direction"]) <= 1e-6);
            }
        }
    }

    TEST_CASE("unmet eligibility target is a verification failure") {
        const auto r = run_verify(config(CommandKind::verify,
                                         {{"campaign", "convergence"}, {"trials", 1}, {"eligible_target", 50}, {"depth", 50}}));
        CHECK(r.summary["target_met"] == false);
        CHECK(r.exit_code() == 1);
    }

    TEST_CASE("no-residual campaign") {
        const auto r = run_verify(config(CommandKind::verify,
                                         {{"campaign", "no_residual"}, {"residual", false}, {"trials", 10}}));
        CHECK(r.count(TrialStatus::pass) == 10);
        CHECK(r.exit_code() == 0);
        for (const auto& t : r.trials)
            CHECK(t.detail["verdict"]["case"] == "case1");
    }

    TEST_CASE("reparam campaign in both modes") {
        for (const char* mode : {"smooth", "sharpen"}) {
            const auto r = run_verify(
                config(CommandKind::verify, {{"campaign", "reparam"}, {"mode", mode}, {"trials", 20}}));
            CHECK(r.count(TrialStatus::fail) == 0);
            CHECK(r.count(TrialStatus::errored) == 0);
            CHECK(r.count(TrialStatus::pass) > 0);
            for (const auto& t : r.trials)
                CHECK(t.detail["dominant_type"] ==
                      (std::string(mode) == "smooth" ? "type1_smoothing" : "type2_sharpening"));
        }
    }
}

TEST_SUITE("single runs") {
    TEST_CASE("simulate with depth 1 records one layer") {
        const auto sim = run_simulate(config(CommandKind::simulate, {{"depth", 1}}));
        REQUIRE(sim.trajectory.records.size() == 1);
        CHECK(sim.trajectory.records[0].layer == 1);
        const std::string csv = trajectory_csv(sim.trajectory);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    }

    TEST_CASE("simulate without residual oversmooths") {
        const auto sim = run_simulate(config(CommandKind::simulate, {{"residual", false}, {"seed", 2}}));
        const auto& m = sim.trajectory.records.back().metrics;
        CHECK(m.hfc_lfc <= 1e-8);
        CHECK(m.mean_cosine >= 1.0 - 1e-8);
        CHECK(m.effective_rank <= 1.0 + 1e-6);
    }

    TEST_CASE("simulate surfaces overflow") {
        CHECK(test::kind_of([] {
                  run_simulate(config(CommandKind::simulate, {{"renormalize", false}, {"depth", 200000}}));
              }) == ErrorKind::Overflow);
    }

    TEST_CASE("classify worked examples") {
        const auto a = scratch("a.json"), h1 = scratch("h1.json"), h2 = scratch("h2.json");
        write_json(a, matrix_to_json(test::two_state(0.9)));
        write_text(h1, "[[-1]]");
        RealMatrix h(2, 2);
        h << 0.5, 0, 0, 0.2;
        write_json(h2, matrix_to_json(h));

        auto verdict = [&](const fs::path& hp, bool residual) {
            return run_classify(config(CommandKind::classify,
                                       {{"a_path", a.string()}, {"h_path", hp.string()}, {"residual", residual}}))["verdict"];
        };
        const json v2 = verdict(h1, true);
        CHECK(v2["case"] == "case2");
        CHECK(v2["input_convergence"] == false);
        CHECK(v2["angle_convergence"] == false);
        CHECK(v2["rank_collapse"] == true);
        const json v1 = verdict(h2, true);
        CHECK(v1["case"] == "case1");
        CHECK((v1["input_convergence"] == true && v1["angle_convergence"] == true && v1["rank_collapse"] == true));
        const json vn = verdict(h1, false);
        CHECK((vn["input_convergence"] == true && vn["angle_convergence"] == true && vn["rank_collapse"] == true));
    }

    TEST_CASE("classify rejects shape mismatches") {
        const auto a = scratch("a3.json"), x = scratch("x_bad.json"), h = scratch("h2b.json");
        write_json(a, matrix_to_json(RealMatrix::Constant(3, 3, 1.0 / 3.0)));
        write_json(h, matrix_to_json(RealMatrix::Identity(2, 2)));
        write_json(x, matrix_to_json(RealMatrix::Ones(2, 2)));
        CHECK(test::kind_of([&] {
                  run_classify(config(CommandKind::classify,
                                      {{"a_path", a.string()}, {"h_path", h.string()}, {"x0_path", x.string()}}));
              }) == ErrorKind::InvalidArgument);
    }

    TEST_CASE("ln-impact writes eight 128-step trajectories") {
        const auto dir = scratch("ln");
        const json s = run_ln_impact(config(CommandKind::ln_impact, {{"output_path", dir.string()}, {"seed", 1}}));
        int files = 0;
        for (const char* m : {"smooth", "sharpen"})
            for (const char* l : {"pre_ln", "post_ln"})
                for (const char* g : {"pos", "neg"}) {
                    const auto recs = read_trajectory_csv(dir / (std::string(m) + "_" + l + "_" + g + ".csv"));
                    CHECK(recs.size() == 128);
                    CHECK(recs.back().layer == 128);
                    ++files;
                }
        CHECK(files == 8);
        CHECK(fs::exists(dir / "summary.json"));
        // post-LN is odd in γ when β = 0, so both signs give the same metrics
        CHECK(s["slopes"]["smooth"]["post_ln"]["pos"] == s["slopes"]["smooth"]["post_ln"]["neg"]);
    }

    TEST_CASE("ln ratio slope is a least-squares fit") {
        Trajectory t;
        for (int k = 1; k <= 10; ++k)
            t.records.push_back({k, {std::exp(0.5 - 0.25 * k), 1.0, 1.0}, 0.0, 0.0});
        t.records.push_back({11, {std::numeric_limits<double>::infinity(), 1.0, 1.0}, 0.0, 0.0});
        t.records.push_back({12, {0.0, 1.0, 1.0}, 0.0, 0.0});
        CHECK(ln_ratio_slope(t) == doctest::Approx(-0.25).epsilon(1e-12));
        Trajectory single;
        single.records.push_back({1, {1.0, 1.0, 1.0}, 0.0, 0.0});
        CHECK(std::isnan(ln_ratio_slope(single)));
    }

    TEST_CASE("reparam demo") {
        const auto dir = scratch("demo");
        const json r = run_reparam_demo(config(CommandKind::reparam_demo, {{"output_path", dir.string()}, {"seed", 3}}));
        CHECK(r["smooth"]["verdict"]["case"] == "case1");
        CHECK(r["smooth"]["dominance"]["dominant_type"] == "type1_smoothing");
        CHECK(r["sharpen"]["dominance"]["dominant_type"] == "type2_sharpening");
        CHECK(r["smooth"]["clip_range"] == "smoothing");
        CHECK(r["sharpen"]["clip_range"] == "sharpening");
        CHECK(fs::exists(dir / "smooth.csv"));
        CHECK(fs::exists(dir / "sharpen.csv"));
        CHECK(fs::exists(dir / "report.json"));
    }
}

TEST_SUITE("cli") {
    TEST_CASE("exit codes") {
        const std::string out = scratch("cli_spec.json").string();
        CHECK(cli("spectrum --trials 3 --out " + out) == 0);
        CHECK(cli("spectrum --d 0 --out " + out) == 2);
        CHECK(cli("nonsense") == 2);
        CHECK(cli("spectrum --config " + scratch("missing_config.json").string()) == 2);
        CHECK(cli("simulate --renormalize false --depth 200000 --out " + scratch("o.csv").string()) == 3);
        CHECK(cli("verify --campaign convergence --trials 1 --eligible-target 40 --depth 50 --out " +
                  scratch("v.json").string()) == 1);
    }

    TEST_CASE("flags override the config file") {
        const auto cfg_path = scratch("cfg.json");
        write_json(cfg_path, json{{"trials", 2}, {"seed", 1}});
        const auto out = scratch("cli_override.json");
        REQUIRE(cli("spectrum --config " + cfg_path.string() + " --trials 4 --out " + out.string()) == 0);
        const json j = read_json(out);
        CHECK(j["summary"]["trials"] == 4);
        CHECK(j["header"]["config"]["seed"] == 1);
    }

    TEST_CASE("same seed, same bytes") {
        const auto a = scratch("det_a.csv"), b = scratch("det_b.csv");
        REQUIRE(cli("simulate --seed 9 --depth 300 --out " + a.string()) == 0);
        REQUIRE(cli("simulate --seed 9 --depth 300 --out " + b.string()) == 0);
        CHECK(slurp(a) == slurp(b));
        CHECK_FALSE(slurp(a).empty());
    }
}
