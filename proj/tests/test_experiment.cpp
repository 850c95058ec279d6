#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "breakwater/experiment.hpp"
#include "fixtures.hpp"

using namespace breakwater;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
    return out;
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("breakwater_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

const char* kMatrixPlan = R"({
  "name": "small",
  "seeds": [1, 2],
  "defaults": {"population": 6, "archive": 6, "generations": 4},
  "matrix": {"algorithm": ["spea2", "de"], "encoding": ["angular", "cartesian"], "greedy": [true, false]},
  "checkpoints": [2]
})";

// External model that answers with the incident height everywhere, except on
// call number `fail_on` where it exits with an error.
fs::path flaky_model(const fs::path& dir, int fail_on) {
    const auto script = dir / "model.sh";
    std::ofstream(script) << "#!/bin/sh\n"
                             "n=$(cat \"$1/../count\" 2>/dev/null || echo 0); n=$((n+1)); echo $n > \"$1/../count\"\n"
                             "[ \"$n\" -eq "
                          << fail_on
                          << " ] && exit 3\n"
                             "h=$(awk '/incident_height/ {print $2}' \"$1/boundary.txt\")\n"
                             "tail -n +2 \"$1/grid.txt\" | awk -v h=\"$h\" '{for(i=1;i<=NF;i++){printf \"%s%s\", ($i==-9999?-9999:h), "
                             "(i<NF?\" \":\"\\n\")}}' > \"$1/heights.txt\"\n";
    fs::permissions(script, fs::perms::owner_all);
    return script;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(BREAKWATER_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("plan parsing") {
    const auto plan = plan_from_json_text(kMatrixPlan);
    CHECK(plan.entries.size() == 8);
    CHECK(plan.entries[0].label == "spea2-angular-greedy");
    CHECK(plan.entries[7].label == "de-cartesian-plain");
    for (const auto& e : plan.entries) {
        CHECK(e.seeds == std::vector<std::uint64_t>{1, 2});
        CHECK(e.config.population_size == 6);
    }
    CHECK(plan_from_json_text(plan_to_json_text(plan)).entries.size() == 8);
    CHECK(plan_to_json_text(plan_from_json_text(plan_to_json_text(plan))) == plan_to_json_text(plan));

    const auto repeats = plan_from_json_text(R"({"repeats": 3, "first_seed": 10, "entries": [{"algorithm": "de", "mutation_rate": 0.1}]})");
    CHECK(repeats.entries[0].seeds == std::vector<std::uint64_t>{10, 11, 12});
    CHECK(repeats.entries[0].config.mutation_rate == 0.1);
    CHECK(repeats.entries[0].algorithm == Algorithm::DE);

    CHECK_THROWS_AS(plan_from_json_text(R"({"seeds": [1], "entries": [{"algorithm": "spea2", "popsize": 3}]})"), ConfigurationError);
    CHECK_THROWS_AS(plan_from_json_text(R"({"seeds": [1], "entries": [{"algorithm": "nsga2"}]})"), ConfigurationError);
    CHECK_THROWS_AS(plan_from_json_text(R"({"seeds": [1], "entries": [{"label": "x"}, {"label": "x"}]})"), ConfigurationError);
    CHECK_THROWS_AS(plan_from_json_text(R"({"seeds": [1], "entries": [{"mutation_rate": 2}]})"), ConfigurationError);
    CHECK_THROWS_AS(plan_from_json_text("[1, 2"), ConfigurationError);
}

TEST_CASE("matrix experiment: shape, accounting, fronts and byte-identical reruns") {
    const Scenario s = scenario_from_json_text(small_harbor_text());
    const auto plan = plan_from_json_text(kMatrixPlan);
    const auto a = scratch("exp_a");
    const auto b = scratch("exp_b");
    const auto result = run_experiment(plan, s, a);
    CHECK(result.failures.empty());
    CHECK(result.runs.size() == 16);
    REQUIRE(result.summary.size() == 8);
    for (const auto& row : result.summary) {
        CHECK(row.runs == 2);
        CHECK(row.failed == 0);
        CHECK(row.model_runs_per_run == 24);
        CHECK(row.checkpoint_hypervolume.size() == 1);
        CHECK(row.mask_violations == 0);
        CHECK(row.final_hypervolume.median >= row.checkpoint_hypervolume[0].median);
    }
    for (const auto& run : result.runs) {
        REQUIRE(run.history);
        CHECK(run.history->last().model_runs == 24);
        for (std::size_t g = 1; g < run.snapshots.size(); ++g) CHECK(run.snapshots[g].hypervolume >= run.snapshots[g - 1].hypervolume);
        // every front member re-evaluates to its recorded objectives
        for (const auto& ind : final_front(*run.history)) {
            const auto o = evaluate(ind.genotype, s);
            CHECK(o.feasible());
            CHECK(minimization_vector(relativize(o, s.baseline), o.constraints) == ind.point);
        }
    }
    std::string summary = slurp(a / "summary.csv");
    CHECK(std::count(summary.begin(), summary.end(), '\n') == 9);
    for (const auto* f : {"plan.json", "scenario.json", "reference_point.json", "failures.csv", "spea2-angular-greedy/convergence.csv",
                          "spea2-angular-greedy/union_front.csv", "de-cartesian-plain/seed-2/front.json",
                          "de-cartesian-plain/seed-2/history.csv", "de-cartesian-plain/seed-2/population.csv"})
        CHECK(fs::exists(a / f));

    (void)run_experiment(plan, s, b);
    CHECK(tree(a) == tree(b));

    // parallel workers give the same files
    auto parallel = plan;
    parallel.parallel_runs = 3;
    const auto c = scratch("exp_c");
    (void)run_experiment(parallel, s, c);
    auto ta = tree(a);
    auto tc = tree(c);
    ta.erase("plan.json");
    tc.erase("plan.json");
    CHECK(ta == tc);

    // results reload from disk to the same summary
    auto loaded = load_results(a, plan, s);
    compute_metrics(loaded, plan, ObjectiveSelection::parse(plan.objectives));
    REQUIRE(loaded.summary.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) CHECK(loaded.summary[i].final_hypervolume.median == result.summary[i].final_hypervolume.median);
    CHECK(loaded.reference == result.reference);

    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(c);
}

TEST_CASE("failing runs are recorded and the rest continue") {
    auto j = small_harbor_json();
    const auto dir = scratch("exp_fail");
    // call 1 is the baseline; call 2 is the first evaluation of seed 1
    j["wave_model"] = {{"kind", "file_exchange"}, {"workdir", (dir / "work").string()}, {"command", flaky_model(dir, 2).string()}};
    const Scenario s = scenario_from_json_text(j.dump());
    const auto plan = plan_from_json_text(R"({"seeds": [1, 2], "defaults": {"population": 4, "archive": 4, "generations": 2},
                                              "entries": [{"algorithm": "spea2"}]})");
    const auto result = run_experiment(plan, s, dir / "out");
    REQUIRE(result.failures.size() == 1);
    CHECK(result.failures[0].seed == 1);
    CHECK(result.failures[0].message.find("external wave model failed") != std::string::npos);
    CHECK(result.find("spea2-angular-plain", 2) != nullptr);
    CHECK(result.summary.at(0).failed == 1);
    CHECK(slurp(dir / "out" / "failures.csv").find("external wave model failed") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("front export round trip and field export") {
    const Scenario s = scenario_from_json_text(small_harbor_text());
    EAConfig cfg;
    cfg.population_size = 8;
    cfg.archive_size = 8;
    cfg.generations = 3;
    const auto h = run_spea2(cfg, s);
    const auto front = final_front(h);
    REQUIRE_FALSE(front.empty());
    const auto genotypes = genotypes_from_front_json(front_to_json_text(front, s));
    REQUIRE(genotypes.size() == front.size());
    for (std::size_t i = 0; i < front.size(); ++i) CHECK(genotypes[i] == front[i].genotype);

    const auto dir = scratch("field");
    const auto field = export_field(Layout{}, s, dir);
    const auto back = read_height_matrix(dir / "heights.txt", s.grid.n_cols(), s.grid.n_rows());
    CHECK(sample(back, s.control_points) == s.baseline.wave_heights);
    CHECK(sample(field, s.control_points) == s.baseline.wave_heights);
    CHECK(fs::exists(dir / "layout.json"));
    fs::remove_all(dir);
}

TEST_CASE("CLI exit codes") {
    const auto dir = scratch("cli");
    std::ofstream(dir / "good.json") << small_harbor_text();
    auto bad = small_harbor_json();
    bad["control_points"].push_back({5.0, 22.0});
    std::ofstream(dir / "bad.json") << bad.dump();
    const std::string good = (dir / "good.json").string();

    CHECK(cli("validate --scenario " + good) == 0);
    CHECK(cli("validate --scenario " + (dir / "bad.json").string()) == 1);
    CHECK(cli("validate --scenario " + (dir / "missing.json").string()) == 1);
    CHECK(cli("validate") == 1);
    CHECK(cli("frobnicate") == 1);
    CHECK(cli("baseline --scenario " + good) == 0);
    CHECK(cli("optimize --scenario " + good + " --population 1 --out " + (dir / "o").string()) == 1);
    CHECK(cli("optimize --scenario " + good + " --population 6 --generations 3 --seed 4 --out " + (dir / "o").string()) == 0);
    CHECK(fs::exists(dir / "o" / "summary.csv"));
    CHECK(cli("metrics --out " + (dir / "o").string() + " --objectives cost,waves") == 0);
    CHECK(cli("export-field --scenario " + good + " --out " + (dir / "f").string()) == 0);
    CHECK(fs::exists(dir / "f" / "heights.txt"));

    auto failing = small_harbor_json();
    failing["wave_model"] = {{"kind", "file_exchange"}, {"workdir", (dir / "work").string()}, {"command", flaky_model(dir, 2).string()}};
    std::ofstream(dir / "failing.json") << failing.dump();
    CHECK(cli("optimize --scenario " + (dir / "failing.json").string() + " --population 4 --generations 2 --out " +
              (dir / "x").string()) == 2);
    fs::remove_all(dir);
}
