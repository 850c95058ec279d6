#include "breakwater/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace breakwater {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string to_string(DeVariation v) { return v == DeVariation::Rand1Bin ? "rand1bin" : "genetic"; }

DeVariation de_variation_from(const std::string& s) {
    if (s == "rand1bin") return DeVariation::Rand1Bin;
    if (s == "genetic") return DeVariation::GeneticOperators;
    throw ConfigurationError("unknown de_variation '" + s + "' (expected rand1bin or genetic)");
}

std::string to_string(ScalarMapping m) { return m == ScalarMapping::WaveMeanThenNav ? "wave_mean_then_nav" : "table_order"; }

ScalarMapping scalar_mapping_from(const std::string& s) {
    if (s == "wave_mean_then_nav") return ScalarMapping::WaveMeanThenNav;
    if (s == "table_order") return ScalarMapping::TableOrder;
    throw ConfigurationError("unknown scalar_mapping '" + s + "'");
}

void apply_budget(const json& j, EAConfig& c) {
    static const char* const known[] = {"population", "archive", "generations", "crossover_rate", "mutation_rate",
                                        "sigma_length", "sigma_angle", "sigma_cartesian", "generations_per_segment",
                                        "de_weight", "de_variation", "scalar_mapping", "penalty", "threads",
                                        "label", "algorithm", "encoding", "greedy", "seeds"};
    for (const auto& [key, _] : j.items())
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw ConfigurationError("unknown plan key '" + key + "'");
    c.population_size = j.value("population", c.population_size);
    c.archive_size = j.value("archive", c.archive_size);
    c.generations = j.value("generations", c.generations);
    c.crossover_rate = j.value("crossover_rate", c.crossover_rate);
    c.mutation_rate = j.value("mutation_rate", c.mutation_rate);
    c.sigma.length = j.value("sigma_length", c.sigma.length);
    c.sigma.angle = j.value("sigma_angle", c.sigma.angle);
    c.sigma.cartesian = j.value("sigma_cartesian", c.sigma.cartesian);
    c.generations_per_segment = j.value("generations_per_segment", c.generations_per_segment);
    c.de_weight = j.value("de_weight", c.de_weight);
    if (j.contains("de_variation")) c.de_variation = de_variation_from(j["de_variation"].get<std::string>());
    if (j.contains("scalar_mapping")) c.scalar.mapping = scalar_mapping_from(j["scalar_mapping"].get<std::string>());
    c.scalar.penalty_per_violation = j.value("penalty", c.scalar.penalty_per_violation);
    c.threads = j.value("threads", c.threads);
    if (j.contains("encoding")) c.encoding = encoding_from_string(j["encoding"].get<std::string>());
    c.greedy = j.value("greedy", c.greedy);
}

json budget_to_json(const EAConfig& c) {
    return {{"population", c.population_size},
            {"archive", c.archive_size},
            {"generations", c.generations},
            {"crossover_rate", c.crossover_rate},
            {"mutation_rate", c.mutation_rate},
            {"sigma_length", c.sigma.length},
            {"sigma_angle", c.sigma.angle},
            {"sigma_cartesian", c.sigma.cartesian},
            {"generations_per_segment", c.generations_per_segment},
            {"de_weight", c.de_weight},
            {"de_variation", to_string(c.de_variation)},
            {"scalar_mapping", to_string(c.scalar.mapping)},
            {"penalty", c.scalar.penalty_per_violation},
            {"threads", c.threads},
            {"encoding", to_string(c.encoding)},
            {"greedy", c.greedy}};
}

std::vector<std::uint64_t> seeds_from(const json& j) {
    if (j.contains("seeds")) {
        auto seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        if (j.contains("repeats") && j["repeats"].get<std::size_t>() != seeds.size())
            throw ConfigurationError("repeats must equal the number of seeds");
        return seeds;
    }
    if (j.contains("repeats")) {
        const auto n = j["repeats"].get<std::size_t>();
        const auto first = j.value("first_seed", std::uint64_t{1});
        std::vector<std::uint64_t> seeds;
        for (std::size_t i = 0; i < n; ++i) seeds.push_back(first + i);
        return seeds;
    }
    return {};
}

fs::path run_dir(const fs::path& out, const std::string& label, std::uint64_t seed) {
    return out / label / ("seed-" + std::to_string(seed));
}

std::string csv_join(const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) s += ',';
        s += cells[i];
    }
    return s + '\n';
}

std::vector<std::string> csv_split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::runtime_error("bad number '" + s + "' in CSV");
    return v;
}

std::size_t parse_size(const std::string& s) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw std::runtime_error("bad integer '" + s + "' in CSV");
    return v;
}

json polyline_json(const Polyline& line) {
    json j = json::array();
    for (const auto& p : line) j.push_back(json::array({p.x, p.y}));
    return j;
}

json individual_json(const Individual& ind, const Scenario& scenario) {
    json genes = json::array();
    for (const auto& b : ind.genotype.blocks) genes.push_back(json::array({b.first, b.second}));
    json layout = json::array();
    for (const auto& bw : decode(ind.genotype, scenario.attachments).breakwaters)
        layout.push_back({{"material", to_string(bw.material)}, {"points", polyline_json(bw.vertices)}});
    const auto rel = relativize(ind.objectives, scenario.baseline);
    return {{"encoding", to_string(ind.genotype.encoding)},
            {"genes", std::move(genes)},
            {"layout", std::move(layout)},
            {"objectives",
             {{"cost", ind.objectives.cost},
              {"nav_distance", ind.objectives.nav_distance},
              {"wave_heights", ind.objectives.wave_heights}}},
            {"relative", {{"rel_cost", rel.rel_cost}, {"rel_nav", rel.rel_nav}, {"rel_wave_heights", rel.rel_wave_heights}}},
            {"point", ind.point},
            {"scalar", ind.scalar}};
}

void write_run(const fs::path& dir, const std::string& label, std::uint64_t seed, const ArchiveHistory& h,
               const Scenario& scenario) {
    fs::create_directories(dir);
    json run = {{"label", label},
                {"algorithm", to_string(h.algorithm)},
                {"seed", seed},
                {"config", budget_to_json(h.config)},
                {"offspring_checked", h.offspring_checked},
                {"mask_violations", h.mask_violations},
                {"clamped_scores", h.clamped_scores}};
    write_text(dir / "run.json", run.dump(2) + "\n");

    std::ostringstream hist;
    hist << "generation,model_runs,simulations,active_segment,best_scalar,archive_size,feasible_evaluated\n";
    for (const auto& rec : h.generations) {
        const auto feasible = std::count_if(rec.population.begin(), rec.population.end(),
                                            [](const Individual& i) { return i.objectives.feasible(); });
        hist << csv_join({std::to_string(rec.generation), std::to_string(rec.model_runs), std::to_string(rec.simulations),
                          std::to_string(rec.active_segment), format_double(rec.best_scalar),
                          std::to_string(rec.archive.size()), std::to_string(feasible)});
    }
    write_text(dir / "history.csv", hist.str());

    std::vector<std::pair<std::size_t, const Individual*>> pop;
    std::vector<std::pair<std::size_t, const Individual*>> arch;
    for (const auto& rec : h.generations) {
        for (const auto& ind : rec.population) pop.emplace_back(rec.generation, &ind);
        for (const auto& ind : rec.archive) arch.emplace_back(rec.generation, &ind);
    }
    std::ostringstream p;
    write_individuals_csv(p, pop, scenario);
    write_text(dir / "population.csv", p.str());
    std::ostringstream a;
    write_individuals_csv(a, arch, scenario);
    write_text(dir / "archive.csv", a.str());

    const auto front = final_front(h);
    write_text(dir / "front.json", front_to_json_text(front, scenario));
    std::vector<Point> flat;
    for (const auto& ind : front) {
        const auto [c, m] = reduce_to_2d(ind.objectives);
        flat.push_back({c, m});
    }
    std::ostringstream f2;
    f2 << "cost,mean_wave_height\n";
    auto reduced = nondominated(flat);
    std::sort(reduced.begin(), reduced.end());
    reduced.erase(std::unique(reduced.begin(), reduced.end()), reduced.end());
    for (const auto& q : reduced) f2 << format_double(q[0]) << ',' << format_double(q[1]) << '\n';
    write_text(dir / "front2d.csv", f2.str());
}

void write_snapshots(const fs::path& dir, const std::vector<FrontSnapshot>& snaps) {
    std::ostringstream s;
    s << "generation,model_runs,front_size,hypervolume\n";
    for (const auto& snap : snaps)
        s << snap.generation << ',' << snap.model_runs << ',' << snap.points.size() << ',' << format_double(snap.hypervolume)
          << '\n';
    write_text(dir / "snapshots.csv", s.str());
}

std::string points_csv(const std::vector<Point>& points) {
    std::ostringstream s;
    if (points.empty()) return "";
    for (std::size_t k = 0; k < points.front().size(); ++k) s << (k ? "," : "") << 'f' << k;
    s << '\n';
    auto sorted = points;
    std::sort(sorted.begin(), sorted.end());
    for (const auto& p : sorted) {
        for (std::size_t k = 0; k < p.size(); ++k) s << (k ? "," : "") << format_double(p[k]);
        s << '\n';
    }
    return s.str();
}

}  // namespace

ExperimentPlan plan_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigurationError(std::string("plan is not valid JSON: ") + e.what());
    }
    try {
        ExperimentPlan plan;
        plan.name = j.value("name", plan.name);
        plan.objectives = j.value("objectives", plan.objectives);
        (void)ObjectiveSelection::parse(plan.objectives);
        plan.checkpoints = j.value("checkpoints", plan.checkpoints);
        plan.parallel_runs = j.value("parallel_runs", plan.parallel_runs);
        if (plan.parallel_runs < 1) throw ConfigurationError("parallel_runs must be at least 1");
        const auto plan_seeds = seeds_from(j);
        EAConfig defaults;
        if (j.contains("defaults")) apply_budget(j["defaults"], defaults);

        const auto add_entry = [&](const json& e) {
            PlanEntry entry;
            entry.algorithm = algorithm_from_string(e.value("algorithm", std::string("spea2")));
            entry.config = defaults;
            apply_budget(e, entry.config);
            entry.config.validate();
            entry.seeds = e.contains("seeds") ? e["seeds"].get<std::vector<std::uint64_t>>() : plan_seeds;
            if (entry.seeds.empty()) throw ConfigurationError("plan entry has no seeds");
            entry.label = e.value("label", default_label(entry.algorithm, entry.config));
            if (entry.label.empty() || entry.label.find_first_of("/\\ ,") != std::string::npos)
                throw ConfigurationError("plan label '" + entry.label + "' must be non-empty without slashes, spaces or commas");
            plan.entries.push_back(std::move(entry));
        };
        for (const auto& e : j.value("entries", json::array())) add_entry(e);
        if (j.contains("matrix")) {
            const auto& m = j["matrix"];
            const auto algorithms = m.value("algorithm", std::vector<std::string>{"spea2"});
            const auto encodings = m.value("encoding", std::vector<std::string>{to_string(defaults.encoding)});
            const auto greedy = m.value("greedy", std::vector<bool>{defaults.greedy});
            for (const auto& a : algorithms)
                for (const auto& e : encodings)
                    for (const bool g : greedy) add_entry({{"algorithm", a}, {"encoding", e}, {"greedy", g}});
        }
        if (plan.entries.empty()) throw ConfigurationError("plan has no entries (give entries or matrix)");
        std::map<std::string, int> seen;
        for (const auto& e : plan.entries)
            if (++seen[e.label] > 1) throw ConfigurationError("duplicate plan label '" + e.label + "'");
        return plan;
    } catch (const json::exception& e) {
        throw ConfigurationError(std::string("malformed plan: ") + e.what());
    }
}

ExperimentPlan load_plan(const fs::path& path) {
    if (!fs::exists(path)) throw ConfigurationError("plan file " + path.string() + " does not exist");
    return plan_from_json_text(read_text(path));
}

std::string plan_to_json_text(const ExperimentPlan& plan) {
    json entries = json::array();
    for (const auto& e : plan.entries) {
        json j = budget_to_json(e.config);
        j["label"] = e.label;
        j["algorithm"] = to_string(e.algorithm);
        j["seeds"] = e.seeds;
        entries.push_back(std::move(j));
    }
    json j = {{"name", plan.name},
              {"objectives", plan.objectives},
              {"checkpoints", plan.checkpoints},
              {"parallel_runs", plan.parallel_runs},
              {"entries", std::move(entries)}};
    return j.dump(2) + "\n";
}

std::string default_label(Algorithm algorithm, const EAConfig& config) {
    return to_string(algorithm) + "-" + to_string(config.encoding) + "-" + (config.greedy ? "greedy" : "plain");
}

ExperimentPlan single_run_plan(Algorithm algorithm, const EAConfig& config) {
    ExperimentPlan plan;
    plan.name = "optimize";
    PlanEntry entry;
    entry.label = default_label(algorithm, config);
    entry.algorithm = algorithm;
    entry.config = config;
    entry.seeds = {config.seed};
    plan.entries.push_back(std::move(entry));
    return plan;
}

const ArchiveHistory* ExperimentResult::find(const std::string& label, std::uint64_t seed) const {
    for (const auto& r : runs)
        if (r.label == label && r.seed == seed && r.history) return &*r.history;
    return nullptr;
}

void write_individuals_csv(std::ostream& out, const std::vector<std::pair<std::size_t, const Individual*>>& rows,
                           const Scenario& scenario) {
    const std::size_t genes = 2 * scenario.total_segments();
    const std::size_t heights = scenario.control_points.size();
    std::vector<std::string> header{"generation", "index"};
    for (std::size_t i = 0; i < genes; ++i) header.push_back("g" + std::to_string(i));
    header.insert(header.end(), {"cost", "nav_distance"});
    for (std::size_t i = 0; i < heights; ++i) header.push_back("h" + std::to_string(i));
    header.insert(header.end(), {"self_intersections", "fairway_intersections", "land_coverage", "simulated", "scalar", "fitness"});
    for (std::size_t i = 0; i < 2 + heights; ++i) header.push_back("p" + std::to_string(i));
    out << csv_join(header);

    std::size_t last_gen = static_cast<std::size_t>(-1);
    std::size_t index = 0;
    for (const auto& [gen, ind] : rows) {
        index = gen == last_gen ? index + 1 : 0;
        last_gen = gen;
        std::vector<std::string> cells{std::to_string(gen), std::to_string(index)};
        for (std::size_t i = 0; i < ind->genotype.gene_count(); ++i) cells.push_back(format_double(ind->genotype.gene(i)));
        cells.push_back(format_double(ind->objectives.cost));
        cells.push_back(format_double(ind->objectives.nav_distance));
        for (const double h : ind->objectives.wave_heights) cells.push_back(format_double(h));
        const auto& c = ind->objectives.constraints;
        cells.push_back(std::to_string(c.self_intersections));
        cells.push_back(std::to_string(c.fairway_intersections));
        cells.push_back(std::to_string(c.land_coverage));
        cells.push_back(ind->objectives.simulated ? "1" : "0");
        cells.push_back(format_double(ind->scalar));
        cells.push_back(format_double(ind->fitness));
        for (const double v : ind->point) cells.push_back(format_double(v));
        out << csv_join(cells);
    }
}

std::vector<std::pair<std::size_t, Individual>> read_individuals_csv(std::istream& in, Encoding encoding) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("individuals CSV is empty");
    const auto header = csv_split(line);
    std::size_t genes = 0, heights = 0, points = 0;
    for (const auto& h : header) {
        if (h.size() < 2) continue;
        const bool numbered = std::all_of(h.begin() + 1, h.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
        if (!numbered) continue;
        genes += h[0] == 'g';
        heights += h[0] == 'h';
        points += h[0] == 'p';
    }
    if (header.size() != 2 + genes + 2 + heights + 6 + points) throw std::runtime_error("unexpected individuals CSV header");
    std::vector<std::pair<std::size_t, Individual>> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = csv_split(line);
        if (cells.size() != header.size()) throw std::runtime_error("individuals CSV row has the wrong number of cells");
        std::size_t k = 0;
        const std::size_t gen = parse_size(cells[k++]);
        ++k;  // index
        Individual ind;
        ind.genotype.encoding = encoding;
        ind.genotype.blocks.resize(genes / 2);
        for (std::size_t i = 0; i < genes; ++i) ind.genotype.gene(i) = parse_double(cells[k++]);
        ind.objectives.cost = parse_double(cells[k++]);
        ind.objectives.nav_distance = parse_double(cells[k++]);
        for (std::size_t i = 0; i < heights; ++i) ind.objectives.wave_heights.push_back(parse_double(cells[k++]));
        ind.objectives.constraints.self_intersections = parse_size(cells[k++]);
        ind.objectives.constraints.fairway_intersections = parse_size(cells[k++]);
        ind.objectives.constraints.land_coverage = parse_size(cells[k++]);
        ind.objectives.simulated = cells[k++] == "1";
        ind.scalar = parse_double(cells[k++]);
        ind.fitness = parse_double(cells[k++]);
        for (std::size_t i = 0; i < points; ++i) ind.point.push_back(parse_double(cells[k++]));
        out.emplace_back(gen, std::move(ind));
    }
    return out;
}

std::vector<Individual> final_front(const ArchiveHistory& history) {
    std::vector<const Individual*> feasible;
    for (const auto& rec : history.generations)
        for (const auto& ind : rec.population)
            if (ind.objectives.feasible()) feasible.push_back(&ind);
    std::vector<Point> points;
    points.reserve(feasible.size());
    for (const auto* ind : feasible) points.push_back(ind->point);
    std::vector<Individual> front;
    std::vector<Point> taken;
    for (const std::size_t i : nondominated_indices(points)) {
        if (std::find(taken.begin(), taken.end(), points[i]) != taken.end()) continue;
        taken.push_back(points[i]);
        front.push_back(*feasible[i]);
    }
    return front;
}

std::string front_to_json_text(const std::vector<Individual>& front, const Scenario& scenario) {
    json members = json::array();
    for (const auto& ind : front) members.push_back(individual_json(ind, scenario));
    return json({{"members", std::move(members)}}).dump(2) + "\n";
}

std::vector<Genotype> genotypes_from_front_json(const std::string& text) {
    std::vector<Genotype> out;
    try {
        const json j = json::parse(text);
        for (const auto& m : j.at("members")) {
            Genotype g;
            g.encoding = encoding_from_string(m.at("encoding").get<std::string>());
            for (const auto& b : m.at("genes")) g.blocks.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
            out.push_back(std::move(g));
        }
    } catch (const json::exception& e) {
        throw ConfigurationError(std::string("malformed front file: ") + e.what());
    }
    return out;
}

WaveField export_field(const Layout& layout, const Scenario& scenario, const fs::path& out) {
    fs::create_directories(out);
    const WaveField field = simulate_layout(layout, scenario);
    write_height_matrix(out / "heights.txt", field, scenario.grid);
    json existing = json::array();
    for (const auto& e : scenario.existing)
        existing.push_back({{"name", e.name}, {"material", to_string(e.structure.material)}, {"points", polyline_json(e.structure.vertices)}});
    json added = json::array();
    for (const auto& bw : layout.breakwaters)
        added.push_back({{"material", to_string(bw.material)}, {"points", polyline_json(bw.vertices)}});
    const json j = {{"n_cols", scenario.grid.n_cols()},
                    {"n_rows", scenario.grid.n_rows()},
                    {"cell_size", scenario.cell_size()},
                    {"existing", std::move(existing)},
                    {"new", std::move(added)},
                    {"fairway", polyline_json(scenario.fairway)},
                    {"control_points", polyline_json(scenario.control_points)},
                    {"control_heights", sample(field, scenario.control_points)}};
    write_text(out / "layout.json", j.dump(2) + "\n");
    return field;
}

void compute_metrics(ExperimentResult& result, const ExperimentPlan& plan, const ObjectiveSelection& selection) {
    std::vector<Point> all;
    for (const auto& r : result.runs)
        if (r.history) {
            auto pts = feasible_points(*r.history, selection);
            all.insert(all.end(), pts.begin(), pts.end());
        }
    result.reference = all.empty() ? Point{} : reference_point(all);
    for (auto& r : result.runs) {
        r.snapshots.clear();
        if (r.history && !result.reference.empty()) r.snapshots = cumulative_fronts(*r.history, selection, result.reference);
    }
    result.summary.clear();
    for (const auto& entry : plan.entries) {
        SummaryRow row;
        row.label = entry.label;
        row.algorithm = entry.algorithm;
        row.encoding = entry.config.encoding;
        row.greedy = entry.config.greedy;
        std::vector<double> finals, sizes;
        std::vector<std::vector<double>> at_checkpoint(plan.checkpoints.size());
        for (const auto& r : result.runs) {
            if (r.label != entry.label) continue;
            if (!r.history) {
                ++row.failed;
                continue;
            }
            ++row.runs;
            const auto& h = *r.history;
            row.model_runs_per_run = std::max(row.model_runs_per_run, h.last().model_runs);
            row.mask_violations += h.mask_violations;
            row.clamped_scores += h.clamped_scores;
            if (r.snapshots.empty()) {
                finals.push_back(0.0);
                sizes.push_back(0.0);
                for (auto& v : at_checkpoint) v.push_back(0.0);
                continue;
            }
            const auto& snaps = r.snapshots;
            finals.push_back(snaps.back().hypervolume);
            sizes.push_back(static_cast<double>(snaps.back().points.size()));
            for (std::size_t c = 0; c < plan.checkpoints.size(); ++c)
                at_checkpoint[c].push_back(snaps[std::min(plan.checkpoints[c], snaps.size() - 1)].hypervolume);
        }
        row.final_hypervolume = quartiles(finals);
        row.median_front_size = quartiles(sizes).median;
        for (auto& v : at_checkpoint) row.checkpoint_hypervolume.push_back(quartiles(std::move(v)));
        result.summary.push_back(std::move(row));
    }
}

void write_metrics(const fs::path& out, const ExperimentResult& result, const ExperimentPlan& plan,
                   const ObjectiveSelection& selection) {
    fs::create_directories(out);
    write_text(out / "reference_point.json",
               json({{"objectives", selection.describe()}, {"reference", result.reference}}).dump(2) + "\n");

    std::ostringstream s;
    std::vector<std::string> header{"label", "algorithm", "encoding", "greedy", "runs", "failed", "model_runs_per_run",
                                    "hv_final_median", "hv_final_iqr", "hv_final_min", "hv_final_max"};
    for (const auto c : plan.checkpoints) {
        header.push_back("hv_g" + std::to_string(c) + "_median");
        header.push_back("hv_g" + std::to_string(c) + "_iqr");
    }
    header.insert(header.end(), {"median_front_size", "mask_violations", "clamped_scores"});
    s << csv_join(header);
    for (const auto& row : result.summary) {
        std::vector<std::string> cells{row.label,
                                       to_string(row.algorithm),
                                       to_string(row.encoding),
                                       row.greedy ? "true" : "false",
                                       std::to_string(row.runs),
                                       std::to_string(row.failed),
                                       std::to_string(row.model_runs_per_run),
                                       format_double(row.final_hypervolume.median),
                                       format_double(row.final_hypervolume.iqr()),
                                       format_double(row.final_hypervolume.min),
                                       format_double(row.final_hypervolume.max)};
        for (const auto& q : row.checkpoint_hypervolume) {
            cells.push_back(format_double(q.median));
            cells.push_back(format_double(q.iqr()));
        }
        cells.push_back(format_double(row.median_front_size));
        cells.push_back(std::to_string(row.mask_violations));
        cells.push_back(std::to_string(row.clamped_scores));
        s << csv_join(cells);
    }
    write_text(out / "summary.csv", s.str());

    std::ostringstream f;
    f << "label,seed,message\n";
    for (const auto& fail : result.failures) {
        std::string msg = fail.message;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        f << fail.label << ',' << fail.seed << ',' << msg << '\n';
    }
    write_text(out / "failures.csv", f.str());

    if (result.reference.empty()) return;
    for (const auto& entry : plan.entries) {
        std::vector<std::vector<FrontSnapshot>> per_run;
        for (const auto& r : result.runs)
            if (r.label == entry.label && r.history) {
                per_run.push_back(r.snapshots);
                const auto dir = run_dir(out, r.label, r.seed);
                fs::create_directories(dir);
                write_snapshots(dir, r.snapshots);
            }
        const auto report = convergence_from_snapshots(per_run);
        fs::create_directories(out / entry.label);
        std::ostringstream c;
        c << "generation,model_runs,hv_min,hv_q1,hv_median,hv_q3,hv_max\n";
        for (const auto& row : report.rows)
            c << row.generation << ',' << row.model_runs << ',' << format_double(row.hypervolume.min) << ','
              << format_double(row.hypervolume.q1) << ',' << format_double(row.hypervolume.median) << ','
              << format_double(row.hypervolume.q3) << ',' << format_double(row.hypervolume.max) << '\n';
        write_text(out / entry.label / "convergence.csv", c.str());
        write_text(out / entry.label / "union_front.csv", points_csv(report.union_front));
    }
}

ExperimentResult run_experiment(const ExperimentPlan& plan, const Scenario& scenario, const std::optional<fs::path>& out) {
    ExperimentResult result;
    struct Job {
        const PlanEntry* entry;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (const auto& e : plan.entries)
        for (const auto seed : e.seeds) jobs.push_back({&e, seed});
    result.runs.resize(jobs.size());
    std::vector<std::string> errors(jobs.size());

    if (out) {
        fs::create_directories(*out);
        write_text(*out / "plan.json", plan_to_json_text(plan));
        write_text(*out / "scenario.json", scenario_to_json_text(scenario));
    }

    const auto work = [&](std::size_t i) {
        const Job& job = jobs[i];
        RunResult& r = result.runs[i];
        r.label = job.entry->label;
        r.seed = job.seed;
        try {
            EAConfig config = job.entry->config;
            config.seed = job.seed;
            r.history = run(job.entry->algorithm, config, scenario);
            if (out) write_run(run_dir(*out, r.label, r.seed), r.label, r.seed, *r.history, scenario);
        } catch (const std::exception& e) {
            r.history.reset();
            errors[i] = e.what();
        }
    };
    // the file exchange adapter shares one work directory, so it runs serially
    const bool shared_workdir = dynamic_cast<const FileExchangeWaveModel*>(scenario.wave_model.get()) != nullptr;
    const std::size_t workers = shared_workdir ? 1 : std::min(plan.parallel_runs, jobs.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) work(i);
    } else {
        std::mutex m;
        std::size_t next = 0;
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = 0;
                    {
                        std::lock_guard lock(m);
                        if (next >= jobs.size()) return;
                        i = next++;
                    }
                    work(i);
                }
            });
    }
    for (std::size_t i = 0; i < jobs.size(); ++i)
        if (!errors[i].empty()) result.failures.push_back({jobs[i].entry->label, jobs[i].seed, errors[i]});

    const auto selection = ObjectiveSelection::parse(plan.objectives);
    compute_metrics(result, plan, selection);
    if (out) write_metrics(*out, result, plan, selection);
    return result;
}

ExperimentResult load_results(const fs::path& dir, const ExperimentPlan& plan, const Scenario& scenario) {
    ExperimentResult result;
    for (const auto& entry : plan.entries) {
        for (const auto seed : entry.seeds) {
            RunResult r;
            r.label = entry.label;
            r.seed = seed;
            const fs::path rd = run_dir(dir, entry.label, seed);
            if (!fs::exists(rd / "history.csv")) {
                result.failures.push_back({entry.label, seed, "no stored history"});
                result.runs.push_back(std::move(r));
                continue;
            }
            const json run = json::parse(read_text(rd / "run.json"));
            ArchiveHistory h;
            h.algorithm = algorithm_from_string(run.at("algorithm").get<std::string>());
            h.config = entry.config;
            h.config.seed = seed;
            h.offspring_checked = run.value("offspring_checked", std::size_t{0});
            h.mask_violations = run.value("mask_violations", std::size_t{0});
            h.clamped_scores = run.value("clamped_scores", std::size_t{0});
            std::istringstream hist(read_text(rd / "history.csv"));
            std::string line;
            std::getline(hist, line);
            while (std::getline(hist, line)) {
                if (line.empty()) continue;
                const auto cells = csv_split(line);
                GenerationRecord rec;
                rec.generation = parse_size(cells.at(0));
                rec.model_runs = parse_size(cells.at(1));
                rec.simulations = parse_size(cells.at(2));
                rec.active_segment = parse_size(cells.at(3));
                rec.best_scalar = parse_double(cells.at(4));
                h.generations.push_back(std::move(rec));
            }
            const auto place = [&](const fs::path& file, bool archive) {
                std::istringstream in(read_text(file));
                for (auto& [gen, ind] : read_individuals_csv(in, entry.config.encoding)) {
                    if (gen >= h.generations.size()) throw std::runtime_error("individual from unknown generation in " + file.string());
                    (archive ? h.generations[gen].archive : h.generations[gen].population).push_back(std::move(ind));
                }
            };
            place(rd / "population.csv", false);
            place(rd / "archive.csv", true);
            if (h.generations.empty()) throw std::runtime_error("empty history in " + rd.string());
            for (const auto& rec : h.generations)
                for (const auto& ind : rec.population)
                    if (ind.genotype.blocks.size() != scenario.total_segments() ||
                        ind.objectives.wave_heights.size() != scenario.control_points.size())
                        throw std::runtime_error("stored run " + rd.string() + " does not match the scenario");
            r.history = std::move(h);
            result.runs.push_back(std::move(r));
        }
    }
    return result;
}

}  // namespace breakwater
