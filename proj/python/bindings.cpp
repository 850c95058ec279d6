#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "breakwater/experiment.hpp"

namespace py = pybind11;
using namespace breakwater;

namespace {

Genotype to_genotype(const std::vector<std::pair<double, double>>& genes, const std::string& encoding) {
    Genotype g{encoding_from_string(encoding), {}};
    for (const auto& [a, b] : genes) g.blocks.push_back({a, b});
    return g;
}

std::vector<std::pair<double, double>> from_genotype(const Genotype& g) {
    std::vector<std::pair<double, double>> out;
    for (const auto& [a, b] : g.blocks) out.emplace_back(a, b);
    return out;
}

py::dict objectives_dict(const ObjectiveVector& o, const Scenario& s) {
    py::dict d;
    d["cost"] = o.cost;
    d["nav_distance"] = o.nav_distance;
    d["wave_heights"] = o.wave_heights;
    d["self_intersections"] = o.constraints.self_intersections;
    d["fairway_intersections"] = o.constraints.fairway_intersections;
    d["land_coverage"] = o.constraints.land_coverage;
    d["feasible"] = o.feasible();
    d["simulated"] = o.simulated;
    const auto rel = relativize(o, s.baseline);
    d["rel_cost"] = rel.rel_cost;
    d["rel_nav"] = rel.rel_nav;
    d["rel_wave_heights"] = rel.rel_wave_heights;
    d["score"] = single_objective(rel, o.constraints).value;
    d["point"] = minimization_vector(rel, o.constraints);
    return d;
}

// rows x cols array, row 0 first
py::array_t<double> field_array(const WaveField& f) {
    py::array_t<double> out({f.n_rows(), f.n_cols()});
    auto view = out.mutable_unchecked<2>();
    for (int r = 0; r < f.n_rows(); ++r)
        for (int c = 0; c < f.n_cols(); ++c) view(r, c) = f.at({c, r});
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Breakwater layout optimization core";

    static py::exception<ValidationError> validation_error(m, "ValidationError", PyExc_ValueError);
    static py::exception<ConfigurationError> configuration_error(m, "ConfigurationError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ValidationError& e) {
            py::set_error(validation_error, e.what());
        } catch (const ConfigurationError& e) {
            py::set_error(configuration_error, e.what());
        }
    });

    py::class_<Baseline>(m, "Baseline")
        .def_readonly("cost_reference", &Baseline::cost_reference)
        .def_readonly("nav_distance", &Baseline::nav_distance)
        .def_readonly("wave_heights", &Baseline::wave_heights);

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("name", &Scenario::name)
        .def_readonly("baseline", &Scenario::baseline)
        .def_property_readonly("n_cols", [](const Scenario& s) { return s.grid.n_cols(); })
        .def_property_readonly("n_rows", [](const Scenario& s) { return s.grid.n_rows(); })
        .def_property_readonly("cell_size", &Scenario::cell_size)
        .def_property_readonly("total_segments", &Scenario::total_segments)
        .def_property_readonly("control_points",
                               [](const Scenario& s) {
                                   std::vector<std::pair<double, double>> out;
                                   for (const auto& p : s.control_points) out.emplace_back(p.x, p.y);
                                   return out;
                               })
        .def("to_json", &scenario_to_json_text);

    m.def("load_scenario", [](const std::filesystem::path& p) { return load_scenario(p); }, py::arg("path"));
    m.def("scenario_from_json", [](const std::string& text) { return scenario_from_json_text(text); }, py::arg("text"));

    m.def(
        "evaluate",
        [](const Scenario& s, const std::vector<std::pair<double, double>>& genes, const std::string& encoding) {
            return objectives_dict(evaluate(to_genotype(genes, encoding), s), s);
        },
        py::arg("scenario"), py::arg("genes"), py::arg("encoding") = "angular",
        "Objectives of one genotype given as (length, angle) or (x, y) pairs per segment.");

    m.def(
        "wave_field",
        [](const Scenario& s, const std::vector<std::pair<double, double>>& genes, const std::string& encoding) {
            const Layout layout = genes.empty() ? Layout{} : decode(to_genotype(genes, encoding), s.attachments);
            return field_array(simulate_layout(layout, s));
        },
        py::arg("scenario"), py::arg("genes") = std::vector<std::pair<double, double>>{}, py::arg("encoding") = "angular",
        "Wave-height field (rows x cols) with the layout added; no genes gives the baseline field.");

    m.def(
        "convert",
        [](const Scenario& s, const std::vector<std::pair<double, double>>& genes, const std::string& from, const std::string& to) {
            return from_genotype(convert(to_genotype(genes, from), encoding_from_string(to), s.attachments));
        },
        py::arg("scenario"), py::arg("genes"), py::arg("source"), py::arg("target"));

    py::class_<EAConfig>(m, "EAConfig")
        .def(py::init<>())
        .def_readwrite("population_size", &EAConfig::population_size)
        .def_readwrite("archive_size", &EAConfig::archive_size)
        .def_readwrite("generations", &EAConfig::generations)
        .def_readwrite("crossover_rate", &EAConfig::crossover_rate)
        .def_readwrite("mutation_rate", &EAConfig::mutation_rate)
        .def_readwrite("greedy", &EAConfig::greedy)
        .def_readwrite("generations_per_segment", &EAConfig::generations_per_segment)
        .def_readwrite("seed", &EAConfig::seed)
        .def_readwrite("de_weight", &EAConfig::de_weight)
        .def_property(
            "encoding", [](const EAConfig& c) { return to_string(c.encoding); },
            [](EAConfig& c, const std::string& e) { c.encoding = encoding_from_string(e); })
        .def_property(
            "sigma_length", [](const EAConfig& c) { return c.sigma.length; }, [](EAConfig& c, double v) { c.sigma.length = v; })
        .def_property(
            "sigma_angle", [](const EAConfig& c) { return c.sigma.angle; }, [](EAConfig& c, double v) { c.sigma.angle = v; })
        .def_property(
            "sigma_cartesian", [](const EAConfig& c) { return c.sigma.cartesian; },
            [](EAConfig& c, double v) { c.sigma.cartesian = v; });

    py::class_<Individual>(m, "Individual")
        .def_property_readonly("genes", [](const Individual& i) { return from_genotype(i.genotype); })
        .def_readonly("point", &Individual::point)
        .def_readonly("scalar", &Individual::scalar)
        .def_readonly("fitness", &Individual::fitness)
        .def_property_readonly("feasible", [](const Individual& i) { return i.objectives.feasible(); })
        .def_property_readonly("cost", [](const Individual& i) { return i.objectives.cost; })
        .def_property_readonly("wave_heights", [](const Individual& i) { return i.objectives.wave_heights; });

    py::class_<ArchiveHistory>(m, "History")
        .def_property_readonly("generations", [](const ArchiveHistory& h) { return h.generations.size(); })
        .def_property_readonly("model_runs", [](const ArchiveHistory& h) { return h.last().model_runs; })
        .def_readonly("mask_violations", &ArchiveHistory::mask_violations)
        .def("population", [](const ArchiveHistory& h, std::size_t g) { return h.generations.at(g).population; }, py::arg("generation"))
        .def("archive", [](const ArchiveHistory& h, std::size_t g) { return h.generations.at(g).archive; }, py::arg("generation"))
        .def("best_scalar", [](const ArchiveHistory& h) {
            std::vector<double> out;
            for (const auto& g : h.generations) out.push_back(g.best_scalar);
            return out;
        })
        .def("front", &final_front, "Nondominated feasible individuals evaluated during the run.");

    m.def(
        "optimize",
        [](const Scenario& s, const std::string& algorithm, const EAConfig& config) {
            py::gil_scoped_release release;
            return run(algorithm_from_string(algorithm), config, s);
        },
        py::arg("scenario"), py::arg("algorithm") = "spea2", py::arg("config") = EAConfig{});

    m.def(
        "hypervolume", [](const std::vector<Point>& pts, const Point& ref) { return hypervolume(pts, ref); }, py::arg("points"),
        py::arg("reference"));
    m.def("nondominated", [](const std::vector<Point>& pts) { return nondominated(pts); }, py::arg("points"));
    m.def(
        "reference_point", [](const std::vector<Point>& pts, double margin) { return reference_point(pts, margin); },
        py::arg("points"), py::arg("margin") = 0.1);
}
