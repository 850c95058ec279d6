#include "breakwater/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

namespace breakwater {

std::string to_string(Algorithm a) { return a == Algorithm::SPEA2 ? "spea2" : "de"; }

Algorithm algorithm_from_string(const std::string& s) {
    if (s == "spea2" || s == "SPEA2") return Algorithm::SPEA2;
    if (s == "de" || s == "DE") return Algorithm::DE;
    throw ConfigurationError("unknown algorithm '" + s + "'");
}

void EAConfig::validate() const {
    const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (population_size < 2) throw ConfigurationError("population_size must be at least 2");
    if (archive_size < 2) throw ConfigurationError("archive_size must be at least 2");
    if (!in_unit(crossover_rate)) throw ConfigurationError("crossover_rate must lie in [0, 1]");
    if (!in_unit(mutation_rate)) throw ConfigurationError("mutation_rate must lie in [0, 1]");
    if (!(sigma.length > 0.0 && sigma.angle > 0.0 && sigma.cartesian > 0.0))
        throw ConfigurationError("mutation sigmas must be positive");
    if (generations_per_segment < 1) throw ConfigurationError("generations_per_segment must be at least 1");
    if (threads < 1) throw ConfigurationError("threads must be at least 1");
}

EvaluationError::EvaluationError(std::size_t gen, std::size_t ind, const std::string& what)
    : std::runtime_error("evaluation failed at generation " + std::to_string(gen) + ", individual " + std::to_string(ind) +
                         ": " + what),
      generation(gen), individual(ind) {}

namespace {

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::size_t uniform_index(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

bool coin(Rng& rng) { return std::bernoulli_distribution(0.5)(rng); }

double nearest(double v, const std::vector<double>& values) {
    double best = values.front();
    for (const double x : values)
        if (std::abs(x - v) < std::abs(best - v)) best = x;
    return best;
}

double nearest_angle(double v, const std::vector<double>& values) {
    const auto gap = [v](double a) { return std::abs(normalize_angle(a - v)); };
    double best = values.front();
    for (const double a : values)
        if (gap(a) < gap(best)) best = a;
    return best;
}

bool is_angle_gene(Encoding e, std::size_t gene) { return e == Encoding::Angular && gene % 2 == 1; }

double sigma_for(const EAConfig& config, Encoding e, std::size_t gene) {
    if (e == Encoding::Cartesian) return config.sigma.cartesian;
    return gene % 2 == 0 ? config.sigma.length : config.sigma.angle;
}

std::size_t mask_differences(const Genotype& child, const Genotype& parent, const GreedyMask& mask) {
    std::size_t n = 0;
    for (std::size_t b = 0; b < child.blocks.size(); ++b)
        if (!mask.allows(b) && !(child.blocks[b] == parent.blocks[b])) ++n;
    return n;
}

std::vector<ObjectiveVector> evaluate_all(const std::vector<Genotype>& genotypes, const Evaluator& evaluator, std::size_t threads,
                                          std::size_t generation) {
    std::vector<ObjectiveVector> out(genotypes.size());
    std::vector<std::exception_ptr> errors(genotypes.size());
    const auto work = [&](std::size_t begin, std::size_t step) {
        for (std::size_t i = begin; i < genotypes.size(); i += step) {
            try {
                out[i] = evaluator(genotypes[i]);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads <= 1 || genotypes.size() < 2) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        const std::size_t n = std::min(threads, genotypes.size());
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(work, t, n);
    }
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            throw EvaluationError(generation, i, e.what());
        }
    }
    return out;
}

Evaluator default_evaluator(const Scenario& scenario, const Evaluator& custom) {
    if (custom) return custom;
    return [&scenario](const Genotype& g) { return evaluate(g, scenario); };
}

std::size_t count_simulated(const std::vector<ObjectiveVector>& objs) {
    return static_cast<std::size_t>(std::count_if(objs.begin(), objs.end(), [](const auto& o) { return o.simulated; }));
}

}  // namespace

GeneBounds GeneBounds::from(const Scenario& scenario, Encoding encoding) {
    GeneBounds b;
    b.encoding = encoding;
    b.max_length = scenario.init.max_length;
    if (scenario.lattice) {
        if (encoding == Encoding::Cartesian) throw ConfigurationError("gene lattices apply to the angular encoding only");
        b.lattice = scenario.lattice;
    }
    for (std::size_t a = 0; a < scenario.attachments.size(); ++a)
        for (int s = 0; s < scenario.attachments[a].segments; ++s) b.boxes.push_back(scenario.cartesian_box(a, s));
    return b;
}

void GeneBounds::repair_block(Genotype& g, std::size_t block) const {
    auto& gene = g.blocks[block];
    if (encoding == Encoding::Cartesian) {
        const auto& [lo, hi] = boxes.at(block);
        gene.first = std::clamp(gene.first, lo.x, hi.x);
        gene.second = std::clamp(gene.second, lo.y, hi.y);
        return;
    }
    gene.first = std::clamp(gene.first, 0.0, max_length);
    gene.second = normalize_angle(gene.second);
    if (lattice) {
        gene.first = nearest(gene.first, lattice->lengths);
        gene.second = nearest_angle(gene.second, lattice->angles);
    }
}

Genotype random_genotype(const EAConfig& config, const Scenario& scenario, Rng& rng) {
    const auto bounds = GeneBounds::from(scenario, config.encoding);
    Genotype g{config.encoding, std::vector<SegmentGene>(scenario.total_segments())};
    for (std::size_t b = 0; b < g.blocks.size(); ++b) {
        if (config.encoding == Encoding::Angular) {
            g.blocks[b].first = uniform(rng, 0.0, scenario.init.max_length);
            g.blocks[b].second = uniform(rng, scenario.init.min_angle, scenario.init.max_angle);
        } else {
            const auto& [lo, hi] = bounds.boxes[b];
            g.blocks[b].first = uniform(rng, lo.x, hi.x);
            g.blocks[b].second = uniform(rng, lo.y, hi.y);
        }
        bounds.repair_block(g, b);
    }
    return g;
}

std::vector<Genotype> init_population(const EAConfig& config, const Scenario& scenario, Rng& rng) {
    std::vector<Genotype> pop;
    pop.reserve(config.population_size);
    for (std::size_t i = 0; i < config.population_size; ++i) {
        Genotype g = random_genotype(config, scenario, rng);
        for (int attempt = 0; attempt < scenario.init.retries; ++attempt) {
            if (constraint_counts(decode(g, scenario.attachments), scenario).total() == 0) break;
            g = random_genotype(config, scenario, rng);
        }
        pop.push_back(std::move(g));
    }
    return pop;
}

std::pair<Genotype, Genotype> crossover_at(const Genotype& a, const Genotype& b, std::size_t point) {
    if (a.blocks.size() != b.blocks.size()) throw ConfigurationError("crossover parents have different block counts");
    Genotype ca = a;
    Genotype cb = b;
    for (std::size_t i = point; i < a.blocks.size(); ++i) std::swap(ca.blocks[i], cb.blocks[i]);
    return {std::move(ca), std::move(cb)};
}

std::pair<Genotype, Genotype> crossover(const Genotype& a, const Genotype& b, const std::optional<GreedyMask>& mask, Rng& rng) {
    if (a.blocks.size() != b.blocks.size()) throw ConfigurationError("crossover parents have different block counts");
    if (mask) {
        Genotype ca = a;
        Genotype cb = b;
        std::swap(ca.blocks[mask->active], cb.blocks[mask->active]);
        return {std::move(ca), std::move(cb)};
    }
    const std::size_t n = a.blocks.size();
    if (n < 2) return {a, b};
    const std::size_t point = 1 + uniform_index(rng, n - 1);
    return crossover_at(a, b, point);
}

Genotype mutate(const Genotype& g, const std::optional<GreedyMask>& mask, const EAConfig& config, const GeneBounds& bounds,
                Rng& rng) {
    Genotype out = g;
    std::bernoulli_distribution pick(config.mutation_rate);
    for (std::size_t b = 0; b < out.blocks.size(); ++b) {
        if (mask && !mask->allows(b)) continue;
        bool touched = false;
        for (std::size_t k = 0; k < 2; ++k) {
            const std::size_t gene = 2 * b + k;
            if (!pick(rng)) continue;
            out.gene(gene) += std::normal_distribution<double>(0.0, sigma_for(config, g.encoding, gene))(rng);
            touched = true;
        }
        if (touched) bounds.repair_block(out, b);
    }
    return out;
}

bool dominates(std::span<const double> a, std::span<const double> b) {
    bool strictly = false;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] > b[k]) return false;
        if (a[k] < b[k]) strictly = true;
    }
    return strictly;
}

namespace {

double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

}  // namespace

Spea2Fitness spea2_fitness(std::span<const std::vector<double>> points) {
    const std::size_t n = points.size();
    Spea2Fitness f;
    f.strength.assign(n, 0.0);
    f.raw.assign(n, 0.0);
    f.density.assign(n, 0.0);
    f.fitness.assign(n, 0.0);
    std::vector<std::vector<char>> dom(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && dominates(points[i], points[j])) {
                dom[i][j] = 1;
                f.strength[i] += 1.0;
            }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (dom[j][i]) f.raw[i] += f.strength[j];

    const auto k = static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
    std::vector<double> d;
    for (std::size_t i = 0; i < n; ++i) {
        d.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) d.push_back(euclidean(points[i], points[j]));
        double sigma = 0.0;
        if (!d.empty()) {
            const std::size_t kth = std::min(std::max<std::size_t>(k, 1), d.size()) - 1;
            std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(kth), d.end());
            sigma = d[kth];
        }
        f.density[i] = 1.0 / (sigma + 2.0);
        f.fitness[i] = f.raw[i] + f.density[i];
    }
    return f;
}

std::vector<std::size_t> environmental_selection(std::span<const std::vector<double>> points, std::span<const double> fitness,
                                                 std::size_t archive_size, Rng& rng) {
    const std::size_t n = points.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::size_t> nondominated;
    std::vector<std::size_t> dominated;
    for (const std::size_t i : order) {
        bool is_dominated = false;
        for (std::size_t j = 0; j < n && !is_dominated; ++j) is_dominated = j != i && dominates(points[j], points[i]);
        (is_dominated ? dominated : nondominated).push_back(i);
    }

    if (nondominated.size() <= archive_size) {
        std::stable_sort(dominated.begin(), dominated.end(), [&](std::size_t a, std::size_t b) { return fitness[a] < fitness[b]; });
        std::vector<std::size_t> archive = nondominated;
        for (std::size_t i = 0; i < dominated.size() && archive.size() < archive_size; ++i) archive.push_back(dominated[i]);
        return archive;
    }

    // truncation: drop the member whose sorted neighbor distances are
    // lexicographically smallest until the archive fits
    std::vector<std::size_t> archive = nondominated;
    const std::size_t m = archive.size();
    std::vector<std::vector<double>> dist(m, std::vector<double>(m, 0.0));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a + 1; b < m; ++b) dist[a][b] = dist[b][a] = euclidean(points[archive[a]], points[archive[b]]);
    std::vector<std::size_t> alive(m);
    std::iota(alive.begin(), alive.end(), 0);
    while (alive.size() > archive_size) {
        std::vector<std::vector<double>> sorted(alive.size());
        for (std::size_t a = 0; a < alive.size(); ++a) {
            for (std::size_t b = 0; b < alive.size(); ++b)
                if (a != b) sorted[a].push_back(dist[alive[a]][alive[b]]);
            std::sort(sorted[a].begin(), sorted[a].end());
        }
        std::size_t victim = 0;
        for (std::size_t a = 1; a < alive.size(); ++a)
            if (sorted[a] < sorted[victim]) victim = a;
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(victim));
    }
    std::vector<std::size_t> out;
    out.reserve(alive.size());
    for (const std::size_t a : alive) out.push_back(archive[a]);
    return out;
}

std::size_t binary_tournament(std::span<const double> fitness, Rng& rng) {
    const std::size_t a = uniform_index(rng, fitness.size());
    const std::size_t b = uniform_index(rng, fitness.size());
    if (fitness[a] < fitness[b]) return a;
    if (fitness[b] < fitness[a]) return b;
    return coin(rng) ? a : b;
}

Genotype de_trial(const Genotype& target, const Genotype& r1, const Genotype& r2, const Genotype& r3, double weight,
                  double crossover_rate, std::size_t forced, const std::optional<GreedyMask>& mask, const GeneBounds& bounds,
                  Rng& rng) {
    Genotype trial = target;
    std::vector<char> touched(target.blocks.size(), 0);
    for (std::size_t gene = 0; gene < target.gene_count(); ++gene) {
        const std::size_t block = gene / 2;
        if (mask && !mask->allows(block)) continue;
        const bool take = gene == forced || std::uniform_real_distribution<double>(0.0, 1.0)(rng) < crossover_rate;
        if (!take) continue;
        double diff = r2.gene(gene) - r3.gene(gene);
        if (is_angle_gene(target.encoding, gene)) diff = normalize_angle(diff);
        trial.gene(gene) = r1.gene(gene) + weight * diff;
        touched[block] = 1;
    }
    for (std::size_t b = 0; b < trial.blocks.size(); ++b)
        if (touched[b]) bounds.repair_block(trial, b);
    return trial;
}

Individual make_individual(Genotype genotype, const ObjectiveVector& objectives, const Scenario& scenario,
                           const ScalarOptions& options) {
    Individual ind;
    ind.genotype = std::move(genotype);
    ind.objectives = objectives;
    const auto rel = relativize(objectives, scenario.baseline);
    ind.point = minimization_vector(rel, objectives.constraints);
    ind.scalar = single_objective(rel, objectives.constraints, options).value;
    ind.fitness = ind.scalar;
    return ind;
}

namespace {

struct Evaluated {
    std::vector<Individual> individuals;
    std::size_t simulations{0};
    std::size_t clamped{0};
};

Evaluated evaluate_generation(std::vector<Genotype> genotypes, const EAConfig& config, const Scenario& scenario,
                              const Evaluator& evaluator, std::size_t generation) {
    const auto objs = evaluate_all(genotypes, evaluator, config.threads, generation);
    Evaluated out;
    out.simulations = count_simulated(objs);
    out.individuals.reserve(genotypes.size());
    for (std::size_t i = 0; i < genotypes.size(); ++i) {
        const auto rel = relativize(objs[i], scenario.baseline);
        if (single_objective(rel, objs[i].constraints, config.scalar).denominator_clamped) ++out.clamped;
        out.individuals.push_back(make_individual(std::move(genotypes[i]), objs[i], scenario, config.scalar));
    }
    return out;
}

std::optional<GreedyMask> initial_mask(const EAConfig& config, const Scenario& scenario) {
    if (!config.greedy) return std::nullopt;
    return GreedyMask{0, scenario.total_segments()};
}

void advance_mask(std::optional<GreedyMask>& mask, const EAConfig& config, std::size_t generation) {
    if (mask && (generation + 1) % config.generations_per_segment == 0) mask->shift_right();
}

}  // namespace

ArchiveHistory run_spea2(const EAConfig& config, const Scenario& scenario, const Evaluator& custom) {
    config.validate();
    const Evaluator evaluator = default_evaluator(scenario, custom);
    const GeneBounds bounds = GeneBounds::from(scenario, config.encoding);
    Rng rng(config.seed);
    ArchiveHistory history;
    history.algorithm = Algorithm::SPEA2;
    history.config = config;

    auto mask = initial_mask(config, scenario);
    std::vector<Genotype> offspring = init_population(config, scenario, rng);
    std::vector<Individual> archive;
    std::size_t model_runs = 0;
    std::size_t simulations = 0;
    double best_scalar = std::numeric_limits<double>::infinity();
    const std::size_t budget = std::max<std::size_t>(config.generations, 1);
    std::size_t produced_with = 0;

    for (std::size_t gen = 0; gen < budget; ++gen) {
        auto evaluated = evaluate_generation(std::move(offspring), config, scenario, evaluator, gen);
        model_runs += evaluated.individuals.size();
        simulations += evaluated.simulations;
        history.clamped_scores += evaluated.clamped;

        std::vector<Individual> pool = archive;
        pool.insert(pool.end(), evaluated.individuals.begin(), evaluated.individuals.end());
        std::vector<std::vector<double>> points;
        points.reserve(pool.size());
        for (const auto& ind : pool) points.push_back(ind.point);
        const auto fit = spea2_fitness(points);
        for (std::size_t i = 0; i < pool.size(); ++i) pool[i].fitness = fit.fitness[i];

        std::vector<Individual> next_archive;
        for (const std::size_t i : environmental_selection(points, fit.fitness, config.archive_size, rng))
            next_archive.push_back(pool[i]);
        archive = std::move(next_archive);

        for (const auto& ind : evaluated.individuals) best_scalar = std::min(best_scalar, ind.scalar);
        GenerationRecord rec;
        rec.generation = gen;
        rec.model_runs = model_runs;
        rec.simulations = simulations;
        rec.active_segment = produced_with;
        rec.population = std::move(evaluated.individuals);
        rec.archive = archive;
        rec.best_scalar = best_scalar;
        history.generations.push_back(std::move(rec));
        if (gen + 1 == budget) break;

        std::vector<std::size_t> mating;
        mating.reserve(config.population_size);
        for (std::size_t i = 0; i < config.population_size; ++i) mating.push_back(binary_tournament(fit.fitness, rng));

        offspring.clear();
        produced_with = mask ? mask->active : 0;
        std::bernoulli_distribution do_crossover(config.crossover_rate);
        for (std::size_t i = 0; offspring.size() < config.population_size; i += 2) {
            const Genotype& pa = pool[mating[i % mating.size()]].genotype;
            const Genotype& pb = pool[mating[(i + 1) % mating.size()]].genotype;
            auto [ca, cb] = do_crossover(rng) ? crossover(pa, pb, mask, rng) : std::pair{pa, pb};
            ca = mutate(ca, mask, config, bounds, rng);
            cb = mutate(cb, mask, config, bounds, rng);
            if (mask) {
                history.offspring_checked += 2;
                history.mask_violations += mask_differences(ca, pa, *mask) > 0 ? 1 : 0;
                history.mask_violations += mask_differences(cb, pb, *mask) > 0 ? 1 : 0;
            }
            offspring.push_back(std::move(ca));
            if (offspring.size() < config.population_size) offspring.push_back(std::move(cb));
        }
        advance_mask(mask, config, gen);
    }
    return history;
}

ArchiveHistory run_de(const EAConfig& config, const Scenario& scenario, const Evaluator& custom) {
    config.validate();
    const Evaluator evaluator = default_evaluator(scenario, custom);
    const GeneBounds bounds = GeneBounds::from(scenario, config.encoding);
    Rng rng(config.seed);
    ArchiveHistory history;
    history.algorithm = Algorithm::DE;
    history.config = config;

    auto mask = initial_mask(config, scenario);
    const std::size_t n = config.population_size;
    auto evaluated = evaluate_generation(init_population(config, scenario, rng), config, scenario, evaluator, 0);
    std::vector<Individual> population = std::move(evaluated.individuals);
    std::size_t model_runs = population.size();
    std::size_t simulations = evaluated.simulations;
    history.clamped_scores += evaluated.clamped;
    double best_scalar = std::numeric_limits<double>::infinity();
    for (const auto& ind : population) best_scalar = std::min(best_scalar, ind.scalar);

    const auto record = [&](std::size_t gen, std::vector<Individual> evaluated_now, std::size_t produced_with) {
        GenerationRecord rec;
        rec.generation = gen;
        rec.model_runs = model_runs;
        rec.simulations = simulations;
        rec.active_segment = produced_with;
        rec.population = std::move(evaluated_now);
        rec.archive = population;
        rec.best_scalar = best_scalar;
        history.generations.push_back(std::move(rec));
    };
    record(0, population, 0);

    const std::size_t budget = std::max<std::size_t>(config.generations, 1);
    const auto distinct_draw = [&](std::size_t exclude, std::vector<std::size_t>& taken) {
        if (n < 4) return uniform_index(rng, n);
        for (;;) {
            const std::size_t r = uniform_index(rng, n);
            if (r != exclude && std::find(taken.begin(), taken.end(), r) == taken.end()) return r;
        }
    };

    for (std::size_t gen = 1; gen < budget; ++gen) {
        const std::size_t produced_with = mask ? mask->active : 0;
        std::vector<Genotype> trials;
        trials.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::size_t> taken;
            const std::size_t r1 = distinct_draw(i, taken);
            taken.push_back(r1);
            if (config.de_variation == DeVariation::GeneticOperators) {
                auto [child, unused] = crossover(population[i].genotype, population[r1].genotype, mask, rng);
                trials.push_back(mutate(child, mask, config, bounds, rng));
                continue;
            }
            const std::size_t r2 = distinct_draw(i, taken);
            taken.push_back(r2);
            const std::size_t r3 = distinct_draw(i, taken);
            std::size_t forced = 0;
            if (mask) {
                forced = 2 * mask->active + uniform_index(rng, 2);
            } else {
                forced = uniform_index(rng, population[i].genotype.gene_count());
            }
            trials.push_back(de_trial(population[i].genotype, population[r1].genotype, population[r2].genotype,
                                      population[r3].genotype, config.de_weight, config.crossover_rate, forced, mask, bounds,
                                      rng));
            if (mask) {
                history.offspring_checked += 1;
                history.mask_violations += mask_differences(trials.back(), population[i].genotype, *mask) > 0 ? 1 : 0;
            }
        }
        auto ev = evaluate_generation(std::move(trials), config, scenario, evaluator, gen);
        model_runs += ev.individuals.size();
        simulations += ev.simulations;
        history.clamped_scores += ev.clamped;
        for (std::size_t i = 0; i < n; ++i) {
            const Individual& trial = ev.individuals[i];
            const bool wins = trial.scalar < population[i].scalar || (trial.scalar == population[i].scalar && coin(rng));
            if (wins) population[i] = trial;
            best_scalar = std::min(best_scalar, trial.scalar);
        }
        record(gen, std::move(ev.individuals), produced_with);
        advance_mask(mask, config, gen - 1);
    }
    return history;
}

ArchiveHistory run(Algorithm algorithm, const EAConfig& config, const Scenario& scenario, const Evaluator& evaluator) {
    return algorithm == Algorithm::SPEA2 ? run_spea2(config, scenario, evaluator) : run_de(config, scenario, evaluator);
}

}  // namespace breakwater
