#include "pdn/baseline/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "pdn/error.hpp"

namespace pdn::baseline {

namespace {

// Budget-aware evaluation with best-so-far bookkeeping.
class Tracker {
public:
    Tracker(const Floorplan& fp, const CostFn& cost, long budget)
        : fp_(&fp), cost_(&cost), budget_(budget) {}

    [[nodiscard]] bool exhausted() const { return res.evaluations >= budget_; }

    double operator()(const std::vector<int>& genome) {
        DecapLayout l = decode_genome(*fp_, genome);
        const double c = (*cost_)(l);
        ++res.evaluations;
        if (res.history.empty() || c < res.best_cost) {
            res.best_cost = c;
            res.best_layout = std::move(l);
        }
        res.history.push_back(res.best_cost);
        return c;
    }

    BaselineResult res;

private:
    const Floorplan* fp_;
    const CostFn* cost_;
    long budget_;
};

std::vector<char> feasibility(const Floorplan& fp) {
    std::vector<char> ok;
    for (const UdcSite& s : all_sites(fp)) {
        const int v = s.chiplet < 0 ? fp.interposer_space[s.at]
                                    : fp.chiplets[static_cast<std::size_t>(s.chiplet)].space[s.at];
        ok.push_back(v != 0 ? 1 : 0);
    }
    return ok;
}

}  // namespace

void BaselineConfig::validate() const {
    if (budget <= 0) throw InvalidArgument("baseline budget must be positive");
    auto rate = [](double r, const char* what) {
        if (!(r >= 0.0 && r <= 1.0)) throw InvalidArgument(fmt::format("{} must lie in [0, 1], got {}", what, r));
    };
    rate(ga.crossover, "crossover rate");
    rate(ga.mutation, "mutation rate");
    if (ga.population < 2) throw InvalidArgument("GA population must be at least 2");
    if (ga.tournament < 1) throw InvalidArgument("tournament size must be positive");
    if (ga.elite < 0 || ga.elite >= ga.population) throw InvalidArgument("elite count must be below the population");
    if (!(da.initial_temp >= 0.0)) throw InvalidArgument("initial temperature must be non-negative");
    if (!(da.visit > 1.0 && da.visit < 3.0)) throw InvalidArgument("visiting parameter must lie in (1, 3)");
    if (!(da.accept < 1.0)) throw InvalidArgument("acceptance parameter must be below 1");
}

std::vector<int> encode_genome(const Floorplan& fp, const DecapLayout& layout) {
    std::vector<int> g;
    for (const UdcSite& s : all_sites(fp)) g.push_back(level_at(layout, s));
    return g;
}

DecapLayout decode_genome(const Floorplan& fp, const std::vector<int>& genome) {
    const auto sites = all_sites(fp);
    if (genome.size() != sites.size()) {
        throw InvalidArgument(fmt::format("genome length {} does not match {} UDCs", genome.size(), sites.size()));
    }
    const auto ok = feasibility(fp);
    DecapLayout l = DecapLayout::empty_for(fp);
    for (std::size_t i = 0; i < sites.size(); ++i) {
        level_at(l, sites[i]) = ok[i] ? std::clamp(genome[i], 0, kMaxLevel) : 0;
    }
    return l;
}

BaselineResult ga_optimize(const Floorplan& fp, const CostFn& cost, const BaselineConfig& config) {
    config.validate();
    const GaConfig& ga = config.ga;
    const auto ok = feasibility(fp);
    const std::size_t n = ok.size();
    std::mt19937_64 rng(config.seed);
    std::uniform_int_distribution<int> level(0, kMaxLevel);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> pick(0, ga.population - 1);
    Tracker eval(fp, cost, config.budget);

    struct Individual {
        std::vector<int> genes;
        double cost = 0.0;
    };
    auto random_genome = [&] {
        std::vector<int> g(n, 0);
        for (std::size_t i = 0; i < n; ++i) g[i] = ok[i] ? level(rng) : 0;
        return g;
    };

    std::vector<Individual> pop;
    for (int i = 0; i < ga.population && !eval.exhausted(); ++i) {
        Individual ind{random_genome(), 0.0};
        ind.cost = eval(ind.genes);
        pop.push_back(std::move(ind));
    }
    auto by_cost = [](const Individual& a, const Individual& b) { return a.cost < b.cost; };

    while (!eval.exhausted()) {
        std::stable_sort(pop.begin(), pop.end(), by_cost);
        auto tournament = [&]() -> const Individual& {
            int best = pick(rng);
            for (int k = 1; k < ga.tournament; ++k) {
                const int c = pick(rng);
                if (pop[static_cast<std::size_t>(c)].cost < pop[static_cast<std::size_t>(best)].cost) best = c;
            }
            return pop[static_cast<std::size_t>(best)];
        };
        std::vector<Individual> next(pop.begin(), pop.begin() + ga.elite);
        while (static_cast<int>(next.size()) < ga.population && !eval.exhausted()) {
            const Individual& a = tournament();
            const Individual& b = tournament();
            std::vector<int> child = a.genes;
            if (u(rng) < ga.crossover) {
                for (std::size_t i = 0; i < n; ++i) {
                    if (u(rng) < 0.5) child[i] = b.genes[i];
                }
            }
            for (std::size_t i = 0; i < n; ++i) {
                if (u(rng) < ga.mutation) child[i] = level(rng);
                if (!ok[i]) child[i] = 0;
            }
            const double c = eval(child);
            next.push_back({std::move(child), c});
        }
        if (static_cast<int>(next.size()) < ga.population) break;
        pop = std::move(next);
    }
    return std::move(eval.res);
}

namespace {

// Tsallis visiting distribution of generalized simulated annealing.
class Visiting {
public:
    Visiting(double qv, std::mt19937_64& rng) : qv_(qv), rng_(&rng) {
        const double f2 = std::exp((4.0 - qv) * std::log(qv - 1.0));
        const double f3 = std::exp((2.0 - qv) * std::log(2.0) / (qv - 1.0));
        f4p_ = std::sqrt(std::numbers::pi) * f2 / (f3 * (3.0 - qv));
        const double f5 = 1.0 / (qv - 1.0) - 0.5;
        const double d1 = 2.0 - f5;
        f6_ = std::numbers::pi * (1.0 - f5) / std::sin(std::numbers::pi * (1.0 - f5)) / std::exp(std::lgamma(d1));
    }

    double draw(double temperature) {
        const double x = normal_(*rng_);
        const double y = normal_(*rng_);
        const double f1 = std::exp(std::log(temperature) / (qv_ - 1.0));
        const double f4 = f4p_ * f1;
        const double sx = x * std::exp(-(qv_ - 1.0) * std::log(f6_ / f4) / (3.0 - qv_));
        const double den = std::exp((qv_ - 1.0) * std::log(std::abs(y)) / (3.0 - qv_));
        double v = sx / den;
        if (!std::isfinite(v) || std::abs(v) > kTail) {
            const double s = std::isnan(v) ? 1.0 : (v < 0 ? -1.0 : 1.0);
            v = s * kTail * uniform_(*rng_);
        }
        return v;
    }

private:
    static constexpr double kTail = 1e8;
    double qv_;
    double f4p_ = 0.0, f6_ = 0.0;
    std::mt19937_64* rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

constexpr double kLower = -0.5;
constexpr double kUpper = kMaxLevel + 0.5;

double wrap(double x) {
    const double range = kUpper - kLower;
    const double a = std::fmod(x - kLower, range) + range;
    double w = std::fmod(a, range) + kLower;
    if (std::abs(w - kLower) < 1e-10) w += 1e-10;
    return w;
}

int round_level(double x) { return std::clamp(static_cast<int>(std::lround(x)), 0, kMaxLevel); }

}  // namespace

BaselineResult da_optimize(const Floorplan& fp, const CostFn& cost, const BaselineConfig& config) {
    config.validate();
    const DaConfig& da = config.da;
    const auto ok = feasibility(fp);
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < ok.size(); ++i) {
        if (ok[i]) free.push_back(i);
    }
    if (free.empty()) throw InvalidArgument("floorplan has no feasible UDC");
    const std::size_t dim = free.size();

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Visiting visiting(da.visit, rng);
    Tracker eval(fp, cost, config.budget);

    auto genome_of = [&](const std::vector<double>& x) {
        std::vector<int> g(ok.size(), 0);
        for (std::size_t k = 0; k < dim; ++k) g[free[k]] = round_level(x[k]);
        return g;
    };
    auto energy = [&](const std::vector<double>& x) {
        const double e = eval(genome_of(x));
        return e;
    };
    auto record_current = [&](double e) { eval.res.current.push_back(e); };

    std::vector<double> cur(dim), best_x;
    double cur_e = 0.0, best_e = 0.0;
    auto restart = [&] {
        for (double& v : cur) v = kLower + u(rng) * (kUpper - kLower);
        cur_e = energy(cur);
        record_current(cur_e);
        if (best_x.empty() || cur_e < best_e) {
            best_e = cur_e;
            best_x = cur;
        }
    };

    // +-1 coordinate descent on the rounded levels, first improvement.
    auto local_search = [&] {
        std::vector<double> x = best_x;
        for (double& v : x) v = round_level(v);
        double e = best_e;
        bool improved = true;
        while (improved && !eval.exhausted()) {
            improved = false;
            for (std::size_t k = 0; k < dim && !eval.exhausted(); ++k) {
                for (int step : {-1, 1}) {
                    const double nv = x[k] + step;
                    if (nv < 0 || nv > kMaxLevel || eval.exhausted()) continue;
                    std::vector<double> y = x;
                    y[k] = nv;
                    const double ye = energy(y);
                    record_current(cur_e);
                    if (ye < e) {
                        x = std::move(y);
                        e = ye;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if (e < best_e) {
            best_e = e;
            best_x = x;
        }
        if (e < cur_e) {
            cur = x;
            cur_e = e;
        }
    };

    const double qv = da.visit;
    const double qa = da.accept;
    const double t1 = std::exp((qv - 1.0) * std::log(2.0)) - 1.0;
    const double t_restart = da.initial_temp * da.restart_temp_ratio;

    if (!eval.exhausted()) restart();
    while (!eval.exhausted()) {
        for (long i = 0; !eval.exhausted(); ++i) {
            const double s = static_cast<double>(i) + 2.0;
            const double t2 = std::exp((qv - 1.0) * std::log(s)) - 1.0;
            const double temp = da.initial_temp * t1 / t2;
            if (da.initial_temp > 0.0 && temp < t_restart) {
                restart();
                break;
            }
            const double t_step = temp / (static_cast<double>(i) + 1.0);
            // The first chain of a run counts as improving so its start gets polished.
            bool improved = i == 0;
            for (std::size_t j = 0; j < 2 * dim && !eval.exhausted(); ++j) {
                std::vector<double> x = cur;
                if (j < dim) {
                    for (std::size_t k = 0; k < dim; ++k) x[k] = wrap(cur[k] + visiting.draw(temp));
                } else {
                    const std::size_t k = j - dim;
                    x[k] = wrap(cur[k] + visiting.draw(temp));
                }
                const double e = energy(x);
                bool accept = e < cur_e;
                if (!accept) {
                    const double r = u(rng);
                    if (t_step > 0.0) {
                        const double p = 1.0 - (1.0 - qa) * (e - cur_e) / t_step;
                        const double pqv = p <= 0.0 ? 0.0 : std::exp(std::log(p) / (1.0 - qa));
                        accept = pqv > 0.0 && r <= pqv;
                    } else {
                        accept = e <= cur_e;
                    }
                }
                if (accept) {
                    cur = std::move(x);
                    cur_e = e;
                    if (cur_e < best_e) {
                        best_e = cur_e;
                        best_x = cur;
                        improved = true;
                    }
                }
                record_current(cur_e);
            }
            if (da.local_search && improved && !eval.exhausted()) local_search();
        }
    }
    return std::move(eval.res);
}

BaselineResult optimize(const Floorplan& fp, const CostFn& cost, const BaselineConfig& config) {
    return config.method == Method::GA ? ga_optimize(fp, cost, config) : da_optimize(fp, cost, config);
}

CostFn freq_cost(rl::FreqEvaluator& evaluator) {
    return [&evaluator](const DecapLayout& l) { return -evaluator.evaluate(l).reward; };
}

}  // namespace pdn::baseline
