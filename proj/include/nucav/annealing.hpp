#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace nucav {

/// Reproducible RNG: mt19937_64 with explicit uniform/normal transforms so
/// streams are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform();  // [0, 1)
    double normal();   // Box-Muller

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Independent stream seed for run `index` of a computation seeded by `seed`.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index);

struct AnnealOptions {
    double visiting = 2.62;    // q_v
    double acceptance = -5.0;  // q_a
    double initial_temperature = 1.0;
    double final_temperature = 0.01;
    std::size_t init_samples = 20;
    double stagnation_fraction = 0.25;  // restart after this share of a cycle without improvement
    double polish_fraction = 0.1;       // share of the budget reserved for Nelder-Mead
    std::size_t budget = 2000;          // objective evaluations
    std::uint64_t seed = 0;
};

struct TracePoint {
    std::size_t evaluation = 0;
    double best = 0.0;
};

struct AnnealResult {
    std::vector<double> x;
    double fx = 0.0;
    std::size_t evaluations = 0;
    std::size_t restarts = 0;
    double best_initial = 0.0;    // lowest objective among the random initial samples
    std::vector<TracePoint> trace;  // best-so-far objective, non-increasing
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Minimize f over the box [lower, upper] by generalized simulated
/// annealing followed by a bounded Nelder-Mead polish of the best point.
/// `starts` are evaluated before the random initial samples.
AnnealResult anneal(const Objective& f, const std::vector<double>& lower, const std::vector<double>& upper,
                    const AnnealOptions& options, const std::vector<std::vector<double>>& starts = {});

/// Tsallis visiting step of one coordinate at temperature t.
double visiting_step(Rng& rng, double qv, double temperature);

}  // namespace nucav
