#include "nucav/annealing.hpp"

#include "nucav/constants.hpp"
#include "nucav/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace nucav {

using constants::pi;

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * pi * u2);
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 of the pair
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

double visiting_step(Rng& rng, double qv, double temperature) {
    const double factor2 = std::exp((4.0 - qv) * std::log(qv - 1.0));
    const double factor3 = std::exp((2.0 - qv) * std::log(2.0) / (qv - 1.0));
    const double factor4p = std::sqrt(pi) * factor2 / (factor3 * (3.0 - qv));
    const double factor5 = 1.0 / (qv - 1.0) - 0.5;
    const double d1 = 2.0 - factor5;
    const double factor6 = pi * (1.0 - factor5) / std::sin(pi * (1.0 - factor5)) / std::exp(std::lgamma(d1));
    const double factor4 = factor4p * std::exp(std::log(temperature) / (qv - 1.0));
    const double sigmax = std::exp(-(qv - 1.0) * std::log(factor6 / factor4) / (3.0 - qv));
    const double x = sigmax * rng.normal();
    const double y = rng.normal();
    const double den = std::exp((qv - 1.0) * std::log(std::abs(y)) / (3.0 - qv));
    double v = x / den;
    constexpr double tail = 1e8;
    if (!(v <= tail)) v = tail * rng.uniform();
    else if (!(v >= -tail)) v = -tail * rng.uniform();
    return v;
}

namespace {

double wrap_unit(double u) {
    double w = std::fmod(std::fmod(u, 1.0) + 1.0, 1.0);
    if (w < 1e-10) w += 1e-10;
    return w;
}

struct BudgetExhausted {};

class Search {
public:
    Search(const Objective& f, const std::vector<double>& lo, const std::vector<double>& hi, std::size_t budget)
        : f_(f), lo_(lo), hi_(hi), budget_(budget) {}

    std::vector<double> to_box(const std::vector<double>& u) const {
        std::vector<double> x(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) x[i] = lo_[i] + u[i] * (hi_[i] - lo_[i]);
        return x;
    }

    double eval(const std::vector<double>& u) {
        if (count_ >= budget_) throw BudgetExhausted{};
        const double v = f_(to_box(u));
        ++count_;
        if (count_ == 1 || v < best_f_) {
            best_f_ = v;
            best_u_ = u;
            trace_.push_back({count_, v});
        }
        return v;
    }

    std::size_t used() const { return count_; }
    std::size_t remaining() const { return budget_ - count_; }
    void set_budget(std::size_t b) { budget_ = b; }
    double best_f() const { return best_f_; }
    const std::vector<double>& best_u() const { return best_u_; }
    std::vector<TracePoint>& trace() { return trace_; }

private:
    const Objective& f_;
    const std::vector<double>& lo_;
    const std::vector<double>& hi_;
    std::size_t budget_;
    std::size_t count_ = 0;
    double best_f_ = 0.0;
    std::vector<double> best_u_;
    std::vector<TracePoint> trace_;
};

void nelder_mead(Search& s, std::vector<double> start, double start_f) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> pts{start};
    std::vector<double> fs{start_f};
    for (std::size_t i = 0; i < n; ++i) {
        auto p = start;
        p[i] = p[i] + 0.05 <= 1.0 ? p[i] + 0.05 : p[i] - 0.05;
        fs.push_back(s.eval(p));
        pts.push_back(std::move(p));
    }
    auto clamp = [](std::vector<double> p) {
        for (auto& v : p) v = std::clamp(v, 0.0, 1.0);
        return p;
    };
    auto combine = [&](const std::vector<double>& a, const std::vector<double>& b, double t) {
        std::vector<double> p(n);
        for (std::size_t i = 0; i < n; ++i) p[i] = a[i] + t * (b[i] - a[i]);
        return clamp(std::move(p));
    };
    std::vector<std::size_t> order(n + 1);
    for (;;) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
        double diameter = 0.0;
        for (std::size_t k = 0; k <= n; ++k)
            for (std::size_t i = 0; i < n; ++i) diameter = std::max(diameter, std::abs(pts[k][i] - pts[best][i]));
        if (diameter < 1e-9 || std::abs(fs[worst] - fs[best]) <= 1e-13 * (std::abs(fs[best]) + 1e-300)) return;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t k = 0; k <= n; ++k) {
            if (k == worst) continue;
            for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i] / static_cast<double>(n);
        }
        const auto xr = combine(centroid, pts[worst], -1.0);
        const double fr = s.eval(xr);
        if (fr < fs[best]) {
            const auto xe = combine(centroid, pts[worst], -2.0);
            const double fe = s.eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                fs[worst] = fe;
            } else {
                pts[worst] = xr;
                fs[worst] = fr;
            }
        } else if (fr < fs[second]) {
            pts[worst] = xr;
            fs[worst] = fr;
        } else {
            const bool outside = fr < fs[worst];
            const auto xc = outside ? combine(centroid, xr, 0.5) : combine(centroid, pts[worst], 0.5);
            const double fc = s.eval(xc);
            if (fc < (outside ? fr : fs[worst])) {
                pts[worst] = xc;
                fs[worst] = fc;
            } else {
                for (std::size_t k = 0; k <= n; ++k) {
                    if (k == best) continue;
                    pts[k] = combine(pts[best], pts[k], 0.5);
                    fs[k] = s.eval(pts[k]);
                }
            }
        }
    }
}

}  // namespace

AnnealResult anneal(const Objective& f, const std::vector<double>& lower, const std::vector<double>& upper,
                    const AnnealOptions& opt, const std::vector<std::vector<double>>& starts) {
    const std::size_t dim = lower.size();
    if (dim == 0 || upper.size() != dim) throw DomainError("anneal: bounds must be non-empty and of equal length");
    for (std::size_t i = 0; i < dim; ++i) {
        if (!(std::isfinite(lower[i]) && std::isfinite(upper[i]) && lower[i] < upper[i]))
            throw DomainError("anneal: bound " + std::to_string(i) + " is not a finite non-empty interval");
    }
    if (!(opt.visiting > 1.0 && opt.visiting < 3.0)) throw DomainError("anneal: visiting parameter must lie in (1, 3)");
    if (!(opt.acceptance < 1.0)) throw DomainError("anneal: acceptance parameter must be < 1");
    if (!(opt.final_temperature > 0.0 && opt.final_temperature < opt.initial_temperature))
        throw DomainError("anneal: need 0 < final temperature < initial temperature");
    if (opt.budget < 1) throw DomainError("anneal: budget must be >= 1");

    Rng rng(opt.seed);
    Search s(f, lower, upper, opt.budget);
    AnnealResult result;
    const auto polish_budget = static_cast<std::size_t>(opt.polish_fraction * static_cast<double>(opt.budget));
    s.set_budget(opt.budget - std::min(polish_budget, opt.budget - 1));

    std::vector<double> cur;
    double cur_f = 0.0;
    try {
        // Initial candidates: caller-supplied starts, then uniform samples.
        for (const auto& x : starts) {
            if (x.size() != dim) throw DomainError("anneal: start point has wrong dimension");
            std::vector<double> u(dim);
            for (std::size_t i = 0; i < dim; ++i) u[i] = std::clamp((x[i] - lower[i]) / (upper[i] - lower[i]), 0.0, 1.0);
            const double v = s.eval(u);
            if (cur.empty() || v < cur_f) cur = u, cur_f = v;
        }
        result.best_initial = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < std::max<std::size_t>(opt.init_samples, 1); ++k) {
            std::vector<double> u(dim);
            for (auto& v : u) v = rng.uniform();
            const double v = s.eval(u);
            result.best_initial = std::min(result.best_initial, v);
            if (cur.empty() || v < cur_f) cur = u, cur_f = v;
        }

        const double t0 = opt.initial_temperature;
        const double qa = opt.acceptance;
        for (;;) {
            if (s.remaining() < 2 * dim) break;
            // Geometric schedule spanning the remaining annealing budget.
            const std::size_t chains = std::max<std::size_t>(2, s.remaining() / (2 * dim));
            const double decay = std::pow(opt.final_temperature / t0, 1.0 / static_cast<double>(chains - 1));
            const auto patience =
                std::max<std::size_t>(2, static_cast<std::size_t>(opt.stagnation_fraction * static_cast<double>(chains)));
            double temp = t0;
            std::size_t since_improved = 0;
            bool restart = false;
            for (std::size_t step = 0; step < chains; ++step, temp *= decay) {
                const double best_before = s.best_f();
                const double temp_step = temp / static_cast<double>(step + 1);
                for (std::size_t j = 0; j < 2 * dim; ++j) {
                    std::vector<double> cand = cur;
                    if (j < dim) {
                        for (std::size_t i = 0; i < dim; ++i) cand[i] = wrap_unit(cur[i] + visiting_step(rng, opt.visiting, temp));
                    } else {
                        const std::size_t i = j - dim;
                        cand[i] = wrap_unit(cur[i] + visiting_step(rng, opt.visiting, temp));
                    }
                    const double v = s.eval(cand);
                    if (v < cur_f) {
                        cur = std::move(cand);
                        cur_f = v;
                    } else {
                        const double r = rng.uniform();
                        const double pqv_temp = 1.0 - (1.0 - qa) * (v - cur_f) / temp_step;
                        const double pqv = pqv_temp <= 0.0 ? 0.0 : std::exp(std::log(pqv_temp) / (1.0 - qa));
                        if (r <= pqv) {
                            cur = std::move(cand);
                            cur_f = v;
                        }
                    }
                }
                since_improved = s.best_f() < best_before ? 0 : since_improved + 1;
                if (since_improved >= patience && step + 1 < chains) {
                    restart = true;
                    break;
                }
            }
            if (!restart) {
                // Schedule completed; continue from the best point if budget remains.
                cur = s.best_u();
                cur_f = s.best_f();
                if (s.remaining() < 2 * dim) break;
            } else {
                std::vector<double> u(dim);
                for (auto& v : u) v = rng.uniform();
                cur_f = s.eval(u);
                cur = std::move(u);
            }
            ++result.restarts;
        }
    } catch (const BudgetExhausted&) {
    }

    s.set_budget(opt.budget);
    try {
        if (s.remaining() > dim) nelder_mead(s, s.best_u(), s.best_f());
    } catch (const BudgetExhausted&) {
    }

    result.x = s.to_box(s.best_u());
    result.fx = s.best_f();
    result.evaluations = s.used();
    result.trace = std::move(s.trace());
    return result;
}

}  // namespace nucav
