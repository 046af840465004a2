#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the solver's objective code; every formula is restated directly.

#include "pairscore/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace pairscore::testing {

/// Minimizes a convex scalar function on [lo, hi] by ternary search.
inline double ternary_min(const std::function<double(double)>& f, double lo, double hi,
                          int rounds = 100) {
    for (int i = 0; i < rounds; ++i) {
        const double m1 = lo + (hi - lo) / 3.0;
        const double m2 = hi - (hi - lo) / 3.0;
        if (f(m1) <= f(m2)) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    return f(0.5 * (lo + hi));
}

inline double ref_bt(double t, double r) { return std::log(1.0 + std::exp(t * r)); }

/// Exact (non-smoothed) objective of the single-comparison instance.
/// Entities a, b; one contributor; rating r with full confidence.
struct TwoEntityInstance {
    double rating = 1.0;
    double lambda = 1.0;
    double nu = 1.0;
    double c_weight = 3.0;

    [[nodiscard]] double weight() const { return 1.0 / (c_weight + 1.0); }
};

/// Nested scalar minimization over (theta_a, theta_b, rho_a, rho_b) on [-3, 3].
inline double brute_force_two_entity_loss(const TwoEntityInstance& in) {
    const double w = in.weight();
    auto rho_part = [&](double theta) {
        return ternary_min(
            [&](double rho) {
                return in.lambda * w * std::abs(theta - rho) + in.nu * in.lambda * rho * rho;
            },
            -3.0, 3.0);
    };
    return ternary_min(
        [&](double ta) {
            return ternary_min(
                [&](double tb) { return ref_bt(ta - tb, in.rating) + rho_part(ta) + rho_part(tb); },
                -3.0, 3.0);
        },
        -3.0, 3.0);
}

/// Non-verified variant: globals frozen at rho_a, rho_b; only the individual
/// scores move. Returns the minimal loss.
inline double brute_force_nonverified_loss(double rating, double rho_a, double rho_b,
                                           double lambda = 1.0, double c_weight = 3.0) {
    const double w = 1.0 / (c_weight + 1.0);
    return ternary_min(
        [&](double ta) {
            return ternary_min(
                [&](double tb) {
                    return ref_bt(ta - tb, rating) +
                           lambda * w * (std::abs(ta - rho_a) + std::abs(tb - rho_b));
                },
                -3.0, 3.0);
        },
        -3.0, 3.0);
}

/// Central finite-difference gradient.
inline std::vector<double> central_differences(const std::function<double(std::span<const double>)>& f,
                                               std::vector<double> x, double step = 1e-6) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + step;
        const double up = f(x);
        x[i] = x0 - step;
        const double down = f(x);
        x[i] = x0;
        g[i] = (up - down) / (2.0 * step);
    }
    return g;
}

/// Weighted median: the smallest value whose cumulative weight reaches half.
inline double weighted_median(std::vector<std::pair<double, double>> value_weight) {
    std::sort(value_weight.begin(), value_weight.end());
    double total = 0.0;
    for (const auto& [_, w] : value_weight) total += w;
    double acc = 0.0;
    for (const auto& [v, w] : value_weight) {
        acc += w;
        if (acc >= 0.5 * total) return v;
    }
    return value_weight.back().first;
}

struct RandomInstance {
    std::vector<ContributorData> contributors;
    std::vector<EntityId> universe;
};

/// Up to max_contributors contributors over up to max_entities entities with at
/// most max_comparisons comparisons in total.
inline RandomInstance random_instance(std::mt19937_64& rng, int max_contributors = 5,
                                      int max_entities = 6, int max_comparisons = 20) {
    std::uniform_int_distribution<int> n_dist(1, max_contributors);
    std::uniform_int_distribution<int> v_dist(2, max_entities);
    std::uniform_int_distribution<int> c_dist(1, max_comparisons);
    std::uniform_int_distribution<int> slider(0, 100);
    std::uniform_int_distribution<int> conf(1, 3);

    RandomInstance out;
    const int n = n_dist(rng);
    const int v = v_dist(rng);
    const int c = c_dist(rng);
    for (int i = 0; i < v; ++i) out.universe.push_back(EntityId{"e" + std::to_string(i)});
    for (int i = 0; i < n; ++i) out.contributors.push_back({ContributorId{"c" + std::to_string(i)}, {}});
    std::uniform_int_distribution<int> pick_n(0, n - 1);
    std::uniform_int_distribution<int> pick_v(0, v - 1);
    for (int k = 0; k < c; ++k) {
        const int a = pick_v(rng);
        int b = pick_v(rng);
        while (b == a) b = pick_v(rng);
        out.contributors[pick_n(rng)].comparisons.push_back(
            {out.universe[a], out.universe[b], (slider(rng) - 50) / 50.0, conf(rng) / 3.0});
    }
    return out;
}

}  // namespace pairscore::testing
