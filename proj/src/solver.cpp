#include "pairscore/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pairscore {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double smoothed_abs_curvature(double x, double eps) {
    const double s = std::hypot(x, eps);
    return (eps * eps) / (s * s * s);
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double e : v) m = std::max(m, std::abs(e));
    return m;
}

// The objective, parameterized by the smoothing width and by whether the
// global scores are variables (joint fit) or constants (non-verified fit).
class Objective {
public:
    Objective(const FitDataset& data, const Hyperparams& h, double eps,
              std::span<const double> frozen_rho = {})
        : data_(data), h_(h), eps_(eps), frozen_(frozen_rho) {}

    [[nodiscard]] std::size_t size() const {
        return frozen_.empty() ? data_.variable_count() : data_.theta_count();
    }
    void set_eps(double eps) { eps_ = eps; }

    [[nodiscard]] double rho(std::span<const double> x, std::size_t entity) const {
        return frozen_.empty() ? x[data_.rho_index(entity)] : frozen_[entity];
    }

    [[nodiscard]] double value(std::span<const double> x) const {
        double total = 0.0;
        for (const auto& t : data_.terms()) {
            total += t.confidence * softplus((x[t.a] - x[t.b]) * t.rating);
        }
        double coupling = 0.0;
        for (const auto& l : data_.links()) {
            coupling += l.weight * smoothed_abs(x[l.theta] - rho(x, l.entity), eps_);
        }
        total += h_.lambda * coupling;
        if (frozen_.empty()) {
            double reg = 0.0;
            for (std::size_t v = 0; v < data_.entities().size(); ++v) {
                const double r = x[data_.rho_index(v)];
                reg += r * r;
            }
            total += h_.nu * h_.lambda * reg;
        }
        return total;
    }

    void gradient(std::span<const double> x, std::span<double> g) const {
        std::fill(g.begin(), g.end(), 0.0);
        for (const auto& t : data_.terms()) {
            const double d = t.confidence * t.rating * sigmoid((x[t.a] - x[t.b]) * t.rating);
            g[t.a] += d;
            g[t.b] -= d;
        }
        for (const auto& l : data_.links()) {
            const double d =
                h_.lambda * l.weight * smoothed_abs_grad(x[l.theta] - rho(x, l.entity), eps_);
            g[l.theta] += d;
            if (frozen_.empty()) g[data_.rho_index(l.entity)] -= d;
        }
        if (frozen_.empty()) {
            for (std::size_t v = 0; v < data_.entities().size(); ++v) {
                const std::size_t i = data_.rho_index(v);
                g[i] += 2.0 * h_.nu * h_.lambda * x[i];
            }
        }
    }

    [[nodiscard]] Eigen::SparseMatrix<double> hessian(std::span<const double> x) const {
        using Triplet = Eigen::Triplet<double>;
        std::vector<Triplet> entries;
        entries.reserve(3 * data_.terms().size() + 3 * data_.links().size() +
                        data_.entities().size());
        const auto n = static_cast<Eigen::Index>(size());
        auto add = [&](std::size_t i, std::size_t j, double v) {
            // Lower triangle only; SimplicialLDLT reads it.
            if (i < j) std::swap(i, j);
            entries.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j), v);
        };
        for (const auto& t : data_.terms()) {
            const double s = sigmoid((x[t.a] - x[t.b]) * t.rating);
            const double c = t.confidence * t.rating * t.rating * s * (1.0 - s);
            add(t.a, t.a, c);
            add(t.b, t.b, c);
            add(t.a, t.b, -c);
        }
        for (const auto& l : data_.links()) {
            const double c = h_.lambda * l.weight *
                             smoothed_abs_curvature(x[l.theta] - rho(x, l.entity), eps_);
            add(l.theta, l.theta, c);
            if (frozen_.empty()) {
                const std::size_t r = data_.rho_index(l.entity);
                add(r, r, c);
                add(l.theta, r, -c);
            }
        }
        if (frozen_.empty()) {
            for (std::size_t v = 0; v < data_.entities().size(); ++v) {
                const std::size_t r = data_.rho_index(v);
                add(r, r, 2.0 * h_.nu * h_.lambda);
            }
        }
        Eigen::SparseMatrix<double> m(n, n);
        m.setFromTriplets(entries.begin(), entries.end());
        return m;
    }

private:
    const FitDataset& data_;
    const Hyperparams& h_;
    double eps_;
    std::span<const double> frozen_;
};

struct Minimizer {
    std::vector<double> x;
    FitDiagnostics diag;
};

// Damped Newton with Armijo backtracking. Returns false when the line search
// stalls before reaching tol.
bool newton_stage(const Objective& f, std::vector<double>& x, double tol, int& iters,
                  int max_iters) {
    const std::size_t n = x.size();
    std::vector<double> g(n), trial(n), g_trial(n);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool pattern_ready = false;
    while (true) {
        f.gradient(x, g);
        const double gnorm = max_abs(g);
        if (gnorm < tol) return true;
        if (iters >= max_iters) return false;

        const Eigen::SparseMatrix<double> hess = f.hessian(x);
        if (!pattern_ready) {
            ldlt.analyzePattern(hess);
            pattern_ready = true;
        }
        ldlt.factorize(hess);
        Eigen::Map<const Eigen::VectorXd> gv(g.data(), static_cast<Eigen::Index>(n));
        Eigen::VectorXd step;
        if (ldlt.info() == Eigen::Success) step = -ldlt.solve(gv);
        if (ldlt.info() != Eigen::Success || !step.allFinite() || step.dot(gv) >= 0.0) {
            step = -gv;
        }

        const double f0 = f.value(x);
        const double slope = step.dot(gv);
        double alpha = 1.0;
        bool accepted = false;
        while (alpha > 1e-18) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + alpha * step[static_cast<Eigen::Index>(i)];
            const double f1 = f.value(trial);
            if (f1 <= f0 + 1e-4 * alpha * slope) {
                accepted = true;
            } else if (f1 <= f0 + 1e-13 * std::max(1.0, std::abs(f0))) {
                // Near the optimum the decrease drowns in rounding; fall back to
                // progress in the gradient.
                f.gradient(trial, g_trial);
                accepted = max_abs(g_trial) < gnorm;
            }
            if (accepted) break;
            alpha *= 0.5;
        }
        ++iters;
        if (!accepted) return false;
        x.swap(trial);
    }
}

// Plain gradient descent with a step that is halved whenever the loss would increase.
bool gradient_descent(const Objective& f, std::vector<double>& x, double step, double tol,
                      int& iters, int max_iters) {
    const std::size_t n = x.size();
    std::vector<double> g(n), trial(n);
    double fx = f.value(x);
    while (true) {
        f.gradient(x, g);
        if (max_abs(g) < tol) return true;
        if (iters >= max_iters) return false;
        while (true) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] - step * g[i];
            const double f1 = f.value(trial);
            if (f1 <= fx) {
                fx = f1;
                break;
            }
            step *= 0.5;
            if (step < 1e-300) return false;
        }
        ++iters;
        x.swap(trial);
    }
}

Minimizer minimize(const FitDataset& data, const Hyperparams& h,
                   std::span<const double> frozen_rho) {
    Objective f(data, h, h.eps_abs, frozen_rho);
    Minimizer out;
    out.x.assign(f.size(), 0.0);
    int iters = 0;
    bool ok = true;
    if (h.method == SolverMethod::GradientDescent) {
        ok = gradient_descent(f, out.x, h.step_size, h.grad_tol, iters, h.max_iters);
    } else {
        // Warm-start through progressively sharper smoothing; the last stage
        // uses the requested width and tolerance.
        std::vector<double> widths;
        for (double e = 1e-1; e > h.eps_abs; e *= 0.1) widths.push_back(e);
        widths.push_back(h.eps_abs);
        for (std::size_t k = 0; k < widths.size(); ++k) {
            const bool last = k + 1 == widths.size();
            f.set_eps(widths[k]);
            const double tol = last ? h.grad_tol : std::max(h.grad_tol, 1e-6);
            ok = newton_stage(f, out.x, tol, iters, h.max_iters);
            if (!ok && !last && iters < h.max_iters) ok = true;  // stalled early stage; keep going
        }
    }
    f.set_eps(h.eps_abs);
    std::vector<double> g(out.x.size());
    f.gradient(out.x, g);
    out.diag.iterations = iters;
    out.diag.grad_norm = max_abs(g);
    out.diag.loss = f.value(out.x);
    out.diag.converged = ok && out.diag.grad_norm < h.grad_tol;
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// FitDataset

FitDataset FitDataset::build(std::vector<ContributorData> contributors,
                             std::vector<EntityId> universe, double c_weight) {
    if (!(c_weight > 0.0)) throw ValidationError("C must be positive");
    FitDataset d;
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
    d.entities_ = std::move(universe);
    d.entity_counts_.assign(d.entities_.size(), 0);

    std::sort(contributors.begin(), contributors.end(),
              [](const auto& l, const auto& r) { return l.contributor < r.contributor; });
    // Merge repeated blocks for the same contributor.
    std::vector<ContributorData> merged;
    for (auto& c : contributors) {
        if (!merged.empty() && merged.back().contributor == c.contributor) {
            auto& dst = merged.back().comparisons;
            dst.insert(dst.end(), std::make_move_iterator(c.comparisons.begin()),
                       std::make_move_iterator(c.comparisons.end()));
        } else {
            merged.push_back(std::move(c));
        }
    }

    d.link_begin_.push_back(0);
    d.term_begin_.push_back(0);
    for (const auto& c : merged) {
        struct Local {
            std::size_t a, b;
            double rating, confidence;
        };
        std::vector<Local> kept;
        std::map<std::size_t, std::int64_t> counts;
        for (const auto& cmp : c.comparisons) {
            if (!(cmp.confidence >= 0.0 && cmp.confidence <= 1.0)) {
                throw ValidationError("confidence factor outside [0, 1]");
            }
            RatingValue checked(cmp.rating);
            (void)checked;
            const std::size_t a = d.entity_index(cmp.entity_a);
            const std::size_t b = d.entity_index(cmp.entity_b);
            if (a == npos || b == npos) {
                throw ValidationError("comparison references an entity outside the universe");
            }
            if (a == b) throw ValidationError("an entity cannot be compared with itself");
            if (cmp.confidence == 0.0) continue;
            kept.push_back({a, b, cmp.rating, cmp.confidence});
            ++counts[a];
            ++counts[b];
        }
        std::map<std::size_t, std::size_t> var_of;
        for (const auto& [entity, count] : counts) {
            var_of[entity] = d.links_.size();
            d.links_.push_back({d.links_.size(), entity, comparison_weight(count, c_weight)});
        }
        for (const auto& k : kept) {
            d.terms_.push_back({var_of[k.a], var_of[k.b], k.rating, k.confidence});
            ++d.entity_counts_[k.a];
            ++d.entity_counts_[k.b];
        }
        d.contributors_.push_back(c.contributor);
        d.link_begin_.push_back(d.links_.size());
        d.term_begin_.push_back(d.terms_.size());
    }
    return d;
}

std::size_t FitDataset::entity_index(const EntityId& v) const {
    const auto it = std::lower_bound(entities_.begin(), entities_.end(), v);
    if (it == entities_.end() || *it != v) return npos;
    return static_cast<std::size_t>(it - entities_.begin());
}

std::size_t FitDataset::link_owner(std::size_t link) const {
    const auto it = std::upper_bound(link_begin_.begin(), link_begin_.end(), link);
    return static_cast<std::size_t>(it - link_begin_.begin()) - 1;
}

// ---------------------------------------------------------------------------
// Loss pieces

double bbt_loss(double t, RatingValue r) { return softplus(t * r.value()); }

double bbt_loss_grad(double t, RatingValue r) { return r.value() * sigmoid(t * r.value()); }

double smoothed_abs(double x, double eps) { return std::hypot(x, eps) - eps; }

double smoothed_abs_grad(double x, double eps) { return x / std::hypot(x, eps); }

double total_loss(const FitDataset& data, std::span<const double> x, const Hyperparams& h) {
    if (x.size() != data.variable_count()) {
        throw InvariantError("score vector does not match the dataset layout");
    }
    return Objective(data, h, h.eps_abs).value(x);
}

std::vector<double> total_loss_gradient(const FitDataset& data, std::span<const double> x,
                                        const Hyperparams& h) {
    if (x.size() != data.variable_count()) {
        throw InvariantError("score vector does not match the dataset layout");
    }
    std::vector<double> g(x.size());
    Objective(data, h, h.eps_abs).gradient(x, g);
    return g;
}

std::vector<double> pack_scores(const FitDataset& data, const ScoreBoard& board) {
    std::vector<double> x(data.variable_count(), 0.0);
    for (std::size_t n = 0; n < data.contributors().size(); ++n) {
        const auto [first, last] = data.contributor_links(n);
        if (first == last) continue;
        const auto it = board.theta.find(data.contributors()[n]);
        if (it == board.theta.end()) {
            throw InvariantError("missing individual scores for " + data.contributors()[n].value);
        }
        for (std::size_t l = first; l < last; ++l) {
            const auto& link = data.links()[l];
            const auto s = it->second.find(data.entities()[link.entity]);
            if (s == it->second.end()) {
                throw InvariantError("missing individual score for " +
                                     data.entities()[link.entity].value);
            }
            x[link.theta] = s->second;
        }
    }
    for (std::size_t v = 0; v < data.entities().size(); ++v) {
        const auto it = board.rho.find(data.entities()[v]);
        if (it == board.rho.end()) {
            throw InvariantError("missing global score for " + data.entities()[v].value);
        }
        x[data.rho_index(v)] = it->second;
    }
    return x;
}

double total_loss(const FitDataset& data, const ScoreBoard& board, const Hyperparams& h) {
    return total_loss(data, pack_scores(data, board), h);
}

std::vector<RhoForce> rho_forces(const FitDataset& data, std::span<const double> x,
                                 const Hyperparams& h) {
    std::vector<RhoForce> out;
    out.reserve(data.links().size());
    for (std::size_t l = 0; l < data.links().size(); ++l) {
        const auto& link = data.links()[l];
        const double diff = x[link.theta] - x[data.rho_index(link.entity)];
        out.push_back({data.link_owner(l), link.entity, link.weight,
                       -h.lambda * link.weight * smoothed_abs_grad(diff, h.eps_abs)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fitting

ScoreBoard fit(const FitDataset& data, const Hyperparams& h, Criterion criterion) {
    validate(h);
    const Minimizer m = minimize(data, h, {});
    ScoreBoard board;
    board.criterion = criterion;
    board.diagnostics = m.diag;
    for (std::size_t n = 0; n < data.contributors().size(); ++n) {
        const auto [first, last] = data.contributor_links(n);
        auto& scores = board.theta[data.contributors()[n]];
        for (std::size_t l = first; l < last; ++l) {
            const auto& link = data.links()[l];
            scores[data.entities()[link.entity]] = m.x[link.theta];
        }
    }
    for (std::size_t v = 0; v < data.entities().size(); ++v) {
        board.rho[data.entities()[v]] = m.x[data.rho_index(v)];
        board.comparison_counts[data.entities()[v]] = data.entity_comparison_counts()[v];
    }
    return board;
}

std::map<EntityId, double> fit_nonverified(const ContributorData& data, const ScoreBoard& globals,
                                           const Hyperparams& h, FitDiagnostics* diagnostics) {
    validate(h);
    std::vector<EntityId> universe;
    universe.reserve(globals.rho.size());
    for (const auto& [v, _] : globals.rho) universe.push_back(v);
    for (const auto& cmp : data.comparisons) {
        if (!globals.rho.contains(cmp.entity_a) || !globals.rho.contains(cmp.entity_b)) {
            throw ValidationError("comparison references an unknown entity");
        }
    }
    const FitDataset ds = FitDataset::build({data}, universe, h.c_weight);
    std::vector<double> frozen(ds.entities().size());
    for (std::size_t v = 0; v < ds.entities().size(); ++v) frozen[v] = globals.rho.at(ds.entities()[v]);

    const Minimizer m = minimize(ds, h, frozen);
    if (diagnostics) *diagnostics = m.diag;
    std::map<EntityId, double> theta;
    for (const auto& link : ds.links()) theta[ds.entities()[link.entity]] = m.x[link.theta];
    return theta;
}

}  // namespace pairscore
