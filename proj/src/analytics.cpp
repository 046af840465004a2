#include "pairscore/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace pairscore {

std::map<ContributorId, int> contribution_counts(std::span<const Comparison> comparisons) {
    std::map<ContributorId, int> out;
    for (const auto& c : comparisons) ++out[c.contributor];
    return out;
}

ComparisonGraph ComparisonGraph::build(std::span<const Comparison> comparisons,
                                       std::span<const EntityId> extra_nodes) {
    ComparisonGraph g;
    std::set<EntityId> nodes(extra_nodes.begin(), extra_nodes.end());
    for (const auto& c : comparisons) {
        if (c.entity_a == c.entity_b) continue;
        nodes.insert(c.entity_a);
        nodes.insert(c.entity_b);
        ++g.edges[unordered_pair(c.entity_a, c.entity_b)];
    }
    g.nodes.assign(nodes.begin(), nodes.end());
    return g;
}

std::vector<std::vector<EntityId>> connected_components(const ComparisonGraph& g) {
    std::map<EntityId, std::vector<EntityId>> adjacency;
    for (const auto& n : g.nodes) adjacency[n];
    for (const auto& [edge, _] : g.edges) {
        adjacency[edge.first].push_back(edge.second);
        adjacency[edge.second].push_back(edge.first);
    }
    std::set<EntityId> seen;
    std::vector<std::vector<EntityId>> out;
    // adjacency iterates in ascending order, so each component starts at its
    // smallest member.
    for (const auto& [start, _] : adjacency) {
        if (seen.contains(start)) continue;
        std::vector<EntityId> component;
        std::vector<EntityId> stack{start};
        seen.insert(start);
        while (!stack.empty()) {
            EntityId v = std::move(stack.back());
            stack.pop_back();
            for (const auto& w : adjacency[v]) {
                if (seen.insert(w).second) stack.push_back(w);
            }
            component.push_back(std::move(v));
        }
        std::sort(component.begin(), component.end());
        out.push_back(std::move(component));
    }
    return out;
}

ContributorGraph contributor_overlap_graph(std::span<const Comparison> comparisons) {
    std::map<EntityId, std::set<ContributorId>> raters;
    std::set<ContributorId> nodes;
    for (const auto& c : comparisons) {
        nodes.insert(c.contributor);
        raters[c.entity_a].insert(c.contributor);
        raters[c.entity_b].insert(c.contributor);
    }
    std::set<std::pair<ContributorId, ContributorId>> edges;
    for (const auto& [_, who] : raters) {
        for (auto i = who.begin(); i != who.end(); ++i) {
            for (auto j = std::next(i); j != who.end(); ++j) edges.emplace(*i, *j);
        }
    }
    return {{nodes.begin(), nodes.end()}, {edges.begin(), edges.end()}};
}

std::vector<std::size_t> top_decile_rows(const ScoreMatrix& matrix) {
    const std::size_t n = matrix.size();
    const std::size_t keep = (n + 9) / 10;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const int q = kDefaultCriterion - 1;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        if (matrix.rows[l][q] != matrix.rows[r][q]) return matrix.rows[l][q] > matrix.rows[r][q];
        return matrix.entities[l] < matrix.entities[r];
    });
    order.resize(keep);
    return order;
}

CorrelationMatrix criteria_correlations(const ScoreMatrix& matrix, CorrelationScope scope) {
    std::vector<std::size_t> rows;
    if (scope == CorrelationScope::All) {
        rows.resize(matrix.size());
        std::iota(rows.begin(), rows.end(), std::size_t{0});
    } else {
        rows = top_decile_rows(matrix);
    }
    CorrelationMatrix out;
    out.scope_size = rows.size();
    if (rows.size() < 2) return out;

    const double n = static_cast<double>(rows.size());
    std::array<double, kCriterionCount> mean{};
    for (int q = 0; q < kCriterionCount; ++q) {
        for (auto i : rows) mean[q] += matrix.rows[i][q];
        mean[q] /= n;
    }
    for (int a = 0; a < kCriterionCount; ++a) {
        for (int b = a; b < kCriterionCount; ++b) {
            double sab = 0.0, saa = 0.0, sbb = 0.0;
            for (auto i : rows) {
                const double da = matrix.rows[i][a] - mean[a];
                const double db = matrix.rows[i][b] - mean[b];
                sab += da * db;
                saa += da * da;
                sbb += db * db;
            }
            if (saa == 0.0 || sbb == 0.0) continue;
            const double r = a == b ? 1.0 : std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
            out.cells[a][b] = r;
            out.cells[b][a] = r;
        }
    }
    return out;
}

std::array<int, kHistogramBins> rating_histogram(std::span<const Comparison> comparisons,
                                                 const ContributorId& contributor,
                                                 Criterion criterion) {
    std::array<int, kHistogramBins> bins{};
    for (const auto& c : comparisons) {
        if (c.contributor != contributor || c.criterion != criterion) continue;
        if (c.slider < kSliderMin || c.slider > kSliderMax) continue;
        ++bins[static_cast<std::size_t>(c.slider / 5)];
    }
    return bins;
}

AnalyticsReport build_report(std::span<const Comparison> comparisons, const ScoreMatrix& scores,
                             std::span<const EntityId> extra_entities) {
    AnalyticsReport r;
    r.contribution_counts = contribution_counts(comparisons);
    r.total_comparisons = comparisons.size();
    r.components = connected_components(ComparisonGraph::build(comparisons, extra_entities));
    r.contributor_edges = contributor_overlap_graph(comparisons).edges.size();
    r.correlations_all = criteria_correlations(scores, CorrelationScope::All);
    r.correlations_top_decile = criteria_correlations(scores, CorrelationScope::TopDecile);
    r.pareto_histogram = pareto_rank_histogram(scores);
    return r;
}

}  // namespace pairscore
