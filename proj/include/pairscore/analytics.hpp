#pragma once

#include "pairscore/core.hpp"
#include "pairscore/ranking.hpp"

#include <array>
#include <map>
#include <optional>
#include <span>
#include <vector>

namespace pairscore {

/// Comparisons stored per contributor, across all criteria.
std::map<ContributorId, int> contribution_counts(std::span<const Comparison> comparisons);

/// Undirected entity graph; an edge joins every pair compared at least once,
/// by anyone, on any criterion. Multiplicity counts stored comparisons.
struct ComparisonGraph {
    std::vector<EntityId> nodes;  // ascending
    std::map<std::pair<EntityId, EntityId>, int> edges;  // key is (smaller, larger)

    /// extra_nodes adds isolated entities (e.g. registered but never compared).
    static ComparisonGraph build(std::span<const Comparison> comparisons,
                                 std::span<const EntityId> extra_nodes = {});
};

/// Components with members ascending, ordered by their smallest member.
std::vector<std::vector<EntityId>> connected_components(const ComparisonGraph& g);

/// Contributors joined when they compared at least one common entity.
struct ContributorGraph {
    std::vector<ContributorId> nodes;
    std::vector<std::pair<ContributorId, ContributorId>> edges;  // (smaller, larger), ascending
};

ContributorGraph contributor_overlap_graph(std::span<const Comparison> comparisons);

enum class CorrelationScope { All, TopDecile };

/// Pearson correlations between criterion columns of global scores. Cells are
/// absent when fewer than two entities are in scope or a column is constant.
struct CorrelationMatrix {
    std::array<std::array<std::optional<double>, kCriterionCount>, kCriterionCount> cells{};
    std::size_t scope_size = 0;

    [[nodiscard]] const std::optional<double>& at(Criterion a, Criterion b) const {
        return cells[a.id() - 1][b.id() - 1];
    }
};

/// ceil(10%) of entities by default-criterion score, ties to the smaller id.
std::vector<std::size_t> top_decile_rows(const ScoreMatrix& matrix);

CorrelationMatrix criteria_correlations(const ScoreMatrix& matrix, CorrelationScope scope);

inline constexpr int kHistogramBins = 21;

/// Slider positions in width-5 buckets; the last bucket holds 100 alone.
std::array<int, kHistogramBins> rating_histogram(std::span<const Comparison> comparisons,
                                                 const ContributorId& contributor,
                                                 Criterion criterion);

/// Everything the statistics endpoint and the analyze command report.
struct AnalyticsReport {
    std::map<ContributorId, int> contribution_counts;
    std::size_t total_comparisons = 0;
    std::vector<std::vector<EntityId>> components;
    std::size_t contributor_edges = 0;
    CorrelationMatrix correlations_all;
    CorrelationMatrix correlations_top_decile;
    std::map<int, int> pareto_histogram;
};

AnalyticsReport build_report(std::span<const Comparison> comparisons, const ScoreMatrix& scores,
                             std::span<const EntityId> extra_entities = {});

}  // namespace pairscore
