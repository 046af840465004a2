#pragma once

#include "pairscore/core.hpp"
#include "pairscore/solver.hpp"

#include <array>
#include <map>
#include <string_view>
#include <vector>

namespace pairscore {

/// Per-criterion importance weights in [0, 1].
class CriterionWeights {
public:
    /// Weight 1 on the default criterion, 0 elsewhere.
    CriterionWeights();

    /// Any nonnegative finite weights; rescaled by the largest one when it
    /// exceeds 1 (ranking order is scale invariant).
    static CriterionWeights from_raw(const std::array<double, kCriterionCount>& raw);

    /// Parses "q1:1,q5:0.5". Unlisted criteria get weight 0. Throws
    /// ValidationError on malformed input, duplicate or unknown criteria, or
    /// when every weight is zero.
    static CriterionWeights parse(std::string_view text);

    [[nodiscard]] double operator[](Criterion c) const { return w_[c.id() - 1]; }
    [[nodiscard]] const std::array<double, kCriterionCount>& values() const noexcept { return w_; }
    [[nodiscard]] bool any_positive() const noexcept;

private:
    std::array<double, kCriterionCount> w_{};
};

/// Global scores, one row per entity, one column per criterion. Missing
/// (entity, criterion) cells hold 0, the score an unrated entity is fitted to.
struct ScoreMatrix {
    std::vector<EntityId> entities;
    std::vector<std::array<double, kCriterionCount>> rows;

    /// Rows for the union of entities across boards, in ascending id order.
    static ScoreMatrix from_boards(const std::vector<ScoreBoard>& boards);

    void add(EntityId entity, const std::array<double, kCriterionCount>& row);
    [[nodiscard]] std::size_t size() const noexcept { return entities.size(); }
};

struct RankedEntity {
    EntityId entity;
    double score = 0.0;

    friend bool operator==(const RankedEntity&, const RankedEntity&) = default;
};

/// Descending weighted sum of scores; ties go to the smaller entity id.
std::vector<RankedEntity> weighted_rank(const ScoreMatrix& matrix, const CriterionWeights& w);

/// u dominates v when u >= v on every criterion and u > v on at least one.
bool dominates(const std::array<double, kCriterionCount>& u,
               const std::array<double, kCriterionCount>& v);

/// Number of entities dominating each entity; 0 means Pareto-optimal.
std::map<EntityId, int> pareto_rank(const ScoreMatrix& matrix);
std::map<int, int> pareto_rank_histogram(const ScoreMatrix& matrix);

}  // namespace pairscore
