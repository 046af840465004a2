#pragma once

#include <array>
#include <cstdint>
#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pairscore {

/// Raised when caller-supplied data violates a domain precondition.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when internal bookkeeping is inconsistent (a bug, not bad input).
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Identifiers

struct ContributorId {
    std::string value;

    friend auto operator<=>(const ContributorId&, const ContributorId&) = default;
};

struct EntityId {
    std::string value;

    friend auto operator<=>(const EntityId&, const EntityId&) = default;
};

// ---------------------------------------------------------------------------
// Criterion catalog

inline constexpr int kCriterionCount = 10;
inline constexpr int kDefaultCriterion = 1;

/// One of the ten rating dimensions. Ids are 1-based and stable.
class Criterion {
public:
    /// Throws ValidationError unless 1 <= id <= 10.
    explicit Criterion(int id);

    static Criterion from_name(std::string_view name);
    static std::vector<Criterion> all();

    [[nodiscard]] int id() const noexcept { return id_; }
    [[nodiscard]] std::string_view name() const noexcept;
    [[nodiscard]] bool is_default() const noexcept { return id_ == kDefaultCriterion; }

    friend auto operator<=>(const Criterion&, const Criterion&) = default;

private:
    int id_;
};

std::string_view criterion_name(int id);

// ---------------------------------------------------------------------------
// Comparisons

struct TrajectoryPoint {
    std::int64_t offset_ms = 0;
    int position = 50;

    friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

struct Comparison {
    ContributorId contributor;
    EntityId entity_a;
    EntityId entity_b;
    Criterion criterion{kDefaultCriterion};
    int slider = 50;
    int confidence = 3;
    Timestamp submitted_at = 0;
    std::int64_t response_time_ms = 0;
    std::vector<TrajectoryPoint> slider_trajectory;

    friend bool operator==(const Comparison&, const Comparison&) = default;
};

/// Throws ValidationError on the first violated field constraint.
void validate(const Comparison& c);

/// Slider position mapped onto [-1, 1]. Positive means entity_b is preferred.
class RatingValue {
public:
    explicit RatingValue(double r);
    [[nodiscard]] double value() const noexcept { return r_; }

    friend auto operator<=>(const RatingValue&, const RatingValue&) = default;

private:
    double r_;
};

// ---------------------------------------------------------------------------
// Hyperparameters

enum class SolverMethod { Newton, GradientDescent };

struct Hyperparams {
    double lambda = 1.0;
    double nu = 1.0;
    double c_weight = 3.0;
    double eps_abs = 1e-6;
    double step_size = 0.1;
    int max_iters = 10000;
    double grad_tol = 1e-7;
    SolverMethod method = SolverMethod::Newton;

    friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

void validate(const Hyperparams& h);

// ---------------------------------------------------------------------------
// Shared formulas

inline constexpr int kSliderMin = 0;
inline constexpr int kSliderMax = 100;
inline constexpr int kConfidenceMax = 3;

RatingValue normalize_slider(int slider);

/// w = R / (C + R): the share of maximal influence earned after R comparisons.
double comparison_weight(std::int64_t count, double c_weight);

/// Confidence 0..3 mapped linearly onto [0, 1]; 0 removes a comparison from the fit.
double confidence_factor(int confidence);

/// Canonical (lexicographically ordered) key of an unordered entity pair.
std::pair<EntityId, EntityId> unordered_pair(const EntityId& a, const EntityId& b);

}  // namespace pairscore
