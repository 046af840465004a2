#pragma once

#include "pairscore/core.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace pairscore {

/// One comparison as seen by the optimizer: entity ids, normalized rating and
/// confidence factor in [0, 1].
struct FitComparison {
    EntityId entity_a;
    EntityId entity_b;
    double rating = 0.0;
    double confidence = 1.0;
};

struct ContributorData {
    ContributorId contributor;
    std::vector<FitComparison> comparisons;
};

/// Immutable, indexed view of one criterion's comparisons from verified
/// contributors over a fixed entity universe.
///
/// Variables are laid out contiguously: first every contributor's individual
/// scores (one block per contributor, entities in ascending id order), then one
/// global score per universe entity.
class FitDataset {
public:
    struct Term {
        std::size_t a;  // variable index of theta_{n,a}
        std::size_t b;
        double rating;
        double confidence;
    };

    struct Link {
        std::size_t theta;   // variable index of theta_{n,v}
        std::size_t entity;  // universe index of v
        double weight;       // w_nv
    };

    FitDataset() = default;

    /// Comparisons with confidence 0 are dropped. Throws ValidationError when a
    /// comparison references an entity outside the universe or has rating out
    /// of range.
    static FitDataset build(std::vector<ContributorData> contributors,
                            std::vector<EntityId> universe, double c_weight);

    [[nodiscard]] const std::vector<EntityId>& entities() const noexcept { return entities_; }
    [[nodiscard]] const std::vector<ContributorId>& contributors() const noexcept {
        return contributors_;
    }
    [[nodiscard]] const std::vector<Term>& terms() const noexcept { return terms_; }
    [[nodiscard]] const std::vector<Link>& links() const noexcept { return links_; }

    [[nodiscard]] std::size_t theta_count() const noexcept { return links_.size(); }
    [[nodiscard]] std::size_t variable_count() const noexcept {
        return links_.size() + entities_.size();
    }
    [[nodiscard]] std::size_t rho_index(std::size_t entity) const noexcept {
        return links_.size() + entity;
    }
    /// Links (and hence theta variables) owned by contributor n: [first, last).
    [[nodiscard]] std::pair<std::size_t, std::size_t> contributor_links(std::size_t n) const {
        return {link_begin_[n], link_begin_[n + 1]};
    }
    /// Comparison terms owned by contributor n: [first, last).
    [[nodiscard]] std::pair<std::size_t, std::size_t> contributor_terms(std::size_t n) const {
        return {term_begin_[n], term_begin_[n + 1]};
    }
    [[nodiscard]] std::size_t link_owner(std::size_t link) const;

    /// Universe index of an entity, or npos.
    [[nodiscard]] std::size_t entity_index(const EntityId& v) const;
    /// Comparisons per entity (after dropping zero-confidence ones).
    [[nodiscard]] const std::vector<int>& entity_comparison_counts() const noexcept {
        return entity_counts_;
    }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::vector<EntityId> entities_;
    std::vector<ContributorId> contributors_;
    std::vector<Term> terms_;
    std::vector<Link> links_;
    std::vector<std::size_t> link_begin_;
    std::vector<std::size_t> term_begin_;
    std::vector<int> entity_counts_;
};

struct FitDiagnostics {
    int iterations = 0;
    double grad_norm = 0.0;  // max-norm of the final gradient
    double loss = 0.0;
    bool converged = true;
};

/// Fitted scores for one criterion.
struct ScoreBoard {
    Criterion criterion{kDefaultCriterion};
    std::map<ContributorId, std::map<EntityId, double>> theta;
    std::map<EntityId, double> rho;
    std::map<EntityId, int> comparison_counts;
    FitDiagnostics diagnostics;
};

// ---------------------------------------------------------------------------
// Loss pieces

/// Bradley-Terry loss-per-input ln(1 + exp(t r)), overflow-safe.
double bbt_loss(double t, RatingValue r);
/// d/dt of bbt_loss: r * sigmoid(t r).
double bbt_loss_grad(double t, RatingValue r);

/// sqrt(x^2 + eps^2) - eps, a smooth stand-in for |x|.
double smoothed_abs(double x, double eps);
/// x / sqrt(x^2 + eps^2). Never exceeds 1 in magnitude; rounds to +-1 once |x| >> eps.
double smoothed_abs_grad(double x, double eps);

/// Full objective over the packed variable vector (see FitDataset layout).
double total_loss(const FitDataset& data, std::span<const double> x, const Hyperparams& h);
std::vector<double> total_loss_gradient(const FitDataset& data, std::span<const double> x,
                                        const Hyperparams& h);

/// Packs a ScoreBoard's scores into the dataset's variable layout. Throws
/// InvariantError if a score required by the dataset is missing.
std::vector<double> pack_scores(const FitDataset& data, const ScoreBoard& board);
double total_loss(const FitDataset& data, const ScoreBoard& board, const Hyperparams& h);

/// Contributor n's additive share of d(total_loss)/d(rho_v).
struct RhoForce {
    std::size_t contributor;
    std::size_t entity;
    double weight;
    double force;
};
/// Per-contributor decomposition of the global-score gradient; the gradient on
/// rho_v equals the sum of forces on v plus 2 nu lambda rho_v.
std::vector<RhoForce> rho_forces(const FitDataset& data, std::span<const double> x,
                                 const Hyperparams& h);

// ---------------------------------------------------------------------------
// Fitting

/// Minimizes total_loss from the all-zeros start. Deterministic.
ScoreBoard fit(const FitDataset& data, const Hyperparams& h,
               Criterion criterion = Criterion(kDefaultCriterion));

/// Individual scores of a contributor outside the verified set, fitted against
/// frozen global scores. Every referenced entity must appear in globals.rho.
std::map<EntityId, double> fit_nonverified(const ContributorData& data, const ScoreBoard& globals,
                                           const Hyperparams& h,
                                           FitDiagnostics* diagnostics = nullptr);

}  // namespace pairscore
