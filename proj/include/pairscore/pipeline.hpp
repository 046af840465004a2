#pragma once

// Glue between stored comparisons and the per-criterion solver.

#include "pairscore/core.hpp"
#include "pairscore/snapshot.hpp"
#include "pairscore/solver.hpp"

#include <set>
#include <span>
#include <vector>

namespace pairscore {

/// Every entity mentioned by any comparison, sorted and unique.
std::vector<EntityId> entity_universe(std::span<const Comparison> comparisons);

/// One contributor's comparisons on one criterion, in solver form.
ContributorData contributor_data(std::span<const Comparison> comparisons,
                                 const ContributorId& contributor, Criterion criterion);

/// Comparisons on `criterion` from `verified` contributors over `universe`.
FitDataset build_dataset(std::span<const Comparison> comparisons, Criterion criterion,
                         const std::set<ContributorId>& verified, std::vector<EntityId> universe,
                         double c_weight);

/// Fits the requested criteria independently (concurrently when `parallel`)
/// and returns them as one snapshot with a content id.
Snapshot fit_snapshot(std::span<const Comparison> comparisons,
                      const std::set<ContributorId>& verified, std::vector<EntityId> universe,
                      const Hyperparams& h, const std::vector<Criterion>& criteria = Criterion::all(),
                      bool parallel = true);

}  // namespace pairscore
