#pragma once

#include "pairscore/core.hpp"
#include "pairscore/ranking.hpp"
#include "pairscore/solver.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pairscore {

/// A published set of per-criterion fits, one board per criterion, together
/// with the hyperparameters that produced it.
struct Snapshot {
    std::string id;
    Hyperparams hyperparams;
    std::vector<ContributorId> verified;  // contributors whose data entered the fit
    std::vector<ScoreBoard> boards;       // ordered by criterion id

    [[nodiscard]] const ScoreBoard& board(Criterion c) const;
    [[nodiscard]] ScoreMatrix score_matrix() const { return ScoreMatrix::from_boards(boards); }
    [[nodiscard]] bool any_unconverged() const;
};

/// Throws ValidationError unless boards cover every criterion exactly once.
void validate_complete(const Snapshot& s);

/// A snapshot over the given universe with every score at zero.
Snapshot empty_snapshot(const std::vector<EntityId>& universe, const Hyperparams& h);

/// Deterministic id derived from the snapshot content (id field excluded).
std::string content_id(const Snapshot& s);

inline constexpr int kSnapshotFormatVersion = 1;

/// Versioned JSON document; see README for the layout.
std::string snapshot_to_json(const Snapshot& s);
/// Throws ValidationError on an unknown format or version.
Snapshot snapshot_from_json(std::string_view text);

/// Writes via a temporary file and rename, so readers never see a partial file.
void write_snapshot_file(const Snapshot& s, const std::filesystem::path& path);
Snapshot read_snapshot_file(const std::filesystem::path& path);

}  // namespace pairscore
