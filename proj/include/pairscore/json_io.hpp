#pragma once

// JSON encodings shared by the snapshot file, the HTTP API and the CLI report.

#include "pairscore/analytics.hpp"
#include "pairscore/core.hpp"
#include "pairscore/snapshot.hpp"

#include <json.hpp>

namespace pairscore::json_io {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

json to_json(const Hyperparams& h);
/// Missing keys keep the defaults in `base`.
Hyperparams hyperparams_from_json(const json& j, Hyperparams base = {});

json to_json(const FitDiagnostics& d);
json to_json(const ScoreBoard& b);
ScoreBoard scoreboard_from_json(const json& j);

json to_json(const Snapshot& s);
Snapshot snapshot_from_json(const json& j);

json to_json(const CorrelationMatrix& m);
json to_json(const AnalyticsReport& r);

/// Comparison body as submitted over the API. The contributor is supplied by
/// the caller (taken from the session, never from the body).
Comparison comparison_from_json(const json& j, const ContributorId& contributor, Timestamp now);
json to_json(const Comparison& c);

}  // namespace pairscore::json_io
