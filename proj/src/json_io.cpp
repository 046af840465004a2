#include "pairscore/json_io.hpp"

namespace pairscore::json_io {

namespace {

const char* method_name(SolverMethod m) {
    return m == SolverMethod::Newton ? "newton" : "gradient_descent";
}

SolverMethod method_from(const std::string& s) {
    if (s == "newton") return SolverMethod::Newton;
    if (s == "gradient_descent") return SolverMethod::GradientDescent;
    throw ValidationError("unknown solver method: " + s);
}

template <typename T>
T field(const json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("missing field: ") + key);
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(std::string("wrong type for field: ") + key);
    }
}

template <typename T>
T field_or(const json& j, const char* key, T fallback) {
    return j.contains(key) && !j.at(key).is_null() ? field<T>(j, key) : fallback;
}

}  // namespace

json to_json(const Hyperparams& h) {
    return {{"lambda", h.lambda},       {"nu", h.nu},
            {"c_weight", h.c_weight},   {"eps_abs", h.eps_abs},
            {"step_size", h.step_size}, {"max_iters", h.max_iters},
            {"grad_tol", h.grad_tol},   {"method", method_name(h.method)}};
}

Hyperparams hyperparams_from_json(const json& j, Hyperparams h) {
    if (!j.is_object()) throw ValidationError("hyperparameters must be an object");
    h.lambda = field_or(j, "lambda", h.lambda);
    h.nu = field_or(j, "nu", h.nu);
    h.c_weight = field_or(j, "c_weight", h.c_weight);
    h.eps_abs = field_or(j, "eps_abs", h.eps_abs);
    h.step_size = field_or(j, "step_size", h.step_size);
    h.max_iters = field_or(j, "max_iters", h.max_iters);
    h.grad_tol = field_or(j, "grad_tol", h.grad_tol);
    if (j.contains("method")) h.method = method_from(field<std::string>(j, "method"));
    validate(h);
    return h;
}

json to_json(const FitDiagnostics& d) {
    return {{"iterations", d.iterations},
            {"grad_norm", d.grad_norm},
            {"loss", d.loss},
            {"converged", d.converged}};
}

json to_json(const ScoreBoard& b) {
    json rho = json::object();
    for (const auto& [v, s] : b.rho) rho[v.value] = s;
    json counts = json::object();
    for (const auto& [v, n] : b.comparison_counts) counts[v.value] = n;
    json theta = json::object();
    for (const auto& [n, scores] : b.theta) {
        json row = json::object();
        for (const auto& [v, s] : scores) row[v.value] = s;
        theta[n.value] = std::move(row);
    }
    return {{"criterion", b.criterion.id()},
            {"name", std::string(b.criterion.name())},
            {"diagnostics", to_json(b.diagnostics)},
            {"global_scores", std::move(rho)},
            {"comparison_counts", std::move(counts)},
            {"individual_scores", std::move(theta)}};
}

ScoreBoard scoreboard_from_json(const json& j) {
    ScoreBoard b;
    b.criterion = Criterion(field<int>(j, "criterion"));
    const auto& d = j.at("diagnostics");
    b.diagnostics = {field<int>(d, "iterations"), field<double>(d, "grad_norm"),
                     field<double>(d, "loss"), field<bool>(d, "converged")};
    for (const auto& [v, s] : j.at("global_scores").items()) b.rho[EntityId{v}] = s.get<double>();
    for (const auto& [v, n] : j.at("comparison_counts").items()) {
        b.comparison_counts[EntityId{v}] = n.get<int>();
    }
    for (const auto& [n, row] : j.at("individual_scores").items()) {
        auto& scores = b.theta[ContributorId{n}];
        for (const auto& [v, s] : row.items()) scores[EntityId{v}] = s.get<double>();
    }
    return b;
}

json to_json(const Snapshot& s) {
    json boards = json::array();
    for (const auto& b : s.boards) boards.push_back(to_json(b));
    json verified = json::array();
    for (const auto& c : s.verified) verified.push_back(c.value);
    return {{"format", "pairscore-snapshot"},
            {"version", kSnapshotFormatVersion},
            {"id", s.id},
            {"hyperparams", to_json(s.hyperparams)},
            {"verified_contributors", std::move(verified)},
            {"criteria", std::move(boards)}};
}

Snapshot snapshot_from_json(const json& j) {
    try {
        if (field<std::string>(j, "format") != "pairscore-snapshot") {
            throw ValidationError("not a pairscore snapshot");
        }
        if (field<int>(j, "version") != kSnapshotFormatVersion) {
            throw ValidationError("unsupported snapshot version");
        }
        Snapshot s;
        s.id = field<std::string>(j, "id");
        s.hyperparams = hyperparams_from_json(j.at("hyperparams"));
        for (const auto& c : j.at("verified_contributors")) s.verified.push_back({c.get<std::string>()});
        for (const auto& b : j.at("criteria")) s.boards.push_back(scoreboard_from_json(b));
        return s;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed snapshot: ") + e.what());
    }
}

json to_json(const CorrelationMatrix& m) {
    json rows = json::array();
    for (const auto& row : m.cells) {
        json r = json::array();
        for (const auto& cell : row) r.push_back(cell ? json(*cell) : json(nullptr));
        rows.push_back(std::move(r));
    }
    return {{"scope_size", m.scope_size}, {"matrix", std::move(rows)}};
}

json to_json(const AnalyticsReport& r) {
    json counts = json::object();
    for (const auto& [c, n] : r.contribution_counts) counts[c.value] = n;
    json comps = json::array();
    for (const auto& comp : r.components) {
        json members = json::array();
        for (const auto& e : comp) members.push_back(e.value);
        comps.push_back(std::move(members));
    }
    json pareto = json::object();
    for (const auto& [rank, n] : r.pareto_histogram) pareto[std::to_string(rank)] = n;
    return {{"schema_version", kSchemaVersion},
            {"total_comparisons", r.total_comparisons},
            {"contribution_counts", std::move(counts)},
            {"component_count", r.components.size()},
            {"components", std::move(comps)},
            {"contributor_overlap_edges", r.contributor_edges},
            {"correlations", to_json(r.correlations_all)},
            {"correlations_top_decile", to_json(r.correlations_top_decile)},
            {"pareto_rank_histogram", std::move(pareto)}};
}

Comparison comparison_from_json(const json& j, const ContributorId& contributor, Timestamp now) {
    if (!j.is_object()) throw ValidationError("comparison body must be a JSON object");
    Comparison c;
    c.contributor = contributor;
    c.entity_a = EntityId{field<std::string>(j, "entity_a")};
    c.entity_b = EntityId{field<std::string>(j, "entity_b")};
    c.criterion = Criterion(field_or(j, "criterion", kDefaultCriterion));
    c.slider = field<int>(j, "slider");
    c.confidence = field_or(j, "confidence", kConfidenceMax);
    c.response_time_ms = field_or<std::int64_t>(j, "response_time_ms", 0);
    c.submitted_at = now;
    if (j.contains("slider_trajectory")) {
        const auto& t = j.at("slider_trajectory");
        if (!t.is_array()) throw ValidationError("slider_trajectory must be an array");
        for (const auto& p : t) {
            c.slider_trajectory.push_back(
                {field<std::int64_t>(p, "offset_ms"), field<int>(p, "position")});
        }
    }
    validate(c);
    return c;
}

json to_json(const Comparison& c) {
    json traj = json::array();
    for (const auto& p : c.slider_trajectory) {
        traj.push_back({{"offset_ms", p.offset_ms}, {"position", p.position}});
    }
    return {{"contributor", c.contributor.value},
            {"entity_a", c.entity_a.value},
            {"entity_b", c.entity_b.value},
            {"criterion", c.criterion.id()},
            {"slider", c.slider},
            {"rating", normalize_slider(c.slider).value()},
            {"confidence", c.confidence},
            {"submitted_at", c.submitted_at},
            {"response_time_ms", c.response_time_ms},
            {"slider_trajectory", std::move(traj)}};
}

}  // namespace pairscore::json_io
