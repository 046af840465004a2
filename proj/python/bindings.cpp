#include "pairscore/analytics.hpp"
#include "pairscore/core.hpp"
#include "pairscore/csv.hpp"
#include "pairscore/pipeline.hpp"
#include "pairscore/ranking.hpp"
#include "pairscore/snapshot.hpp"
#include "pairscore/solver.hpp"
#include "pairscore/trust.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace pairscore;

namespace {

using FitRow = std::tuple<std::string, std::string, std::string, double, double>;  // n, a, b, r, conf
using OwnRow = std::tuple<std::string, std::string, double, double>;              // a, b, r, conf
using ScoreRows = std::map<std::string, std::array<double, kCriterionCount>>;

std::vector<ContributorData> group(const std::vector<FitRow>& rows) {
    std::map<std::string, ContributorData> by;
    for (const auto& [n, a, b, r, conf] : rows) {
        auto& d = by[n];
        d.contributor = {n};
        d.comparisons.push_back({{a}, {b}, r, conf});
    }
    std::vector<ContributorData> out;
    for (auto& [_, d] : by) out.push_back(std::move(d));
    return out;
}

py::dict diagnostics(const FitDiagnostics& d) {
    py::dict out;
    out["iterations"] = d.iterations;
    out["grad_norm"] = d.grad_norm;
    out["loss"] = d.loss;
    out["converged"] = d.converged;
    return out;
}

template <typename K, typename V>
std::map<std::string, V> by_value(const std::map<K, V>& m) {
    std::map<std::string, V> out;
    for (const auto& [k, v] : m) out.emplace(k.value, v);
    return out;
}

py::dict board_dict(const ScoreBoard& b) {
    py::dict out;
    out["criterion"] = b.criterion.id();
    out["global_scores"] = by_value(b.rho);
    out["comparison_counts"] = by_value(b.comparison_counts);
    std::map<std::string, std::map<std::string, double>> theta;
    for (const auto& [n, s] : b.theta) theta.emplace(n.value, by_value(s));
    out["individual_scores"] = theta;
    out["diagnostics"] = diagnostics(b.diagnostics);
    return out;
}

ScoreMatrix matrix_from(const ScoreRows& rows) {
    ScoreMatrix m;
    for (const auto& [e, row] : rows) m.add({e}, row);
    return m;
}

CriterionWeights weights_from(const py::object& w) {
    if (py::isinstance<py::str>(w)) return CriterionWeights::parse(w.cast<std::string>());
    return CriterionWeights::from_raw(w.cast<std::array<double, kCriterionCount>>());
}

py::dict public_row(const csv::PublicRow& r) {
    py::dict d;
    d["public_username"] = r.public_username;
    d["video_a"] = r.video_a;
    d["video_b"] = r.video_b;
    d["criterion"] = r.criterion;
    d["score"] = r.score;
    d["confidence"] = r.confidence;
    d["week_date"] = r.week_date;
    return d;
}

}  // namespace

PYBIND11_MODULE(_pairscore, m) {
    m.doc() = "Pairwise-comparison scoring core";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

    py::enum_<SolverMethod>(m, "SolverMethod")
        .value("NEWTON", SolverMethod::Newton)
        .value("GRADIENT_DESCENT", SolverMethod::GradientDescent);

    py::class_<Hyperparams>(m, "Hyperparams")
        .def(py::init<>())
        .def(py::init([](double lambda, double nu, double c_weight) {
                 Hyperparams h;
                 h.lambda = lambda;
                 h.nu = nu;
                 h.c_weight = c_weight;
                 validate(h);
                 return h;
             }),
             py::arg("lambda_") = 1.0, py::arg("nu") = 1.0, py::arg("c_weight") = 3.0)
        .def_readwrite("lambda_", &Hyperparams::lambda)
        .def_readwrite("nu", &Hyperparams::nu)
        .def_readwrite("c_weight", &Hyperparams::c_weight)
        .def_readwrite("eps_abs", &Hyperparams::eps_abs)
        .def_readwrite("step_size", &Hyperparams::step_size)
        .def_readwrite("max_iters", &Hyperparams::max_iters)
        .def_readwrite("grad_tol", &Hyperparams::grad_tol)
        .def_readwrite("method", &Hyperparams::method)
        .def("__eq__", [](const Hyperparams& a, const Hyperparams& b) { return a == b; });

    m.def("criteria", [] {
        std::vector<std::pair<int, std::string>> out;
        for (const auto& c : Criterion::all()) out.emplace_back(c.id(), std::string(c.name()));
        return out;
    });
    m.def("normalize_slider", [](int s) { return normalize_slider(s).value(); }, py::arg("slider"));
    m.def("comparison_weight", &comparison_weight, py::arg("count"), py::arg("c_weight") = 3.0);
    m.def("confidence_factor", &confidence_factor, py::arg("confidence"));
    m.def("bbt_loss", [](double t, double r) { return bbt_loss(t, RatingValue(r)); }, py::arg("t"),
          py::arg("rating"));
    m.def("smoothed_abs", &smoothed_abs, py::arg("x"), py::arg("eps") = 1e-6);

    m.def(
        "fit",
        [](const std::vector<FitRow>& rows, std::optional<std::vector<std::string>> entities,
           const Hyperparams& h) {
            std::vector<EntityId> universe;
            if (entities) {
                for (const auto& e : *entities) universe.push_back({e});
            } else {
                for (const auto& row : rows) {
                    universe.push_back({std::get<1>(row)});
                    universe.push_back({std::get<2>(row)});
                }
            }
            ScoreBoard b;
            {
                py::gil_scoped_release release;
                b = fit(FitDataset::build(group(rows), std::move(universe), h.c_weight), h);
            }
            return board_dict(b);
        },
        py::arg("comparisons"), py::arg("entities") = py::none(), py::arg("hyperparams") = Hyperparams(),
        "Fit one criterion. comparisons: (contributor, entity_a, entity_b, rating, confidence_factor).");

    m.def(
        "fit_nonverified",
        [](const std::vector<OwnRow>& rows, const std::map<std::string, double>& global_scores,
           const Hyperparams& h) {
            ScoreBoard globals;
            for (const auto& [e, s] : global_scores) globals.rho[{e}] = s;
            ContributorData d{{"self"}, {}};
            for (const auto& [a, b, r, conf] : rows) d.comparisons.push_back({{a}, {b}, r, conf});
            FitDiagnostics diag;
            const auto theta = fit_nonverified(d, globals, h, &diag);
            return py::make_tuple(by_value(theta), diagnostics(diag));
        },
        py::arg("comparisons"), py::arg("global_scores"), py::arg("hyperparams") = Hyperparams());

    m.def(
        "weighted_rank",
        [](const ScoreRows& scores, const py::object& weights) {
            std::vector<std::pair<std::string, double>> out;
            for (const auto& r : weighted_rank(matrix_from(scores), weights_from(weights))) {
                out.emplace_back(r.entity.value, r.score);
            }
            return out;
        },
        py::arg("scores"), py::arg("weights") = "q1:1");
    m.def(
        "pareto_rank", [](const ScoreRows& scores) { return by_value(pareto_rank(matrix_from(scores))); },
        py::arg("scores"));
    m.def(
        "correlations",
        [](const ScoreRows& scores, bool top_decile) {
            const auto c = criteria_correlations(
                matrix_from(scores), top_decile ? CorrelationScope::TopDecile : CorrelationScope::All);
            std::vector<std::vector<std::optional<double>>> out;
            for (const auto& row : c.cells) out.emplace_back(row.begin(), row.end());
            return out;
        },
        py::arg("scores"), py::arg("top_decile") = false);

    m.def(
        "verify_email_domain",
        [](const std::string& email, const std::vector<std::string>& domains) {
            return verify_email_domain(email, TrustedDomainList(domains));
        },
        py::arg("email"), py::arg("domains"));
    m.def(
        "recompute_certifications",
        [](const std::map<std::string, std::pair<bool, std::vector<std::string>>>& accounts,
           double threshold, double damping) {
            std::vector<TrustRecord> records;
            for (const auto& [name, spec] : accounts) {
                TrustRecord r;
                r.account = {name};
                r.email_verified = spec.first;
                for (const auto& v : spec.second) r.vouches_received.push_back({v});
                records.push_back(std::move(r));
            }
            std::map<std::string, std::pair<bool, double>> out;
            for (const auto& r : recompute_certifications(records, {threshold, damping})) {
                out[r.account.value] = {r.certified, r.vouching_power};
            }
            return out;
        },
        py::arg("accounts"), py::arg("threshold") = 2.0, py::arg("damping") = 0.5,
        "accounts: {name: (email_verified, [vouchers])} -> {name: (certified, power)}");

    m.def("week_monday", &csv::week_monday, py::arg("timestamp"));
    m.def(
        "read_public_csv",
        [](const std::string& text) {
            std::istringstream in(text);
            const auto parsed = csv::read_public(in);
            py::list rows;
            for (const auto& [_, r] : parsed.rows) rows.append(public_row(r));
            std::vector<std::pair<std::size_t, std::string>> rejected;
            for (const auto& e : parsed.rejected) rejected.emplace_back(e.line, e.reason);
            return py::make_tuple(rows, rejected);
        },
        py::arg("text"));
    m.def(
        "write_public_csv",
        [](const std::vector<py::dict>& rows) {
            std::vector<csv::PublicRow> out;
            for (const auto& d : rows) {
                out.push_back({d["public_username"].cast<std::string>(), d["video_a"].cast<std::string>(),
                               d["video_b"].cast<std::string>(), d["criterion"].cast<int>(),
                               d["score"].cast<int>(), d["confidence"].cast<int>(),
                               d["week_date"].cast<std::string>()});
                Criterion checked(out.back().criterion);
                (void)checked;
            }
            std::ostringstream text;
            csv::write_public(text, std::move(out));
            return text.str();
        },
        py::arg("rows"));
    m.def(
        "fit_public_csv",
        [](const std::string& text, const Hyperparams& h) {
            std::istringstream in(text);
            const auto parsed = csv::read_public(in);
            if (!parsed.rejected.empty()) {
                throw ValidationError("malformed row at line " + std::to_string(parsed.rejected[0].line) +
                                      ": " + parsed.rejected[0].reason);
            }
            std::vector<Comparison> cs;
            std::set<ContributorId> everyone;
            for (const auto& [_, r] : parsed.rows) {
                Comparison c;
                c.contributor = {r.public_username};
                c.entity_a = {r.video_a};
                c.entity_b = {r.video_b};
                c.criterion = Criterion(r.criterion);
                c.slider = r.score;
                c.confidence = r.confidence;
                c.submitted_at = csv::parse_date(r.week_date);
                everyone.insert(c.contributor);
                cs.push_back(std::move(c));
            }
            std::string json;
            {
                py::gil_scoped_release release;
                json = snapshot_to_json(fit_snapshot(cs, everyone, entity_universe(cs), h));
            }
            return json;
        },
        py::arg("text"), py::arg("hyperparams") = Hyperparams(),
        "Fit all criteria treating every CSV contributor as verified; returns snapshot JSON.");
}
