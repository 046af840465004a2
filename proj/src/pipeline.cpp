#include "pairscore/pipeline.hpp"

#include <algorithm>
#include <future>
#include <map>

namespace pairscore {

std::vector<EntityId> entity_universe(std::span<const Comparison> comparisons) {
    std::vector<EntityId> out;
    out.reserve(comparisons.size() * 2);
    for (const auto& c : comparisons) {
        out.push_back(c.entity_a);
        out.push_back(c.entity_b);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

FitComparison to_fit(const Comparison& c) {
    return {c.entity_a, c.entity_b, normalize_slider(c.slider).value(), confidence_factor(c.confidence)};
}

}  // namespace

ContributorData contributor_data(std::span<const Comparison> comparisons,
                                 const ContributorId& contributor, Criterion criterion) {
    ContributorData d{contributor, {}};
    for (const auto& c : comparisons) {
        if (c.contributor == contributor && c.criterion == criterion) d.comparisons.push_back(to_fit(c));
    }
    return d;
}

FitDataset build_dataset(std::span<const Comparison> comparisons, Criterion criterion,
                         const std::set<ContributorId>& verified, std::vector<EntityId> universe,
                         double c_weight) {
    std::map<ContributorId, ContributorData> by;
    for (const auto& c : comparisons) {
        if (c.criterion != criterion || !verified.contains(c.contributor)) continue;
        auto& d = by[c.contributor];
        d.contributor = c.contributor;
        d.comparisons.push_back(to_fit(c));
    }
    std::vector<ContributorData> data;
    data.reserve(by.size());
    for (auto& [_, d] : by) data.push_back(std::move(d));
    return FitDataset::build(std::move(data), std::move(universe), c_weight);
}

Snapshot fit_snapshot(std::span<const Comparison> comparisons,
                      const std::set<ContributorId>& verified, std::vector<EntityId> universe,
                      const Hyperparams& h, const std::vector<Criterion>& criteria, bool parallel) {
    validate(h);
    auto one = [&](Criterion c) {
        return fit(build_dataset(comparisons, c, verified, universe, h.c_weight), h, c);
    };
    Snapshot s;
    s.hyperparams = h;
    s.verified.assign(verified.begin(), verified.end());
    if (parallel) {
        std::vector<std::future<ScoreBoard>> jobs;
        for (const auto& c : criteria) jobs.push_back(std::async(std::launch::async, one, c));
        for (auto& j : jobs) s.boards.push_back(j.get());
    } else {
        for (const auto& c : criteria) s.boards.push_back(one(c));
    }
    std::sort(s.boards.begin(), s.boards.end(),
              [](const ScoreBoard& l, const ScoreBoard& r) { return l.criterion < r.criterion; });
    s.id = content_id(s);
    return s;
}

}  // namespace pairscore
