#include "pairscore/ranking.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string>

namespace pairscore {

CriterionWeights::CriterionWeights() { w_[kDefaultCriterion - 1] = 1.0; }

CriterionWeights CriterionWeights::from_raw(const std::array<double, kCriterionCount>& raw) {
    double top = 0.0;
    for (double v : raw) {
        if (!std::isfinite(v) || v < 0.0) throw ValidationError("weights must be nonnegative and finite");
        top = std::max(top, v);
    }
    if (top == 0.0) throw ValidationError("at least one criterion weight must be positive");
    CriterionWeights out;
    for (int i = 0; i < kCriterionCount; ++i) out.w_[i] = top > 1.0 ? raw[i] / top : raw[i];
    return out;
}

CriterionWeights CriterionWeights::parse(std::string_view text) {
    std::array<double, kCriterionCount> raw{};
    std::array<bool, kCriterionCount> seen{};
    if (text.empty()) throw ValidationError("empty weight list");
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string_view item = text.substr(pos, comma - pos);
        const std::size_t colon = item.find(':');
        if (item.size() < 4 || item[0] != 'q' || colon == std::string_view::npos) {
            throw ValidationError("malformed weight entry: " + std::string(item));
        }
        int id = 0;
        const auto id_text = item.substr(1, colon - 1);
        auto [p1, e1] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
        if (e1 != std::errc{} || p1 != id_text.data() + id_text.size()) {
            throw ValidationError("malformed criterion id: " + std::string(item));
        }
        const Criterion c(id);
        const std::string value(item.substr(colon + 1));
        std::size_t used = 0;
        double w = 0.0;
        try {
            w = std::stod(value, &used);
        } catch (const std::exception&) {
            throw ValidationError("malformed weight: " + std::string(item));
        }
        if (used != value.size()) throw ValidationError("malformed weight: " + std::string(item));
        if (seen[c.id() - 1]) throw ValidationError("duplicate criterion in weights");
        seen[c.id() - 1] = true;
        raw[c.id() - 1] = w;
        pos = comma + 1;
    }
    return from_raw(raw);
}

bool CriterionWeights::any_positive() const noexcept {
    return std::any_of(w_.begin(), w_.end(), [](double v) { return v > 0.0; });
}

ScoreMatrix ScoreMatrix::from_boards(const std::vector<ScoreBoard>& boards) {
    std::map<EntityId, std::array<double, kCriterionCount>> rows;
    for (const auto& b : boards) {
        for (const auto& [entity, score] : b.rho) rows[entity][b.criterion.id() - 1] = score;
    }
    ScoreMatrix m;
    for (auto& [entity, row] : rows) m.add(entity, row);
    return m;
}

void ScoreMatrix::add(EntityId entity, const std::array<double, kCriterionCount>& row) {
    entities.push_back(std::move(entity));
    rows.push_back(row);
}

std::vector<RankedEntity> weighted_rank(const ScoreMatrix& matrix, const CriterionWeights& w) {
    if (!w.any_positive()) throw ValidationError("at least one criterion weight must be positive");
    std::vector<RankedEntity> out;
    out.reserve(matrix.size());
    for (std::size_t i = 0; i < matrix.size(); ++i) {
        double s = 0.0;
        for (int q = 0; q < kCriterionCount; ++q) s += w.values()[q] * matrix.rows[i][q];
        out.push_back({matrix.entities[i], s});
    }
    std::sort(out.begin(), out.end(), [](const RankedEntity& l, const RankedEntity& r) {
        if (l.score != r.score) return l.score > r.score;
        return l.entity < r.entity;
    });
    return out;
}

bool dominates(const std::array<double, kCriterionCount>& u,
               const std::array<double, kCriterionCount>& v) {
    bool strict = false;
    for (int q = 0; q < kCriterionCount; ++q) {
        if (u[q] < v[q]) return false;
        if (u[q] > v[q]) strict = true;
    }
    return strict;
}

std::map<EntityId, int> pareto_rank(const ScoreMatrix& matrix) {
    // A dominator is lexicographically greater, so only earlier rows in
    // descending lexicographic order need checking.
    std::vector<std::size_t> order(matrix.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t l, std::size_t r) { return matrix.rows[l] > matrix.rows[r]; });

    std::map<EntityId, int> rank;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& row = matrix.rows[order[i]];
        int count = 0;
        for (std::size_t j = 0; j < i; ++j) {
            if (dominates(matrix.rows[order[j]], row)) ++count;
        }
        rank[matrix.entities[order[i]]] = count;
    }
    return rank;
}

std::map<int, int> pareto_rank_histogram(const ScoreMatrix& matrix) {
    std::map<int, int> hist;
    for (const auto& [_, r] : pareto_rank(matrix)) ++hist[r];
    return hist;
}

}  // namespace pairscore
