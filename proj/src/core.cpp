#include "pairscore/core.hpp"

#include <cmath>
#include <string>

namespace pairscore {

namespace {

constexpr std::array<std::string_view, kCriterionCount> kCriterionNames = {
    "Should be largely recommended",
    "Reliable and not misleading",
    "Important and actionable",
    "Engaging and thought-provoking",
    "Clear and pedagogical",
    "Layman-friendly",
    "Diversity and Inclusion",
    "Resilience to backfiring risks",
    "Encourages better habits",
    "Entertaining and relaxing",
};

}  // namespace

Criterion::Criterion(int id) : id_(id) {
    if (id < 1 || id > kCriterionCount) {
        throw ValidationError("criterion id out of range: " + std::to_string(id));
    }
}

Criterion Criterion::from_name(std::string_view name) {
    for (int i = 0; i < kCriterionCount; ++i) {
        if (kCriterionNames[i] == name) return Criterion(i + 1);
    }
    throw ValidationError("unknown criterion name: " + std::string(name));
}

std::vector<Criterion> Criterion::all() {
    std::vector<Criterion> out;
    out.reserve(kCriterionCount);
    for (int i = 1; i <= kCriterionCount; ++i) out.emplace_back(i);
    return out;
}

std::string_view Criterion::name() const noexcept { return kCriterionNames[id_ - 1]; }

std::string_view criterion_name(int id) { return Criterion(id).name(); }

void validate(const Comparison& c) {
    if (c.contributor.value.empty()) throw ValidationError("comparison has no contributor");
    if (c.entity_a.value.empty() || c.entity_b.value.empty()) {
        throw ValidationError("comparison entity id is empty");
    }
    if (c.entity_a == c.entity_b) throw ValidationError("an entity cannot be compared with itself");
    if (c.slider < kSliderMin || c.slider > kSliderMax) {
        throw ValidationError("slider out of range 0..100: " + std::to_string(c.slider));
    }
    if (c.confidence < 0 || c.confidence > kConfidenceMax) {
        throw ValidationError("confidence out of range 0..3: " + std::to_string(c.confidence));
    }
    if (c.response_time_ms < 0) throw ValidationError("response time must be nonnegative");
    for (const auto& p : c.slider_trajectory) {
        if (p.position < kSliderMin || p.position > kSliderMax) {
            throw ValidationError("trajectory position out of range 0..100");
        }
    }
}

RatingValue::RatingValue(double r) : r_(r) {
    if (!(r >= -1.0 && r <= 1.0)) throw ValidationError("rating outside [-1, 1]");
}

void validate(const Hyperparams& h) {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ValidationError(std::string(what) + " must be a positive finite number");
        }
    };
    positive(h.lambda, "lambda");
    positive(h.nu, "nu");
    positive(h.c_weight, "c_weight");
    positive(h.eps_abs, "eps_abs");
    positive(h.step_size, "step_size");
    positive(h.grad_tol, "grad_tol");
    if (h.max_iters <= 0) throw ValidationError("max_iters must be positive");
}

RatingValue normalize_slider(int slider) {
    if (slider < kSliderMin || slider > kSliderMax) {
        throw ValidationError("slider out of range 0..100: " + std::to_string(slider));
    }
    return RatingValue((slider - 50) / 50.0);
}

double comparison_weight(std::int64_t count, double c_weight) {
    if (count < 0) throw ValidationError("comparison count must be nonnegative");
    if (!(c_weight > 0.0)) throw ValidationError("C must be positive");
    const double r = static_cast<double>(count);
    return r / (c_weight + r);
}

double confidence_factor(int confidence) {
    if (confidence < 0 || confidence > kConfidenceMax) {
        throw ValidationError("confidence out of range 0..3: " + std::to_string(confidence));
    }
    return confidence / 3.0;
}

std::pair<EntityId, EntityId> unordered_pair(const EntityId& a, const EntityId& b) {
    return a < b ? std::pair{a, b} : std::pair{b, a};
}

}  // namespace pairscore
