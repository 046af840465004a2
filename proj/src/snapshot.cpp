#include "pairscore/snapshot.hpp"

#include "pairscore/json_io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace pairscore {

const ScoreBoard& Snapshot::board(Criterion c) const {
    for (const auto& b : boards) {
        if (b.criterion == c) return b;
    }
    throw ValidationError("snapshot has no board for criterion " + std::to_string(c.id()));
}

bool Snapshot::any_unconverged() const {
    for (const auto& b : boards) {
        if (!b.diagnostics.converged) return true;
    }
    return false;
}

void validate_complete(const Snapshot& s) {
    std::set<int> seen;
    for (const auto& b : s.boards) {
        if (!seen.insert(b.criterion.id()).second) {
            throw ValidationError("duplicate board for criterion " + std::to_string(b.criterion.id()));
        }
    }
    if (seen.size() != static_cast<std::size_t>(kCriterionCount)) {
        throw ValidationError("snapshot must hold a board for each of the " +
                              std::to_string(kCriterionCount) + " criteria; got " +
                              std::to_string(seen.size()));
    }
}

Snapshot empty_snapshot(const std::vector<EntityId>& universe, const Hyperparams& h) {
    Snapshot s;
    s.hyperparams = h;
    for (const auto& c : Criterion::all()) {
        ScoreBoard b;
        b.criterion = c;
        for (const auto& v : universe) {
            b.rho[v] = 0.0;
            b.comparison_counts[v] = 0;
        }
        s.boards.push_back(std::move(b));
    }
    s.id = content_id(s);
    return s;
}

std::string content_id(const Snapshot& s) {
    Snapshot copy = s;
    copy.id.clear();
    const std::string text = json_io::to_json(copy).dump();
    std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string snapshot_to_json(const Snapshot& s) { return json_io::to_json(s).dump(2) + "\n"; }

Snapshot snapshot_from_json(std::string_view text) {
    json_io::json j;
    try {
        j = json_io::json::parse(text);
    } catch (const json_io::json::exception& e) {
        throw ValidationError(std::string("snapshot is not valid JSON: ") + e.what());
    }
    return json_io::snapshot_from_json(j);
}

void write_snapshot_file(const Snapshot& s, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write snapshot: " + tmp.string());
        out << snapshot_to_json(s);
        out.flush();
        if (!out) throw std::runtime_error("failed writing snapshot: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

Snapshot read_snapshot_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return snapshot_from_json(buf.str());
}

}  // namespace pairscore
