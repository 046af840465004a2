#include "pairscore/api.hpp"

#include "pairscore/analytics.hpp"
#include "pairscore/json_io.hpp"
#include "pairscore/pipeline.hpp"
#include "pairscore/ranking.hpp"

#include <httplib.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

namespace pairscore::api {

using json_io::json;

namespace {

struct HttpError : std::runtime_error {
    int status;
    HttpError(int s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

Response json_response(int status, json body) {
    body["schema_version"] = json_io::kSchemaVersion;
    return {status, body.dump(), "application/json"};
}

Response error_response(int status, const std::string& message) {
    return json_response(status, {{"error", {{"status", status}, {"message", message}}}});
}

json parse_body(const Request& r) {
    if (r.body.empty()) throw HttpError(400, "request body must be a JSON object");
    try {
        auto j = json::parse(r.body);
        if (!j.is_object()) throw HttpError(400, "request body must be a JSON object");
        return j;
    } catch (const json::exception& e) {
        throw HttpError(400, std::string("invalid JSON: ") + e.what());
    }
}

std::string body_string(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_string() || j.at(key).get<std::string>().empty()) {
        throw HttpError(400, std::string("missing or invalid field: ") + key);
    }
    return j.at(key).get<std::string>();
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> out;
    std::string part;
    std::istringstream in(path);
    while (std::getline(in, part, '/')) {
        if (!part.empty()) out.push_back(part);
    }
    return out;
}

std::size_t query_size(const Request& r, const char* key, std::size_t fallback, std::size_t max) {
    const auto it = r.query.find(key);
    if (it == r.query.end()) return fallback;
    std::size_t v = 0;
    const auto& s = it->second;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
        throw HttpError(400, std::string("invalid ") + key + ": " + s);
    }
    return std::min(v, max);
}

std::string random_token() {
    std::random_device rd;
    std::uniform_int_distribution<int> nibble(0, 15);
    std::string out;
    for (int i = 0; i < 32; ++i) out.push_back("0123456789abcdef"[nibble(rd)]);
    return out;
}

json weights_json(const CriterionWeights& w) {
    json out = json::object();
    for (const auto& c : Criterion::all()) {
        if (w[c] > 0.0) out["q" + std::to_string(c.id())] = w[c];
    }
    return out;
}

std::map<EntityId, int> entity_degrees(const std::vector<Comparison>& comparisons,
                                       const std::vector<EntityId>& entities) {
    std::map<EntityId, int> degree;
    for (const auto& e : entities) degree[e] = 0;
    for (const auto& c : comparisons) {
        ++degree[c.entity_a];
        ++degree[c.entity_b];
    }
    return degree;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    static const std::set<std::string> known{"host",        "port",  "data_dir",
                                             "trusted_domains_file", "admin_token",
                                             "hyperparams", "trust", "write_cap_per_minute"};
    for (const auto& [k, _] : j.items()) {
        if (!known.contains(k)) throw ValidationError("unknown config key: " + k);
    }
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };
    Config c;
    try {
        if (j.contains("host")) c.host = j.at("host").get<std::string>();
        if (j.contains("port")) c.port = j.at("port").get<int>();
        if (j.contains("data_dir")) c.data_dir = resolve(j.at("data_dir").get<std::string>());
        if (j.contains("trusted_domains_file")) {
            c.trusted_domains_file = resolve(j.at("trusted_domains_file").get<std::string>());
        }
        if (j.contains("admin_token")) c.admin_token = j.at("admin_token").get<std::string>();
        if (j.contains("write_cap_per_minute")) c.write_cap_per_minute = j.at("write_cap_per_minute").get<int>();
        if (j.contains("hyperparams")) c.hyperparams = json_io::hyperparams_from_json(j.at("hyperparams"));
        if (j.contains("trust")) {
            const auto& t = j.at("trust");
            c.trust.threshold = t.value("threshold", c.trust.threshold);
            c.trust.damping = t.value("damping", c.trust.damping);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("invalid config value: ") + e.what());
    }
    if (c.port < 0 || c.port > 65535) throw ValidationError("port out of range");
    if (c.write_cap_per_minute < 0) throw ValidationError("write cap must be nonnegative");
    return c;
}

void apply_env_overrides(Config& c, const std::function<const char*(const char*)>& getenv) {
    auto number = [](const char* name, const char* text) {
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != std::string(text).size()) throw std::invalid_argument(name);
            return v;
        } catch (const std::exception&) {
            throw ValidationError(std::string("invalid value for ") + name + ": " + text);
        }
    };
    if (const char* v = getenv("PAIRSCORE_HOST")) c.host = v;
    if (const char* v = getenv("PAIRSCORE_PORT")) {
        const double p = number("PAIRSCORE_PORT", v);
        if (p < 0 || p > 65535 || p != static_cast<int>(p)) throw ValidationError("port out of range");
        c.port = static_cast<int>(p);
    }
    if (const char* v = getenv("PAIRSCORE_DATA_DIR")) c.data_dir = v;
    if (const char* v = getenv("PAIRSCORE_TRUSTED_DOMAINS")) c.trusted_domains_file = v;
    if (const char* v = getenv("PAIRSCORE_ADMIN_TOKEN")) c.admin_token = v;
    if (const char* v = getenv("PAIRSCORE_LAMBDA")) c.hyperparams.lambda = number("PAIRSCORE_LAMBDA", v);
    if (const char* v = getenv("PAIRSCORE_NU")) c.hyperparams.nu = number("PAIRSCORE_NU", v);
    if (const char* v = getenv("PAIRSCORE_C")) c.hyperparams.c_weight = number("PAIRSCORE_C", v);
    validate(c.hyperparams);
}

Timestamp system_now() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

// ---------------------------------------------------------------------------
// Service

struct Service::Session {
    std::optional<ContributorId> contributor;  // empty for the configured admin token
    bool admin = false;
    std::string token;
};

Service::Service(Datastore& store, Config config, Clock clock)
    : store_(store), config_(std::move(config)), clock_(std::move(clock)) {
    validate(config_.hyperparams);
    if (config_.trusted_domains_file && std::filesystem::exists(*config_.trusted_domains_file)) {
        domains_ = TrustedDomainList::load(*config_.trusted_domains_file);
    }
}

TrustedDomainList Service::trusted_domains() const {
    std::lock_guard lock(domains_mutex_);
    return domains_;
}

std::optional<Service::Session> Service::authenticate(const Request& r) const {
    if (!r.token || r.token->empty()) return std::nullopt;
    if (config_.admin_token && *r.token == *config_.admin_token) {
        return Session{std::nullopt, true, *r.token};
    }
    const auto who = store_.account_for_token(*r.token);
    if (!who) return std::nullopt;
    const auto acc = store_.account(*who);
    return Session{*who, acc && acc->role == Role::Admin, *r.token};
}

bool Service::within_write_cap(const std::string& token) {
    if (config_.write_cap_per_minute == 0) return true;
    const Timestamp minute = clock_() / 60;
    std::lock_guard lock(cap_mutex_);
    auto& [window, count] = write_counts_[token];
    if (window != minute) {
        window = minute;
        count = 0;
    }
    return ++count <= config_.write_cap_per_minute;
}

std::shared_ptr<const Snapshot> Service::current_snapshot() const {
    if (auto s = store_.read_current_scoreboards()) return s;
    auto s = empty_snapshot(store_.entities(), config_.hyperparams);
    s.id.clear();  // nothing has been published yet
    return std::make_shared<const Snapshot>(std::move(s));
}

std::shared_ptr<const Snapshot> Service::refit() {
    std::lock_guard lock(refit_mutex_);
    const auto certified = store_.trust_state(config_.trust).certified();
    const auto comparisons = store_.comparisons();
    auto universe = store_.entities();
    store_.publish_scoreboards(
        fit_snapshot(comparisons, certified, std::move(universe), config_.hyperparams));
    return store_.read_current_scoreboards();
}

Response Service::handle(const Request& r) {
    try {
        const auto parts = split_path(r.path);
        const auto& m = r.method;
        auto is = [&](std::initializer_list<const char*> pattern) {
            if (parts.size() != pattern.size()) return false;
            std::size_t i = 0;
            for (const char* p : pattern) {
                if (std::string_view(p) != "*" && parts[i] != p) return false;
                ++i;
            }
            return true;
        };

        const auto session = authenticate(r);
        const bool write = m == "POST" || m == "PUT" || m == "DELETE";
        auto require_contributor = [&]() -> const ContributorId& {
            if (!session) throw HttpError(401, "authentication required");
            if (!session->contributor) throw HttpError(403, "this endpoint needs a contributor account");
            return *session->contributor;
        };
        auto require_admin = [&] {
            if (!session) throw HttpError(401, "authentication required");
            if (!session->admin) throw HttpError(403, "admin role required");
        };
        if (write && session && !session->admin && !within_write_cap(session->token)) {
            throw HttpError(429, "write cap exceeded; retry next minute");
        }

        // -- public reads ----------------------------------------------------
        if (m == "GET" && is({"health"})) {
            const auto snap = store_.read_current_scoreboards();
            return json_response(200, {{"status", "ok"},
                                       {"snapshot_id", snap ? json(snap->id) : json(nullptr)}});
        }
        if (m == "GET" && is({"recommendations"})) {
            CriterionWeights w;
            if (const auto it = r.query.find("weights"); it != r.query.end()) {
                try {
                    w = CriterionWeights::parse(it->second);
                } catch (const ValidationError& e) {
                    throw HttpError(400, e.what());
                }
            }
            const std::size_t limit = query_size(r, "limit", 20, 1000);
            const std::size_t offset = query_size(r, "offset", 0, static_cast<std::size_t>(-1));
            const auto snap = current_snapshot();
            const auto ranked = weighted_rank(snap->score_matrix(), w);
            json items = json::array();
            for (std::size_t i = offset; i < ranked.size() && i < offset + limit; ++i) {
                items.push_back({{"rank", i + 1}, {"entity", ranked[i].entity.value},
                                 {"score", ranked[i].score}});
            }
            return json_response(200, {{"snapshot_id", snap->id},
                                       {"weights", weights_json(w)},
                                       {"total", ranked.size()},
                                       {"offset", offset},
                                       {"limit", limit},
                                       {"items", std::move(items)}});
        }
        if (m == "GET" && is({"entities", "*", "scores"})) {
            const EntityId entity{parts[1]};
            if (!store_.has_entity(entity)) throw HttpError(404, "unknown entity: " + entity.value);
            const auto snap = current_snapshot();
            json criteria = json::array();
            for (const auto& c : Criterion::all()) {
                double score = 0.0;
                int count = 0;
                for (const auto& b : snap->boards) {
                    if (b.criterion != c) continue;
                    if (auto it = b.rho.find(entity); it != b.rho.end()) score = it->second;
                    if (auto it = b.comparison_counts.find(entity); it != b.comparison_counts.end()) {
                        count = it->second;
                    }
                }
                criteria.push_back({{"criterion", c.id()}, {"name", std::string(c.name())},
                                    {"score", score}, {"comparison_count", count}});
            }
            return json_response(200, {{"entity", entity.value},
                                       {"snapshot_id", snap->id},
                                       {"criteria", std::move(criteria)}});
        }
        if (m == "GET" && is({"stats"})) {
            const auto snap = current_snapshot();
            const auto comparisons = store_.comparisons();
            const auto entities = store_.entities();
            auto body = json_io::to_json(build_report(comparisons, snap->score_matrix(), entities));
            body["snapshot_id"] = snap->id;
            return json_response(200, std::move(body));
        }
        if (m == "GET" && is({"export", "public.csv"})) {
            std::ostringstream out;
            store_.export_public_csv(out);
            return {200, out.str(), "text/csv; charset=utf-8"};
        }
        if (m == "GET" && is({"contributors", "*", "personal-info"})) {
            const ContributorId who{parts[1]};
            if (!store_.has_account(who)) throw HttpError(404, "unknown contributor: " + who.value);
            json fields = json::object();
            for (const auto& f : store_.personal_info(who, true)) fields[f.name] = f.value;
            return json_response(200, {{"contributor", who.value}, {"fields", std::move(fields)}});
        }

        // -- contributor endpoints --------------------------------------------
        if (m == "POST" && is({"comparisons"})) {
            const auto& who = require_contributor();
            Comparison c;
            try {
                c = json_io::comparison_from_json(parse_body(r), who, clock_());
            } catch (const ValidationError& e) {
                throw HttpError(400, e.what());
            }
            const auto id = store_.record_comparison(c);
            return json_response(201, {{"id", id},
                                       {"rating", normalize_slider(c.slider).value()},
                                       {"comparison", json_io::to_json(c)}});
        }
        if (m == "GET" && is({"me", "scores"})) {
            const auto& who = require_contributor();
            const auto snap = current_snapshot();
            const bool verified =
                std::find(snap->verified.begin(), snap->verified.end(), who) != snap->verified.end();
            const auto mine = store_.comparisons_of(who);
            json criteria = json::array();
            for (const auto& b : snap->boards) {
                std::map<EntityId, double> scores;
                bool converged = true;
                if (verified) {
                    if (auto it = b.theta.find(who); it != b.theta.end()) scores = it->second;
                } else {
                    auto data = contributor_data(mine, who, b.criterion);
                    std::erase_if(data.comparisons, [&](const FitComparison& fc) {
                        return !b.rho.contains(fc.entity_a) || !b.rho.contains(fc.entity_b);
                    });
                    if (!data.comparisons.empty()) {
                        FitDiagnostics diag;
                        scores = fit_nonverified(data, b, snap->hyperparams, &diag);
                        converged = diag.converged;
                    }
                }
                if (scores.empty()) continue;
                json s = json::object();
                for (const auto& [e, v] : scores) s[e.value] = v;
                criteria.push_back({{"criterion", b.criterion.id()},
                                    {"name", std::string(b.criterion.name())},
                                    {"converged", converged},
                                    {"scores", std::move(s)}});
            }
            return json_response(200, {{"contributor", who.value},
                                       {"verified", verified},
                                       {"snapshot_id", snap->id},
                                       {"criteria", std::move(criteria)}});
        }
        if (m == "POST" && is({"vouch"})) {
            const auto& who = require_contributor();
            const ContributorId to{body_string(parse_body(r), "to")};
            if (!store_.has_account(to)) throw HttpError(404, "unknown account: " + to.value);
            auto state = store_.trust_state(config_.trust);
            try {
                state.add_vouch(who, to);
            } catch (const ValidationError& e) {
                throw HttpError(400, e.what());
            }
            const bool created = store_.add_vouch(who, to);
            return json_response(200, {{"from", who.value},
                                       {"to", to.value},
                                       {"created", created},
                                       {"vouchee_certified", state.record(to).certified}});
        }
        if (m == "POST" && is({"privacy"})) {
            const auto& who = require_contributor();
            const auto body = parse_body(r);
            const EntityId entity{body_string(body, "entity")};
            const auto visibility = body_string(body, "visibility");
            if (visibility != "public" && visibility != "private") {
                throw HttpError(400, "visibility must be \"public\" or \"private\"");
            }
            if (!store_.has_entity(entity)) throw HttpError(404, "unknown entity: " + entity.value);
            store_.set_privacy(who, entity, visibility == "public");
            return json_response(200, {{"entity", entity.value}, {"visibility", visibility}});
        }
        if (m == "GET" && is({"rate-later"})) {
            const auto& who = require_contributor();
            json items = json::array();
            for (const auto& e : store_.rate_later(who)) {
                items.push_back({{"entity", e.entity.value}, {"added_at", e.added_at}});
            }
            return json_response(200, {{"items", std::move(items)}});
        }
        if (m == "POST" && is({"rate-later"})) {
            const auto& who = require_contributor();
            const EntityId entity{body_string(parse_body(r), "entity")};
            const bool added = store_.add_rate_later(who, entity, clock_());
            return json_response(200, {{"entity", entity.value}, {"added", added}});
        }
        if (m == "DELETE" && is({"rate-later", "*"})) {
            const auto& who = require_contributor();
            const bool removed = store_.remove_rate_later(who, EntityId{parts[1]});
            return json_response(200, {{"entity", parts[1]}, {"removed", removed}});
        }
        if (m == "GET" && is({"me", "personal-info"})) {
            const auto& who = require_contributor();
            json fields = json::array();
            for (const auto& f : store_.personal_info(who, false)) {
                fields.push_back({{"name", f.name}, {"value", f.value}, {"public", f.is_public}});
            }
            return json_response(200, {{"fields", std::move(fields)}});
        }
        if (m == "POST" && is({"me", "personal-info"})) {
            const auto& who = require_contributor();
            const auto body = parse_body(r);
            PersonalField f{body_string(body, "name"), "", false};
            if (!body.contains("value") || !body.at("value").is_string()) {
                throw HttpError(400, "missing or invalid field: value");
            }
            f.value = body.at("value").get<std::string>();
            if (body.contains("public")) {
                if (!body.at("public").is_boolean()) throw HttpError(400, "public must be a boolean");
                f.is_public = body.at("public").get<bool>();
            }
            store_.set_personal_field(who, f);
            return json_response(200, {{"name", f.name}, {"public", f.is_public}});
        }
        if (m == "GET" && is({"suggestions", "pair"})) {
            const auto& who = require_contributor();
            const auto entities = store_.entities();
            if (entities.size() < 2) throw HttpError(409, "fewer than two known entities");
            const auto all = store_.comparisons();
            const auto degree = entity_degrees(all, entities);
            std::set<std::pair<EntityId, EntityId>> compared;
            std::set<EntityId> rated;
            for (const auto& c : all) {
                if (c.contributor != who) continue;
                compared.insert(unordered_pair(c.entity_a, c.entity_b));
                rated.insert(c.entity_a);
                rated.insert(c.entity_b);
            }
            auto fresh = [&](const EntityId& a, const EntityId& b) {
                return a != b && !compared.contains(unordered_pair(a, b));
            };
            auto by_degree = [&](std::vector<EntityId> v) {
                std::stable_sort(v.begin(), v.end(), [&](const EntityId& l, const EntityId& rr) {
                    return std::pair(degree.at(l), l) < std::pair(degree.at(rr), rr);
                });
                return v;
            };
            const auto low_first = by_degree(entities);
            auto partner_for = [&](const EntityId& anchor) -> std::optional<EntityId> {
                for (const auto& e : low_first) {
                    if (fresh(anchor, e)) return e;
                }
                return std::nullopt;
            };
            auto answer = [&](const EntityId& a, const EntityId& b, const char* reason) {
                return json_response(200, {{"entity_a", a.value}, {"entity_b", b.value}, {"reason", reason}});
            };

            const auto later = store_.rate_later(who);
            for (std::size_t i = 0; i < later.size(); ++i) {
                for (std::size_t j = i + 1; j < later.size(); ++j) {
                    if (fresh(later[i].entity, later[j].entity)) {
                        return answer(later[i].entity, later[j].entity, "rate_later");
                    }
                }
            }
            for (const auto& e : later) {
                if (auto p = partner_for(e.entity)) return answer(e.entity, *p, "rate_later");
            }
            for (const auto& anchor : by_degree({rated.begin(), rated.end()})) {
                if (auto p = partner_for(anchor)) return answer(anchor, *p, "densify");
            }
            for (const auto& anchor : low_first) {
                if (auto p = partner_for(anchor)) return answer(anchor, *p, "densify");
            }
            return answer(low_first[0], low_first[1], "repeat");
        }

        // -- admin ------------------------------------------------------------
        if (m == "POST" && is({"admin", "refit"})) {
            require_admin();
            const auto snap = refit();
            json diagnostics = json::array();
            for (const auto& b : snap->boards) {
                auto d = json_io::to_json(b.diagnostics);
                d["criterion"] = b.criterion.id();
                diagnostics.push_back(std::move(d));
            }
            return json_response(200, {{"snapshot_id", snap->id},
                                       {"converged", !snap->any_unconverged()},
                                       {"verified_contributors", snap->verified.size()},
                                       {"diagnostics", std::move(diagnostics)}});
        }
        if (m == "POST" && is({"admin", "accounts"})) {
            require_admin();
            const auto body = parse_body(r);
            const ContributorId who{body_string(body, "name")};
            const Role role = body.value("role", std::string("contributor")) == "admin" ? Role::Admin
                                                                                       : Role::Contributor;
            const bool created = store_.create_account(who, role);
            const std::string token =
                body.contains("token") ? body_string(body, "token") : random_token();
            store_.set_token(who, token);
            return json_response(created ? 201 : 200,
                                 {{"name", who.value}, {"created", created}, {"token", token}});
        }
        if (m == "POST" && is({"auth", "email-verified"})) {
            require_admin();
            const auto body = parse_body(r);
            const ContributorId who{body_string(body, "account")};
            const auto email = body_string(body, "email");
            if (!store_.has_account(who)) throw HttpError(404, "unknown account: " + who.value);
            bool trusted = false;
            try {
                trusted = verify_email_domain(email, trusted_domains());
            } catch (const ValidationError& e) {
                throw HttpError(400, e.what());
            }
            store_.set_email(who, email, trusted);
            return json_response(200, {{"account", who.value},
                                       {"email_domain", email_domain(email)},
                                       {"email_verified", trusted}});
        }
        if ((m == "GET" || m == "PUT") && is({"admin", "trusted-domains"})) {
            require_admin();
            if (m == "PUT") {
                const auto body = parse_body(r);
                if (!body.contains("domains") || !body.at("domains").is_array()) {
                    throw HttpError(400, "missing or invalid field: domains");
                }
                std::string text;
                for (const auto& d : body.at("domains")) {
                    if (!d.is_string()) throw HttpError(400, "domains must be strings");
                    text += d.get<std::string>() + "\n";
                }
                TrustedDomainList list;
                try {
                    list = TrustedDomainList::parse(text);
                } catch (const ValidationError& e) {
                    throw HttpError(400, e.what());
                }
                if (config_.trusted_domains_file) {
                    const auto tmp = config_.trusted_domains_file->string() + ".tmp";
                    {
                        std::ofstream out(tmp, std::ios::trunc);
                        for (const auto& d : list.domains()) out << d << '\n';
                        if (!out) throw std::runtime_error("cannot write trusted-domain file");
                    }
                    std::filesystem::rename(tmp, *config_.trusted_domains_file);
                }
                {
                    std::lock_guard lock(domains_mutex_);
                    domains_ = list;
                }
                // Stored addresses were confirmed by the callback; only the
                // domain rule changes.
                for (const auto& a : store_.accounts()) {
                    if (a.email) store_.set_email(a.id, *a.email, list.contains(*a.email_domain));
                }
            }
            const auto list = trusted_domains();
            return json_response(200, {{"domains", json(std::vector<std::string>(list.domains().begin(),
                                                                                 list.domains().end()))}});
        }

        return error_response(404, "no route for " + m + " " + r.path);
    } catch (const HttpError& e) {
        return error_response(e.status, e.what());
    } catch (const NotFoundError& e) {
        return error_response(404, e.what());
    } catch (const ValidationError& e) {
        return error_response(400, e.what());
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

// ---------------------------------------------------------------------------
// HTTP transport

struct HttpServer::Impl {
    Service& service;
    httplib::Server server;

    explicit Impl(Service& s) : service(s) {
        auto handler = [this](const httplib::Request& req, httplib::Response& res) {
            Request r;
            r.method = req.method;
            r.path = req.path;
            for (const auto& [k, v] : req.params) r.query.emplace(k, v);
            r.body = req.body;
            const auto auth = req.get_header_value("Authorization");
            if (auth.rfind("Bearer ", 0) == 0) r.token = auth.substr(7);
            const auto out = service.handle(r);
            res.status = out.status;
            res.set_content(out.body, out.content_type);
        };
        // SO_REUSEPORT would let a second server share the port silently.
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
        });
        server.Get(".*", handler);
        server.Post(".*", handler);
        server.Put(".*", handler);
        server.Delete(".*", handler);
    }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}
HttpServer::~HttpServer() = default;

bool HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        port_ = impl_->server.bind_to_any_port(host);
        return port_ > 0;
    }
    if (!impl_->server.bind_to_port(host, port)) return false;
    port_ = port;
    return true;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }

void HttpServer::stop() { impl_->server.stop(); }

}  // namespace pairscore::api
