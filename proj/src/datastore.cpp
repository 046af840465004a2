#include "pairscore/datastore.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>

namespace pairscore {

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS accounts (
    public_name TEXT PRIMARY KEY,
    role INTEGER NOT NULL DEFAULT 0,
    token TEXT UNIQUE,
    email TEXT,
    email_domain TEXT,
    email_verified INTEGER NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS entities (
    id TEXT PRIMARY KEY,
    title TEXT
);
CREATE TABLE IF NOT EXISTS comparisons (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    contributor TEXT NOT NULL REFERENCES accounts(public_name),
    entity_a TEXT NOT NULL,
    entity_b TEXT NOT NULL,
    pair_lo TEXT NOT NULL,
    pair_hi TEXT NOT NULL,
    criterion INTEGER NOT NULL,
    slider INTEGER NOT NULL,
    confidence INTEGER NOT NULL,
    submitted_at INTEGER NOT NULL,
    response_time_ms INTEGER NOT NULL,
    trajectory TEXT NOT NULL,
    UNIQUE (contributor, pair_lo, pair_hi, criterion)
);
CREATE TABLE IF NOT EXISTS vouches (
    voucher TEXT NOT NULL,
    vouchee TEXT NOT NULL,
    PRIMARY KEY (voucher, vouchee)
);
CREATE TABLE IF NOT EXISTS privacy (
    contributor TEXT NOT NULL,
    entity TEXT NOT NULL,
    is_public INTEGER NOT NULL,
    PRIMARY KEY (contributor, entity)
);
CREATE TABLE IF NOT EXISTS personal_info (
    contributor TEXT NOT NULL,
    field TEXT NOT NULL,
    value TEXT NOT NULL,
    is_public INTEGER NOT NULL,
    PRIMARY KEY (contributor, field)
);
CREATE TABLE IF NOT EXISTS rate_later (
    contributor TEXT NOT NULL,
    entity TEXT NOT NULL,
    added_at INTEGER NOT NULL,
    PRIMARY KEY (contributor, entity)
);
)sql";

class Stmt {
public:
    Stmt(sqlite3* db, const char* sql) : db_(db) {
        if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
            throw std::runtime_error(std::string("sqlite prepare: ") + sqlite3_errmsg(db));
        }
    }
    ~Stmt() { sqlite3_finalize(stmt_); }
    Stmt(const Stmt&) = delete;
    Stmt& operator=(const Stmt&) = delete;

    Stmt& bind(int i, const std::string& s) {
        check(sqlite3_bind_text(stmt_, i, s.data(), static_cast<int>(s.size()), SQLITE_TRANSIENT));
        return *this;
    }
    Stmt& bind(int i, std::int64_t v) {
        check(sqlite3_bind_int64(stmt_, i, v));
        return *this;
    }
    Stmt& bind(int i, int v) { return bind(i, static_cast<std::int64_t>(v)); }
    Stmt& bind(int i, bool v) { return bind(i, static_cast<std::int64_t>(v ? 1 : 0)); }
    Stmt& bind(int i, const std::optional<std::string>& s) {
        if (s) return bind(i, *s);
        check(sqlite3_bind_null(stmt_, i));
        return *this;
    }

    /// True while a row is available.
    bool step() {
        const int rc = sqlite3_step(stmt_);
        if (rc == SQLITE_ROW) return true;
        if (rc == SQLITE_DONE) return false;
        throw std::runtime_error(std::string("sqlite step: ") + sqlite3_errmsg(db_));
    }
    void run() {
        while (step()) {
        }
    }

    std::string text(int col) const {
        const auto* p = sqlite3_column_text(stmt_, col);
        return p ? std::string(reinterpret_cast<const char*>(p),
                               static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col)))
                 : std::string();
    }
    std::optional<std::string> opt_text(int col) const {
        if (sqlite3_column_type(stmt_, col) == SQLITE_NULL) return std::nullopt;
        return text(col);
    }
    std::int64_t integer(int col) const { return sqlite3_column_int64(stmt_, col); }

private:
    void check(int rc) {
        if (rc != SQLITE_OK) throw std::runtime_error(std::string("sqlite bind: ") + sqlite3_errmsg(db_));
    }

    sqlite3* db_;
    sqlite3_stmt* stmt_ = nullptr;
};

void exec(sqlite3* db, const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
        std::string msg = err ? err : "unknown error";
        sqlite3_free(err);
        throw std::runtime_error("sqlite: " + msg);
    }
}

std::string encode_trajectory(const std::vector<TrajectoryPoint>& t) {
    std::string out;
    for (const auto& p : t) {
        if (!out.empty()) out += ';';
        out += std::to_string(p.offset_ms) + ':' + std::to_string(p.position);
    }
    return out;
}

std::vector<TrajectoryPoint> decode_trajectory(const std::string& s) {
    std::vector<TrajectoryPoint> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ';')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw InvariantError("corrupt trajectory: " + s);
        out.push_back({std::stoll(item.substr(0, colon)), std::stoi(item.substr(colon + 1))});
    }
    return out;
}

constexpr const char* kComparisonColumns =
    "contributor, entity_a, entity_b, criterion, slider, confidence, submitted_at, "
    "response_time_ms, trajectory";

Comparison comparison_row(const Stmt& s) {
    Comparison c;
    c.contributor = {s.text(0)};
    c.entity_a = {s.text(1)};
    c.entity_b = {s.text(2)};
    c.criterion = Criterion(static_cast<int>(s.integer(3)));
    c.slider = static_cast<int>(s.integer(4));
    c.confidence = static_cast<int>(s.integer(5));
    c.submitted_at = s.integer(6);
    c.response_time_ms = s.integer(7);
    c.slider_trajectory = decode_trajectory(s.text(8));
    return c;
}

}  // namespace

struct Datastore::Impl {
    sqlite3* db = nullptr;
    std::optional<std::filesystem::path> snapshot_path;
    mutable std::mutex db_mutex;
    mutable std::mutex snapshot_mutex;
    std::shared_ptr<const Snapshot> current;

    explicit Impl(const std::string& uri) {
        if (sqlite3_open(uri.c_str(), &db) != SQLITE_OK) {
            std::string msg = db ? sqlite3_errmsg(db) : "out of memory";
            sqlite3_close(db);
            throw std::runtime_error("cannot open database: " + msg);
        }
        sqlite3_busy_timeout(db, 5000);
        exec(db, "PRAGMA journal_mode=WAL;");
        exec(db, "PRAGMA synchronous=NORMAL;");
        exec(db, kSchema);
    }
    ~Impl() { sqlite3_close(db); }

    bool account_exists(const ContributorId& id) const {
        Stmt s(db, "SELECT 1 FROM accounts WHERE public_name = ?");
        s.bind(1, id.value);
        return s.step();
    }
    void require_account(const ContributorId& id) const {
        if (!account_exists(id)) throw NotFoundError("unknown account: " + id.value);
    }
    void ensure_entity(const EntityId& id) {
        Stmt(db, "INSERT OR IGNORE INTO entities (id) VALUES (?)").bind(1, id.value).run();
    }
    std::int64_t upsert_comparison(const Comparison& c) {
        validate(c);
        require_account(c.contributor);
        ensure_entity(c.entity_a);
        ensure_entity(c.entity_b);
        const auto [lo, hi] = unordered_pair(c.entity_a, c.entity_b);
        Stmt s(db,
               "INSERT INTO comparisons (contributor, entity_a, entity_b, pair_lo, pair_hi, criterion, "
               "slider, confidence, submitted_at, response_time_ms, trajectory) "
               "VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?) "
               "ON CONFLICT (contributor, pair_lo, pair_hi, criterion) DO UPDATE SET "
               "entity_a = excluded.entity_a, entity_b = excluded.entity_b, slider = excluded.slider, "
               "confidence = excluded.confidence, submitted_at = excluded.submitted_at, "
               "response_time_ms = excluded.response_time_ms, trajectory = excluded.trajectory");
        s.bind(1, c.contributor.value)
            .bind(2, c.entity_a.value)
            .bind(3, c.entity_b.value)
            .bind(4, lo.value)
            .bind(5, hi.value)
            .bind(6, c.criterion.id())
            .bind(7, c.slider)
            .bind(8, c.confidence)
            .bind(9, c.submitted_at)
            .bind(10, c.response_time_ms)
            .bind(11, encode_trajectory(c.slider_trajectory));
        s.run();
        Stmt id(db,
                "SELECT id FROM comparisons WHERE contributor = ? AND pair_lo = ? AND pair_hi = ? "
                "AND criterion = ?");
        id.bind(1, c.contributor.value).bind(2, lo.value).bind(3, hi.value).bind(4, c.criterion.id());
        if (!id.step()) throw InvariantError("comparison vanished after upsert");
        return id.integer(0);
    }
    void set_privacy(const ContributorId& who, const EntityId& entity, bool is_public) {
        Stmt(db,
             "INSERT INTO privacy (contributor, entity, is_public) VALUES (?, ?, ?) "
             "ON CONFLICT (contributor, entity) DO UPDATE SET is_public = excluded.is_public")
            .bind(1, who.value)
            .bind(2, entity.value)
            .bind(3, is_public)
            .run();
    }
    std::vector<Comparison> select_comparisons(const char* where, const std::string* arg) const {
        std::string sql = std::string("SELECT ") + kComparisonColumns + " FROM comparisons" + where +
                          " ORDER BY id";
        Stmt s(db, sql.c_str());
        if (arg) s.bind(1, *arg);
        std::vector<Comparison> out;
        while (s.step()) out.push_back(comparison_row(s));
        return out;
    }
};

Datastore::Datastore(const std::filesystem::path& directory) {
    std::filesystem::create_directories(directory);
    impl_ = std::make_unique<Impl>((directory / "pairscore.db").string());
    impl_->snapshot_path = directory / "snapshots" / "current.json";
    if (std::filesystem::exists(*impl_->snapshot_path)) {
        auto s = read_snapshot_file(*impl_->snapshot_path);
        validate_complete(s);
        impl_->current = std::make_shared<const Snapshot>(std::move(s));
    }
}

Datastore::Datastore() : impl_(std::make_unique<Impl>(":memory:")) {}

Datastore::~Datastore() = default;

// accounts -------------------------------------------------------------------

bool Datastore::create_account(const ContributorId& id, Role role) {
    if (id.value.empty()) throw ValidationError("account name must not be empty");
    std::lock_guard lock(impl_->db_mutex);
    Stmt s(impl_->db, "INSERT OR IGNORE INTO accounts (public_name, role) VALUES (?, ?)");
    s.bind(1, id.value).bind(2, role == Role::Admin ? 1 : 0).run();
    return sqlite3_changes(impl_->db) > 0;
}

bool Datastore::has_account(const ContributorId& id) const {
    std::lock_guard lock(impl_->db_mutex);
    return impl_->account_exists(id);
}

std::optional<Account> Datastore::account(const ContributorId& id) const {
    std::lock_guard lock(impl_->db_mutex);
    Stmt s(impl_->db,
           "SELECT role, email, email_domain, email_verified FROM accounts WHERE public_name = ?");
    s.bind(1, id.value);
    if (!s.step()) return std::nullopt;
    return Account{id, s.integer(0) == 1 ? Role::Admin : Role::Contributor, s.opt_text(1),
                   s.opt_text(2), s.integer(3) != 0};
}

std::vector<Account> Datastore::accounts() const {
    std::lock_guard lock(impl_->db_mutex);
    Stmt s(impl_->db,
           "SELECT public_name, role, email, email_domain, email_verified FROM accounts "
           "ORDER BY public_name");
    std::vector<Account> out;
    while (s.step()) {
        out.push_back({{s.text(0)},
                       s.integer(1) == 1 ? Role::Admin : Role::Contributor,
                       s.opt_text(2),
                       s.opt_text(3),
                       s.integer(4) != 0});
    }
    return out;
}

void Datastore::set_token(const ContributorId& id, const std::string& token) {
    if (token.empty()) throw ValidationError("token must not be empty");
    std::lock_guard lock(impl_->db_mutex);
    impl_->require_account(id);
    Stmt(impl_->db, "UPDATE accounts SET token = ? WHERE public_name = ?")
        .bind(1, token)
        .bind(2, id.value)
        .run();
}

std::optional<ContributorId> Datastore::account_for_token(const std::string& token) const {
    if (token.empty()) return std::nullopt;
    std::lock_guard lock(impl_->db_mutex);
    Stmt s(impl_->db, "SELECT public_name FROM accounts WHERE token = ?");
    s.bind(1, token);
    if (!s.step()) return std::nullopt;
    return ContributorId{s.text(0)};
}

void Datastore::set_email(const ContributorId& id, const std::string& email, bool verified) {
    const std::string domain = email_domain(email);
    std::lock_guard lock(impl_->db_mutex);
    impl_->require_account(id);
    Stmt(impl_->db,
         "UPDATE accounts SET email = ?, email_domain = ?, email_verified = ? WHERE public_name = ?")
        .bind(1, email)
        .bind(2, domain)
        .bind(3, verified)
        .bind(4, id.value)
        .run();
}

// trust ----------------------------------------------------------------------

bool Datastore::add_vouch(const ContributorId& from, const ContributorId& to) {
    if (from == to) throw ValidationError("an account cannot vouch for itself");
    std::lock_guard lock(impl_->db_mutex);
    impl_->require_account(from);
    impl_->require_account(to);
    Stmt(impl_->db, "INSERT OR IGNORE INTO vouches (voucher, vouchee) VALUES (?, ?)")
        .bind(1, from.value)
        .bind(2, to.value)
        .run();
    return sqlite3_changes(impl_->db) > 0;
}

std::vector<std::pair<ContributorId, ContributorId>> Datastore::vouches() const {
    std::lock_guard lock(impl_->db_mutex);
    Stmt s(impl_->db, "SELECT voucher, vouchee FROM vouches ORDER BY voucher, vouchee");
    std::vector<std::pair<ContributorId, ContributorId>> out;
    while (s.step()) out.emplace_back(ContributorId{s.text(0)}, ContributorId{s.text(1)});
    return out;
}

TrustState Datastore::trust_state(const TrustParams& params) const {
    std::vector<TrustRecord> records;
    std::map<ContributorId, std::size_t> index;
    for (const auto& a : accounts()) {
        TrustRecord r;
        r.account = a.id;
        r.email_domain = a.email_domain;
        r.email_verified = a.email_verified;
        index[a.id] = records.size();
        records.push_back(std::move(r));
    }
    for (const auto& [from, to] : vouches()) {
        if (index.count(from) && index.count(to)) records[index[to]].vouches_received.push_back(from);
    }
    return TrustState::from_records(std::move(records), params);
}

// entities -------------------------------------------------------------------

void Datastore::register_entity(const EntityId& id, std::optional<std::string> title) {
    if (id.value.empty()) throw ValidationError("entity id must not be empty");
    std::lock_guard lock(impl_->db_mutex);
    Stmt(impl_->db,
         "INSERT INTO entities (id, title) VALUES (?, ?) "
         "ON CONFLICT (id) DO UPDATE SET title = COALESCE(excluded.title, entities.title)")
        .bind(1, id.value)
        .bind(2, title)
        .run();
}

bool Datastore::has_entity(const EntityId& id) const {
    std::lock_guard lock(impl_->db_mutex);
    Stmt s(impl_->db, "SELECT 1 FROM entities WHERE id = ?");
    s.bind(1, id.value);
    return s.step();
}

std::vector<EntityId> Datastore::entities() const {
    std::lock_guard lock(impl_->db_mutex);
    Stmt s(impl_->db, "SELECT id FROM entities ORDER BY id");
    std::vector<EntityId> out;
    while (s.step()) out.push_back({s.text(0)});
    return out;
}

// comparisons ----------------------------------------------------------------

std::int64_t Datastore::record_comparison(const Comparison& c) {
    std::lock_guard lock(impl_->db_mutex);
    exec(impl_->db, "BEGIN IMMEDIATE");
    try {
        const auto id = impl_->upsert_comparison(c);
        exec(impl_->db, "COMMIT");
        return id;
    } catch (...) {
        exec(impl_->db, "ROLLBACK");
        throw;
    }
}

std::vector<Comparison> Datastore::comparisons() const {
    std::lock_guard lock(impl_->db_mutex);
    return impl_->select_comparisons("", nullptr);
}

std::vector<Comparison> Datastore::comparisons_of(const ContributorId& id) const {
    std::lock_guard lock(impl_->db_mutex);
    return impl_->select_comparisons(" WHERE contributor = ?", &id.value);
}

std::size_t Datastore::comparison_count() const {
    std::lock_guard lock(impl_->db_mutex);
    Stmt s(impl_->db, "SELECT COUNT(*) FROM comparisons");
    s.step();
    return static_cast<std::size_t>(s.integer(0));
}

// privacy and personal information ------------------------------------------

void Datastore::set_privacy(const ContributorId& who, const EntityId& entity, bool is_public) {
    std::lock_guard lock(impl_->db_mutex);
    impl_->require_account(who);
    impl_->set_privacy(who, entity, is_public);
}

bool Datastore::is_public(const ContributorId& who, const EntityId& entity) const {
    std::lock_guard lock(impl_->db_mutex);
    Stmt s(impl_->db, "SELECT is_public FROM privacy WHERE contributor = ? AND entity = ?");
    s.bind(1, who.value).bind(2, entity.value);
    return s.step() && s.integer(0) != 0;
}

void Datastore::set_personal_field(const ContributorId& who, const PersonalField& field) {
    if (field.name.empty()) throw ValidationError("personal field name must not be empty");
    std::lock_guard lock(impl_->db_mutex);
    impl_->require_account(who);
    Stmt(impl_->db,
         "INSERT INTO personal_info (contributor, field, value, is_public) VALUES (?, ?, ?, ?) "
         "ON CONFLICT (contributor, field) DO UPDATE SET value = excluded.value, "
         "is_public = excluded.is_public")
        .bind(1, who.value)
        .bind(2, field.name)
        .bind(3, field.value)
        .bind(4, field.is_public)
        .run();
}

std::vector<PersonalField> Datastore::personal_info(const ContributorId& who, bool public_only) const {
    std::lock_guard lock(impl_->db_mutex);
    Stmt s(impl_->db,
           public_only ? "SELECT field, value, is_public FROM personal_info WHERE contributor = ? "
                         "AND is_public = 1 ORDER BY field"
                       : "SELECT field, value, is_public FROM personal_info WHERE contributor = ? "
                         "ORDER BY field");
    s.bind(1, who.value);
    std::vector<PersonalField> out;
    while (s.step()) out.push_back({s.text(0), s.text(1), s.integer(2) != 0});
    return out;
}

// rate-later -----------------------------------------------------------------

bool Datastore::add_rate_later(const ContributorId& who, const EntityId& entity, Timestamp now) {
    if (entity.value.empty()) throw ValidationError("entity id must not be empty");
    std::lock_guard lock(impl_->db_mutex);
    impl_->require_account(who);
    impl_->ensure_entity(entity);
    Stmt(impl_->db, "INSERT OR IGNORE INTO rate_later (contributor, entity, added_at) VALUES (?, ?, ?)")
        .bind(1, who.value)
        .bind(2, entity.value)
        .bind(3, now)
        .run();
    return sqlite3_changes(impl_->db) > 0;
}

bool Datastore::remove_rate_later(const ContributorId& who, const EntityId& entity) {
    std::lock_guard lock(impl_->db_mutex);
    Stmt(impl_->db, "DELETE FROM rate_later WHERE contributor = ? AND entity = ?")
        .bind(1, who.value)
        .bind(2, entity.value)
        .run();
    return sqlite3_changes(impl_->db) > 0;
}

std::vector<RateLaterEntry> Datastore::rate_later(const ContributorId& who) const {
    std::lock_guard lock(impl_->db_mutex);
    Stmt s(impl_->db,
           "SELECT entity, added_at FROM rate_later WHERE contributor = ? ORDER BY added_at, entity");
    s.bind(1, who.value);
    std::vector<RateLaterEntry> out;
    while (s.step()) out.push_back({who, {s.text(0)}, s.integer(1)});
    return out;
}

// public dataset -------------------------------------------------------------

std::size_t Datastore::export_public_csv(std::ostream& out) const {
    std::vector<csv::PublicRow> rows;
    {
        std::lock_guard lock(impl_->db_mutex);
        std::set<std::pair<std::string, std::string>> open;
        Stmt p(impl_->db, "SELECT contributor, entity FROM privacy WHERE is_public = 1");
        while (p.step()) open.emplace(p.text(0), p.text(1));
        for (const auto& c : impl_->select_comparisons("", nullptr)) {
            if (open.count({c.contributor.value, c.entity_a.value}) &&
                open.count({c.contributor.value, c.entity_b.value})) {
                rows.push_back(csv::to_public_row(c));
            }
        }
    }
    const auto n = rows.size();
    csv::write_public(out, std::move(rows));
    return n;
}

ImportReport Datastore::import_csv(std::istream& in) {
    auto parsed = csv::read_public(in);
    ImportReport report;
    report.rejected = std::move(parsed.rejected);

    std::lock_guard lock(impl_->db_mutex);
    exec(impl_->db, "BEGIN IMMEDIATE");
    try {
        for (const auto& [line, row] : parsed.rows) {
            Comparison c;
            c.contributor = {row.public_username};
            c.entity_a = {row.video_a};
            c.entity_b = {row.video_b};
            c.criterion = Criterion(row.criterion);
            c.slider = row.score;
            c.confidence = row.confidence;
            c.submitted_at = csv::parse_date(row.week_date);
            try {
                validate(c);
            } catch (const ValidationError& e) {
                report.rejected.push_back({line, e.what()});
                continue;
            }
            Stmt(impl_->db, "INSERT OR IGNORE INTO accounts (public_name) VALUES (?)")
                .bind(1, c.contributor.value)
                .run();
            impl_->upsert_comparison(c);
            impl_->set_privacy(c.contributor, c.entity_a, true);
            impl_->set_privacy(c.contributor, c.entity_b, true);
            ++report.imported;
        }
        exec(impl_->db, "COMMIT");
    } catch (...) {
        exec(impl_->db, "ROLLBACK");
        throw;
    }
    std::sort(report.rejected.begin(), report.rejected.end(),
              [](const csv::RowError& l, const csv::RowError& r) { return l.line < r.line; });
    return report;
}

// snapshots ------------------------------------------------------------------

std::string Datastore::publish_scoreboards(Snapshot snapshot) {
    validate_complete(snapshot);
    std::sort(snapshot.boards.begin(), snapshot.boards.end(),
              [](const ScoreBoard& l, const ScoreBoard& r) { return l.criterion < r.criterion; });
    if (snapshot.id.empty()) snapshot.id = content_id(snapshot);
    auto next = std::make_shared<const Snapshot>(std::move(snapshot));
    std::lock_guard lock(impl_->snapshot_mutex);
    if (impl_->snapshot_path) write_snapshot_file(*next, *impl_->snapshot_path);
    impl_->current = next;
    return next->id;
}

std::shared_ptr<const Snapshot> Datastore::read_current_scoreboards() const {
    std::lock_guard lock(impl_->snapshot_mutex);
    return impl_->current;
}

}  // namespace pairscore
