#pragma once

#include "pairscore/core.hpp"
#include "pairscore/csv.hpp"
#include "pairscore/snapshot.hpp"
#include "pairscore/trust.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pairscore {

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Role { Contributor, Admin };

struct Account {
    ContributorId id;
    Role role = Role::Contributor;
    std::optional<std::string> email;
    std::optional<std::string> email_domain;
    bool email_verified = false;
};

struct RateLaterEntry {
    ContributorId contributor;
    EntityId entity;
    Timestamp added_at = 0;
};

/// One personal-information field. Private fields are never exported.
struct PersonalField {
    std::string name;   // e.g. "degrees", "expertise", "age_range"
    std::string value;
    bool is_public = false;

    friend bool operator==(const PersonalField&, const PersonalField&) = default;
};

struct ImportReport {
    std::size_t imported = 0;
    std::vector<csv::RowError> rejected;
};

/// Persistent platform state: accounts, vouches, comparisons with privacy
/// flags and interaction metadata, rate-later lists, personal information, and
/// the currently published snapshot.
///
/// Backed by SQLite in write-ahead-log mode. All methods are thread-safe;
/// writes are serialized. The published snapshot is swapped atomically, so a
/// reader holding the returned pointer always sees one consistent snapshot.
class Datastore {
public:
    /// Opens (or creates) a store under `directory`.
    explicit Datastore(const std::filesystem::path& directory);
    /// A private in-memory store.
    Datastore();
    ~Datastore();
    Datastore(const Datastore&) = delete;
    Datastore& operator=(const Datastore&) = delete;

    // accounts ---------------------------------------------------------------
    /// Returns false when the account already existed (left unchanged).
    bool create_account(const ContributorId& id, Role role = Role::Contributor);
    [[nodiscard]] bool has_account(const ContributorId& id) const;
    [[nodiscard]] std::optional<Account> account(const ContributorId& id) const;
    [[nodiscard]] std::vector<Account> accounts() const;
    void set_token(const ContributorId& id, const std::string& token);
    [[nodiscard]] std::optional<ContributorId> account_for_token(const std::string& token) const;
    void set_email(const ContributorId& id, const std::string& email, bool verified);

    // trust ------------------------------------------------------------------
    /// Persists a vouch edge; returns false if it already existed. Callers
    /// check vouching power first (see TrustState::add_vouch).
    bool add_vouch(const ContributorId& from, const ContributorId& to);
    [[nodiscard]] std::vector<std::pair<ContributorId, ContributorId>> vouches() const;
    [[nodiscard]] TrustState trust_state(const TrustParams& params = {}) const;

    // entities ---------------------------------------------------------------
    void register_entity(const EntityId& id, std::optional<std::string> title = std::nullopt);
    [[nodiscard]] bool has_entity(const EntityId& id) const;
    [[nodiscard]] std::vector<EntityId> entities() const;

    // comparisons ------------------------------------------------------------
    /// Upserts by (contributor, unordered pair, criterion) and returns the
    /// stored id, which is stable across resubmissions. Metadata is kept
    /// verbatim. Throws ValidationError or NotFoundError (unknown contributor).
    std::int64_t record_comparison(const Comparison& c);
    [[nodiscard]] std::vector<Comparison> comparisons() const;
    [[nodiscard]] std::vector<Comparison> comparisons_of(const ContributorId& id) const;
    [[nodiscard]] std::size_t comparison_count() const;

    // privacy and personal information --------------------------------------
    void set_privacy(const ContributorId& who, const EntityId& entity, bool is_public);
    [[nodiscard]] bool is_public(const ContributorId& who, const EntityId& entity) const;
    void set_personal_field(const ContributorId& who, const PersonalField& field);
    [[nodiscard]] std::vector<PersonalField> personal_info(const ContributorId& who,
                                                           bool public_only) const;

    // rate-later -------------------------------------------------------------
    bool add_rate_later(const ContributorId& who, const EntityId& entity, Timestamp now);
    bool remove_rate_later(const ContributorId& who, const EntityId& entity);
    [[nodiscard]] std::vector<RateLaterEntry> rate_later(const ContributorId& who) const;

    // public dataset ---------------------------------------------------------
    /// Writes exportable comparisons (both entities public for that
    /// contributor) in the public CSV format. Returns the row count.
    std::size_t export_public_csv(std::ostream& out) const;
    /// Imports public CSV rows as public comparisons, creating accounts and
    /// entities as needed. Throws ValidationError on a bad header.
    ImportReport import_csv(std::istream& in);

    // snapshots --------------------------------------------------------------
    /// Validates completeness, assigns a content id when empty, persists the
    /// snapshot (file-backed stores) and swaps it in. Returns the id.
    std::string publish_scoreboards(Snapshot snapshot);
    [[nodiscard]] std::shared_ptr<const Snapshot> read_current_scoreboards() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace pairscore
