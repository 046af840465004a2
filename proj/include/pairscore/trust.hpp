#pragma once

#include "pairscore/core.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace pairscore {

/// Lowercase email domains whose addresses certify an account on their own.
class TrustedDomainList {
public:
    TrustedDomainList() = default;
    explicit TrustedDomainList(const std::vector<std::string>& domains);

    /// One domain per line; '#' starts a comment; surrounding whitespace is
    /// ignored. Wildcards are rejected.
    static TrustedDomainList parse(std::string_view text);
    static TrustedDomainList load(const std::filesystem::path& path);

    [[nodiscard]] bool contains(std::string_view domain) const;
    [[nodiscard]] const std::set<std::string>& domains() const noexcept { return domains_; }
    [[nodiscard]] bool empty() const noexcept { return domains_.empty(); }

private:
    std::set<std::string> domains_;
};

/// Lowercased domain part of a syntactically valid address (one '@', both
/// parts nonempty). Throws ValidationError otherwise.
std::string email_domain(std::string_view email);

bool verify_email_domain(std::string_view email, const TrustedDomainList& list);

struct TrustParams {
    double threshold = 2.0;  // vouching power needed for certification
    double damping = 0.5;    // power of a vouch-certified account
};

struct TrustRecord {
    ContributorId account;
    std::optional<std::string> email_domain;
    bool email_verified = false;
    std::vector<ContributorId> vouches_received;
    double vouching_power = 0.0;
    bool certified = false;

    friend bool operator==(const TrustRecord&, const TrustRecord&) = default;
};

/// Least fixpoint of the certification rule: email-verified accounts hold
/// power 1; any other account is certified once the summed power of its
/// certified vouchers reaches the threshold, and then holds the damped power.
/// Vouches from unknown accounts carry no power; repeated vouches count once.
std::vector<TrustRecord> recompute_certifications(std::vector<TrustRecord> records,
                                                  const TrustParams& params = {});

/// Accounts and their vouches, with certifications kept at the fixpoint.
class TrustState {
public:
    explicit TrustState(TrustParams params = {}) : params_(params) {}

    /// Rebuilds a state from stored records (vouch lists are taken as given).
    static TrustState from_records(std::vector<TrustRecord> records, TrustParams params = {});

    void add_account(const ContributorId& account);
    void set_email(const ContributorId& account, std::optional<std::string> domain, bool verified);

    /// Returns false if the vouch already existed. Throws ValidationError for a
    /// self-vouch, an unknown account, or a voucher without power.
    bool add_vouch(const ContributorId& from, const ContributorId& to);

    [[nodiscard]] bool contains(const ContributorId& account) const;
    [[nodiscard]] const TrustRecord& record(const ContributorId& account) const;
    [[nodiscard]] std::vector<TrustRecord> records() const;
    [[nodiscard]] std::set<ContributorId> certified() const;
    [[nodiscard]] const TrustParams& params() const noexcept { return params_; }

private:
    void refresh();

    TrustParams params_;
    std::map<ContributorId, TrustRecord> records_;
};

}  // namespace pairscore
