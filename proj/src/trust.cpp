#include "pairscore/trust.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace pairscore {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string normalize_domain(std::string_view raw) {
    std::string d = lower(trim(raw));
    if (!d.empty() && d.front() == '@') d.erase(0, 1);
    if (d.empty()) throw ValidationError("empty domain");
    if (d.find_first_of("*?") != std::string::npos) {
        throw ValidationError("wildcard domains are not allowed: " + d);
    }
    if (d.find_first_of(" \t@,") != std::string::npos) throw ValidationError("invalid domain: " + d);
    return d;
}

}  // namespace

TrustedDomainList::TrustedDomainList(const std::vector<std::string>& domains) {
    for (const auto& d : domains) domains_.insert(normalize_domain(d));
}

TrustedDomainList TrustedDomainList::parse(std::string_view text) {
    TrustedDomainList list;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        std::string_view view(line);
        if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
        view = trim(view);
        if (view.empty()) continue;
        list.domains_.insert(normalize_domain(view));
    }
    return list;
}

TrustedDomainList TrustedDomainList::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trusted-domain file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool TrustedDomainList::contains(std::string_view domain) const {
    return domains_.contains(lower(domain));
}

std::string email_domain(std::string_view email) {
    const auto at = email.find('@');
    if (at == std::string_view::npos || email.find('@', at + 1) != std::string_view::npos) {
        throw ValidationError("malformed email address");
    }
    if (at == 0 || at + 1 == email.size()) throw ValidationError("malformed email address");
    const auto domain = email.substr(at + 1);
    if (domain.find_first_of(" \t\r\n") != std::string_view::npos) {
        throw ValidationError("malformed email address");
    }
    return lower(domain);
}

bool verify_email_domain(std::string_view email, const TrustedDomainList& list) {
    return list.contains(email_domain(email));
}

std::vector<TrustRecord> recompute_certifications(std::vector<TrustRecord> records,
                                                  const TrustParams& params) {
    std::map<ContributorId, std::size_t> index;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!index.emplace(records[i].account, i).second) {
            throw ValidationError("duplicate trust record for " + records[i].account.value);
        }
    }
    for (auto& r : records) {
        if (std::find(r.vouches_received.begin(), r.vouches_received.end(), r.account) !=
            r.vouches_received.end()) {
            throw ValidationError("account vouches for itself: " + r.account.value);
        }
        std::sort(r.vouches_received.begin(), r.vouches_received.end());
        r.vouches_received.erase(std::unique(r.vouches_received.begin(), r.vouches_received.end()),
                                 r.vouches_received.end());
        r.certified = r.email_verified;
        r.vouching_power = r.email_verified ? 1.0 : 0.0;
    }
    // Certification only grows, so this ends after at most |records| rounds.
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& r : records) {
            if (r.certified) continue;
            double power = 0.0;
            for (const auto& v : r.vouches_received) {
                const auto it = index.find(v);
                if (it != index.end()) power += records[it->second].vouching_power;
            }
            if (power >= params.threshold) {
                r.certified = true;
                r.vouching_power = params.damping;
                changed = true;
            }
        }
    }
    return records;
}

TrustState TrustState::from_records(std::vector<TrustRecord> records, TrustParams params) {
    TrustState state(params);
    for (auto& r : recompute_certifications(std::move(records), params)) {
        state.records_[r.account] = std::move(r);
    }
    return state;
}

void TrustState::add_account(const ContributorId& account) {
    if (account.value.empty()) throw ValidationError("empty account id");
    if (records_.contains(account)) return;
    records_[account].account = account;
}

void TrustState::set_email(const ContributorId& account, std::optional<std::string> domain,
                           bool verified) {
    auto it = records_.find(account);
    if (it == records_.end()) throw ValidationError("unknown account: " + account.value);
    it->second.email_domain = std::move(domain);
    it->second.email_verified = verified;
    refresh();
}

bool TrustState::add_vouch(const ContributorId& from, const ContributorId& to) {
    if (from == to) throw ValidationError("an account cannot vouch for itself");
    const auto src = records_.find(from);
    const auto dst = records_.find(to);
    if (src == records_.end() || dst == records_.end()) {
        throw ValidationError("vouch references an unknown account");
    }
    if (!(src->second.vouching_power > 0.0)) {
        throw ValidationError("voucher has no vouching power: " + from.value);
    }
    auto& list = dst->second.vouches_received;
    if (std::find(list.begin(), list.end(), from) != list.end()) return false;
    list.push_back(from);
    refresh();
    return true;
}

bool TrustState::contains(const ContributorId& account) const { return records_.contains(account); }

const TrustRecord& TrustState::record(const ContributorId& account) const {
    const auto it = records_.find(account);
    if (it == records_.end()) throw ValidationError("unknown account: " + account.value);
    return it->second;
}

std::vector<TrustRecord> TrustState::records() const {
    std::vector<TrustRecord> out;
    out.reserve(records_.size());
    for (const auto& [_, r] : records_) out.push_back(r);
    return out;
}

std::set<ContributorId> TrustState::certified() const {
    std::set<ContributorId> out;
    for (const auto& [id, r] : records_) {
        if (r.certified) out.insert(id);
    }
    return out;
}

void TrustState::refresh() {
    for (auto& r : recompute_certifications(records(), params_)) records_[r.account] = std::move(r);
}

}  // namespace pairscore
