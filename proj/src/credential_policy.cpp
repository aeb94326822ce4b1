#include "credential_policy.h"

namespace apiary {

CredentialPolicy CredentialPolicy::make_accept_all() {
    CredentialPolicy p;
    p.phase_ = Phase::accept_all;
    return p;
}

CredentialPolicy CredentialPolicy::make_allowlist(
    std::vector<std::pair<std::string, std::string>> pairs) {
    CredentialPolicy p;
    p.phase_ = Phase::allowlist;
    p.pairs_.insert(pairs.begin(), pairs.end());
    return p;
}

CredentialPolicy CredentialPolicy::make_single(std::string username,
                                               std::string password) {
    CredentialPolicy p;
    p.phase_ = Phase::single;
    p.pairs_.insert({std::move(username), std::move(password)});
    return p;
}

const std::vector<std::pair<std::string, std::string>>&
CredentialPolicy::default_allowlist_pairs() {
    static const std::vector<std::pair<std::string, std::string>> pairs = {
        {"admin", "1234"},
        {"root", ""},
        {"admin", ""},
        {"0", ""},
        {"", "root"},
        {"1234", "1234"},
        {"admin", "admin"},
        {"admin", "1234567890"},
        {"root", "admin"},
    };
    return pairs;
}

bool CredentialPolicy::accepts(const std::string& username,
                               const std::string& password) const {
    if (phase_ == Phase::accept_all) return true;
    return pairs_.count({username, password}) > 0;
}

}  // namespace apiary
