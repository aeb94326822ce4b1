#pragma once

#include <set>
#include <string>
#include <utility>
#include <vector>

namespace apiary {

// Staged login acceptance for the shell honeypot. Phase 1 takes any pair to
// maximize captured credentials, phase 2 takes a curated allowlist, phase 3
// takes exactly one hard pair.
class CredentialPolicy {
public:
    enum class Phase { accept_all, allowlist, single };

    static CredentialPolicy make_accept_all();
    static CredentialPolicy make_allowlist(
        std::vector<std::pair<std::string, std::string>> pairs);
    static CredentialPolicy make_single(std::string username,
                                        std::string password);

    // the widely reported default credential set for IoT devices; an
    // operator's allowlist file extends it
    static const std::vector<std::pair<std::string, std::string>>&
    default_allowlist_pairs();

    bool accepts(const std::string& username,
                 const std::string& password) const;

    Phase phase() const { return phase_; }
    std::size_t allowlist_size() const { return pairs_.size(); }

private:
    Phase phase_ = Phase::accept_all;
    std::set<std::pair<std::string, std::string>> pairs_;
};

}  // namespace apiary
