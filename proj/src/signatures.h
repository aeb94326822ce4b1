#pragma once

#include <optional>
#include <regex>
#include <string>
#include <utility>
#include <vector>

namespace apiary {

// One attack-detection rule. Matching is a pure function of the request:
// method (when present) must equal, the anchored pattern must match the
// whole path+query, and header/body predicates (when present) must hold.
struct SignatureRule {
    std::string label;
    std::optional<std::string> method;
    std::string path_pattern;
    std::regex path_regex;
    std::optional<std::pair<std::string, std::string>> header;  // name, substr
    std::optional<std::string> body_substring;
};

class SignatureSet {
public:
    // stanza format, rules separated by blank lines:
    //   rule <label up to end of line>
    //   method GET
    //   path ^/device\.rsp\?opt=user&cmd=list$
    //   header Cookie uid=admin
    //   body <substring to end of line>
    // '#' starts a comment. Invalid regexes and unknown fields are load
    // errors (line-anchored); matching never fails at runtime.
    static std::optional<SignatureSet> parse(const std::string& text,
                                             std::vector<std::string>& errors);
    static std::optional<SignatureSet> load_file(
        const std::string& path, std::vector<std::string>& errors);

    // sorted unique labels of every matching rule
    std::vector<std::string> match(
        const std::string& method, const std::string& path_and_query,
        const std::vector<std::pair<std::string, std::string>>& headers,
        const std::string& body) const;

    std::size_t size() const { return rules_.size(); }
    const std::vector<SignatureRule>& rules() const { return rules_; }

private:
    std::vector<SignatureRule> rules_;
};

}  // namespace apiary
