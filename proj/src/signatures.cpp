#include "signatures.h"

#include <fstream>
#include <set>
#include <sstream>

#include "util.h"

namespace apiary {

std::optional<SignatureSet> SignatureSet::parse(
    const std::string& text, std::vector<std::string>& errors) {
    SignatureSet out;
    std::optional<SignatureRule> current;
    bool current_bad = false;

    auto finish = [&] {
        if (current && !current_bad) {
            if (current->path_pattern.empty()) {
                errors.push_back("rule \"" + current->label +
                                 "\": missing path pattern");
            } else {
                out.rules_.push_back(std::move(*current));
            }
        }
        current.reset();
        current_bad = false;
    };

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) {
            finish();
            continue;
        }
        if (t[0] == '#') continue;

        auto sp = t.find(' ');
        std::string field = sp == std::string::npos ? t : t.substr(0, sp);
        std::string rest = sp == std::string::npos ? "" : trim(t.substr(sp + 1));

        if (field == "rule") {
            finish();
            if (rest.empty()) {
                errors.push_back("line " + std::to_string(lineno) +
                                 ": rule without a label");
                current_bad = true;
                current.emplace();
                continue;
            }
            current.emplace();
            current->label = rest;
            continue;
        }
        if (!current) {
            errors.push_back("line " + std::to_string(lineno) + ": field '" +
                             field + "' outside a rule stanza");
            continue;
        }
        if (field == "method") {
            current->method = rest;
        } else if (field == "path") {
            current->path_pattern = rest;
            try {
                current->path_regex =
                    std::regex(rest, std::regex::ECMAScript);
            } catch (const std::regex_error& e) {
                errors.push_back("line " + std::to_string(lineno) +
                                 ": invalid pattern: " + e.what());
                current_bad = true;
            }
        } else if (field == "header") {
            auto hsp = rest.find(' ');
            if (hsp == std::string::npos) {
                errors.push_back("line " + std::to_string(lineno) +
                                 ": header needs a name and a substring");
                current_bad = true;
            } else {
                current->header = {rest.substr(0, hsp),
                                   trim(rest.substr(hsp + 1))};
            }
        } else if (field == "body") {
            current->body_substring = rest;
        } else {
            errors.push_back("line " + std::to_string(lineno) +
                             ": unknown field '" + field + "'");
            current_bad = true;
        }
    }
    finish();

    if (!errors.empty()) return std::nullopt;
    return out;
}

std::optional<SignatureSet> SignatureSet::load_file(
    const std::string& path, std::vector<std::string>& errors) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        errors.push_back("cannot open rules file: " + path);
        return std::nullopt;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), errors);
}

std::vector<std::string> SignatureSet::match(
    const std::string& method, const std::string& path_and_query,
    const std::vector<std::pair<std::string, std::string>>& headers,
    const std::string& body) const {
    std::set<std::string> hits;
    for (const auto& rule : rules_) {
        if (rule.method && *rule.method != method) continue;
        if (!std::regex_match(path_and_query, rule.path_regex)) continue;
        if (rule.header) {
            bool found = false;
            for (const auto& [k, v] : headers) {
                if (iequals(k, rule.header->first) &&
                    contains(v, rule.header->second)) {
                    found = true;
                    break;
                }
            }
            if (!found) continue;
        }
        if (rule.body_substring && !contains(body, *rule.body_substring))
            continue;
        hits.insert(rule.label);
    }
    return {hits.begin(), hits.end()};
}

}  // namespace apiary
