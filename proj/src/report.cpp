#include "report.h"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include <json.hpp>

#include "util.h"

namespace apiary {

std::optional<ReportFormat> report_format_from_name(std::string_view name) {
    if (name == "markdown" || name == "md") return ReportFormat::markdown;
    if (name == "csv") return ReportFormat::csv;
    if (name == "json") return ReportFormat::json;
    return std::nullopt;
}

const std::vector<std::string>& report_section_names() {
    static const std::vector<std::string> names = {
        "credentials", "commands", "sessions", "clients",
        "downloads",   "geo",      "signatures"};
    return names;
}

namespace {

// one section rendered three ways from a single computation:
// a scalar block, a table, and a typed json object
struct SectionData {
    std::string title;
    std::vector<std::pair<std::string, std::string>> scalars;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
    nlohmann::ordered_json json;
};

std::string fraction_text(const std::optional<double>& f) {
    if (!f) return "undefined";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", *f);
    return buf;
}

std::string i64(std::int64_t v) { return std::to_string(v); }

SectionData build_credentials(const ReportInputs& in) {
    SectionData out;
    out.title = "Top Credentials";
    out.columns = {"rank", "username", "password", "count"};
    auto ranked = top_credentials(*in.store, in.top_n);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    int rank = 1;
    for (const auto& [pair, count] : ranked) {
        out.rows.push_back(
            {i64(rank), pair.first, pair.second, i64(count)});
        nlohmann::ordered_json row;
        row["rank"] = rank;
        row["username"] = pair.first;
        row["password"] = pair.second;
        row["count"] = count;
        rows.push_back(std::move(row));
        ++rank;
    }
    out.json["top"] = std::move(rows);
    return out;
}

SectionData build_commands(const ReportInputs& in) {
    SectionData out;
    out.title = "Top Commands";
    out.columns = {"rank", "command", "count"};
    auto ranked = top_commands(*in.store, in.top_n);
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    int rank = 1;
    for (const auto& [command, count] : ranked) {
        out.rows.push_back({i64(rank), command, i64(count)});
        nlohmann::ordered_json row;
        row["rank"] = rank;
        row["command"] = command;
        row["count"] = count;
        rows.push_back(std::move(row));
        ++rank;
    }
    out.json["top"] = std::move(rows);
    return out;
}

SectionData build_sessions(const ReportInputs& in) {
    SectionData out;
    out.title = "Session Statistics";
    SessionStats stats = session_stats(*in.store);
    out.scalars = {
        {"hits", i64(stats.hits)},
        {"login_success_sessions", i64(stats.login_success_sessions)},
        {"login_success_fraction",
         fraction_text(stats.login_success_fraction)},
        {"command_exec_sessions", i64(stats.command_exec_sessions)},
        {"command_exec_session_fraction",
         fraction_text(stats.command_exec_session_fraction)},
    };
    out.columns = {"honeypot", "sessions"};
    for (const auto& [id, count] : stats.per_honeypot)
        out.rows.push_back({id, i64(count)});

    out.json["hits"] = stats.hits;
    out.json["login_success_sessions"] = stats.login_success_sessions;
    if (stats.login_success_fraction)
        out.json["login_success_fraction"] = *stats.login_success_fraction;
    else
        out.json["login_success_fraction"] = nullptr;
    out.json["command_exec_sessions"] = stats.command_exec_sessions;
    if (stats.command_exec_session_fraction)
        out.json["command_exec_session_fraction"] =
            *stats.command_exec_session_fraction;
    else
        out.json["command_exec_session_fraction"] = nullptr;
    nlohmann::ordered_json per_honeypot;
    for (const auto& [id, count] : stats.per_honeypot)
        per_honeypot[id] = count;
    out.json["per_honeypot"] = std::move(per_honeypot);

    // http method split (shape of the paper's GET/POST percentages)
    std::map<std::string, std::int64_t> methods;
    for (const auto& env : in.store->events())
        if (env.kind == EventKind::http_request)
            ++methods[std::get<HttpEvent>(env.payload).method];
    nlohmann::ordered_json method_json;
    for (const auto& [method, count] : methods) {
        std::string label = method.empty() ? "(malformed)" : method;
        out.scalars.emplace_back("http_" + label, i64(count));
        method_json[label] = count;
    }
    out.json["http_methods"] = std::move(method_json);
    return out;
}

SectionData build_clients(const ReportInputs& in) {
    SectionData out;
    out.title = "Client Classification";
    out.columns = {"class", "sessions", "fraction"};
    auto counts = classify_sessions(*in.store, *in.classifier);
    std::int64_t total = 0;
    for (const auto& [cls, count] : counts) total += count;
    for (ClientClass cls :
         {ClientClass::bot, ClientClass::human, ClientClass::unknown}) {
        std::int64_t count = counts[cls];
        std::optional<double> frac;
        if (total > 0)
            frac = static_cast<double>(count) / static_cast<double>(total);
        std::string name(client_class_name(cls));
        out.rows.push_back({name, i64(count), fraction_text(frac)});
        nlohmann::ordered_json row;
        row["sessions"] = count;
        if (frac)
            row["fraction"] = *frac;
        else
            row["fraction"] = nullptr;
        out.json[name] = std::move(row);
    }
    return out;
}

SectionData build_downloads(const ReportInputs& in) {
    SectionData out;
    out.title = "Downloads";
    std::int64_t total = 0, fetched = 0, firmware = 0;
    std::set<std::string> distinct;
    // sha -> stored_path of one representative capture
    std::map<std::string, std::string> stored_paths;
    for (const auto& env : in.store->events()) {
        if (env.kind == EventKind::download) {
            const auto& d = std::get<DownloadEvent>(env.payload);
            ++total;
            if (d.fetched) ++fetched;
            if (!d.sha256.empty()) {
                distinct.insert(d.sha256);
                if (!d.stored_path.empty())
                    stored_paths.emplace(d.sha256, d.stored_path);
            }
        } else if (env.kind == EventKind::firmware_upload) {
            ++firmware;
        }
    }
    out.scalars = {
        {"download_events", i64(total)},
        {"fetched", i64(fetched)},
        {"distinct_files", i64(static_cast<std::int64_t>(distinct.size()))},
        {"firmware_uploads", i64(firmware)},
    };
    out.json["download_events"] = total;
    out.json["fetched"] = fetched;
    out.json["distinct_files"] = static_cast<std::int64_t>(distinct.size());
    out.json["firmware_uploads"] = firmware;

    out.columns = {"category", "files"};
    std::map<std::string, std::int64_t> categories;
    if (in.categories) {
        for (const auto& sha : distinct) {
            std::string content;
            if (in.artifacts) {
                auto it = stored_paths.find(sha);
                if (it != stored_paths.end())
                    content = in.artifacts->read(it->second).value_or("");
            }
            ReputationVerdictView view;
            const ReputationVerdictView* view_ptr = nullptr;
            if (in.reputation) {
                ReputationVerdict verdict = in.reputation->lookup(sha);
                view.malicious = verdict.malicious;
                view.family = verdict.family;
                view_ptr = &view;
            }
            ++categories[categorize_download(content, *in.categories,
                                             view_ptr)];
        }
    }
    nlohmann::ordered_json cats;
    for (const auto& [label, count] : categories) {
        out.rows.push_back({label, i64(count)});
        cats[label] = count;
    }
    out.json["categories"] = std::move(cats);
    return out;
}

SectionData build_geo(const ReportInputs& in) {
    SectionData out;
    out.title = "Top Countries";
    out.columns = {"rank", "country", "sessions"};
    auto ranked = geo_summarize(*in.store, *in.geo);
    if (ranked.size() > static_cast<std::size_t>(in.top_n))
        ranked.resize(static_cast<std::size_t>(in.top_n));
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    int rank = 1;
    for (const auto& [country, count] : ranked) {
        out.rows.push_back({i64(rank), country, i64(count)});
        nlohmann::ordered_json row;
        row["rank"] = rank;
        row["country"] = country;
        row["sessions"] = count;
        rows.push_back(std::move(row));
        ++rank;
    }
    out.json["top"] = std::move(rows);
    return out;
}

SectionData build_signatures(const ReportInputs& in) {
    SectionData out;
    out.title = "Attack Signatures";
    out.columns = {"label", "hits"};
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& [label, count] : signature_summary(*in.store)) {
        out.rows.push_back({label, i64(count)});
        nlohmann::ordered_json row;
        row["label"] = label;
        row["hits"] = count;
        rows.push_back(std::move(row));
    }
    out.json["hits"] = std::move(rows);
    return out;
}

std::string markdown_escape(const std::string& cell) {
    std::string out;
    for (char c : cell) {
        if (c == '|') out += "\\|";
        else out += c;
    }
    return out;
}

std::string csv_field(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

void render_markdown(const std::string& name, const SectionData& s,
                     std::string& out) {
    out += "## " + s.title + "\n\n";
    (void)name;
    for (const auto& [key, value] : s.scalars)
        out += "- " + key + ": " + value + "\n";
    if (!s.scalars.empty()) out += "\n";
    if (!s.rows.empty()) {
        out += "|";
        for (const auto& col : s.columns) out += " " + col + " |";
        out += "\n|";
        for (std::size_t i = 0; i < s.columns.size(); ++i) out += " --- |";
        out += "\n";
        for (const auto& row : s.rows) {
            out += "|";
            for (const auto& cell : row)
                out += " " + markdown_escape(cell) + " |";
            out += "\n";
        }
        out += "\n";
    } else if (s.scalars.empty()) {
        out += "(no data)\n\n";
    }
}

std::string render_csv_section(const SectionData& s) {
    std::string out;
    for (const auto& [key, value] : s.scalars)
        out += csv_field(key) + "," + csv_field(value) + "\n";
    if (!s.columns.empty() && !s.rows.empty()) {
        std::string header;
        for (const auto& col : s.columns) {
            if (!header.empty()) header += ",";
            header += csv_field(col);
        }
        out += header + "\n";
        for (const auto& row : s.rows) {
            std::string line;
            for (const auto& cell : row) {
                if (!line.empty()) line += ",";
                line += csv_field(cell);
            }
            out += line + "\n";
        }
    }
    return out;
}

}  // namespace

std::optional<ReportDocument> emit_report(
    const ReportInputs& inputs, ReportFormat format,
    const std::vector<std::string>& sections, std::string& error) {
    if (!inputs.store) {
        error = "report needs an event store";
        return std::nullopt;
    }
    const auto& valid = report_section_names();
    std::vector<std::string> wanted = sections;
    if (wanted.empty()) wanted = valid;
    for (const auto& name : wanted) {
        if (std::find(valid.begin(), valid.end(), name) == valid.end()) {
            error = "unknown section '" + name + "'; valid sections:";
            for (const auto& v : valid) error += " " + v;
            return std::nullopt;
        }
        if (name == "geo" && !inputs.geo) {
            error = "section 'geo' needs a geo table";
            return std::nullopt;
        }
        if (name == "clients" && !inputs.classifier) {
            error = "section 'clients' needs classifier rules";
            return std::nullopt;
        }
    }

    ReportDocument doc;
    nlohmann::ordered_json json_doc;
    for (const auto& name : wanted) {
        SectionData s;
        if (name == "credentials") s = build_credentials(inputs);
        else if (name == "commands") s = build_commands(inputs);
        else if (name == "sessions") s = build_sessions(inputs);
        else if (name == "clients") s = build_clients(inputs);
        else if (name == "downloads") s = build_downloads(inputs);
        else if (name == "geo") s = build_geo(inputs);
        else s = build_signatures(inputs);

        switch (format) {
            case ReportFormat::markdown:
                if (doc.text.empty()) doc.text = "# Honeypot Report\n\n";
                render_markdown(name, s, doc.text);
                break;
            case ReportFormat::csv:
                doc.files.emplace_back(name + ".csv",
                                       render_csv_section(s));
                break;
            case ReportFormat::json:
                json_doc[name] = std::move(s.json);
                break;
        }
    }
    if (format == ReportFormat::json) doc.text = json_doc.dump(2) + "\n";
    return doc;
}

}  // namespace apiary
