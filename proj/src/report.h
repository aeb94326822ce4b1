#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "analytics.h"
#include "artifact_store.h"
#include "geo.h"
#include "reputation.h"
#include "store.h"

namespace apiary {

enum class ReportFormat { markdown, csv, json };
std::optional<ReportFormat> report_format_from_name(std::string_view name);

// the full section set, in canonical order
const std::vector<std::string>& report_section_names();

struct ReportInputs {
    const EventStore* store = nullptr;
    int top_n = 10;
    const GeoTable* geo = nullptr;               // required by `geo`
    const ClassifierRules* classifier = nullptr; // required by `clients`
    const CategoryRules* categories = nullptr;   // used by `downloads`
    ArtifactStore* artifacts = nullptr;          // content for categorization
    ReputationClient* reputation = nullptr;      // optional refinement
};

// markdown/json render into `text`; csv renders one (file name, content)
// pair per section into `files`
struct ReportDocument {
    std::string text;
    std::vector<std::pair<std::string, std::string>> files;
};

// deterministic for a fixed store and inputs; unknown section names or a
// section missing its required input produce nullopt with a message
std::optional<ReportDocument> emit_report(
    const ReportInputs& inputs, ReportFormat format,
    const std::vector<std::string>& sections, std::string& error);

}  // namespace apiary
