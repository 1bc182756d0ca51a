#include "opacity/report.hpp"

#include <cstdio>

#include "json.hpp"

namespace opacity {

namespace {

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            return out;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// GroupSummary labels are "<language>,<direction>".
std::pair<std::string, std::string> split_label(const std::string& label) {
    std::size_t pos = label.rfind(',');
    return {label.substr(0, pos), label.substr(pos + 1)};
}

}  // namespace

std::vector<CompressibilityResult> parse_results_csv(std::string_view text) {
    auto lines = split(text, '\n');
    if (lines.empty()) throw ParseError("results CSV: empty input");

    static const char* kColumns[] = {"language", "direction", "seed",
                                     "L_cond",   "L_uncond",  "C",
                                     "I_bits"};
    auto header = split(lines[0], ',');
    if (!header.empty() && !header.back().empty() &&
        header.back().back() == '\r')
        header.back().pop_back();
    for (const char* col : kColumns) {
        bool found = false;
        for (const auto& h : header)
            if (h == col) found = true;
        if (!found)
            throw ParseError(std::string("results CSV: missing column '") +
                             col + "'");
    }
    for (const auto& h : header) {
        bool known = false;
        for (const char* col : kColumns)
            if (h == col) known = true;
        if (!known)
            throw ParseError("results CSV: unknown column '" + h + "'");
    }
    std::vector<int> index(std::size(kColumns));
    for (std::size_t c = 0; c < std::size(kColumns); ++c)
        for (std::size_t h = 0; h < header.size(); ++h)
            if (header[h] == kColumns[c]) index[c] = static_cast<int>(h);

    std::vector<CompressibilityResult> out;
    for (std::size_t ln = 1; ln < lines.size(); ++ln) {
        std::string_view line = lines[ln];
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != header.size())
            throw ParseError("results CSV: wrong cell count", ln + 1);
        try {
            CompressibilityResult r;
            r.language = cells[index[0]];
            r.direction = direction_from_string(cells[index[1]]);
            r.seed = std::stoull(cells[index[2]]);
            r.l_cond = std::stod(cells[index[3]]);
            r.l_uncond = std::stod(cells[index[4]]);
            r.c = std::stod(cells[index[5]]);
            r.i_bits = std::stod(cells[index[6]]);
            out.push_back(std::move(r));
        } catch (const std::invalid_argument&) {
            throw ParseError("results CSV: malformed number", ln + 1);
        } catch (const std::out_of_range&) {
            throw ParseError("results CSV: number out of range", ln + 1);
        }
    }
    return out;
}

std::string summary_csv(const std::vector<GroupSummary>& groups) {
    std::string out = "language,direction,n,mean_C,sd,ci_lo,ci_hi\n";
    for (const auto& g : groups) {
        auto [language, direction] = split_label(g.label);
        out += language + "," + direction + "," + std::to_string(g.n) + "," +
               fmt(g.mean) + "," + fmt(g.sd) + "," + fmt(g.ci_lo) + "," +
               fmt(g.ci_hi) + "\n";
    }
    return out;
}

std::string make_plot_spec_json(const std::vector<GroupSummary>& groups) {
    nlohmann::json spec;
    spec["schema_version"] = 1;
    spec["kind"] = "grouped_interval_chart";
    spec["x"] = {{"field", "language"}, {"label", "language"}};
    spec["y"] = {{"field", "mean_C"},
                 {"label", "mutual compressibility"},
                 {"interval", {"ci_lo", "ci_hi"}}};
    spec["group"] = {{"field", "direction"}};
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& g : groups) {
        auto [language, direction] = split_label(g.label);
        rows.push_back({{"language", language},
                        {"direction", direction},
                        {"n", g.n},
                        {"mean_C", g.mean},
                        {"sd", g.sd},
                        {"ci_lo", g.ci_lo},
                        {"ci_hi", g.ci_hi}});
    }
    spec["rows"] = std::move(rows);
    return spec.dump(2);
}

void validate_plot_spec(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("plot spec: not valid JSON: ") + e.what());
    }
    auto require = [&](const nlohmann::json& obj, const char* field,
                       const char* type) {
        if (!obj.contains(field))
            throw Error(std::string("plot spec: missing field '") + field +
                        "'");
        const auto& v = obj[field];
        bool ok = (std::string_view(type) == "string" && v.is_string()) ||
                  (std::string_view(type) == "number" && v.is_number()) ||
                  (std::string_view(type) == "object" && v.is_object()) ||
                  (std::string_view(type) == "array" && v.is_array());
        if (!ok)
            throw Error(std::string("plot spec: field '") + field +
                        "' must be " + type);
    };
    require(j, "schema_version", "number");
    if (j["schema_version"].get<int>() != 1)
        throw Error("plot spec: unsupported schema_version");
    require(j, "kind", "string");
    if (j["kind"].get<std::string>() != "grouped_interval_chart")
        throw Error("plot spec: unsupported kind");
    require(j, "x", "object");
    require(j["x"], "field", "string");
    require(j, "y", "object");
    require(j["y"], "field", "string");
    require(j["y"], "interval", "array");
    if (j["y"]["interval"].size() != 2)
        throw Error("plot spec: y.interval must name two fields");
    require(j, "group", "object");
    require(j["group"], "field", "string");
    require(j, "rows", "array");
    for (const auto& row : j["rows"]) {
        if (!row.is_object()) throw Error("plot spec: row must be an object");
        for (const char* f : {"language", "direction"}) require(row, f, "string");
        for (const char* f : {"n", "mean_C", "sd", "ci_lo", "ci_hi"})
            require(row, f, "number");
    }
}

}  // namespace opacity
