#ifndef OPACITY_REPORT_HPP
#define OPACITY_REPORT_HPP

#include <string>
#include <string_view>
#include <vector>

#include "opacity/stats.hpp"

namespace opacity {

/// Parses a results CSV (the `measure` output schema). A missing or
/// unknown column raises ParseError naming the column.
std::vector<CompressibilityResult> parse_results_csv(std::string_view text);

/// CSV layout: language,direction,n,mean_C,sd,ci_lo,ci_hi
std::string summary_csv(const std::vector<GroupSummary>& groups);

/// Declarative grouped-interval chart description (language on x, one
/// interval per direction). Rows are embedded; renderers may instead use
/// the plot-ready CSV written next to it.
std::string make_plot_spec_json(const std::vector<GroupSummary>& groups);

/// Structural check against the shipped schema
/// (schemas/plot_spec.schema.json). Throws Error naming the first
/// violated field.
void validate_plot_spec(std::string_view json_text);

}  // namespace opacity

#endif
