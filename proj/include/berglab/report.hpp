#pragma once

#include "berglab/experiments.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace berglab {

using Json = nlohmann::ordered_json;

inline constexpr int kReportSchemaVersion = 1;

/// Non-finite doubles become null so that every number in a report is finite.
Json finite_or_null(double v);

Json to_json(const DomainSpec& d);
Json to_json(const MeshParams& p);
Json to_json(const Mesh& m);
Json to_json(const BergReport& r, bool with_samples = false);
Json to_json(const SingularCoefficientReport& r);
Json to_json(const CriticalBResult& r);
Json to_json(const PerturbationPoint& p);
Json to_json(const PerturbationStudy& s);
Json to_json(const ContinuityResult& r);
Json to_json(const SweepRow& r);
Json to_json(const ConvergenceResult& r);
Json to_json(const EquivalenceSweep& s);
Json to_json(const LevelSet& ls);
Json to_json(const DualStructure& d);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex16(std::uint64_t v);

/// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Stable text form: two-space indentation and a trailing newline.
std::string dump_report(const Json& j);

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Line chart with linear axes; one polyline per series.
void write_line_plot_svg(const std::vector<PlotSeries>& series, const std::string& title, const std::string& x_label,
                         const std::string& y_label, std::ostream& os);

} // namespace berglab
