#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "xlat/design.hpp"
#include "xlat/extraction.hpp"

namespace xlat {

inline constexpr const char* kToolVersion = "xlat 0.3.0";
inline constexpr int kSchemaVersion = 1;

// ---- Touchstone v1 -------------------------------------------------------

enum class TouchstoneFormat { RI, MA, DB };

TouchstoneFormat parse_touchstone_format(const std::string& text);

/// Raw content of a .s1p/.s2p file. A single data line is legal here even
/// though sweeps need two points; `sweep()` and `one_port()` enforce that.
struct TouchstoneData {
  int ports = 2;
  std::vector<double> frequencies_hz;
  /// One matrix per line; for one-port files only (0,0) is used.
  std::vector<Matrix2c> s;
  RefPair refs{cplx{50.0}, cplx{50.0}};
  /// '!' comment lines, without the leading '!'.
  std::vector<std::string> comments;
  std::string source;

  SweepResponse sweep() const;
  MeasuredOnePort one_port() const;
};

/// Port count from the extension (.s1p / .s2p, case-insensitive).
int touchstone_ports(const std::filesystem::path& path);

TouchstoneData parse_touchstone(std::string_view text, int ports, std::string source = {});
/// Honors a "<path>.refs.json" sidecar when present.
TouchstoneData read_touchstone(const std::filesystem::path& path);

std::string format_touchstone(const SweepResponse& r, TouchstoneFormat format = TouchstoneFormat::MA,
                              const std::vector<std::string>& comments = {}, bool allow_complex_refs = false);
/// Writes a .s2p. Complex references need `sidecar`, which also writes
/// "<path>.refs.json" and stamps the data as power-wave renormalized.
void write_touchstone(const SweepResponse& r, const std::filesystem::path& path,
                      TouchstoneFormat format = TouchstoneFormat::MA, bool sidecar = false,
                      const std::vector<std::string>& comments = {});
void write_touchstone(const FrequencyGrid& grid, const std::vector<cplx>& s11, double z0,
                      const std::filesystem::path& path, TouchstoneFormat format = TouchstoneFormat::MA,
                      const std::vector<std::string>& comments = {});

std::filesystem::path sidecar_path(const std::filesystem::path& touchstone);

// ---- files ---------------------------------------------------------------

/// Write via a temporary file in the same directory and rename over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
std::string read_file(const std::filesystem::path& path);

/// Locale-independent shortest round-trip decimal.
std::string format_number(double v);

// ---- design documents ----------------------------------------------------

struct SweepSpec {
  double f_start_hz = 0.0;
  double f_stop_hz = 0.0;
  std::size_t n_points = 0;
  Spacing spacing = Spacing::Linear;

  FrequencyGrid grid() const;
};

struct DesignDocument {
  FilterDesign design;
  std::map<std::string, ResonatorGeometry> geometry;
  SweepSpec sweep;
  MatchPlan match;
  std::vector<Stopband> stopbands;
  std::vector<FreeParameter> free;
};

DesignDocument parse_design(const nlohmann::json& j);
DesignDocument load_design(const std::filesystem::path& path);
nlohmann::json design_to_json(const DesignDocument& doc);
void save_design(const DesignDocument& doc, const std::filesystem::path& path);

MbvdParams parse_resonator(const nlohmann::json& j);
nlohmann::json resonator_to_json(const MbvdParams& p);

TargetSpec parse_target_spec(const nlohmann::json& j);
TargetSpec load_target_spec(const std::filesystem::path& path);

// ---- reports -------------------------------------------------------------

std::string metrics_csv(const FilterMetrics& m);
/// One row per labelled design; all rows must have the same stopband count.
std::string comparison_csv(const std::vector<std::pair<std::string, FilterMetrics>>& rows);
std::string history_csv(const OptimizeResult& r, const std::vector<FreeParameter>& free);
nlohmann::json match_report(const MatchSolution& sol);
nlohmann::json fit_params_json(const FitResult& fit);
/// Per-branch table, preceded by the loss caveat as a '#' comment.
std::string fit_report_csv(const FitResult& fit);

}  // namespace xlat
