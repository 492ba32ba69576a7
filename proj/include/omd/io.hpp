#ifndef OMD_IO_HPP
#define OMD_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "omd/analysis.hpp"
#include "omd/problems.hpp"
#include "omd/solvers.hpp"

namespace omd {

// Shortest-exact decimal for CSV cells ("%.17g"); round-trips bit-exactly.
std::string fmt_double(double v);

nlohmann::json instance_to_json(const OnlineProblem& problem);
OnlineProblem instance_from_json(const nlohmann::json& j);
void save_instance(const std::filesystem::path& path,
                   const OnlineProblem& problem);
OnlineProblem load_instance(const std::filesystem::path& path);

// Trace CSV: one `# {...}` JSON header line (config echo, seed, termination),
// a column header, then rows (t, kind, eta, lambda, g_value, loss_index,
// objective_value). loss_index/objective are empty on non-productive rows.
void save_trace_csv(const std::filesystem::path& path, const RunTrace& trace,
                    std::uint64_t seed);

struct TraceRow {
  int t = 0;
  std::string kind;
  double eta = 0.0;
  double lambda = 0.0;
  double g_value = 0.0;
  int loss_index = -1;
  double objective_value = 0.0;  // NaN on non-productive rows
};

struct TraceFile {
  nlohmann::json header;
  std::vector<TraceRow> rows;
};

TraceFile load_trace_csv(const std::filesystem::path& path);

nlohmann::json report_to_json(const AnalysisReport& report);
void save_report_json(const std::filesystem::path& path,
                      const AnalysisReport& report);
void print_report_table(std::ostream& os, const AnalysisReport& report,
                        const std::string& title);

struct SummaryRow {
  std::string algorithm;
  std::uint64_t seed = 0;
  int T = 0;
  int T_J = 0;
  double wall_time_s = 0.0;
  double delta = 0.0;  // NaN when the algorithm has no certificate
  double mean_productive_objective = 0.0;
  double regret = 0.0;
  std::string bounds_passed;  // "passed/evaluated"
  std::string error;          // empty unless the run failed
};

void save_summary_csv(const std::filesystem::path& path,
                      const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> load_summary_csv(const std::filesystem::path& path);

// Summary bytes with the wall-time column blanked; determinism comparisons.
std::string summary_without_wall_time(const std::filesystem::path& path);

}  // namespace omd

#endif  // OMD_IO_HPP
