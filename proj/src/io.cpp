#include "omd/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace omd {

namespace {

using nlohmann::json;

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_all(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << bytes;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

json vec_to_json(const Vec& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vec vec_from_json(const json& arr) {
  Vec v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[Eigen::Index(i)] = arr[i].get<double>();
  return v;
}

}  // namespace

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json instance_to_json(const OnlineProblem& problem) {
  json j;
  j["n"] = problem.dim();
  j["m"] = int(problem.constraints.size());
  j["seed"] = problem.seed;
  json losses = json::array();
  for (const auto& f : problem.losses) {
    losses.push_back({{"a", vec_to_json(f.a)}, {"b", f.b}, {"mu", f.mu}});
  }
  j["losses"] = std::move(losses);
  json constraints = json::array();
  for (const auto& c : problem.constraints) {
    constraints.push_back({{"alpha", vec_to_json(c.alpha)},
                           {"beta", c.beta},
                           {"mu_hat", c.mu_hat}});
  }
  j["constraints"] = std::move(constraints);
  return j;
}

OnlineProblem instance_from_json(const json& j) {
  OnlineProblem problem;
  const int n = j.at("n").get<int>();
  problem.setup = ProxSetup::euclidean_ball(n, 1.0);
  problem.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& f : j.at("losses")) {
    LossTerm term;
    term.a = vec_from_json(f.at("a"));
    term.b = f.at("b").get<double>();
    term.mu = f.at("mu").get<double>();
    if (term.a.size() != n) {
      throw std::invalid_argument("instance_from_json: loss dim mismatch");
    }
    problem.losses.push_back(std::move(term));
  }
  for (const auto& c : j.at("constraints")) {
    ConstraintTerm term;
    term.alpha = vec_from_json(c.at("alpha"));
    term.beta = c.at("beta").get<double>();
    term.mu_hat = c.at("mu_hat").get<double>();
    if (term.alpha.size() != n) {
      throw std::invalid_argument("instance_from_json: constraint dim mismatch");
    }
    problem.constraints.push_back(std::move(term));
  }
  if (int(problem.constraints.size()) != j.at("m").get<int>()) {
    throw std::invalid_argument("instance_from_json: m mismatch");
  }
  finalize_parameters(problem);
  return problem;
}

void save_instance(const std::filesystem::path& path,
                   const OnlineProblem& problem) {
  write_all(path, instance_to_json(problem).dump(2) + "\n");
}

OnlineProblem load_instance(const std::filesystem::path& path) {
  return instance_from_json(json::parse(read_all(path)));
}

namespace {

json config_header(const RunTrace& trace, std::uint64_t seed) {
  const SolverConfig& c = trace.config;
  json j;
  j["algorithm"] = to_string(c.algorithm);
  j["epsilon"] = c.epsilon;
  j["seed"] = seed;
  j["target_productive_T"] = c.target_productive_T;
  j["step_cap"] = c.effective_step_cap();
  j["mu_global"] = c.mu_global;
  if (c.regularizer) {
    j["regularizer"] = {{"M_d", c.regularizer->M_d}, {"A2", c.regularizer->A2}};
  } else {
    j["regularizer"] = nullptr;
  }
  j["mu_schedule"] = {
      {"kind", c.mu_schedule.kind == MuSchedule::Kind::Power ? "power"
                                                             : "from_problem"},
      {"alpha", c.mu_schedule.alpha}};
  const char* lp = c.lambda_policy.kind == LambdaPolicy::Kind::Adaptive
                       ? "adaptive"
                       : (c.lambda_policy.kind == LambdaPolicy::Kind::FixedFirst
                              ? "fixed_first"
                              : "zero");
  j["lambda_policy"] = {{"kind", lp}, {"lambda1", c.lambda_policy.lambda1}};
  j["termination"] = trace.terminated == Termination::ReachedT
                         ? "reached_T"
                         : "step_cap_exceeded";
  j["T"] = trace.productive_count;
  j["T_J"] = trace.nonproductive_count;
  j["m_bound"] = trace.m_bound;
  return j;
}

}  // namespace

void save_trace_csv(const std::filesystem::path& path, const RunTrace& trace,
                    std::uint64_t seed) {
  std::ostringstream out;
  out << "# " << config_header(trace, seed).dump() << "\n";
  out << "t,kind,eta,lambda,g_value,loss_index,objective_value\n";
  for (const auto& s : trace.steps) {
    out << s.t << ','
        << (s.kind == StepKind::Productive ? "productive" : "nonproductive")
        << ',' << fmt_double(s.eta) << ',' << fmt_double(s.lambda) << ','
        << fmt_double(s.g_value) << ',';
    if (s.kind == StepKind::Productive) {
      out << s.loss_index << ',' << fmt_double(s.f_value);
    } else {
      out << ',';
    }
    out << '\n';
  }
  write_all(path, out.str());
}

TraceFile load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  TraceFile file;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw std::runtime_error("trace csv: missing JSON header line");
  }
  file.header = json::parse(line.substr(2));
  if (!std::getline(in, line)) {
    throw std::runtime_error("trace csv: missing column header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 7) {
      throw std::runtime_error("trace csv: malformed row: " + line);
    }
    TraceRow row;
    row.t = std::stoi(fields[0]);
    row.kind = fields[1];
    row.eta = std::stod(fields[2]);
    row.lambda = std::stod(fields[3]);
    row.g_value = std::stod(fields[4]);
    row.loss_index = fields[5].empty() ? -1 : std::stoi(fields[5]);
    row.objective_value = fields[6].empty()
                              ? std::numeric_limits<double>::quiet_NaN()
                              : std::stod(fields[6]);
    file.rows.push_back(std::move(row));
  }
  return file;
}

json report_to_json(const AnalysisReport& report) {
  json j;
  j["regret"] = report.regret;
  j["delta"] = std::isnan(report.delta) ? json(nullptr) : json(report.delta);
  j["T"] = report.T;
  j["T_J"] = report.T_J;
  j["epsilon_used"] = report.epsilon_used;
  j["epsilon_schedule"] = to_string(report.epsilon_schedule);
  j["oracle_residual"] = report.oracle_residual;
  j["tj_ratio"] = report.tj_ratio;
  j["regret_nonnegative"] = report.regret_nonnegative;
  json checks = json::array();
  for (const auto& c : report.bound_checks) {
    checks.push_back({{"name", c.name},
                      {"lhs", std::isnan(c.lhs) ? json(nullptr) : json(c.lhs)},
                      {"rhs", std::isnan(c.rhs) ? json(nullptr) : json(c.rhs)},
                      {"status", to_string(c.status)},
                      {"note", c.note}});
  }
  j["bound_checks"] = std::move(checks);
  j["passed"] = report.passed_count();
  j["evaluated"] = report.evaluated_count();
  return j;
}

void save_report_json(const std::filesystem::path& path,
                      const AnalysisReport& report) {
  write_all(path, report_to_json(report).dump(2) + "\n");
}

void print_report_table(std::ostream& os, const AnalysisReport& report,
                        const std::string& title) {
  os << title << ": T=" << report.T << " T_J=" << report.T_J
     << " eps=" << report.epsilon_used << " regret=" << report.regret;
  if (!std::isnan(report.delta)) os << " delta=" << report.delta;
  os << " (oracle residual " << report.oracle_residual << ")\n";
  for (const auto& c : report.bound_checks) {
    os << "  " << std::left << std::setw(34) << c.name << std::right << " ["
       << to_string(c.status) << "]";
    if (c.status != CheckStatus::Skipped) {
      os << "  lhs=" << std::setw(13) << c.lhs << "  rhs=" << std::setw(13)
         << c.rhs << "  margin=" << c.margin();
    }
    if (!c.note.empty()) os << "  (" << c.note << ")";
    os << "\n";
  }
}

void save_summary_csv(const std::filesystem::path& path,
                      const std::vector<SummaryRow>& rows) {
  std::ostringstream out;
  out << "algorithm,seed,T,T_J,wall_time_s,delta,mean_productive_objective,"
         "regret,bounds_passed,error\n";
  for (const auto& r : rows) {
    char wall[32];
    std::snprintf(wall, sizeof wall, "%.3f", r.wall_time_s);
    out << r.algorithm << ',' << r.seed << ',' << r.T << ',' << r.T_J << ','
        << wall << ',' << (std::isnan(r.delta) ? "" : fmt_double(r.delta))
        << ',' << fmt_double(r.mean_productive_objective) << ','
        << fmt_double(r.regret) << ',' << r.bounds_passed << ',' << r.error
        << '\n';
  }
  write_all(path, out.str());
}

std::vector<SummaryRow> load_summary_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<SummaryRow> rows;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 10) {
      throw std::runtime_error("summary csv: malformed row: " + line);
    }
    SummaryRow r;
    r.algorithm = f[0];
    r.seed = std::stoull(f[1]);
    r.T = std::stoi(f[2]);
    r.T_J = std::stoi(f[3]);
    r.wall_time_s = std::stod(f[4]);
    r.delta = f[5].empty() ? std::numeric_limits<double>::quiet_NaN()
                           : std::stod(f[5]);
    r.mean_productive_objective = std::stod(f[6]);
    r.regret = std::stod(f[7]);
    r.bounds_passed = f[8];
    r.error = f[9];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string summary_without_wall_time(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    auto fields = split_csv_line(line);
    if (fields.size() >= 5) fields[4] = "";
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out << ',';
      out << fields[i];
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace omd
