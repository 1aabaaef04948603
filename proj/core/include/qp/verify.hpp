#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "qp/config.hpp"

namespace qp {

enum class CheckStatus { Pass, Fail, NonConvergent };
const char* to_string(CheckStatus s);

struct CheckRecord {
  int id = 0;
  std::string name;
  std::string checks;  // what is being verified, in words
  CheckStatus status = CheckStatus::Pass;
  std::vector<std::pair<std::string, double>> measured;
  std::vector<std::pair<std::string, double>> threshold;
  std::vector<std::string> notes;
  double runtime = 0.0;  // seconds
  double budget = 0.0;   // seconds

  void measure(const std::string& key, double v) { measured.emplace_back(key, v); }
  void limit(const std::string& key, double v) { threshold.emplace_back(key, v); }
  // Marks the record failed when ok is false and remembers why.
  void require(bool ok, const std::string& why);
};

struct Criterion {
  int id = 0;
  std::string name;
  std::string checks;
  double budget = 0.0;
  std::function<void(const RunConfig&, CheckRecord&)> run;
};

const std::vector<Criterion>& criteria();

struct VerifyOptions {
  std::vector<int> only;     // empty runs every criterion
  bool timing = true;        // false drops runtimes from the report and skips budget checks
};

// Runs one criterion; numerical failures become NonConvergent, check violations Fail.
CheckRecord run_criterion(const Criterion& c, const RunConfig& cfg, const VerifyOptions& opts = {});

std::string to_json_line(const CheckRecord& r, bool timing = true);

// Runs the selected criteria in order, streams one JSON line per record to out and returns the records.
std::vector<CheckRecord> run_verify(const RunConfig& cfg, const VerifyOptions& opts, std::ostream& out,
                                    const std::function<void(const CheckRecord&)>& on_record = {});

// 0 when every record passes, 3 when any is NonConvergent and none Fail, 1 otherwise.
int exit_code(const std::vector<CheckRecord>& records);

// Line-by-line comparison of two report or CSV files, ignoring runtime fields.
struct DiffResult {
  bool identical = true;
  std::size_t lines_a = 0, lines_b = 0;
  std::vector<std::string> differences;
};
DiffResult diff_outputs(const std::string& path_a, const std::string& path_b);

}  // namespace qp
