#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>

#include "qp/config.hpp"
#include "qp/errors.hpp"
#include "qp/verify.hpp"

// Runs every acceptance criterion on the desk configuration and prints one line per criterion.
int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : QP_ACCEPTANCE_CONFIG;
  qp::RunConfig cfg;
  try {
    cfg = qp::load_config(path);
  } catch (const qp::Error& e) {
    std::cerr << "cannot load " << path << ": " << e.what() << '\n';
    return 2;
  }
  qp::VerifyOptions opts;
  std::ostringstream report;
  const auto records = qp::run_verify(cfg, opts, report, [](const qp::CheckRecord& r) {
    const char* tag = r.status == qp::CheckStatus::Pass ? "PASS" : r.status == qp::CheckStatus::Fail ? "FAIL" : "NONC";
    std::printf("%s %2d %-22s %7.2fs / %4.0fs", tag, r.id, r.name.c_str(), r.runtime, r.budget);
    for (const auto& n : r.notes) std::printf("  [%s]", n.c_str());
    std::printf("\n");
    std::fflush(stdout);
  });
  int passed = 0;
  for (const auto& r : records) passed += r.status == qp::CheckStatus::Pass;
  std::printf("%d/%zu criteria passed\n", passed, records.size());
  std::cout << "\nreport:\n" << report.str();
  return qp::exit_code(records);
}
