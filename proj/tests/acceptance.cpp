// Runs the acceptance criteria and prints one line per criterion.
//   acceptance                   all criteria, full profile
//   acceptance --criterion 7     a single criterion
//   acceptance --profile fast    reduced sample sizes
//   acceptance --json out.json   also write the reports

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "pam/error.hpp"
#include "pam/verify.hpp"

int main(int argc, char** argv) {
  using pam::verify::Profile;
  std::vector<int> ids;
  Profile profile = Profile::Full;
  std::string json_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      ids.push_back(std::stoi(argv[++i]));
    } else if (arg == "--profile" && i + 1 < argc) {
      const std::string p = argv[++i];
      profile = p == "fast" ? Profile::Fast : Profile::Full;
    } else if (arg == "--json" && i + 1 < argc) {
      json_path = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--criterion N]... [--profile fast|full] [--json path]\n";
      return 2;
    }
  }
  if (ids.empty()) {
    for (int id = 1; id <= pam::verify::kCriteria; ++id) ids.push_back(id);
  }

  int failures = 0;
  pam::verify::json all = pam::verify::json::array();
  for (int id : ids) {
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    std::string detail;
    try {
      const pam::verify::Report rep = pam::verify::run_criterion(id, profile);
      pass = rep.pass;
      detail = rep.statistics.dump();
      all.push_back(rep.to_json());
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!pass) ++failures;
    std::printf("criterion %2d %-24s %s  (%.1f s)\n", id, pam::verify::criterion_name(id).c_str(),
                pass ? "PASS" : "FAIL", secs);
    if (detail.size() > 1500) detail = detail.substr(0, 1500) + " ...";
    std::printf("    %s\n", detail.c_str());
    std::fflush(stdout);
  }
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    out << all.dump(2) << '\n';
  }
  return failures == 0 ? 0 : 1;
}
